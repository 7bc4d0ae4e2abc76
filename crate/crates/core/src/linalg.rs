//! Dense complex matrices and the small amount of numerical linear algebra
//! the rest of the crate needs: operator norms, Frobenius-orthonormal spans,
//! a Hermitian eigensolver, and an LU solve.
//!
//! Everything downstream is desk scale (dimensions in the tens), so the
//! implementations favor robustness and auditability over asymptotics: the
//! eigensolver is cyclic Jacobi (quadratically convergent, accurate to a few
//! ulps on these sizes), spans use modified Gram–Schmidt with
//! reorthogonalization, and the operator norm is the square root of the top
//! eigenvalue of the smaller Gram matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Shorthand for the scalar type used everywhere.
pub type C64 = Complex64;

/// Convenience constructor for a complex scalar.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// The matrix unit with a single 1 at position `(i, j)`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in CMatrix::from_rows"
        );
        CMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Column vector from a slice.
    pub fn col_vec(entries: &[C64]) -> Self {
        CMatrix {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> CMatrix {
        self.map(|z| z * a)
    }

    pub fn scale_re(&self, a: f64) -> CMatrix {
        self.map(|z| z * a)
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// Frobenius inner product `⟨self, other⟩ = Σ conj(self) · other`,
    /// conjugate-linear in the first slot.
    pub fn frobenius_inner(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.shape(), other.shape(), "frobenius_inner shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian defect `‖m − m*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Column-major vectorization (stack the columns) as an `rows·cols × 1`
    /// matrix. Inverse of [`CMatrix::unvec_col`].
    pub fn vec_col(&self) -> CMatrix {
        let mut data = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)]);
            }
        }
        CMatrix {
            rows: self.rows * self.cols,
            cols: 1,
            data,
        }
    }

    /// Rebuild an `rows × cols` matrix from its column-major vectorization.
    pub fn unvec_col(v: &CMatrix, rows: usize, cols: usize) -> CMatrix {
        assert_eq!(v.cols, 1, "unvec_col expects a column vector");
        assert_eq!(v.rows, rows * cols, "unvec_col length mismatch");
        let mut m = CMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = v[(j * rows + i, 0)];
            }
        }
        m
    }

    /// Horizontal concatenation of equally-tall blocks.
    pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
        assert!(!blocks.is_empty(), "hstack of nothing");
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hstack height mismatch");
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, at + j)] = b[(i, j)];
                }
            }
            at += b.cols;
        }
        out
    }

    /// Vertical concatenation of equally-wide blocks.
    pub fn vstack(blocks: &[CMatrix]) -> CMatrix {
        assert!(!blocks.is_empty(), "vstack of nothing");
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols), "vstack width mismatch");
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..cols {
                    out[(at + i, j)] = b[(i, j)];
                }
            }
            at += b.rows;
        }
        out
    }

    /// Copy `block` into `self` with its top-left corner at `(i0, j0)`.
    pub fn set_block(&mut self, i0: usize, j0: usize, block: &CMatrix) {
        assert!(i0 + block.rows <= self.rows && j0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(i0 + i, j0 + j)] = block[(i, j)];
            }
        }
    }

    /// Extract the `rows × cols` block with top-left corner at `(i0, j0)`.
    pub fn block(&self, i0: usize, j0: usize, rows: usize, cols: usize) -> CMatrix {
        assert!(i0 + rows <= self.rows && j0 + cols <= self.cols);
        CMatrix::from_fn(rows, cols, |i, j| self[(i0 + i, j0 + j)])
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl std::ops::Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape(), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, other: &CMatrix) -> CMatrix {
        self.matmul(other)
    }
}

impl std::ops::Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues ascending, V)` with the columns of `V` the matching
/// orthonormal eigenvectors, so `h ≈ V · diag(vals) · V*`.
///
/// The input is symmetrized defensively; callers should pass matrices that
/// are Hermitian up to roundoff (the usual callers pass Gram matrices).
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(h.is_square(), "eigh needs a square matrix");
    let n = h.rows();
    if n == 0 {
        return (vec![], CMatrix::zeros(0, 0));
    }
    // Work on the Hermitian part; a.hermitian_defect() is tiny for all callers.
    let mut a = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = scale * 1e-14;

    let off = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..60 {
        if off(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= scale * 1e-18 {
                    continue;
                }
                let f = apq / r; // unit-modulus phase of the pivot
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // Plane rotation J with J[p][p]=c, J[p][q]=s,
                // J[q][p]=-s·conj(f), J[q][q]=c·conj(f): zeroes a[p][q].
                let fc = f.conj();
                // Column update: a ← a·J, v ← v·J.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cth - aiq * fc * sth;
                    a[(i, q)] = aip * sth + aiq * fc * cth;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cth - viq * fc * sth;
                    v[(i, q)] = vip * sth + viq * fc * cth;
                }
                // Row update: a ← J*·a.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cth - aqk * f * sth;
                    a[(q, k)] = apk * sth + aqk * f * cth;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (vals, vecs)
}

/// Operator norm (largest singular value), accurate to `tol::OPNORM_REL`
/// relative. Computed from the top eigenvalue of the smaller Gram matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    let gram = if m.rows() <= m.cols() {
        m * &m.adjoint()
    } else {
        &m.adjoint() * m
    };
    let (vals, _) = eigh(&gram);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Solve `a · x = rhs` by LU with partial pivoting. `a` must be square.
pub fn lu_solve(a: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    assert!(a.is_square(), "lu_solve needs a square matrix");
    assert_eq!(a.rows(), rhs.rows(), "lu_solve right-hand-side mismatch");
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = rhs.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        if pivot_abs <= scale * 1e-14 {
            return Err(Error::SingularSystem { context: "lu_solve" });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            for j in 0..x.cols() {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(pivot_row, j)];
                x[(pivot_row, j)] = tmp;
            }
        }
        let piv = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / piv;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
            for j in 0..x.cols() {
                let sub = factor * x[(k, j)];
                x[(i, j)] -= sub;
            }
        }
    }
    // Back substitution.
    for j in 0..x.cols() {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for k in (i + 1)..n {
                s -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

/// A linear subspace of the `rows × cols` complex matrices, stored as a
/// Frobenius-orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    shape: (usize, usize),
    basis: Vec<CMatrix>,
}

impl Subspace {
    /// Span of the given matrices: modified Gram–Schmidt with one
    /// reorthogonalization pass. Directions whose remainder falls below
    /// `tol::RANK_REL` times the largest input norm are dropped.
    pub fn span(shape: (usize, usize), vectors: &[CMatrix]) -> Subspace {
        Subspace::span_with_scale(shape, vectors, 0.0)
    }

    /// Like [`Subspace::span`], but with an externally supplied reference
    /// scale. Inputs that are numerically zero relative to that scale are
    /// dropped even when every input is tiny — needed when the vectors come
    /// from cancelling sums whose natural magnitude the caller knows (e.g.
    /// Fourier coefficients of order-one data).
    pub fn span_with_scale(shape: (usize, usize), vectors: &[CMatrix], scale: f64) -> Subspace {
        for v in vectors {
            assert_eq!(v.shape(), shape, "span: input shape mismatch");
        }
        let largest = vectors
            .iter()
            .map(|v| v.frobenius_norm())
            .fold(0.0, f64::max)
            .max(scale);
        let threshold = largest * tol::RANK_REL;
        let mut basis: Vec<CMatrix> = Vec::new();
        for vin in vectors {
            let mut v = vin.clone();
            // Two projection passes keep the basis orthonormal to ~1e-15
            // even for nearly dependent inputs.
            for _ in 0..2 {
                for b in &basis {
                    let coeff = b.frobenius_inner(&v);
                    v = &v - &b.scale(coeff);
                }
            }
            let norm = v.frobenius_norm();
            if norm > threshold && norm > 0.0 {
                basis.push(v.scale_re(1.0 / norm));
            }
        }
        Subspace { shape, basis }
    }

    pub fn empty(shape: (usize, usize)) -> Subspace {
        Subspace { shape, basis: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Orthogonal projection onto the subspace (Frobenius geometry).
    pub fn project(&self, m: &CMatrix) -> CMatrix {
        assert_eq!(m.shape(), self.shape, "project: shape mismatch");
        let mut p = CMatrix::zeros(self.shape.0, self.shape.1);
        for b in &self.basis {
            let coeff = b.frobenius_inner(m);
            p = &p + &b.scale(coeff);
        }
        p
    }

    /// Distance from `m` to the subspace in Frobenius norm.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        (m - &self.project(m)).frobenius_norm()
    }

    /// Membership test: projection residual at most
    /// `tol · max(1, ‖m‖_F)`.
    pub fn contains(&self, m: &CMatrix, tol: f64) -> bool {
        self.residual(m) <= tol * m.frobenius_norm().max(1.0)
    }

    /// Coefficients of `m` in the stored orthonormal basis.
    pub fn coordinates(&self, m: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| b.frobenius_inner(m)).collect()
    }

    /// Mutual containment of basis vectors at tolerance `tol`.
    pub fn equal(&self, other: &Subspace, tol: f64) -> bool {
        if self.shape != other.shape || self.dim() != other.dim() {
            return false;
        }
        self.basis.iter().all(|b| other.contains(b, tol))
            && other.basis.iter().all(|b| self.contains(b, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn eigh_reconstructs_random_hermitian_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 8, 13] {
            let m = random_matrix(&mut rng, n, n);
            let h = &m + &m.adjoint();
            let (vals, v) = eigh(&h);
            let d = CMatrix::diag(&vals.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
            let rebuilt = &(&v * &d) * &v.adjoint();
            assert!(
                (&rebuilt - &h).frobenius_norm() <= 1e-12 * h.frobenius_norm().max(1.0),
                "reconstruction failed at n={n}"
            );
            let gram = &v.adjoint() * &v;
            assert!(
                (&gram - &CMatrix::identity(n)).frobenius_norm() <= 1e-12,
                "eigenvectors not orthonormal at n={n}"
            );
            for w in vals.windows(2) {
                assert!(w[0] <= w[1] + 1e-12, "eigenvalues not ascending");
            }
        }
    }

    #[test]
    fn operator_norm_of_identity_is_one() {
        for n in 1..6 {
            assert!((operator_norm(&CMatrix::identity(n)) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn operator_norm_of_diagonal_is_max_abs() {
        let m = CMatrix::diag(&[c(2.0, 0.0), c(-1.0, 0.0)]);
        assert!((operator_norm(&m) - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn operator_norm_satisfies_cstar_identity_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rows = rng.gen_range(1..7);
            let cols = rng.gen_range(1..7);
            let m = random_matrix(&mut rng, rows, cols);
            let lhs = operator_norm(&m);
            let rhs = operator_norm(&(&m * &m.adjoint())).sqrt();
            assert!(
                (lhs - rhs).abs() <= 1e-8 * lhs.max(1.0),
                "C*-identity violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn span_collapses_repeated_vectors() {
        let e11 = CMatrix::unit(2, 2, 0, 0);
        let s = Subspace::span((2, 2), &[e11.clone(), e11.clone()]);
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn span_of_matrix_units_is_full() {
        let units: Vec<CMatrix> = (0..2)
            .flat_map(|i| (0..2).map(move |j| CMatrix::unit(2, 2, i, j)))
            .collect();
        let s = Subspace::span((2, 2), &units);
        assert_eq!(s.dim(), 4);
    }

    #[test]
    fn span_detects_low_rank_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let gens: Vec<CMatrix> = (0..3).map(|_| random_matrix(&mut rng, 3, 3)).collect();
            // Six vectors drawn from a 3-dimensional space.
            let mut family = Vec::new();
            for _ in 0..6 {
                let mut v = CMatrix::zeros(3, 3);
                for g in &gens {
                    v = &v + &g.scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
                family.push(v);
            }
            let s = Subspace::span((3, 3), &family);
            assert!(s.dim() <= 3, "rank exceeded 3: {}", s.dim());
        }
    }

    #[test]
    fn contains_accepts_members_and_rejects_outsiders() {
        let s = Subspace::span(
            (2, 2),
            &[CMatrix::unit(2, 2, 0, 0), CMatrix::unit(2, 2, 1, 1)],
        );
        let member = CMatrix::diag(&[c(3.0, 1.0), c(-2.0, 0.5)]);
        assert!(s.contains(&member, tol::MEMBERSHIP));
        assert!(!s.contains(&CMatrix::unit(2, 2, 0, 1), tol::MEMBERSHIP));
    }

    #[test]
    fn subspace_equality_is_mutual_containment() {
        let a = Subspace::span(
            (2, 2),
            &[CMatrix::unit(2, 2, 0, 1), CMatrix::unit(2, 2, 1, 0)],
        );
        let x = CMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        let y = CMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ]);
        let b = Subspace::span((2, 2), &[x, y]);
        assert!(a.equal(&b, tol::MEMBERSHIP));
        let diag = Subspace::span((2, 2), &[CMatrix::identity(2)]);
        assert!(!a.equal(&diag, tol::MEMBERSHIP));
    }

    #[test]
    fn lu_solve_recovers_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [1usize, 2, 5, 9] {
            let a = &random_matrix(&mut rng, n, n) + &CMatrix::identity(n).scale_re(3.0);
            let x = random_matrix(&mut rng, n, 2);
            let b = &a * &x;
            let solved = lu_solve(&a, &b).expect("well-conditioned system");
            assert!((&solved - &x).frobenius_norm() <= 1e-10 * x.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn vec_col_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let m = random_matrix(&mut rng, 3, 4);
        let v = m.vec_col();
        let back = CMatrix::unvec_col(&v, 3, 4);
        assert!((&back - &m).frobenius_norm() == 0.0);
    }

    proptest! {
        #[test]
        fn operator_norm_is_submultiplicative(
            a_re in proptest::collection::vec(-1.0f64..1.0, 9),
            a_im in proptest::collection::vec(-1.0f64..1.0, 9),
            b_re in proptest::collection::vec(-1.0f64..1.0, 9),
            b_im in proptest::collection::vec(-1.0f64..1.0, 9),
        ) {
            let a = CMatrix::from_fn(3, 3, |i, j| c(a_re[3 * i + j], a_im[3 * i + j]));
            let b = CMatrix::from_fn(3, 3, |i, j| c(b_re[3 * i + j], b_im[3 * i + j]));
            let lhs = operator_norm(&(&a * &b));
            let rhs = operator_norm(&a) * operator_norm(&b);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn span_is_idempotent_and_contains_inputs(
            re in proptest::collection::vec(-1.0f64..1.0, 4 * 6),
            im in proptest::collection::vec(-1.0f64..1.0, 4 * 6),
        ) {
            let vectors: Vec<CMatrix> = (0..6)
                .map(|k| CMatrix::from_fn(2, 2, |i, j| c(re[4 * k + 2 * i + j], im[4 * k + 2 * i + j])))
                .collect();
            let s = Subspace::span((2, 2), &vectors);
            let s2 = Subspace::span((2, 2), s.basis());
            prop_assert_eq!(s.dim(), s2.dim());
            for v in &vectors {
                prop_assert!(s.contains(v, tol::MEMBERSHIP));
            }
        }
    }
}
