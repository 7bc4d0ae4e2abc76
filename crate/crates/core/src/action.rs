//! Unitary actions of finite abelian groups on matrix algebras, and their
//! spectral analysis.
//!
//! An action is given by commuting unitary generator images on `ℂⁿ`; the
//! group acts on the full matrix algebra `Mₙ` by conjugation,
//! `α_t(a) = π_t a π_t*`. This module provides:
//!
//! * homogeneous (spectral) subspaces `A_χ = {a : α_t(a) = ⟨χ,t⟩·a}`;
//! * Fourier coefficient operators `E_χ(a) = Σ_t α_t(a)·conj⟨χ,t⟩`
//!   (Haar weight 1 per group point, so `E_χ/|G|` is the projection onto
//!   `A_χ` and `a = (1/|G|) Σ_χ E_χ(a)` exactly);
//! * the ket/bra block operators of square-integrability: viewing the
//!   algebra as a module over itself, functions `G → Mₙ` are stacked
//!   `|G|·n × n` column blocks in the fixed lexicographic group order, and
//!   `|ξ⟩⟩ = [α_t(ξ)]_t` is the `n × |G|·n` row of blocks sending
//!   `f ↦ Σ_t α_t(ξ)·f(t)`;
//! * the crossed-product representation `ρ_K` with blocks
//!   `(t,s) ↦ α_t(K(s−t))`, its covariance under the dual twist, and the
//!   least-squares witness recovering `K` from `⟨⟨ξ|η⟩⟩`;
//! * the relative-continuity defect of Exel's integrable picture.
//!
//! Everything is finite-dimensional: "dense" means "spanning", and the
//! strict topology coincides with the norm topology, so no completions or
//! multiplier algebras ever appear.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{Character, Element, FiniteAbelianGroup};
use crate::linalg::{c, eigh, operator_norm, CMatrix, Subspace};
use crate::tol;

/// Relative eigenvalue threshold for kernel extraction from stacked
/// constraint Gram matrices. Nonzero constraint singular values are bounded
/// below by root-of-unity gaps (≥ |1 − e^{2πi/n_max}|), while true kernel
/// eigenvalues sit at roundoff squared, so anything in between separates.
const KERNEL_EIG_REL: f64 = 1e-10;

/// A finite abelian group acting on `Mₙ(ℂ)` by conjugation with a unitary
/// representation.
#[derive(Clone, Debug)]
pub struct MatrixAction {
    group: FiniteAbelianGroup,
    dim: usize,
    generators: Vec<CMatrix>,
    elements: Vec<Element>,
    characters: Vec<Character>,
    unitaries: Vec<CMatrix>,
    adjoints: Vec<CMatrix>,
}

impl MatrixAction {
    /// Validate generator images and cache the full representation.
    ///
    /// Checks: one `n × n` generator per invariant factor, each unitary,
    /// `π_j^{n_j} = 1`, and all generators commute (residuals at
    /// `tol::IDENTITY` scale).
    pub fn new(group: FiniteAbelianGroup, generators: Vec<CMatrix>) -> Result<Self> {
        if generators.len() != group.rank() {
            return Err(Error::NotARepresentation {
                reason: format!(
                    "expected {} generator images, got {}",
                    group.rank(),
                    generators.len()
                ),
            });
        }
        let dim = if let Some(g) = generators.first() {
            g.rows()
        } else {
            // Trivial group: the representation space must still be named.
            return Self::trivial_group_action(group);
        };
        for (j, g) in generators.iter().enumerate() {
            if g.shape() != (dim, dim) {
                return Err(Error::ShapeMismatch {
                    context: "generator image",
                    expected_rows: dim,
                    expected_cols: dim,
                    rows: g.rows(),
                    cols: g.cols(),
                });
            }
            let uu = &(g * &g.adjoint()) - &CMatrix::identity(dim);
            let residual = uu.frobenius_norm();
            if residual > tol::IDENTITY * (dim as f64).sqrt().max(1.0) {
                return Err(Error::NotUnitary { residual });
            }
            let order = group.factors()[j];
            let mut power = CMatrix::identity(dim);
            for _ in 0..order {
                power = &power * g;
            }
            let order_res = (&power - &CMatrix::identity(dim)).frobenius_norm();
            if order_res > tol::IDENTITY * (dim as f64).sqrt().max(1.0) {
                return Err(Error::NotARepresentation {
                    reason: format!(
                        "generator {j} does not have order dividing {order} (residual {order_res:.3e})"
                    ),
                });
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                let comm = &(&generators[i] * &generators[j])
                    - &(&generators[j] * &generators[i]);
                let residual = comm.frobenius_norm();
                if residual > tol::IDENTITY * (dim as f64).sqrt().max(1.0) {
                    return Err(Error::NotARepresentation {
                        reason: format!(
                            "generators {i} and {j} do not commute (residual {residual:.3e})"
                        ),
                    });
                }
            }
        }

        let elements = group.elements();
        let characters = group.characters();
        let mut unitaries = Vec::with_capacity(elements.len());
        for t in &elements {
            let mut u = CMatrix::identity(dim);
            for (j, &coord) in t.0.iter().enumerate() {
                for _ in 0..coord {
                    u = &u * &generators[j];
                }
            }
            unitaries.push(u);
        }
        let adjoints = unitaries.iter().map(|u| u.adjoint()).collect();
        Ok(MatrixAction {
            group,
            dim,
            generators,
            elements,
            characters,
            unitaries,
            adjoints,
        })
    }

    fn trivial_group_action(_group: FiniteAbelianGroup) -> Result<Self> {
        // Callers that want the trivial group acting on ℂⁿ should use
        // `MatrixAction::trivial` and say which n they mean.
        Err(Error::NotARepresentation {
            reason: "trivial group: use MatrixAction::trivial(n) to fix the dimension".into(),
        })
    }

    /// The trivial group acting on `Mₙ`.
    pub fn trivial(dim: usize) -> Self {
        let group = FiniteAbelianGroup::trivial();
        MatrixAction {
            elements: group.elements(),
            characters: group.characters(),
            group,
            dim,
            generators: vec![],
            unitaries: vec![CMatrix::identity(dim)],
            adjoints: vec![CMatrix::identity(dim)],
        }
    }

    /// The regular representation: `G` acting on `ℂ^{|G|}` by translation of
    /// the coordinate basis (basis indexed by `elements()`).
    pub fn regular(group: FiniteAbelianGroup) -> Result<Self> {
        let n = group.order();
        let elements = group.elements();
        let mut generators = Vec::with_capacity(group.rank());
        for j in 0..group.rank() {
            let mut e = vec![0u64; group.rank()];
            e[j] = 1 % group.factors()[j];
            let gen_elt = Element(e);
            let mut m = CMatrix::zeros(n, n);
            for (s_idx, s) in elements.iter().enumerate() {
                let target = group.index_of(&group.add(s, &gen_elt));
                m[(target, s_idx)] = c(1.0, 0.0);
            }
            generators.push(m);
        }
        MatrixAction::new(group, generators)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn characters(&self) -> &[Character] {
        &self.characters
    }

    /// The representing unitary `π_t`.
    pub fn unitary(&self, t: &Element) -> &CMatrix {
        &self.unitaries[self.group.index_of(t)]
    }

    /// `α_t(a) = π_t a π_t*`.
    pub fn act(&self, t: &Element, a: &CMatrix) -> CMatrix {
        self.act_idx(self.group.index_of(t), a)
    }

    fn act_idx(&self, i: usize, a: &CMatrix) -> CMatrix {
        &(&self.unitaries[i] * a) * &self.adjoints[i]
    }

    /// `E_χ(a) = Σ_t α_t(a) · conj⟨χ, t⟩` (Haar weight 1 per point).
    pub fn fourier_coefficient(&self, chi: &Character, a: &CMatrix) -> CMatrix {
        assert_eq!(a.shape(), (self.dim, self.dim), "fourier_coefficient shape");
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (i, t) in self.elements.iter().enumerate() {
            let phase = self.group.pairing(chi, t).conj();
            acc = &acc + &self.act_idx(i, a).scale(phase);
        }
        acc
    }

    /// The homogeneous subspace `A_χ = {a : α_t(a) = ⟨χ,t⟩·a for all t}`,
    /// computed as the kernel of the stacked linear constraints. Stacking
    /// the generator constraints suffices: the action is multiplicative, so
    /// the generator equations imply the equation for every `t`.
    pub fn spectral_subspace(&self, chi: &Character) -> Subspace {
        let n = self.dim;
        let n2 = n * n;
        // Units enumerated column-major so coordinate index k·n+i matches
        // the vec_col/unvec_col convention used to read kernel vectors back.
        let units: Vec<CMatrix> = (0..n)
            .flat_map(|k| (0..n).map(move |i| CMatrix::unit(n, n, i, k)))
            .collect();
        let mut gram = CMatrix::zeros(n2, n2);
        for j in 0..self.group.rank() {
            let mut e = vec![0u64; self.group.rank()];
            e[j] = 1 % self.group.factors()[j];
            let gen_elt = Element(e);
            let lam = self.group.pairing(chi, &gen_elt);
            let mut constraint = CMatrix::zeros(n2, n2);
            for (col, u) in units.iter().enumerate() {
                let img = &self.act(&gen_elt, u) - &u.scale(lam);
                constraint.set_block(0, col, &img.vec_col());
            }
            gram = &gram + &(&constraint.adjoint() * &constraint);
        }
        let (vals, vecs) = eigh(&gram);
        let lam_max = vals.last().copied().unwrap_or(0.0).max(0.0);
        let threshold = (lam_max * KERNEL_EIG_REL).max(1e-20);
        let mut basis = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            if v <= threshold {
                let col = CMatrix::from_fn(n2, 1, |r, _| vecs[(r, i)]);
                basis.push(CMatrix::unvec_col(&col, n, n));
            }
        }
        Subspace::span((n, n), &basis)
    }

    /// All homogeneous subspaces, indexed like `characters()`.
    pub fn spectral_data(&self) -> SpectralData {
        SpectralData {
            subspaces: self
                .characters
                .iter()
                .map(|chi| self.spectral_subspace(chi))
                .collect(),
        }
    }

    /// `|ξ⟩⟩` as the `n × |G|·n` block row `[α_t(ξ)]_t` acting on stacked
    /// functions `G → Mₙ` by `f ↦ Σ_t α_t(ξ)·f(t)`.
    pub fn ket(&self, xi: &CMatrix) -> CMatrix {
        assert_eq!(xi.shape(), (self.dim, self.dim), "ket shape");
        let blocks: Vec<CMatrix> = (0..self.elements.len())
            .map(|i| self.act_idx(i, xi))
            .collect();
        CMatrix::hstack(&blocks)
    }

    /// `⟨⟨ξ|`, the adjoint block column; `(⟨⟨ξ|·η)(t) = α_t(ξ)*·η`.
    pub fn bra(&self, xi: &CMatrix) -> CMatrix {
        self.ket(xi).adjoint()
    }

    /// `⟨⟨ξ|η⟩⟩ = ⟨⟨ξ| ∘ |η⟩⟩` with `(t,s)` block `α_t(ξ)*·α_s(η)`.
    pub fn braket(&self, xi: &CMatrix, eta: &CMatrix) -> CMatrix {
        &self.bra(xi) * &self.ket(eta)
    }

    /// Block-diagonal dual multiplier: the `t` block is `conj⟨χ,t⟩·1ₙ`.
    pub fn m_chi(&self, chi: &Character) -> CMatrix {
        let n = self.dim;
        let size = n * self.elements.len();
        let mut m = CMatrix::zeros(size, size);
        for (i, t) in self.elements.iter().enumerate() {
            let phase = self.group.pairing(chi, t).conj();
            for k in 0..n {
                m[(i * n + k, i * n + k)] = phase;
            }
        }
        m
    }

    /// `|ξ⟩⟩ ∘ M_χ ∘ ⟨⟨η|`, compressed to `n × n`; equals `E_χ(ξ·η*)`.
    pub fn e_via_ketbra(&self, chi: &Character, xi: &CMatrix, eta: &CMatrix) -> CMatrix {
        &(&self.ket(xi) * &self.m_chi(chi)) * &self.bra(eta)
    }

    /// Square-integrability norm `‖ξ‖ + ‖|ξ⟩⟩‖` (operator norms).
    pub fn si_norm(&self, xi: &CMatrix) -> f64 {
        operator_norm(xi) + operator_norm(&self.ket(xi))
    }

    /// Crossed-product representation of `K : G → Mₙ` on stacked functions:
    /// block `(t, s)` acts by left multiplication with `α_t(K(s − t))`.
    pub fn crossed_rep(&self, k: &[CMatrix]) -> CMatrix {
        assert_eq!(k.len(), self.elements.len(), "crossed_rep: one value per element");
        let n = self.dim;
        let size = n * self.elements.len();
        let mut rho = CMatrix::zeros(size, size);
        for (ti, t) in self.elements.iter().enumerate() {
            for (si, s) in self.elements.iter().enumerate() {
                let diff = self.group.sub(s, t);
                let block = self.act_idx(ti, &k[self.group.index_of(&diff)]);
                rho.set_block(ti * n, si * n, &block);
            }
        }
        rho
    }

    /// Dual twist `(β̂_χ K)(t) = ⟨χ, t⟩·K(t)`; satisfies
    /// `M_χ ∘ ρ_K ∘ M_χ* = ρ_{β̂_χ K}`.
    pub fn dual_twist(&self, chi: &Character, k: &[CMatrix]) -> Vec<CMatrix> {
        self.elements
            .iter()
            .zip(k)
            .map(|(t, kt)| kt.scale(self.group.pairing(chi, t)))
            .collect()
    }

    /// Least-squares recovery of `K` with `ρ_K = ⟨⟨ξ|η⟩⟩`.
    ///
    /// The map `K ↦ ρ_K` places `α_t(K(g))` in the blocks `(t, t+g)`, and
    /// conjugation by a unitary is a Frobenius isometry, so the normal
    /// equations decouple per `g` and solve in closed form:
    /// `K(g) = (1/|G|) Σ_t α_t^{-1}(T_{t,t+g})` for the target `T`.
    /// For an exactly representable target the residual vanishes up to
    /// roundoff; the reported residual is the Frobenius norm of
    /// `ρ_K − ⟨⟨ξ|η⟩⟩` (which dominates the operator norm).
    pub fn rc_witness(&self, xi: &CMatrix, eta: &CMatrix) -> RcWitness {
        let target = self.braket(xi, eta);
        let n = self.dim;
        let count = self.elements.len();
        let weight = 1.0 / count as f64;
        let mut k = Vec::with_capacity(count);
        for g in &self.elements {
            let mut acc = CMatrix::zeros(n, n);
            for (ti, t) in self.elements.iter().enumerate() {
                let si = self.group.index_of(&self.group.add(t, g));
                let block = target.block(ti * n, si * n, n, n);
                // α_t^{-1}(X) = π_t* X π_t.
                acc = &acc + &(&(&self.adjoints[ti] * &block) * &self.unitaries[ti]);
            }
            k.push(acc.scale_re(weight));
        }
        let mut residual = (&self.crossed_rep(&k) - &target).frobenius_norm();
        if !residual.is_finite() {
            // Degenerate input (cannot occur for exact finite data); report
            // an infinite residual rather than a bogus witness.
            residual = f64::INFINITY;
        }
        RcWitness { k, residual }
    }

    /// Exel's relative-continuity defect at dual shift `η`:
    /// `sup_{χ,ζ} ‖E_{χη}(a)·E_ζ(b) − E_χ(a)·E_{ζη}(b)‖` (operator norm).
    ///
    /// Over a finite dual the limit `η → trivial` is attained at the trivial
    /// character, where both terms coincide and the defect is exactly 0.
    pub fn exel_rc_defect(&self, a: &CMatrix, b: &CMatrix, eta: &Character) -> f64 {
        let ea: Vec<CMatrix> = self
            .characters
            .iter()
            .map(|chi| self.fourier_coefficient(chi, a))
            .collect();
        let eb: Vec<CMatrix> = self
            .characters
            .iter()
            .map(|chi| self.fourier_coefficient(chi, b))
            .collect();
        let mut sup: f64 = 0.0;
        for chi in &self.characters {
            let chi_eta = self.group.index_of_character(&self.group.character_add(chi, eta));
            let chi_idx = self.group.index_of_character(chi);
            for zeta in &self.characters {
                let zeta_eta =
                    self.group.index_of_character(&self.group.character_add(zeta, eta));
                let zeta_idx = self.group.index_of_character(zeta);
                let diff = &(&ea[chi_eta] * &eb[zeta_idx]) - &(&ea[chi_idx] * &eb[zeta_eta]);
                sup = sup.max(operator_norm(&diff));
            }
        }
        sup
    }

    /// Fixed-point algebra realized from a generating subspace: the span of
    /// the compressed rank-one module operators `|ξ⟩⟩∘⟨⟨η| = E_triv(ξ·η*)`,
    /// an `n × n` matrix for each generator pair.
    pub fn fixed_point_algebra(&self, r: &RcSubspace) -> Subspace {
        let triv = self.group.trivial_character();
        let mut gens = Vec::new();
        let mut scale = 0.0f64;
        for xi in &r.generators {
            for eta in &r.generators {
                let prod = xi * &eta.adjoint();
                // ‖E_triv‖ ≤ |G|·‖ξη*‖ since conjugation preserves the
                // Frobenius norm; anything smaller than roundoff at that
                // scale has no invariant part.
                scale = scale.max(self.elements.len() as f64 * prod.frobenius_norm());
                gens.push(self.fourier_coefficient(&triv, &prod));
            }
        }
        Subspace::span_with_scale((self.dim, self.dim), &gens, scale)
    }

    /// Spectral invariance of a generating subspace under one homogeneous
    /// coefficient: with `X = E_χ(ξ·η*)`, both `X·R ⊆ span(R)` and
    /// `X*·R ⊆ span(R)`, and `X* = E_χ̄(η·ξ*)`.
    pub fn spectral_invariance_check(
        &self,
        r: &RcSubspace,
        chi: &Character,
        xi: &CMatrix,
        eta: &CMatrix,
    ) -> SpectralInvarianceReport {
        let x = self.fourier_coefficient(chi, &(xi * &eta.adjoint()));
        let x_star = x.adjoint();
        let span = r.span(self.dim);
        let mut left = 0.0f64;
        let mut adj_left = 0.0f64;
        for rho in &r.generators {
            let xr = &x * rho;
            left = left.max(span.residual(&xr) / xr.frobenius_norm().max(1.0));
            let xsr = &x_star * rho;
            adj_left = adj_left.max(span.residual(&xsr) / xsr.frobenius_norm().max(1.0));
        }
        let chi_bar = self.group.character_neg(chi);
        let star_id = (&x_star
            - &self.fourier_coefficient(&chi_bar, &(eta * &xi.adjoint())))
            .frobenius_norm();
        SpectralInvarianceReport {
            left_residual: left,
            adjoint_left_residual: adj_left,
            star_identity_residual: star_id,
            pass: left <= tol::MEMBERSHIP
                && adj_left <= tol::MEMBERSHIP
                && star_id <= 1e-10 * (x.frobenius_norm().max(1.0)),
        }
    }
}

/// Diagonal modulation unitary `diag(⟨χ₀, s⟩)_s` on `ℂ^{|G|}` (basis indexed
/// like `elements()`). Homogeneous of degree `χ̄₀` for the regular action;
/// handy for building bundles with unitary homogeneous elements.
pub fn modulation(group: &FiniteAbelianGroup, chi0: &Character) -> CMatrix {
    let phases: Vec<Complex64> = group
        .elements()
        .iter()
        .map(|s| group.pairing(chi0, s))
        .collect();
    CMatrix::diag(&phases)
}

/// The full spectral decomposition of the ambient algebra: one homogeneous
/// subspace per character, indexed like `characters()`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub subspaces: Vec<Subspace>,
}

impl SpectralData {
    pub fn total_dim(&self) -> usize {
        self.subspaces.iter().map(|s| s.dim()).sum()
    }

    /// Check the grading relations on the computed subspaces.
    pub fn verify(&self, action: &MatrixAction) -> SpectralDataReport {
        let group = action.group();
        let chars = action.characters();
        let mut product = 0.0f64;
        let mut adjoint = 0.0f64;
        for (i, chi) in chars.iter().enumerate() {
            let neg = group.index_of_character(&group.character_neg(chi));
            for b in self.subspaces[i].basis() {
                let res = self.subspaces[neg].residual(&b.adjoint());
                adjoint = adjoint.max(res);
            }
            for (j, _eta) in chars.iter().enumerate() {
                let target = group.index_of_character(
                    &group.character_add(chi, &chars[j]),
                );
                for bi in self.subspaces[i].basis() {
                    for bj in self.subspaces[j].basis() {
                        let prod = bi * bj;
                        let res = self.subspaces[target].residual(&prod)
                            / prod.frobenius_norm().max(1.0);
                        product = product.max(res);
                    }
                }
            }
        }
        SpectralDataReport {
            total_dim: self.total_dim(),
            ambient_dim: action.dim() * action.dim(),
            max_product_residual: product,
            max_adjoint_residual: adjoint,
        }
    }
}

/// Residual report for [`SpectralData::verify`].
#[derive(Clone, Debug)]
pub struct SpectralDataReport {
    pub total_dim: usize,
    pub ambient_dim: usize,
    pub max_product_residual: f64,
    pub max_adjoint_residual: f64,
}

impl SpectralDataReport {
    pub fn pass(&self) -> bool {
        self.total_dim == self.ambient_dim
            && self.max_product_residual <= tol::IDENTITY
            && self.max_adjoint_residual <= tol::IDENTITY
    }
}

/// A generating subspace of the algebra, remembered by its generators
/// (viewing the algebra as a module over itself). `closed` records whether
/// the generators are already closed under the action and right
/// multiplication, the finite-scale form of completeness.
#[derive(Clone, Debug)]
pub struct RcSubspace {
    pub generators: Vec<CMatrix>,
    pub closed: bool,
}

impl RcSubspace {
    pub fn new(generators: Vec<CMatrix>) -> Self {
        RcSubspace {
            generators,
            closed: false,
        }
    }

    /// The whole matrix algebra, generated by matrix units.
    pub fn full(dim: usize) -> Self {
        let generators = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| CMatrix::unit(dim, dim, i, j)))
            .collect();
        RcSubspace {
            generators,
            closed: true,
        }
    }

    pub fn span(&self, dim: usize) -> Subspace {
        Subspace::span((dim, dim), &self.generators)
    }

    /// Closure under the action and right multiplication by the given
    /// module basis; iterates until the span dimension stabilizes. This is
    /// the finite-dimensional form of completeness (no topological closure
    /// is needed at matrix scale).
    pub fn complete_within(
        &self,
        action: &MatrixAction,
        module_basis: &[CMatrix],
    ) -> RcSubspace {
        let dim = action.dim();
        let mut current = Subspace::span((dim, dim), &self.generators);
        loop {
            let mut vectors: Vec<CMatrix> = current.basis().to_vec();
            for b in current.basis() {
                for t in action.elements() {
                    vectors.push(action.act(t, b));
                }
                for m in module_basis {
                    vectors.push(b * m);
                }
            }
            let next = Subspace::span((dim, dim), &vectors);
            if next.dim() == current.dim() {
                break;
            }
            current = next;
        }
        RcSubspace {
            generators: current.basis().to_vec(),
            closed: true,
        }
    }
}

/// Result of the crossed-product least-squares witness.
#[derive(Clone, Debug)]
pub struct RcWitness {
    /// Recovered integrand `K : G → Mₙ`, indexed like `elements()`.
    pub k: Vec<CMatrix>,
    /// Frobenius residual `‖ρ_K − ⟨⟨ξ|η⟩⟩‖_F`.
    pub residual: f64,
}

impl RcWitness {
    pub fn succeeded(&self) -> bool {
        self.residual <= tol::WITNESS_RESIDUAL
    }
}

/// Residual report for [`MatrixAction::spectral_invariance_check`].
#[derive(Clone, Debug)]
pub struct SpectralInvarianceReport {
    pub left_residual: f64,
    pub adjoint_left_residual: f64,
    pub star_identity_residual: f64,
    pub pass: bool,
}
