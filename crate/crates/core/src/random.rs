//! Seeded random generators for matrices, unitaries, and group actions.
//!
//! All functions take an explicit RNG so callers (tests, the CLI) stay
//! deterministic under a fixed seed.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::Result;
use crate::group::FiniteAbelianGroup;
use crate::linalg::{c, CMatrix};
use crate::action::MatrixAction;

/// Dense matrix with independent standard-normal-ish entries (uniform on
/// `[-1,1]` real and imaginary parts; the distribution only needs to be
/// absolutely continuous so that spans behave generically).
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Haar-ish random unitary: orthonormalize a random square matrix.
/// Retries on the (measure-zero) event of rank deficiency.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let m = random_matrix(rng, n, n);
        if let Some(q) = gram_schmidt_full(&m) {
            return q;
        }
    }
}

fn gram_schmidt_full(m: &CMatrix) -> Option<CMatrix> {
    let n = m.rows();
    let mut cols: Vec<Vec<num_complex::Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<num_complex::Complex64> = (0..n).map(|i| m[(i, j)]).collect();
        for _pass in 0..2 {
            for q in &cols {
                let overlap: num_complex::Complex64 =
                    q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= overlap * qi;
                }
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    Some(CMatrix::from_fn(n, n, |i, j| cols[j][i]))
}

/// Random action of `group` on `Mₙ`: conjugate a common eigenbasis.
///
/// Pick one random unitary `Q` and, for each invariant factor `n_j`, a
/// diagonal of random `n_j`-th roots of unity; the generator images
/// `Q·D_j·Q*` then commute exactly and have exact order, up to roundoff.
pub fn random_action<R: Rng>(
    rng: &mut R,
    group: &FiniteAbelianGroup,
    dim: usize,
) -> Result<MatrixAction> {
    let q = random_unitary(rng, dim);
    let q_adj = q.adjoint();
    let mut generators = Vec::with_capacity(group.rank());
    for &order in group.factors() {
        let phases: Vec<_> = (0..dim)
            .map(|_| {
                let k = rng.gen_range(0..order);
                let angle = TAU * k as f64 / order as f64;
                c(angle.cos(), angle.sin())
            })
            .collect();
        generators.push(&(&q * &CMatrix::diag(&phases)) * &q_adj);
    }
    MatrixAction::new(group.clone(), generators)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5] {
            let u = random_unitary(&mut rng, n);
            let gram = &u.adjoint() * &u;
            assert!((&gram - &CMatrix::identity(n)).frobenius_norm() <= 1e-10);
        }
    }

    #[test]
    fn random_action_passes_validation_for_various_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for factors in [vec![2], vec![5], vec![2, 4], vec![2, 2, 2]] {
            let group = FiniteAbelianGroup::new(factors).unwrap();
            let action = random_action(&mut rng, &group, 3).unwrap();
            assert_eq!(action.dim(), 3);
        }
    }

    #[test]
    fn random_action_is_deterministic_under_a_fixed_seed() {
        let group = FiniteAbelianGroup::new(vec![3]).unwrap();
        let a1 = random_action(&mut ChaCha8Rng::seed_from_u64(99), &group, 2).unwrap();
        let a2 = random_action(&mut ChaCha8Rng::seed_from_u64(99), &group, 2).unwrap();
        let d = (&a1.generators()[0] - &a2.generators()[0]).frobenius_norm();
        assert_eq!(d, 0.0);
    }
}
