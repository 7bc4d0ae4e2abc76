//! Finite abelian groups in invariant-factor form, their characters, and the
//! scalar Fourier transform.
//!
//! A group is `Z/n₁ × … × Z/n_k`; elements and characters are both residue
//! tuples of the same shape (the dual of a finite abelian group is isomorphic
//! to the group itself, and this crate fixes that identification once and for
//! all). The pairing is
//!
//! ```text
//! ⟨χ, t⟩ = exp(2πi · Σ_j χ_j t_j / n_j)
//! ```
//!
//! with the exponent computed in exact rational arithmetic before a single
//! final evaluation of `exp`.
//!
//! Normalization convention used across the whole crate: Haar measure gives
//! every point of the group weight `1`, and every character of the dual
//! weight `1/|G|`. Concretely:
//!
//! * transform: `f̂(χ) = Σ_t f(t) · conj⟨χ, t⟩`
//! * inversion: `f(t) = (1/|G|) Σ_χ f̂(χ) · ⟨χ, t⟩`
//! * Plancherel: `Σ_t |f(t)|² = (1/|G|) Σ_χ |f̂(χ)|²`

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Group element as a tuple of residues, one per invariant factor.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Element(pub Vec<u64>);

/// Character of the group, identified with a residue tuple of the same
/// shape as the elements.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Character(pub Vec<u64>);

/// `Z/n₁ × … × Z/n_k` with every factor at least 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if factors.iter().any(|&n| n == 0) {
            return Err(Error::Parse(
                "group factors must all be at least 1".into(),
            ));
        }
        Ok(FiniteAbelianGroup { factors })
    }

    /// The trivial group (empty factor list).
    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: vec![] }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.factors.iter().product::<u64>() as usize
    }

    pub fn zero(&self) -> Element {
        Element(vec![0; self.factors.len()])
    }

    pub fn trivial_character(&self) -> Character {
        Character(vec![0; self.factors.len()])
    }

    fn check_shape(&self, coords: &[u64]) -> bool {
        coords.len() == self.factors.len()
            && coords.iter().zip(&self.factors).all(|(&x, &n)| x < n)
    }

    pub fn contains(&self, t: &Element) -> bool {
        self.check_shape(&t.0)
    }

    pub fn contains_character(&self, chi: &Character) -> bool {
        self.check_shape(&chi.0)
    }

    /// All elements in lexicographic order on coordinate tuples (first
    /// coordinate most significant). Every function-on-`G` in this crate is
    /// stored as a flat vector in exactly this order.
    pub fn elements(&self) -> Vec<Element> {
        self.tuples().into_iter().map(Element).collect()
    }

    /// All characters, in the same lexicographic order.
    pub fn characters(&self) -> Vec<Character> {
        self.tuples().into_iter().map(Character).collect()
    }

    fn tuples(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &n in &self.factors {
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for prefix in &out {
                for r in 0..n {
                    let mut t = prefix.clone();
                    t.push(r);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    /// Position of `t` in the `elements()` enumeration (mixed-radix index,
    /// last coordinate least significant).
    pub fn index_of(&self, t: &Element) -> usize {
        debug_assert!(self.contains(t));
        let mut idx = 0usize;
        for (&x, &n) in t.0.iter().zip(&self.factors) {
            idx = idx * n as usize + x as usize;
        }
        idx
    }

    pub fn index_of_character(&self, chi: &Character) -> usize {
        self.index_of(&Element(chi.0.clone()))
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        Element(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.factors)
                .map(|((&x, &y), &n)| (x + y) % n)
                .collect(),
        )
    }

    pub fn neg(&self, a: &Element) -> Element {
        Element(
            a.0.iter()
                .zip(&self.factors)
                .map(|(&x, &n)| (n - x) % n)
                .collect(),
        )
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        self.add(a, &self.neg(b))
    }

    pub fn character_add(&self, a: &Character, b: &Character) -> Character {
        Character(self.add(&Element(a.0.clone()), &Element(b.0.clone())).0)
    }

    /// Inverse character, i.e. the complex conjugate: coordinatewise
    /// negation of the residues.
    pub fn character_neg(&self, a: &Character) -> Character {
        Character(self.neg(&Element(a.0.clone())).0)
    }

    pub fn character_sub(&self, a: &Character, b: &Character) -> Character {
        self.character_add(a, &self.character_neg(b))
    }

    /// Exact rational exponent `Σ_j χ_j t_j / n_j mod 1` of the pairing,
    /// reduced to `[0, 1)`.
    pub fn pairing_exponent(&self, chi: &Character, t: &Element) -> BigRational {
        debug_assert!(self.contains_character(chi) && self.contains(t));
        let mut acc = BigRational::zero();
        for ((&x, &y), &n) in chi.0.iter().zip(&t.0).zip(&self.factors) {
            acc += BigRational::new(BigInt::from(x) * BigInt::from(y), BigInt::from(n));
        }
        let floor = acc.floor();
        acc - floor
    }

    /// `⟨χ, t⟩` as a complex number of modulus 1.
    pub fn pairing(&self, chi: &Character, t: &Element) -> C64 {
        let q = rational_to_f64(&self.pairing_exponent(chi, t));
        let angle = std::f64::consts::TAU * q;
        c(angle.cos(), angle.sin())
    }

    /// Whether `⟨χ, t⟩ = 1` exactly (the rational exponent reduces to 0).
    pub fn pairing_is_one(&self, chi: &Character, t: &Element) -> bool {
        self.pairing_exponent(chi, t).is_zero()
    }

    /// `f̂(χ) = Σ_t f(t) · conj⟨χ, t⟩`, with `f` indexed by `elements()`.
    pub fn fourier_transform(&self, f: &[C64]) -> Result<Vec<C64>> {
        let n = self.order();
        if f.len() != n {
            return Err(Error::Parse(format!(
                "function has {} samples, group has order {}",
                f.len(),
                n
            )));
        }
        let elements = self.elements();
        Ok(self
            .characters()
            .iter()
            .map(|chi| {
                elements
                    .iter()
                    .enumerate()
                    .map(|(i, t)| f[i] * self.pairing(chi, t).conj())
                    .sum()
            })
            .collect())
    }

    /// Inverse transform `f(t) = (1/|G|) Σ_χ f̂(χ) · ⟨χ, t⟩`.
    pub fn fourier_inverse(&self, fhat: &[C64]) -> Result<Vec<C64>> {
        let n = self.order();
        if fhat.len() != n {
            return Err(Error::Parse(format!(
                "transform has {} samples, group has order {}",
                fhat.len(),
                n
            )));
        }
        let characters = self.characters();
        let weight = 1.0 / n as f64;
        Ok(self
            .elements()
            .iter()
            .map(|t| {
                characters
                    .iter()
                    .enumerate()
                    .map(|(i, chi)| fhat[i] * self.pairing(chi, t))
                    .sum::<C64>()
                    * weight
            })
            .collect())
    }
}

/// Lossy conversion used only after exact reduction to `[0, 1)`.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    let numer = q.numer();
    let denom = q.denom();
    // Desk-scale rationals: both parts fit in i128 after reduction.
    let n: f64 = i128::try_from(numer.clone()).map(|v| v as f64).unwrap_or_else(|_| {
        numer.to_string().parse::<f64>().unwrap_or(f64::NAN)
    });
    let d: f64 = i128::try_from(denom.clone()).map(|v| v as f64).unwrap_or_else(|_| {
        denom.to_string().parse::<f64>().unwrap_or(f64::NAN)
    });
    n / d
}
