//! Exact finite unions of half-open arcs `[a, b)` on the circle `ℝ/ℤ`,
//! with rational endpoints, an optional finite set of removed points
//! ("punctures"), and exact rational measure.
//!
//! Arc sets are kept canonical — sorted, pairwise disjoint, maximal arcs
//! inside `[0, 1)` (adjacent arcs merged), punctures sorted and restricted
//! to points the arcs actually cover — so pointwise-equal sets compare
//! equal. Punctures let a set like "the circle minus one point" (a dense
//! open set of full measure) be represented exactly; they are preserved
//! exactly by `union`, `intersect`, and `translate`. `complement` and
//! `minus` are exact on pure arc sets but only measure-exact in the
//! presence of punctures (an isolated removed point would have to become
//! an isolated *included* point, which leaves this class); both document
//! that they drop such null sets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Convenience constructor for exact rationals.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `x mod 1` in `[0, 1)`.
pub fn frac_mod1(x: &BigRational) -> BigRational {
    let one = BigRational::one();
    let mut r = x - x.floor();
    if r >= one {
        r -= one;
    }
    if r.is_negative() {
        r += BigRational::one();
    }
    r
}

/// A finite union of half-open arcs on the circle minus a finite set of
/// punctured points, canonically normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcSet {
    arcs: Vec<(BigRational, BigRational)>,
    punctures: Vec<BigRational>,
}

impl ArcSet {
    /// Build from raw arcs `[a, b)` with `0 ≤ a < b ≤ 1`; overlapping and
    /// adjacent arcs are merged.
    pub fn new(arcs: Vec<(BigRational, BigRational)>) -> Result<ArcSet> {
        let one = BigRational::one();
        for (a, b) in &arcs {
            if a.is_negative() || a >= b || *b > one {
                return Err(Error::Domain(format!(
                    "arc [{a}, {b}) must satisfy 0 ≤ a < b ≤ 1"
                )));
            }
        }
        Ok(ArcSet::normalized(arcs, vec![]))
    }

    fn normalized(
        mut arcs: Vec<(BigRational, BigRational)>,
        mut punctures: Vec<BigRational>,
    ) -> ArcSet {
        arcs.retain(|(a, b)| a < b);
        arcs.sort();
        let mut merged: Vec<(BigRational, BigRational)> = Vec::with_capacity(arcs.len());
        for (a, b) in arcs {
            if let Some(last) = merged.last_mut() {
                if a <= last.1 {
                    if b > last.1 {
                        last.1 = b;
                    }
                    continue;
                }
            }
            merged.push((a, b));
        }
        punctures.sort();
        punctures.dedup();
        punctures.retain(|p| merged.iter().any(|(a, b)| a <= p && p < b));
        ArcSet {
            arcs: merged,
            punctures,
        }
    }

    pub fn empty() -> ArcSet {
        ArcSet {
            arcs: vec![],
            punctures: vec![],
        }
    }

    /// The full circle `[0, 1)`.
    pub fn full() -> ArcSet {
        ArcSet {
            arcs: vec![(BigRational::zero(), BigRational::one())],
            punctures: vec![],
        }
    }

    /// Full circle minus a finite set of points: a dense open set of
    /// measure one, represented exactly.
    pub fn full_minus_points(points: &[BigRational]) -> ArcSet {
        let punctures: Vec<BigRational> = points.iter().map(frac_mod1).collect();
        ArcSet::normalized(
            vec![(BigRational::zero(), BigRational::one())],
            punctures,
        )
    }

    /// Remove finitely many points from this set.
    pub fn puncture(&self, points: &[BigRational]) -> ArcSet {
        let mut punctures = self.punctures.clone();
        punctures.extend(points.iter().map(frac_mod1));
        ArcSet::normalized(self.arcs.clone(), punctures)
    }

    /// The arcs in canonical order (ignoring punctures).
    pub fn arcs(&self) -> &[(BigRational, BigRational)] {
        &self.arcs
    }

    /// The removed points in canonical order.
    pub fn punctures(&self) -> &[BigRational] {
        &self.punctures
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Exact Lebesgue measure (punctures are null).
    pub fn measure(&self) -> BigRational {
        self.arcs
            .iter()
            .fold(BigRational::zero(), |acc, (a, b)| acc + (b - a))
    }

    /// Membership of a point (taken mod 1).
    pub fn contains_point(&self, x: &BigRational) -> bool {
        let x = frac_mod1(x);
        self.arcs.iter().any(|(a, b)| *a <= x && x < *b) && !self.punctures.contains(&x)
    }

    /// Pointwise-exact union.
    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut arcs = self.arcs.clone();
        arcs.extend(other.arcs.iter().cloned());
        // A puncture survives only where the other set does not cover it.
        let punctures = self
            .punctures
            .iter()
            .filter(|p| !other.contains_point(p))
            .chain(other.punctures.iter().filter(|p| !self.contains_point(p)))
            .cloned()
            .collect();
        ArcSet::normalized(arcs, punctures)
    }

    /// Pointwise-exact intersection.
    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut arcs = Vec::new();
        for (a1, b1) in &self.arcs {
            for (a2, b2) in &other.arcs {
                let lo = a1.max(a2).clone();
                let hi = b1.min(b2).clone();
                if lo < hi {
                    arcs.push((lo, hi));
                }
            }
        }
        let punctures = self
            .punctures
            .iter()
            .chain(other.punctures.iter())
            .cloned()
            .collect();
        ArcSet::normalized(arcs, punctures)
    }

    /// Complement inside the circle. Exact on pure arc sets; punctures of
    /// `self` would become isolated points of the complement, which this
    /// class cannot hold — they are dropped (a null set), so with
    /// punctures present the result is correct up to measure zero.
    pub fn complement(&self) -> ArcSet {
        let mut arcs = Vec::with_capacity(self.arcs.len() + 1);
        let mut prev = BigRational::zero();
        for (a, b) in &self.arcs {
            if *a > prev {
                arcs.push((prev, a.clone()));
            }
            prev = b.clone();
        }
        if prev < BigRational::one() {
            arcs.push((prev, BigRational::one()));
        }
        ArcSet {
            arcs,
            punctures: vec![],
        }
    }

    /// Rotate by `t`: `{x + t mod 1}`, splitting arcs across the wrap.
    pub fn translate(&self, t: &BigRational) -> ArcSet {
        let one = BigRational::one();
        let shift = frac_mod1(t);
        let mut arcs = Vec::with_capacity(self.arcs.len() + 1);
        for (a, b) in &self.arcs {
            let na = a + &shift;
            let nb = b + &shift;
            if nb <= one {
                arcs.push((na, nb));
            } else if na >= one {
                arcs.push((na - &one, nb - &one));
            } else {
                arcs.push((na, one.clone()));
                arcs.push((BigRational::zero(), nb - &one));
            }
        }
        let punctures = self
            .punctures
            .iter()
            .map(|p| frac_mod1(&(p + &shift)))
            .collect();
        ArcSet::normalized(arcs, punctures)
    }

    /// Set difference `self ∖ other`: exact on pure arc sets, correct up
    /// to measure zero when `other` carries punctures (see `complement`).
    pub fn minus(&self, other: &ArcSet) -> ArcSet {
        self.intersect(&other.complement())
    }

    /// All endpoints and punctures (candidate rotation offsets and
    /// refinement breakpoints).
    pub fn endpoints(&self) -> Vec<BigRational> {
        let mut pts = Vec::with_capacity(2 * self.arcs.len() + self.punctures.len());
        for (a, b) in &self.arcs {
            pts.push(a.clone());
            pts.push(b.clone());
        }
        pts.extend(self.punctures.iter().cloned());
        pts
    }
}

impl std::fmt::Display for ArcSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.arcs.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self
            .arcs
            .iter()
            .map(|(a, b)| format!("[{a},{b})"))
            .collect();
        write!(f, "{}", parts.join(" ∪ "))?;
        if !self.punctures.is_empty() {
            let pts: Vec<String> = self.punctures.iter().map(|p| p.to_string()).collect();
            write!(f, " ∖ {{{}}}", pts.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arcset(pairs: &[(i64, i64, i64)]) -> ArcSet {
        // (p_a, p_b, q): arc [p_a/q, p_b/q)
        ArcSet::new(
            pairs
                .iter()
                .map(|&(a, b, q)| (rat(a, q), rat(b, q)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_reversed_and_out_of_range_arcs() {
        assert!(ArcSet::new(vec![(rat(1, 2), rat(1, 4))]).is_err());
        assert!(ArcSet::new(vec![(rat(-1, 4), rat(1, 4))]).is_err());
        assert!(ArcSet::new(vec![(rat(1, 2), rat(3, 2))]).is_err());
    }

    #[test]
    fn overlapping_and_adjacent_arcs_merge() {
        let s = arcset(&[(0, 2, 8), (1, 3, 8), (3, 4, 8)]);
        assert_eq!(s.arcs().len(), 1);
        assert_eq!(s.measure(), rat(1, 2));
    }

    #[test]
    fn measure_of_half_arc_is_one_half() {
        assert_eq!(arcset(&[(0, 1, 2)]).measure(), rat(1, 2));
        assert_eq!(ArcSet::full().measure(), rat(1, 1));
        assert_eq!(ArcSet::empty().measure(), rat(0, 1));
    }

    #[test]
    fn complement_of_middle_arc() {
        let s = arcset(&[(1, 3, 4)]);
        let c = s.complement();
        assert_eq!(c, arcset(&[(0, 1, 4), (3, 4, 4)]));
        assert_eq!(c.measure() + s.measure(), rat(1, 1));
    }

    #[test]
    fn translation_wraps_and_preserves_measure() {
        let s = arcset(&[(3, 4, 4)]); // [3/4, 1)
        let t = s.translate(&rat(1, 2));
        assert_eq!(t, arcset(&[(1, 2, 4)]));
        let w = s.translate(&rat(1, 8)); // [7/8, 9/8) wraps
        assert_eq!(w, arcset(&[(0, 1, 8), (7, 8, 8)]));
        assert_eq!(w.measure(), rat(1, 4));
        assert!(w.contains_point(&rat(0, 1)));
        assert!(w.contains_point(&rat(15, 16)));
        assert!(!w.contains_point(&rat(1, 2)));
    }

    #[test]
    fn intersection_of_shifted_half_circles() {
        let s = arcset(&[(0, 1, 2)]);
        let shifted = s.translate(&rat(1, 4));
        assert_eq!(s.intersect(&shifted), arcset(&[(1, 2, 4)]));
        // The opposite rotation direction gives the other quarter.
        let back = s.translate(&rat(-1, 4));
        assert_eq!(s.intersect(&back), arcset(&[(0, 1, 4)]));
    }

    #[test]
    fn punctured_circle_keeps_measure_one_but_excludes_the_point() {
        let s = ArcSet::full_minus_points(&[rat(1, 3)]);
        assert_eq!(s.measure(), rat(1, 1));
        assert!(!s.contains_point(&rat(1, 3)));
        assert!(s.contains_point(&rat(2, 3)));
        assert_ne!(s, ArcSet::full());
    }

    #[test]
    fn punctures_translate_with_the_set() {
        let s = ArcSet::full_minus_points(&[rat(0, 1)]);
        let t = s.translate(&rat(1, 3));
        assert_eq!(t, ArcSet::full_minus_points(&[rat(1, 3)]));
        assert_ne!(t, s);
    }

    #[test]
    fn union_heals_a_puncture_covered_by_the_other_set() {
        let s = ArcSet::full_minus_points(&[rat(1, 2)]);
        let patch = arcset(&[(1, 3, 4)]);
        let u = s.union(&patch);
        assert_eq!(u, ArcSet::full());
        // A puncture outside the other set survives.
        let elsewhere = arcset(&[(0, 1, 4)]);
        let v = s.union(&elsewhere);
        assert!(!v.contains_point(&rat(1, 2)));
    }

    #[test]
    fn intersection_accumulates_punctures() {
        let s = ArcSet::full_minus_points(&[rat(1, 4)]);
        let t = ArcSet::full_minus_points(&[rat(3, 4)]);
        let i = s.intersect(&t);
        assert_eq!(i.punctures().len(), 2);
        assert!(!i.contains_point(&rat(1, 4)));
        assert!(!i.contains_point(&rat(3, 4)));
        assert_eq!(i.measure(), rat(1, 1));
    }

    proptest! {
        #[test]
        fn measure_is_subadditive_and_monotone(
            raw in proptest::collection::vec((0i64..24, 1i64..24), 1..4),
            raw2 in proptest::collection::vec((0i64..24, 1i64..24), 1..4),
        ) {
            let mk = |raw: &[(i64,i64)]| {
                let arcs: Vec<_> = raw.iter().map(|&(a, len)| {
                    let a = a % 24;
                    let b = (a + len).min(24);
                    (rat(a, 24), rat(b, 24))
                }).filter(|(a,b)| a < b).collect();
                ArcSet::new(arcs).unwrap()
            };
            let s = mk(&raw);
            let t = mk(&raw2);
            let u = s.union(&t);
            let i = s.intersect(&t);
            prop_assert!(u.measure() <= s.measure() + t.measure());
            prop_assert!(i.measure() <= s.measure().min(t.measure()));
            // Inclusion–exclusion is exact for finite arc unions.
            prop_assert_eq!(u.measure() + i.measure(), s.measure() + t.measure());
        }

        #[test]
        fn translate_by_sum_composes(a in 0i64..48, b in 0i64..48) {
            let s = ArcSet::new(vec![(rat(1, 6), rat(5, 12))]).unwrap();
            let two_steps = s.translate(&rat(a, 48)).translate(&rat(b, 48));
            let one_step = s.translate(&rat(a + b, 48));
            prop_assert_eq!(two_steps, one_step);
        }
    }
}
