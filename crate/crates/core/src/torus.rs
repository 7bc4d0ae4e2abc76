//! Laboratory for the integer group acting on compact operators over the
//! circle and the 2-torus.
//!
//! Functions on the circle are sampled on a dyadic grid and carry a
//! *declared jump locus* with one-sided limits, so "the product is
//! continuous" becomes a decidable predicate instead of a sampling
//! artifact. On top of that sit:
//!
//! - si-norms (`L² + L∞`) and the relative-continuity test for pairs,
//! - closed-form frequency components of rank-one operators, realized as
//!   modulation–rotation symbols `M_g ∘ R_χ*` with an exact rational
//!   rotation, plus the full symbol calculus (composition, adjoint),
//! - Fejér-weighted partial sums converging to the closed form,
//! - exact arc-set supports of the frequency fibers,
//! - the twisted line-bundle data over the torus: the unitary factor
//!   `h_χ`, the trivialization `σ_χ`, the canonical branch section `ψ`,
//!   gluing checks, and winding numbers,
//! - conjugacy of decomposition data `(support, twist, branch)`,
//! - the defect modulus whose decay characterizes relative continuity.
//!
//! Conventions: the circle is `ℝ/ℤ` with normalized measure; characters
//! are written additively as rationals in `[0, 1)` ("turns"); the degree-t
//! gauge action multiplies by `ω ↦ e^{−2πitω}`; the rotation part of a
//! symbol acts by `(R_χ* u)(ω) = u(ω + χ)`.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::arcs::{frac_mod1, ArcSet};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tol;

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Unit complex number `e^{2πi·turns}` (the angle is reduced mod 1 first,
/// so equal rationals give bitwise-identical values).
pub fn phase(turns: &BigRational) -> C64 {
    C64::from_polar(1.0, TAU * rat_f64(&frac_mod1(turns)))
}

/// Grid index of a rational point: `r·n` when that is an integer.
fn grid_index(r: &BigRational, n: usize) -> Result<usize> {
    let scaled = frac_mod1(r) * BigRational::from_integer(BigInt::from(n));
    if !scaled.is_integer() {
        return Err(Error::OffGrid {
            value: r.to_string(),
            grid: n,
        });
    }
    Ok(scaled.to_integer().to_usize().unwrap_or(0) % n.max(1))
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::Domain(format!(
            "grid size {n} must be a power of two and at least 4"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sampled circle functions with declared jumps
// ---------------------------------------------------------------------------

/// A declared discontinuity at the grid point `index/n` with its one-sided
/// limits. The stored sample at that index must equal the right limit
/// (functions are right-continuous by convention).
#[derive(Clone, Debug)]
pub struct Jump {
    pub index: usize,
    pub left: C64,
    pub right: C64,
}

/// A function on the circle sampled at `ω_k = k/n`, together with a
/// declared jump locus and a smoothness budget: away from the jumps, the
/// discrete second differences must stay below the budget (checked at
/// construction, not assumed).
#[derive(Clone, Debug)]
pub struct GridCircleFn {
    n: usize,
    values: Vec<C64>,
    jumps: Vec<Jump>,
    budget: f64,
}

fn measured_budget_circle(values: &[C64], jump_idx: &BTreeSet<usize>) -> f64 {
    let n = values.len();
    let mut worst = 0.0f64;
    for k in 0..n {
        let kp = (k + 1) % n;
        // The windows (k−1, k, k+1) straddling a declared jump at k or k+1
        // are exempt; a jump at k−1 is not, because the sample there is the
        // right limit and the window lies entirely on one smooth piece.
        if jump_idx.contains(&k) || jump_idx.contains(&kp) {
            continue;
        }
        let km = (k + n - 1) % n;
        let d = (values[kp] - values[k] * 2.0 + values[km]).norm();
        worst = worst.max(d);
    }
    worst
}

impl GridCircleFn {
    pub fn new(n: usize, values: Vec<C64>, mut jumps: Vec<Jump>, budget: f64) -> Result<Self> {
        check_grid_size(n)?;
        if values.len() != n {
            return Err(Error::Domain(format!(
                "expected {n} samples, got {}",
                values.len()
            )));
        }
        jumps.sort_by_key(|j| j.index);
        let mut idx = BTreeSet::new();
        for j in &jumps {
            if j.index >= n {
                return Err(Error::Domain(format!(
                    "jump index {} outside grid of size {n}",
                    j.index
                )));
            }
            if !idx.insert(j.index) {
                return Err(Error::Domain(format!("duplicate jump index {}", j.index)));
            }
            if (j.right - values[j.index]).norm() > tol::EXACT {
                return Err(Error::Domain(format!(
                    "declared right limit at index {} disagrees with the stored sample",
                    j.index
                )));
            }
        }
        let measured = measured_budget_circle(&values, &idx);
        if measured > budget {
            return Err(Error::InvariantViolation(format!(
                "second differences reach {measured:.3e} away from the declared jumps, \
                 exceeding the smoothness budget {budget:.3e}"
            )));
        }
        Ok(GridCircleFn {
            n,
            values,
            jumps,
            budget,
        })
    }

    /// Build from samples and jumps, declaring the measured budget.
    pub fn with_measured_budget(n: usize, values: Vec<C64>, jumps: Vec<Jump>) -> Result<Self> {
        let idx: BTreeSet<usize> = jumps.iter().map(|j| j.index).collect();
        let budget = measured_budget_circle(&values, &idx);
        GridCircleFn::new(n, values, jumps, budget)
    }

    /// Sample a continuous function (empty jump locus, measured budget).
    pub fn smooth(n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values: Vec<C64> = (0..n).map(|k| f(k as f64 / n as f64)).collect();
        GridCircleFn::with_measured_budget(n, values, vec![])
    }

    pub fn constant(n: usize, c: C64) -> Result<Self> {
        GridCircleFn::new(n, vec![c; n], vec![], 0.0)
    }

    pub fn zero(n: usize) -> Result<Self> {
        GridCircleFn::constant(n, C64::new(0.0, 0.0))
    }

    /// `amplitude · 1_S` for an arc set with on-grid endpoints. Punctures
    /// of `S` are null sets and do not affect the sampled indicator; they
    /// are ignored here.
    pub fn indicator(n: usize, arcs: &ArcSet, amplitude: C64) -> Result<Self> {
        check_grid_size(n)?;
        let big_n = BigRational::from_integer(BigInt::from(n));
        let mut candidate_idx = BTreeSet::new();
        for (a, b) in arcs.arcs() {
            for e in [a, b] {
                if !(e * &big_n).is_integer() {
                    return Err(Error::OffGrid {
                        value: e.to_string(),
                        grid: n,
                    });
                }
                candidate_idx.insert(grid_index(e, n)?);
            }
        }
        let zero = C64::new(0.0, 0.0);
        let values: Vec<C64> = (0..n)
            .map(|k| {
                let p = BigRational::new(BigInt::from(k), BigInt::from(n));
                if arcs.arcs().iter().any(|(a, b)| *a <= p && p < *b) {
                    amplitude
                } else {
                    zero
                }
            })
            .collect();
        let mut jumps = Vec::new();
        for k in candidate_idx {
            // Left limit at k/n: inside iff some arc (a, b] covers it,
            // with the point 0 probed as 1 for the wrap-around.
            let p = if k == 0 {
                BigRational::from_integer(BigInt::from(1))
            } else {
                BigRational::new(BigInt::from(k), BigInt::from(n))
            };
            let left_in = arcs.arcs().iter().any(|(a, b)| *a < p && p <= *b);
            let left = if left_in { amplitude } else { zero };
            let right = values[k];
            if left != right {
                jumps.push(Jump {
                    index: k,
                    left,
                    right,
                });
            }
        }
        GridCircleFn::new(n, values, jumps, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// The sample (= right limit) at grid index `k`.
    pub fn value(&self, k: usize) -> C64 {
        self.values[k % self.n]
    }

    /// The left limit at grid index `k` (the sample itself off the jump
    /// locus).
    pub fn left_limit(&self, k: usize) -> C64 {
        let k = k % self.n;
        match self.jumps.iter().find(|j| j.index == k) {
            Some(j) => j.left,
            None => self.values[k],
        }
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> GridCircleFn {
        GridCircleFn {
            n: self.n,
            values: self.values.iter().map(|v| v.conj()).collect(),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump {
                    index: j.index,
                    left: j.left.conj(),
                    right: j.right.conj(),
                })
                .collect(),
            budget: self.budget,
        }
    }

    /// Argument shift `ω ↦ f(ω + m/n)` (an exact index rotation).
    pub fn shift_arg(&self, m: i64) -> GridCircleFn {
        let n = self.n as i64;
        let at = |j: i64| ((j % n + n) % n) as usize;
        GridCircleFn {
            n: self.n,
            values: (0..n).map(|j| self.values[at(j + m)]).collect(),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump {
                    index: at(j.index as i64 - m),
                    left: j.left,
                    right: j.right,
                })
                .collect(),
            budget: self.budget,
        }
    }

    /// Pointwise product with one-sided-limit bookkeeping; jumps where the
    /// limits agree exactly are dropped.
    pub fn pointwise_mul(&self, other: &GridCircleFn) -> Result<GridCircleFn> {
        if self.n != other.n {
            return Err(Error::Domain(format!(
                "grid mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let values: Vec<C64> = (0..self.n)
            .map(|k| self.values[k] * other.values[k])
            .collect();
        let mut jumps = Vec::new();
        let locus: BTreeSet<usize> = self
            .jumps
            .iter()
            .chain(other.jumps.iter())
            .map(|j| j.index)
            .collect();
        for k in locus {
            let left = self.left_limit(k) * other.left_limit(k);
            let right = values[k];
            if left != right {
                jumps.push(Jump {
                    index: k,
                    left,
                    right,
                });
            }
        }
        GridCircleFn::with_measured_budget(self.n, values, jumps)
    }

    /// `L²` norm with respect to normalized measure (Riemann sum).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s / self.n as f64).sqrt()
    }

    /// Sup of `|f|` over samples and one-sided limits.
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for v in &self.values {
            m = m.max(v.norm());
        }
        for j in &self.jumps {
            m = m.max(j.left.norm());
        }
        m
    }

    /// Largest pointwise deviation from another sampled function.
    /// Panics on grid mismatch.
    pub fn max_abs_diff(&self, other: &GridCircleFn) -> f64 {
        assert_eq!(self.n, other.n, "grid mismatch");
        (0..self.n)
            .map(|k| (self.values[k] - other.values[k]).norm())
            .fold(0.0, f64::max)
    }
}

/// The singly-improper norm `‖f‖₂ + ‖f‖∞` of an integrable vector, the
/// natural norm on square-integrable *and* bounded functions.
pub fn si_norm_l2linf(xi: &GridCircleFn) -> f64 {
    xi.l2_norm() + xi.sup_norm()
}

/// Outcome of the relative-continuity test for a pair of vectors.
#[derive(Clone, Copy, Debug)]
pub struct RcTorusReport {
    /// Largest jump of `conj(ξ)·η` over the combined jump locus.
    pub defect: f64,
    /// Whether every jump of the product vanishes (within tolerance), i.e.
    /// the product is continuous on the circle.
    pub continuous: bool,
}

/// A pair `(ξ, η)` is relatively continuous exactly when `conj(ξ)·η` is
/// continuous; on a compact circle that means every one-sided jump of the
/// product closes up.
pub fn rc_check_torus(xi: &GridCircleFn, eta: &GridCircleFn) -> Result<RcTorusReport> {
    if xi.n != eta.n {
        return Err(Error::Domain(format!(
            "grid mismatch: {} vs {}",
            xi.n, eta.n
        )));
    }
    let locus: BTreeSet<usize> = xi
        .jumps
        .iter()
        .chain(eta.jumps.iter())
        .map(|j| j.index)
        .collect();
    let mut defect = 0.0f64;
    for k in locus {
        let left = xi.left_limit(k).conj() * eta.left_limit(k);
        let right = xi.value(k).conj() * eta.value(k);
        defect = defect.max((left - right).norm());
    }
    Ok(RcTorusReport {
        defect,
        continuous: defect <= tol::MEMBERSHIP,
    })
}

// ---------------------------------------------------------------------------
// Modulation–rotation symbols and the closed-form frequency component
// ---------------------------------------------------------------------------

/// The operator `M_g ∘ R_χ*`: multiply by the sampled factor `g` after
/// rotating the argument by the exact rational `χ` (in turns):
/// `(M_g R_χ* u)(ω) = g(ω)·u(ω + χ)`.
#[derive(Clone, Debug)]
pub struct Symbol {
    rotation: BigRational,
    factor: GridCircleFn,
}

impl Symbol {
    pub fn new(rotation: &BigRational, factor: GridCircleFn) -> Symbol {
        Symbol {
            rotation: frac_mod1(rotation),
            factor,
        }
    }

    pub fn rotation(&self) -> &BigRational {
        &self.rotation
    }

    pub fn factor(&self) -> &GridCircleFn {
        &self.factor
    }

    /// Operator norm of `M_g R_χ*` = sup of `|g|`.
    pub fn sup_norm(&self) -> f64 {
        self.factor.sup_norm()
    }
}

/// Closed form of the frequency-`χ` component of the rank-one operator
/// `|ξ⟩⟨η|`: the symbol `M_g ∘ R_χ*` with `g(ω) = ξ(ω)·conj(η(ω + χ))`.
/// The jump locus of `g` is the union of the locus of `ξ` and the locus of
/// `η` rotated by `−χ`. Requires `χ` on the sampling grid.
pub fn e_chi_closed_form(
    xi: &GridCircleFn,
    eta: &GridCircleFn,
    chi: &BigRational,
) -> Result<Symbol> {
    if xi.n != eta.n {
        return Err(Error::Domain(format!(
            "grid mismatch: {} vs {}",
            xi.n, eta.n
        )));
    }
    let m = grid_index(chi, xi.n)? as i64;
    let factor = xi.pointwise_mul(&eta.shift_arg(m).conj())?;
    Ok(Symbol::new(chi, factor))
}

/// Composition law `(M_f R_χ*)(M_g R_ω*) = M_{f·(g∘+χ)} R_{χ+ω}*`: the
/// product symbol is `θ ↦ f(θ)·g(θ + χ)` with rotation `χ + ω`. Both
/// rotations must be on the sampling grid.
pub fn multiply_symbols(s1: &Symbol, s2: &Symbol) -> Result<Symbol> {
    if s1.factor.n != s2.factor.n {
        return Err(Error::Domain(format!(
            "grid mismatch: {} vs {}",
            s1.factor.n, s2.factor.n
        )));
    }
    let m1 = grid_index(&s1.rotation, s1.factor.n)? as i64;
    grid_index(&s2.rotation, s2.factor.n)?;
    let factor = s1.factor.pointwise_mul(&s2.factor.shift_arg(m1))?;
    Ok(Symbol::new(&(&s1.rotation + &s2.rotation), factor))
}

/// Adjoint `(M_f R_χ*)* = M_{θ ↦ conj(f(θ−χ))} R_{−χ}*`.
pub fn adjoint_symbol(s: &Symbol) -> Result<Symbol> {
    let m = grid_index(&s.rotation, s.factor.n)? as i64;
    let factor = s.factor.shift_arg(-m).conj();
    Ok(Symbol::new(&(-s.rotation.clone()), factor))
}

// ---------------------------------------------------------------------------
// Fejér-summed frequency component
// ---------------------------------------------------------------------------

/// Result of the Fejér-weighted partial sum for a frequency component
/// applied to a test vector.
#[derive(Clone, Debug)]
pub struct FejerResult {
    /// The vector `Σ_{|t|≤M} (1 − |t|/(M+1))·e^{−2πiχt}·(α_t|ξ⟩⟨η|)ζ` on
    /// the grid.
    pub values: Vec<C64>,
    /// Sup distance to the closed form applied to `ζ`, when `χ` lies on
    /// the grid (`None` for off-grid `χ`, where no exact reference exists
    /// at this resolution).
    pub residual: Option<f64>,
}

/// Fejér-weighted partial sum of the frequency-`χ` component of `|ξ⟩⟨η|`
/// applied to `ζ`. The degree-`t` gauge action multiplies by
/// `ω ↦ e^{−2πitω}`, and the weights `1 − |t|/(M+1)` lie in `[0,1]` and
/// tend to 1 locally uniformly, so the sums converge to the closed form
/// at rate `O(1/M)` for smooth data.
pub fn e_chi_fejer(
    xi: &GridCircleFn,
    eta: &GridCircleFn,
    chi: &BigRational,
    m_window: usize,
    zeta: &GridCircleFn,
) -> Result<FejerResult> {
    let n = xi.n;
    if eta.n != n || zeta.n != n {
        return Err(Error::Domain(format!(
            "grid mismatch: {} / {} / {}",
            n, eta.n, zeta.n
        )));
    }
    // Root-of-unity table: ph[k] = e^{2πik/n}, indexed exactly mod n.
    let ph: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect();
    let at = |j: i64| ((j % n as i64 + n as i64) % n as i64) as usize;
    let chi_f = rat_f64(&frac_mod1(chi));
    let m_i = m_window as i64;
    // Inner products c_t = (1/n)·Σ_k conj(η_k)·ζ_k·e^{2πitk/n}, combined
    // with the Fejér weight and the character phase e^{−2πiχt}.
    let mut weighted: Vec<C64> = Vec::with_capacity(2 * m_window + 1);
    for t in -m_i..=m_i {
        let mut c = C64::new(0.0, 0.0);
        for k in 0..n {
            c += eta.values[k].conj() * zeta.values[k] * ph[at(t * k as i64)];
        }
        c /= n as f64;
        let w = 1.0 - (t.abs() as f64) / (m_window as f64 + 1.0);
        weighted.push(c * w * C64::from_polar(1.0, -TAU * chi_f * t as f64));
    }
    let values: Vec<C64> = (0..n)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for (ti, d) in weighted.iter().enumerate() {
                let t = ti as i64 - m_i;
                acc += d * ph[at(-t * j as i64)];
            }
            xi.values[j] * acc
        })
        .collect();
    let residual = match grid_index(chi, n) {
        Ok(m) => {
            let mut worst = 0.0f64;
            for j in 0..n {
                let target = xi.values[j]
                    * eta.values[(j + m) % n].conj()
                    * zeta.values[(j + m) % n];
                worst = worst.max((values[j] - target).norm());
            }
            Some(worst)
        }
        Err(_) => None,
    };
    Ok(FejerResult { values, residual })
}

// ---------------------------------------------------------------------------
// Fiber supports as exact arc sets
// ---------------------------------------------------------------------------

/// Support of the frequency-`χ` fiber of the decomposition housed on an
/// open set `S`: functions supported on `S ∩ (S − χ)` (the rotated copy is
/// translated by `−χ`, so that `g(· + χ)` stays supported in `S`).
pub fn fell_fiber_rs(s: &ArcSet, chi: &BigRational) -> ArcSet {
    s.intersect(&s.translate(&(-chi.clone())))
}

// ---------------------------------------------------------------------------
// Line-bundle data over the torus
// ---------------------------------------------------------------------------

/// Phase exponent (in turns) of the unitary factor `h_χ` picked up by the
/// frequency-`χ` fiber of the twist-`n` bundle: for `χ = (a, b)` with
/// phase angle `a` (turns) and shift `b ∈ [0,1)`,
/// `h_χ(z, t) = z^{n(⌊t+b⌋−⌊t⌋)}·a^{n(⌊t+b⌋−t)}` with `z = e^{2πi·ζ}`.
/// Everything is rational, so the period-1 identity in `t` and `|h| = 1`
/// are exact statements about the exponent.
pub fn h_chi_exponent(
    n: i64,
    a_turns: &BigRational,
    b: &BigRational,
    z_turns: &BigRational,
    t: &BigRational,
) -> BigRational {
    let nn = BigRational::from_integer(BigInt::from(n));
    let floor_tb = (t + b).floor();
    let jumps = &floor_tb - t.floor();
    frac_mod1(&(z_turns * &nn * jumps + a_turns * &nn * (&floor_tb - t)))
}

/// `h_χ(z, t)` on unit complex inputs. Errors on non-unit `a` or `z` and
/// on `b` outside `[0, 1)`.
pub fn h_chi(n: i64, a: C64, b: f64, z: C64, t: f64) -> Result<C64> {
    if (a.norm() - 1.0).abs() > tol::IDENTITY || (z.norm() - 1.0).abs() > tol::IDENTITY {
        return Err(Error::Domain(
            "h requires unit-modulus a and z".to_string(),
        ));
    }
    if !(0.0..1.0).contains(&b) {
        return Err(Error::Domain(format!("shift b = {b} must lie in [0, 1)")));
    }
    let jumps = ((t + b).floor() - t.floor()) as i32;
    let zn = i32::try_from(n)
        .map_err(|_| Error::Domain(format!("twist {n} out of range")))?
        .checked_mul(jumps)
        .ok_or_else(|| Error::Domain("twist·jumps overflows".to_string()))?;
    Ok(z.powi(zn) * C64::from_polar(1.0, a.arg() * n as f64 * ((t + b).floor() - t)))
}

/// Phase exponent (in turns) of the trivialization `σ_χ(t) = a^{−nt}`,
/// left unreduced so that `σ(t+1)/σ(t) = a^{−n}` is an exact identity of
/// exponents.
pub fn sigma_exponent(n: i64, a_turns: &BigRational, t: &BigRational) -> BigRational {
    -(a_turns * BigRational::from_integer(BigInt::from(n)) * t)
}

/// `σ_χ(t) = a^{−nt}` on a unit complex `a`.
pub fn sigma_trivialization(n: i64, a: C64, t: f64) -> Result<C64> {
    if (a.norm() - 1.0).abs() > tol::IDENTITY {
        return Err(Error::Domain("σ requires unit-modulus a".to_string()));
    }
    Ok(C64::from_polar(1.0, -a.arg() * n as f64 * t))
}

// ---------------------------------------------------------------------------
// Decomposition data and fibers
// ---------------------------------------------------------------------------

/// The support of a decomposition: an arc set on the circle, or a product
/// region on the 2-torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportSet {
    Circle(ArcSet),
    Torus { z: ArcSet, t: ArcSet },
}

/// The canonical measurable unit section used to trivialize the bundle:
/// constantly 1 for untwisted data, the branch `ψ(z, t) = z^{n⌊t⌋}` for a
/// nonzero twist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiConvention {
    ConstantOne,
    CanonicalBranch,
}

/// Classifying data of a continuous spectral decomposition over the
/// circle or torus: a support set, an integer twist (the degree of the
/// line bundle), and the canonical section convention. A nonzero twist
/// forces full support — proper open subsets of the circle or the torus
/// carry only trivial line bundles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionTriple {
    support: SupportSet,
    chern: i64,
    psi: PsiConvention,
}

impl DecompositionTriple {
    /// Decomposition data over the circle (necessarily untwisted).
    pub fn circle(support: ArcSet) -> DecompositionTriple {
        DecompositionTriple {
            support: SupportSet::Circle(support),
            chern: 0,
            psi: PsiConvention::ConstantOne,
        }
    }

    /// Decomposition data over the torus with product support and an
    /// integer twist.
    pub fn torus(z: ArcSet, t: ArcSet, chern: i64) -> Result<DecompositionTriple> {
        if chern != 0 && (z != ArcSet::full() || t != ArcSet::full()) {
            return Err(Error::InvariantViolation(
                "a nonzero twist requires full support: proper open subsets of the torus \
                 carry only trivial line bundles"
                    .to_string(),
            ));
        }
        Ok(DecompositionTriple {
            support: SupportSet::Torus { z, t },
            chern,
            psi: if chern == 0 {
                PsiConvention::ConstantOne
            } else {
                PsiConvention::CanonicalBranch
            },
        })
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn chern(&self) -> i64 {
        self.chern
    }

    pub fn psi(&self) -> PsiConvention {
        self.psi
    }
}

/// A rotation of the base: a single angle for the circle, a pair
/// (z-character angle, t-shift) for the torus, all in turns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rotation {
    Circle(BigRational),
    Torus { z: BigRational, t: BigRational },
}

/// A unitary phase factor sampled on a square grid over the torus,
/// stored as exact exponents (in turns): `value(i, j) = e^{2πi·exp(i,j)}`
/// at `z = i/grid`, `t = j/grid`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusSample {
    grid: usize,
    exponents: Vec<BigRational>,
}

impl TorusSample {
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn exponent(&self, zi: usize, tj: usize) -> &BigRational {
        &self.exponents[zi * self.grid + tj]
    }

    pub fn value(&self, zi: usize, tj: usize) -> C64 {
        phase(self.exponent(zi, tj))
    }
}

/// Description of one frequency fiber: its support, and the sampled
/// unitary symbol factor it is multiplied by (`None` means constantly 1,
/// the untwisted case).
#[derive(Clone, Debug)]
pub struct FiberDescriptor {
    pub support: SupportSet,
    pub symbol: Option<TorusSample>,
}

impl FiberDescriptor {
    /// Sampled symbol value, `1` when the symbol is trivial.
    pub fn symbol_value(&self, zi: usize, tj: usize) -> C64 {
        match &self.symbol {
            Some(s) => s.value(zi, tj),
            None => C64::new(1.0, 0.0),
        }
    }
}

/// The frequency-`χ` fiber of the decomposition described by a triple:
/// support `S ∩ (S − χ)` (computed per coordinate for product supports),
/// and, for a nonzero twist, the unitary factor `h_χ` sampled on a
/// `sample_grid × sample_grid` grid; every element of the fiber is a
/// continuous function on the support times that factor.
pub fn fell_fiber_triple(
    triple: &DecompositionTriple,
    rotation: &Rotation,
    sample_grid: usize,
) -> Result<FiberDescriptor> {
    match (&triple.support, rotation) {
        (SupportSet::Circle(s), Rotation::Circle(chi)) => Ok(FiberDescriptor {
            support: SupportSet::Circle(fell_fiber_rs(s, chi)),
            symbol: None,
        }),
        (SupportSet::Torus { z, t }, Rotation::Torus { z: a, t: b }) => {
            let support = SupportSet::Torus {
                z: fell_fiber_rs(z, a),
                t: fell_fiber_rs(t, b),
            };
            let symbol = if triple.chern == 0 {
                None
            } else {
                let g = sample_grid;
                if g == 0 {
                    return Err(Error::Domain("sample grid must be positive".to_string()));
                }
                let mut exponents = Vec::with_capacity(g * g);
                for zi in 0..g {
                    let zt = BigRational::new(BigInt::from(zi), BigInt::from(g));
                    for tj in 0..g {
                        let tt = BigRational::new(BigInt::from(tj), BigInt::from(g));
                        exponents.push(h_chi_exponent(triple.chern, a, b, &zt, &tt));
                    }
                }
                Some(TorusSample {
                    grid: g,
                    exponents,
                })
            };
            Ok(FiberDescriptor { support, symbol })
        }
        _ => Err(Error::Domain(
            "rotation dimension does not match the support".to_string(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Sampled functions on the closed strip over the torus
// ---------------------------------------------------------------------------

/// A declared horizontal discontinuity circle `{t = t_index/n}` with its
/// one-sided limit rows.
#[derive(Clone, Debug)]
pub struct TorusJump {
    pub t_index: usize,
    pub left: Vec<C64>,
    pub right: Vec<C64>,
}

/// A function on the closed strip (circle × [0, 1]) sampled at
/// `(z, t) = (i/n, j/n)` for `i < n`, `j ≤ n` — both edges included so
/// that gluing conditions are checkable. Carries a declared jump locus of
/// horizontal circles and a smoothness budget checked in both directions
/// away from the jumps.
#[derive(Clone, Debug)]
pub struct GridTorusFn {
    n: usize,
    values: Vec<Vec<C64>>,
    jumps: Vec<TorusJump>,
    budget: f64,
}

fn measured_budget_torus(values: &[Vec<C64>], jump_idx: &BTreeSet<usize>) -> f64 {
    let rows = values.len();
    let n = values[0].len();
    let mut worst = 0.0f64;
    for row in values {
        for i in 0..n {
            let d = (row[(i + 1) % n] - row[i] * 2.0 + row[(i + n - 1) % n]).norm();
            worst = worst.max(d);
        }
    }
    for j in 1..rows - 1 {
        if jump_idx.contains(&j) || jump_idx.contains(&(j + 1)) {
            continue;
        }
        for i in 0..n {
            let d = (values[j + 1][i] - values[j][i] * 2.0 + values[j - 1][i]).norm();
            worst = worst.max(d);
        }
    }
    worst
}

impl GridTorusFn {
    pub fn new(
        n: usize,
        values: Vec<Vec<C64>>,
        mut jumps: Vec<TorusJump>,
        budget: f64,
    ) -> Result<Self> {
        check_grid_size(n)?;
        if values.len() != n + 1 || values.iter().any(|r| r.len() != n) {
            return Err(Error::Domain(format!(
                "expected {} rows of {} samples on the closed strip",
                n + 1,
                n
            )));
        }
        jumps.sort_by_key(|j| j.t_index);
        let mut idx = BTreeSet::new();
        for j in &jumps {
            if j.t_index > n {
                return Err(Error::Domain(format!(
                    "jump row {} outside the strip of height {n}",
                    j.t_index
                )));
            }
            if !idx.insert(j.t_index) {
                return Err(Error::Domain(format!("duplicate jump row {}", j.t_index)));
            }
            if j.left.len() != n || j.right.len() != n {
                return Err(Error::Domain("jump limit rows have wrong length".to_string()));
            }
            for i in 0..n {
                if (j.right[i] - values[j.t_index][i]).norm() > tol::EXACT {
                    return Err(Error::Domain(format!(
                        "declared right limit at row {} disagrees with the stored samples",
                        j.t_index
                    )));
                }
            }
        }
        let measured = measured_budget_torus(&values, &idx);
        if measured > budget {
            return Err(Error::InvariantViolation(format!(
                "second differences reach {measured:.3e} away from the declared jumps, \
                 exceeding the smoothness budget {budget:.3e}"
            )));
        }
        Ok(GridTorusFn {
            n,
            values,
            jumps,
            budget,
        })
    }

    pub fn with_measured_budget(
        n: usize,
        values: Vec<Vec<C64>>,
        jumps: Vec<TorusJump>,
    ) -> Result<Self> {
        let idx: BTreeSet<usize> = jumps.iter().map(|j| j.t_index).collect();
        let budget = measured_budget_torus(&values, &idx);
        GridTorusFn::new(n, values, jumps, budget)
    }

    /// Sample a continuous function `f(z_turns, t)` on the closed strip.
    pub fn smooth(n: usize, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        let values: Vec<Vec<C64>> = (0..=n)
            .map(|j| {
                (0..n)
                    .map(|i| f(i as f64 / n as f64, j as f64 / n as f64))
                    .collect()
            })
            .collect();
        GridTorusFn::with_measured_budget(n, values, vec![])
    }

    /// The canonical branch section `ψ(z, t) = z^{n⌊t⌋}` of the twist-`n`
    /// bundle, sampled with exact phase exponents: rows `t < 1` are 1, the
    /// row `t = 1` is `z^n`, with the jump circle declared at the edge.
    pub fn psi_section(chern: i64, n: usize) -> Result<Self> {
        check_grid_size(n)?;
        let one = C64::new(1.0, 0.0);
        let mut values: Vec<Vec<C64>> = (0..n).map(|_| vec![one; n]).collect();
        let top: Vec<C64> = (0..n)
            .map(|i| {
                phase(&BigRational::new(
                    BigInt::from(chern) * BigInt::from(i),
                    BigInt::from(n),
                ))
            })
            .collect();
        values.push(top.clone());
        let jumps = if chern == 0 {
            vec![]
        } else {
            vec![TorusJump {
                t_index: n,
                left: vec![one; n],
                right: top,
            }]
        };
        GridTorusFn::with_measured_budget(n, values, jumps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Vec<C64>] {
        &self.values
    }

    pub fn jumps(&self) -> &[TorusJump] {
        &self.jumps
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

/// Result of the edge-gluing check for sections of the twist-`n` bundle.
#[derive(Clone, Copy, Debug)]
pub struct SectionReport {
    pub defect: f64,
    pub pass: bool,
}

/// A function on the closed strip descends to a section of the twist-`n`
/// line bundle over the torus exactly when the edges glue through `z^n`:
/// `f(z, 1) = z^n·f(z, 0)`. The comparison uses exact phase exponents for
/// `z^n`, so the canonical branch passes with defect exactly 0.
pub fn line_bundle_section_check(chern: i64, f: &GridTorusFn) -> SectionReport {
    let n = f.n;
    let mut defect = 0.0f64;
    for i in 0..n {
        let zn = phase(&BigRational::new(
            BigInt::from(chern) * BigInt::from(i),
            BigInt::from(n),
        ));
        defect = defect.max((f.values[n][i] - zn * f.values[0][i]).norm());
    }
    SectionReport {
        defect,
        pass: defect <= tol::MEMBERSHIP,
    }
}

// ---------------------------------------------------------------------------
// Winding numbers
// ---------------------------------------------------------------------------

/// Winding number of a closed nowhere-zero loop from samples: the
/// principal-branch argument increments are summed and divided by 2π.
/// Requires at least 4 samples, no zero sample, and every increment
/// strictly below π in magnitude (otherwise the sampling cannot certify
/// the homotopy class).
pub fn winding_number(samples: &[C64]) -> Result<i64> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            context: "winding_number",
            need: 4,
            got: samples.len(),
        });
    }
    for z in samples {
        if z.norm() == 0.0 {
            return Err(Error::ZeroSample);
        }
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain("non-finite loop sample".to_string()));
        }
    }
    let mut total = 0.0f64;
    for k in 0..samples.len() {
        let next = samples[(k + 1) % samples.len()];
        let step = (next / samples[k]).arg();
        if step.abs() >= PI - 1e-9 {
            return Err(Error::ArgumentStepTooLarge { step });
        }
        total += step;
    }
    let w = total / TAU;
    let rounded = w.round();
    if (w - rounded).abs() > 0.25 {
        return Err(Error::Domain(format!(
            "argument sum {total:.6} is not close to a multiple of 2π"
        )));
    }
    Ok(rounded as i64)
}

// ---------------------------------------------------------------------------
// Conjugacy of decomposition data
// ---------------------------------------------------------------------------

fn circle_rotation_witness(s1: &ArcSet, s2: &ArcSet) -> Option<BigRational> {
    let mut candidates: BTreeSet<BigRational> = BTreeSet::new();
    candidates.insert(BigRational::zero());
    for e2 in s2.endpoints() {
        for e1 in s1.endpoints() {
            candidates.insert(frac_mod1(&(&e2 - &e1)));
        }
    }
    candidates.into_iter().find(|chi| &s1.translate(chi) == s2)
}

/// Two decomposition triples are conjugate exactly when a rotation
/// carries one support onto the other and the twists agree (rotations
/// pull every line bundle back to an isomorphic one, so the twist is a
/// complete invariant over full support). Returns a witness rotation, or
/// `None`. Candidate rotations are differences of endpoints (including
/// punctures), which exhaust all possible witnesses for arc-set supports.
pub fn conjugacy_check(t1: &DecompositionTriple, t2: &DecompositionTriple) -> Option<Rotation> {
    if t1.chern != t2.chern {
        return None;
    }
    match (&t1.support, &t2.support) {
        (SupportSet::Circle(s1), SupportSet::Circle(s2)) => {
            circle_rotation_witness(s1, s2).map(Rotation::Circle)
        }
        (SupportSet::Torus { z: z1, t: u1 }, SupportSet::Torus { z: z2, t: u2 }) => {
            let wz = circle_rotation_witness(z1, z2)?;
            let wt = circle_rotation_witness(u1, u2)?;
            Some(Rotation::Torus { z: wz, t: wt })
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// The ket as a multiplication operator
// ---------------------------------------------------------------------------

/// Residuals of the two exact operator identities behind the symbol
/// calculus, verified on the grid.
#[derive(Clone, Copy, Debug)]
pub struct KetReport {
    /// Sup residual of `(|ξ⟩⟩ ∘ F*)f = ξ·f`: the ket composed with the
    /// inverse Fourier transform is multiplication by `ξ`.
    pub multiplication_residual: f64,
    /// Sup residual of `F* M_χ F = index shift` on basis vectors.
    pub character_residual: f64,
    /// Whether the conjugated character is exactly an index rotation
    /// (the largest entry of every column sits at the shifted index).
    pub permutation_ok: bool,
}

/// Verifies on the grid that the ket of `ξ` intertwines the Fourier
/// transform with pointwise multiplication, and that conjugating a grid
/// character through the Fourier transform is exactly an index rotation.
/// `chi_index` selects the character `ω ↦ e^{2πi·chi_index·ω}`.
pub fn ket_is_multiplication(
    xi: &GridCircleFn,
    f: &GridCircleFn,
    chi_index: usize,
) -> Result<KetReport> {
    let n = xi.n;
    if f.n != n {
        return Err(Error::Domain(format!("grid mismatch: {} vs {}", n, f.n)));
    }
    let ph: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect();
    let at = |j: i64| ((j % n as i64 + n as i64) % n as i64) as usize;
    // Forward transform F*: coefficients c_t = (1/n)Σ_k g_k e^{2πitk/n};
    // the ket then sends coefficients to Σ_t c_t e^{−2πitk/n}·ξ_k.
    let coeffs: Vec<C64> = (0..n)
        .map(|t| {
            let mut c = C64::new(0.0, 0.0);
            for k in 0..n {
                c += f.values[k] * ph[at((t * k) as i64)];
            }
            c / n as f64
        })
        .collect();
    let mut mult_res = 0.0f64;
    for k in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for (t, c) in coeffs.iter().enumerate() {
            acc += c * ph[at(-((t * k) as i64))];
        }
        mult_res = mult_res.max((xi.values[k] * acc - xi.values[k] * f.values[k]).norm());
    }
    // Conjugate the character through the transform, one basis vector at
    // a time: e_t ↦ (column of e^{−2πitk/n}) ↦ multiply ↦ transform back.
    let m = chi_index % n;
    let mut char_res = 0.0f64;
    let mut permutation_ok = true;
    for t in 0..n {
        let column: Vec<C64> = (0..n)
            .map(|k| ph[at(-((t * k) as i64))] * ph[at((m * k) as i64)])
            .collect();
        let mut best = (0usize, 0.0f64);
        for s in 0..n {
            let mut c = C64::new(0.0, 0.0);
            for k in 0..n {
                c += column[k] * ph[at((s * k) as i64)];
            }
            c /= n as f64;
            let expected = if s == (t + n - m) % n { 1.0 } else { 0.0 };
            char_res = char_res.max((c.norm() - expected).abs());
            if c.norm() > best.1 {
                best = (s, c.norm());
            }
        }
        if best.0 != (t + n - m) % n {
            permutation_ok = false;
        }
    }
    Ok(KetReport {
        multiplication_residual: mult_res,
        character_residual: char_res,
        permutation_ok,
    })
}

// ---------------------------------------------------------------------------
// The relative-continuity defect modulus
// ---------------------------------------------------------------------------

/// One row of the defect table: the rotation offset and the defect
/// `sup_{χ,ζ} ‖E_{χ+η}(|ξ⟩⟨ξ|)·E_ζ(|η⟩⟨η|) − E_χ(|ξ⟩⟨ξ|)·E_{ζ+η}(|η⟩⟨η|)‖`.
#[derive(Clone, Debug)]
pub struct ModulusRow {
    pub rotation: BigRational,
    pub defect: f64,
}

/// Defect table for a halving sequence of rotation offsets starting at
/// `step`. Because the sup over the grid characters factorizes exactly,
/// each defect equals
/// `max|ξ| · max|η| · max_u |p(u + offset) − p(u)|` with `p = conj(ξ)·η` —
/// the modulus of continuity of the product — so the table decreases to 0
/// precisely when the pair is relatively continuous. Rows stop when the
/// halved offset leaves the grid.
pub fn exel_rc_modulus(
    xi: &GridCircleFn,
    eta: &GridCircleFn,
    step: &BigRational,
) -> Result<Vec<ModulusRow>> {
    let n = xi.n;
    if eta.n != n {
        return Err(Error::Domain(format!(
            "grid mismatch: {} vs {}",
            n, eta.n
        )));
    }
    let p: Vec<C64> = (0..n)
        .map(|k| xi.values[k].conj() * eta.values[k])
        .collect();
    let max_xi = xi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_eta = eta.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut current = frac_mod1(step);
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..64 {
        if current.is_zero() {
            break;
        }
        let m = match grid_index(&current, n) {
            Ok(m) => m,
            Err(e) => {
                if rows.is_empty() {
                    return Err(e);
                }
                break;
            }
        };
        if m == 0 {
            break;
        }
        let osc = (0..n)
            .map(|k| (p[(k + m) % n] - p[k]).norm())
            .fold(0.0, f64::max);
        rows.push(ModulusRow {
            rotation: current.clone(),
            defect: max_xi * max_eta * osc,
        });
        current /= &two;
    }
    Ok(rows)
}
