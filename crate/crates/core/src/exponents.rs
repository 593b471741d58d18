//! Exact index algebra: dilation weights, homogeneous dimension,
//! admissibility ranges, interpolation exponents and the closed-form
//! factors entering the best constants.
//!
//! Everything here is exact rational arithmetic. The formulas are algebraic
//! identities in the indices; floating point would mask cancellation bugs
//! that the identity tests are meant to catch.

use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, rational_lcm, to_f64, Rat};

/// Anisotropic dilation weights and the homogeneous dimension Q.
///
/// The dilation acts as x_j -> r^{w_j} x_j and Q is the trace of the weight
/// matrix, i.e. the exact sum of the weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilationStructure {
    weights: Vec<Rat>,
    q_hom: Rat,
}

impl DilationStructure {
    pub fn new(weights: Vec<Rat>) -> Result<Self> {
        let q_hom = homogeneous_dimension(&weights)?;
        Ok(Self { weights, q_hom })
    }

    /// Isotropic structure on R^n (all weights 1).
    pub fn isotropic(dims: usize) -> Self {
        Self::new(vec![rat(1, 1); dims]).expect("dims >= 1")
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    /// Homogeneous dimension Q (exact).
    pub fn homogeneous_dimension(&self) -> Rat {
        self.q_hom
    }

    /// Smallest positive rational divisible by every weight; the operator
    /// degree used for building homogeneous symbols is twice this.
    pub fn common_multiple(&self) -> Rat {
        rational_lcm(&self.weights).expect("validated at construction")
    }

    /// Weights as floating point, for grid-side dilation sampling.
    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(to_f64).collect()
    }
}

/// Sum of dilation weights; errors on empty or nonpositive input.
pub fn homogeneous_dimension(weights: &[Rat]) -> Result<Rat> {
    if weights.is_empty() {
        return Err(Error::InvalidStructure("empty weight vector".into()));
    }
    let mut q = rat(0, 1);
    for w in weights {
        if *w <= rat(0, 1) {
            return Err(Error::InvalidStructure(format!(
                "nonpositive weight {}",
                format_rational(w)
            )));
        }
        q += *w;
    }
    Ok(q)
}

/// Critical Sobolev exponent pQ/(Q - ap) for the order-a embedding.
pub fn critical_exponent(q_hom: Rat, a: Rat, p: Rat) -> Result<Rat> {
    let denom = q_hom - a * p;
    if denom <= rat(0, 1) {
        return Err(Error::SupercriticalOrder(format_rational(&denom)));
    }
    Ok(p * q_hom / denom)
}

/// The index set (a1, a2, p, q) of a two-norm interpolation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSet {
    pub a1: Rat,
    pub a2: Rat,
    pub p: Rat,
    pub q: Rat,
}

impl IndexSet {
    pub fn new(a1: Rat, a2: Rat, p: Rat, q: Rat) -> Self {
        Self { a1, a2, p, q }
    }
}

/// A single admissibility condition that failed, with its exact values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdmissibilityFailure {
    /// a1 > a2 is violated.
    OrderOrdering { a1: Rat, a2: Rat },
    /// a2 >= 0 is violated.
    NegativeLowerOrder { a2: Rat },
    /// p > 1 is violated.
    PNotAboveOne { p: Rat },
    /// Q - a1 p > 0 is violated (order too high for the dimension).
    Supercritical { slack: Rat },
    /// q below pQ/(Q - a2 p) (or not above it, in the strict range).
    QBelowLower { q: Rat, lower: Rat, strict: bool },
    /// q above pQ/(Q - a1 p) (or not below it, in the strict range).
    QAboveUpper { q: Rat, upper: Rat, strict: bool },
}

impl std::fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::OrderOrdering { a1, a2 } => write!(
                f,
                "requires a1 > a2, got a1 = {}, a2 = {}",
                format_rational(a1),
                format_rational(a2)
            ),
            Self::NegativeLowerOrder { a2 } => {
                write!(f, "requires a2 >= 0, got {}", format_rational(a2))
            }
            Self::PNotAboveOne { p } => write!(f, "requires p > 1, got {}", format_rational(p)),
            Self::Supercritical { slack } => write!(
                f,
                "requires Q - a1 p > 0, got {}",
                format_rational(slack)
            ),
            Self::QBelowLower { q, lower, strict } => write!(
                f,
                "requires q {} {}, got {}",
                if *strict { ">" } else { ">=" },
                format_rational(lower),
                format_rational(q)
            ),
            Self::QAboveUpper { q, upper, strict } => write!(
                f,
                "requires q {} {}, got {}",
                if *strict { "<" } else { "<=" },
                format_rational(upper),
                format_rational(q)
            ),
        }
    }
}

/// Verdict of an admissibility check, with every failing condition listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    pub failures: Vec<AdmissibilityFailure>,
}

impl Admissibility {
    fn from_failures(failures: Vec<AdmissibilityFailure>) -> Self {
        Self {
            admissible: failures.is_empty(),
            failures,
        }
    }
}

/// Checks a1 > a2 >= 0, 1 < p < Q/a1 and the q-range
/// pQ/(Q - a2 p) .. pQ/(Q - a1 p), closed or open per `strict`.
///
/// The closed range is the interpolation-inequality hypothesis; the open
/// range is the one the ground-state solver requires.
pub fn check_admissible(idx: &IndexSet, q_hom: Rat, strict: bool) -> Admissibility {
    let mut failures = Vec::new();
    if idx.a1 <= idx.a2 {
        failures.push(AdmissibilityFailure::OrderOrdering {
            a1: idx.a1,
            a2: idx.a2,
        });
    }
    if idx.a2 < rat(0, 1) {
        failures.push(AdmissibilityFailure::NegativeLowerOrder { a2: idx.a2 });
    }
    if idx.p <= rat(1, 1) {
        failures.push(AdmissibilityFailure::PNotAboveOne { p: idx.p });
    }
    let slack = q_hom - idx.a1 * idx.p;
    if slack <= rat(0, 1) {
        failures.push(AdmissibilityFailure::Supercritical { slack });
        // q-range undefined past the critical order
        return Admissibility::from_failures(failures);
    }
    // Q - a2 p >= Q - a1 p > 0 whenever the ordering holds, so both
    // endpoints are well defined here.
    if q_hom - idx.a2 * idx.p > rat(0, 1) {
        let lower = idx.p * q_hom / (q_hom - idx.a2 * idx.p);
        let below = if strict { idx.q <= lower } else { idx.q < lower };
        if below {
            failures.push(AdmissibilityFailure::QBelowLower {
                q: idx.q,
                lower,
                strict,
            });
        }
    }
    let upper = idx.p * q_hom / slack;
    let above = if strict { idx.q >= upper } else { idx.q > upper };
    if above {
        failures.push(AdmissibilityFailure::QAboveUpper {
            q: idx.q,
            upper,
            strict,
        });
    }
    Admissibility::from_failures(failures)
}

/// The pair of exponents weighting the two seminorm factors of the
/// interpolation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GNExponents {
    pub theta1: Rat,
    pub theta2: Rat,
}

/// theta1 = (Q(q-p) - a2 pq) / ((a1-a2) p^2),
/// theta2 = (a1 pq - Q(q-p)) / ((a1-a2) p^2), exactly.
pub fn gn_exponents(idx: &IndexSet, q_hom: Rat) -> Result<GNExponents> {
    if idx.a1 == idx.a2 {
        return Err(Error::DegeneratePair(format_rational(&idx.a1)));
    }
    let verdict = check_admissible(idx, q_hom, false);
    if !verdict.admissible {
        return Err(Error::Inadmissible(
            verdict
                .failures
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let gap = q_hom * (idx.q - idx.p);
    let denom = (idx.a1 - idx.a2) * idx.p * idx.p;
    Ok(GNExponents {
        theta1: (gap - idx.a2 * idx.p * idx.q) / denom,
        theta2: (idx.a1 * idx.p * idx.q - gap) / denom,
    })
}

/// Interpolation exponent s = (1/p - 1/q) / (a/Q + 1/p - 1/r) with the
/// verdict whether it lies in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationExponent {
    pub s: Rat,
    pub in_unit_interval: bool,
}

pub fn interpolation_s(a: Rat, q_hom: Rat, p: Rat, q: Rat, r: Rat) -> Result<InterpolationExponent> {
    let denom = a / q_hom + rat(1, 1) / p - rat(1, 1) / r;
    if denom == rat(0, 1) {
        return Err(Error::DegenerateInterpolation);
    }
    let s = (rat(1, 1) / p - rat(1, 1) / q) / denom;
    Ok(InterpolationExponent {
        s,
        in_unit_interval: s >= rat(0, 1) && s <= rat(1, 1),
    })
}

/// Exponents s_1..s_l of the multi-norm interpolation inequality, satisfying
/// sum s_j = 1 and sum s_j / p_j = 1/q with p_j = pQ/(Q - a_j p).
///
/// For l = 2 the system is square; for l > 2 it is underdetermined and the
/// minimum-Euclidean-norm solution is returned, falling back to an
/// active-set clamp when that solution leaves the unit box (the endpoint
/// q = p_1 or q = p_l lands exactly on a unit vector this way). The affine
/// solution set has dimension l - 2, reported alongside the choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGNExponents {
    pub s: Vec<Rat>,
    pub affine_dim: usize,
    /// True when the unconstrained minimum-norm point violated [0,1] and a
    /// boundary-supported solution was substituted.
    pub clamped: bool,
}

pub fn multi_gn_exponents(orders: &[Rat], p: Rat, q_hom: Rat, q: Rat) -> Result<MultiGNExponents> {
    let l = orders.len();
    if l < 2 {
        return Err(Error::InfeasibleExponent("need at least 2 orders".into()));
    }
    for w in orders.windows(2) {
        if w[0] <= w[1] {
            return Err(Error::InfeasibleExponent(
                "orders must be strictly decreasing".into(),
            ));
        }
    }
    if *orders.last().unwrap() < rat(0, 1) {
        return Err(Error::InfeasibleExponent("orders must be nonnegative".into()));
    }
    if p <= rat(1, 1) {
        return Err(Error::InfeasibleExponent("requires p > 1".into()));
    }
    let pj: Vec<Rat> = orders
        .iter()
        .map(|a| critical_exponent(q_hom, *a, p))
        .collect::<Result<_>>()?;
    // Orders strictly decreasing makes p_j strictly decreasing.
    let (p_max, p_min) = (pj[0], pj[l - 1]);
    if q < p_min || q > p_max {
        return Err(Error::InfeasibleExponent(format!(
            "q = {} outside [{}, {}]",
            format_rational(&q),
            format_rational(&p_min),
            format_rational(&p_max)
        )));
    }

    let c: Vec<Rat> = pj.iter().map(|pj| rat(1, 1) / *pj).collect();
    let target = rat(1, 1) / q;
    let s = if l == 2 {
        let s1 = (target - c[1]) / (c[0] - c[1]);
        vec![s1, rat(1, 1) - s1]
    } else {
        min_norm_solution(&c, target, &vec![true; l])
    };
    let inside = |v: &[Rat]| v.iter().all(|x| *x >= rat(0, 1) && *x <= rat(1, 1));
    if inside(&s) {
        return Ok(MultiGNExponents {
            s,
            affine_dim: l - 2,
            clamped: false,
        });
    }
    if l == 2 {
        return Err(Error::InfeasibleExponent(
            "unique solution leaves [0,1]".into(),
        ));
    }
    // Clamp the worst offender to its bound and re-solve on the rest until
    // the point is feasible; terminates in at most l-2 rounds.
    let mut free = vec![true; l];
    let mut fixed = vec![rat(0, 1); l];
    loop {
        let mut t = target;
        for j in 0..l {
            if !free[j] {
                t -= fixed[j] * c[j];
            }
        }
        let fixed_sum: Rat = (0..l).filter(|j| !free[*j]).map(|j| fixed[j]).sum();
        let nfree = free.iter().filter(|f| **f).count();
        if nfree < 2 {
            return Err(Error::InfeasibleExponent(
                "no boundary-supported solution in [0,1]".into(),
            ));
        }
        let sol = min_norm_constrained(&c, &free, rat(1, 1) - fixed_sum, t);
        let mut full = fixed.clone();
        let mut fi = 0;
        for j in 0..l {
            if free[j] {
                full[j] = sol[fi];
                fi += 1;
            }
        }
        if inside(&full) {
            return Ok(MultiGNExponents {
                s: full,
                affine_dim: l - 2,
                clamped: true,
            });
        }
        // most violating free coordinate
        let mut worst = None;
        let mut worst_gap = rat(0, 1);
        for j in 0..l {
            if !free[j] {
                continue;
            }
            let gap = if full[j] < rat(0, 1) {
                -full[j]
            } else if full[j] > rat(1, 1) {
                full[j] - rat(1, 1)
            } else {
                continue;
            };
            if gap > worst_gap {
                worst_gap = gap;
                worst = Some(j);
            }
        }
        let j = worst.ok_or_else(|| {
            Error::InfeasibleExponent("clamping failed to make progress".into())
        })?;
        fixed[j] = if full[j] < rat(0, 1) { rat(0, 1) } else { rat(1, 1) };
        free[j] = false;
    }
}

/// Minimum-norm solution of sum s_j = 1, sum c_j s_j = target over the
/// full coordinate set.
fn min_norm_solution(c: &[Rat], target: Rat, free: &[bool]) -> Vec<Rat> {
    min_norm_constrained(c, free, rat(1, 1), target)
}

/// Minimum-norm s on the free coordinates with sum s = mass and
/// sum c_j s_j = target: s = A^T (A A^T)^{-1} b for the 2 x n_free system.
fn min_norm_constrained(c: &[Rat], free: &[bool], mass: Rat, target: Rat) -> Vec<Rat> {
    let idx: Vec<usize> = (0..c.len()).filter(|j| free[*j]).collect();
    let n = rat(idx.len() as i64, 1);
    let sc: Rat = idx.iter().map(|j| c[*j]).sum();
    let sc2: Rat = idx.iter().map(|j| c[*j] * c[*j]).sum();
    let det = n * sc2 - sc * sc;
    debug_assert!(det != rat(0, 1), "distinct critical exponents");
    let y1 = (sc2 * mass - sc * target) / det;
    let y2 = (n * target - sc * mass) / det;
    idx.iter().map(|j| y1 + c[*j] * y2).collect()
}

/// The exact pieces of the ratio factor linking the two best constants:
/// value = linear * power_base ^ power_exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioFactor {
    pub linear: Rat,
    pub power_base: Rat,
    pub power_exponent: Rat,
}

impl RatioFactor {
    pub fn value(&self) -> f64 {
        to_f64(&self.linear) * to_f64(&self.power_base).powf(to_f64(&self.power_exponent))
    }
}

/// Factor (apq/(apq - Q(q-p))) * (Q(q-p)/(apq - Q(q-p)))^{Q(p-q)/(apq)}
/// relating C_GN^{p/q} to C_S in the a2 = 0 case. It depends only on the
/// indices and Q, not on the operator.
pub fn sobolev_gn_ratio_factor(a: Rat, p: Rat, q: Rat, q_hom: Rat) -> Result<RatioFactor> {
    let idx = IndexSet::new(a, rat(0, 1), p, q);
    let verdict = check_admissible(&idx, q_hom, true);
    if !verdict.admissible {
        return Err(Error::Inadmissible(
            verdict
                .failures
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let apq = a * p * q;
    let gap = q_hom * (q - p);
    let denom = apq - gap;
    if denom <= rat(0, 1) {
        return Err(Error::Inadmissible(format!(
            "apq - Q(q-p) = {} must be positive",
            format_rational(&denom)
        )));
    }
    Ok(RatioFactor {
        linear: apq / denom,
        power_base: gap / denom,
        power_exponent: q_hom * (p - q) / apq,
    })
}
