//! The variational objects attached to the ground-state problem: the energy,
//! the Nehari functional and its closed-form projection, the interpolation
//! and Sobolev quotients, and the L^2 gradient of the energy.
//!
//! A zero-order term acts as the identity here (the operator calculus value
//! of a zeroth power), so its "seminorm" is the plain L^p norm including the
//! mean. This intentionally differs from the spectral zero-mode convention
//! of [`crate::spectral::apply_fractional_power`], which annihilates
//! constants for every power.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exponents::{check_admissible, gn_exponents, DilationStructure, IndexSet};
use crate::grid::{pairwise_sum, GridFunction, GridSpec};
use crate::rational::{to_f64, Rat};
use crate::spectral::SpectralEngine;
use crate::symbol::HomogeneousSymbol;

/// One operator term (symbol, Sobolev order) of the equation.
#[derive(Debug, Clone)]
pub struct Term {
    pub symbol: HomogeneousSymbol,
    pub order: Rat,
}

/// Full problem data: ordered operator terms, Lebesgue exponents and grid.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    terms: Vec<Term>,
    p: Rat,
    q: Rat,
    grid: GridSpec,
    weights: DilationStructure,
}

impl ProblemSpec {
    pub fn new(
        terms: Vec<Term>,
        p: Rat,
        q: Rat,
        grid: GridSpec,
        weights: DilationStructure,
    ) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::Inadmissible("need at least two operator terms".into()));
        }
        if grid.dims() != weights.dims() {
            return Err(Error::InvalidGrid(format!(
                "{}-dimensional grid under {} weights",
                grid.dims(),
                weights.dims()
            )));
        }
        for w in terms.windows(2) {
            if w[0].order <= w[1].order {
                return Err(Error::Inadmissible(
                    "term orders must be strictly decreasing".into(),
                ));
            }
        }
        for t in &terms {
            if t.symbol.weights() != &weights {
                return Err(Error::Inadmissible(
                    "all symbols must be homogeneous for the same weights".into(),
                ));
            }
        }
        let idx = IndexSet::new(terms[0].order, terms.last().unwrap().order, p, q);
        let verdict = check_admissible(&idx, weights.homogeneous_dimension(), true);
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
        Ok(Self {
            terms,
            p,
            q,
            grid,
            weights,
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn p(&self) -> Rat {
        self.p
    }

    pub fn q(&self) -> Rat {
        self.q
    }

    pub fn p_f64(&self) -> f64 {
        to_f64(&self.p)
    }

    pub fn q_f64(&self) -> f64 {
        to_f64(&self.q)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weights(&self) -> &DilationStructure {
        &self.weights
    }

    pub fn homogeneous_dimension(&self) -> Rat {
        self.weights.homogeneous_dimension()
    }

    /// Extreme-order index set (a_1, a_l, p, q).
    pub fn index_set(&self) -> IndexSet {
        IndexSet::new(
            self.terms[0].order,
            self.terms.last().unwrap().order,
            self.p,
            self.q,
        )
    }

    /// Same problem on a different grid.
    pub fn with_grid(&self, grid: GridSpec) -> Result<Self> {
        Self::new(
            self.terms.clone(),
            self.p,
            self.q,
            grid,
            self.weights.clone(),
        )
    }

    /// Same problem with every symbol coefficient scaled by `factor`.
    pub fn with_scaled_symbols(&self, factor: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    symbol: t.symbol.scaled(factor)?,
                    order: t.order,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(terms, self.p, self.q, self.grid.clone(), self.weights.clone())
    }
}

/// Values of the functionals at one field.
#[derive(Debug, Clone)]
pub struct FunctionalReport {
    /// Energy (1/p) sum_j ||R_j^{a_j/nu_j} u||_p^p - (1/q) int |u|^q.
    pub energy: f64,
    /// Nehari value sum_j ||..||_p^p - int |u|^q.
    pub nehari: f64,
    /// Interpolation quotient, two-term problems only.
    pub gn_quotient: Option<f64>,
    /// p-th powers of the term seminorms, in term order.
    pub term_seminorms: Vec<f64>,
    /// int |u|^q.
    pub lq_mass: f64,
    /// int |u|^p.
    pub lp_mass: f64,
}

/// Evaluator bundling the problem with cached transforms and multiplier
/// fields; all methods are pure in the field argument.
pub struct Functionals {
    ps: ProblemSpec,
    engine: SpectralEngine,
    /// sigma_j^{a_j/nu} per term; `None` marks a zero-order identity term.
    fields: Vec<Option<Vec<f64>>>,
}

impl Functionals {
    pub fn new(ps: &ProblemSpec) -> Self {
        let engine = SpectralEngine::new(ps.grid());
        let fields = ps
            .terms()
            .iter()
            .map(|t| {
                if t.order == Rat::from_integer(0) {
                    None
                } else {
                    let s = to_f64(&t.order) / t.symbol.homogeneity();
                    Some(engine.multiplier_field(&t.symbol, s))
                }
            })
            .collect();
        Self {
            ps: ps.clone(),
            engine,
            fields,
        }
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.ps
    }

    pub fn engine(&self) -> &SpectralEngine {
        &self.engine
    }

    fn check_grid(&self, u: &GridFunction) -> Result<()> {
        if u.spec() != self.ps.grid() {
            return Err(Error::GridMismatch {
                expected: self.ps.grid().len(),
                got: u.spec().len(),
            });
        }
        Ok(())
    }

    /// The fields R_j^{a_j/nu_j} u per term.
    pub fn term_fields(&self, u: &GridFunction) -> Result<Vec<GridFunction>> {
        self.check_grid(u)?;
        let spectrum = self.engine.forward(u);
        self.fields
            .iter()
            .map(|f| match f {
                None => Ok(u.clone()),
                Some(field) => {
                    let mut s = spectrum.clone();
                    for (z, m) in s.iter_mut().zip(field) {
                        *z *= m;
                    }
                    self.engine.inverse_real(s)
                }
            })
            .collect()
    }

    /// p-th powers of the term seminorms. For p = 2 these are evaluated by
    /// Parseval directly on the spectrum (an exact identity for the DFT);
    /// otherwise each term field is brought back to physical space.
    pub fn seminorm_powers(&self, u: &GridFunction) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        let p = self.ps.p_f64();
        if p == 2.0 {
            let spectrum = self.engine.forward(u);
            let norm = u.spec().cell_volume() / u.spec().len() as f64;
            let mut out = Vec::with_capacity(self.fields.len());
            for f in &self.fields {
                let terms: Vec<f64> = match f {
                    None => spectrum.iter().map(|z| z.norm_sqr()).collect(),
                    Some(field) => spectrum
                        .iter()
                        .zip(field)
                        .map(|(z, m)| z.norm_sqr() * m * m)
                        .collect(),
                };
                out.push(pairwise_sum(&terms) * norm);
            }
            Ok(out)
        } else {
            Ok(self
                .term_fields(u)?
                .iter()
                .map(|v| v.lp_mass(p))
                .collect())
        }
    }

    pub fn report(&self, u: &GridFunction) -> Result<FunctionalReport> {
        let (p, q) = (self.ps.p_f64(), self.ps.q_f64());
        let term_seminorms = self.seminorm_powers(u)?;
        let lq_mass = u.lp_mass(q);
        let lp_mass = u.lp_mass(p);
        let total: f64 = pairwise_sum(&term_seminorms);
        let gn_quotient = if self.ps.terms().len() == 2 && lq_mass > 0.0 {
            Some(self.gn_quotient(u)?)
        } else {
            None
        };
        Ok(FunctionalReport {
            energy: total / p - lq_mass / q,
            nehari: total - lq_mass,
            gn_quotient,
            term_seminorms,
            lq_mass,
            lp_mass,
        })
    }

    /// Energy (1/p) sum_j X_j - (1/q) int |u|^q.
    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        let x = self.seminorm_powers(u)?;
        Ok(pairwise_sum(&x) / self.ps.p_f64() - u.lp_mass(self.ps.q_f64()) / self.ps.q_f64())
    }

    /// Nehari value sum_j X_j - int |u|^q.
    pub fn nehari(&self, u: &GridFunction) -> Result<f64> {
        let x = self.seminorm_powers(u)?;
        Ok(pairwise_sum(&x) - u.lp_mass(self.ps.q_f64()))
    }

    /// Unique positive scalar mu with I(mu u) = 0, in closed form:
    /// mu = (sum_j X_j / int |u|^q)^{1/(q-p)}.
    pub fn nehari_project(&self, u: &GridFunction) -> Result<(f64, GridFunction)> {
        let x = self.seminorm_powers(u)?;
        let total = pairwise_sum(&x);
        let lq = u.lp_mass(self.ps.q_f64());
        if total <= 0.0 || lq <= 0.0 {
            return Err(Error::DegenerateProjection);
        }
        let mu = (total / lq).powf(1.0 / (self.ps.q_f64() - self.ps.p_f64()));
        let mut v = u.clone();
        v.scale(mu);
        Ok((mu, v))
    }

    /// Interpolation quotient X_1^{theta_1} X_2^{theta_2} / int |u|^q for
    /// two-term problems; scale and dilation invariant by construction of
    /// the exponents.
    pub fn gn_quotient(&self, u: &GridFunction) -> Result<f64> {
        if self.ps.terms().len() != 2 {
            return Err(Error::Inadmissible(
                "interpolation quotient needs exactly two terms".into(),
            ));
        }
        let x = self.seminorm_powers(u)?;
        let lq = u.lp_mass(self.ps.q_f64());
        if lq <= 0.0 {
            return Err(Error::DegenerateProjection);
        }
        let th = gn_exponents(&self.ps.index_set(), self.ps.homogeneous_dimension())?;
        Ok(x[0].powf(to_f64(&th.theta1)) * x[1].powf(to_f64(&th.theta2)) / lq)
    }

    /// Rayleigh-type Sobolev quotient
    /// int (|R^{a/nu} u|^p + |u|^p) / (int |u|^q)^{p/q}
    /// for two-term problems with a zero-order second term.
    pub fn sobolev_quotient(&self, u: &GridFunction) -> Result<f64> {
        if self.ps.terms().len() != 2 || self.ps.terms()[1].order != Rat::from_integer(0) {
            return Err(Error::Inadmissible(
                "Sobolev quotient needs terms (a, 0)".into(),
            ));
        }
        let x = self.seminorm_powers(u)?;
        let lq = u.lp_mass(self.ps.q_f64());
        if lq <= 0.0 {
            return Err(Error::DegenerateProjection);
        }
        Ok((x[0] + x[1]) / lq.powf(self.ps.p_f64() / self.ps.q_f64()))
    }

    /// L^2 gradient of the energy:
    /// sum_j R_j^{a_j/nu_j}(|v_j|^{p-2} v_j) - |u|^{q-2} u with
    /// v_j = R_j^{a_j/nu_j} u. Requires p >= 2; below that the integrand is
    /// not C^1 at zeros of v_j and evaluation is refused.
    pub fn gradient(&self, u: &GridFunction) -> Result<GridFunction> {
        let p = self.ps.p_f64();
        if p < 2.0 {
            return Err(Error::UnsupportedExponent(p));
        }
        self.check_grid(u)?;
        let q = self.ps.q_f64();
        let spectrum = self.engine.forward(u);
        let mut acc = vec![Complex64::new(0.0, 0.0); spectrum.len()];
        if p == 2.0 {
            // linear case: multipliers square onto the spectrum directly
            for f in &self.fields {
                match f {
                    None => {
                        for (a, z) in acc.iter_mut().zip(&spectrum) {
                            *a += z;
                        }
                    }
                    Some(field) => {
                        for ((a, z), m) in acc.iter_mut().zip(&spectrum).zip(field) {
                            *a += z * (m * m);
                        }
                    }
                }
            }
        } else {
            for f in &self.fields {
                let v = match f {
                    None => u.clone(),
                    Some(field) => {
                        let mut s = spectrum.clone();
                        for (z, m) in s.iter_mut().zip(field) {
                            *z *= m;
                        }
                        self.engine.inverse_real(s)?
                    }
                };
                let nl: Vec<f64> = v
                    .values()
                    .iter()
                    .map(|t| t.abs().powf(p - 2.0) * t)
                    .collect();
                let nl = GridFunction::from_values(u.spec(), nl)?;
                let mut s = self.engine.forward(&nl);
                if let Some(field) = f {
                    for (z, m) in s.iter_mut().zip(field) {
                        *z *= m;
                    }
                }
                for (a, z) in acc.iter_mut().zip(&s) {
                    *a += z;
                }
            }
        }
        let mut g = self.engine.inverse_real(acc)?;
        let pow = q - 2.0;
        for (gv, uv) in g.values_mut().iter_mut().zip(u.values()) {
            *gv -= uv.abs().powf(pow) * uv;
        }
        Ok(g)
    }
}

/// Max of lhs - rhs of the convexity inequality
/// |l(a+b) - l(a)| <= eps [l(m a) - m l(a)] + |l(C b)| + |l(-C b)|
/// for l(z) = |z|^p over `samples` random complex pairs, with
/// C = 1/(eps (m-1)). Nonpositive up to roundoff when p > 1, m > 1 and
/// 0 < eps < 1/m.
pub fn brezis_lieb_check(p: f64, samples: usize, m: f64, eps: f64, seed: u64) -> Result<f64> {
    if p <= 1.0 {
        return Err(Error::Numeric(format!("requires p > 1, got {p}")));
    }
    if m <= 1.0 {
        return Err(Error::Numeric(format!("requires m > 1, got {m}")));
    }
    if !(eps > 0.0 && eps < 1.0 / m) {
        return Err(Error::Numeric(format!("requires 0 < eps < 1/m, got {eps}")));
    }
    let c = 1.0 / (eps * (m - 1.0));
    let ell = |z: Complex64| z.norm().powf(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let a = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let b = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let lhs = (ell(a + b) - ell(a)).abs();
        let rhs = eps * (ell(m * a) - m * ell(a)) + ell(c * b) + ell(-c * b);
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::spectral::random_test_function;

    /// The 1D fractional two-term problem used across the test suite.
    pub(crate) fn fractional_1d(n: usize, l: f64) -> ProblemSpec {
        let w = DilationStructure::isotropic(1);
        let sym = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
        ProblemSpec::new(
            vec![
                Term {
                    symbol: sym.clone(),
                    order: rat(2, 5),
                },
                Term {
                    symbol: sym,
                    order: rat(0, 1),
                },
            ],
            rat(2, 1),
            rat(3, 1),
            GridSpec::line(n, l).unwrap(),
            w,
        )
        .unwrap()
    }

    fn gaussian(spec: &GridSpec) -> GridFunction {
        GridFunction::sample(spec, |x| {
            (-x.iter().map(|v| v * v).sum::<f64>() / 4.0).exp()
        })
    }

    #[test]
    fn problem_spec_validation() {
        let w = DilationStructure::isotropic(1);
        let sym = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
        let grid = GridSpec::line(32, 10.0).unwrap();
        // single term rejected
        assert!(ProblemSpec::new(
            vec![Term { symbol: sym.clone(), order: rat(2, 5) }],
            rat(2, 1),
            rat(3, 1),
            grid.clone(),
            w.clone(),
        )
        .is_err());
        // non-decreasing orders rejected
        assert!(ProblemSpec::new(
            vec![
                Term { symbol: sym.clone(), order: rat(1, 5) },
                Term { symbol: sym.clone(), order: rat(2, 5) },
            ],
            rat(2, 1),
            rat(3, 1),
            grid.clone(),
            w.clone(),
        )
        .is_err());
        // q outside the strict interior range rejected
        assert!(ProblemSpec::new(
            vec![
                Term { symbol: sym.clone(), order: rat(2, 5) },
                Term { symbol: sym, order: rat(0, 1) },
            ],
            rat(2, 1),
            rat(2, 1),
            grid,
            w,
        )
        .is_err());
    }

    #[test]
    fn zero_field_has_zero_functionals() {
        let ps = fractional_1d(64, 20.0);
        let f = Functionals::new(&ps);
        let z = GridFunction::zeros(ps.grid());
        assert_eq!(f.energy(&z).unwrap(), 0.0);
        assert_eq!(f.nehari(&z).unwrap(), 0.0);
        assert!(f.nehari_project(&z).is_err());
    }

    #[test]
    fn small_amplitude_signs() {
        let ps = fractional_1d(128, 20.0);
        let f = Functionals::new(&ps);
        let mut u = gaussian(ps.grid());

        u.scale(1e-3);
        let e_small = f.energy(&u).unwrap();
        assert!(e_small > 0.0, "for small t the p-homogeneous part dominates");
        assert!(f.nehari(&u).unwrap() > 0.0);

        let mut big = gaussian(ps.grid());
        big.scale(50.0);
        assert!(f.nehari(&big).unwrap() < 0.0, "q > p makes large fields negative");

        // leading order in t is t^p: quadruple the amplitude, 16x the energy
        let mut u2 = gaussian(ps.grid());
        u2.scale(4e-3);
        let e2 = f.energy(&u2).unwrap();
        assert!((e2 / e_small - 16.0).abs() < 0.05);
    }

    #[test]
    fn projection_lands_on_nehari_set() {
        let ps = fractional_1d(128, 20.0);
        let f = Functionals::new(&ps);
        for seed in 0..20 {
            let u = random_test_function(ps.grid(), 2.0, seed, false);
            let (_, v) = f.nehari_project(&u).unwrap();
            let x = f.seminorm_powers(&v).unwrap();
            let scale = pairwise_sum(&x);
            assert!(
                f.nehari(&v).unwrap().abs() <= 1e-10 * scale,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn projection_is_identity_on_nehari_points_and_scale_covariant() {
        let ps = fractional_1d(128, 20.0);
        let f = Functionals::new(&ps);
        let u = gaussian(ps.grid());
        let (mu, v) = f.nehari_project(&u).unwrap();
        let (mu2, _) = f.nehari_project(&v).unwrap();
        assert!((mu2 - 1.0).abs() < 1e-10);

        // mu_{cu} = mu_u / c, same projected function
        let mut cu = u.clone();
        cu.scale(3.0);
        let (mu3, v3) = f.nehari_project(&cu).unwrap();
        assert!((mu3 - mu / 3.0).abs() < 1e-10 * mu);
        let mut diff = v3.clone();
        diff.axpy(-1.0, &v);
        assert!(diff.lp_norm(2.0) < 1e-10 * v.lp_norm(2.0));

        // I(u) < 0 forces 0 < mu < 1
        let mut big = u.clone();
        big.scale(100.0);
        assert!(f.nehari(&big).unwrap() < 0.0);
        let (mu4, _) = f.nehari_project(&big).unwrap();
        assert!(mu4 > 0.0 && mu4 < 1.0);
    }

    #[test]
    fn energy_equals_mass_form_on_nehari_set() {
        let ps = fractional_1d(128, 20.0);
        let f = Functionals::new(&ps);
        let (p, q) = (ps.p_f64(), ps.q_f64());
        for seed in 0..10 {
            let u = random_test_function(ps.grid(), 2.0, seed, false);
            let (_, v) = f.nehari_project(&u).unwrap();
            let lhs = f.energy(&v).unwrap();
            let rhs = (1.0 / p - 1.0 / q) * v.lp_mass(q);
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
        }
    }

    #[test]
    fn quotients_are_scale_invariant() {
        let ps = fractional_1d(128, 20.0);
        let f = Functionals::new(&ps);
        let u = random_test_function(ps.grid(), 2.0, 5, false);
        let (j, s) = (f.gn_quotient(&u).unwrap(), f.sobolev_quotient(&u).unwrap());
        let mut cu = u.clone();
        cu.scale(7.3);
        assert!((f.gn_quotient(&cu).unwrap() - j).abs() <= 1e-10 * j);
        assert!((f.sobolev_quotient(&cu).unwrap() - s).abs() <= 1e-10 * s);
    }

    #[test]
    fn sobolev_quotient_closed_form_on_nehari_set() {
        let ps = fractional_1d(128, 20.0);
        let f = Functionals::new(&ps);
        let (p, q) = (ps.p_f64(), ps.q_f64());
        let u = random_test_function(ps.grid(), 2.0, 9, false);
        let (_, v) = f.nehari_project(&u).unwrap();
        let direct = f.sobolev_quotient(&v).unwrap();
        let closed = v.lp_mass(q).powf((q - p) / q);
        assert!((direct - closed).abs() <= 1e-10 * closed);
    }

    #[test]
    fn gradient_matches_central_differences() {
        // order chosen per p to stay inside the strict admissible range
        for (p, a1) in [(rat(2, 1), rat(2, 5)), (rat(3, 1), rat(1, 5))] {
            let w = DilationStructure::isotropic(1);
            let sym = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
            let ps = ProblemSpec::new(
                vec![
                    Term { symbol: sym.clone(), order: a1 },
                    Term { symbol: sym.clone(), order: rat(0, 1) },
                ],
                p,
                rat(4, 1),
                GridSpec::line(64, 15.0).unwrap(),
                w,
            )
            .unwrap();
            let f = Functionals::new(&ps);
            let u = random_test_function(ps.grid(), 2.5, 17, false);
            let g = f.gradient(&u).unwrap();
            for seed in 100..110 {
                let psi = random_test_function(ps.grid(), 2.5, seed, false);
                let eps = f64::EPSILON.sqrt() * (1.0 + u.lp_norm(2.0)) / psi.lp_norm(2.0);
                let mut up = u.clone();
                up.axpy(eps, &psi);
                let mut um = u.clone();
                um.axpy(-eps, &psi);
                let fd = (f.energy(&up).unwrap() - f.energy(&um).unwrap()) / (2.0 * eps);
                let pairing = g.inner(&psi);
                let scale = pairing.abs().max(fd.abs()).max(1e-10);
                assert!(
                    (pairing - fd).abs() <= 1e-6 * scale,
                    "p={p} seed={seed}: {pairing} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn gradient_refused_below_two_and_zero_at_zero() {
        let w = DilationStructure::isotropic(1);
        let sym = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
        let ps = ProblemSpec::new(
            vec![
                Term { symbol: sym.clone(), order: rat(2, 5) },
                Term { symbol: sym.clone(), order: rat(0, 1) },
            ],
            rat(3, 2),
            rat(3, 1),
            GridSpec::line(32, 10.0).unwrap(),
            w.clone(),
        )
        .unwrap();
        let f = Functionals::new(&ps);
        let u = gaussian(ps.grid());
        assert!(matches!(
            f.gradient(&u),
            Err(Error::UnsupportedExponent(_))
        ));
        // functional values remain available below p = 2
        assert!(f.energy(&u).is_ok());

        let ps3 = ProblemSpec::new(
            vec![
                Term { symbol: sym.clone(), order: rat(1, 5) },
                Term { symbol: sym, order: rat(0, 1) },
            ],
            rat(3, 1),
            rat(5, 1),
            GridSpec::line(32, 10.0).unwrap(),
            w,
        )
        .unwrap();
        let f3 = Functionals::new(&ps3);
        let g = f3.gradient(&GridFunction::zeros(ps3.grid())).unwrap();
        assert_eq!(g.lp_norm(2.0), 0.0);
    }

    #[test]
    fn brezis_lieb_nonpositive() {
        // b = 0 collapses the left side
        let v = brezis_lieb_check(2.5, 1, 2.0, 0.1, 3).unwrap();
        assert!(v <= 1e-12);
        for p in [2.0, 2.5, 3.0] {
            for (m, eps) in [(2.0, 0.3), (3.0, 0.2), (1.5, 0.5)] {
                let worst = brezis_lieb_check(p, 2000, m, eps, 42).unwrap();
                assert!(worst <= 1e-12, "p={p} m={m} eps={eps}: {worst}");
            }
        }
        // p = 2 real case reduces to a |2ab + b^2| bound
        let (m, eps) = (2.0, 0.25);
        let c: f64 = 1.0 / (eps * (m - 1.0));
        for (a, b) in [(1.0f64, 0.5f64), (-2.0, 1.0), (0.3, -0.7)] {
            let lhs = (2.0 * a * b + b * b).abs();
            let rhs = eps * (m * m - m) * a * a + 2.0 * (c * b).powi(2);
            assert!(lhs <= rhs + 1e-12);
        }
        assert!(brezis_lieb_check(2.0, 1, 2.0, 0.6, 1).is_err());
        assert!(brezis_lieb_check(2.0, 1, 0.5, 0.1, 1).is_err());
    }
}
