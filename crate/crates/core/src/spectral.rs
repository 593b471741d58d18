//! Discrete Fourier machinery: frequencies, fractional multiplier powers,
//! Sobolev seminorms, dilation sampling and the seeded spectral sampler
//! used by the verification suites.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exponents::DilationStructure;
use crate::grid::{pairwise_sum, GridFunction, GridSpec};
use crate::symbol::HomogeneousSymbol;

/// Periodic frequencies per axis in transform order:
/// (pi/L) * {0, 1, ..., N/2 - 1, -N/2, ..., -1}.
pub fn fourier_frequencies(spec: &GridSpec) -> Vec<Vec<f64>> {
    (0..spec.dims())
        .map(|a| {
            let n = spec.points()[a];
            let base = std::f64::consts::PI / spec.half_lengths()[a];
            (0..n)
                .map(|k| {
                    let k = if k < n / 2 {
                        k as i64
                    } else {
                        k as i64 - n as i64
                    };
                    base * k as f64
                })
                .collect()
        })
        .collect()
}

/// Cached FFT plans and frequencies for one grid.
pub struct SpectralEngine {
    spec: GridSpec,
    freqs: Vec<Vec<f64>>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl SpectralEngine {
    pub fn new(spec: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = spec
            .points()
            .iter()
            .map(|n| planner.plan_fft_forward(*n))
            .collect();
        let inv = spec
            .points()
            .iter()
            .map(|n| planner.plan_fft_inverse(*n))
            .collect();
        Self {
            spec: spec.clone(),
            freqs: fourier_frequencies(spec),
            fwd,
            inv,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn frequencies(&self) -> &[Vec<f64>] {
        &self.freqs
    }

    fn transform_axes(&self, data: &mut [Complex<f64>], inverse: bool) {
        let points = self.spec.points();
        let strides = self.spec.strides();
        let total = data.len();
        let mut scratch = Vec::new();
        for a in 0..self.spec.dims() {
            let n = points[a];
            let stride = strides[a];
            let block = n * stride;
            let plan = if inverse { &self.inv[a] } else { &self.fwd[a] };
            scratch.resize(n, Complex::new(0.0, 0.0));
            for line in 0..total / n {
                let base = (line / stride) * block + line % stride;
                for t in 0..n {
                    scratch[t] = data[base + t * stride];
                }
                plan.process(&mut scratch);
                for t in 0..n {
                    data[base + t * stride] = scratch[t];
                }
            }
        }
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward(&self, u: &GridFunction) -> Vec<Complex<f64>> {
        debug_assert_eq!(u.spec(), &self.spec);
        let mut data: Vec<Complex<f64>> =
            u.values().iter().map(|v| Complex::new(*v, 0.0)).collect();
        self.transform_axes(&mut data, false);
        data
    }

    /// Inverse transform back to real samples; the imaginary residue must
    /// sit below 1e-10 of the field norm and is then discarded.
    pub fn inverse_real(&self, mut data: Vec<Complex<f64>>) -> Result<GridFunction> {
        self.transform_axes(&mut data, true);
        let scale = 1.0 / data.len() as f64;
        let re: Vec<f64> = data.iter().map(|z| z.re * scale).collect();
        let im2: Vec<f64> = data.iter().map(|z| (z.im * scale).powi(2)).collect();
        let re2: Vec<f64> = re.iter().map(|v| v * v).collect();
        let imag_norm = pairwise_sum(&im2).sqrt();
        let real_norm = pairwise_sum(&re2).sqrt();
        if imag_norm > 1e-10 * real_norm.max(1e-300) {
            return Err(Error::Numeric(format!(
                "imaginary residue {imag_norm:.3e} exceeds 1e-10 of field norm {real_norm:.3e}"
            )));
        }
        GridFunction::from_values(&self.spec, re)
    }

    /// sigma(xi)^s evaluated over the whole spectrum, with sigma(0)^s := 0
    /// for every s >= 0 so constants are annihilated consistently.
    pub fn multiplier_field(&self, sym: &HomogeneousSymbol, s: f64) -> Vec<f64> {
        let strides = self.spec.strides();
        let points = self.spec.points();
        let mut field = vec![0.0; self.spec.len()];
        let mut xi = vec![0.0; self.spec.dims()];
        for (flat, out) in field.iter_mut().enumerate() {
            let mut at_origin = true;
            for a in 0..self.spec.dims() {
                let k = (flat / strides[a]) % points[a];
                xi[a] = self.freqs[a][k];
                at_origin &= xi[a] == 0.0;
            }
            *out = if at_origin {
                0.0
            } else if s == 1.0 {
                sym.evaluate(&xi)
            } else {
                sym.evaluate(&xi).powf(s)
            };
        }
        field
    }

    /// Applies a precomputed spectral multiplier to real samples.
    pub fn apply_field(&self, field: &[f64], u: &GridFunction) -> Result<GridFunction> {
        if !u.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut spectrum = self.forward(u);
        for (z, m) in spectrum.iter_mut().zip(field) {
            *z *= m;
        }
        self.inverse_real(spectrum)
    }
}

/// R^s u realized as the inverse transform of sigma(xi)^s u^(xi).
///
/// s is the fractional power of the operator itself; the order-a Sobolev
/// field is obtained with s = a / homogeneity. The zero mode is annihilated
/// for every s >= 0, so s = 0 acts as the identity only on mean-zero input.
pub fn apply_fractional_power(
    sym: &HomogeneousSymbol,
    s: f64,
    u: &GridFunction,
) -> Result<GridFunction> {
    if s < 0.0 || !s.is_finite() {
        return Err(Error::Numeric(format!("fractional power must be >= 0, got {s}")));
    }
    let engine = SpectralEngine::new(u.spec());
    let field = engine.multiplier_field(sym, s);
    engine.apply_field(&field, u)
}

/// Homogeneous Sobolev seminorm of order a: the L^p norm of R^{a/nu} u.
pub fn sobolev_seminorm(u: &GridFunction, sym: &HomogeneousSymbol, a: f64, p: f64) -> Result<f64> {
    if a < 0.0 {
        return Err(Error::Numeric(format!("order must be >= 0, got {a}")));
    }
    if p < 1.0 {
        return Err(Error::Numeric(format!("p must be >= 1, got {p}")));
    }
    Ok(apply_fractional_power(sym, a / sym.homogeneity(), u)?.lp_norm(p))
}

/// Samples the L^p-normalized anisotropic dilation
/// lambda^{Q/p} f(lambda^{w_1} x_1, ..., lambda^{w_n} x_n) of a closed-form
/// profile.
pub fn dilate(
    f: impl Fn(&[f64]) -> f64,
    lambda: f64,
    p: f64,
    weights: &DilationStructure,
    spec: &GridSpec,
) -> GridFunction {
    let wf = weights.weights_f64();
    let q_hom = crate::rational::to_f64(&weights.homogeneous_dimension());
    let amp = lambda.powf(q_hom / p);
    let stretch: Vec<f64> = wf.iter().map(|w| lambda.powf(*w)).collect();
    GridFunction::sample(spec, |x| {
        let mut pt = [0.0f64; 3];
        for (j, (xj, s)) in x.iter().zip(&stretch).enumerate() {
            pt[j] = xj * s;
        }
        amp * f(&pt[..x.len()])
    })
}

/// Seeded random smooth field: uniform white noise shaped in frequency by
/// (1 + sigma_ref(xi))^{-decay} with sigma_ref the Euclidean |xi|^2, an
/// optional zero-mean projection, deterministic in the seed.
pub fn random_test_function(
    spec: &GridSpec,
    decay: f64,
    seed: u64,
    zero_mean: bool,
) -> GridFunction {
    assert!(decay > 0.0, "decay must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let u = GridFunction::from_values(spec, noise).expect("noise is finite");
    let engine = SpectralEngine::new(spec);
    let mut spectrum = engine.forward(&u);
    let strides = spec.strides();
    let points = spec.points();
    let freqs = engine.frequencies();
    for (flat, z) in spectrum.iter_mut().enumerate() {
        let mut sig = 0.0;
        for a in 0..spec.dims() {
            let k = (flat / strides[a]) % points[a];
            sig += freqs[a][k] * freqs[a][k];
        }
        if zero_mean && sig == 0.0 {
            *z = Complex::new(0.0, 0.0);
        } else {
            *z *= (1.0 + sig).powf(-decay);
        }
    }
    engine
        .inverse_real(spectrum)
        .expect("shaped noise stays real")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian_1d() -> (DilationStructure, HomogeneousSymbol) {
        let w = DilationStructure::isotropic(1);
        let s = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
        (w, s)
    }

    #[test]
    fn frequencies_unit_box() {
        let spec = GridSpec::line(8, PI).unwrap();
        let f = fourier_frequencies(&spec);
        assert_eq!(f[0], vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn frequencies_scale_with_box() {
        let spec = GridSpec::new(vec![8], vec![PI / 2.0]).unwrap();
        let f = fourier_frequencies(&spec);
        assert_eq!(f[0], vec![0.0, 2.0, 4.0, 6.0, -8.0, -6.0, -4.0, -2.0]);
    }

    #[test]
    fn frequencies_2d_layout_matches_row_major() {
        let spec = GridSpec::new(vec![8, 16], vec![PI, PI]).unwrap();
        let f = fourier_frequencies(&spec);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].len(), 8);
        assert_eq!(f[1].len(), 16);
        // mode (1, 2): strides say flat = 1 * 16 + 2
        let engine = SpectralEngine::new(&spec);
        let u = GridFunction::sample(&spec, |x| (x[0] + 2.0 * x[1]).cos());
        let spec_hat = engine.forward(&u);
        let flat = 16 + 2;
        assert!(
            spec_hat[flat].norm() > 1.0,
            "cos(x + 2y) concentrates on mode (1,2), got {}",
            spec_hat[flat]
        );
    }

    #[test]
    fn fractional_power_eigenrelations() {
        // sin(x) is an eigenfunction of -d^2/dx^2 with eigenvalue 1
        let spec = GridSpec::line(64, PI).unwrap();
        let (_, sym) = laplacian_1d();
        let u = GridFunction::sample(&spec, |x| x[0].sin());
        let v = apply_fractional_power(&sym, 1.0, &u).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        // half power of |xi|^2 on sin(2x): sqrt(4) = 2
        let u2 = GridFunction::sample(&spec, |x| (2.0 * x[0]).sin());
        let v2 = apply_fractional_power(&sym, 0.5, &u2).unwrap();
        for (a, b) in u2.values().iter().zip(v2.values()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_power_is_identity_on_mean_zero() {
        let spec = GridSpec::line(64, 2.0).unwrap();
        let (_, sym) = laplacian_1d();
        let u = random_test_function(&spec, 2.0, 7, true);
        let v = apply_fractional_power(&sym, 0.0, &u).unwrap();
        let mut diff = u.clone();
        diff.axpy(-1.0, &v);
        assert!(diff.lp_norm(2.0) < 1e-12 * u.lp_norm(2.0).max(1e-12));
        // on a non-mean-zero input the zero mode is removed
        let w = GridFunction::sample(&spec, |_| 1.5);
        let wv = apply_fractional_power(&sym, 0.0, &w).unwrap();
        assert!(wv.lp_norm(2.0) < 1e-12);
    }

    #[test]
    fn seminorm_of_sine_is_sqrt_pi() {
        let spec = GridSpec::line(128, PI).unwrap();
        let (_, sym) = laplacian_1d();
        let u = GridFunction::sample(&spec, |x| x[0].sin());
        let s = sobolev_seminorm(&u, &sym, 1.0, 2.0).unwrap();
        assert!((s - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn plancherel_consistency() {
        let spec = GridSpec::new(vec![32, 16], vec![1.0, 2.0]).unwrap();
        let u = random_test_function(&spec, 1.0, 3, false);
        let engine = SpectralEngine::new(&spec);
        let spectrum = engine.forward(&u);
        let total = spec.len() as f64;
        let mags: Vec<f64> = spectrum.iter().map(|z| z.norm_sqr()).collect();
        let parseval = pairwise_sum(&mags) * spec.cell_volume() / total;
        let direct = u.lp_norm(2.0).powi(2);
        assert!(
            (parseval - direct).abs() <= 1e-10 * direct,
            "{parseval} vs {direct}"
        );
    }

    #[test]
    fn semigroup_property_on_mean_zero() {
        let spec = GridSpec::line(128, 5.0).unwrap();
        let (_, sym) = laplacian_1d();
        let u = random_test_function(&spec, 3.0, 11, true);
        let (s1, s2) = (0.35, 0.9);
        let a = apply_fractional_power(&sym, s1, &apply_fractional_power(&sym, s2, &u).unwrap())
            .unwrap();
        let b = apply_fractional_power(&sym, s1 + s2, &u).unwrap();
        let mut diff = a.clone();
        diff.axpy(-1.0, &b);
        assert!(diff.lp_norm(2.0) <= 1e-10 * b.lp_norm(2.0));
    }

    #[test]
    fn dilation_preserves_lp_norm_on_gaussians() {
        // identity dilation is plain sampling
        let w = DilationStructure::isotropic(1);
        let spec = GridSpec::line(256, 20.0).unwrap();
        let g = |x: &[f64]| (-x[0] * x[0] / 2.0).exp();
        let u1 = dilate(g, 1.0, 2.0, &w, &spec);
        let direct = GridFunction::sample(&spec, g);
        assert_eq!(u1.values(), direct.values());

        // lambda = 2 with p = 2: L^2 norm preserved to quadrature accuracy
        let u2 = dilate(g, 2.0, 2.0, &w, &spec);
        let (n1, n2) = (u1.lp_norm(2.0), u2.lp_norm(2.0));
        assert!((n2 - n1).abs() <= 1e-8 * n1, "{n2} vs {n1}");
    }

    #[test]
    fn random_field_deterministic_and_smooth() {
        let spec = GridSpec::new(vec![32, 32], vec![3.0, 3.0]).unwrap();
        let a = random_test_function(&spec, 2.0, 42, true);
        let b = random_test_function(&spec, 2.0, 42, true);
        assert_eq!(a.values(), b.values());
        let c = random_test_function(&spec, 2.0, 43, true);
        assert_ne!(a.values(), c.values());

        // zero-mean option kills the DC mode
        let mean: f64 = a.values().iter().sum::<f64>();
        assert!(mean.abs() < 1e-9 * a.values().len() as f64);

        // heavier decay damps seminorms relative to L^2
        let w = DilationStructure::isotropic(2);
        let sym = HomogeneousSymbol::from_weights(vec![1.0, 1.0], &w).unwrap();
        let smooth = random_test_function(&spec, 4.0, 1, true);
        let rough = random_test_function(&spec, 0.5, 1, true);
        let ratio_smooth =
            sobolev_seminorm(&smooth, &sym, 2.0, 2.0).unwrap() / smooth.lp_norm(2.0);
        let ratio_rough = sobolev_seminorm(&rough, &sym, 2.0, 2.0).unwrap() / rough.lp_norm(2.0);
        assert!(ratio_smooth < ratio_rough);
    }
}
