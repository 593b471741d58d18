//! Periodic rectangular grids, real-valued samples and quadrature-backed
//! norms.
//!
//! Axis j spans [-L_j, L_j) with N_j equispaced points; the rectangle rule
//! is exact for trigonometric polynomials below Nyquist, matching the
//! spectral representation everything else is built on. All reductions use
//! pairwise tree summation so results are independent of threading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic grid: per-axis point counts (powers of two, >= 8) and
/// half-lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    points: Vec<usize>,
    half_lengths: Vec<f64>,
}

impl GridSpec {
    pub fn new(points: Vec<usize>, half_lengths: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dims must be 1..=3, got {}",
                points.len()
            )));
        }
        if points.len() != half_lengths.len() {
            return Err(Error::InvalidGrid(
                "points and half_lengths must have equal length".into(),
            ));
        }
        for &n in &points {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "points per axis must be a power of two >= 8, got {n}"
                )));
            }
        }
        for &l in &half_lengths {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("half-length must be positive, got {l}")));
            }
        }
        Ok(Self {
            points,
            half_lengths,
        })
    }

    pub fn line(n: usize, half_length: f64) -> Result<Self> {
        Self::new(vec![n], vec![half_length])
    }

    pub fn dims(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn half_lengths(&self) -> &[f64] {
        &self.half_lengths
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing along an axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_lengths[axis] / self.points[axis] as f64
    }

    /// Quadrature cell volume.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    /// Coordinates along one axis: -L, -L + h, ..., L - h.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.points[axis])
            .map(|i| -self.half_lengths[axis] + i as f64 * h)
            .collect()
    }

    /// Row-major strides (axis 0 slowest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims()];
        for a in (0..self.dims().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.points[a + 1];
        }
        s
    }
}

/// Deterministic pairwise tree sum; the reduction order does not depend on
/// chunking or thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Real samples on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self {
            spec: spec.clone(),
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_values(spec: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch {
                expected: spec.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            spec: spec.clone(),
            values,
        })
    }

    /// Samples a closed-form profile on the grid.
    pub fn sample(spec: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let coords: Vec<Vec<f64>> = (0..spec.dims()).map(|a| spec.axis_coords(a)).collect();
        let mut values = Vec::with_capacity(spec.len());
        let mut idx = vec![0usize; spec.dims()];
        let mut point = vec![0.0; spec.dims()];
        for _ in 0..spec.len() {
            for (a, &i) in idx.iter().enumerate() {
                point[a] = coords[a][i];
            }
            values.push(f(&point));
            // odometer increment, last axis fastest
            for a in (0..spec.dims()).rev() {
                idx[a] += 1;
                if idx[a] < spec.points()[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Self {
            spec: spec.clone(),
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Rectangle-rule integral of |u|^p.
    pub fn lp_mass(&self, p: f64) -> f64 {
        let h = self.spec.cell_volume();
        let powered: Vec<f64> = if p == 2.0 {
            self.values.iter().map(|v| v * v).collect()
        } else if p == 1.0 {
            self.values.iter().map(|v| v.abs()).collect()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).collect()
        };
        pairwise_sum(&powered) * h
    }

    /// L^p norm (sum |u|^p h)^{1/p}, p >= 1.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_mass(p).powf(1.0 / p)
    }

    /// L^2 inner product with quadrature weight.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.spec, other.spec);
        let prods: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        pairwise_sum(&prods) * self.spec.cell_volume()
    }

    /// Fraction of the |u|^p mass carried by the outer shell where some
    /// coordinate exceeds (1 - shell) of its half-length.
    pub fn boundary_mass(&self, p: f64, shell: f64) -> f64 {
        let spec = &self.spec;
        let strides = spec.strides();
        let mut inner_mask = vec![false; spec.len()];
        let coords: Vec<Vec<f64>> = (0..spec.dims()).map(|a| spec.axis_coords(a)).collect();
        for (flat, m) in inner_mask.iter_mut().enumerate() {
            let mut outer = false;
            for a in 0..spec.dims() {
                let i = (flat / strides[a]) % spec.points()[a];
                if coords[a][i].abs() >= (1.0 - shell) * spec.half_lengths()[a] {
                    outer = true;
                    break;
                }
            }
            *m = outer;
        }
        let outer_pow: Vec<f64> = self
            .values
            .iter()
            .zip(&inner_mask)
            .filter(|(_, m)| **m)
            .map(|(v, _)| v.abs().powf(p))
            .collect();
        let total = self.lp_mass(p);
        if total == 0.0 {
            return 0.0;
        }
        pairwise_sum(&outer_pow) * spec.cell_volume() / total
    }

    /// In-place u <- u + c v.
    pub fn axpy(&mut self, c: f64, v: &Self) {
        debug_assert_eq!(self.spec, v.spec);
        for (a, b) in self.values.iter_mut().zip(&v.values) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Pointwise modulus.
    pub fn abs_inplace(&mut self) {
        for v in &mut self.values {
            *v = v.abs();
        }
    }

    /// Circularly shifts the samples so the peak of |u| lands on the origin
    /// index; a reporting convenience, energies are translation invariant.
    pub fn recenter_peak(&mut self) {
        let spec = self.spec.clone();
        let strides = spec.strides();
        let (peak, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0usize, f64::MIN), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
        let origin: Vec<usize> = spec.points().iter().map(|n| n / 2).collect();
        let mut shift = vec![0usize; spec.dims()];
        for a in 0..spec.dims() {
            let pi = (peak / strides[a]) % spec.points()[a];
            shift[a] = (spec.points()[a] + origin[a] - pi) % spec.points()[a];
        }
        if shift.iter().all(|s| *s == 0) {
            return;
        }
        let mut out = vec![0.0; spec.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let mut dest = 0usize;
            for a in 0..spec.dims() {
                let i = (flat / strides[a]) % spec.points()[a];
                dest += ((i + shift[a]) % spec.points()[a]) * strides[a];
            }
            out[dest] = *v;
        }
        self.values = out;
    }
}
