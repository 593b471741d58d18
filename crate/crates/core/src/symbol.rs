//! Positive homogeneous Fourier multipliers standing in for the abelian
//! positive Rockland operators.
//!
//! A symbol is sigma(xi) = sum_j c_j |xi_j|^{k_j} with k_j = 2 nu0 / w_j,
//! which is homogeneous of degree 2 nu0 under the dual dilation
//! xi_j -> r^{w_j} xi_j. For weight vectors whose orders come out as even
//! integers this is exactly the symbol of a constant-coefficient
//! differential operator; arbitrary positive real orders are allowed behind
//! the extended constructor since the multiplier calculus does not need
//! integrality.

use crate::error::{Error, Result};
use crate::exponents::DilationStructure;
use crate::rational::{rat, to_f64, Rat};

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSymbol {
    coeffs: Vec<f64>,
    axis_orders: Vec<f64>,
    /// Even-integer fast path for the differential-operator case.
    int_orders: Option<Vec<u32>>,
    homogeneity: f64,
    weights: DilationStructure,
}

impl HomogeneousSymbol {
    /// The canonical symbol for a weight vector: orders 2 nu0 / w_j with
    /// nu0 the least common multiple of the weights, all orders even
    /// integers, homogeneous degree 2 nu0.
    pub fn from_weights(coeffs: Vec<f64>, weights: &DilationStructure) -> Result<Self> {
        if coeffs.len() != weights.dims() {
            return Err(Error::InvalidSymbol(format!(
                "{} coefficients for {} axes",
                coeffs.len(),
                weights.dims()
            )));
        }
        check_coeffs(&coeffs)?;
        let nu0 = weights.common_multiple();
        let orders: Vec<Rat> = weights
            .weights()
            .iter()
            .map(|w| rat(2, 1) * nu0 / *w)
            .collect();
        let mut int_orders = Vec::with_capacity(orders.len());
        for o in &orders {
            debug_assert!(o.is_integer() && o.numer() % 2 == 0);
            int_orders.push(*o.numer() as u32);
        }
        Ok(Self {
            coeffs,
            axis_orders: orders.iter().map(to_f64).collect(),
            int_orders: Some(int_orders),
            homogeneity: to_f64(&(rat(2, 1) * nu0)),
            weights: weights.clone(),
        })
    }

    /// Extended symbols: arbitrary positive real axis orders, still required
    /// to be homogeneous with respect to the weights (w_j k_j constant).
    pub fn with_orders(
        coeffs: Vec<f64>,
        axis_orders: Vec<f64>,
        weights: &DilationStructure,
    ) -> Result<Self> {
        if coeffs.len() != weights.dims() || axis_orders.len() != weights.dims() {
            return Err(Error::InvalidSymbol(
                "coefficients, orders and weights must have equal length".into(),
            ));
        }
        check_coeffs(&coeffs)?;
        let wf = weights.weights_f64();
        let degree = wf[0] * axis_orders[0];
        for (w, k) in wf.iter().zip(&axis_orders) {
            if !(k.is_finite() && *k > 0.0) {
                return Err(Error::InvalidSymbol(format!("axis order must be positive, got {k}")));
            }
            if (w * k - degree).abs() > 1e-12 * degree.abs() {
                return Err(Error::InvalidSymbol(format!(
                    "order {k} on weight {w} breaks homogeneity (w*k = {} vs {degree})",
                    w * k
                )));
            }
        }
        let int_orders = axis_orders
            .iter()
            .map(|k| {
                let r = k.round();
                if (k - r).abs() < 1e-12 && r > 0.0 && (r as u64) % 2 == 0 {
                    Some(r as u32)
                } else {
                    None
                }
            })
            .collect::<Option<Vec<u32>>>();
        Ok(Self {
            coeffs,
            axis_orders,
            int_orders,
            homogeneity: degree,
            weights: weights.clone(),
        })
    }

    /// sigma(xi) >= 0, zero only at xi = 0.
    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.coeffs.len());
        match &self.int_orders {
            Some(orders) => xi
                .iter()
                .zip(&self.coeffs)
                .zip(orders)
                .map(|((x, c), k)| c * x.powi(*k as i32))
                .sum(),
            None => xi
                .iter()
                .zip(&self.coeffs)
                .zip(&self.axis_orders)
                .map(|((x, c), k)| c * x.abs().powf(*k))
                .sum(),
        }
    }

    /// Same symbol with all coefficients multiplied by `factor` > 0.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut s = self.clone();
        s.coeffs.iter_mut().for_each(|c| *c *= factor);
        check_coeffs(&s.coeffs)?;
        Ok(s)
    }

    /// Homogeneous degree (2 nu0 for canonical symbols).
    pub fn homogeneity(&self) -> f64 {
        self.homogeneity
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn axis_orders(&self) -> &[f64] {
        &self.axis_orders
    }

    pub fn weights(&self) -> &DilationStructure {
        &self.weights
    }

    pub fn dims(&self) -> usize {
        self.coeffs.len()
    }
}

fn check_coeffs(coeffs: &[f64]) -> Result<()> {
    if coeffs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::InvalidSymbol(
            "all symbol coefficients must be positive".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn canonical_orders_from_weights() {
        let w = DilationStructure::new(vec![rat(1, 1), rat(2, 1)]).unwrap();
        let s = HomogeneousSymbol::from_weights(vec![1.0, 1.0], &w).unwrap();
        assert_eq!(s.axis_orders(), &[4.0, 2.0]);
        assert_eq!(s.homogeneity(), 4.0);
        assert_eq!(s.evaluate(&[2.0, 3.0]), 16.0 + 9.0);
    }

    #[test]
    fn isotropic_laplacian_symbol() {
        let w = DilationStructure::isotropic(1);
        let s = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
        assert_eq!(s.axis_orders(), &[2.0]);
        assert_eq!(s.homogeneity(), 2.0);
        assert_eq!(s.evaluate(&[-3.0]), 9.0);
    }

    #[test]
    fn dilation_homogeneity_exact_on_samples() {
        let w = DilationStructure::new(vec![rat(1, 1), rat(2, 1)]).unwrap();
        let s = HomogeneousSymbol::from_weights(vec![2.0, 0.5], &w).unwrap();
        // exact-power lambda keeps the identity exact in floating point
        let lam: f64 = 2.0;
        for xi in [[1.0, 1.0], [0.5, -2.0], [-4.0, 0.25]] {
            let scaled = [lam * xi[0], lam * lam * xi[1]];
            assert_eq!(s.evaluate(&scaled), lam.powi(4) * s.evaluate(&xi));
        }
    }

    #[test]
    fn extended_orders_must_stay_homogeneous() {
        let w = DilationStructure::new(vec![rat(1, 1), rat(2, 1)]).unwrap();
        // w * k constant: (1 * 3, 2 * 1.5)
        let ok = HomogeneousSymbol::with_orders(vec![1.0, 1.0], vec![3.0, 1.5], &w);
        assert!(ok.is_ok());
        assert!(ok.unwrap().int_orders.is_none());
        let bad = HomogeneousSymbol::with_orders(vec![1.0, 1.0], vec![3.0, 2.0], &w);
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        let w = DilationStructure::isotropic(2);
        assert!(HomogeneousSymbol::from_weights(vec![1.0, 0.0], &w).is_err());
        assert!(HomogeneousSymbol::from_weights(vec![1.0, -2.0], &w).is_err());
    }
}
