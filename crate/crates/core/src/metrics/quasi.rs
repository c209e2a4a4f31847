use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{bch_product, inverse, CarnotGroup, GroupPoint};
use crate::liealg::StratifiedAlgebra;

/// N(x) = max_d ‖x_{V_d}‖₂^{1/d}.
///
/// Homogeneous of degree one under dilations and symmetric under inversion;
/// in Heisenberg groups it is subadditive, elsewhere only up to a constant.
#[derive(Clone, Debug)]
pub struct QuasiNorm {
    strata: Vec<Range<usize>>,
    dim: usize,
}

impl QuasiNorm {
    pub fn new(alg: &StratifiedAlgebra) -> Self {
        QuasiNorm {
            strata: (1..=alg.step()).map(|s| alg.stratum_range(s)).collect(),
            dim: alg.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.strata
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let e: f64 = x[r.clone()].iter().map(|v| v * v).sum::<f64>().sqrt();
                e.powf(1.0 / (i + 1) as f64)
            })
            .fold(0.0, f64::max)
    }

    pub fn norm_point(&self, p: &GroupPoint) -> f64 {
        self.norm(&p.to_f64())
    }

    /// N(p⁻¹q), both given as coordinates.
    pub fn distance(&self, group: &CarnotGroup, p: &[f64], q: &[f64]) -> f64 {
        self.norm(&group.product_f64(&group.inverse_f64(p), q))
    }

    /// Exact group arithmetic before the final float conversion.
    pub fn distance_exact(&self, p: &GroupPoint, q: &GroupPoint) -> Result<f64> {
        if p.coords().len() != self.dim || q.coords().len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.coords().len(),
            });
        }
        Ok(self.norm_point(&bch_product(&inverse(p), q)?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub samples: usize,
    /// Largest observed d(p,r) / (d(p,q) + d(q,r)).
    pub triangle_constant: f64,
}

/// Samples triples with coordinates spread over several scales and records
/// the worst triangle ratio.
pub fn calibrate(group: &Arc<CarnotGroup>, samples: usize, seed: u64) -> Calibration {
    let norm = QuasiNorm::new(group.algebra());
    let n = group.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut pick = || -> Vec<f64> {
            let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
            (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
        };
        let (p, q, r) = (pick(), pick(), pick());
        let lhs = norm.distance(group, &p, &r);
        let rhs = norm.distance(group, &p, &q) + norm.distance(group, &q, &r);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Calibration {
        samples,
        triangle_constant: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_g8, make_heisenberg};

    #[test]
    fn basic_values() {
        let h = make_heisenberg(1).unwrap();
        let n = QuasiNorm::new(&h);
        assert_eq!(n.norm(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(n.norm(&[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(n.norm(&[0.0, 0.0, 1.0]), 1.0);
        assert!((n.norm(&[0.0, 0.0, 4.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dilation_scales_linearly() {
        let g = CarnotGroup::new(Arc::new(make_g8())).unwrap();
        let n = QuasiNorm::new(g.algebra());
        let x = [0.3, -1.0, 0.2, 0.5, 2.0, -0.1, 0.7, 3.0];
        let r = n.norm(&g.dilate_f64(&x, 2.0)) / n.norm(&x);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_triangle_holds() {
        let g = Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(2).unwrap())).unwrap());
        let c = calibrate(&g, 2000, 7);
        assert!(
            c.triangle_constant <= 1.0 + 1e-12,
            "{}",
            c.triangle_constant
        );
    }
}
