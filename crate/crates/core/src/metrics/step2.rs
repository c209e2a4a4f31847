//! Intrinsic graphs over the vertical subgroup 𝕎 = {x₁ = 0} of a step-2 group.
//!
//! Coordinates on 𝕎 are (x₂, …, x_m, y₁, …, y_r); the complementary
//! horizontal subgroup is the x₁-axis.

use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{CarnotGroup, Step2Form};
use crate::metrics::quasi::QuasiNorm;
use crate::symbolic::{rank, rat, to_f64, MultiPoly, PolyVectorField, Scalar};

/// Float-evaluable copy of a polynomial.
#[derive(Clone, Debug)]
pub struct FastPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl FastPoly {
    pub fn new(p: &MultiPoly) -> Self {
        let terms = p
            .terms()
            .map(|(e, c)| {
                let powers = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k as i32))
                    .collect();
                (to_f64(c), powers)
            })
            .collect();
        FastPoly { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, pw)| pw.iter().fold(*c, |acc, &(i, k)| acc * x[i].powi(k)))
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct Step2GraphSetup {
    group: Arc<CarnotGroup>,
    form: Step2Form,
    b: Vec<Vec<Vec<f64>>>,
    phi: MultiPoly,
    phi_fast: FastPoly,
    lipschitz: f64,
    norm: QuasiNorm,
}

impl Step2GraphSetup {
    /// `phi` is a polynomial in the m − 1 + r coordinates of 𝕎.
    pub fn new(group: Arc<CarnotGroup>, phi: MultiPoly, lipschitz: f64) -> Result<Self> {
        let form = group
            .step2()
            .ok_or_else(|| Error::Unsupported("graph setup needs a step-2 group".into()))?;
        let m = form.m();
        let r = form.vertical_dim();
        if m < 2 {
            return Err(Error::Invalid(
                "first stratum must have dimension ≥ 2".into(),
            ));
        }
        if phi.nvars() != m - 1 + r {
            return Err(Error::DimensionMismatch {
                expected: m - 1 + r,
                found: phi.nvars(),
            });
        }
        let flat: Vec<Vec<Scalar>> = form
            .matrices()
            .iter()
            .map(|mk| mk.iter().flatten().cloned().collect())
            .collect();
        if rank(&flat, m * m) != r {
            return Err(Error::InvalidAlgebra(
                "B-matrices are linearly dependent".into(),
            ));
        }
        if !(lipschitz > 0.0) {
            return Err(Error::Invalid("Lipschitz constant must be positive".into()));
        }
        let b = form.b_f64();
        let norm = QuasiNorm::new(group.algebra());
        Ok(Step2GraphSetup {
            phi_fast: FastPoly::new(&phi),
            group,
            form,
            b,
            phi,
            lipschitz,
            norm,
        })
    }

    pub fn group(&self) -> &Arc<CarnotGroup> {
        &self.group
    }

    pub fn m(&self) -> usize {
        self.form.m()
    }

    pub fn vertical_dim(&self) -> usize {
        self.form.vertical_dim()
    }

    /// Dimension of 𝕎.
    pub fn w_dim(&self) -> usize {
        self.m() - 1 + self.vertical_dim()
    }

    pub fn phi(&self) -> &MultiPoly {
        &self.phi
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn norm(&self) -> &QuasiNorm {
        &self.norm
    }

    pub fn phi_at(&self, w: &[f64]) -> f64 {
        self.phi_fast.eval(w)
    }

    /// (0, w) as group coordinates.
    pub fn embed(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0];
        g.extend_from_slice(w);
        g
    }

    /// Φ(w) = w · φ̃(w), φ̃(w) = exp(φ(w) X₁).
    pub fn graph_point(&self, w: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.group.dim()];
        h[0] = self.phi_at(w);
        self.group.product_f64(&self.embed(w), &h)
    }

    /// g = π_𝕎(g) · π_ℍ(g).
    pub fn split(&self, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.m();
        let x1 = g[0];
        let mut w = g.to_vec();
        w[0] = 0.0;
        for k in 0..self.vertical_dim() {
            let corr: f64 = (1..m).map(|l| self.b[k][0][l] * g[l]).sum();
            w[m + k] -= 0.5 * x1 * corr;
        }
        let mut h = vec![0.0; g.len()];
        h[0] = x1;
        (w, h)
    }

    /// q ∈ C_{𝕎,ℍ}(p, α): N(π_𝕎(p⁻¹q)) ≤ α N(π_ℍ(p⁻¹q)).
    pub fn cone_membership(&self, p: &[f64], q: &[f64], alpha: f64) -> bool {
        let g = self.group.product_f64(&self.group.inverse_f64(p), q);
        let (w, h) = self.split(&g);
        self.norm.norm(&w) <= alpha * self.norm.norm(&h)
    }

    /// D_j^φ = X_j|_𝕎 + φ B^k_{j1} Y_k for j = 2..m, with exact coefficients.
    pub fn build_d_phi(&self) -> Vec<PolyVectorField> {
        let m = self.m();
        let r = self.vertical_dim();
        let nw = self.w_dim();
        let half = rat(1, 2);
        (1..m)
            .map(|j| {
                let mut coeffs = vec![MultiPoly::zero(nw); nw];
                coeffs[j - 1] = MultiPoly::one(nw);
                for k in 0..r {
                    let mut c = self.phi.scale(self.form.b(k, j, 0));
                    for l in 1..m {
                        let blk = self.form.b(k, j, l);
                        if !blk.is_zero() {
                            c = &c + &MultiPoly::var(nw, l - 1).scale(&(blk * &half));
                        }
                    }
                    coeffs[m - 1 + k] = c;
                }
                PolyVectorField::new(coeffs).expect("consistent")
            })
            .collect()
    }

    /// Vector field of the controlled system at w for control a (length m − 1).
    fn velocity(&self, w: &[f64], a: &[f64]) -> Vec<f64> {
        let m = self.m();
        let phi = self.phi_at(w);
        let mut v = vec![0.0; w.len()];
        v[..m - 1].copy_from_slice(a);
        for k in 0..self.vertical_dim() {
            let mut s = 0.0;
            for (jj, &aj) in a.iter().enumerate() {
                if aj == 0.0 {
                    continue;
                }
                let j = jj + 1;
                let mut inner = phi * self.b[k][j][0];
                for l in 1..m {
                    inner += 0.5 * self.b[k][j][l] * w[l - 1];
                }
                s += aj * inner;
            }
            v[m - 1 + k] = s;
        }
        v
    }

    /// Integrates γ′ = Σ a_j D_j^φ(γ) with fixed-step RK4, storing
    /// `nodes_per_unit` nodes per unit time (at least one per segment).
    pub fn integrate_horizontal(
        &self,
        start: &[f64],
        controls: &[ControlSegment],
        nodes_per_unit: usize,
        rk4_step: f64,
    ) -> Result<HorizontalCurve> {
        let nw = self.w_dim();
        if start.len() != nw {
            return Err(Error::DimensionMismatch {
                expected: nw,
                found: start.len(),
            });
        }
        if !(rk4_step > 0.0) || nodes_per_unit == 0 {
            return Err(Error::Invalid(
                "step and node density must be positive".into(),
            ));
        }
        let mut w = start.to_vec();
        let mut t = 0.0;
        let mut times = vec![0.0];
        let mut nodes = vec![w.clone()];
        let mut segment_of_node = vec![usize::MAX];
        for (si, seg) in controls.iter().enumerate() {
            if seg.a.len() != self.m() - 1 {
                return Err(Error::DimensionMismatch {
                    expected: self.m() - 1,
                    found: seg.a.len(),
                });
            }
            if seg.duration < 0.0 || !seg.duration.is_finite() {
                return Err(Error::Invalid(
                    "segment duration must be finite and non-negative".into(),
                ));
            }
            if seg.duration == 0.0 {
                continue;
            }
            let gaps = ((seg.duration * nodes_per_unit as f64).ceil() as usize).max(1);
            let dt_node = seg.duration / gaps as f64;
            let sub = ((dt_node / rk4_step).ceil() as usize).max(1);
            let h = dt_node / sub as f64;
            for _ in 0..gaps {
                for _ in 0..sub {
                    let k1 = self.velocity(&w, &seg.a);
                    let k2 = self.velocity(&axpy(&w, 0.5 * h, &k1), &seg.a);
                    let k3 = self.velocity(&axpy(&w, 0.5 * h, &k2), &seg.a);
                    let k4 = self.velocity(&axpy(&w, h, &k3), &seg.a);
                    for c in 0..nw {
                        w[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                    }
                }
                if w.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Numerical(
                        "non-finite value while integrating".into(),
                    ));
                }
                t += dt_node;
                times.push(t);
                nodes.push(w.clone());
                segment_of_node.push(si);
            }
        }
        Ok(HorizontalCurve {
            controls: controls.to_vec(),
            times,
            nodes,
            segment_of_node,
        })
    }

    /// Σ d(Φ(γ(t_i)), Φ(γ(t_{i+s}))) over every `stride`-th node (last node always included).
    pub fn graph_lift_length(&self, curve: &HorizontalCurve, stride: usize) -> f64 {
        let stride = stride.max(1);
        let last = curve.nodes.len() - 1;
        let mut idx: Vec<usize> = (0..=last).step_by(stride).collect();
        if *idx.last().unwrap() != last {
            idx.push(last);
        }
        let lifted: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| self.graph_point(&curve.nodes[i]))
            .collect();
        lifted
            .windows(2)
            .map(|p| self.norm.distance(&self.group, &p[0], &p[1]))
            .sum()
    }

    /// Empirical intrinsic Lipschitz data over all pairs of sampled graph points.
    pub fn intrinsic_lipschitz_check(&self, samples: &[Vec<f64>]) -> LipschitzReport {
        let pts: Vec<Vec<f64>> = samples.iter().map(|w| self.graph_point(w)).collect();
        let mut violations = Vec::new();
        let mut constant: f64 = 0.0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let g = self
                    .group
                    .product_f64(&self.group.inverse_f64(&pts[i]), &pts[j]);
                let (w, h) = self.split(&g);
                let (nw, nh) = (self.norm.norm(&w), self.norm.norm(&h));
                if nw == 0.0 && nh == 0.0 {
                    continue;
                }
                if nh > self.lipschitz * nw {
                    violations.push((i, j));
                }
                constant = if nw == 0.0 {
                    f64::INFINITY
                } else {
                    constant.max(nh / nw)
                };
            }
        }
        LipschitzReport {
            pairs: pts.len() * pts.len().saturating_sub(1),
            violations,
            empirical_constant: constant,
        }
    }

    pub fn random_w(&self, rng: &mut ChaCha8Rng, radius: f64) -> Vec<f64> {
        (0..self.w_dim())
            .map(|_| rng.gen_range(-radius..radius))
            .collect()
    }

    pub fn sample_w(&self, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| self.random_w(&mut rng, radius))
            .collect()
    }
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, v)| u + a * v).collect()
}

/// Constant controls a = (a₂, …, a_m) held for `duration`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ControlSegment {
    pub duration: f64,
    pub a: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HorizontalCurve {
    pub controls: Vec<ControlSegment>,
    pub times: Vec<f64>,
    /// 𝕎-coordinates at each time.
    pub nodes: Vec<Vec<f64>>,
    /// Control segment driving the step into each node (unused for node 0).
    #[serde(skip)]
    pub segment_of_node: Vec<usize>,
}

impl HorizontalCurve {
    pub fn endpoint(&self) -> &[f64] {
        self.nodes.last().expect("at least the start node")
    }

    /// ∫ |a(s)| ds, evaluated segment by segment.
    pub fn phi_length(&self) -> f64 {
        self.controls
            .iter()
            .map(|c| c.duration * c.a.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum()
    }

    /// ∫ |(x₂′, …, x_m′)| ds from the stored nodes; x is piecewise linear.
    pub fn coordinate_length(&self, m: usize) -> f64 {
        self.nodes
            .windows(2)
            .map(|p| {
                (0..m - 1)
                    .map(|c| (p[1][c] - p[0][c]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    pub violations: Vec<(usize, usize)>,
    /// max N(π_ℍ) / N(π_𝕎) over sampled pairs; any L above it has no violations.
    pub empirical_constant: f64,
}
