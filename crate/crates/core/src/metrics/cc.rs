//! Upper bounds for the Carnot–Carathéodory distance from explicit horizontal paths.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::CarnotGroup;
use crate::metrics::quasi::QuasiNorm;
use crate::symbolic::{rank, to_f64, Scalar};

const MAX_SEGMENTS: usize = 48;
const INNER_STEPS: usize = 3;
const RESTORE_TOL: f64 = 1e-11;

/// A horizontal path made of straight first-stratum moves exp(v₁)·exp(v₂)·…
#[derive(Clone, Debug, Serialize)]
pub struct CcPath {
    pub length: f64,
    pub phase1_length: f64,
    pub segments: Vec<Vec<f64>>,
    pub endpoint_error: f64,
}

struct StratumWords {
    degree: usize,
    range: Range<usize>,
    words: Vec<Vec<usize>>,
    /// Sends the V_d part of a residual to word coefficients.
    solve: DMatrix<f64>,
}

/// Precomputed bracket words for building exact-endpoint paths in one group.
pub struct CcPlanner {
    group: Arc<CarnotGroup>,
    norm: QuasiNorm,
    m: usize,
    strata: Vec<StratumWords>,
}

impl CcPlanner {
    pub fn new(group: Arc<CarnotGroup>) -> Result<Self> {
        let alg = group.algebra().clone();
        let m = alg.rank();
        let n = alg.dim();
        let mut strata = Vec::new();
        for d in 2..=alg.step() {
            let range = alg.stratum_range(d);
            let mut chosen: Vec<Vec<Scalar>> = Vec::new();
            let mut words = Vec::new();
            let mut word = vec![0usize; d];
            'search: loop {
                let mut val = alg.basis_vector(word[d - 1]);
                for &i in word[..d - 1].iter().rev() {
                    val = alg.bracket_with(&alg.basis_vector(i), &val);
                }
                if val.iter().any(|x| !x.is_zero()) {
                    let mut trial = chosen.clone();
                    trial.push(val.clone());
                    if rank(&trial, n) > chosen.len() {
                        chosen.push(val);
                        words.push(word.clone());
                        if chosen.len() == range.len() {
                            break 'search;
                        }
                    }
                }
                // Next word in lexicographic order.
                let mut pos = d;
                loop {
                    if pos == 0 {
                        break 'search;
                    }
                    pos -= 1;
                    word[pos] += 1;
                    if word[pos] < m {
                        break;
                    }
                    word[pos] = 0;
                }
            }
            if chosen.len() != range.len() {
                return Err(Error::InvalidAlgebra(format!(
                    "brackets of V1 do not span stratum {d}"
                )));
            }
            let w = DMatrix::from_fn(range.len(), range.len(), |r, c| {
                to_f64(&chosen[c][range.start + r])
            });
            let solve = w
                .try_inverse()
                .ok_or_else(|| Error::Numerical("singular bracket-word matrix".into()))?;
            strata.push(StratumWords {
                degree: d,
                range,
                words,
                solve,
            });
        }
        let norm = QuasiNorm::new(&alg);
        Ok(CcPlanner {
            group,
            norm,
            m,
            strata,
        })
    }

    pub fn group(&self) -> &Arc<CarnotGroup> {
        &self.group
    }

    fn lift(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.group.dim()];
        out[..self.m].copy_from_slice(v);
        out
    }

    fn endpoint(&self, flat: &[f64]) -> Vec<f64> {
        flat.chunks(self.m)
            .fold(vec![0.0; self.group.dim()], |acc, v| {
                self.group.product_f64(&acc, &self.lift(v))
            })
    }

    fn length(&self, flat: &[f64]) -> f64 {
        flat.chunks(self.m)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum()
    }

    fn commutator_path(gens: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if gens.len() == 1 {
            return vec![gens[0].clone()];
        }
        let a = vec![gens[0].clone()];
        let b = Self::commutator_path(&gens[1..]);
        let inv = |p: &[Vec<f64>]| -> Vec<Vec<f64>> {
            p.iter()
                .rev()
                .map(|v| v.iter().map(|x| -x).collect())
                .collect()
        };
        let mut out = a.clone();
        out.extend(b.iter().cloned());
        out.extend(inv(&a));
        out.extend(inv(&b));
        out
    }

    /// Layered construction: first-stratum move, then for each stratum d,
    /// iterated commutators of d generators scaled by |t|^{1/d}.
    fn phase_one(&self, target: &[f64]) -> Vec<Vec<f64>> {
        let mut segs: Vec<Vec<f64>> = Vec::new();
        if target[..self.m].iter().any(|&x| x != 0.0) {
            segs.push(target[..self.m].to_vec());
        }
        for sw in &self.strata {
            let flat: Vec<f64> = segs.iter().flatten().copied().collect();
            let cur = self.endpoint(&flat);
            let residual = self
                .group
                .product_f64(&self.group.inverse_f64(&cur), target);
            let rd =
                DVector::from_iterator(sw.range.len(), residual[sw.range.clone()].iter().copied());
            let t = &sw.solve * rd;
            for (word, &tj) in sw.words.iter().zip(t.iter()) {
                if tj.abs() < 1e-300 {
                    continue;
                }
                let s = tj.abs().powf(1.0 / sw.degree as f64);
                let gens: Vec<Vec<f64>> = word
                    .iter()
                    .enumerate()
                    .map(|(pos, &i)| {
                        let mut v = vec![0.0; self.m];
                        v[i] = if pos == 0 { s * tj.signum() } else { s };
                        v
                    })
                    .collect();
                segs.extend(Self::commutator_path(&gens));
            }
        }
        segs
    }

    fn jacobian(&self, flat: &[f64]) -> DMatrix<f64> {
        let n = self.group.dim();
        let h = 1e-7;
        let mut j = DMatrix::zeros(n, flat.len());
        let mut work = flat.to_vec();
        for c in 0..flat.len() {
            work[c] = flat[c] + h;
            let plus = self.endpoint(&work);
            work[c] = flat[c] - h;
            let minus = self.endpoint(&work);
            work[c] = flat[c];
            for r in 0..n {
                j[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
            }
        }
        j
    }

    fn residual(&self, flat: &[f64], target: &[f64]) -> DVector<f64> {
        let e = self.endpoint(flat);
        DVector::from_iterator(e.len(), e.iter().zip(target).map(|(a, b)| a - b))
    }

    /// Gauss–Newton back onto the endpoint constraint.
    fn restore(&self, mut flat: Vec<f64>, target: &[f64]) -> Option<Vec<f64>> {
        for _ in 0..12 {
            let r = self.residual(&flat, target);
            if r.amax() < RESTORE_TOL {
                return Some(flat);
            }
            let j = self.jacobian(&flat);
            let a = &j * j.transpose() + DMatrix::identity(j.nrows(), j.nrows()) * 1e-14;
            let y = a.lu().solve(&r)?;
            let dx = j.transpose() * y;
            for (x, d) in flat.iter_mut().zip(dx.iter()) {
                *x -= d;
            }
        }
        (self.residual(&flat, target).amax() < RESTORE_TOL).then_some(flat)
    }

    fn descend(&self, flat: &[f64], target: &[f64]) -> Option<Vec<f64>> {
        let len = self.length(flat);
        let mut grad = vec![0.0; flat.len()];
        for (g, v) in grad.chunks_mut(self.m).zip(flat.chunks(self.m)) {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv > 1e-14 {
                g.iter_mut().zip(v).for_each(|(gi, vi)| *gi = vi / nv);
            }
        }
        let j = self.jacobian(flat);
        let a = &j * j.transpose() + DMatrix::identity(j.nrows(), j.nrows()) * 1e-12;
        let g = DVector::from_vec(grad);
        let y = a.lu().solve(&(&j * &g))?;
        let d = &g - j.transpose() * y;
        let dn = d.norm();
        if dn < 1e-10 {
            return None;
        }
        let mut eta = 0.25 * len / dn.max(1e-12) / (flat.len() as f64).sqrt();
        for _ in 0..8 {
            let trial: Vec<f64> = flat
                .iter()
                .zip(d.iter())
                .map(|(x, di)| x - eta * di)
                .collect();
            if let Some(restored) = self.restore(trial, target) {
                if self.length(&restored) < len - 1e-13 {
                    return Some(restored);
                }
            }
            eta *= 0.5;
        }
        None
    }

    /// Horizontal path from p to q; the length is nonincreasing in `budget`.
    pub fn upper_bound(&self, p: &[f64], q: &[f64], budget: usize) -> Result<CcPath> {
        let n = self.group.dim();
        for x in [p, q] {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x.len(),
                });
            }
        }
        let g = self.group.product_f64(&self.group.inverse_f64(p), q);
        let scale = self.norm.norm(&g);
        if scale == 0.0 {
            return Ok(CcPath {
                length: 0.0,
                phase1_length: 0.0,
                segments: vec![],
                endpoint_error: 0.0,
            });
        }
        if !scale.is_finite() {
            return Err(Error::Numerical("non-finite target".into()));
        }
        // Work at unit scale so the optimiser commutes with dilations.
        let unit = self.group.dilate_f64(&g, 1.0 / scale);
        let segs = self.phase_one(&unit);
        let mut flat: Vec<f64> = segs.iter().flatten().copied().collect();
        if let Some(polished) = self.restore(flat.clone(), &unit) {
            flat = polished;
        }
        let phase1_length = self.length(&flat);

        for _ in 0..budget {
            if flat.len() / self.m * 2 <= MAX_SEGMENTS {
                flat = flat
                    .chunks(self.m)
                    .flat_map(|v| {
                        let half: Vec<f64> = v.iter().map(|x| x * 0.5).collect();
                        [half.clone(), half]
                    })
                    .flatten()
                    .collect();
            }
            for _ in 0..INNER_STEPS {
                match self.descend(&flat, &unit) {
                    Some(next) => flat = next,
                    None => break,
                }
            }
        }

        let endpoint_error = self.residual(&flat, &unit).amax() * scale;
        Ok(CcPath {
            length: self.length(&flat) * scale,
            phase1_length: phase1_length * scale,
            segments: flat
                .chunks(self.m)
                .map(|v| v.iter().map(|x| x * scale).collect())
                .collect(),
            endpoint_error,
        })
    }
}

pub fn cc_upper_bound(
    group: &Arc<CarnotGroup>,
    p: &[f64],
    q: &[f64],
    budget: usize,
) -> Result<CcPath> {
    CcPlanner::new(group.clone())?.upper_bound(p, q, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_g8, make_heisenberg};

    fn heis(n: usize) -> Arc<CarnotGroup> {
        Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(n).unwrap())).unwrap())
    }

    #[test]
    fn horizontal_target_is_a_segment() {
        let g = heis(1);
        let r = cc_upper_bound(&g, &[0.0; 3], &[1.0, 0.0, 0.0], 2).unwrap();
        assert!(r.length <= 1.0 + 1e-6);
        assert!(r.length >= 1.0 - 1e-9);
    }

    #[test]
    fn same_point_is_zero() {
        let g = heis(1);
        let p = [0.3, -0.2, 1.0];
        assert_eq!(cc_upper_bound(&g, &p, &p, 3).unwrap().length, 0.0);
    }

    #[test]
    fn vertical_target_beats_commutator() {
        let g = heis(1);
        let r = cc_upper_bound(&g, &[0.0; 3], &[0.0, 0.0, 1.0], 4).unwrap();
        assert!((r.phase1_length - 4.0).abs() < 1e-9);
        assert!(r.length < r.phase1_length);
        // Isoperimetric bound: a closed horizontal loop enclosing area 1 has length ≥ 2√π.
        assert!(
            r.length >= 2.0 * std::f64::consts::PI.sqrt() - 1e-6,
            "{}",
            r.length
        );
        assert!(r.endpoint_error < 1e-9);
    }

    #[test]
    fn step_three_endpoint_is_exact() {
        let g = Arc::new(CarnotGroup::new(Arc::new(make_g8())).unwrap());
        let q = [0.2, -0.4, 0.1, 0.3, 1.0, -0.5, 0.25, 0.8];
        let r = cc_upper_bound(&g, &[0.0; 8], &q, 1).unwrap();
        assert!(r.endpoint_error < 1e-8, "{}", r.endpoint_error);
        assert!(r.length <= r.phase1_length + 1e-12);
    }
}
