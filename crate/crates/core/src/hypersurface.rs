//! Level-set hypersurfaces {f = 0} inside a Carnot group.

use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::CarnotGroup;
use crate::liealg::{Subalgebra, SubalgebraReport};
use crate::symbolic::{
    format_scalar, rank, serde_scalar, solve_kernel, MultiPoly, PolyVectorField, Scalar, TermSpec,
};

#[derive(Clone, Debug)]
pub struct LevelSurface {
    group: Arc<CarnotGroup>,
    f: MultiPoly,
    gradient: Vec<MultiPoly>,
}

/// JSON form: the algebra is resolved by the caller.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub algebra: serde_json::Value,
    pub f: Vec<TermSpec>,
}

impl LevelSurface {
    pub fn new(group: Arc<CarnotGroup>, f: MultiPoly) -> Result<Self> {
        if f.nvars() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                found: f.nvars(),
            });
        }
        if f.is_zero() {
            return Err(Error::Invalid(
                "defining function is identically zero".into(),
            ));
        }
        let m = group.algebra().rank();
        let gradient = group.left_invariant_fields()[..m]
            .iter()
            .map(|x| x.apply(&f))
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelSurface { group, f, gradient })
    }

    pub fn group(&self) -> &Arc<CarnotGroup> {
        &self.group
    }

    pub fn f(&self) -> &MultiPoly {
        &self.f
    }

    /// (X₁f, …, X_mf) as polynomials.
    pub fn horizontal_gradient_poly(&self) -> &[MultiPoly] {
        &self.gradient
    }

    fn check_point(&self, p: &[Scalar]) -> Result<()> {
        if p.len() != self.group.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.group.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, p: &[Scalar]) -> Result<Scalar> {
        self.check_point(p)?;
        Ok(self.f.eval(p))
    }

    pub fn contains(&self, p: &[Scalar]) -> Result<bool> {
        Ok(self.value(p)?.is_zero())
    }

    pub fn horizontal_gradient(&self, p: &[Scalar]) -> Result<Vec<Scalar>> {
        self.check_point(p)?;
        Ok(self.gradient.iter().map(|g| g.eval(p)).collect())
    }

    pub fn is_characteristic(&self, p: &[Scalar]) -> Result<bool> {
        if !self.contains(p)? {
            log::warn!("characteristic test at a point off the surface");
        }
        Ok(self.horizontal_gradient(p)?.iter().all(Zero::is_zero))
    }

    /// ker(∇_H f(p)) inside V₁, plus every higher stratum.
    pub fn tangent_group(&self, p: &[Scalar]) -> Result<TangentGroupReport> {
        let on_surface = self.contains(p)?;
        let grad = self.horizontal_gradient(p)?;
        if grad.iter().all(Zero::is_zero) {
            return Err(Error::CharacteristicPoint);
        }
        let alg = self.group.algebra().clone();
        let n = alg.dim();
        let m = alg.rank();
        let mut vectors: Vec<Vec<Scalar>> = solve_kernel(std::slice::from_ref(&grad), m)
            .into_iter()
            .map(|mut v| {
                v.resize(n, Scalar::zero());
                v
            })
            .collect();
        vectors.extend((m..n).map(|i| alg.basis_vector(i)));
        let sub = Subalgebra::span(alg, &vectors)?;
        Ok(TangentGroupReport {
            point: p.to_vec(),
            on_surface,
            horizontal_gradient: grad,
            characteristic: false,
            codimension: sub.codim(),
            homogeneous_dimension: sub.homogeneous_dimension().ok(),
            class_parameter: None,
            invariant: None,
            tangent: sub.report(),
            subalgebra: sub,
        })
    }

    /// Exhaustive pass over a rational grid; returns characteristic surface points.
    pub fn scan_characteristic(&self, grid: &GridSpec) -> Result<ScanReport> {
        let n = self.group.dim();
        if grid.axes.is_empty() || grid.axes.iter().any(|a| a.steps == 0) {
            return Err(Error::Invalid("empty grid".into()));
        }
        if let Some(a) = grid.axes.iter().find(|a| a.coord >= n) {
            return Err(Error::IndexOutOfRange {
                index: a.coord,
                dim: n,
            });
        }
        let solver = match grid.solve_for {
            Some(c) => {
                if c >= n {
                    return Err(Error::IndexOutOfRange { index: c, dim: n });
                }
                let slope = self.f.derivative(c);
                if !slope.derivative(c).is_zero() {
                    return Err(Error::Invalid(format!(
                        "f is not affine in coordinate {c}; cannot solve for it"
                    )));
                }
                Some((c, slope, self.f.set_var(c, &Scalar::zero())))
            }
            None => None,
        };

        let total: usize = grid.axes.iter().map(|a| a.steps).product();
        let results: Vec<(bool, Option<Vec<Scalar>>)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut p = vec![Scalar::zero(); n];
                let mut rest = idx;
                for axis in &grid.axes {
                    p[axis.coord] = axis.value(rest % axis.steps);
                    rest /= axis.steps;
                }
                if let Some((c, slope, offset)) = &solver {
                    let a = slope.eval(&p);
                    if a.is_zero() {
                        return (false, None);
                    }
                    p[*c] = -offset.eval(&p) / a;
                } else {
                    let v = self.f.eval(&p);
                    if num_traits::Signed::abs(&v) > grid.tolerance {
                        return (false, None);
                    }
                }
                let ch = self.gradient.iter().all(|g| g.eval(&p).is_zero());
                (true, ch.then_some(p))
            })
            .collect();

        let surface_points = results.iter().filter(|r| r.0).count();
        let characteristic: Vec<Vec<Scalar>> = results.into_iter().filter_map(|r| r.1).collect();
        Ok(ScanReport {
            grid_points: total,
            surface_points,
            characteristic,
        })
    }

    /// Horizontal directions tangent to the surface at p, as weights on X₁..X_m
    /// and as coordinate vectors.
    pub fn induced_distribution(&self, p: &[Scalar]) -> Result<InducedDistribution> {
        let grad = self.horizontal_gradient(p)?;
        if grad.iter().all(Zero::is_zero) {
            return Err(Error::CharacteristicPoint);
        }
        let m = grad.len();
        let weights = solve_kernel(std::slice::from_ref(&grad), m);
        let frame = self.group.left_invariant_fields();
        let values: Vec<Vec<Scalar>> = frame[..m].iter().map(|x| x.eval(p)).collect();
        let vectors = weights
            .iter()
            .map(|w| {
                (0..self.group.dim())
                    .map(|c| {
                        w.iter()
                            .zip(&values)
                            .fold(Scalar::zero(), |acc, (a, v)| acc + a * &v[c])
                    })
                    .collect()
            })
            .collect();
        Ok(InducedDistribution { weights, vectors })
    }

    /// Polynomial horizontal frame of the induced distribution in 𝔥ⁿ.
    ///
    /// For n = 2 this is the global quaternionic frame. For n ≥ 3 the frame
    /// Z_j = (X_i f)X_j − (X_j f)X_i uses the first index i with X_i f ≠ 0 at
    /// `anchor`, and spans the distribution wherever X_i f ≠ 0.
    pub fn y_frame(&self, anchor: Option<&[Scalar]>) -> Result<Vec<PolyVectorField>> {
        let alg = self.group.algebra();
        let n = alg.heisenberg_rank().ok_or_else(|| {
            Error::Unsupported(format!(
                "{} is not a Heisenberg algebra in standard form",
                alg.name()
            ))
        })?;
        if n < 2 {
            return Err(Error::Unsupported(
                "frame needs Heisenberg rank n ≥ 2".into(),
            ));
        }
        let x = &self.group.left_invariant_fields()[..2 * n];
        let a = &self.gradient;
        let combo = |terms: &[(usize, usize, i64)]| {
            let weights: Vec<MultiPoly> = (0..2 * n)
                .map(|field| {
                    terms
                        .iter()
                        .filter(|t| t.0 == field)
                        .fold(MultiPoly::zero(alg.dim()), |acc, t| {
                            &acc + &a[t.1].scale(&Scalar::from_integer(t.2.into()))
                        })
                })
                .collect();
            PolyVectorField::combination(&weights, x)
        };
        if n == 2 {
            return [
                combo(&[(0, 1, -1), (1, 0, 1), (2, 3, -1), (3, 2, 1)]),
                combo(&[(0, 2, -1), (1, 3, 1), (2, 0, 1), (3, 1, -1)]),
                combo(&[(0, 3, -1), (1, 2, -1), (2, 1, 1), (3, 0, 1)]),
            ]
            .into_iter()
            .collect();
        }
        let anchor = anchor.ok_or_else(|| {
            Error::Invalid("an anchor point is required to choose the frame pivot".into())
        })?;
        let grad = self.horizontal_gradient(anchor)?;
        let i = grad
            .iter()
            .position(|g| !g.is_zero())
            .ok_or(Error::CharacteristicPoint)?;
        (0..2 * n)
            .filter(|&j| j != i)
            .map(|j| combo(&[(j, i, 1), (i, j, -1)]))
            .collect()
    }

    /// Dimensions of D, D + [D, D], … at p for the span of `frame`.
    pub fn growth_vector(
        &self,
        frame: &[PolyVectorField],
        p: &[Scalar],
        max_depth: usize,
    ) -> Result<Vec<usize>> {
        self.check_point(p)?;
        if frame.is_empty() || max_depth == 0 {
            return Err(Error::Invalid("empty frame or zero depth".into()));
        }
        for (idx, v) in frame.iter().enumerate() {
            if v.dim() != self.group.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.group.dim(),
                    found: v.dim(),
                });
            }
            let vf = v.apply(&self.f)?.eval(p);
            if !vf.is_zero() {
                return Err(Error::Invalid(format!(
                    "frame field {idx} is not tangent at p (Vf = {})",
                    format_scalar(&vf)
                )));
            }
        }
        let n = self.group.dim();
        let mut values: Vec<Vec<Scalar>> = frame.iter().map(|v| v.eval(p)).collect();
        let mut dims = vec![rank(&values, n)];
        let mut layer: Vec<PolyVectorField> = frame.to_vec();
        for _ in 1..max_depth {
            let mut next = Vec::new();
            for v in frame {
                for w in &layer {
                    let b = v.bracket(w)?;
                    if !b.is_zero() {
                        values.push(b.eval(p));
                        next.push(b);
                    }
                }
            }
            dims.push(rank(&values, n));
            layer = next;
        }
        Ok(dims)
    }

    /// Coefficients of the central direction Y in [Y₁,Y₂], [Y₁,Y₃], [Y₂,Y₃] for 𝔥².
    pub fn vertical_commutators(&self) -> Result<[MultiPoly; 3]> {
        let frame = self.y_frame(None)?;
        let centre = self.group.dim() - 1;
        let coeff = |a: usize, b: usize| -> Result<MultiPoly> {
            let br = frame[a].bracket(&frame[b])?;
            Ok(self.group.frame_coefficients(&br)?[centre].clone())
        };
        Ok([coeff(0, 1)?, coeff(0, 2)?, coeff(1, 2)?])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentGroupReport {
    #[serde(with = "serde_scalar::vec")]
    pub point: Vec<Scalar>,
    pub on_surface: bool,
    #[serde(with = "serde_scalar::vec")]
    pub horizontal_gradient: Vec<Scalar>,
    pub characteristic: bool,
    pub codimension: usize,
    pub homogeneous_dimension: Option<usize>,
    #[serde(with = "serde_scalar::option")]
    pub class_parameter: Option<Scalar>,
    #[serde(with = "serde_scalar::option")]
    pub invariant: Option<Scalar>,
    pub tangent: SubalgebraReport,
    #[serde(skip)]
    pub subalgebra: Subalgebra,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridAxis {
    pub coord: usize,
    #[serde(with = "serde_scalar")]
    pub lo: Scalar,
    #[serde(with = "serde_scalar")]
    pub hi: Scalar,
    pub steps: usize,
}

impl GridAxis {
    pub fn value(&self, k: usize) -> Scalar {
        if self.steps <= 1 {
            return self.lo.clone();
        }
        let t = Scalar::new(k.into(), (self.steps - 1).into());
        &self.lo + (&self.hi - &self.lo) * t
    }
}

/// Rational grid over chosen coordinates (others held at 0). With
/// `solve_for`, that coordinate is solved from f = 0 (f must be affine in it);
/// otherwise grid points with |f| ≤ tolerance count as surface points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    #[serde(with = "serde_scalar", default = "Scalar::zero")]
    pub tolerance: Scalar,
    #[serde(default)]
    pub solve_for: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub grid_points: usize,
    pub surface_points: usize,
    #[serde(with = "serde_scalar::matrix")]
    pub characteristic: Vec<Vec<Scalar>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InducedDistribution {
    #[serde(with = "serde_scalar::matrix")]
    pub weights: Vec<Vec<Scalar>>,
    #[serde(with = "serde_scalar::matrix")]
    pub vectors: Vec<Vec<Scalar>>,
}
