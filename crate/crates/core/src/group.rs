//! Group law in exponential coordinates of the first kind.

use std::sync::{Arc, OnceLock};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::StratifiedAlgebra;
use crate::symbolic::{rat, serde_scalar, to_f64, Coeff, MultiPoly, PolyVectorField, Scalar};

/// Highest nilpotency step for which the truncated BCH series is exact here.
pub const MAX_STEP: usize = 4;

#[derive(Clone, Debug)]
pub struct GroupPoint {
    algebra: Arc<StratifiedAlgebra>,
    coords: Vec<Scalar>,
}

impl PartialEq for GroupPoint {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.algebra, &other.algebra) && self.coords == other.coords
    }
}

impl Serialize for GroupPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_scalar::vec::serialize(&self.coords, s)
    }
}

fn same_algebra(a: &Arc<StratifiedAlgebra>, b: &Arc<StratifiedAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GroupPoint {
    pub fn new(algebra: Arc<StratifiedAlgebra>, coords: Vec<Scalar>) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                found: coords.len(),
            });
        }
        Ok(GroupPoint { algebra, coords })
    }

    pub fn identity(algebra: Arc<StratifiedAlgebra>) -> Self {
        let n = algebra.dim();
        GroupPoint {
            algebra,
            coords: vec![Scalar::zero(); n],
        }
    }

    pub fn algebra(&self) -> &Arc<StratifiedAlgebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Scalar> {
        self.coords
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

fn axpy<T: Coeff>(acc: &mut [T], c: &Scalar, v: &[T]) {
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero_coeff() {
            *a = a.clone() + x.from_scalar_like(c) * x.clone();
        }
    }
}

/// log(exp X · exp Y), exact through degree four:
/// X + Y + ½[X,Y] + (1/12)([X,[X,Y]] + [Y,[Y,X]]) − (1/24)[Y,[X,[X,Y]]].
pub fn bch<T: Coeff>(alg: &StratifiedAlgebra, x: &[T], y: &[T]) -> Result<Vec<T>> {
    let step = alg.step();
    if step > MAX_STEP {
        return Err(Error::Unsupported(format!(
            "group law for step {step} (supported up to {MAX_STEP})"
        )));
    }
    let mut z: Vec<T> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a.clone() + b.clone())
        .collect();
    if step < 2 {
        return Ok(z);
    }
    let xy = alg.bracket_with(x, y);
    axpy(&mut z, &rat(1, 2), &xy);
    if step < 3 {
        return Ok(z);
    }
    let xxy = alg.bracket_with(x, &xy);
    let yxy = alg.bracket_with(y, &xy);
    axpy(&mut z, &rat(1, 12), &xxy);
    axpy(&mut z, &rat(-1, 12), &yxy);
    if step < 4 {
        return Ok(z);
    }
    let yxxy = alg.bracket_with(y, &xxy);
    axpy(&mut z, &rat(-1, 24), &yxxy);
    Ok(z)
}

pub fn bch_product(p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
    if !same_algebra(&p.algebra, &q.algebra) {
        return Err(Error::Invalid(format!(
            "points live in different algebras ({} vs {})",
            p.algebra.name(),
            q.algebra.name()
        )));
    }
    let coords = bch(&p.algebra, &p.coords, &q.coords)?;
    Ok(GroupPoint {
        algebra: p.algebra.clone(),
        coords,
    })
}

pub fn inverse(p: &GroupPoint) -> GroupPoint {
    GroupPoint {
        algebra: p.algebra.clone(),
        coords: p.coords.iter().map(|x| -x).collect(),
    }
}

/// δ_λ: coordinate i scaled by λ^deg(i).
pub fn dilate(p: &GroupPoint, lambda: &Scalar) -> GroupPoint {
    let coords = p
        .coords
        .iter()
        .enumerate()
        .map(|(i, x)| x * num_traits::pow(lambda.clone(), p.algebra.degree(i)))
        .collect();
    GroupPoint {
        algebra: p.algebra.clone(),
        coords,
    }
}

/// A Carnot group with its left-invariant frame computed on first use.
#[derive(Debug)]
pub struct CarnotGroup {
    algebra: Arc<StratifiedAlgebra>,
    fields: OnceLock<Vec<PolyVectorField>>,
    /// Structure constants as floats for the numerical group law.
    fast: Vec<(usize, usize, usize, f64)>,
}

impl CarnotGroup {
    pub fn new(algebra: Arc<StratifiedAlgebra>) -> Result<Self> {
        if algebra.step() > MAX_STEP {
            return Err(Error::Unsupported(format!(
                "group law for step {} (supported up to {MAX_STEP})",
                algebra.step()
            )));
        }
        let fast = algebra
            .constants()
            .iter()
            .map(|e| (e.i, e.j, e.k, to_f64(&e.c)))
            .collect();
        Ok(CarnotGroup {
            algebra,
            fields: OnceLock::new(),
            fast,
        })
    }

    pub fn algebra(&self) -> &Arc<StratifiedAlgebra> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.algebra.clone())
    }

    pub fn point(&self, coords: Vec<Scalar>) -> Result<GroupPoint> {
        GroupPoint::new(self.algebra.clone(), coords)
    }

    pub fn product(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        bch_product(p, q)
    }

    fn bracket_f64(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for &(i, j, k, c) in &self.fast {
            out[k] += c * (u[i] * v[j] - u[j] * v[i]);
        }
        out
    }

    /// Same series as [`bch`], specialised to floats.
    pub fn product_f64(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let step = self.algebra.step();
        if step < 2 {
            return z;
        }
        let xy = self.bracket_f64(x, y);
        z.iter_mut().zip(&xy).for_each(|(a, b)| *a += 0.5 * b);
        if step < 3 {
            return z;
        }
        let xxy = self.bracket_f64(x, &xy);
        let yxy = self.bracket_f64(y, &xy);
        for c in 0..z.len() {
            z[c] += (xxy[c] - yxy[c]) / 12.0;
        }
        if step < 4 {
            return z;
        }
        let yxxy = self.bracket_f64(y, &xxy);
        z.iter_mut().zip(&yxxy).for_each(|(a, b)| *a -= b / 24.0);
        z
    }

    pub fn inverse_f64(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| -v).collect()
    }

    pub fn dilate_f64(&self, x: &[f64], lambda: f64) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| v * lambda.powi(self.algebra.degree(i) as i32))
            .collect()
    }

    /// X_i(x) = ∂_t|₀ (x · t eᵢ), obtained by differentiating the BCH polynomial.
    pub fn left_invariant_fields(&self) -> &[PolyVectorField] {
        self.fields.get_or_init(|| derive_fields(&self.algebra))
    }

    pub fn left_invariant_field(&self, i: usize) -> Result<&PolyVectorField> {
        self.left_invariant_fields()
            .get(i)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                dim: self.dim(),
            })
    }

    /// Polynomial weights c with V = Σ cᵢ Xᵢ. Uses the triangular shape
    /// Xᵢ = ∂ᵢ + (terms along strictly higher strata).
    pub fn frame_coefficients(&self, v: &PolyVectorField) -> Result<Vec<MultiPoly>> {
        let n = self.dim();
        if v.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.dim(),
            });
        }
        let frame = self.left_invariant_fields();
        let mut c: Vec<MultiPoly> = Vec::with_capacity(n);
        for j in 0..n {
            let mut cj = v.coeff(j).clone();
            for (i, ci) in c.iter().enumerate() {
                if self.algebra.degree(i) < self.algebra.degree(j) && !ci.is_zero() {
                    let r = frame[i].coeff(j);
                    if !r.is_zero() {
                        cj = &cj - &(ci * r);
                    }
                }
            }
            c.push(cj);
        }
        Ok(c)
    }

    /// Closed-form data for step-2 groups.
    pub fn step2(&self) -> Option<Step2Form> {
        Step2Form::from_algebra(&self.algebra)
    }
}

fn derive_fields(alg: &StratifiedAlgebra) -> Vec<PolyVectorField> {
    let n = alg.dim();
    let nv = n + 1;
    let t = n;
    let x: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(nv, i)).collect();
    (0..n)
        .map(|i| {
            let mut y = vec![MultiPoly::zero(nv); n];
            y[i] = MultiPoly::var(nv, t);
            let z = bch(alg, &x, &y).expect("step checked at construction");
            let coeffs = z
                .iter()
                .map(|zj| {
                    zj.derivative(t)
                        .set_var(t, &Scalar::zero())
                        .remove_var(t)
                        .expect("t eliminated")
                })
                .collect();
            PolyVectorField::new(coeffs).expect("consistent variable count")
        })
        .collect()
}

/// Step-2 data: B^k_{jl} = −c^{m+k}_{jl}, so that
/// (x, y)·(x̃, ỹ) = (x + x̃, y + ỹ + ½ B^k_{jl} x̃_j x_l).
#[derive(Clone, Debug, PartialEq)]
pub struct Step2Form {
    m: usize,
    r: usize,
    /// b[k][j][l]
    b: Vec<Vec<Vec<Scalar>>>,
}

impl Step2Form {
    pub fn from_algebra(alg: &StratifiedAlgebra) -> Option<Self> {
        if alg.step() != 2 {
            return None;
        }
        let m = alg.strata()[0];
        let r = alg.strata()[1];
        let mut b = vec![vec![vec![Scalar::zero(); m]; m]; r];
        for e in alg.constants() {
            if e.i < m && e.j < m && e.k >= m {
                b[e.k - m][e.i][e.j] = -e.c.clone();
                b[e.k - m][e.j][e.i] = e.c.clone();
            }
        }
        Some(Step2Form { m, r, b })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertical_dim(&self) -> usize {
        self.r
    }

    pub fn b(&self, k: usize, j: usize, l: usize) -> &Scalar {
        &self.b[k][j][l]
    }

    pub fn matrices(&self) -> &[Vec<Vec<Scalar>>] {
        &self.b
    }

    pub fn b_f64(&self) -> Vec<Vec<Vec<f64>>> {
        self.b
            .iter()
            .map(|mk| {
                mk.iter()
                    .map(|row| row.iter().map(to_f64).collect())
                    .collect()
            })
            .collect()
    }

    pub fn product(&self, p: &[Scalar], q: &[Scalar]) -> Vec<Scalar> {
        let m = self.m;
        let mut out: Vec<Scalar> = p.iter().zip(q).map(|(a, b)| a + b).collect();
        let half = rat(1, 2);
        for k in 0..self.r {
            let mut s = Scalar::zero();
            for j in 0..m {
                if q[j].is_zero() {
                    continue;
                }
                for l in 0..m {
                    if !self.b[k][j][l].is_zero() {
                        s += &self.b[k][j][l] * &q[j] * &p[l];
                    }
                }
            }
            out[m + k] += &half * s;
        }
        out
    }

    /// X_j = ∂_{x_j} + ½ B^k_{jl} x_l ∂_{y_k}, written out directly.
    pub fn horizontal_field(&self, j: usize) -> PolyVectorField {
        let n = self.m + self.r;
        let mut coeffs = PolyVectorField::coordinate(n, j).coeffs().to_vec();
        for k in 0..self.r {
            let mut c = MultiPoly::zero(n);
            for l in 0..self.m {
                if !self.b[k][j][l].is_zero() {
                    c = &c + &MultiPoly::var(n, l).scale(&(&self.b[k][j][l] * rat(1, 2)));
                }
            }
            coeffs[self.m + k] = c;
        }
        PolyVectorField::new(coeffs).expect("consistent")
    }
}
