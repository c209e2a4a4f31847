//! Exact scalars, multivariate polynomials, polynomial vector fields and
//! rational linear algebra.
//!
//! Everything here works over ℚ. Polynomials are stored as a sparse map from
//! exponent tuples to nonzero coefficients; the degrees met in practice are
//! small (≤ 4), so no attempt is made at fancier representations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Scalar = BigRational;

pub fn rat(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"-0.25"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Scalar::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let digits: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac = Scalar::new(digits, scale);
        let whole = Scalar::from_integer(whole);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Scalar::from_integer(p))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_scalar(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses a comma-separated list of rationals, e.g. `"1,0,-1/2"`.
pub fn parse_scalar_list(s: &str) -> Result<Vec<Scalar>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_scalar).collect()
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(x: &Scalar) -> Option<Scalar> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_scalar {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Scalar, D::Error> {
        let raw = ScalarRepr::deserialize(d)?;
        raw.into_scalar().map_err(serde::de::Error::custom)
    }

    /// Accepts both `"p/q"` strings and bare JSON integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum ScalarRepr {
        Text(String),
        Int(i64),
    }

    impl ScalarRepr {
        pub(crate) fn into_scalar(self) -> Result<Scalar> {
            match self {
                ScalarRepr::Text(t) => parse_scalar(&t),
                ScalarRepr::Int(i) => Ok(int(i)),
            }
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(
            xs: &[Scalar],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_scalar(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Scalar>, D::Error> {
            let raw = Vec::<ScalarRepr>::deserialize(d)?;
            raw.into_iter()
                .map(|r| r.into_scalar().map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(
            rows: &[Vec<Scalar>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let text: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.iter().map(format_scalar).collect())
                .collect();
            text.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Scalar>>, D::Error> {
            let raw = Vec::<Vec<ScalarRepr>>::deserialize(d)?;
            raw.into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|r| r.into_scalar().map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            x: &Option<Scalar>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&format_scalar(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Scalar>, D::Error> {
            let raw = Option::<ScalarRepr>::deserialize(d)?;
            raw.map(|r| r.into_scalar().map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

/// Coefficient rings the bracket and BCH machinery can run over:
/// exact rationals, floats, and polynomials.
pub trait Coeff:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn from_scalar_like(&self, c: &Scalar) -> Self;
    fn is_zero_coeff(&self) -> bool;
}

impl Coeff for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero()
    }
    fn from_scalar_like(&self, c: &Scalar) -> Self {
        c.clone()
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
}

impl Coeff for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn from_scalar_like(&self, c: &Scalar) -> Self {
        to_f64(c)
    }
    fn is_zero_coeff(&self) -> bool {
        *self == 0.0
    }
}

impl Coeff for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.nvars)
    }
    fn from_scalar_like(&self, c: &Scalar) -> Self {
        MultiPoly::constant(self.nvars, c.clone())
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
}

/// Polynomial in `nvars` variables with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

/// One monomial in the JSON form `{"exponents": [...], "c": "p/q"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermSpec {
    pub exponents: Vec<u32>,
    #[serde(with = "serde_scalar")]
    pub c: Scalar,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Scalar::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(
            i < nvars,
            "variable index {i} out of range for {nvars} variables"
        );
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Scalar::one());
        p
    }

    pub fn monomial(exponents: Vec<u32>, c: Scalar) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: &[TermSpec]) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for t in terms {
            if t.exponents.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: t.exponents.len(),
                });
            }
            p.add_term(t.exponents.clone(), t.c.clone());
        }
        Ok(p)
    }

    pub fn to_terms(&self) -> Vec<TermSpec> {
        self.terms
            .iter()
            .map(|(e, c)| TermSpec {
                exponents: e.clone(),
                c: c.clone(),
            })
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Constant coefficient, i.e. the value at the origin.
    pub fn constant_term(&self) -> Scalar {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Scalar) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials over different variable counts"
        );
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * int(e[i] as i64));
        }
        out
    }

    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        assert_eq!(x.len(), self.nvars, "evaluation point has wrong length");
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "evaluation point has wrong length");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = to_f64(c);
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        t *= xi.powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Fixes variable `i` to the value `v`, keeping the variable count.
    pub fn set_var(&self, i: usize, v: &Scalar) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = std::mem::replace(&mut e2[i], 0);
            out.add_term(e2, c * num_traits::pow(v.clone(), k as usize));
        }
        out
    }

    /// Removes variable `i`, which must not occur in any monomial.
    pub fn remove_var(&self, i: usize) -> Result<Self> {
        let mut out = Self::zero(self.nvars - 1);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                return Err(Error::Invalid(format!("variable {i} still occurs")));
            }
            let mut e2 = e.clone();
            e2.remove(i);
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    /// Re-indexes into `nvars` variables, sending old variable `i` to `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect()
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("x{i}")
                    } else {
                        format!("x{i}^{k}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_scalar(&a))?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_scalar(&a), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_terms().serialize(s)
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_same(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_same(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_same(rhs);
        let mut out = MultiPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Scalar::one())
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        &self + &rhs
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

/// Vector field on ℝⁿ whose coefficients are polynomials in the n coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    coeffs: Vec<MultiPoly>,
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})∂{i}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Serialize for PolyVectorField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

impl PolyVectorField {
    pub fn new(coeffs: Vec<MultiPoly>) -> Result<Self> {
        let n = coeffs.len();
        if let Some(bad) = coeffs.iter().find(|c| c.nvars() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.nvars(),
            });
        }
        Ok(PolyVectorField { coeffs })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField {
            coeffs: vec![MultiPoly::zero(n); n],
        }
    }

    /// The coordinate field ∂/∂x_i.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[i] = MultiPoly::one(n);
        f
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &MultiPoly {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(MultiPoly::is_zero)
    }

    /// Directional derivative Σ_j V_j ∂p/∂x_j.
    pub fn apply(&self, p: &MultiPoly) -> Result<MultiPoly> {
        if p.nvars() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.nvars(),
            });
        }
        let mut acc = MultiPoly::zero(self.dim());
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = p.derivative(j);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        Ok(acc)
    }

    /// Commutator [V, W] with coefficients V(W_j) − W(V_j).
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let coeffs = (0..self.dim())
            .map(|j| {
                let a = self.apply(&other.coeffs[j])?;
                let b = other.apply(&self.coeffs[j])?;
                Ok(&a - &b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyVectorField { coeffs })
    }

    pub fn add(&self, other: &Self) -> Self {
        PolyVectorField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        PolyVectorField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Multiplies every coefficient by the function `g`.
    pub fn mul_poly(&self, g: &MultiPoly) -> Self {
        PolyVectorField {
            coeffs: self.coeffs.iter().map(|c| c * g).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        PolyVectorField {
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Σ g_i F_i for polynomial weights g_i.
    pub fn combination(weights: &[MultiPoly], fields: &[PolyVectorField]) -> Result<Self> {
        let n = fields
            .first()
            .map(|f| f.dim())
            .ok_or_else(|| Error::Invalid("empty field list in combination".into()))?;
        let mut acc = Self::zero(n);
        for (g, f) in weights.iter().zip(fields) {
            if g.is_zero() {
                continue;
            }
            acc = acc.add(&f.mul_poly(g));
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.coeffs.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval_f64(x)).collect()
    }
}

/// Reduced row echelon form with lowest-index pivoting.
/// Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Scalar>], ncols: usize) -> (Vec<Vec<Scalar>>, Vec<usize>) {
    let mut a: Vec<Vec<Scalar>> = rows.to_vec();
    let m = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r >= m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][col].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m {
            if i == r || a[i][col].is_zero() {
                continue;
            }
            let factor = a[i][col].clone();
            for j in col..ncols {
                let delta = &factor * &a[r][j];
                a[i][j] -= delta;
            }
        }
        pivots.push(col);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(rows: &[Vec<Scalar>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of { v : row · v = 0 for every row }.
///
/// Empty input yields the full space; one basis vector per free column,
/// with a 1 in that column.
pub fn solve_kernel(rows: &[Vec<Scalar>], ncols: usize) -> Vec<Vec<Scalar>> {
    let (r, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Scalar::zero(); ncols];
            v[fc] = Scalar::one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -row[fc].clone();
            }
            v
        })
        .collect()
}

/// Coordinates of `v` in terms of `basis` (rows), if `v` lies in their span.
/// The basis rows must be linearly independent.
pub fn coordinates_in(basis: &[Vec<Scalar>], v: &[Scalar]) -> Option<Vec<Scalar>> {
    let k = basis.len();
    let n = v.len();
    // Solve Σ a_r basis_r = v: columns are basis vectors, augmented with v.
    let rows: Vec<Vec<Scalar>> = (0..n)
        .map(|j| {
            let mut row: Vec<Scalar> = basis.iter().map(|b| b[j].clone()).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    let (r, pivots) = rref(&rows, k + 1);
    if pivots.contains(&k) {
        return None;
    }
    let mut a = vec![Scalar::zero(); k];
    for (row, &pc) in r.iter().zip(&pivots) {
        a[pc] = row[k].clone();
    }
    Some(a)
}

pub fn in_span(basis: &[Vec<Scalar>], v: &[Scalar]) -> bool {
    if basis.is_empty() {
        return v.iter().all(Zero::is_zero);
    }
    coordinates_in(basis, v).is_some()
}

/// Matrix–vector product for a matrix stored as rows.
pub fn mat_vec(m: &[Vec<Scalar>], v: &[Scalar]) -> Vec<Scalar> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
        })
        .collect()
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter()
        .zip(b)
        .fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> MultiPoly {
        MultiPoly::var(n, i)
    }

    #[test]
    fn parse_and_format_round() {
        assert_eq!(parse_scalar("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_scalar("7").unwrap(), int(7));
        assert_eq!(parse_scalar("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_scalar("1.5").unwrap(), rat(3, 2));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("abc").is_err());
        assert_eq!(format_scalar(&rat(4, 2)), "2");
        assert_eq!(format_scalar(&rat(-9, 12)), "-3/4");
    }

    #[test]
    fn rational_sqrt_perfect_squares_only() {
        assert_eq!(rational_sqrt(&rat(9, 25)), Some(rat(3, 5)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
        assert_eq!(rational_sqrt(&rat(-4, 1)), None);
    }

    #[test]
    fn apply_coordinate_field() {
        let n = 3;
        let p = x(n, 0).pow(2);
        let d = PolyVectorField::coordinate(n, 0).apply(&p).unwrap();
        assert_eq!(d, x(n, 0).scale(&int(2)));
    }

    #[test]
    fn apply_heisenberg_x1_to_vertical_coordinate() {
        // X1 = ∂_{x1} − (x2/2) ∂_y in coordinates (x1, x2, y)
        let n = 3;
        let mut c = vec![MultiPoly::zero(n); n];
        c[0] = MultiPoly::one(n);
        c[2] = x(n, 1).scale(&rat(-1, 2));
        let field = PolyVectorField::new(c).unwrap();
        let out = field.apply(&x(n, 2)).unwrap();
        assert_eq!(out, x(n, 1).scale(&rat(-1, 2)));
    }

    #[test]
    fn zero_field_annihilates() {
        let n = 2;
        let p = &x(n, 0) * &x(n, 1);
        assert!(PolyVectorField::zero(n).apply(&p).unwrap().is_zero());
    }

    #[test]
    fn apply_dimension_mismatch() {
        let err = PolyVectorField::zero(2).apply(&MultiPoly::one(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = PolyVectorField::zero(2).bracket(&PolyVectorField::zero(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn coordinate_fields_commute() {
        let b = PolyVectorField::coordinate(2, 0)
            .bracket(&PolyVectorField::coordinate(2, 1))
            .unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn heisenberg_fields_bracket_to_vertical() {
        let n = 3;
        let mut c1 = vec![MultiPoly::zero(n); n];
        c1[0] = MultiPoly::one(n);
        c1[2] = x(n, 1).scale(&rat(-1, 2));
        let mut c2 = vec![MultiPoly::zero(n); n];
        c2[1] = MultiPoly::one(n);
        c2[2] = x(n, 0).scale(&rat(1, 2));
        let x1 = PolyVectorField::new(c1).unwrap();
        let x2 = PolyVectorField::new(c2).unwrap();
        assert_eq!(x1.bracket(&x2).unwrap(), PolyVectorField::coordinate(n, 2));
    }

    #[test]
    fn kernel_examples() {
        let k = solve_kernel(&[vec![int(1), int(1), int(0)]], 3);
        assert_eq!(k.len(), 2);
        assert!(in_span(&k, &[int(1), int(-1), int(0)]));

        let id: Vec<Vec<Scalar>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| if i == j { int(1) } else { int(0) })
                    .collect()
            })
            .collect();
        assert!(solve_kernel(&id, 3).is_empty());

        // covector with ones in slots 0 and 2
        let mut row = vec![int(0); 8];
        row[0] = int(1);
        row[2] = int(1);
        let k = solve_kernel(&[row], 8);
        assert_eq!(k.len(), 7);
        let mut v = vec![int(0); 8];
        v[0] = int(1);
        v[2] = int(-1);
        assert!(in_span(&k, &v));

        assert_eq!(solve_kernel(&[], 4).len(), 4);
    }

    #[test]
    fn coordinates_in_span() {
        let basis = vec![vec![int(1), int(0), int(1)], vec![int(0), int(1), int(1)]];
        let c = coordinates_in(&basis, &[int(2), int(3), int(5)]).unwrap();
        assert_eq!(c, vec![int(2), int(3)]);
        assert!(coordinates_in(&basis, &[int(0), int(0), int(1)]).is_none());
    }

    #[test]
    fn set_and_remove_var() {
        let n = 2;
        let p = &(&x(n, 0) * &x(n, 1)) + &x(n, 1);
        let q = p.set_var(0, &int(3));
        assert_eq!(q, x(n, 1).scale(&int(4)));
        let r = q.remove_var(0).unwrap();
        assert_eq!(r, MultiPoly::var(1, 0).scale(&int(4)));
        assert!(p.remove_var(0).is_err());
    }

    #[test]
    fn display_is_readable() {
        let n = 2;
        let p = &x(n, 0).pow(2).scale(&rat(1, 3)) - &x(n, 1);
        assert_eq!(p.to_string(), "-x1 + 1/3*x0^2");
    }
}
