//! Named algebras, the 147E invariant, and the worked constructions built on them.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::CarnotGroup;
use crate::hypersurface::{LevelSurface, SurfaceSpec, TangentGroupReport};
use crate::liealg::{
    check_carnot_homomorphism, AlgebraSpec, HomomorphismReport, StratifiedAlgebra, Subalgebra,
};
use crate::symbolic::{
    coordinates_in, int, parse_scalar, rat, rational_sqrt, serde_scalar, solve_kernel, MultiPoly,
    PolyVectorField, Scalar,
};

/// 𝔤_μ: strata (3, 3, 1), basis X1..X7.
pub fn make_g_mu(mu: &Scalar) -> StratifiedAlgebra {
    StratifiedAlgebra::from_labels(
        format!("g_mu({})", crate::symbolic::format_scalar(mu)),
        vec![3, 3, 1],
        &["X1", "X2", "X3", "X4", "X5", "X6", "X7"],
        &[
            ("X1", "X2", "X4", int(1)),
            ("X1", "X3", "X6", int(-1)),
            ("X2", "X3", "X5", int(1)),
            ("X1", "X5", "X7", int(-1)),
            ("X2", "X6", "X7", mu.clone()),
            ("X3", "X4", "X7", Scalar::one() - mu),
        ],
    )
    .expect("fixed table")
}

/// The 8-dimensional algebra with strata (4, 3, 1), basis X0..X7.
pub fn make_g8() -> StratifiedAlgebra {
    StratifiedAlgebra::from_labels(
        "g8",
        vec![4, 3, 1],
        &["X0", "X1", "X2", "X3", "X4", "X5", "X6", "X7"],
        &[
            ("X1", "X2", "X4", int(1)),
            ("X1", "X3", "X6", int(-1)),
            ("X1", "X0", "X4", int(-1)),
            ("X2", "X3", "X5", int(1)),
            ("X1", "X5", "X7", int(-1)),
            ("X3", "X4", "X7", int(1)),
            ("X0", "X6", "X7", int(1)),
        ],
    )
    .expect("fixed table")
}

/// 𝔥ⁿ: basis X1..X2n, Y with [X_j, X_{j+n}] = Y.
pub fn make_heisenberg(n: usize) -> Result<StratifiedAlgebra> {
    if n < 1 {
        return Err(Error::Invalid("Heisenberg rank must be at least 1".into()));
    }
    let mut labels: Vec<String> = (1..=2 * n).map(|i| format!("X{i}")).collect();
    labels.push("Y".into());
    StratifiedAlgebra::new(
        format!("heis({n})"),
        vec![2 * n, 1],
        labels,
        (0..n).map(|j| (j, j + n, 2 * n, int(1))),
    )
}

/// 𝔥ⁿ × ℝ: basis X1..X2n, T, Y; T spans the extra first-stratum direction.
pub fn make_heis_times_r(n: usize) -> Result<StratifiedAlgebra> {
    if n < 1 {
        return Err(Error::Invalid("Heisenberg rank must be at least 1".into()));
    }
    let mut labels: Vec<String> = (1..=2 * n).map(|i| format!("X{i}")).collect();
    labels.push("T".into());
    labels.push("Y".into());
    StratifiedAlgebra::new(
        format!("heisxR({n})"),
        vec![2 * n + 1, 1],
        labels,
        (0..n).map(|j| (j, j + n, 2 * n + 1, int(1))),
    )
}

/// A parametrised family of algebras addressable by name.
pub trait AlgebraFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn usage(&self) -> &'static str;
    fn build(&self, arg: Option<&str>) -> Result<StratifiedAlgebra>;
}

fn need_arg<'a>(family: &dyn AlgebraFamily, arg: Option<&'a str>) -> Result<&'a str> {
    arg.ok_or_else(|| {
        Error::Parse(format!(
            "{} needs an argument: {}",
            family.name(),
            family.usage()
        ))
    })
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a non-negative integer, got {s:?}")))
}

struct GMu;
impl AlgebraFamily for GMu {
    fn name(&self) -> &'static str {
        "g_mu"
    }
    fn usage(&self) -> &'static str {
        "g_mu(<rational mu>)"
    }
    fn build(&self, arg: Option<&str>) -> Result<StratifiedAlgebra> {
        Ok(make_g_mu(&parse_scalar(need_arg(self, arg)?)?))
    }
}

struct G8;
impl AlgebraFamily for G8 {
    fn name(&self) -> &'static str {
        "g8"
    }
    fn usage(&self) -> &'static str {
        "g8"
    }
    fn build(&self, arg: Option<&str>) -> Result<StratifiedAlgebra> {
        if arg.is_some() {
            return Err(Error::Parse("g8 takes no argument".into()));
        }
        Ok(make_g8())
    }
}

struct Heis;
impl AlgebraFamily for Heis {
    fn name(&self) -> &'static str {
        "heis"
    }
    fn usage(&self) -> &'static str {
        "heis(<n ≥ 1>)"
    }
    fn build(&self, arg: Option<&str>) -> Result<StratifiedAlgebra> {
        make_heisenberg(parse_usize(need_arg(self, arg)?)?)
    }
}

struct HeisTimesR;
impl AlgebraFamily for HeisTimesR {
    fn name(&self) -> &'static str {
        "heisxR"
    }
    fn usage(&self) -> &'static str {
        "heisxR(<n ≥ 1>)"
    }
    fn build(&self, arg: Option<&str>) -> Result<StratifiedAlgebra> {
        make_heis_times_r(parse_usize(need_arg(self, arg)?)?)
    }
}

struct Abelian;
impl AlgebraFamily for Abelian {
    fn name(&self) -> &'static str {
        "abelian"
    }
    fn usage(&self) -> &'static str {
        "abelian(<n ≥ 1>)"
    }
    fn build(&self, arg: Option<&str>) -> Result<StratifiedAlgebra> {
        let n = parse_usize(need_arg(self, arg)?)?;
        if n == 0 {
            return Err(Error::Invalid("abelian(0) has no strata".into()));
        }
        StratifiedAlgebra::abelian(n)
    }
}

pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn AlgebraFamily>>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut r = FamilyRegistry {
            families: BTreeMap::new(),
        };
        r.register(Box::new(GMu));
        r.register(Box::new(G8));
        r.register(Box::new(Heis));
        r.register(Box::new(HeisTimesR));
        r.register(Box::new(Abelian));
        r
    }
}

impl FamilyRegistry {
    pub fn register(&mut self, family: Box<dyn AlgebraFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn get(&self, name: &str) -> Option<&dyn AlgebraFamily> {
        self.families.get(name).map(|b| b.as_ref())
    }

    /// Resolves `name` or `name(arg)`.
    pub fn resolve(&self, text: &str) -> Result<StratifiedAlgebra> {
        let text = text.trim();
        let (name, arg) = match text.find('(') {
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in {text:?}")))?;
                (&text[..open], Some(inner))
            }
            None => (text, None),
        };
        let family = self
            .get(name)
            .ok_or_else(|| Error::UnknownAlgebra(name.to_string()))?;
        family.build(arg)
    }
}

/// Resolves a family name, an inline JSON spec, or a path to a JSON spec.
pub fn load_algebra(text: &str) -> Result<StratifiedAlgebra> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let spec: AlgebraSpec = serde_json::from_str(trimmed)?;
        return StratifiedAlgebra::from_spec(&spec);
    }
    let path = std::path::Path::new(trimmed);
    if trimmed.ends_with(".json") || path.is_file() {
        let spec: AlgebraSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        return StratifiedAlgebra::from_spec(&spec);
    }
    FamilyRegistry::default().resolve(trimmed)
}

/// Resolves `S`, `sphere(<algebra>)`, or a surface spec given inline or as a path.
pub fn load_surface(text: &str) -> Result<LevelSurface> {
    let trimmed = text.trim();
    if trimmed == "S" {
        return Ok(surface_s());
    }
    if let Some(inner) = trimmed
        .strip_prefix("sphere(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let g = CarnotGroup::new(Arc::new(load_algebra(inner)?))?;
        return Ok(every_tangent_sphere(Arc::new(g)));
    }
    let json = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(trimmed)?
    };
    let spec: SurfaceSpec = serde_json::from_str(&json)?;
    let alg = algebra_from_json(&spec.algebra)?;
    let n = alg.dim();
    let g = CarnotGroup::new(Arc::new(alg))?;
    LevelSurface::new(Arc::new(g), MultiPoly::from_terms(n, &spec.f)?)
}

/// Algebra named in a JSON value: either a string or an inline spec.
pub fn algebra_from_json(v: &serde_json::Value) -> Result<StratifiedAlgebra> {
    match v {
        serde_json::Value::String(s) => load_algebra(s),
        other => StratifiedAlgebra::from_spec(&serde_json::from_value(other.clone())?),
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ClassInvariantReport {
    #[serde(with = "serde_scalar")]
    pub mu: Scalar,
    pub defined: bool,
    #[serde(with = "serde_scalar::option")]
    pub value: Option<Scalar>,
}

/// I(μ) = (1 − μ + μ²)³ / (μ²(μ − 1)²), undefined at μ ∈ {0, 1}.
pub fn invariant_i(mu: &Scalar) -> ClassInvariantReport {
    let one = Scalar::one();
    if mu.is_zero() || *mu == one {
        return ClassInvariantReport {
            mu: mu.clone(),
            defined: false,
            value: None,
        };
    }
    let num = num_traits::pow(&one - mu + mu * mu, 3);
    let m1 = mu - &one;
    let den = mu * mu * &m1 * &m1;
    ClassInvariantReport {
        mu: mu.clone(),
        defined: true,
        value: Some(num / den),
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Equal,
    Distinct,
    Indeterminate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Equal => "equal",
            Classification::Distinct => "distinct",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

/// Compares the 147E invariants; never decides outside μ ∉ {0, 1}.
pub fn classify_147e(mu1: &Scalar, mu2: &Scalar) -> Classification {
    match (invariant_i(mu1).value, invariant_i(mu2).value) {
        (Some(a), Some(b)) if a == b => Classification::Equal,
        (Some(_), Some(_)) => Classification::Distinct,
        _ => Classification::Indeterminate,
    }
}

/// Basis map 𝔤_λ → 𝔤 (8 × 7): X1↦X1, X2↦X2+λX0, X3↦X3, X4↦(1−λ)X4, X5..X7 fixed.
pub fn lambda_embedding(lambda: &Scalar) -> Vec<Vec<Scalar>> {
    let mut m = vec![vec![Scalar::zero(); 7]; 8];
    for c in 0..7 {
        m[c + 1][c] = Scalar::one();
    }
    m[0][1] = lambda.clone();
    m[4][3] = Scalar::one() - lambda;
    m
}

/// Closure of {X1, X2 + λX0, X3} in 𝔤 and the explicit isomorphism with 𝔤_λ.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaFamilyReport {
    #[serde(with = "serde_scalar")]
    pub lambda: Scalar,
    pub closure_dim: usize,
    pub graded: bool,
    pub homogeneous_dimension: Option<usize>,
    pub homomorphism: HomomorphismReport,
    /// Embedding is injective with image equal to the closure.
    pub isomorphism_verified: bool,
    /// Nonzero brackets of the images Y1..Y7, written in that basis.
    pub bracket_table: Vec<BracketEntry>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub result: Vec<(String, String)>,
}

pub fn lambda_family(lambda: &Scalar) -> Result<LambdaFamilyReport> {
    let g = Arc::new(make_g8());
    let mut y2 = g.basis_vector(2);
    y2[0] = lambda.clone();
    let closure = Subalgebra::closure(g.clone(), &[g.basis_vector(1), y2, g.basis_vector(3)])?;
    let src = make_g_mu(lambda);
    let map = lambda_embedding(lambda);
    let homomorphism = check_carnot_homomorphism(&src, &g, &map)?;
    let images: Vec<Vec<Scalar>> = (0..7)
        .map(|c| map.iter().map(|row| row[c].clone()).collect())
        .collect();
    let image = Subalgebra::span(g.clone(), &images)?;
    let isomorphism_verified =
        homomorphism.is_homomorphism && image.dim() == 7 && image.same_subspace(&closure);

    let mut bracket_table = Vec::new();
    if image.dim() == 7 {
        let names: Vec<String> = (1..=7).map(|i| format!("Y{i}")).collect();
        for a in 0..7 {
            for b in a + 1..7 {
                let br = g.bracket_with(&images[a], &images[b]);
                if br.iter().all(Zero::is_zero) {
                    continue;
                }
                let coords = coordinates_in(&images, &br)
                    .ok_or_else(|| Error::Invalid("bracket leaves the image".into()))?;
                let result = coords
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (names[k].clone(), crate::symbolic::format_scalar(c)))
                    .collect();
                bracket_table.push(BracketEntry {
                    left: names[a].clone(),
                    right: names[b].clone(),
                    result,
                });
            }
        }
    }

    Ok(LambdaFamilyReport {
        lambda: lambda.clone(),
        closure_dim: closure.dim(),
        graded: closure.is_graded(),
        homogeneous_dimension: closure.homogeneous_dimension().ok(),
        homomorphism,
        isomorphism_verified,
        bracket_table,
    })
}

/// The surface x₂³/3 + x₀ = 0 in the group of [`make_g8`].
pub fn surface_s() -> LevelSurface {
    let g = Arc::new(CarnotGroup::new(Arc::new(make_g8())).expect("step 3"));
    let f = &MultiPoly::var(8, 2).pow(3).scale(&rat(1, 3)) + &MultiPoly::var(8, 0);
    LevelSurface::new(g, f).expect("nonzero f")
}

/// The point of S with the given x₁, x₂, x₃, x₄..x₇ (x₀ solved).
pub fn surface_s_point(rest: &[Scalar; 7]) -> Vec<Scalar> {
    let x2 = &rest[1];
    let mut p = vec![-(x2 * x2 * x2) / int(3)];
    p.extend(rest.iter().cloned());
    p
}

/// Tangent frame {X1, X2 − x₂²X0, X3} of S.
pub fn surface_s_frame(s: &LevelSurface) -> Vec<PolyVectorField> {
    let x = s.group().left_invariant_fields();
    let x2sq = MultiPoly::var(8, 2).pow(2);
    vec![x[1].clone(), x[2].sub(&x[0].mul_poly(&x2sq)), x[3].clone()]
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentClassReport {
    pub class: ClassInvariantReport,
    pub tangent: TangentGroupReport,
    /// The embedding 𝔤_μ → 𝔤 is a homomorphism whose image is the tangent algebra.
    pub isomorphism_verified: bool,
}

/// Tangent class of S at p: μ = −x₂(p)², cross-checked through the tangent group.
pub fn tangent_class_of_s(p: &[Scalar]) -> Result<TangentClassReport> {
    let s = surface_s();
    let v = s.value(p)?;
    if !v.is_zero() {
        return Err(Error::NotOnSurface(crate::symbolic::format_scalar(&v)));
    }
    let mut tangent = s.tangent_group(p)?;
    let mu = -(&p[2] * &p[2]);
    let class = invariant_i(&mu);
    tangent.class_parameter = Some(mu.clone());
    tangent.invariant = class.value.clone();

    let g = s.group().algebra().clone();
    let map = lambda_embedding(&mu);
    let hom = check_carnot_homomorphism(&make_g_mu(&mu), &g, &map)?;
    let images: Vec<Vec<Scalar>> = (0..7)
        .map(|c| map.iter().map(|row| row[c].clone()).collect())
        .collect();
    let image = Subalgebra::span(g, &images)?;
    let isomorphism_verified =
        hom.is_homomorphism && image.dim() == 7 && image.same_subspace(&tangent.subalgebra);
    Ok(TangentClassReport {
        class,
        tangent,
        isomorphism_verified,
    })
}

/// Splitting of the kernel of a covector on V₁ of 𝔥ⁿ as 𝔥ⁿ⁻¹ × ℝ.
#[derive(Clone, Debug, Serialize)]
pub struct HyperplaneDecomposition {
    pub n: usize,
    #[serde(with = "serde_scalar::vec")]
    pub covector: Vec<Scalar>,
    /// Spans the radical of the symplectic form on the kernel.
    #[serde(with = "serde_scalar::vec")]
    pub central: Vec<Scalar>,
    /// (e_i, f_i) with [e_i, f_j] = δ_ij Y and all other brackets zero.
    pub symplectic_pairs: Vec<(SerVec, SerVec)>,
    /// Columns: images of X1..X_{2n−2}, T, Y of heisxR(n−1).
    #[serde(with = "serde_scalar::matrix")]
    pub map: Vec<Vec<Scalar>>,
    pub homomorphism: HomomorphismReport,
    pub injective: bool,
    pub image_is_kernel: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(transparent)]
pub struct SerVec(#[serde(with = "serde_scalar::vec")] pub Vec<Scalar>);

impl HyperplaneDecomposition {
    pub fn verified(&self) -> bool {
        self.homomorphism.is_homomorphism && self.injective && self.image_is_kernel
    }
}

pub fn vertical_hyperplane_decomposition(
    n: usize,
    covector: &[Scalar],
) -> Result<HyperplaneDecomposition> {
    let h = Arc::new(make_heisenberg(n)?);
    if covector.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: covector.len(),
        });
    }
    if covector.iter().all(Zero::is_zero) {
        return Err(Error::Invalid("zero covector".into()));
    }
    if n == 1 {
        return Err(Error::Unsupported(
            "in heis(1) the kernel is abelian ℝ×ℝ; no Heisenberg factor".into(),
        ));
    }
    let omega = |u: &[Scalar], v: &[Scalar]| -> Scalar {
        (0..n).fold(Scalar::zero(), |acc, j| {
            acc + &u[j] * &v[j + n] - &u[j + n] * &v[j]
        })
    };
    let w = solve_kernel(&[covector.to_vec()], 2 * n);
    let gram: Vec<Vec<Scalar>> = w
        .iter()
        .map(|a| w.iter().map(|b| omega(a, b)).collect())
        .collect();
    let radical = solve_kernel(&gram, w.len());
    let weights = radical
        .first()
        .ok_or_else(|| Error::Numerical("empty radical".into()))?;
    let central: Vec<Scalar> = (0..2 * n)
        .map(|c| {
            weights
                .iter()
                .zip(&w)
                .fold(Scalar::zero(), |acc, (k, b)| acc + k * &b[c])
        })
        .collect();
    let drop = weights
        .iter()
        .position(|k| !k.is_zero())
        .expect("nonzero radical vector");

    let mut rest: Vec<Vec<Scalar>> = w
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != drop)
        .map(|(_, v)| v.clone())
        .collect();
    let mut pairs = Vec::new();
    while let Some(e) = rest.first().cloned() {
        rest.remove(0);
        let idx = rest
            .iter()
            .position(|u| !omega(&e, u).is_zero())
            .ok_or_else(|| Error::Numerical("degenerate symplectic complement".into()))?;
        let f_raw = rest.remove(idx);
        let s = omega(&e, &f_raw);
        let f: Vec<Scalar> = f_raw.iter().map(|x| x / &s).collect();
        for u in rest.iter_mut() {
            let (uf, ue) = (omega(u, &f), omega(u, &e));
            for c in 0..2 * n {
                u[c] = &u[c] - &uf * &e[c] + &ue * &f[c];
            }
        }
        pairs.push((e, f));
    }

    // Columns of the map heisxR(n−1) → heis(n), padded with the Y coordinate.
    let pad = |v: &[Scalar]| {
        let mut out = v.to_vec();
        out.push(Scalar::zero());
        out
    };
    let k = n - 1;
    let mut columns = vec![Vec::new(); 2 * k + 2];
    for (i, (e, f)) in pairs.iter().enumerate() {
        columns[i] = pad(e);
        columns[i + k] = pad(f);
    }
    columns[2 * k] = pad(&central);
    columns[2 * k + 1] = h.basis_vector(2 * n);
    let map: Vec<Vec<Scalar>> = (0..=2 * n)
        .map(|r| columns.iter().map(|c| c[r].clone()).collect())
        .collect();

    let src = make_heis_times_r(k)?;
    let homomorphism = check_carnot_homomorphism(&src, &h, &map)?;
    let image = Subalgebra::span(h.clone(), &columns)?;
    let mut kernel: Vec<Vec<Scalar>> = w.iter().map(|v| pad(v)).collect();
    kernel.push(h.basis_vector(2 * n));
    let kernel = Subalgebra::span(h, &kernel)?;

    Ok(HyperplaneDecomposition {
        n,
        covector: covector.to_vec(),
        central,
        symplectic_pairs: pairs
            .into_iter()
            .map(|(e, f)| (SerVec(e), SerVec(f)))
            .collect(),
        map,
        homomorphism,
        injective: image.dim() == 2 * n,
        image_is_kernel: image.same_subspace(&kernel),
    })
}

/// The vertical sphere Σ_{i ≤ m} xᵢ² = 1.
pub fn every_tangent_sphere(group: Arc<CarnotGroup>) -> LevelSurface {
    let n = group.dim();
    let m = group.algebra().rank();
    let f = (0..m).fold(MultiPoly::constant(n, int(-1)), |acc, i| {
        &acc + &MultiPoly::var(n, i).pow(2)
    });
    LevelSurface::new(group, f).expect("nonzero f")
}

/// Sphere point whose horizontal normal is the given covector, when |a| ∈ ℚ.
pub fn sphere_point_for(group: &CarnotGroup, covector: &[Scalar]) -> Result<Vec<Scalar>> {
    let m = group.algebra().rank();
    if covector.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: covector.len(),
        });
    }
    let norm2 = covector.iter().fold(Scalar::zero(), |acc, a| acc + a * a);
    if norm2.is_zero() {
        return Err(Error::Invalid("zero covector".into()));
    }
    let norm = rational_sqrt(&norm2)
        .ok_or_else(|| Error::Unsupported("covector length is irrational".into()))?;
    let mut p: Vec<Scalar> = covector.iter().map(|a| a / &norm).collect();
    p.resize(group.dim(), Scalar::zero());
    Ok(p)
}
