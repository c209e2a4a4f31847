//! Stratified Lie algebras given by structure constants over ℚ.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{self, format_scalar, in_span, rank, rref, serde_scalar, Coeff, Scalar};

/// Vector in the algebra basis.
pub type AlgebraVector = Vec<Scalar>;

/// One nonzero structure constant `[e_i, e_j] ∋ c·e_k` as it appears in JSON.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    #[serde(with = "serde_scalar")]
    pub c: Scalar,
}

/// On-disk form of an algebra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AlgebraSpec {
    pub name: String,
    pub strata: Vec<usize>,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Debug)]
pub struct StratifiedAlgebra {
    name: String,
    strata: Vec<usize>,
    labels: Vec<String>,
    degrees: Vec<usize>,
    /// Upper-triangle constants, i < j, no zeros.
    constants: Vec<BracketSpec>,
}

impl PartialEq for StratifiedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.strata == other.strata && self.constants == other.constants
    }
}

impl StratifiedAlgebra {
    /// Builds an algebra from raw structure constants. Entries with `i > j`
    /// are flipped; repeated `(i, j, k)` triples are summed.
    ///
    /// Only structural consistency is checked here; Jacobi and the grading
    /// conditions are reported by [`StratifiedAlgebra::validate`].
    pub fn new(
        name: impl Into<String>,
        strata: Vec<usize>,
        labels: Vec<String>,
        brackets: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
    ) -> Result<Self> {
        let n: usize = strata.iter().sum();
        if strata.iter().any(|&d| d == 0) {
            return Err(Error::InvalidAlgebra("empty stratum".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidAlgebra(format!(
                "{} labels for total dimension {n}",
                labels.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidAlgebra(format!(
                "duplicate basis label {dup:?}"
            )));
        }
        let degrees = strata
            .iter()
            .enumerate()
            .flat_map(|(s, &d)| std::iter::repeat(s + 1).take(d))
            .collect();

        let mut acc: BTreeMap<(usize, usize, usize), Scalar> = BTreeMap::new();
        for (i, j, k, c) in brackets {
            for idx in [i, j, k] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, dim: n });
                }
            }
            if i == j {
                if c.is_zero() {
                    continue;
                }
                return Err(Error::InvalidAlgebra(format!("[e{i}, e{i}] must vanish")));
            }
            let (a, b, c) = if i < j { (i, j, c) } else { (j, i, -c) };
            *acc.entry((a, b, k)).or_insert_with(Scalar::zero) += c;
        }
        let constants = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((i, j, k), c)| BracketSpec { i, j, k, c })
            .collect();

        Ok(StratifiedAlgebra {
            name: name.into(),
            strata,
            labels,
            degrees,
            constants,
        })
    }

    /// Builds an algebra whose brackets are written with basis labels.
    pub fn from_labels(
        name: impl Into<String>,
        strata: Vec<usize>,
        labels: &[&str],
        brackets: &[(&str, &str, &str, Scalar)],
    ) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let find = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::InvalidAlgebra(format!("unknown label {l:?}")))
        };
        let entries = brackets
            .iter()
            .map(|(a, b, c, v)| Ok((find(a)?, find(b)?, find(c)?, v.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, strata, labels, entries)
    }

    /// The abelian algebra ℝⁿ, a single stratum.
    pub fn abelian(n: usize) -> Result<Self> {
        let labels = (1..=n).map(|i| format!("E{i}")).collect();
        Self::new(format!("abelian({n})"), vec![n], labels, std::iter::empty())
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Self> {
        Self::new(
            spec.name.clone(),
            spec.strata.clone(),
            spec.basis.clone(),
            spec.brackets.iter().map(|b| (b.i, b.j, b.k, b.c.clone())),
        )
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            name: self.name.clone(),
            strata: self.strata.clone(),
            basis: self.labels.clone(),
            brackets: self.constants.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn step(&self) -> usize {
        self.strata.len()
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    /// Dimension m of the first stratum.
    pub fn rank(&self) -> usize {
        self.strata[0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Stratum (1-based) of basis vector `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn constants(&self) -> &[BracketSpec] {
        &self.constants
    }

    /// Basis indices spanning stratum `s` (1-based).
    pub fn stratum_range(&self, s: usize) -> Range<usize> {
        let start: usize = self.strata[..s - 1].iter().sum();
        start..start + self.strata[s - 1]
    }

    /// Σ i·dim Vᵢ.
    pub fn homogeneous_dimension(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn basis_vector(&self, i: usize) -> AlgebraVector {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[i] = Scalar::one();
        v
    }

    /// Structure constant c_{ij}^k (antisymmetric completion included).
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Scalar {
        let (a, b, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        self.constants
            .iter()
            .find(|e| e.i == a && e.j == b && e.k == k)
            .map(|e| if sign > 0 { e.c.clone() } else { -e.c.clone() })
            .unwrap_or_else(Scalar::zero)
    }

    /// Bilinear bracket over any coefficient ring. Callers guarantee lengths.
    pub fn bracket_with<T: Coeff>(&self, u: &[T], v: &[T]) -> Vec<T> {
        let zero = u[0].zero_like();
        let mut out = vec![zero; self.dim()];
        for e in &self.constants {
            let w = u[e.i].clone() * v[e.j].clone() - u[e.j].clone() * v[e.i].clone();
            if w.is_zero_coeff() {
                continue;
            }
            let c = w.from_scalar_like(&e.c);
            out[e.k] = out[e.k].clone() + c * w;
        }
        out
    }

    pub fn bracket(&self, u: &[Scalar], v: &[Scalar]) -> Result<AlgebraVector> {
        for x in [u, v] {
            if x.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: x.len(),
                });
            }
        }
        Ok(self.bracket_with(u, v))
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> AlgebraVector {
        self.bracket_with(&self.basis_vector(i), &self.basis_vector(j))
    }

    /// Jacobi triples, grading and generation conditions.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim();
        let mut jacobi_failures = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (ei, ej, ek) = (
                        self.basis_vector(i),
                        self.basis_vector(j),
                        self.basis_vector(k),
                    );
                    let t1 = self.bracket_with(&ei, &self.bracket_with(&ej, &ek));
                    let t2 = self.bracket_with(&ej, &self.bracket_with(&ek, &ei));
                    let t3 = self.bracket_with(&ek, &self.bracket_with(&ei, &ej));
                    let sum: Vec<Scalar> = (0..n).map(|c| &t1[c] + &t2[c] + &t3[c]).collect();
                    if sum.iter().any(|x| !x.is_zero()) {
                        jacobi_failures.push(JacobiFailure {
                            indices: [i, j, k],
                            labels: [i, j, k].map(|x| self.labels[x].clone()),
                            value: sum,
                        });
                    }
                }
            }
        }

        let grading_violations = self
            .constants
            .iter()
            .filter(|e| self.degrees[e.k] != self.degrees[e.i] + self.degrees[e.j])
            .map(|e| GradingViolation {
                i: e.i,
                j: e.j,
                k: e.k,
                description: format!(
                    "[{}, {}] has a component along {} (degree {} ≠ {} + {})",
                    self.labels[e.i],
                    self.labels[e.j],
                    self.labels[e.k],
                    self.degrees[e.k],
                    self.degrees[e.i],
                    self.degrees[e.j]
                ),
            })
            .collect();

        let s = self.step();
        let mut generation = Vec::new();
        for layer in 1..=s {
            let brackets: Vec<AlgebraVector> = self
                .stratum_range(1)
                .flat_map(|a| self.stratum_range(layer).map(move |b| (a, b)))
                .map(|(a, b)| self.bracket_basis(a, b))
                .filter(|v| v.iter().any(|x| !x.is_zero()))
                .collect();
            let r = rank(&brackets, n);
            if layer < s {
                let target = self.stratum_range(layer + 1);
                let inside = brackets.iter().all(|v| {
                    v.iter()
                        .enumerate()
                        .all(|(c, x)| x.is_zero() || target.contains(&c))
                });
                let expected = self.strata[layer];
                generation.push(StratumCheck {
                    stratum: layer + 1,
                    expected_dim: expected,
                    generated_rank: r,
                    ok: inside && r == expected,
                });
            } else {
                generation.push(StratumCheck {
                    stratum: s + 1,
                    expected_dim: 0,
                    generated_rank: r,
                    ok: r == 0,
                });
            }
        }

        ValidationReport {
            algebra: self.name.clone(),
            jacobi_failures,
            grading_violations,
            generation,
        }
    }

    /// Quotient by the strata above `keep`, with its projection matrix.
    pub fn truncate(&self, keep: usize) -> Result<(StratifiedAlgebra, Vec<Vec<Scalar>>)> {
        if keep == 0 || keep > self.step() {
            return Err(Error::Invalid(format!(
                "cannot keep {keep} strata of a step-{} algebra",
                self.step()
            )));
        }
        let m: usize = self.strata[..keep].iter().sum();
        let entries = self
            .constants
            .iter()
            .filter(|e| e.k < m && e.i < m && e.j < m)
            .map(|e| (e.i, e.j, e.k, e.c.clone()));
        let q = StratifiedAlgebra::new(
            format!("{}/V>{keep}", self.name),
            self.strata[..keep].to_vec(),
            self.labels[..m].to_vec(),
            entries,
        )?;
        let proj = (0..m)
            .map(|r| {
                (0..self.dim())
                    .map(|c| {
                        if r == c {
                            Scalar::one()
                        } else {
                            Scalar::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok((q, proj))
    }

    /// `Some(n)` when the basis is X₁..X₂ₙ, Y with [X_j, X_{j+n}] = Y as the only brackets.
    pub fn heisenberg_rank(&self) -> Option<usize> {
        if self.strata.len() != 2 || self.strata[1] != 1 || self.strata[0] % 2 != 0 {
            return None;
        }
        let n = self.strata[0] / 2;
        let y = 2 * n;
        let standard = self.constants.len() == n
            && self
                .constants
                .iter()
                .all(|e| e.j == e.i + n && e.i < n && e.k == y && e.c.is_one());
        standard.then_some(n)
    }

    pub fn identity_map(&self) -> Vec<Vec<Scalar>> {
        (0..self.dim()).map(|i| self.basis_vector(i)).collect()
    }

    /// Diagonal map scaling stratum i by λ^i.
    pub fn dilation_map(&self, lambda: &Scalar) -> Vec<Vec<Scalar>> {
        (0..self.dim())
            .map(|i| {
                let mut row = vec![Scalar::zero(); self.dim()];
                row[i] = num_traits::pow(lambda.clone(), self.degrees[i]);
                row
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobiFailure {
    pub indices: [usize; 3],
    pub labels: [String; 3],
    #[serde(with = "serde_scalar::vec")]
    pub value: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradingViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub description: String,
}

/// Whether [V₁, V_{s-1}] spans V_s (or vanishes, past the top stratum).
#[derive(Clone, Debug, Serialize)]
pub struct StratumCheck {
    pub stratum: usize,
    pub expected_dim: usize,
    pub generated_rank: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub algebra: String,
    pub jacobi_failures: Vec<JacobiFailure>,
    pub grading_violations: Vec<GradingViolation>,
    pub generation: Vec<StratumCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.jacobi_failures.is_empty()
            && self.grading_violations.is_empty()
            && self.generation.iter().all(|g| g.ok)
    }

    /// Problems only; empty for a valid Carnot algebra.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .jacobi_failures
            .iter()
            .map(|f| {
                let v: Vec<String> = f.value.iter().map(format_scalar).collect();
                format!(
                    "Jacobi fails on ({}, {}, {}): [{}]",
                    f.labels[0],
                    f.labels[1],
                    f.labels[2],
                    v.join(", ")
                )
            })
            .collect();
        out.extend(
            self.grading_violations
                .iter()
                .map(|g| g.description.clone()),
        );
        out.extend(self.generation.iter().filter(|g| !g.ok).map(|g| {
            format!(
                "stratum {}: brackets with V1 have rank {} (expected {})",
                g.stratum, g.generated_rank, g.expected_dim
            )
        }));
        out
    }
}

/// Linear subspace of an algebra, stored as a reduced echelon basis.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    ambient: Arc<StratifiedAlgebra>,
    basis: Vec<AlgebraVector>,
    degrees: Option<Vec<usize>>,
}

impl Subalgebra {
    /// Span of `vectors`; closure under brackets is not enforced.
    pub fn span(ambient: Arc<StratifiedAlgebra>, vectors: &[AlgebraVector]) -> Result<Self> {
        let n = ambient.dim();
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let (basis, _) = rref(vectors, n);
        let mut sub = Subalgebra {
            ambient,
            basis,
            degrees: None,
        };
        sub.detect_grading();
        Ok(sub)
    }

    /// Smallest bracket-closed subspace containing `generators`.
    pub fn closure(ambient: Arc<StratifiedAlgebra>, generators: &[AlgebraVector]) -> Result<Self> {
        let n = ambient.dim();
        let mut sub = Subalgebra::span(ambient.clone(), generators)?;
        loop {
            let mut fresh = Vec::new();
            for a in 0..sub.basis.len() {
                for b in a + 1..sub.basis.len() {
                    let v = ambient.bracket_with(&sub.basis[a], &sub.basis[b]);
                    if v.iter().all(Zero::is_zero) {
                        continue;
                    }
                    let mut trial = sub.basis.clone();
                    trial.extend(fresh.iter().cloned());
                    if !in_span(&trial, &v) {
                        fresh.push(v);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            let mut all = sub.basis.clone();
            all.extend(fresh);
            sub.basis = rref(&all, n).0;
        }
        sub.detect_grading();
        Ok(sub)
    }

    fn detect_grading(&mut self) {
        let alg = &self.ambient;
        let mut graded_basis = Vec::new();
        let mut degrees = Vec::new();
        for s in 1..=alg.step() {
            for v in self.intersection_with_stratum(s) {
                graded_basis.push(v);
                degrees.push(s);
            }
        }
        if graded_basis.len() == self.basis.len() {
            self.basis = graded_basis;
            self.degrees = Some(degrees);
        } else {
            self.degrees = None;
        }
    }

    /// Echelon basis of span ∩ V_s.
    pub fn intersection_with_stratum(&self, s: usize) -> Vec<AlgebraVector> {
        let alg = &self.ambient;
        let range = alg.stratum_range(s);
        let k = self.basis.len();
        if k == 0 {
            return Vec::new();
        }
        // Unknown weights a_r; require Σ a_r basis_r to vanish outside V_s.
        let constraints: Vec<Vec<Scalar>> = (0..alg.dim())
            .filter(|c| !range.contains(c))
            .map(|c| self.basis.iter().map(|b| b[c].clone()).collect())
            .collect();
        let weights = symbolic::solve_kernel(&constraints, k);
        let vectors: Vec<AlgebraVector> = weights
            .iter()
            .map(|w| {
                (0..alg.dim())
                    .map(|c| {
                        w.iter()
                            .zip(&self.basis)
                            .fold(Scalar::zero(), |acc, (a, b)| acc + a * &b[c])
                    })
                    .collect()
            })
            .collect();
        rref(&vectors, alg.dim()).0
    }

    pub fn ambient(&self) -> &Arc<StratifiedAlgebra> {
        &self.ambient
    }

    pub fn basis(&self) -> &[AlgebraVector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient.dim() - self.dim()
    }

    pub fn is_graded(&self) -> bool {
        self.degrees.is_some()
    }

    pub fn degrees(&self) -> Option<&[usize]> {
        self.degrees.as_deref()
    }

    pub fn homogeneous_dimension(&self) -> Result<usize> {
        self.degrees
            .as_ref()
            .map(|d| d.iter().sum())
            .ok_or(Error::NotGraded)
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        in_span(&self.basis, v)
    }

    pub fn same_subspace(&self, other: &Subalgebra) -> bool {
        let n = self.ambient.dim();
        rref(&self.basis, n).0 == rref(&other.basis, n).0
    }

    pub fn is_closed(&self) -> bool {
        (0..self.basis.len()).all(|a| {
            (a + 1..self.basis.len())
                .all(|b| self.contains(&self.ambient.bracket_with(&self.basis[a], &self.basis[b])))
        })
    }

    /// Stratum-by-stratum dimensions (graded case) or `None`.
    pub fn strata_dims(&self) -> Option<Vec<usize>> {
        let d = self.degrees.as_ref()?;
        let mut dims = vec![0; self.ambient.step()];
        for &s in d {
            dims[s - 1] += 1;
        }
        Some(dims)
    }

    pub fn report(&self) -> SubalgebraReport {
        SubalgebraReport {
            ambient: self.ambient.name().to_string(),
            dim: self.dim(),
            graded: self.is_graded(),
            closed: self.is_closed(),
            degrees: self.degrees.clone(),
            homogeneous_dimension: self.homogeneous_dimension().ok(),
            basis: self.basis.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubalgebraReport {
    pub ambient: String,
    pub dim: usize,
    pub graded: bool,
    pub closed: bool,
    pub degrees: Option<Vec<usize>>,
    pub homogeneous_dimension: Option<usize>,
    #[serde(with = "serde_scalar::matrix")]
    pub basis: Vec<AlgebraVector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomomorphismReport {
    pub is_homomorphism: bool,
    /// Basis pairs (i, j) of the source with map[e_i, e_j] ≠ [map e_i, map e_j].
    pub bracket_violations: Vec<(usize, usize)>,
    /// Source basis vectors whose image leaves the matching stratum.
    pub grading_violations: Vec<usize>,
}

/// Checks that `map` (dst.dim rows × src.dim columns) preserves brackets
/// and sends each stratum of `src` into the same stratum of `dst`.
pub fn check_carnot_homomorphism(
    src: &StratifiedAlgebra,
    dst: &StratifiedAlgebra,
    map: &[Vec<Scalar>],
) -> Result<HomomorphismReport> {
    if map.len() != dst.dim() {
        return Err(Error::DimensionMismatch {
            expected: dst.dim(),
            found: map.len(),
        });
    }
    if let Some(row) = map.iter().find(|r| r.len() != src.dim()) {
        return Err(Error::DimensionMismatch {
            expected: src.dim(),
            found: row.len(),
        });
    }
    let image = |v: &[Scalar]| symbolic::mat_vec(map, v);
    let columns: Vec<AlgebraVector> = (0..src.dim())
        .map(|i| image(&src.basis_vector(i)))
        .collect();

    let grading_violations = (0..src.dim())
        .filter(|&i| {
            let d = src.degree(i);
            columns[i]
                .iter()
                .enumerate()
                .any(|(c, x)| !x.is_zero() && (d > dst.step() || dst.degree(c) != d))
        })
        .collect();

    let mut bracket_violations = Vec::new();
    for i in 0..src.dim() {
        for j in i + 1..src.dim() {
            let lhs = image(&src.bracket_basis(i, j));
            let rhs = dst.bracket_with(&columns[i], &columns[j]);
            if lhs != rhs {
                bracket_violations.push((i, j));
            }
        }
    }
    let ok = bracket_violations.is_empty() && Vec::<usize>::is_empty(&grading_violations);
    Ok(HomomorphismReport {
        is_homomorphism: ok,
        bracket_violations,
        grading_violations,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DimensionDrop {
    pub source: usize,
    pub image: usize,
    pub injective: bool,
}

/// Homogeneous dimensions of the source and of the (graded) image.
pub fn image_dimension_drop(
    src: &StratifiedAlgebra,
    dst: &Arc<StratifiedAlgebra>,
    map: &[Vec<Scalar>],
) -> Result<DimensionDrop> {
    let report = check_carnot_homomorphism(src, dst, map)?;
    if !report.is_homomorphism {
        return Err(Error::NotHomomorphism(format!(
            "bracket violations {:?}, grading violations {:?}",
            report.bracket_violations, report.grading_violations
        )));
    }
    let columns: Vec<AlgebraVector> = (0..src.dim())
        .map(|i| symbolic::mat_vec(map, &src.basis_vector(i)))
        .collect();
    let image = Subalgebra::span(dst.clone(), &columns)?;
    Ok(DimensionDrop {
        source: src.homogeneous_dimension(),
        image: image.homogeneous_dimension()?,
        injective: image.dim() == src.dim(),
    })
}
