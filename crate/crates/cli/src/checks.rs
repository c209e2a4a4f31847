//! Registry of reproducible checks behind `paper-suite`.

use std::sync::Arc;

use carnot_core::catalog::*;
use carnot_core::group::{bch_product, CarnotGroup, GroupPoint, Step2Form};
use carnot_core::liealg::{image_dimension_drop, StratifiedAlgebra, Subalgebra};
use carnot_core::metrics::*;
use carnot_core::symbolic::{int, rat, MultiPoly, Scalar};
use carnot_core::Result;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub detail: Value,
}

impl CheckOutcome {
    fn from_parts(parts: Vec<(&str, bool)>, extra: Value) -> Self {
        let failed: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0).collect();
        CheckOutcome {
            pass: failed.is_empty(),
            detail: json!({ "failed": failed, "data": extra }),
        }
    }
}

pub trait Check: Send + Sync {
    fn id(&self) -> &'static str;
    fn title(&self) -> &'static str;
    fn run(&self) -> Result<CheckOutcome>;
}

pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = CheckRegistry { checks: Vec::new() };
        r.register(Box::new(AlgebraValidity));
        r.register(Box::new(LambdaFamily));
        r.register(Box::new(Invariant147E));
        r.register(Box::new(SurfaceS));
        r.register(Box::new(Dimensions));
        r.register(Box::new(Growth));
        r.register(Box::new(HyperplaneKernels));
        r.register(Box::new(GroupLayer));
        r.register(Box::new(GraphExperiments));
        r.register(Box::new(WorkedExamples));
        r
    }
}

impl CheckRegistry {
    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.push(check);
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Check> {
        self.checks.iter().map(|c| c.as_ref())
    }

    pub fn get(&self, id: &str) -> Option<&dyn Check> {
        self.iter().find(|c| c.id() == id)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Scalar {
    rat(rng.gen_range(-40..=40), rng.gen_range(1..=12))
}

fn random_mu(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let mu = random_rational(rng);
        if !mu.is_zero() && !mu.is_one() {
            return mu;
        }
    }
}

struct AlgebraValidity;

impl Check for AlgebraValidity {
    fn id(&self) -> &'static str {
        "algebra-validity"
    }
    fn title(&self) -> &'static str {
        "Jacobi, grading and generation for every catalog algebra"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let mut r = rng(1);
        let mut algebras = vec![make_g8()];
        algebras.extend((0..50).map(|_| make_g_mu(&random_rational(&mut r))));
        for n in 1..=4 {
            algebras.push(make_heisenberg(n)?);
            algebras.push(make_heis_times_r(n)?);
        }
        let invalid: Vec<String> = algebras
            .iter()
            .filter(|a| !a.validate().is_valid())
            .map(|a| a.name().to_string())
            .collect();
        Ok(CheckOutcome::from_parts(
            vec![("all valid", invalid.is_empty())],
            json!({ "checked": algebras.len(), "invalid": invalid }),
        ))
    }
}

struct LambdaFamily;

impl Check for LambdaFamily {
    fn id(&self) -> &'static str {
        "lambda-family"
    }
    fn title(&self) -> &'static str {
        "closures of {X1, X2 + λX0, X3} are copies of g_λ; λ = 1 drops to dimension 6"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let mut r = rng(2);
        let mut bad = Vec::new();
        for _ in 0..20 {
            let lambda = random_mu(&mut r);
            let rep = lambda_family(&lambda)?;
            let target = make_g_mu(&lambda);
            let table_ok = table_matches(&rep, &target);
            if !(rep.closure_dim == 7
                && rep.homogeneous_dimension == Some(12)
                && rep.isomorphism_verified
                && table_ok)
            {
                bad.push(lambda.to_string());
            }
        }
        let one = lambda_family(&int(1))?;
        Ok(CheckOutcome::from_parts(
            vec![
                ("random λ", bad.is_empty()),
                ("λ = 1 closure", one.closure_dim == 6),
            ],
            json!({ "failing_lambdas": bad, "closure_dim_at_1": one.closure_dim }),
        ))
    }
}

/// Bracket table of the image basis Y1..Y7 equals the structure constants of `target`.
fn table_matches(rep: &LambdaFamilyReport, target: &StratifiedAlgebra) -> bool {
    let idx = |s: &str| s[1..].parse::<usize>().ok().map(|i| i - 1);
    let mut seen = 0;
    for e in &rep.bracket_table {
        let (Some(a), Some(b)) = (idx(&e.left), idx(&e.right)) else {
            return false;
        };
        for k in 0..7 {
            let got = e
                .result
                .iter()
                .find(|(name, _)| idx(name) == Some(k))
                .and_then(|(_, c)| carnot_core::symbolic::parse_scalar(c).ok())
                .unwrap_or_else(Scalar::zero);
            if got != target.structure_constant(a, b, k) {
                return false;
            }
        }
        seen += 1;
    }
    seen == target.constants().iter().filter(|c| !c.c.is_zero()).count()
}

struct Invariant147E;

impl Check for Invariant147E {
    fn id(&self) -> &'static str {
        "invariant-147e"
    }
    fn title(&self) -> &'static str {
        "class invariant values, symmetries and classification"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let i = |m: Scalar| invariant_i(&m).value;
        let v27_4 = Some(rat(27, 4));
        let v9261 = Some(rat(9261, 400));
        let mut r = rng(3);
        let mut asym = Vec::new();
        for _ in 0..50 {
            let mu = loop {
                let m = random_mu(&mut r);
                if m != int(-1) {
                    break m;
                }
            };
            let base = i(mu.clone());
            if base.is_none() || i(Scalar::one() - &mu) != base || i(mu.recip()) != base {
                asym.push(mu.to_string());
            }
        }
        Ok(CheckOutcome::from_parts(
            vec![
                (
                    "I(2) = I(-1) = 27/4",
                    i(int(2)) == v27_4 && i(int(-1)) == v27_4,
                ),
                (
                    "I(-4) = I(-1/4) = 9261/400",
                    i(int(-4)) == v9261 && i(rat(-1, 4)) == v9261,
                ),
                ("symmetries", asym.is_empty()),
                (
                    "(-1, -4) distinct",
                    classify_147e(&int(-1), &int(-4)) == Classification::Distinct,
                ),
            ],
            json!({ "asymmetric": asym }),
        ))
    }
}

struct SurfaceS;

impl Check for SurfaceS {
    fn id(&self) -> &'static str {
        "surface-s"
    }
    fn title(&self) -> &'static str {
        "tangent groups of x2³/3 + x0 = 0, distinct classes, no characteristic points"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let s = surface_s();
        let g = s.group().algebra().clone();
        let mut r = rng(4);
        let mut mismatches = 0;
        for _ in 0..30 {
            let rest: [Scalar; 7] = std::array::from_fn(|_| random_rational(&mut r));
            let p = surface_s_point(&rest);
            let t = s.tangent_group(&p)?;
            let x2sq = &p[2] * &p[2];
            let mut y2 = g.basis_vector(2);
            y2[0] = -x2sq;
            let mut expected = vec![g.basis_vector(1), y2, g.basis_vector(3)];
            expected.extend((4..8).map(|i| g.basis_vector(i)));
            if !t
                .subalgebra
                .same_subspace(&Subalgebra::span(g.clone(), &expected)?)
            {
                mismatches += 1;
            }
        }
        let at = |x2: i64| {
            tangent_class_of_s(&surface_s_point(&[
                int(0),
                int(x2),
                int(0),
                int(0),
                int(0),
                int(0),
                int(0),
            ]))
        };
        let (c2, c3) = (at(2)?, at(3)?);
        let distinct = classify_147e(&c2.class.mu, &c3.class.mu) == Classification::Distinct;
        let axis = |coord| carnot_core::hypersurface::GridAxis {
            coord,
            lo: int(-2),
            hi: int(2),
            steps: 10,
        };
        let grid = carnot_core::hypersurface::GridSpec {
            axes: vec![axis(1), axis(2), axis(3), axis(4)],
            tolerance: Scalar::zero(),
            solve_for: Some(0),
        };
        let scan = s.scan_characteristic(&grid)?;
        Ok(CheckOutcome::from_parts(
            vec![
                ("tangent spans", mismatches == 0),
                ("x2 = 2 vs 3 distinct", distinct),
                ("grid size", scan.grid_points == 10_000),
                ("no characteristic points", scan.characteristic.is_empty()),
            ],
            json!({ "mismatches": mismatches, "grid_points": scan.grid_points, "characteristic": scan.characteristic.len() }),
        ))
    }
}

struct Dimensions;

impl Check for Dimensions {
    fn id(&self) -> &'static str {
        "dimensions"
    }
    fn title(&self) -> &'static str {
        "homogeneous dimensions and drops under non-injective quotients"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let mut r = rng(5);
        let g8 = Arc::new(make_g8());
        let gmu_ok =
            (0..10).all(|_| make_g_mu(&random_rational(&mut r)).homogeneous_dimension() == 12);
        let s = surface_s();
        let mut tangent_ok = true;
        for _ in 0..10 {
            let rest: [Scalar; 7] = std::array::from_fn(|_| random_rational(&mut r));
            tangent_ok &= s
                .tangent_group(&surface_s_point(&rest))?
                .homogeneous_dimension
                == Some(12);
        }
        let heis_ok = (1..=4).all(|n| {
            make_heisenberg(n)
                .map(|h| h.homogeneous_dimension() == 2 * n + 2)
                .unwrap_or(false)
        });

        let mut kernels_ok = true;
        for alg in [
            make_g8(),
            make_g_mu(&rat(3, 5)),
            make_heisenberg(2)?,
            make_heis_times_r(2)?,
        ] {
            let alg = Arc::new(alg);
            for i in 0..alg.rank() {
                let basis: Vec<Vec<Scalar>> = (0..alg.dim())
                    .filter(|&k| k != i)
                    .map(|k| alg.basis_vector(k))
                    .collect();
                let sub = Subalgebra::span(alg.clone(), &basis)?;
                kernels_ok &= sub.is_closed()
                    && sub.homogeneous_dimension().ok() == Some(alg.homogeneous_dimension() - 1);
            }
        }

        let mut drops = Vec::new();
        let mut drops_ok = true;
        for (alg, keep) in [
            (Arc::new(make_heisenberg(1)?), 1),
            (g8.clone(), 2),
            (Arc::new(make_g_mu(&rat(-2, 3))), 1),
        ] {
            let (q, map) = alg.truncate(keep)?;
            let d = image_dimension_drop(&alg, &Arc::new(q), &map)?;
            drops_ok &= !d.injective && d.image < d.source;
            drops.push(json!({ "source": d.source, "image": d.image, "injective": d.injective }));
        }
        Ok(CheckOutcome::from_parts(
            vec![
                ("g8 = 13", g8.homogeneous_dimension() == 13),
                ("g_mu = 12", gmu_ok),
                ("tangents of S = 12", tangent_ok),
                ("heis(n) = 2n + 2", heis_ok),
                ("coordinate hyperplane kernels = Q - 1", kernels_ok),
                ("quotient drops", drops_ok),
            ],
            json!({ "drops": drops }),
        ))
    }
}

struct Growth;

impl Check for Growth {
    fn id(&self) -> &'static str {
        "growth"
    }
    fn title(&self) -> &'static str {
        "growth vectors on S and on non-characteristic surfaces in heis(2)"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let mut r = rng(6);
        let s = surface_s();
        let frame = surface_s_frame(&s);
        let mut s_ok = true;
        for _ in 0..10 {
            let rest: [Scalar; 7] = std::array::from_fn(|_| random_rational(&mut r));
            s_ok &= s.growth_vector(&frame, &surface_s_point(&rest), 3)? == vec![3, 6, 7];
        }
        let g = Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(2)?))?);
        let mut h_ok = true;
        let mut identities_ok = true;
        for _ in 0..10 {
            let (surface, p) = random_heis2_surface(&g, &mut r)?;
            let frame = surface.y_frame(None)?;
            h_ok &= surface.growth_vector(&frame, &p, 2)? == vec![3, 4];
            identities_ok &= commutators_match(&surface)?;
        }
        Ok(CheckOutcome::from_parts(
            vec![
                ("S growth (3,6,7)", s_ok),
                ("heis(2) rank 4", h_ok),
                ("commutator identities", identities_ok),
            ],
            Value::Null,
        ))
    }
}

/// Random quadratic f with f(p) = 0 and ∇_H f(p) ≠ 0.
pub fn random_heis2_surface(
    g: &Arc<CarnotGroup>,
    r: &mut ChaCha8Rng,
) -> Result<(carnot_core::hypersurface::LevelSurface, Vec<Scalar>)> {
    loop {
        let mut f = MultiPoly::zero(5);
        for i in 0..5 {
            f = &f + &MultiPoly::var(5, i).scale(&random_rational(r));
            for j in i..5 {
                if r.gen_bool(0.4) {
                    f = &f
                        + &(&MultiPoly::var(5, i) * &MultiPoly::var(5, j))
                            .scale(&random_rational(r));
                }
            }
        }
        let p: Vec<Scalar> = (0..5).map(|_| random_rational(r)).collect();
        let f = &f - &MultiPoly::constant(5, f.eval(&p));
        if f.is_zero() {
            continue;
        }
        let s = carnot_core::hypersurface::LevelSurface::new(g.clone(), f)?;
        if !s.is_characteristic(&p)? {
            return Ok((s, p));
        }
    }
}

/// Vertical parts of [Y1,Y2], [Y1,Y3], [Y2,Y3] against the closed forms in X_i f.
pub fn commutators_match(s: &carnot_core::hypersurface::LevelSurface) -> Result<bool> {
    let a = s.horizontal_gradient_poly();
    let [c12, c13, c23] = s.vertical_commutators()?;
    let sq = |p: &MultiPoly| p * p;
    let e12 = (&(&a[0] * &a[1]) + &(&a[2] * &a[3])).scale(&int(-2));
    let e13 = &(&sq(&a[0]) + &sq(&a[2])) - &(&sq(&a[1]) + &sq(&a[3]));
    let e23 = (&(&a[0] * &a[3]) - &(&a[1] * &a[2])).scale(&int(2));
    Ok(c12 == e12 && c13 == e13 && c23 == e23)
}

struct HyperplaneKernels;

impl Check for HyperplaneKernels {
    fn id(&self) -> &'static str {
        "hyperplane-decomposition"
    }
    fn title(&self) -> &'static str {
        "kernels of covectors on V1 of heis(n) split as heis(n-1) x R"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let mut r = rng(7);
        let mut failures = Vec::new();
        for n in [2, 3] {
            for _ in 0..10 {
                let cov: Vec<Scalar> = loop {
                    let c: Vec<Scalar> = (0..2 * n)
                        .map(|_| rat(r.gen_range(-5..=5), r.gen_range(1..=3)))
                        .collect();
                    if c.iter().any(|x| !x.is_zero()) {
                        break c;
                    }
                };
                let d = vertical_hyperplane_decomposition(n, &cov)?;
                if !d.verified() {
                    failures.push(json!({ "n": n, "covector": cov.iter().map(|c| c.to_string()).collect::<Vec<_>>() }));
                }
            }
        }
        Ok(CheckOutcome::from_parts(
            vec![("all verified", failures.is_empty())],
            json!({ "failures": failures }),
        ))
    }
}

struct GroupLayer;

impl Check for GroupLayer {
    fn id(&self) -> &'static str {
        "group-layer"
    }
    fn title(&self) -> &'static str {
        "BCH associativity, step-2 closed form, field brackets at the identity"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let mut r = rng(8);
        let algebras: Vec<Arc<StratifiedAlgebra>> = vec![
            Arc::new(make_g8()),
            Arc::new(make_g_mu(&rat(5, 7))),
            Arc::new(make_heisenberg(1)?),
            Arc::new(make_heisenberg(2)?),
            Arc::new(make_heis_times_r(2)?),
        ];
        let mut assoc = true;
        let mut fields = true;
        for alg in &algebras {
            let pt = |r: &mut ChaCha8Rng| {
                GroupPoint::new(
                    alg.clone(),
                    (0..alg.dim()).map(|_| random_rational(r)).collect(),
                )
            };
            for _ in 0..100 {
                let (p, q, s) = (pt(&mut r)?, pt(&mut r)?, pt(&mut r)?);
                let left = bch_product(&bch_product(&p, &q)?, &s)?;
                let right = bch_product(&p, &bch_product(&q, &s)?)?;
                assoc &= left.coords() == right.coords();
            }
            let g = CarnotGroup::new(alg.clone())?;
            let x = g.left_invariant_fields();
            let origin = vec![Scalar::zero(); alg.dim()];
            for i in 0..alg.dim() {
                for j in 0..alg.dim() {
                    fields &= x[i].bracket(&x[j])?.eval(&origin) == alg.bracket_basis(i, j);
                }
            }
        }
        let mut closed = true;
        for n in 1..=3 {
            let alg = Arc::new(make_heisenberg(n)?);
            let form = Step2Form::from_algebra(&alg).expect("step 2");
            for _ in 0..30 {
                let p: Vec<Scalar> = (0..alg.dim()).map(|_| random_rational(&mut r)).collect();
                let q: Vec<Scalar> = (0..alg.dim()).map(|_| random_rational(&mut r)).collect();
                let bch = bch_product(
                    &GroupPoint::new(alg.clone(), p.clone())?,
                    &GroupPoint::new(alg.clone(), q.clone())?,
                )?;
                closed &= form.product(&p, &q) == bch.coords();
            }
        }
        Ok(CheckOutcome::from_parts(
            vec![
                ("associativity", assoc),
                ("closed form", closed),
                ("field brackets", fields),
            ],
            Value::Null,
        ))
    }
}

struct GraphExperiments;

impl Check for GraphExperiments {
    fn id(&self) -> &'static str {
        "graph-experiments"
    }
    fn title(&self) -> &'static str {
        "lift length, L' contract, graph distance, step-2 holonomy"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let len = length_comparison_experiment(&LengthExperimentConfig::default())?;
        let dist = graph_distance_experiment(&GraphDistanceConfig::default())?;
        let mut r = rng(9);
        let mut worst: f64 = 0.0;
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        worst = worst.max(holonomy_check(2, 2, &square, 1e-3)?.relative_error);
        for _ in 0..10 {
            let k = r.gen_range(3..7);
            let v: Vec<(f64, f64)> = (0..k)
                .map(|_| (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)))
                .collect();
            let h = holonomy_check(3, r.gen_range(2..=3), &v, 1e-3)?;
            if h.signed_area.abs() > 1e-3 {
                worst = worst.max(h.relative_error);
            }
        }
        Ok(CheckOutcome::from_parts(
            vec![
                (
                    "lift ratio bounded and stable",
                    len.bounded && len.stable && len.lipschitz_violations == 0,
                ),
                ("L' contract", len.lprime_ok),
                (
                    "graph distance bounded and stable",
                    dist.bounded && dist.stable,
                ),
                ("tau bound", dist.tau_ok),
                ("holonomy", worst < 1e-6),
            ],
            json!({
                "max_lift_ratio": len.max_ratio_refined,
                "lift_change": len.relative_change,
                "lprime": len.lprime_empirical,
                "lprime_bound": len.lprime_bound,
                "max_distance_ratio": dist.max_ratio_refined,
                "distance_change": dist.relative_change,
                "max_tau_excess": dist.max_tau_excess,
                "holonomy_error": worst,
            }),
        ))
    }
}

/// Small examples not covered by the other checks.
struct WorkedExamples;

impl Check for WorkedExamples {
    fn id(&self) -> &'static str {
        "worked-examples"
    }
    fn title(&self) -> &'static str {
        "bracket conventions, sphere normals, D_phi form, undefined invariants"
    }
    fn run(&self) -> Result<CheckOutcome> {
        let g8 = make_g8();
        let e = |a: &StratifiedAlgebra, i| a.basis_vector(i);
        let neg = |v: Vec<Scalar>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
        let g8_brackets = g8.bracket(&e(&g8, 1), &e(&g8, 0))? == neg(e(&g8, 4))
            && g8.bracket(&e(&g8, 0), &e(&g8, 6))? == e(&g8, 7);

        let g0 = make_g_mu(&int(0));
        let g0_table = g0
            .bracket(&e(&g0, 1), &e(&g0, 5))?
            .iter()
            .all(Zero::is_zero)
            && g0.bracket(&e(&g0, 2), &e(&g0, 3))? == e(&g0, 6);

        let h1 = make_heisenberg(1)?;
        let h2 = make_heisenberg(2)?;
        let heis = h1.bracket(&e(&h1, 0), &e(&h1, 1))? == e(&h1, 2)
            && h2.bracket(&e(&h2, 0), &e(&h2, 2))? == e(&h2, 4)
            && h2.bracket(&e(&h2, 1), &e(&h2, 3))? == e(&h2, 4)
            && h2.constants().iter().filter(|c| !c.c.is_zero()).count() == 2;

        let g2 = Arc::new(CarnotGroup::new(Arc::new(h2.clone()))?);
        let sphere = every_tangent_sphere(g2.clone());
        let p = sphere_point_for(&g2, &[int(1), int(0), int(0), int(0)])?;
        let t = sphere.tangent_group(&p)?;
        let sphere_ok = p == vec![int(1), int(0), int(0), int(0), int(0)]
            && t.horizontal_gradient.iter().skip(1).all(Zero::is_zero)
            && !t.subalgebra.contains(&e(&h2, 0));
        let pyth = sphere_point_for(&g2, &[rat(3, 5), rat(4, 5), int(0), int(0)])?;
        let sphere_ok = sphere_ok && sphere.contains(&pyth)?;

        // Vertical surface with nonzero Euclidean gradient: never characteristic.
        let vertical = carnot_core::hypersurface::LevelSurface::new(
            g2.clone(),
            &MultiPoly::var(5, 1).pow(2) + &MultiPoly::var(5, 3),
        )?;
        let mut r = rng(10);
        let mut vertical_ok = true;
        let mut distribution_ok = true;
        for _ in 0..10 {
            let mut q: Vec<Scalar> = (0..5).map(|_| random_rational(&mut r)).collect();
            q[3] = -(&q[1] * &q[1]);
            vertical_ok &= !vertical.is_characteristic(&q)?;
            let d = vertical.induced_distribution(&q)?;
            let frame = vertical.y_frame(None)?;
            let at_q: Vec<Vec<Scalar>> = frame.iter().map(|v| v.eval(&q)).collect();
            let span_frame = Subalgebra::span(g2.algebra().clone(), &at_q);
            let span_d = Subalgebra::span(g2.algebra().clone(), &d.vectors);
            distribution_ok &= match (span_frame, span_d) {
                (Ok(a), Ok(b)) => a.same_subspace(&b) && a.dim() == 3,
                _ => false,
            };
        }
        let x1_surface =
            carnot_core::hypersurface::LevelSurface::new(g2.clone(), MultiPoly::var(5, 0))?;
        let [_, c13, _] = x1_surface.vertical_commutators()?;
        let commutator_ok = c13 == MultiPoly::one(5);

        // D_j^φ equals X_j on 𝕎 except D_{n+1} = X_{n+1} + φ Y.
        let phi = &MultiPoly::var(4, 0) + &MultiPoly::var(4, 3).scale(&rat(1, 2));
        let setup = Step2GraphSetup::new(g2.clone(), phi.clone(), 1.0)?;
        let d = setup.build_d_phi();
        let restricted = |j: usize| -> Vec<MultiPoly> {
            let f = &g2.left_invariant_fields()[j];
            (1..5)
                .map(|c| {
                    f.coeff(c)
                        .set_var(0, &Scalar::zero())
                        .remove_var(0)
                        .expect("in range")
                })
                .collect()
        };
        let mut dphi_ok = true;
        for j in 1..4 {
            let mut expected = restricted(j);
            if j == 2 {
                expected[3] = &expected[3] + &phi;
            }
            dphi_ok &= d[j - 1].coeffs() == expected.as_slice();
        }

        let undefined = !invariant_i(&int(0)).defined
            && classify_147e(&int(0), &int(5)) == Classification::Indeterminate
            && !tangent_class_of_s(&surface_s_point(&[
                int(1),
                int(0),
                int(2),
                int(0),
                int(0),
                int(0),
                int(0),
            ]))?
            .class
            .defined;

        let zero_embedding = {
            let g = Arc::new(g8.clone());
            carnot_core::liealg::check_carnot_homomorphism(&g0, &g, &lambda_embedding(&int(0)))?
                .is_homomorphism
        };
        let graph_refusal = graph_distance_experiment(&GraphDistanceConfig {
            n: 1,
            ..Default::default()
        })
        .is_err();
        let heis1_decomposition = vertical_hyperplane_decomposition(1, &[int(1), int(0)]).is_err();

        Ok(CheckOutcome::from_parts(
            vec![
                ("g8 brackets", g8_brackets),
                ("g_0 table", g0_table),
                ("Heisenberg conventions", heis),
                ("sphere normals", sphere_ok),
                ("vertical surfaces non-characteristic", vertical_ok),
                ("induced distribution matches frame", distribution_ok),
                ("[Y1,Y3] for f = x1", commutator_ok),
                ("D_phi form", dphi_ok),
                ("undefined invariants", undefined),
                ("lambda = 0 embedding", zero_embedding),
                ("n = 1 refusals", graph_refusal && heis1_decomposition),
            ],
            Value::Null,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let r = CheckRegistry::default();
        let mut ids: Vec<_> = r.iter().map(|c| c.id()).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert!(r.get("growth").is_some());
    }

    #[test]
    fn worked_examples_pass() {
        let out = WorkedExamples.run().unwrap();
        assert!(out.pass, "{}", out.detail);
    }
}
