//! Acceptance criteria 1–10, each checked against an oracle computed here.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use carnot_core::catalog::*;
use carnot_core::group::{bch_product, CarnotGroup, GroupPoint};
use carnot_core::hypersurface::{GridAxis, GridSpec, LevelSurface};
use carnot_core::liealg::{image_dimension_drop, StratifiedAlgebra, Subalgebra};
use carnot_core::metrics::*;
use carnot_core::symbolic::{int, rank, rat, MultiPoly, PolyVectorField, Scalar};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;

fn ensure(cond: bool, what: impl Into<String>) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn lift<T>(r: carnot_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_rational(r: &mut ChaCha8Rng) -> Scalar {
    rat(r.gen_range(-60..=60), r.gen_range(1..=15))
}

fn random_mu(r: &mut ChaCha8Rng) -> Scalar {
    loop {
        let mu = random_rational(r);
        if !mu.is_zero() && !mu.is_one() {
            return mu;
        }
    }
}

/// Dense structure constants c[i][j][k].
fn dense(alg: &StratifiedAlgebra) -> Vec<Vec<Vec<Scalar>>> {
    let n = alg.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| alg.structure_constant(i, j, k)).collect())
                .collect()
        })
        .collect()
}

/// Antisymmetry, Jacobi, grading and generation straight from the dense table.
fn dense_valid(alg: &StratifiedAlgebra) -> bool {
    let c = dense(alg);
    let n = alg.dim();
    let deg = alg.degrees();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if c[i][j][k] != -c[j][i][k].clone() {
                    return false;
                }
                if !c[i][j][k].is_zero() && deg[k] != deg[i] + deg[j] {
                    return false;
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                for e in 0..n {
                    let mut s = Scalar::zero();
                    for m in 0..n {
                        s += &c[a][b][m] * &c[m][d][e]
                            + &c[b][d][m] * &c[m][a][e]
                            + &c[d][a][m] * &c[m][b][e];
                    }
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    // V_{s+1} = [V_1, V_s]
    let strata = alg.strata();
    let mut offset = 0;
    for s in 0..strata.len() - 1 {
        let next = offset + strata[s];
        let rows: Vec<Vec<Scalar>> = (0..strata[0])
            .flat_map(|i| (offset..next).map(move |j| (i, j)))
            .map(|(i, j)| c[i][j].clone())
            .collect();
        if rank(&rows, n) != strata[s + 1] {
            return false;
        }
        offset = next;
    }
    true
}

fn criterion_1() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(101);
    let mut algebras = vec![make_g8()];
    algebras.extend((0..50).map(|_| make_g_mu(&random_rational(&mut r))));
    for n in 1..=4 {
        algebras.push(lift(make_heisenberg(n))?);
        algebras.push(lift(make_heis_times_r(n))?);
    }
    for a in &algebras {
        ensure(
            a.validate().is_valid(),
            format!("{} reported invalid", a.name()),
        )?;
        ensure(
            dense_valid(a),
            format!("{} fails the dense check", a.name()),
        )?;
    }
    // A broken table must be caught.
    let bad = lift(StratifiedAlgebra::from_labels(
        "bad",
        vec![2, 1],
        &["A", "B", "C"],
        &[("A", "B", "A", int(1))],
    ));
    ensure(
        bad.map(|b| !b.validate().is_valid()).unwrap_or(true),
        "ungraded table accepted",
    )
}

fn criterion_2() -> Outcome {
    let g8 = make_g8();
    let e = |i| g8.basis_vector(i);
    let comb = |terms: &[(usize, Scalar)]| {
        let mut v = vec![Scalar::zero(); 8];
        for (i, c) in terms {
            v[*i] += c;
        }
        v
    };
    let mut r = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..20 {
        let l = random_mu(&mut r);
        let one_minus = Scalar::one() - &l;
        let y2 = comb(&[(2, int(1)), (0, l.clone())]);
        let y4 = comb(&[(4, one_minus.clone())]);
        let (x1, x3, x5, x6, x7) = (e(1), e(3), e(5), e(6), e(7));
        let zero = vec![Scalar::zero(); 8];
        let br = |a: &Vec<Scalar>, b: &Vec<Scalar>| g8.bracket(a, b).expect("dimensions fixed");
        let scaled = |v: &Vec<Scalar>, c: &Scalar| v.iter().map(|x| x * c).collect::<Vec<_>>();
        let table = [
            (br(&x1, &y2), y4.clone()),
            (br(&x1, &x3), scaled(&x6, &int(-1))),
            (br(&y2, &x3), x5.clone()),
            (br(&x1, &y4), zero.clone()),
            (br(&x1, &x5), scaled(&x7, &int(-1))),
            (br(&x1, &x6), zero.clone()),
            (br(&y2, &y4), zero.clone()),
            (br(&y2, &x5), zero.clone()),
            (br(&y2, &x6), scaled(&x7, &l)),
            (br(&x3, &y4), scaled(&x7, &one_minus)),
            (br(&x3, &x5), zero.clone()),
            (br(&x3, &x6), zero.clone()),
        ];
        ensure(
            table.iter().all(|(a, b)| a == b),
            format!("bracket table differs at λ = {l}"),
        )?;
        let rep = lift(lambda_family(&l))?;
        ensure(
            rep.closure_dim == 7,
            format!("closure dimension {} at λ = {l}", rep.closure_dim),
        )?;
        ensure(
            rep.homogeneous_dimension == Some(12),
            format!("homogeneous dimension at λ = {l}"),
        )?;
        ensure(
            rep.isomorphism_verified,
            format!("isomorphism not verified at λ = {l}"),
        )?;
        // The closure is exactly span{X1, Y2, X3, Y4, X5, X6, X7}.
        let g = Arc::new(g8.clone());
        let expected = lift(Subalgebra::span(g.clone(), &[x1, y2, x3, y4, x5, x6, x7]))?;
        let closure = lift(Subalgebra::closure(
            g,
            &[e(1), comb(&[(2, int(1)), (0, l.clone())]), e(3)],
        ))?;
        ensure(
            closure.same_subspace(&expected),
            format!("closure differs at λ = {l}"),
        )?;
    }
    let at_one = lift(lambda_family(&int(1)))?;
    ensure(
        at_one.closure_dim == 6,
        format!("closure at λ = 1 has dimension {}", at_one.closure_dim),
    )
}

fn invariant_formula(mu: &Scalar) -> Scalar {
    let one = Scalar::one();
    let a = &one - mu + mu * mu;
    let b = mu * mu * (mu - &one) * (mu - &one);
    &a * &a * &a / b
}

fn criterion_3() -> Outcome {
    let i = |m: Scalar| invariant_i(&m).value;
    for (mu, v) in [
        (int(2), rat(27, 4)),
        (int(-1), rat(27, 4)),
        (int(-4), rat(9261, 400)),
        (rat(-1, 4), rat(9261, 400)),
    ] {
        ensure(i(mu.clone()) == Some(v.clone()), format!("I({mu}) ≠ {v}"))?;
        ensure(
            invariant_formula(&mu) == v,
            format!("formula oracle disagrees at {mu}"),
        )?;
    }
    let mut r = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..50 {
        let mu = random_mu(&mut r);
        let orbit = [
            mu.clone(),
            Scalar::one() - &mu,
            mu.recip(),
            (Scalar::one() - &mu).recip(),
            &mu / (&mu - Scalar::one()),
            (&mu - Scalar::one()) / &mu,
        ];
        let base = invariant_formula(&mu);
        for m in &orbit {
            ensure(
                i(m.clone()) == Some(base.clone()),
                format!("I not constant on the orbit of {mu}"),
            )?;
        }
    }
    ensure(
        classify_147e(&int(-1), &int(-4)) == Classification::Distinct,
        "(-1, -4) not distinct",
    )?;
    ensure(
        classify_147e(&int(2), &int(-1)) == Classification::Equal,
        "(2, -1) not equal",
    )
}

fn criterion_4() -> Outcome {
    let s = surface_s();
    let g = s.group().clone();
    let alg = g.algebra().clone();
    let fields = g.left_invariant_fields();
    // X0 f is identically 1, so no point of S is characteristic.
    let x0f = lift(fields[0].apply(s.f()))?;
    ensure(x0f == MultiPoly::one(8), format!("X0 f = {x0f}"))?;

    let mut r = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..30 {
        let rest: [Scalar; 7] = std::array::from_fn(|_| random_rational(&mut r));
        let p = surface_s_point(&rest);
        ensure(lift(s.value(&p))?.is_zero(), "sample off the surface")?;
        let t = lift(s.tangent_group(&p))?;
        let grad: Vec<Scalar> = (0..4)
            .map(|i| fields[i].apply(s.f()).expect("dims").eval(&p))
            .collect();
        let mut y2 = alg.basis_vector(2);
        y2[0] = -(&p[2] * &p[2]);
        let mut expected = vec![alg.basis_vector(1), y2, alg.basis_vector(3)];
        for v in &expected {
            let pairing: Scalar = (0..4).map(|i| &v[i] * &grad[i]).sum();
            ensure(
                pairing.is_zero(),
                "frame vector not in the kernel of the gradient",
            )?;
        }
        expected.extend((4..8).map(|i| alg.basis_vector(i)));
        let span = lift(Subalgebra::span(alg.clone(), &expected))?;
        ensure(
            span.dim() == 7 && t.subalgebra.same_subspace(&span),
            "tangent span differs",
        )?;
    }
    let class = |x2: i64| {
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
    let (c2, c3) = (lift(class(2))?, lift(class(3))?);
    ensure(
        c2.isomorphism_verified && c3.isomorphism_verified,
        "tangent class isomorphism not verified",
    )?;
    ensure(
        invariant_formula(&c2.class.mu) != invariant_formula(&c3.class.mu)
            && classify_147e(&c2.class.mu, &c3.class.mu) == Classification::Distinct,
        "classes at x2 = 2 and x2 = 3 coincide",
    )?;
    let axis = |coord| GridAxis {
        coord,
        lo: rat(-9, 4),
        hi: rat(9, 4),
        steps: 10,
    };
    let grid = GridSpec {
        axes: (1..5).map(axis).collect(),
        tolerance: Scalar::zero(),
        solve_for: Some(0),
    };
    let scan = lift(s.scan_characteristic(&grid))?;
    ensure(
        scan.grid_points == 10_000,
        format!("grid has {} points", scan.grid_points),
    )?;
    ensure(
        scan.characteristic.is_empty(),
        "characteristic points reported on S",
    )?;

    // The scanner does find the characteristic point of the plane y = 0 in heis(1).
    let h1 = Arc::new(lift(CarnotGroup::new(Arc::new(lift(make_heisenberg(1))?)))?);
    let plane = lift(LevelSurface::new(h1, MultiPoly::var(3, 2)))?;
    let axis = |coord| GridAxis {
        coord,
        lo: int(-2),
        hi: int(2),
        steps: 5,
    };
    let scan = lift(plane.scan_characteristic(&GridSpec {
        axes: vec![axis(0), axis(1)],
        tolerance: Scalar::zero(),
        solve_for: Some(2),
    }))?;
    ensure(
        scan.characteristic.len() == 1,
        "plane scan missed the origin",
    )
}

fn weighted_dim(alg: &StratifiedAlgebra) -> usize {
    alg.strata()
        .iter()
        .enumerate()
        .map(|(i, d)| (i + 1) * d)
        .sum()
}

fn criterion_5() -> Outcome {
    let g8 = Arc::new(make_g8());
    ensure(
        g8.homogeneous_dimension() == 13 && weighted_dim(&g8) == 13,
        "g8 is not 13",
    )?;
    let mut r = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..10 {
        let a = make_g_mu(&random_rational(&mut r));
        ensure(
            a.homogeneous_dimension() == 12 && weighted_dim(&a) == 12,
            "g_mu is not 12",
        )?;
    }
    let s = surface_s();
    for _ in 0..10 {
        let rest: [Scalar; 7] = std::array::from_fn(|_| random_rational(&mut r));
        let t = lift(s.tangent_group(&surface_s_point(&rest)))?;
        let degrees = t.subalgebra.strata_dims().ok_or("tangent not graded")?;
        let q: usize = degrees.iter().enumerate().map(|(i, d)| (i + 1) * d).sum();
        ensure(
            t.homogeneous_dimension == Some(12) && q == 12,
            "tangent of S is not 12",
        )?;
    }
    for n in 1..=4 {
        let h = lift(make_heisenberg(n))?;
        ensure(h.homogeneous_dimension() == 2 * n + 2, format!("heis({n})"))?;
    }
    for alg in [
        make_g8(),
        make_g_mu(&rat(3, 5)),
        lift(make_heisenberg(3))?,
        lift(make_heis_times_r(2))?,
    ] {
        let alg = Arc::new(alg);
        let q = weighted_dim(&alg);
        for i in 0..alg.rank() {
            let basis: Vec<Vec<Scalar>> = (0..alg.dim())
                .filter(|&k| k != i)
                .map(|k| alg.basis_vector(k))
                .collect();
            let sub = lift(Subalgebra::span(alg.clone(), &basis))?;
            ensure(
                sub.is_closed(),
                format!("kernel of x{i} in {} not a subalgebra", alg.name()),
            )?;
            ensure(
                lift(sub.homogeneous_dimension())? == q - 1,
                format!("kernel of x{i} in {}", alg.name()),
            )?;
        }
    }
    for (alg, keep) in [
        (Arc::new(lift(make_heisenberg(2))?), 1),
        (g8.clone(), 2),
        (Arc::new(make_g_mu(&rat(-2, 3))), 1),
    ] {
        let (quotient, map) = lift(alg.truncate(keep))?;
        let quotient = Arc::new(quotient);
        let d = lift(image_dimension_drop(&alg, &quotient, &map))?;
        ensure(!d.injective, "truncation reported injective")?;
        ensure(
            d.image < d.source && d.image == weighted_dim(&quotient),
            format!("drop {} -> {}", d.source, d.image),
        )?;
        ensure(d.image + 1 <= d.source, "drop smaller than one")?;
    }
    Ok(())
}

/// dim span{V, [V,V], [V,[V,V]], ...} at p, built by brute force.
fn growth_oracle(fields: &[PolyVectorField], p: &[Scalar], depth: usize) -> Vec<usize> {
    let n = p.len();
    let mut all: Vec<PolyVectorField> = fields.to_vec();
    let mut last = fields.to_vec();
    let mut out = vec![rank(&all.iter().map(|f| f.eval(p)).collect::<Vec<_>>(), n)];
    for _ in 1..depth {
        let next: Vec<PolyVectorField> = fields
            .iter()
            .flat_map(|a| last.iter().map(move |b| a.bracket(b).expect("dims")))
            .collect();
        all.extend(next.iter().cloned());
        last = next;
        out.push(rank(&all.iter().map(|f| f.eval(p)).collect::<Vec<_>>(), n));
    }
    out
}

fn criterion_6() -> Outcome {
    let s = surface_s();
    let g = s.group().clone();
    let x = g.left_invariant_fields();
    let x2sq = MultiPoly::var(8, 2).pow(2);
    let frame = vec![x[1].clone(), x[2].sub(&x[0].mul_poly(&x2sq)), x[3].clone()];
    let mut r = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..10 {
        let rest: [Scalar; 7] = std::array::from_fn(|_| random_rational(&mut r));
        let p = surface_s_point(&rest);
        ensure(
            growth_oracle(&frame, &p, 3) == vec![3, 6, 7],
            "oracle growth on S differs",
        )?;
        ensure(
            lift(s.growth_vector(&frame, &p, 3))? == vec![3, 6, 7],
            "growth on S differs",
        )?;
        ensure(
            lift(s.growth_vector(&surface_s_frame(&s), &p, 3))? == vec![3, 6, 7],
            "catalog frame growth differs",
        )?;
    }
    let h2 = Arc::new(lift(CarnotGroup::new(Arc::new(lift(make_heisenberg(2))?)))?);
    let mut done = 0;
    while done < 10 {
        let mut f = MultiPoly::zero(5);
        for i in 0..5 {
            f = &f + &MultiPoly::var(5, i).scale(&random_rational(&mut r));
            let j = r.gen_range(0..5);
            f = &f
                + &(&MultiPoly::var(5, i) * &MultiPoly::var(5, j)).scale(&random_rational(&mut r));
        }
        let p: Vec<Scalar> = (0..5).map(|_| random_rational(&mut r)).collect();
        let f = &f - &MultiPoly::constant(5, f.eval(&p));
        let surface = lift(LevelSurface::new(h2.clone(), f.clone()))?;
        if lift(surface.is_characteristic(&p))? {
            continue;
        }
        done += 1;
        let frame = lift(surface.y_frame(Some(&p)))?;
        let grow = growth_oracle(&frame, &p, 2);
        ensure(grow == vec![3, 4], format!("heis(2) growth {grow:?}"))?;
        // Each frame field is tangent to the level sets of f.
        for v in &frame {
            ensure(lift(v.apply(&f))?.eval(&p).is_zero(), "frame not tangent")?;
        }
        let a: Vec<MultiPoly> = (0..4)
            .map(|i| h2.left_invariant_fields()[i].apply(&f).expect("dims"))
            .collect();
        let sq = |q: &MultiPoly| q * q;
        let expected = [
            (&(&a[0] * &a[1]) + &(&a[2] * &a[3])).scale(&int(-2)),
            &(&sq(&a[0]) + &sq(&a[2])) - &(&sq(&a[1]) + &sq(&a[3])),
            (&(&a[0] * &a[3]) - &(&a[1] * &a[2])).scale(&int(2)),
        ];
        let got = lift(surface.vertical_commutators())?;
        ensure(
            got == expected,
            "vertical commutators differ from the closed forms",
        )?;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(107);
    for n in [2, 3] {
        let target = lift(make_heisenberg(n))?;
        let source = lift(make_heis_times_r(n - 1))?;
        for _ in 0..10 {
            let cov: Vec<Scalar> = loop {
                let c: Vec<Scalar> = (0..2 * n)
                    .map(|_| rat(r.gen_range(-6..=6), r.gen_range(1..=4)))
                    .collect();
                if c.iter().any(|x| !x.is_zero()) {
                    break c;
                }
            };
            let d = lift(vertical_hyperplane_decomposition(n, &cov))?;
            ensure(
                d.verified(),
                format!("decomposition not verified for {cov:?}"),
            )?;
            // Independent check of the map: brackets, image in the kernel, full rank.
            let col = |c: usize| {
                d.map
                    .iter()
                    .map(|row| row[c].clone())
                    .collect::<Vec<Scalar>>()
            };
            let cols: Vec<Vec<Scalar>> = (0..source.dim()).map(col).collect();
            for a in 0..source.dim() {
                let pairing: Scalar = (0..2 * n).map(|i| &cov[i] * &cols[a][i]).sum();
                ensure(pairing.is_zero(), "image leaves the kernel")?;
                for b in 0..source.dim() {
                    let lhs = lift(target.bracket(&cols[a], &cols[b]))?;
                    let sb = source.bracket_basis(a, b);
                    let rhs: Vec<Scalar> = (0..target.dim())
                        .map(|k| (0..source.dim()).map(|c| &sb[c] * &cols[c][k]).sum())
                        .collect();
                    ensure(lhs == rhs, "map does not preserve brackets")?;
                }
            }
            ensure(
                rank(&cols, target.dim()) == source.dim(),
                "map not injective",
            )?;
        }
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(108);
    let algebras = vec![
        Arc::new(make_g8()),
        Arc::new(make_g_mu(&rat(-7, 3))),
        Arc::new(lift(make_heisenberg(1))?),
        Arc::new(lift(make_heisenberg(3))?),
        Arc::new(lift(make_heis_times_r(2))?),
    ];
    for alg in &algebras {
        let pt = |r: &mut ChaCha8Rng| {
            GroupPoint::new(
                alg.clone(),
                (0..alg.dim()).map(|_| random_rational(r)).collect(),
            )
        };
        for _ in 0..100 {
            let (p, q, s) = (lift(pt(&mut r))?, lift(pt(&mut r))?, lift(pt(&mut r))?);
            let left = lift(bch_product(&lift(bch_product(&p, &q))?, &s))?;
            let right = lift(bch_product(&p, &lift(bch_product(&q, &s))?))?;
            ensure(
                left.coords() == right.coords(),
                format!("associativity fails in {}", alg.name()),
            )?;
        }
        let g = lift(CarnotGroup::new(alg.clone()))?;
        let x = g.left_invariant_fields();
        let origin = vec![Scalar::zero(); alg.dim()];
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let at_origin = lift(x[i].bracket(&x[j]))?.eval(&origin);
                let constants: Vec<Scalar> = (0..alg.dim())
                    .map(|k| alg.structure_constant(i, j, k))
                    .collect();
                ensure(
                    at_origin == constants,
                    format!("[X{i}, X{j}] at the origin in {}", alg.name()),
                )?;
            }
        }
    }
    for n in 1..=4 {
        let alg = Arc::new(lift(make_heisenberg(n))?);
        let half = rat(1, 2);
        for _ in 0..30 {
            let p: Vec<Scalar> = (0..alg.dim()).map(|_| random_rational(&mut r)).collect();
            let q: Vec<Scalar> = (0..alg.dim()).map(|_| random_rational(&mut r)).collect();
            // x + y + ½[x, y], the step-2 closed form
            let b = lift(alg.bracket(&p, &q))?;
            let closed: Vec<Scalar> = (0..alg.dim())
                .map(|k| &p[k] + &q[k] + &half * &b[k])
                .collect();
            let bch = lift(bch_product(
                &lift(GroupPoint::new(alg.clone(), p.clone()))?,
                &lift(GroupPoint::new(alg.clone(), q.clone()))?,
            ))?;
            ensure(
                bch.coords() == closed.as_slice(),
                format!("closed form differs in heis({n})"),
            )?;
            let g = lift(CarnotGroup::new(alg.clone()))?;
            let form = g.step2().ok_or("heis has no step-2 form")?;
            ensure(form.product(&p, &q) == closed, "Step2Form product differs")?;
        }
    }
    Ok(())
}

fn shoelace(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|k| v[k].0 * v[(k + 1) % n].1 - v[(k + 1) % n].0 * v[k].1)
        .sum::<f64>()
}

fn criterion_9() -> Outcome {
    // (a), (b)
    let cfg = LengthExperimentConfig::default();
    let c: Vec<f64> = match &cfg.phi {
        PhiSpec::Linear(c) => c
            .iter()
            .map(|s| {
                carnot_core::symbolic::to_f64(
                    &carnot_core::symbolic::parse_scalar(s).expect("rational"),
                )
            })
            .collect(),
        _ => return Err("default φ is not linear".into()),
    };
    let cnorm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let len = lift(length_comparison_experiment(&cfg))?;
    ensure(
        len.items.len() == 100 && len.excluded == 0,
        "ensemble incomplete",
    )?;
    ensure(len.max_ratio_refined.is_finite(), "unbounded lift ratio")?;
    ensure(
        len.relative_change < 0.05,
        format!("refinement change {:.3e}", len.relative_change),
    )?;
    // Linear φ: the graph is a vertical subgroup and the lift speed is √(|a|² + (c·a)²).
    let bound = (1.0 + cnorm * cnorm).sqrt();
    for it in &len.items {
        ensure(
            it.ratio_refined >= 1.0 - 1e-9 && it.ratio_refined <= bound + 1e-9,
            format!("ratio {} outside [1, {bound}]", it.ratio_refined),
        )?;
    }
    ensure(
        len.lipschitz_violations == 0 && len.empirical_lipschitz <= cnorm + 1e-9,
        "intrinsic Lipschitz sampling failed",
    )?;
    ensure(
        len.lprime_empirical <= cnorm * cfg.max_control + 1e-9,
        format!("L' {} > {}", len.lprime_empirical, cnorm * cfg.max_control),
    )?;

    // (c)
    let dist = lift(graph_distance_experiment(&GraphDistanceConfig::default()))?;
    ensure(
        dist.items.len() >= 50 && dist.excluded == 0,
        "pair ensemble incomplete",
    )?;
    ensure(
        dist.max_ratio_refined.is_finite() && dist.max_ratio_refined >= 1.0,
        "distance ratio not bounded",
    )?;
    ensure(
        dist.relative_change < 0.05,
        format!("distance refinement change {:.3e}", dist.relative_change),
    )?;
    ensure(
        dist.items.iter().all(|it| it.tau_excess <= 1e-9),
        format!("τ bound exceeded by {:.3e}", dist.max_tau_excess),
    )?;
    ensure(
        dist.max_endpoint_error < 1e-6,
        "connector misses its endpoint",
    )?;

    // (d)
    let mut r = ChaCha8Rng::seed_from_u64(109);
    let mut polygons = vec![vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]];
    polygons.push(
        (0..24)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 24.0;
                (0.3 + t.cos(), -0.2 + t.sin())
            })
            .collect(),
    );
    for _ in 0..8 {
        let k = r.gen_range(3..8);
        polygons.push(
            (0..k)
                .map(|_| (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)))
                .collect(),
        );
    }
    for (i, v) in polygons.iter().enumerate() {
        let area = shoelace(v);
        if area.abs() < 1e-2 {
            continue;
        }
        let h = lift(holonomy_check(3, 2 + i % 2, v, 1e-3))?;
        let err = ((h.integrated - area) / area).abs();
        ensure(err < 1e-6, format!("holonomy error {err:.3e}"))?;
        ensure(
            ((h.group_product - area) / area).abs() < 1e-9,
            "group product disagrees with the area",
        )?;
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_carnot-kit"))
        .arg("paper-suite")
        .output()
        .map_err(|e| e.to_string())?;
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure(
        out.status.code() == Some(0),
        format!("exit status {:?}", out.status.code()),
    )?;
    ensure(
        report["all_pass"] == serde_json::Value::Bool(true),
        "suite reported a failure",
    )?;
    ensure(
        report["checks"].as_array().map_or(0, |a| a.len()) >= 9,
        "suite ran too few checks",
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("algebra validity", criterion_1),
        ("lambda family closures", criterion_2),
        ("class invariant", criterion_3),
        ("surface S tangents", criterion_4),
        ("dimension accounting", criterion_5),
        ("growth vectors", criterion_6),
        ("hyperplane decompositions", criterion_7),
        ("group layer", criterion_8),
        ("graph experiments", criterion_9),
        ("paper-suite command", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
