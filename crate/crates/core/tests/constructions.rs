use std::sync::Arc;

use carnot_core::catalog::*;
use carnot_core::group::CarnotGroup;
use carnot_core::hypersurface::{GridAxis, GridSpec, LevelSurface};
use carnot_core::liealg::{
    check_carnot_homomorphism, image_dimension_drop, StratifiedAlgebra, Subalgebra,
};
use carnot_core::symbolic::{int, rat, MultiPoly, Scalar};
use num_traits::Zero;

/// Dense structure-constant table, filled straight from a bracket list.
fn dense(n: usize, table: &[(usize, usize, usize, i64)]) -> Vec<Vec<Vec<i64>>> {
    let mut c = vec![vec![vec![0; n]; n]; n];
    for &(i, j, k, v) in table {
        c[i][j][k] += v;
        c[j][i][k] -= v;
    }
    c
}

fn dense_jacobi_failures(c: &[Vec<Vec<i64>>]) -> Vec<[usize; 3]> {
    let n = c.len();
    let br = |u: &[i64], v: &[i64]| -> Vec<i64> {
        (0..n)
            .map(|k| {
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| u[i] * v[j] * c[i][j][k])
                    .sum()
            })
            .collect()
    };
    let e = |i: usize| {
        let mut v = vec![0; n];
        v[i] = 1;
        v
    };
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = br(&e(i), &br(&e(j), &e(k)));
                let b = br(&e(j), &br(&e(k), &e(i)));
                let d = br(&e(k), &br(&e(i), &e(j)));
                if (0..n).any(|x| a[x] + b[x] + d[x] != 0) {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

const G8_TABLE: [(usize, usize, usize, i64); 7] = [
    (1, 2, 4, 1),
    (1, 3, 6, -1),
    (1, 0, 4, -1),
    (2, 3, 5, 1),
    (1, 5, 7, -1),
    (3, 4, 7, 1),
    (0, 6, 7, 1),
];

#[test]
fn g8_brackets_from_table() {
    let g = make_g8();
    let e = |i| g.basis_vector(i);
    let mut minus_x4 = vec![Scalar::zero(); 8];
    minus_x4[4] = int(-1);
    assert_eq!(g.bracket(&e(1), &e(0)).unwrap(), minus_x4);
    assert_eq!(g.bracket(&e(0), &e(6)).unwrap(), e(7));
    assert!(g.validate().is_valid());
    assert!(dense_jacobi_failures(&dense(8, &G8_TABLE)).is_empty());
}

#[test]
fn flipped_sign_breaks_jacobi_on_x0_x1_x3() {
    let mut table = G8_TABLE;
    table[6].3 = -1;
    let oracle = dense_jacobi_failures(&dense(8, &table));
    assert_eq!(oracle, vec![[0, 1, 3]]);

    let entries = table.iter().map(|&(i, j, k, v)| (i, j, k, int(v)));
    let labels = (0..8).map(|i| format!("X{i}")).collect();
    let bad = StratifiedAlgebra::new("g8-flipped", vec![4, 3, 1], labels, entries).unwrap();
    let report = bad.validate();
    let found: Vec<[usize; 3]> = report.jacobi_failures.iter().map(|f| f.indices).collect();
    assert_eq!(found, oracle);
}

#[test]
fn homogeneous_dimensions() {
    assert_eq!(make_g8().homogeneous_dimension(), 13);
    assert_eq!(make_g_mu(&rat(2, 7)).homogeneous_dimension(), 12);
    for n in 1..=4 {
        assert_eq!(
            make_heisenberg(n).unwrap().homogeneous_dimension(),
            2 * n + 2
        );
    }
    assert_eq!(
        StratifiedAlgebra::abelian(5)
            .unwrap()
            .homogeneous_dimension(),
        5
    );
}

#[test]
fn homomorphism_examples() {
    let g = Arc::new(make_g8());
    assert!(
        check_carnot_homomorphism(&g, &g, &g.dilation_map(&int(2)))
            .unwrap()
            .is_homomorphism
    );
    let mut swap = g.identity_map();
    swap.swap(0, 1);
    let r = check_carnot_homomorphism(&g, &g, &swap).unwrap();
    assert!(!r.is_homomorphism);
    assert!(!r.bracket_violations.is_empty());

    let zero = lambda_embedding(&int(0));
    assert!(
        check_carnot_homomorphism(&make_g_mu(&int(0)), &g, &zero)
            .unwrap()
            .is_homomorphism
    );
}

#[test]
fn quotient_drops() {
    let h1 = Arc::new(make_heisenberg(1).unwrap());
    let (q, p) = h1.truncate(1).unwrap();
    let d = image_dimension_drop(&h1, &Arc::new(q), &p).unwrap();
    assert_eq!((d.source, d.image), (4, 2));

    let g = Arc::new(make_g8());
    let d = image_dimension_drop(&g, &g, &g.identity_map()).unwrap();
    assert_eq!((d.source, d.image, d.injective), (13, 13, true));

    let (q, p) = g.truncate(2).unwrap();
    let d = image_dimension_drop(&g, &Arc::new(q), &p).unwrap();
    assert_eq!((d.source, d.image), (13, 10));
}

#[test]
fn lambda_family_tables() {
    for lambda in [int(5), int(0), rat(-3, 4), rat(7, 2)] {
        let r = lambda_family(&lambda).unwrap();
        assert_eq!(r.closure_dim, 7);
        assert_eq!(r.homogeneous_dimension, Some(12));
        assert!(r.isomorphism_verified, "λ = {lambda}");
        // Table in the image basis must be exactly that of 𝔤_λ.
        let g = make_g_mu(&lambda);
        for e in &r.bracket_table {
            let a: usize = e.left[1..].parse::<usize>().unwrap() - 1;
            let b: usize = e.right[1..].parse::<usize>().unwrap() - 1;
            for (name, c) in &e.result {
                let k: usize = name[1..].parse::<usize>().unwrap() - 1;
                assert_eq!(
                    carnot_core::symbolic::parse_scalar(c).unwrap(),
                    g.structure_constant(a, b, k)
                );
            }
        }
        assert_eq!(
            r.bracket_table.len(),
            g.constants().iter().filter(|c| !c.c.is_zero()).count()
        );
    }
}

#[test]
fn lambda_one_closure_is_six_dimensional() {
    let g = Arc::new(make_g8());
    let mut y2 = g.basis_vector(2);
    y2[0] = int(1);
    let s = Subalgebra::closure(
        g.clone(),
        &[g.basis_vector(1), y2.clone(), g.basis_vector(3)],
    )
    .unwrap();
    assert_eq!(s.dim(), 6);
    // Hand-listed span {X1, Y2, X3, X5, X6, X7}.
    let expected: Vec<Vec<Scalar>> = vec![
        g.basis_vector(1),
        y2,
        g.basis_vector(3),
        g.basis_vector(5),
        g.basis_vector(6),
        g.basis_vector(7),
    ];
    assert!(s.same_subspace(&Subalgebra::span(g, &expected).unwrap()));
}

#[test]
fn invariant_values() {
    // Direct evaluation with small integers.
    let eval = |p: i64, q: i64| {
        let mu = rat(p, q);
        let num = (q * q - p * q + p * p).pow(3);
        let den = p * p * (p - q) * (p - q) * q * q;
        assert_eq!(invariant_i(&mu).value.unwrap(), rat(num, den));
        rat(num, den)
    };
    assert_eq!(eval(2, 1), rat(27, 4));
    assert_eq!(eval(-1, 1), rat(27, 4));
    assert_eq!(eval(-4, 1), rat(9261, 400));
    assert_eq!(eval(-1, 4), rat(9261, 400));
    assert_eq!(eval(-9, 1), rat(753571, 8100));
    assert_eq!(classify_147e(&int(-1), &int(-4)), Classification::Distinct);
    assert_eq!(classify_147e(&int(-4), &rat(-1, 4)), Classification::Equal);
}

#[test]
fn surface_s_tangent_at_unit_height() {
    let s = surface_s();
    let p = surface_s_point(&[int(0), int(1), int(0), int(0), int(0), int(0), int(0)]);
    let t = s.tangent_group(&p).unwrap();
    assert_eq!(t.horizontal_gradient, vec![int(1), int(0), int(1), int(0)]);
    let g = s.group().algebra().clone();
    let mut y2 = g.basis_vector(2);
    y2[0] = int(-1);
    let mut expected = vec![g.basis_vector(1), y2, g.basis_vector(3)];
    expected.extend((4..8).map(|i| g.basis_vector(i)));
    assert!(t
        .subalgebra
        .same_subspace(&Subalgebra::span(g, &expected).unwrap()));

    let c = tangent_class_of_s(&p).unwrap();
    assert_eq!(c.class.mu, int(-1));
    assert_eq!(c.class.value, Some(rat(27, 4)));
    assert!(c.isomorphism_verified);

    let zero = tangent_class_of_s(&surface_s_point(&[
        int(0),
        int(0),
        int(3),
        int(0),
        int(0),
        int(0),
        int(0),
    ]))
    .unwrap();
    assert!(!zero.class.defined);
}

#[test]
fn top_coordinate_gradient_vanishes_at_origin() {
    let g = Arc::new(CarnotGroup::new(Arc::new(make_g8())).unwrap());
    let s = LevelSurface::new(g, MultiPoly::var(8, 7)).unwrap();
    assert!(s
        .horizontal_gradient(&vec![Scalar::zero(); 8])
        .unwrap()
        .iter()
        .all(Zero::is_zero));
}

#[test]
fn s_growth_vector() {
    let s = surface_s();
    let frame = surface_s_frame(&s);
    for x2 in [int(1), rat(-1, 2), int(3)] {
        let p = surface_s_point(&[int(1), x2, int(-2), int(0), int(1), int(0), int(5)]);
        assert_eq!(s.growth_vector(&frame, &p, 3).unwrap(), vec![3, 6, 7]);
    }
}

#[test]
fn sphere_scan_is_clean() {
    let g = Arc::new(CarnotGroup::new(Arc::new(make_heisenberg(1).unwrap())).unwrap());
    let s = every_tangent_sphere(g.clone());
    let axis = |c| GridAxis {
        coord: c,
        lo: int(-1),
        hi: int(1),
        steps: 41,
    };
    let grid = GridSpec {
        axes: vec![axis(0), axis(1), axis(2)],
        tolerance: int(0),
        solve_for: None,
    };
    let r = s.scan_characteristic(&grid).unwrap();
    assert!(r.surface_points >= 4);
    assert!(r.characteristic.is_empty());
    let p = sphere_point_for(&g, &[int(1), int(0)]).unwrap();
    let t = s.tangent_group(&p).unwrap();
    assert_eq!(t.horizontal_gradient, vec![int(2), int(0)]);
}

#[test]
fn decomposition_random_covectors() {
    for (n, cov) in [
        (2, vec![int(1), int(1), int(0), int(0)]),
        (2, vec![int(0), int(0), int(0), int(3)]),
        (3, vec![int(2), int(-1), rat(1, 2), int(0), int(4), int(1)]),
    ] {
        let d = vertical_hyperplane_decomposition(n, &cov).unwrap();
        assert!(d.verified(), "{cov:?}");
    }
}

#[test]
fn tangent_group_ignores_the_defining_function() {
    let s = surface_s();
    let g = s.group().clone();
    let f = s.f().clone();
    let n = g.dim();
    let bump = &MultiPoly::one(n) + &MultiPoly::var(n, 1).pow(2);
    let reps = [
        f.scale(&rat(-7, 3)),
        &f * &bump,
        &f + &(&f * &f).scale(&int(5)),
    ];
    for x2 in [int(0), rat(1, 2), int(-3)] {
        let p = surface_s_point(&[rat(2, 5), x2, int(1), int(0), rat(-1, 3), int(4), int(0)]);
        let base = s.tangent_group(&p).unwrap().subalgebra;
        for r in &reps {
            let alt = LevelSurface::new(g.clone(), r.clone()).unwrap();
            assert!(alt.contains(&p).unwrap());
            assert!(alt
                .tangent_group(&p)
                .unwrap()
                .subalgebra
                .same_subspace(&base));
        }
    }
}
