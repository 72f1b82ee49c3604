use std::f64::consts::PI;

use bchlab_core::geometry::registry::BUNDLE_IDS;
use bchlab_core::geometry::{bundle, chern_form_eval, BundleConnection, Surface};
use bchlab_core::grassmann::{GrassmannElement, IndexSet};
use bchlab_core::linalg::{self, c, C64, I};
use bchlab_core::loopspace::{
    bch_loop_deloop, bch_loop_deloop_ordered, bch_ode, ch_constant_loops, equivariant_residual, exterior_derivative_fd,
    loop_deloop_trace, BChResult, Order,
};
use bchlab_core::transport::spec::{random_fields, random_fourier, random_point, random_vectors};
use bchlab_core::transport::{holonomy, parallel_transport, DiscretizedLoop, Method};
use proptest::prelude::*;

fn random_loop(surface: Surface, p: usize, seed: u64, n: usize) -> DiscretizedLoop {
    DiscretizedLoop::sample(&random_fourier(surface, 3, seed), n, &random_fields(surface, p, seed)).unwrap()
}

const CONCRETE_IDS: &[&str] = &[
    "flat-r2:r=2",
    "flat-s2",
    "t2-flat",
    "t2-flux:k=1",
    "r2-su2-poly",
    "cp1-tautological",
    "cp1-dual",
    "cp1-whitney",
    "cp1-tautological-gauge",
];

/// One concrete instance of every registry entry.
fn concrete_ids() -> Vec<String> {
    assert_eq!(CONCRETE_IDS.len(), BUNDLE_IDS.len());
    CONCRETE_IDS.iter().map(|s| s.to_string()).collect()
}

#[test]
fn routes_agree_per_degree() {
    for id in concrete_ids() {
        let b = bundle(&id).unwrap();
        for seed in 0..6 {
            for p in [2, 4] {
                let l = random_loop(b.surface(), p, 100 + seed, 2048);
                let ode = bch_ode(&b, &l, 1024, Method::Rk4).unwrap();
                let ld = bch_loop_deloop(&b, &l, 1024, Method::Rk4).unwrap();
                for d in (0..=p).step_by(2) {
                    let err = ode.degree_diff(&ld, d);
                    assert!(err < 1e-7, "{id} p={p} degree {d}: {err}");
                }
            }
        }
    }
}

#[test]
fn bare_loop_deloop_trace_is_the_trivialized_solution() {
    // without the holonomy factor the product is h(1), whose degree-0 part is the rank
    let b = bundle("cp1-whitney").unwrap();
    let l = random_loop(Surface::Sphere, 2, 7, 2048);
    let bare = loop_deloop_trace(&b, &l, 1024, Method::Rk4, Order::SlevInverse).unwrap();
    assert!((bare.scalar_coeff(IndexSet::EMPTY) - c(2.0)).norm() < 1e-12);
    let alt = loop_deloop_trace(&b, &l, 1024, Method::Rk4, Order::LevpInverse).unwrap();
    assert!((&alt.degree_part(2) + &bare.degree_part(2)).max_abs() < 1e-9);
}

/// `s` with `|alt − s·ode| ≤ tol`, or `None` when neither sign fits.
fn empirical_sign(alt: C64, ode: C64, tol: f64) -> Option<i32> {
    if (alt - ode).norm() <= tol {
        Some(1)
    } else if (alt + ode).norm() <= tol {
        Some(-1)
    } else {
        None
    }
}

#[test]
fn alternate_order_differs_by_a_sign_in_degree_two() {
    for id in ["cp1-tautological", "cp1-whitney", "t2-flux:k=2", "r2-su2-poly"] {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 2, 8, 2048);
        let ode = bch_ode(&b, &l, 1024, Method::Rk4).unwrap();
        let alt = bch_loop_deloop_ordered(&b, &l, 1024, Method::Rk4, Order::LevpInverse).unwrap();
        assert_eq!(empirical_sign(alt.degree(0), ode.degree(0), 1e-9), Some(1), "{id}");
        assert_eq!(empirical_sign(alt.degree(2), ode.degree(2), 1e-9), Some(-1), "{id}");
    }
    // abelian curvature: the degree-4 parts agree
    let b = bundle("cp1-whitney").unwrap();
    let l = random_loop(Surface::Sphere, 4, 9, 2048);
    let ode = bch_ode(&b, &l, 1024, Method::Rk4).unwrap();
    let alt = bch_loop_deloop_ordered(&b, &l, 1024, Method::Rk4, Order::LevpInverse).unwrap();
    assert_eq!(empirical_sign(alt.degree(4), ode.degree(4), 1e-9), Some(1));
}

#[test]
fn constant_loops_restrict_to_the_chern_character() {
    for id in concrete_ids() {
        let b = bundle(&id).unwrap();
        for seed in 0..4 {
            let x = random_point(b.surface(), seed);
            let v = random_vectors(b.surface(), &x, 4, seed + 50);
            let l = DiscretizedLoop::constant(b.surface(), &x, 64, &v).unwrap();
            let ode = bch_ode(&b, &l, 32, Method::Rk4).unwrap();
            let ch = ch_constant_loops(&b, &x, &v).unwrap();
            for set in (0u32..16).map(IndexSet::from_bits).filter(|s| s.len() % 2 == 0) {
                let fields: Vec<Vec<f64>> = set.iter().map(|a| v[a].clone()).collect();
                let expected = chern_form_eval(&b, &x, &fields).unwrap();
                assert!((ode.element.scalar_coeff(set) - expected).norm() < 1e-9, "{id} {set}");
                assert!((ch.element.scalar_coeff(set) - expected).norm() < 1e-9, "{id} {set}");
            }
        }
    }
}

#[test]
fn constant_loop_examples() {
    let b = bundle("cp1-tautological").unwrap();
    let x = [0.0, 0.0, 1.0];
    let (e1, e2) = (vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]);
    let ch = ch_constant_loops(&b, &x, &[e1.clone(), e2.clone()]).unwrap();
    let r = b.curvature(&x, &e1, &e2).unwrap();
    assert!((ch.top() - I / (2.0 * PI) * linalg::trace(&r)).norm() < 1e-9);
    let scaled = ch_constant_loops(&b, &x, &[linalg::scaled(&e1, 2.5), e2.clone()]).unwrap();
    assert!((scaled.top() - ch.top() * 2.5).norm() < 1e-12);
    let flat = bundle("flat-s2:r=2").unwrap();
    let chf = ch_constant_loops(&flat, &x, &[e1, e2]).unwrap();
    assert_eq!(chf.components(), vec![c(2.0), c(0.0)]);
}

#[test]
fn degree_zero_is_the_wilson_loop_and_flat_bch_is_the_rank() {
    for id in concrete_ids() {
        let b = bundle(&id).unwrap();
        for seed in 0..3 {
            let l = random_loop(b.surface(), 2, 200 + seed, 2048);
            let w = linalg::trace(&holonomy(&b, &l, 512, Method::Rk4).unwrap());
            for r in [
                bch_ode(&b, &l, 512, Method::Rk4).unwrap(),
                bch_loop_deloop(&b, &l, 512, Method::Rk4).unwrap(),
            ] {
                assert!((r.degree(0) - w).norm() < 1e-10, "{id}");
            }
        }
    }
    for id in ["flat-r2:r=3", "flat-s2:r=2", "t2-flat"] {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 4, 300, 1024);
        let r = bch_ode(&b, &l, 256, Method::Rk4).unwrap();
        let expected = GrassmannElement::scalar(4, c(b.rank() as f64));
        assert!(r.element.max_abs_diff(&expected) < 1e-12, "{id}");
    }
}

/// `∫₀¹ Tr[Hol · U(t)⁻¹ (i/2π) R(X_a, X_b) U(t)] dt` by composite Simpson
/// over the transport nodes.
fn dyson_degree_two(b: &BundleConnection, l: &DiscretizedLoop, steps: usize, a: usize, bb: usize) -> C64 {
    let t = parallel_transport(b, l, steps, Method::Rk4).unwrap();
    let hol = t.holonomy(b).unwrap();
    let f = |k: usize| {
        let i = t.sample(k);
        let u = t.u(k).unwrap();
        let r = b
            .curvature_in_chart(t.chart(k), l.point(i), l.field(a, i), l.field(bb, i))
            .unwrap();
        let inner = linalg::inverse(u).unwrap() * r * u;
        linalg::trace(&(&hol * inner)) * (I / (2.0 * PI))
    };
    let h = 1.0 / steps as f64;
    let mut sum = f(0) + f(steps);
    for k in 1..steps {
        sum += f(k) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * (h / 3.0)
}

#[test]
fn degree_two_matches_the_dyson_quadrature() {
    let ids = [
        "cp1-tautological",
        "cp1-whitney",
        "r2-su2-poly",
        "t2-flux:k=2",
        "cp1-tautological-gauge",
    ];
    for seed in 0..10u64 {
        let id = ids[seed as usize % ids.len()];
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 3, 400 + seed, 4096);
        let r = bch_ode(&b, &l, 2048, Method::Rk4).unwrap();
        for (a, bb) in [(0, 1), (0, 2), (1, 2)] {
            let oracle = dyson_degree_two(&b, &l, 2048, a, bb);
            let got = r.element.scalar_coeff(IndexSet::from_bits((1 << a) | (1 << bb)));
            assert!((got - oracle).norm() < 1e-7, "{id} {seed}: {got} vs {oracle}");
        }
    }
}

#[test]
fn transposing_fields_negates_the_top_degree() {
    let b = bundle("r2-su2-poly").unwrap();
    let l = random_loop(Surface::Plane, 4, 500, 1024);
    let r = bch_ode(&b, &l, 256, Method::Rk4).unwrap();
    let swapped = bch_ode(&b, &l.select_fields(&[1, 0, 2, 3]).unwrap(), 256, Method::Rk4).unwrap();
    assert!((r.top() + swapped.top()).norm() < 1e-12);
}

#[test]
fn rotating_the_base_point_keeps_degree_zero() {
    let b = bundle("cp1-whitney").unwrap();
    let l = random_loop(Surface::Sphere, 2, 600, 2048);
    let r = bch_ode(&b, &l, 512, Method::Rk4).unwrap();
    for shift in [4, 512, 1500] {
        let rr = bch_ode(&b, &l.rotated(shift), 512, Method::Rk4).unwrap();
        assert!((r.degree(0) - rr.degree(0)).norm() < 1e-9);
    }
}

fn residual_study(b: &BundleConnection, l: &DiscretizedLoop) -> Vec<f64> {
    [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        .iter()
        .map(|&h| equivariant_residual(b, l, h, 1024, Method::Rk4).unwrap().norm())
        .collect()
}

#[test]
fn bch_is_equivariantly_closed() {
    for (id, seed) in [("cp1-tautological", 700), ("cp1-whitney", 701), ("r2-su2-poly", 702)] {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 1, seed, 2048);
        let res = residual_study(&b, &l);
        for w in res.windows(2) {
            assert!(w[1] < w[0], "{id}: {res:?}");
        }
        let order = (res[0] / res[3]).log2() / 3.0;
        assert!(order >= 1.0, "{id}: {res:?}");
        assert!(res[3] <= 1e-3, "{id}: {res:?}");
    }
}

#[test]
fn constant_loops_are_closed_by_chern_weil() {
    let b = bundle("cp1-whitney").unwrap();
    let x = random_point(Surface::Sphere, 3);
    let v = random_vectors(Surface::Sphere, &x, 3, 4);
    let l = DiscretizedLoop::constant(Surface::Sphere, &x, 64, &v).unwrap();
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&h| equivariant_residual(&b, &l, h, 32, Method::Rk4).unwrap().norm())
        .collect();
    assert!(errs[2] < 1e-4, "{errs:?}");
}

#[test]
fn exterior_derivative_squares_to_zero() {
    // β(X) = Σ_i f(γ_i) df(X_i)/N with f = z·x; d(dF) for F = Σ f(γ_i)/N
    let s = Surface::Sphere;
    let l = random_loop(s, 2, 800, 64);
    let f = |x: &[f64]| x[2] * x[0];
    let big_f = move |m: &DiscretizedLoop| -> bchlab_core::Result<GrassmannElement> {
        let q = m.field_count();
        let v = (0..m.len()).map(|i| f(m.point(i))).sum::<f64>() / m.len() as f64;
        Ok(GrassmannElement::scalar(q, c(v)))
    };
    let d_f = move |m: &DiscretizedLoop| -> bchlab_core::Result<GrassmannElement> {
        let q = m.field_count();
        let mut out = GrassmannElement::scalar(q, c(0.0));
        for a in 0..q {
            let one = m.select_fields(&[a]).unwrap();
            let z = exterior_derivative_fd(&big_f, &one, 1e-4).unwrap();
            out.set_coeff(IndexSet::singleton(a), &(linalg::identity(1) * z));
        }
        Ok(out)
    };
    let dd = exterior_derivative_fd(&d_f, &l, 1e-3).unwrap();
    assert!(dd.norm() < 1e-6, "{dd}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_draws_agree_between_routes(seed in 0u64..100_000, which in 0usize..3) {
        let id = ["cp1-tautological", "cp1-whitney", "r2-su2-poly"][which];
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 2, seed, 1024);
        let ode: BChResult = bch_ode(&b, &l, 512, Method::Rk4).unwrap();
        let ld = bch_loop_deloop(&b, &l, 512, Method::Rk4).unwrap();
        prop_assert!(ode.element.max_abs_diff(&ld.element) < 1e-7);
    }
}
