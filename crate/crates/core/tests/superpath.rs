use std::f64::consts::PI;

use bchlab_core::geometry::forms::{Exact, FnScalar};
use bchlab_core::geometry::{bundle, FnOneForm, ScalarFunction, Surface};
use bchlab_core::grassmann::{GrassmannElement, IndexSet};
use bchlab_core::linalg::{self, c, max_abs_diff, C64, I};
use bchlab_core::superpath::super_transport::body_nodes;
use bchlab_core::superpath::{
    combined_ode_residual, dcs_residual, glue_super, levp_residual, mu, op_d, op_dcs, op_q, rechart_super,
    slev_pair_dcs_oneform, slev_pullback_element, slev_pullback_function, sp_levp, sp_slev, sp_slev_segment,
    theta_times, with_theta, Polynomial, SuperPoint, Superfunction,
};
use bchlab_core::transport::spec::{random_fields, random_fourier};
use bchlab_core::transport::{parallel_transport, DiscretizedLoop, Method};
use proptest::prelude::*;

fn poly_strategy(max_degree: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-4i32..=4, -4i32..=4), 0..=max_degree + 1)
        .prop_map(|v| Polynomial::new(v.into_iter().map(|(a, b)| C64::new(a as f64, b as f64)).collect()))
}

fn superfunction_strategy() -> impl Strategy<Value = Superfunction> {
    (poly_strategy(8), poly_strategy(8)).prop_map(|(f, g)| Superfunction::new(f, g).unwrap())
}

/// `(−1)^|s|` for a homogeneous superfunction.
fn parity_sign(s: &Superfunction) -> f64 {
    if s.even == Polynomial::zero() {
        -1.0
    } else {
        1.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn d_squared_is_time_derivative(s in superfunction_strategy()) {
        prop_assert_eq!(op_d(&op_d(&s)), s.dt());
    }

    #[test]
    fn q_squared_is_minus_time_derivative(s in superfunction_strategy()) {
        prop_assert_eq!(op_q(&op_q(&s)), -&s.dt());
    }

    #[test]
    fn d_and_q_anticommute(s in superfunction_strategy()) {
        let dq = op_d(&op_q(&s));
        let qd = op_q(&op_d(&s));
        prop_assert_eq!(&dq + &qd, Superfunction::default());
    }

    #[test]
    fn dcs_squared(s in superfunction_strategy()) {
        let lhs = op_dcs(&op_dcs(&s));
        let rhs = s.dt().scale(-I / (2.0 * PI));
        let diff = &lhs - &rhs;
        let worst = diff.even.coeffs().iter().chain(diff.odd.coeffs()).map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-14);
    }

    #[test]
    fn odd_operators_obey_the_graded_leibniz_rule(s in superfunction_strategy(), t in superfunction_strategy()) {
        for op in [op_d, op_q, op_dcs] {
            for a in [s.even_part(), s.odd_part()] {
                let lhs = op(&(&a * &t));
                let rhs = &(&op(&a) * &t) + &(&a * &op(&t)).scale(c(parity_sign(&a)));
                let diff = &lhs - &rhs;
                let worst = diff.even.coeffs().iter().chain(diff.odd.coeffs()).map(|z| z.norm()).fold(0.0, f64::max);
                prop_assert!(worst < 1e-12);
            }
        }
    }
}

/// A point `(t₀ + t₁ η_a η_b, η_c)` with symbolic odd generators.
fn symbolic_point(g: usize, t0: f64, t1: f64, soul: (usize, usize), theta: usize) -> SuperPoint {
    let mut t = GrassmannElement::scalar(g, c(t0));
    t.set_coeff(
        IndexSet::from_indices(&[soul.0, soul.1]).unwrap(),
        &(linalg::identity(1) * c(t1)),
    );
    SuperPoint::new(t, GrassmannElement::generator(g, theta)).unwrap()
}

#[test]
fn group_law_is_associative_with_symbolic_thetas() {
    let g = 6;
    let a = symbolic_point(g, 0.25, 1.5, (3, 4), 0);
    let b = symbolic_point(g, -1.0, 0.5, (4, 5), 1);
    let cc = symbolic_point(g, 2.0, -2.0, (3, 5), 2);
    let left = mu(&mu(&a, &b).unwrap(), &cc).unwrap();
    let right = mu(&a, &mu(&b, &cc).unwrap()).unwrap();
    assert_eq!(left, right);
    // the cross terms θ₁θ₂ + θ₁θ₃ + θ₂θ₃ are present
    assert_eq!(left.t.scalar_coeff(IndexSet::from_bits(0b011)), c(1.0));
    assert_eq!(left.t.scalar_coeff(IndexSet::from_bits(0b110)), c(1.0));

    let e = SuperPoint::identity(g);
    assert_eq!(mu(&a, &e).unwrap(), a);
    assert_eq!(mu(&e, &a).unwrap(), a);
    assert_eq!(mu(&a, &a.inverse()).unwrap(), e);
    assert!(mu(&a, &SuperPoint::identity(3)).is_err());
}

fn random_loop(surface: Surface, p: usize, seed: u64, n: usize) -> DiscretizedLoop {
    DiscretizedLoop::sample(&random_fourier(surface, 3, seed), n, &random_fields(surface, p, seed)).unwrap()
}

#[test]
fn pullback_of_a_coordinate_is_its_directional_derivative() {
    let s = Surface::Sphere;
    let l = random_loop(s, 3, 11, 128);
    for k in 0..3 {
        let f = FnScalar::new(move |x: &[f64]| c(x[k]));
        for i in [0, 17, 90] {
            let (even, odd) = slev_pullback_function(&f, &l, i);
            assert_eq!(even, c(l.point(i)[k]));
            for a in 0..3 {
                let h = 1e-5;
                let v = l.field(a, i);
                let plus = s.retract(&linalg::axpy(l.point(i), h, v)).unwrap();
                let minus = s.retract(&linalg::axpy(l.point(i), -h, v)).unwrap();
                let fd = (plus[k] - minus[k]) / (2.0 * h);
                assert!((odd.scalar_coeff(IndexSet::singleton(a)) - c(fd)).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn pullback_is_multiplicative() {
    let s = Surface::Sphere;
    let l = random_loop(s, 3, 12, 64);
    let f = FnScalar::new(|x: &[f64]| C64::new(x[0] * x[1], x[2]));
    let g = FnScalar::new(|x: &[f64]| C64::new((x[2] + 0.5 * x[0]).sin(), x[1] * x[1]));
    let fg = FnScalar::new(|x: &[f64]| f.value(x) * g.value(x));
    for i in [3, 30, 60] {
        let lhs = slev_pullback_element(&fg, &l, i);
        let rhs = &slev_pullback_element(&f, &l, i) * &slev_pullback_element(&g, &l, i);
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }
}

#[test]
fn exact_one_forms_have_no_curvature_term() {
    let s = Surface::Sphere;
    let l = random_loop(s, 3, 13, 256);
    let f = FnScalar::new(|x: &[f64]| C64::new(x[0] * x[2], x[1]));
    let omega = Exact(&f);
    for i in [0, 100] {
        let pair = slev_pair_dcs_oneform(&omega, &l, i);
        let (_, df_hat) = slev_pullback_function(&f, &l, i);
        let expected = with_theta(
            &df_hat.scale(c(1.0 / (2.0 * PI))),
            &GrassmannElement::scalar(3, -I * f.differential(l.point(i), l.velocity(i))),
        );
        assert!(pair.max_abs_diff(&expected) < 1e-12);
    }
}

#[test]
fn f_dg_pairing_matches_its_term_by_term_expansion() {
    let s = Surface::Sphere;
    let n = 4096;
    let l = random_loop(s, 3, 14, n);
    let f = FnScalar::new(|x: &[f64]| C64::new(1.0 + x[0] * x[1], 0.5 * x[2]));
    let g = FnScalar::new(|x: &[f64]| C64::new(x[2] * x[2] - x[0], x[1]));
    let omega = FnOneForm::new(|x: &[f64], v: &[f64]| f.value(x) * g.differential(x, v));
    let k = c(1.0 / (2.0 * PI));
    for i in [5, 1000, 3000] {
        let (fv, df_hat) = slev_pullback_function(&f, &l, i);
        let (_, dg_hat) = slev_pullback_function(&g, &l, i);
        // ∂ĝ/∂t by a periodic stencil on the samples of g∘γ
        let gt = |j: usize| g.value(l.point((i + n - 4 + j) % n));
        let dg_dt = (8.0 * (gt(5) - gt(3)) - (gt(6) - gt(2))) * (n as f64 / 12.0);
        let even = dg_hat.scale(fv * k);
        let odd = (&df_hat * &dg_hat)
            .scale(k)
            .add_scaled(-I * fv * dg_dt, &GrassmannElement::scalar(3, c(1.0)));
        let expected = with_theta(&even, &odd);
        let got = slev_pair_dcs_oneform(&omega, &l, i);
        assert!(got.max_abs_diff(&expected) < 1e-9, "{}", got.max_abs_diff(&expected));
    }
}

const BUNDLES: &[&str] = &[
    "cp1-tautological",
    "cp1-whitney",
    "r2-su2-poly",
    "t2-flux:k=2",
    "cp1-tautological-gauge",
];

#[test]
fn super_transport_glues() {
    for (j, id) in BUNDLES.iter().enumerate() {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 3, 20 + j as u64, 4096);
        let full = sp_slev(&b, &l, 1024, Method::Rk4).unwrap();
        let a = sp_slev_segment(&b, &l, 0, 2048, 512, Method::Rk4).unwrap();
        let z = sp_slev_segment(&b, &l, 2048, 4096, 512, Method::Rk4).unwrap();
        let glued = glue_super(&b, &a.propagator(), &z.propagator()).unwrap();
        let full_p = rechart_super(&b, &full.propagator(), glued.from_chart, glued.to_chart).unwrap();
        let err = glued.element.max_abs_diff(&full_p.element);
        assert!(err < 1e-8, "{id}: {err}");
    }
}

#[test]
fn integrators_converge_to_the_same_super_transport() {
    for (j, id) in BUNDLES.iter().enumerate() {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 2, 30 + j as u64, 1 << 17);
        let rk = sp_slev(&b, &l, 2048, Method::Rk4).unwrap();
        let mid = sp_slev(&b, &l, 1 << 16, Method::Midpoint).unwrap();
        let err = rk.closed(&b).unwrap().max_abs_diff(&mid.closed(&b).unwrap());
        assert!(err < 1e-7, "{id}: {err}");
    }
}

#[test]
fn bodies_agree_with_ordinary_transport() {
    for (j, id) in BUNDLES.iter().enumerate() {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 4, 40 + j as u64, 2048);
        let s = sp_slev(&b, &l, 512, Method::Rk4).unwrap();
        let u = sp_levp(&b, &l, 512, Method::Rk4).unwrap();
        let t = parallel_transport(&b, &l, 512, Method::Rk4).unwrap();
        for (k, (bs, bu)) in body_nodes(&s).iter().zip(body_nodes(&u)).enumerate() {
            assert!(max_abs_diff(bs, t.u(k).unwrap()) < 1e-13, "{id}");
            assert_eq!(&bu, t.u(k).unwrap());
            assert!(linalg::inverse(bs).is_ok());
            assert!(s.sp0(k).inverse().is_ok());
        }
    }
}

#[test]
fn super_transport_equations_hold() {
    for (j, id) in BUNDLES.iter().enumerate() {
        let b = bundle(id).unwrap();
        let l = random_loop(b.surface(), 4, 50 + j as u64, 4096);
        let s = sp_slev(&b, &l, 2048, Method::Rk4).unwrap();
        let u = sp_levp(&b, &l, 2048, Method::Rk4).unwrap();
        let rs = dcs_residual(&b, &l, &s).unwrap();
        let rl = levp_residual(&b, &l, &u).unwrap();
        let (r1, r2) = combined_ode_residual(&b, &l, 2048, Method::Rk4).unwrap();
        assert!(
            rs < 1e-6 && rl < 1e-6 && r1 < 1e-6 && r2 < 1e-6,
            "{id}: {rs} {rl} {r1} {r2}"
        );
    }
}

#[test]
fn flat_and_fieldless_residuals_vanish() {
    let b = bundle("flat-s2:r=2").unwrap();
    let l = random_loop(Surface::Sphere, 2, 60, 512);
    let (r1, r2) = combined_ode_residual(&b, &l, 128, Method::Rk4).unwrap();
    assert_eq!((r1, r2), (0.0, 0.0));
    let b = bundle("cp1-whitney").unwrap();
    let l = random_loop(Surface::Sphere, 0, 61, 512);
    let (r1, r2) = combined_ode_residual(&b, &l, 128, Method::Rk4).unwrap();
    assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
}

#[test]
fn residuals_converge_at_fourth_order() {
    let b = bundle("cp1-whitney").unwrap();
    let l = random_loop(Surface::Sphere, 2, 62, 8192);
    let (a1, a2) = combined_ode_residual(&b, &l, 256, Method::Rk4).unwrap();
    let (b1, b2) = combined_ode_residual(&b, &l, 512, Method::Rk4).unwrap();
    for ratio in [a1 / b1, a2 / b2] {
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }
    let s1 = dcs_residual(&b, &l, &sp_slev(&b, &l, 256, Method::Rk4).unwrap()).unwrap();
    let s2 = dcs_residual(&b, &l, &sp_slev(&b, &l, 512, Method::Rk4).unwrap()).unwrap();
    assert!((12.0..20.0).contains(&(s1 / s2)), "{}", s1 / s2);
}

#[test]
fn theta_sector_of_the_levp_transport_is_empty() {
    let b = bundle("cp1-tautological").unwrap();
    let l = random_loop(Surface::Sphere, 2, 63, 512);
    let u = sp_levp(&b, &l, 128, Method::Rk4).unwrap();
    for k in 0..=128 {
        assert_eq!(u.sp1(k).max_abs(), 0.0);
        assert_eq!(theta_times(u.sp1(k)).max_abs(), 0.0);
    }
}
