//! Verification suites: one row per check.

use std::f64::consts::PI;
use std::time::Instant;

use bchlab_core::geometry::registry::latitude_holonomy_tautological;
use bchlab_core::geometry::{bundle, chern_form_eval, BundleConnection, Surface};
use bchlab_core::grassmann::{GrassmannElement, IndexSet};
use bchlab_core::linalg::{self, c, identity, max_abs_diff, C64, I};
use bchlab_core::loopspace::{bch_loop_deloop, bch_ode, ch_constant_loops, equivariant_residual};
use bchlab_core::rng;
use bchlab_core::superpath::{
    body_nodes, combined_ode_residual, dcs_residual, levp_residual, mu, op_d, op_dcs, op_q, sp_levp, sp_slev,
    Polynomial, SuperPoint, Superfunction,
};
use bchlab_core::transport::spec::{latitude, random_fields, random_fourier, random_point, random_vectors};
use bchlab_core::transport::{
    glue_transport, holonomy, parallel_transport, rechart, transport_segment, DiscretizedLoop, Method,
};
use rand::Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::output::{ms, ResultRow};

pub const SUITES: &[&str] = &[
    "grassmann",
    "superfunction",
    "transport",
    "superpath",
    "bch",
    "equivariance",
];

const BUNDLES: &[&str] = &[
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

const CURVED: &[&str] = &[
    "cp1-tautological",
    "cp1-whitney",
    "r2-su2-poly",
    "t2-flux:k=2",
    "cp1-tautological-gauge",
];

type Rows = Result<Vec<ResultRow>, CliError>;

/// Tolerance given on the command line, else the suite default.
struct Tol(Option<f64>);

impl Tol {
    fn or(&self, default: f64) -> f64 {
        self.0.unwrap_or(default)
    }
}

fn random_loop(surface: Surface, p: usize, seed: u64, n: usize) -> Result<DiscretizedLoop, CliError> {
    Ok(DiscretizedLoop::sample(
        &random_fourier(surface, 3, seed),
        n,
        &random_fields(surface, p, seed),
    )?)
}

fn grassmann(seed: u64, tol: &Tol) -> Rows {
    let start = Instant::now();
    let mut r = rng::stream(seed, 0x61);
    let p = 5;
    let mut err = [0.0f64; 4];
    for _ in 0..1250 {
        let a = GrassmannElement::random(&mut r, p, 2, None);
        let b = GrassmannElement::random(&mut r, p, 2, None);
        let x = GrassmannElement::random(&mut r, p, 2, None);
        err[0] = err[0].max((&(&a * &b) * &x).max_abs_diff(&(&a * &(&b * &x))));

        let u = GrassmannElement::random(&mut r, p, 1, Some(1));
        let v = GrassmannElement::random(&mut r, p, 1, Some(1));
        err[1] = err[1].max((&(&u * &v) + &(&v * &u)).max_abs()).max((&u * &u).max_abs());

        let mut soul = GrassmannElement::random(&mut r, p, 2, None);
        soul.set_coeff(IndexSet::EMPTY, &linalg::zeros(2));
        let mut power = soul.clone();
        for _ in 0..p {
            power = &power * &soul;
        }
        err[2] = err[2].max(power.max_abs());

        for (pa, pb) in [(0, 0), (0, 1), (1, 1)] {
            let y = GrassmannElement::random(&mut r, p, 2, Some(pa));
            let z = GrassmannElement::random(&mut r, p, 2, Some(pb));
            let sign = if pa * pb == 1 { -1.0 } else { 1.0 };
            err[3] = err[3].max((&y * &z).trace().max_abs_diff(&(&z * &y).trace().scale(c(sign))));
        }
    }
    let t = ms(start) / 4.0;
    let names = [
        "associativity",
        "anticommutativity",
        "nilpotency",
        "graded_trace_cyclicity",
    ];
    Ok(names
        .iter()
        .zip(err)
        .map(|(n, e)| ResultRow::residual(*n, e, tol.or(1e-12), t))
        .collect())
}

fn max_norm(s: &Superfunction) -> f64 {
    s.even
        .coeffs()
        .iter()
        .chain(s.odd.coeffs())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn superfunction(seed: u64, tol: &Tol) -> Rows {
    let start = Instant::now();
    let mut r = rng::stream(seed, 0x62);
    let mut err = [0.0f64; 5];
    for _ in 0..500 {
        let mut poly = || {
            let d = r.gen_range(0..=8);
            Polynomial::new(
                (0..=d)
                    .map(|_| C64::new(r.gen_range(-3..=3) as f64, r.gen_range(-3..=3) as f64))
                    .collect(),
            )
        };
        let s = Superfunction::new(poly(), poly())?;
        err[0] = err[0].max(max_norm(&(&op_d(&op_d(&s)) - &s.dt())));
        err[1] = err[1].max(max_norm(&(&op_q(&op_q(&s)) + &s.dt())));
        err[2] = err[2].max(max_norm(&(&op_d(&op_q(&s)) + &op_q(&op_d(&s)))));
        err[3] = err[3].max(max_norm(&(&op_dcs(&op_dcs(&s)) - &s.dt().scale(-I / (2.0 * PI)))));
    }
    let g = 6;
    let point = |t0: f64, t1: f64, soul: u32, theta: usize| {
        let mut t = GrassmannElement::scalar(g, c(t0));
        t.set_coeff(IndexSet::from_bits(soul), &(identity(1) * c(t1)));
        SuperPoint::new(t, GrassmannElement::generator(g, theta))
    };
    for k in 0..50 {
        let f = k as f64;
        let a = point(0.5 + f, -1.0, 0b011000, 0)?;
        let b = point(-2.0, 0.25 * f, 0b110000, 1)?;
        let x = point(1.5, 3.0, 0b101000, 2)?;
        let lhs = mu(&mu(&a, &b)?, &x)?;
        let rhs = mu(&a, &mu(&b, &x)?)?;
        err[4] = err[4]
            .max(lhs.t.max_abs_diff(&rhs.t))
            .max(lhs.theta.max_abs_diff(&rhs.theta));
    }
    let t = ms(start) / 5.0;
    let checks = [
        ("D^2=d/dt", err[0], 0.0),
        ("Q^2=-d/dt", err[1], 0.0),
        ("[D,Q]=0", err[2], 0.0),
        ("D_cs^2", err[3], 1e-14),
        ("mu_associativity", err[4], 0.0),
    ];
    Ok(checks
        .iter()
        .map(|&(n, e, d)| ResultRow::residual(n, e, tol.or(d), t))
        .collect())
}

fn transport(tol: &Tol) -> Rows {
    let mut rows = Vec::new();
    let b = bundle("cp1-tautological")?;
    for alpha in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let l = DiscretizedLoop::sample(&latitude(Surface::Sphere, alpha), 2048, &[])?;
        let h = holonomy(&b, &l, 512, Method::Rk4)?;
        rows.push(ResultRow::compared(
            format!("latitude_holonomy[alpha={alpha}]"),
            h[(0, 0)],
            latitude_holonomy_tautological(alpha),
            tol.or(1e-10),
            ms(start),
        ));
    }

    let start = Instant::now();
    let mut glue_err: f64 = 0.0;
    let mut reverse_err: f64 = 0.0;
    for (j, id) in CURVED.iter().enumerate() {
        let b = bundle(id)?;
        let l = DiscretizedLoop::sample(&random_fourier(b.surface(), 3, 40 + j as u64), 4096, &[])?;
        let full = parallel_transport(&b, &l, 1024, Method::Rk4)?;
        let r1 = transport_segment(&b, &l, 0, 1536, 384, Method::Rk4)?;
        let r2 = transport_segment(&b, &l, 1536, 4096, 640, Method::Rk4)?;
        let glued = glue_transport(&b, &r1, &r2)?;
        let reference = rechart(&b, &full.propagator(), glued.from_chart, glued.to_chart)?;
        glue_err = glue_err.max(max_abs_diff(&glued.matrix, &reference.matrix));
        let forward = full.holonomy(&b)?;
        let backward = holonomy(&b, &l.reversed(), 1024, Method::Rk4)?;
        reverse_err = reverse_err.max(max_abs_diff(&(&backward * &forward), &identity(b.rank())));
    }
    let t = ms(start) / 2.0;
    rows.push(ResultRow::residual("gluing", glue_err, tol.or(1e-9), t));
    // RK4 is not self-adjoint, so the reversed run inverts only up to truncation
    rows.push(ResultRow::residual(
        "reversal_inverts_holonomy",
        reverse_err,
        tol.or(1e-7),
        t,
    ));

    let start = Instant::now();
    let l = DiscretizedLoop::sample(&latitude(Surface::Sphere, 1.0), 8192, &[])?;
    let reference = holonomy(&b, &l, 4096, Method::Rk4)?;
    let e16 = max_abs_diff(&holonomy(&b, &l, 16, Method::Rk4)?, &reference);
    let e128 = max_abs_diff(&holonomy(&b, &l, 128, Method::Rk4)?, &reference);
    let order = (e16 / e128).log2() / 3.0;
    rows.push(ResultRow::real("rk4_order", order, ms(start)).with_check((3.8..=4.2).contains(&order)));
    Ok(rows)
}

fn superpath(tol: &Tol) -> Rows {
    let mut worst = [0.0f64; 4];
    let mut sums = [[0.0f64; 4]; 2];
    let mut body: f64 = 0.0;
    let mut levp_odd: f64 = 0.0;
    let start = Instant::now();
    for seed in 0..10u64 {
        let b = bundle(CURVED[seed as usize % CURVED.len()])?;
        let l = random_loop(b.surface(), 2 + (seed as usize % 3), 1000 + seed, 4096)?;
        for (slot, steps) in [1024, 2048].into_iter().enumerate() {
            let s = sp_slev(&b, &l, steps, Method::Rk4)?;
            let u = sp_levp(&b, &l, steps, Method::Rk4)?;
            let (r1, r2) = combined_ode_residual(&b, &l, steps, Method::Rk4)?;
            let res = [dcs_residual(&b, &l, &s)?, levp_residual(&b, &l, &u)?, r1, r2];
            for k in 0..4 {
                sums[slot][k] += res[k];
                if steps == 2048 {
                    worst[k] = worst[k].max(res[k]);
                }
            }
            if steps == 1024 {
                let plain = parallel_transport(&b, &l, steps, Method::Rk4)?;
                for (x, y) in body_nodes(&s).iter().zip(plain.nodes()) {
                    body = body.max(max_abs_diff(x, y));
                }
                levp_odd = u.sp1_nodes().iter().map(|x| x.max_abs()).fold(levp_odd, f64::max);
            }
        }
    }
    let t = ms(start) / 4.0;
    let names = ["slev", "levp", "levp_inverse_slev", "slev_inverse_levp"];
    let mut rows = Vec::new();
    for k in 0..4 {
        rows.push(ResultRow::residual(
            format!("residual.{}", names[k]),
            worst[k],
            tol.or(1e-6),
            t,
        ));
    }
    for k in 0..4 {
        let order = (sums[0][k] / sums[1][k]).log2();
        rows.push(ResultRow::real(format!("order.{}", names[k]), order, 0.0).with_check((3.5..=4.5).contains(&order)));
    }
    rows.push(ResultRow::residual(
        "body_is_parallel_transport",
        body,
        tol.or(1e-12),
        0.0,
    ));
    rows.push(ResultRow::residual(
        "levp_odd_part_vanishes",
        levp_odd,
        tol.or(0.0),
        0.0,
    ));
    Ok(rows)
}

/// `∫₀¹ Tr[Hol · U(t)⁻¹ (i/2π) R(X₀, X₁) U(t)] dt` by composite Simpson.
fn dyson(b: &BundleConnection, l: &DiscretizedLoop, steps: usize) -> Result<C64, CliError> {
    let t = parallel_transport(b, l, steps, Method::Rk4)?;
    let hol = t.holonomy(b)?;
    let f = |k: usize| -> Result<C64, CliError> {
        let i = t.sample(k);
        let u = t.u(k)?;
        let r = b.curvature_in_chart(t.chart(k), l.point(i), l.field(0, i), l.field(1, i))?;
        Ok(linalg::trace(&(&hol * linalg::inverse(u)? * r * u)) * (I / (2.0 * PI)))
    };
    let mut sum = f(0)? + f(steps)?;
    for k in 1..steps {
        sum += f(k)? * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(sum / (3.0 * steps as f64))
}

fn bch(tol: &Tol) -> Rows {
    let mut rows = Vec::new();

    let start = Instant::now();
    let mut agree: f64 = 0.0;
    let mut wilson: f64 = 0.0;
    for (j, id) in BUNDLES.iter().enumerate() {
        let b = bundle(id)?;
        for seed in 0..4u64 {
            for p in [2, 4] {
                let l = random_loop(b.surface(), p, 2000 + 10 * j as u64 + seed, 1024)?;
                let ode = bch_ode(&b, &l, 512, Method::Rk4)?;
                let ld = bch_loop_deloop(&b, &l, 512, Method::Rk4)?;
                for d in (0..=p).step_by(2) {
                    agree = agree.max(ode.degree_diff(&ld, d));
                }
                let w = linalg::trace(&holonomy(&b, &l, 512, Method::Rk4)?);
                wilson = wilson.max((ode.degree(0) - w).norm()).max((ld.degree(0) - w).norm());
            }
        }
    }
    let t = ms(start) / 2.0;
    rows.push(ResultRow::residual("route_agreement", agree, tol.or(1e-7), t));
    rows.push(ResultRow::residual("degree0_is_wilson_loop", wilson, tol.or(1e-10), t));

    let start = Instant::now();
    let mut restriction: f64 = 0.0;
    for seed in 0..9u64 {
        let b = bundle(BUNDLES[seed as usize])?;
        let x = random_point(b.surface(), 3000 + seed);
        let v = random_vectors(b.surface(), &x, 4, 3000 + seed);
        let l = DiscretizedLoop::constant(b.surface(), &x, 64, &v)?;
        let ode = bch_ode(&b, &l, 32, Method::Rk4)?;
        let ch = ch_constant_loops(&b, &x, &v)?;
        for bits in (0u32..16).filter(|s| s.count_ones() % 2 == 0) {
            let set = IndexSet::from_bits(bits);
            let fields: Vec<Vec<f64>> = set.iter().map(|a| v[a].clone()).collect();
            let expected = chern_form_eval(&b, &x, &fields)?;
            restriction = restriction
                .max((ode.element.scalar_coeff(set) - expected).norm())
                .max((ch.element.scalar_coeff(set) - expected).norm());
        }
    }
    rows.push(ResultRow::residual(
        "constant_loops_give_chern_character",
        restriction,
        tol.or(1e-9),
        ms(start),
    ));

    let start = Instant::now();
    let mut flat: f64 = 0.0;
    for (j, id) in ["flat-r2:r=3", "flat-s2:r=2", "t2-flat"].iter().enumerate() {
        let b = bundle(id)?;
        let l = random_loop(b.surface(), 4, 4100 + j as u64, 1024)?;
        let expected = GrassmannElement::scalar(4, c(b.rank() as f64));
        flat = flat
            .max(bch_ode(&b, &l, 256, Method::Rk4)?.element.max_abs_diff(&expected))
            .max(
                bch_loop_deloop(&b, &l, 256, Method::Rk4)?
                    .element
                    .max_abs_diff(&expected),
            );
    }
    rows.push(ResultRow::residual(
        "flat_connections_give_rank",
        flat,
        tol.or(1e-12),
        ms(start),
    ));

    let start = Instant::now();
    let mut dyson_err: f64 = 0.0;
    for seed in 0..5u64 {
        let b = bundle(CURVED[seed as usize])?;
        let l = random_loop(b.surface(), 2, 6000 + seed, 4096)?;
        let r = bch_ode(&b, &l, 2048, Method::Rk4)?;
        dyson_err = dyson_err.max((r.degree(2) - dyson(&b, &l, 2048)?).norm());
    }
    rows.push(ResultRow::residual(
        "degree2_dyson_term",
        dyson_err,
        tol.or(1e-7),
        ms(start),
    ));
    Ok(rows)
}

fn equivariance(tol: &Tol) -> Rows {
    let mut rows = Vec::new();
    for (id, seed) in [("cp1-tautological", 5000), ("cp1-whitney", 5001), ("r2-su2-poly", 5002)] {
        let start = Instant::now();
        let b = bundle(id)?;
        let l = random_loop(b.surface(), 1, seed, 2048)?;
        let res = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
            .iter()
            .map(|&h| Ok(equivariant_residual(&b, &l, h, 1024, Method::Rk4)?.norm()))
            .collect::<Result<Vec<f64>, CliError>>()?;
        let monotone = res.windows(2).all(|w| w[1] < w[0]);
        let order = (res[0] / res[3]).log2() / 3.0;
        let t = ms(start);
        rows.push(
            ResultRow::residual(format!("equivariant_residual[{id}]"), res[3], tol.or(1e-3), t).with_check(monotone),
        );
        rows.push(ResultRow::real(format!("equivariant_order[{id}]"), order, 0.0).with_check(order >= 1.0));
    }
    Ok(rows)
}

fn run_one(suite: &str, seed: u64, tol: &Tol) -> Rows {
    match suite {
        "grassmann" => grassmann(seed, tol),
        "superfunction" => superfunction(seed, tol),
        "transport" => transport(tol),
        "superpath" => superpath(tol),
        "bch" => bch(tol),
        "equivariance" => equivariance(tol),
        _ => Err(CliError::Usage(format!(
            "unknown suite `{suite}`; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

/// Run `suite` (or every suite for `all`). Suites run on the worker pool and
/// their rows come back in suite order, each quantity prefixed by its suite.
pub fn run(suite: &str, seed: u64, tol: Option<f64>) -> Rows {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    if !names.iter().all(|n| SUITES.contains(n)) {
        return run_one(suite, seed, &Tol(tol));
    }
    let per_suite = names
        .par_iter()
        .map(|name| run_one(name, seed, &Tol(tol)))
        .collect::<Vec<Rows>>();
    let mut rows = Vec::new();
    for (name, result) in names.iter().zip(per_suite) {
        for mut row in result? {
            row.quantity = format!("{name}.{}", row.quantity);
            rows.push(row);
        }
    }
    Ok(rows)
}
