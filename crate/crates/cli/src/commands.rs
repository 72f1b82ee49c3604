//! The `chern`, `bch` and `sp` commands.

use bchlab_core::geometry::registry::{reference_ch2, reference_chern_number};
use bchlab_core::geometry::{bundle, chern_form_eval, chern_number, BundleConnection, Quadrature};
use bchlab_core::grassmann::{GrassmannElement, IndexSet};
use bchlab_core::linalg::{self, c};
use bchlab_core::loopspace::{bch_loop_deloop, bch_loop_deloop_ordered, bch_ode, Order};
use bchlab_core::rng;
use bchlab_core::superpath::{combined_ode_residual, dcs_residual, levp_residual, sp_levp, sp_slev};
use bchlab_core::transport::spec::{random_point, random_vectors};
use bchlab_core::transport::{holonomy, parse_fields, parse_loop, DiscretizedLoop};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{timed, ResultRow};

/// Random points at which `chern` evaluates the Chern form.
const CHERN_POINTS: usize = 4;
const CHERN_STREAM: u64 = 0x43;
/// Upper bound on the nodes dumped by `sp`.
const SP_DUMP_NODES: usize = 64;

const FLAT_BUNDLES: &[&str] = &["flat-r2", "flat-s2", "t2-flat"];

fn head(id: &str) -> &str {
    id.split(':').next().unwrap_or(id).trim()
}

fn is_flat(id: &str) -> bool {
    FLAT_BUNDLES.contains(&head(id))
}

fn is_constant_loop(spec: &str) -> bool {
    head(spec) == "constant"
}

/// The configured loop with its fields. A constant loop carries the fields
/// frozen at its base point.
pub fn load_loop(cfg: &ExperimentConfig, b: &BundleConnection) -> Result<DiscretizedLoop, CliError> {
    let surface = b.surface();
    let curve = parse_loop(surface, &cfg.loop_spec)?;
    let fields = parse_fields(surface, &cfg.field_spec())?;
    let l = DiscretizedLoop::sample(&curve, cfg.sample_count(), &fields)?;
    if is_constant_loop(&cfg.loop_spec) {
        let x = l.point(0).to_vec();
        return Ok(DiscretizedLoop::constant(
            surface,
            &x,
            cfg.sample_count(),
            &l.fields_at(0),
        )?);
    }
    Ok(l)
}

pub fn chern(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = bundle(&cfg.bundle)?;
    let surface = b.surface();
    let mut rows = Vec::new();
    if surface.is_closed() {
        let (n, t) = timed(|| chern_number(&b, Quadrature::square(cfg.quad)));
        let n = n?;
        rows.push(match reference_chern_number(&cfg.bundle) {
            Some(r) => ResultRow::compared("chern_number", n, c(r), cfg.tol.unwrap_or(1e-6), t),
            None => ResultRow::value("chern_number", n, t),
        });
    }
    let mut seeds = rng::stream(cfg.seed, CHERN_STREAM);
    for k in 0..CHERN_POINTS {
        let seed: u64 = seeds.gen();
        let x = random_point(surface, seed);
        let v = random_vectors(surface, &x, 2, seed);
        let (value, t) = timed(|| chern_form_eval(&b, &x, &v));
        let value = value?;
        let name = format!("ch2.point{k}");
        rows.push(match reference_ch2(&cfg.bundle, &x, &v[0], &v[1]) {
            Some(r) => ResultRow::compared(name, value, c(r), cfg.tol.unwrap_or(1e-10), t),
            None => ResultRow::value(name, value, t),
        });
    }
    Ok(rows)
}

pub fn bch(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = bundle(&cfg.bundle)?;
    let l = load_loop(cfg, &b)?;
    let p = l.field_count();
    let tol = cfg.tol.unwrap_or(1e-7);

    let (hol, t_hol) = timed(|| holonomy(&b, &l, cfg.steps, cfg.method));
    let wilson = linalg::trace(&hol?);
    let (ode, t_ode) = timed(|| bch_ode(&b, &l, cfg.steps, cfg.method));
    let ode = ode?;
    let (ld, t_ld) = timed(|| {
        if cfg.reverse {
            bch_loop_deloop_ordered(&b, &l, cfg.steps, cfg.method, Order::LevpInverse)
        } else {
            bch_loop_deloop(&b, &l, cfg.steps, cfg.method)
        }
    });
    let ld = ld?;
    let ld_name = if cfg.reverse {
        "bch_loop_deloop_reversed"
    } else {
        "bch_loop_deloop"
    };

    let mut rows = vec![ResultRow::value("wilson_loop", wilson, t_hol)];
    let constant = is_constant_loop(&cfg.loop_spec);
    for d in (0..=p).step_by(2) {
        let reference = if constant {
            let fields: Vec<Vec<f64>> = (0..d).map(|a| l.field(a, 0).to_vec()).collect();
            Some(chern_form_eval(&b, l.point(0), &fields)?)
        } else if is_flat(&cfg.bundle) {
            Some(c(if d == 0 { b.rank() as f64 } else { 0.0 }))
        } else if d == 0 {
            Some(wilson)
        } else {
            None
        };
        for (name, r, t) in [("bch_ode", &ode, t_ode), (ld_name, &ld, t_ld)] {
            let q = format!("{name}.deg{d}");
            rows.push(match reference {
                Some(z) => ResultRow::compared(q, r.degree(d), z, tol, t),
                None => ResultRow::value(q, r.degree(d), t),
            });
        }
        rows.push(ResultRow::residual(
            format!("discrepancy.deg{d}"),
            ode.degree_diff(&ld, d),
            tol,
            0.0,
        ));
    }
    Ok(rows)
}

fn monomial_name(set: IndexSet) -> String {
    if set.is_empty() {
        return "1".into();
    }
    set.iter().map(|a| format!("eta{a}")).collect::<Vec<_>>().join("*")
}

fn trace_rows(rows: &mut Vec<ResultRow>, prefix: &str, x: &GrassmannElement) {
    let tr = x.trace();
    for set in (0..1u32 << x.generators()).map(IndexSet::from_bits) {
        rows.push(ResultRow::value(
            format!("{prefix}.tr[{}]", monomial_name(set)),
            tr.scalar_coeff(set),
            0.0,
        ));
    }
}

/// Traces of every monomial of `SP₀` and `SP₁` along the loop, followed by
/// the residuals of the super transport equations.
pub fn sp(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let b = bundle(&cfg.bundle)?;
    let l = load_loop(cfg, &b)?;
    let (slev, t_slev) = timed(|| sp_slev(&b, &l, cfg.steps, cfg.method));
    let slev = slev?;
    let (levp, t_levp) = timed(|| sp_levp(&b, &l, cfg.steps, cfg.method));
    let levp = levp?;
    let steps = slev.steps();
    let stride = steps.div_ceil(SP_DUMP_NODES).max(1);
    let mut rows = Vec::new();
    let mut nodes: Vec<usize> = (0..steps).step_by(stride).collect();
    nodes.push(steps);
    for k in nodes {
        let at = format!("@t={}", k as f64 / steps as f64);
        rows.push(ResultRow::real(format!("chart{at}"), slev.chart(k) as f64, 0.0));
        trace_rows(&mut rows, &format!("slev.sp0{at}"), slev.sp0(k));
        trace_rows(&mut rows, &format!("slev.sp1{at}"), slev.sp1(k));
        trace_rows(&mut rows, &format!("levp.sp0{at}"), levp.sp0(k));
    }
    let tol = cfg.tol.unwrap_or(1e-6);
    let (sl, t) = timed(|| dcs_residual(&b, &l, &slev));
    rows.push(ResultRow::residual("residual.slev", sl?, tol, t + t_slev));
    let (lv, t) = timed(|| levp_residual(&b, &l, &levp));
    rows.push(ResultRow::residual("residual.levp", lv?, tol, t + t_levp));
    let (comb, t) = timed(|| combined_ode_residual(&b, &l, cfg.steps, cfg.method));
    let (r1, r2) = comb?;
    rows.push(ResultRow::residual("residual.levp_inverse_slev", r1, tol, t));
    rows.push(ResultRow::residual("residual.slev_inverse_levp", r2, tol, t));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(monomial_name(IndexSet::EMPTY), "1");
        assert_eq!(monomial_name(IndexSet::from_bits(0b101)), "eta0*eta2");
        assert!(is_flat("flat-r2:r=3"));
        assert!(!is_flat("cp1-dual"));
        assert!(is_constant_loop("constant:north"));
    }
}
