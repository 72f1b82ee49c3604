//! Built-in bundles, selected by id string.

use std::f64::consts::PI;
use std::sync::Arc;

use super::bundle::{scalar_matrix, BundleConnection, FlatGauge, GaugeField, ProjectorField};
use super::surface::Surface;
use crate::error::{Error, Result};
use crate::linalg::{self, c, pauli, CMat, C64, I};

/// Ids accepted by [`bundle`], with their parameters.
pub const BUNDLE_IDS: &[&str] = &[
    "flat-r2[:r=<rank>]",
    "flat-s2[:r=<rank>]",
    "t2-flat",
    "t2-flux:k=<int>",
    "r2-su2-poly",
    "cp1-tautological",
    "cp1-dual",
    "cp1-whitney",
    "cp1-tautological-gauge",
];

fn parse_param(id: &str, params: Option<&str>, key: &str) -> Result<Option<i64>> {
    let Some(params) = params else {
        return Ok(None);
    };
    let value = params.strip_prefix(&format!("{key}=")).unwrap_or(params);
    value
        .trim()
        .parse::<i64>()
        .map(Some)
        .map_err(|_| Error::parse(id, format!("expected `{key}=<int>`")))
}

/// Look up a built-in bundle by id.
pub fn bundle(id: &str) -> Result<BundleConnection> {
    let (head, params) = match id.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (id, None),
    };
    let no_params = || -> Result<()> {
        match params {
            Some(_) => Err(Error::parse(id, "bundle takes no parameters")),
            None => Ok(()),
        }
    };
    let b = match head {
        "flat-r2" | "flat-s2" => {
            let r = parse_param(id, params, "r")?.unwrap_or(1);
            if !(1..=8).contains(&r) {
                return Err(Error::parse(id, "rank must be in 1..=8"));
            }
            let surface = if head == "flat-r2" {
                Surface::Plane
            } else {
                Surface::Sphere
            };
            BundleConnection::gauge(id, surface, Arc::new(FlatGauge { rank: r as usize }))
        }
        "t2-flat" => {
            no_params()?;
            BundleConnection::gauge(id, Surface::FlatTorus, Arc::new(TorusFlux { k: 0 }))
        }
        "t2-flux" => {
            let k = parse_param(id, params, "k")?.ok_or_else(|| Error::parse(id, "missing `k=<int>`"))?;
            BundleConnection::gauge(id, Surface::FlatTorus, Arc::new(TorusFlux { k }))
        }
        "r2-su2-poly" => {
            no_params()?;
            BundleConnection::gauge(id, Surface::Plane, Arc::new(Su2Poly))
        }
        "cp1-tautological" => {
            no_params()?;
            BundleConnection::projector(id, Surface::Sphere, Arc::new(BlochProjector::taut()))
        }
        "cp1-dual" => {
            no_params()?;
            BundleConnection::projector(id, Surface::Sphere, Arc::new(BlochProjector::dual()))
        }
        "cp1-whitney" => {
            no_params()?;
            BundleConnection::projector(id, Surface::Sphere, Arc::new(WhitneySum))
        }
        "cp1-tautological-gauge" => {
            no_params()?;
            BundleConnection::gauge(id, Surface::Sphere, Arc::new(MonopoleGauge))
        }
        _ => return Err(Error::UnknownId(id.to_string())),
    };
    Ok(b)
}

/// First Chern number of a built-in bundle over a closed surface.
pub fn reference_chern_number(id: &str) -> Option<f64> {
    let b = bundle(id).ok()?;
    if !b.surface().is_closed() {
        return None;
    }
    let (head, params) = match id.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (id, None),
    };
    match head {
        "flat-s2" | "t2-flat" | "cp1-whitney" => Some(0.0),
        "t2-flux" => parse_param(id, params, "k").ok().flatten().map(|k| k as f64),
        "cp1-tautological" | "cp1-tautological-gauge" => Some(-1.0),
        "cp1-dual" => Some(1.0),
        _ => None,
    }
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Closed form of `(i/2π) Tr R(X, Y)` for the built-in bundles, where known.
pub fn reference_ch2(id: &str, x: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let (head, params) = match id.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (id, None),
    };
    // the tautological line has curvature −(1/4π) times the area form
    let sphere = || linalg::dot(x, &cross(a, b)) / (4.0 * PI);
    match head {
        "flat-r2" | "flat-s2" | "t2-flat" | "cp1-whitney" => Some(0.0),
        "cp1-tautological" | "cp1-tautological-gauge" => Some(-sphere()),
        "cp1-dual" => Some(sphere()),
        "t2-flux" => {
            let k = parse_param(id, params, "k").ok().flatten()? as f64;
            let du = |v: &[f64]| (x[0] * v[1] - x[1] * v[0]) / (2.0 * PI * TORUS_R2);
            let dv = |v: &[f64]| (x[2] * v[3] - x[3] * v[2]) / (2.0 * PI * TORUS_R2);
            Some(k * (du(a) * dv(b) - du(b) * dv(a)))
        }
        _ => None,
    }
}

const TORUS_R2: f64 = super::surface::TORUS_RADIUS * super::surface::TORUS_RADIUS;

/// Holonomy phase `exp(−iπ(1 − cos α))` of the tautological line around the
/// latitude at polar angle `α`, traversed eastward.
pub fn latitude_holonomy_tautological(alpha: f64) -> C64 {
    (-I * PI * (1.0 - alpha.cos())).exp()
}

/// `(I ± x·σ)/2` on `ℂ²`.
struct BlochProjector {
    sign: f64,
}

impl BlochProjector {
    fn taut() -> Self {
        BlochProjector { sign: 1.0 }
    }
    fn dual() -> Self {
        BlochProjector { sign: -1.0 }
    }
}

fn x_dot_sigma(x: &[f64]) -> CMat {
    let [sx, sy, sz] = pauli();
    sx * c(x[0]) + sy * c(x[1]) + sz * c(x[2])
}

impl ProjectorField for BlochProjector {
    fn ambient_rank(&self) -> usize {
        2
    }
    fn rank(&self) -> usize {
        1
    }
    fn projector(&self, x: &[f64]) -> CMat {
        (linalg::identity(2) + x_dot_sigma(x) * c(self.sign)) * c(0.5)
    }
    fn derivative(&self, _x: &[f64], v: &[f64]) -> Option<CMat> {
        Some(x_dot_sigma(v) * c(0.5 * self.sign))
    }
}

/// Tautological line plus its complement, block diagonal in `ℂ⁴`.
struct WhitneySum;

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut m = linalg::zeros(4);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((2, 2), (2, 2)).copy_from(b);
    m
}

impl ProjectorField for WhitneySum {
    fn ambient_rank(&self) -> usize {
        4
    }
    fn rank(&self) -> usize {
        2
    }
    fn projector(&self, x: &[f64]) -> CMat {
        block_diag(
            &BlochProjector::taut().projector(x),
            &BlochProjector::dual().projector(x),
        )
    }
    fn derivative(&self, x: &[f64], v: &[f64]) -> Option<CMat> {
        Some(block_diag(
            &BlochProjector::taut().derivative(x, v)?,
            &BlochProjector::dual().derivative(x, v)?,
        ))
    }
}

/// `A = i(0.6 y σx + 0.3 x² σz) dx + i(0.5 x σy + 0.2 σx) dy` on the plane.
struct Su2Poly;

impl GaugeField for Su2Poly {
    fn rank(&self) -> usize {
        2
    }
    fn potential(&self, _chart: usize, x: &[f64], v: &[f64]) -> CMat {
        let [sx, sy, sz] = pauli();
        let a1 = (&sx * c(0.6 * x[1]) + &sz * c(0.3 * x[0] * x[0])) * I;
        let a2 = (&sy * c(0.5 * x[0]) + &sx * c(0.2)) * I;
        a1 * c(v[0]) + a2 * c(v[1])
    }
    fn potential_derivative(&self, _chart: usize, x: &[f64], w: &[f64], v: &[f64]) -> Option<CMat> {
        let [sx, sy, sz] = pauli();
        let d1 = (&sx * c(0.6 * w[1]) + &sz * c(0.6 * x[0] * w[0])) * I;
        let d2 = &sy * c(0.5 * w[0]) * I;
        Some(d1 * c(v[0]) + d2 * c(v[1]))
    }
}

/// Constant-curvature line bundle of degree `k` on the flat torus.
///
/// Chart `j` uses the lift `ũ ∈ [j/2 − 1/4, j/2 + 3/4)` of the first angle and
/// the potential `A = −2πik ũ dv`.
struct TorusFlux {
    k: i64,
}

impl TorusFlux {
    fn lift(chart: usize, x: &[f64]) -> f64 {
        let u = x[1].atan2(x[0]) / (2.0 * PI);
        let lo = chart as f64 * 0.5 - 0.25;
        lo + (u - lo).rem_euclid(1.0)
    }
}

impl GaugeField for TorusFlux {
    fn rank(&self) -> usize {
        1
    }
    fn charts(&self) -> usize {
        2
    }
    fn quality(&self, chart: usize, x: &[f64]) -> f64 {
        let lo = chart as f64 * 0.5 - 0.25;
        let t = Self::lift(chart, x) - lo;
        t.min(1.0 - t)
    }
    fn potential(&self, chart: usize, x: &[f64], v: &[f64]) -> CMat {
        let u = Self::lift(chart, x);
        let s2 = x[2] * x[2] + x[3] * x[3];
        let k = self.k as f64;
        scalar_matrix(I * k * u * (x[3] * v[2] - x[2] * v[3]) / s2)
    }
    fn potential_derivative(&self, chart: usize, x: &[f64], w: &[f64], v: &[f64]) -> Option<CMat> {
        let u = Self::lift(chart, x);
        let s1 = x[0] * x[0] + x[1] * x[1];
        let s2 = x[2] * x[2] + x[3] * x[3];
        let k = self.k as f64;
        let du = (x[0] * w[1] - x[1] * w[0]) / (2.0 * PI * s1);
        let q = (x[3] * v[2] - x[2] * v[3]) / s2;
        let dq = (w[3] * v[2] - w[2] * v[3]) / s2 - q * 2.0 * (x[2] * w[2] + x[3] * w[3]) / s2;
        Some(scalar_matrix(I * k * (du * q + u * dq)))
    }
    fn transition(&self, from: usize, to: usize, x: &[f64]) -> Result<CMat> {
        let m = (Self::lift(to, x) - Self::lift(from, x)).round();
        let v = x[3].atan2(x[2]) / (2.0 * PI);
        Ok(scalar_matrix((I * 2.0 * PI * self.k as f64 * m * v).exp()))
    }
}

/// Tautological line in the two monopole gauges: chart 0 is regular away
/// from the south pole, chart 1 away from the north pole.
struct MonopoleGauge;

impl MonopoleGauge {
    fn sign(chart: usize) -> f64 {
        if chart == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl GaugeField for MonopoleGauge {
    fn rank(&self) -> usize {
        1
    }
    fn charts(&self) -> usize {
        2
    }
    fn quality(&self, chart: usize, x: &[f64]) -> f64 {
        (1.0 + Self::sign(chart) * x[2]) / 2.0
    }
    fn potential(&self, chart: usize, x: &[f64], v: &[f64]) -> CMat {
        let s = Self::sign(chart);
        scalar_matrix(I * s * (x[0] * v[1] - x[1] * v[0]) / (2.0 * (1.0 + s * x[2])))
    }
    fn potential_derivative(&self, chart: usize, x: &[f64], w: &[f64], v: &[f64]) -> Option<CMat> {
        let s = Self::sign(chart);
        let den = 1.0 + s * x[2];
        let num = x[0] * v[1] - x[1] * v[0];
        let dnum = w[0] * v[1] - w[1] * v[0];
        Some(scalar_matrix(
            I * s * (dnum / (2.0 * den) - num * s * w[2] / (2.0 * den * den)),
        ))
    }
    fn transition(&self, from: usize, to: usize, x: &[f64]) -> Result<CMat> {
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if rho < 1e-12 {
            return Err(Error::Geometry("monopole gauges do not overlap at a pole".into()));
        }
        let g = C64::new(x[0], x[1]) / rho;
        Ok(scalar_matrix(match (from, to) {
            (0, 1) => g,
            (1, 0) => g.conj(),
            _ => c(1.0),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_resolve() {
        for id in [
            "flat-r2",
            "flat-r2:r=3",
            "flat-s2",
            "t2-flat",
            "t2-flux:k=2",
            "t2-flux:-1",
            "r2-su2-poly",
            "cp1-tautological",
            "cp1-dual",
            "cp1-whitney",
            "cp1-tautological-gauge",
        ] {
            bundle(id).unwrap();
        }
        assert_eq!(bundle("flat-r2:r=3").unwrap().rank(), 3);
        assert!(matches!(bundle("cp2"), Err(Error::UnknownId(_))));
        assert!(matches!(bundle("t2-flux"), Err(Error::Parse { .. })));
        assert!(matches!(bundle("t2-flux:k=x"), Err(Error::Parse { .. })));
    }

    #[test]
    fn projectors_are_hermitian_idempotent() {
        let x = Surface::sphere_point(0.3, 1.9);
        for (f, r) in [
            (Box::new(BlochProjector::taut()) as Box<dyn ProjectorField>, 1.0),
            (Box::new(BlochProjector::dual()), 1.0),
            (Box::new(WhitneySum), 2.0),
        ] {
            let p = f.projector(&x);
            assert!(linalg::max_abs_diff(&(&p * &p), &p) < 1e-14);
            assert!(linalg::max_abs_diff(&p.adjoint(), &p) < 1e-14);
            assert!((linalg::trace(&p) - c(r)).norm() < 1e-14);
        }
    }

    #[test]
    fn torus_charts_cover() {
        let b = bundle("t2-flux:k=1").unwrap();
        for u in [0.0, 0.24, 0.25, 0.5, 0.74, 0.76, 0.99] {
            let x = Surface::torus_point(u, 0.1);
            let q = (0..2).map(|ch| b.chart_quality(ch, &x).unwrap()).fold(0.0, f64::max);
            assert!(q >= 0.25 - 1e-12);
        }
    }
}
