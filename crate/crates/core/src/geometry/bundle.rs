//! Complex vector bundles with connection, in a projector model and a gauge
//! potential model.
//!
//! Both models are described by an atlas of charts. Inside a chart a section
//! is a coordinate vector `c`, the connection is a matrix valued 1-form `A`
//! with `∇c = dc + A c`, and overlapping charts are related by
//! `c_to = G c_from` where `G = transition(from, to, x)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::SymmetricEigen;

use super::surface::Surface;
use crate::error::{Error, Result};
use crate::linalg::{self, c, commutator, CMat, C64};

/// Default finite-difference step for derivatives of `P` and `A`.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum DerivativeMode {
    /// Use the closed-form derivative supplied by the field, falling back to
    /// finite differences when none is available.
    #[default]
    Analytic,
    /// Fourth-order central differences with the given step.
    FiniteDifference { step: f64 },
}

/// A Hermitian projector field `P(x)` on `ℂᴺ` whose image is the fibre.
pub trait ProjectorField: Send + Sync {
    /// `N`
    fn ambient_rank(&self) -> usize;
    /// Fibre rank `r`.
    fn rank(&self) -> usize;
    fn projector(&self, x: &[f64]) -> CMat;
    /// Directional derivative `∂_v P(x)`, if known in closed form.
    fn derivative(&self, _x: &[f64], _v: &[f64]) -> Option<CMat> {
        None
    }
}

/// A connection given by matrix potentials over an atlas of charts.
///
/// Potentials are ambient 1-forms: `potential(chart, x, v)` is linear in
/// `v ∈ ℝⁿ` and defined on a neighbourhood of the surface.
pub trait GaugeField: Send + Sync {
    fn rank(&self) -> usize;
    fn charts(&self) -> usize {
        1
    }
    /// Larger is better; non-positive means the chart does not cover `x`.
    fn quality(&self, _chart: usize, _x: &[f64]) -> f64 {
        1.0
    }
    fn potential(&self, chart: usize, x: &[f64], v: &[f64]) -> CMat;
    /// `D_w (A(·)(v))` at `x`, if known in closed form.
    fn potential_derivative(&self, _chart: usize, _x: &[f64], _w: &[f64], _v: &[f64]) -> Option<CMat> {
        None
    }
    /// `G` with `c_to = G c_from`.
    fn transition(&self, from: usize, to: usize, _x: &[f64]) -> Result<CMat> {
        if from == to {
            Ok(linalg::identity(self.rank()))
        } else {
            Err(Error::Unsupported(format!("no transition {from} -> {to}")))
        }
    }
}

#[derive(Clone)]
pub enum BundleModel {
    Projector(Arc<dyn ProjectorField>),
    Gauge(Arc<dyn GaugeField>),
}

impl BundleModel {
    pub fn tag(&self) -> &'static str {
        match self {
            BundleModel::Projector(_) => "projector",
            BundleModel::Gauge(_) => "gauge",
        }
    }
}

/// A rank `r` bundle with connection over one of the built-in surfaces.
#[derive(Clone)]
pub struct BundleConnection {
    name: String,
    surface: Surface,
    model: BundleModel,
    mode: DerivativeMode,
    seeds: Vec<Vec<usize>>,
}

impl fmt::Debug for BundleConnection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BundleConnection")
            .field("name", &self.name)
            .field("surface", &self.surface)
            .field("model", &self.model.tag())
            .field("rank", &self.rank())
            .field("mode", &self.mode)
            .finish()
    }
}

/// Orthonormal frame of a projector bundle in one chart, with the spectral
/// data of its Gram matrix.
struct Frame {
    p: CMat,
    /// `P S`, the projected seed vectors.
    ps: CMat,
    seed: Vec<usize>,
    /// Eigenvalues and eigenvectors of `G = S* P S`.
    lambda: Vec<f64>,
    v: CMat,
    g_inv_sqrt: CMat,
    g_sqrt: CMat,
    /// `F = P S G^{-1/2}`
    f: CMat,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Fourth-order central difference of `f` at zero.
pub(crate) fn central_difference<F>(h: f64, f: F) -> Result<CMat>
where
    F: Fn(f64) -> Result<CMat>,
{
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let p2 = f(2.0 * h)?;
    let m2 = f(-2.0 * h)?;
    Ok(((&p1 - &m1) * c(8.0) - (&p2 - &m2)) * c(1.0 / (12.0 * h)))
}

impl BundleConnection {
    pub fn projector(name: &str, surface: Surface, field: Arc<dyn ProjectorField>) -> Self {
        let seeds = combinations(field.ambient_rank(), field.rank());
        BundleConnection {
            name: name.to_string(),
            surface,
            model: BundleModel::Projector(field),
            mode: DerivativeMode::default(),
            seeds,
        }
    }

    pub fn gauge(name: &str, surface: Surface, field: Arc<dyn GaugeField>) -> Self {
        BundleConnection {
            name: name.to_string(),
            surface,
            model: BundleModel::Gauge(field),
            mode: DerivativeMode::default(),
            seeds: Vec::new(),
        }
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn model(&self) -> &BundleModel {
        &self.model
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn rank(&self) -> usize {
        match &self.model {
            BundleModel::Projector(p) => p.rank(),
            BundleModel::Gauge(g) => g.rank(),
        }
    }

    pub fn chart_count(&self) -> usize {
        match &self.model {
            BundleModel::Projector(_) => self.seeds.len(),
            BundleModel::Gauge(g) => g.charts(),
        }
    }

    fn check_chart(&self, chart: usize) -> Result<()> {
        let len = self.chart_count();
        if chart >= len {
            return Err(Error::IndexOutOfRange { index: chart, len });
        }
        Ok(())
    }

    fn check_tangent(&self, v: &[f64]) -> Result<()> {
        let n = self.surface.ambient_dim();
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "tangent vector of length {} in R^{n}",
                v.len()
            )));
        }
        Ok(())
    }

    /// How well `chart` covers `x`; the chart is usable where this is positive.
    pub fn chart_quality(&self, chart: usize, x: &[f64]) -> Result<f64> {
        self.check_chart(chart)?;
        match &self.model {
            BundleModel::Projector(field) => {
                let p = field.projector(x);
                let seed = &self.seeds[chart];
                let g = CMat::from_fn(seed.len(), seed.len(), |i, j| p[(seed[i], seed[j])]);
                let eig = SymmetricEigen::new(g);
                Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
            }
            BundleModel::Gauge(g) => Ok(g.quality(chart, x)),
        }
    }

    /// The chart of highest quality at `x` (lowest index on ties).
    pub fn best_chart(&self, x: &[f64]) -> Result<usize> {
        self.surface.check_point(x)?;
        let mut best = (0, f64::NEG_INFINITY);
        for chart in 0..self.chart_count() {
            let q = self.chart_quality(chart, x)?;
            if q > best.1 {
                best = (chart, q);
            }
        }
        if best.1 <= 0.0 {
            return Err(Error::Geometry("no chart covers the point".into()));
        }
        Ok(best.0)
    }

    fn projector_field(&self) -> &dyn ProjectorField {
        match &self.model {
            BundleModel::Projector(p) => p.as_ref(),
            BundleModel::Gauge(_) => unreachable!(),
        }
    }

    fn frame(&self, chart: usize, x: &[f64]) -> Result<Frame> {
        let field = self.projector_field();
        let p = field.projector(x);
        let seed = self.seeds[chart].clone();
        let n = p.nrows();
        let r = seed.len();
        let ps = CMat::from_fn(n, r, |i, j| p[(i, seed[j])]);
        let g = CMat::from_fn(r, r, |i, j| p[(seed[i], seed[j])]);
        let eig = SymmetricEigen::new(g);
        let lambda: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        if lambda.iter().any(|&l| l <= 1e-12) {
            return Err(Error::Geometry(format!(
                "singular frame in chart {chart} (min eigenvalue {:e})",
                lambda.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        let v = eig.eigenvectors;
        let diag = |f: &dyn Fn(f64) -> f64| {
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(r, lambda.iter().map(|&l| c(f(l)))));
            &v * d * v.adjoint()
        };
        let g_inv_sqrt = diag(&|l| 1.0 / l.sqrt());
        let g_sqrt = diag(&|l| l.sqrt());
        let f = &ps * &g_inv_sqrt;
        Ok(Frame {
            p,
            ps,
            seed,
            lambda,
            v,
            g_inv_sqrt,
            g_sqrt,
            f,
        })
    }

    /// Orthonormal frame `F(x)` (an `N × r` matrix) of a projector bundle.
    pub fn frame_matrix(&self, chart: usize, x: &[f64]) -> Result<CMat> {
        self.check_chart(chart)?;
        match &self.model {
            BundleModel::Projector(_) => Ok(self.frame(chart, x)?.f),
            BundleModel::Gauge(_) => Err(Error::Unsupported("frames exist only in the projector model".into())),
        }
    }

    /// `∂_v P(x)` for tangent `v`.
    pub fn projector_derivative(&self, x: &[f64], v: &[f64]) -> Result<CMat> {
        let field = self.projector_field();
        if self.mode == DerivativeMode::Analytic {
            if let Some(d) = field.derivative(x, v) {
                return Ok(d);
            }
        }
        let h = match self.mode {
            DerivativeMode::FiniteDifference { step } => step,
            DerivativeMode::Analytic => DEFAULT_FD_STEP,
        };
        let surface = self.surface;
        central_difference(h, |s| {
            let y = surface.retract(&linalg::axpy(x, s, v))?;
            Ok(field.projector(&y))
        })
    }

    fn potential_derivative(&self, chart: usize, x: &[f64], w: &[f64], v: &[f64]) -> Result<CMat> {
        let BundleModel::Gauge(field) = &self.model else {
            unreachable!()
        };
        if self.mode == DerivativeMode::Analytic {
            if let Some(d) = field.potential_derivative(chart, x, w, v) {
                return Ok(d);
            }
        }
        let h = match self.mode {
            DerivativeMode::FiniteDifference { step } => step,
            DerivativeMode::Analytic => DEFAULT_FD_STEP,
        };
        central_difference(h, |s| Ok(field.potential(chart, &linalg::axpy(x, s, w), v)))
    }

    /// Connection matrix `A(v)` at `x` in `chart`.
    pub fn connection(&self, chart: usize, x: &[f64], v: &[f64]) -> Result<CMat> {
        self.check_chart(chart)?;
        self.check_tangent(v)?;
        match &self.model {
            BundleModel::Gauge(g) => Ok(g.potential(chart, x, v)),
            BundleModel::Projector(_) => {
                let fr = self.frame(chart, x)?;
                let dp = self.projector_derivative(x, v)?;
                Ok(self.frame_connection(&fr, &dp))
            }
        }
    }

    /// `A = F*dF` for `F = P S G^{-1/2}`.
    fn frame_connection(&self, fr: &Frame, dp: &CMat) -> CMat {
        let r = fr.seed.len();
        let n = fr.p.nrows();
        let s = CMat::from_fn(n, r, |i, j| if i == fr.seed[j] { c(1.0) } else { c(0.0) });
        let dps = dp * &s;
        let t = fr.ps.adjoint() * &dps;
        let first = &fr.g_inv_sqrt * t * &fr.g_inv_sqrt;
        // derivative of G^{-1/2} through the eigen-divided differences
        let dg = s.adjoint() * &dps;
        let dg_eig = fr.v.adjoint() * dg * &fr.v;
        let dd = CMat::from_fn(r, r, |i, j| {
            let (a, b) = (fr.lambda[i].sqrt(), fr.lambda[j].sqrt());
            dg_eig[(i, j)] * c(-1.0 / (a * b * (a + b)))
        });
        let d_g_inv_sqrt = &fr.v * dd * fr.v.adjoint();
        first + &fr.g_sqrt * d_g_inv_sqrt
    }

    /// Curvature `R(X, Y)` in `chart`.
    pub fn curvature_in_chart(&self, chart: usize, x: &[f64], a: &[f64], b: &[f64]) -> Result<CMat> {
        self.check_chart(chart)?;
        self.check_tangent(a)?;
        self.check_tangent(b)?;
        match &self.model {
            BundleModel::Projector(_) => {
                let fr = self.frame(chart, x)?;
                let da = self.projector_derivative(x, a)?;
                let db = self.projector_derivative(x, b)?;
                Ok(fr.f.adjoint() * commutator(&da, &db) * &fr.f)
            }
            BundleModel::Gauge(g) => {
                let d = self.potential_exterior_derivative(chart, x, a, b)?;
                let aa = g.potential(chart, x, a);
                let ab = g.potential(chart, x, b);
                Ok(d + commutator(&aa, &ab))
            }
        }
    }

    fn potential_exterior_derivative(&self, chart: usize, x: &[f64], a: &[f64], b: &[f64]) -> Result<CMat> {
        Ok(self.potential_derivative(chart, x, a, b)? - self.potential_derivative(chart, x, b, a)?)
    }

    /// `dA(X, Y)` of the connection matrix in `chart`.
    pub fn connection_differential(&self, chart: usize, x: &[f64], a: &[f64], b: &[f64]) -> Result<CMat> {
        match &self.model {
            BundleModel::Gauge(_) => {
                self.check_chart(chart)?;
                self.check_tangent(a)?;
                self.check_tangent(b)?;
                self.potential_exterior_derivative(chart, x, a, b)
            }
            BundleModel::Projector(_) => {
                let r = self.curvature_in_chart(chart, x, a, b)?;
                let aa = self.connection(chart, x, a)?;
                let ab = self.connection(chart, x, b)?;
                Ok(r - commutator(&aa, &ab))
            }
        }
    }

    /// Curvature `R(X, Y)` in the best chart at `x`.
    pub fn curvature(&self, x: &[f64], a: &[f64], b: &[f64]) -> Result<CMat> {
        let chart = self.best_chart(x)?;
        self.curvature_in_chart(chart, x, a, b)
    }

    /// `G` with `c_to = G c_from` at `x`.
    pub fn transition(&self, from: usize, to: usize, x: &[f64]) -> Result<CMat> {
        self.check_chart(from)?;
        self.check_chart(to)?;
        if from == to {
            return Ok(linalg::identity(self.rank()));
        }
        match &self.model {
            BundleModel::Gauge(g) => g.transition(from, to, x),
            BundleModel::Projector(_) => {
                let f_from = self.frame(from, x)?.f;
                let f_to = self.frame(to, x)?.f;
                Ok(f_to.adjoint() * f_from)
            }
        }
    }
}

/// Gauge field with zero potential.
#[derive(Clone, Copy, Debug)]
pub struct FlatGauge {
    pub rank: usize,
}

impl GaugeField for FlatGauge {
    fn rank(&self) -> usize {
        self.rank
    }
    fn potential(&self, _chart: usize, _x: &[f64], _v: &[f64]) -> CMat {
        linalg::zeros(self.rank)
    }
    fn potential_derivative(&self, _: usize, _: &[f64], _: &[f64], _: &[f64]) -> Option<CMat> {
        Some(linalg::zeros(self.rank))
    }
}

/// A single-chart gauge field from closures.
pub struct FnGauge<A, D>
where
    A: Fn(&[f64], &[f64]) -> CMat + Send + Sync,
    D: Fn(&[f64], &[f64], &[f64]) -> CMat + Send + Sync,
{
    pub rank: usize,
    pub potential: A,
    pub derivative: Option<D>,
}

impl<A, D> GaugeField for FnGauge<A, D>
where
    A: Fn(&[f64], &[f64]) -> CMat + Send + Sync,
    D: Fn(&[f64], &[f64], &[f64]) -> CMat + Send + Sync,
{
    fn rank(&self) -> usize {
        self.rank
    }
    fn potential(&self, _chart: usize, x: &[f64], v: &[f64]) -> CMat {
        (self.potential)(x, v)
    }
    fn potential_derivative(&self, _chart: usize, x: &[f64], w: &[f64], v: &[f64]) -> Option<CMat> {
        self.derivative.as_ref().map(|d| d(x, w, v))
    }
}

/// Scalar multiple of the identity, as a convenience for abelian potentials.
pub(crate) fn scalar_matrix(z: C64) -> CMat {
    CMat::from_element(1, 1, z)
}
