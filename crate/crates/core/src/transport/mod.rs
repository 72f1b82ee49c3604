//! Parallel transport and holonomy along discretized loops.

pub mod ode;
pub mod path;
pub mod spec;

pub use ode::{Method, StepPlan};
pub use path::{DiscretizedLoop, FieldFn, LoopCurve};
pub use spec::{parse_fields, parse_loop};

use crate::error::{Error, Result};
use crate::geometry::BundleConnection;
use crate::grassmann::GrassmannElement;
use crate::linalg::{self, distance, CMat};

/// Endpoints closer than this are considered equal when gluing.
pub const GLUE_TOL: f64 = 1e-9;

/// Parallel transport from a chart at `start` to a chart at `end`.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    pub matrix: CMat,
    pub from_chart: usize,
    pub to_chart: usize,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

/// Solution of `U′ = −A(γ̇) U`, `U(0) = I` at the step nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportResult {
    u: Vec<CMat>,
    plan: StepPlan,
    method: Method,
    loop_len: usize,
    start: Vec<f64>,
    end: Vec<f64>,
}

impl TransportResult {
    /// `U` at node `k`, in the chart [`TransportResult::chart`] of that node.
    pub fn u(&self, k: usize) -> Result<&CMat> {
        self.u.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.u.len(),
        })
    }

    pub fn nodes(&self) -> &[CMat] {
        &self.u
    }

    pub fn chart(&self, k: usize) -> usize {
        self.plan.charts[k]
    }

    pub fn plan(&self) -> &StepPlan {
        &self.plan
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn steps(&self) -> usize {
        self.plan.steps
    }

    /// Loop sample index of node `k`.
    pub fn sample(&self, k: usize) -> usize {
        self.plan.node(k) % self.loop_len
    }

    /// Parameter time of node `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.plan.node(k) as f64 / self.loop_len as f64
    }

    pub fn last(&self) -> &CMat {
        self.u.last().expect("at least one node")
    }

    pub fn propagator(&self) -> Propagator {
        Propagator {
            matrix: self.last().clone(),
            from_chart: self.plan.charts[0],
            to_chart: *self.plan.charts.last().expect("at least one node"),
            start: self.start.clone(),
            end: self.end.clone(),
        }
    }

    /// Transport around the closed loop, as an endomorphism of the fibre at
    /// the base point in the starting chart.
    pub fn holonomy(&self, b: &BundleConnection) -> Result<CMat> {
        if self.plan.end - self.plan.start != self.loop_len {
            return Err(Error::Dimension("transport does not close the loop".into()));
        }
        let p = self.propagator();
        let back = b.transition(p.to_chart, p.from_chart, &p.start)?;
        Ok(back * p.matrix)
    }
}

/// `U′ = −A(γ̇) U` around the whole loop.
pub fn parallel_transport(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    steps: usize,
    method: Method,
) -> Result<TransportResult> {
    transport_segment(b, l, 0, l.len(), steps, method)
}

/// Transport along the samples `start..=end` (indices taken modulo `N`).
pub fn transport_segment(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    start: usize,
    end: usize,
    steps: usize,
    method: Method,
) -> Result<TransportResult> {
    check_loop(b, l)?;
    let plan = StepPlan::new(b, l, start, end, steps)?;
    let r = b.rank();
    let coeffs = ode::step_coefficients(&plan, |chart, i| {
        let a = b.connection(chart, l.point(i), l.velocity(i))?;
        Ok(GrassmannElement::from_body(0, &(-a)))
    })?;
    let transitions = ode::chart_transitions(b, l, &plan)?;
    let u = ode::propagate(
        &plan,
        l.len(),
        method,
        &coeffs,
        &transitions,
        GrassmannElement::identity(0, r),
    )
    .into_iter()
    .map(|g| g.body())
    .collect::<Vec<_>>();
    if u.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("transport diverged".into()));
    }
    Ok(TransportResult {
        u,
        plan,
        method,
        loop_len: l.len(),
        start: l.point(start).to_vec(),
        end: l.point(end).to_vec(),
    })
}

pub(crate) fn check_loop(b: &BundleConnection, l: &DiscretizedLoop) -> Result<()> {
    if b.surface() != l.surface() {
        return Err(Error::Geometry(format!(
            "bundle lives on {}, loop on {}",
            b.surface().name(),
            l.surface().name()
        )));
    }
    Ok(())
}

/// Holonomy `U(1)` around the loop, in the chart of the base point.
pub fn holonomy(b: &BundleConnection, l: &DiscretizedLoop, steps: usize, method: Method) -> Result<CMat> {
    parallel_transport(b, l, steps, method)?.holonomy(b)
}

/// `F(t_k)(X, Y) = U(t_k)⁻¹ R(X, Y) U(t_k)` at node `k`.
pub fn pulled_back_curvature(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    result: &TransportResult,
    k: usize,
    x: &[f64],
    y: &[f64],
) -> Result<CMat> {
    let u = result.u(k)?;
    let point = l.point(result.sample(k));
    let r = b.curvature_in_chart(result.chart(k), point, x, y)?;
    let ui = linalg::inverse(u)?;
    Ok(ui * r * u)
}

/// Composite `P₂ ∘ P₁`, inserting the chart change at the junction.
pub fn glue(b: &BundleConnection, first: &Propagator, second: &Propagator) -> Result<Propagator> {
    let gap = distance(&first.end, &second.start);
    if gap > GLUE_TOL {
        return Err(Error::EndpointMismatch(gap));
    }
    let t = b.transition(first.to_chart, second.from_chart, &first.end)?;
    Ok(Propagator {
        matrix: &second.matrix * t * &first.matrix,
        from_chart: first.from_chart,
        to_chart: second.to_chart,
        start: first.start.clone(),
        end: second.end.clone(),
    })
}

/// Transport along `r1` followed by `r2`.
pub fn glue_transport(b: &BundleConnection, r1: &TransportResult, r2: &TransportResult) -> Result<Propagator> {
    glue(b, &r1.propagator(), &r2.propagator())
}

/// Express a propagator with respect to other charts at its endpoints.
pub fn rechart(b: &BundleConnection, p: &Propagator, from_chart: usize, to_chart: usize) -> Result<Propagator> {
    let pre = b.transition(from_chart, p.from_chart, &p.start)?;
    let post = b.transition(p.to_chart, to_chart, &p.end)?;
    Ok(Propagator {
        matrix: post * &p.matrix * pre,
        from_chart,
        to_chart,
        start: p.start.clone(),
        end: p.end.clone(),
    })
}
