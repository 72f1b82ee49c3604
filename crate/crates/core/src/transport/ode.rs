//! Fixed-step integrators for left-linear ODEs `Y′ = G(t) Y` along a loop,
//! with chart switching at step boundaries.

use rayon::prelude::*;

use super::path::DiscretizedLoop;
use crate::error::{Error, Result};
use crate::geometry::BundleConnection;
use crate::grassmann::GrassmannElement;
use crate::linalg::{c, CMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta.
    Rk4,
    /// Explicit midpoint rule, second order.
    Midpoint,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Midpoint => "midpoint",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "midpoint" => Ok(Method::Midpoint),
            _ => Err(Error::parse(s, "expected `rk4` or `midpoint`")),
        }
    }
}

/// Current chart is kept while its quality is at least this fraction of
/// the best available.
const CHART_SWITCH_RATIO: f64 = 0.5;

/// Step layout over the samples `start..=end` of a loop.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPlan {
    pub start: usize,
    pub end: usize,
    pub steps: usize,
    /// Samples per step.
    pub stride: usize,
    /// Chart used on step `k` and for the node value at node `k`.
    pub charts: Vec<usize>,
}

impl StepPlan {
    pub fn new(b: &BundleConnection, l: &DiscretizedLoop, start: usize, end: usize, steps: usize) -> Result<Self> {
        if end < start {
            return Err(Error::Dimension(format!("segment {start}..{end} is reversed")));
        }
        let span = end - start;
        if span == 0 {
            let chart = b.best_chart(l.point(start))?;
            return Ok(StepPlan {
                start,
                end,
                steps: 0,
                stride: 0,
                charts: vec![chart],
            });
        }
        if steps == 0 || !span.is_multiple_of(steps) || !(span / steps).is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "{steps} steps do not divide {span} samples into even strides"
            )));
        }
        let stride = span / steps;
        let mut charts = Vec::with_capacity(steps + 1);
        charts.push(b.best_chart(l.point(start))?);
        for k in 1..=steps {
            let x = l.point(start + k * stride);
            let current = charts[k - 1];
            let best = b.best_chart(x)?;
            let qc = b.chart_quality(current, x)?;
            let qb = b.chart_quality(best, x)?;
            charts.push(if qc < CHART_SWITCH_RATIO * qb { best } else { current });
        }
        Ok(StepPlan {
            start,
            end,
            steps,
            stride,
            charts,
        })
    }

    /// Sample index of node `k`.
    pub fn node(&self, k: usize) -> usize {
        self.start + k * self.stride
    }

    /// Parameter step `h = stride / N`.
    pub fn h(&self, n: usize) -> f64 {
        self.stride as f64 / n as f64
    }
}

/// Coefficients at the left, middle and right sample of one step.
pub type StepCoefficients<T> = [T; 3];

/// Evaluate `f(chart, sample)` at the three samples of every step, in parallel.
pub fn step_coefficients<T, F>(plan: &StepPlan, f: F) -> Result<Vec<StepCoefficients<T>>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync,
{
    (0..plan.steps)
        .into_par_iter()
        .map(|k| {
            let chart = plan.charts[k];
            let i = plan.node(k);
            Ok([f(chart, i)?, f(chart, i + plan.stride / 2)?, f(chart, i + plan.stride)?])
        })
        .collect()
}

/// Transition matrices to apply before step `k`, where the chart changes.
pub fn chart_transitions(b: &BundleConnection, l: &DiscretizedLoop, plan: &StepPlan) -> Result<Vec<Option<CMat>>> {
    (0..=plan.steps)
        .map(|k| {
            if k == 0 || plan.charts[k] == plan.charts[k - 1] {
                Ok(None)
            } else {
                b.transition(plan.charts[k - 1], plan.charts[k], l.point(plan.node(k)))
                    .map(Some)
            }
        })
        .collect()
}

/// Solve `Y′ = G(t) Y` from `y0`, returning `Y` at every node.
pub fn propagate(
    plan: &StepPlan,
    n: usize,
    method: Method,
    coeffs: &[StepCoefficients<GrassmannElement>],
    transitions: &[Option<CMat>],
    y0: GrassmannElement,
) -> Vec<GrassmannElement> {
    let h = plan.h(n);
    let mut out = Vec::with_capacity(plan.steps + 1);
    out.push(y0);
    for k in 0..plan.steps {
        let y = out[k].clone();
        let [g0, gm, g1] = &coeffs[k];
        let next = match method {
            Method::Rk4 => {
                let k1 = g0 * &y;
                let k2 = gm * &y.add_scaled(c(h / 2.0), &k1);
                let k3 = gm * &y.add_scaled(c(h / 2.0), &k2);
                let k4 = g1 * &y.add_scaled(c(h), &k3);
                let mut s = k1;
                s.add_scaled_assign(c(2.0), &k2);
                s.add_scaled_assign(c(2.0), &k3);
                s.add_scaled_assign(c(1.0), &k4);
                y.add_scaled(c(h / 6.0), &s)
            }
            Method::Midpoint => {
                let k1 = g0 * &y;
                let k2 = gm * &y.add_scaled(c(h / 2.0), &k1);
                y.add_scaled(c(h), &k2)
            }
        };
        out.push(match &transitions[k + 1] {
            Some(t) => next.left_mul_matrix(t),
            None => next,
        });
    }
    out
}
