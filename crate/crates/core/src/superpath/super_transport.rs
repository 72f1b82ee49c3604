//! Super parallel transport along `slev` and `lev∘p`.

use std::f64::consts::PI;

use super::pullback::{connection_hat, connection_tilde, levp_pair_connection, slev_pair_connection, theta_times};
use crate::error::{Error, Result};
use crate::geometry::{curvature_hat, BundleConnection};
use crate::grassmann::GrassmannElement;
use crate::linalg::{c, distance, CMat, I};
use crate::transport::ode::{self, Method, StepPlan};
use crate::transport::{check_loop, transport_segment, DiscretizedLoop, GLUE_TOL};

/// Which super loop the transport runs along.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Slev,
    Levp,
}

/// `SP(t, θ) = SP₀(t) + θ SP₁(t)` at the step nodes, each node expressed in
/// its plan chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperTransport {
    sp0: Vec<GrassmannElement>,
    sp1: Vec<GrassmannElement>,
    plan: StepPlan,
    method: Method,
    route: Route,
    loop_len: usize,
    start: Vec<f64>,
    end: Vec<f64>,
}

/// `SP₀` from one chart at `start` to a chart at `end`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPropagator {
    pub element: GrassmannElement,
    pub from_chart: usize,
    pub to_chart: usize,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl SuperTransport {
    pub fn sp0(&self, k: usize) -> &GrassmannElement {
        &self.sp0[k]
    }

    pub fn sp1(&self, k: usize) -> &GrassmannElement {
        &self.sp1[k]
    }

    pub fn sp0_nodes(&self) -> &[GrassmannElement] {
        &self.sp0
    }

    pub fn sp1_nodes(&self) -> &[GrassmannElement] {
        &self.sp1
    }

    /// Number of odd generators `p`.
    pub fn generators(&self) -> usize {
        self.sp0[0].generators()
    }

    pub fn plan(&self) -> &StepPlan {
        &self.plan
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn steps(&self) -> usize {
        self.plan.steps
    }

    pub fn chart(&self, k: usize) -> usize {
        self.plan.charts[k]
    }

    /// Loop sample index of node `k`.
    pub fn sample(&self, k: usize) -> usize {
        self.plan.node(k) % self.loop_len
    }

    pub fn last0(&self) -> &GrassmannElement {
        self.sp0.last().expect("at least one node")
    }

    /// `SP₀ + θ SP₁` at node `k` in `Λ[θ, η]`.
    pub fn with_theta(&self, k: usize) -> GrassmannElement {
        super::pullback::with_theta(&self.sp0[k], &self.sp1[k])
    }

    pub fn propagator(&self) -> SuperPropagator {
        SuperPropagator {
            element: self.last0().clone(),
            from_chart: self.plan.charts[0],
            to_chart: *self.plan.charts.last().expect("at least one node"),
            start: self.start.clone(),
            end: self.end.clone(),
        }
    }

    /// `SP₀(1)` around the closed loop, returned to the starting chart.
    pub fn closed(&self, b: &BundleConnection) -> Result<GrassmannElement> {
        if self.plan.end - self.plan.start != self.loop_len {
            return Err(Error::Dimension("super transport does not close the loop".into()));
        }
        let p = self.propagator();
        let back = b.transition(p.to_chart, p.from_chart, &p.start)?;
        Ok(p.element.left_mul_matrix(&back))
    }
}

/// `−Ã − (i/2π)R̂` at sample `i` in `chart`.
fn slev_generator(b: &BundleConnection, l: &DiscretizedLoop, chart: usize, i: usize) -> Result<GrassmannElement> {
    let p = l.field_count();
    let a = connection_tilde(b, chart, l, i)?;
    let r = curvature_hat(b, chart, l.point(i), &l.fields_at(i))?;
    Ok(GrassmannElement::from_body(p, &(-a)).add_scaled(-I / (2.0 * PI), &r))
}

/// Bosonic super transport along `slev` over the whole loop.
pub fn sp_slev(b: &BundleConnection, l: &DiscretizedLoop, steps: usize, method: Method) -> Result<SuperTransport> {
    sp_slev_segment(b, l, 0, l.len(), steps, method)
}

/// Bosonic super transport along `slev` over the samples `start..=end`.
pub fn sp_slev_segment(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    start: usize,
    end: usize,
    steps: usize,
    method: Method,
) -> Result<SuperTransport> {
    check_loop(b, l)?;
    let plan = StepPlan::new(b, l, start, end, steps)?;
    let p = l.field_count();
    let coeffs = ode::step_coefficients(&plan, |chart, i| slev_generator(b, l, chart, i))?;
    let transitions = ode::chart_transitions(b, l, &plan)?;
    let sp0 = ode::propagate(
        &plan,
        l.len(),
        method,
        &coeffs,
        &transitions,
        GrassmannElement::identity(p, b.rank()),
    );
    if sp0.iter().any(|g| !g.max_abs().is_finite()) {
        return Err(Error::Numeric("super transport diverged".into()));
    }
    let sp1 = sp0
        .iter()
        .enumerate()
        .map(|(k, s)| Ok(&-&connection_hat(b, plan.charts[k], l, plan.node(k))? * s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuperTransport {
        sp0,
        sp1,
        start: l.point(start).to_vec(),
        end: l.point(end).to_vec(),
        plan,
        method,
        route: Route::Slev,
        loop_len: l.len(),
    })
}

/// Super transport along `lev∘p`: ordinary transport with `SP₁ = 0`.
pub fn sp_levp(b: &BundleConnection, l: &DiscretizedLoop, steps: usize, method: Method) -> Result<SuperTransport> {
    let p = l.field_count();
    let t = transport_segment(b, l, 0, l.len(), steps, method)?;
    let sp0: Vec<GrassmannElement> = t.nodes().iter().map(|u| GrassmannElement::from_body(p, u)).collect();
    let sp1 = vec![GrassmannElement::zero(p, b.rank()); sp0.len()];
    Ok(SuperTransport {
        sp0,
        sp1,
        start: l.point(0).to_vec(),
        end: l.point(l.len()).to_vec(),
        plan: t.plan().clone(),
        method,
        route: Route::Levp,
        loop_len: l.len(),
    })
}

/// Composite of two super propagators, inserting the chart change at the
/// junction.
pub fn glue_super(b: &BundleConnection, first: &SuperPropagator, second: &SuperPropagator) -> Result<SuperPropagator> {
    let gap = distance(&first.end, &second.start);
    if gap > GLUE_TOL {
        return Err(Error::EndpointMismatch(gap));
    }
    let t = b.transition(first.to_chart, second.from_chart, &first.end)?;
    Ok(SuperPropagator {
        element: second.element.try_mul(&first.element.left_mul_matrix(&t))?,
        from_chart: first.from_chart,
        to_chart: second.to_chart,
        start: first.start.clone(),
        end: second.end.clone(),
    })
}

/// Express a super propagator with respect to other endpoint charts.
pub fn rechart_super(
    b: &BundleConnection,
    p: &SuperPropagator,
    from_chart: usize,
    to_chart: usize,
) -> Result<SuperPropagator> {
    let pre = b.transition(from_chart, p.from_chart, &p.start)?;
    let post = b.transition(p.to_chart, to_chart, &p.end)?;
    Ok(SuperPropagator {
        element: p.element.right_mul_matrix(&pre).left_mul_matrix(&post),
        from_chart,
        to_chart,
        start: p.start.clone(),
        end: p.end.clone(),
    })
}

/// Fourth-order central difference of node values at interior node `k`,
/// with neighbours carried into the chart of node `k`.
fn node_derivative(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    st: &SuperTransport,
    k: usize,
) -> Result<GrassmannElement> {
    let ck = st.chart(k);
    let at = |j: usize| -> Result<GrassmannElement> {
        let v = &st.sp0[j];
        if st.chart(j) == ck {
            Ok(v.clone())
        } else {
            let t = b.transition(st.chart(j), ck, l.point(st.plan.node(j)))?;
            Ok(v.left_mul_matrix(&t))
        }
    };
    let h = st.plan.h(l.len());
    let d1 = &at(k + 1)? - &at(k - 1)?;
    let d2 = &at(k + 2)? - &at(k - 2)?;
    Ok(d1.scale(c(8.0 / (12.0 * h))).add_scaled(c(-1.0 / (12.0 * h)), &d2))
}

fn interior(st: &SuperTransport) -> Result<std::ops::RangeInclusive<usize>> {
    if st.steps() < 4 {
        return Err(Error::Dimension("residuals need at least 4 steps".into()));
    }
    Ok(2..=st.steps() - 2)
}

/// `(1/2π)∂_θ SP − iθ∂_t SP + P·SP` at node `k`, where `P` is the paired
/// connection.
fn dcs_residual_at(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    st: &SuperTransport,
    pair: &GrassmannElement,
    k: usize,
) -> Result<GrassmannElement> {
    let g = st.generators() + 1;
    let sp1 = st.sp1[k].lift(g, 1);
    let d0 = theta_times(&node_derivative(b, l, st, k)?);
    let sp = st.with_theta(k);
    let mut r = sp1.scale(c(1.0 / (2.0 * PI)));
    r.add_scaled_assign(-I, &d0);
    r += &pair.try_mul(&sp)?;
    Ok(r)
}

/// Largest coefficient of `(slev*∇)_{D_cs} SP` over the interior nodes.
pub fn dcs_residual(b: &BundleConnection, l: &DiscretizedLoop, st: &SuperTransport) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in interior(st)? {
        let i = st.sample(k);
        let pair = match st.route {
            Route::Slev => slev_pair_connection(b, st.chart(k), l, i)?,
            Route::Levp => levp_pair_connection(b, st.chart(k), l, i)?,
        };
        worst = worst.max(dcs_residual_at(b, l, st, &pair, k)?.max_abs());
    }
    Ok(worst)
}

/// Largest coefficient of `((lev∘p)*∇)_{D_cs} SP` for the `lev∘p` transport.
pub fn levp_residual(b: &BundleConnection, l: &DiscretizedLoop, st: &SuperTransport) -> Result<f64> {
    if st.route != Route::Levp {
        return Err(Error::Dimension("expected a lev∘p transport".into()));
    }
    dcs_residual(b, l, st)
}

/// Residuals of the two trivialized equations
///
/// `d/dt[U⁻¹S] + U⁻¹(cR̂)U·[U⁻¹S] = 0` and `d/dt[S⁻¹U] − [S⁻¹U]·U⁻¹(cR̂)U = 0`
///
/// with `S = SP₀(slev)`, `U = SP₀(lev∘p)` and `c = i/2π`.
pub fn combined_residual(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    slev: &SuperTransport,
    levp: &SuperTransport,
) -> Result<(f64, f64)> {
    if slev.plan != levp.plan || slev.route != Route::Slev || levp.route != Route::Levp {
        return Err(Error::Dimension("transports are not on the same grid".into()));
    }
    let n = slev.sp0.len();
    let mut z = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        let ui = levp.sp0[k].inverse()?;
        let si = slev.sp0[k].inverse()?;
        z.push(ui.try_mul(&slev.sp0[k])?);
        w.push(si.try_mul(&levp.sp0[k])?);
    }
    let h = slev.plan.h(l.len());
    let fd = |v: &[GrassmannElement], k: usize| {
        let d1 = &v[k + 1] - &v[k - 1];
        let d2 = &v[k + 2] - &v[k - 2];
        d1.scale(c(8.0 / (12.0 * h))).add_scaled(c(-1.0 / (12.0 * h)), &d2)
    };
    let (mut res1, mut res2): (f64, f64) = (0.0, 0.0);
    for k in interior(slev)? {
        let chart = slev.chart(k);
        let i = slev.sample(k);
        let u = levp.sp0[k].body();
        let ui = crate::linalg::inverse(&u)?;
        let r = curvature_hat(b, chart, l.point(i), &l.fields_at(i))?;
        let f = r.left_mul_matrix(&ui).right_mul_matrix(&u).scale(I / (2.0 * PI));
        let r1 = &fd(&z, k) + &f.try_mul(&z[k])?;
        let r2 = &fd(&w, k) - &w[k].try_mul(&f)?;
        res1 = res1.max(r1.max_abs());
        res2 = res2.max(r2.max_abs());
    }
    Ok((res1, res2))
}

/// Computes both transports on one grid and returns [`combined_residual`].
pub fn combined_ode_residual(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    steps: usize,
    method: Method,
) -> Result<(f64, f64)> {
    let s = sp_slev(b, l, steps, method)?;
    let u = sp_levp(b, l, steps, method)?;
    combined_residual(b, l, &s, &u)
}

/// Body of `SP₀`, which carries no Grassmann soul.
pub fn body_nodes(st: &SuperTransport) -> Vec<CMat> {
    st.sp0.iter().map(|g| g.body()).collect()
}
