//! The Bismut–Chern character of a loop, by the defining ODE and by the
//! loop–deloop factorization.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{curvature_hat, BundleConnection};
use crate::grassmann::{GrassmannElement, IndexSet};
use crate::linalg::{self, c, CMat, C64, I};
use crate::superpath::{sp_levp, sp_slev};
use crate::transport::ode::{self, Method, StepPlan};
use crate::transport::{check_loop, DiscretizedLoop};

/// How a [`BChResult`] was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BChRoute {
    Ode,
    LoopDeloop,
    ConstantLoop,
}

impl BChRoute {
    pub fn name(self) -> &'static str {
        match self {
            BChRoute::Ode => "ode",
            BChRoute::LoopDeloop => "loop-deloop",
            BChRoute::ConstantLoop => "constant-loop",
        }
    }
}

/// Which factor is inverted in the loop–deloop product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// `SP⁻¹(slev) ∘ SP(lev∘p)`
    SlevInverse,
    /// `SP⁻¹(lev∘p) ∘ SP(slev)`
    LevpInverse,
}

/// `BCh` of one loop with `p` fields as a scalar element of `Λ[η₁…η_p]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BChResult {
    pub element: GrassmannElement,
    pub route: BChRoute,
    pub method: Method,
    pub steps: usize,
}

impl BChResult {
    /// Number of fields `p`.
    pub fn fields(&self) -> usize {
        self.element.generators()
    }

    /// The degree-`2k` component evaluated on `X₁, …, X_{2k}`, for
    /// `2k ≤ p`.
    pub fn components(&self) -> Vec<C64> {
        (0..=self.fields() / 2)
            .map(|k| self.element.scalar_coeff(IndexSet::from_bits((1u32 << (2 * k)) - 1)))
            .collect()
    }

    pub fn degree(&self, d: usize) -> C64 {
        if d > self.fields() {
            return c(0.0);
        }
        self.element.scalar_coeff(IndexSet::from_bits((1u32 << d) - 1))
    }

    /// Value on all `p` fields.
    pub fn top(&self) -> C64 {
        self.element.scalar_coeff(IndexSet::full(self.fields()))
    }

    /// Largest difference over the coefficients of one degree.
    pub fn degree_diff(&self, other: &BChResult, d: usize) -> f64 {
        self.element.degree_part(d).max_abs_diff(&other.element.degree_part(d))
    }
}

fn check_fields(l: &DiscretizedLoop) -> Result<()> {
    if l.field_count() > crate::grassmann::MAX_GENERATORS - 1 {
        return Err(Error::Dimension(format!("{} fields is too many", l.field_count())));
    }
    Ok(())
}

/// `BCh` from the defining ODE, trivialized by parallel transport:
/// `U′ = −ÃU`, `h′ = h·(i/2π)U⁻¹R̂U`, result `Tr(U(1) h(1))` with `U(1)` the
/// holonomy.
pub fn bch_ode(b: &BundleConnection, l: &DiscretizedLoop, steps: usize, method: Method) -> Result<BChResult> {
    check_loop(b, l)?;
    check_fields(l)?;
    let plan = StepPlan::new(b, l, 0, l.len(), steps)?;
    let p = l.field_count();
    let k = I / (2.0 * PI);
    let coeffs = ode::step_coefficients(&plan, |chart, i| {
        let a = b.connection(chart, l.point(i), l.velocity(i))?;
        let r = curvature_hat(b, chart, l.point(i), &l.fields_at(i))?.scale(k);
        Ok((-a, r))
    })?;
    let transitions = ode::chart_transitions(b, l, &plan)?;
    let (u, h) = integrate_trivialized(&plan, l.len(), method, &coeffs, &transitions, p, b.rank())?;
    let back = b.transition(*plan.charts.last().expect("nodes"), plan.charts[0], l.point(0))?;
    let hol = back * u;
    Ok(BChResult {
        element: h.left_mul_matrix(&hol).trace(),
        route: BChRoute::Ode,
        method,
        steps,
    })
}

/// `(U, h)` at the last node. `h` is chart independent, so transitions act
/// on `U` alone.
fn integrate_trivialized(
    plan: &StepPlan,
    n: usize,
    method: Method,
    coeffs: &[[(CMat, GrassmannElement); 3]],
    transitions: &[Option<CMat>],
    p: usize,
    r: usize,
) -> Result<(CMat, GrassmannElement)> {
    let dt = plan.h(n);
    let rhs =
        |(g, rh): &(CMat, GrassmannElement), u: &CMat, h: &GrassmannElement| -> Result<(CMat, GrassmannElement)> {
            let ui = linalg::inverse(u)?;
            let f = rh.left_mul_matrix(&ui).right_mul_matrix(u);
            Ok((g * u, h.try_mul(&f)?))
        };
    let mut u = linalg::identity(r);
    let mut h = GrassmannElement::identity(p, r);
    for (k, [c0, cm, c1]) in coeffs.iter().enumerate() {
        let (nu, nh) = match method {
            Method::Rk4 => {
                let (ku1, kh1) = rhs(c0, &u, &h)?;
                let (ku2, kh2) = rhs(cm, &(&u + &ku1 * c(dt / 2.0)), &h.add_scaled(c(dt / 2.0), &kh1))?;
                let (ku3, kh3) = rhs(cm, &(&u + &ku2 * c(dt / 2.0)), &h.add_scaled(c(dt / 2.0), &kh2))?;
                let (ku4, kh4) = rhs(c1, &(&u + &ku3 * c(dt)), &h.add_scaled(c(dt), &kh3))?;
                let du = (ku1 + ku2 * c(2.0) + ku3 * c(2.0) + ku4) * c(dt / 6.0);
                let mut dh = kh1;
                dh.add_scaled_assign(c(2.0), &kh2);
                dh.add_scaled_assign(c(2.0), &kh3);
                dh.add_scaled_assign(c(1.0), &kh4);
                (&u + du, h.add_scaled(c(dt / 6.0), &dh))
            }
            Method::Midpoint => {
                let (ku1, kh1) = rhs(c0, &u, &h)?;
                let (ku2, kh2) = rhs(cm, &(&u + &ku1 * c(dt / 2.0)), &h.add_scaled(c(dt / 2.0), &kh1))?;
                (&u + ku2 * c(dt), h.add_scaled(c(dt), &kh2))
            }
        };
        u = match &transitions[k + 1] {
            Some(t) => t * nu,
            None => nu,
        };
        h = nh;
    }
    if !h.max_abs().is_finite() || linalg::max_abs(&u).is_nan() {
        return Err(Error::Numeric("trivialized BCh ODE diverged".into()));
    }
    Ok((u, h))
}

/// `S(1)⁻¹U(1)` or `U(1)⁻¹S(1)` from the two super transports, together
/// with the holonomy in the chart of the base point.
fn loop_deloop_parts(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    steps: usize,
    method: Method,
    order: Order,
) -> Result<(GrassmannElement, CMat)> {
    check_fields(l)?;
    let s = sp_slev(b, l, steps, method)?;
    let u = sp_levp(b, l, steps, method)?;
    let s1 = s.closed(b)?;
    let u1 = u.closed(b)?;
    let product = match order {
        Order::SlevInverse => s1.inverse()?.try_mul(&u1)?,
        Order::LevpInverse => u1.inverse()?.try_mul(&s1)?,
    };
    Ok((product, u1.body()))
}

/// `BCh` through the super transports: `Tr[Hol · SP⁻¹(slev,1,0) ∘ SP(lev∘p,1,0)]`.
///
/// The product `SP⁻¹(slev) ∘ SP(lev∘p)` equals the trivialized solution
/// `h(1)`; composing with the holonomy turns it into `φ(1)`.
pub fn bch_loop_deloop(b: &BundleConnection, l: &DiscretizedLoop, steps: usize, method: Method) -> Result<BChResult> {
    bch_loop_deloop_ordered(b, l, steps, method, Order::SlevInverse)
}

/// [`bch_loop_deloop`] with a choice of which factor is inverted.
pub fn bch_loop_deloop_ordered(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    steps: usize,
    method: Method,
    order: Order,
) -> Result<BChResult> {
    let (product, hol) = loop_deloop_parts(b, l, steps, method, order)?;
    Ok(BChResult {
        element: product.left_mul_matrix(&hol).trace(),
        route: BChRoute::LoopDeloop,
        method,
        steps,
    })
}

/// The bare trace of the loop–deloop product without the holonomy factor.
pub fn loop_deloop_trace(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    steps: usize,
    method: Method,
    order: Order,
) -> Result<GrassmannElement> {
    Ok(loop_deloop_parts(b, l, steps, method, order)?.0.trace())
}

/// Samples and steps used for constant loops.
const CONSTANT_LOOP_SAMPLES: usize = 128;
const CONSTANT_LOOP_STEPS: usize = 64;

/// `Tr[SP⁻¹(slev∘(i×1), 1, 0)]` on the constant loop at `x`.
pub fn ch_constant_loops(b: &BundleConnection, x: &[f64], fields: &[Vec<f64>]) -> Result<BChResult> {
    let l = DiscretizedLoop::constant(b.surface(), x, CONSTANT_LOOP_SAMPLES, fields)?;
    check_fields(&l)?;
    let s = sp_slev(b, &l, CONSTANT_LOOP_STEPS, Method::Rk4)?;
    Ok(BChResult {
        element: s.closed(b)?.inverse()?.trace(),
        route: BChRoute::ConstantLoop,
        method: Method::Rk4,
        steps: CONSTANT_LOOP_STEPS,
    })
}
