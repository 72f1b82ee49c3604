//! Pullbacks along `slev` and `lev∘p`, paired with `D_cs`.
//!
//! Elements of `Λ[θ, η₁…η_p]` put `θ` at generator 0 and `η_a` at `a + 1`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{BundleConnection, OneForm, ScalarFunction};
use crate::grassmann::{GrassmannElement, IndexSet};
use crate::linalg::{c, identity, CMat, C64, I};
use crate::loopspace::{hat_eval_with, tilde_eval};
use crate::transport::DiscretizedLoop;

/// `θ · x` for `x ∈ Λ[η]`, as an element of `Λ[θ, η]`.
pub fn theta_times(x: &GrassmannElement) -> GrassmannElement {
    let g = x.generators() + 1;
    let theta = GrassmannElement::monomial(g, IndexSet::singleton(0), &identity(x.dim()));
    &theta * &x.lift(g, 1)
}

/// `even + θ·odd` in `Λ[θ, η]`.
pub fn with_theta(even: &GrassmannElement, odd: &GrassmannElement) -> GrassmannElement {
    &even.lift(even.generators() + 1, 1) + &theta_times(odd)
}

/// `(f(γ(t_i)), Σ_a η_a df(X_a(t_i)))`.
pub fn slev_pullback_function(f: &dyn ScalarFunction, l: &DiscretizedLoop, i: usize) -> (C64, GrassmannElement) {
    let x = l.point(i);
    let odd = hat_eval_with(l, i, 1, |v| f.differential(x, &v[0]));
    (f.value(x), odd)
}

/// `slev*f = f̂ + θ d̂f` in `Λ[θ, η]`.
pub fn slev_pullback_element(f: &dyn ScalarFunction, l: &DiscretizedLoop, i: usize) -> GrassmannElement {
    let (even, odd) = slev_pullback_function(f, l, i);
    with_theta(&GrassmannElement::scalar(odd.generators(), even), &odd)
}

/// `⟨D_cs, slev*ω⟩ = (1/2π)ω̂ + θ[(1/2π)d̂ω − iω̃]`.
pub fn slev_pair_dcs_oneform(omega: &dyn OneForm, l: &DiscretizedLoop, i: usize) -> GrassmannElement {
    let x = l.point(i);
    let k = c(1.0 / (2.0 * PI));
    let hat = hat_eval_with(l, i, 1, |v| omega.eval(x, &v[0]));
    let d_hat = hat_eval_with(l, i, 2, |v| omega.exterior_derivative(x, &v[0], &v[1]));
    let p = l.field_count();
    let tilde = GrassmannElement::scalar(p, tilde_eval(omega, l, i));
    with_theta(&hat.scale(k), &d_hat.scale(k).add_scaled(-I, &tilde))
}

/// `⟨D_cs, (lev∘p)*ω⟩ = −iθω̃`.
pub fn levp_pair_dcs_oneform(omega: &dyn OneForm, l: &DiscretizedLoop, i: usize) -> GrassmannElement {
    let p = l.field_count();
    theta_times(&GrassmannElement::scalar(p, -I * tilde_eval(omega, l, i)))
}

/// `Â = Σ_a η_a A(X_a)` in `chart`.
pub fn connection_hat(b: &BundleConnection, chart: usize, l: &DiscretizedLoop, i: usize) -> Result<GrassmannElement> {
    let p = l.field_count();
    let mut out = GrassmannElement::zero(p, b.rank());
    for a in 0..p {
        let m = b.connection(chart, l.point(i), l.field(a, i))?;
        out.set_coeff(IndexSet::singleton(a), &m);
    }
    Ok(out)
}

/// `Ã = A(γ̇)` in `chart`.
pub fn connection_tilde(b: &BundleConnection, chart: usize, l: &DiscretizedLoop, i: usize) -> Result<CMat> {
    b.connection(chart, l.point(i), l.velocity(i))
}

/// `d̂A = Σ_{a<b} η_a η_b dA(X_a, X_b)` in `chart`.
pub fn connection_differential_hat(
    b: &BundleConnection,
    chart: usize,
    l: &DiscretizedLoop,
    i: usize,
) -> Result<GrassmannElement> {
    let p = l.field_count();
    let mut out = GrassmannElement::zero(p, b.rank());
    for a in 0..p {
        for bb in a + 1..p {
            let m = b.connection_differential(chart, l.point(i), l.field(a, i), l.field(bb, i))?;
            out.set_coeff(IndexSet::from_bits((1 << a) | (1 << bb)), &m);
        }
    }
    Ok(out)
}

/// The connection paired with `D_cs` along `slev`:
/// `(1/2π)Â + θ[(1/2π)d̂A − iÃ]`.
pub fn slev_pair_connection(
    b: &BundleConnection,
    chart: usize,
    l: &DiscretizedLoop,
    i: usize,
) -> Result<GrassmannElement> {
    let p = l.field_count();
    let k = c(1.0 / (2.0 * PI));
    let hat = connection_hat(b, chart, l, i)?;
    let d_hat = connection_differential_hat(b, chart, l, i)?;
    let tilde = GrassmannElement::from_body(p, &connection_tilde(b, chart, l, i)?);
    Ok(with_theta(&hat.scale(k), &d_hat.scale(k).add_scaled(-I, &tilde)))
}

/// The connection paired with `D_cs` along `lev∘p`: `−iθÃ`.
pub fn levp_pair_connection(
    b: &BundleConnection,
    chart: usize,
    l: &DiscretizedLoop,
    i: usize,
) -> Result<GrassmannElement> {
    let p = l.field_count();
    let tilde = GrassmannElement::from_body(p, &connection_tilde(b, chart, l, i)?);
    Ok(theta_times(&tilde.scale(-I)))
}
