//! Finite-difference exterior calculus on the discretized loop space and the
//! equivariant closedness residual of `BCh`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::BundleConnection;
use crate::grassmann::{GrassmannElement, IndexSet};
use crate::linalg::{c, C64, I};
use crate::transport::ode::Method;
use crate::transport::DiscretizedLoop;

use super::bch::bch_ode;

/// A form on the loop space, evaluated on the fields carried by a loop.
///
/// The result is a scalar element of `Λ[η₁…η_q]` for `q` fields; the
/// coefficient of `η_{a₁}…η_{a_k}` is the degree-`k` component on
/// `X_{a₁}, …, X_{a_k}`.
pub trait LoopForm: Sync {
    fn eval(&self, l: &DiscretizedLoop) -> Result<GrassmannElement>;
}

impl<F> LoopForm for F
where
    F: Fn(&DiscretizedLoop) -> Result<GrassmannElement> + Sync,
{
    fn eval(&self, l: &DiscretizedLoop) -> Result<GrassmannElement> {
        self(l)
    }
}

/// `BCh` computed by [`bch_ode`] at a fixed resolution.
pub struct BchForm<'a> {
    pub bundle: &'a BundleConnection,
    pub steps: usize,
    pub method: Method,
}

impl LoopForm for BchForm<'_> {
    fn eval(&self, l: &DiscretizedLoop) -> Result<GrassmannElement> {
        Ok(bch_ode(self.bundle, l, self.steps, self.method)?.element)
    }
}

/// Default step of the loop-space central differences.
pub const LOOP_FD_STEP: f64 = 1e-2;

/// `β(X_i₁, …)` on the listed fields, i.e. the top coefficient after
/// restricting the loop to them.
fn eval_on(form: &dyn LoopForm, l: &DiscretizedLoop, fields: &[usize]) -> Result<C64> {
    let sub = l.select_fields(fields)?;
    Ok(form.eval(&sub)?.scalar_coeff(IndexSet::full(fields.len())))
}

/// `∂_V β(fields)` by a central difference along `retract(γ + sV)`.
fn directional(form: &dyn LoopForm, l: &DiscretizedLoop, v: usize, fields: &[usize], h: f64) -> Result<C64> {
    let dir = l.field_samples(v).to_vec();
    let plus = l.perturbed(&[(h, &dir)])?;
    let minus = l.perturbed(&[(-h, &dir)])?;
    Ok((eval_on(form, &plus, fields)? - eval_on(form, &minus, fields)?) / (2.0 * h))
}

/// `dβ(X₀, …, X_p) = Σ_i (−1)^i ∂_{X_i} β(X₀, …, X̂_i, …, X_p)` on the
/// `p + 1` fields of `l`.
///
/// The fields are pushed forward with the retraction, so they commute and
/// the bracket terms drop out.
pub fn exterior_derivative_fd(form: &dyn LoopForm, l: &DiscretizedLoop, h: f64) -> Result<C64> {
    let q = l.field_count();
    if q == 0 {
        return Err(Error::Arity(0));
    }
    let mut sum = c(0.0);
    for i in 0..q {
        let others: Vec<usize> = (0..q).filter(|&j| j != i).collect();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += directional(form, l, i, &others, h)? * sign;
    }
    Ok(sum)
}

/// `β(K, X₀, …, X_p)` with `K = γ̇` the rotation generator.
pub fn contract_velocity(form: &dyn LoopForm, l: &DiscretizedLoop) -> Result<C64> {
    let q = l.field_count();
    let mut fields = Vec::with_capacity(q + 1);
    fields.push((0..l.len()).map(|i| l.velocity(i).to_vec()).collect::<Vec<_>>());
    for a in 0..q {
        fields.push(l.field_samples(a).to_vec());
    }
    let with_k = l.with_fields(fields)?;
    Ok(form.eval(&with_k)?.scalar_coeff(IndexSet::full(q + 1)))
}

/// `(d + 2πi ι_K)β` on the fields of `l`.
pub fn equivariant_residual_of(form: &dyn LoopForm, l: &DiscretizedLoop, h: f64) -> Result<C64> {
    Ok(exterior_derivative_fd(form, l, h)? + 2.0 * PI * I * contract_velocity(form, l)?)
}

/// `(d + 2πi ι_K)BCh` on the odd number of fields carried by `l`.
pub fn equivariant_residual(
    b: &BundleConnection,
    l: &DiscretizedLoop,
    h: f64,
    steps: usize,
    method: Method,
) -> Result<C64> {
    if l.field_count().is_multiple_of(2) {
        return Err(Error::Arity(l.field_count()));
    }
    let form = BchForm {
        bundle: b,
        steps,
        method,
    };
    equivariant_residual_of(&form, l, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bundle, Surface};
    use crate::transport::spec::{latitude, random_fields};

    #[test]
    fn flat_bch_is_equivariantly_closed() {
        let b = bundle("flat-s2:r=2").unwrap();
        let s = Surface::Sphere;
        let l = DiscretizedLoop::sample(&latitude(s, 1.0), 256, &random_fields(s, 1, 4)).unwrap();
        let r = equivariant_residual(&b, &l, 1e-2, 64, Method::Rk4).unwrap();
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn even_field_counts_are_rejected() {
        let b = bundle("flat-s2").unwrap();
        let s = Surface::Sphere;
        let l = DiscretizedLoop::sample(&latitude(s, 1.0), 64, &random_fields(s, 2, 4)).unwrap();
        assert!(matches!(
            equivariant_residual(&b, &l, 1e-2, 16, Method::Rk4),
            Err(Error::Arity(2))
        ));
    }

    #[test]
    fn derivative_of_a_loop_function() {
        // β(γ) = Σ_i z(γ_i)/N, so dβ(X) = Σ_i X_i·e_z/N
        let s = Surface::Sphere;
        let l = DiscretizedLoop::sample(&latitude(s, 1.0), 64, &random_fields(s, 1, 5)).unwrap();
        let beta = |m: &DiscretizedLoop| -> Result<GrassmannElement> {
            let q = m.field_count();
            let mean = (0..m.len()).map(|i| m.point(i)[2]).sum::<f64>() / m.len() as f64;
            Ok(GrassmannElement::scalar(q, c(mean)))
        };
        let expected = (0..64).map(|i| l.field(0, i)[2]).sum::<f64>() / 64.0;
        let got = exterior_derivative_fd(&beta, &l, 1e-4).unwrap();
        assert!((got - c(expected)).norm() < 1e-7);
    }
}
