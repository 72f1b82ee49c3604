//! Differential forms on the base surface, given through ambient extensions.

use crate::linalg::{axpy, C64};

/// Step of the fourth-order stencil used by the default derivatives.
pub const FORM_FD_STEP: f64 = 1e-3;

fn central<F: Fn(f64) -> C64>(h: f64, f: F) -> C64 {
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

/// A `k`-form evaluated on `k` ambient tangent vectors.
pub trait DifferentialForm: Sync {
    fn degree(&self) -> usize;
    fn eval(&self, x: &[f64], vectors: &[Vec<f64>]) -> C64;
}

/// A smooth function defined on a neighbourhood of the surface.
pub trait ScalarFunction: Sync {
    fn value(&self, x: &[f64]) -> C64;
    /// `df(v)`; by default a central difference along `x + s v`.
    fn differential(&self, x: &[f64], v: &[f64]) -> C64 {
        central(FORM_FD_STEP, |s| self.value(&axpy(x, s, v)))
    }
}

/// A 1-form defined on a neighbourhood of the surface.
pub trait OneForm: Sync {
    fn eval(&self, x: &[f64], v: &[f64]) -> C64;
    /// `dω(a, b) = D_a ω(b) − D_b ω(a)` for constant ambient `a`, `b`.
    fn exterior_derivative(&self, x: &[f64], a: &[f64], b: &[f64]) -> C64 {
        central(FORM_FD_STEP, |s| self.eval(&axpy(x, s, a), b))
            - central(FORM_FD_STEP, |s| self.eval(&axpy(x, s, b), a))
    }
}

/// Function from a closure, with an optional closed-form differential.
pub struct FnScalar<F, D = fn(&[f64], &[f64]) -> C64> {
    pub f: F,
    pub df: Option<D>,
}

impl<F> FnScalar<F>
where
    F: Fn(&[f64]) -> C64 + Sync,
{
    pub fn new(f: F) -> Self {
        FnScalar { f, df: None }
    }
}

impl<F, D> FnScalar<F, D>
where
    F: Fn(&[f64]) -> C64 + Sync,
    D: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    pub fn with_differential(f: F, df: D) -> Self {
        FnScalar { f, df: Some(df) }
    }
}

impl<F, D> ScalarFunction for FnScalar<F, D>
where
    F: Fn(&[f64]) -> C64 + Sync,
    D: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    fn value(&self, x: &[f64]) -> C64 {
        (self.f)(x)
    }
    fn differential(&self, x: &[f64], v: &[f64]) -> C64 {
        match &self.df {
            Some(df) => df(x, v),
            None => central(FORM_FD_STEP, |s| self.value(&axpy(x, s, v))),
        }
    }
}

impl<F, D> DifferentialForm for FnScalar<F, D>
where
    F: Fn(&[f64]) -> C64 + Sync,
    D: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    fn degree(&self) -> usize {
        0
    }
    fn eval(&self, x: &[f64], _vectors: &[Vec<f64>]) -> C64 {
        self.value(x)
    }
}

/// 1-form from a closure linear in its second argument.
pub struct FnOneForm<F> {
    pub f: F,
}

impl<F> FnOneForm<F>
where
    F: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    pub fn new(f: F) -> Self {
        FnOneForm { f }
    }
}

impl<F> OneForm for FnOneForm<F>
where
    F: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    fn eval(&self, x: &[f64], v: &[f64]) -> C64 {
        (self.f)(x, v)
    }
}

impl<F> DifferentialForm for FnOneForm<F>
where
    F: Fn(&[f64], &[f64]) -> C64 + Sync,
{
    fn degree(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64], vectors: &[Vec<f64>]) -> C64 {
        (self.f)(x, &vectors[0])
    }
}

/// The differential `df` of a function, as a 1-form.
pub struct Exact<'a>(pub &'a dyn ScalarFunction);

impl OneForm for Exact<'_> {
    fn eval(&self, x: &[f64], v: &[f64]) -> C64 {
        self.0.differential(x, v)
    }
    fn exterior_derivative(&self, _x: &[f64], _a: &[f64], _b: &[f64]) -> C64 {
        C64::new(0.0, 0.0)
    }
}

/// A `k`-form from a closure that is multilinear and alternating.
pub struct FnForm<F> {
    pub degree: usize,
    pub f: F,
}

impl<F> DifferentialForm for FnForm<F>
where
    F: Fn(&[f64], &[Vec<f64>]) -> C64 + Sync,
{
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, x: &[f64], vectors: &[Vec<f64>]) -> C64 {
        (self.f)(x, vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_derivatives_match_closed_forms() {
        let f = FnScalar::new(|x: &[f64]| C64::new(x[0] * x[0] * x[1], x[2]));
        let x = [0.3, -0.5, 0.8];
        let v = [1.0, 2.0, -1.0];
        let expected = C64::new(2.0 * x[0] * x[1] * v[0] + x[0] * x[0] * v[1], v[2]);
        assert!((f.differential(&x, &v) - expected).norm() < 1e-12);

        // ω = x dy has dω = dx ∧ dy
        let w = FnOneForm::new(|x: &[f64], v: &[f64]| C64::new(x[0] * v[1], 0.0));
        let a = [1.0, 0.5, 0.0];
        let b = [-0.2, 1.0, 0.3];
        let d = w.exterior_derivative(&x, &a, &b);
        assert!((d.re - (a[0] * b[1] - a[1] * b[0])).abs() < 1e-12);
    }

    #[test]
    fn exact_forms_are_closed() {
        let f = FnScalar::new(|x: &[f64]| C64::new(x[0].sin() * x[1], 0.0));
        let df = Exact(&f);
        assert_eq!(
            df.exterior_derivative(&[0.0; 3], &[1.0; 3], &[0.0; 3]),
            C64::new(0.0, 0.0)
        );
        let generic = FnOneForm::new(|x: &[f64], v: &[f64]| f.differential(x, v));
        let d = generic.exterior_derivative(&[0.2, 0.4, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert!(d.norm() < 1e-6);
    }
}
