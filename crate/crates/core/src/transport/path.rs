//! Sampled loops on a surface carrying tangent vector fields.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Surface;
use crate::linalg::{axpy, distance, norm};

type CurveFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;
type FieldFnInner = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// A smooth closed curve `S¹ = ℝ/ℤ → M`.
#[derive(Clone)]
pub struct LoopCurve {
    surface: Surface,
    f: Arc<CurveFn>,
}

impl fmt::Debug for LoopCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoopCurve").field("surface", &self.surface).finish()
    }
}

impl LoopCurve {
    /// `f` must be 1-periodic; its values are retracted onto the surface.
    pub fn new<F>(surface: Surface, f: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        LoopCurve {
            surface,
            f: Arc::new(f),
        }
    }

    pub fn constant(surface: Surface, x: Vec<f64>) -> Self {
        LoopCurve::new(surface, move |_| x.clone())
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn point(&self, t: f64) -> Result<Vec<f64>> {
        self.surface.retract(&(self.f)(t))
    }

    /// `t ↦ γ(s(t))` with `s(t) = t + a sin(2πt)/(2π)`, monotone for `|a| < 1`.
    pub fn reparametrized(&self, a: f64) -> LoopCurve {
        let f = self.f.clone();
        LoopCurve {
            surface: self.surface,
            f: Arc::new(move |t| f(reparametrization(a, t))),
        }
    }
}

pub fn reparametrization(a: f64, t: f64) -> f64 {
    t + a * (2.0 * PI * t).sin() / (2.0 * PI)
}

/// A vector field along a loop: `(t, γ(t)) ↦ X(t)` in ambient coordinates,
/// projected to the tangent space when sampled.
#[derive(Clone)]
pub struct FieldFn(Arc<FieldFnInner>);

impl fmt::Debug for FieldFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FieldFn")
    }
}

impl FieldFn {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        FieldFn(Arc::new(f))
    }

    /// The same ambient vector at every time.
    pub fn constant(v: Vec<f64>) -> Self {
        FieldFn::new(move |_, _| v.clone())
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.0)(t, x)
    }

    pub fn reparametrized(&self, a: f64) -> FieldFn {
        let f = self.0.clone();
        FieldFn::new(move |t, x| f(reparametrization(a, t), x))
    }
}

/// `N` samples of a closed loop at `t_i = i/N` with `p` tangent fields.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedLoop {
    surface: Surface,
    points: Vec<Vec<f64>>,
    velocity: Vec<Vec<f64>>,
    /// `fields[a][i]`
    fields: Vec<Vec<Vec<f64>>>,
}

impl DiscretizedLoop {
    /// Sample a curve and fields at `n` equally spaced times.
    pub fn sample(curve: &LoopCurve, n: usize, fields: &[FieldFn]) -> Result<Self> {
        let surface = curve.surface();
        let points = (0..n)
            .map(|i| curve.point(i as f64 / n as f64))
            .collect::<Result<Vec<_>>>()?;
        let fields = fields
            .iter()
            .map(|f| {
                (0..n)
                    .map(|i| f.eval(i as f64 / n as f64, &points[i]))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self::from_samples(surface, points, fields)
    }

    /// Build from raw samples; fields are projected to the tangent spaces and
    /// the velocity is differentiated numerically.
    pub fn from_samples(surface: Surface, points: Vec<Vec<f64>>, fields: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = points.len();
        if n < 5 {
            return Err(Error::Dimension(format!("a loop needs at least 5 samples, got {n}")));
        }
        for x in &points {
            surface.check_point(x)?;
        }
        let mut projected = Vec::with_capacity(fields.len());
        for field in fields {
            if field.len() != n {
                return Err(Error::Dimension(format!(
                    "field has {} samples, loop has {n}",
                    field.len()
                )));
            }
            let mut f = Vec::with_capacity(n);
            for (x, v) in points.iter().zip(field) {
                if v.len() != surface.ambient_dim() {
                    return Err(Error::Dimension("field vector of wrong length".into()));
                }
                f.push(surface.project(x, &v));
            }
            projected.push(f);
        }
        let velocity = periodic_velocity(surface, &points);
        Ok(DiscretizedLoop {
            surface,
            points,
            velocity,
            fields: projected,
        })
    }

    /// Constant loop at `x` with constant tangent vectors.
    pub fn constant(surface: Surface, x: &[f64], n: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let fields = vectors.iter().map(|v| vec![v.clone(); n]).collect();
        Self::from_samples(surface, vec![x.to_vec(); n], fields)
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    /// Sample count `N`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of tangent fields `p`.
    pub fn field_count(&self) -> usize {
        self.fields.len()
    }

    /// Sample `i`, taken modulo `N`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i % self.len()]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocity[i % self.len()]
    }

    pub fn field(&self, a: usize, i: usize) -> &[f64] {
        &self.fields[a][i % self.len()]
    }

    /// All fields at sample `i`.
    pub fn fields_at(&self, i: usize) -> Vec<Vec<f64>> {
        (0..self.field_count()).map(|a| self.field(a, i).to_vec()).collect()
    }

    /// Field `a` at every sample.
    pub fn field_samples(&self, a: usize) -> &[Vec<f64>] {
        &self.fields[a]
    }

    /// The same loop with other fields.
    pub fn with_fields(&self, fields: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::from_samples(self.surface, self.points.clone(), fields)
    }

    /// The fields in the given order, e.g. to transpose two of them.
    pub fn select_fields(&self, order: &[usize]) -> Result<Self> {
        let mut fields = Vec::with_capacity(order.len());
        for &a in order {
            if a >= self.field_count() {
                return Err(Error::IndexOutOfRange {
                    index: a,
                    len: self.field_count(),
                });
            }
            fields.push(self.fields[a].clone());
        }
        Ok(DiscretizedLoop { fields, ..self.clone() })
    }

    /// The loop `t ↦ γ(t + shift/N)`.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.len();
        let rot = |v: &Vec<Vec<f64>>| (0..n).map(|i| v[(i + shift) % n].clone()).collect();
        DiscretizedLoop {
            surface: self.surface,
            points: rot(&self.points),
            velocity: rot(&self.velocity),
            fields: self.fields.iter().map(rot).collect(),
        }
    }

    /// The loop `t ↦ γ(1 − t)`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let rev = |v: &Vec<Vec<f64>>| (0..n).map(|i| v[(n - i) % n].clone()).collect::<Vec<_>>();
        DiscretizedLoop {
            surface: self.surface,
            points: rev(&self.points),
            velocity: rev(&self.velocity)
                .into_iter()
                .map(|v| v.iter().map(|x| -x).collect())
                .collect(),
            fields: self.fields.iter().map(rev).collect(),
        }
    }

    /// The loop `retract(γ + Σ_k s_k V_k)` in the retraction chart centred
    /// at this loop; the fields are pushed forward by the differential of the
    /// retraction so that they stay coordinate-constant.
    pub fn perturbed(&self, shifts: &[(f64, &[Vec<f64>])]) -> Result<Self> {
        let n = self.len();
        let mut points = Vec::with_capacity(n);
        let mut fields = vec![Vec::with_capacity(n); self.field_count()];
        for i in 0..n {
            let mut y = self.points[i].clone();
            for (s, v) in shifts {
                if v.len() != n {
                    return Err(Error::Dimension("perturbation of wrong length".into()));
                }
                y = axpy(&y, *s, &v[i]);
            }
            points.push(self.surface.retract(&y)?);
            for (a, f) in self.fields.iter().enumerate() {
                fields[a].push(self.surface.retract_differential(&y, &f[i]));
            }
        }
        let velocity = periodic_velocity(self.surface, &points);
        Ok(DiscretizedLoop {
            surface: self.surface,
            points,
            velocity,
            fields,
        })
    }

    /// Largest distance between consecutive samples.
    pub fn max_spacing(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| distance(&self.points[i], &self.points[(i + 1) % n]))
            .fold(0.0, f64::max)
    }

    /// Largest speed over the samples.
    pub fn max_speed(&self) -> f64 {
        self.velocity.iter().map(|v| norm(v)).fold(0.0, f64::max)
    }
}

/// Fourth-order periodic central differences, projected to the tangent space.
fn periodic_velocity(surface: Surface, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let d = surface.ambient_dim();
    (0..n)
        .map(|i| {
            let p1 = &points[(i + 1) % n];
            let m1 = &points[(i + n - 1) % n];
            let p2 = &points[(i + 2) % n];
            let m2 = &points[(i + n - 2) % n];
            let v: Vec<f64> = (0..d)
                .map(|k| (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) * n as f64 / 12.0)
                .collect();
            surface.project(&points[i], &v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn latitude(alpha: f64) -> LoopCurve {
        LoopCurve::new(Surface::Sphere, move |t| Surface::sphere_point(alpha, 2.0 * PI * t))
    }

    #[test]
    fn velocity_is_fourth_order() {
        let alpha = 1.0;
        let err = |n: usize| {
            let l = DiscretizedLoop::sample(&latitude(alpha), n, &[]).unwrap();
            // exact speed 2π sin α
            (norm(l.velocity(3)) - 2.0 * PI * alpha.sin()).abs()
        };
        let ratio = err(64) / err(128);
        assert!((14.0..18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn fields_are_tangent() {
        let f = FieldFn::constant(vec![0.3, -1.0, 2.0]);
        let l = DiscretizedLoop::sample(&latitude(0.7), 32, &[f]).unwrap();
        for i in 0..32 {
            let x = l.point(i);
            let v = l.field(0, i);
            let pv = Surface::Sphere.project(x, v);
            assert!(distance(&pv, v) < 1e-12);
        }
    }

    #[test]
    fn rotation_and_reversal_reindex() {
        let l = DiscretizedLoop::sample(&latitude(0.7), 16, &[]).unwrap();
        let r = l.rotated(5);
        assert_eq!(r.point(0), l.point(5));
        let rev = l.reversed();
        assert_eq!(rev.point(0), l.point(0));
        assert_eq!(rev.point(1), l.point(15));
        assert!(distance(rev.velocity(1), &l.velocity(15).iter().map(|x| -x).collect::<Vec<_>>()) < 1e-15);
        assert_eq!(rev.reversed(), l);
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let f = FieldFn::constant(vec![0.3, -1.0, 2.0]);
        let l = DiscretizedLoop::sample(&latitude(0.7), 16, &[f]).unwrap();
        let v = l.field_samples(0).to_vec();
        let p = l.perturbed(&[(0.0, &v)]).unwrap();
        for i in 0..16 {
            assert!(distance(p.point(i), l.point(i)) < 1e-15);
            assert!(distance(p.field(0, i), l.field(0, i)) < 1e-15);
        }
    }

    #[test]
    fn off_surface_samples_are_rejected() {
        let pts = vec![vec![0.0, 0.0, 2.0]; 8];
        assert!(DiscretizedLoop::from_samples(Surface::Sphere, pts, vec![]).is_err());
    }
}
