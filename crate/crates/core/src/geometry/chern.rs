//! The Chern character form and its integral over closed surfaces.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::bundle::BundleConnection;
use super::surface::Surface;
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannElement, IndexSet};
use crate::linalg::{self, c, C64, I};

/// `R̂ = Σ_{a<b} η_a η_b R(X_a, X_b)` in `chart`.
pub fn curvature_hat(b: &BundleConnection, chart: usize, x: &[f64], fields: &[Vec<f64>]) -> Result<GrassmannElement> {
    let p = fields.len();
    let mut out = GrassmannElement::zero(p, b.rank());
    for i in 0..p {
        for j in i + 1..p {
            let r = b.curvature_in_chart(chart, x, &fields[i], &fields[j])?;
            out.set_coeff(IndexSet::from_bits((1 << i) | (1 << j)), &r);
        }
    }
    Ok(out)
}

/// `Tr exp((i/2π) R̂)` as a scalar element of `Λ[η₁…η_p]`.
pub fn chern_character(b: &BundleConnection, x: &[f64], fields: &[Vec<f64>]) -> Result<GrassmannElement> {
    b.surface().check_point(x)?;
    let chart = b.best_chart(x)?;
    let rhat = curvature_hat(b, chart, x, fields)?;
    Ok(rhat.scale(I / (2.0 * PI)).exp()?.trace())
}

/// The Chern character form evaluated on an even number of tangent vectors.
pub fn chern_form_eval(b: &BundleConnection, x: &[f64], fields: &[Vec<f64>]) -> Result<C64> {
    if !fields.len().is_multiple_of(2) {
        return Err(Error::Arity(fields.len()));
    }
    let ch = chern_character(b, x, fields)?;
    Ok(ch.scalar_coeff(IndexSet::full(fields.len())))
}

/// Tensor-product midpoint rule with `nu × nv` nodes per chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quadrature {
    pub nu: usize,
    pub nv: usize,
}

impl Quadrature {
    pub fn square(n: usize) -> Self {
        Quadrature { nu: n, nv: n }
    }
}

/// Exponent of the polynomial partition of unity on the sphere.
const PARTITION_POWER: i32 = 4;

/// A parametrization `(s, t) ↦ (point, ∂_s, ∂_t)` with its weight and domain.
struct Chart {
    eval: fn(f64, f64) -> [Vec<f64>; 3],
    weight: fn(&[f64]) -> f64,
    s_range: f64,
    t_range: f64,
}

fn sphere_z(a: f64, p: f64) -> [Vec<f64>; 3] {
    let (sa, ca) = a.sin_cos();
    let (sp, cp) = p.sin_cos();
    [
        vec![sa * cp, sa * sp, ca],
        vec![ca * cp, ca * sp, -sa],
        vec![-sa * sp, sa * cp, 0.0],
    ]
}

fn sphere_x(a: f64, p: f64) -> [Vec<f64>; 3] {
    // cyclic permutation of the z-axis chart, so orientation is kept
    sphere_z(a, p).map(|v| vec![v[2], v[0], v[1]])
}

fn psi_z(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] * x[1]).powi(PARTITION_POWER)
}

fn psi_x(x: &[f64]) -> f64 {
    (x[1] * x[1] + x[2] * x[2]).powi(PARTITION_POWER)
}

fn torus(u: f64, v: f64) -> [Vec<f64>; 3] {
    let x = Surface::torus_point(u, v);
    let du = vec![-2.0 * PI * x[1], 2.0 * PI * x[0], 0.0, 0.0];
    let dv = vec![0.0, 0.0, -2.0 * PI * x[3], 2.0 * PI * x[2]];
    [x, du, dv]
}

fn atlas(surface: Surface) -> Result<Vec<Chart>> {
    match surface {
        Surface::Plane => Err(Error::Unsupported("the plane is not closed; no Chern number".into())),
        Surface::Sphere => Ok(vec![
            Chart {
                eval: sphere_z,
                weight: |x| psi_z(x) / (psi_z(x) + psi_x(x)),
                s_range: PI,
                t_range: 2.0 * PI,
            },
            Chart {
                eval: sphere_x,
                weight: |x| psi_x(x) / (psi_z(x) + psi_x(x)),
                s_range: PI,
                t_range: 2.0 * PI,
            },
        ]),
        Surface::FlatTorus => Ok(vec![Chart {
            eval: torus,
            weight: |_| 1.0,
            s_range: 1.0,
            t_range: 1.0,
        }]),
    }
}

/// `∫_M (i/2π) Tr R` over a closed surface.
pub fn chern_number(b: &BundleConnection, quad: Quadrature) -> Result<C64> {
    if quad.nu == 0 || quad.nv == 0 {
        return Err(Error::Dimension("empty quadrature grid".into()));
    }
    let mut total = c(0.0);
    for chart in atlas(b.surface())? {
        let hs = chart.s_range / quad.nu as f64;
        let ht = chart.t_range / quad.nv as f64;
        let rows: Vec<Result<C64>> = (0..quad.nu)
            .into_par_iter()
            .map(|i| {
                let s = (i as f64 + 0.5) * hs;
                let mut acc = c(0.0);
                for j in 0..quad.nv {
                    let t = (j as f64 + 0.5) * ht;
                    let [x, ds, dt] = (chart.eval)(s, t);
                    let w = (chart.weight)(&x);
                    if w == 0.0 {
                        continue;
                    }
                    let r = b.curvature(&x, &ds, &dt)?;
                    acc += linalg::trace(&r) * w;
                }
                Ok(acc)
            })
            .collect();
        // fixed summation order keeps the result independent of the thread count
        for row in rows {
            total += row? * (hs * ht);
        }
    }
    Ok(total * I / (2.0 * PI))
}
