//! Built-in base surfaces embedded in Euclidean space.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Radius of each circle factor of the flat torus, so that the torus is
/// isometric to the unit square with periodic sides.
pub const TORUS_RADIUS: f64 = 1.0 / (2.0 * PI);

/// Points farther than this from the surface are rejected.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Surface {
    /// `ℝ² ⊂ ℝ²`
    Plane,
    /// Unit sphere `S² ≅ CP¹` in `ℝ³`.
    Sphere,
    /// Flat torus `T² = ℝ²/ℤ²` embedded in `ℝ⁴` as a product of two circles.
    FlatTorus,
}

impl Surface {
    pub fn name(self) -> &'static str {
        match self {
            Surface::Plane => "r2",
            Surface::Sphere => "s2",
            Surface::FlatTorus => "t2",
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            Surface::Plane => 2,
            Surface::Sphere => 3,
            Surface::FlatTorus => 4,
        }
    }

    pub fn dim(self) -> usize {
        2
    }

    pub fn is_closed(self) -> bool {
        !matches!(self, Surface::Plane)
    }

    pub fn distance_to_surface(self, x: &[f64]) -> f64 {
        match self {
            Surface::Plane => 0.0,
            Surface::Sphere => (norm(x) - 1.0).abs(),
            Surface::FlatTorus => {
                let a = (x[0] * x[0] + x[1] * x[1]).sqrt() - TORUS_RADIUS;
                let b = (x[2] * x[2] + x[3] * x[3]).sqrt() - TORUS_RADIUS;
                (a * a + b * b).sqrt()
            }
        }
    }

    pub fn contains(self, x: &[f64]) -> bool {
        x.len() == self.ambient_dim() && self.distance_to_surface(x) <= MEMBERSHIP_TOL
    }

    pub fn check_point(self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::Dimension(format!(
                "point of length {} on {}",
                x.len(),
                self.name()
            )));
        }
        let d = self.distance_to_surface(x);
        if d > MEMBERSHIP_TOL {
            return Err(Error::Geometry(format!("point is {d:e} away from {}", self.name())));
        }
        Ok(())
    }

    /// Nearest-point retraction of a tubular neighbourhood onto the surface.
    pub fn retract(self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Surface::Plane => Ok(x.to_vec()),
            Surface::Sphere => {
                let r = norm(x);
                if r < 0.1 {
                    return Err(Error::Geometry(format!(
                        "|x| = {r:e} outside the tubular neighbourhood"
                    )));
                }
                Ok(x.iter().map(|v| v / r).collect())
            }
            Surface::FlatTorus => {
                let mut out = vec![0.0; 4];
                for pair in [0usize, 2] {
                    let r = (x[pair] * x[pair] + x[pair + 1] * x[pair + 1]).sqrt();
                    if r < 0.1 * TORUS_RADIUS {
                        return Err(Error::Geometry(
                            "point outside the tubular neighbourhood of the torus".into(),
                        ));
                    }
                    out[pair] = TORUS_RADIUS * x[pair] / r;
                    out[pair + 1] = TORUS_RADIUS * x[pair + 1] / r;
                }
                Ok(out)
            }
        }
    }

    /// Differential of [`Surface::retract`] at `x` applied to `v`.
    pub fn retract_differential(self, x: &[f64], v: &[f64]) -> Vec<f64> {
        match self {
            Surface::Plane => v.to_vec(),
            Surface::Sphere => {
                let r = norm(x);
                let s = dot(x, v) / (r * r);
                x.iter().zip(v).map(|(xi, vi)| (vi - s * xi) / r).collect()
            }
            Surface::FlatTorus => {
                let mut out = vec![0.0; 4];
                for pair in [0usize, 2] {
                    let (a, b) = (x[pair], x[pair + 1]);
                    let r2 = a * a + b * b;
                    let r = r2.sqrt();
                    let s = (a * v[pair] + b * v[pair + 1]) / r2;
                    out[pair] = TORUS_RADIUS * (v[pair] - s * a) / r;
                    out[pair + 1] = TORUS_RADIUS * (v[pair + 1] - s * b) / r;
                }
                out
            }
        }
    }

    /// Orthogonal projector onto `T_xM`.
    pub fn tangent_projector(self, x: &[f64]) -> DMatrix<f64> {
        let n = self.ambient_dim();
        match self {
            Surface::Plane => DMatrix::identity(n, n),
            Surface::Sphere => {
                let r2 = dot(x, x);
                DMatrix::from_fn(n, n, |i, j| {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    delta - x[i] * x[j] / r2
                })
            }
            Surface::FlatTorus => {
                let [e, f] = self.tangent_basis(x);
                DMatrix::from_fn(n, n, |i, j| e[i] * e[j] + f[i] * f[j])
            }
        }
    }

    pub fn project(self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let p = self.tangent_projector(x);
        (0..v.len())
            .map(|i| (0..v.len()).map(|j| p[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Positively oriented orthonormal basis of `T_xM`.
    pub fn tangent_basis(self, x: &[f64]) -> [Vec<f64>; 2] {
        match self {
            Surface::Plane => [vec![1.0, 0.0], vec![0.0, 1.0]],
            Surface::Sphere => {
                let r = norm(x);
                let n: Vec<f64> = x.iter().map(|v| v / r).collect();
                // least aligned coordinate axis
                let k = (0..3).min_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs())).unwrap();
                let mut a = vec![0.0; 3];
                a[k] = 1.0;
                let s = dot(&a, &n);
                let a: Vec<f64> = a.iter().zip(&n).map(|(ai, ni)| ai - s * ni).collect();
                let an = norm(&a);
                let a: Vec<f64> = a.iter().map(|v| v / an).collect();
                // b = n × a, so that a × b = n (outward orientation)
                let b = vec![
                    n[1] * a[2] - n[2] * a[1],
                    n[2] * a[0] - n[0] * a[2],
                    n[0] * a[1] - n[1] * a[0],
                ];
                [a, b]
            }
            Surface::FlatTorus => {
                let r1 = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let r2 = (x[2] * x[2] + x[3] * x[3]).sqrt();
                [
                    vec![-x[1] / r1, x[0] / r1, 0.0, 0.0],
                    vec![0.0, 0.0, -x[3] / r2, x[2] / r2],
                ]
            }
        }
    }

    /// The oriented area form evaluated on two tangent vectors.
    pub fn area_form(self, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let [e, f] = self.tangent_basis(x);
        dot(&e, a) * dot(&f, b) - dot(&e, b) * dot(&f, a)
    }

    /// Rotation by `angle` of the circle action: about the `z` axis for the
    /// sphere, about the origin for the plane, along the first circle factor
    /// for the torus.
    pub fn rotate(self, x: &[f64], angle: f64) -> Vec<f64> {
        let (s, c) = angle.sin_cos();
        let mut y = x.to_vec();
        y[0] = c * x[0] - s * x[1];
        y[1] = s * x[0] + c * x[1];
        y
    }

    /// Embedding of the torus angle coordinates `(u, v) ∈ ℝ²/ℤ²`.
    pub fn torus_point(u: f64, v: f64) -> Vec<f64> {
        let (su, cu) = (2.0 * PI * u).sin_cos();
        let (sv, cv) = (2.0 * PI * v).sin_cos();
        vec![
            TORUS_RADIUS * cu,
            TORUS_RADIUS * su,
            TORUS_RADIUS * cv,
            TORUS_RADIUS * sv,
        ]
    }

    /// Angle coordinates of a torus point, each in `[0, 1)`.
    pub fn torus_angles(x: &[f64]) -> (f64, f64) {
        let u = x[1].atan2(x[0]) / (2.0 * PI);
        let v = x[3].atan2(x[2]) / (2.0 * PI);
        (u.rem_euclid(1.0), v.rem_euclid(1.0))
    }

    pub fn sphere_point(polar: f64, azimuth: f64) -> Vec<f64> {
        let (sa, ca) = polar.sin_cos();
        let (sp, cp) = azimuth.sin_cos();
        vec![sa * cp, sa * sp, ca]
    }
}
