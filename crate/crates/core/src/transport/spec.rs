//! Loop and field constructors by name.

use std::f64::consts::PI;

use rand::Rng;

use super::path::{FieldFn, LoopCurve};
use crate::error::{Error, Result};
use crate::geometry::Surface;
use crate::rng;

/// Loop ids accepted by [`parse_loop`].
pub const LOOP_IDS: &[&str] = &[
    "latitude:alpha=<v>",
    "great-circle",
    "figure-parametric:<eight|lissajous|wobble>",
    "constant:<north|south|equator|origin|x,y[,z[,w]]>",
    "random-fourier:modes=<m>,seed=<s>",
];

const RANDOM_LOOP_STREAM: u64 = 1;
const RANDOM_FIELD_STREAM: u64 = 2;

fn key_values(input: &str, body: &str) -> Result<Vec<(String, String)>> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse(input, format!("expected key=value, got `{kv}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn get<T: std::str::FromStr>(input: &str, kv: &[(String, String)], key: &str) -> Result<Option<T>> {
    match kv.iter().find(|(k, _)| k == key) {
        Some((_, v)) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::parse(input, format!("bad value for `{key}`"))),
        None => Ok(None),
    }
}

fn check_keys(input: &str, kv: &[(String, String)], allowed: &[&str]) -> Result<()> {
    for (k, _) in kv {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::parse(input, format!("unknown key `{k}`")));
        }
    }
    Ok(())
}

/// Loop through the surface from its natural 2D coordinates: polar and
/// azimuthal angle on the sphere, turns on the torus, Cartesian on the plane.
fn from_coordinates<F>(surface: Surface, f: F) -> LoopCurve
where
    F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
{
    LoopCurve::new(surface, move |t| {
        let (a, b) = f(t);
        match surface {
            Surface::Sphere => Surface::sphere_point(a, b),
            Surface::FlatTorus => Surface::torus_point(a, b),
            Surface::Plane => vec![a, b],
        }
    })
}

/// Named point on a surface.
pub fn parse_point(surface: Surface, input: &str) -> Result<Vec<f64>> {
    let x = match (surface, input) {
        (Surface::Sphere, "north") => vec![0.0, 0.0, 1.0],
        (Surface::Sphere, "south") => vec![0.0, 0.0, -1.0],
        (Surface::Sphere, "equator") => vec![1.0, 0.0, 0.0],
        (Surface::FlatTorus, "origin") => Surface::torus_point(0.0, 0.0),
        (Surface::Plane, "origin") => vec![0.0, 0.0],
        _ => {
            let coords = input
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(input, "expected a point id or coordinates"))?;
            if coords.len() != surface.ambient_dim() {
                return Err(Error::parse(
                    input,
                    format!("expected {} coordinates", surface.ambient_dim()),
                ));
            }
            surface.retract(&coords)?
        }
    };
    Ok(x)
}

/// Parse a loop spec such as `latitude:alpha=1.0`.
pub fn parse_loop(surface: Surface, input: &str) -> Result<LoopCurve> {
    let (head, body) = match input.split_once(':') {
        Some((h, b)) => (h.trim(), b.trim()),
        None => (input.trim(), ""),
    };
    match head {
        "latitude" => {
            let kv = key_values(input, body)?;
            check_keys(input, &kv, &["alpha"])?;
            let alpha: f64 = get(input, &kv, "alpha")?.ok_or_else(|| Error::parse(input, "missing `alpha`"))?;
            Ok(latitude(surface, alpha))
        }
        "great-circle" => {
            if !body.is_empty() {
                return Err(Error::parse(input, "great-circle takes no parameters"));
            }
            Ok(match surface {
                Surface::Sphere => LoopCurve::new(surface, |t| {
                    let (s, c) = (2.0 * PI * t).sin_cos();
                    vec![c, s * 0.5f64.cos(), s * 0.5f64.sin()]
                }),
                Surface::FlatTorus => from_coordinates(surface, |t| (t, t)),
                Surface::Plane => from_coordinates(surface, |t| {
                    let (s, c) = (2.0 * PI * t).sin_cos();
                    (c, s)
                }),
            })
        }
        "figure-parametric" => figure(surface, input, body),
        "constant" => Ok(LoopCurve::constant(surface, parse_point(surface, body)?)),
        "random-fourier" => {
            let kv = key_values(input, body)?;
            check_keys(input, &kv, &["modes", "seed"])?;
            let modes: usize = get(input, &kv, "modes")?.unwrap_or(3);
            let seed: u64 = get(input, &kv, "seed")?.unwrap_or(0);
            if modes == 0 || modes > 32 {
                return Err(Error::parse(input, "modes must be in 1..=32"));
            }
            Ok(random_fourier(surface, modes, seed))
        }
        _ => Err(Error::UnknownId(input.to_string())),
    }
}

/// Orbit of the rotation action: the latitude at polar angle `alpha` on the
/// sphere, the circle of radius `alpha` on the plane, and the first circle
/// factor at second angle `alpha` on the torus.
pub fn latitude(surface: Surface, alpha: f64) -> LoopCurve {
    match surface {
        Surface::Sphere => from_coordinates(surface, move |t| (alpha, 2.0 * PI * t)),
        Surface::FlatTorus => from_coordinates(surface, move |t| (t, alpha / (2.0 * PI))),
        Surface::Plane => from_coordinates(surface, move |t| {
            let (s, c) = (2.0 * PI * t).sin_cos();
            (alpha * c, alpha * s)
        }),
    }
}

fn figure(surface: Surface, input: &str, id: &str) -> Result<LoopCurve> {
    let tau = 2.0 * PI;
    let curve = match (surface, id) {
        (Surface::Sphere, "eight") => from_coordinates(surface, move |t| {
            (1.2 + 0.4 * (2.0 * tau * t).sin(), 0.8 * (tau * t).sin())
        }),
        (Surface::Sphere, "lissajous") => from_coordinates(surface, move |t| {
            (1.3 + 0.5 * (3.0 * tau * t).sin(), tau * t + 0.3 * (2.0 * tau * t).sin())
        }),
        (Surface::Sphere, "wobble") => from_coordinates(surface, move |t| (0.6 + 0.3 * (5.0 * tau * t).cos(), tau * t)),
        (Surface::FlatTorus, "eight") => {
            from_coordinates(surface, move |t| (0.15 * (tau * t).sin(), 0.1 * (2.0 * tau * t).sin()))
        }
        (Surface::FlatTorus, "lissajous") => from_coordinates(surface, move |t| {
            (t + 0.1 * (3.0 * tau * t).sin(), 0.2 * (2.0 * tau * t).cos())
        }),
        (Surface::FlatTorus, "wobble") => {
            from_coordinates(surface, move |t| (t, 2.0 * t + 0.05 * (5.0 * tau * t).sin()))
        }
        (Surface::Plane, "eight") => from_coordinates(surface, move |t| ((tau * t).sin(), 0.5 * (2.0 * tau * t).sin())),
        (Surface::Plane, "lissajous") => {
            from_coordinates(surface, move |t| ((3.0 * tau * t).sin(), (2.0 * tau * t).cos()))
        }
        (Surface::Plane, "wobble") => from_coordinates(surface, move |t| {
            let r = 1.0 + 0.2 * (5.0 * tau * t).cos();
            (r * (tau * t).cos(), r * (tau * t).sin())
        }),
        _ => return Err(Error::UnknownId(input.to_string())),
    };
    Ok(curve)
}

/// Random trigonometric polynomial of degree `modes`, retracted onto the surface.
pub fn random_fourier(surface: Surface, modes: usize, seed: u64) -> LoopCurve {
    let mut rng = rng::stream(seed, RANDOM_LOOP_STREAM);
    let mut uniform = |scale: f64| rng.gen_range(-1.0..1.0) * scale;
    match surface {
        Surface::Sphere => {
            let mut centre: Vec<f64> = (0..3).map(|_| uniform(1.0)).collect();
            let r = crate::linalg::norm(&centre).max(1e-3);
            centre.iter_mut().for_each(|x| *x /= r);
            let mut coeffs: Vec<[Vec<f64>; 2]> = (1..=modes)
                .map(|k| {
                    let s = 0.5 / k as f64;
                    [
                        (0..3).map(|_| uniform(s)).collect(),
                        (0..3).map(|_| uniform(s)).collect(),
                    ]
                })
                .collect();
            // keep the curve well inside the tubular neighbourhood
            let total: f64 = coeffs
                .iter()
                .map(|[a, b]| crate::linalg::norm(a) + crate::linalg::norm(b))
                .sum();
            if total > 0.7 {
                let f = 0.7 / total;
                coeffs
                    .iter_mut()
                    .for_each(|[a, b]| a.iter_mut().chain(b.iter_mut()).for_each(|x| *x *= f));
            }
            LoopCurve::new(surface, move |t| fourier_sum(&centre, &coeffs, t))
        }
        Surface::FlatTorus => {
            let winding = [rng.gen_range(-1i32..=1) as f64, rng.gen_range(-1i32..=1) as f64];
            let offset = [rng.gen::<f64>(), rng.gen::<f64>()];
            let mut uniform = |scale: f64| rng.gen_range(-1.0..1.0) * scale;
            let coeffs: Vec<[Vec<f64>; 2]> = (1..=modes)
                .map(|k| {
                    let s = 0.12 / k as f64;
                    [
                        (0..2).map(|_| uniform(s)).collect(),
                        (0..2).map(|_| uniform(s)).collect(),
                    ]
                })
                .collect();
            from_coordinates(surface, move |t| {
                let d = fourier_sum(&[0.0, 0.0], &coeffs, t);
                (offset[0] + winding[0] * t + d[0], offset[1] + winding[1] * t + d[1])
            })
        }
        Surface::Plane => {
            let centre: Vec<f64> = (0..2).map(|_| uniform(0.5)).collect();
            let coeffs: Vec<[Vec<f64>; 2]> = (1..=modes)
                .map(|k| {
                    let s = 0.8 / k as f64;
                    [
                        (0..2).map(|_| uniform(s)).collect(),
                        (0..2).map(|_| uniform(s)).collect(),
                    ]
                })
                .collect();
            LoopCurve::new(surface, move |t| fourier_sum(&centre, &coeffs, t))
        }
    }
}

fn fourier_sum(centre: &[f64], coeffs: &[[Vec<f64>; 2]], t: f64) -> Vec<f64> {
    let mut x = centre.to_vec();
    for (k, [a, b]) in coeffs.iter().enumerate() {
        let (s, c) = (2.0 * PI * (k + 1) as f64 * t).sin_cos();
        for i in 0..x.len() {
            x[i] += a[i] * c + b[i] * s;
        }
    }
    x
}

/// Parse a field spec: `none` or `random:p=<count>,seed=<s>`.
pub fn parse_fields(surface: Surface, input: &str) -> Result<Vec<FieldFn>> {
    let (head, body) = match input.split_once(':') {
        Some((h, b)) => (h.trim(), b.trim()),
        None => (input.trim(), ""),
    };
    match head {
        "none" if body.is_empty() => Ok(Vec::new()),
        "random" => {
            let kv = key_values(input, body)?;
            check_keys(input, &kv, &["p", "seed"])?;
            let p: usize = get(input, &kv, "p")?.ok_or_else(|| Error::parse(input, "missing `p`"))?;
            let seed: u64 = get(input, &kv, "seed")?.unwrap_or(0);
            if p > crate::grassmann::MAX_GENERATORS - 1 {
                return Err(Error::parse(input, "too many fields"));
            }
            Ok(random_fields(surface, p, seed))
        }
        _ => Err(Error::parse(input, "expected `none` or `random:p=<count>,seed=<s>`")),
    }
}

/// `p` smooth random fields of Fourier degree 2 along any loop.
pub fn random_fields(surface: Surface, p: usize, seed: u64) -> Vec<FieldFn> {
    let mut rng = rng::stream(seed, RANDOM_FIELD_STREAM);
    let d = surface.ambient_dim();
    let scale = match surface {
        Surface::FlatTorus => 0.25,
        _ => 1.0,
    };
    (0..p)
        .map(|_| {
            let centre: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
            let coeffs: Vec<[Vec<f64>; 2]> = (1..=2)
                .map(|k| {
                    let s = 0.5 * scale / k as f64;
                    [
                        (0..d).map(|_| rng.gen_range(-1.0..1.0) * s).collect(),
                        (0..d).map(|_| rng.gen_range(-1.0..1.0) * s).collect(),
                    ]
                })
                .collect();
            FieldFn::new(move |t, _| fourier_sum(&centre, &coeffs, t))
        })
        .collect()
}

/// Random tangent vectors at a point.
pub fn random_vectors(surface: Surface, x: &[f64], p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, RANDOM_FIELD_STREAM);
    (0..p)
        .map(|_| {
            let v: Vec<f64> = (0..surface.ambient_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            surface.project(x, &v)
        })
        .collect()
}

/// Random point on a surface.
pub fn random_point(surface: Surface, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, RANDOM_LOOP_STREAM);
    match surface {
        Surface::Sphere => loop {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = crate::linalg::norm(&v);
            if r > 0.2 && r <= 1.0 {
                break v.iter().map(|x| x / r).collect();
            }
        },
        Surface::FlatTorus => Surface::torus_point(rng.gen(), rng.gen()),
        Surface::Plane => vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
    }
}
