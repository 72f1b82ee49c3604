//! Functions on `ℝ¹|¹`, the odd vector fields `D`, `Q`, `D_cs`, and the
//! group law of `ℝ¹|¹_cs`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::grassmann::GrassmannElement;
use crate::linalg::{c, C64, I};

/// Largest polynomial degree a [`Superfunction`] may carry.
pub const MAX_DEGREE: usize = 32;

/// Complex polynomial in `t`, lowest coefficient first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|z| *z == c(0.0)) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(z: C64) -> Self {
        Polynomial::new(vec![z])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: C64) -> C64 {
        self.coeffs.iter().rev().fold(c(0.0), |acc, a| acc * t + a)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, z: C64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|a| a * z).collect())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial, k: usize| p.coeffs.get(k).copied().unwrap_or(c(0.0));
        Polynomial::new((0..n).map(|k| get(self, k) + get(rhs, k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(c(-1.0))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![c(0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// `f(t) + θ g(t)` on `ℝ¹|¹`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Superfunction {
    pub even: Polynomial,
    pub odd: Polynomial,
}

impl Superfunction {
    pub fn new(even: Polynomial, odd: Polynomial) -> Result<Self> {
        let d = even.degree().max(odd.degree());
        if d > MAX_DEGREE {
            return Err(Error::Dimension(format!("degree {d} exceeds {MAX_DEGREE}")));
        }
        Ok(Superfunction { even, odd })
    }

    pub fn even_part(&self) -> Self {
        Superfunction {
            even: self.even.clone(),
            odd: Polynomial::zero(),
        }
    }

    pub fn odd_part(&self) -> Self {
        Superfunction {
            even: Polynomial::zero(),
            odd: self.odd.clone(),
        }
    }

    /// `∂_t`
    pub fn dt(&self) -> Self {
        Superfunction {
            even: self.even.derivative(),
            odd: self.odd.derivative(),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Superfunction {
            even: self.even.scale(z),
            odd: self.odd.scale(z),
        }
    }
}

impl Add for &Superfunction {
    type Output = Superfunction;
    fn add(self, rhs: &Superfunction) -> Superfunction {
        Superfunction {
            even: &self.even + &rhs.even,
            odd: &self.odd + &rhs.odd,
        }
    }
}

impl Sub for &Superfunction {
    type Output = Superfunction;
    fn sub(self, rhs: &Superfunction) -> Superfunction {
        Superfunction {
            even: &self.even - &rhs.even,
            odd: &self.odd - &rhs.odd,
        }
    }
}

impl Neg for &Superfunction {
    type Output = Superfunction;
    fn neg(self) -> Superfunction {
        self.scale(c(-1.0))
    }
}

/// `(f₁ + θg₁)(f₂ + θg₂) = f₁f₂ + θ(g₁f₂ + f₁g₂)`
impl Mul for &Superfunction {
    type Output = Superfunction;
    fn mul(self, rhs: &Superfunction) -> Superfunction {
        Superfunction {
            even: &self.even * &rhs.even,
            odd: &(&self.odd * &rhs.even) + &(&self.even * &rhs.odd),
        }
    }
}

/// `D = ∂_θ + θ∂_t`: `D(f + θg) = g + θf′`.
pub fn op_d(s: &Superfunction) -> Superfunction {
    Superfunction {
        even: s.odd.clone(),
        odd: s.even.derivative(),
    }
}

/// `Q = ∂_θ − θ∂_t`: `Q(f + θg) = g − θf′`.
pub fn op_q(s: &Superfunction) -> Superfunction {
    Superfunction {
        even: s.odd.clone(),
        odd: s.even.derivative().scale(c(-1.0)),
    }
}

/// `D_cs = (1/2π)∂_θ − iθ∂_t`: `D_cs(f + θg) = (1/2π)g − iθf′`.
pub fn op_dcs(s: &Superfunction) -> Superfunction {
    Superfunction {
        even: s.odd.scale(c(1.0 / (2.0 * PI))),
        odd: s.even.derivative().scale(-I),
    }
}

/// An `S`-point `(t, θ)` of `ℝ¹|¹_cs` with Grassmann-valued coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPoint {
    pub t: GrassmannElement,
    pub theta: GrassmannElement,
}

impl SuperPoint {
    pub fn new(t: GrassmannElement, theta: GrassmannElement) -> Result<Self> {
        if !t.same_shape(&theta) || t.dim() != 1 {
            return Err(Error::Dimension(
                "t and θ must be scalar elements of one algebra".into(),
            ));
        }
        if !t.is_even() {
            return Err(Error::Dimension("t must be even".into()));
        }
        if !theta.is_odd() {
            return Err(Error::Dimension("θ must be odd".into()));
        }
        Ok(SuperPoint { t, theta })
    }

    /// The identity `(0, 0)` over `generators` ambient generators.
    pub fn identity(generators: usize) -> Self {
        SuperPoint {
            t: GrassmannElement::zero(generators, 1),
            theta: GrassmannElement::zero(generators, 1),
        }
    }

    pub fn inverse(&self) -> Self {
        SuperPoint {
            t: -&self.t,
            theta: -&self.theta,
        }
    }
}

/// `μ((t₁, θ₁), (t₂, θ₂)) = (t₁ + t₂ + θ₁θ₂, θ₁ + θ₂)`
pub fn mu(p1: &SuperPoint, p2: &SuperPoint) -> Result<SuperPoint> {
    if !p1.t.same_shape(&p2.t) {
        return Err(Error::Dimension(format!(
            "super points over {} and {} generators",
            p1.t.generators(),
            p2.t.generators()
        )));
    }
    let cross = p1.theta.try_mul(&p2.theta)?;
    Ok(SuperPoint {
        t: &(&p1.t + &p2.t) + &cross,
        theta: &p1.theta + &p2.theta,
    })
}
