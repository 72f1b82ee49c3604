//! Finite-rank complex Grassmann algebra `Λ[η₀ … η_{p-1}]` with `r × r` complex
//! matrix coefficients.
//!
//! Every form value, superfield and super transport in this crate lives here.
//! Generators are indexed from zero. A monomial `η_{a₁} ⋯ η_{a_k}` is stored in
//! canonical (increasing) order and addressed by the bitmask [`IndexSet`].
//! Matrix coefficients multiply in the order written; they do not commute.
//!
//! A `k`-form `ω` evaluated on the odd vector `Σ_a η_a X_a` is represented as
//! `Σ_{a₁<…<a_k} ω(X_{a₁},…,X_{a_k}) η_{a₁}⋯η_{a_k}`, so the coefficient of the
//! top monomial of a `p`-form superfield is the form evaluated on `(X₀,…,X_{p-1})`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// Maximum number of odd generators.
pub const MAX_GENERATORS: usize = 16;

/// A set of generator indices, i.e. a canonical monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u32) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &a in indices {
            if a >= MAX_GENERATORS {
                return Err(Error::Dimension(format!("generator index {a} exceeds cap")));
            }
            if bits & (1 << a) != 0 {
                return Err(Error::Dimension(format!("repeated generator index {a}")));
            }
            bits |= 1 << a;
        }
        Ok(IndexSet(bits))
    }

    /// `{0, …, p-1}`
    pub fn full(p: usize) -> Self {
        IndexSet(((1u64 << p) - 1) as u32)
    }

    pub fn singleton(a: usize) -> Self {
        IndexSet(1 << a)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, a: usize) -> bool {
        self.0 & (1 << a) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_GENERATORS).filter(move |&a| self.contains(a))
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, a) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// Sign of reordering the product `η_I · η_J` of two disjoint canonical
/// monomials into canonical order.
pub fn reorder_sign(i: IndexSet, j: IndexSet) -> f64 {
    let mut swaps = 0u32;
    let mut rest = j.0;
    while rest != 0 {
        let b = rest.trailing_zeros();
        // generators of I strictly above b must hop over η_b
        swaps += (i.0 >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Element of `Λ[η₀…η_{p-1}] ⊗ Mat(r, ℂ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannElement {
    generators: usize,
    dim: usize,
    /// `2^p` row-major `r × r` blocks, one per monomial.
    data: Vec<C64>,
}

impl GrassmannElement {
    pub fn zero(generators: usize, dim: usize) -> Self {
        assert!(generators <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        assert!(dim > 0, "matrix size must be positive");
        GrassmannElement {
            generators,
            dim,
            data: vec![C64::new(0.0, 0.0); (1usize << generators) * dim * dim],
        }
    }

    /// Identity matrix in the body, no soul.
    pub fn identity(generators: usize, dim: usize) -> Self {
        Self::from_body(generators, &linalg::identity(dim))
    }

    /// Scalar (`r = 1`) element with the given body.
    pub fn scalar(generators: usize, value: C64) -> Self {
        let mut e = Self::zero(generators, 1);
        e.data[0] = value;
        e
    }

    pub fn from_body(generators: usize, body: &CMat) -> Self {
        let mut e = Self::zero(generators, body.nrows());
        e.set_coeff(IndexSet::EMPTY, body);
        e
    }

    /// The scalar generator `η_a`.
    pub fn generator(generators: usize, a: usize) -> Self {
        assert!(a < generators, "generator {a} out of range");
        let mut e = Self::zero(generators, 1);
        e.data[1 << a] = C64::new(1.0, 0.0);
        e
    }

    /// `coefficient · η_I`
    pub fn monomial(generators: usize, set: IndexSet, coefficient: &CMat) -> Self {
        let mut e = Self::zero(generators, coefficient.nrows());
        e.set_coeff(set, coefficient);
        e
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Matrix size `r`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn block(&self) -> usize {
        self.dim * self.dim
    }

    fn slot(&self, set: IndexSet) -> &[C64] {
        let b = self.block();
        &self.data[set.index() * b..(set.index() + 1) * b]
    }

    fn slot_mut(&mut self, set: IndexSet) -> &mut [C64] {
        let b = self.block();
        &mut self.data[set.index() * b..(set.index() + 1) * b]
    }

    fn check_set(&self, set: IndexSet) -> Result<()> {
        if set.bits() >> self.generators != 0 {
            return Err(Error::Dimension(format!(
                "monomial {set} outside rank {}",
                self.generators
            )));
        }
        Ok(())
    }

    /// Coefficient of `η_I`.
    pub fn coeff(&self, set: IndexSet) -> Result<CMat> {
        self.check_set(set)?;
        Ok(CMat::from_row_slice(self.dim, self.dim, self.slot(set)))
    }

    /// Coefficient of a scalar element; the `(0,0)` entry otherwise.
    pub fn scalar_coeff(&self, set: IndexSet) -> C64 {
        self.slot(set)[0]
    }

    pub fn set_coeff(&mut self, set: IndexSet, value: &CMat) {
        assert_eq!(value.nrows(), self.dim);
        assert_eq!(value.ncols(), self.dim);
        let d = self.dim;
        let slot = self.slot_mut(set);
        for r in 0..d {
            for c in 0..d {
                slot[r * d + c] = value[(r, c)];
            }
        }
    }

    pub fn body(&self) -> CMat {
        CMat::from_row_slice(self.dim, self.dim, self.slot(IndexSet::EMPTY))
    }

    /// The element with its body removed.
    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.slot_mut(IndexSet::EMPTY).fill(C64::new(0.0, 0.0));
        s
    }

    /// Iterator over all monomials of the algebra.
    pub fn monomials(&self) -> impl Iterator<Item = IndexSet> {
        (0..(1u32 << self.generators)).map(IndexSet::from_bits)
    }

    fn is_zero_slot(&self, set: IndexSet) -> bool {
        self.slot(set).iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Nonzero monomials, in increasing bitmask order.
    pub fn support(&self) -> Vec<IndexSet> {
        self.monomials().filter(|&s| !self.is_zero_slot(s)).collect()
    }

    /// The homogeneous component of the given degree.
    pub fn degree_part(&self, degree: usize) -> Self {
        let mut out = Self::zero(self.generators, self.dim);
        for s in self.monomials().filter(|s| s.len() == degree) {
            out.slot_mut(s).copy_from_slice(self.slot(s));
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.monomials()
            .filter(|s| s.len() % 2 == 1)
            .all(|s| self.is_zero_slot(s))
    }

    pub fn is_odd(&self) -> bool {
        self.monomials()
            .filter(|s| s.len() % 2 == 0)
            .all(|s| self.is_zero_slot(s))
    }

    /// `Some(0)` for even, `Some(1)` for odd, `None` for mixed parity. Zero is even.
    pub fn parity(&self) -> Option<usize> {
        if self.is_even() {
            Some(0)
        } else if self.is_odd() {
            Some(1)
        } else {
            None
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.generators == other.generators && self.dim == other.dim
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "Λ[{}]⊗Mat({}) vs Λ[{}]⊗Mat({})",
                self.generators, self.dim, other.generators, other.dim
            )))
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= factor);
        out
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, factor: C64, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled_assign(factor, other);
        out
    }

    pub fn add_scaled_assign(&mut self, factor: C64, other: &Self) {
        assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    /// Graded product; errors on rank or matrix-size mismatch.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.dim;
        let b = self.block();
        let mut out = Self::zero(self.generators, d);
        let left = self.support();
        let right = other.support();
        for &i in &left {
            let a = self.slot(i);
            for &j in &right {
                if i.bits() & j.bits() != 0 {
                    continue;
                }
                let sign = reorder_sign(i, j);
                let m = other.slot(j);
                let k = (i.bits() | j.bits()) as usize;
                let dst = &mut out.data[k * b..(k + 1) * b];
                for r in 0..d {
                    for c in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for t in 0..d {
                            acc += a[r * d + t] * m[t * d + c];
                        }
                        dst[r * d + c] += acc * sign;
                    }
                }
            }
        }
        out
    }

    /// Multiply every coefficient on the left by a plain matrix.
    pub fn left_mul_matrix(&self, m: &CMat) -> Self {
        Self::from_body(self.generators, m).mul_unchecked(self)
    }

    pub fn right_mul_matrix(&self, m: &CMat) -> Self {
        self.mul_unchecked(&Self::from_body(self.generators, m))
    }

    /// Exponential by scaling and squaring with a truncated power series.
    ///
    /// The soul is nilpotent, so the series is exact in the Grassmann
    /// directions once the body has been scaled below `0.5`.
    pub fn exp(&self) -> Result<Self> {
        let body = self.body();
        let norm = (0..self.dim)
            .map(|r| body.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        if !norm.is_finite() {
            return Err(Error::Numeric("non-finite exponent".into()));
        }
        let mut squarings = 0u32;
        while norm / f64::from(2u32).powi(squarings as i32) > 0.5 {
            squarings += 1;
        }
        let scaled = self.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut sum = Self::identity(self.generators, self.dim);
        let mut term = sum.clone();
        for k in 1..=64usize {
            term = term.mul_unchecked(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
            sum.add_scaled_assign(C64::new(1.0, 0.0), &term);
            let small = term.max_abs() <= 1e-17 * sum.max_abs().max(1.0);
            if small && k > self.generators {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul_unchecked(&sum);
        }
        if sum.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("overflow in exponential".into()));
        }
        Ok(sum)
    }

    /// Coefficient-wise matrix trace, a scalar element.
    pub fn trace(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zero(self.generators, 1);
        for s in self.monomials() {
            let slot = self.slot(s);
            out.data[s.index()] = (0..d).map(|r| slot[r * d + r]).sum();
        }
        out
    }

    /// Inverse; exists iff the body is invertible.
    pub fn inverse(&self) -> Result<Self> {
        let body_inv = linalg::inverse(&self.body())?;
        let nil = Self::from_body(self.generators, &body_inv).mul_unchecked(&self.soul());
        let minus_nil = nil.scale(C64::new(-1.0, 0.0));
        let mut sum = Self::identity(self.generators, self.dim);
        let mut term = sum.clone();
        for _ in 0..self.generators {
            term = term.mul_unchecked(&minus_nil);
            if term.max_abs() == 0.0 {
                break;
            }
            sum.add_scaled_assign(C64::new(1.0, 0.0), &term);
        }
        Ok(sum.right_mul_matrix(&body_inv))
    }

    /// Embed into `Λ[η₀…η_{generators-1}]`, shifting generator `a` to `a + offset`.
    pub fn lift(&self, generators: usize, offset: usize) -> Self {
        assert!(self.generators + offset <= generators);
        let mut out = Self::zero(generators, self.dim);
        for s in self.monomials() {
            let t = IndexSet::from_bits(s.bits() << offset);
            out.slot_mut(t).copy_from_slice(self.slot(s));
        }
        out
    }

    /// Coefficients uniform in the unit square, restricted to monomials of
    /// the given parity (`0` even, `1` odd) when one is requested.
    pub fn random<R: rand::Rng>(rng: &mut R, generators: usize, dim: usize, parity: Option<usize>) -> Self {
        let mut e = Self::zero(generators, dim);
        for bits in 0u32..(1 << generators) {
            let s = IndexSet::from_bits(bits);
            if parity.is_some_and(|q| s.len() % 2 != q) {
                continue;
            }
            for z in e.slot_mut(s) {
                *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        e
    }

    /// Split `x = a + η₀ b` into `(a, b)` over the remaining generators,
    /// renumbered down by one.
    pub fn split_first(&self) -> (Self, Self) {
        assert!(self.generators >= 1);
        let p = self.generators - 1;
        let mut a = Self::zero(p, self.dim);
        let mut b = Self::zero(p, self.dim);
        for s in self.monomials() {
            let rest = IndexSet::from_bits(s.bits() >> 1);
            if s.contains(0) {
                b.slot_mut(rest).copy_from_slice(self.slot(s));
            } else {
                a.slot_mut(rest).copy_from_slice(self.slot(s));
            }
        }
        (a, b)
    }
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.add_scaled(C64::new(1.0, 0.0), rhs)
    }
}

impl AddAssign<&GrassmannElement> for GrassmannElement {
    fn add_assign(&mut self, rhs: &GrassmannElement) {
        self.add_scaled_assign(C64::new(1.0, 0.0), rhs);
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.add_scaled(C64::new(-1.0, 0.0), rhs)
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Panics on shape mismatch; use [`gmul`] for a checked product.
impl Mul for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: &GrassmannElement) -> GrassmannElement {
        assert!(self.same_shape(rhs), "Grassmann shape mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Mul<C64> for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: C64) -> GrassmannElement {
        self.scale(rhs)
    }
}

pub fn gmul(a: &GrassmannElement, b: &GrassmannElement) -> Result<GrassmannElement> {
    a.try_mul(b)
}

pub fn gexp(a: &GrassmannElement) -> Result<GrassmannElement> {
    a.exp()
}

pub fn gtrace(a: &GrassmannElement) -> GrassmannElement {
    a.trace()
}

pub fn coeff(a: &GrassmannElement, set: IndexSet) -> Result<CMat> {
    a.coeff(set)
}
