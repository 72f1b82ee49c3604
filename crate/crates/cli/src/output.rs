//! Result rows and their CSV encoding.

use std::io::Write;
use std::time::Instant;

use bchlab_core::linalg::C64;
use bchlab_core::rng::PRNG_NAME;

use crate::error::CliError;

pub const HEADER: [&str; 6] = ["quantity", "value_re", "value_im", "reference", "abs_err", "runtime_ms"];

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub quantity: String,
    pub value: C64,
    pub reference: Option<C64>,
    pub abs_err: Option<f64>,
    pub runtime_ms: f64,
    /// Tolerance on `abs_err`; rows without one are informational.
    pub tol: Option<f64>,
    /// Outcome of checks that are not a distance to a reference.
    pub check: Option<bool>,
}

impl ResultRow {
    pub fn value(quantity: impl Into<String>, value: C64, runtime_ms: f64) -> Self {
        ResultRow {
            quantity: quantity.into(),
            value,
            reference: None,
            abs_err: None,
            runtime_ms,
            tol: None,
            check: None,
        }
    }

    pub fn real(quantity: impl Into<String>, value: f64, runtime_ms: f64) -> Self {
        Self::value(quantity, C64::new(value, 0.0), runtime_ms)
    }

    /// A row compared against `reference` within `tol`.
    pub fn compared(quantity: impl Into<String>, value: C64, reference: C64, tol: f64, runtime_ms: f64) -> Self {
        ResultRow {
            abs_err: Some((value - reference).norm()),
            reference: Some(reference),
            tol: Some(tol),
            ..Self::value(quantity, value, runtime_ms)
        }
    }

    /// A nonnegative error measure that should vanish.
    pub fn residual(quantity: impl Into<String>, err: f64, tol: f64, runtime_ms: f64) -> Self {
        Self::compared(quantity, C64::new(err, 0.0), C64::new(0.0, 0.0), tol, runtime_ms)
    }

    pub fn with_check(mut self, ok: bool) -> Self {
        self.check = Some(ok);
        self
    }

    pub fn passes(&self) -> bool {
        let within = match (self.abs_err, self.tol) {
            (Some(e), Some(t)) => e <= t,
            _ => true,
        };
        within && self.check.unwrap_or(true)
    }

    fn fields(&self) -> [String; 6] {
        let reference = match self.reference {
            None => String::new(),
            Some(z) if z.im == 0.0 => num(z.re),
            Some(z) if z.im < 0.0 => format!("{}-{}i", num(z.re), num(-z.im)),
            Some(z) => format!("{}+{}i", num(z.re), num(z.im)),
        };
        [
            self.quantity.clone(),
            num(self.value.re),
            num(self.value.im),
            reference,
            self.abs_err.map(num).unwrap_or_default(),
            format!("{:.3}", self.runtime_ms),
        ]
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Milliseconds elapsed since `start`.
pub fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Time `f` and return its value with the elapsed milliseconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, ms(start))
}

pub fn write_csv<W: Write>(out: W, seed: u64, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut out = out;
    writeln!(out, "# bchlab seed={seed} prng={PRNG_NAME}")?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}
