//! Experiment configuration from a `key = value` file and command-line flags.

use std::path::{Path, PathBuf};

use bchlab_core::transport::Method;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub bundle: String,
    pub loop_spec: String,
    pub fields: String,
    pub method: Method,
    pub steps: usize,
    /// Loop samples; defaults to four per step.
    pub samples: Option<usize>,
    pub quad: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub suite: String,
    pub reverse: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            bundle: "cp1-tautological".into(),
            loop_spec: "latitude:alpha=1.0".into(),
            fields: "random:p=2".into(),
            method: Method::Rk4,
            steps: 512,
            samples: None,
            quad: 128,
            tol: None,
            seed: 0,
            out: None,
            suite: "all".into(),
            reverse: false,
        }
    }
}

/// Values given on the command line; `None` leaves the config untouched.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub bundle: Option<String>,
    pub loop_spec: Option<String>,
    pub fields: Option<String>,
    pub method: Option<String>,
    pub steps: Option<usize>,
    pub quad: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub suite: Option<String>,
    pub reverse: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| usage(format!("config key `{key}`: cannot parse `{value}`")))
}

impl ExperimentConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "bundle" => self.bundle = value.to_string(),
            "loop" => self.loop_spec = value.to_string(),
            "fields" => self.fields = value.to_string(),
            "method" => self.method = value.parse().map_err(|e| usage(format!("{e}")))?,
            "steps" => self.steps = number(key, value)?,
            "samples" => self.samples = Some(number(key, value)?),
            "quad" => self.quad = number(key, value)?,
            "tol" => self.tol = Some(number(key, value)?),
            "seed" => self.seed = number(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "suite" => self.suite = value.to_string(),
            "reverse" => self.reverse = number(key, value)?,
            _ => return Err(usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(v) = &o.bundle {
            self.bundle = v.clone();
        }
        if let Some(v) = &o.loop_spec {
            self.loop_spec = v.clone();
        }
        if let Some(v) = &o.fields {
            self.fields = v.clone();
        }
        if let Some(v) = &o.method {
            self.set("method", v)?;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.quad {
            self.quad = v;
        }
        if o.tol.is_some() {
            self.tol = o.tol;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        if let Some(v) = &o.suite {
            self.suite = v.clone();
        }
        self.reverse |= o.reverse;
        Ok(())
    }

    /// Loop samples, at least four per step and a multiple of twice the steps.
    pub fn sample_count(&self) -> usize {
        self.samples.unwrap_or(4 * self.steps.max(1))
    }

    /// The field spec with the global seed filled in when none is given.
    pub fn field_spec(&self) -> String {
        let spec = self.fields.trim();
        if spec.starts_with("random") && !spec.contains("seed=") {
            let sep = if spec.contains(':') { "," } else { ":" };
            format!("{spec}{sep}seed={}", self.seed)
        } else {
            spec.to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let cfg =
            ExperimentConfig::parse("# comment\nbundle = cp1-dual\nsteps=64 # inline\n\nmethod = midpoint\n").unwrap();
        assert_eq!(cfg.bundle, "cp1-dual");
        assert_eq!(cfg.steps, 64);
        assert_eq!(cfg.method, Method::Midpoint);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        assert!(matches!(
            ExperimentConfig::parse("colour = red"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("steps = many"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(ExperimentConfig::parse("steps"), Err(CliError::Usage(_))));
    }

    #[test]
    fn flags_win() {
        let mut cfg = ExperimentConfig::parse("steps = 64\nseed = 3").unwrap();
        cfg.apply(&Overrides {
            steps: Some(128),
            ..Default::default()
        })
        .unwrap();
        assert_eq!((cfg.steps, cfg.seed), (128, 3));
    }

    #[test]
    fn seed_is_filled_into_random_fields() {
        let cfg = ExperimentConfig {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(cfg.field_spec(), "random:p=2,seed=9");
        let explicit = ExperimentConfig {
            fields: "random:p=3,seed=1".into(),
            ..Default::default()
        };
        assert_eq!(explicit.field_spec(), "random:p=3,seed=1");
    }
}
