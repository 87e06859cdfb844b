//! Run configuration: built-in defaults, overridden by a TOML config file,
//! overridden by command-line flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::specfile::Number;
use crate::cantor::CantorSpec;
use crate::error::{Error, Result};

/// Config file contents; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub spec: Option<String>,
    pub spec2: Option<String>,
    pub rho0: Option<Number>,
    pub factor: Option<Number>,
    pub steps: Option<usize>,
    pub theta: Option<Number>,
    pub grid: Option<usize>,
    pub epsilon: Option<Number>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub max_squares: Option<usize>,
    pub pair_cap: Option<u64>,
    pub samples: Option<usize>,
    pub quadrature: Option<usize>,
    pub quadrature_max_squares: Option<usize>,
    pub tail: Option<usize>,
    pub refine: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub spec: String,
    pub spec2: Option<String>,
    pub rho0: f64,
    pub factor: f64,
    pub steps: usize,
    pub theta: f64,
    pub grid: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub max_squares: usize,
    pub pair_cap: u64,
    pub samples: usize,
    pub quadrature: usize,
    pub quadrature_max_squares: usize,
    pub tail: usize,
    pub refine: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: String::new(),
            spec2: None,
            rho0: 1.0 / 27.0,
            factor: 1.0 / 3.0,
            steps: 4,
            theta: 0.0,
            grid: 1024,
            epsilon: 0.1,
            seed: 0,
            out: PathBuf::from("out"),
            jobs: None,
            max_squares: 1 << 20,
            pair_cap: 1 << 24,
            samples: 1 << 20,
            quadrature: 2048,
            quadrature_max_squares: 1 << 16,
            tail: 3,
            refine: 1,
        }
    }
}

impl RunConfig {
    /// Applies the keys present in a config file.
    pub fn apply_file(&mut self, f: FileConfig) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => {$( if let Some(v) = f.$field { self.$field = v; } )*};
        }
        macro_rules! set_num {
            ($($field:ident),*) => {$( if let Some(v) = f.$field { self.$field = v.value()?; } )*};
        }
        set!(
            spec,
            steps,
            grid,
            seed,
            out,
            max_squares,
            pair_cap,
            samples,
            quadrature,
            quadrature_max_squares,
            tail,
            refine
        );
        set_num!(rho0, factor, theta, epsilon);
        if f.spec2.is_some() {
            self.spec2 = f.spec2;
        }
        if f.jobs.is_some() {
            self.jobs = f.jobs;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.spec.is_empty() {
            return fail("no spec given (use --spec or `spec = ...` in the config file)".into());
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return fail(format!("ladder factor must lie in (0, 1), got {}", self.factor));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return fail(format!("rho0 must be positive, got {}", self.rho0));
        }
        if self.steps < 1 {
            return fail("steps must be at least 1".into());
        }
        if self.grid < 16 {
            return fail(format!("grid must be at least 16, got {}", self.grid));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&self.theta) {
            return fail(format!("theta must lie in [-pi/2, pi/2], got {}", self.theta));
        }
        if self.max_squares == 0 || self.pair_cap == 0 || self.samples == 0 || self.tail == 0 || self.refine == 0 {
            return fail("caps, samples, tail and refine must be positive".into());
        }
        if self.jobs == Some(0) {
            return fail("jobs must be positive".into());
        }
        Ok(())
    }

    /// `rho0 · factor^i` for `i < steps`.
    pub fn ladder(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.rho0 * self.factor.powi(i as i32)).collect()
    }

    /// SHA-256 over the settings that affect results (everything but `out`,
    /// `jobs` and the spec sources) and the resolved specs.
    pub fn hash(&self, specs: &[&CantorSpec]) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            config: RunConfig,
            specs: &'a [&'a CantorSpec],
        }
        let config = RunConfig { spec: String::new(), spec2: None, out: PathBuf::new(), jobs: None, ..self.clone() };
        let json = serde_json::to_vec(&Hashed { config, specs }).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::presets;

    #[test]
    fn file_values_are_applied() {
        let f: FileConfig = toml::from_str("spec = \"builtin:golden\"\nrho0 = \"1/81\"\nsteps = 2\njobs = 3").unwrap();
        let mut c = RunConfig::default();
        c.apply_file(f).unwrap();
        assert_eq!(c.spec, "builtin:golden");
        assert_eq!(c.rho0, 1.0 / 81.0);
        let ladder = c.ladder();
        assert_eq!(ladder.len(), 2);
        assert!((ladder[1] - 1.0 / 243.0).abs() <= 1e-18);
        assert_eq!(c.jobs, Some(3));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
        let c = RunConfig { spec: "x".into(), factor: 1.5, ..Default::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { spec: "x".into(), grid: 8, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_jobs_and_output() {
        let spec = presets::middle_third();
        let a = RunConfig { spec: "s".into(), ..Default::default() };
        let b = RunConfig { jobs: Some(8), out: "elsewhere".into(), ..a.clone() };
        let c = RunConfig { seed: 1, ..a.clone() };
        assert_eq!(a.hash(&[&spec]), b.hash(&[&spec]));
        assert_ne!(a.hash(&[&spec]), c.hash(&[&spec]));
        assert_eq!(a.hash(&[&spec]).len(), 64);
    }
}
