//! TOML spec files. Numbers may be TOML floats or integers, or strings
//! holding a rational `"a/b"`.
//!
//! ```toml
//! intervals = [["0", "1/3"], ["2/3", "1"]]
//! transition = [[1, 1], [1, 1]]
//!
//! [[branches]]
//! kind = "affine"
//! onto = ["0", "1"]
//!
//! [[branches]]
//! kind = "affine"
//! slope = 3
//! offset = -2
//! ```
//!
//! Branch forms: `affine` with `slope` and `offset`, or with `onto` and an
//! optional `reversed`; `cubic` with `coeffs` (`c0 + c1 x + c2 x^2 + c3 x^3`),
//! or with `onto` and `kappa`.

use std::path::Path;

use serde::Deserialize;

use crate::cantor::{presets, Branch, CantorSpec};
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> Result<f64> {
        match self {
            Number::Int(i) => Ok(*i as f64),
            Number::Float(f) => Ok(*f),
            Number::Text(s) => parse_rational(s),
        }
    }
}

/// `"a"`, `"a.b"`, `"a/b"` or `"-a/b"`.
pub fn parse_rational(s: &str) -> Result<f64> {
    let bad = || Error::InvalidSpec(format!("cannot parse number {s:?}"));
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(bad());
            }
            n / d
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    kind: String,
    slope: Option<Number>,
    offset: Option<Number>,
    onto: Option<[Number; 2]>,
    #[serde(default)]
    reversed: bool,
    coeffs: Option<[Number; 4]>,
    kappa: Option<Number>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    intervals: Vec<[Number; 2]>,
    transition: Option<Vec<Vec<u8>>>,
    branches: Vec<RawBranch>,
    holder_alpha: Option<Number>,
}

fn branch(raw: &RawBranch, iv: Interval, index: usize) -> Result<Branch> {
    let missing = |what: &str| Error::InvalidSpec(format!("branch {}: {} needs {what}", index + 1, raw.kind));
    let onto =
        || -> Result<Option<(f64, f64)>> { raw.onto.as_ref().map(|[a, b]| Ok((a.value()?, b.value()?))).transpose() };
    match raw.kind.as_str() {
        "affine" => match (onto()?, &raw.slope, &raw.offset) {
            (Some((lo, hi)), None, None) => Ok(Branch::affine_onto(iv.lo, iv.hi, lo, hi, raw.reversed)),
            (None, Some(slope), Some(offset)) => Ok(Branch::Affine { slope: slope.value()?, offset: offset.value()? }),
            _ => Err(missing("either `onto` or both `slope` and `offset`")),
        },
        "cubic" => match (&raw.coeffs, onto()?, &raw.kappa) {
            (Some(c), None, None) => {
                Ok(Branch::Cubic { coeffs: [c[0].value()?, c[1].value()?, c[2].value()?, c[3].value()?] })
            }
            (None, Some((lo, hi)), Some(kappa)) => Ok(Branch::cubic_profile(iv.lo, iv.hi, lo, hi, kappa.value()?)),
            _ => Err(missing("either `coeffs` or both `onto` and `kappa`")),
        },
        other => Err(Error::InvalidSpec(format!("branch {}: unknown kind {other:?}", index + 1))),
    }
}

/// Parses spec TOML text; a missing `transition` means the full shift.
pub fn parse_spec(text: &str) -> Result<CantorSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.message().to_string()))?;
    let intervals: Vec<Interval> =
        raw.intervals.iter().map(|[a, b]| Ok(Interval::new(a.value()?, b.value()?))).collect::<Result<_>>()?;
    if raw.branches.len() != intervals.len() {
        return Err(Error::InvalidSpec(format!("{} intervals but {} branches", intervals.len(), raw.branches.len())));
    }
    let branches =
        raw.branches.iter().zip(&intervals).enumerate().map(|(i, (b, iv))| branch(b, *iv, i)).collect::<Result<_>>()?;
    let r = intervals.len();
    Ok(CantorSpec {
        intervals,
        branches,
        transition: raw.transition.unwrap_or_else(|| vec![vec![1; r]; r]),
        holder_alpha: raw.holder_alpha.map(|a| a.value()).transpose()?.unwrap_or(1.0),
    })
}

/// `builtin:<name>` or a path to a TOML spec file.
pub fn load_spec(source: &str) -> Result<CantorSpec> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return presets::by_name(name).ok_or_else(|| {
            Error::InvalidSpec(format!("unknown builtin {name:?}; known: {}", presets::NAMES.join(", ")))
        });
    }
    let text = std::fs::read_to_string(Path::new(source))
        .map_err(|e| Error::Config(format!("cannot read spec {source:?}: {e}")))?;
    parse_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::CantorSet;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_rational(" -2/4 ").unwrap(), -0.5);
        assert_eq!(parse_rational("0.25").unwrap(), 0.25);
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn middle_third_file_matches_preset() {
        let text = r#"
            intervals = [["0", "1/3"], ["2/3", 1]]
            [[branches]]
            kind = "affine"
            onto = [0, 1]
            [[branches]]
            kind = "affine"
            slope = 3
            offset = -2.0
        "#;
        let spec = parse_spec(text).unwrap();
        let a = CantorSet::new(spec).unwrap();
        let b = CantorSet::new(presets::middle_third()).unwrap();
        assert_abs_diff_eq!(a.dimension().unwrap().d, b.dimension().unwrap().d, epsilon = 1e-15);
        assert_eq!(a.spec().transition, vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn cubic_profile_form() {
        let text = r#"
            intervals = [[0, 0.4], [0.6, 1]]
            [[branches]]
            kind = "cubic"
            onto = [0, 1]
            kappa = 0.5
            [[branches]]
            kind = "cubic"
            onto = [0, 1]
            kappa = "-2/5"
        "#;
        assert_eq!(parse_spec(text).unwrap(), presets::cubic_doubling());
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(parse_spec("intervals = [[0, 1]]\nbranches = []").is_err());
        let text = "intervals = [[0, 1]]\n[[branches]]\nkind = \"affine\"\nslope = 2";
        assert!(parse_spec(text).is_err());
        assert!(load_spec("builtin:nope").is_err());
        assert!(load_spec("builtin:golden").is_ok());
    }
}
