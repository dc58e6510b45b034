//! Structured reporting for all verification suites.
//!
//! Reports serialize to a single JSON document with every number rendered as
//! a decimal string, so identical configurations produce byte-identical
//! files. Wall-clock runtimes are kept in memory for console display but are
//! never written to the report file.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Result of one identity check.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub suite: String,
    pub check_id: String,
    pub status: Status,
    /// "exact-zero" for symbolic checks, a decimal string otherwise.
    pub residual: String,
    pub tolerance: String,
    pub runtime_ms: u128,
    pub details: BTreeMap<String, String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn numeric(
        suite: &str,
        check_id: &str,
        residual: f64,
        tolerance: f64,
        runtime_ms: u128,
    ) -> Self {
        IdentityReport {
            suite: suite.into(),
            check_id: check_id.into(),
            status: if residual.is_finite() && residual <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            residual: format!("{residual:e}"),
            tolerance: format!("{tolerance:e}"),
            runtime_ms,
            details: BTreeMap::new(),
        }
    }

    pub fn exact(suite: &str, check_id: &str, passed: bool, runtime_ms: u128) -> Self {
        IdentityReport {
            suite: suite.into(),
            check_id: check_id.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            residual: if passed { "exact-zero".into() } else { "nonzero".into() },
            tolerance: "exact".into(),
            runtime_ms,
            details: BTreeMap::new(),
        }
    }

    pub fn with_detail(mut self, key: &str, value: String) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:44} residual {} (tol {}) {} ms",
            match self.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            },
            format!("{}/{}", self.suite, self.check_id),
            self.residual,
            self.tolerance,
            self.runtime_ms
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteId {
    Scalar,
    Symbolic,
    Rewrite,
    Sl2Kac,
    Eigen,
    Isometry,
    All,
}

impl SuiteId {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "scalar" => SuiteId::Scalar,
            "symbolic" => SuiteId::Symbolic,
            "rewrite" => SuiteId::Rewrite,
            "sl2-kac" => SuiteId::Sl2Kac,
            "eigen" => SuiteId::Eigen,
            "isometry" => SuiteId::Isometry,
            "all" => SuiteId::All,
            other => return Err(Error::Usage(format!("unknown suite id: {other}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SuiteId::Scalar => "scalar",
            SuiteId::Symbolic => "symbolic",
            SuiteId::Rewrite => "rewrite",
            SuiteId::Sl2Kac => "sl2-kac",
            SuiteId::Eigen => "eigen",
            SuiteId::Isometry => "isometry",
            SuiteId::All => "all",
        }
    }
}

/// Configuration of a suite run. Precedence: CLI flags over the QGV_PREC /
/// QGV_B environment variables over the defaults (b = 0.75, prec = 192).
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub b: f64,
    pub prec: u32,
    pub tol_override: Option<f64>,
    pub out: Option<std::path::PathBuf>,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(suite: SuiteId) -> Self {
        let env_b = std::env::var("QGV_B").ok().and_then(|v| v.parse().ok());
        let env_prec = std::env::var("QGV_PREC").ok().and_then(|v| v.parse().ok());
        SuiteConfig {
            suite,
            b: env_b.unwrap_or(0.75),
            prec: env_prec.unwrap_or(192),
            tol_override: None,
            out: None,
            seed: 20240 + 9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) {
            return Err(Error::Usage("b must be positive".into()));
        }
        if self.prec < 64 {
            return Err(Error::Usage("prec must be at least 64 bits".into()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CheckJson<'a> {
    suite: &'a str,
    check_id: &'a str,
    status: Status,
    residual: &'a str,
    tolerance: &'a str,
    details: &'a BTreeMap<String, String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    suite: &'a str,
    b: String,
    prec: u32,
    checks: Vec<CheckJson<'a>>,
}

/// Serialize the reports; byte-stable for a fixed (config, fixtures, build).
/// Runtimes are intentionally omitted.
pub fn render_report(cfg: &SuiteConfig, reports: &[IdentityReport]) -> String {
    let doc = ReportJson {
        suite: cfg.suite.name(),
        b: format!("{}", cfg.b),
        prec: cfg.prec,
        checks: reports
            .iter()
            .map(|r| CheckJson {
                suite: &r.suite,
                check_id: &r.check_id,
                status: r.status,
                residual: &r.residual,
                tolerance: &r.tolerance,
                details: &r.details,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
    s.push('\n');
    s
}

pub fn emit_report(
    cfg: &SuiteConfig,
    reports: &[IdentityReport],
    path: &std::path::Path,
) -> Result<()> {
    let mut fh = std::fs::File::create(path)?;
    fh.write_all(render_report(cfg, reports).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid() {
        let cfg = SuiteConfig::new(SuiteId::Symbolic);
        let s = render_report(&cfg, &[]);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn render_is_deterministic() {
        let cfg = SuiteConfig::new(SuiteId::Scalar);
        let r = IdentityReport::numeric("scalar", "x", 1e-22, 1e-20, 1234)
            .with_detail("note", "measured".into());
        let a = render_report(&cfg, &[r.clone()]);
        let b = render_report(&cfg, &[r]);
        assert_eq!(a, b);
        // runtime never appears in the file
        assert!(!a.contains("1234"));
    }

    #[test]
    fn pass_fail_logic() {
        assert!(IdentityReport::numeric("s", "a", 1e-9, 1e-8, 0).passed());
        assert!(!IdentityReport::numeric("s", "a", 1e-7, 1e-8, 0).passed());
        assert!(!IdentityReport::numeric("s", "a", f64::NAN, 1e-8, 0).passed());
    }
}
