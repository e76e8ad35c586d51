//! Certification reports shared by every certifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::density::HighDensityCertificate;
use crate::herglotz::HerglotzCertificate;
use crate::oracle::{LowerBoundEstimate, WitnessSpec};
use crate::orbit::IrrationalCertificate;
use crate::zak::{CriticalCertificate, NearCriticalCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    FrameCertified,
    NotFrameWitnessed,
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0 frame, 1 not a frame, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::FrameCertified => 0,
            Verdict::NotFrameWitnessed => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FrameCertified => "FRAME_CERTIFIED",
            Verdict::NotFrameWitnessed => "NOT_FRAME_WITNESSED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Herglotz,
    Irrational,
    HighDensity,
    NearCritical,
    Critical,
    Oracle,
    Counterexample,
    DensityObstruction,
    Sis,
    Identities,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Herglotz => "herglotz",
            Method::Irrational => "irrational",
            Method::HighDensity => "high-density",
            Method::NearCritical => "near-critical",
            Method::Critical => "critical",
            Method::Oracle => "oracle",
            Method::Counterexample => "counterexample",
            Method::DensityObstruction => "density-obstruction",
            Method::Sis => "sis",
            Method::Identities => "identities",
        }
    }
}

/// A diagnostic value: number or text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diag {
    Num(f64),
    Text(String),
}

impl From<f64> for Diag {
    fn from(x: f64) -> Self {
        Diag::Num(x)
    }
}

impl From<usize> for Diag {
    fn from(x: usize) -> Self {
        Diag::Num(x as f64)
    }
}

impl From<&str> for Diag {
    fn from(x: &str) -> Self {
        Diag::Text(x.to_string())
    }
}

impl From<String> for Diag {
    fn from(x: String) -> Self {
        Diag::Text(x)
    }
}

/// Method-specific certificate payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Herglotz(HerglotzCertificate),
    Irrational(IrrationalCertificate),
    HighDensity(HighDensityCertificate),
    NearCritical(NearCriticalCertificate),
    Critical(CriticalCertificate),
    Witness(WitnessSpec),
    DensityObstruction { alpha_beta: f64 },
    Oracle(LowerBoundEstimate),
    None,
}

/// Outcome of one certification run.
///
/// `a_crit` and `b_crit` bound the criterion operator, which is equivalent to the
/// frame inequality only up to universal constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub method: Method,
    #[serde(rename = "A_crit")]
    pub a_crit: Option<f64>,
    #[serde(rename = "B_crit")]
    pub b_crit: Option<f64>,
    pub certificate: Certificate,
    pub diagnostics: BTreeMap<String, Diag>,
}

impl CertificationReport {
    pub fn new(verdict: Verdict, method: Method, certificate: Certificate) -> Self {
        CertificationReport {
            verdict,
            method,
            a_crit: None,
            b_crit: None,
            certificate,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn inconclusive(method: Method, reason: impl Into<String>) -> Self {
        let mut r = Self::new(Verdict::Inconclusive, method, Certificate::None);
        r.diag("reason", reason.into());
        r
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Diag>) -> &mut Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }
}
