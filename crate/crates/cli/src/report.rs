use serde::{Deserialize, Serialize};
use specstat::{Advisory, ProfilePoint, SegmentPlan, TestConfig, TestResult};

use crate::error::{CliError, Result};
use crate::ingest::InputDescriptor;

/// How a tuning parameter got its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSource {
    Flag,
    Default,
    CrossValidation,
    BandwidthRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub kernel: String,
    pub taper: String,
    pub m: usize,
    pub m_source: ParamSource,
    pub c: usize,
    pub h: f64,
    pub h_source: ParamSource,
    pub b: f64,
    pub b_source: ParamSource,
    pub alpha: f64,
}

impl ConfigEcho {
    pub fn new(cfg: &TestConfig, sources: [ParamSource; 3]) -> Self {
        Self {
            kernel: cfg.kernel.name().to_string(),
            taper: cfg.taper.name().to_string(),
            m: cfg.m,
            m_source: sources[0],
            c: cfg.c,
            h: cfg.h,
            h_source: sources[1],
            b: cfg.b,
            b_source: sources[2],
            alpha: cfg.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

/// Everything `specstat test` knows about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: InputDescriptor,
    pub config: ConfigEcho,
    pub n: usize,
    pub m: usize,
    pub c: usize,
    #[serde(rename = "S")]
    pub shift: usize,
    #[serde(rename = "N")]
    pub segments: usize,
    pub h: f64,
    pub b: f64,
    pub alpha: f64,
    #[serde(rename = "T_n")]
    pub t_n: f64,
    pub kappa4_hat: f64,
    pub mu_hat: f64,
    pub tau: f64,
    pub standardized: f64,
    pub p_value: f64,
    pub reject: bool,
    pub critical_value: f64,
    pub warnings: Vec<String>,
    /// Path of the Q-profile TSV, when one was written.
    pub q_profile: Option<String>,
    pub advisories: Vec<Advisory>,
    pub plan: SegmentPlan,
    pub profile: Vec<ProfilePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn new(
        input: InputDescriptor,
        config: ConfigEcho,
        result: TestResult,
        advisories: Vec<Advisory>,
    ) -> Self {
        Self {
            n: input.n,
            input,
            m: config.m,
            c: config.c,
            shift: result.plan.shift,
            segments: result.plan.count,
            h: config.h,
            b: config.b,
            alpha: config.alpha,
            config,
            t_n: result.t_n,
            kappa4_hat: result.kappa4_hat,
            mu_hat: result.mu_hat,
            tau: result.tau,
            standardized: result.standardized,
            p_value: result.p_value,
            reject: result.reject,
            critical_value: result.critical_value,
            warnings: result.warnings,
            q_profile: None,
            advisories,
            plan: result.plan,
            profile: result.q_profile,
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Data {
            path: "report".into(),
            message: e.to_string(),
        })
    }
}
