//! Run configuration. Complex numbers are `[re, im]` arrays; unknown keys are
//! rejected with the path of the offending field.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::boundary::{LeftBoundary, ModelParams, RightBoundary, TransferCase};
use crate::error::{Error, Result};
use crate::kernel::{c, ONE};
use crate::vertex::BulkParams;

/// Environment variable overriding the default operator tolerance.
pub const TOL_ENV: &str = "BETHE_SEGMENT_TOL";

/// Relative tolerance for operator identities.
pub const OPERATOR_TOL: f64 = 1e-10;

/// The shipped default configuration.
pub const DEFAULT_JSON: &str = include_str!("../config/default.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub provenance: String,
    pub seed: u64,
    /// Chain length; suites sweep their own range when absent.
    pub n: Option<usize>,
    pub case: Option<TransferCase>,
    pub q: C64,
    /// Inhomogeneities; absent means `v_i = 1`.
    pub v: Option<Vec<C64>>,
    pub eps_plus: C64,
    pub eps_minus: C64,
    pub kappa: C64,
    pub kappa_tilde: C64,
    pub nu_plus: C64,
    pub nu_minus: C64,
    pub tau: C64,
    pub tau_tilde: C64,
    /// Suite ids to run; empty means all.
    pub suites: Vec<String>,
    /// Overrides every suite's sample count.
    pub samples: Option<usize>,
    /// Per-check tolerance overrides keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            provenance: "generic values chosen for testing. q = 1.3 exp(0.21 i). \
                         Absent v means the homogeneous chain v_i = 1."
                .into(),
            seed: 7,
            n: None,
            case: None,
            q: c(1.271440189141393, 0.27099786979992946),
            v: None,
            eps_plus: c(0.7, 0.2),
            eps_minus: c(-0.3, 0.9),
            kappa: c(0.5, -0.4),
            kappa_tilde: c(0.3, 0.2),
            nu_plus: c(1.1, -0.3),
            nu_minus: c(0.4, 0.5),
            tau: c(-0.6, 0.3),
            tau_tilde: c(0.0, 0.0),
            suites: Vec::new(),
            samples: None,
            tolerances: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::InvalidConfig {
            path: e.path().to_string(),
            msg: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, msg: String| Err(Error::InvalidConfig { path: path.into(), msg });
        if let (Some(v), Some(n)) = (&self.v, self.n) {
            if v.len() != n {
                return bad("v", format!("{} inhomogeneities for n = {n}", v.len()));
            }
        }
        if let Some(n) = self.n {
            if n == 0 || n > crate::kernel::OPERATOR_SITE_CAP {
                return bad("n", format!("must be in 1..={}", crate::kernel::OPERATOR_SITE_CAP));
            }
        }
        if let Err(e) = crate::scalar::ScalarFns::new(self.q) {
            return bad("q", e.to_string());
        }
        for (id, tol) in &self.tolerances {
            if !(tol.is_finite() && *tol > 0.0) {
                return bad(&format!("tolerances.{id}"), "must be positive".into());
            }
        }
        Ok(())
    }

    pub fn left(&self) -> LeftBoundary {
        LeftBoundary {
            eps_plus: self.eps_plus,
            eps_minus: self.eps_minus,
            kappa: self.kappa,
            kappa_tilde: self.kappa_tilde,
        }
    }

    pub fn right(&self) -> RightBoundary {
        RightBoundary { nu_plus: self.nu_plus, nu_minus: self.nu_minus, tau: self.tau, tau_tilde: self.tau_tilde }
    }

    /// Explicit model on `n` sites, with the boundary fields not allowed by
    /// `case` cleared.
    pub fn model(&self, n: usize, case: TransferCase) -> Result<ModelParams> {
        let v = match &self.v {
            Some(v) if v.len() == n => v.clone(),
            Some(v) => {
                return Err(Error::InvalidConfig {
                    path: "v".into(),
                    msg: format!("{} inhomogeneities for n = {n}", v.len()),
                })
            }
            None => vec![ONE; n],
        };
        let p = ModelParams { bulk: BulkParams::new(self.q, v)?, left: self.left(), right: self.right() };
        Ok(p.restricted(case))
    }

    /// Tolerance for `check_id`: config override, then the environment
    /// variable for operator checks, then `default`.
    pub fn tolerance(&self, check_id: &str, default: f64, operator: bool) -> f64 {
        if let Some(t) = self.tolerances.get(check_id) {
            return *t;
        }
        if operator {
            if let Some(t) = env_tolerance() {
                return t;
            }
        }
        default
    }
}

/// Value of the tolerance environment variable, if set and valid.
pub fn env_tolerance() -> Option<f64> {
    std::env::var(TOL_ENV).ok()?.trim().parse::<f64>().ok().filter(|t| t.is_finite() && *t > 0.0)
}
