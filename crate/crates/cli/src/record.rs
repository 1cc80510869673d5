//! Versioned JSON run records.
//!
//! Serialization is deterministic: field order is fixed by the struct
//! definitions, floats are written in shortest round-trip form and no
//! timestamp is emitted unless asked for. Loading a record and saving it
//! again reproduces the file byte for byte.

use std::fs;
use std::path::Path;

use ma_couple::analysis::ThresholdBracket;
use ma_couple::operators::{ProblemSpec, Regime};
use ma_couple::solvers::{BoundTally, EigenSummary};
use ma_couple::{Certificate, SolveConfig, SolveResult, Status};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "ma-couple";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub initial_profile: String,
}

impl ConfigSummary {
    pub fn of(cfg: &SolveConfig) -> Self {
        ConfigSummary {
            grid: cfg.grid.n_nodes(),
            tol: cfg.tol_fixpoint,
            max_iter: cfg.max_iter,
            initial_profile: cfg.initial_profile.name().into(),
        }
    }

    /// Rebuild the solver configuration this summary describes.
    pub fn to_config(&self) -> ma_couple::Result<SolveConfig> {
        let init = self.initial_profile.parse()?;
        let cfg = SolveConfig::new(self.grid)?
            .with_tol(self.tol)
            .with_max_iter(self.max_iter)
            .with_initial(init);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub v1: f64,
    pub v2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub ode: f64,
    pub ode_pointwise: f64,
    pub pde: f64,
    pub boundary: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub fixed_point_defect: f64,
    pub fixed_point_gate: f64,
    pub residual_gate: f64,
    pub failed_gates: Vec<String>,
}

impl CertificateSummary {
    pub fn of(c: &Certificate) -> Self {
        CertificateSummary {
            fixed_point_defect: c.fixed_point_defect,
            fixed_point_gate: c.fixed_point_gate,
            residual_gate: c.residual_gate,
            failed_gates: c.failed_gates.clone(),
        }
    }
}

/// `|C - λ₁^{2N}| / C` for the `α = N` balanced system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub lambda1: f64,
    pub relative_difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    #[serde(flatten)]
    pub summary: EigenSummary,
    pub threshold_product: f64,
    pub bracket: ThresholdBracket,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: String,
    pub input_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub spec: ProblemSpec,
    pub config: ConfigSummary,
    pub status: Status,
    pub regime: Regime,
    pub verdict: String,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_change: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<Norms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundTally>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Profiles>,
}

#[derive(Serialize)]
struct HashInput<'a> {
    command: &'a str,
    spec: &'a ProblemSpec,
    config: &'a ConfigSummary,
}

/// SHA-256 of the canonical JSON of the inputs that determine a run.
pub fn input_hash(command: &str, spec: &ProblemSpec, config: &ConfigSummary) -> String {
    let bytes = serde_json::to_vec(&HashInput {
        command,
        spec,
        config,
    })
    .expect("hash input serializes");
    hex::encode(Sha256::digest(&bytes))
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn verdict_for(spec: &ProblemSpec, result: &SolveResult) -> String {
    match result.status {
        Status::Converged => {
            let (res, gate) = result
                .certificate
                .as_ref()
                .map(|c| (c.residuals.ode_residual_sup, c.residual_gate))
                .unwrap_or((f64::NAN, f64::NAN));
            format!("radial convex solution certified: residual {res:.3e} within gate {gate:.3e}")
        }
        Status::NonexistenceCertified => {
            let c = result.eigen.as_ref().map_or(f64::NAN, |e| e.c);
            format!(
                "no radial convex solution: balanced regime (alpha*beta = N^2) needs \
                 lambda*mu^(alpha/N) = C, got {:.6e} against C = {c:.6e}",
                spec.threshold_product()
            )
        }
        Status::MaxIterExceeded => "iteration budget exhausted before reaching tolerance".into(),
        Status::Uncertified => {
            let gates = result
                .certificate
                .as_ref()
                .map(|c| c.failed_gates.join(", "))
                .unwrap_or_default();
            format!("iteration settled but failed gates: {gates}")
        }
        Status::Diverged => "iterate left the representable range".into(),
    }
}

impl RunRecord {
    fn base(command: &str, spec: &ProblemSpec, cfg: &SolveConfig) -> Self {
        let config = ConfigSummary::of(cfg);
        RunRecord {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::current(),
            command: command.into(),
            input_hash: input_hash(command, spec, &config),
            timestamp: None,
            spec: *spec,
            config,
            status: Status::Converged,
            regime: spec.regime(),
            verdict: String::new(),
            iterations: 0,
            final_change: None,
            norms: None,
            residuals: None,
            certificate: None,
            eigen: None,
            bounds: None,
            trace: None,
            profiles: None,
        }
    }

    pub fn from_solve(spec: &ProblemSpec, cfg: &SolveConfig, result: &SolveResult) -> Self {
        let mut r = RunRecord::base("solve", spec, cfg);
        r.status = result.status;
        r.verdict = verdict_for(spec, result);
        r.iterations = result.iterations;
        r.final_change = finite(result.final_change);
        if let (Some(v1), Some(v2)) = (&result.v1, &result.v2) {
            r.norms = Some(Norms {
                v1: v1.sup_norm(),
                v2: v2.sup_norm(),
            });
            r.profiles = Some(Profiles {
                v1: v1.values().to_vec(),
                v2: v2.values().to_vec(),
            });
        }
        if let Some(c) = &result.certificate {
            let rep = &c.residuals;
            r.residuals = Some(Residuals {
                ode: rep.ode_residual_sup,
                ode_pointwise: rep.ode_pointwise_sup,
                pde: rep.pde_residual_sup,
                boundary: rep.boundary_relative,
            });
            r.certificate = Some(CertificateSummary::of(c));
        }
        if let Some(e) = &result.eigen {
            r.eigen = Some(EigenRecord {
                summary: e.summary(),
                threshold_product: spec.threshold_product(),
                bracket: ma_couple::analysis::threshold_bracket(spec.dim, spec.alpha),
                cross_check: None,
            });
        }
        r.bounds = result.bounds;
        if cfg.record_trace {
            r.trace = Some(
                result
                    .trace
                    .iter()
                    .copied()
                    .filter(|x| x.is_finite())
                    .collect(),
            );
        }
        r
    }

    pub fn from_eigen(spec: &ProblemSpec, cfg: &SolveConfig, eigen: EigenRecord) -> Self {
        let mut r = RunRecord::base("eigen", spec, cfg);
        r.iterations = eigen.summary.iterations;
        r.verdict = format!(
            "threshold constant C = {:.10e} in [{}, {:.6e}]",
            eigen.summary.c, eigen.bracket.lower, eigen.bracket.upper
        );
        r.eigen = Some(eigen);
        r
    }

    pub fn with_timestamp(mut self, on: bool) -> Self {
        self.timestamp = on.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json()).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        RunRecord::from_json(&text).map_err(|e| CliError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Hash recomputed from the stored spec and config.
    pub fn expected_hash(&self) -> String {
        input_hash(&self.command, &self.spec, &self.config)
    }
}
