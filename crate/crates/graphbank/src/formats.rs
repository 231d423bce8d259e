//! JSON documents: design configuration, design and bank exports, run reports.

use std::collections::BTreeMap;
use std::path::Path;

use graphbank_core::design::{InvertibilityReport, ViolationKind};
use graphbank_core::{DesignConfig, DesignModel, FilterDesign, Filterbank};
use serde::{Deserialize, Serialize};

use crate::io::{self, IoError};

/// On-disk design configuration; missing keys take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub r: usize,
    pub s: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi0: Option<f64>,
    pub epsilon: f64,
    pub model: String,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::from(&DesignConfig::default())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    r: Option<usize>,
    s: Option<usize>,
    #[serde(rename = "J")]
    j: Option<usize>,
    alpha: Option<f64>,
    xi0: Option<f64>,
    epsilon: Option<f64>,
    model: Option<String>,
}

impl From<&DesignConfig> for ConfigFile {
    fn from(c: &DesignConfig) -> Self {
        ConfigFile {
            r: c.r,
            s: c.s,
            j: c.j,
            alpha: c.alpha,
            xi0: c.xi0,
            epsilon: c.epsilon,
            model: c.model.name().to_string(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

impl ConfigFile {
    pub fn to_config(&self) -> Result<DesignConfig, String> {
        let model = DesignModel::from_name(&self.model).ok_or_else(|| {
            format!(
                "unknown model `{}` (expected closed_form, ori_opt, reg_opt or liter_opt)",
                self.model
            )
        })?;
        let cfg = DesignConfig {
            r: self.r,
            s: self.s,
            j: self.j,
            alpha: self.alpha,
            xi0: self.xi0,
            epsilon: self.epsilon,
            model,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let p: PartialConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let d = ConfigFile::default();
        Ok(ConfigFile {
            r: p.r.unwrap_or(d.r),
            s: p.s.unwrap_or(d.s),
            j: p.j.unwrap_or(d.j),
            alpha: p.alpha.unwrap_or(d.alpha),
            xi0: p.xi0.or(d.xi0),
            epsilon: p.epsilon.unwrap_or(d.epsilon),
            model: p.model.unwrap_or(d.model),
        })
    }
}

/// Reads and validates a configuration file; `None` gives the defaults.
pub fn load_config(path: Option<&Path>) -> Result<DesignConfig, ConfigError> {
    let Some(path) = path else {
        return Ok(DesignConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let invalid = |msg| ConfigError::Invalid {
        path: path.display().to_string(),
        msg,
    };
    ConfigFile::parse(&text)
        .and_then(|c| c.to_config())
        .map_err(invalid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationJson {
    pub index: usize,
    pub gamma: Option<f64>,
    pub kind: String,
}

pub fn violations_json(rep: &InvertibilityReport) -> Vec<ViolationJson> {
    rep.violations
        .iter()
        .map(|v| ViolationJson {
            index: v.index,
            gamma: v.gamma.is_finite().then_some(v.gamma),
            kind: match v.kind {
                ViolationKind::Top => "top",
                ViolationKind::Bottom => "bottom",
                ViolationKind::Middle => "middle",
                ViolationKind::Orders => "orders",
            }
            .to_string(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignJson {
    pub w: Vec<f64>,
    pub objective: f64,
    pub gamma_violations: Vec<ViolationJson>,
    pub model: String,
}

impl DesignJson {
    pub fn new(fd: &FilterDesign, rep: Option<&InvertibilityReport>) -> Self {
        DesignJson {
            w: fd.w.iter().copied().collect(),
            objective: fd.objective,
            gamma_violations: rep.map(violations_json).unwrap_or_default(),
            model: fd.model.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternJson {
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankJson {
    pub w: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub zero_dc: bool,
}

impl BankJson {
    pub fn new(fd: &FilterDesign, fb: &Filterbank) -> Self {
        BankJson {
            w: fd.w.iter().copied().collect(),
            a: fb.pattern().set_a().to_vec(),
            b: fb.pattern().set_b().to_vec(),
            zero_dc: fb.is_zero_dc(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: ConfigFile,
    pub metrics: BTreeMap<String, f64>,
    pub timings: BTreeMap<String, f64>,
    pub seed: u64,
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, cfg: &DesignConfig, seed: u64) -> Self {
        RunReport {
            command: command.to_string(),
            status: "ok".to_string(),
            error: None,
            config: ConfigFile::from(cfg),
            metrics: BTreeMap::new(),
            timings: BTreeMap::new(),
            seed,
            files: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        io::write_text(path, &(self.to_json() + "\n"))
    }
}
