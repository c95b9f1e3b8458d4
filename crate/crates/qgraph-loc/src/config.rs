//! Experiment configuration: one human-editable TOML file (JSON accepted
//! as an alternative) declaring the model, the mesh, run controls, and a
//! list of diagnostics to execute.

use crate::error::ConfigError;
use crate::random::{InteractionKernel, LawKind};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub kind: LawKind,
    pub q_minus: f64,
    pub q_plus: f64,
}

impl Default for LawConfig {
    fn default() -> Self {
        Self {
            kind: LawKind::Uniform,
            q_minus: 0.0,
            q_plus: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub u0: f64,
    pub r0: u64,
    pub kernel: InteractionKernel,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self {
            u0: 0.0,
            r0: 1,
            kernel: InteractionKernel::HardIndicator,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub n: u32,
    #[serde(default = "one")]
    pub d: u32,
    #[serde(default)]
    pub law: LawConfig,
    #[serde(default)]
    pub interaction: InteractionConfig,
}

fn one() -> u32 {
    1
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n: 1,
            d: 1,
            law: LawConfig::default(),
            interaction: InteractionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub m: u32,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { m: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// 0 = available parallelism (QGRAPH_THREADS overrides).
    #[serde(default)]
    pub threads: usize,
}

fn default_seed() -> u64 {
    42
}
fn default_trials() -> u64 {
    1000
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1000,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    "qgraph-out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

/// One diagnostic to run; the variants mirror the CLI subcommands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiagnosticSpec {
    Geometry {
        #[serde(default)]
        exhaustive_limit: Option<i64>,
        #[serde(default)]
        dump_complex_l: Option<u32>,
    },
    Schedule {
        l0: u64,
        k: usize,
        /// None means the minimal feasible p1 is computed.
        #[serde(default)]
        p1: Option<f64>,
    },
    Assemble {
        l: u32,
        #[serde(default)]
        export_triplets: bool,
        #[serde(default)]
        export_omega: bool,
    },
    Spectrum {
        l: u32,
        k: usize,
    },
    Green {
        l: u32,
        energy: f64,
        x: Vec<i64>,
        y: Vec<i64>,
    },
    CtCheck {
        l: u32,
        etas: Vec<f64>,
        #[serde(default)]
        trials: Option<u64>,
    },
    DgCheck {
        l: u32,
        t_grid: Vec<f64>,
        #[serde(default)]
        trials: Option<u64>,
    },
    Wegner1 {
        l: u32,
        energy: f64,
        eps: Vec<f64>,
        #[serde(default)]
        trials: Option<u64>,
    },
    Wegner2 {
        l: u32,
        eps: f64,
        interval: (f64, f64),
        #[serde(default)]
        trials: Option<u64>,
    },
    Lifshitz {
        l_grid: Vec<u64>,
        b: f64,
        #[serde(default)]
        trials: Option<u64>,
    },
    Ils {
        l0: u64,
        #[serde(default)]
        scan: bool,
        #[serde(default)]
        trials: Option<u64>,
    },
    Ds {
        l: u32,
        mass: f64,
        #[serde(default)]
        trials: Option<u64>,
    },
    GriAudit {
        l: u32,
        big_l: u32,
        energy: f64,
        #[serde(default = "default_s")]
        s: f64,
    },
    MassFit {
        l: u32,
        count: usize,
        #[serde(default)]
        synthetic: bool,
    },
    DynMoment {
        l_grid: Vec<u32>,
        s: f64,
    },
    Cheeger {
        l: u64,
    },
}

fn default_s() -> f64 {
    1.0
}

impl DiagnosticSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Geometry { .. } => "geometry",
            Self::Schedule { .. } => "schedule",
            Self::Assemble { .. } => "assemble",
            Self::Spectrum { .. } => "spectrum",
            Self::Green { .. } => "green",
            Self::CtCheck { .. } => "ct-check",
            Self::DgCheck { .. } => "dg-check",
            Self::Wegner1 { .. } => "wegner1",
            Self::Wegner2 { .. } => "wegner2",
            Self::Lifshitz { .. } => "lifshitz",
            Self::Ils { .. } => "ils",
            Self::Ds { .. } => "ds",
            Self::GriAudit { .. } => "gri-audit",
            Self::MassFit { .. } => "mass-fit",
            Self::DynMoment { .. } => "dyn-moment",
            Self::Cheeger { .. } => "cheeger",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diagnostic: Vec<DiagnosticSpec>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: String| ConfigError::Invalid {
            field: field.into(),
            message,
        };
        if self.model.n == 0 || self.model.n > 3 {
            return Err(invalid("model.n", format!("must be 1..=3, got {}", self.model.n)));
        }
        if self.model.d == 0 || self.model.d > 3 {
            return Err(invalid("model.d", format!("must be 1..=3, got {}", self.model.d)));
        }
        if !(self.model.law.q_minus < self.model.law.q_plus) {
            return Err(invalid(
                "model.law",
                format!(
                    "need q_minus < q_plus, got [{}, {}]",
                    self.model.law.q_minus, self.model.law.q_plus
                ),
            ));
        }
        if self.model.interaction.u0 < 0.0 {
            return Err(invalid(
                "model.interaction.u0",
                format!("must be >= 0, got {}", self.model.interaction.u0),
            ));
        }
        if self.model.interaction.r0 == 0 {
            return Err(invalid("model.interaction.r0", "must be >= 1".into()));
        }
        if self.mesh.m < 2 {
            return Err(invalid("mesh.m", format!("must be >= 2, got {}", self.mesh.m)));
        }
        if self.run.trials == 0 {
            return Err(invalid("run.trials", "must be >= 1".into()));
        }
        for (i, spec) in self.diagnostic.iter().enumerate() {
            let field = |name: &str| format!("diagnostic[{i}].{name}");
            match spec {
                DiagnosticSpec::Wegner1 { eps, .. } => {
                    if eps.iter().any(|&e| e <= 0.0) {
                        return Err(invalid(&field("eps"), "entries must be > 0".into()));
                    }
                }
                DiagnosticSpec::Lifshitz { b, l_grid, .. } => {
                    if *b <= 0.0 {
                        return Err(invalid(&field("b"), format!("must be > 0, got {b}")));
                    }
                    if l_grid.is_empty() {
                        return Err(invalid(&field("l_grid"), "must be nonempty".into()));
                    }
                }
                DiagnosticSpec::CtCheck { etas, .. } => {
                    if etas.iter().any(|&e| e <= 0.0) {
                        return Err(invalid(&field("etas"), "entries must be > 0".into()));
                    }
                }
                DiagnosticSpec::Schedule { l0, .. } => {
                    if *l0 < 2 {
                        return Err(invalid(&field("l0"), "must be >= 2".into()));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
