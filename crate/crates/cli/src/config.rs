//! TOML configuration: one human-editable file with sections, plus dotted
//! `--set key=value` overrides applied before deserialization, so every
//! unknown or ill-typed key is reported by name.

use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Domain dimension: 1 (circle) or 2 (sphere).
    pub n: usize,
    /// Critical order s.
    pub s: f64,
    /// Relaxed order t for single-order commands.
    pub t: f64,
    /// Continuation schedule; defaults to the built-in geometric schedule.
    pub schedule: Option<Vec<f64>>,
    pub mesh: MeshSection,
    pub target: TargetSection,
    pub optimizer: OptimizerSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    /// Circle node count (n=1) or icosphere subdivision level (n=2).
    pub resolution: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSection {
    /// Ambient dimension of the target sphere (2 = S¹, 3 = S²).
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub max_iters: usize,
    pub tol_grad: f64,
    pub initial_step: f64,
    pub armijo_c1: f64,
    pub armijo_shrink: f64,
    pub max_backtracks: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Winding number of constructed start fields.
    pub degree: i64,
    /// Concentration-detection energy threshold.
    pub eps: f64,
    /// Ball radius for concentration and balance checks.
    pub rho: f64,
    /// Tangential noise amplitude for start fields.
    pub noise: f64,
    /// Seed for all seeded operations (overridden by --seed).
    pub seed: u64,
    /// Conformal rescaling factor (rescale-check).
    pub lambda: f64,
    /// Glue width δ (glue-check).
    pub delta: f64,
    /// Glue chart radius (glue-check).
    pub r: f64,
    /// Kernel exponent α (superdifficult).
    pub alpha: f64,
    /// Inner radius fraction λ ∈ (0,1) (superdifficult).
    pub inner: f64,
    /// Angular separation of the two directions (superdifficult) and the
    /// rotation of the second field (glue-check).
    pub angle: f64,
    /// Quadrature grid per axis (superdifficult).
    pub grid: usize,
    /// Capacity levels to sweep (cutoff-decay).
    pub levels: u32,
    /// Finite-difference step (grad-check).
    pub h: f64,
    /// Sample count (rescale-check kernel sampling).
    pub samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 1,
            s: 0.5,
            t: 0.6,
            schedule: None,
            mesh: MeshSection::default(),
            target: TargetSection::default(),
            optimizer: OptimizerSection::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection { resolution: 128 }
    }
}

impl Default for TargetSection {
    fn default() -> Self {
        TargetSection { dim: 2 }
    }
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            max_iters: 500,
            tol_grad: 1e-4,
            initial_step: 1e-2,
            armijo_c1: 1e-4,
            armijo_shrink: 0.5,
            max_backtracks: 40,
        }
    }
}

impl OptimizerSection {
    pub fn to_minimize_config(&self) -> fracmap::minimizer::MinimizeConfig {
        fracmap::minimizer::MinimizeConfig {
            max_iters: self.max_iters,
            tol_grad: self.tol_grad,
            initial_step: self.initial_step,
            armijo: fracmap::minimizer::ArmijoParams {
                c1: self.armijo_c1,
                shrink: self.armijo_shrink,
                max_backtracks: self.max_backtracks,
            },
        }
    }
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            degree: 1,
            eps: 20.0,
            rho: 0.5,
            noise: 0.0,
            seed: 7,
            lambda: 1.5,
            delta: 0.1,
            r: 1.0,
            alpha: 2.0,
            inner: 0.5,
            angle: std::f64::consts::FRAC_PI_2,
            grid: 1000,
            levels: 3,
            h: 1e-5,
            samples: 10_000,
        }
    }
}

/// Loads the config file (when given), applies `--set` overrides, and
/// deserializes. All failures carry the offending path or key.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, String> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config file {}: {e}", p.display()))?;
            text.parse::<toml::Table>()
                .map_err(|e| format!("config file {}: {e}", p.display()))?
        }
        None => toml::Table::new(),
    };
    apply_overrides(&mut table, overrides)?;
    toml::Value::Table(table)
        .try_into::<Config>()
        .map_err(|e| format!("invalid configuration: {e}"))
}

fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<(), String> {
    for entry in overrides {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| format!("override '{entry}' must have the form KEY=VALUE"))?;
        let value = parse_value(raw);
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(format!("override key '{key}' has an empty path segment"));
        }
        let mut cur = &mut *table;
        for part in &parts[..parts.len() - 1] {
            cur = cur
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| format!("config key '{part}' is not a section"))?;
        }
        cur.insert(parts[parts.len() - 1].to_string(), value);
    }
    Ok(())
}

/// Parses an override value as a TOML literal; anything that does not parse
/// (bare words, say) becomes a string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
