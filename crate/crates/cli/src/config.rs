//! Experiment configuration: one JSON document per run, everything
//! defaulted but overridable, so experiments are reproducible data.

use funkslice_core::phantom::{PhantomSpec, SymmetryClass};
use funkslice_core::verify::VerifyConfig;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_center")]
    pub center: Vec<f64>,
    /// phantom spec; omitted means the default smooth phantom of `class`
    #[serde(default)]
    pub phantom: Option<PhantomSpec>,
    #[serde(default = "default_class")]
    pub class: SymmetryClass,
    #[serde(default = "default_transform")]
    pub transform: String,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default = "default_section_nodes")]
    pub section_nodes: usize,
    #[serde(default = "default_chord_nodes")]
    pub chord_nodes: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// symmetry-residual sample count recorded in phantom headers
    #[serde(default = "default_residual_samples")]
    pub residual_samples: usize,
}

fn default_n() -> usize {
    2
}
fn default_k() -> usize {
    2
}
fn default_center() -> Vec<f64> {
    vec![0.0, 0.0, 2.0]
}
fn default_class() -> SymmetryClass {
    SymmetryClass::Generic
}
fn default_transform() -> String {
    "funk".to_string()
}
fn default_section_nodes() -> usize {
    256
}
fn default_chord_nodes() -> usize {
    128
}
fn default_seed() -> u64 {
    7
}
fn default_residual_samples() -> usize {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub angles: usize,
    pub offsets: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            angles: 96,
            offsets: 48,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nlat: usize,
    pub nlon: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            nlat: 64,
            nlon: 128,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionConfig {
    pub radial_cells: usize,
    pub level_cells: usize,
    pub angular_budget: usize,
    pub fit_skip: usize,
    pub fit_len: usize,
    pub fit_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        let p = funkslice_core::inversion::InversionParams::default();
        InversionConfig {
            radial_cells: p.radial_cells,
            level_cells: p.level_cells,
            angular_budget: p.angular_budget,
            fit_skip: p.fit_skip,
            fit_len: p.fit_len,
            fit_tol: p.fit_tol,
        }
    }
}

impl InversionConfig {
    pub fn to_params(&self) -> funkslice_core::inversion::InversionParams {
        funkslice_core::inversion::InversionParams {
            radial_cells: self.radial_cells,
            level_cells: self.level_cells,
            angular_budget: self.angular_budget,
            fit_skip: self.fit_skip,
            fit_len: self.fit_len,
            fit_tol: self.fit_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub profile: Option<PathBuf>,
    pub field: Option<PathBuf>,
    pub recon: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.center.len() != self.n + 1 {
            return Err(format!(
                "center has {} entries, ambient dimension is {}",
                self.center.len(),
                self.n + 1
            ));
        }
        if !(1 < self.k && self.k <= self.n) {
            return Err(format!("need 1 < k <= n, got k = {}, n = {}", self.k, self.n));
        }
        let na: f64 = self.center.iter().map(|v| v * v).sum::<f64>().sqrt();
        let needs_exterior = matches!(self.class, SymmetryClass::WEven | SymmetryClass::WOdd)
            || self.transform == "funk";
        if needs_exterior && na <= 1.0 {
            return Err(format!(
                "scenario requires an exterior center, |a| = {na}"
            ));
        }
        if na == 0.0 && self.transform != "radon" {
            return Err("center must be nonzero".into());
        }
        match self.transform.as_str() {
            "funk" | "slice" | "radon" => Ok(()),
            other => Err(format!("unknown transform '{other}'")),
        }
    }

    pub fn context(&self) -> Result<funkslice_core::CenterContext, funkslice_core::Error> {
        funkslice_core::CenterContext::new(
            nalgebra::DVector::from_vec(self.center.clone()),
            self.k,
        )
    }

    pub fn phantom_spec(&self) -> PhantomSpec {
        self.phantom
            .clone()
            .unwrap_or_else(|| PhantomSpec::default_smooth(self.n + 1, self.class))
    }
}
