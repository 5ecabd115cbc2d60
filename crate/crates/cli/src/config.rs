//! Experiment configuration: TOML tables, shipped presets, and flag merging.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One experiment: a problem, a set of method cells, and a step-size grid.
/// Everything is optional so that presets, config files and command-line
/// flags can be overlaid; validation happens when a plan is resolved.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: Option<String>,
    /// Method names, optionally with a per-method gain suffix
    /// (`feedback_euler:unity`).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<String>,
    pub gain: Option<String>,
    pub alpha: Option<f64>,
    pub lipschitz: Option<f64>,
    pub c: Option<f64>,
    pub hmin: Option<f64>,
    pub t_update: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    pub h_range: Option<[f64; 2]>,
    pub points_per_decade: Option<u32>,
    pub t_end: Option<f64>,
    pub periods: Option<f64>,
    pub stride: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub full_scale: Option<bool>,
}

impl ExperimentConfig {
    /// Overlays `other` on top of `self`; set fields in `other` win.
    pub fn merged_with(mut self, other: &ExperimentConfig) -> Self {
        if other.problem.is_some() {
            self.problem = other.problem.clone();
        }
        if !other.methods.is_empty() {
            self.methods = other.methods.clone();
        }
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field.clone(); })*
            };
        }
        overlay!(
            gain, alpha, lipschitz, c, hmin, t_update, h, h_range, points_per_decade, t_end,
            periods, stride, out, seed, jobs, full_scale
        );
        self
    }
}

/// Parses a config file: one TOML table per experiment, ordered by name.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, ExperimentConfig>, CliError> {
    toml::from_str(text).map_err(|e| CliError::config(format!("invalid config file: {e}")))
}

pub const PRESET_NAMES: [&str; 3] = ["rigid_body_fig1", "kepler_fig3", "perturbed_fig5"];

/// The shipped experiment presets. Desk scale by default; `full_scale`
/// selects the full benchmark horizons and step-size ranges.
pub fn preset(name: &str, full_scale: bool) -> Option<ExperimentConfig> {
    let base = ExperimentConfig {
        c: Some(1.1),
        hmin: Some(1e-10),
        points_per_decade: Some(3),
        seed: Some(42),
        ..Default::default()
    };
    match name {
        "rigid_body_fig1" => Some(ExperimentConfig {
            problem: Some("rigid_body".into()),
            methods: vec![
                "euler".into(),
                "feedback_euler:unity".into(),
                "feedback_euler:inverse_hl".into(),
                "adaptive_feedback".into(),
                "strang_splitting".into(),
            ],
            lipschitz: Some(1986.0),
            t_update: Some(30.0),
            h_range: Some(if full_scale { [1e-7, 1e-1] } else { [1e-3, 1e-1] }),
            t_end: Some(if full_scale { 1000.0 } else { 100.0 }),
            ..base
        }),
        "kepler_fig3" => Some(ExperimentConfig {
            problem: Some("kepler".into()),
            methods: vec![
                "euler".into(),
                "feedback_euler:unity".into(),
                "feedback_euler:inverse_hl".into(),
                "adaptive_feedback".into(),
                "stormer_verlet".into(),
            ],
            lipschitz: Some(515.4),
            t_update: Some(0.1),
            h_range: Some(if full_scale { [1e-6, 1e-1] } else { [1e-3, 1e-1] }),
            periods: Some(if full_scale { 1000.0 } else { 10.0 }),
            ..base
        }),
        "perturbed_fig5" => Some(ExperimentConfig {
            problem: Some("perturbed_kepler".into()),
            methods: vec![
                "euler".into(),
                "feedback_euler:unity".into(),
                "feedback_euler:inverse_hl".into(),
                "adaptive_feedback".into(),
                "stormer_verlet".into(),
            ],
            lipschitz: Some(148.03),
            t_update: Some(0.1),
            h_range: Some(if full_scale { [1e-9, 1e-1] } else { [1e-3, 1e-1] }),
            t_end: Some(200.0),
            ..base
        }),
        _ => None,
    }
}
