//! Sweep grid file (TOML).
//!
//! A grid lists the axes (`estimators`, `corrections`, `priors`, `noise`,
//! `seeds`) and shared scalar settings; the sweep runs the full cartesian
//! product in declaration order: estimator, then correction, prior, noise
//! triple, seed.

use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub estimators: Vec<String>,
    #[serde(default = "default_corrections")]
    pub corrections: Vec<String>,
    pub priors: Vec<f64>,
    #[serde(default = "default_noise")]
    pub noise: Vec<[f64; 3]>,
    pub seeds: Vec<u64>,

    pub n_pairs: usize,
    pub n_test: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_mean_gap")]
    pub mean_gap: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    #[serde(default = "default_arch")]
    pub arch: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// `ge` or `lt`: estimate the prior from pair counts instead of using
    /// the generating value.
    #[serde(default)]
    pub estimate_prior: Option<String>,
    #[serde(default)]
    pub n_ordinary: usize,
}

fn default_corrections() -> Vec<String> {
    vec!["id".to_string()]
}
fn default_noise() -> Vec<[f64; 3]> {
    vec![[0.0, 0.0, 0.0]]
}
fn default_dim() -> usize {
    1
}
fn default_mean_gap() -> f64 {
    2.0
}
fn default_sigma() -> f64 {
    0.7
}
fn default_epochs() -> usize {
    100
}
fn default_batch() -> usize {
    256
}
fn default_lr() -> f64 {
    1e-3
}
fn default_weight_decay() -> f64 {
    1e-5
}
fn default_arch() -> String {
    "linear".to_string()
}

pub fn parse_grid(text: &str) -> Result<GridFile, String> {
    toml::from_str(text).map_err(|e| format!("bad grid file: {e}"))
}
