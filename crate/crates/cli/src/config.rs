//! Run configuration: defaults, optional TOML config file, command-line
//! flags. Precedence is flags over config file over defaults, and
//! everything is validated before any computation starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use kernel_coreset::io::KernelSpecDto;
use kernel_coreset::{BuildMode, KernelSpec};

/// Documented defaults.
pub mod defaults {
    pub const K: usize = 5;
    pub const Z: f64 = 2.0;
    pub const SEED: u64 = 0;
    pub const CORESET_SIZE: usize = 1000;
    pub const EPSILON: f64 = 0.1;
    pub const CENTER_SETS: usize = 500;
    pub const REPETITIONS: usize = 100;
    pub const DEGREE_SAMPLE_SIZE: usize = 1000;
    pub const SPECTRAL_CORESET_SIZE: usize = 2000;
    pub const MAX_ITERS: usize = 100;
    pub const OUT_DIR: &str = "out";
}

/// Optional values loaded from a TOML config file. Field names match the
/// long command-line flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kernel: Option<String>,
    pub sigma: Option<f64>,
    pub rbf_unsquared: Option<bool>,
    pub c: Option<f64>,
    pub degree: Option<u32>,
    pub kernel_matrix: Option<PathBuf>,
    pub k: Option<usize>,
    pub z: Option<f64>,
    pub coreset_size: Option<usize>,
    pub epsilon: Option<f64>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub weighted: Option<bool>,
    pub subsample: Option<usize>,
    pub center_sets: Option<usize>,
    pub repetitions: Option<usize>,
    pub fixed_center_sets: Option<bool>,
    pub builder: Option<String>,
    pub bucket_size: Option<usize>,
    pub degree_sample_size: Option<usize>,
    pub spectral_coreset_size: Option<usize>,
    pub exact_degrees: Option<bool>,
    pub max_iters: Option<usize>,
    pub seed_only: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }
}

/// Kernel choice resolved from flags and config.
#[derive(Debug, Clone)]
pub enum KernelChoice {
    Analytic(KernelSpec<f64>),
    Precomputed { matrix: PathBuf },
}

pub fn resolve_kernel(
    kind: Option<String>,
    sigma: Option<f64>,
    rbf_unsquared: bool,
    c: Option<f64>,
    degree: Option<u32>,
    kernel_matrix: Option<PathBuf>,
) -> anyhow::Result<KernelChoice> {
    let kind = kind.unwrap_or_else(|| "linear".to_string());
    match kind.as_str() {
        "linear" => Ok(KernelChoice::Analytic(KernelSpec::Linear)),
        "rbf" | "gaussian" => {
            let sigma = sigma
                .ok_or_else(|| anyhow::anyhow!("--sigma is required for the rbf kernel"))?;
            Ok(KernelChoice::Analytic(KernelSpec::Rbf {
                sigma,
                unsquared: rbf_unsquared,
            }))
        }
        "polynomial" | "poly" => {
            let degree = degree
                .ok_or_else(|| anyhow::anyhow!("--degree is required for the polynomial kernel"))?;
            Ok(KernelChoice::Analytic(KernelSpec::Polynomial {
                c: c.unwrap_or(0.0),
                degree,
            }))
        }
        "precomputed" => {
            let matrix = kernel_matrix.ok_or_else(|| {
                anyhow::anyhow!("--kernel-matrix is required for the precomputed kernel")
            })?;
            Ok(KernelChoice::Precomputed { matrix })
        }
        other => anyhow::bail!(
            "unknown kernel {other:?}; expected linear, rbf, polynomial, or precomputed"
        ),
    }
}

pub fn kernel_dto(choice: &KernelChoice) -> KernelSpecDto {
    match choice {
        KernelChoice::Analytic(spec) => KernelSpecDto::from(spec),
        KernelChoice::Precomputed { .. } => KernelSpecDto::Precomputed,
    }
}

pub fn parse_mode(mode: Option<String>) -> anyhow::Result<BuildMode> {
    match mode.as_deref() {
        None | Some("single") => Ok(BuildMode::Single),
        Some("iterated") => Ok(BuildMode::Iterated),
        Some(other) => anyhow::bail!("unknown mode {other:?}; expected single or iterated"),
    }
}

/// Resolved output directory: flag, then `KCORESET_OUT_DIR`, then config,
/// then the default.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("KCORESET_OUT_DIR").map(PathBuf::from))
        .or(config)
        .unwrap_or_else(|| PathBuf::from(defaults::OUT_DIR))
}

/// Echo of every resolved value, embedded in manifests.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub input: Option<String>,
    pub weighted: bool,
    pub subsample: Option<usize>,
    pub kernel: KernelSpecDto,
    pub k: usize,
    pub z: f64,
    pub coreset_size: Option<usize>,
    pub epsilon: f64,
    pub mode: String,
    pub seed: u64,
    pub out_dir: String,
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_sets: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_sample_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}
