//! File formats for artifacts: coreset CSV + JSON sidecar, solution JSON,
//! error-report CSV/JSON, partition CSV, and dense matrix loading (CSV or
//! the `KCMX` little-endian binary layout).

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coreset::{BuildMode, Coreset};
use crate::error::{Error, Result};
use crate::eval::{ErrorReport, SpeedupReport};
use crate::kernel::KernelSpec;
use crate::matrix::DenseMatrix;
use crate::scalar::{as_f64, num, Scalar};
use crate::solver::ClusteringSolution;
use crate::spectral::DegreeMode;

/// Magic prefix of the binary dense-matrix format: `KCMX`, then the matrix
/// order as a little-endian `u64`, then `n²` little-endian `f64` entries
/// row-major.
pub const MATRIX_MAGIC: &[u8; 4] = b"KCMX";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Serialized kernel description for sidecars and manifests.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSpecDto {
    Linear,
    Rbf {
        sigma: f64,
        #[serde(default)]
        unsquared: bool,
    },
    Polynomial {
        c: f64,
        degree: u32,
    },
    Precomputed,
    ScaledSimilarity,
}

impl<F: Scalar> From<&KernelSpec<F>> for KernelSpecDto {
    fn from(spec: &KernelSpec<F>) -> Self {
        match spec {
            KernelSpec::Linear => KernelSpecDto::Linear,
            KernelSpec::Rbf { sigma, unsquared } => KernelSpecDto::Rbf {
                sigma: as_f64(*sigma),
                unsquared: *unsquared,
            },
            KernelSpec::Polynomial { c, degree } => KernelSpecDto::Polynomial {
                c: as_f64(*c),
                degree: *degree,
            },
            KernelSpec::Precomputed => KernelSpecDto::Precomputed,
            KernelSpec::ScaledSimilarity => KernelSpecDto::ScaledSimilarity,
        }
    }
}

impl KernelSpecDto {
    pub fn to_spec<F: Scalar>(&self) -> KernelSpec<F> {
        match *self {
            KernelSpecDto::Linear => KernelSpec::Linear,
            KernelSpecDto::Rbf { sigma, unsquared } => KernelSpec::Rbf {
                sigma: num(sigma),
                unsquared,
            },
            KernelSpecDto::Polynomial { c, degree } => KernelSpec::Polynomial {
                c: num(c),
                degree,
            },
            KernelSpecDto::Precomputed => KernelSpec::Precomputed,
            KernelSpecDto::ScaledSimilarity => KernelSpec::ScaledSimilarity,
        }
    }
}

/// JSON sidecar accompanying a coreset CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoresetSidecar {
    pub k: usize,
    pub z: f64,
    /// Requested sample count, when one applied.
    pub n_samples: Option<usize>,
    pub seed: u64,
    pub mode: String,
    pub kernel: KernelSpecDto,
    pub source_distinct: usize,
    pub entries: usize,
    pub total_weight: f64,
}

pub fn build_mode_name(mode: BuildMode) -> &'static str {
    match mode {
        BuildMode::Single => "single",
        BuildMode::Iterated => "iterated",
    }
}

/// Writes `index,weight` rows with a header.
pub fn write_coreset_csv<F: Scalar>(path: impl AsRef<Path>, coreset: &Coreset<F>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "index,weight").map_err(|e| io_err(path, e))?;
    for (&i, &wt) in coreset.indices.iter().zip(&coreset.weights) {
        writeln!(w, "{},{}", i, format_float(as_f64(wt))).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a coreset CSV written by [`write_coreset_csv`].
pub fn read_coreset_csv<F: Scalar>(
    path: impl AsRef<Path>,
    source_distinct: usize,
) -> Result<Coreset<F>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if ln == 0 && line.starts_with("index") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let parse = |s: Option<&str>, what: &str| -> Result<String> {
            s.map(|v| v.trim().to_string()).ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                message: format!("row {ln} missing {what}"),
            })
        };
        let idx: usize = parse(parts.next(), "index")?.parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            message: format!("row {ln}: bad index"),
        })?;
        let wt: f64 = parse(parts.next(), "weight")?.parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            message: format!("row {ln}: bad weight"),
        })?;
        indices.push(idx);
        weights.push(num(wt));
    }
    Ok(Coreset {
        indices,
        weights,
        source_distinct,
    })
}

/// Serialized clustering solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDto {
    pub centers: Vec<CenterDto>,
    pub objective: f64,
    pub iterations: usize,
    pub seed: u64,
    pub timings: SolveTimings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CenterDto {
    pub support: Vec<usize>,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SolveTimings {
    pub build_s: f64,
    pub seed_s: f64,
    pub lloyd_s: f64,
    pub evaluate_s: f64,
}

pub fn solution_dto<F: Scalar>(
    solution: &ClusteringSolution<F>,
    full_objective: f64,
    seed: u64,
    timings: SolveTimings,
) -> SolutionDto {
    let centers = solution
        .centers
        .iter()
        .map(|c| match c {
            crate::center::Center::DataPoint(i) => CenterDto {
                support: vec![*i],
                coeffs: vec![1.0],
            },
            crate::center::Center::Combination { support, coeffs } => CenterDto {
                support: support.clone(),
                coeffs: coeffs.iter().map(|&a| as_f64(a)).collect(),
            },
        })
        .collect();
    SolutionDto {
        centers,
        objective: full_objective,
        iterations: solution.iterations,
        seed,
        timings,
    }
}

/// Pretty-printed JSON to a file.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// One row per repetition: `repetition,seed,epsilon_hat,coreset_entries`.
pub fn write_error_report_csv(path: impl AsRef<Path>, report: &ErrorReport) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "repetition,seed,epsilon_hat,coreset_entries").map_err(|e| io_err(path, e))?;
    for (rep, ((eps, size), seed)) in report
        .epsilon_hats
        .iter()
        .zip(&report.coreset_sizes)
        .zip(&report.rep_seeds)
        .enumerate()
    {
        writeln!(w, "{rep},{seed},{},{size}", format_float(*eps)).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// JSON summary of an [`ErrorReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorSummaryDto {
    pub requested_samples: Option<usize>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
    pub num_center_sets: usize,
    pub num_repetitions: usize,
    pub master_seed: u64,
    pub skipped_center_sets: usize,
    pub mean_coreset_entries: f64,
}

pub fn error_summary(report: &ErrorReport) -> ErrorSummaryDto {
    let mean_entries = if report.coreset_sizes.is_empty() {
        0.0
    } else {
        report.coreset_sizes.iter().sum::<usize>() as f64 / report.coreset_sizes.len() as f64
    };
    ErrorSummaryDto {
        requested_samples: report.requested_samples,
        mean: report.mean,
        min: report.min,
        max: report.max,
        std: report.std,
        num_center_sets: report.num_center_sets,
        num_repetitions: report.num_repetitions,
        master_seed: report.master_seed,
        skipped_center_sets: report.skipped_center_sets,
        mean_coreset_entries: mean_entries,
    }
}

/// `index,cluster` rows with a header.
pub fn write_partition_csv(path: impl AsRef<Path>, partition: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "index,cluster").map_err(|e| io_err(path, e))?;
    for (i, &c) in partition.iter().enumerate() {
        writeln!(w, "{i},{c}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// `index,assignment` alias used by solve artifacts.
pub fn write_assignment_csv(path: impl AsRef<Path>, assignment: &[usize]) -> Result<()> {
    write_partition_csv(path, assignment)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedupRowDto {
    pub n_samples: usize,
    pub build_s: f64,
    pub solve_s: f64,
    pub eval_s: f64,
    pub total_s: f64,
    pub min_objective: f64,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedupReportDto {
    pub rows: Vec<SpeedupRowDto>,
    pub vanilla_time_s: Option<f64>,
    pub vanilla_min_objective: Option<f64>,
    pub runs: usize,
}

pub fn speedup_dto(report: &SpeedupReport) -> SpeedupReportDto {
    SpeedupReportDto {
        rows: report
            .rows
            .iter()
            .map(|r| SpeedupRowDto {
                n_samples: r.n_samples,
                build_s: r.build_s,
                solve_s: r.solve_s,
                eval_s: r.eval_s,
                total_s: r.total_s,
                min_objective: r.min_objective,
                rel_error: r.rel_error,
            })
            .collect(),
        vanilla_time_s: report.vanilla.as_ref().map(|v| v.time_s),
        vanilla_min_objective: report.vanilla.as_ref().map(|v| v.min_objective),
        runs: report.runs,
    }
}

pub fn degree_mode_name(mode: DegreeMode) -> String {
    match mode {
        DegreeMode::Exact => "exact".into(),
        DegreeMode::Sampled { sample_size } => format!("sampled:{sample_size}"),
    }
}

/// Loads a dense symmetric matrix, sniffing the `KCMX` magic and falling
/// back to headerless CSV.
pub fn load_matrix<F: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<F>> {
    let path = path.as_ref();
    let mut file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut magic = [0u8; 4];
    let got = file.read(&mut magic).map_err(|e| io_err(path, e))?;
    if got == 4 && &magic == MATRIX_MAGIC {
        load_matrix_binary_body(path, file)
    } else {
        load_matrix_csv(path)
    }
}

fn load_matrix_binary_body<F: Scalar>(path: &Path, mut file: std::fs::File) -> Result<DenseMatrix<F>> {
    let mut buf8 = [0u8; 8];
    file.read_exact(&mut buf8).map_err(|e| io_err(path, e))?;
    let n = u64::from_le_bytes(buf8) as usize;
    let mut data = Vec::with_capacity(n * n);
    let mut reader = BufReader::new(file);
    for _ in 0..n * n {
        reader.read_exact(&mut buf8).map_err(|e| io_err(path, e))?;
        data.push(num(f64::from_le_bytes(buf8)));
    }
    DenseMatrix::new(n, data)
}

fn load_matrix_csv<F: Scalar>(path: &Path) -> Result<DenseMatrix<F>> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut data: Vec<F> = Vec::new();
    let mut n = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if row_idx == 0 {
            n = record.len();
        } else if record.len() != n {
            return Err(Error::Parse {
                path: path.display().to_string(),
                message: format!("ragged matrix row {row_idx}"),
            });
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                message: format!("non-numeric matrix entry {field:?} in row {row_idx}"),
            })?;
            data.push(num(v));
        }
    }
    if data.len() != n * n {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("matrix is {} entries, expected {n}x{n}", data.len()),
        });
    }
    DenseMatrix::new(n, data)
}

/// Writes the `KCMX` binary matrix format.
pub fn write_matrix_binary<F: Scalar>(path: impl AsRef<Path>, matrix: &DenseMatrix<F>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(MATRIX_MAGIC).map_err(|e| io_err(path, e))?;
    w.write_all(&(matrix.n() as u64).to_le_bytes())
        .map_err(|e| io_err(path, e))?;
    for &v in matrix.data() {
        w.write_all(&as_f64(v).to_le_bytes()).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Shortest representation that round-trips through `f64`.
fn format_float(v: f64) -> String {
    let mut s = format!("{v}");
    if s.parse::<f64>() != Ok(v) {
        s = format!("{v:e}");
    }
    s
}
