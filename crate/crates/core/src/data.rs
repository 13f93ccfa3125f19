//! Sample containers, synthetic benchmark distributions, and CSV ingestion.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::Rng;

/// A set of d-dimensional samples with a provenance label.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    d: usize,
    /// Row-major n × d storage.
    data: Vec<f64>,
    pub label: String,
}

impl PointCloud {
    /// Build from flat row-major storage. Requires at least one point and
    /// all entries finite.
    pub fn new(d: usize, data: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "point dimension must be at least 1".into(),
            ));
        }
        if data.is_empty() || !data.len().is_multiple_of(d) {
            return Err(Error::InvalidParameter(format!(
                "flat data length {} is not a positive multiple of d = {d}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "point cloud",
                index: idx / d,
            });
        }
        Ok(Self {
            d,
            data,
            label: label.into(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter(
                "rows have inconsistent dimensions".into(),
            ));
        }
        Self::new(d, rows.concat(), label)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Per-coordinate sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let refs: Vec<&[f64]> = self.rows().collect();
        linalg::mean_and_cov(&refs, self.d).0
    }

    /// Write as CSV (`x_1,…,x_d` header optional).
    pub fn save_csv(&self, path: &Path, header: bool) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        if header {
            let names: Vec<String> = (1..=self.d).map(|i| format!("x_{i}")).collect();
            writeln!(w, "{}", names.join(","))?;
        }
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Load a rectangular numeric CSV file. Row indices in errors are 1-based
/// and count physical lines, so they match what an editor shows.
pub fn load_csv(path: &Path, has_header: bool) -> Result<PointCloud> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (line_idx, line) in reader.lines().enumerate() {
        let line = line?;
        let row_no = line_idx + 1;
        if line_idx == 0 && has_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::CsvRagged {
                path: display,
                row: row_no,
                expected,
                got: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col_idx, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::CsvNonNumeric {
                path: display.clone(),
                row: row_no,
                col: col_idx + 1,
                token: cell.trim().to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::CsvNonFinite {
                    path: display.clone(),
                    row: row_no,
                    col: col_idx + 1,
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::CsvEmpty { path: display });
    }
    PointCloud::from_rows(
        &rows,
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    )
}

/// One Gaussian mode of a ground-truth mixture.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianMode {
    pub mean: Vec<f64>,
    /// Row-major d × d SPD covariance.
    pub cov: Vec<f64>,
    pub weight: f64,
}

/// A ground-truth Gaussian mixture with generation provenance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianMixtureSpec {
    pub modes: Vec<GaussianMode>,
    pub seed: u64,
    pub variant: String,
}

/// The three 25-mode benchmark layouts in d = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixtureVariant {
    /// 5×5 grid spanning [-4, 4]², isotropic covariances.
    Standard,
    /// Mode locations uniform in [-4, 4]², isotropic covariances.
    Irregular,
    /// 5×5 grid, random rotated anisotropic covariances
    /// (eigenvalue ratio capped at 10).
    Anisotropic,
}

impl MixtureVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MixtureVariant::Standard => "standard",
            MixtureVariant::Irregular => "irregular",
            MixtureVariant::Anisotropic => "anisotropic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MixtureVariant::Standard),
            "irregular" => Ok(MixtureVariant::Irregular),
            "anisotropic" => Ok(MixtureVariant::Anisotropic),
            other => Err(Error::InvalidParameter(format!(
                "unknown mixture variant {other:?}"
            ))),
        }
    }
}

/// Half-width of the benchmark box: modes live in [-4, 4]².
const GRID_EXTENT: f64 = 4.0;
/// Isotropic mode standard deviation for the standard/irregular layouts.
const MODE_STD: f64 = 0.2;
/// Anisotropic eigenvalue range; ratio bounded by 10 by construction.
const ANISO_EIG_LO: f64 = 0.004;
const ANISO_EIG_HI: f64 = 0.04;

/// Build one of the 25-Gaussian benchmark mixtures. Deterministic in
/// (variant, seed).
pub fn make_25gauss(variant: MixtureVariant, seed: u64) -> GaussianMixtureSpec {
    let mut rng = crate::rng::rng_from_seed(crate::rng::derive_seed(seed, "25gauss"));
    let weight = 1.0 / 25.0;
    let grid: Vec<Vec<f64>> = (0..5)
        .flat_map(|i| {
            (0..5).map(move |j| {
                vec![
                    -GRID_EXTENT + 2.0 * GRID_EXTENT * i as f64 / 4.0,
                    -GRID_EXTENT + 2.0 * GRID_EXTENT * j as f64 / 4.0,
                ]
            })
        })
        .collect();
    let iso = vec![MODE_STD * MODE_STD, 0.0, 0.0, MODE_STD * MODE_STD];
    let modes = match variant {
        MixtureVariant::Standard => grid
            .into_iter()
            .map(|mean| GaussianMode {
                mean,
                cov: iso.clone(),
                weight,
            })
            .collect(),
        MixtureVariant::Irregular => (0..25)
            .map(|_| {
                let mean = vec![
                    rng.random_range(-GRID_EXTENT..GRID_EXTENT),
                    rng.random_range(-GRID_EXTENT..GRID_EXTENT),
                ];
                GaussianMode {
                    mean,
                    cov: iso.clone(),
                    weight,
                }
            })
            .collect(),
        MixtureVariant::Anisotropic => grid
            .into_iter()
            .map(|mean| {
                let l1 = rng.random_range(ANISO_EIG_LO..ANISO_EIG_HI);
                let l2 = rng.random_range(ANISO_EIG_LO..ANISO_EIG_HI);
                let angle = rng.random_range(0.0..std::f64::consts::PI);
                let (s, c) = angle.sin_cos();
                // R diag(l1, l2) Rᵀ
                let cov = vec![
                    c * c * l1 + s * s * l2,
                    s * c * (l1 - l2),
                    s * c * (l1 - l2),
                    s * s * l1 + c * c * l2,
                ];
                GaussianMode { mean, cov, weight }
            })
            .collect(),
    };
    GaussianMixtureSpec {
        modes,
        seed,
        variant: variant.as_str().to_string(),
    }
}

impl GaussianMixtureSpec {
    pub fn d(&self) -> usize {
        self.modes.first().map(|m| m.mean.len()).unwrap_or(0)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let json =
            serde_json::to_string_pretty(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))
    }
}

/// Something the trainer and evaluators can draw i.i.d. points from.
pub trait SampleProvider {
    fn dim(&self) -> usize;
    fn sample(&self, n: usize, rng: &mut Rng) -> PointCloud;
}

impl SampleProvider for GaussianMixtureSpec {
    fn dim(&self) -> usize {
        self.d()
    }

    /// Ancestral sampling: categorical component choice by cumulative
    /// weight, then mean + L ξ with L the covariance Cholesky factor.
    fn sample(&self, n: usize, rng: &mut Rng) -> PointCloud {
        let d = self.d();
        let factors: Vec<Vec<f64>> = self
            .modes
            .iter()
            .map(|mode| linalg::cholesky_psd(&mode.cov, d).expect("mode covariance must be PSD"))
            .collect();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.modes.len() - 1;
            for (k, mode) in self.modes.iter().enumerate() {
                acc += mode.weight;
                if u < acc {
                    pick = k;
                    break;
                }
            }
            let noise: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let shaped = linalg::lower_tri_matvec(&factors[pick], d, &noise);
            data.extend(
                self.modes[pick]
                    .mean
                    .iter()
                    .zip(shaped.iter())
                    .map(|(m, z)| m + z),
            );
        }
        PointCloud::new(d, data, format!("mixture-{}", self.variant))
            .expect("finite by construction")
    }
}

/// The standard normal source distribution in d dimensions.
#[derive(Debug, Clone, Copy)]
pub struct StandardNormalSource {
    pub d: usize,
}

impl SampleProvider for StandardNormalSource {
    fn dim(&self) -> usize {
        self.d
    }

    fn sample(&self, n: usize, rng: &mut Rng) -> PointCloud {
        let data: Vec<f64> = (0..n * self.d)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        PointCloud::new(self.d, data, "standard-normal").expect("finite by construction")
    }
}

/// Convenience wrapper matching the provider trait, seeded directly.
pub fn sample_standard_normal(d: usize, n: usize, seed: u64) -> PointCloud {
    StandardNormalSource { d }.sample(n, &mut crate::rng::rng_from_seed(seed))
}

/// A finite dataset used as a provider: draws are uniform with replacement,
/// so every step of a training loop still sees a fresh batch.
#[derive(Debug, Clone)]
pub struct DatasetSource {
    cloud: PointCloud,
}

impl DatasetSource {
    pub fn new(cloud: PointCloud) -> Self {
        Self { cloud }
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }
}

impl SampleProvider for DatasetSource {
    fn dim(&self) -> usize {
        self.cloud.dim()
    }

    fn sample(&self, n: usize, rng: &mut Rng) -> PointCloud {
        let d = self.cloud.dim();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            let idx = rng.random_range(0..self.cloud.len());
            data.extend_from_slice(self.cloud.row(idx));
        }
        PointCloud::new(d, data, self.cloud.label.clone()).expect("subset of finite data")
    }
}
