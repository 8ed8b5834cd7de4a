//! Synthetic two-channel data `x = A_x s_x + n_x`, `y = A_y s_y + n_y`.
//!
//! The first `d` components of `s_x` and `s_y` are pairwise correlated with
//! coefficients `ρ_i`; the remaining `f_x`, `f_y` components are independent
//! across channels. All complex Gaussians are circular with `E|z|² = variance`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cca::{singular_values, CMatrix, Complex64, DataMatrixPair};
use crate::error::{Error, Result};

/// Mixing matrix of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MixingModel {
    /// Leading columns of a Haar-random unitary matrix, redrawn per dataset.
    RandomUnitary,
    /// Uniform linear array steering vectors, one per arrival angle (degrees).
    UlaSteering { angles_deg: Vec<f64> },
}

/// Spatial noise model, applied independently to each sample and channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseModel {
    White {
        sigma2: f64,
    },
    /// `v_k = Σ_q coeffs[q] · w_{(k+q) mod dim}` with i.i.d. driver variance `sigma2_w`.
    SpatialMa {
        coeffs: Vec<f64>,
        sigma2_w: f64,
    },
    /// `v_k = a · v_{k-1} + w_k` along the component index, started in stationarity.
    SpatialAr1 {
        a: f64,
        sigma2_w: f64,
    },
}

impl NoiseModel {
    /// Per-component noise variance.
    pub fn component_variance(&self) -> f64 {
        match self {
            NoiseModel::White { sigma2 } => *sigma2,
            NoiseModel::SpatialMa { coeffs, sigma2_w } => {
                sigma2_w * coeffs.iter().map(|c| c * c).sum::<f64>()
            }
            NoiseModel::SpatialAr1 { a, sigma2_w } => sigma2_w / (1.0 - a * a),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            NoiseModel::White { sigma2 } => *sigma2 > 0.0,
            NoiseModel::SpatialMa { coeffs, sigma2_w } => {
                *sigma2_w > 0.0 && !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite())
            }
            NoiseModel::SpatialAr1 { a, sigma2_w } => *sigma2_w > 0.0 && a.abs() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid noise model {self:?}")))
        }
    }
}

/// Full generative description of a two-channel scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub m: usize,
    /// Sample count `M`.
    pub samples: usize,
    pub d: usize,
    pub f_x: usize,
    pub f_y: usize,
    /// Standard deviations of the `d + f_x` signal components of `s_x`.
    pub sigma_x: Vec<f64>,
    /// Standard deviations of the `d + f_y` signal components of `s_y`.
    pub sigma_y: Vec<f64>,
    /// Correlation coefficients of the `d` correlated pairs.
    pub rho: Vec<f64>,
    /// When positive, each dataset draws `ρ_i` uniformly from `rho[i] ± rho_spread`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub rho_spread: f64,
    pub mixing_x: MixingModel,
    pub mixing_y: MixingModel,
    pub noise: NoiseModel,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.samples < 2 {
            return fail(format!("need at least 2 samples, got {}", self.samples));
        }
        if self.n == 0 || self.m == 0 {
            return fail("channel dimensions must be positive".into());
        }
        if self.d + self.f_x > self.n || self.d + self.f_y > self.m {
            return fail(format!(
                "signal counts d + f_x = {}, d + f_y = {} exceed dimensions n = {}, m = {}",
                self.d + self.f_x,
                self.d + self.f_y,
                self.n,
                self.m
            ));
        }
        if self.sigma_x.len() != self.d + self.f_x || self.sigma_y.len() != self.d + self.f_y {
            return fail("sigma_x / sigma_y lengths must be d + f_x / d + f_y".into());
        }
        if self
            .sigma_x
            .iter()
            .chain(&self.sigma_y)
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return fail("standard deviations must be positive".into());
        }
        if self.rho.len() != self.d {
            return fail(format!("expected {} correlation coefficients", self.d));
        }
        if !(self.rho_spread >= 0.0) {
            return fail("rho_spread must be nonnegative".into());
        }
        if self.rho.iter().any(|r| !(r.abs() + self.rho_spread <= 1.0)) {
            return fail("correlation coefficients must satisfy |ρ| + spread ≤ 1".into());
        }
        for (mixing, count, name) in [
            (&self.mixing_x, self.d + self.f_x, "x"),
            (&self.mixing_y, self.d + self.f_y, "y"),
        ] {
            if let MixingModel::UlaSteering { angles_deg } = mixing {
                if angles_deg.len() != count {
                    return fail(format!(
                        "channel {name}: {} steering angles for {count} signals",
                        angles_deg.len()
                    ));
                }
            }
        }
        self.noise.validate()?;
        if let NoiseModel::SpatialMa { coeffs, .. } = &self.noise {
            if coeffs.len() > self.n.min(self.m) {
                return fail("MA order exceeds channel dimension".into());
            }
        }
        Ok(())
    }

    /// True when both mixing matrices are deterministic.
    pub fn has_fixed_mixing(&self) -> bool {
        !matches!(self.mixing_x, MixingModel::RandomUnitary)
            && !matches!(self.mixing_y, MixingModel::RandomUnitary)
    }
}

/// Ground truth attached to a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truth {
    pub d: usize,
    pub f_x: usize,
    pub f_y: usize,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub pair: DataMatrixPair,
    pub truth: Truth,
    /// Smallest singular values of `A_x` and `A_y` (0 when a channel has no signals).
    pub mixing_min_singular: [f64; 2],
}

/// Independent random streams for one dataset.
///
/// Every `(seed, point, trial, tag)` tuple maps to its own ChaCha20 stream,
/// so datasets can be generated in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub point: u64,
    pub trial: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Mixing = 0,
    Signals = 1,
    NoiseX = 2,
    NoiseY = 3,
    Rho = 4,
}

impl StreamKey {
    pub fn new(seed: u64, point: u64, trial: u64) -> Self {
        Self { seed, point, trial }
    }

    pub fn rng(&self, tag: StreamTag) -> ChaCha20Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.point.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(self.trial.wrapping_mul(8).wrapping_add(tag as u64));
        rng
    }
}

/// Circular complex Gaussian sample with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> CMatrix {
    // column-major fill, so the draw order is fixed by (rows, cols)
    let mut out = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            out[(i, j)] = complex_gaussian(rng, variance);
        }
    }
    out
}

/// First `cols` columns of a Haar-distributed `rows × rows` unitary matrix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(cols <= rows, "isometry needs cols ≤ rows");
    if cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let qr = gaussian_matrix(rows, cols, 1.0, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let diag = r[(j, j)];
        let norm = diag.norm();
        let phase = if norm > 0.0 {
            diag / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Haar-distributed `dim × dim` unitary matrix (QR of a complex Gaussian with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    random_isometry(dim, dim, rng)
}

/// ULA steering matrix with entries `exp(j (π/2) k sin θ_i)`, `k = 0, …, dim - 1`.
pub fn ula_steering(dim: usize, angles_deg: &[f64]) -> CMatrix {
    CMatrix::from_fn(dim, angles_deg.len(), |k, i| {
        let phase = std::f64::consts::FRAC_PI_2 * k as f64 * angles_deg[i].to_radians().sin();
        Complex64::from_polar(1.0, phase)
    })
}

fn mixing_matrix<R: Rng + ?Sized>(model: &MixingModel, dim: usize, signals: usize, rng: &mut R) -> CMatrix {
    match model {
        MixingModel::RandomUnitary => random_isometry(dim, signals, rng),
        MixingModel::UlaSteering { angles_deg } => ula_steering(dim, angles_deg),
    }
}

/// Draws `(A_x, A_y)` for a scenario.
pub fn mixing_matrices<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> (CMatrix, CMatrix) {
    let ax = mixing_matrix(&cfg.mixing_x, cfg.n, cfg.d + cfg.f_x, rng);
    let ay = mixing_matrix(&cfg.mixing_y, cfg.m, cfg.d + cfg.f_y, rng);
    (ax, ay)
}

/// Resolves `ρ` for one dataset, drawing jitter when `rho_spread > 0`.
pub fn draw_rho<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Vec<f64> {
    if cfg.rho_spread == 0.0 {
        return cfg.rho.clone();
    }
    cfg.rho
        .iter()
        .map(|r| (r + cfg.rho_spread * (2.0 * rng.random::<f64>() - 1.0)).clamp(-1.0, 1.0))
        .collect()
}

/// Signal matrices `S_x` (`(d + f_x) × M`) and `S_y` (`(d + f_y) × M`).
///
/// Correlated pair `i` uses the 2×2 Cholesky factor of its covariance:
/// `s_x = σ_x z₁`, `s_y = σ_y (ρ z₁ + √(1 - ρ²) z₂)`.
pub fn sample_signals<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rho: &[f64],
    rng: &mut R,
) -> (CMatrix, CMatrix) {
    let samples = cfg.samples;
    let mut sx = CMatrix::zeros(cfg.d + cfg.f_x, samples);
    let mut sy = CMatrix::zeros(cfg.d + cfg.f_y, samples);
    for t in 0..samples {
        for i in 0..cfg.d {
            let z1 = complex_gaussian(rng, 1.0);
            let z2 = complex_gaussian(rng, 1.0);
            let r = rho[i];
            sx[(i, t)] = z1 * cfg.sigma_x[i];
            sy[(i, t)] = (z1 * r + z2 * (1.0 - r * r).max(0.0).sqrt()) * cfg.sigma_y[i];
        }
        for i in cfg.d..cfg.d + cfg.f_x {
            sx[(i, t)] = complex_gaussian(rng, 1.0) * cfg.sigma_x[i];
        }
        for i in cfg.d..cfg.d + cfg.f_y {
            sy[(i, t)] = complex_gaussian(rng, 1.0) * cfg.sigma_y[i];
        }
    }
    (sx, sy)
}

/// Noise matrix of shape `dim × samples`.
pub fn sample_noise<R: Rng + ?Sized>(
    model: &NoiseModel,
    dim: usize,
    samples: usize,
    rng: &mut R,
) -> CMatrix {
    match model {
        NoiseModel::White { sigma2 } => gaussian_matrix(dim, samples, *sigma2, rng),
        NoiseModel::SpatialMa { coeffs, sigma2_w } => {
            let driver = gaussian_matrix(dim, samples, *sigma2_w, rng);
            CMatrix::from_fn(dim, samples, |k, t| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(q, c)| driver[((k + q) % dim, t)] * *c)
                    .sum()
            })
        }
        NoiseModel::SpatialAr1 { a, sigma2_w } => {
            let mut out = CMatrix::zeros(dim, samples);
            let stationary = sigma2_w / (1.0 - a * a);
            for t in 0..samples {
                let mut prev = complex_gaussian(rng, stationary);
                out[(0, t)] = prev;
                for k in 1..dim {
                    prev = prev * *a + complex_gaussian(rng, *sigma2_w);
                    out[(k, t)] = prev;
                }
            }
            out
        }
    }
}

fn min_singular(a: &CMatrix) -> Result<f64> {
    if a.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(a)?.last().copied().unwrap_or(0.0))
}

fn assemble(
    cfg: &ScenarioConfig,
    mixing: (CMatrix, CMatrix),
    rho: Vec<f64>,
    signals: (CMatrix, CMatrix),
    noise: (CMatrix, CMatrix),
) -> Result<GeneratedDataset> {
    let (ax, ay) = mixing;
    let (sx, sy) = signals;
    let (nx, ny) = noise;
    let x = &ax * sx + nx;
    let y = &ay * sy + ny;
    Ok(GeneratedDataset {
        pair: DataMatrixPair::new(x, y)?,
        truth: Truth {
            d: cfg.d,
            f_x: cfg.f_x,
            f_y: cfg.f_y,
            rho,
        },
        mixing_min_singular: [min_singular(&ax)?, min_singular(&ay)?],
    })
}

/// Generates one dataset from a single generator.
pub fn generate<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<GeneratedDataset> {
    cfg.validate()?;
    let mixing = mixing_matrices(cfg, rng);
    let rho = draw_rho(cfg, rng);
    let signals = sample_signals(cfg, &rho, rng);
    let nx = sample_noise(&cfg.noise, cfg.n, cfg.samples, rng);
    let ny = sample_noise(&cfg.noise, cfg.m, cfg.samples, rng);
    assemble(cfg, mixing, rho, signals, (nx, ny))
}

/// Generates one dataset from the independent streams of `key`.
///
/// Pass `fixed_mixing` to reuse mixing matrices across datasets.
pub fn generate_keyed(
    cfg: &ScenarioConfig,
    key: StreamKey,
    fixed_mixing: Option<&(CMatrix, CMatrix)>,
) -> Result<GeneratedDataset> {
    cfg.validate()?;
    let mixing = match fixed_mixing {
        Some(m) => m.clone(),
        None => mixing_matrices(cfg, &mut key.rng(StreamTag::Mixing)),
    };
    let rho = draw_rho(cfg, &mut key.rng(StreamTag::Rho));
    let signals = sample_signals(cfg, &rho, &mut key.rng(StreamTag::Signals));
    let nx = sample_noise(&cfg.noise, cfg.n, cfg.samples, &mut key.rng(StreamTag::NoiseX));
    let ny = sample_noise(&cfg.noise, cfg.m, cfg.samples, &mut key.rng(StreamTag::NoiseY));
    assemble(cfg, mixing, rho, signals, (nx, ny))
}

/// Sample covariance `Z Z^H / M`.
pub fn sample_covariance(z: &CMatrix) -> CMatrix {
    let scale = Complex64::new(1.0 / z.ncols() as f64, 0.0);
    (z * z.adjoint()) * scale
}

/// Gram matrix `Q^H Q`, handy for unitarity checks.
pub fn gram(q: &CMatrix) -> CMatrix {
    q.adjoint() * q
}

/// Largest entrywise deviation of `g` from the identity.
pub fn identity_deviation(g: &CMatrix) -> f64 {
    let id: DMatrix<Complex64> = DMatrix::identity(g.nrows(), g.ncols());
    (g - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
