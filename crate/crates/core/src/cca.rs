//! Sample canonical correlations, at full dimension and after PCA rank
//! reduction of each channel.
//!
//! The reduced-rank spectra never touch the reduced data directly. With
//! `X = U_x Σ_x V_x^H` and `Y = U_y Σ_y V_y^H`, the canonical correlations of
//! the rank-`(r_x, r_y)` PCA descriptions are the singular values of
//! `V_x(:, 1:r_x)^H V_y(:, 1:r_y)`. [`full_canonical_correlations`] goes the
//! long way through sample covariances and serves as the independent route.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Channel, Error, Result};

pub type Complex64 = Complex<f64>;
pub type CMatrix = DMatrix<Complex64>;

/// Slack above 1 tolerated before a canonical correlation counts as a numerical failure.
pub const UNIT_SLACK: f64 = 1e-9;

/// Condition number past which a sample covariance is reported as singular.
pub const MAX_COVARIANCE_CONDITION: f64 = 1e12;

/// Two observed sample matrices with a shared sample count.
///
/// `x` is `n × M`, `y` is `m × M`; rows are channel components and columns
/// are i.i.d. sample pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrixPair {
    x: CMatrix,
    y: CMatrix,
}

impl DataMatrixPair {
    pub fn new(x: CMatrix, y: CMatrix) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::InvalidArgument(format!(
                "X has {} samples but Y has {}",
                x.ncols(),
                y.ncols()
            )));
        }
        if x.ncols() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {}",
                x.ncols()
            )));
        }
        if x.nrows() == 0 || y.nrows() == 0 {
            return Err(Error::InvalidArgument("empty channel".into()));
        }
        for (name, mat) in [("X", &x), ("Y", &y)] {
            if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self { x, y })
    }

    /// Embeds real data as complex with zero imaginary part.
    pub fn from_real(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Self> {
        Self::new(
            x.map(|v| Complex64::new(v, 0.0)),
            y.map(|v| Complex64::new(v, 0.0)),
        )
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn y(&self) -> &CMatrix {
        &self.y
    }

    /// Dimension `n` of the first channel.
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Dimension `m` of the second channel.
    pub fn m(&self) -> usize {
        self.y.nrows()
    }

    /// Sample count `M`.
    pub fn samples(&self) -> usize {
        self.x.ncols()
    }

    /// `p = min(n, m)`, the number of full-dimension canonical correlations.
    pub fn min_dim(&self) -> usize {
        self.n().min(self.m())
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix) {
        (self.x, self.y)
    }
}

/// Thin SVD of one channel: `U` is `rows × k`, `V` is `M × k`, `k = min(rows, M)`.
#[derive(Debug, Clone)]
pub struct ChannelSvd {
    pub u: CMatrix,
    pub singular_values: DVector<f64>,
    pub v: CMatrix,
}

impl ChannelSvd {
    fn compute(mat: &CMatrix) -> Result<Self> {
        let (rows, cols) = mat.shape();
        let svd = mat
            .clone()
            .try_svd(true, true, f64::EPSILON, max_sweeps(rows, cols))
            .ok_or(Error::SvdFailed { rows, cols })?;
        let u = svd.u.ok_or(Error::SvdFailed { rows, cols })?;
        let v = svd.v_t.ok_or(Error::SvdFailed { rows, cols })?.adjoint();
        Ok(Self {
            u,
            singular_values: svd.singular_values,
            v,
        })
    }

    /// `U Σ V^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.adjoint()
    }
}

/// SVDs of both channels of a [`DataMatrixPair`].
#[derive(Debug, Clone)]
pub struct SvdCache {
    pub x: ChannelSvd,
    pub y: ChannelSvd,
    n: usize,
    m: usize,
    samples: usize,
}

impl SvdCache {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Largest admissible rank bound for [`spectrum_table`]: `min(n, m, ⌊M/2⌋)`.
    pub fn default_r_max(&self) -> usize {
        self.n.min(self.m).min(self.samples / 2)
    }

    fn check_reduced_ranks(&self, r_x: usize, r_y: usize) -> Result<()> {
        let p = self.n.min(self.m);
        if r_x == 0 || r_y == 0 {
            return Err(Error::InvalidArgument("PCA ranks must be positive".into()));
        }
        if r_x + r_y > self.samples {
            return Err(Error::InvalidArgument(format!(
                "r_x + r_y = {} exceeds the sample count {}",
                r_x + r_y,
                self.samples
            )));
        }
        if r_x.max(r_y) > p {
            return Err(Error::InvalidArgument(format!(
                "max(r_x, r_y) = {} exceeds min(n, m) = {p}",
                r_x.max(r_y)
            )));
        }
        Ok(())
    }
}

/// Canonical correlations for one rank pair, clamped to `[0, 1]` and non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalSpectrum {
    pub r_x: usize,
    pub r_y: usize,
    k: Vec<f64>,
}

impl CanonicalSpectrum {
    /// Builds a spectrum from raw singular values.
    ///
    /// Values above `1 + UNIT_SLACK` are rejected; everything else is
    /// clamped into `[0, 1]` and sorted descending.
    pub fn from_values(r_x: usize, r_y: usize, mut values: Vec<f64>) -> Result<Self> {
        if r_x == 0 || r_y == 0 {
            return Err(Error::InvalidArgument("ranks must be positive".into()));
        }
        if values.len() != r_x.min(r_y) {
            return Err(Error::InvalidArgument(format!(
                "expected {} canonical correlations, got {}",
                r_x.min(r_y),
                values.len()
            )));
        }
        for v in &values {
            if !v.is_finite() || *v > 1.0 + UNIT_SLACK {
                return Err(Error::Numerical(format!(
                    "canonical correlation {v} outside [0, 1]"
                )));
            }
        }
        for v in values.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            r_x,
            r_y,
            k: values,
        })
    }

    /// `r = min(r_x, r_y)`.
    pub fn r(&self) -> usize {
        self.k.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }
}

fn max_sweeps(rows: usize, cols: usize) -> usize {
    10_000 + 200 * rows.max(cols)
}

/// Singular values of `mat`, descending.
pub(crate) fn singular_values(mat: &CMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = mat.shape();
    let svd = mat
        .clone()
        .try_svd_unordered(false, false, f64::EPSILON, max_sweeps(rows, cols))
        .ok_or(Error::SvdFailed { rows, cols })?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Thin SVDs of both channels.
pub fn economy_svd(pair: &DataMatrixPair) -> Result<SvdCache> {
    Ok(SvdCache {
        x: ChannelSvd::compute(pair.x())?,
        y: ChannelSvd::compute(pair.y())?,
        n: pair.n(),
        m: pair.m(),
        samples: pair.samples(),
    })
}

/// `R^{-1/2}` of a Hermitian covariance via eigendecomposition.
fn inverse_sqrt(cov: CMatrix, channel: Channel) -> Result<CMatrix> {
    let dim = cov.nrows();
    let eig = cov
        .try_symmetric_eigen(f64::EPSILON, 10_000 + 200 * dim)
        .ok_or(Error::EigenFailed { dim })?;
    let lambda_max = eig.eigenvalues.max();
    let lambda_min = eig.eigenvalues.min();
    let condition = if lambda_min > 0.0 {
        lambda_max / lambda_min
    } else {
        f64::INFINITY
    };
    if !(lambda_max > 0.0) || condition > MAX_COVARIANCE_CONDITION {
        return Err(Error::SingularCovariance { channel, condition });
    }
    let floor = lambda_max / MAX_COVARIANCE_CONDITION;
    let mut scaled = eig.eigenvectors.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let w = 1.0 / l.max(floor).sqrt();
        scaled.column_mut(j).scale_mut(w);
    }
    Ok(scaled * eig.eigenvectors.adjoint())
}

/// Canonical correlations from the sample coherence matrix
/// `R̂_xx^{-1/2} R̂_xy R̂_yy^{-1/2}`; returns all `p = min(n, m)` values.
pub fn full_canonical_correlations(pair: &DataMatrixPair) -> Result<CanonicalSpectrum> {
    let scale = Complex64::new(1.0 / pair.samples() as f64, 0.0);
    let x = pair.x();
    let y = pair.y();
    let rxx = (x * x.adjoint()) * scale;
    let ryy = (y * y.adjoint()) * scale;
    let rxy = (x * y.adjoint()) * scale;
    let wx = inverse_sqrt(rxx, Channel::X)?;
    let wy = inverse_sqrt(ryy, Channel::Y)?;
    let coherence = wx * rxy * wy;
    let k = singular_values(&coherence)?;
    CanonicalSpectrum::from_values(pair.n(), pair.m(), k)
}

/// PCA descriptions `U_x(:, 1:r_x)^H X` and `U_y(:, 1:r_y)^H Y`.
pub fn pca_reduce(
    pair: &DataMatrixPair,
    cache: &SvdCache,
    r_x: usize,
    r_y: usize,
) -> Result<DataMatrixPair> {
    let x_limit = pair.n().min(pair.samples());
    let y_limit = pair.m().min(pair.samples());
    if r_x == 0 || r_x > x_limit {
        return Err(Error::InvalidArgument(format!(
            "r_x = {r_x} outside 1..={x_limit}"
        )));
    }
    if r_y == 0 || r_y > y_limit {
        return Err(Error::InvalidArgument(format!(
            "r_y = {r_y} outside 1..={y_limit}"
        )));
    }
    let xr = cache.x.u.columns(0, r_x).adjoint() * pair.x();
    let yr = cache.y.u.columns(0, r_y).adjoint() * pair.y();
    DataMatrixPair::new(xr, yr)
}

fn block_spectrum(gram: &CMatrix, r_x: usize, r_y: usize) -> Result<CanonicalSpectrum> {
    let block = gram.view((0, 0), (r_x, r_y)).clone_owned();
    CanonicalSpectrum::from_values(r_x, r_y, singular_values(&block)?)
}

/// Canonical correlations of the rank-`(r_x, r_y)` PCA descriptions,
/// as singular values of `V_x(:, 1:r_x)^H V_y(:, 1:r_y)`.
///
/// Requires `r_x + r_y ≤ M` and `max(r_x, r_y) ≤ min(n, m)`; larger ranks
/// produce defective unit correlations.
pub fn reduced_canonical_correlations(
    cache: &SvdCache,
    r_x: usize,
    r_y: usize,
) -> Result<CanonicalSpectrum> {
    cache.check_reduced_ranks(r_x, r_y)?;
    let gram = cache.x.v.columns(0, r_x).adjoint() * cache.y.v.columns(0, r_y);
    block_spectrum(&gram, r_x, r_y)
}

/// Every spectrum with `1 ≤ r_x, r_y ≤ r_max`.
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    r_max: usize,
    samples: usize,
    entries: Vec<CanonicalSpectrum>,
}

impl SpectrumTable {
    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn get(&self, r_x: usize, r_y: usize) -> Option<&CanonicalSpectrum> {
        if r_x == 0 || r_y == 0 || r_x > self.r_max || r_y > self.r_max {
            return None;
        }
        self.entries.get((r_x - 1) * self.r_max + (r_y - 1))
    }

    /// Entries in row-major `(r_x, r_y)` order.
    pub fn iter(&self) -> impl Iterator<Item = &CanonicalSpectrum> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Precomputes every reduced spectrum up to `r_max` from one Gram product.
pub fn spectrum_table(cache: &SvdCache, r_max: usize) -> Result<SpectrumTable> {
    let bound = cache.default_r_max();
    if r_max == 0 || r_max > bound {
        return Err(Error::InvalidArgument(format!(
            "r_max = {r_max} outside 1..={bound} (min(n, m, M/2))"
        )));
    }
    let gram = cache.x.v.columns(0, r_max).adjoint() * cache.y.v.columns(0, r_max);
    let mut entries = Vec::with_capacity(r_max * r_max);
    for r_x in 1..=r_max {
        for r_y in 1..=r_max {
            entries.push(block_spectrum(&gram, r_x, r_y)?);
        }
    }
    Ok(SpectrumTable {
        r_max,
        samples: cache.samples,
        entries,
    })
}
