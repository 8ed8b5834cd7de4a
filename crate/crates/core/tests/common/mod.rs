#![allow(dead_code)]

use ccorder::cca::{CMatrix, CanonicalSpectrum, Complex64, DataMatrixPair};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Random pair with a few shared components, so spectra are not all null.
pub fn random_pair<R: Rng>(n: usize, m: usize, samples: usize, shared: usize, rng: &mut R) -> DataMatrixPair {
    let s = gaussian(shared, samples, rng);
    let mut x = gaussian(n, samples, rng);
    let mut y = gaussian(m, samples, rng);
    if shared > 0 {
        x += gaussian(n, shared, rng) * &s * Complex64::new(2.0, 0.0);
        y += gaussian(m, shared, rng) * &s * Complex64::new(2.0, 0.0);
    }
    DataMatrixPair::new(x, y).unwrap()
}

/// Canonical correlations from orthonormal row-space bases: `σ(Q_a^H Q_b)`.
///
/// Independent of the covariance-whitening and right-singular-vector paths.
pub fn qr_canonical_correlations(a: &CMatrix, b: &CMatrix) -> Vec<f64> {
    let qa = a.adjoint().qr().q();
    let qb = b.adjoint().qr().q();
    let mut k: Vec<f64> = (qa.adjoint() * qb).singular_values().iter().copied().collect();
    k.sort_by(|p, q| q.total_cmp(p));
    k
}

pub fn random_spectrum<R: Rng>(rng: &mut R) -> (CanonicalSpectrum, usize) {
    let r_x = rng.random_range(1..=20);
    let r_y = rng.random_range(1..=20);
    let r = r_x.min(r_y);
    let samples = rng.random_range((r_x + r_y).max(2)..=600);
    let strong = rng.random_range(0..=r);
    let mut k: Vec<f64> = (0..r)
        .map(|i| {
            if i < strong {
                1.0 - rng.random::<f64>().powi(3) * 0.3
            } else {
                rng.random::<f64>() * 0.5
            }
        })
        .collect();
    if rng.random_bool(0.1) {
        k[0] = 1.0;
    }
    if rng.random_bool(0.1) {
        *k.last_mut().unwrap() = 0.0;
    }
    (CanonicalSpectrum::from_values(r_x, r_y, k).unwrap(), samples)
}
