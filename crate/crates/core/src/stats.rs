//! χ² distribution functions for test thresholds.
//!
//! The CDF is the regularized lower incomplete gamma function `P(ν/2, x/2)`,
//! evaluated by its power series below `a + 1` and by a Lentz continued
//! fraction for the upper tail otherwise.

use crate::error::{Error, Result};

/// Largest supported degrees of freedom, `2 · 512²`.
pub const MAX_DOF: u64 = 2 * 512 * 512;

const MAX_ITER: usize = 1_000_000;
const TINY: f64 = 1e-300;

/// χ² distribution with `dof` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChiSquare {
    dof: u64,
}

impl ChiSquare {
    pub fn new(dof: u64) -> Result<Self> {
        if dof == 0 || dof > MAX_DOF {
            return Err(Error::InvalidArgument(format!(
                "χ² degrees of freedom {dof} outside 1..={MAX_DOF}"
            )));
        }
        Ok(Self { dof })
    }

    pub fn dof(&self) -> u64 {
        self.dof
    }

    fn shape(&self) -> f64 {
        self.dof as f64 / 2.0
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidArgument(format!("χ² argument {x} is negative")));
        }
        Ok(gamma_p(self.shape(), x / 2.0))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return match self.dof {
                1 => f64::INFINITY,
                2 => 0.5,
                _ => 0.0,
            };
        }
        let a = self.shape();
        ((a - 1.0) * x.ln() - x / 2.0 - a * std::f64::consts::LN_2 - ln_gamma(a)).exp()
    }

    /// Inverse CDF. Newton iteration from the Wilson–Hilferty point,
    /// bisecting whenever a step leaves the current bracket.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "quantile probability {q} outside (0, 1)"
            )));
        }
        let nu = self.dof as f64;
        let mut lo = 0.0_f64;
        let mut hi = nu.max(1.0);
        while gamma_p(self.shape(), hi / 2.0) < q {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Numerical(format!("no χ² quantile bracket for q = {q}")));
            }
        }

        let mut x = wilson_hilferty(q, nu);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..500 {
            let f = gamma_p(self.shape(), x / 2.0) - q;
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let density = self.pdf(x);
            let mut next = if density > 0.0 && density.is_finite() {
                x - f / density
            } else {
                f64::NAN
            };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

/// `P(χ²_ν ≤ x)`.
pub fn chi2_cdf(x: f64, nu: u64) -> Result<f64> {
    ChiSquare::new(nu)?.cdf(x)
}

/// Smallest `x` with `P(χ²_ν ≤ x) = q`.
pub fn chi2_quantile(q: f64, nu: u64) -> Result<f64> {
    ChiSquare::new(nu)?.quantile(q)
}

/// Kolmogorov–Smirnov distance between the empirical distribution of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(a)` for `a > 0` (Lanczos, g = 7).
pub fn ln_gamma(a: f64) -> f64 {
    if a < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let z = a - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        series_p(a, x)
    } else {
        1.0 - continued_fraction_q(a, x)
    }
}

fn log_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

fn series_p(a: f64, x: f64) -> f64 {
    let mut denom = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    (sum.ln() + log_prefactor(a, x)).exp().min(1.0)
}

fn continued_fraction_q(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (h.ln() + log_prefactor(a, x)).exp().min(1.0)
}

/// Acklam's rational approximation to the standard normal quantile.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let p_low = 0.024_25;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

fn wilson_hilferty(q: f64, nu: f64) -> f64 {
    let z = normal_quantile(q);
    let h = 2.0 / (9.0 * nu);
    let cube = 1.0 - h + z * h.sqrt();
    nu * cube * cube * cube
}
