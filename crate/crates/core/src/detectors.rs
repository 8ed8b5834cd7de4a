//! Test statistics, thresholds and the joint `(r_x, r_y, d)` detectors.
//!
//! All three max-min detectors share the same outer scan: every rank pair
//! `1 ≤ r_x, r_y ≤ r_max` runs a per-pair order estimate (the "min step"), and
//! the largest estimate wins. They differ only in the min step:
//!
//! * [`Method::MaxMinHt`]: sequential Bartlett-Lawley tests against χ² thresholds.
//! * [`Method::MaxMinMdlThreshold`]: sequential GLRT tests against the MDL-derived threshold.
//! * [`Method::MaxMinMdlIc`]: direct minimization of the reduced-rank MDL criterion.
//!
//! The full-dimension baselines (series test, MDL, AIC) skip PCA entirely.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cca::{
    economy_svd, full_canonical_correlations, spectrum_table, CanonicalSpectrum, DataMatrixPair,
    SpectrumTable,
};
use crate::error::{Error, Result};
use crate::stats::chi2_quantile;

/// Substitute for `1 - k²` inside logarithms once it reaches zero.
pub const LOG_FLOOR: f64 = 1e-15;

fn ln_one_minus_sq(k: f64) -> f64 {
    (1.0 - k * k).max(LOG_FLOOR).ln()
}

fn check_order(k: &CanonicalSpectrum, s: usize, allow_full: bool) -> Result<()> {
    let limit = if allow_full { k.r() } else { k.r() - 1 };
    if s > limit {
        return Err(Error::InvalidArgument(format!(
            "model order s = {s} exceeds {limit} for r = {}",
            k.r()
        )));
    }
    Ok(())
}

/// GLRT statistic `Λ(r_x, r_y, s) = M ln ∏_{i>s} (1 - k̂_i²)`; always `≤ 0`.
///
/// Defined for `0 ≤ s ≤ r`, with `Λ(r) = 0`.
pub fn glrt_lambda(k: &CanonicalSpectrum, samples: usize, s: usize) -> Result<f64> {
    check_order(k, s, true)?;
    let sum: f64 = k.values()[s..].iter().map(|&v| ln_one_minus_sq(v)).sum();
    Ok(samples as f64 * sum + 0.0)
}

/// Bartlett-Lawley statistic
/// `C = -2 (M - s - (r_x + r_y + 1)/2 + Σ_{i≤s} k̂_i⁻²) ln ∏_{i>s} (1 - k̂_i²)`.
pub fn bartlett_lawley(k: &CanonicalSpectrum, samples: usize, s: usize) -> Result<f64> {
    check_order(k, s, false)?;
    let mut factor = samples as f64 - s as f64 - (k.r_x + k.r_y + 1) as f64 / 2.0;
    for (i, &v) in k.values()[..s].iter().enumerate() {
        if v == 0.0 {
            return Err(Error::DegenerateStatistic { index: i + 1, s });
        }
        factor += 1.0 / (v * v);
    }
    if !(factor > 0.0) {
        return Err(Error::SampleSize {
            factor,
            samples,
            s,
        });
    }
    let log_prod: f64 = k.values()[s..].iter().map(|&v| ln_one_minus_sq(v)).sum();
    Ok(-2.0 * factor * log_prod + 0.0)
}

fn ht_dof(r_x: usize, r_y: usize, s: usize) -> Result<u64> {
    if s >= r_x.min(r_y) {
        return Err(Error::InvalidArgument(format!(
            "s = {s} must be below min(r_x, r_y) = {}",
            r_x.min(r_y)
        )));
    }
    Ok(2 * ((r_x - s) * (r_y - s)) as u64)
}

/// χ² threshold `T(r_x, r_y, s)` at false-alarm probability `p_fa`,
/// with `2 (r_x - s)(r_y - s)` degrees of freedom.
pub fn ht_threshold(r_x: usize, r_y: usize, s: usize, p_fa: f64) -> Result<f64> {
    check_p_fa(p_fa)?;
    chi2_quantile(1.0 - p_fa, ht_dof(r_x, r_y, s)?)
}

fn check_p_fa(p_fa: f64) -> Result<()> {
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "false-alarm probability {p_fa} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Reduced-rank MDL criterion
/// `I(r_x, r_y, s) = M ln ∏_{i≤s} (1 - k̂_i²) + ln(M) s (r_x + r_y - s)`.
pub fn mdl_ic(k: &CanonicalSpectrum, samples: usize, s: usize) -> Result<f64> {
    check_order(k, s, true)?;
    let fit: f64 = k.values()[..s].iter().map(|&v| ln_one_minus_sq(v)).sum();
    let penalty = (samples as f64).ln() * (s * (k.r_x + k.r_y - s)) as f64;
    Ok(samples as f64 * fit + penalty)
}

/// GLRT threshold implied by MDL: `-ln(M) (r_x - s)(r_y - s)`.
pub fn mdl_threshold(r_x: usize, r_y: usize, s: usize, samples: usize) -> Result<f64> {
    if s >= r_x.min(r_y) {
        return Err(Error::InvalidArgument(format!(
            "s = {s} must be below min(r_x, r_y) = {}",
            r_x.min(r_y)
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("MDL threshold needs M ≥ 2".into()));
    }
    Ok(-(samples as f64).ln() * ((r_x - s) * (r_y - s)) as f64)
}

/// Result of one min step, with the statistics it looked at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinStep {
    pub s: usize,
    /// `C`, `Λ` or `I_MDL` for each examined order, starting at `s = 0`.
    pub statistics: Vec<f64>,
    /// Thresholds matching `statistics`; empty for the MDL-IC step.
    pub thresholds: Vec<f64>,
}

fn ht_step(
    k: &CanonicalSpectrum,
    samples: usize,
    threshold: &mut dyn FnMut(usize, usize, usize) -> Result<f64>,
) -> Result<MinStep> {
    let mut step = MinStep {
        s: k.r(),
        statistics: Vec::new(),
        thresholds: Vec::new(),
    };
    for s in 0..k.r() {
        let c = bartlett_lawley(k, samples, s)?;
        let t = threshold(k.r_x, k.r_y, s)?;
        step.statistics.push(c);
        step.thresholds.push(t);
        if c < t {
            step.s = s;
            break;
        }
    }
    Ok(step)
}

fn mdl_threshold_step(k: &CanonicalSpectrum, samples: usize) -> Result<MinStep> {
    let mut step = MinStep {
        s: k.r(),
        statistics: Vec::new(),
        thresholds: Vec::new(),
    };
    for s in 0..k.r() {
        let lambda = glrt_lambda(k, samples, s)?;
        let t = mdl_threshold(k.r_x, k.r_y, s, samples)?;
        step.statistics.push(lambda);
        step.thresholds.push(t);
        if lambda > t {
            step.s = s;
            break;
        }
    }
    Ok(step)
}

fn mdl_ic_step(k: &CanonicalSpectrum, samples: usize) -> Result<MinStep> {
    let mut statistics = Vec::with_capacity(k.r() + 1);
    let mut best = 0;
    for s in 0..=k.r() {
        let ic = mdl_ic(k, samples, s)?;
        if ic < statistics.get(best).copied().unwrap_or(f64::INFINITY) {
            best = s;
        }
        statistics.push(ic);
    }
    Ok(MinStep {
        s: best,
        statistics,
        thresholds: Vec::new(),
    })
}

/// Smallest `s` with `C(r_x, r_y, s) < T(r_x, r_y, s)`, or `r` if none.
pub fn min_step_ht(k: &CanonicalSpectrum, samples: usize, p_fa: f64) -> Result<usize> {
    check_p_fa(p_fa)?;
    Ok(ht_step(k, samples, &mut |rx, ry, s| ht_threshold(rx, ry, s, p_fa))?.s)
}

/// Smallest `s` with `Λ(r_x, r_y, s) > T_MDL(r_x, r_y, s)`, or `r` if none.
pub fn min_step_mdl_threshold(k: &CanonicalSpectrum, samples: usize) -> Result<usize> {
    Ok(mdl_threshold_step(k, samples)?.s)
}

/// Minimizer of `I_MDL(r_x, r_y, s)` over `s = 0, …, r`; ties go to the smaller `s`.
///
/// `s = r` (the saturated model, `I_MDL(r) - I_MDL(s) = Λ(s) - T_MDL(s)`)
/// is part of the search, which keeps this step never below
/// [`min_step_mdl_threshold`] on the same spectrum.
pub fn min_step_mdl_ic(k: &CanonicalSpectrum, samples: usize) -> Result<usize> {
    Ok(mdl_ic_step(k, samples)?.s)
}

/// Detection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Detector 1: max-min Bartlett-Lawley hypothesis test.
    MaxMinHt,
    /// Detector 2: max-min GLRT with MDL-derived threshold.
    MaxMinMdlThreshold,
    /// Detector 3: max-min MDL information criterion.
    MaxMinMdlIc,
    /// Full-dimension Bartlett-Lawley series test.
    TraditionalHt,
    /// Full-dimension MDL criterion.
    FullDimMdl,
    /// Full-dimension AIC; a conventional `2·s(m+n-s)` penalty.
    FullDimAic,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::MaxMinHt,
        Method::MaxMinMdlThreshold,
        Method::MaxMinMdlIc,
        Method::TraditionalHt,
        Method::FullDimMdl,
        Method::FullDimAic,
    ];

    pub fn is_max_min(self) -> bool {
        matches!(
            self,
            Method::MaxMinHt | Method::MaxMinMdlThreshold | Method::MaxMinMdlIc
        )
    }

    pub fn uses_p_fa(self) -> bool {
        matches!(self, Method::MaxMinHt | Method::TraditionalHt)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::MaxMinHt => "maxmin-ht",
            Method::MaxMinMdlThreshold => "maxmin-mdl-threshold",
            Method::MaxMinMdlIc => "maxmin-mdl-ic",
            Method::TraditionalHt => "traditional-ht",
            Method::FullDimMdl => "full-mdl",
            Method::FullDimAic => "full-aic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let method = match norm.as_str() {
            "maxmin-ht" | "max-min-ht" | "d1" => Method::MaxMinHt,
            "maxmin-mdl-threshold" | "max-min-mdl-threshold" | "d2" => Method::MaxMinMdlThreshold,
            "maxmin-mdl-ic" | "max-min-mdl-ic" | "d3" => Method::MaxMinMdlIc,
            "traditional-ht" | "cct" => Method::TraditionalHt,
            "full-mdl" | "full-dim-mdl" => Method::FullDimMdl,
            "full-aic" | "full-dim-aic" => Method::FullDimAic,
            m if m == "sev" || m.starts_with("sev-") || m.starts_with("sev+") => {
                return Err(Error::InvalidArgument(
                    "SEV rank selection is not implemented; only full-dimension baselines \
                     (traditional-ht, full-mdl, full-aic) are available"
                        .into(),
                ))
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown method `{s}`; expected one of {}",
                    Method::ALL.map(Method::name).join(", ")
                )))
            }
        };
        Ok(method)
    }
}

fn default_p_fa() -> f64 {
    0.005
}

/// Detector settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: Method,
    /// False-alarm probability; used by the hypothesis-test methods only.
    #[serde(default = "default_p_fa")]
    pub p_fa: f64,
    /// Largest PCA rank scanned; `None` means `min(n, m, ⌊M/2⌋)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<usize>,
}

impl DetectorConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            p_fa: default_p_fa(),
            r_max: None,
        }
    }

    pub fn with_p_fa(mut self, p_fa: f64) -> Self {
        self.p_fa = p_fa;
        self
    }

    pub fn with_r_max(mut self, r_max: usize) -> Self {
        self.r_max = Some(r_max);
        self
    }

    /// Short identifier, e.g. `maxmin-ht@0.005` or `maxmin-mdl-ic`.
    pub fn label(&self) -> String {
        let mut label = self.method.name().to_string();
        if self.method.uses_p_fa() {
            label.push_str(&format!("@{}", self.p_fa));
        }
        if let Some(r) = self.r_max {
            label.push_str(&format!("/rmax{r}"));
        }
        label
    }

    pub fn validate(&self) -> Result<()> {
        if self.method.uses_p_fa() {
            check_p_fa(self.p_fa)?;
        }
        if self.r_max == Some(0) {
            return Err(Error::InvalidArgument("r_max must be positive".into()));
        }
        Ok(())
    }

    /// Effective rank bound for data of the given shape.
    pub fn effective_r_max(&self, n: usize, m: usize, samples: usize) -> Result<usize> {
        let bound = n.min(m).min(samples / 2);
        if bound == 0 {
            return Err(Error::InvalidArgument(format!(
                "no admissible PCA rank for n = {n}, m = {m}, M = {samples}"
            )));
        }
        match self.r_max {
            None => Ok(bound),
            Some(r) if r >= 1 && r <= bound => Ok(r),
            Some(r) => Err(Error::InvalidArgument(format!(
                "r_max = {r} outside 1..={bound} (min(n, m, M/2))"
            ))),
        }
    }
}

/// Min-step record for one rank pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairDiagnostic {
    pub r_x: usize,
    pub r_y: usize,
    /// `None` when the pair was excluded.
    pub step: Option<MinStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

/// Selected model order and PCA ranks.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorDecision {
    pub method: Method,
    pub d_hat: usize,
    pub r_x_star: usize,
    pub r_y_star: usize,
    pub diagnostics: Vec<PairDiagnostic>,
}

/// Decision without diagnostics, as used by the Monte Carlo engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub d_hat: usize,
    pub r_x: usize,
    pub r_y: usize,
}

/// A max-min detector bound to one rank bound, with its χ² thresholds precomputed.
#[derive(Debug, Clone)]
pub struct MaxMinDetector {
    method: Method,
    samples: usize,
    r_max: usize,
    p_fa: f64,
    // threshold by (r_x - s)(r_y - s); NaN where unused
    thresholds: Vec<f64>,
}

impl MaxMinDetector {
    pub fn new(cfg: &DetectorConfig, r_max: usize, samples: usize) -> Result<Self> {
        cfg.validate()?;
        if !cfg.method.is_max_min() {
            return Err(Error::InvalidArgument(format!(
                "{} is not a max-min detector",
                cfg.method
            )));
        }
        if r_max == 0 || 2 * r_max > samples {
            return Err(Error::InvalidArgument(format!(
                "r_max = {r_max} incompatible with M = {samples}"
            )));
        }
        let mut thresholds = Vec::new();
        if cfg.method == Method::MaxMinHt {
            thresholds = vec![f64::NAN; r_max * r_max + 1];
            for a in 1..=r_max {
                for b in a..=r_max {
                    let product = a * b;
                    if thresholds[product].is_nan() {
                        thresholds[product] = chi2_quantile(1.0 - cfg.p_fa, 2 * product as u64)?;
                    }
                }
            }
        }
        Ok(Self {
            method: cfg.method,
            samples,
            r_max,
            p_fa: cfg.p_fa,
            thresholds,
        })
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn method(&self) -> Method {
        self.method
    }

    fn min_step(&self, k: &CanonicalSpectrum) -> Result<MinStep> {
        match self.method {
            Method::MaxMinHt => ht_step(k, self.samples, &mut |rx, ry, s| {
                let product = (rx - s) * (ry - s);
                match self.thresholds.get(product) {
                    Some(t) if !t.is_nan() => Ok(*t),
                    _ => ht_threshold(rx, ry, s, self.p_fa),
                }
            }),
            Method::MaxMinMdlThreshold => mdl_threshold_step(k, self.samples),
            Method::MaxMinMdlIc => mdl_ic_step(k, self.samples),
            _ => unreachable!("constructor only admits max-min methods"),
        }
    }

    fn check_table(&self, table: &SpectrumTable) -> Result<()> {
        if table.r_max() < self.r_max || table.samples() != self.samples {
            return Err(Error::InvalidArgument(format!(
                "spectrum table (r_max {}, M {}) does not cover detector (r_max {}, M {})",
                table.r_max(),
                table.samples(),
                self.r_max,
                self.samples
            )));
        }
        Ok(())
    }

    fn scan(
        &self,
        table: &SpectrumTable,
        mut record: impl FnMut(usize, usize, Result<&MinStep>),
    ) -> Result<Selection> {
        self.check_table(table)?;
        let mut best: Option<Selection> = None;
        for r_x in 1..=self.r_max {
            for r_y in 1..=self.r_max {
                let k = table.get(r_x, r_y).expect("table covers r_max");
                let step = match self.min_step(k) {
                    Ok(step) => step,
                    Err(e) if e.is_degenerate_statistic() => {
                        record(r_x, r_y, Err(e));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let candidate = Selection {
                    d_hat: step.s,
                    r_x,
                    r_y,
                };
                record(r_x, r_y, Ok(&step));
                let better = match best {
                    None => true,
                    Some(b) => {
                        candidate.d_hat > b.d_hat
                            || (candidate.d_hat == b.d_hat
                                && (r_x + r_y, r_x) < (b.r_x + b.r_y, b.r_x))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        best.ok_or_else(|| Error::Numerical("every rank pair was degenerate".into()))
    }

    /// Outer maximization without diagnostics.
    pub fn select(&self, table: &SpectrumTable) -> Result<Selection> {
        self.scan(table, |_, _, _| {})
    }

    /// Outer maximization with per-pair diagnostics.
    pub fn decide(&self, table: &SpectrumTable) -> Result<DetectorDecision> {
        let mut diagnostics = Vec::with_capacity(self.r_max * self.r_max);
        let sel = self.scan(table, |r_x, r_y, step| {
            diagnostics.push(match step {
                Ok(step) => PairDiagnostic {
                    r_x,
                    r_y,
                    step: Some(step.clone()),
                    excluded: None,
                },
                Err(e) => PairDiagnostic {
                    r_x,
                    r_y,
                    step: None,
                    excluded: Some(e.to_string()),
                },
            })
        })?;
        Ok(DetectorDecision {
            method: self.method,
            d_hat: sel.d_hat,
            r_x_star: sel.r_x,
            r_y_star: sel.r_y,
            diagnostics,
        })
    }
}

/// Runs one of the three max-min detectors on a data pair.
pub fn detect(pair: &DataMatrixPair, cfg: &DetectorConfig) -> Result<DetectorDecision> {
    let r_max = cfg.effective_r_max(pair.n(), pair.m(), pair.samples())?;
    let detector = MaxMinDetector::new(cfg, r_max, pair.samples())?;
    let cache = economy_svd(pair)?;
    let table = spectrum_table(&cache, r_max)?;
    detector.decide(&table)
}

/// Classical series of Bartlett-Lawley tests on the full-dimension spectrum.
///
/// Unreliable for `M ≤ m + n`, where defective unit correlations dominate.
pub fn traditional_series_test(pair: &DataMatrixPair, p_fa: f64) -> Result<usize> {
    check_p_fa(p_fa)?;
    series_test_on_spectrum(&full_canonical_correlations(pair)?, pair.samples(), p_fa)
}

/// Smallest `s` with `C(n, m, s) < T(n, m, s)` on a precomputed full spectrum, else `p`.
pub fn series_test_on_spectrum(k: &CanonicalSpectrum, samples: usize, p_fa: f64) -> Result<usize> {
    check_p_fa(p_fa)?;
    for s in 0..k.r() {
        let c = bartlett_lawley(k, samples, s)?;
        if c < ht_threshold(k.r_x, k.r_y, s, p_fa)? {
            return Ok(s);
        }
    }
    Ok(k.r())
}

/// Penalty used by [`full_dim_ic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    /// `ln(M) · s(m + n - s)`.
    Mdl,
    /// `2 · s(m + n - s)`.
    Aic,
}

/// Full-dimension criterion `M ln ∏_{i≤s}(1 - k̂_i²) + penalty(s)`.
pub fn full_dim_criterion(
    k: &CanonicalSpectrum,
    samples: usize,
    s: usize,
    penalty: Penalty,
) -> Result<f64> {
    check_order(k, s, true)?;
    let fit: f64 = k.values()[..s].iter().map(|&v| ln_one_minus_sq(v)).sum();
    let free = (s * (k.r_x + k.r_y - s)) as f64;
    let weight = match penalty {
        Penalty::Mdl => (samples as f64).ln(),
        Penalty::Aic => 2.0,
    };
    Ok(samples as f64 * fit + weight * free)
}

/// Order minimizing the full-dimension MDL or AIC criterion over `s = 0, …, p - 1`.
pub fn full_dim_ic(pair: &DataMatrixPair, penalty: Penalty) -> Result<usize> {
    ic_on_spectrum(&full_canonical_correlations(pair)?, pair.samples(), penalty)
}

pub fn ic_on_spectrum(k: &CanonicalSpectrum, samples: usize, penalty: Penalty) -> Result<usize> {
    let mut best = (0, f64::INFINITY);
    for s in 0..k.r() {
        let ic = full_dim_criterion(k, samples, s, penalty)?;
        if ic < best.1 {
            best = (s, ic);
        }
    }
    Ok(best.0)
}

/// Runs a full-dimension baseline on a precomputed full spectrum; ranks are reported as `(n, m)`.
pub fn baseline_on_spectrum(
    k: &CanonicalSpectrum,
    samples: usize,
    cfg: &DetectorConfig,
) -> Result<Selection> {
    cfg.validate()?;
    let d_hat = match cfg.method {
        Method::TraditionalHt => series_test_on_spectrum(k, samples, cfg.p_fa)?,
        Method::FullDimMdl => ic_on_spectrum(k, samples, Penalty::Mdl)?,
        Method::FullDimAic => ic_on_spectrum(k, samples, Penalty::Aic)?,
        m => {
            return Err(Error::InvalidArgument(format!(
                "{m} is not a full-dimension baseline"
            )))
        }
    };
    Ok(Selection {
        d_hat,
        r_x: k.r_x,
        r_y: k.r_y,
    })
}

/// Runs a full-dimension baseline on a data pair.
pub fn baseline(pair: &DataMatrixPair, cfg: &DetectorConfig) -> Result<Selection> {
    cfg.validate()?;
    if cfg.method.is_max_min() {
        return Err(Error::InvalidArgument(format!(
            "{} is not a full-dimension baseline",
            cfg.method
        )));
    }
    baseline_on_spectrum(&full_canonical_correlations(pair)?, pair.samples(), cfg)
}
