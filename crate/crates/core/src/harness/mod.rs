//! Monte Carlo experiments over generated scenarios.
//!
//! Each trial is a pure function of `(spec, point, trial)`: data come from the
//! keyed streams in [`crate::datagen::StreamKey`], so reports do not depend on
//! the rayon schedule or thread count.

pub mod io;
pub mod presets;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cca::{
    economy_svd, full_canonical_correlations, reduced_canonical_correlations, spectrum_table,
    CMatrix, CanonicalSpectrum,
};
use crate::datagen::{generate_keyed, mixing_matrices, MixingModel, ScenarioConfig, StreamKey, StreamTag};
use crate::detectors::{
    bartlett_lawley, baseline_on_spectrum, ht_threshold, DetectorConfig, MaxMinDetector, Selection,
};
use crate::error::{Error, Result};
use crate::stats::{ks_distance, ChiSquare};

pub use io::{emit_csv, emit_histogram_csv, read_histogram_csv, read_report_csv, report_csv_string};

pub const SCHEMA_VERSION: u32 = 1;

/// Scenario field varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepField {
    /// Sample count `M`.
    Samples,
    /// Both channel dimensions, `n = m`.
    Dimension,
    /// Variance of every independent signal in both channels.
    IndependentVariance,
    /// Center of the correlation coefficients; all `ρ_i` are set to this value.
    MeanRho,
    /// ULA spacing `δ` in degrees; angles become `θ_1 + i δ`.
    AngularSpacing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub field: SweepField,
    pub values: Vec<f64>,
}

fn as_count(value: f64, what: &str) -> Result<usize> {
    if value.fract() != 0.0 || !(value >= 1.0) || value > 1e9 {
        return Err(Error::Config(format!("{what} sweep value {value} is not a positive integer")));
    }
    Ok(value as usize)
}

impl SweepField {
    /// Copy of `base` with this field set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            SweepField::Samples => cfg.samples = as_count(value, "samples")?,
            SweepField::Dimension => {
                let dim = as_count(value, "dimension")?;
                cfg.n = dim;
                cfg.m = dim;
            }
            SweepField::IndependentVariance => {
                if !(value > 0.0) {
                    return Err(Error::Config(format!("variance {value} must be positive")));
                }
                let sigma = value.sqrt();
                cfg.sigma_x[cfg.d..].fill(sigma);
                cfg.sigma_y[cfg.d..].fill(sigma);
            }
            SweepField::MeanRho => cfg.rho.fill(value),
            SweepField::AngularSpacing => {
                let mut any = false;
                for mixing in [&mut cfg.mixing_x, &mut cfg.mixing_y] {
                    if let MixingModel::UlaSteering { angles_deg } = mixing {
                        let first = angles_deg.first().copied().unwrap_or(0.0);
                        for (i, a) in angles_deg.iter_mut().enumerate() {
                            *a = first + i as f64 * value;
                        }
                        any = true;
                    }
                }
                if !any {
                    return Err(Error::Config(
                        "angular_spacing sweep needs a ula_steering mixing model".into(),
                    ));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A Monte Carlo experiment: scenario, optional 1-D sweep, detectors, trials and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub schema: u32,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub detectors: Vec<DetectorConfig>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("no detectors configured".into()));
        }
        for det in &self.detectors {
            det.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sweep values must be finite".into()));
            }
            if sweep.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("sweep values must be strictly increasing".into()));
            }
        }
        self.points().map(|_| ())
    }

    /// Scenario at each sweep point; a single unswept point when there is no sweep.
    pub fn points(&self) -> Result<Vec<(Option<f64>, ScenarioConfig)>> {
        match &self.sweep {
            None => {
                self.scenario.validate()?;
                Ok(vec![(None, self.scenario.clone())])
            }
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| Ok((Some(v), sweep.field.apply(&self.scenario, v)?)))
                .collect(),
        }
    }
}

/// Outcome distribution of one detector at one sweep point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorSummary {
    pub label: String,
    pub trials: usize,
    pub err_trials: usize,
    /// Trials with `d̂ = d`.
    pub correct: usize,
    pub d_hat_counts: BTreeMap<usize, usize>,
    pub rank_counts: BTreeMap<(usize, usize), usize>,
    /// Error message → count.
    pub errors: BTreeMap<String, usize>,
}

fn mode<K: Copy + Ord>(counts: impl Iterator<Item = (K, usize)>) -> Option<K> {
    // strict comparison keeps the smallest key on ties
    let mut best: Option<(K, usize)> = None;
    for (k, c) in counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

impl DetectorSummary {
    fn new(label: String) -> Self {
        Self {
            label,
            ..Self::default()
        }
    }

    fn record(&mut self, truth: usize, outcome: &std::result::Result<Selection, String>) {
        self.trials += 1;
        match outcome {
            Ok(sel) => {
                if sel.d_hat == truth {
                    self.correct += 1;
                }
                *self.d_hat_counts.entry(sel.d_hat).or_default() += 1;
                *self.rank_counts.entry((sel.r_x, sel.r_y)).or_default() += 1;
            }
            Err(msg) => {
                self.err_trials += 1;
                *self.errors.entry(msg.clone()).or_default() += 1;
            }
        }
    }

    /// Detection probability `#{d̂ = d} / trials`; failed trials count as misses.
    pub fn p_d(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.correct as f64 / self.trials as f64
    }

    /// Fraction of all trials with the given `d̂`.
    pub fn fraction(&self, d_hat: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.d_hat_counts.get(&d_hat).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn d_hat_mode(&self) -> Option<usize> {
        mode(self.d_hat_counts.iter().map(|(&k, &c)| (k, c)))
    }

    pub fn rx_mode(&self) -> Option<usize> {
        let mut by_rx = BTreeMap::new();
        for (&(rx, _), &c) in &self.rank_counts {
            *by_rx.entry(rx).or_insert(0) += c;
        }
        mode(by_rx.into_iter())
    }

    pub fn ry_mode(&self) -> Option<usize> {
        let mut by_ry = BTreeMap::new();
        for (&(_, ry), &c) in &self.rank_counts {
            *by_ry.entry(ry).or_insert(0) += c;
        }
        mode(by_ry.into_iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub sweep_value: Option<f64>,
    /// True number of correlated signals at this point.
    pub d: usize,
    pub detectors: Vec<DetectorSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub sweep_field: Option<SweepField>,
    pub trials: usize,
    pub seed: u64,
    pub points: Vec<PointReport>,
}

/// One CSV row of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub sweep_value: Option<f64>,
    pub detector: String,
    pub p_d: f64,
    pub trials: usize,
    pub err_trials: usize,
    pub d_hat_mode: Option<usize>,
    pub rx_mode: Option<usize>,
    pub ry_mode: Option<usize>,
}

impl MonteCarloReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.points
            .iter()
            .flat_map(|p| {
                p.detectors.iter().map(move |s| ReportRow {
                    sweep_value: p.sweep_value,
                    detector: s.label.clone(),
                    p_d: s.p_d(),
                    trials: s.trials,
                    err_trials: s.err_trials,
                    d_hat_mode: s.d_hat_mode(),
                    rx_mode: s.rx_mode(),
                    ry_mode: s.ry_mode(),
                })
            })
            .collect()
    }

    /// Summaries of one detector across the sweep, in sweep order.
    pub fn series(&self, label: &str) -> Vec<&DetectorSummary> {
        self.points
            .iter()
            .filter_map(|p| p.detectors.iter().find(|s| s.label == label))
            .collect()
    }
}

enum Prepared {
    MaxMin(MaxMinDetector),
    Baseline(DetectorConfig),
}

struct PreparedPoint {
    scenario: ScenarioConfig,
    fixed_mixing: Option<(CMatrix, CMatrix)>,
    detectors: Vec<Prepared>,
    table_r_max: usize,
}

type Outcome = std::result::Result<Selection, String>;

fn prepare(spec: &ExperimentSpec, index: usize, scenario: ScenarioConfig) -> Result<PreparedPoint> {
    let mut table_r_max = 0;
    let mut detectors = Vec::with_capacity(spec.detectors.len());
    for cfg in &spec.detectors {
        if cfg.method.is_max_min() {
            let r_max = cfg
                .effective_r_max(scenario.n, scenario.m, scenario.samples)
                .map_err(|e| Error::Config(format!("{} at point {index}: {e}", cfg.label())))?;
            table_r_max = table_r_max.max(r_max);
            detectors.push(Prepared::MaxMin(MaxMinDetector::new(cfg, r_max, scenario.samples)?));
        } else {
            detectors.push(Prepared::Baseline(cfg.clone()));
        }
    }
    let fixed_mixing = scenario.has_fixed_mixing().then(|| {
        let key = StreamKey::new(spec.seed, index as u64, 0);
        mixing_matrices(&scenario, &mut key.rng(StreamTag::Mixing))
    });
    Ok(PreparedPoint {
        scenario,
        fixed_mixing,
        detectors,
        table_r_max,
    })
}

fn run_trial(point: &PreparedPoint, key: StreamKey) -> Vec<Outcome> {
    let all_failed = |msg: String| vec![Err(msg); point.detectors.len()];
    let data = match generate_keyed(&point.scenario, key, point.fixed_mixing.as_ref()) {
        Ok(data) => data,
        Err(e) => return all_failed(e.to_string()),
    };
    let pair = &data.pair;
    let table = (point.table_r_max > 0)
        .then(|| economy_svd(pair).and_then(|svd| spectrum_table(&svd, point.table_r_max)));
    let mut full: Option<std::result::Result<CanonicalSpectrum, String>> = None;
    point
        .detectors
        .iter()
        .map(|det| match det {
            Prepared::MaxMin(d) => match table.as_ref().expect("table built for max-min") {
                Ok(t) => d.select(t).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            },
            Prepared::Baseline(cfg) => {
                let k = full.get_or_insert_with(|| {
                    full_canonical_correlations(pair).map_err(|e| e.to_string())
                });
                match k {
                    Ok(k) => baseline_on_spectrum(k, pair.samples(), cfg).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                }
            }
        })
        .collect()
}

/// Runs every detector on `spec.trials` fresh datasets per sweep point.
///
/// Uses the current rayon pool. Per-trial failures are counted in
/// `err_trials`; configuration problems fail the whole run.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<MonteCarloReport> {
    spec.validate()?;
    let mut points = Vec::new();
    for (index, (sweep_value, scenario)) in spec.points()?.into_iter().enumerate() {
        let prepared = prepare(spec, index, scenario)?;
        let outcomes: Vec<Vec<Outcome>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(&prepared, StreamKey::new(spec.seed, index as u64, t as u64)))
            .collect();
        let mut summaries: Vec<DetectorSummary> =
            spec.detectors.iter().map(|c| DetectorSummary::new(c.label())).collect();
        for trial in &outcomes {
            for (summary, outcome) in summaries.iter_mut().zip(trial) {
                summary.record(prepared.scenario.d, outcome);
            }
        }
        points.push(PointReport {
            sweep_value,
            d: prepared.scenario.d,
            detectors: summaries,
        });
    }
    Ok(MonteCarloReport {
        sweep_field: spec.sweep.as_ref().map(|s| s.field),
        trials: spec.trials,
        seed: spec.seed,
        points,
    })
}

/// [`run_experiment`] on a dedicated pool with `threads` workers.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<MonteCarloReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}

/// Rank pair and order at which `C(r_x, r_y, s)` is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatisticProbe {
    pub r_x: usize,
    pub r_y: usize,
    pub s: usize,
}

impl StatisticProbe {
    pub fn new(r_x: usize, r_y: usize, s: usize) -> Self {
        Self { r_x, r_y, s }
    }

    /// χ² degrees of freedom `2 (r_x - s)(r_y - s)`.
    pub fn dof(&self) -> u64 {
        2 * ((self.r_x - self.s) * (self.r_y - self.s)) as u64
    }

    fn check(&self, scenario: &ScenarioConfig) -> Result<()> {
        let ok = self.r_x >= 1
            && self.r_y >= 1
            && self.r_x <= scenario.n
            && self.r_y <= scenario.m
            && self.r_x + self.r_y <= scenario.samples
            && self.s < self.r_x.min(self.r_y);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid probe r_x = {}, r_y = {}, s = {} for n = {}, m = {}, M = {}",
                self.r_x, self.r_y, self.s, scenario.n, scenario.m, scenario.samples
            )))
        }
    }
}

/// Samples of `C(r_x, r_y, s)` with the matching χ² reference.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramReport {
    pub probe: StatisticProbe,
    /// `(trial, statistic)` for every non-degenerate trial.
    pub samples: Vec<(usize, f64)>,
    /// Trials excluded because the statistic could not be evaluated.
    pub excluded: usize,
    pub exclusion_reasons: BTreeMap<String, usize>,
    pub dof: u64,
    pub p_fa: f64,
    /// `T(r_x, r_y, s)` at `p_fa`.
    pub threshold: f64,
}

impl HistogramReport {
    pub fn statistics(&self) -> Vec<f64> {
        self.samples.iter().map(|&(_, c)| c).collect()
    }

    /// Kolmogorov-Smirnov distance to χ² with `dof` degrees of freedom.
    pub fn ks_to_chi2(&self, dof: u64) -> Result<f64> {
        let chi2 = ChiSquare::new(dof)?;
        Ok(ks_distance(&self.statistics(), |x| {
            chi2.cdf(x.max(0.0)).unwrap_or(f64::NAN)
        }))
    }

    /// Fraction of evaluated trials with `C ≥ T`.
    pub fn exceedance_rate(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let hits = self.samples.iter().filter(|&&(_, c)| c >= self.threshold).count();
        hits as f64 / self.samples.len() as f64
    }
}

/// Draws `trials` datasets and evaluates every probe on each of them.
pub fn run_statistic_histograms(
    scenario: &ScenarioConfig,
    probes: &[StatisticProbe],
    trials: usize,
    seed: u64,
    p_fa: f64,
) -> Result<Vec<HistogramReport>> {
    scenario.validate()?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    for probe in probes {
        probe.check(scenario)?;
    }
    let fixed = scenario
        .has_fixed_mixing()
        .then(|| mixing_matrices(scenario, &mut StreamKey::new(seed, 0, 0).rng(StreamTag::Mixing)));
    let per_trial: Vec<Vec<std::result::Result<f64, String>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let key = StreamKey::new(seed, 0, t as u64);
            let svd = generate_keyed(scenario, key, fixed.as_ref()).and_then(|d| economy_svd(&d.pair));
            probes
                .iter()
                .map(|p| {
                    let svd = svd.as_ref().map_err(|e| e.to_string())?;
                    reduced_canonical_correlations(svd, p.r_x, p.r_y)
                        .and_then(|k| bartlett_lawley(&k, scenario.samples, p.s))
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    probes
        .iter()
        .enumerate()
        .map(|(i, &probe)| {
            let mut report = HistogramReport {
                probe,
                samples: Vec::with_capacity(trials),
                excluded: 0,
                exclusion_reasons: BTreeMap::new(),
                dof: probe.dof(),
                p_fa,
                threshold: ht_threshold(probe.r_x, probe.r_y, probe.s, p_fa)?,
            };
            for (t, row) in per_trial.iter().enumerate() {
                match &row[i] {
                    Ok(c) => report.samples.push((t, *c)),
                    Err(msg) => {
                        report.excluded += 1;
                        *report.exclusion_reasons.entry(msg.clone()).or_default() += 1;
                    }
                }
            }
            Ok(report)
        })
        .collect()
}

/// Samples `C(r_x, r_y, s)` over `trials` fresh datasets.
pub fn run_statistic_histogram(
    scenario: &ScenarioConfig,
    r_x: usize,
    r_y: usize,
    s: usize,
    trials: usize,
    seed: u64,
    p_fa: f64,
) -> Result<HistogramReport> {
    let mut reports =
        run_statistic_histograms(scenario, &[StatisticProbe::new(r_x, r_y, s)], trials, seed, p_fa)?;
    Ok(reports.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::NoiseModel;
    use crate::detectors::Method;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            schema: 1,
            scenario: ScenarioConfig {
                n: 8,
                m: 8,
                samples: 60,
                d: 2,
                f_x: 1,
                f_y: 1,
                sigma_x: vec![2.0, 2.0, 1.0],
                sigma_y: vec![2.0, 2.0, 1.0],
                rho: vec![0.9, 0.8],
                rho_spread: 0.0,
                mixing_x: MixingModel::RandomUnitary,
                mixing_y: MixingModel::RandomUnitary,
                noise: NoiseModel::White { sigma2: 0.5 },
            },
            sweep: None,
            detectors: Method::ALL.iter().map(|&m| DetectorConfig::new(m)).collect(),
            trials: 20,
            seed: 11,
        }
    }

    #[test]
    fn single_trial_has_single_count() {
        let mut spec = small_spec();
        spec.trials = 1;
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.points.len(), 1);
        for s in &report.points[0].detectors {
            assert_eq!(s.trials, 1);
            assert_eq!(s.d_hat_counts.values().sum::<usize>() + s.err_trials, 1);
        }
    }

    #[test]
    fn counts_sum_to_trials() {
        let report = run_experiment(&small_spec()).unwrap();
        for s in &report.points[0].detectors {
            assert_eq!(s.d_hat_counts.values().sum::<usize>() + s.err_trials, s.trials);
            assert_eq!(s.rank_counts.values().sum::<usize>() + s.err_trials, s.trials);
            assert_eq!(s.errors.values().sum::<usize>(), s.err_trials);
            assert!((0.0..=1.0).contains(&s.p_d()));
        }
    }

    #[test]
    fn easy_scenario_is_detected() {
        let report = run_experiment(&small_spec()).unwrap();
        let ht = &report.points[0].detectors[0];
        assert!(ht.p_d() >= 0.8, "{ht:?}");
    }

    #[test]
    fn baselines_fail_per_trial_when_covariance_is_singular() {
        let mut spec = small_spec();
        spec.scenario.samples = 6;
        spec.detectors = vec![DetectorConfig::new(Method::FullDimMdl)];
        spec.trials = 3;
        let report = run_experiment(&spec).unwrap();
        let s = &report.points[0].detectors[0];
        assert_eq!(s.err_trials, 3);
        assert_eq!(s.p_d(), 0.0);
    }

    #[test]
    fn sweep_must_increase() {
        let mut spec = small_spec();
        spec.sweep = Some(Sweep {
            field: SweepField::Samples,
            values: vec![40.0, 40.0],
        });
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        spec.sweep = Some(Sweep {
            field: SweepField::Samples,
            values: vec![40.5],
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_fields_apply() {
        let base = small_spec().scenario;
        assert_eq!(SweepField::Dimension.apply(&base, 12.0).unwrap().m, 12);
        let v = SweepField::IndependentVariance.apply(&base, 9.0).unwrap();
        assert_eq!(v.sigma_x, vec![2.0, 2.0, 3.0]);
        assert_eq!(SweepField::MeanRho.apply(&base, 0.5).unwrap().rho, vec![0.5, 0.5]);
        assert!(SweepField::AngularSpacing.apply(&base, 2.0).is_err());

        let mut ula = base.clone();
        ula.mixing_x = MixingModel::UlaSteering {
            angles_deg: vec![10.0, 0.0, 0.0],
        };
        let swept = SweepField::AngularSpacing.apply(&ula, 2.5).unwrap();
        assert_eq!(
            swept.mixing_x,
            MixingModel::UlaSteering {
                angles_deg: vec![10.0, 12.5, 15.0]
            }
        );
    }

    #[test]
    fn empty_sweep_has_no_points() {
        let mut spec = small_spec();
        spec.sweep = Some(Sweep {
            field: SweepField::Samples,
            values: vec![],
        });
        let report = run_experiment(&spec).unwrap();
        assert!(report.points.is_empty());
        assert!(report.rows().is_empty());
    }

    #[test]
    fn json_round_trip_and_schema_check() {
        let spec = small_spec();
        let back = ExperimentSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
        let bad = spec.to_json().replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(ExperimentSpec::from_json(&bad), Err(Error::Config(_))));
        let unknown = spec.to_json().replacen('{', "{\"extra\": 0,", 1);
        assert!(ExperimentSpec::from_json(&unknown).is_err());
    }

    #[test]
    fn r_max_override_beyond_bound_is_config_error() {
        let mut spec = small_spec();
        spec.detectors = vec![DetectorConfig::new(Method::MaxMinHt).with_r_max(9)];
        assert!(matches!(run_experiment(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn modes_prefer_smallest_on_ties() {
        let mut s = DetectorSummary::new("x".into());
        s.record(1, &Ok(Selection { d_hat: 2, r_x: 3, r_y: 4 }));
        s.record(1, &Ok(Selection { d_hat: 1, r_x: 4, r_y: 3 }));
        assert_eq!(s.d_hat_mode(), Some(1));
        assert_eq!(s.rx_mode(), Some(3));
        assert_eq!(s.ry_mode(), Some(3));
        assert_eq!(s.p_d(), 0.5);
        assert_eq!(DetectorSummary::new("y".into()).d_hat_mode(), None);
    }

    #[test]
    fn histogram_shapes() {
        let spec = small_spec();
        let probes = [StatisticProbe::new(3, 3, 2), StatisticProbe::new(4, 4, 1)];
        let reports = run_statistic_histograms(&spec.scenario, &probes, 30, 5, 0.01).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].dof, 2);
        assert_eq!(reports[1].dof, 18);
        for r in &reports {
            assert_eq!(r.samples.len() + r.excluded, 30);
            assert!(r.samples.iter().all(|&(_, c)| c >= 0.0));
        }
        assert!((reports[0].threshold - 9.2103403719761836).abs() < 1e-6);
        assert!(run_statistic_histogram(&spec.scenario, 4, 4, 4, 5, 1, 0.01).is_err());
        assert!(run_statistic_histogram(&spec.scenario, 9, 4, 1, 5, 1, 0.01).is_err());
    }
}
