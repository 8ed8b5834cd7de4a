//! Built-in experiment definitions.
//!
//! Mixing is redrawn per trial for `random_unitary` channels and fixed for the
//! ULA preset. Large scenarios cap the rank scan with `r_max` to stay
//! tractable; every cap is above the number of strong components.

use super::{ExperimentSpec, Sweep, SweepField, SCHEMA_VERSION};
use crate::datagen::{MixingModel, NoiseModel, ScenarioConfig};
use crate::detectors::{DetectorConfig, Method};
use crate::error::{Error, Result};

pub const PRESET_NAMES: &[&str] = &[
    "fig1",
    "fig2",
    "fig3",
    "fig5",
    "fig5-white",
    "fig6",
    "fig7",
    "fig8",
    "fig9",
    "fig10",
    "strong-interference",
];

const TRIALS: usize = 1000;
const SEED: u64 = 20_170_601;

fn detectors(r_max: Option<usize>) -> Vec<DetectorConfig> {
    Method::ALL
        .iter()
        .map(|&m| {
            let cfg = DetectorConfig::new(m);
            match r_max {
                Some(r) if m.is_max_min() => cfg.with_r_max(r),
                _ => cfg,
            }
        })
        .collect()
}

fn max_min_only(r_max: Option<usize>) -> Vec<DetectorConfig> {
    detectors(r_max)
        .into_iter()
        .filter(|c| c.method.is_max_min())
        .collect()
}

fn sigmas(correlated: (usize, f64), independent: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![correlated.1.sqrt(); correlated.0];
    for &(count, var) in independent {
        v.extend(std::iter::repeat_n(var.sqrt(), count));
    }
    v
}

fn ma3() -> NoiseModel {
    NoiseModel::SpatialMa {
        coeffs: vec![1.0 / 3f64.sqrt(); 3],
        sigma2_w: 1.0 / 3.0,
    }
}

fn ar1() -> NoiseModel {
    // unit per-component variance
    NoiseModel::SpatialAr1 {
        a: 0.65,
        sigma2_w: 1.0 - 0.65 * 0.65,
    }
}

/// `m = n = dim` with `d` correlated signals of variance `var_d` and `f` independent ones per channel.
fn symmetric(
    dim: usize,
    samples: usize,
    rho: &[f64],
    var_d: f64,
    independent: &[(usize, f64)],
    noise: NoiseModel,
) -> ScenarioConfig {
    let d = rho.len();
    let f: usize = independent.iter().map(|&(c, _)| c).sum();
    ScenarioConfig {
        n: dim,
        m: dim,
        samples,
        d,
        f_x: f,
        f_y: f,
        sigma_x: sigmas((d, var_d), independent),
        sigma_y: sigmas((d, var_d), independent),
        rho: rho.to_vec(),
        rho_spread: 0.0,
        mixing_x: MixingModel::RandomUnitary,
        mixing_y: MixingModel::RandomUnitary,
        noise,
    }
}

/// Correlated pair of variance 5 with `ρ = (0.8, 0.7)`, 3 and 4 independent signals of variance 1.5.
fn two_signal(dim: usize, samples: usize, noise: NoiseModel) -> ScenarioConfig {
    ScenarioConfig {
        n: dim,
        m: dim,
        samples,
        d: 2,
        f_x: 3,
        f_y: 4,
        sigma_x: sigmas((2, 5.0), &[(3, 1.5)]),
        sigma_y: sigmas((2, 5.0), &[(4, 1.5)]),
        rho: vec![0.8, 0.7],
        rho_spread: 0.0,
        mixing_x: MixingModel::RandomUnitary,
        mixing_y: MixingModel::RandomUnitary,
        noise,
    }
}

/// Three correlated signals (variance 1.5) under two stronger independent ones (variance 5).
pub fn weak_correlated_scenario(dim: usize, samples: usize) -> ScenarioConfig {
    symmetric(
        dim,
        samples,
        &[0.9, 0.8, 0.7],
        1.5,
        &[(2, 5.0)],
        NoiseModel::White { sigma2: 0.01 },
    )
}

fn spec(scenario: ScenarioConfig, sweep: Option<(SweepField, &[f64])>, dets: Vec<DetectorConfig>) -> ExperimentSpec {
    ExperimentSpec {
        schema: SCHEMA_VERSION,
        scenario,
        sweep: sweep.map(|(field, values)| Sweep {
            field,
            values: values.to_vec(),
        }),
        detectors: dets,
        trials: TRIALS,
        seed: SEED,
    }
}

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let samples = SweepField::Samples;
    let spec = match name {
        // sample-size sweep, no independent signals
        "fig1" => spec(
            symmetric(20, 200, &[0.9, 0.7, 0.5], 1.5, &[], NoiseModel::White { sigma2: 0.01 }),
            Some((samples, &[25.0, 40.0, 100.0, 200.0])),
            detectors(None),
        ),
        // m = n = 20, M = 30; full-dimension baselines see a singular covariance
        "fig2" => spec(weak_correlated_scenario(20, 30), None, detectors(None)),
        // m = n = 100, M = 50; also the scenario of the C(r, r, s) histograms
        "fig3" => spec(weak_correlated_scenario(100, 50), None, max_min_only(None)),
        "fig5" => spec(
            two_signal(40, 400, ma3()),
            Some((samples, &[60.0, 120.0, 240.0, 400.0])),
            detectors(None),
        ),
        "fig5-white" => spec(
            two_signal(40, 400, NoiseModel::White { sigma2: 1.0 }),
            Some((samples, &[60.0, 120.0, 240.0, 400.0])),
            detectors(None),
        ),
        "fig6" => spec(
            two_signal(40, 100, NoiseModel::White { sigma2: 1.0 }),
            Some((SweepField::Dimension, &[20.0, 40.0, 60.0, 80.0, 100.0])),
            detectors(Some(20)),
        ),
        "fig7" | "fig8" => {
            let f = if name == "fig7" { 2 } else { 4 };
            spec(
                symmetric(
                    80,
                    150,
                    &[0.92, 0.9, 0.88, 0.85, 0.83, 0.8, 0.75],
                    10.0,
                    &[(f, 1.0)],
                    ar1(),
                ),
                Some((SweepField::IndependentVariance, &[1.0, 3.0, 5.0, 8.0, 10.0, 12.0, 15.0, 20.0])),
                detectors(Some(20)),
            )
        }
        "fig9" => {
            let mut scenario = symmetric(100, 180, &[0.8; 5], 8.0, &[(2, 10.0)], ar1());
            scenario.rho_spread = 0.05;
            spec(
                scenario,
                Some((SweepField::MeanRho, &[0.5, 0.6, 0.7, 0.8, 0.9])),
                detectors(Some(20)),
            )
        }
        "fig10" => {
            let mut scenario = two_signal(40, 60, ma3());
            scenario.mixing_x = MixingModel::UlaSteering {
                angles_deg: vec![20.0; 5],
            };
            scenario.mixing_y = MixingModel::UlaSteering {
                angles_deg: vec![50.0; 6],
            };
            let deltas: Vec<f64> = (1..=10).map(f64::from).collect();
            spec(scenario, Some((SweepField::AngularSpacing, &deltas)), detectors(None))
        }
        "strong-interference" => spec(
            symmetric(80, 300, &[0.9, 0.85, 0.8, 0.75, 0.7], 8.0, &[(2, 12.0), (5, 3.0)], ar1()),
            Some((samples, &[50.0, 100.0, 150.0, 200.0, 300.0])),
            detectors(Some(20)),
        ),
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}
