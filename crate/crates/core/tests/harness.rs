use ccorder::datagen::{MixingModel, NoiseModel, ScenarioConfig};
use ccorder::detectors::{DetectorConfig, Method};
use ccorder::harness::presets::preset;
use ccorder::harness::{
    emit_csv, emit_histogram_csv, read_histogram_csv, read_report_csv, report_csv_string,
    run_experiment, run_experiment_with_threads, run_statistic_histogram, ExperimentSpec, Sweep,
    SweepField,
};

fn quick_spec() -> ExperimentSpec {
    ExperimentSpec {
        schema: 1,
        scenario: ScenarioConfig {
            n: 10,
            m: 12,
            samples: 40,
            d: 2,
            f_x: 1,
            f_y: 2,
            sigma_x: vec![2.0, 2.0, 1.0],
            sigma_y: vec![2.0, 2.0, 1.0, 1.0],
            rho: vec![0.9, 0.6],
            rho_spread: 0.0,
            mixing_x: MixingModel::RandomUnitary,
            mixing_y: MixingModel::RandomUnitary,
            noise: NoiseModel::SpatialMa {
                coeffs: vec![0.6, 0.8],
                sigma2_w: 0.5,
            },
        },
        sweep: Some(Sweep {
            field: SweepField::Samples,
            values: vec![30.0, 60.0],
        }),
        detectors: Method::ALL.iter().map(|&m| DetectorConfig::new(m)).collect(),
        trials: 12,
        seed: 99,
    }
}

#[test]
fn csv_round_trip_reproduces_rows() {
    let report = run_experiment(&quick_spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    emit_csv(&report, &path).unwrap();
    assert_eq!(read_report_csv(&path).unwrap(), report.rows());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "sweep_value,detector,p_d,trials,err_trials,d_hat_mode,rx_mode,ry_mode\n"
    ));
}

#[test]
fn empty_sweep_writes_header_only() {
    let mut spec = quick_spec();
    spec.sweep.as_mut().unwrap().values.clear();
    let report = run_experiment(&spec).unwrap();
    assert_eq!(
        report_csv_string(&report),
        "sweep_value,detector,p_d,trials,err_trials,d_hat_mode,rx_mode,ry_mode\n"
    );
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let spec = quick_spec();
    let one = run_experiment_with_threads(&spec, 1).unwrap();
    let four = run_experiment_with_threads(&spec, 4).unwrap();
    assert_eq!(one, four);
    assert_eq!(report_csv_string(&one), report_csv_string(&four));
}

#[test]
fn trials_are_prefix_stable() {
    // trial t draws from its own stream, so extending a run keeps earlier datasets
    let spec = quick_spec();
    let hist_one = run_statistic_histogram(&spec.scenario, 3, 3, 1, 3, 4, 0.01).unwrap();
    let hist_many = run_statistic_histogram(&spec.scenario, 3, 3, 1, 9, 4, 0.01).unwrap();
    assert_eq!(hist_one.samples[..], hist_many.samples[..3]);
}

#[test]
fn different_seeds_give_different_data() {
    let mut spec = quick_spec();
    let a = run_statistic_histogram(&spec.scenario, 3, 3, 1, 5, 1, 0.01).unwrap();
    spec.seed = 2;
    let b = run_statistic_histogram(&spec.scenario, 3, 3, 1, 5, 2, 0.01).unwrap();
    assert_ne!(a.samples, b.samples);
}

#[test]
fn histogram_csv_round_trip() {
    let spec = quick_spec();
    let report = run_statistic_histogram(&spec.scenario, 4, 4, 2, 20, 3, 0.01).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    emit_histogram_csv(&report, &path).unwrap();
    assert_eq!(read_histogram_csv(&path).unwrap(), report.samples);
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("trial,statistic\n"));
}

#[test]
fn fig5_emits_one_row_per_sample_size_and_detector() {
    let mut spec = preset("fig5").unwrap();
    spec.trials = 1;
    let report = run_experiment(&spec).unwrap();
    let rows = report.rows();
    assert_eq!(rows.len(), 4 * spec.detectors.len());
    for (i, m) in [60.0, 120.0, 240.0, 400.0].iter().enumerate() {
        for (j, det) in spec.detectors.iter().enumerate() {
            let row = &rows[i * spec.detectors.len() + j];
            assert_eq!(row.sweep_value, Some(*m));
            assert_eq!(row.detector, det.label());
        }
    }
}

#[test]
fn unwritable_path_is_reported() {
    let report = run_experiment(&{
        let mut s = quick_spec();
        s.trials = 1;
        s
    })
    .unwrap();
    let err = emit_csv(&report, std::path::Path::new("/nonexistent/dir/out.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
}

#[test]
fn spec_file_round_trip() {
    let spec = quick_spec();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, spec.to_json()).unwrap();
    assert_eq!(ExperimentSpec::load(&path).unwrap(), spec);
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(ExperimentSpec::load(&path).unwrap_err().exit_code(), 2);
}
