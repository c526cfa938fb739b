use arnav::metrics::ExperimentKind;
use arnav::pipeline::{assess_trial, AssessOptions};
use arnav::synth::{generate_session, SceneConfig, UserErrorModel};

fn files(dir: &std::path::Path) -> Vec<Vec<u8>> {
    ["frames.csv", "annotations.json", "ledger.json"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn written_sessions_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = SceneConfig::synthetic_default();
    cfg.seed = 2024;
    for kind in ExperimentKind::ALL {
        generate_session(&cfg, kind, &UserErrorModel::default()).write_to(a.path()).unwrap();
        generate_session(&cfg, kind, &UserErrorModel::default()).write_to(b.path()).unwrap();
        assert_eq!(files(a.path()), files(b.path()), "{kind}");
    }
    cfg.seed = 2025;
    generate_session(&cfg, ExperimentKind::PhysicalFeedback, &UserErrorModel::default()).write_to(b.path()).unwrap();
    assert_ne!(files(a.path())[0], files(b.path())[0]);
}

#[test]
fn noiseless_assessment_reproduces_ledger() {
    let mut cfg = SceneConfig::synthetic_default();
    cfg.marker_noise_sd = 0.0;
    cfg.hand_tremor_sd = 0.0;
    for seed in 0..5 {
        cfg.seed = seed;
        for kind in ExperimentKind::ALL {
            let s = generate_session(&cfg, kind, &UserErrorModel { bias: 2.0, sd: 3.0 });
            let a = assess_trial(&cfg.probe, &cfg.phantom, &s.frames, &s.annotations, &AssessOptions::default()).unwrap();
            for (m, f) in a.measurements.iter().zip(&s.ledger.fiducials) {
                assert_eq!(m.fiducial, f.label);
                assert!((m.target_error - f.true_error).abs() < 1e-9);
            }
            assert!((a.result.error_mean - s.ledger.true_error_mean).abs() < 1e-9);
            assert!((a.result.error_sd - s.ledger.true_error_sd).abs() < 1e-9);
            assert!(a.result.tip_error < 1e-9 && a.result.gt_error < 1e-9);
        }
    }
}

#[test]
fn noisy_assessment_stays_close_to_ledger() {
    let mut cfg = SceneConfig::synthetic_default();
    for seed in 0..5 {
        cfg.seed = seed;
        for kind in ExperimentKind::ALL {
            let s = generate_session(&cfg, kind, &UserErrorModel::default());
            let a = assess_trial(&cfg.probe, &cfg.phantom, &s.frames, &s.annotations, &AssessOptions::default()).unwrap();
            assert!((a.result.error_mean - s.ledger.true_error_mean).abs() < 0.5, "{kind} seed {seed}");
        }
    }
}

#[test]
fn contact_pulls_tips_toward_truth() {
    let mut cfg = SceneConfig::synthetic_default();
    let (mut phys, mut holo) = (0.0, 0.0);
    for seed in 0..20 {
        cfg.seed = seed;
        phys += generate_session(&cfg, ExperimentKind::PhysicalFeedback, &UserErrorModel::default()).ledger.true_error_mean;
        holo += generate_session(&cfg, ExperimentKind::HolographicFeedback, &UserErrorModel::default()).ledger.true_error_mean;
    }
    assert!(phys < holo);
}
