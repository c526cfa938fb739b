use arnav::geometry::{LabeledPoint, RigidTransform};
use arnav::io::frames::{MarkerFrame, MarkerFrameStream};
use arnav::probe::{ground_truth_fiducials, locate_tip, GroundTruthOptions};
use arnav::synth::{default_phantom, default_probe, SceneConfig};
use arnav::{LabeledPointSet, Point3, Vec3};
use arnav_oracles::{horn, predicted_tre_rms};
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn noisy_frame(id: i64, set: &LabeledPointSet, noise: &Normal<f64>, rng: &mut StdRng) -> MarkerFrame {
    MarkerFrame {
        frame_id: id,
        time: id as f64 * 0.01,
        observations: set
            .iter()
            .map(|(l, p)| LabeledPoint {
                label: l.to_string(),
                position: p + Vec3::new(noise.sample(rng), noise.sample(rng), noise.sample(rng)),
            })
            .collect(),
    }
}

fn pose() -> RigidTransform {
    RigidTransform::from_axis_angle(&Vec3::new(0.3, -0.2, 1.0), 0.8, Vec3::new(420.0, 150.0, 950.0))
}

#[test]
fn tip_jitter_matches_horn_and_first_order_prediction() {
    let probe = default_probe();
    let t = pose();
    let lab = probe.markers_ct().transformed(&t);
    let noise = Normal::new(0.0, 0.25).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let src: Vec<Vector3<f64>> = probe.markers_ct().points().map(|p| p.coords).collect();

    let mut tips = Vec::with_capacity(10_000);
    for i in 0..10_000 {
        let frame = noisy_frame(i, &lab, &noise, &mut rng);
        let obs = locate_tip(&frame, &probe).unwrap();
        let dst: Vec<Vector3<f64>> = probe.markers_ct().labels().map(|l| frame.get(l).unwrap().coords).collect();
        let (r, tt) = horn(&src, &dst);
        assert!((r * probe.tip_ct().coords + tt - obs.tip_lab.coords).norm() < 1e-9);
        tips.push(obs.tip_lab.coords);
    }
    let mean = tips.iter().sum::<Vector3<f64>>() / tips.len() as f64;
    let sd3 = (tips.iter().map(|p| (p - mean).norm_squared()).sum::<f64>() / (tips.len() - 1) as f64).sqrt();
    let predicted = predicted_tre_rms(&src, &probe.tip_ct().coords, 0.25);
    assert!((sd3 / predicted - 1.0).abs() < 0.05, "sd {sd3}, predicted {predicted}");
    assert!(sd3 <= 1.09, "3D tip SD {sd3}");
    assert!((mean - t.apply(probe.tip_ct()).coords).norm() < 0.05);
}

#[test]
fn ground_truth_uncertainty_scale() {
    let phantom = default_phantom();
    let t = pose();
    let lab = phantom.markers_ct().transformed(&t);
    let noise = Normal::new(0.0, 0.25).unwrap();
    let mut rng = StdRng::seed_from_u64(4);
    let stream = MarkerFrameStream::new((0..1000).map(|i| noisy_frame(i, &lab, &noise, &mut rng)).collect()).unwrap();
    let gt = ground_truth_fiducials(&stream, &phantom, &GroundTruthOptions::default()).unwrap();

    let markers: Vec<Vector3<f64>> = phantom.markers_ct().points().map(|p| p.coords).collect();
    for u in &gt.uncertainty {
        let f = phantom.fiducials_ct().get(&u.label).unwrap().coords;
        let predicted = predicted_tre_rms(&markers, &f, 0.25);
        assert!((u.sd / predicted - 1.0).abs() < 0.1, "{}: {} vs {predicted}", u.label, u.sd);
    }
    let ratio = gt.max_uncertainty() / 1.51;
    assert!((0.1..=10.0).contains(&ratio), "max uncertainty {}", gt.max_uncertainty());
    for (label, p) in gt.fiducials.iter() {
        assert!((p - t.apply(phantom.fiducials_ct().get(label).unwrap())).norm() < 0.05);
    }
}

#[test]
fn repeated_frames_have_zero_uncertainty_and_are_deterministic() {
    let phantom = default_phantom();
    let noise = Normal::new(0.0, 0.25).unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    let frame = noisy_frame(0, &phantom.markers_ct().transformed(&pose()), &noise, &mut rng);
    let frames: Vec<MarkerFrame> = (0..20).map(|i| MarkerFrame { frame_id: i, ..frame.clone() }).collect();
    let stream = MarkerFrameStream::new(frames).unwrap();
    let a = ground_truth_fiducials(&stream, &phantom, &GroundTruthOptions::default()).unwrap();
    let b = ground_truth_fiducials(&stream, &phantom, &GroundTruthOptions::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.max_uncertainty() < 1e-9);
}

#[test]
fn synthetic_session_phantom_passes_static_check() {
    let cfg = SceneConfig::synthetic_default();
    for seed in 0..20 {
        let s = arnav::synth::generate_session(
            &SceneConfig { seed, ..cfg.clone() },
            arnav::metrics::ExperimentKind::HolographicFeedback,
            &Default::default(),
        );
        ground_truth_fiducials(&s.frames, &cfg.phantom, &GroundTruthOptions::default()).unwrap();
    }
}

proptest! {
    #[test]
    fn noiseless_transport(angle in 0.0..3.1f64, ax in -1.0..1.0f64, ay in -1.0..1.0f64,
                           tx in -1000.0..1000.0f64, ty in -1000.0..1000.0f64, tz in -1000.0..1000.0f64) {
        let t = RigidTransform::from_axis_angle(&Vec3::new(ax, ay, 0.5), angle, Vec3::new(tx, ty, tz));
        let probe = default_probe();
        let frame = MarkerFrame { frame_id: 0, time: 0.0, observations: probe.markers_ct().transformed(&t).entries().to_vec() };
        let obs = locate_tip(&frame, &probe).unwrap();
        prop_assert!((obs.tip_lab - t.apply(probe.tip_ct())).norm() < 1e-9);

        let phantom = default_phantom();
        let frame = MarkerFrame { frame_id: 0, time: 0.0, observations: phantom.markers_ct().transformed(&t).entries().to_vec() };
        let stream = MarkerFrameStream::new(vec![frame]).unwrap();
        let gt = ground_truth_fiducials(&stream, &phantom, &GroundTruthOptions::default()).unwrap();
        for (label, p) in gt.fiducials.iter() {
            let expected: Point3 = t.apply(phantom.fiducials_ct().get(label).unwrap());
            prop_assert!((p - expected).norm() < 1e-9);
        }
    }
}
