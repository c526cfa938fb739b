use arnav::geometry::{LabeledPoint, RigidTransform};
use arnav::io::frames::{MarkerFrame, MarkerFrameStream};
use arnav::stability::{rigid_body_distance_spread, stability_report, static_marker_sd};
use arnav::{Point3, Vec3};
use arnav_oracles::sd_chi_square_interval;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

fn stream(frames: Vec<Vec<(&str, Point3)>>) -> MarkerFrameStream {
    MarkerFrameStream::new(
        frames
            .into_iter()
            .enumerate()
            .map(|(i, obs)| MarkerFrame {
                frame_id: i as i64,
                time: i as f64 / 100.0,
                observations: obs.into_iter().map(|(l, p)| LabeledPoint { label: l.into(), position: p }).collect(),
            })
            .collect(),
    )
    .unwrap()
}

fn sample_sd(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[test]
fn static_marker_within_chi_square_interval() {
    let (lo, hi) = sd_chi_square_interval(0.16, 1400, 0.99);
    let noise = Normal::new(0.0, 0.16).unwrap();
    let mut inside = 0;
    for seed in 0..200 {
        let mut rng = StdRng::seed_from_u64(seed);
        let base = Point3::new(100.0, -50.0, 1200.0);
        let frames = (0..1400)
            .map(|_| vec![("S", base + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))])
            .collect();
        let sd = &static_marker_sd(&stream(frames), &["S"]).unwrap()[0];
        inside += sd.axis_sd.iter().filter(|s| (lo..=hi).contains(*s)).count();
    }
    // 600 axis estimates, each inside with probability 0.99.
    assert!(inside >= 585, "{inside} of 600 inside [{lo}, {hi}]");
}

#[test]
fn distance_spread_matches_brute_force_simulation() {
    let body = [
        ("A", Point3::new(0.0, 0.0, 0.0)),
        ("B", Point3::new(60.0, 0.0, 0.0)),
        ("C", Point3::new(10.0, 80.0, 5.0)),
        ("D", Point3::new(-30.0, 40.0, 50.0)),
    ];
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut rng = StdRng::seed_from_u64(21);
    let frames: Vec<Vec<(&str, Point3)>> = (0..1000)
        .map(|_| {
            let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0);
            let t = RigidTransform::from_axis_angle(&axis, rng.random_range(0.0..3.0), Vec3::new(500.0, 0.0, 900.0));
            body.iter()
                .map(|(l, p)| (*l, t.apply(p) + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng))))
                .collect()
        })
        .collect();
    let spread = rigid_body_distance_spread(&stream(frames), &["A", "B", "C", "D"]).unwrap();
    assert_eq!(spread.len(), 6);

    // Oracle: distances of independently perturbed point pairs, 200k draws.
    let mut orng = StdRng::seed_from_u64(99);
    for pair in &spread {
        let p = body.iter().find(|b| b.0 == pair.labels.0).unwrap().1;
        let q = body.iter().find(|b| b.0 == pair.labels.1).unwrap().1;
        let draws: Vec<f64> = (0..200_000)
            .map(|_| {
                let e = Vec3::new(noise.sample(&mut orng), noise.sample(&mut orng), noise.sample(&mut orng));
                let f = Vec3::new(noise.sample(&mut orng), noise.sample(&mut orng), noise.sample(&mut orng));
                ((p + e) - (q + f)).norm()
            })
            .collect();
        let oracle_sd = sample_sd(&draws);
        // Sampling error of an SD from 1000 frames is about 2.2 %.
        assert!((pair.distance_sd / oracle_sd - 1.0).abs() < 0.08, "{:?}: {} vs {oracle_sd}", pair.labels, pair.distance_sd);
        assert!((pair.distance_variance - pair.distance_sd.powi(2)).abs() < 1e-15);
    }
}

#[test]
fn noiseless_rigid_body_has_zero_spread() {
    let body = [("A", Point3::new(0.0, 0.0, 0.0)), ("B", Point3::new(55.0, 3.0, 0.0)), ("C", Point3::new(0.0, 70.0, 9.0))];
    let mut rng = StdRng::seed_from_u64(2);
    let frames: Vec<Vec<(&str, Point3)>> = (0..300)
        .map(|_| {
            let t = RigidTransform::from_axis_angle(
                &Vec3::new(rng.random_range(-1.0..1.0), 1.0, 0.0),
                rng.random_range(0.0..3.0),
                Vec3::new(rng.random_range(-100.0..100.0), 0.0, 1000.0),
            );
            body.iter().map(|(l, p)| (*l, t.apply(p))).collect()
        })
        .collect();
    let report = stability_report(&stream(frames), &[], &["A", "B", "C"]).unwrap();
    assert!(report.max_pairwise_sd < 1e-9, "{}", report.max_pairwise_sd);
}

#[test]
fn duplicated_frame_follows_analytic_update() {
    let noise = Normal::new(0.0, 0.3).unwrap();
    let mut rng = StdRng::seed_from_u64(8);
    let xs: Vec<Point3> = (0..50)
        .map(|_| Point3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))
        .collect();
    let before = static_marker_sd(&stream(xs.iter().map(|p| vec![("S", *p)]).collect()), &["S"]).unwrap()[0].clone();
    for k in [0, 17, 49] {
        let mut dup = xs.clone();
        dup.push(xs[k]);
        let after = &static_marker_sd(&stream(dup.iter().map(|p| vec![("S", *p)]).collect()), &["S"]).unwrap()[0];
        for axis in 0..3 {
            // Adding x to n values with mean m and variance s²:
            // s'² = ((n−1)s² + n/(n+1)·(x−m)²) / n.
            let n = xs.len() as f64;
            let m = xs.iter().map(|p| p[axis]).sum::<f64>() / n;
            let s2 = before.axis_sd[axis].powi(2);
            let analytic = (((n - 1.0) * s2 + n / (n + 1.0) * (xs[k][axis] - m).powi(2)) / n).sqrt();
            let brute = sample_sd(&dup.iter().map(|p| p[axis]).collect::<Vec<_>>());
            assert!((after.axis_sd[axis] - analytic).abs() < 1e-12);
            assert!((after.axis_sd[axis] - brute).abs() < 1e-12);
            assert!(after.axis_sd[axis] <= analytic + 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn frame_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut pts: Vec<Point3> = (0..30)
            .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = static_marker_sd(&stream(pts.iter().map(|p| vec![("S", *p)]).collect()), &["S"]).unwrap();
        pts.shuffle(&mut rng);
        let b = static_marker_sd(&stream(pts.iter().map(|p| vec![("S", *p)]).collect()), &["S"]).unwrap();
        for axis in 0..3 {
            prop_assert!((a[0].axis_sd[axis] - b[0].axis_sd[axis]).abs() < 1e-12);
        }
    }

    #[test]
    fn spread_invariant_under_per_frame_isometry(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let frames: Vec<Vec<(&str, Point3)>> = (0..10)
            .map(|_| ["A", "B", "C"].iter().map(|l| (*l, Point3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), 0.0))).collect())
            .collect();
        let moved: Vec<Vec<(&str, Point3)>> = frames
            .iter()
            .map(|f| {
                let t = RigidTransform::from_axis_angle(&Vec3::new(1.0, rng.random_range(-1.0..1.0), 0.3), rng.random_range(0.0..3.0), Vec3::new(200.0, -10.0, 5.0));
                f.iter().map(|(l, p)| (*l, t.apply(p))).collect()
            })
            .collect();
        let a = rigid_body_distance_spread(&stream(frames), &["A", "B", "C"]).unwrap();
        let b = rigid_body_distance_spread(&stream(moved), &["A", "B", "C"]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.distance_sd - y.distance_sd).abs() < 1e-9);
        }
    }
}
