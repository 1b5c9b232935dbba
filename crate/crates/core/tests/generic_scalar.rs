//! The numeric stack is generic over the scalar; exercise the f32
//! instantiation end to end so the trait bounds stay honest.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gridfreq::profiles::{daily_mean_profile, partition_trading_windows};
use gridfreq::stats::{fit_gaussian, histogram, summary_stats};
use gridfreq::swing::{sample_stable, simulate, standard_normal, GridModel, NoiseSpec, SimParams};
use gridfreq::theory::{predict_scale_stable, predict_std_gaussian};
use gridfreq::timeseries::{to_angular_velocity, FrequencyTrace};

const DAY0: i64 = 1_483_228_800_000;

#[test]
fn f32_trace_profiles_and_stats() {
    let spd = 8640usize;
    let values: Vec<f32> = (0..spd)
        .map(|k| 50.0 + 0.01 * ((k % 16) as f32 - 7.5) / 7.5)
        .collect();
    let trace = FrequencyTrace::<f32>::from_days(10_000, 50.0, vec![(DAY0, values)]).unwrap();
    assert!(trace.is_analysis_ready());

    let profile = daily_mean_profile(&trace).unwrap();
    assert_eq!(profile.means.len(), spd);

    let partition = partition_trading_windows(&trace, &[0, 15, 30, 45], 150.0).unwrap();
    assert_eq!(
        partition.trading_samples.len() + partition.nontrading_samples.len(),
        spd
    );

    let omega = to_angular_velocity(&trace).unwrap();
    let dev: Vec<f32> = omega.iter_values().collect();
    let stats = summary_stats(&dev).unwrap();
    assert!(stats.std > 0.0);
    let fit = fit_gaussian(&dev).unwrap();
    assert!(fit.sigma > 0.0);
    let hist = histogram(&dev, 8, (-0.1f32, 0.1)).unwrap();
    assert_eq!(hist.total(), spd as u64);
}

#[test]
fn f32_sampling_and_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let z: f32 = standard_normal(&mut rng);
    assert!(z.is_finite());
    let s: f32 = sample_stable(1.5f32, 0.0, 1.0, &mut rng);
    assert!(s.is_finite());

    let grid = GridModel::<f32>::single_node(1.0, 0.0, 1.0).unwrap();
    let noise = NoiseSpec::<f32>::gaussian(vec![0.5]).unwrap();
    let params = SimParams::<f32>::new(1e-2, 20_000, 3);
    let sim = simulate(&grid, &noise, &params).unwrap();
    let std = summary_stats(&sim.omega[0]).unwrap().std;
    // stationary std 0.5/sqrt(2), loose tolerance for the short f32 run
    assert!((std - 0.3536).abs() / 0.3536 < 0.15, "std {std}");
}

#[test]
fn f32_theory_matches_f64_to_single_precision() {
    let grid32 = GridModel::<f32>::single_node(2.0, 0.0, 1.0).unwrap();
    let grid64 = GridModel::<f64>::single_node(2.0, 0.0, 1.0).unwrap();
    let g32 = predict_std_gaussian(&grid32, &NoiseSpec::gaussian(vec![0.7f32]).unwrap()).unwrap();
    let g64 = predict_std_gaussian(&grid64, &NoiseSpec::gaussian(vec![0.7f64]).unwrap()).unwrap();
    assert!((g32 as f64 - g64).abs() < 1e-6);
    let s32 =
        predict_scale_stable(&grid32, &NoiseSpec::stable(1.7f32, vec![0.7]).unwrap()).unwrap();
    let s64 =
        predict_scale_stable(&grid64, &NoiseSpec::stable(1.7f64, vec![0.7]).unwrap()).unwrap();
    assert!((s32 as f64 - s64).abs() < 1e-6);
}
