mod common;

use common::oracles::dense_gaussian_convolution;
use noisemask::noise::raw_color_noise;
use noisemask::rng::Stream;
use noisemask::{
    color_noise, filter_gaussian, gaussian_kernel, normalize, white_noise, Color, GridShape,
    NoiseTensor, SigmaPolicy,
};
use proptest::prelude::*;

fn tensor(dims: &[usize], values: Vec<f64>) -> NoiseTensor {
    NoiseTensor::from_values(GridShape::new(dims).unwrap(), values).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn eight_by_eight_matches_dense_convolution() {
    let n = white_noise(&GridShape::d2(8, 8).unwrap(), 21);
    let fast = filter_gaussian(&n, 1.0).unwrap();
    let dense = dense_gaussian_convolution(&[8, 8], &n.values, 1.0);
    assert!(max_abs_diff(&fast.values, &dense) <= 1e-10);
}

#[test]
fn separable_equals_dense_on_random_grids() {
    let mut rng = Stream::new(2024);
    for case in 0..40 {
        let rank = 2 + (case % 2);
        let dims: Vec<usize> = (0..rank).map(|_| 2 + rng.below(15) as usize).collect();
        let sigma = rng.uniform_in(0.3, 3.0);
        let n = white_noise(&GridShape::new(&dims).unwrap(), case);
        let fast = filter_gaussian(&n, sigma).unwrap();
        let dense = dense_gaussian_convolution(&dims, &n.values, sigma);
        let err = max_abs_diff(&fast.values, &dense);
        assert!(err <= 1e-10, "dims {dims:?} sigma {sigma}: {err}");
    }
}

#[test]
fn decomposition_blue_plus_red_is_white() {
    let mut rng = Stream::new(5);
    for case in 0..20 {
        let dims: Vec<usize> = if case % 2 == 0 {
            vec![16, 16]
        } else {
            vec![8, 8, 6]
        };
        let shape = GridShape::new(&dims).unwrap();
        let policy = SigmaPolicy::fixed(rng.uniform_in(0.5, 3.0));
        let red = raw_color_noise(&shape, Color::Red, &policy, case).unwrap();
        let blue = raw_color_noise(&shape, Color::Blue, &policy, case).unwrap();
        let white = white_noise(&shape, case);
        for i in 0..shape.len() {
            assert!((red.values[i] + blue.values[i] - white.values[i]).abs() <= 1e-12);
        }
    }
}

#[test]
fn green_is_difference_of_two_lowpasses() {
    let shape = GridShape::d3(10, 9, 8).unwrap();
    let g = raw_color_noise(&shape, Color::Green, &SigmaPolicy::fixed_pair(0.5, 2.0), 3).unwrap();
    let w = white_noise(&shape, 3);
    let a = dense_gaussian_convolution(shape.dims(), &w.values, 0.5);
    let b = dense_gaussian_convolution(shape.dims(), &w.values, 2.0);
    let expected: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    assert!(max_abs_diff(&g.values, &expected) <= 1e-10);
    assert_eq!(g.sigma_params, vec![0.5, 2.0]);
}

#[test]
fn color_noise_is_normalized_and_deterministic() {
    let shape = GridShape::d2(32, 24).unwrap();
    for color in [Color::White, Color::Red, Color::Blue, Color::Green] {
        let policy = if color == Color::Green {
            SigmaPolicy::variant5()
        } else {
            SigmaPolicy::fixed(2.0)
        };
        let a = color_noise(&shape, color, &policy, 17).unwrap();
        let b = color_noise(&shape, color, &policy, 17).unwrap();
        assert_eq!(a, b);
        let n = a.values.len() as f64;
        let mean = a.values.iter().sum::<f64>() / n;
        let std = (a.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() <= 1e-6 && (std - 1.0).abs() <= 1e-6, "{color}");
        assert!(a.values.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn kernel_taps_follow_the_formula() {
    for sigma in [0.4, 0.75, 1.0, 1.6, 2.5] {
        let taps = gaussian_kernel(sigma, 3).unwrap();
        let radius = (3.0f64 * sigma).ceil() as i64;
        assert_eq!(taps.len() as i64, 2 * radius + 1);
        let raw: Vec<f64> = (-radius..=radius)
            .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let z: f64 = raw.iter().sum();
        assert!(max_abs_diff(&taps, &raw.iter().map(|r| r / z).collect::<Vec<_>>()) < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filtering_is_linear(
        seed_x in any::<u64>(),
        seed_y in any::<u64>(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        sigma in 0.3f64..3.0,
    ) {
        let shape = GridShape::d2(16, 16).unwrap();
        let x = white_noise(&shape, seed_x);
        let y = white_noise(&shape, seed_y);
        let combo: Vec<f64> = x.values.iter().zip(&y.values).map(|(p, q)| a * p + b * q).collect();
        let lhs = filter_gaussian(&tensor(&[16, 16], combo), sigma).unwrap();
        let fx = filter_gaussian(&x, sigma).unwrap();
        let fy = filter_gaussian(&y, sigma).unwrap();
        for i in 0..256 {
            prop_assert!((lhs.values[i] - (a * fx.values[i] + b * fy.values[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let shape = GridShape::d2(12, 7).unwrap();
        let w = white_noise(&shape, seed);
        let v: Vec<f64> = w.values.iter().map(|x| x * scale + shift).collect();
        let once = normalize(&tensor(&[12, 7], v));
        let twice = normalize(&once);
        prop_assert!(max_abs_diff(&once.values, &twice.values) <= 1e-10);
    }
}
