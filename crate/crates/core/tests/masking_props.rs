use noisemask::augment::flip;
use noisemask::rng::Stream;
use noisemask::{
    color_noise, eta, masked_count, tube_mask, white_noise, Color, GridShape, MaskRatio,
    NoiseTensor, SigmaPolicy,
};
use proptest::prelude::*;

#[test]
fn exact_ratio_over_many_shapes_and_ratios() {
    let mut rng = Stream::new(77);
    for case in 0..60u64 {
        let dims: Vec<usize> = if case % 3 == 0 {
            (0..3).map(|_| 2 + rng.below(20) as usize).collect()
        } else {
            (0..2).map(|_| 2 + rng.below(99) as usize).collect()
        };
        let shape = GridShape::new(&dims).unwrap();
        assert!(shape.len() <= 10_000);
        let n = white_noise(&shape, case);
        for step in 0..=100 {
            let gamma = MaskRatio::new(step as f64 / 100.0).unwrap();
            let m = eta(&n, gamma);
            assert_eq!(m.popcount(), masked_count(&shape, gamma), "{shape} at {step}%");
        }
    }
}

#[test]
fn masked_count_rule_at_common_grids() {
    let grid = GridShape::d3(14, 14, 8).unwrap();
    let at = |g: f64| masked_count(&grid, MaskRatio::new(g).unwrap());
    assert_eq!(at(0.9), 1412);
    assert_eq!(at(0.75), 1176);
    let audio = GridShape::d2(64, 8).unwrap();
    assert_eq!(masked_count(&audio, MaskRatio::new(0.8).unwrap()), 410);
}

#[test]
fn tube_mask_is_static() {
    let m = tube_mask(&GridShape::d2(14, 14).unwrap(), 8, MaskRatio::new(0.9).unwrap(), 5).unwrap();
    assert_eq!(m.popcount(), 8 * 177);
    let first = m.frame(0);
    assert!((1..8).all(|t| m.frame(t) == first));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_ignores_increasing_transforms(
        seed in any::<u64>(),
        gamma in 0.0f64..=1.0,
        c1 in 0.01f64..3.0,
        c3 in 0.0f64..2.0,
        shift in -5.0f64..5.0,
    ) {
        let n = color_noise(&GridShape::d2(11, 13).unwrap(), Color::White, &SigmaPolicy::fixed(1.0), seed).unwrap();
        let ratio = MaskRatio::new(gamma).unwrap();
        let poly: Vec<f64> = n.values.iter().map(|x| shift + c1 * x + c3 * x * x * x).collect();
        let exp: Vec<f64> = n.values.iter().map(|x| x.exp()).collect();
        let base = eta(&n, ratio);
        let p = eta(&NoiseTensor::from_values(n.shape.clone(), poly).unwrap(), ratio);
        let e = eta(&NoiseTensor::from_values(n.shape.clone(), exp).unwrap(), ratio);
        prop_assert_eq!(&base.bits, &p.bits);
        prop_assert_eq!(&base.bits, &e.bits);
    }

    #[test]
    fn larger_ratio_masks_a_superset(seed in any::<u64>(), g1 in 0.0f64..=1.0, g2 in 0.0f64..=1.0) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let n = white_noise(&GridShape::d3(6, 5, 4).unwrap(), seed);
        let small = eta(&n, MaskRatio::new(lo).unwrap());
        let large = eta(&n, MaskRatio::new(hi).unwrap());
        for (s, l) in small.bits.iter().zip(&large.bits) {
            prop_assert!(!s || *l);
        }
    }

    #[test]
    fn flip_commutes_with_eta(seed in any::<u64>(), gamma in 0.0f64..=1.0, axis in 0usize..3) {
        let shape = GridShape::d3(7, 6, 5).unwrap();
        let n = color_noise(&shape, Color::Green, &SigmaPolicy::variant5(), seed).unwrap();
        let ratio = MaskRatio::new(gamma).unwrap();
        let flipped = NoiseTensor::from_values(shape.clone(), flip(&shape, &n.values, axis).unwrap()).unwrap();
        let lhs = eta(&flipped, ratio);
        let rhs = flip(&shape, &eta(&n, ratio).bits, axis).unwrap();
        prop_assert_eq!(lhs.bits, rhs);
    }
}
