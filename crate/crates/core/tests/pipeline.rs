use fdscb::fdata::{parse_sample_csv, sample_to_csv};
use fdscb::quantile::{QuantileMethod, METHOD_NAMES};
use fdscb::rng::{tags, StreamKey};
use fdscb::scb::{band_for_sample, covers, gauss_test, BandConfig, GaussStatistic, GaussTestConfig, SeMode};
use fdscb::simmodels::{sample_model, ModelSpec};
use fdscb::transforms::Transformation;
use fdscb::Grid;
use proptest::prelude::*;

fn band_cfg(transform: Transformation, method: QuantileMethod, key: StreamKey) -> BandConfig {
    BandConfig {
        transform,
        method,
        alpha: 0.05,
        se_mode: SeMode::Estimated,
        bias_correct: false,
        bootstrap: 200,
        key,
        fixed_quantile: None,
    }
}

#[test]
fn simulated_sample_survives_csv_and_gives_the_same_band() {
    let grid = Grid::unit(30).unwrap();
    let sample = sample_model(&ModelSpec::b(), 40, &grid, StreamKey::new(5, 0)).unwrap();
    let back = parse_sample_csv(&sample_to_csv(&sample)).unwrap();
    let cfg = band_cfg(Transformation::CohensD, QuantileMethod::Mult, StreamKey::new(5, 0).derive(tags::BOOTSTRAP));
    let (a, _) = band_for_sample(&sample, &cfg).unwrap();
    let (b, _) = band_for_sample(&back, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn every_method_brackets_the_estimate() {
    let grid = Grid::unit(25).unwrap();
    let sample = sample_model(&ModelSpec::c(), 60, &grid, StreamKey::new(9, 0)).unwrap();
    for name in METHOD_NAMES {
        let method: QuantileMethod = name.parse().unwrap();
        let (band, _) =
            band_for_sample(&sample, &band_cfg(Transformation::CohensD, method, StreamKey::new(9, 1))).unwrap();
        assert!(band.q.q > 1.0 && band.q.q < 6.0, "{name}: {}", band.q.q);
        assert!(covers(&band, &band.center).unwrap());
    }
}

#[test]
fn gaussianity_is_rejected_for_skewed_data() {
    // Model C has pointwise skewness far from zero.
    let grid = Grid::unit(20).unwrap();
    let sample = sample_model(&ModelSpec::c(), 400, &grid, StreamKey::new(2, 0)).unwrap();
    let cfg = GaussTestConfig {
        statistic: GaussStatistic::SkewnessZ,
        alpha: 0.05,
        method: QuantileMethod::Mult,
        se_mode: SeMode::GaussianExact,
        bias_correct: false,
        bootstrap: 500,
        key: StreamKey::new(2, 0).derive(tags::BOOTSTRAP),
    };
    let r = gauss_test(&sample, &cfg).unwrap();
    assert!(r.reject && r.max_stat > r.threshold);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bands_are_ordered_and_widen_with_confidence(seed in 0u64..1000, n in 20usize..80) {
        let grid = Grid::unit(15).unwrap();
        let sample = sample_model(&ModelSpec::a(), n, &grid, StreamKey::new(seed, 0)).unwrap();
        let key = StreamKey::new(seed, 0).derive(tags::BOOTSTRAP);
        let mut cfg = band_cfg(Transformation::Mean, QuantileMethod::Mult, key);
        let (narrow, _) = band_for_sample(&sample, &cfg).unwrap();
        cfg.alpha = 0.01;
        let (wide, _) = band_for_sample(&sample, &cfg).unwrap();
        for i in 0..grid.len() {
            prop_assert!(narrow.lower.values()[i] <= narrow.center.values()[i]);
            prop_assert!(narrow.center.values()[i] <= narrow.upper.values()[i]);
            prop_assert!(wide.lower.values()[i] <= narrow.lower.values()[i]);
            prop_assert!(wide.upper.values()[i] >= narrow.upper.values()[i]);
        }
    }

    #[test]
    fn band_is_equivariant_under_shifts_of_the_mean(seed in 0u64..1000, shift in -5.0f64..5.0) {
        let grid = Grid::unit(12).unwrap();
        let sample = sample_model(&ModelSpec::b(), 30, &grid, StreamKey::new(seed, 0)).unwrap();
        let moved = fdscb::FunctionalSample::new(grid.clone(), sample.values() + shift).unwrap();
        let cfg = band_cfg(Transformation::Mean, QuantileMethod::Gkf, StreamKey::new(seed, 1));
        let (a, _) = band_for_sample(&sample, &cfg).unwrap();
        let (b, _) = band_for_sample(&moved, &cfg).unwrap();
        prop_assert!((a.q.q - b.q.q).abs() <= 1e-9 * a.q.q);
        for i in 0..grid.len() {
            prop_assert!((b.center.values()[i] - a.center.values()[i] - shift).abs() <= 1e-9 * (1.0 + shift.abs()));
        }
    }
}
