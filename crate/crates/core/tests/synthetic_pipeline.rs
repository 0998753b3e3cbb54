//! Generator-to-report round trips across the PL modules.

use labgate::canonical::unseal;
use labgate::pl::{
    load_campaign_csv, report_fields, run_campaign, run_campaign_with_init, serialize_report,
    CampaignConfig, InitMode,
};
use labgate::repro::{generate_campaign, SyntheticSpec};
use labgate::spectral::ProfileKind;
use proptest::prelude::*;

fn small(seed: u64, noise_rel: f64) -> SyntheticSpec {
    SyntheticSpec {
        n_levels: 9,
        noise_rel,
        rng_seed: seed,
        ..Default::default()
    }
}

#[test]
fn noisy_recovery_within_two_hundredths_over_seeds() {
    for seed in [1u64, 2, 3, 42, 1234567] {
        let spec = SyntheticSpec {
            noise_rel: 0.01,
            rng_seed: seed,
            ..Default::default()
        };
        let series = load_campaign_csv(&generate_campaign(&spec).unwrap().csv).unwrap();
        let fit = run_campaign(&series, &CampaignConfig::default())
            .unwrap()
            .intensity_fit
            .unwrap();
        assert!(
            (fit.below.b - 1.5).abs() <= 0.02,
            "seed {seed}: {}",
            fit.below.b
        );
        assert!(
            (fit.above.b - 0.5).abs() <= 0.02,
            "seed {seed}: {}",
            fit.above.b
        );
    }
}

#[test]
fn above_side_exact_when_noise_free() {
    let series =
        load_campaign_csv(&generate_campaign(&SyntheticSpec::default()).unwrap().csv).unwrap();
    let fit = run_campaign(&series, &CampaignConfig::default())
        .unwrap()
        .intensity_fit
        .unwrap();
    assert!((fit.above.b - 0.5).abs() <= 1e-6, "{}", fit.above.b);
}

#[test]
fn report_text_round_trips_the_fit() {
    let series = load_campaign_csv(&generate_campaign(&small(5, 0.01)).unwrap().csv).unwrap();
    let report = run_campaign(&series, &CampaignConfig::default()).unwrap();
    let (text, hash) = serialize_report(&report);
    assert_eq!(unseal(&text).unwrap().1, hash);
    let fields = report_fields(&text);
    let get = |k: &str| fields.iter().find(|(key, _)| *key == k).unwrap().1;
    let fit = report.intensity_fit.unwrap();
    assert_eq!(
        get("intensity_fit.below.b").parse::<f64>().unwrap(),
        fit.below.b
    );
    assert_eq!(
        get("intensity_fit.above.sigma_b").parse::<f64>().unwrap(),
        fit.above.sigma_b
    );
    assert_eq!(get("campaign_id"), series.campaign_id());
}

#[test]
fn cascade_seeding_does_not_move_voigt_fits() {
    let spec = SyntheticSpec {
        profile_kind: ProfileKind::Voigt,
        n_levels: 7,
        ..Default::default()
    };
    let series = load_campaign_csv(&generate_campaign(&spec).unwrap().csv).unwrap();
    let config = CampaignConfig::default();
    let a = run_campaign_with_init(&series, &config, InitMode::Independent).unwrap();
    let b = run_campaign_with_init(&series, &config, InitMode::Cascade).unwrap();
    assert_eq!(a.levels.len(), b.levels.len());
    for (x, y) in a.levels.iter().zip(&b.levels) {
        let (p, q) = (&x.fit.params, &y.fit.params);
        for (u, v) in [
            (p.amplitude, q.amplitude),
            (p.center, q.center),
            (p.sigma_g + p.gamma_l, q.sigma_g + q.gamma_l),
        ] {
            assert!((u - v).abs() <= 1e-9 * u.abs().max(v.abs()), "{u} vs {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn every_seed_is_repeat_deterministic(seed in any::<u64>()) {
        let csv = generate_campaign(&small(seed, 0.01)).unwrap().csv;
        let series = load_campaign_csv(&csv).unwrap();
        let config = CampaignConfig::default();
        let h1 = serialize_report(&run_campaign(&series, &config).unwrap()).1;
        let h2 = serialize_report(&run_campaign(&load_campaign_csv(&csv).unwrap(), &config).unwrap()).1;
        prop_assert_eq!(h1, h2);
    }

    #[test]
    fn seeds_give_distinct_csvs(a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        let x = generate_campaign(&small(a, 0.01)).unwrap().csv;
        let y = generate_campaign(&small(b, 0.01)).unwrap().csv;
        prop_assert_ne!(x, y);
    }
}
