use criterion::{black_box, criterion_group, criterion_main, Criterion};
use labgate::pl::{load_campaign_csv, run_campaign, CampaignConfig};
use labgate::repro::images::grating;
use labgate::repro::{generate_campaign, oracle_fit, SyntheticSpec};
use labgate::sem::periodicity_fft;
use labgate::spectral::{
    fit_profile, initial_guess, profile_values, FitConfig, ProfileKind, ProfileParams, Spectrum,
};

fn voigt_spectrum() -> Spectrum {
    let energy: Vec<f64> = (0..601).map(|i| 1.85 + 0.3 * i as f64 / 600.0).collect();
    let truth = ProfileParams {
        amplitude: 1000.0,
        center: 2.0,
        sigma_g: 0.012,
        gamma_l: 0.01,
        offset: 20.0,
    };
    let counts = profile_values(ProfileKind::Voigt, &truth, &energy);
    Spectrum::new(energy, counts).unwrap()
}

fn bench_fit(c: &mut Criterion) {
    let s = voigt_spectrum();
    let window = s.extent();
    let init = initial_guess(&s, &window).unwrap().params;
    let config = FitConfig::default();
    c.bench_function("fit_profile_voigt_601", |b| {
        b.iter(|| fit_profile(black_box(&s), &window, &config, &init).unwrap())
    });
}

fn bench_campaign(c: &mut Criterion) {
    let spec = SyntheticSpec {
        noise_rel: 0.01,
        ..Default::default()
    };
    let series = load_campaign_csv(&generate_campaign(&spec).unwrap().csv).unwrap();
    let config = CampaignConfig::default();
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    group.bench_function("run_campaign_21_levels", |b| {
        b.iter(|| run_campaign(black_box(&series), &config).unwrap())
    });
    group.finish();
}

fn bench_periodicity(c: &mut Criterion) {
    let image = grating(512, 512, 16.0, 0.0);
    c.bench_function("periodicity_fft_512", |b| {
        b.iter(|| periodicity_fft(black_box(&image), 2.48).unwrap())
    });
}

fn bench_oracle(c: &mut Criterion) {
    let s = voigt_spectrum();
    let window = s.extent();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("oracle_fit_voigt_601", |b| {
        b.iter(|| oracle_fit(black_box(&s), &window, ProfileKind::Voigt))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_fit,
    bench_campaign,
    bench_periodicity,
    bench_oracle
);
criterion_main!(benches);
