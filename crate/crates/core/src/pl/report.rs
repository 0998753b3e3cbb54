use crate::canonical::{seal, KvWriter};

use super::{AllometricFit, CampaignReport, LevelResult, Rejected};

pub const REPORT_EXTENSION: &str = ".plreport.txt";
const FORMAT: &str = "plreport/1";

fn write_allometric(w: &mut KvWriter, prefix: &str, f: &AllometricFit) {
    w.f64(&format!("{prefix}.a"), f.a);
    w.f64(&format!("{prefix}.b"), f.b);
    w.f64(&format!("{prefix}.sigma_b"), f.sigma_b);
    w.f64(&format!("{prefix}.r_squared"), f.r_squared);
    w.int(&format!("{prefix}.n_points"), f.n_points as u64);
    w.bool(&format!("{prefix}.degenerate"), f.degenerate);
}

fn write_level(w: &mut KvWriter, i: usize, l: &LevelResult) {
    let k = |s: &str| format!("level.{i}.{s}");
    let p = &l.fit.params;
    w.f64(&k("power_uw"), l.power_uw);
    w.f64(&k("peak_intensity_counts"), l.peak_intensity_counts);
    w.f64(&k("peak_position_ev"), l.peak_position_ev);
    w.str(&k("profile"), l.fit.profile_kind.as_str());
    w.f64(&k("amplitude"), p.amplitude);
    w.f64(&k("center_ev"), p.center);
    w.f64(&k("sigma_g_ev"), p.sigma_g);
    w.f64(&k("gamma_l_ev"), p.gamma_l);
    w.f64(&k("offset"), p.offset);
    w.f64(&k("r_squared"), l.fit.r_squared);
    w.f64(&k("window_lo_ev"), l.fit.window.lo);
    w.f64(&k("window_hi_ev"), l.fit.window.hi);
    w.int(&k("iterations"), l.fit.iterations as u64);
}

/// Canonical text form of a campaign report and its SHA-256.
///
/// Levels and rejects are written in ascending power regardless of the order
/// they are stored in, so the bytes depend only on the report's content. The
/// `canonical_hash` field of `report` is ignored; the returned hash covers
/// every byte before the trailing `canonical_hash = ` line.
pub fn serialize_report(report: &CampaignReport) -> (String, String) {
    let mut levels: Vec<&LevelResult> = report.levels.iter().collect();
    levels.sort_by(|a, b| a.power_uw.total_cmp(&b.power_uw));
    let mut rejected: Vec<&Rejected> = report.rejected.iter().collect();
    rejected.sort_by(|a, b| {
        a.power_uw
            .total_cmp(&b.power_uw)
            .then(a.reason.cmp(&b.reason))
    });
    let mut positions = report.position_vs_power.clone();
    positions.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut w = KvWriter::new();
    w.str("format", FORMAT);
    w.str("campaign_id", &report.campaign_id);

    let c = &report.config_echo;
    w.str("config.profile", c.fit.profile_kind.as_str());
    w.f64("config.r2_threshold", c.fit.r2_threshold);
    w.int("config.max_iterations", c.fit.max_iterations as u64);
    w.f64("config.cost_rel_tol", c.fit.cost_rel_tol);
    w.f64("config.step_tol", c.fit.step_tol);
    w.bool("config.despike", c.despike);
    w.int("config.despike_window", c.fit.despike_window as u64);
    w.f64("config.despike_k", c.fit.despike_k);
    w.int(
        "config.baseline_edge_points",
        c.fit.baseline_edge_points as u64,
    );
    w.str("config.window_policy", &c.window_policy.describe());
    w.f64("config.boundary_uw", c.boundary_uw);

    w.int("levels.count", levels.len() as u64);
    for (i, l) in levels.iter().enumerate() {
        write_level(&mut w, i, l);
    }
    w.int("rejected.count", rejected.len() as u64);
    for (i, r) in rejected.iter().enumerate() {
        w.f64(&format!("rejected.{i}.power_uw"), r.power_uw);
        w.str(&format!("rejected.{i}.reason"), &r.reason);
    }
    match &report.intensity_fit {
        Some(f) => {
            w.bool("intensity_fit.present", true);
            w.f64("intensity_fit.boundary_uw", f.boundary_uw);
            w.bool("intensity_fit.split_applied", f.split_applied);
            write_allometric(&mut w, "intensity_fit.below", &f.below);
            write_allometric(&mut w, "intensity_fit.above", &f.above);
        }
        None => w.bool("intensity_fit.present", false),
    }
    w.int("position_vs_power.count", positions.len() as u64);
    for (i, (p, e)) in positions.iter().enumerate() {
        w.str(
            &format!("position_vs_power.{i}"),
            &format!(
                "{} {}",
                crate::canonical::fmt_f64(*p),
                crate::canonical::fmt_f64(*e)
            ),
        );
    }
    seal(w.into_string())
}

/// `key = value` pairs of a serialized report, in file order.
pub fn report_fields(text: &str) -> Vec<(&str, &str)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split_once(" = "))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{sha256_hex, unseal};
    use crate::pl::{run_campaign, CampaignConfig, PowerLevel, PowerSeries};
    use crate::spectral::{profile_values, ProfileKind, ProfileParams, Spectrum};
    use proptest::prelude::*;

    fn report() -> CampaignReport {
        let e: Vec<f64> = (0..601).map(|i| 1.85 + 0.0005 * i as f64).collect();
        let levels = [0.5, 2.0, 8.0, 20.0, 60.0, 200.0, 700.0]
            .iter()
            .map(|&p: &f64| {
                let params = ProfileParams {
                    amplitude: 40.0 * p.powf(0.9),
                    center: 2.0,
                    sigma_g: 0.01,
                    gamma_l: 0.002,
                    offset: 1.0,
                };
                PowerLevel {
                    power_uw: p,
                    spectrum: Spectrum::new(
                        e.clone(),
                        profile_values(ProfileKind::Voigt, &params, &e),
                    )
                    .unwrap(),
                }
            })
            .collect();
        let mut r = run_campaign(
            &PowerSeries::new("fixture", levels).unwrap(),
            &CampaignConfig::default(),
        )
        .unwrap();
        // inject rejects so their ordering is exercised too
        r.rejected.push(Rejected {
            power_uw: 3.0,
            reason: "NO_PEAK".into(),
        });
        r.rejected.push(Rejected {
            power_uw: 0.2,
            reason: "R2_BELOW_THRESHOLD".into(),
        });
        r
    }

    #[test]
    fn serialize_twice_identical_and_hash_matches() {
        let r = report();
        let (a, ha) = serialize_report(&r);
        let (b, hb) = serialize_report(&r);
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        let (body, embedded) = unseal(&a).unwrap();
        assert_eq!(embedded, ha);
        assert_eq!(sha256_hex(body.as_bytes()), ha);
        assert!(a.ends_with('\n'));
        assert!(!a.contains('\r'));
    }

    #[test]
    fn floats_round_trip() {
        let r = report();
        let (text, _) = serialize_report(&r);
        let fields = report_fields(&text);
        let b: f64 = fields
            .iter()
            .find(|(k, _)| *k == "intensity_fit.below.b")
            .unwrap()
            .1
            .parse()
            .unwrap();
        assert_eq!(b.to_bits(), r.intensity_fit.unwrap().below.b.to_bits());
        assert_eq!(fields[0], ("format", "plreport/1"));
    }

    #[test]
    fn content_change_changes_bytes() {
        let r = report();
        let mut s = r.clone();
        s.levels[0].peak_intensity_counts += 1e-9;
        assert_ne!(serialize_report(&r).1, serialize_report(&s).1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn construction_order_does_not_matter(seed in any::<u64>()) {
            let r = report();
            let (want, _) = serialize_report(&r);
            let mut s = r.clone();
            // deterministic Fisher-Yates driven by the proptest seed
            let mut state = seed;
            let mut next = |n: usize| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize % n
            };
            for i in (1..s.levels.len()).rev() {
                let j = next(i + 1);
                s.levels.swap(i, j);
            }
            for i in (1..s.rejected.len()).rev() {
                let j = next(i + 1);
                s.rejected.swap(i, j);
            }
            for i in (1..s.position_vs_power.len()).rev() {
                let j = next(i + 1);
                s.position_vs_power.swap(i, j);
            }
            s.canonical_hash = "stale".into();
            prop_assert_eq!(serialize_report(&s).0, want);
        }
    }
}
