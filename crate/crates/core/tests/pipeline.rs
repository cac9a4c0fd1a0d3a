//! End-to-end checks through the public API: generate, transport, certify, validate.

use pframe_core::battery::{self, BatteryConfig};
use pframe_core::frame::{canonical_dual, frame_bounds};
use pframe_core::perturb::{Certifier, PerturbationCertificate, Theorem};
use pframe_core::transport::{diagonal_coupling, dual_membership, glue, DualMembership};
use pframe_core::{w2, Error};
use proptest::prelude::*;

fn frame(seed: u64, dim: usize, atoms: usize) -> pframe_core::DiscreteMeasure {
    battery::seeded_frame(dim, atoms, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_witness_drives_a_sound_dual_stability_certificate(
        seed in any::<u64>(),
        dim in 2usize..=4,
        extra in 0usize..8,
    ) {
        let mu = frame(seed, dim, dim + extra);
        let (dual, _) = canonical_dual(&mu).unwrap();
        let DualMembership::Member { witness, moment_residual, .. } = dual_membership(&mu, &dual).unwrap() else {
            panic!("canonical dual rejected");
        };
        prop_assert!(moment_residual <= 1e-8);

        let eta = battery::jitter(&mu, 1e-3, &mut battery::trial_rng(Theorem::DualStability, seed));
        let g23 = diagonal_coupling(&dual, &mu).unwrap();
        let c = Certifier::default();
        let cert = c.dual_stability(&mu, &dual, &witness, &mu, &g23).unwrap();
        prop_assert!(cert.premise_ok);
        prop_assert!(c.validate(&cert, &mu).unwrap().verdict);
        prop_assert!(c.validate(&cert, &eta).is_err());
    }

    #[test]
    fn glued_plan_projects_to_its_couplings(seed in any::<u64>(), atoms in 2usize..10) {
        let mu = frame(seed, 2, atoms);
        let nu = frame(seed.wrapping_add(1), 2, atoms + 1);
        let eta = frame(seed.wrapping_add(2), 2, atoms + 2);
        let (_, g12) = w2(&mu, &nu).unwrap();
        let (_, g23) = w2(&nu, &eta).unwrap();
        let plan = glue(&g12, &g23).unwrap();
        for (&(i, j), &m) in &plan.project_xy() {
            let want: f64 = g12.entries().iter().filter(|e| (e.0, e.1) == (i, j)).map(|e| e.2).sum();
            prop_assert!((m - want).abs() <= 1e-12);
        }
        let total: f64 = plan.entries().iter().map(|e| e.3).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn w2_certificate_agrees_with_distance(seed in any::<u64>(), scale in 1e-3f64..1.0) {
        let mu = frame(seed, 3, 8);
        let nu = battery::jitter(&mu, scale, &mut battery::trial_rng(Theorem::W2Openness, seed));
        let (d, _) = w2(&mu, &nu).unwrap();
        let cert = Certifier::default().w2(&mu, &nu).unwrap();
        prop_assert!((cert.extras["w2"] - d).abs() <= 1e-12);
        prop_assert_eq!(cert.premise_ok, d < frame_bounds(&mu).lower.sqrt());
    }
}

#[test]
fn certificate_survives_a_file_round_trip() {
    let mu = frame(3, 3, 6);
    let nu = battery::jitter(&mu, 1e-2, &mut battery::trial_rng(Theorem::Sweetie, 3));
    let c = Certifier::default();
    let cert = c.sweetie(&mu, &nu).unwrap();
    let back: PerturbationCertificate = serde_json::from_str(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
    assert!(c.validate(&back, &nu).unwrap().verdict);
    assert!(matches!(
        c.validate(&back, &mu),
        Err(Error::DigestMismatch { .. })
    ));
}

#[test]
fn battery_output_does_not_depend_on_thread_count() {
    let cfg = BatteryConfig {
        seed: 77,
        trials: 15,
        ..BatteryConfig::default()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| battery::run_battery(&cfg).unwrap());
    let parallel = battery::run_battery(&cfg).unwrap();
    assert_eq!(single.to_csv(), parallel.to_csv());
    assert_eq!(parallel.violations(), 0);
}
