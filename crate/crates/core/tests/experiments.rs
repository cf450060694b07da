//! Experiment drivers: determinism under different worker pools, input-law
//! moments, hypothesis gating, and convergence with growing n.

use kcirc_core::montecarlo::{
    check_hypothesis, oracle_sweep, run_experiment, ExperimentConfig, ExperimentKind, InputLaw,
};
use kcirc_core::seeds::trial_rng;
use kcirc_core::Error;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let configs = [
        ExperimentConfig::new(ExperimentKind::LsdTheorem3, 30, 901, 2, InputLaw::StandardNormal, 6, 42),
        ExperimentConfig::new(ExperimentKind::LsdTheorem4, 30, 899, 2, InputLaw::CenteredExponential, 6, 42),
        ExperimentConfig::new(ExperimentKind::LsdTheorem2, 2, 729, 6, InputLaw::Rademacher, 3, 42),
        {
            let mut c = ExperimentConfig::gumbel(20, InputLaw::StandardNormal, 50, 42);
            c.universality_law = Some(InputLaw::Uniform);
            c
        },
        ExperimentConfig::oracle_sweep(12, 2, 42),
    ];
    for config in configs {
        let one = in_pool(1, || run_experiment(&config).unwrap().to_json());
        let three = in_pool(3, || run_experiment(&config).unwrap().to_json());
        assert_eq!(one, three, "{:?}", config.kind);
        let again = in_pool(3, || run_experiment(&config).unwrap().to_json());
        assert_eq!(three, again);
    }
}

#[test]
fn different_seeds_give_different_reports() {
    let a = ExperimentConfig::new(ExperimentKind::LsdTheorem3, 10, 101, 2, InputLaw::StandardNormal, 3, 1);
    let b = ExperimentConfig { master_seed: 2, ..a.clone() };
    assert_ne!(run_experiment(&a).unwrap().to_json(), run_experiment(&b).unwrap().to_json());
}

#[test]
fn input_laws_have_unit_variance_and_stated_moments() {
    for (i, law) in InputLaw::ALL.iter().enumerate() {
        let m = law.moment_check(400_000, &mut trial_rng(17, i as u64));
        assert!(m.mean_ok && m.variance_ok, "{law}: {m:?}");
        let spread = 3.0 * (law.fourth_moment().powf(1.5) / m.draws as f64).sqrt();
        assert!((m.abs_moment_3 - law.abs_third_moment()).abs() < spread.max(1e-12), "{law}: {m:?}");
    }
}

#[test]
fn law_names_round_trip() {
    for law in InputLaw::ALL {
        assert_eq!(law.to_string().parse::<InputLaw>().unwrap(), law);
    }
    assert_eq!("gaussian".parse::<InputLaw>().unwrap(), InputLaw::StandardNormal);
    assert!("cauchy".parse::<InputLaw>().is_err());
}

#[test]
fn hypotheses_gate_the_runs() {
    let bad = [
        // 10^2 = 0 mod 100: not coprime.
        ExperimentConfig::new(ExperimentKind::LsdTheorem3, 10, 100, 2, InputLaw::StandardNormal, 1, 0),
        // 3^2 = 9 is neither 1 nor -1 mod 11.
        ExperimentConfig::new(ExperimentKind::LsdTheorem3, 3, 11, 2, InputLaw::StandardNormal, 1, 0),
        // Gumbel needs n = k^2 + 1.
        ExperimentConfig::new(ExperimentKind::GumbelTheorem5, 10, 103, 2, InputLaw::StandardNormal, 1, 0),
    ];
    for config in bad {
        assert!(matches!(check_hypothesis(&config), Err(Error::Hypothesis(_))), "{config:?}");
        assert!(run_experiment(&config).is_err());
    }
    let good = ExperimentConfig::new(ExperimentKind::LsdTheorem3, 10, 101, 2, InputLaw::StandardNormal, 1, 0);
    let h = check_hypothesis(&good).unwrap();
    assert_eq!(h.g1, 4);
    assert_eq!(h.gcd_kn, 1);
}

#[test]
fn radial_distance_shrinks_with_n() {
    // k^2 = n - 1 at each size; five seeds per size.
    let means: Vec<f64> = [(10u64, 101u64), (30, 901), (100, 10_001)]
        .iter()
        .map(|&(k, n)| {
            let config = ExperimentConfig::new(ExperimentKind::LsdTheorem3, k, n, 2, InputLaw::StandardNormal, 5, 0);
            run_experiment(&config).unwrap().aggregates["radial_ks_mean"]
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn fuzzed_sweep_fails() {
    let mut config = ExperimentConfig::oracle_sweep(8, 1, 0);
    config.det_pairs = 2;
    assert!(oracle_sweep(&config).unwrap().pass);
    config.fuzz = 1e-3;
    let report = oracle_sweep(&config).unwrap();
    assert!(!report.pass);
    assert!(!report.failures.is_empty());
}
