use proptest::prelude::*;
use qig::applications::{clausius_report, cramer_rao_classical, cramer_rao_quantum, speed_limit, thermal_state, ThermalSpec};
use qig::classical::ClassicalFamily;
use qig::httesting::{helstrom_povm, ncopy_discrimination, povm_error};
use qig::numerics::{random_channel, random_density, random_hermitian};
use qig::qdivergences::{q_min_error, trace_distance};
use qig::qmetrics::GFunction;
use qig::states::{apply_channel, born, random_povm, StateFamily};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn helstrom_is_optimal(seed in any::<u64>(), d in 2usize..4, prior in 0.1f64..0.9) {
        let (r, s) = (random_density(d, d, seed).unwrap(), random_density(d, 1 + (seed as usize) % d, seed ^ 2).unwrap());
        let h = helstrom_povm(&r, &s, prior, 1.0 - prior).unwrap();
        let best = povm_error(&r, &s, &h, prior, 1.0 - prior).unwrap();
        prop_assert!((best - q_min_error(&r, &s, prior, 1.0 - prior, 1).unwrap()).abs() < 1e-10);
        for k in 0..20u64 {
            let m = random_povm(d, 2 + (k as usize) % 4, seed.wrapping_add(k)).unwrap();
            prop_assert!(povm_error(&r, &s, &m, prior, 1.0 - prior).unwrap() >= best - 1e-10);
        }
    }

    #[test]
    fn chernoff_brackets_ncopy_errors(seed in any::<u64>()) {
        let (r, s) = (random_density(2, 2, seed).unwrap(), random_density(2, 2, seed ^ 6).unwrap());
        let rep = ncopy_discrimination(&r, &s, 0.5, 0.5, 5).unwrap();
        prop_assert!(rep.bounds_hold);
        for (n, e) in rep.n.iter().zip(&rep.errors) {
            let t = trace_distance(&r.tensor_power(*n).unwrap(), &s.tensor_power(*n).unwrap()).unwrap();
            prop_assert!((e - 0.5 * (1.0 - t)).abs() < 1e-12);
        }
        prop_assert!(rep.errors.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn quantum_cramer_rao_dominates(seed in any::<u64>(), d in 2usize..4) {
        let fam = StateFamily::unitary(random_density(d, d, seed).unwrap(), random_hermitian(d, seed ^ 1)).unwrap();
        let q = cramer_rao_quantum(&fam, 0.1, 1).unwrap().information;
        for k in 0..5u64 {
            let povm = random_povm(d, 3, seed.wrapping_add(k)).unwrap();
            let f = fam.clone();
            let cf = ClassicalFamily::new(1, move |x| born(&f.evaluate(x)?, &povm)).finite_difference();
            prop_assert!(cramer_rao_classical(&cf, 0.1, 1).unwrap().information <= q + 1e-8);
        }
    }

    #[test]
    fn speed_limit_holds(seed in any::<u64>(), gamma in 0.0f64..1.0, tau in 0.1f64..3.0) {
        let rho0 = random_density(2, 2, seed).unwrap();
        let fam = StateFamily::noisy_unitary(rho0, random_hermitian(2, seed ^ 4), gamma).unwrap();
        for g in [GFunction::qfi(), GFunction::wyd(0.5).unwrap()] {
            let r = speed_limit(&fam, tau, &g, 101).unwrap();
            prop_assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn clausius_identity(seed in any::<u64>(), beta in 0.1f64..3.0, d in 2usize..5) {
        let spec = ThermalSpec::new(random_hermitian(d, seed), beta, random_hermitian(d, seed ^ 1)).unwrap();
        let out = apply_channel(&random_channel(d, 2, seed ^ 2).unwrap(), &thermal_state(&spec)).unwrap();
        let r = clausius_report(&spec, &out).unwrap();
        prop_assert!(r.identity_holds && r.clausius_holds, "{r:?}");
    }
}
