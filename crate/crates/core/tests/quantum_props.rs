use proptest::prelude::*;
use qig::classical::{self, ConvexGenerator};
use qig::numerics::{random_channel, random_density};
use qig::qdivergences::{
    affinity, audit_quantum, bures_distance, fidelity, q_chernoff, q_relative_entropy, q_renyi, quantum_f_divergence,
    rescaled_tsallis, trace_distance, tsallis,
};
use qig::states::{apply_channel, born, random_povm, DensityMatrix};
use qig::ExtReal;

fn le(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (_, ExtReal::Infinite) => true,
        (ExtReal::Infinite, ExtReal::Finite(_)) => false,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => x <= y + tol * y.abs().max(1.0),
    }
}

/// Every divergence the crate exposes, as `(name, value)`.
fn divergences(r: &DensityMatrix, s: &DensityMatrix) -> Vec<(String, ExtReal)> {
    let fin = ExtReal::Finite;
    let mut out = vec![
        ("trace".to_string(), fin(trace_distance(r, s).unwrap())),
        ("bures".to_string(), fin(bures_distance(r, s).unwrap())),
        ("one-minus-affinity".to_string(), fin(1.0 - affinity(r, s).unwrap())),
        ("relent".to_string(), q_relative_entropy(r, s).unwrap()),
        ("chernoff".to_string(), q_chernoff(r, s, None).unwrap().information),
    ];
    for a in [0.25, 0.5, 0.75, 1.5, 2.0] {
        out.push((format!("tsallis:{a}"), tsallis(r, s, a).unwrap()));
        out.push((format!("renyi:{a}"), q_renyi(r, s, a).unwrap()));
    }
    for f in [ConvexGenerator::kl(), ConvexGenerator::squared_hellinger(), ConvexGenerator::chi_squared()] {
        out.push((f.name().to_string(), quantum_f_divergence(r, s, &f).unwrap()));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_monotonicity(seed in any::<u64>(), d in 2usize..5, rank in 1usize..5, k in 1usize..4) {
        let r = random_density(d, rank.min(d), seed).unwrap();
        let s = random_density(d, d, seed ^ 0xfeed).unwrap();
        let ch = random_channel(d, k, seed.wrapping_mul(3)).unwrap();
        let (lr, ls) = (apply_channel(&ch, &r).unwrap(), apply_channel(&ch, &s).unwrap());
        for ((name, before), (_, after)) in divergences(&r, &s).into_iter().zip(divergences(&lr, &ls)) {
            prop_assert!(le(after, before, 1e-9), "{name}: {after:?} > {before:?}");
        }
    }

    #[test]
    fn measured_divergences_are_dominated(seed in any::<u64>(), d in 2usize..4, outcomes in 2usize..6) {
        let r = random_density(d, d, seed).unwrap();
        let s = random_density(d, d, seed ^ 1).unwrap();
        let m = random_povm(d, outcomes, seed ^ 2).unwrap();
        let (p, q) = (born(&r, &m).unwrap(), born(&s, &m).unwrap());
        prop_assert!(classical::tv_distance(&p, &q).unwrap() <= trace_distance(&r, &s).unwrap() + 1e-10);
        prop_assert!(le(classical::kl_divergence(&p, &q).unwrap(), q_relative_entropy(&r, &s).unwrap(), 1e-10));
        prop_assert!(classical::chernoff(&p, &q, None).unwrap().xi >= q_chernoff(&r, &s, None).unwrap().xi - 1e-10);
        let bc: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a * b).sqrt()).sum();
        prop_assert!(bc >= fidelity(&r, &s).unwrap() - 1e-10);
    }

    #[test]
    fn classical_reduction(seed in any::<u64>(), n in 2usize..6) {
        let (p, q) = (classical::random_prob_dist(n, seed), classical::random_prob_dist(n, seed ^ 9));
        let (r, s) = (DensityMatrix::diag(p.weights()).unwrap(), DensityMatrix::diag(q.weights()).unwrap());
        prop_assert!((trace_distance(&r, &s).unwrap() - classical::tv_distance(&p, &q).unwrap()).abs() < 1e-10);
        prop_assert!((fidelity(&r, &s).unwrap() - classical::chernoff_coefficient(&p, &q, 0.5).unwrap()).abs() < 1e-10);
        prop_assert!((q_relative_entropy(&r, &s).unwrap().to_f64() - classical::kl_divergence(&p, &q).unwrap().to_f64()).abs() < 1e-10);
        let (qc, cc) = (q_chernoff(&r, &s, None).unwrap(), classical::chernoff(&p, &q, None).unwrap());
        prop_assert!((qc.xi - cc.xi).abs() < 1e-10);
        for a in [0.3, 1.5] {
            let t = tsallis(&r, &s, a).unwrap().to_f64();
            let h = classical::hellinger_divergence(&p, &q, a).unwrap().to_f64();
            prop_assert!((t - h).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_state_identities(seed in any::<u64>(), d in 2usize..5) {
        let (r, s) = (random_density(d, 1, seed).unwrap(), random_density(d, 1, seed ^ 4).unwrap());
        let overlap = (r.as_mat() * s.as_mat()).trace().re.max(0.0);
        let c = overlap.sqrt();
        prop_assert!((fidelity(&r, &s).unwrap() - c).abs() < 1e-10);
        prop_assert!((trace_distance(&r, &s).unwrap() - (1.0 - overlap).sqrt()).abs() < 1e-10);
        for a in [0.2, 0.5, 0.9] {
            prop_assert!((q_chernoff(&r, &s, Some(a)).unwrap().xi_alpha.unwrap() - overlap).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_quantities(seed in any::<u64>(), d in 2usize..5) {
        let (r, s) = (random_density(d, d, seed).unwrap(), random_density(d, 2.min(d), seed ^ 3).unwrap());
        prop_assert!((trace_distance(&r, &s).unwrap() - trace_distance(&s, &r).unwrap()).abs() < 1e-12);
        prop_assert!((fidelity(&r, &s).unwrap() - fidelity(&s, &r).unwrap()).abs() < 1e-12);
        prop_assert!((affinity(&r, &s).unwrap() - affinity(&s, &r).unwrap()).abs() < 1e-12);
        prop_assert!((q_chernoff(&r, &s, None).unwrap().xi - q_chernoff(&s, &r, None).unwrap().xi).abs() < 1e-12);
    }

    #[test]
    fn audit_has_no_failures(seed in any::<u64>(), d in 2usize..5, rank in 1usize..5) {
        let r = random_density(d, rank.min(d), seed).unwrap();
        let s = random_density(d, d, seed ^ 0x77).unwrap();
        let rep = audit_quantum(&r, &s).unwrap();
        let bad: Vec<_> = rep.failures().collect();
        prop_assert!(rep.all_pass, "{bad:?}");
    }
}

#[test]
fn relative_entropy_is_asymmetric() {
    let r = DensityMatrix::diag(&[0.9, 0.1]).unwrap();
    let s = DensityMatrix::diag(&[0.5, 0.5]).unwrap();
    let a = q_relative_entropy(&r, &s).unwrap().to_f64();
    let b = q_relative_entropy(&s, &r).unwrap().to_f64();
    assert!((a - b).abs() > 0.1);
}

#[test]
fn rescaled_tsallis_scales() {
    let (r, s) = (random_density(3, 3, 1).unwrap(), random_density(3, 3, 2).unwrap());
    let t = tsallis(&r, &s, 0.4).unwrap().to_f64();
    assert!((rescaled_tsallis(&r, &s, 0.4).unwrap().to_f64() - t / 0.4).abs() < 1e-14);
}

#[test]
fn orthogonal_supports() {
    let (r, s) = (DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1));
    assert_eq!(q_relative_entropy(&r, &s).unwrap(), ExtReal::Infinite);
    assert_eq!(fidelity(&r, &s).unwrap(), 0.0);
    assert_eq!(q_chernoff(&r, &s, None).unwrap().information, ExtReal::Infinite);
}
