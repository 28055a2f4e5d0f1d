//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use nalgebra::DMatrix;
use qig::applications::{
    clausius_report, km_information, km_perturbation, speed_limit, thermal_state, ThermalSpec,
};
use qig::classical::{
    self, apply_stochastic, audit_classical, chernoff_coefficient, f_divergence, fisher_metric, induced_metric_numerical,
    random_prob_dist, random_stochastic, renyi_divergence, tv_distance, ClassicalFamily, ConvexGenerator,
};
use qig::httesting::{helstrom_povm, ncopy_discrimination, product_povm_fidelity, simulate_ht};
use qig::numerics::{random_channel, random_density, random_hermitian, trace_norm, HermitianMatrix};
use qig::qdivergences::{
    affinity, audit_quantum, bures_distance, fidelity, q_chernoff, q_relative_entropy, q_renyi, quantum_f_divergence,
    rescaled_tsallis, trace_distance, tsallis,
};
use qig::qmetrics::{g_metric, induced_metric_numerical_q, min_eigenvalue, qfi_metric_sld, GFunction};
use qig::states::{apply_channel, DensityMatrix, StateFamily};
use qig::{Error, ExtReal, Result};
use rand::Rng;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn traceless(d: usize, seed: u64) -> HermitianMatrix {
    let h = random_hermitian(d, seed);
    h.sub(&HermitianMatrix::identity(d).scale(h.trace_re() / d as f64))
}

/// Linear family through a full-rank state with small traceless directions.
fn linear_family(d: usize, params: usize, seed: u64) -> StateFamily {
    let rho0 = random_density(d, d, seed).unwrap();
    let dirs = (0..params).map(|k| traceless(d, seed ^ (k as u64 + 1)).scale(0.1)).collect();
    StateFamily::linear(rho0, dirs).unwrap()
}

fn unitary_family(d: usize, seed: u64) -> StateFamily {
    StateFamily::unitary(random_density(d, d, seed).unwrap(), random_hermitian(d, seed ^ 5)).unwrap()
}

fn le(after: ExtReal, before: ExtReal, tol: f64) -> bool {
    match (after, before) {
        (_, ExtReal::Infinite) => true,
        (ExtReal::Infinite, ExtReal::Finite(_)) => false,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => x <= y + tol * y.abs().max(1.0),
    }
}

fn chentsov() -> Result<Outcome> {
    let start = Instant::now();
    let gens = [
        ConvexGenerator::kl(),
        ConvexGenerator::hellinger(0.25)?,
        ConvexGenerator::hellinger(0.5)?,
        ConvexGenerator::hellinger(0.75)?,
        ConvexGenerator::tsallis(1.5)?,
    ];
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let fam = ClassicalFamily::random_softmax(4, 2, 1000 + seed);
        let phi = [0.1, -0.2];
        let fisher = fisher_metric(&fam, &phi)?;
        for g in &gens {
            let h = induced_metric_numerical(|p, q| f_divergence(p, q, g), &fam, &phi)?;
            worst = worst.max(rel_err(&h, &(&fisher * g.second_derivative_at_one()?)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-2 && secs < 30.0, format!("max rel err {worst:.2e}, {secs:.1}s"))
}

fn table_ii() -> Result<Outcome> {
    let alpha = 0.3;
    let wyd = GFunction::wyd(alpha)?;
    let mut worst = [0.0f64; 4];
    let mut non_smooth = 0;
    for seed in 0..20u64 {
        let d = 2 + (seed % 2) as usize;
        let fam = linear_family(d, 2, 2000 + seed);
        let phi = [0.0, 0.0];
        let qfi = g_metric(&fam, &phi, &GFunction::qfi())?.matrix;
        let w = g_metric(&fam, &phi, &wyd)?.matrix;
        let km = g_metric(&fam, &phi, &GFunction::km())?.matrix;
        let bures = induced_metric_numerical_q(|a, b| Ok(ExtReal::Finite(bures_distance(a, b)?)), &fam, &phi)?;
        let rt = induced_metric_numerical_q(|a, b| rescaled_tsallis(a, b, alpha), &fam, &phi)?;
        let ren = induced_metric_numerical_q(|a, b| q_renyi(a, b, alpha), &fam, &phi)?;
        let rel = induced_metric_numerical_q(q_relative_entropy, &fam, &phi)?;
        for (k, e) in [
            rel_err(&bures, &(&qfi * 0.5)),
            rel_err(&rt, &w),
            rel_err(&ren, &(&w * alpha)),
            rel_err(&rel, &km),
        ]
        .into_iter()
        .enumerate()
        {
            worst[k] = worst[k].max(e);
        }
        let t = induced_metric_numerical_q(|a, b| Ok(ExtReal::Finite(trace_distance(a, b)?)), &fam, &phi);
        non_smooth += matches!(t, Err(Error::NonSmoothDivergence { .. })) as usize;
    }
    let pass = worst.iter().all(|&e| e < 1e-2) && non_smooth == 20;
    outcome(
        pass,
        format!(
            "max rel err bures {:.1e}, tsallis {:.1e}, renyi {:.1e}, relent {:.1e}; trace non-smooth {non_smooth}/20",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn hierarchy() -> Result<Outcome> {
    let gs = [GFunction::wyd(-0.5)?, GFunction::wyd(0.25)?, GFunction::wyd(0.5)?, GFunction::km()];
    let mut worst = f64::INFINITY;
    for seed in 0..200u64 {
        let fam = unitary_family(2, 3000 + seed);
        let q = g_metric(&fam, &[0.0], &GFunction::qfi())?.matrix;
        let r = g_metric(&fam, &[0.0], &GFunction::rld())?.matrix;
        for g in &gs {
            let m = g_metric(&fam, &[0.0], g)?.matrix;
            worst = worst.min(min_eigenvalue(&(&m - &q))).min(min_eigenvalue(&(&r - &m)));
        }
    }
    outcome(worst >= -1e-9, format!("min eigenvalue {worst:.2e}"))
}

fn classical_divergences(p: &classical::ProbDist, q: &classical::ProbDist) -> Result<Vec<ExtReal>> {
    let mut out = vec![ExtReal::Finite(tv_distance(p, q)?)];
    for f in [
        ConvexGenerator::kl(),
        ConvexGenerator::reverse_kl(),
        ConvexGenerator::chi_squared(),
        ConvexGenerator::squared_hellinger(),
        ConvexGenerator::hellinger(0.3)?,
        ConvexGenerator::tsallis(1.7)?,
    ] {
        out.push(f_divergence(p, q, &f)?);
    }
    for a in [0.25, 0.5, 2.0] {
        out.push(renyi_divergence(p, q, a)?);
    }
    for a in [0.25, 0.5, 0.75] {
        out.push(ExtReal::Finite(1.0 - chernoff_coefficient(p, q, a)?));
    }
    out.push(ExtReal::Finite(1.0 - classical::chernoff(p, q, None)?.xi));
    Ok(out)
}

fn quantum_divergences(r: &DensityMatrix, s: &DensityMatrix) -> Result<Vec<ExtReal>> {
    let fin = ExtReal::Finite;
    let mut out = vec![
        fin(trace_distance(r, s)?),
        fin(bures_distance(r, s)?),
        fin(1.0 - affinity(r, s)?),
        fin(1.0 - fidelity(r, s)?),
        q_relative_entropy(r, s)?,
        q_chernoff(r, s, None)?.information,
    ];
    for a in [0.25, 0.5, 0.75, 1.5, 2.0] {
        out.push(tsallis(r, s, a)?);
        out.push(q_renyi(r, s, a)?);
    }
    for f in [ConvexGenerator::kl(), ConvexGenerator::squared_hellinger(), ConvexGenerator::chi_squared()] {
        out.push(quantum_f_divergence(r, s, &f)?);
    }
    Ok(out)
}

fn monotonicity() -> Result<Outcome> {
    let mut rng = qig::numerics::rng_from_seed(4000);
    let mut classical_bad = 0;
    for k in 0..500u64 {
        let (n, m) = (rng.gen_range(2..8), rng.gen_range(2..8));
        let (p, q) = (random_prob_dist(n, 5000 + 2 * k), random_prob_dist(n, 5001 + 2 * k));
        let s = random_stochastic(m, n, 7000 + k);
        let before = classical_divergences(&p, &q)?;
        let after = classical_divergences(&apply_stochastic(&s, &p)?, &apply_stochastic(&s, &q)?)?;
        classical_bad += before.iter().zip(&after).filter(|(b, a)| !le(**a, **b, 1e-9)).count();
    }
    let gs = [
        GFunction::qfi(),
        GFunction::wyd(-0.5)?,
        GFunction::wyd(0.25)?,
        GFunction::wyd(0.5)?,
        GFunction::km(),
        GFunction::rld(),
    ];
    let (mut quantum_bad, mut metric_bad) = (0, 0);
    for k in 0..500u64 {
        let d = rng.gen_range(2..5);
        let rank = rng.gen_range(1..=d);
        let kraus = rng.gen_range(1..4);
        let r = random_density(d, rank, 8000 + k)?;
        let s = random_density(d, d, 9000 + k)?;
        let ch = random_channel(d, kraus, 10_000 + k)?;
        let before = quantum_divergences(&r, &s)?;
        let after = quantum_divergences(&apply_channel(&ch, &r)?, &apply_channel(&ch, &s)?)?;
        quantum_bad += before.iter().zip(&after).filter(|(b, a)| !le(**a, **b, 1e-9)).count();
        let fam = linear_family(d, 2, 11_000 + k);
        let mapped = fam.clone().mapped(ch)?;
        for g in &gs {
            let b = g_metric(&fam, &[0.0, 0.0], g)?.matrix;
            let a = g_metric(&mapped, &[0.0, 0.0], g)?.matrix;
            metric_bad += (min_eigenvalue(&(b - a)) < -1e-9) as usize;
        }
    }
    outcome(
        classical_bad + quantum_bad + metric_bad == 0,
        format!("violations: classical {classical_bad}, quantum {quantum_bad}, g-metric {metric_bad}"),
    )
}

fn chernoff_exponent() -> Result<Outcome> {
    let start = Instant::now();
    let rep = ncopy_discrimination(&DensityMatrix::basis(2, 0), &DensityMatrix::plus(), 0.5, 0.5, 10)?;
    let mut worst = 0.0f64;
    let mut bound_ok = true;
    for (n, e) in rep.n.iter().zip(&rep.errors) {
        let two_n = 0.5f64.powi(*n as i32);
        worst = worst.max((e - 0.5 * (1.0 - (1.0 - two_n).sqrt())).abs());
        bound_ok &= *e <= two_n;
    }
    let exponent = rep.exponent.to_f64();
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-12 && bound_ok && (exponent - 2f64.ln()).abs() < 0.05 && secs < 10.0;
    outcome(pass, format!("max err {worst:.1e}, bounds hold {bound_ok}, exponent {exponent:.4}, {secs:.2}s"))
}

fn fidelity_attainability() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let r = random_density(2, 2, 12_000 + seed)?.regularised(1e-3);
        let s = random_density(2, 2, 13_000 + seed)?.regularised(1e-3);
        for n in 1..=4 {
            let (measured, target) = product_povm_fidelity(&r, &s, n)?;
            worst = worst.max((measured - target).abs());
        }
    }
    outcome(worst < 1e-7, format!("max |F_measured - F^n| {worst:.1e}"))
}

fn audits() -> Result<Outcome> {
    let mut rng = qig::numerics::rng_from_seed(14_000);
    let (mut c_bad, mut q_bad) = (0, 0);
    for k in 0..1000u64 {
        let n = rng.gen_range(2..9);
        let rep = audit_classical(&random_prob_dist(n, 15_000 + 2 * k), &random_prob_dist(n, 15_001 + 2 * k))?;
        c_bad += rep.failures().count();
        let d = rng.gen_range(2..5);
        let rank = rng.gen_range(1..=d);
        let rep = audit_quantum(&random_density(d, rank, 18_000 + k)?, &random_density(d, d, 19_000 + k)?)?;
        q_bad += rep.failures().count();
    }
    outcome(c_bad + q_bad == 0, format!("failures: classical {c_bad}, quantum {q_bad}"))
}

fn derivative_bounds() -> Result<Outcome> {
    let mut worst_c = f64::INFINITY;
    let mut worst_q = f64::INFINITY;
    for seed in 0..200u64 {
        let n = 2 + (seed % 6) as usize;
        let fam = ClassicalFamily::random_softmax(n, 1, 20_000 + seed);
        let phi = [0.3];
        let l1: f64 = fam.derivatives(&phi)?[0].iter().map(|x| x.abs()).sum();
        worst_c = worst_c.min(fisher_metric(&fam, &phi)?[(0, 0)] - l1 * l1);
        let d = 2 + (seed % 3) as usize;
        let qfam = if seed % 2 == 0 { unitary_family(d, 21_000 + seed) } else { linear_family(d, 1, 21_000 + seed) };
        let deriv = &qfam.derivatives(&[0.0])?[0];
        worst_q = worst_q.min(qfi_metric_sld(&qfam, &[0.0])?.matrix[(0, 0)] - trace_norm(deriv).powi(2));
    }
    outcome(
        worst_c >= -1e-9 && worst_q >= -1e-9,
        format!("min slack classical {worst_c:.2e}, quantum {worst_q:.2e}"),
    )
}

fn desk_values() -> Result<Outcome> {
    let p = 0.25;
    let fam = StateFamily::unitary(DensityMatrix::diag(&[p, 1.0 - p])?, HermitianMatrix::pauli_x().scale(0.5))?;
    // Eigenbasis sum: two off-diagonal terms |(d rho)_01|^2 = (1-2p)^2 / 4, kernel 1/(big g(small/big)).
    let (small, big) = (p, 1.0 - p);
    let t = small / big;
    let oracle = |g: f64| 2.0 * (1.0 - 2.0 * p).powi(2) / 4.0 / (big * g);
    let cases = [
        ("qfi", GFunction::qfi(), oracle((1.0 + t) / 2.0), 0.25),
        ("wyd:0.5", GFunction::wyd(0.5)?, oracle(0.25 * (t.sqrt() + 1.0).powi(2)), 0.26795),
        ("km", GFunction::km(), oracle((t - 1.0) / t.ln()), 0.27465),
        ("rld", GFunction::rld(), oracle(2.0 * t / (1.0 + t)), 1.0 / 3.0),
    ];
    let mut values = Vec::new();
    let mut pass = true;
    for (name, g, reference, printed) in &cases {
        let v = g_metric(&fam, &[0.0], g)?.scalar().to_f64();
        pass &= (v - reference).abs() < 1e-6 && (v - printed).abs() < 1e-5;
        values.push(format!("{name} {v:.6}"));
    }
    let ascending = cases.windows(2).all(|w| w[0].2 < w[1].2);
    outcome(pass && ascending, format!("{}; ascending {ascending}", values.join(", ")))
}

fn thermodynamics() -> Result<Outcome> {
    let mut rng = qig::numerics::rng_from_seed(22_000);
    let (mut worst_identity, mut worst_var) = (0.0f64, 0.0f64);
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..20u64 {
        let h = random_hermitian(2, 23_000 + k);
        let beta = rng.gen_range(0.2..2.0);
        let spec = ThermalSpec::new(h.clone(), beta, random_hermitian(2, 24_000 + k))?;
        let rep = clausius_report(&spec, &random_density(2, 2, 25_000 + k)?)?;
        worst_identity = worst_identity.max(rep.identity_residual);
        let self_spec = ThermalSpec::new(h.clone(), beta, h.clone())?;
        worst_var = worst_var.max((km_information(&self_spec)? - thermal_state(&self_spec).variance(&h)).abs());
        let ratio = km_perturbation(&spec, 1e-3)?.residual_ratio;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let pass = worst_identity < 1e-9 && worst_var < 1e-9 && min_ratio >= 6.5 && max_ratio <= 9.5;
    outcome(
        pass,
        format!(
            "clausius residual {worst_identity:.1e}, |KMI - Var| {worst_var:.1e}, residual ratio in [{min_ratio:.3}, {max_ratio:.3}]"
        ),
    )
}

fn speed_limits() -> Result<Outcome> {
    let pure = StateFamily::unitary(DensityMatrix::basis(2, 0), HermitianMatrix::pauli_x().scale(0.5))?;
    let rep = speed_limit(&pure, 1.0, &GFunction::qfi(), 201)?;
    let saturation = (rep.tau_min - rep.tau).abs() / rep.tau;
    let mut rng = qig::numerics::rng_from_seed(26_000);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for k in 0..50u64 {
        let rho0 = random_density(2, 2, 27_000 + k)?;
        let fam = StateFamily::noisy_unitary(rho0, random_hermitian(2, 28_000 + k), rng.gen_range(0.05..1.0))?;
        let g = if k % 2 == 0 { GFunction::qfi() } else { GFunction::wyd(0.5)? };
        let r = speed_limit(&fam, rng.gen_range(0.2..3.0), &g, 201)?;
        failures += !r.pass as usize;
        worst = worst.min(r.tau - r.tau_min);
    }
    outcome(
        saturation < 1e-6 && failures == 0,
        format!("pure saturation {saturation:.1e}; noisy failures {failures}/50, min tau - tau_min {worst:.2e}"),
    )
}

fn monte_carlo() -> Result<Outcome> {
    let mut outside = Vec::new();
    for k in 0..20u64 {
        let r = random_density(2, 2, 29_000 + k)?;
        let s = random_density(2, 2, 30_000 + k)?;
        let povm = helstrom_povm(&r, &s, 0.5, 0.5)?;
        let rep = simulate_ht(&r, &s, &povm, 0.5, 0.5, 1_000_000, k)?;
        if !rep.average.within_interval {
            outside.push(k);
        }
    }
    outcome(outside.is_empty(), format!("outside the 99% interval: {}/20 {outside:?}", outside.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("chentsov proportionality", chentsov),
        ("hessian identifications", table_ii),
        ("metric hierarchy", hierarchy),
        ("monotonicity", monotonicity),
        ("quantum chernoff exponent", chernoff_exponent),
        ("fidelity attainability", fidelity_attainability),
        ("inequality audits", audits),
        ("derivative bounds", derivative_bounds),
        ("desk-scale metric values", desk_values),
        ("thermodynamics", thermodynamics),
        ("speed limit", speed_limits),
        ("monte carlo consistency", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !pass as usize;
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
