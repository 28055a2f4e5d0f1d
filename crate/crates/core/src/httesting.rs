//! Optimal measurements, exact n-copy error curves, exponent fits and
//! Monte Carlo simulation of binary hypothesis tests.
//!
//! Outcome conventions: in a two-element decision POVM the first element
//! decides for `rho` (the null) and the second for `sigma`. For general POVMs
//! the decision is the prior-weighted likelihood comparison, `sigma` iff
//! `pi_sigma q_i > pi_rho p_i`, with ties going to the null.

use crate::classical::{check_priors, ProbDist};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::numerics::{
    c, check_dim_cap, eigh, kron_power, matrix_function, support_cutoff, support_power, trace_norm, CMat,
    HermitianMatrix,
};
use crate::qdivergences::{fidelity, q_chernoff, q_relative_entropy, trace_distance, REGULARISATION_EPS};
use crate::states::{born, DensityMatrix, Povm};
use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(())
}

/// Projectors onto the non-negative and negative eigenspaces of
/// `pi_rho rho - pi_sigma sigma`. Zero eigenvalues go to the first element.
pub fn helstrom_povm(rho: &DensityMatrix, sigma: &DensityMatrix, prior_rho: f64, prior_sigma: f64) -> Result<Povm> {
    same_dim(rho, sigma)?;
    check_priors(prior_rho, prior_sigma)?;
    let gamma = rho.herm().scale(prior_rho).sub(&sigma.herm().scale(prior_sigma));
    let es = eigh(&gamma);
    let scale = es.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = 1e-12 * scale;
    let d = rho.dim();
    let mut plus = CMat::zeros(d, d);
    for (k, &v) in es.values.iter().enumerate() {
        if v >= -zero {
            let col = es.vectors.column(k);
            plus += &col * col.adjoint();
        }
    }
    let plus = HermitianMatrix::symmetrised(plus);
    let minus = HermitianMatrix::identity(d).sub(&plus);
    Povm::new(vec![plus, minus])
}

/// Minimum average error achievable from the Born statistics of `povm`.
pub fn povm_error(rho: &DensityMatrix, sigma: &DensityMatrix, povm: &Povm, prior_rho: f64, prior_sigma: f64) -> Result<f64> {
    check_priors(prior_rho, prior_sigma)?;
    let p = born(rho, povm)?;
    let q = born(sigma, povm)?;
    let s: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (prior_rho * a).min(prior_sigma * b)).sum();
    Ok(s)
}

/// Classical fidelity `sum_i sqrt(p_i q_i)` of the Born distributions.
pub fn measured_bhattacharyya(rho: &DensityMatrix, sigma: &DensityMatrix, povm: &Povm) -> Result<f64> {
    let p = born(rho, povm)?;
    let q = born(sigma, povm)?;
    Ok(p.weights().iter().zip(q.weights()).map(|(a, b)| (a * b).sqrt()).sum())
}

fn m_matrix_povm(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Povm> {
    let sr = support_power(rho.herm(), 0.5)?;
    let inv_sr = support_power(rho.herm(), -0.5)?;
    let inner = HermitianMatrix::symmetrised(sr.as_mat() * sigma.as_mat() * sr.as_mat());
    let root = matrix_function(&inner, f64::sqrt)?;
    let m = HermitianMatrix::symmetrised(inv_sr.as_mat() * root.as_mat() * inv_sr.as_mat());
    Povm::projective(&eigh(&m).vectors)
}

/// Rank-one POVM whose Born distributions attain the quantum fidelity.
///
/// Measures in the eigenbasis of `M = rho^{-1/2} sqrt(sqrt(rho) sigma sqrt(rho)) rho^{-1/2}`.
/// When `rho` is singular the construction is repeated on
/// `(1 - eps) rho + eps I/d` at `eps` and `eps/10`; the measured fidelity
/// of the original pair must agree between the two to relative `1e-5`.
pub fn fidelity_optimal_povm(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Povm> {
    same_dim(rho, sigma)?;
    let spec = rho.spectrum();
    if spec.iter().all(|&p| p > support_cutoff(&spec)) {
        return m_matrix_povm(rho, sigma);
    }
    let eps = REGULARISATION_EPS;
    let coarse = m_matrix_povm(&rho.regularised(eps), sigma)?;
    let fine = m_matrix_povm(&rho.regularised(eps / 10.0), sigma)?;
    let a = measured_bhattacharyya(rho, sigma, &coarse)?;
    let b = measured_bhattacharyya(rho, sigma, &fine)?;
    if (a - b).abs() > 1e-5 * b.abs() + 1e-12 {
        return Err(Error::RegularisationFailure(format!(
            "measured fidelity moved from {a} to {b} between eps = {eps:e} and eps/10"
        )));
    }
    Ok(fine)
}

/// Exact n-copy discrimination errors and the fitted exponent.
#[derive(Debug, Clone, Serialize)]
pub struct NCopyReport {
    pub n: Vec<usize>,
    pub errors: Vec<f64>,
    /// `-ln(p_err,n)/n`.
    pub rates: Vec<f64>,
    /// `xi^n`, the Chernoff upper bound on each error.
    pub chernoff_bounds: Vec<f64>,
    pub bounds_hold: bool,
    /// Least-squares slope of `-ln p_err,n` against `n` over `n > n_max/2`.
    pub exponent: ExtReal,
    pub chernoff_information: ExtReal,
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn ncopy_discrimination(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    prior_rho: f64,
    prior_sigma: f64,
    n_max: usize,
) -> Result<NCopyReport> {
    same_dim(rho, sigma)?;
    check_priors(prior_rho, prior_sigma)?;
    if n_max == 0 {
        return Err(Error::DomainError("n_max must be at least 1".into()));
    }
    check_dim_cap((rho.dim() as u128).checked_pow(n_max as u32).unwrap_or(u128::MAX))?;
    let ch = q_chernoff(rho, sigma, None)?;
    let ns: Vec<usize> = (1..=n_max).collect();
    let errors = ns
        .iter()
        .map(|&n| {
            let a = kron_power(rho.as_mat(), n)?;
            let b = kron_power(sigma.as_mat(), n)?;
            let gamma = HermitianMatrix::symmetrised(a * c(prior_rho, 0.0) - b * c(prior_sigma, 0.0));
            Ok((0.5 * (1.0 - trace_norm(&gamma))).clamp(0.0, 0.5))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rates: Vec<f64> = ns.iter().zip(&errors).map(|(&n, &e)| -e.ln() / n as f64).collect();
    let chernoff_bounds: Vec<f64> = ns.iter().map(|&n| ch.xi.powi(n as i32)).collect();
    let bounds_hold = errors.iter().zip(&chernoff_bounds).all(|(e, b)| *e <= b + 1e-12);
    let window: Vec<usize> = ns.iter().copied().filter(|&n| 2 * n > n_max).collect();
    let exponent = if window.iter().any(|&n| errors[n - 1] <= 0.0) {
        ExtReal::Infinite
    } else if window.len() < 2 {
        ExtReal::Finite(rates[n_max - 1])
    } else {
        let x: Vec<f64> = window.iter().map(|&n| n as f64).collect();
        let y: Vec<f64> = window.iter().map(|&n| -errors[n - 1].ln()).collect();
        ExtReal::Finite(slope(&x, &y))
    };
    Ok(NCopyReport { n: ns, errors, rates, chernoff_bounds, bounds_hold, exponent, chernoff_information: ch.information })
}

/// Wilson score interval for `k` successes out of `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let ph = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// An empirical rate with its 99% Wilson interval and the analytic value.
#[derive(Debug, Clone, Serialize)]
pub struct RateEstimate {
    pub count: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub analytic: f64,
    pub within_interval: bool,
}

impl RateEstimate {
    fn new(count: u64, trials: u64, analytic: f64) -> Self {
        let (lower, upper) = wilson_interval(count, trials, Z_99);
        let estimate = if trials == 0 { 0.0 } else { count as f64 / trials as f64 };
        RateEstimate { count, trials, estimate, lower, upper, analytic, within_interval: lower <= analytic && analytic <= upper }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    /// Deciding `sigma` when `rho` was prepared.
    pub type_i: RateEstimate,
    /// Deciding `rho` when `sigma` was prepared.
    pub type_ii: RateEstimate,
    pub average: RateEstimate,
}

const CHUNK: u64 = 1 << 16;

#[derive(Default, Clone, Copy)]
struct Tally {
    n_rho: u64,
    err_rho: u64,
    n_sigma: u64,
    err_sigma: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            n_rho: self.n_rho + o.n_rho,
            err_rho: self.err_rho + o.err_rho,
            n_sigma: self.n_sigma + o.n_sigma,
            err_sigma: self.err_sigma + o.err_sigma,
        }
    }
}

/// Decision rule on outcomes: `true` means "decide sigma".
pub fn likelihood_decisions(p: &ProbDist, q: &ProbDist, prior_rho: f64, prior_sigma: f64) -> Vec<bool> {
    p.weights().iter().zip(q.weights()).map(|(a, b)| prior_sigma * b > prior_rho * a).collect()
}

/// Monte Carlo run of the test: draw the hypothesis from the priors, the
/// outcome from the Born rule, then apply the likelihood decision.
///
/// Trials are split into chunks of `2^16`, each driven by its own ChaCha8
/// stream of `seed`, so results are reproducible regardless of thread count.
pub fn simulate_ht(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    povm: &Povm,
    prior_rho: f64,
    prior_sigma: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    same_dim(rho, sigma)?;
    check_priors(prior_rho, prior_sigma)?;
    if trials == 0 {
        return Err(Error::DomainError("trials must be at least 1".into()));
    }
    let p = born(rho, povm)?;
    let q = born(sigma, povm)?;
    let decide = likelihood_decisions(&p, &q, prior_rho, prior_sigma);
    let alpha: f64 = p.weights().iter().zip(&decide).filter(|(_, d)| **d).map(|(w, _)| w).sum();
    let beta: f64 = q.weights().iter().zip(&decide).filter(|(_, d)| !**d).map(|(w, _)| w).sum();
    let dp = WeightedIndex::new(p.weights()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let dq = WeightedIndex::new(q.weights()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let chunks = trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = CHUNK.min(trials - k * CHUNK);
            let mut t = Tally::default();
            for _ in 0..len {
                if rng.gen::<f64>() < prior_rho {
                    t.n_rho += 1;
                    t.err_rho += decide[dp.sample(&mut rng)] as u64;
                } else {
                    t.n_sigma += 1;
                    t.err_sigma += !decide[dq.sample(&mut rng)] as u64;
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(SimulationReport {
        trials,
        seed,
        type_i: RateEstimate::new(tally.err_rho, tally.n_rho, alpha),
        type_ii: RateEstimate::new(tally.err_sigma, tally.n_sigma, beta),
        average: RateEstimate::new(tally.err_rho + tally.err_sigma, trials, prior_rho * alpha + prior_sigma * beta),
    })
}

/// Best two-copy trace distance reachable by measuring both copies in the
/// same qubit basis, against the collective value.
#[derive(Debug, Clone, Serialize)]
pub struct LocalGapReport {
    pub collective_trace_distance: f64,
    pub best_local_tv: f64,
    /// Bloch angles `(theta, phi)` of the best basis.
    pub best_angles: (f64, f64),
    pub gap: f64,
    pub grid_points: usize,
}

fn qubit_basis(theta: f64, phi: f64) -> CMat {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = crate::numerics::C64::from_polar(1.0, phi);
    let v0 = DVector::from_vec(vec![c(ct, 0.0), e * st]);
    let v1 = DVector::from_vec(vec![c(-st, 0.0), e * ct]);
    CMat::from_columns(&[v0, v1])
}

/// Scans a `grid x grid` mesh of Bloch angles for the product measurement.
pub fn local_gap_witness(rho: &DensityMatrix, sigma: &DensityMatrix, grid: usize) -> Result<LocalGapReport> {
    same_dim(rho, sigma)?;
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(rho.dim(), 2));
    }
    let collective = trace_distance(&rho.tensor_power(2)?, &sigma.tensor_power(2)?)?;
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    for i in 0..grid {
        let theta = std::f64::consts::PI * i as f64 / (grid - 1).max(1) as f64;
        for j in 0..grid {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / grid as f64;
            let povm = Povm::projective(&qubit_basis(theta, phi))?;
            let p = born(rho, &povm)?;
            let q = born(sigma, &povm)?;
            let tv = crate::classical::tv_distance(&p.product(&p), &q.product(&q))?;
            if tv > best.0 {
                best = (tv, (theta, phi));
            }
        }
    }
    Ok(LocalGapReport {
        collective_trace_distance: collective,
        best_local_tv: best.0,
        best_angles: best.1,
        gap: collective - best.0,
        grid_points: grid * grid,
    })
}

/// Type-II errors of the optimal test at type-I level `epsilon`.
#[derive(Debug, Clone, Serialize)]
pub struct SteinReport {
    pub epsilon: f64,
    pub n: Vec<usize>,
    /// May underflow to zero; `rates` are computed in log space.
    pub type_ii: Vec<f64>,
    /// `-ln(beta_n)/n`.
    pub rates: Vec<f64>,
    pub relative_entropy: ExtReal,
    /// Leading coefficient of `-ln beta_n = a n + b sqrt(n) + c` fitted over all `n`.
    pub fitted_rate: f64,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

fn compositions(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        prefix.push(n);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=n {
        prefix.push(first);
        compositions(n - first, k - 1, prefix, out);
        prefix.pop();
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Neyman-Pearson type-II error for `n` i.i.d. copies, exact over types.
pub fn neyman_pearson_type_ii(p: &ProbDist, q: &ProbDist, n: usize, epsilon: f64) -> Result<f64> {
    Ok(neyman_pearson_log_type_ii(p, q, n, epsilon)?.exp())
}

/// `ln beta_n` of the Neyman-Pearson test, computed in log space.
///
/// Types are ordered by log-likelihood ratio; the acceptance region takes
/// whole classes of equal ratio until its `p`-mass reaches `1 - epsilon`, and
/// the boundary class is randomised.
pub fn neyman_pearson_log_type_ii(p: &ProbDist, q: &ProbDist, n: usize, epsilon: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::DomainError(format!("type-I level {epsilon} must lie in [0, 1)")));
    }
    let count = (1..p.len()).fold(1f64, |acc, j| acc * (n + j) as f64 / j as f64);
    if count > 1e7 {
        return Err(Error::DomainError(format!("{count:.3e} types is too many to enumerate")));
    }
    let k = p.len();
    let lf = ln_factorials(n);
    let mut types = Vec::new();
    compositions(n, k, &mut Vec::with_capacity(k), &mut types);
    struct Row {
        llr: f64,
        lp: f64,
        lq: f64,
    }
    let lnw = |w: f64, c: usize| if c == 0 { 0.0 } else { c as f64 * w.ln() };
    let mut rows: Vec<Row> = types
        .iter()
        .map(|t| {
            let mut coef = lf[n];
            let (mut lp, mut lq) = (0.0, 0.0);
            for (i, &c) in t.iter().enumerate() {
                coef -= lf[c];
                lp += lnw(p.weights()[i], c);
                lq += lnw(q.weights()[i], c);
            }
            // Types with q-mass zero (and positive p-mass) have infinite ratio and are accepted first.
            Row { llr: lp - lq, lp: coef + lp, lq: coef + lq }
        })
        .filter(|r| r.lp > f64::NEG_INFINITY)
        .collect();
    rows.sort_by(|a, b| b.llr.total_cmp(&a.llr));
    let target = 1.0 - epsilon;
    let mut mass_p = 0.0f64;
    let mut accepted_q: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let mut j = i + 1;
        let tie = 1e-12 * rows[i].llr.abs().max(1.0);
        while j < rows.len() && (rows[i].llr == rows[j].llr || (rows[i].llr - rows[j].llr).abs() <= tie) {
            j += 1;
        }
        let cls_p = log_sum_exp(&rows[i..j].iter().map(|r| r.lp).collect::<Vec<_>>()).exp();
        let cls_lq = log_sum_exp(&rows[i..j].iter().map(|r| r.lq).collect::<Vec<_>>());
        if mass_p + cls_p >= target {
            let frac = if cls_p > 0.0 { ((target - mass_p) / cls_p).clamp(0.0, 1.0) } else { 0.0 };
            if frac > 0.0 {
                accepted_q.push(frac.ln() + cls_lq);
            }
            break;
        }
        mass_p += cls_p;
        accepted_q.push(cls_lq);
        i = j;
    }
    Ok(log_sum_exp(&accepted_q))
}

/// Least-squares fit of `y = a n + b sqrt(n) + c`; returns `a`.
fn fit_rate(ns: &[usize], y: &[f64]) -> Result<f64> {
    let rows = ns.len();
    if rows < 3 {
        return Err(Error::DomainError("the rate fit needs at least three values of n".into()));
    }
    let a = DMatrix::from_fn(rows, 3, |i, j| {
        let n = ns[i] as f64;
        [n, n.sqrt(), 1.0][j]
    });
    let b = DVector::from_column_slice(y);
    let sol = a.svd(true, true).solve(&b, 1e-12).map_err(|e| Error::DomainError(e.to_string()))?;
    Ok(sol[0])
}

/// Classical Stein exponent study: exact optimal `beta_n` at level `epsilon`.
pub fn stein_classical(p: &ProbDist, q: &ProbDist, epsilon: f64, ns: &[usize]) -> Result<SteinReport> {
    let logs = ns.iter().map(|&n| Ok(-neyman_pearson_log_type_ii(p, q, n, epsilon)?)).collect::<Result<Vec<f64>>>()?;
    let type_ii = logs.iter().map(|l| (-l).exp()).collect();
    let rates = ns.iter().zip(&logs).map(|(&n, l)| l / n as f64).collect();
    Ok(SteinReport {
        epsilon,
        n: ns.to_vec(),
        type_ii,
        rates,
        relative_entropy: crate::classical::kl_divergence(p, q)?,
        fitted_rate: fit_rate(ns, &logs)?,
    })
}

/// Quantum Stein study at small `n`, using the projector test `{rho^n - t sigma^n > 0}`.
#[derive(Debug, Clone, Serialize)]
pub struct QuantumSteinReport {
    pub epsilon: f64,
    pub n: Vec<usize>,
    pub type_i: Vec<f64>,
    pub type_ii: Vec<f64>,
    pub rates: Vec<f64>,
    pub relative_entropy: ExtReal,
    /// Weak-converse ceilings `(D + ln 2 / n)/(1 - epsilon)` on any rate at level `epsilon`.
    pub converse: Vec<f64>,
    pub converse_holds: bool,
}

fn projector_test(a: &CMat, b: &CMat, t: f64) -> (f64, f64) {
    let gamma = HermitianMatrix::symmetrised(a - b * c(t, 0.0));
    let es = eigh(&gamma);
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for (k, &v) in es.values.iter().enumerate() {
        if v > 0.0 {
            let col = es.vectors.column(k);
            acc_a += (col.adjoint() * a * col)[(0, 0)].re;
            acc_b += (col.adjoint() * b * col)[(0, 0)].re;
        }
    }
    (1.0 - acc_a, acc_b)
}

pub fn stein_quantum(rho: &DensityMatrix, sigma: &DensityMatrix, epsilon: f64, n_max: usize) -> Result<QuantumSteinReport> {
    same_dim(rho, sigma)?;
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::DomainError(format!("type-I level {epsilon} must lie in (0, 1)")));
    }
    let d = q_relative_entropy(rho, sigma)?;
    let mut out = QuantumSteinReport {
        epsilon,
        n: Vec::new(),
        type_i: Vec::new(),
        type_ii: Vec::new(),
        rates: Vec::new(),
        relative_entropy: d,
        converse: Vec::new(),
        converse_holds: true,
    };
    for n in 1..=n_max {
        let a = kron_power(rho.as_mat(), n)?;
        let b = kron_power(sigma.as_mat(), n)?;
        // Type-I error grows with t; find the largest t still within level.
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        if projector_test(&a, &b, lo.exp()).0 > epsilon {
            hi = lo;
        }
        for _ in 0..100 {
            if hi - lo < 1e-10 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if projector_test(&a, &b, mid.exp()).0 <= epsilon {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ti, tii) = projector_test(&a, &b, lo.exp());
        let rate = -tii.ln() / n as f64;
        let ceiling = d.map(|v| (v + 2f64.ln() / n as f64) / (1.0 - epsilon));
        if let ExtReal::Finite(cv) = ceiling {
            if rate > cv + 1e-9 {
                out.converse_holds = false;
            }
        }
        out.n.push(n);
        out.type_i.push(ti);
        out.type_ii.push(tii);
        out.rates.push(rate);
        out.converse.push(ceiling.to_f64());
    }
    Ok(out)
}

/// `F(rho^{(x)n}, sigma^{(x)n})` measured with the n-fold product of the
/// single-copy fidelity-optimal POVM, against `F(rho, sigma)^n`.
pub fn product_povm_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<(f64, f64)> {
    let single = fidelity_optimal_povm(rho, sigma)?;
    let mut povm = single.clone();
    for _ in 1..n {
        povm = povm.kron(&single);
    }
    let measured = measured_bhattacharyya(&rho.tensor_power(n)?, &sigma.tensor_power(n)?, &povm)?;
    Ok((measured, fidelity(rho, sigma)?.powi(n as i32)))
}
