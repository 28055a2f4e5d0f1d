//! Discrete distributions, classical divergences, the Fisher metric and the
//! classical inequality audit.
//!
//! Conventions:
//! - `f`-divergences are `sum_i p_i f(q_i / p_i)`. Outcomes outside the
//!   support of `p` contribute `q_i * lim f(t)/t`; shared null outcomes
//!   contribute nothing.
//! - Chernoff coefficients `xi_alpha = sum p^alpha q^(1-alpha)` run over the
//!   intersection of the supports.
//! - Infinite values are [`ExtReal::Infinite`], never `f64::INFINITY`.

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::numerics::{check_dim_cap, richardson_hessian, rng_from_seed, DERIVATIVE_ZERO_TOL, SUPPORT_REL};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Tolerance on `sum p_i = 1` for validated distributions.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Looser tolerance for distributions read from files or produced by the Born rule.
pub const PROB_LOAD_TOL: f64 = 1e-9;
/// Slack below which an audited inequality counts as violated.
pub const AUDIT_TOL: f64 = 1e-10;

/// A finite probability vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    /// Strict constructor: weights non-negative and summing to 1 within `1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::check(&weights, PROB_SUM_TOL)?;
        Ok(ProbDist(weights))
    }

    /// Accepts a sum within `1e-9` of 1 (and tiny negative drift), then renormalises exactly.
    pub fn from_lenient(weights: Vec<f64>) -> Result<Self> {
        Self::check_with_clip(&weights, PROB_LOAD_TOL)?;
        let w: Vec<f64> = weights.into_iter().map(|x| x.max(0.0)).collect();
        let s: f64 = w.iter().sum();
        Ok(ProbDist(w.into_iter().map(|x| x / s).collect()))
    }

    fn check(w: &[f64], tol: f64) -> Result<()> {
        if w.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if let Some(x) = w.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("weight {x} is not a finite non-negative number")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}, not 1")));
        }
        Ok(())
    }

    fn check_with_clip(w: &[f64], tol: f64) -> Result<()> {
        let clipped: Vec<f64> = w.iter().map(|&x| if (-tol..0.0).contains(&x) { 0.0 } else { x }).collect();
        Self::check(&clipped, tol)
    }

    pub fn uniform(n: usize) -> Self {
        ProbDist(vec![1.0 / n as f64; n])
    }

    /// Point mass on outcome `k` of `n`.
    pub fn delta(n: usize, k: usize) -> Self {
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        ProbDist(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Joint distribution of independent outcomes, `self` as the slow index.
    pub fn product(&self, other: &ProbDist) -> ProbDist {
        let mut w = Vec::with_capacity(self.len() * other.len());
        for &a in &self.0 {
            for &b in &other.0 {
                w.push(a * b);
            }
        }
        ProbDist(w)
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &ProbDist, lambda: f64) -> Result<ProbDist> {
        same_len(self, other)?;
        Ok(ProbDist(self.0.iter().zip(&other.0).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect()))
    }
}

fn same_len(p: &ProbDist, q: &ProbDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// Column-stochastic matrix: entry `(i, j)` is the probability of output `i` given input `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMap(DMatrix<f64>);

impl StochasticMap {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidDistribution("stochastic map has a negative entry".into()));
        }
        for (j, col) in m.column_iter().enumerate() {
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::InvalidDistribution(format!("column {j} sums to {s}")));
            }
        }
        Ok(StochasticMap(m))
    }

    pub fn identity(n: usize) -> Self {
        StochasticMap(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn inputs(&self) -> usize {
        self.0.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.0.nrows()
    }
}

/// `p' = S p`.
pub fn apply_stochastic(s: &StochasticMap, p: &ProbDist) -> Result<ProbDist> {
    if s.inputs() != p.len() {
        return Err(Error::LengthMismatch(s.inputs(), p.len()));
    }
    let v = s.matrix() * nalgebra::DVector::from_column_slice(p.weights());
    let w: Vec<f64> = v.iter().copied().collect();
    let total: f64 = w.iter().sum();
    Ok(ProbDist(w.into_iter().map(|x| x / total).collect()))
}

fn dirichlet_flat<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Uniform (flat Dirichlet) random distribution on `n` outcomes.
pub fn random_prob_dist_with<R: Rng>(n: usize, rng: &mut R) -> ProbDist {
    ProbDist(dirichlet_flat(n, rng))
}

pub fn random_prob_dist(n: usize, seed: u64) -> ProbDist {
    random_prob_dist_with(n, &mut rng_from_seed(seed))
}

/// Random `outputs x inputs` stochastic map with flat-Dirichlet columns.
pub fn random_stochastic_with<R: Rng>(outputs: usize, inputs: usize, rng: &mut R) -> StochasticMap {
    let mut m = DMatrix::zeros(outputs, inputs);
    for j in 0..inputs {
        let col = dirichlet_flat(outputs, rng);
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    StochasticMap(m)
}

pub fn random_stochastic(outputs: usize, inputs: usize, seed: u64) -> StochasticMap {
    random_stochastic_with(outputs, inputs, &mut rng_from_seed(seed))
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex `f` with `f(1) = 0`, plus the boundary data needed at zero weights.
#[derive(Clone)]
pub struct ConvexGenerator {
    name: String,
    f: RealFn,
    at_zero: ExtReal,
    slope_at_infinity: ExtReal,
    second_derivative: Option<f64>,
}

impl fmt::Debug for ConvexGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexGenerator")
            .field("name", &self.name)
            .field("at_zero", &self.at_zero)
            .field("slope_at_infinity", &self.slope_at_infinity)
            .field("second_derivative", &self.second_derivative)
            .finish()
    }
}

impl ConvexGenerator {
    /// `at_zero = f(0+)`, `slope_at_infinity = lim f(t)/t`, `second_derivative = f''(1)` if it exists.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        at_zero: ExtReal,
        slope_at_infinity: ExtReal,
        second_derivative: Option<f64>,
    ) -> Self {
        ConvexGenerator { name: name.into(), f: Arc::new(f), at_zero, slope_at_infinity, second_derivative }
    }

    /// `-ln t`, giving the relative entropy `D[p||q]`.
    pub fn kl() -> Self {
        Self::custom("kl", |t| -t.ln(), ExtReal::Infinite, ExtReal::ZERO, Some(1.0))
    }

    /// `t ln t`, giving `D[q||p]`.
    pub fn reverse_kl() -> Self {
        Self::custom("reverse-kl", |t| if t == 0.0 { 0.0 } else { t * t.ln() }, ExtReal::ZERO, ExtReal::Infinite, Some(1.0))
    }

    /// `|1 - t| / 2`, giving the total variation. Not differentiable at 1.
    pub fn tv() -> Self {
        Self::custom("tv", |t| 0.5 * (1.0 - t).abs(), ExtReal::Finite(0.5), ExtReal::Finite(0.5), None)
    }

    /// `(t - 1)^2`, giving Pearson's chi-squared.
    pub fn chi_squared() -> Self {
        Self::custom("chi2", |t| (t - 1.0).powi(2), ExtReal::Finite(1.0), ExtReal::Infinite, Some(2.0))
    }

    /// `(1 - sqrt t)^2`, giving the squared Hellinger distance `2 - 2 F`.
    pub fn squared_hellinger() -> Self {
        Self::custom("squared-hellinger", |t| (1.0 - t.sqrt()).powi(2), ExtReal::Finite(1.0), ExtReal::Finite(1.0), Some(0.5))
    }

    /// `(1 - t^(1 - alpha)) / (1 - alpha)`, giving `H_alpha = (1 - xi_alpha) / (1 - alpha)`.
    ///
    /// `f''(1) = alpha`.
    pub fn hellinger(alpha: f64) -> Result<Self> {
        check_hellinger_alpha(alpha)?;
        let at_zero = if alpha < 1.0 { ExtReal::Finite(1.0 / (1.0 - alpha)) } else { ExtReal::Infinite };
        Ok(Self::custom(
            format!("hellinger:{alpha}"),
            move |t| (1.0 - t.powf(1.0 - alpha)) / (1.0 - alpha),
            at_zero,
            ExtReal::ZERO,
            Some(alpha),
        ))
    }

    /// Same generator as [`ConvexGenerator::hellinger`], under its Tsallis name.
    pub fn tsallis(alpha: f64) -> Result<Self> {
        let mut g = Self::hellinger(alpha)?;
        g.name = format!("tsallis:{alpha}");
        Ok(g)
    }

    /// Parses `kl`, `reverse-kl`, `tv`, `chi2`, `squared-hellinger`, `hellinger:<a>`, `tsallis:<a>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let alpha = || -> Result<f64> {
            arg.ok_or_else(|| Error::Parse(format!("{head} needs a parameter, e.g. {head}:0.5")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad alpha in {name:?}: {e}")))
        };
        match head {
            "kl" => Ok(Self::kl()),
            "reverse-kl" => Ok(Self::reverse_kl()),
            "tv" => Ok(Self::tv()),
            "chi2" => Ok(Self::chi_squared()),
            "squared-hellinger" => Ok(Self::squared_hellinger()),
            "hellinger" => Self::hellinger(alpha()?),
            "tsallis" => Self::tsallis(alpha()?),
            _ => Err(Error::Parse(format!("unknown generator {name:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `f(t)` for `t > 0`; `f(0+)` at `t = 0`.
    pub fn eval(&self, t: f64) -> ExtReal {
        if t == 0.0 {
            self.at_zero
        } else {
            ExtReal::from_f64((self.f)(t))
        }
    }

    pub fn raw(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn at_zero(&self) -> ExtReal {
        self.at_zero
    }

    pub fn slope_at_infinity(&self) -> ExtReal {
        self.slope_at_infinity
    }

    /// `f''(1)`: the declared value, or a Richardson-checked finite-difference estimate.
    pub fn second_derivative_at_one(&self) -> Result<f64> {
        if let Some(v) = self.second_derivative {
            return Ok(v);
        }
        let f = |x: &[f64]| Ok((self.f)(1.0 + x[0]));
        let h = richardson_hessian(f, &[0.0])?;
        Ok(h[(0, 0)])
    }

    /// Errors unless `|f(1)| <= 1e-12`.
    pub fn check_normalised(&self) -> Result<()> {
        let v = (self.f)(1.0);
        if !(v.abs() <= 1e-12) {
            return Err(Error::GeneratorNotNormalised(v));
        }
        Ok(())
    }
}

fn check_hellinger_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::AlphaOutOfRange { alpha, range: "(0,1) U (1,inf)" });
    }
    Ok(())
}

/// `sum_i p_i f(q_i / p_i)` with the zero-weight conventions of the module docs.
pub fn f_divergence(p: &ProbDist, q: &ProbDist, f: &ConvexGenerator) -> Result<ExtReal> {
    same_len(p, q)?;
    f.check_normalised()?;
    let mut acc = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        let term = if pi > 0.0 {
            f.eval(qi / pi).map(|v| pi * v)
        } else if qi > 0.0 {
            f.slope_at_infinity().map(|s| qi * s)
        } else {
            ExtReal::ZERO
        };
        match term {
            ExtReal::Finite(v) => acc += v,
            ExtReal::Infinite => return Ok(ExtReal::Infinite),
        }
    }
    Ok(ExtReal::Finite(acc.max(0.0)))
}

/// `T = (1/2) sum |p_i - q_i|`.
pub fn tv_distance(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    same_len(p, q)?;
    Ok(0.5 * p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `xi_alpha = sum p^alpha q^(1-alpha)` over the support intersection.
///
/// Evaluated as `p (q/p)^(1-alpha)` so that identical inputs give exactly `sum p`.
pub fn chernoff_coefficient(p: &ProbDist, q: &ProbDist, alpha: f64) -> Result<f64> {
    same_len(p, q)?;
    Ok(xi_alpha_raw(p.weights(), q.weights(), alpha))
}

fn xi_alpha_raw(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| a * (b / a).powf(1.0 - alpha))
        .sum()
}

/// Chernoff coefficient, bound, minimiser and information.
#[derive(Debug, Clone, Serialize)]
pub struct ChernoffReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_alpha: Option<f64>,
    pub xi: f64,
    pub alpha_star: f64,
    #[serde(rename = "C")]
    pub information: ExtReal,
}

/// Minimises `xi(alpha)` on `[0, 1]`: 33-point grid, then golden section on `ln xi`.
pub(crate) fn minimise_xi(xi: impl Fn(f64) -> f64) -> (f64, f64) {
    const GRID: usize = 33;
    let grid: Vec<(f64, f64)> = (0..GRID)
        .map(|k| {
            let a = k as f64 / (GRID - 1) as f64;
            (a, xi(a))
        })
        .collect();
    let (kbest, &(abest, vbest)) = grid
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .expect("grid is non-empty");
    if vbest <= 0.0 {
        // Disjoint supports: xi vanishes identically on (0, 1).
        return (0.5, 0.0);
    }
    let lo = grid[kbest.saturating_sub(1)].0;
    let hi = grid[(kbest + 1).min(GRID - 1)].0;
    let lnxi = |a: f64| {
        let v = xi(a);
        if v > 0.0 {
            v.ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = lnxi(x1);
    let mut f2 = lnxi(x2);
    while b - a > 1e-8 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = lnxi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = lnxi(x2);
        }
    }
    let am = 0.5 * (a + b);
    let vm = xi(am);
    if vm < vbest {
        (am, vm)
    } else {
        (abest, vbest)
    }
}

pub(crate) fn chernoff_report(xi: impl Fn(f64) -> f64, alpha: Option<f64>) -> Result<ChernoffReport> {
    if let Some(a) = alpha {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::AlphaOutOfRange { alpha: a, range: "[0,1]" });
        }
    }
    let (alpha_star, xmin) = minimise_xi(&xi);
    let information = if xmin > 0.0 { ExtReal::Finite((-xmin.ln()).max(0.0)) } else { ExtReal::Infinite };
    Ok(ChernoffReport { alpha, xi_alpha: alpha.map(&xi), xi: xmin, alpha_star, information })
}

/// Chernoff report for a classical pair, optionally including `xi_alpha` at a requested `alpha`.
pub fn chernoff(p: &ProbDist, q: &ProbDist, alpha: Option<f64>) -> Result<ChernoffReport> {
    same_len(p, q)?;
    chernoff_report(|a| xi_alpha_raw(p.weights(), q.weights(), a), alpha)
}

fn support_exceeds(p: &ProbDist, q: &ProbDist) -> bool {
    p.weights().iter().zip(q.weights()).any(|(a, b)| *a > 0.0 && *b == 0.0)
}

/// `H_alpha = (1 - xi_alpha) / (1 - alpha)` for `alpha in (0,1) U (1,inf)`.
pub fn hellinger_divergence(p: &ProbDist, q: &ProbDist, alpha: f64) -> Result<ExtReal> {
    check_hellinger_alpha(alpha)?;
    same_len(p, q)?;
    if alpha > 1.0 && support_exceeds(p, q) {
        return Ok(ExtReal::Infinite);
    }
    let xi = xi_alpha_raw(p.weights(), q.weights(), alpha);
    Ok(ExtReal::Finite(((1.0 - xi) / (1.0 - alpha)).max(0.0)))
}

/// `D_alpha = ln(xi_alpha) / (alpha - 1)` for `alpha in (0,1) U (1,inf)`.
pub fn renyi_divergence(p: &ProbDist, q: &ProbDist, alpha: f64) -> Result<ExtReal> {
    check_hellinger_alpha(alpha)?;
    same_len(p, q)?;
    if alpha > 1.0 && support_exceeds(p, q) {
        return Ok(ExtReal::Infinite);
    }
    let xi = xi_alpha_raw(p.weights(), q.weights(), alpha);
    if xi <= 0.0 {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::Finite((xi.ln() / (alpha - 1.0)).max(0.0)))
}

/// `D[p||q] = sum p ln(p/q)`, infinite when `supp p` is not inside `supp q`.
pub fn kl_divergence(p: &ProbDist, q: &ProbDist) -> Result<ExtReal> {
    same_len(p, q)?;
    if support_exceeds(p, q) {
        return Ok(ExtReal::Infinite);
    }
    let d: f64 = p
        .weights()
        .iter()
        .zip(q.weights())
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum();
    Ok(ExtReal::Finite(d.max(0.0)))
}

pub(crate) fn check_priors(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0) || (a + b - 1.0).abs() > 1e-12 {
        return Err(Error::DomainError(format!("priors ({a}, {b}) must be non-negative and sum to 1")));
    }
    Ok(())
}

/// Product distribution of `n` i.i.d. copies, subject to the dimension cap.
pub fn iid_power(p: &ProbDist, n: usize) -> Result<ProbDist> {
    if n == 0 {
        return Err(Error::DomainError("need n >= 1".into()));
    }
    let size = (p.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_dim_cap(size)?;
    let mut out = p.clone();
    for _ in 1..n {
        out = out.product(p);
    }
    Ok(out)
}

/// `(1/2)(1 - sum |pi_p p^n - pi_q q^n|)` over the full product lattice.
pub fn min_error_probability(p: &ProbDist, q: &ProbDist, prior_p: f64, prior_q: f64, n: usize) -> Result<f64> {
    same_len(p, q)?;
    check_priors(prior_p, prior_q)?;
    let pn = iid_power(p, n)?;
    let qn = iid_power(q, n)?;
    let s: f64 = pn.weights().iter().zip(qn.weights()).map(|(a, b)| (prior_p * a - prior_q * b).abs()).sum();
    Ok((0.5 * (1.0 - s)).clamp(0.0, 0.5))
}

type DistFn = Arc<dyn Fn(&[f64]) -> Result<ProbDist> + Send + Sync>;
type DistDerivFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Vec<f64>>> + Send + Sync>;

/// A differentiable family `phi -> p_phi` of distributions.
///
/// Derivatives come from the analytic callback when one is supplied, and
/// from central differences with step `1e-5 * max(1, |phi_k|)` otherwise.
#[derive(Clone)]
pub struct ClassicalFamily {
    params: usize,
    eval: DistFn,
    deriv: Option<DistDerivFn>,
}

impl fmt::Debug for ClassicalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassicalFamily")
            .field("params", &self.params)
            .field("analytic", &self.deriv.is_some())
            .finish()
    }
}

impl ClassicalFamily {
    pub fn new(params: usize, eval: impl Fn(&[f64]) -> Result<ProbDist> + Send + Sync + 'static) -> Self {
        ClassicalFamily { params, eval: Arc::new(eval), deriv: None }
    }

    /// Attaches analytic derivatives: one gradient vector (over outcomes) per parameter.
    pub fn with_derivative(mut self, d: impl Fn(&[f64]) -> Result<Vec<Vec<f64>>> + Send + Sync + 'static) -> Self {
        self.deriv = Some(Arc::new(d));
        self
    }

    /// Drops the analytic derivative, forcing finite differences.
    pub fn finite_difference(mut self) -> Self {
        self.deriv = None;
        self
    }

    /// `p_theta = (theta, 1 - theta)`.
    pub fn bernoulli() -> Self {
        ClassicalFamily::new(1, |x| ProbDist::new(vec![x[0], 1.0 - x[0]]))
            .with_derivative(|_| Ok(vec![vec![1.0, -1.0]]))
    }

    /// `p_phi = softmax(a + B phi)` with `B` of shape outcomes x params.
    pub fn softmax(logits: Vec<f64>, directions: DMatrix<f64>) -> Result<Self> {
        if directions.nrows() != logits.len() {
            return Err(Error::LengthMismatch(directions.nrows(), logits.len()));
        }
        let params = directions.ncols();
        let logits = Arc::new(logits);
        let dirs = Arc::new(directions);
        let (l1, d1) = (logits.clone(), dirs.clone());
        let eval = move |phi: &[f64]| Ok(softmax_eval(&l1, &d1, phi));
        let deriv = move |phi: &[f64]| {
            let p = softmax_eval(&logits, &dirs, phi);
            let w = p.weights();
            Ok((0..dirs.ncols())
                .map(|k| {
                    let mean: f64 = (0..w.len()).map(|y| w[y] * dirs[(y, k)]).sum();
                    (0..w.len()).map(|x| w[x] * (dirs[(x, k)] - mean)).collect()
                })
                .collect())
        };
        Ok(ClassicalFamily::new(params, eval).with_derivative(deriv))
    }

    /// Softmax family with standard normal logits and directions.
    pub fn random_softmax(outcomes: usize, params: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let logits = (0..outcomes).map(|_| rng.sample(StandardNormal)).collect();
        let dirs = DMatrix::from_fn(outcomes, params, |_, _| rng.sample(StandardNormal));
        Self::softmax(logits, dirs).expect("shapes agree by construction")
    }

    /// Independent joint family `p_phi x q_phi` sharing the parameters.
    pub fn product(a: &ClassicalFamily, b: &ClassicalFamily) -> Result<Self> {
        if a.params != b.params {
            return Err(Error::LengthMismatch(a.params, b.params));
        }
        let (a1, b1) = (a.clone(), b.clone());
        let (a2, b2) = (a.clone(), b.clone());
        let eval = move |x: &[f64]| Ok(a1.evaluate(x)?.product(&b1.evaluate(x)?));
        let deriv = move |x: &[f64]| {
            let (pa, pb) = (a2.evaluate(x)?, b2.evaluate(x)?);
            let (da, db) = (a2.derivatives(x)?, b2.derivatives(x)?);
            Ok(da
                .iter()
                .zip(&db)
                .map(|(ga, gb)| {
                    let mut v = Vec::with_capacity(pa.len() * pb.len());
                    for i in 0..pa.len() {
                        for j in 0..pb.len() {
                            v.push(ga[i] * pb.weights()[j] + pa.weights()[i] * gb[j]);
                        }
                    }
                    v
                })
                .collect())
        };
        Ok(ClassicalFamily::new(a.params, eval).with_derivative(deriv))
    }

    /// `lambda p_phi + (1 - lambda) q_phi`.
    pub fn mixture(a: &ClassicalFamily, b: &ClassicalFamily, lambda: f64) -> Result<Self> {
        if a.params != b.params {
            return Err(Error::LengthMismatch(a.params, b.params));
        }
        let (a1, b1) = (a.clone(), b.clone());
        let (a2, b2) = (a.clone(), b.clone());
        let eval = move |x: &[f64]| a1.evaluate(x)?.mix(&b1.evaluate(x)?, lambda);
        let deriv = move |x: &[f64]| {
            let (da, db) = (a2.derivatives(x)?, b2.derivatives(x)?);
            Ok(da
                .iter()
                .zip(&db)
                .map(|(ga, gb)| ga.iter().zip(gb).map(|(u, v)| lambda * u + (1.0 - lambda) * v).collect())
                .collect())
        };
        Ok(ClassicalFamily::new(a.params, eval).with_derivative(deriv))
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn evaluate(&self, phi: &[f64]) -> Result<ProbDist> {
        if phi.len() != self.params {
            return Err(Error::LengthMismatch(phi.len(), self.params));
        }
        (self.eval)(phi)
    }

    /// `d p_phi / d phi_k` for each `k`.
    pub fn derivatives(&self, phi: &[f64]) -> Result<Vec<Vec<f64>>> {
        if phi.len() != self.params {
            return Err(Error::LengthMismatch(phi.len(), self.params));
        }
        if let Some(d) = &self.deriv {
            return d(phi);
        }
        (0..self.params)
            .map(|k| {
                let h = 1e-5 * phi[k].abs().max(1.0);
                let mut up = phi.to_vec();
                let mut dn = phi.to_vec();
                up[k] += h;
                dn[k] -= h;
                let (pu, pd) = ((self.eval)(&up)?, (self.eval)(&dn)?);
                Ok(pu.weights().iter().zip(pd.weights()).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            })
            .collect()
    }
}

fn softmax_eval(logits: &[f64], dirs: &DMatrix<f64>, phi: &[f64]) -> ProbDist {
    let z: Vec<f64> = (0..logits.len())
        .map(|x| logits[x] + (0..phi.len()).map(|k| dirs[(x, k)] * phi[k]).sum::<f64>())
        .collect();
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    ProbDist(e.into_iter().map(|v| v / s).collect())
}

/// `F_ij = sum_x d_i p(x) d_j p(x) / p(x)`.
pub fn fisher_metric(family: &ClassicalFamily, phi: &[f64]) -> Result<DMatrix<f64>> {
    let p = family.evaluate(phi)?;
    let dp = family.derivatives(phi)?;
    fisher_from_parts(p.weights(), &dp)
}

pub(crate) fn fisher_from_parts(p: &[f64], dp: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = dp.len();
    let cut = SUPPORT_REL * p.iter().copied().fold(0.0, f64::max);
    let mut f = DMatrix::zeros(d, d);
    for (x, &px) in p.iter().enumerate() {
        if px <= cut {
            if let Some(g) = dp.iter().find(|g| g[x].abs() > DERIVATIVE_ZERO_TOL) {
                return Err(Error::SupportViolation(format!(
                    "outcome {x} has weight {px:.3e} but derivative {:.3e}",
                    g[x]
                )));
            }
            continue;
        }
        for i in 0..d {
            for j in i..d {
                let v = dp[i][x] * dp[j][x] / px;
                f[(i, j)] += v;
                if i != j {
                    f[(j, i)] += v;
                }
            }
        }
    }
    Ok(f)
}

/// Hessian in `theta` of `D[p_phi, p_theta]` at `theta = phi`, Richardson-checked.
pub fn induced_metric_numerical(
    divergence: impl Fn(&ProbDist, &ProbDist) -> Result<ExtReal>,
    family: &ClassicalFamily,
    phi: &[f64],
) -> Result<DMatrix<f64>> {
    let base = family.evaluate(phi)?;
    richardson_hessian(
        |theta| {
            let v = divergence(&base, &family.evaluate(theta)?)?;
            v.finite().ok_or_else(|| Error::SupportViolation("divergence is infinite near coincidence".into()))
        },
        phi,
    )
}

/// One audited inequality `lhs <= rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub name: String,
    pub relation: String,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    /// `rhs - lhs`; negative finite values are violations.
    pub slack: ExtReal,
    pub pass: bool,
}

impl AuditEntry {
    pub(crate) fn new(name: impl Into<String>, relation: impl Into<String>, lhs: ExtReal, rhs: ExtReal) -> Self {
        let slack = match (lhs, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(b - a),
            (ExtReal::Finite(_), ExtReal::Infinite) => ExtReal::Infinite,
            (ExtReal::Infinite, ExtReal::Infinite) => ExtReal::ZERO,
            (ExtReal::Infinite, ExtReal::Finite(_)) => ExtReal::Finite(f64::NEG_INFINITY),
        };
        let pass = match slack {
            ExtReal::Finite(s) => s >= -AUDIT_TOL,
            ExtReal::Infinite => true,
        };
        AuditEntry { name: name.into(), relation: relation.into(), lhs, rhs, slack, pass }
    }
}

/// All audited inequalities for one pair, plus the quantities they were built from.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub values: BTreeMap<String, ExtReal>,
    pub entries: Vec<AuditEntry>,
    pub all_pass: bool,
}

impl AuditReport {
    pub(crate) fn new(values: BTreeMap<String, ExtReal>, entries: Vec<AuditEntry>) -> Self {
        let all_pass = entries.iter().all(|e| e.pass);
        AuditReport { values, entries, all_pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// Alphas at which `xi_alpha` is sampled by the audits.
pub(crate) const AUDIT_ALPHAS: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

/// Audits the classical inequalities relating `T`, `xi_alpha`, `xi`, `F` and `D`.
///
/// Square-root bounds are checked in squared form so that rounding near
/// saturation is not amplified.
pub fn audit_classical(p: &ProbDist, q: &ProbDist) -> Result<AuditReport> {
    same_len(p, q)?;
    let t = tv_distance(p, q)?;
    let ch = chernoff(p, q, None)?;
    let xi = ch.xi;
    let f = xi_alpha_raw(p.weights(), q.weights(), 0.5);
    let d = kl_divergence(p, q)?;
    let xi_at = |a: f64| xi_alpha_raw(p.weights(), q.weights(), a);
    let fin = ExtReal::Finite;

    let mut e = Vec::new();
    let mut alphas = AUDIT_ALPHAS.to_vec();
    alphas.push(ch.alpha_star);
    for &a in &alphas {
        let xa = xi_at(a);
        e.push(AuditEntry::new(format!("tv_lower_by_xi[{a:.4}]"), "1 - xi_alpha <= T", fin(1.0 - xa), fin(t)));
        e.push(AuditEntry::new(format!("xi_lower_by_tv[{a:.4}]"), "1 - T <= xi_alpha", fin(1.0 - t), fin(xa)));
        e.push(AuditEntry::new(format!("chernoff_min[{a:.4}]"), "xi <= xi_alpha", fin(xi), fin(xa)));
        e.push(AuditEntry::new(
            format!("relative_chernoff[{a:.4}]"),
            "exp(-D) <= xi_alpha",
            d.finite().map_or(ExtReal::ZERO, |dv| fin((-dv).exp())),
            fin(xa),
        ));
    }
    e.push(AuditEntry::new("tv_upper_by_f", "T^2 <= 1 - F^2", fin(t * t), fin(1.0 - f * f)));
    e.push(AuditEntry::new("chernoff_lower", "1 - T <= xi", fin(1.0 - t), fin(xi)));
    e.push(AuditEntry::new("chernoff_upper", "xi^2 <= 1 - T^2", fin(xi * xi), fin(1.0 - t * t)));
    e.push(AuditEntry::new("pinsker", "2 T^2 <= D", fin(2.0 * t * t), d));
    e.push(AuditEntry::new("pinsker_chernoff", "2 (1 - xi)^2 <= D", fin(2.0 * (1.0 - xi).powi(2)), d));
    e.push(AuditEntry::new(
        "relative_chernoff",
        "exp(-D) <= xi",
        d.finite().map_or(ExtReal::ZERO, |dv| fin((-dv).exp())),
        fin(xi),
    ));

    let mut values = BTreeMap::new();
    values.insert("T".into(), fin(t));
    values.insert("F".into(), fin(f));
    values.insert("xi".into(), fin(xi));
    values.insert("alpha_star".into(), fin(ch.alpha_star));
    values.insert("D".into(), d);
    Ok(AuditReport::new(values, e))
}
