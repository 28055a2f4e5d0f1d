//! Quantum divergences and the quantum inequality audit.
//!
//! Most quantities are evaluated in the two eigenbases: with
//! `rho = sum p_i |phi_i><phi_i|` and `sigma = sum q_j |psi_j><psi_j|`, the
//! overlap matrix `W_ij = |<phi_i|psi_j>|^2` turns Petz-type traces into
//! double sums, e.g. `Tr rho^a sigma^(1-a) = sum p_i^a q_j^(1-a) W_ij`.

use crate::classical::{chernoff_report, check_priors, AuditEntry, AuditReport, ChernoffReport, ConvexGenerator, AUDIT_ALPHAS};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::numerics::{clip_spectrum, kron_power, support_cutoff, support_power, trace_norm, HermitianMatrix};
use crate::states::DensityMatrix;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Overlap mass of `rho` on the kernel of `sigma` beyond which a divergence is infinite.
pub const SUPPORT_LEAK_TOL: f64 = 1e-12;
/// Regularisation used for the footnote limit of the Petz f-divergence.
pub const REGULARISATION_EPS: f64 = 1e-10;

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(())
}

/// Spectra of a pair of states and the squared overlaps of their eigenvectors.
#[derive(Debug, Clone)]
pub struct PairSpectra {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub w: DMatrix<f64>,
    cut_p: f64,
    cut_q: f64,
}

impl PairSpectra {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        same_dim(rho, sigma)?;
        let er = rho.eigh();
        let es = sigma.eigh();
        let p = clip_spectrum(er.values.as_slice())?;
        let q = clip_spectrum(es.values.as_slice())?;
        let o = er.vectors.adjoint() * &es.vectors;
        let w = o.map(|z| z.norm_sqr());
        let (cut_p, cut_q) = (support_cutoff(&p), support_cutoff(&q));
        Ok(PairSpectra { p, q, w, cut_p, cut_q })
    }

    fn in_p(&self, i: usize) -> bool {
        self.p[i] > self.cut_p
    }

    fn in_q(&self, j: usize) -> bool {
        self.q[j] > self.cut_q
    }

    /// Mass of `rho` outside the support of `sigma`: `sum_{q_j = 0} p_i W_ij`.
    pub fn leak(&self) -> f64 {
        let n = self.p.len();
        let mut s = 0.0;
        for i in (0..n).filter(|&i| self.in_p(i)) {
            for j in (0..n).filter(|&j| !self.in_q(j)) {
                s += self.p[i] * self.w[(i, j)];
            }
        }
        s
    }

    /// `Tr rho^alpha sigma^(1-alpha)` on the support intersection; infinite for
    /// `alpha > 1` when `rho` leaks out of the support of `sigma`.
    pub fn xi(&self, alpha: f64) -> ExtReal {
        if alpha > 1.0 && self.leak() > SUPPORT_LEAK_TOL {
            return ExtReal::Infinite;
        }
        let n = self.p.len();
        let mut s = 0.0;
        for i in (0..n).filter(|&i| self.in_p(i)) {
            let pa = self.p[i].powf(alpha);
            for j in (0..n).filter(|&j| self.in_q(j)) {
                s += pa * self.q[j].powf(1.0 - alpha) * self.w[(i, j)];
            }
        }
        ExtReal::Finite(s)
    }

    /// `Tr rho (ln rho - ln sigma)`.
    pub fn relative_entropy(&self) -> ExtReal {
        if self.leak() > SUPPORT_LEAK_TOL {
            return ExtReal::Infinite;
        }
        let n = self.p.len();
        let mut s = 0.0;
        for i in (0..n).filter(|&i| self.in_p(i)) {
            s += self.p[i] * self.p[i].ln();
            for j in (0..n).filter(|&j| self.in_q(j)) {
                s -= self.p[i] * self.w[(i, j)] * self.q[j].ln();
            }
        }
        ExtReal::Finite(s.max(0.0))
    }

    /// Direct Petz double sum with limit conventions on both kernels.
    /// The flag reports whether any `0 * inf` ambiguity was met.
    fn f_sum(&self, f: &ConvexGenerator, p: &[f64], q: &[f64], cut_p: f64, cut_q: f64) -> (f64, bool) {
        let n = p.len();
        let mut acc = 0.0;
        let mut ambiguous = false;
        for i in 0..n {
            for j in 0..n {
                let wij = self.w[(i, j)];
                let term = if p[i] > cut_p {
                    if q[j] > cut_q {
                        f.eval(q[j] / p[i]).map(|v| p[i] * v * wij)
                    } else {
                        f.at_zero().map(|v| p[i] * v * wij)
                    }
                } else if q[j] > cut_q {
                    f.slope_at_infinity().map(|s| q[j] * s * wij)
                } else {
                    ExtReal::ZERO
                };
                match term {
                    ExtReal::Finite(v) => acc += v,
                    ExtReal::Infinite => ambiguous = true,
                }
            }
        }
        (acc, ambiguous)
    }

    fn regularised_f(&self, f: &ConvexGenerator, eps: f64) -> f64 {
        let d = self.p.len() as f64;
        let p: Vec<f64> = self.p.iter().map(|x| (x + eps) / (1.0 + d * eps)).collect();
        let q: Vec<f64> = self.q.iter().map(|x| (x + eps) / (1.0 + d * eps)).collect();
        self.f_sum(f, &p, &q, 0.0, 0.0).0
    }
}

/// Petz f-divergence `sum_{i,j} p_i f(q_j / p_i) W_ij`.
///
/// When a kernel term is of the form `0 * inf` the value is taken as the
/// limit of the regularised pair `(rho + eps I)/(1 + d eps)` at
/// `eps = 1e-10`, confirmed at `eps/10`; a limit that does not settle is
/// reported as `+inf`.
pub fn quantum_f_divergence(rho: &DensityMatrix, sigma: &DensityMatrix, f: &ConvexGenerator) -> Result<ExtReal> {
    f.check_normalised()?;
    let ps = PairSpectra::new(rho, sigma)?;
    let (direct, ambiguous) = ps.f_sum(f, &ps.p, &ps.q, ps.cut_p, ps.cut_q);
    if !ambiguous {
        return Ok(ExtReal::Finite(direct.max(0.0)));
    }
    let a = ps.regularised_f(f, REGULARISATION_EPS);
    let b = ps.regularised_f(f, REGULARISATION_EPS / 10.0);
    if (a - b).abs() <= 1e-5 * b.abs() + 1e-12 {
        Ok(ExtReal::Finite(b.max(0.0)))
    } else {
        Ok(ExtReal::Infinite)
    }
}

/// `T = ||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok((0.5 * trace_norm(&rho.herm().sub(sigma.herm()))).clamp(0.0, 1.0))
}

fn sqrt_state(rho: &DensityMatrix) -> Result<HermitianMatrix> {
    support_power(rho.herm(), 0.5)
}

/// `F = ||sqrt(rho) sqrt(sigma)||_1`, from the singular values of the product.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let prod = sqrt_state(rho)?.as_mat() * sqrt_state(sigma)?.as_mat();
    let sv = prod.singular_values();
    Ok(sv.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// `Tr sqrt(sqrt(rho) sigma sqrt(rho))`; same value as [`fidelity`], computed the long way.
pub fn fidelity_nested(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let sr = sqrt_state(rho)?;
    let inner = HermitianMatrix::symmetrised(sr.as_mat() * sigma.as_mat() * sr.as_mat());
    Ok(support_power(&inner, 0.5)?.trace_re().clamp(0.0, 1.0))
}

/// Affinity `Tr sqrt(rho) sqrt(sigma) = xi_{1/2}`.
pub fn affinity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(PairSpectra::new(rho, sigma)?.xi(0.5).to_f64().clamp(0.0, 1.0))
}

/// Bures distance `2 (1 - F)`.
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(2.0 * (1.0 - fidelity(rho, sigma)?))
}

/// Bures angle `arccos F`.
pub fn bures_angle(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(fidelity(rho, sigma)?.acos())
}

/// Quantum Chernoff coefficient, bound, minimiser and information.
pub fn q_chernoff(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: Option<f64>) -> Result<ChernoffReport> {
    let ps = PairSpectra::new(rho, sigma)?;
    chernoff_report(|a| ps.xi(a).to_f64(), alpha)
}

/// Umegaki relative entropy; `+inf` when `supp rho` is not inside `supp sigma`.
pub fn q_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtReal> {
    Ok(PairSpectra::new(rho, sigma)?.relative_entropy())
}

fn check_petz_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0 {
        return Err(Error::AlphaOutOfRange { alpha, range: "(0,1) U (1,2]" });
    }
    Ok(())
}

/// Tsallis relative entropy `H_alpha = (1 - xi_alpha) / (1 - alpha)`.
pub fn tsallis(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<ExtReal> {
    check_petz_alpha(alpha)?;
    let xi = PairSpectra::new(rho, sigma)?.xi(alpha);
    Ok(xi.finite().map_or(ExtReal::Infinite, |x| ExtReal::Finite(((1.0 - x) / (1.0 - alpha)).max(0.0))))
}

/// `H_alpha / alpha`, normalised so that its Hessian is the WYD metric.
pub fn rescaled_tsallis(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<ExtReal> {
    Ok(tsallis(rho, sigma, alpha)?.map(|v| v / alpha))
}

/// Petz-Renyi divergence `ln(xi_alpha) / (alpha - 1)`.
pub fn q_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<ExtReal> {
    check_petz_alpha(alpha)?;
    let xi = PairSpectra::new(rho, sigma)?.xi(alpha);
    Ok(match xi {
        ExtReal::Infinite => ExtReal::Infinite,
        ExtReal::Finite(x) if x <= 0.0 => ExtReal::Infinite,
        ExtReal::Finite(x) => ExtReal::Finite((x.ln() / (alpha - 1.0)).max(0.0)),
    })
}

/// Minimal error `(1 - ||pi_rho rho^n - pi_sigma sigma^n||_1) / 2` for `n` copies.
pub fn q_min_error(rho: &DensityMatrix, sigma: &DensityMatrix, prior_rho: f64, prior_sigma: f64, n: usize) -> Result<f64> {
    same_dim(rho, sigma)?;
    check_priors(prior_rho, prior_sigma)?;
    let a = kron_power(rho.as_mat(), n)?;
    let b = kron_power(sigma.as_mat(), n)?;
    let gamma = HermitianMatrix::symmetrised(a * nalgebra::Complex::new(prior_rho, 0.0) - b * nalgebra::Complex::new(prior_sigma, 0.0));
    Ok((0.5 * (1.0 - trace_norm(&gamma))).clamp(0.0, 0.5))
}

/// Audits the quantum relations between `T`, `F`, affinity, `xi_alpha`, `xi` and `D`.
///
/// Square-root bounds are checked in squared form.
pub fn audit_quantum(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<AuditReport> {
    let ps = PairSpectra::new(rho, sigma)?;
    let t = trace_distance(rho, sigma)?;
    let f = fidelity(rho, sigma)?;
    let aff = ps.xi(0.5).to_f64();
    let ch = chernoff_report(|a| ps.xi(a).to_f64(), None)?;
    let xi = ch.xi;
    let d = ps.relative_entropy();
    let fin = ExtReal::Finite;
    let exp_neg_d = d.finite().map_or(ExtReal::ZERO, |v| fin((-v).exp()));

    let mut e = Vec::new();
    let mut alphas = AUDIT_ALPHAS.to_vec();
    alphas.push(ch.alpha_star);
    for &a in &alphas {
        let xa = ps.xi(a).to_f64();
        e.push(AuditEntry::new(format!("tv_lower_by_xi[{a:.4}]"), "1 - xi_alpha <= T", fin(1.0 - xa), fin(t)));
        e.push(AuditEntry::new(format!("xi_lower_by_tv[{a:.4}]"), "1 - T <= xi_alpha", fin(1.0 - t), fin(xa)));
        e.push(AuditEntry::new(format!("fidelity_by_xi[{a:.4}]"), "F^2 <= xi_alpha", fin(f * f), fin(xa)));
        e.push(AuditEntry::new(format!("chernoff_min[{a:.4}]"), "xi <= xi_alpha", fin(xi), fin(xa)));
        e.push(AuditEntry::new(format!("relative_chernoff[{a:.4}]"), "exp(-D) <= xi_alpha", exp_neg_d, fin(xa)));
    }
    e.push(AuditEntry::new("fuchs_lower", "1 - F <= T", fin(1.0 - f), fin(t)));
    e.push(AuditEntry::new("fuchs_upper", "T^2 <= 1 - F^2", fin(t * t), fin(1.0 - f * f)));
    e.push(AuditEntry::new("affinity_bound", "1 - F^2 <= 1 - xi_half^2", fin(1.0 - f * f), fin(1.0 - aff * aff)));
    e.push(AuditEntry::new("affinity_fidelity", "xi_half <= F", fin(aff), fin(f)));
    e.push(AuditEntry::new("chernoff_lower", "1 - T <= xi", fin(1.0 - t), fin(xi)));
    e.push(AuditEntry::new("chernoff_fidelity", "xi <= F", fin(xi), fin(f)));
    e.push(AuditEntry::new("fidelity_upper_by_tv", "F^2 <= 1 - T^2", fin(f * f), fin(1.0 - t * t)));
    e.push(AuditEntry::new("pinsker", "2 T^2 <= D", fin(2.0 * t * t), d));
    e.push(AuditEntry::new("pinsker_chernoff", "2 (1 - xi)^2 <= D", fin(2.0 * (1.0 - xi).powi(2)), d));
    e.push(AuditEntry::new("relative_chernoff", "exp(-D) <= xi", exp_neg_d, fin(xi)));

    let mut values = BTreeMap::new();
    values.insert("T".into(), fin(t));
    values.insert("F".into(), fin(f));
    values.insert("affinity".into(), fin(aff));
    values.insert("xi".into(), fin(xi));
    values.insert("alpha_star".into(), fin(ch.alpha_star));
    values.insert("D".into(), d);
    Ok(AuditReport::new(values, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{self, ProbDist};
    use crate::numerics::random_density;
    use approx::assert_abs_diff_eq;

    fn zero() -> DensityMatrix {
        DensityMatrix::basis(2, 0)
    }

    #[test]
    fn f_divergence_examples() {
        let rho = random_density(3, 3, 4).unwrap();
        for g in [ConvexGenerator::kl(), ConvexGenerator::tv(), ConvexGenerator::chi_squared()] {
            assert_abs_diff_eq!(quantum_f_divergence(&rho, &rho, &g).unwrap().to_f64(), 0.0, epsilon = 1e-13);
        }
        let a = DensityMatrix::diag(&[0.5, 0.5]).unwrap();
        let b = DensityMatrix::diag(&[0.25, 0.75]).unwrap();
        let d = quantum_f_divergence(&a, &b, &ConvexGenerator::kl()).unwrap().to_f64();
        assert_abs_diff_eq!(d, 0.143841, epsilon = 1e-6);
        // Hellinger-type generator on |0> vs |+>: double-sum oracle.
        // Eigen-overlaps are all 1/2 and the only nonzero eigenvalues are p = q = 1,
        // so the sum is 1/2 f(1) + 1/2 f(0) + 1/2 slope(inf) = (f(0) + slope) / 2.
        let g = ConvexGenerator::hellinger(0.5).unwrap();
        let v = quantum_f_divergence(&zero(), &DensityMatrix::plus(), &g).unwrap().to_f64();
        assert_abs_diff_eq!(v, 0.5 * 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, tsallis(&zero(), &DensityMatrix::plus(), 0.5).unwrap().to_f64(), epsilon = 1e-12);
    }

    #[test]
    fn f_divergence_regularisation_limit() {
        // Rank-deficient but identical supports: the ambiguous kernel terms vanish in the limit.
        let rho = DensityMatrix::diag(&[0.3, 0.7, 0.0]).unwrap();
        let sigma = DensityMatrix::diag(&[0.6, 0.4, 0.0]).unwrap();
        let d = quantum_f_divergence(&rho, &sigma, &ConvexGenerator::kl()).unwrap().to_f64();
        let classical = classical::kl_divergence(
            &ProbDist::new(vec![0.3, 0.7]).unwrap(),
            &ProbDist::new(vec![0.6, 0.4]).unwrap(),
        )
        .unwrap()
        .to_f64();
        assert_abs_diff_eq!(d, classical, epsilon = 1e-8);
        // Genuine support violation.
        let v = quantum_f_divergence(&zero(), &DensityMatrix::plus(), &ConvexGenerator::kl()).unwrap();
        assert_eq!(v, ExtReal::Infinite);
    }

    #[test]
    fn trace_distance_examples() {
        let r = random_density(3, 2, 1).unwrap();
        assert_abs_diff_eq!(trace_distance(&r, &r).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&zero(), &DensityMatrix::basis(2, 1)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&zero(), &DensityMatrix::plus()).unwrap(), 0.707107, epsilon = 1e-6);
        assert!(matches!(trace_distance(&r, &zero()), Err(Error::DimensionMismatch(3, 2))));
    }

    #[test]
    fn fidelity_examples() {
        let r = random_density(3, 3, 2).unwrap();
        assert_abs_diff_eq!(fidelity(&r, &r).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(affinity(&r, &r).unwrap(), 1.0, epsilon = 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(fidelity(&zero(), &DensityMatrix::plus()).unwrap(), s, epsilon = 1e-12);
        let a = DensityMatrix::diag(&[0.5, 0.5]).unwrap();
        let b = DensityMatrix::diag(&[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), 0.9659258262890683, epsilon = 1e-12);
        assert_abs_diff_eq!(affinity(&a, &b).unwrap(), 0.9659258262890683, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_forms_agree() {
        for seed in 0..30 {
            let r = random_density(3, 1 + seed as usize % 3, seed).unwrap();
            let s = random_density(3, 3, seed + 100).unwrap();
            let a = fidelity(&r, &s).unwrap();
            let b = fidelity_nested(&r, &s).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            assert!(affinity(&r, &s).unwrap() <= a + 1e-10);
        }
    }

    #[test]
    fn chernoff_examples() {
        let r = random_density(2, 2, 3).unwrap();
        let c = q_chernoff(&r, &r, None).unwrap();
        assert_abs_diff_eq!(c.xi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.information.to_f64(), 0.0, epsilon = 1e-12);

        let c = q_chernoff(&zero(), &DensityMatrix::plus(), Some(0.3)).unwrap();
        assert_abs_diff_eq!(c.xi_alpha.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.xi, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.information.to_f64(), 2f64.ln(), epsilon = 1e-12);

        let (p, q) = (classical::random_prob_dist(4, 1), classical::random_prob_dist(4, 2));
        let cq = q_chernoff(&DensityMatrix::diag(p.weights()).unwrap(), &DensityMatrix::diag(q.weights()).unwrap(), None).unwrap();
        let cc = classical::chernoff(&p, &q, None).unwrap();
        assert_abs_diff_eq!(cq.xi, cc.xi, epsilon = 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let r = random_density(3, 3, 6).unwrap();
        assert_abs_diff_eq!(q_relative_entropy(&r, &r).unwrap().to_f64(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tsallis(&r, &r, 0.5).unwrap().to_f64(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q_renyi(&r, &r, 1.5).unwrap().to_f64(), 0.0, epsilon = 1e-12);
        assert_eq!(q_relative_entropy(&zero(), &DensityMatrix::plus()).unwrap(), ExtReal::Infinite);
        let a = DensityMatrix::diag(&[0.5, 0.5]).unwrap();
        let b = DensityMatrix::diag(&[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(q_relative_entropy(&a, &b).unwrap().to_f64(), 0.143841, epsilon = 1e-6);
        assert!(matches!(tsallis(&a, &b, 2.5), Err(Error::AlphaOutOfRange { .. })));
        assert!(matches!(q_renyi(&a, &b, 1.0), Err(Error::AlphaOutOfRange { .. })));
        // Relative entropy is not symmetric.
        let (x, y) = (q_relative_entropy(&a, &b).unwrap().to_f64(), q_relative_entropy(&b, &a).unwrap().to_f64());
        assert!((x - y).abs() > 1e-3);
    }

    #[test]
    fn min_error_examples() {
        let r = random_density(2, 2, 8).unwrap();
        assert_abs_diff_eq!(q_min_error(&r, &r, 0.5, 0.5, 1).unwrap(), 0.5, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e1 = q_min_error(&zero(), &DensityMatrix::plus(), 0.5, 0.5, 1).unwrap();
        assert_abs_diff_eq!(e1, 0.5 * (1.0 - s), epsilon = 1e-14);
        let e2 = q_min_error(&zero(), &DensityMatrix::plus(), 0.5, 0.5, 2).unwrap();
        assert_abs_diff_eq!(e2, 0.5 * (1.0 - 3f64.sqrt() / 2.0), epsilon = 1e-14);
        assert!(q_min_error(&r, &r, 0.6, 0.6, 1).is_err());
    }

    #[test]
    fn audit_examples() {
        let r = random_density(3, 3, 1).unwrap();
        let a = audit_quantum(&r, &r).unwrap();
        assert!(a.all_pass);
        let a = audit_quantum(&zero(), &DensityMatrix::plus()).unwrap();
        assert!(a.all_pass, "{:?}", a.failures().collect::<Vec<_>>());
        let fu = a.entries.iter().find(|e| e.name == "fuchs_upper").unwrap();
        assert_abs_diff_eq!(fu.slack.to_f64(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pure_state_identities() {
        for seed in 0..20 {
            let a = random_density(3, 1, seed).unwrap();
            let b = random_density(3, 1, seed + 500).unwrap();
            let c2 = a.herm().hs_inner(b.herm());
            let c = c2.sqrt();
            assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), c, epsilon = 1e-10);
            assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), (1.0 - c2).sqrt(), epsilon = 1e-10);
            let ps = PairSpectra::new(&a, &b).unwrap();
            for alpha in [0.2, 0.5, 0.9] {
                assert_abs_diff_eq!(ps.xi(alpha).to_f64(), c2, epsilon = 1e-10);
            }
        }
    }
}
