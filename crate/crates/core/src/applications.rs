//! Estimation bounds, metric speed limits and near-equilibrium thermodynamics.

use crate::classical::{fisher_metric, ClassicalFamily};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::numerics::{clip_spectrum, eigh, support_cutoff, HermitianMatrix};
use crate::qdivergences::{affinity, fidelity};
use crate::qmetrics::{g_metric, qfi_metric_sld, GFunction, GTag};
use crate::states::{gibbs, DensityMatrix, StateFamily};
use serde::Serialize;

/// Cramer-Rao bound `1/(nu F)` for a single parameter.
#[derive(Debug, Clone, Serialize)]
pub struct CramerRaoReport {
    pub information: f64,
    pub repetitions: u64,
    /// `+inf` when the information vanishes.
    pub bound: ExtReal,
}

fn cr_report(information: f64, nu: u64) -> Result<CramerRaoReport> {
    if nu == 0 {
        return Err(Error::DomainError("need at least one repetition".into()));
    }
    let bound = if information > 0.0 { ExtReal::Finite(1.0 / (nu as f64 * information)) } else { ExtReal::Infinite };
    Ok(CramerRaoReport { information, repetitions: nu, bound })
}

fn scalar_param(params: usize) -> Result<()> {
    if params != 1 {
        return Err(Error::DomainError(format!("need a single-parameter family, got {params} parameters")));
    }
    Ok(())
}

pub fn cramer_rao_classical(family: &ClassicalFamily, phi: f64, nu: u64) -> Result<CramerRaoReport> {
    scalar_param(family.params())?;
    cr_report(fisher_metric(family, &[phi])?[(0, 0)], nu)
}

/// Quantum bound with the SLD quantum Fisher information.
pub fn cramer_rao_quantum(family: &StateFamily, phi: f64, nu: u64) -> Result<CramerRaoReport> {
    scalar_param(family.params())?;
    cr_report(qfi_metric_sld(family, &[phi])?.matrix[(0, 0)], nu)
}

/// Metric speed limit along `t -> rho(t)`, `t` in `[0, tau]`.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedLimitReport {
    pub g: String,
    pub tau: f64,
    pub steps: usize,
    /// Trapezoidal integral of `sqrt(g_tt)`.
    pub path_length: f64,
    /// Geodesic distance between the endpoints in the same metric.
    pub geodesic_length: f64,
    /// `fidelity` for the QFI metric, affinity for WYD(1/2).
    pub endpoint_overlap: f64,
    /// `path_length / tau`.
    pub mean_speed: f64,
    /// `geodesic_length / mean_speed`.
    pub tau_min: f64,
    pub pass: bool,
}

/// Compares the time `tau` against `L / <sqrt(g)>`.
///
/// Only the QFI and WYD(1/2) metrics have closed-form geodesic distances:
/// `2 arccos F` and `2 arccos Tr(sqrt(rho) sqrt(sigma))` respectively. The
/// factor 2 makes a pure qubit precessing on a great circle saturate the bound.
pub fn speed_limit(trajectory: &StateFamily, tau: f64, g: &GFunction, steps: usize) -> Result<SpeedLimitReport> {
    scalar_param(trajectory.params())?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::DomainError(format!("duration {tau} must be finite and non-negative")));
    }
    if steps < 2 {
        return Err(Error::DomainError("need at least two sample points".into()));
    }
    let qfi = match g.tag() {
        GTag::Qfi => true,
        GTag::Wyd(a) if *a == 0.5 => false,
        other => {
            return Err(Error::DomainError(format!("no closed-form geodesic for the {other} metric; use qfi or wyd:0.5")))
        }
    };
    let speeds = (0..steps)
        .map(|k| {
            let t = tau * k as f64 / (steps - 1) as f64;
            let m = g_metric(trajectory, &[t], g)?;
            if m.divergent {
                return Err(Error::SupportViolation(format!("metric diverges at t = {t}")));
            }
            Ok(m.matrix[(0, 0)].max(0.0).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let dt = tau / (steps - 1) as f64;
    let path_length: f64 = speeds.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
    let (start, end) = (trajectory.evaluate(&[0.0])?, trajectory.evaluate(&[tau])?);
    let endpoint_overlap = if qfi { fidelity(&start, &end)? } else { affinity(&start, &end)? };
    let geodesic_length = 2.0 * endpoint_overlap.clamp(0.0, 1.0).acos();
    let mean_speed = if tau > 0.0 { path_length / tau } else { 0.0 };
    let tau_min = if path_length > 0.0 { geodesic_length * tau / path_length } else { 0.0 };
    Ok(SpeedLimitReport {
        g: g.tag().to_string(),
        tau,
        steps,
        path_length,
        geodesic_length,
        endpoint_overlap,
        mean_speed,
        tau_min,
        pass: tau >= tau_min - 1e-8,
    })
}

/// A Hamiltonian at inverse temperature `beta` with a perturbation `V`.
#[derive(Debug, Clone, Serialize)]
pub struct ThermalSpec {
    #[serde(skip)]
    pub hamiltonian: HermitianMatrix,
    pub beta: f64,
    #[serde(skip)]
    pub perturbation: HermitianMatrix,
}

impl ThermalSpec {
    pub fn new(hamiltonian: HermitianMatrix, beta: f64, perturbation: HermitianMatrix) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::DomainError(format!("beta = {beta} must be positive and finite")));
        }
        if hamiltonian.dim() != perturbation.dim() {
            return Err(Error::DimensionMismatch(hamiltonian.dim(), perturbation.dim()));
        }
        Ok(ThermalSpec { hamiltonian, beta, perturbation })
    }
}

pub fn thermal_state(spec: &ThermalSpec) -> DensityMatrix {
    gibbs(&spec.hamiltonian, spec.beta)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClausiusReport {
    pub relative_entropy: f64,
    /// `beta (<H>_1 - <H>_0)`.
    pub beta_delta_energy: f64,
    /// `S(omega_1) - S(omega_0)`.
    pub delta_entropy: f64,
    /// `F(omega_1) - F(omega_0)` with `F = <H> - S/beta`.
    pub free_energy_difference: f64,
    /// `beta Delta<H> - Delta S`, non-negative by the Clausius inequality.
    pub clausius_slack: f64,
    /// `|D - (beta Delta<H> - Delta S)|`.
    pub identity_residual: f64,
    pub identity_holds: bool,
    pub clausius_holds: bool,
}

/// Relative entropy of `final` to the thermal state, split into energy and entropy changes.
pub fn clausius_report(spec: &ThermalSpec, final_state: &DensityMatrix) -> Result<ClausiusReport> {
    if final_state.dim() != spec.hamiltonian.dim() {
        return Err(Error::DimensionMismatch(final_state.dim(), spec.hamiltonian.dim()));
    }
    let omega0 = thermal_state(spec);
    let d = relative_entropy_to_gibbs(final_state, spec)?;
    let de = final_state.expectation(&spec.hamiltonian) - omega0.expectation(&spec.hamiltonian);
    let ds = final_state.entropy() - omega0.entropy();
    let slack = spec.beta * de - ds;
    let residual = (d - slack).abs();
    Ok(ClausiusReport {
        relative_entropy: d,
        beta_delta_energy: spec.beta * de,
        delta_entropy: ds,
        free_energy_difference: de - ds / spec.beta,
        clausius_slack: slack,
        identity_residual: residual,
        identity_holds: residual < 1e-9,
        clausius_holds: slack >= -1e-10,
    })
}

/// `D[rho || omega]` for the thermal state `omega`, taking `ln omega` from the
/// spectrum of `H` (`-beta E_j - ln Z`) rather than re-diagonalising `omega`,
/// whose small eigenvalues would otherwise lose relative accuracy.
pub fn relative_entropy_to_gibbs(rho: &DensityMatrix, spec: &ThermalSpec) -> Result<f64> {
    let eh = eigh(&spec.hamiltonian);
    let k: Vec<f64> = eh.values.iter().map(|e| -spec.beta * e).collect();
    let m = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_z = m + k.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    let er = rho.eigh();
    let p = clip_spectrum(er.values.as_slice())?;
    let overlaps = er.vectors.adjoint() * &eh.vectors;
    let mut d = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi <= 0.0 {
            continue;
        }
        d += pi * pi.ln();
        for (j, kj) in k.iter().enumerate() {
            d -= pi * overlaps[(i, j)].norm_sqr() * (kj - ln_z);
        }
    }
    Ok(d.max(0.0))
}

/// Kubo-Mori information `Tr(V Phi[V]) - <V>^2` of the perturbation in the thermal state,
/// where `Phi[V]_nm = V_nm (p_n - p_m)/(ln p_n - ln p_m)` in the eigenbasis of `omega`.
pub fn km_information(spec: &ThermalSpec) -> Result<f64> {
    let omega = thermal_state(spec);
    let es = eigh(omega.herm());
    let p = clip_spectrum(es.values.as_slice())?;
    let cut = support_cutoff(&p);
    if p.iter().any(|&x| x <= cut) {
        return Err(Error::SupportViolation("thermal state is numerically rank deficient at this beta".into()));
    }
    let v = es.vectors.adjoint() * spec.perturbation.as_mat() * &es.vectors;
    let n = p.len();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            let k = if (p[a] - p[b]).abs() < 1e-14 * p[a].max(p[b]) {
                0.5 * (p[a] + p[b])
            } else {
                (p[a] - p[b]) / (p[a].ln() - p[b].ln())
            };
            acc += k * v[(a, b)].norm_sqr();
        }
    }
    let mean = omega.expectation(&spec.perturbation);
    Ok(acc - mean * mean)
}

/// `ln Z` and the Gibbs state of `-beta H + lambda V`.
fn perturbed(spec: &ThermalSpec, lambda: f64) -> (f64, DensityMatrix) {
    let k = spec.hamiltonian.scale(-spec.beta).add(&spec.perturbation.scale(lambda));
    let es = eigh(&k);
    let m = es.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_z = m + es.values.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    // gibbs(H', 1) with H' = -k.
    (ln_z, gibbs(&k.scale(-1.0), 1.0))
}

/// Exact `D[omega_lambda || omega_0] = lambda <V>_lambda - ln(Z_lambda / Z_0)`.
pub fn perturbation_divergence(spec: &ThermalSpec, lambda: f64) -> f64 {
    let (lz0, _) = perturbed(spec, 0.0);
    let (lz, w) = perturbed(spec, lambda);
    (lambda * w.expectation(&spec.perturbation) - (lz - lz0)).max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct KmPerturbationReport {
    pub lambda: f64,
    pub km_information: f64,
    /// `lambda^2 KMI / 2`.
    pub leading_deviation: f64,
    /// `beta Delta<H> - Delta S` for `omega_lambda`, equal to `D[omega_lambda || omega_0]`.
    pub exact_deviation: f64,
    pub residual: f64,
    pub residual_half: f64,
    /// `residual / residual_half`, close to 8 when the cubic term dominates.
    pub residual_ratio: f64,
}

/// Second-order expansion of the Clausius deviation for `omega_lambda ~ e^{-beta H + lambda V}`.
pub fn km_perturbation(spec: &ThermalSpec, lambda: f64) -> Result<KmPerturbationReport> {
    if !(lambda.abs() <= 0.1) {
        return Err(Error::DomainError(format!("|lambda| = {} exceeds 0.1", lambda.abs())));
    }
    let kmi = km_information(spec)?;
    let exact = perturbation_divergence(spec, lambda);
    let residual = exact - 0.5 * lambda * lambda * kmi;
    let residual_half = perturbation_divergence(spec, lambda / 2.0) - 0.125 * lambda * lambda * kmi;
    Ok(KmPerturbationReport {
        lambda,
        km_information: kmi,
        leading_deviation: 0.5 * lambda * lambda * kmi,
        exact_deviation: exact,
        residual,
        residual_half,
        residual_ratio: residual / residual_half,
    })
}

/// The family `lambda -> e^{-beta H + lambda V}/Z`, for checking KM information against the KM metric.
pub fn perturbation_family(spec: &ThermalSpec) -> StateFamily {
    let spec = spec.clone();
    StateFamily::custom(1, move |x| Ok(perturbed(&spec, x[0]).1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{random_density, random_hermitian};
    use crate::qmetrics::km_metric;
    use crate::states::apply_channel;
    use approx::assert_abs_diff_eq;

    fn qubit_spec(beta: f64, v: HermitianMatrix) -> ThermalSpec {
        ThermalSpec::new(HermitianMatrix::diag(&[0.0, 1.0]), beta, v).unwrap()
    }

    #[test]
    fn cramer_rao_examples() {
        let r = cramer_rao_classical(&ClassicalFamily::bernoulli(), 0.5, 1).unwrap();
        assert_abs_diff_eq!(r.bound.to_f64(), 0.25, epsilon = 1e-10);
        let fam = StateFamily::unitary(DensityMatrix::plus(), HermitianMatrix::pauli_z().scale(0.5)).unwrap();
        let q = cramer_rao_quantum(&fam, 0.0, 100).unwrap();
        assert_abs_diff_eq!(q.bound.to_f64(), 0.01, epsilon = 1e-12);
        let still = StateFamily::unitary(DensityMatrix::basis(2, 0), HermitianMatrix::pauli_z()).unwrap();
        assert_eq!(cramer_rao_quantum(&still, 0.0, 1).unwrap().bound, ExtReal::Infinite);
    }

    #[test]
    fn speed_limit_examples() {
        let qfi = GFunction::qfi();
        let still = StateFamily::unitary(DensityMatrix::basis(2, 0), HermitianMatrix::pauli_z()).unwrap();
        let r = speed_limit(&still, 1.0, &qfi, 11).unwrap();
        assert_eq!(r.path_length, 0.0);
        assert_abs_diff_eq!(r.geodesic_length, 0.0, epsilon = 1e-7);
        assert_eq!(r.tau_min, 0.0);

        let rot = StateFamily::unitary(DensityMatrix::plus(), HermitianMatrix::pauli_z().scale(0.5)).unwrap();
        let r = speed_limit(&rot, std::f64::consts::FRAC_PI_2, &qfi, 51).unwrap();
        assert_abs_diff_eq!(r.path_length, r.geodesic_length, epsilon = 1e-6);
        assert!(r.pass);

        let noisy = StateFamily::noisy_unitary(DensityMatrix::bloch([0.9, 0.0, 0.0]).unwrap(), HermitianMatrix::pauli_z().scale(0.5), 0.5).unwrap();
        let r = speed_limit(&noisy, 1.5, &qfi, 201).unwrap();
        assert!(r.path_length > r.geodesic_length);
        assert!(r.tau_min < 1.5);
        let w = speed_limit(&noisy, 1.5, &GFunction::wyd(0.5).unwrap(), 201).unwrap();
        assert!(w.pass);
        assert!(speed_limit(&noisy, 1.0, &GFunction::km(), 5).is_err());
    }

    #[test]
    fn thermal_state_examples() {
        let z = ThermalSpec::new(HermitianMatrix::zeros(3), 2.0, HermitianMatrix::zeros(3)).unwrap();
        assert_abs_diff_eq!(thermal_state(&z).purity(), 1.0 / 3.0, epsilon = 1e-14);
        let s = qubit_spec(1.0, HermitianMatrix::zeros(2));
        let p = thermal_state(&s).spectrum();
        let e = (-1f64).exp();
        assert_abs_diff_eq!(p[1], 1.0 / (1.0 + e), epsilon = 1e-14);
        assert_abs_diff_eq!(p[0], e / (1.0 + e), epsilon = 1e-14);
        let cold = thermal_state(&qubit_spec(50.0, HermitianMatrix::zeros(2)));
        assert!(cold.as_mat()[(1, 1)].re < 1e-20);
        assert!(ThermalSpec::new(HermitianMatrix::zeros(2), 0.0, HermitianMatrix::zeros(2)).is_err());
    }

    #[test]
    fn clausius_examples() {
        let s = qubit_spec(1.3, HermitianMatrix::zeros(2));
        let r = clausius_report(&s, &thermal_state(&s)).unwrap();
        assert_abs_diff_eq!(r.relative_entropy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.clausius_slack, 0.0, epsilon = 1e-12);

        let other = gibbs(&s.hamiltonian, 0.4);
        let r = clausius_report(&s, &other).unwrap();
        assert!(r.identity_holds && r.clausius_holds);
        // Scalar oracle: two-level Gibbs populations.
        let pop = |b: f64| (-b).exp() / (1.0 + (-b).exp());
        let (p1, p0) = (pop(0.4), pop(1.3));
        let kl = (1.0 - p1) * ((1.0 - p1) / (1.0 - p0)).ln() + p1 * (p1 / p0).ln();
        assert_abs_diff_eq!(r.relative_entropy, kl, epsilon = 1e-12);

        for seed in 0..50 {
            let h = random_hermitian(3, seed);
            let spec = ThermalSpec::new(h, 0.7, HermitianMatrix::zeros(3)).unwrap();
            let ch = crate::numerics::random_channel(3, 2, seed + 1).unwrap();
            let r = clausius_report(&spec, &apply_channel(&ch, &thermal_state(&spec)).unwrap()).unwrap();
            assert!(r.identity_holds && r.clausius_holds, "seed {seed}: {r:?}");
        }
        let pure = DensityMatrix::basis(2, 0);
        assert!(clausius_report(&s, &pure).unwrap().identity_holds);
    }

    #[test]
    fn gibbs_relative_entropy_matches_generic_route() {
        for seed in 0..10 {
            let spec = ThermalSpec::new(random_hermitian(3, seed), 0.6, HermitianMatrix::zeros(3)).unwrap();
            let rho = random_density(3, 3, seed + 20).unwrap();
            let generic = crate::qdivergences::q_relative_entropy(&rho, &thermal_state(&spec)).unwrap().to_f64();
            assert_abs_diff_eq!(relative_entropy_to_gibbs(&rho, &spec).unwrap(), generic, epsilon = 1e-10);
        }
    }

    #[test]
    fn km_information_examples() {
        let s = qubit_spec(0.8, HermitianMatrix::zeros(2));
        assert_abs_diff_eq!(km_information(&s).unwrap(), 0.0, epsilon = 1e-15);
        let rep = km_perturbation(&s, 0.05).unwrap();
        assert_abs_diff_eq!(rep.exact_deviation, 0.0, epsilon = 1e-15);

        for seed in 0..10 {
            let h = random_hermitian(3, seed);
            let spec = ThermalSpec::new(h.clone(), 1.1, h.clone()).unwrap();
            let var = thermal_state(&spec).variance(&h);
            assert_abs_diff_eq!(km_information(&spec).unwrap(), var, epsilon = 1e-9);
        }
    }

    #[test]
    fn km_information_is_the_km_metric() {
        for seed in 0..10 {
            let spec = ThermalSpec::new(random_hermitian(2, seed), 0.9, random_hermitian(2, seed + 100)).unwrap();
            let kmi = km_information(&spec).unwrap();
            let metric = km_metric(&perturbation_family(&spec), &[0.0]).unwrap().matrix[(0, 0)];
            assert_abs_diff_eq!(kmi, metric, epsilon = 1e-7);
        }
    }

    #[test]
    fn deviation_expansion_is_cubic() {
        for seed in 0..20 {
            let spec = ThermalSpec::new(random_hermitian(2, seed), 1.0, random_hermitian(2, seed + 7)).unwrap();
            let r = km_perturbation(&spec, 1e-3).unwrap();
            assert!((6.5..=9.5).contains(&r.residual_ratio), "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn quantum_bound_beats_measured() {
        let rho0 = random_density(3, 3, 4).unwrap();
        let fam = StateFamily::unitary(rho0, random_hermitian(3, 5)).unwrap();
        let q = cramer_rao_quantum(&fam, 0.2, 1).unwrap().information;
        for k in 0..10 {
            let povm = crate::states::random_povm(3, 4, k).unwrap();
            let f2 = fam.clone();
            let cf = ClassicalFamily::new(1, move |x| crate::states::born(&f2.evaluate(x)?, &povm)).finite_difference();
            let c = cramer_rao_classical(&cf, 0.2, 1).unwrap().information;
            assert!(c <= q + 1e-7);
        }
    }
}
