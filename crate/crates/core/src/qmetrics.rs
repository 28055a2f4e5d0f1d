//! Monotone quantum metrics indexed by a standard operator monotone `g`.
//!
//! In the eigenbasis of `rho = sum p_n |n><n|`, with `D_k = <n|d_k rho|m>`,
//! every g-metric is
//!
//! ```text
//! F_g[i,j] = sum_{n,m} c_g(p_n, p_m) Re(D_i[n,m] D_j[m,n]),
//! c_g(x, y) = 1 / (y g(x / y))
//! ```
//!
//! The diagonal (`n = m`) terms give the classical Fisher information of the
//! eigenvalues and the off-diagonal terms give the quantum part. The
//! kernel `c_g` is symmetric because `g(t) = t g(1/t)`, and on a degenerate
//! pair it reduces to `1/p`, the same as on the diagonal, which is what keeps
//! the sum independent of the basis chosen inside a degenerate block.

use crate::classical::ConvexGenerator;
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::numerics::{
    clip_spectrum, eigh, richardson_hessian, sld_solve, support_cutoff, HermitianMatrix, DEGENERACY_TOL,
    DERIVATIVE_ZERO_TOL,
};
use crate::states::{DensityMatrix, StateFamily};
use nalgebra::DMatrix;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Which named g-function, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GTag {
    Qfi,
    Rld,
    Wyd(f64),
    Km,
    Custom(String),
}

impl fmt::Display for GTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GTag::Qfi => write!(f, "qfi"),
            GTag::Rld => write!(f, "rld"),
            GTag::Wyd(a) => write!(f, "wyd:{a}"),
            GTag::Km => write!(f, "km"),
            GTag::Custom(s) => write!(f, "{s}"),
        }
    }
}

/// A candidate standard operator monotone function selecting one monotone metric.
#[derive(Clone)]
pub struct GFunction {
    tag: GTag,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g0: f64,
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GFunction").field("tag", &self.tag).field("g0", &self.g0).finish()
    }
}

/// 200 log-spaced points in `[1e-6, 1e6]`.
pub fn validation_grid() -> Vec<f64> {
    (0..200).map(|k| 10f64.powf(-6.0 + 12.0 * k as f64 / 199.0)).collect()
}

impl GFunction {
    fn raw(tag: GTag, g: impl Fn(f64) -> f64 + Send + Sync + 'static, g0: f64) -> Self {
        GFunction { tag, g: Arc::new(g), g0 }
    }

    /// `g(t) = (1 + t)/2`, the minimal metric.
    pub fn qfi() -> Self {
        Self::raw(GTag::Qfi, |t| 0.5 * (1.0 + t), 0.5)
    }

    /// `g(t) = 2t/(1 + t)`, the maximal metric.
    pub fn rld() -> Self {
        Self::raw(GTag::Rld, |t| 2.0 * t / (1.0 + t), 0.0)
    }

    /// `g(t) = (t - 1)/ln t`.
    pub fn km() -> Self {
        Self::raw(
            GTag::Km,
            |t| {
                let u = t.ln();
                if u == 0.0 {
                    1.0
                } else {
                    u.exp_m1() / u
                }
            },
            0.0,
        )
    }

    /// `g_alpha(t) = alpha(1-alpha)(t-1)^2 / ((t^alpha - 1)(t^(1-alpha) - 1))`,
    /// for `alpha` in `[-1, 2]` without `0` and `1`.
    pub fn wyd(alpha: f64) -> Result<Self> {
        if !(-1.0..=2.0).contains(&alpha) || alpha == 0.0 || alpha == 1.0 {
            return Err(Error::AlphaOutOfRange { alpha, range: "[-1,2] without {0,1}" });
        }
        let g0 = if alpha > 0.0 && alpha < 1.0 { alpha * (1.0 - alpha) } else { 0.0 };
        Ok(Self::raw(
            GTag::Wyd(alpha),
            move |t| {
                let u = t.ln();
                if u == 0.0 {
                    return 1.0;
                }
                alpha * (1.0 - alpha) * u.exp_m1().powi(2) / ((alpha * u).exp_m1() * ((1.0 - alpha) * u).exp_m1())
            },
            g0,
        ))
    }

    /// User-supplied `g`, validated on the sample grid.
    pub fn custom(name: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static, g0: f64) -> Result<Self> {
        let gf = Self::raw(GTag::Custom(name.into()), g, g0);
        gf.validate()?;
        Ok(gf)
    }

    /// Parses `qfi`, `rld`, `km` and `wyd:<alpha>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "qfi" => Ok(Self::qfi()),
            "rld" => Ok(Self::rld()),
            "km" => Ok(Self::km()),
            _ => match name.strip_prefix("wyd:") {
                Some(a) => Self::wyd(a.parse().map_err(|e| Error::Parse(format!("bad alpha in {name:?}: {e}")))?),
                None => Err(Error::Parse(format!("unknown g function {name:?}; expected qfi, rld, km or wyd:<alpha>"))),
            },
        }
    }

    pub fn tag(&self) -> &GTag {
        &self.tag
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            self.g0
        } else {
            (self.g)(t)
        }
    }

    /// Checks `g(1) = 1`, `g(t) = t g(1/t)` and `2t/(1+t) <= g(t) <= (1+t)/2` on the grid.
    ///
    /// Tolerances are relative (`1e-10 * max(1, g)`) because at `t = 1e6`
    /// the values themselves are of order `1e5`.
    pub fn validate(&self) -> Result<()> {
        let g1 = self.eval(1.0);
        if (g1 - 1.0).abs() > 1e-12 {
            return Err(Error::NonMonotoneResult(format!("g(1) = {g1}")));
        }
        for t in validation_grid() {
            let g = self.eval(t);
            let tol = 1e-10 * g.abs().max(1.0);
            if !g.is_finite() || !(g > 0.0) {
                return Err(Error::NonMonotoneResult(format!("g({t:.3e}) = {g}")));
            }
            let sym = t * self.eval(1.0 / t);
            if (g - sym).abs() > tol {
                return Err(Error::NonMonotoneResult(format!("g({t:.3e}) = {g} but t g(1/t) = {sym}")));
            }
            let (lo, hi) = (2.0 * t / (1.0 + t), 0.5 * (1.0 + t));
            if g < lo - tol || g > hi + tol {
                return Err(Error::NonMonotoneResult(format!("g({t:.3e}) = {g} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// `c_g(x, y) = 1/(y g(x/y))`, evaluated with the larger argument in front.
    /// Infinite when one argument is zero and `g(0) = 0`.
    pub fn kernel(&self, x: f64, y: f64) -> ExtReal {
        let (big, small) = if x >= y { (x, y) } else { (y, x) };
        if small == 0.0 && self.g0 == 0.0 {
            return ExtReal::Infinite;
        }
        ExtReal::Finite(1.0 / (big * self.eval(small / big)))
    }
}

/// `g` from a convex generator: `1/g(t) = (f(t) + t f(1/t)) / (t - 1)^2` after rescaling to `f''(1) = 1`.
///
/// Errors with `NonSmoothDivergence` when `f` has no second derivative at 1
/// and `NonMonotoneResult` when the result fails the grid checks.
pub fn f_to_g(f: &ConvexGenerator) -> Result<GFunction> {
    f.check_normalised()?;
    let fdd = f.second_derivative_at_one()?;
    if !(fdd > 0.0) {
        return Err(Error::NonMonotoneResult(format!("f''(1) = {fdd} is not positive")));
    }
    let g0 = match (f.at_zero(), f.slope_at_infinity()) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) if a + b > 0.0 => fdd / (a + b),
        _ => 0.0,
    };
    let ff = f.clone();
    let gf = GFunction::raw(
        GTag::Custom(format!("g[{}]", f.name())),
        move |t| {
            if (t - 1.0).abs() < 1e-4 {
                // g(1) = 1 and g'(1) = 1/2 follow from the symmetry g(t) = t g(1/t).
                return 1.0 + 0.5 * (t - 1.0);
            }
            fdd * (t - 1.0).powi(2) / (ff.raw(t) + t * ff.raw(1.0 / t))
        },
        g0,
    );
    gf.validate()?;
    Ok(gf)
}

/// A metric split into its eigenvalue (classical) and eigenvector (quantum) parts.
#[derive(Debug, Clone, Serialize)]
pub struct MetricResult {
    #[serde(serialize_with = "ser_mat")]
    pub matrix: DMatrix<f64>,
    #[serde(serialize_with = "ser_mat")]
    pub classical_part: DMatrix<f64>,
    #[serde(serialize_with = "ser_mat")]
    pub quantum_part: DMatrix<f64>,
    /// Set when a component is infinite (`g(0) = 0` and the derivative
    /// couples the kernel to the support). The matrices then hold only the finite terms.
    pub divergent: bool,
}

pub(crate) fn ser_mat<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl MetricResult {
    /// The `(0, 0)` entry, `+inf` if flagged divergent.
    pub fn scalar(&self) -> ExtReal {
        if self.divergent {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(self.matrix[(0, 0)])
        }
    }
}

/// g-metric from a state and its parameter derivatives.
pub fn g_metric_from_parts(rho: &DensityMatrix, derivs: &[HermitianMatrix], g: &GFunction) -> Result<MetricResult> {
    let es = eigh(rho.herm());
    let p = clip_spectrum(es.values.as_slice())?;
    let cut = support_cutoff(&p);
    let u = &es.vectors;
    let dd: Vec<_> = derivs.iter().map(|d| u.adjoint() * d.as_mat() * u).collect();
    let k = derivs.len();
    let n = p.len();
    let mut classical = DMatrix::zeros(k, k);
    let mut quantum = DMatrix::zeros(k, k);
    let mut divergent = false;
    for a in 0..n {
        for b in 0..n {
            let coupled = dd.iter().any(|d| d[(a, b)].norm() > DERIVATIVE_ZERO_TOL);
            let (pa, pb) = (p[a], p[b]);
            if pa <= cut && pb <= cut {
                if coupled {
                    return Err(Error::SupportViolation(format!(
                        "derivative couples kernel directions {a} and {b}; the metric does not exist"
                    )));
                }
                continue;
            }
            let degenerate = a == b || (pa - pb).abs() < DEGENERACY_TOL;
            let pa_eff = if pa <= cut { 0.0 } else { pa };
            let pb_eff = if pb <= cut { 0.0 } else { pb };
            let c = if degenerate { ExtReal::Finite(2.0 / (pa + pb)) } else { g.kernel(pa_eff, pb_eff) };
            let c = match c {
                ExtReal::Finite(v) => v,
                ExtReal::Infinite => {
                    if coupled {
                        divergent = true;
                    }
                    continue;
                }
            };
            let target = if degenerate { &mut classical } else { &mut quantum };
            for i in 0..k {
                for j in i..k {
                    let v = c * (dd[i][(a, b)] * dd[j][(b, a)]).re;
                    target[(i, j)] += v;
                    if i != j {
                        target[(j, i)] += v;
                    }
                }
            }
        }
    }
    Ok(MetricResult { matrix: &classical + &quantum, classical_part: classical, quantum_part: quantum, divergent })
}

/// The g-metric of a family at `phi`.
pub fn g_metric(family: &StateFamily, phi: &[f64], g: &GFunction) -> Result<MetricResult> {
    let rho = family.evaluate(phi)?;
    let d = family.derivatives(phi)?;
    g_metric_from_parts(&rho, &d, g)
}

/// Quantum Fisher information via symmetric logarithmic derivatives:
/// `F_ij = Re Tr(rho L_i L_j)`.
pub fn qfi_metric_sld(family: &StateFamily, phi: &[f64]) -> Result<MetricResult> {
    let rho = family.evaluate(phi)?;
    let d = family.derivatives(phi)?;
    qfi_sld_from_parts(&rho, &d)
}

pub fn qfi_sld_from_parts(rho: &DensityMatrix, d: &[HermitianMatrix]) -> Result<MetricResult> {
    let ls = d.iter().map(|di| sld_solve(rho, di)).collect::<Result<Vec<_>>>()?;
    let k = ls.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = (rho.as_mat() * ls[i].as_mat() * ls[j].as_mat()).trace().re;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    // The eigenvalue part is the same for every g; reuse the kernel route for the split.
    let split = g_metric_from_parts(rho, d, &GFunction::qfi())?;
    let quantum = &m - &split.classical_part;
    Ok(MetricResult { matrix: m, classical_part: split.classical_part, quantum_part: quantum, divergent: false })
}

pub fn km_metric(family: &StateFamily, phi: &[f64]) -> Result<MetricResult> {
    g_metric(family, phi, &GFunction::km())
}

pub fn rld_metric(family: &StateFamily, phi: &[f64]) -> Result<MetricResult> {
    g_metric(family, phi, &GFunction::rld())
}

pub fn wyd_metric(family: &StateFamily, phi: &[f64], alpha: f64) -> Result<MetricResult> {
    g_metric(family, phi, &GFunction::wyd(alpha)?)
}

/// Kubo-Mori metric from the divided differences of `ln p`:
/// `sum_{n,m} (ln p_n - ln p_m)/(p_n - p_m) Re(D_i[n,m] D_j[m,n])`, with `1/p` on the diagonal.
///
/// Full-rank states only. Used as an independent route to [`km_metric`].
pub fn km_metric_log_form(family: &StateFamily, phi: &[f64]) -> Result<DMatrix<f64>> {
    let rho = family.evaluate(phi)?;
    let derivs = family.derivatives(phi)?;
    let es = eigh(rho.herm());
    let p = clip_spectrum(es.values.as_slice())?;
    if p.iter().any(|&x| x <= support_cutoff(&p)) {
        return Err(Error::SupportViolation("the log form needs a full-rank state".into()));
    }
    let u = &es.vectors;
    let dd: Vec<_> = derivs.iter().map(|d| u.adjoint() * d.as_mat() * u).collect();
    let k = dd.len();
    let mut m = DMatrix::zeros(k, k);
    for a in 0..p.len() {
        for b in 0..p.len() {
            let c = if (p[a] - p[b]).abs() < DEGENERACY_TOL { 2.0 / (p[a] + p[b]) } else { (p[a].ln() - p[b].ln()) / (p[a] - p[b]) };
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] += c * (dd[i][(a, b)] * dd[j][(b, a)]).re;
                }
            }
        }
    }
    Ok(m)
}

/// `sum_{n,m} c_g(p_n, p_m) (p_n - p_m)^2 |H_nm|^2`, the g-information of the
/// unitary family generated by `H`. For pure states this is `(2/g(0)) Var(H)`.
pub fn unitary_g_information(rho: &DensityMatrix, h: &HermitianMatrix, g: &GFunction) -> Result<ExtReal> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), h.dim()));
    }
    let es = eigh(rho.herm());
    let p = clip_spectrum(es.values.as_slice())?;
    let cut = support_cutoff(&p);
    let hm = es.vectors.adjoint() * h.as_mat() * &es.vectors;
    let n = p.len();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (pa, pb) = (if p[a] <= cut { 0.0 } else { p[a] }, if p[b] <= cut { 0.0 } else { p[b] });
            let amp = (pa - pb).powi(2) * hm[(a, b)].norm_sqr();
            if pa == 0.0 && pb == 0.0 {
                continue;
            }
            match g.kernel(pa, pb) {
                ExtReal::Finite(c) => acc += c * amp,
                ExtReal::Infinite => {
                    if amp.sqrt() > DERIVATIVE_ZERO_TOL {
                        return Ok(ExtReal::Infinite);
                    }
                }
            }
        }
    }
    Ok(ExtReal::Finite(acc))
}

/// `alpha(1-alpha)/2` times the WYD g-information, which equals
/// `-(1/2) Tr([rho^alpha, H][rho^(1-alpha), H])`.
///
/// Non-negative for `alpha` in `(0, 1)`; for `alpha` in `[-1, 0)` or `(1, 2]`
/// the prefactor is negative and so is the value.
pub fn wyd_information(rho: &DensityMatrix, h: &HermitianMatrix, alpha: f64) -> Result<f64> {
    let g = GFunction::wyd(alpha)?;
    match unitary_g_information(rho, h, &g)? {
        ExtReal::Finite(v) => Ok(0.5 * alpha * (1.0 - alpha) * v),
        ExtReal::Infinite => Err(Error::SupportViolation(format!(
            "WYD information at alpha = {alpha} diverges on this rank-deficient state"
        ))),
    }
}

/// `(1/2) Tr([rho^alpha, H][rho^(1-alpha), H])` as printed, for comparison with [`wyd_information`].
pub fn wyd_commutator_form(rho: &DensityMatrix, h: &HermitianMatrix, alpha: f64) -> Result<f64> {
    let ra = crate::numerics::support_power(rho.herm(), alpha)?;
    let rb = crate::numerics::support_power(rho.herm(), 1.0 - alpha)?;
    let c1 = crate::numerics::commutator(ra.as_mat(), h.as_mat());
    let c2 = crate::numerics::commutator(rb.as_mat(), h.as_mat());
    Ok(0.5 * (c1 * c2).trace().re)
}

/// Hessian of `D[rho_phi, rho_theta]` in `theta` at `theta = phi`.
pub fn induced_metric_numerical_q(
    divergence: impl Fn(&DensityMatrix, &DensityMatrix) -> Result<ExtReal>,
    family: &StateFamily,
    phi: &[f64],
) -> Result<DMatrix<f64>> {
    let base = family.evaluate(phi)?;
    richardson_hessian(
        |theta| {
            divergence(&base, &family.evaluate(theta)?)?
                .finite()
                .ok_or_else(|| Error::SupportViolation("divergence is infinite near coincidence".into()))
        },
        phi,
    )
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
