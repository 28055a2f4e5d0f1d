//! Dense complex Hermitian linear algebra and seeded random ensembles.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Matrices are
//! small (at most a few thousand rows, usually 2 to 16) so dense storage
//! and the Hermitian eigensolver are the workhorses throughout.

use crate::error::{Error, Result};
use crate::states::{DensityMatrix, KrausChannel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::ops::Deref;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

/// Max allowed `|A - A^dagger|` entry for Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-CLIP_TOL, 0)` are treated as zero.
pub const CLIP_TOL: f64 = 1e-12;
/// Eigenvalues below `SUPPORT_REL * max` are outside the support.
pub const SUPPORT_REL: f64 = 1e-12;
/// Eigenvalue pairs closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Default tensor-power cap, in qubit equivalents (`2^12 = 4096`).
pub const DEFAULT_DIM_CAP_QUBITS: u32 = 12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Current dimension cap in qubit equivalents; `QIG_DIM_CAP` overrides the default.
pub fn dim_cap_qubits() -> u32 {
    std::env::var("QIG_DIM_CAP")
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .unwrap_or(DEFAULT_DIM_CAP_QUBITS)
}

/// Errors with `DimensionCap` if `dim` exceeds `2^cap`.
pub fn check_dim_cap(dim: u128) -> Result<()> {
    let cap = dim_cap_qubits();
    let limit = 1u128.checked_shl(cap).unwrap_or(u128::MAX);
    if dim > limit {
        return Err(Error::DimensionCap { dim, cap_qubits: cap });
    }
    Ok(())
}

/// A square complex matrix that is Hermitian to within [`HERMITIAN_TOL`].
///
/// Construction symmetrises the input, so downstream code can rely on exact
/// Hermiticity.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        let dev = max_abs(&(&m - m.adjoint()));
        if !(dev <= HERMITIAN_TOL) {
            return Err(Error::NonHermitianInput(dev));
        }
        Ok(Self::symmetrised(m))
    }

    /// Symmetrises without checking. For results that are Hermitian by construction.
    pub(crate) fn symmetrised(m: CMat) -> Self {
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        HermitianMatrix(h)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| c(x, 0.0)))
    }

    pub fn diag(d: &[f64]) -> Self {
        HermitianMatrix(CMat::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0)))))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMat::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMat::zeros(dim, dim))
    }

    pub fn pauli_x() -> Self {
        HermitianMatrix(CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]))
    }

    pub fn pauli_y() -> Self {
        HermitianMatrix(CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]))
    }

    pub fn pauli_z() -> Self {
        Self::diag(&[1.0, -1.0])
    }

    /// `|psi><psi|` for a (not necessarily normalised) vector.
    pub fn projector(psi: &DVector<C64>) -> Self {
        Self::symmetrised(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// Real part of the trace (the imaginary part vanishes).
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(&self.0 * c(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianMatrix(&self.0 - &other.0)
    }

    /// `Re Tr(self * other)`, the Hilbert-Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        self.0.component_mul(&other.0.transpose()).iter().map(|z| z.re).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        HermitianMatrix(self.0.kronecker(&other.0))
    }

    /// Conjugation `U A U^dagger`.
    pub fn conjugate_by(&self, u: &CMat) -> Self {
        Self::symmetrised(u * &self.0 * u.adjoint())
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }
}

impl Deref for HermitianMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition with ascending eigenvalues and unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: DVector<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    /// `U f(diag) U^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            scaled.column_mut(j).scale_mut(fj);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.reconstruct_with(|x| x)
    }
}

/// Full Hermitian eigen-decomposition, eigenvalues ascending.
pub fn eigh(h: &HermitianMatrix) -> EigenSystem {
    let n = h.dim();
    if n == 0 {
        return EigenSystem { values: DVector::zeros(0), vectors: CMat::zeros(0, 0) };
    }
    let se = h.as_mat().clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = DVector::from_iterator(n, idx.iter().map(|&i| se.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    EigenSystem { values, vectors }
}

/// Eigenvalues only, ascending. Several times cheaper than [`eigh`] on large inputs.
pub fn eigvalsh(h: &HermitianMatrix) -> Vec<f64> {
    if h.dim() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = h.as_mat().clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Clips `[-CLIP_TOL, 0)` to zero; anything more negative is a `DomainError`.
pub fn clip_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&x| {
            if x >= 0.0 {
                Ok(x)
            } else if x >= -CLIP_TOL {
                Ok(0.0)
            } else {
                Err(Error::DomainError(format!("eigenvalue {x:.3e} is negative beyond the clip tolerance")))
            }
        })
        .collect()
}

/// Scale-relative support threshold for a non-negative spectrum.
pub fn support_cutoff(values: &[f64]) -> f64 {
    SUPPORT_REL * values.iter().copied().fold(0.0, f64::max)
}

/// `f(A)` for positive semidefinite `A`, after eigenvalue clipping.
pub fn matrix_function(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let es = eigh(a);
    let vals = clip_spectrum(es.values.as_slice())?;
    apply_on_spectrum(&es, &vals, f)
}

/// `A^a` on the support of a PSD matrix, exactly zero on its kernel.
///
/// Eigenvalues below the support cutoff are treated as zero, so rounding
/// noise in a rank-deficient input does not leak into fractional powers.
pub fn support_power(a: &HermitianMatrix, power: f64) -> Result<HermitianMatrix> {
    let es = eigh(a);
    let vals = clip_spectrum(es.values.as_slice())?;
    let cut = support_cutoff(&vals);
    apply_on_spectrum(&es, &vals, |x| if x > cut { x.powf(power) } else { 0.0 })
}

/// `f(A)` for any Hermitian `A`; no clipping.
pub fn hermitian_function(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let es = eigh(a);
    let vals: Vec<f64> = es.values.iter().copied().collect();
    apply_on_spectrum(&es, &vals, f)
}

fn apply_on_spectrum(es: &EigenSystem, vals: &[f64], f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    if let Some((x, y)) = vals.iter().zip(&fv).find(|(_, y)| !y.is_finite()) {
        return Err(Error::DomainError(format!("function undefined at eigenvalue {x:.6e} (gave {y})")));
    }
    let mut scaled = es.vectors.clone();
    for (j, &y) in fv.iter().enumerate() {
        scaled.column_mut(j).scale_mut(y);
    }
    Ok(HermitianMatrix::symmetrised(scaled * es.vectors.adjoint()))
}

/// `||A||_1`, the sum of absolute eigenvalues.
pub fn trace_norm(a: &HermitianMatrix) -> f64 {
    eigvalsh(a).iter().map(|x| x.abs()).sum()
}

/// Symmetric logarithmic derivative: solves `drho = (rho L + L rho) / 2`.
pub fn sld_solve(rho: &DensityMatrix, drho: &HermitianMatrix) -> Result<HermitianMatrix> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), drho.dim()));
    }
    let tr = drho.trace_re();
    if tr.abs() > 1e-8 {
        return Err(Error::DomainError(format!("state derivative has trace {tr:.3e}, expected 0")));
    }
    let es = eigh(rho.herm());
    let p = clip_spectrum(es.values.as_slice())?;
    let cut = support_cutoff(&p);
    let u = &es.vectors;
    let d = u.adjoint() * drho.as_mat() * u;
    let n = p.len();
    let mut l = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = p[i] + p[j];
            if s > cut {
                l[(i, j)] = d[(i, j)] * (2.0 / s);
            } else if d[(i, j)].norm() > DERIVATIVE_ZERO_TOL {
                return Err(Error::SupportViolation(format!(
                    "derivative element {:.3e} outside the support of rho",
                    d[(i, j)].norm()
                )));
            }
        }
    }
    Ok(HermitianMatrix::symmetrised(u * l * u.adjoint()))
}

/// Derivative matrix elements below this count as zero when deciding support changes.
pub const DERIVATIVE_ZERO_TOL: f64 = 1e-8;

/// n-fold Kronecker power, subject to the dimension cap.
pub fn tensor_power(a: &HermitianMatrix, n: usize) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix(kron_power(a.as_mat(), n)?))
}

/// n-fold Kronecker power of any square matrix, subject to the dimension cap.
pub fn kron_power(a: &CMat, n: usize) -> Result<CMat> {
    if n == 0 {
        return Err(Error::DomainError("tensor power needs n >= 1".into()));
    }
    let dim = (a.nrows() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_dim_cap(dim)?;
    let mut out = a.clone();
    for _ in 1..n {
        out = out.kronecker(a);
    }
    Ok(out)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Seeded generator used by every random ensemble.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar unitary from QR of a Ginibre matrix with the phases of `R` divided out.
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMat {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let col = q.column(j) * ph;
        q.set_column(j, &col);
    }
    q
}

pub fn random_unitary(dim: usize, seed: u64) -> CMat {
    haar_unitary(dim, &mut rng_from_seed(seed))
}

/// `G G^dagger / Tr` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density_with<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::DomainError(format!("rank {rank} must lie in 1..={dim}")));
    }
    let g = ginibre(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityMatrix::from_hermitian_unchecked(HermitianMatrix::symmetrised(m / c(tr, 0.0))))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// Random Hermitian matrix from the Gaussian unitary ensemble (unit-variance entries).
pub fn random_hermitian_with<R: Rng>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = ginibre(dim, dim, rng);
    HermitianMatrix::symmetrised(g)
}

pub fn random_hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    random_hermitian_with(dim, &mut rng_from_seed(seed))
}

/// Channel whose Kraus operators are the row blocks of a Haar isometry.
pub fn random_channel_with<R: Rng>(dim: usize, kraus_count: usize, rng: &mut R) -> Result<KrausChannel> {
    if kraus_count == 0 {
        return Err(Error::InvalidChannel("need at least one Kraus operator".into()));
    }
    let u = haar_unitary(dim * kraus_count, rng);
    let iso = u.columns(0, dim);
    let kraus = (0..kraus_count).map(|a| iso.rows(a * dim, dim).into_owned()).collect();
    KrausChannel::new(kraus)
}

pub fn random_channel(dim: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    random_channel_with(dim, kraus_count, &mut rng_from_seed(seed))
}

/// Step for Hessians: `1e-3 * max(1, |x|_inf)`.
pub fn hessian_step(x: &[f64]) -> f64 {
    1e-3 * x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Hessian of `f` at `x0` by central second differences at `h`, `h/2`, `h/4`.
///
/// Each entry must show the `O(h^2)` signature: the successive differences
/// shrink by a factor in `[3.5, 4.5]`, unless they are already below the
/// noise floor. The returned value is the Richardson extrapolation of the
/// two finest levels. A failing entry raises `NonSmoothDivergence`.
pub fn richardson_hessian(f: impl Fn(&[f64]) -> Result<f64>, x0: &[f64]) -> Result<DMatrix<f64>> {
    let d = x0.len();
    let h0 = hessian_step(x0);
    let f0 = f(x0)?;
    let eval = |shifts: &[(usize, f64)]| -> Result<f64> {
        let mut x = x0.to_vec();
        for &(i, s) in shifts {
            x[i] += s;
        }
        f(&x)
    };
    let entry = |i: usize, j: usize, h: f64| -> Result<f64> {
        if i == j {
            Ok((eval(&[(i, h)])? - 2.0 * f0 + eval(&[(i, -h)])?) / (h * h))
        } else {
            let pp = eval(&[(i, h), (j, h)])?;
            let pm = eval(&[(i, h), (j, -h)])?;
            let mp = eval(&[(i, -h), (j, h)])?;
            let mm = eval(&[(i, -h), (j, -h)])?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        }
    };
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let a = entry(i, j, h0)?;
            let b = entry(i, j, h0 / 2.0)?;
            let cc = entry(i, j, h0 / 4.0)?;
            let e1 = a - b;
            let e2 = b - cc;
            let scale = 1.0f64.max(cc.abs());
            let ratio = e1 / e2;
            let smooth = e1.abs() <= 1e-6 * scale || (3.5..=4.5).contains(&ratio);
            if !smooth || !cc.is_finite() {
                return Err(Error::NonSmoothDivergence { ratio });
            }
            let v = (4.0 * cc - b) / 3.0;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}
