//! Quantum states, measurements, channels and differentiable state families.

use crate::classical::ProbDist;
use crate::error::{Error, Result};
use crate::numerics::{
    c, clip_spectrum, eigh, eigvalsh, hermitian_function, max_abs, CMat, EigenSystem, HermitianMatrix, C64, CLIP_TOL,
};
use nalgebra::DVector;
use std::fmt;
use std::sync::Arc;

/// Tolerance on `Tr rho = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on POVM completeness and channel trace preservation.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    /// Validates trace and positivity (minimum eigenvalue at least `-1e-12`).
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let tr = h.trace_re();
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace is {tr}, not 1")));
        }
        let ev = eigvalsh(&h);
        if let Some(&m) = ev.first() {
            if m < -CLIP_TOL {
                return Err(Error::InvalidState(format!("eigenvalue {m:.3e} is negative")));
            }
        }
        Ok(DensityMatrix(h))
    }

    /// Wraps a matrix that is a state by construction (tensor powers, channel outputs).
    pub(crate) fn from_hermitian_unchecked(h: HermitianMatrix) -> Self {
        DensityMatrix(h)
    }

    pub fn from_matrix(m: CMat) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Diagonal state with the given populations.
    pub fn diag(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diag(p))
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Ok(DensityMatrix(HermitianMatrix::projector(&(psi / c(n, 0.0)))))
    }

    /// Computational basis state `|k>` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut p = vec![0.0; dim];
        p[k] = 1.0;
        DensityMatrix(HermitianMatrix::diag(&p))
    }

    /// `|+> = (|0> + |1>)/sqrt 2`.
    pub fn plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix(HermitianMatrix::projector(&DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(HermitianMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Qubit state from a Bloch vector with `|r| <= 1`.
    pub fn bloch(r: [f64; 3]) -> Result<Self> {
        let m = HermitianMatrix::identity(2)
            .add(&HermitianMatrix::pauli_x().scale(r[0]))
            .add(&HermitianMatrix::pauli_y().scale(r[1]))
            .add(&HermitianMatrix::pauli_z().scale(r[2]))
            .scale(0.5);
        Self::new(m)
    }

    /// `(rho + eps I) / (1 + d eps)`.
    pub fn regularised(&self, eps: f64) -> Self {
        let d = self.dim() as f64;
        DensityMatrix(self.0.add(&HermitianMatrix::identity(self.dim()).scale(eps)).scale(1.0 / (1.0 + d * eps)))
    }

    /// `lambda rho + (1 - lambda) sigma`.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::DomainError(format!("mixing weight {lambda} outside [0,1]")));
        }
        Ok(DensityMatrix(self.0.scale(lambda).add(&other.0.scale(1.0 - lambda))))
    }

    pub fn kron(&self, other: &DensityMatrix) -> Self {
        DensityMatrix(self.0.kron(&other.0))
    }

    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        Ok(DensityMatrix(crate::numerics::tensor_power(&self.0, n)?))
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &CMat) -> Self {
        DensityMatrix(self.0.conjugate_by(u))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn herm(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_mat(&self) -> &CMat {
        self.0.as_mat()
    }

    pub fn eigh(&self) -> EigenSystem {
        eigh(&self.0)
    }

    /// Clipped spectrum, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        clip_spectrum(&eigvalsh(&self.0)).unwrap_or_else(|_| eigvalsh(&self.0).into_iter().map(|x| x.max(0.0)).collect())
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, a: &HermitianMatrix) -> f64 {
        self.0.hs_inner(a)
    }

    /// `<A^2> - <A>^2`.
    pub fn variance(&self, a: &HermitianMatrix) -> f64 {
        let m = self.expectation(a);
        let a2 = HermitianMatrix::symmetrised(a.as_mat() * a.as_mat());
        self.expectation(&a2) - m * m
    }

    pub fn purity(&self) -> f64 {
        self.0.hs_inner(&self.0)
    }

    /// Von Neumann entropy `-Tr rho ln rho`.
    pub fn entropy(&self) -> f64 {
        self.spectrum().iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }
}

/// A finite collection of positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm(Vec<HermitianMatrix>);

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = first.dim();
        let mut sum = CMat::zeros(d, d);
        for (k, e) in elements.iter().enumerate() {
            if e.dim() != d {
                return Err(Error::DimensionMismatch(d, e.dim()));
            }
            let ev = eigvalsh(e);
            if ev.first().is_some_and(|&m| m < -CLIP_TOL) {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {:.3e}", ev[0])));
            }
            sum += e.as_mat();
        }
        let dev = max_abs(&(sum - CMat::identity(d, d)));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:.3e}")));
        }
        Ok(Povm(elements))
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn projective(u: &CMat) -> Result<Self> {
        let els = (0..u.ncols()).map(|j| HermitianMatrix::projector(&u.column(j).into_owned())).collect();
        Self::new(els)
    }

    pub fn computational(dim: usize) -> Self {
        Povm((0..dim).map(|k| DensityMatrix::basis(dim, k).herm().clone()).collect())
    }

    pub fn trivial(dim: usize) -> Self {
        Povm(vec![HermitianMatrix::identity(dim)])
    }

    /// Product measurement `{A_i (x) B_j}`, first index slow.
    pub fn kron(&self, other: &Povm) -> Self {
        let mut v = Vec::with_capacity(self.len() * other.len());
        for a in &self.0 {
            for b in &other.0 {
                v.push(a.kron(b));
            }
        }
        Povm(v)
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }
}

/// Random POVM `{K_a^dagger K_a}` from the Kraus operators of a random channel.
pub fn random_povm(dim: usize, outcomes: usize, seed: u64) -> Result<Povm> {
    let ch = crate::numerics::random_channel(dim, outcomes, seed)?;
    Povm::new(ch.kraus().iter().map(|k| HermitianMatrix::symmetrised(k.adjoint() * k)).collect())
}

/// Born rule `p_i = Tr(rho Pi_i)`, clipped at zero and renormalised.
pub fn born(rho: &DensityMatrix, povm: &Povm) -> Result<ProbDist> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), povm.dim()));
    }
    ProbDist::from_lenient(povm.elements().iter().map(|e| rho.expectation(e)).collect())
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel(Vec<CMat>);

impl KrausChannel {
    /// Checks shapes and `sum K^dagger K = I` within `1e-9`.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dout, din) = (first.nrows(), first.ncols());
        let mut s = CMat::zeros(din, din);
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::InvalidChannel("Kraus operators have different shapes".into()));
            }
            s += k.adjoint() * k;
        }
        let dev = max_abs(&(s - CMat::identity(din, din)));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!("not trace preserving (deviation {dev:.3e})")));
        }
        Ok(KrausChannel(kraus))
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel(vec![CMat::identity(dim, dim)])
    }

    /// Single-Kraus unitary channel.
    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Qubit depolarising channel `rho -> (1-p) rho + p I/2`.
    pub fn depolarising_qubit(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::DomainError(format!("depolarising strength {p} outside [0,1]")));
        }
        let a = (1.0 - 0.75 * p).sqrt();
        let b = (p / 4.0).sqrt();
        Self::new(vec![
            CMat::identity(2, 2) * c(a, 0.0),
            HermitianMatrix::pauli_x().as_mat() * c(b, 0.0),
            HermitianMatrix::pauli_y().as_mat() * c(b, 0.0),
            HermitianMatrix::pauli_z().as_mat() * c(b, 0.0),
        ])
    }

    /// Qubit dephasing `rho -> (1-p) rho + p Z rho Z`.
    pub fn dephasing_qubit(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::DomainError(format!("dephasing strength {p} outside [0,1]")));
        }
        Self::new(vec![
            CMat::identity(2, 2) * c((1.0 - p).sqrt(), 0.0),
            HermitianMatrix::pauli_z().as_mat() * c(p.sqrt(), 0.0),
        ])
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.0
    }

    pub fn input_dim(&self) -> usize {
        self.0[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.0[0].nrows()
    }

    /// `sum K A K^dagger` on any Hermitian operator (the map is linear).
    pub fn apply_operator(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        if a.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(self.input_dim(), a.dim()));
        }
        let mut out = CMat::zeros(self.output_dim(), self.output_dim());
        for k in &self.0 {
            out += k * a.as_mat() * k.adjoint();
        }
        Ok(HermitianMatrix::symmetrised(out))
    }

    /// `(other o self)`: apply `self` first.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.input_dim() != self.output_dim() {
            return Err(Error::DimensionMismatch(other.input_dim(), self.output_dim()));
        }
        let mut v = Vec::with_capacity(self.0.len() * other.0.len());
        for b in &other.0 {
            for a in &self.0 {
                v.push(b * a);
            }
        }
        Ok(KrausChannel(v))
    }
}

/// `Lambda[rho]`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply_operator(rho.herm())?;
    let tr = out.trace_re();
    Ok(DensityMatrix::from_hermitian_unchecked(out.scale(1.0 / tr)))
}

type StateFn = Arc<dyn Fn(&[f64]) -> Result<DensityMatrix> + Send + Sync>;

/// How [`StateFamily::derivatives`] obtains `d rho / d phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Closed form where the kind allows it, central differences otherwise.
    Analytic,
    /// Always central differences with step `1e-5 * max(1, |phi_k|)`.
    FiniteDifference,
}

/// The shape of a state family.
#[derive(Clone)]
pub enum FamilyKind {
    /// `rho(theta) = e^{-i theta H} rho0 e^{i theta H}`, one parameter.
    Unitary { rho0: DensityMatrix, hamiltonian: HermitianMatrix },
    /// `rho(phi) = rho0 + sum_k phi_k Delta_k` with traceless `Delta_k`.
    Linear { rho0: DensityMatrix, directions: Vec<HermitianMatrix> },
    /// `omega(beta) = e^{-beta H} / Z`, parameter `beta`.
    Thermal { hamiltonian: HermitianMatrix },
    /// Unitary rotation followed by depolarisation at rate `gamma`:
    /// `e^{-gamma t} U_t rho0 U_t^dagger + (1 - e^{-gamma t}) I/d`.
    NoisyUnitary { rho0: DensityMatrix, hamiltonian: HermitianMatrix, gamma: f64 },
    /// Arbitrary evaluator; derivatives always by finite differences.
    Custom { params: usize, eval: StateFn },
    /// `Lambda[rho(phi)]` for a parameter-independent channel.
    Mapped { inner: Box<StateFamily>, channel: KrausChannel },
    /// `rho(phi) (x) sigma(phi)`.
    Product(Box<StateFamily>, Box<StateFamily>),
    /// `lambda rho(phi) + (1 - lambda) sigma(phi)`.
    Mixture { a: Box<StateFamily>, b: Box<StateFamily>, weight: f64 },
}

/// A differentiable family `phi -> rho_phi`.
#[derive(Clone)]
pub struct StateFamily {
    kind: FamilyKind,
    mode: DerivativeMode,
}

impl fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match &self.kind {
            FamilyKind::Unitary { .. } => "unitary",
            FamilyKind::Linear { .. } => "linear",
            FamilyKind::Thermal { .. } => "thermal",
            FamilyKind::NoisyUnitary { .. } => "noisy_unitary",
            FamilyKind::Custom { .. } => "custom",
            FamilyKind::Mapped { .. } => "mapped",
            FamilyKind::Product(..) => "product",
            FamilyKind::Mixture { .. } => "mixture",
        };
        f.debug_struct("StateFamily").field("kind", &tag).field("mode", &self.mode).finish()
    }
}

fn unitary_from(h: &HermitianMatrix, theta: f64) -> CMat {
    let es = eigh(h);
    let n = h.dim();
    let mut scaled = es.vectors.clone();
    for j in 0..n {
        let ph = C64::from_polar(1.0, -theta * es.values[j]);
        let col = scaled.column(j) * ph;
        scaled.set_column(j, &col);
    }
    scaled * es.vectors.adjoint()
}

/// `e^{-i theta H}`.
pub fn evolution_operator(h: &HermitianMatrix, theta: f64) -> CMat {
    unitary_from(h, theta)
}

/// Gibbs state `e^{-beta H}/Z`, shifting the exponent by its maximum first.
pub fn gibbs(h: &HermitianMatrix, beta: f64) -> DensityMatrix {
    let es = eigh(h);
    let e: Vec<f64> = es.values.iter().map(|&x| -beta * x).collect();
    let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut scaled = es.vectors.clone();
    for j in 0..w.len() {
        scaled.column_mut(j).scale_mut(w[j] / z);
    }
    DensityMatrix::from_hermitian_unchecked(HermitianMatrix::symmetrised(scaled * es.vectors.adjoint()))
}

impl StateFamily {
    fn with_kind(kind: FamilyKind) -> Self {
        StateFamily { kind, mode: DerivativeMode::Analytic }
    }

    pub fn unitary(rho0: DensityMatrix, hamiltonian: HermitianMatrix) -> Result<Self> {
        if rho0.dim() != hamiltonian.dim() {
            return Err(Error::DimensionMismatch(rho0.dim(), hamiltonian.dim()));
        }
        Ok(Self::with_kind(FamilyKind::Unitary { rho0, hamiltonian }))
    }

    /// Directions must be traceless within `1e-10`.
    pub fn linear(rho0: DensityMatrix, directions: Vec<HermitianMatrix>) -> Result<Self> {
        for d in &directions {
            if d.dim() != rho0.dim() {
                return Err(Error::DimensionMismatch(rho0.dim(), d.dim()));
            }
            if d.trace_re().abs() > TRACE_TOL {
                return Err(Error::InvalidState(format!("direction has trace {:.3e}", d.trace_re())));
            }
        }
        Ok(Self::with_kind(FamilyKind::Linear { rho0, directions }))
    }

    pub fn thermal(hamiltonian: HermitianMatrix) -> Self {
        Self::with_kind(FamilyKind::Thermal { hamiltonian })
    }

    pub fn noisy_unitary(rho0: DensityMatrix, hamiltonian: HermitianMatrix, gamma: f64) -> Result<Self> {
        if rho0.dim() != hamiltonian.dim() {
            return Err(Error::DimensionMismatch(rho0.dim(), hamiltonian.dim()));
        }
        if !(gamma >= 0.0) {
            return Err(Error::DomainError(format!("noise rate {gamma} must be non-negative")));
        }
        Ok(Self::with_kind(FamilyKind::NoisyUnitary { rho0, hamiltonian, gamma }))
    }

    pub fn custom(params: usize, eval: impl Fn(&[f64]) -> Result<DensityMatrix> + Send + Sync + 'static) -> Self {
        Self::with_kind(FamilyKind::Custom { params, eval: Arc::new(eval) })
    }

    pub fn mapped(self, channel: KrausChannel) -> Result<Self> {
        if channel.input_dim() != self.dim() {
            return Err(Error::DimensionMismatch(channel.input_dim(), self.dim()));
        }
        Ok(Self::with_kind(FamilyKind::Mapped { inner: Box::new(self), channel }))
    }

    pub fn product(a: StateFamily, b: StateFamily) -> Result<Self> {
        if a.params() != b.params() {
            return Err(Error::LengthMismatch(a.params(), b.params()));
        }
        Ok(Self::with_kind(FamilyKind::Product(Box::new(a), Box::new(b))))
    }

    pub fn mixture(a: StateFamily, b: StateFamily, weight: f64) -> Result<Self> {
        if a.params() != b.params() {
            return Err(Error::LengthMismatch(a.params(), b.params()));
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch(a.dim(), b.dim()));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::DomainError(format!("mixing weight {weight} outside [0,1]")));
        }
        Ok(Self::with_kind(FamilyKind::Mixture { a: Box::new(a), b: Box::new(b), weight }))
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn params(&self) -> usize {
        match &self.kind {
            FamilyKind::Unitary { .. } | FamilyKind::Thermal { .. } | FamilyKind::NoisyUnitary { .. } => 1,
            FamilyKind::Linear { directions, .. } => directions.len(),
            FamilyKind::Custom { params, .. } => *params,
            FamilyKind::Mapped { inner, .. } => inner.params(),
            FamilyKind::Product(a, _) => a.params(),
            FamilyKind::Mixture { a, .. } => a.params(),
        }
    }

    /// Hilbert-space dimension. Evaluates custom families at the origin.
    pub fn dim(&self) -> usize {
        match &self.kind {
            FamilyKind::Unitary { rho0, .. } | FamilyKind::Linear { rho0, .. } | FamilyKind::NoisyUnitary { rho0, .. } => {
                rho0.dim()
            }
            FamilyKind::Thermal { hamiltonian } => hamiltonian.dim(),
            FamilyKind::Custom { params, eval } => eval(&vec![0.0; *params]).map(|r| r.dim()).unwrap_or(0),
            FamilyKind::Mapped { channel, .. } => channel.output_dim(),
            FamilyKind::Product(a, b) => a.dim() * b.dim(),
            FamilyKind::Mixture { a, .. } => a.dim(),
        }
    }

    pub fn evaluate(&self, phi: &[f64]) -> Result<DensityMatrix> {
        if phi.len() != self.params() {
            return Err(Error::LengthMismatch(phi.len(), self.params()));
        }
        match &self.kind {
            FamilyKind::Unitary { rho0, hamiltonian } => Ok(rho0.conjugate_by(&unitary_from(hamiltonian, phi[0]))),
            FamilyKind::Linear { rho0, directions } => {
                let mut m = rho0.herm().clone();
                for (d, x) in directions.iter().zip(phi) {
                    m = m.add(&d.scale(*x));
                }
                DensityMatrix::new(m)
            }
            FamilyKind::Thermal { hamiltonian } => Ok(gibbs(hamiltonian, phi[0])),
            FamilyKind::NoisyUnitary { rho0, hamiltonian, gamma } => {
                let t = phi[0];
                let rot = rho0.conjugate_by(&unitary_from(hamiltonian, t));
                let w = (-gamma * t).exp();
                let mm = DensityMatrix::maximally_mixed(rho0.dim());
                rot.mix(&mm, w.min(1.0))
            }
            FamilyKind::Custom { eval, .. } => eval(phi),
            FamilyKind::Mapped { inner, channel } => apply_channel(channel, &inner.evaluate(phi)?),
            FamilyKind::Product(a, b) => Ok(a.evaluate(phi)?.kron(&b.evaluate(phi)?)),
            FamilyKind::Mixture { a, b, weight } => a.evaluate(phi)?.mix(&b.evaluate(phi)?, *weight),
        }
    }

    /// `d rho / d phi_k` for every parameter.
    pub fn derivatives(&self, phi: &[f64]) -> Result<Vec<HermitianMatrix>> {
        if phi.len() != self.params() {
            return Err(Error::LengthMismatch(phi.len(), self.params()));
        }
        if self.mode == DerivativeMode::FiniteDifference {
            return self.finite_difference(phi);
        }
        match &self.kind {
            FamilyKind::Unitary { hamiltonian, .. } => {
                let rho = self.evaluate(phi)?;
                Ok(vec![minus_i_commutator(hamiltonian, rho.herm())])
            }
            FamilyKind::Linear { directions, .. } => Ok(directions.clone()),
            FamilyKind::Thermal { hamiltonian } => {
                let w = gibbs(hamiltonian, phi[0]);
                let e = w.expectation(hamiltonian);
                let shifted = hamiltonian.sub(&HermitianMatrix::identity(w.dim()).scale(e));
                // -(H - <H>) omega, symmetrised; the two factors commute.
                Ok(vec![HermitianMatrix::symmetrised(-(shifted.as_mat() * w.as_mat()))])
            }
            FamilyKind::NoisyUnitary { rho0, hamiltonian, gamma } => {
                let t = phi[0];
                let rot = rho0.conjugate_by(&unitary_from(hamiltonian, t));
                let w = (-gamma * t).exp();
                let d = rho0.dim() as f64;
                let mm = HermitianMatrix::identity(rho0.dim()).scale(1.0 / d);
                let drot = minus_i_commutator(hamiltonian, rot.herm());
                Ok(vec![drot.scale(w).add(&mm.sub(rot.herm()).scale(gamma * w))])
            }
            FamilyKind::Custom { .. } => self.finite_difference(phi),
            FamilyKind::Mapped { inner, channel } => {
                inner.derivatives(phi)?.iter().map(|d| channel.apply_operator(d)).collect()
            }
            FamilyKind::Product(a, b) => {
                let (ra, rb) = (a.evaluate(phi)?, b.evaluate(phi)?);
                let (da, db) = (a.derivatives(phi)?, b.derivatives(phi)?);
                Ok(da.iter().zip(&db).map(|(x, y)| x.kron(rb.herm()).add(&ra.herm().kron(y))).collect())
            }
            FamilyKind::Mixture { a, b, weight } => {
                let (da, db) = (a.derivatives(phi)?, b.derivatives(phi)?);
                Ok(da.iter().zip(&db).map(|(x, y)| x.scale(*weight).add(&y.scale(1.0 - weight))).collect())
            }
        }
    }

    fn finite_difference(&self, phi: &[f64]) -> Result<Vec<HermitianMatrix>> {
        (0..phi.len())
            .map(|k| {
                let h = 1e-5 * phi[k].abs().max(1.0);
                let mut up = phi.to_vec();
                let mut dn = phi.to_vec();
                up[k] += h;
                dn[k] -= h;
                let d = self.evaluate(&up)?.herm().sub(self.evaluate(&dn)?.herm()).scale(0.5 / h);
                let tr = d.trace_re() / d.dim() as f64;
                Ok(d.sub(&HermitianMatrix::identity(d.dim()).scale(tr)))
            })
            .collect()
    }
}

/// `-i [H, A]`, Hermitian whenever `H` and `A` are.
pub fn minus_i_commutator(h: &HermitianMatrix, a: &HermitianMatrix) -> HermitianMatrix {
    let comm = crate::numerics::commutator(h.as_mat(), a.as_mat());
    HermitianMatrix::symmetrised(comm * c(0.0, -1.0))
}

/// Matrix exponential of a Hermitian matrix.
pub fn expm_hermitian(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    hermitian_function(a, f64::exp)
}
