//! JSON records for matrices, distributions, POVMs and families.
//!
//! A matrix is either a nested array of reals or `{"re": [[..]], "im": [[..]]}`;
//! it is always written in the second form. Floats are written with 17
//! significant digits so that every binary64 value survives a round trip.

use crate::classical::ProbDist;
use crate::error::{Error, Result};
use crate::numerics::{c, CMat, HermitianMatrix};
use crate::states::{DensityMatrix, Povm, StateFamily};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// A complex matrix as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MatrixRecord {
    Complex { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
    Real(Vec<Vec<f64>>),
}

impl MatrixRecord {
    pub fn from_mat(m: &CMat) -> Self {
        let rows = |f: fn(&crate::numerics::C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        MatrixRecord::Complex { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_mat(&self) -> Result<CMat> {
        let (re, im) = match self {
            MatrixRecord::Complex { re, im } => (re, Some(im)),
            MatrixRecord::Real(re) => (re, None),
        };
        let n = re.len();
        if n == 0 || re.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix must be square and non-empty".into()));
        }
        if let Some(im) = im {
            if im.len() != n || im.iter().any(|r| r.len() != n) {
                return Err(Error::Parse("real and imaginary parts differ in shape".into()));
            }
        }
        Ok(CMat::from_fn(n, n, |i, j| c(re[i][j], im.map_or(0.0, |m| m[i][j]))))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_mat()?)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_hermitian()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PovmRecord {
    Wrapped { elements: Vec<MatrixRecord> },
    Bare(Vec<MatrixRecord>),
}

impl PovmRecord {
    pub fn to_povm(&self) -> Result<Povm> {
        let els = match self {
            PovmRecord::Wrapped { elements } | PovmRecord::Bare(elements) => elements,
        };
        Povm::new(els.iter().map(|m| m.to_hermitian()).collect::<Result<_>>()?)
    }
}

/// A state family on disk, with the parameter point `theta0` it is evaluated at.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyRecord {
    Unitary {
        rho0: MatrixRecord,
        hamiltonian: MatrixRecord,
        #[serde(default)]
        theta0: Vec<f64>,
    },
    Linear {
        rho0: MatrixRecord,
        directions: Vec<MatrixRecord>,
        #[serde(default)]
        theta0: Vec<f64>,
    },
    /// Parameter is the inverse temperature.
    Thermal {
        hamiltonian: MatrixRecord,
        #[serde(default)]
        theta0: Vec<f64>,
    },
    NoisyUnitary {
        rho0: MatrixRecord,
        hamiltonian: MatrixRecord,
        gamma: f64,
        #[serde(default)]
        theta0: Vec<f64>,
    },
}

impl FamilyRecord {
    pub fn to_family(&self) -> Result<StateFamily> {
        match self {
            FamilyRecord::Unitary { rho0, hamiltonian, .. } => StateFamily::unitary(rho0.to_density()?, hamiltonian.to_hermitian()?),
            FamilyRecord::Linear { rho0, directions, .. } => StateFamily::linear(
                rho0.to_density()?,
                directions.iter().map(|d| d.to_hermitian()).collect::<Result<_>>()?,
            ),
            FamilyRecord::Thermal { hamiltonian, .. } => Ok(StateFamily::thermal(hamiltonian.to_hermitian()?)),
            FamilyRecord::NoisyUnitary { rho0, hamiltonian, gamma, .. } => {
                StateFamily::noisy_unitary(rho0.to_density()?, hamiltonian.to_hermitian()?, *gamma)
            }
        }
    }

    pub fn theta0(&self) -> &[f64] {
        match self {
            FamilyRecord::Unitary { theta0, .. }
            | FamilyRecord::Linear { theta0, .. }
            | FamilyRecord::Thermal { theta0, .. }
            | FamilyRecord::NoisyUnitary { theta0, .. } => theta0,
        }
    }
}

/// A one-parameter family run over `t` in `[0, tau]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    #[serde(flatten)]
    pub family: FamilyRecord,
    pub tau: f64,
}

/// Distribution file: a bare array, or `{"p": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistRecord {
    Wrapped { p: Vec<f64> },
    Bare(Vec<f64>),
}

impl DistRecord {
    /// Renormalises within `1e-9`, rejects anything further off.
    pub fn to_dist(&self) -> Result<ProbDist> {
        match self {
            DistRecord::Wrapped { p } | DistRecord::Bare(p) => ProbDist::from_lenient(p.clone()),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<MatrixRecord> {
    read_json(path)
}

pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    read_matrix(path)?.to_density()
}

pub fn read_hermitian(path: &Path) -> Result<HermitianMatrix> {
    read_matrix(path)?.to_hermitian()
}

pub fn read_dist(path: &Path) -> Result<ProbDist> {
    read_json::<DistRecord>(path)?.to_dist()
}

/// Compact JSON writer printing floats as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}
