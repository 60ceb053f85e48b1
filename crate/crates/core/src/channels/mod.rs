//! Quantum channels in Kraus form and their matrix representations.
//!
//! A [`KrausChannel`] acts as `M(a) = Σᵢ Kᵢ a Kᵢ*`. Construction only checks
//! shapes; [`KrausChannel::validate`] decides whether the Kraus set is CPTP.
//! The family constructors in [`zoo`] validate before returning.

mod zoo;

pub use zoo::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DensityMatrix, HermitianOperator, Operator, TOL_PSD};

/// Tolerance on `‖Σ Kᵢ*Kᵢ − id‖_F`.
pub const TOL_TP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<Operator>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    dim: usize,
    kraus: Vec<Operator>,
}

impl TryFrom<ChannelRepr> for KrausChannel {
    type Error = Error;
    fn try_from(repr: ChannelRepr) -> Result<Self> {
        let ch = KrausChannel::new(repr.kraus)?;
        if ch.dim != repr.dim {
            return Err(Error::DimensionMismatch {
                expected: repr.dim,
                found: ch.dim,
            });
        }
        Ok(ch)
    }
}

impl From<KrausChannel> for ChannelRepr {
    fn from(ch: KrausChannel) -> Self {
        ChannelRepr {
            dim: ch.dim,
            kraus: ch.kraus,
        }
    }
}

/// Outcome of [`KrausChannel::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub kraus_count: usize,
    /// `‖Σ Kᵢ*Kᵢ − id‖_F`
    pub tp_residual: f64,
    pub choi_min_eigenvalue: f64,
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub passed: bool,
}

impl KrausChannel {
    /// Checks that the list is nonempty and all operators share one dimension.
    pub fn new(kraus: Vec<Operator>) -> Result<Self> {
        let dim = kraus.first().ok_or(Error::EmptyKraus)?.dim();
        if let Some(bad) = kraus.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![Operator::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn validate(&self) -> ValidationReport {
        let sum = self.kraus.iter().fold(Operator::zeros(self.dim), |acc, k| {
            &acc + &(&k.adjoint() * k)
        });
        let tp_residual = (&sum - &Operator::identity(self.dim)).frobenius_norm();
        let choi_min_eigenvalue = self.to_choi().min_eigenvalue().unwrap_or(f64::NAN);
        let trace_preserving = tp_residual <= TOL_TP;
        let completely_positive = choi_min_eigenvalue >= -TOL_PSD;
        ValidationReport {
            dim: self.dim,
            kraus_count: self.kraus.len(),
            tp_residual,
            choi_min_eigenvalue,
            trace_preserving,
            completely_positive,
            passed: trace_preserving && completely_positive,
        }
    }

    /// Returns `self` when it passes validation.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.passed {
            Ok(self)
        } else {
            Err(Error::NotCptp(Box::new(report)))
        }
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// `Σᵢ Kᵢ a Kᵢ*`
    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        self.check_dim(a.dim())?;
        Ok(self.apply_unchecked(a))
    }

    fn apply_unchecked(&self, a: &Operator) -> Operator {
        self.kraus
            .iter()
            .fold(Operator::zeros(self.dim), |acc, k| &acc + &k.conjugate(a))
    }

    /// Image of a state. The channel is assumed valid.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho.dim())?;
        Ok(DensityMatrix::assume_valid(
            &self.apply_unchecked(rho.as_operator()),
        ))
    }

    /// Heisenberg-picture map `Σᵢ Kᵢ* a Kᵢ`.
    pub fn apply_adjoint(&self, a: &Operator) -> Result<Operator> {
        self.check_dim(a.dim())?;
        Ok(self.kraus.iter().fold(Operator::zeros(self.dim), |acc, k| {
            &acc + &k.adjoint().conjugate(a)
        }))
    }

    /// `f ∘ g`, with Kraus set `{Fᵢ Gⱼ}`.
    pub fn compose(&self, g: &KrausChannel) -> Result<KrausChannel> {
        self.check_dim(g.dim)?;
        let kraus = self
            .kraus
            .iter()
            .flat_map(|f| g.kraus.iter().map(move |gk| f * gk))
            .collect();
        Ok(KrausChannel {
            dim: self.dim,
            kraus,
        })
    }

    /// `Mⁿ(ρ)` by repeated application.
    pub fn power_apply(&self, rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
        self.check_dim(rho.dim())?;
        let mut state = rho.clone();
        for _ in 0..n {
            state = self.apply_state(&state)?;
        }
        Ok(state)
    }

    /// Natural representation: `vec(M(a)) = L vec(a)` with column stacking,
    /// i.e. `L = Σᵢ conj(Kᵢ) ⊗ Kᵢ`.
    pub fn to_superoperator(&self) -> SuperoperatorMatrix {
        let d2 = self.dim * self.dim;
        let matrix = self
            .kraus
            .iter()
            .fold(Operator::zeros(d2), |acc, k| &acc + &k.conj().kron(k));
        SuperoperatorMatrix {
            dim: self.dim,
            matrix,
        }
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        ChoiMatrix::from_map(self.dim, |a| self.apply_unchecked(a))
    }
}

/// Matrix of a linear map on B(H) acting on column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorMatrix {
    dim: usize,
    matrix: Operator,
}

impl SuperoperatorMatrix {
    pub fn from_map(dim: usize, f: impl Fn(&Operator) -> Operator) -> Self {
        let d2 = dim * dim;
        let mut matrix = Operator::zeros(d2);
        for j in 0..dim {
            for i in 0..dim {
                let column = f(&Operator::matrix_unit(dim, i, j)).vec_col();
                let c = j * dim + i;
                for (r, value) in column.into_iter().enumerate() {
                    matrix.set(r, c, value);
                }
            }
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `d² × d²` matrix.
    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn apply(&self, a: &Operator) -> Result<Operator> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: a.dim(),
            });
        }
        Operator::from_vec_col(self.dim, &self.matrix.mul_vec(&a.vec_col()))
    }
}

/// Choi matrix `Σᵢⱼ |i⟩⟨j| ⊗ M(|i⟩⟨j|)`, unnormalized (trace `d` for a
/// trace-preserving map).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: Operator,
}

impl ChoiMatrix {
    /// Choi matrix of an arbitrary linear map, e.g. the transpose.
    pub fn from_map(dim: usize, f: impl Fn(&Operator) -> Operator) -> Self {
        let mut matrix = Operator::zeros(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let block =
                    Operator::matrix_unit(dim, i, j).kron(&f(&Operator::matrix_unit(dim, i, j)));
                matrix = &matrix + &block;
            }
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        HermitianOperator::symmetrized(&self.matrix).min_eigenvalue()
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.matrix.is_hermitian(tol) && self.min_eigenvalue()? >= -tol)
    }

    /// Trace over the output factor; equals `id` for trace-preserving maps.
    pub fn partial_trace_output(&self) -> Operator {
        let d = self.dim;
        Operator::from_fn(d, |i, j| {
            (0..d).map(|k| self.matrix.get(i * d + k, j * d + k)).sum()
        })
    }
}
