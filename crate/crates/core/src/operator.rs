//! Dense complex operators on a `d`-dimensional Hilbert space.
//!
//! Storage is row-major. Decompositions go through `nalgebra`; everything
//! else (products, traces, vectorization) is done directly on the flat
//! entry buffer.
//!
//! Vectorization is column-stacking throughout the crate: entry `(i, j)`
//! lands at index `j * d + i` of `vec(a)`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ConditionReport, Error, Result};
use crate::rng::{self, StreamRng};

/// Tolerance for Hermiticity checks.
pub const TOL_HERM: f64 = 1e-9;
/// Tolerance on negative eigenvalues of positive semidefinite operators.
pub const TOL_PSD: f64 = 1e-9;
/// Tolerance on unit trace and unit norm.
pub const TOL_TRACE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<OperatorRepr> for Operator {
    type Error = Error;

    fn try_from(repr: OperatorRepr) -> Result<Self> {
        let entries = repr
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Operator::new(repr.dim, entries)
    }
}

impl From<Operator> for OperatorRepr {
    fn from(op: Operator) -> Self {
        OperatorRepr {
            dim: op.dim,
            entries: op.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    /// Build from row-major real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    /// The matrix unit `|i⟩⟨j|`.
    pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { ZERO })
    }

    /// All `d²` matrix units in row-major order of `(i, j)`.
    pub fn matrix_unit_basis(dim: usize) -> Vec<Self> {
        (0..dim)
            .flat_map(|i| (0..dim).map(move |j| Self::matrix_unit(dim, i, j)))
            .collect()
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, t: f64) -> Self {
        self.scale_complex(Complex64::new(t, 0.0))
    }

    pub fn scale_complex(&self, t: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * t).collect(),
        }
    }

    /// `self * x * self^*`
    pub fn conjugate(&self, x: &Operator) -> Self {
        &(self * x) * &self.adjoint()
    }

    /// Kronecker product; `(a ⊗ b)[(i*db + k), (j*db + l)] = a[i,j] b[k,l]`.
    pub fn kron(&self, other: &Operator) -> Self {
        let (da, db) = (self.dim, other.dim);
        Self::from_fn(da * db, |r, c| {
            self.get(r / db, c / db) * other.get(r % db, c % db)
        })
    }

    /// Column-stacked vectorization.
    pub fn vec_col(&self) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.get(i, j);
            }
        }
        out
    }

    /// Inverse of [`Operator::vec_col`].
    pub fn from_vec_col(dim: usize, v: &[Complex64]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                expected: dim * dim,
                found: v.len(),
            });
        }
        Ok(Self::from_fn(dim, |i, j| v[j * dim + i]))
    }

    /// Matrix-vector product for an operator acting on `C^dim`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Real inner product `Re Tr(a^* b)` on B(H) viewed as a real space.
    pub fn real_inner(&self, other: &Operator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Max entrywise deviation of `U^* U` from the identity.
    pub fn unitary_deviation(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Operator::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub(crate) fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub(crate) fn condition_report(&self) -> ConditionReport {
        ConditionReport {
            dim: self.dim,
            frobenius_norm: self.frobenius_norm(),
            max_abs_entry: self.max_abs(),
            non_finite_entries: self
                .entries
                .iter()
                .filter(|z| !z.re.is_finite() || !z.im.is_finite())
                .count(),
            hermitian_deviation: self.hermitian_deviation(),
        }
    }

    fn zip_with(&self, other: &Operator, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * rhs.entries[k * d + j];
                }
            }
        }
        Operator {
            dim: d,
            entries: out,
        }
    }
}

/// Pauli matrices and the qubit identity.
pub mod pauli {
    use super::*;

    pub fn id() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> Operator {
        Operator::new(2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> Operator {
        Operator::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }
}

/// An operator equal to its adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Operator", into = "Operator")]
pub struct HermitianOperator(Operator);

impl TryFrom<Operator> for HermitianOperator {
    type Error = Error;
    fn try_from(op: Operator) -> Result<Self> {
        HermitianOperator::new(op)
    }
}

impl From<HermitianOperator> for Operator {
    fn from(h: HermitianOperator) -> Self {
        h.0
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

impl HermitianOperator {
    /// Accepts `op` if it is Hermitian within [`TOL_HERM`], storing its exact
    /// Hermitian part.
    pub fn new(op: Operator) -> Result<Self> {
        let deviation = op.hermitian_deviation();
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(&op))
    }

    /// `(a + a^*) / 2` without any check.
    pub fn symmetrized(op: &Operator) -> Self {
        let d = op.dim;
        Self(Operator::from_fn(d, |i, j| {
            if i == j {
                Complex64::new(op.get(i, i).re, 0.0)
            } else {
                (op.get(i, j) + op.get(j, i).conj()) * 0.5
            }
        }))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Operator::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Operator::identity(dim))
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(self.0.scale(t))
    }

    pub fn eigen(&self) -> Result<Eigen> {
        let d = self.dim();
        let m = self.0.to_dmatrix();
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 1000 * d.max(10)).ok_or_else(|| {
            Error::Eigensolver {
                context: "hermitian eigendecomposition",
                report: self.0.condition_report(),
            }
        })?;
        if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigensolver {
                context: "hermitian eigendecomposition",
                report: self.0.condition_report(),
            });
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        Ok(Eigen {
            values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
            vectors: order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).iter().cloned().collect())
                .collect(),
        })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|x| x.abs()).sum())
    }
}

/// Positive and negative parts of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct JordanParts {
    pub positive_part: HermitianOperator,
    pub negative_part: HermitianOperator,
}

/// `(Re a, Im a)` with `Re a = (a + a^*)/2` and `Im a = (a - a^*)/(2i)`.
pub fn hermitian_split(a: &Operator) -> (HermitianOperator, HermitianOperator) {
    let adj = a.adjoint();
    let re = (a + &adj).scale(0.5);
    let im = (a - &adj).scale_complex(Complex64::new(0.0, -0.5));
    (
        HermitianOperator::symmetrized(&re),
        HermitianOperator::symmetrized(&im),
    )
}

/// Spectral split `b = b₊ − b₋` with `b₊ b₋ = 0`.
///
/// Positive eigenvalues go to `b₊`, eigenvalues below `-TOL_PSD` go to `b₋`,
/// and eigenvalues in `[-TOL_PSD, 0]` are dropped.
pub fn jordan_decompose(b: &HermitianOperator) -> Result<JordanParts> {
    let d = b.dim();
    let eig = b.eigen()?;
    let mut pos = Operator::zeros(d);
    let mut neg = Operator::zeros(d);
    for (&lambda, v) in eig.values.iter().zip(&eig.vectors) {
        if lambda > 0.0 {
            pos = &pos + &Operator::outer(v, v).scale(lambda);
        } else if lambda < -TOL_PSD {
            neg = &neg + &Operator::outer(v, v).scale(-lambda);
        }
    }
    Ok(JordanParts {
        positive_part: HermitianOperator::symmetrized(&pos),
        negative_part: HermitianOperator::symmetrized(&neg),
    })
}

/// Total-variation norm: trace norm of `Re a` plus trace norm of `Im a`.
pub fn tv_norm(a: &Operator) -> Result<f64> {
    let (re, im) = hermitian_split(a);
    Ok(re.trace_norm()? + im.trace_norm()?)
}

/// `‖a − b‖_TV`
pub fn tv_distance(a: &Operator, b: &Operator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    tv_norm(&(a - b))
}

/// A positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Operator", into = "Operator")]
pub struct DensityMatrix(HermitianOperator);

impl TryFrom<Operator> for DensityMatrix {
    type Error = Error;
    fn try_from(op: Operator) -> Result<Self> {
        DensityMatrix::new(op)
    }
}

impl From<DensityMatrix> for Operator {
    fn from(rho: DensityMatrix) -> Self {
        rho.0 .0
    }
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(op)?)
    }

    pub fn from_hermitian(h: HermitianOperator) -> Result<Self> {
        let trace = h.trace();
        let min_eigenvalue = h.min_eigenvalue()?;
        if min_eigenvalue < -TOL_PSD || (trace - 1.0).abs() > TOL_TRACE {
            return Err(Error::NotDensity {
                min_eigenvalue,
                trace,
            });
        }
        Ok(Self(h))
    }

    /// Wraps an operator known to be a state up to rounding (e.g. the
    /// image of a state under a channel), symmetrizing it.
    pub(crate) fn assume_valid(op: &Operator) -> Self {
        Self(HermitianOperator::symmetrized(op))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianOperator::identity(dim).scale(1.0 / dim as f64))
    }

    /// `|k⟩⟨k|` for the `k`-th standard basis vector (0-based).
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if k >= dim {
            return Err(Error::BasisIndex { index: k, dim });
        }
        Ok(Self(HermitianOperator(Operator::matrix_unit(dim, k, k))))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::assume_valid(&Operator::outer(&psi.amplitudes, &psi.amplitudes))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        self.0.as_operator()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn tv_distance(&self, other: &DensityMatrix) -> Result<f64> {
        tv_distance(self.as_operator(), other.as_operator())
    }
}

/// A unit vector in `C^dim`. JSON form: `[[re, im], ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl TryFrom<Vec<[f64; 2]>> for PureState {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<PureState> for Vec<[f64; 2]> {
    fn from(psi: PureState) -> Self {
        psi.amplitudes.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > TOL_TRACE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `|ξ⟩⟨ξ|`
    pub fn projector(&self) -> Operator {
        Operator::outer(&self.amplitudes, &self.amplitudes)
    }
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Ginibre-distributed state `G G^* / Tr(G G^*)`.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    random_density_from(dim, &mut rng::stream(seed, 0))
}

pub(crate) fn random_density_from(dim: usize, rng: &mut StreamRng) -> DensityMatrix {
    let g = ginibre(dim, rng);
    let gg = &g * &g.adjoint();
    let t = gg.trace().re;
    DensityMatrix::assume_valid(&gg.scale(1.0 / t))
}

/// Haar-random unit vector (normalized complex Gaussian).
pub fn random_pure_state(dim: usize, seed: u64) -> PureState {
    random_pure_state_from(dim, &mut rng::stream(seed, 0))
}

pub(crate) fn random_pure_state_from(dim: usize, rng: &mut StreamRng) -> PureState {
    assert!(dim > 0, "dimension must be positive");
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| rng::complex_gaussian(rng)).collect();
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal absorbed into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> Operator {
    random_unitary_from(dim, &mut rng::stream(seed, 0))
}

pub(crate) fn random_unitary_from(dim: usize, rng: &mut StreamRng) -> Operator {
    let g = ginibre(dim, rng).to_dmatrix();
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for k in 0..dim {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 {
            rkk / rkk.norm()
        } else {
            ONE
        };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    Operator::from_dmatrix(&q)
}

fn ginibre(dim: usize, rng: &mut StreamRng) -> Operator {
    assert!(dim > 0, "dimension must be positive");
    let entries = (0..dim * dim).map(|_| rng::complex_gaussian(rng)).collect();
    Operator { dim, entries }
}
