//! Long-run behavior of iterated channels.
//!
//! The verdict comes from the spectrum of the superoperator `L`:
//!
//! * mixing: eigenvalue 1 is simple and is the only eigenvalue on the unit
//!   circle, so `Mⁿ(ρ) − Mⁿ(σ) → 0` for all states;
//! * ergodic but not mixing: eigenvalue 1 is simple but other eigenvalues
//!   of modulus one exist, so iterates can rotate forever while Cesàro
//!   averages still converge to the unique fixed state;
//! * non-ergodic: the fixed space has dimension above one.
//!
//! Trajectories are simulated alongside as corroborating evidence.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::channels::KrausChannel;
use crate::dobrushin::{serialize_rate, KappaBound};
use crate::error::{Error, Result};
use crate::operator::{
    jordan_decompose, random_density_from, DensityMatrix, HermitianOperator, Operator,
};
use crate::rng;

/// Default tolerance for locating eigenvalue 1 and the unit circle.
pub const DEFAULT_TOL_SPEC: f64 = 1e-8;
/// Slack allowed on the exponential bound.
pub const BOUND_TOL: f64 = 1e-9;
/// Number of steps simulated as classification evidence.
pub const EVIDENCE_STEPS: usize = 50;

const EVIDENCE_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    /// Eigenvalues of the superoperator, by descending modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvalues with `|λ| ≥ 1 − tol_spec`.
    pub peripheral_count: usize,
    /// Dimension of the fixed space `ker(L − id)`.
    pub unit_multiplicity: usize,
    /// `1 −` the largest modulus left after removing the
    /// `unit_multiplicity` eigenvalues closest to 1.
    pub spectral_gap: f64,
}

fn superoperator_dmatrix(ch: &KrausChannel) -> DMatrix<Complex64> {
    ch.to_superoperator().matrix().to_dmatrix()
}

fn eigensolver_error(context: &'static str, m: &DMatrix<Complex64>) -> Error {
    Error::Eigensolver {
        context,
        report: Operator::from_dmatrix(m).condition_report(),
    }
}

/// Right singular vectors of `m` whose singular value is at most
/// `threshold`.
fn null_space(m: &DMatrix<Complex64>, threshold: f64) -> Result<Vec<Vec<Complex64>>> {
    let svd = m.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| eigensolver_error("singular value decomposition", m))?;
    if svd.singular_values.iter().any(|s| !s.is_finite()) {
        return Err(eigensolver_error("singular value decomposition", m));
    }
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(k, _)| v_t.row(k).iter().map(|z| z.conj()).collect())
        .collect())
}

/// Right singular vector for the smallest singular value.
fn nearest_null_vector(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let svd = m.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| eigensolver_error("singular value decomposition", m))?;
    let k = svd.singular_values.argmin().0;
    Ok(v_t.row(k).iter().map(|z| z.conj()).collect())
}

fn shifted(l: &DMatrix<Complex64>, lambda: Complex64) -> DMatrix<Complex64> {
    let n = l.nrows();
    l - DMatrix::<Complex64>::identity(n, n) * lambda
}

fn fixed_space_threshold(ch: &KrausChannel, tol_spec: f64) -> f64 {
    tol_spec * (ch.dim() * ch.dim()) as f64
}

pub fn spectral_profile(ch: &KrausChannel, tol_spec: f64) -> Result<SpectralProfile> {
    let l = superoperator_dmatrix(ch);
    let n = l.nrows();
    // deflating at machine epsilon can stall on unitary superoperators
    let schur = [1e-14, 1e-13, 1e-12]
        .into_iter()
        .find_map(|eps| Schur::try_new(l.clone(), eps, 1000 * n.max(10)))
        .ok_or_else(|| eigensolver_error("complex Schur decomposition", &l))?;
    let (_, t) = schur.unpack();
    let mut eigenvalues: Vec<Complex64> = t.diagonal().iter().cloned().collect();
    if eigenvalues
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(eigensolver_error("complex Schur decomposition", &l));
    }
    eigenvalues.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });

    let one = Complex64::new(1.0, 0.0);
    let unit_multiplicity =
        null_space(&shifted(&l, one), fixed_space_threshold(ch, tol_spec))?.len();
    let peripheral_count = eigenvalues
        .iter()
        .filter(|z| z.norm() >= 1.0 - tol_spec)
        .count();

    let mut by_distance: Vec<usize> = (0..n).collect();
    by_distance.sort_by(|&a, &b| {
        (eigenvalues[a] - one)
            .norm()
            .total_cmp(&(eigenvalues[b] - one).norm())
    });
    let rest_max = by_distance[unit_multiplicity.min(n)..]
        .iter()
        .map(|&k| eigenvalues[k].norm())
        .fold(0.0, f64::max);

    Ok(SpectralProfile {
        eigenvalues,
        peripheral_count,
        unit_multiplicity,
        spectral_gap: 1.0 - rest_max,
    })
}

/// Basis of the fixed space `{X : M(X) = X}`.
///
/// The space is spanned by states; `states` holds a linearly independent
/// set of fixed densities, preferring low rank. Should numerical noise
/// leave part of the space without a state representative, the remainder
/// is reported in `traceless_directions`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSpace {
    pub dimension: usize,
    pub states: Vec<DensityMatrix>,
    pub traceless_directions: Vec<HermitianOperator>,
}

/// Real Gram–Schmidt on Hermitian operators; returns the orthonormalized
/// candidate, or `None` if it lies in the span within `tol`.
fn orthonormal_remainder(basis: &[Operator], candidate: &Operator, tol: f64) -> Option<Operator> {
    let norm0 = candidate.frobenius_norm();
    if norm0 == 0.0 {
        return None;
    }
    let mut r = candidate.scale(1.0 / norm0);
    for _ in 0..2 {
        for b in basis {
            r = &r - &b.scale(b.real_inner(&r));
        }
    }
    let norm = r.frobenius_norm();
    (norm > tol).then(|| r.scale(1.0 / norm))
}

fn rank(h: &HermitianOperator) -> Result<usize> {
    let values = h.eigenvalues()?;
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(values
        .iter()
        .filter(|v| v.abs() > 1e-9 * top.max(1e-300))
        .count())
}

pub fn fixed_space(ch: &KrausChannel, tol_spec: f64) -> Result<FixedSpace> {
    let l = superoperator_dmatrix(ch);
    let d = ch.dim();
    let kernel = null_space(
        &shifted(&l, Complex64::new(1.0, 0.0)),
        fixed_space_threshold(ch, tol_spec),
    )?;
    let dimension = kernel.len();

    // the fixed space is closed under adjoints, so its Hermitian and
    // anti-Hermitian parts span it over the reals
    let mut hermitian_basis: Vec<Operator> = Vec::new();
    for v in &kernel {
        let x = Operator::from_vec_col(d, v)?;
        let adj = x.adjoint();
        let re = (&x + &adj).scale(0.5);
        let im = (&x - &adj).scale_complex(Complex64::new(0.0, -0.5));
        for h in [re, im] {
            if hermitian_basis.len() < dimension {
                let h = HermitianOperator::symmetrized(&h).into_operator();
                if let Some(r) = orthonormal_remainder(&hermitian_basis, &h, 1e-6) {
                    hermitian_basis.push(r);
                }
            }
        }
    }

    let mut candidates: Vec<(usize, HermitianOperator)> = Vec::new();
    for h in &hermitian_basis {
        let parts = jordan_decompose(&HermitianOperator::symmetrized(h))?;
        for part in [parts.positive_part, parts.negative_part] {
            let t = part.trace();
            if t > 1e-8 {
                let state = part.scale(1.0 / t);
                candidates.push((rank(&state)?, state));
            }
        }
    }
    candidates.sort_by_key(|(r, _)| *r);

    let mut spanned: Vec<Operator> = Vec::new();
    let mut states = Vec::new();
    for (_, cand) in candidates {
        if states.len() == dimension {
            break;
        }
        if let Some(r) = orthonormal_remainder(&spanned, cand.as_operator(), 1e-6) {
            spanned.push(r);
            states.push(DensityMatrix::from_hermitian(cand)?);
        }
    }

    let mut traceless_directions = Vec::new();
    for h in &hermitian_basis {
        if spanned.len() == dimension {
            break;
        }
        if let Some(r) = orthonormal_remainder(&spanned, h, 1e-6) {
            spanned.push(r.clone());
            traceless_directions.push(HermitianOperator::symmetrized(&r));
        }
    }

    Ok(FixedSpace {
        dimension,
        states,
        traceless_directions,
    })
}

/// Fixed states spanning the fixed space (exactly one when it is
/// one-dimensional).
pub fn fixed_points(ch: &KrausChannel) -> Result<Vec<DensityMatrix>> {
    Ok(fixed_space(ch, DEFAULT_TOL_SPEC)?.states)
}

/// `lim (1/(n+1)) Σ_{k≤n} Mᵏ(ρ)`: the spectral projection of `ρ` onto the
/// fixed space along the other eigenspaces.
pub fn cesaro_limit(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = ch.dim();
    let l = superoperator_dmatrix(ch);
    let shift = shifted(&l, Complex64::new(1.0, 0.0));
    let threshold = fixed_space_threshold(ch, DEFAULT_TOL_SPEC);
    let right = null_space(&shift, threshold)?;
    let left = null_space(&shift.adjoint(), threshold)?;
    if right.is_empty() || right.len() != left.len() {
        return Err(eigensolver_error("fixed-space projection", &l));
    }
    let n = d * d;
    let r = DMatrix::from_fn(n, right.len(), |i, j| right[j][i]);
    let w = DMatrix::from_fn(n, left.len(), |i, j| left[j][i]);
    let gram_inv = (w.adjoint() * &r)
        .try_inverse()
        .ok_or_else(|| eigensolver_error("fixed-space projection", &l))?;
    let v = DMatrix::from_column_slice(n, 1, &rho.as_operator().vec_col());
    let projected = &r * (gram_inv * (w.adjoint() * v));
    let x = Operator::from_vec_col(d, projected.as_slice())?;
    Ok(DensityMatrix::assume_valid(&x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Mixing,
    ErgodicNotMixing,
    NonErgodic,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mixing => "mixing",
            Self::ErgodicNotMixing => "ergodic_not_mixing",
            Self::NonErgodic => "non_ergodic",
        }
    }
}

/// Distance between the iterates of one pair of initial states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEvidence {
    pub label: String,
    pub initial_distance: f64,
    pub final_distance: f64,
    /// Largest distance over the last ten steps.
    pub tail_max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEvidence {
    pub steps: usize,
    pub pairs: Vec<PairEvidence>,
    pub consistent: bool,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelClassification {
    pub verdict: Verdict,
    pub profile: SpectralProfile,
    pub fixed_space: FixedSpace,
    pub evidence: TrajectoryEvidence,
}

impl ChannelClassification {
    /// The fixed state when it is unique.
    pub fn unique_fixed_point(&self) -> Option<&DensityMatrix> {
        match self.fixed_space.states.as_slice() {
            [only] if self.fixed_space.dimension == 1 => Some(only),
            _ => None,
        }
    }
}

impl Serialize for ChannelClassification {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let eigenvalues: Vec<[f64; 2]> = self
            .profile
            .eigenvalues
            .iter()
            .map(|z| [z.re, z.im])
            .collect();
        let fixed_points: Vec<&Operator> = self
            .fixed_space
            .states
            .iter()
            .map(|r| r.as_operator())
            .collect();
        let traceless: Vec<&Operator> = self
            .fixed_space
            .traceless_directions
            .iter()
            .map(|h| h.as_operator())
            .collect();
        let mut st = s.serialize_struct("ChannelClassification", 8)?;
        st.serialize_field("verdict", &self.verdict)?;
        st.serialize_field("unit_multiplicity", &self.profile.unit_multiplicity)?;
        st.serialize_field("peripheral_count", &self.profile.peripheral_count)?;
        st.serialize_field("spectral_gap", &self.profile.spectral_gap)?;
        st.serialize_field("eigenvalues", &eigenvalues)?;
        st.serialize_field("fixed_points", &fixed_points)?;
        st.serialize_field("traceless_fixed_directions", &traceless)?;
        st.serialize_field("evidence", &self.evidence)?;
        st.end()
    }
}

fn pair_distances(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    steps: usize,
) -> Result<Vec<f64>> {
    let (mut a, mut b) = (rho.clone(), sigma.clone());
    let mut out = Vec::with_capacity(steps + 1);
    out.push(a.tv_distance(&b)?);
    for _ in 0..steps {
        a = ch.apply_state(&a)?;
        b = ch.apply_state(&b)?;
        out.push(a.tv_distance(&b)?);
    }
    Ok(out)
}

fn states_from_jordan(h: &HermitianOperator) -> Result<Option<(DensityMatrix, DensityMatrix)>> {
    let parts = jordan_decompose(h)?;
    let (tp, tn) = (parts.positive_part.trace(), parts.negative_part.trace());
    if tp <= 1e-8 || tn <= 1e-8 {
        return Ok(None);
    }
    Ok(Some((
        DensityMatrix::from_hermitian(parts.positive_part.scale(1.0 / tp))?,
        DensityMatrix::from_hermitian(parts.negative_part.scale(1.0 / tn))?,
    )))
}

/// Initial pairs that should separate the verdicts: generic pairs for
/// mixing channels, two fixed states for non-ergodic ones, and the Jordan
/// parts of a rotating peripheral eigenvector otherwise.
fn witness_pairs(
    ch: &KrausChannel,
    verdict: Verdict,
    profile: &SpectralProfile,
    fixed: &FixedSpace,
    tol_spec: f64,
) -> Result<Vec<(String, DensityMatrix, DensityMatrix)>> {
    let d = ch.dim();
    let mut pairs = Vec::new();
    match verdict {
        Verdict::Mixing => {
            if d >= 2 {
                pairs.push((
                    format!("basis 0 vs basis {}", d - 1),
                    DensityMatrix::basis(d, 0)?,
                    DensityMatrix::basis(d, d - 1)?,
                ));
                let mut rng = rng::stream(EVIDENCE_SEED, 0);
                pairs.push((
                    "random pair".to_string(),
                    random_density_from(d, &mut rng),
                    random_density_from(d, &mut rng),
                ));
            }
        }
        Verdict::NonErgodic => {
            if fixed.states.len() >= 2 {
                pairs.push((
                    "fixed states 0 and 1".to_string(),
                    fixed.states[0].clone(),
                    fixed.states[1].clone(),
                ));
            } else if let Some(h) = fixed.traceless_directions.first() {
                if let Some((a, b)) = states_from_jordan(h)? {
                    pairs.push(("traceless fixed direction".to_string(), a, b));
                }
            }
        }
        Verdict::ErgodicNotMixing => {
            let one = Complex64::new(1.0, 0.0);
            if let Some(&lambda) = profile
                .eigenvalues
                .iter()
                .find(|z| z.norm() >= 1.0 - tol_spec && (**z - one).norm() > tol_spec.sqrt())
            {
                let l = superoperator_dmatrix(ch);
                let v = nearest_null_vector(&shifted(&l, lambda))?;
                let x = Operator::from_vec_col(d, &v)?;
                let adj = x.adjoint();
                let re = &x + &adj;
                let im = (&x - &adj).scale_complex(Complex64::new(0.0, -1.0));
                let h = if re.frobenius_norm() >= im.frobenius_norm() {
                    re
                } else {
                    im
                };
                if let Some((a, b)) = states_from_jordan(&HermitianOperator::symmetrized(&h))? {
                    pairs.push((format!("peripheral eigenvector at {lambda}"), a, b));
                }
            }
        }
    }
    Ok(pairs)
}

fn judge(verdict: Verdict, profile: &SpectralProfile, pair: &PairEvidence) -> Option<String> {
    let PairEvidence {
        initial_distance: d0,
        final_distance: dn,
        tail_max_distance: tail,
        ..
    } = *pair;
    match verdict {
        Verdict::Mixing => {
            if dn > d0 + 1e-9 {
                return Some(format!("{}: distance grew from {d0} to {dn}", pair.label));
            }
            let predicted = (1.0 - profile.spectral_gap)
                .max(0.0)
                .powi(EVIDENCE_STEPS as i32);
            if predicted <= 1e-8 && dn > 1e-6 {
                return Some(format!(
                    "{}: distance {dn} after {EVIDENCE_STEPS} steps despite spectral decay {predicted:e}",
                    pair.label
                ));
            }
            None
        }
        Verdict::NonErgodic => {
            if d0 <= 1e-6 || (dn - d0).abs() > 1e-6 * d0.max(1.0) {
                return Some(format!(
                    "{}: fixed states drifted from distance {d0} to {dn}",
                    pair.label
                ));
            }
            None
        }
        Verdict::ErgodicNotMixing => {
            if tail < 1e-3 * d0 {
                return Some(format!(
                    "{}: peripheral pair decayed from {d0} to {tail}",
                    pair.label
                ));
            }
            None
        }
    }
}

/// Spectral classification with simulated trajectories as evidence.
pub fn classify(ch: &KrausChannel, tol_spec: f64) -> Result<ChannelClassification> {
    let report = ch.validate();
    if !report.passed {
        return Err(Error::NotCptp(Box::new(report)));
    }
    let profile = spectral_profile(ch, tol_spec)?;
    let fixed = fixed_space(ch, tol_spec)?;
    let verdict = match (profile.unit_multiplicity, profile.peripheral_count) {
        (0, _) => {
            return Err(eigensolver_error(
                "fixed-space rank",
                &superoperator_dmatrix(ch),
            ))
        }
        (1, 1) => Verdict::Mixing,
        (1, _) => Verdict::ErgodicNotMixing,
        _ => Verdict::NonErgodic,
    };

    let mut pairs = Vec::new();
    let mut problems = Vec::new();
    for (label, rho, sigma) in witness_pairs(ch, verdict, &profile, &fixed, tol_spec)? {
        let dist = pair_distances(ch, &rho, &sigma, EVIDENCE_STEPS)?;
        let tail_start = dist.len().saturating_sub(10);
        let pair = PairEvidence {
            label,
            initial_distance: dist[0],
            final_distance: *dist.last().unwrap(),
            tail_max_distance: dist[tail_start..].iter().cloned().fold(0.0, f64::max),
        };
        problems.extend(judge(verdict, &profile, &pair));
        pairs.push(pair);
    }
    if verdict != Verdict::Mixing && ch.dim() >= 2 && pairs.is_empty() {
        problems.push("no witness pair could be built from the spectral data".to_string());
    }

    Ok(ChannelClassification {
        verdict,
        profile,
        fixed_space: fixed,
        evidence: TrajectoryEvidence {
            steps: EVIDENCE_STEPS,
            pairs,
            consistent: problems.is_empty(),
            diagnostic: (!problems.is_empty()).then(|| problems.join("; ")),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStep {
    pub n: usize,
    pub state: DensityMatrix,
    pub tv_to_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub reference: DensityMatrix,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn distances(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.tv_to_reference).collect()
    }

    /// `n,tv_distance` rows, distances with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,tv_distance\n");
        for step in &self.steps {
            out.push_str(&format!("{},{:.16e}\n", step.n, step.tv_to_reference));
        }
        out
    }
}

/// `Mⁿ(ρ₀)` and `‖Mⁿ(ρ₀) − reference‖_TV` for `n = 0..=n_max`.
pub fn iterate_trajectory(
    ch: &KrausChannel,
    rho0: &DensityMatrix,
    n_max: usize,
    reference: &DensityMatrix,
) -> Result<Trajectory> {
    if rho0.dim() != ch.dim() || reference.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: if rho0.dim() != ch.dim() {
                rho0.dim()
            } else {
                reference.dim()
            },
        });
    }
    let mut steps = Vec::with_capacity(n_max + 1);
    let mut state = rho0.clone();
    for n in 0..=n_max {
        if n > 0 {
            state = ch.apply_state(&state)?;
        }
        steps.push(TrajectoryStep {
            n,
            tv_to_reference: state.tv_distance(reference)?,
            state: state.clone(),
        });
    }
    Ok(Trajectory {
        reference: reference.clone(),
        steps,
    })
}

/// Running averages `(1/(n+1)) Σ_{k≤n} Mᵏ(ρ₀)` against their limit
/// [`cesaro_limit`].
pub fn cesaro_trajectory(
    ch: &KrausChannel,
    rho0: &DensityMatrix,
    n_max: usize,
) -> Result<Trajectory> {
    if rho0.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: rho0.dim(),
        });
    }
    let reference = cesaro_limit(ch, rho0)?;
    let mut steps = Vec::with_capacity(n_max + 1);
    let mut iterate = rho0.clone();
    let mut sum = rho0.as_operator().clone();
    for n in 0..=n_max {
        if n > 0 {
            iterate = ch.apply_state(&iterate)?;
            sum = &sum + iterate.as_operator();
        }
        let average = DensityMatrix::assume_valid(&sum.scale(1.0 / (n + 1) as f64));
        steps.push(TrajectoryStep {
            n,
            tv_to_reference: average.tv_distance(&reference)?,
            state: average,
        });
    }
    Ok(Trajectory { reference, steps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub trial: usize,
    pub n: usize,
    pub distance: f64,
    pub bound: f64,
}

/// Outcome of checking `‖Mⁿ(ρ) − ρ_*‖_TV ≤ 2e^{−nθ}` on random states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub trials: usize,
    pub steps: usize,
    pub trace_kappa: f64,
    #[serde(serialize_with = "serialize_rate")]
    pub theta: f64,
    pub fixed_point: DensityMatrix,
    /// `min (bound − distance)` over all trials and steps.
    pub tightest_margin: f64,
    /// `(trial, n)` where the tightest margin occurs.
    pub tightest_at: (usize, usize),
    /// Largest distance at the last step.
    pub final_max_distance: f64,
    pub violations: Vec<BoundViolation>,
    pub passed: bool,
}

/// Checks the exponential bound for `trials` random initial states
/// (stream `t` of `seed` for trial `t`) over `n = 0..=n_max`.
///
/// Refuses non-mixing channels with [`Error::NotMixing`].
pub fn verify_bound(
    ch: &KrausChannel,
    kb: &KappaBound,
    trials: usize,
    n_max: usize,
    seed: u64,
) -> Result<BoundReport> {
    if kb.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: kb.dim(),
        });
    }
    let classification = classify(ch, DEFAULT_TOL_SPEC)?;
    let fixed_point = match (classification.verdict, classification.unique_fixed_point()) {
        (Verdict::Mixing, Some(rho)) => rho.clone(),
        _ => return Err(Error::NotMixing(Box::new(classification))),
    };

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            let rho0 = random_density_from(ch.dim(), &mut rng);
            Ok(iterate_trajectory(ch, &rho0, n_max, &fixed_point)?.distances())
        })
        .collect::<Result<_>>()?;

    let mut report = BoundReport {
        trials,
        steps: n_max,
        trace_kappa: kb.trace_kappa,
        theta: kb.theta,
        fixed_point,
        tightest_margin: f64::INFINITY,
        tightest_at: (0, 0),
        final_max_distance: 0.0,
        violations: Vec::new(),
        passed: true,
    };
    for (trial, distances) in per_trial.iter().enumerate() {
        for (n, &distance) in distances.iter().enumerate() {
            let bound = kb.bound_at(n);
            let margin = bound - distance;
            if margin < report.tightest_margin {
                report.tightest_margin = margin;
                report.tightest_at = (trial, n);
            }
            if distance > bound + BOUND_TOL {
                report.violations.push(BoundViolation {
                    trial,
                    n,
                    distance,
                    bound,
                });
            }
        }
        report.final_max_distance = report.final_max_distance.max(*distances.last().unwrap());
    }
    report.passed = report.violations.is_empty();
    Ok(report)
}
