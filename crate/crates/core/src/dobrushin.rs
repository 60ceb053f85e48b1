//! Markov–Dobrushin constant and the contraction rate it implies.
//!
//! For a channel `M` the constant `κ_M` is the largest operator `b` with
//! `0 ⪯ b ⪯ M(|ξ⟩⟨ξ|)` for every unit vector `ξ`. Any such feasible `b`
//! gives the one-step contraction
//!
//! ```text
//! ‖M(ρ) − M(σ)‖_TV ≤ (1 − Tr b) ‖ρ − σ‖_TV
//! ```
//!
//! and, iterated, `‖Mⁿ(ρ) − ρ_*‖_TV ≤ 2 e^{−nθ}` with `θ = −ln(1 − Tr b)`.
//!
//! This module restricts `b` to multiples of the identity. The best such
//! multiple is `c*·id` with
//!
//! ```text
//! c* = min_{‖ξ‖=1} λ_min(M(|ξ⟩⟨ξ|)) = min_{‖ξ‖=‖η‖=1} Σᵢ |⟨η|Kᵢ|ξ⟩|²
//! ```
//!
//! [`kappa_scalar`] estimates `c*` by alternating exact minimization over
//! `η` and `ξ` from many starting points; [`kappa_analytic`] returns the
//! closed forms for the built-in families.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::operator::{
    random_density_from, random_pure_state_from, tv_distance, HermitianOperator, Operator,
    PureState,
};
use crate::rng;

/// Trace of κ at or above which the rate is reported as infinite.
pub const TRACE_ONE_TOL: f64 = 1e-12;
/// Slack allowed on the contraction inequality.
pub const CONTRACTION_TOL: f64 = 1e-9;
/// Tolerance used when comparing an estimate with a closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Points per axis of the Bloch-sphere pre-grid used for qubits.
    pub bloch_grid: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 32,
            iterations: 200,
            seed: 0,
            bloch_grid: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaMethod {
    Analytic,
    ScalarOptimized,
}

/// Evidence from the sphere search behind a scalar bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// Minimizing unit vector found.
    pub argmin_state: PureState,
    /// `λ_min(M(|ξ⟩⟨ξ|))` at the argmin, before clamping at zero.
    pub argmin_value: f64,
    /// Final value reached by each start, in start order.
    pub restart_minima: Vec<f64>,
    /// Best value on the Bloch pre-grid (qubits only).
    pub grid_minimum: Option<f64>,
    /// Number of `λ_min(M(|ξ⟩⟨ξ|))` evaluations.
    pub evaluations: usize,
    /// `min λ_min(M(|ξ⟩⟨ξ|) − c*·id)` over every evaluated `ξ`.
    pub min_residual: f64,
}

/// A feasible lower bound `b` for the Markov–Dobrushin constant.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaBound {
    pub lower_bound: HermitianOperator,
    pub trace_kappa: f64,
    /// `−ln(1 − trace_kappa)`, `+∞` when the trace reaches one.
    pub theta: f64,
    pub method: KappaMethod,
    pub certificate: Option<Certificate>,
    pub notes: Vec<String>,
}

/// `θ = −ln(1 − t)` for `t` clamped to `[0, 1]`; infinite within
/// [`TRACE_ONE_TOL`] of one.
pub fn rate_from_trace(trace_kappa: f64) -> f64 {
    let t = trace_kappa.clamp(0.0, 1.0);
    if t >= 1.0 - TRACE_ONE_TOL {
        f64::INFINITY
    } else {
        -(-t).ln_1p()
    }
}

/// `2 e^{−nθ}`, with `2` at `n = 0` and `0` for `n ≥ 1` when `θ = ∞`.
pub fn exponential_bound(theta: f64, n: usize) -> f64 {
    if n == 0 {
        2.0
    } else if theta.is_infinite() {
        0.0
    } else {
        2.0 * (-(n as f64) * theta).exp()
    }
}

impl KappaBound {
    /// `c·id`, with `c` clamped so that `Tr(c·id) ∈ [0, 1]`.
    pub fn from_constant(dim: usize, c: f64, method: KappaMethod) -> Self {
        let d = dim as f64;
        let mut notes = Vec::new();
        if c * d > 1.0 + 1e-9 {
            notes.push(format!("trace {} above 1 clamped to 1", c * d));
        }
        let c = c.clamp(0.0, 1.0 / d);
        let lower_bound = HermitianOperator::identity(dim).scale(c);
        let trace_kappa = lower_bound.trace().min(1.0);
        Self {
            theta: rate_from_trace(trace_kappa),
            lower_bound,
            trace_kappa,
            method,
            certificate: None,
            notes,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower_bound.dim()
    }

    /// The scalar `c` of `c·id`.
    pub fn constant(&self) -> f64 {
        self.trace_kappa / self.dim() as f64
    }

    /// `1 − Tr κ`
    pub fn contraction_factor(&self) -> f64 {
        1.0 - self.trace_kappa
    }

    pub fn bound_at(&self, n: usize) -> f64 {
        exponential_bound(self.theta, n)
    }
}

/// Serializes `+∞` as the string `"inf"`.
pub(crate) fn serialize_rate<S: Serializer>(
    theta: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if theta.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*theta)
    }
}

struct Rate(f64);

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_rate(&self.0, s)
    }
}

impl Serialize for KappaBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("KappaBound", 7)?;
        st.serialize_field("trace_kappa", &self.trace_kappa)?;
        st.serialize_field("theta", &Rate(self.theta))?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("lower_bound", self.lower_bound.as_operator())?;
        let argmin: Option<Vec<[f64; 2]>> = self.certificate.as_ref().map(|c| {
            c.argmin_state
                .amplitudes()
                .iter()
                .map(|z| [z.re, z.im])
                .collect()
        });
        st.serialize_field("argmin_state", &argmin)?;
        st.serialize_field("certificate", &self.certificate)?;
        st.serialize_field("notes", &self.notes)?;
        st.end()
    }
}

/// `(λ_min(M(|ξ⟩⟨ξ|)), eigenvector)`
fn min_output_eigenpair(ch: &KrausChannel, xi: &[Complex64]) -> Result<(f64, Vec<Complex64>)> {
    let image = ch.apply(&Operator::outer(xi, xi))?;
    let eig = HermitianOperator::symmetrized(&image).eigen()?;
    Ok((eig.values[0], eig.vectors[0].clone()))
}

struct Descent {
    value: f64,
    state: Vec<Complex64>,
    evaluations: usize,
}

/// Alternating minimization of `⟨η|M(|ξ⟩⟨ξ|)|η⟩`: `η` is the bottom
/// eigenvector of `M(|ξ⟩⟨ξ|)`, then `ξ` the bottom eigenvector of
/// `M*(|η⟩⟨η|)`. Each half-step is an exact minimization, so the value is
/// nonincreasing.
fn alternating_descent(
    ch: &KrausChannel,
    start: Vec<Complex64>,
    iterations: usize,
) -> Result<Descent> {
    let (mut value, mut eta) = min_output_eigenpair(ch, &start)?;
    let mut best = Descent {
        value,
        state: start,
        evaluations: 1,
    };
    for _ in 0..iterations {
        let dual = ch.apply_adjoint(&Operator::outer(&eta, &eta))?;
        let eig = HermitianOperator::symmetrized(&dual).eigen()?;
        let xi = eig.vectors[0].clone();
        let (next, next_eta) = min_output_eigenpair(ch, &xi)?;
        best.evaluations += 1;
        if next < best.value {
            best.value = next;
            best.state = xi;
        }
        let improvement = value - next;
        value = next;
        eta = next_eta;
        if improvement <= 1e-15 {
            break;
        }
    }
    Ok(best)
}

fn bloch_vector_state(theta: f64, phi: f64) -> Vec<Complex64> {
    vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Best `c·id` lower bound for the Markov–Dobrushin constant, estimated by
/// multi-start alternating minimization over the unit sphere.
///
/// Starts are `budget.restarts` Haar-random vectors (stream `r + 1` of
/// `budget.seed`) plus, for qubits, the four best points of a
/// `bloch_grid × bloch_grid` grid on the Bloch sphere. Starts run in
/// parallel; the reduction takes the smallest value with ties going to the
/// earliest start, so the result does not depend on scheduling.
pub fn kappa_scalar(ch: &KrausChannel, budget: &SearchBudget) -> Result<KappaBound> {
    let report = ch.validate();
    if !report.passed {
        return Err(Error::NotCptp(Box::new(report)));
    }
    let dim = ch.dim();

    let mut starts: Vec<Vec<Complex64>> = (0..budget.restarts)
        .map(|r| {
            let mut rng = rng::stream(budget.seed, r as u64 + 1);
            random_pure_state_from(dim, &mut rng).amplitudes().to_vec()
        })
        .collect();
    if starts.is_empty() {
        let mut e0 = vec![Complex64::new(0.0, 0.0); dim];
        e0[0] = Complex64::new(1.0, 0.0);
        starts.push(e0);
    }

    let mut grid_minimum = None;
    let mut grid_evaluations = 0;
    if dim == 2 && budget.bloch_grid >= 2 {
        let n = budget.bloch_grid;
        let mut grid: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n * n);
        for i in 0..n {
            let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let xi = bloch_vector_state(theta, phi);
                let (value, _) = min_output_eigenpair(ch, &xi)?;
                grid.push((value, xi));
            }
        }
        grid_evaluations = grid.len();
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        grid_minimum = Some(grid[0].0);
        starts.extend(grid.into_iter().take(4).map(|(_, xi)| xi));
    }

    let descents: Vec<Descent> = starts
        .into_par_iter()
        .map(|s| alternating_descent(ch, s, budget.iterations))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, d) in descents.iter().enumerate() {
        if d.value < descents[best].value {
            best = k;
        }
    }
    // the best grid point seeds one descent, so `raw` is also below the
    // grid minimum
    let raw = descents[best].value;
    let argmin = descents[best].state.clone();

    let c = raw.max(0.0);
    let mut kb = KappaBound::from_constant(dim, c, KappaMethod::ScalarOptimized);
    let c_used = c.min(1.0 / dim as f64);
    kb.certificate = Some(Certificate {
        argmin_state: PureState::normalized(argmin)?,
        argmin_value: raw,
        restart_minima: descents.iter().map(|d| d.value).collect(),
        grid_minimum,
        evaluations: grid_evaluations + descents.iter().map(|d| d.evaluations).sum::<usize>(),
        min_residual: raw - c_used,
    });
    Ok(kb)
}

/// Channel families with a closed-form Markov–Dobrushin constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ChannelFamily {
    Identity { dim: usize },
    Omega { dim: usize },
    Unistochastic { dim: usize },
    QubitDepolarizing { alpha: f64 },
    ConvexWithOmega { dim: usize, alpha: f64 },
}

impl ChannelFamily {
    pub const TAGS: [&'static str; 5] = [
        "identity",
        "omega",
        "unistochastic",
        "qubit-depolarizing",
        "convex-with-omega",
    ];

    pub fn parse(tag: &str, dim: Option<usize>, alpha: Option<f64>) -> Result<Self> {
        let need_dim = || dim.ok_or(Error::MissingParameter("dim"));
        let need_alpha = || {
            let a = alpha.ok_or(Error::MissingParameter("alpha"))?;
            if a > 0.0 && a < 1.0 {
                Ok(a)
            } else {
                Err(Error::OutOfRange {
                    name: "alpha",
                    value: a,
                    range: "(0, 1)",
                })
            }
        };
        let family = match tag {
            "identity" => Self::Identity { dim: need_dim()? },
            "omega" => Self::Omega { dim: need_dim()? },
            "unistochastic" => Self::Unistochastic { dim: need_dim()? },
            "qubit-depolarizing" => Self::QubitDepolarizing {
                alpha: need_alpha()?,
            },
            "convex-with-omega" => Self::ConvexWithOmega {
                dim: need_dim()?,
                alpha: need_alpha()?,
            },
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        if family.dim() == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(family)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Identity { .. } => "identity",
            Self::Omega { .. } => "omega",
            Self::Unistochastic { .. } => "unistochastic",
            Self::QubitDepolarizing { .. } => "qubit-depolarizing",
            Self::ConvexWithOmega { .. } => "convex-with-omega",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Identity { dim }
            | Self::Omega { dim }
            | Self::Unistochastic { dim }
            | Self::ConvexWithOmega { dim, .. } => dim,
            Self::QubitDepolarizing { .. } => 2,
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Closed-form bound for a recognized family.
///
/// For the qubit depolarizing channel the output of a pure state has
/// Bloch vector shrunk by `1 − 4α/3`, so the exact constant is
/// `(1 − |1 − 4α/3|)/2`: `2α/3` up to `α = 3/4` and `1 − 2α/3` beyond.
/// For `α M + (1−α) Ω` the result `(1−α)/d` is a guaranteed lower bound,
/// not necessarily the best one.
pub fn kappa_analytic(family: &ChannelFamily) -> Result<KappaBound> {
    let mut notes = Vec::new();
    let (dim, c) = match *family {
        ChannelFamily::Identity { dim } | ChannelFamily::Unistochastic { dim } => {
            (dim, if dim == 1 { 1.0 } else { 0.0 })
        }
        ChannelFamily::Omega { dim } => (dim, 1.0 / dim as f64),
        ChannelFamily::QubitDepolarizing { alpha } => {
            if alpha > 0.75 {
                notes.push(format!(
                    "alpha = {alpha} > 3/4: 2*alpha/3 = {} has trace above 1; using the exact constant 1 - 2*alpha/3",
                    2.0 * alpha / 3.0
                ));
            }
            (2, (1.0 - (1.0 - 4.0 * alpha / 3.0).abs()) / 2.0)
        }
        ChannelFamily::ConvexWithOmega { dim, alpha } => (dim, (1.0 - alpha) / dim as f64),
    };
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut kb = KappaBound::from_constant(dim, c, KappaMethod::Analytic);
    kb.notes.extend(notes);
    Ok(kb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormKind {
    /// The closed form claims to be the constant itself.
    Exact,
    /// The closed form only claims to bound the constant from below.
    LowerBound,
}

/// Comparison of an estimated constant `c` against a family's closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub family: ChannelFamily,
    pub formula: &'static str,
    pub closed_form: f64,
    pub estimate: f64,
    pub kind: ClosedFormKind,
    pub consistent: bool,
    pub message: Option<String>,
}

/// Compares `kb.constant()` with the textbook closed form for `family`
/// (`2α/3` for the qubit depolarizing channel at every `α`).
pub fn check_closed_form(family: &ChannelFamily, kb: &KappaBound) -> ClosedFormCheck {
    let estimate = kb.constant();
    let (formula, closed_form, kind) = match *family {
        ChannelFamily::Identity { dim } | ChannelFamily::Unistochastic { dim } => (
            "0 (1 when dim = 1)",
            if dim == 1 { 1.0 } else { 0.0 },
            ClosedFormKind::Exact,
        ),
        ChannelFamily::Omega { dim } => ("1/dim", 1.0 / dim as f64, ClosedFormKind::Exact),
        ChannelFamily::QubitDepolarizing { alpha } => {
            ("2*alpha/3", 2.0 * alpha / 3.0, ClosedFormKind::Exact)
        }
        ChannelFamily::ConvexWithOmega { dim, alpha } => (
            "(1-alpha)/dim",
            (1.0 - alpha) / dim as f64,
            ClosedFormKind::LowerBound,
        ),
    };
    let consistent = match kind {
        ClosedFormKind::Exact => (estimate - closed_form).abs() <= CLOSED_FORM_TOL,
        ClosedFormKind::LowerBound => estimate >= closed_form - CLOSED_FORM_TOL,
    };
    let message = (!consistent).then(|| {
        let mut msg = format!(
            "estimated kappa constant {estimate} deviates from the closed form {formula} = {closed_form}"
        );
        if let ChannelFamily::QubitDepolarizing { alpha } = *family {
            if alpha > 0.75 {
                msg.push_str(&format!(
                    "; for alpha > 3/4 the closed form gives trace {} > 1 and is not a lower bound (exact constant 1 - 2*alpha/3 = {})",
                    4.0 * alpha / 3.0,
                    1.0 - 2.0 * alpha / 3.0
                ));
            }
        }
        msg
    });
    ClosedFormCheck {
        family: *family,
        formula,
        closed_form,
        estimate,
        kind,
        consistent,
        message,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionViolation {
    pub pair: usize,
    pub input_distance: f64,
    pub output_distance: f64,
    pub ratio: f64,
}

/// Sampled check of `‖M(ρ) − M(σ)‖_TV ≤ (1 − Tr κ) ‖ρ − σ‖_TV`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub pairs_tested: usize,
    /// Largest observed `‖M(ρ) − M(σ)‖_TV / ‖ρ − σ‖_TV`.
    pub max_ratio: f64,
    /// `1 − Tr κ`
    pub bound: f64,
    /// Largest observed output distance, a sampled estimate of the diameter
    /// of `M(S(H))`.
    pub max_output_distance: f64,
    pub violations: Vec<ContractionViolation>,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `n_pairs` random state pairs and checks the one-step
/// contraction with factor `1 − kb.trace_kappa`, allowing
/// [`CONTRACTION_TOL`] of slack.
pub fn contraction_check(
    ch: &KrausChannel,
    kb: &KappaBound,
    n_pairs: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if kb.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: kb.dim(),
        });
    }
    let bound = kb.contraction_factor();
    let mut rng = rng::stream(seed, 0);
    let mut report = ContractionReport {
        pairs_tested: n_pairs,
        max_ratio: 0.0,
        bound,
        max_output_distance: 0.0,
        violations: Vec::new(),
    };
    for pair in 0..n_pairs {
        let rho = random_density_from(ch.dim(), &mut rng);
        let sigma = random_density_from(ch.dim(), &mut rng);
        let input_distance = rho.tv_distance(&sigma)?;
        let output_distance = tv_distance(
            &ch.apply(rho.as_operator())?,
            &ch.apply(sigma.as_operator())?,
        )?;
        report.max_output_distance = report.max_output_distance.max(output_distance);
        if input_distance > 1e-14 {
            let ratio = output_distance / input_distance;
            report.max_ratio = report.max_ratio.max(ratio);
            if output_distance > bound * input_distance + CONTRACTION_TOL {
                report.violations.push(ContractionViolation {
                    pair,
                    input_distance,
                    output_distance,
                    ratio,
                });
            }
        }
    }
    Ok(report)
}
