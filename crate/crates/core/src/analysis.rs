//! Full channel report: validation, κ estimate, classification and, for
//! mixing channels with a nontrivial κ, a simulated check of the
//! exponential bound.

use serde::Serialize;

use crate::channels::{KrausChannel, ValidationReport};
use crate::dobrushin::{
    check_closed_form, kappa_analytic, kappa_scalar, ChannelFamily, ClosedFormCheck, KappaBound,
    SearchBudget, CLOSED_FORM_TOL,
};
use crate::dynamics::{classify, verify_bound, BoundReport, ChannelClassification, Verdict};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub budget: SearchBudget,
    /// Family whose closed-form κ is used and checked against the estimate.
    pub analytic: Option<ChannelFamily>,
    pub tol_spec: f64,
    pub trials: usize,
    pub steps: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            budget: SearchBudget::default(),
            analytic: None,
            tol_spec: crate::dynamics::DEFAULT_TOL_SPEC,
            trials: 20,
            steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundCheck {
    Verified(BoundReport),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub validation: ValidationReport,
    /// The bound used downstream: the closed form when a family was given
    /// and is feasible, otherwise the numerical estimate.
    pub kappa: KappaBound,
    pub kappa_estimate: KappaBound,
    pub closed_form_check: Option<ClosedFormCheck>,
    pub classification: ChannelClassification,
    pub bound_check: BoundCheck,
    /// Human-readable warnings, also suitable for standard error.
    pub flags: Vec<String>,
}

impl AnalysisReport {
    pub fn bound_verified(&self) -> Option<&BoundReport> {
        match &self.bound_check {
            BoundCheck::Verified(r) => Some(r),
            BoundCheck::Skipped { .. } => None,
        }
    }
}

/// Runs every analysis on `ch`. Fails with [`Error::NotCptp`] when the
/// channel does not validate.
pub fn analyze(ch: &KrausChannel, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let validation = ch.validate();
    if !validation.passed {
        return Err(Error::NotCptp(Box::new(validation)));
    }
    let estimate = kappa_scalar(ch, &opts.budget)?;
    let mut flags = estimate.notes.clone();

    let mut closed_form_check = None;
    let kappa = match &opts.analytic {
        None => estimate.clone(),
        Some(family) => {
            if family.dim() != ch.dim() {
                return Err(Error::DimensionMismatch {
                    expected: ch.dim(),
                    found: family.dim(),
                });
            }
            let check = check_closed_form(family, &estimate);
            flags.extend(check.message.clone());
            closed_form_check = Some(check);
            let analytic = kappa_analytic(family)?;
            flags.extend(analytic.notes.iter().cloned());
            // the estimate is attained by a state, so a larger analytic
            // constant cannot be a lower bound for this channel
            if analytic.constant() > estimate.constant() + CLOSED_FORM_TOL {
                flags.push(format!(
                    "closed form for {family} gives constant {} above the attained value {}; the channel does not belong to that family, using the estimate",
                    analytic.constant(),
                    estimate.constant()
                ));
                estimate.clone()
            } else {
                analytic
            }
        }
    };

    let classification = classify(ch, opts.tol_spec)?;
    if let Some(diag) = &classification.evidence.diagnostic {
        flags.push(format!(
            "trajectory evidence disagrees with the spectrum: {diag}"
        ));
    }

    let bound_check = if classification.verdict != Verdict::Mixing {
        BoundCheck::Skipped {
            reason: format!("channel is {}", classification.verdict.as_str()),
        }
    } else if kappa.trace_kappa <= 0.0 {
        BoundCheck::Skipped {
            reason: "trace of kappa is 0, the bound is trivial".to_string(),
        }
    } else {
        let report = verify_bound(ch, &kappa, opts.trials, opts.steps, opts.budget.seed)?;
        if !report.passed {
            flags.push(format!(
                "exponential bound violated {} times",
                report.violations.len()
            ));
        }
        BoundCheck::Verified(report)
    };

    Ok(AnalysisReport {
        validation,
        kappa,
        kappa_estimate: estimate,
        closed_form_check,
        classification,
        bound_check,
        flags,
    })
}
