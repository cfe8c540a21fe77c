//! Classical laws of total probability and total variance, their quantum
//! violation ΔV, qubit closed forms and higher-order generalizations.
//!
//! Classically, measuring `x` first and discarding the result cannot change
//! the statistics of `y`: `P(y) = Σ_x P(y|x) P(x)` and therefore
//! `V_P(y)[y] = V_P'(y)[y]`. A nonzero
//!
//! ```text
//! ΔV = V_P'(y)[y] - V_P(y)[y]
//! ```
//!
//! in either direction certifies that `y` is coherent with respect to `x`.

use serde::Serialize;

use crate::algebra::{trace_norm_distance, variance, Observable, QState};
use crate::error::{check_dim, Error, Result};
use crate::measurement::{
    luders_channel, measurement_coherence_witness, outcome_distribution, JointDistribution,
};

/// Everything the criterion says about one `(ρ, first, second)` triple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    /// `V_P(y)[y]`, no prior measurement.
    pub v_unperturbed: f64,
    /// `V_P'(y)[y]`, after the first measurement with its outcome ignored.
    pub v_perturbed: f64,
    pub delta_v: f64,
    /// `‖ρ - ρ'‖₁²` (un-halved trace norm).
    pub trace_norm_sq: f64,
    /// [`measurement_coherence_witness`] of `second` against `first`;
    /// `None` when `first` is not sharp.
    pub witness: Option<f64>,
}

impl CriterionReport {
    /// `ΔV / σ` for an externally supplied standard error.
    pub fn z_score(&self, std_error: f64) -> Option<f64> {
        z_score(self.delta_v, std_error)
    }
}

/// Significance of a ΔV estimate; `None` when `std_error` is not positive.
pub fn z_score(delta_v: f64, std_error: f64) -> Option<f64> {
    (std_error > 0.0).then(|| delta_v / std_error)
}

fn check_pair(state: &QState, first: &Observable, second: &Observable) -> Result<()> {
    check_dim(first.dim(), state.dim())?;
    check_dim(second.dim(), state.dim())
}

/// `max_y |P(y) - P'(y)|`; zero whenever the law of total probability holds.
pub fn total_probability_residual(
    state: &QState,
    first: &Observable,
    second: &Observable,
) -> Result<f64> {
    check_pair(state, first, second)?;
    let direct = outcome_distribution(state, second)?;
    let after = outcome_distribution(&luders_channel(state, first)?, second)?;
    Ok(direct
        .entries()
        .iter()
        .zip(after.entries())
        .map(|((_, p), (_, q))| (p - q).abs())
        .fold(0.0, f64::max))
}

/// Matrix-path evaluation of ΔV and the companion quantities.
pub fn delta_v(state: &QState, first: &Observable, second: &Observable) -> Result<CriterionReport> {
    check_pair(state, first, second)?;
    let dephased = luders_channel(state, first)?;
    let v_unperturbed = variance(state, second)?;
    let v_perturbed = variance(&dephased, second)?;
    let trace_norm = trace_norm_distance(state, &dephased)?;
    let witness = if first.is_sharp() {
        Some(measurement_coherence_witness(second, first)?)
    } else {
        None
    };
    Ok(CriterionReport {
        v_unperturbed,
        v_perturbed,
        delta_v: v_perturbed - v_unperturbed,
        trace_norm_sq: trace_norm * trace_norm,
        witness,
    })
}

fn check_qubit_params(p: f64, gamma: Option<f64>, theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    if let Some(g) = gamma {
        if !(-1.0..=1.0).contains(&g) {
            return Err(Error::Domain(format!("gamma = {g} outside [-1, 1]")));
        }
    }
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta = {theta} is not finite")));
    }
    Ok(())
}

/// `1 - [(2p-1)cos θ + 2√(p(1-p))·γ·sin θ]²`
pub fn analytic_variance_unperturbed(p: f64, gamma: f64, theta: f64) -> Result<f64> {
    check_qubit_params(p, Some(gamma), theta)?;
    let b = (2.0 * p - 1.0) * theta.cos() + 2.0 * (p * (1.0 - p)).sqrt() * gamma * theta.sin();
    Ok(1.0 - b * b)
}

/// `1 - (1-2p)² cos² θ`
pub fn analytic_variance_perturbed(p: f64, theta: f64) -> Result<f64> {
    check_qubit_params(p, None, theta)?;
    let c = (1.0 - 2.0 * p) * theta.cos();
    Ok(1.0 - c * c)
}

/// Closed-form ΔV for the qubit family: perturbed minus unperturbed.
pub fn analytic_delta_v(p: f64, gamma: f64, theta: f64) -> Result<f64> {
    Ok(analytic_variance_perturbed(p, theta)? - analytic_variance_unperturbed(p, gamma, theta)?)
}

/// The two terms of `V[y] = E_x[V[y|x]] + V_x[E[y|x]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceDecomposition {
    pub expected_conditional_variance: f64,
    pub variance_of_conditional_means: f64,
}

impl VarianceDecomposition {
    pub fn total(&self) -> f64 {
        self.expected_conditional_variance + self.variance_of_conditional_means
    }
}

/// Splits the y-marginal variance of `joint` by conditioning on `x`.
/// Columns with `P(x) ≤ 1e-14` have no conditional and are skipped.
pub fn law_of_total_variance_decomposition(joint: &JointDistribution) -> VarianceDecomposition {
    let px = joint.marginal_x();
    let mut e_var = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (i, &(_, w)) in px.entries().iter().enumerate() {
        let Some(cond) = joint.conditional_y(i) else {
            continue;
        };
        let mu = cond.mean();
        e_var += w * cond.variance();
        m1 += w * mu;
        m2 += w * mu * mu;
    }
    VarianceDecomposition {
        expected_conditional_variance: e_var,
        variance_of_conditional_means: (m2 - m1 * m1).max(0.0),
    }
}

/// k-th central moment of `P'(y)` minus that of `P(y)`; `k = 2` is ΔV.
pub fn moment_difference(
    state: &QState,
    first: &Observable,
    second: &Observable,
    k: u32,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "moment order {k} must be at least 2"
        )));
    }
    check_pair(state, first, second)?;
    let direct = outcome_distribution(state, second)?;
    let after = outcome_distribution(&luders_channel(state, first)?, second)?;
    Ok(after.central_moment(k) - direct.central_moment(k))
}

/// Shannon entropy (nats) of `P'(y)` minus that of `P(y)`.
pub fn entropy_difference(state: &QState, first: &Observable, second: &Observable) -> Result<f64> {
    check_pair(state, first, second)?;
    let direct = outcome_distribution(state, second)?;
    let after = outcome_distribution(&luders_channel(state, first)?, second)?;
    Ok(after.entropy() - direct.entropy())
}
