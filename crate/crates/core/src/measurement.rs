//! Born-rule statistics, post-measurement states, the Lüders
//! ignore-the-outcome channel and sequential joint distributions.

use serde::Serialize;

use crate::algebra::{clamp_small_negative, psd_sqrt, Effect, Observable, QState};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, ComplexMatrix};
use crate::{COMPUTED_TOL, EXACT_TOL, ZERO_PROBABILITY};

/// Probability assigned to each outcome value, in observable order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    entries: Vec<(f64, f64)>,
}

impl OutcomeDistribution {
    /// Validates total mass (1e-10) and clamps round-off negatives.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(entries.len());
        let mut total = 0.0;
        for (v, p) in entries {
            if p.is_nan() || p < -EXACT_TOL {
                return Err(Error::Domain(format!(
                    "negative probability {p} for outcome {v}"
                )));
            }
            let p = p.max(0.0);
            total += p;
            out.push((v, p));
        }
        if (total - 1.0).abs() > COMPUTED_TOL {
            return Err(Error::Domain(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { entries: out })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn probability_of(&self, value: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(v, _)| *v == value)
            .map(|(_, p)| *p)
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        self.central_moment(2)
    }

    pub fn central_moment(&self, k: u32) -> f64 {
        let mu = self.mean();
        let m: f64 = self
            .entries
            .iter()
            .map(|(v, p)| (v - mu).powi(k as i32) * p)
            .sum();
        if k.is_multiple_of(2) {
            clamp_small_negative(m)
        } else {
            m
        }
    }

    /// Shannon entropy in nats, `0·ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .entries
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(_, p)| p * p.ln())
            .sum::<f64>()
    }

    /// Total variation distance `½ Σ |p - q|` over matching outcome values.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> Result<f64> {
        if self.entries.len() != other.entries.len() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                found: other.entries.len(),
            });
        }
        let mut s = 0.0;
        for ((v, p), (w, q)) in self.entries.iter().zip(&other.entries) {
            if v != w {
                return Err(Error::Domain(format!("outcome labels differ: {v} vs {w}")));
            }
            s += (p - q).abs();
        }
        Ok(0.5 * s)
    }
}

/// `P(x, y)` for a first measurement `x` followed by a second `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    x_values: Vec<f64>,
    y_values: Vec<f64>,
    /// `probs[i][j] = P(x_i, y_j)`
    probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(x_values: Vec<f64>, y_values: Vec<f64>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != x_values.len() || probs.iter().any(|row| row.len() != y_values.len()) {
            return Err(Error::Domain(
                "joint table shape does not match outcome labels".into(),
            ));
        }
        let mut total = 0.0;
        let probs = probs
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|p| {
                        if p.is_nan() || p < -EXACT_TOL {
                            return Err(Error::Domain(format!("negative joint probability {p}")));
                        }
                        total += p.max(0.0);
                        Ok(p.max(0.0))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if (total - 1.0).abs() > COMPUTED_TOL {
            return Err(Error::Domain(format!("joint mass {total} is not 1")));
        }
        Ok(Self {
            x_values,
            y_values,
            probs,
        })
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn y_values(&self) -> &[f64] {
        &self.y_values
    }

    pub fn probability(&self, xi: usize, yj: usize) -> f64 {
        self.probs[xi][yj]
    }

    pub fn marginal_x(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            entries: self
                .x_values
                .iter()
                .zip(&self.probs)
                .map(|(&x, row)| (x, row.iter().sum()))
                .collect(),
        }
    }

    pub fn marginal_y(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            entries: self
                .y_values
                .iter()
                .enumerate()
                .map(|(j, &y)| (y, self.probs.iter().map(|row| row[j]).sum()))
                .collect(),
        }
    }

    /// `P(y | x_i)`, or `None` when `P(x_i)` is a zero-mass branch.
    pub fn conditional_y(&self, xi: usize) -> Option<OutcomeDistribution> {
        let row = &self.probs[xi];
        let px: f64 = row.iter().sum();
        if px <= ZERO_PROBABILITY {
            return None;
        }
        Some(OutcomeDistribution {
            entries: self
                .y_values
                .iter()
                .zip(row)
                .map(|(&y, &p)| (y, p / px))
                .collect(),
        })
    }
}

/// Born-rule distribution of `obs` on `state`.
pub fn outcome_distribution(state: &QState, obs: &Observable) -> Result<OutcomeDistribution> {
    check_dim(obs.dim(), state.dim())?;
    let entries = obs
        .outcomes()
        .iter()
        .map(|(v, e)| state.probability(e).map(|p| (*v, p)))
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::new(entries)
}

/// `Ξ^{1/2} ρ Ξ^{1/2}`, unnormalized.
fn apply_sqrt_instrument(state: &QState, sqrt_effect: &ComplexMatrix) -> ComplexMatrix {
    &(sqrt_effect * state.matrix()) * sqrt_effect
}

/// State after observing the outcome of `effect`, with its probability.
pub fn post_measurement_state(state: &QState, effect: &Effect) -> Result<(QState, f64)> {
    check_dim(effect.dim(), state.dim())?;
    let root = psd_sqrt(effect)?;
    let branch = apply_sqrt_instrument(state, &root);
    let probability = branch.trace().re;
    if probability <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome { probability });
    }
    QState::from_unnormalized(&branch)
}

/// `ρ' = Σ_x Ξ_x^{1/2} ρ Ξ_x^{1/2}`: measure `obs` and forget the result.
pub fn luders_channel(state: &QState, obs: &Observable) -> Result<QState> {
    check_dim(obs.dim(), state.dim())?;
    let mut out = ComplexMatrix::zeros(state.dim());
    for effect in obs.effects() {
        let root = psd_sqrt(effect)?;
        out = &out + &apply_sqrt_instrument(state, &root);
    }
    QState::new(out.hermitian_part())
}

/// The Lüders channel leaves `state` unchanged within 1e-10.
pub fn is_incoherent(state: &QState, obs: &Observable) -> Result<bool> {
    let dephased = luders_channel(state, obs)?;
    Ok((dephased.matrix() - state.matrix()).max_norm() <= COMPUTED_TOL)
}

/// `P(x, y) = tr(Π_y Ξ_x^{1/2} ρ Ξ_x^{1/2})`.
pub fn sequential_joint(
    state: &QState,
    first: &Observable,
    second: &Observable,
) -> Result<JointDistribution> {
    check_dim(first.dim(), state.dim())?;
    check_dim(second.dim(), state.dim())?;
    let mut probs = Vec::with_capacity(first.outcomes().len());
    for xi in first.effects() {
        let root = psd_sqrt(xi)?;
        let branch = apply_sqrt_instrument(state, &root);
        let row = second
            .effects()
            .map(|pi| (&branch * pi.matrix()).trace().re)
            .collect();
        probs.push(row);
    }
    JointDistribution::new(first.values().collect(), second.values().collect(), probs)
}

/// How far the effects of `obs` are from incoherent mixtures of the
/// projectors of the sharp `basis`: the largest off-diagonal modulus of any
/// `Π_y` written in that basis. Zero iff every `Π_y` is diagonal there.
pub fn measurement_coherence_witness(obs: &Observable, basis: &Observable) -> Result<f64> {
    check_dim(basis.dim(), obs.dim())?;
    if !basis.is_sharp() {
        return Err(Error::Domain(
            "coherence witness needs a sharp (rank-one projective) basis".into(),
        ));
    }
    let kets: Vec<_> = basis
        .effects()
        .map(|e| {
            let eig = eigh(e.matrix());
            eig.vectors.column(eig.values.len() - 1)
        })
        .collect();
    let mut worst = 0.0f64;
    for pi in obs.effects() {
        for (i, bra) in kets.iter().enumerate() {
            for (j, ket) in kets.iter().enumerate() {
                if i == j {
                    continue;
                }
                let m = pi.matrix();
                let mut elem = crate::linalg::ZERO;
                for r in 0..m.dim() {
                    for c in 0..m.dim() {
                        elem += bra[r].conj() * m[(r, c)] * ket[c];
                    }
                }
                worst = worst.max(elem.norm());
            }
        }
    }
    Ok(worst)
}
