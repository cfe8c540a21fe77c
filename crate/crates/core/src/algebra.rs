//! Density matrices, POVM effects and observables, plus the qubit state and
//! observable families used throughout the crate.
//!
//! Basis convention for a polarization qubit: index 0 is `|H⟩`, index 1 is
//! `|V⟩`. The reference observable is `x̂ = -|H⟩⟨H| + |V⟩⟨V|`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh, ComplexMatrix, C64};
use crate::{COMPUTED_TOL, EXACT_TOL, ZERO_PROBABILITY};

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    matrix: ComplexMatrix,
}

impl QState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_defect();
        if herm > EXACT_TOL {
            return Err(Error::Domain(format!(
                "state is not Hermitian (defect {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > EXACT_TOL {
            return Err(Error::Domain(format!("state trace {tr} is not 1")));
        }
        let min = eigh(&matrix).values[0];
        if min < -COMPUTED_TOL {
            return Err(Error::Domain(format!(
                "state is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Normalizes an unnormalized PSD matrix produced by a computation and
    /// symmetrizes away round-off before validating.
    pub(crate) fn from_unnormalized(matrix: &ComplexMatrix) -> Result<(Self, f64)> {
        let weight = matrix.trace().re;
        let state = Self::new(matrix.hermitian_part().scale(1.0 / weight))?;
        Ok((state, weight))
    }

    /// `|ψ⟩⟨ψ|` for a nonzero vector; normalizes `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::Domain("pure state vector has zero norm".into()));
        }
        Self::from_unnormalized(&ComplexMatrix::outer(psi)).map(|(s, _)| s)
    }

    /// Maximally mixed state of dimension `dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).values
    }

    /// `self ⊗ other`, first factor first.
    pub fn tensor(&self, other: &QState) -> QState {
        QState {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Born probability `tr(ρ E)`, imaginary round-off discarded.
    pub fn probability(&self, effect: &Effect) -> Result<f64> {
        check_dim(self.dim(), effect.dim())?;
        Ok((&self.matrix * &effect.matrix).trace().re)
    }
}

/// One POVM element: Hermitian with spectrum in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_defect();
        if herm > EXACT_TOL {
            return Err(Error::Domain(format!(
                "effect is not Hermitian (defect {herm:e})"
            )));
        }
        let values = eigh(&matrix).values;
        let (lo, hi) = (values[0], values[values.len() - 1]);
        if lo < -COMPUTED_TOL || hi > 1.0 + COMPUTED_TOL {
            return Err(Error::Domain(format!(
                "effect spectrum [{lo}, {hi}] outside [0, 1]"
            )));
        }
        Ok(Self { matrix })
    }

    /// Rank-one projector onto `psi` (normalized internally).
    pub fn projector(psi: &[C64]) -> Result<Self> {
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::Domain("projector vector has zero norm".into()));
        }
        Self::new(
            ComplexMatrix::outer(psi)
                .scale(1.0 / norm_sq)
                .hermitian_part(),
        )
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `E² = E` and `tr E = 1` within the computed tolerance.
    pub fn is_rank_one_projector(&self) -> bool {
        let sq = &self.matrix * &self.matrix;
        (&sq - &self.matrix).max_norm() <= COMPUTED_TOL
            && (self.matrix.trace().re - 1.0).abs() <= COMPUTED_TOL
    }
}

/// A real-valued observable as a list of `(outcome value, effect)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    outcomes: Vec<(f64, Effect)>,
}

impl Observable {
    pub fn new(outcomes: Vec<(f64, Effect)>) -> Result<Self> {
        let Some((_, first)) = outcomes.first() else {
            return Err(Error::Domain(
                "observable needs at least one outcome".into(),
            ));
        };
        let dim = first.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, (value, effect)) in outcomes.iter().enumerate() {
            check_dim(dim, effect.dim())?;
            if !value.is_finite() {
                return Err(Error::Domain(format!(
                    "outcome value {value} is not finite"
                )));
            }
            if outcomes[..i].iter().any(|(v, _)| v == value) {
                return Err(Error::Domain(format!("duplicate outcome value {value}")));
            }
            sum = &sum + effect.matrix();
        }
        let defect = (&sum - &ComplexMatrix::identity(dim)).max_norm();
        if defect > EXACT_TOL {
            return Err(Error::Domain(format!(
                "effects do not sum to identity (defect {defect:e})"
            )));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[(f64, Effect)] {
        &self.outcomes
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.outcomes.iter().map(|(v, _)| *v)
    }

    pub fn effects(&self) -> impl Iterator<Item = &Effect> + '_ {
        self.outcomes.iter().map(|(_, e)| e)
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.dim()
    }

    /// Every effect is a rank-one projector, i.e. the observable is a
    /// measurement in an orthonormal basis.
    pub fn is_sharp(&self) -> bool {
        self.outcomes.len() == self.dim() && self.effects().all(Effect::is_rank_one_projector)
    }

    /// The operator `Σ_y y Π_y`.
    pub fn operator(&self) -> ComplexMatrix {
        self.outcomes
            .iter()
            .fold(ComplexMatrix::zeros(self.dim()), |acc, (v, e)| {
                &acc + &e.matrix().scale(*v)
            })
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} outside [0, 1]")))
    }
}

/// Qubit state with population `p` on `|V⟩` and coherence `γ`:
///
/// ```text
/// [[1-p,              √(p(1-p))·γ·e^{-iφ}],
///  [√(p(1-p))·γ·e^{iφ}, p                ]]
/// ```
///
/// `γ ∈ [-1, 1]`; negative values are the same as `φ = π`.
pub fn make_state(p: f64, gamma: f64, phi: f64) -> Result<QState> {
    check_unit_interval("p", p)?;
    if !(-1.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [-1, 1]")));
    }
    if !phi.is_finite() {
        return Err(Error::Domain(format!("phi = {phi} is not finite")));
    }
    let c = (p * (1.0 - p)).sqrt() * gamma;
    let phase = C64::from_polar(1.0, phi);
    let m = ComplexMatrix::from_rows([
        [C64::new(1.0 - p, 0.0), phase.conj() * c],
        [phase * c, C64::new(p, 0.0)],
    ]);
    QState::new(m)
}

/// `ŷ(θ) = cos θ·diag(-1, 1) + sin θ·σ_x` with eigenvalues `∓1` on
/// `cos(θ/2)|H⟩ - sin(θ/2)|V⟩` and `sin(θ/2)|H⟩ + cos(θ/2)|V⟩`.
pub fn observable_y(theta: f64) -> Observable {
    let (s, c) = (0.5 * theta).sin_cos();
    let minus = [C64::new(c, 0.0), C64::new(-s, 0.0)];
    let plus = [C64::new(s, 0.0), C64::new(c, 0.0)];
    let effect = |v: &[C64; 2]| Effect {
        matrix: ComplexMatrix::outer(v),
    };
    Observable {
        outcomes: vec![(-1.0, effect(&minus)), (1.0, effect(&plus))],
    }
}

/// The reference measurement `x̂ = -|H⟩⟨H| + |V⟩⟨V|`.
pub fn observable_x() -> Observable {
    observable_y(0.0)
}

/// `Σ_y y·tr(ρ Π_y)`.
pub fn expectation(state: &QState, obs: &Observable) -> Result<f64> {
    check_dim(obs.dim(), state.dim())?;
    obs.outcomes()
        .iter()
        .map(|(v, e)| state.probability(e).map(|p| v * p))
        .sum()
}

/// Variance of the outcome distribution of `obs` on `state`.
///
/// For projective observables this is `⟨ŷ²⟩ - ⟨ŷ⟩²`.
pub fn variance(state: &QState, obs: &Observable) -> Result<f64> {
    check_dim(obs.dim(), state.dim())?;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (v, e) in obs.outcomes() {
        let p = state.probability(e)?;
        m1 += v * p;
        m2 += v * v * p;
    }
    Ok(clamp_small_negative(m2 - m1 * m1))
}

pub(crate) fn clamp_small_negative(x: f64) -> f64 {
    if (-EXACT_TOL..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// Hermitian PSD square root of an effect.
pub fn psd_sqrt(effect: &Effect) -> Result<ComplexMatrix> {
    psd_sqrt_matrix(effect.matrix())
}

pub(crate) fn psd_sqrt_matrix(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eigh(m);
    if let Some(&bad) = eig.values.iter().find(|&&l| l < -COMPUTED_TOL) {
        return Err(Error::Domain(format!(
            "matrix is not positive semidefinite (eigenvalue {bad:e})"
        )));
    }
    // sqrt turns round-off near zero into O(1e-8) noise; snap it first
    let floor = ZERO_PROBABILITY * eig.values.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    Ok(eig
        .map_values(|l| if l <= floor { 0.0 } else { l.sqrt() })
        .hermitian_part())
}

/// Un-halved trace norm `‖a - b‖₁ = Σ|λ_k(a - b)|`.
///
/// With this normalization its square equals ΔV at `θ = π/2` for the qubit
/// family of [`make_state`]. See [`trace_distance`] for the conventional
/// `½‖a - b‖₁`.
pub fn trace_norm_distance(a: &QState, b: &QState) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let diff = a.matrix() - b.matrix();
    Ok(eigh(&diff).values.iter().map(|l| l.abs()).sum())
}

/// Conventional trace distance `½‖a - b‖₁`, in `[0, 1]`.
pub fn trace_distance(a: &QState, b: &QState) -> Result<f64> {
    trace_norm_distance(a, b).map(|d| 0.5 * d)
}

/// Max-entry norm of `AB - BA`.
pub fn commutator_norm(a: &Effect, b: &Effect) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.matrix().commutator(b.matrix()).max_norm())
}

pub fn ket_h() -> [C64; 2] {
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
}

pub fn ket_v() -> [C64; 2] {
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
}

/// `(|H⟩ + |V⟩)/√2`
pub fn ket_plus() -> [C64; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(r, 0.0), C64::new(r, 0.0)]
}

/// `(|H⟩ - |V⟩)/√2`
pub fn ket_minus() -> [C64; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(r, 0.0), C64::new(-r, 0.0)]
}
