//! Simulated polarization experiment.
//!
//! A signal photon is prepared with a half-wave plate (or a weighted mix of
//! two plate settings), coupled to a meter photon through a coincidence
//! post-selected controlled-sign gate built from a partially polarizing
//! beam splitter, and finally analyzed in the `ŷ(θ)` basis with a half-wave
//! plate and a polarizing beam splitter. The meter is never analyzed.
//!
//! Injecting the meter as `|H⟩` switches the gate off (no coupling), giving
//! the unperturbed statistics; injecting `|+⟩` entangles the meter with the
//! `H/V` content of the signal, which after tracing out the meter is the
//! Lüders `x̂` channel, giving the perturbed statistics.
//!
//! Two-qubit ordering is signal-first: basis index `2·s + m` with `H = 0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::algebra::{ket_h, ket_plus, Effect, QState};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::measurement::OutcomeDistribution;
use crate::ZERO_PROBABILITY;

/// Signal preparation: plate angle `±α` mixed with weights `w₊`, `1 - w₊`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    /// Half-wave plate angle in degrees.
    pub alpha_deg: f64,
    pub w_plus: f64,
    /// Relative H/V phase in radians.
    pub phi: f64,
}

impl PrepConfig {
    pub fn new(alpha_deg: f64, w_plus: f64, phi: f64) -> Result<Self> {
        if !alpha_deg.is_finite() || !phi.is_finite() {
            return Err(Error::Domain("plate angle and phase must be finite".into()));
        }
        if !(0.0..=1.0).contains(&w_plus) {
            return Err(Error::Domain(format!("w_plus = {w_plus} outside [0, 1]")));
        }
        Ok(Self {
            alpha_deg,
            w_plus,
            phi,
        })
    }

    /// Configuration reaching population `p` and coherence `γ` with
    /// `α ∈ [0°, 45°]`.
    pub fn from_p_gamma(p: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
        }
        if !(-1.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma = {gamma} outside [-1, 1]")));
        }
        Self::new(0.5 * p.sqrt().asin().to_degrees(), 0.5 * (1.0 + gamma), 0.0)
    }

    pub fn w_minus(&self) -> f64 {
        1.0 - self.w_plus
    }

    /// `p = sin²(2α)`
    pub fn p(&self) -> f64 {
        (2.0 * self.alpha_deg.to_radians()).sin().powi(2)
    }

    /// `γ = w₊ - w₋`
    pub fn gamma(&self) -> f64 {
        self.w_plus - self.w_minus()
    }
}

/// Intensity transmittivities of the interaction splitter and the
/// two-photon interference visibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub t_h: f64,
    pub t_v: f64,
    pub visibility: f64,
}

impl GateParams {
    pub fn new(t_h: f64, t_v: f64, visibility: f64) -> Result<Self> {
        for (name, x) in [("t_h", t_h), ("t_v", t_v), ("visibility", visibility)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
            }
        }
        Ok(Self {
            t_h,
            t_v,
            visibility,
        })
    }

    /// `T_H = 1`, `T_V = 1/3`, perfect interference.
    pub fn ideal() -> Self {
        Self {
            t_h: 1.0,
            t_v: 1.0 / 3.0,
            visibility: 1.0,
        }
    }

    /// Splitter characterized in the laboratory: `T_H = 0.985`, `T_V = 0.324`.
    pub fn measured() -> Self {
        Self {
            t_h: 0.985,
            t_v: 0.324,
            visibility: 1.0,
        }
    }

    /// Coincidence amplitudes per `|s, m⟩` term after the interaction
    /// splitter and the two compensating splitters.
    ///
    /// Each photon is transmitted with amplitude `√T_pol`, then attenuated by
    /// the compensators with swapped transmittivities (`√T_V` on `H`,
    /// `√T_H` on `V`). Only `VV` has a second coincidence path, both photons
    /// reflected, with amplitude `-(1 - T_V)` before compensation. Reflected
    /// `H` is routed out of the coincidence window and lost.
    pub fn amplitudes(&self) -> GateAmplitudes {
        let h = self.t_h.sqrt() * self.t_v.sqrt();
        let v = self.t_v.sqrt() * self.t_h.sqrt();
        GateAmplitudes {
            hh: h * h,
            hv: h * v,
            vh: v * h,
            vv_transmitted: v * v,
            vv_reflected: -(1.0 - self.t_v) * self.t_h,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateAmplitudes {
    pub hh: f64,
    pub hv: f64,
    pub vh: f64,
    pub vv_transmitted: f64,
    pub vv_reflected: f64,
}

impl GateAmplitudes {
    /// `VV` amplitude when both coincidence paths interfere.
    pub fn vv(&self) -> f64 {
        self.vv_transmitted + self.vv_reflected
    }
}

/// Jones matrix of a half-wave plate at angle `beta` (radians):
/// `|H⟩ ↦ cos 2β |H⟩ + sin 2β |V⟩`.
pub fn half_wave_plate(beta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * beta).sin_cos();
    ComplexMatrix::from_real_rows([[c, s], [s, -c]])
}

/// Analyzer plate angle for `ŷ(θ)`: `θ/4` in magnitude, turned opposite to
/// the preparation plates, so that the `ŷ = -1` eigenvector exits the
/// transmitted (`H`) port of the polarizing splitter.
pub fn analyzer_plate_angle(theta: f64) -> f64 {
    -0.25 * theta
}

/// `w₊|ψ₊⟩⟨ψ₊| + w₋|ψ₋⟩⟨ψ₋|` with `|ψ±⟩ = HWP(±α)|H⟩`, then the phase `φ`.
pub fn prepare_signal(cfg: &PrepConfig) -> Result<QState> {
    let alpha = cfg.alpha_deg.to_radians();
    let h = ket_h();
    let apply = |m: &ComplexMatrix| [m[(0, 0)] * h[0], m[(1, 0)] * h[0]];
    let plus = apply(&half_wave_plate(alpha));
    let minus = apply(&half_wave_plate(-alpha));
    let mixed = &ComplexMatrix::outer(&plus).scale(cfg.w_plus)
        + &ComplexMatrix::outer(&minus).scale(cfg.w_minus());
    let mut phase = ComplexMatrix::identity(2);
    phase[(1, 1)] = C64::from_polar(1.0, cfg.phi);
    QState::new(mixed.conjugate_by(&phase).hermitian_part())
}

fn diag4(d: [f64; 4]) -> ComplexMatrix {
    ComplexMatrix::diagonal(&d)
}

/// Applies the post-selected gate to a signal ⊗ meter state.
///
/// With visibility `v` the unnormalized output is
/// `v·K ρ K† + (1-v)·(K_t ρ K_t† + K_r ρ K_r†)`: interfering paths, or the
/// transmitted and reflected `VV` paths added incoherently. Returns the
/// renormalized state and the coincidence probability.
pub fn gate_channel(joint_in: &QState, params: &GateParams) -> Result<(QState, f64)> {
    check_dim(4, joint_in.dim())?;
    let a = params.amplitudes();
    let interfering = diag4([a.hh, a.hv, a.vh, a.vv()]);
    let transmitted = diag4([a.hh, a.hv, a.vh, a.vv_transmitted]);
    let reflected = diag4([0.0, 0.0, 0.0, a.vv_reflected]);
    let rho = joint_in.matrix();
    let v = params.visibility;
    let coherent = rho.conjugate_by(&interfering).scale(v);
    let incoherent = &rho.conjugate_by(&transmitted) + &rho.conjugate_by(&reflected);
    let out = &coherent + &incoherent.scale(1.0 - v);
    let success = out.trace().re;
    if success <= ZERO_PROBABILITY {
        return Err(Error::PostSelectionImpossible(success));
    }
    QState::from_unnormalized(&out)
}

/// Whether the gate is switched on by injecting a diagonal meter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Meter `|H⟩`: no coupling; statistics of `ŷ` on `ρ`.
    Unperturbed,
    /// Meter `|+⟩`: the signal's `x̂` is imprinted on the meter.
    Perturbed,
}

impl Mode {
    pub fn meter(&self) -> QState {
        let ket = match self {
            Mode::Unperturbed => ket_h(),
            Mode::Perturbed => ket_plus(),
        };
        QState::pure(&ket).expect("meter kets are normalized")
    }
}

/// Signal state that reaches the analyzer in the given mode.
pub fn signal_after_gate(cfg: &PrepConfig, params: &GateParams, mode: Mode) -> Result<QState> {
    let joint = prepare_signal(cfg)?.tensor(&mode.meter());
    let (out, _) = gate_channel(&joint, params)?;
    QState::new(out.matrix().partial_trace_second(2)?.hermitian_part())
}

/// `P(y)` registered behind the analyzer for one setting.
pub fn run_setting(
    cfg: &PrepConfig,
    params: &GateParams,
    theta: f64,
    mode: Mode,
) -> Result<OutcomeDistribution> {
    let signal = signal_after_gate(cfg, params, mode)?;
    let rotated = signal
        .matrix()
        .conjugate_by(&half_wave_plate(analyzer_plate_angle(theta)));
    let transmitted = Effect::new(ComplexMatrix::diagonal(&[1.0, 0.0]))?;
    let reflected = Effect::new(ComplexMatrix::diagonal(&[0.0, 1.0]))?;
    let analyzed = QState::new(rotated.hermitian_part())?;
    OutcomeDistribution::new(vec![
        (-1.0, analyzed.probability(&transmitted)?),
        (1.0, analyzed.probability(&reflected)?),
    ])
}

/// Noiseless ΔV of the simulated apparatus (matches the Lüders prediction
/// only for the ideal gate).
pub fn model_delta_v(cfg: &PrepConfig, params: &GateParams, theta: f64) -> Result<f64> {
    let unperturbed = run_setting(cfg, params, theta, Mode::Unperturbed)?;
    let perturbed = run_setting(cfg, params, theta, Mode::Perturbed)?;
    Ok(perturbed.variance() - unperturbed.variance())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    /// Analyzer angle `θ` in radians.
    pub theta: f64,
    pub mode: Mode,
}

/// Coincidence counts per `ŷ` outcome for one setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: Option<Setting>,
    /// `(outcome value, count)` in distribution order.
    pub counts: Vec<(f64, u64)>,
    /// Expected coincidences for the setting.
    pub mean_flux: f64,
}

impl CountRecord {
    pub fn with_setting(mut self, theta: f64, mode: Mode) -> Self {
        self.setting = Some(Setting { theta, mode });
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, n)| n).sum()
    }

    /// Plug-in variance of the empirical outcome frequencies and its
    /// first-order Poisson variance `Σ_k (∂V/∂n_k)² n_k`, where
    /// `∂V/∂n_k = ((y_k - μ)² - V) / N`.
    pub fn plugin_variance(&self) -> Result<(f64, f64)> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Estimation("record has zero total counts".into()));
        }
        let n = total as f64;
        let mu: f64 = self.counts.iter().map(|&(y, c)| y * c as f64).sum::<f64>() / n;
        let var: f64 = self
            .counts
            .iter()
            .map(|&(y, c)| (y - mu).powi(2) * c as f64)
            .sum::<f64>()
            / n;
        let err_sq = self
            .counts
            .iter()
            .map(|&(y, c)| {
                let d = ((y - mu).powi(2) - var) / n;
                d * d * c as f64
            })
            .sum();
        Ok((var, err_sq))
    }
}

/// SplitMix64 finalizer over `(master, index, stream)`.
pub fn derive_seed(master: u64, index: u64, stream: u64) -> u64 {
    let mut z = master
        ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent Poisson counts with means `mean_flux·P(y)`; fully
/// determined by `seed`.
pub fn sample_counts(dist: &OutcomeDistribution, mean_flux: f64, seed: u64) -> Result<CountRecord> {
    if !(mean_flux > 0.0 && mean_flux.is_finite()) {
        return Err(Error::Domain(format!(
            "mean flux {mean_flux} must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = dist
        .entries()
        .iter()
        .map(|&(y, p)| {
            let lambda = mean_flux * p;
            let n = if lambda > 0.0 {
                Poisson::new(lambda)
                    .map_err(|e| Error::Domain(format!("Poisson mean {lambda}: {e}")))?
                    .sample(&mut rng) as u64
            } else {
                0
            };
            Ok((y, n))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountRecord {
        setting: None,
        counts,
        mean_flux,
    })
}

/// Empirical ΔV with its propagated Poisson standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaVEstimate {
    pub delta_v: f64,
    pub std_error: f64,
}

pub fn estimate_delta_v(
    unperturbed: &CountRecord,
    perturbed: &CountRecord,
) -> Result<DeltaVEstimate> {
    let (vu, eu) = unperturbed.plugin_variance()?;
    let (vp, ep) = perturbed.plugin_variance()?;
    Ok(DeltaVEstimate {
        delta_v: vp - vu,
        std_error: (eu + ep).sqrt(),
    })
}

/// Both configurations of one setting, sampled with seeds derived from
/// `(master_seed, index)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatedPoint {
    pub model_delta_v: f64,
    pub estimate: DeltaVEstimate,
    pub unperturbed: CountRecord,
    pub perturbed: CountRecord,
}

pub fn simulate_point(
    cfg: &PrepConfig,
    params: &GateParams,
    theta: f64,
    mean_flux: f64,
    master_seed: u64,
    index: u64,
) -> Result<SimulatedPoint> {
    let du = run_setting(cfg, params, theta, Mode::Unperturbed)?;
    let dp = run_setting(cfg, params, theta, Mode::Perturbed)?;
    let unperturbed = sample_counts(&du, mean_flux, derive_seed(master_seed, index, 0))?
        .with_setting(theta, Mode::Unperturbed);
    let perturbed = sample_counts(&dp, mean_flux, derive_seed(master_seed, index, 1))?
        .with_setting(theta, Mode::Perturbed);
    let estimate = estimate_delta_v(&unperturbed, &perturbed)?;
    Ok(SimulatedPoint {
        model_delta_v: dp.variance() - du.variance(),
        estimate,
        unperturbed,
        perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_state, observable_x, observable_y};
    use crate::measurement::{luders_channel, outcome_distribution};
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_norm() <= tol
    }

    #[test]
    fn prep_examples() {
        let cfg = PrepConfig::new(12.0, 1.0, 0.0).unwrap();
        assert!((cfg.p() - 0.165_434_696_820_570_9).abs() < 1e-15);
        let rho = prepare_signal(&cfg).unwrap();
        let expected = make_state(cfg.p(), 1.0, 0.0).unwrap();
        assert!(close(rho.matrix(), expected.matrix(), 1e-15));

        let mixed = prepare_signal(&PrepConfig::new(22.5, 0.5, 0.0).unwrap()).unwrap();
        assert!(close(
            mixed.matrix(),
            &ComplexMatrix::diagonal(&[0.5, 0.5]),
            1e-15
        ));

        for w in [0.0, 0.3, 1.0] {
            let h = prepare_signal(&PrepConfig::new(0.0, w, 0.0).unwrap()).unwrap();
            assert!(close(
                h.matrix(),
                &ComplexMatrix::diagonal(&[1.0, 0.0]),
                0.0
            ));
        }
    }

    #[test]
    fn prep_matches_state_family_with_phase() {
        let cfg = PrepConfig::new(17.0, 0.8, 0.9).unwrap();
        let rho = prepare_signal(&cfg).unwrap();
        let expected = make_state(cfg.p(), cfg.gamma(), 0.9).unwrap();
        assert!(close(rho.matrix(), expected.matrix(), 1e-15));
    }

    #[test]
    fn from_p_gamma_round_trips() {
        let cfg = PrepConfig::from_p_gamma(0.552, 0.4).unwrap();
        assert!((cfg.p() - 0.552).abs() < 1e-14);
        assert!((cfg.gamma() - 0.4).abs() < 1e-15);
        assert!(PrepConfig::from_p_gamma(1.2, 0.0).is_err());
        assert!(PrepConfig::new(10.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn ideal_amplitudes_are_balanced() {
        let a = GateParams::ideal().amplitudes();
        for amp in [a.hh, a.hv, a.vh] {
            assert!((amp - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((a.vv() + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ideal_gate_success_probability_for_plus_plus() {
        let pp = QState::pure(&ket_plus())
            .unwrap()
            .tensor(&QState::pure(&ket_plus()).unwrap());
        let (_, success) = gate_channel(&pp, &GateParams::ideal()).unwrap();
        assert!((success - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn meter_h_leaves_signal_unchanged() {
        let rho = make_state(0.3, 0.7, 0.0).unwrap();
        let joint = rho.tensor(&Mode::Unperturbed.meter());
        for params in [GateParams::ideal(), GateParams::measured()] {
            let (out, _) = gate_channel(&joint, &params).unwrap();
            assert!(close(out.matrix(), joint.matrix(), 1e-12));
        }
    }

    #[test]
    fn meter_plus_entangles_pure_signal() {
        let p: f64 = 0.3;
        let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
        let sig = [C64::new(a, 0.0), C64::new(b, 0.0)];
        let joint = QState::pure(&sig).unwrap().tensor(&Mode::Perturbed.meter());
        let (out, _) = gate_channel(&joint, &GateParams::ideal()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // √(1-p)|H⟩|+⟩ + √p|V⟩|−⟩
        let target = [
            C64::new(a * r, 0.0),
            C64::new(a * r, 0.0),
            C64::new(b * r, 0.0),
            C64::new(-b * r, 0.0),
        ];
        assert!(close(out.matrix(), &ComplexMatrix::outer(&target), 1e-12));
    }

    #[test]
    fn gate_rejects_impossible_post_selection() {
        let pp = QState::maximally_mixed(4);
        let dead = GateParams::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            gate_channel(&pp, &dead),
            Err(Error::PostSelectionImpossible(_))
        ));
        assert!(gate_channel(&QState::maximally_mixed(2), &GateParams::ideal()).is_err());
        assert!(GateParams::new(1.1, 0.3, 1.0).is_err());
    }

    #[test]
    fn run_setting_reproduces_ideal_statistics() {
        let cfg = PrepConfig::new(31.0, 0.85, 0.0).unwrap();
        let rho = prepare_signal(&cfg).unwrap();
        let dephased = luders_channel(&rho, &observable_x()).unwrap();
        for k in 0..12 {
            let theta = k as f64 * 15f64.to_radians();
            let y = observable_y(theta);
            let up = run_setting(&cfg, &GateParams::ideal(), theta, Mode::Unperturbed).unwrap();
            let pe = run_setting(&cfg, &GateParams::ideal(), theta, Mode::Perturbed).unwrap();
            let want_up = outcome_distribution(&rho, &y).unwrap();
            let want_pe = outcome_distribution(&dephased, &y).unwrap();
            assert!(up.total_variation(&want_up).unwrap() < 1e-10);
            assert!(pe.total_variation(&want_pe).unwrap() < 1e-10);
        }
        let a = run_setting(&cfg, &GateParams::ideal(), 0.0, Mode::Unperturbed).unwrap();
        let b = run_setting(&cfg, &GateParams::ideal(), 0.0, Mode::Perturbed).unwrap();
        assert!(a.total_variation(&b).unwrap() < 1e-12);
    }

    #[test]
    fn zero_visibility_leaves_residual_coherence() {
        let cfg = PrepConfig::from_p_gamma(0.5, 1.0).unwrap();
        let blind = GateParams::new(1.0, 1.0 / 3.0, 0.0).unwrap();
        let got = run_setting(&cfg, &blind, FRAC_PI_2, Mode::Perturbed).unwrap();
        // signal ends as ½|+⟩⟨+| + ½|V⟩⟨V|, so P(+1) = 3/4 instead of 1/2
        assert!((got.probability_of(1.0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let d = OutcomeDistribution::new(vec![(-1.0, 0.3), (1.0, 0.7)]).unwrap();
        let a = sample_counts(&d, 1e4, 7).unwrap();
        let b = sample_counts(&d, 1e4, 7).unwrap();
        let c = sample_counts(&d, 1e4, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
        assert!(sample_counts(&d, 0.0, 1).is_err());
        assert!(sample_counts(&d, f64::NAN, 1).is_err());
    }

    #[test]
    fn degenerate_distribution_counts() {
        let d = OutcomeDistribution::new(vec![(-1.0, 0.0), (1.0, 1.0)]).unwrap();
        let r = sample_counts(&d, 1000.0, 3).unwrap();
        assert_eq!(r.counts[0].1, 0);
        // total ~ Poisson(1000): 6σ window
        assert!((r.total() as f64 - 1000.0).abs() < 6.0 * 1000f64.sqrt());
    }

    #[test]
    fn large_flux_relative_deviation() {
        let d = OutcomeDistribution::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let r = sample_counts(&d, 1e6, 11).unwrap();
        for &(_, n) in &r.counts {
            assert!(((n as f64) / 5e5 - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn proportional_counts_reproduce_analytic_delta_v() {
        let (p, g, t) = (0.25, 1.0, 60f64.to_radians());
        let cfg = PrepConfig::from_p_gamma(p, g).unwrap();
        let make = |mode| {
            let d = run_setting(&cfg, &GateParams::ideal(), t, mode).unwrap();
            let flux = 1e8;
            CountRecord {
                setting: None,
                counts: d
                    .entries()
                    .iter()
                    .map(|&(y, q)| (y, (q * flux).round() as u64))
                    .collect(),
                mean_flux: flux,
            }
        };
        // rounding to whole counts at 1e8 costs ~1e-8
        let est = estimate_delta_v(&make(Mode::Unperturbed), &make(Mode::Perturbed)).unwrap();
        let want = crate::criterion::analytic_delta_v(p, g, t).unwrap();
        assert!((est.delta_v - want).abs() < 1e-7);
    }

    #[test]
    fn exact_frequencies_give_exact_plugin_estimate() {
        let rec = |a: u64, b: u64| CountRecord {
            setting: None,
            counts: vec![(-1.0, a), (1.0, b)],
            mean_flux: (a + b) as f64,
        };
        // P(+1) = 1 vs uniform: ΔV = 1 exactly
        let est = estimate_delta_v(&rec(0, 400), &rec(200, 200)).unwrap();
        assert!((est.delta_v - 1.0).abs() < 1e-12);
        assert_eq!(est.std_error, 0.0);
        assert!(matches!(
            estimate_delta_v(&rec(0, 0), &rec(1, 1)),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn plugin_error_matches_binary_formula() {
        let (np, nm) = (730u64, 270u64);
        let r = CountRecord {
            setting: None,
            counts: vec![(-1.0, nm), (1.0, np)],
            mean_flux: 1000.0,
        };
        let (v, e) = r.plugin_variance().unwrap();
        let n = (np + nm) as f64;
        let m = (np as f64 - nm as f64) / n;
        assert!((v - (1.0 - m * m)).abs() < 1e-15);
        let want = 16.0 * m * m * np as f64 * nm as f64 / n.powi(3);
        assert!((e - want).abs() < 1e-15);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000)
            .flat_map(|i| [derive_seed(42, i, 0), derive_seed(42, i, 1)])
            .collect();
        assert_eq!(s.len(), 2000);
    }
}
