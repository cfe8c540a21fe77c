//! Acceptance gate. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p meascoh --test acceptance -- --nocapture`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use meascoh::algebra::{
    ket_plus, make_state, observable_x, observable_y, Effect, Observable, QState,
};
use meascoh::criterion::{
    delta_v, law_of_total_variance_decomposition, total_probability_residual,
};
use meascoh::linalg::ComplexMatrix;
use meascoh::measurement::{luders_channel, outcome_distribution, sequential_joint};
use meascoh::photonic::{
    gate_channel, model_delta_v, prepare_signal, run_setting, signal_after_gate, simulate_point,
    GateParams, Mode, PrepConfig,
};
use meascoh::sweep::{max_violation, sweep_pure, Command, Range, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, what: &str, ok: bool, detail: String) {
    println!(
        "{} criterion {n}: {what} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

/// Closed-form variances written out independently of the library.
fn oracle_dv(p: f64, g: f64, t: f64) -> f64 {
    let mean_unpert = (2.0 * p - 1.0) * t.cos() + 2.0 * (p * (1.0 - p)).sqrt() * g * t.sin();
    let mean_pert = (1.0 - 2.0 * p) * t.cos();
    (1.0 - mean_pert * mean_pert) - (1.0 - mean_unpert * mean_unpert)
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn criterion_1_commuting_null() {
    let start = Instant::now();
    let (x, y) = (observable_x(), observable_y(0.0));
    let mut worst = 0.0f64;
    for &p in &grid(50, 0.0, 1.0) {
        for &g in &grid(11, 0.0, 1.0) {
            let r = delta_v(&make_state(p, g, 0.0).unwrap(), &x, &y).unwrap();
            worst = worst.max(r.delta_v.abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "theta = 0 gives no variance gap",
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max |dV| = {worst:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_maximal_violation() {
    let r = delta_v(
        &make_state(0.5, 1.0, 0.0).unwrap(),
        &observable_x(),
        &observable_y(FRAC_PI_2),
    )
    .unwrap();
    let plus = QState::pure(&ket_plus()).unwrap();
    let dephased = luders_channel(&plus, &observable_x()).unwrap();
    let mixed_err = (dephased.matrix() - &ComplexMatrix::diagonal(&[0.5, 0.5])).max_norm();
    let dv_err = (r.delta_v - 1.0).abs();
    verdict(
        2,
        "dV(1/2, 1, pi/2) = 1 and |+> dephases to I/2",
        dv_err <= 1e-12 && mixed_err <= 1e-12,
        format!("|dV - 1| = {dv_err:.2e}, state error {mixed_err:.2e}"),
    );
}

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let x = observable_x();
    let thetas: Vec<(f64, Observable)> = grid(50, 0.0, PI)
        .into_iter()
        .map(|t| (t, observable_y(t)))
        .collect();
    let mut worst = 0.0f64;
    for &p in &grid(50, 0.0, 1.0) {
        for &g in &grid(11, 0.0, 1.0) {
            let rho = make_state(p, g, 0.0).unwrap();
            for (t, y) in &thetas {
                let r = delta_v(&rho, &x, y).unwrap();
                worst = worst.max((r.delta_v - oracle_dv(p, g, *t)).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        "matrix path matches closed forms on 50x50x11",
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("max error {worst:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_4_trace_distance_identity() {
    let (x, y) = (observable_x(), observable_y(FRAC_PI_2));
    let mut worst = 0.0f64;
    for &p in &grid(50, 0.0, 1.0) {
        for &g in &grid(11, 0.0, 1.0) {
            let r = delta_v(&make_state(p, g, 0.0).unwrap(), &x, &y).unwrap();
            let closed = 4.0 * p * (1.0 - p) * g * g;
            worst = worst
                .max((r.delta_v - r.trace_norm_sq).abs())
                .max((r.delta_v - closed).abs());
        }
    }
    verdict(
        4,
        "dV(pi/2) = squared trace norm = 4p(1-p)gamma^2",
        worst <= 1e-12,
        format!("max error {worst:.2e}"),
    );
}

fn diagonal_observable(values: &[f64], weights: &[Vec<f64>]) -> Observable {
    Observable::new(
        values
            .iter()
            .zip(weights)
            .map(|(&v, w)| (v, Effect::new(ComplexMatrix::diagonal(w)).unwrap()))
            .collect(),
    )
    .unwrap()
}

/// Random diagonal POVM with `k` outcomes on dimension `d`.
fn random_diagonal_observable(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Observable {
    let mut weights = vec![vec![0.0; d]; k];
    for j in 0..d {
        let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        for (row, r) in weights.iter_mut().zip(&raw) {
            row[j] = r / s;
        }
    }
    let values: Vec<f64> = (0..k)
        .map(|i| i as f64 * 1.5 - 2.0 + rng.random::<f64>())
        .collect();
    diagonal_observable(&values, &weights)
}

#[test]
fn criterion_5_classical_embedding() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_residual, mut worst_sum, mut worst_dv) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    for d in 2..=4 {
        for _ in 0..200 {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            let rho = QState::new(ComplexMatrix::diagonal(
                &raw.iter().map(|r| r / s).collect::<Vec<_>>(),
            ))
            .unwrap();
            let first = random_diagonal_observable(&mut rng, d, 2 + cases % 3);
            let second = random_diagonal_observable(&mut rng, d, 2 + (cases / 3) % 3);
            worst_residual =
                worst_residual.max(total_probability_residual(&rho, &first, &second).unwrap());
            let joint = sequential_joint(&rho, &first, &second).unwrap();
            let d = law_of_total_variance_decomposition(&joint);
            let direct = outcome_distribution(&rho, &second).unwrap().variance();
            worst_sum = worst_sum.max((d.total() - direct).abs());
            worst_dv = worst_dv.max(delta_v(&rho, &first, &second).unwrap().delta_v.abs());
            cases += 1;
        }
    }
    verdict(
        5,
        "diagonal states and observables obey total probability and total variance",
        worst_residual <= 1e-12 && worst_sum <= 1e-10 && worst_dv <= 1e-10,
        format!(
            "{cases} cases, residual {worst_residual:.2e}, decomposition {worst_sum:.2e}, dV {worst_dv:.2e}"
        ),
    );
}

#[test]
fn criterion_6_gate_equivalence() {
    let ideal = GateParams::ideal();
    let x = observable_x();
    let (mut worst_luders, mut worst_meter_h) = (0.0f64, 0.0f64);
    for &alpha in &grid(10, 0.0, 45.0) {
        for &w in &grid(5, 0.0, 1.0) {
            let cfg = PrepConfig::new(alpha, w, 0.0).unwrap();
            let rho = prepare_signal(&cfg).unwrap();
            let dephased = luders_channel(&rho, &x).unwrap();
            let perturbed = signal_after_gate(&cfg, &ideal, Mode::Perturbed).unwrap();
            let untouched = signal_after_gate(&cfg, &ideal, Mode::Unperturbed).unwrap();
            worst_luders = worst_luders.max((perturbed.matrix() - dephased.matrix()).max_norm());
            worst_meter_h = worst_meter_h.max((untouched.matrix() - rho.matrix()).max_norm());
            for &t in &grid(20, 0.0, PI) {
                let y = observable_y(t);
                let pairs = [
                    (
                        Mode::Perturbed,
                        outcome_distribution(&dephased, &y).unwrap(),
                    ),
                    (Mode::Unperturbed, outcome_distribution(&rho, &y).unwrap()),
                ];
                for (mode, expected) in pairs {
                    let got = run_setting(&cfg, &ideal, t, mode).unwrap();
                    let tv = got.total_variation(&expected).unwrap();
                    match mode {
                        Mode::Perturbed => worst_luders = worst_luders.max(tv),
                        Mode::Unperturbed => worst_meter_h = worst_meter_h.max(tv),
                    }
                }
            }
        }
    }
    let pp = QState::pure(&ket_plus())
        .unwrap()
        .tensor(&QState::pure(&ket_plus()).unwrap());
    let (_, success) = gate_channel(&pp, &ideal).unwrap();
    let success_err = (success - 1.0 / 9.0).abs();
    verdict(
        6,
        "ideal gate reproduces Lueders, succeeds with 1/9, meter |H> is inert",
        worst_luders <= 1e-10 && success_err <= 1e-12 && worst_meter_h <= 1e-10,
        format!(
            "Lueders {worst_luders:.2e}, success error {success_err:.2e}, meter H {worst_meter_h:.2e}"
        ),
    );
}

#[test]
fn criterion_7_monte_carlo_convergence() {
    let start = Instant::now();
    let ideal = GateParams::ideal();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_z = 0.0f64;
    for i in 0..20 {
        let cfg =
            PrepConfig::new(rng.random_range(2.0..43.0), rng.random_range(0.0..1.0), 0.0).unwrap();
        let theta = rng.random_range(0.1..(PI - 0.1));
        let sim = simulate_point(&cfg, &ideal, theta, 1e6, 2024, i).unwrap();
        let truth = oracle_dv(cfg.p(), cfg.gamma(), theta);
        worst_z = worst_z.max((sim.estimate.delta_v - truth).abs() / sim.estimate.std_error);
    }

    // least-squares slope of log σ against log flux
    let cfg = PrepConfig::new(12.0, 0.9, 0.0).unwrap();
    let fluxes = [1e3, 1e4, 1e5, 1e6];
    let pts: Vec<(f64, f64)> = fluxes
        .iter()
        .map(|&f| {
            let se = simulate_point(&cfg, &ideal, 1.0, f, 11, 0)
                .unwrap()
                .estimate
                .std_error;
            (f.ln(), se.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let elapsed = start.elapsed();
    verdict(
        7,
        "Poisson estimates converge at flux 1e6",
        worst_z <= 5.0 && (slope + 0.5).abs() <= 0.05 && elapsed < Duration::from_secs(30),
        format!("max |z| = {worst_z:.2}, slope {slope:.4}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_8_sweep_anchors() {
    let mut spec = SweepSpec::defaults_for(Command::SweepPure);
    spec.a1 = Range::new(0.165, 0.552, 2);
    spec.theta_deg = Range::new(0.0, 180.0, 181);
    let rows = sweep_pure(&spec).unwrap();
    let at = |p: f64, t: f64| {
        rows.iter()
            .find(|r| r.axis1 == p && r.theta == t)
            .unwrap()
            .analytic_dv
    };
    let anchor_hi = at(0.552, 90.0);
    let anchor_lo = at(0.165, 90.0);
    let mut worst = (anchor_hi - 0.989184).abs().max((anchor_lo - 0.5511).abs());
    for r in &rows {
        worst = worst.max((r.analytic_dv - oracle_dv(r.axis1, 1.0, r.theta.to_radians())).abs());
    }
    let low: Vec<f64> = rows
        .iter()
        .filter(|r| r.axis1 == 0.165)
        .map(|r| r.analytic_dv)
        .collect();
    let sign_change = low.iter().any(|&v| v < -1e-3) && low.iter().any(|&v| v > 1e-3);

    let mut mv = SweepSpec::defaults_for(Command::MaxViolation);
    mv.a1 = Range::new(0.0, 1.0, 51);
    let peak = max_violation(&mv).unwrap();
    let mut asym = 0.0f64;
    for (a, b) in peak.iter().zip(peak.iter().rev()) {
        asym = asym.max((a.analytic_dv - b.analytic_dv).abs());
        worst = worst.max((a.analytic_dv - 4.0 * a.axis1 * (1.0 - a.axis1)).abs());
    }
    verdict(
        8,
        "sweep anchors, sign change at p = 0.165, p <-> 1-p symmetry",
        worst <= 1e-9 && sign_change && asym <= 1e-9,
        format!(
            "dV(0.552) = {anchor_hi:.6}, dV(0.165) = {anchor_lo:.6}, oracle error {worst:.2e}, asymmetry {asym:.2e}"
        ),
    );
}

#[test]
fn criterion_9_imperfect_gate() {
    let measured = GateParams::new(0.985, 0.324, 1.0).unwrap();
    let x = observable_x();
    let mut worst_tv = 0.0f64;
    for &alpha in &grid(10, 0.0, 45.0) {
        for &w in &grid(5, 0.0, 1.0) {
            let cfg = PrepConfig::new(alpha, w, 0.0).unwrap();
            let dephased = luders_channel(&prepare_signal(&cfg).unwrap(), &x).unwrap();
            for &t in &grid(20, 0.0, PI) {
                let got = run_setting(&cfg, &measured, t, Mode::Perturbed).unwrap();
                let expected = outcome_distribution(&dephased, &observable_y(t)).unwrap();
                worst_tv = worst_tv.max(got.total_variation(&expected).unwrap());
            }
        }
    }
    let mut min_dv = f64::INFINITY;
    for &p in &grid(19, 0.05, 0.95) {
        for &g in &grid(9, 0.2, 1.0) {
            let cfg = PrepConfig::from_p_gamma(p, g).unwrap();
            min_dv = min_dv.min(model_delta_v(&cfg, &measured, FRAC_PI_2).unwrap());
        }
    }
    verdict(
        9,
        "measured gate stays near Lueders and keeps dV(pi/2) > 0 for gamma >= 0.2",
        worst_tv < 0.05 && min_dv > 0.0,
        format!("max TV {worst_tv:.4}, min dV(pi/2) {min_dv:.4}"),
    );
}
