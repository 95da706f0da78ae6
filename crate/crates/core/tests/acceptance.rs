//! Acceptance suite: every exit criterion of the laboratory, one test per
//! criterion at the stated tolerance, printing one pass/fail line each.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::OnceLock;
use std::time::Instant;

use wavelab::entropy;
use wavelab::grid::{FieldState, Frame, Grid};
use wavelab::kellersegel::{self, KSState};
use wavelab::lab::config::{ExperimentConfig, ExperimentKind};
use wavelab::lab::perturbation::{Perturbation, PerturbationKind};
use wavelab::lab::refinement;
use wavelab::numerics;
use wavelab::params::{self, EndStates, TheoremConstants};
use wavelab::solver::{self, EvolutionRow, EvolveOptions};
use wavelab::wave;

fn criterion(n: u32, passed: bool, detail: &str) {
    println!(
        "[criterion {n:2}] {}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {n} failed: {detail}");
}

fn default_cfg(kind: ExperimentKind, end: EndStates, grid: Grid) -> ExperimentConfig {
    let constants = TheoremConstants::defaults_for(&end);
    ExperimentConfig {
        kind,
        end,
        constants,
        grid,
        dt_safety: 0.9,
        dt_max: None,
        t_end: 1.0,
        output_every: 0.25,
        perturbation: Perturbation::default(),
        t_span: 0.1,
        k_max: 12,
        samples: 1_000_000,
        delta: 0.5,
        notes: vec![],
    }
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_01_wave_construction() {
    let start = Instant::now();
    let end = EndStates::canonical(2.0, 1.95, 0.0).unwrap();
    let tc = TheoremConstants::defaults_for(&end);
    let grid = Grid::new(-480.0, 480.0, 4096, Frame::Moving).unwrap();
    let profile = wave::build_profile(&end, &tc, &grid).unwrap();
    let d = wave::profile_diagnostics(&profile);

    let cfg = default_cfg(ExperimentKind::Wave, end, Grid::new(-480.0, 480.0, 1025, Frame::Moving).unwrap());
    let tables = refinement::refinement_study(&cfg, 3).unwrap();
    let order = tables[0].fitted_order();
    let elapsed = start.elapsed();

    criterion(
        1,
        d.tail_dev_left < 1e-8
            && d.tail_dev_right < 1e-8
            && d.monotonicity_violations == 0
            && d.weight_monotonicity_violations == 0
            && order >= 1.8
            && elapsed.as_secs_f64() < 1.0,
        &format!(
            "endpoint deviations ({:.2e}, {:.2e}) < 1e-8, 0 monotonicity violations, \
             residual order {order:.2} >= 1.8, runtime {elapsed:.2?} < 1 s",
            d.tail_dev_left, d.tail_dev_right
        ),
    );
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_02_jump_condition_algebra() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20_240_817);
    let mut worst_r1 = 0.0_f64;
    let mut worst_r2 = 0.0_f64;
    let mut sign_mismatches = 0usize;
    let mut lax_failures = 0usize;
    let total = 10_000;
    let mut made = 0usize;
    while made < total {
        let n_minus: f64 = rng.gen_range(0.1..10.0);
        let n_plus: f64 = rng.gen_range(0.1..10.0);
        if (n_minus - n_plus).abs() < 1e-3 {
            continue;
        }
        let q_minus = rng.gen_range(-5.0..5.0);
        made += 1;
        let e = EndStates::new(n_minus, n_plus, q_minus, 1.0).unwrap();
        let (r1, r2) = e.rh_residuals();
        worst_r1 = worst_r1.max(r1);
        worst_r2 = worst_r2.max(r2);
        // sign branch of the speed formula matches the density ordering
        if (n_minus > n_plus && e.sigma <= 0.0) || (n_minus < n_plus && e.sigma >= 0.0) {
            sign_mismatches += 1;
        }
        if e.q_plus <= e.q_minus {
            lax_failures += 1;
        }
    }
    let elapsed = start.elapsed();
    criterion(
        2,
        worst_r1 < 1e-12 && worst_r2 < 1e-12 && sign_mismatches == 0 && lax_failures == 0
            && elapsed.as_secs_f64() < 1.0,
        &format!(
            "10^4 random end states: jump residuals < 1e-12 (worst {worst_r1:.2e}, {worst_r2:.2e}), \
             0 sign mismatches, 0 ordering failures, runtime {elapsed:.2?} < 1 s"
        ),
    );
}

// ------------------------------------------------- criteria 3-5 (shared runs)

struct ContractionCase {
    label: String,
    rows: Vec<EvolutionRow>,
    running_min_n: f64,
    c_cal: f64,
    sqrt_kappa: f64,
    dx: f64,
    dt: f64,
}

fn contraction_cases() -> &'static Vec<ContractionCase> {
    static CASES: OnceLock<Vec<ContractionCase>> = OnceLock::new();
    CASES.get_or_init(|| {
        let mut cases = Vec::new();
        let perturbations = [
            (
                "gaussian amp 0.5",
                Perturbation {
                    kind: PerturbationKind::Gaussian,
                    amplitude: 0.5,
                    width: 8.0,
                    center: 0.0,
                    seed: 0,
                    q_amplitude: 0.0,
                },
            ),
            (
                "square amp 1.0 (non-mean-zero)",
                Perturbation {
                    kind: PerturbationKind::Square,
                    amplitude: 1.0,
                    width: 10.0,
                    center: 5.0,
                    seed: 0,
                    q_amplitude: 0.0,
                },
            ),
            (
                "seeded random amp 0.3",
                Perturbation {
                    kind: PerturbationKind::Random,
                    amplitude: 0.3,
                    width: 40.0,
                    center: 0.0,
                    seed: 7,
                    q_amplitude: 0.0,
                },
            ),
        ];
        for (n_plus, domain) in [(1.95, 480.0), (1.99, 2560.0)] {
            let end = EndStates::canonical(2.0, n_plus, 0.0).unwrap();
            let tc = TheoremConstants::defaults_for(&end);
            assert!(params::check_theorem_constants(&end, &tc).all_ok);
            let grid = Grid::new(-domain, domain, 4096, Frame::Moving).unwrap();
            let profile = wave::build_profile(&end, &tc, &grid).unwrap();
            assert_eq!(profile.grid.n_points, 4096, "domain must hold the tails");
            let opts = EvolveOptions {
                t_end: 20.0,
                output_every: 1.0,
                dt_safety: 0.9,
                dt_max: None,
                keep_snapshots: false,
            };
            // calibration on the stationary wave
            let stationary = FieldState::new(
                0.0,
                profile.grid.clone(),
                profile.n_tilde.clone(),
                profile.q_tilde.clone(),
            )
            .unwrap();
            let cal = solver::evolve(&stationary, &profile, &opts).unwrap();
            let sqrt_kappa = tc.kappa.sqrt();
            let dx = profile.grid.dx();
            let dt_cal = cal.mean_dt();
            let re0_cal = cal.rows[0].report.re_weighted_shifted;
            let mut c_cal = 0.0_f64;
            for r in cal.rows.iter().skip(1) {
                let drift =
                    r.report.re_weighted_shifted + sqrt_kappa * r.cum_dissipation - re0_cal;
                c_cal = c_cal.max(drift / ((dx * dx + dt_cal) * r.report.t));
            }
            for (name, pert) in &perturbations {
                let initial = pert.apply(&profile);
                let ev = solver::evolve(&initial, &profile, &opts).unwrap();
                let dt = ev.mean_dt();
                cases.push(ContractionCase {
                    label: format!("eps={:.2} {name}", end.epsilon),
                    rows: ev.rows,
                    running_min_n: ev.running_min_n,
                    c_cal,
                    sqrt_kappa,
                    dx,
                    dt,
                });
            }
        }
        cases
    })
}

#[test]
fn criterion_03_weighted_entropy_contraction() {
    let start = Instant::now();
    let mut all_ok = true;
    let mut details = Vec::new();
    for case in contraction_cases() {
        let c_used = (10.0 * case.c_cal).max(1.0);
        let re0 = case.rows[0].report.re_weighted_shifted;
        let mut worst_margin = f64::INFINITY;
        let mut ok = true;
        for r in case.rows.iter().skip(1) {
            let tol = c_used * (case.dx * case.dx + case.dt) * r.report.t;
            let lhs = r.report.re_weighted_shifted + case.sqrt_kappa * r.cum_dissipation;
            worst_margin = worst_margin.min(re0 + tol - lhs);
            if lhs > re0 + tol {
                ok = false;
            }
        }
        if !ok {
            all_ok = false;
        }
        details.push(format!("{} margin {worst_margin:+.3e}", case.label));
    }
    let elapsed = start.elapsed();
    criterion(
        3,
        all_ok && elapsed.as_secs_f64() < 360.0,
        &format!(
            "re_ws(t) + sqrt(kappa)*cumdiss <= re_ws(0) + c*(dx^2+dt)*t on all 6 runs to t_end = 20 \
             [{}] ({elapsed:.2?})",
            details.join("; ")
        ),
    );
}

#[test]
fn criterion_04_no_vacuum_no_blowup() {
    let mut all_ok = true;
    let mut min_of_min = f64::INFINITY;
    let mut worst_h1 = 0.0_f64;
    for case in contraction_cases() {
        min_of_min = min_of_min.min(case.running_min_n);
        if case.running_min_n <= 1e-6 {
            all_ok = false;
        }
        for r in &case.rows {
            if !r.h1_norm.is_finite() {
                all_ok = false;
            }
            worst_h1 = worst_h1.max(r.h1_norm);
        }
    }
    criterion(
        4,
        all_ok,
        &format!(
            "min n = {min_of_min:.4} stays far above the 1e-12 vacuum floor and \
             H1 distance stays finite (max {worst_h1:.3}) on every contraction run"
        ),
    );
}

#[test]
fn criterion_05_shift_linear_envelope() {
    let mut all_ok = true;
    let mut details = Vec::new();
    for case in contraction_cases() {
        let c_fit = case
            .rows
            .iter()
            .map(|r| r.report.shift_x.abs() / (r.report.t + 1.0))
            .fold(0.0_f64, f64::max);
        let violations = case
            .rows
            .iter()
            .filter(|r| r.report.shift_x.abs() > c_fit * (r.report.t + 1.0) * (1.0 + 1e-12))
            .count();
        if violations != 0 {
            all_ok = false;
        }
        details.push(format!("{} C={c_fit:.2}", case.label));
    }
    criterion(
        5,
        all_ok,
        &format!(
            "|X(t)| <= C(t+1) with per-run fitted C, zero violations [{}]",
            details.join("; ")
        ),
    );
}

// ------------------------------------------------- criteria 6-7 (shared study)

fn identity_tables() -> &'static Vec<refinement::ConvergenceTable> {
    static TABLES: OnceLock<Vec<refinement::ConvergenceTable>> = OnceLock::new();
    TABLES.get_or_init(|| {
        let end = EndStates::canonical(2.0, 1.95, 0.0).unwrap();
        let mut cfg = default_cfg(
            ExperimentKind::Evolve,
            end,
            Grid::new(-480.0, 480.0, 1537, Frame::Moving).unwrap(),
        );
        cfg.perturbation = Perturbation {
            kind: PerturbationKind::Gaussian,
            amplitude: 0.5,
            width: 8.0,
            center: 0.0,
            seed: 0,
            q_amplitude: 0.0,
        };
        cfg.t_end = 1.0;
        cfg.output_every = 0.25;
        refinement::refinement_study(&cfg, 3).unwrap()
    })
}

#[test]
fn criterion_06_relative_entropy_identity_order() {
    let t = identity_tables()
        .iter()
        .find(|t| t.name == "relative_entropy_identity")
        .unwrap();
    let fitted = t.fitted_order();
    let last = t.final_order();
    criterion(
        6,
        fitted >= 1.8 && last >= 1.8,
        &format!(
            "integrated identity residual orders {:?} (fitted {fitted:.2}) >= 1.8 over 3 levels",
            t.orders
        ),
    );
}

#[test]
fn criterion_07_w_equation() {
    // order from the shared study
    let t = identity_tables()
        .iter()
        .find(|t| t.name == "w_equation")
        .unwrap();
    let fitted = t.fitted_order();

    // nodewise inequality at a single resolution
    let end = EndStates::canonical(2.0, 1.95, 0.0).unwrap();
    let tc = TheoremConstants::defaults_for(&end);
    let grid = Grid::new(-480.0, 480.0, 3073, Frame::Moving).unwrap();
    let profile = wave::build_profile(&end, &tc, &grid).unwrap();
    let pert = Perturbation {
        kind: PerturbationKind::Gaussian,
        amplitude: 0.5,
        width: 8.0,
        center: 0.0,
        seed: 0,
        q_amplitude: 0.0,
    };
    let initial = pert.apply(&profile);
    let opts = EvolveOptions {
        t_end: 1.0,
        output_every: 0.25,
        dt_safety: 0.9,
        dt_max: Some(0.01),
        keep_snapshots: true,
    };
    let ev = solver::evolve(&initial, &profile, &opts).unwrap();
    let rep = solver::w_residual(&ev.snapshots, end.sigma).unwrap();
    let dx = grid.dx();
    let tol = 10.0 * (dx * dx + 0.01) * rep.rhs_scale.max(1.0);

    criterion(
        7,
        fitted >= 1.8 && rep.max_inequality_violation <= tol,
        &format!(
            "w-equation residual orders {:?} (fitted {fitted:.2}) >= 1.8; sign inequality violation \
             {:.2e} within discretization tolerance {tol:.2e}",
            t.orders, rep.max_inequality_violation
        ),
    );
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_08_comparison_inequality_sweep() {
    let start = Instant::now();
    let rep = entropy::lemma28_check(2.0, 0.5, 1_000_000, 2024).unwrap();
    let elapsed = start.elapsed();
    let bands_ok = rep.near_quadratic.finite_and_positive()
        && rep.far_log.finite_and_positive()
        && rep.far_linear_lower.finite_and_positive()
        && rep.far_quadratic_upper.finite_and_positive();
    let counterexample_ok = rep.reverse_ratio_large < rep.reverse_ratio_moderate / 10.0;
    criterion(
        8,
        rep.monotonicity_violations == 0
            && bands_ok
            && counterexample_ok
            && elapsed.as_secs_f64() < 10.0,
        &format!(
            "10^6-sample sweep: 0/{} monotonicity violations, ratio bands finite \
             (near quadratic [{:.2e}, {:.2e}]), reversed-bound counterexample at n1 = {:.0e} \
             (ratio {:.2e} vs {:.2e}), runtime {elapsed:.2?} < 10 s",
            rep.monotonicity_checks,
            rep.near_quadratic.min,
            rep.near_quadratic.max,
            rep.reverse_counterexample_n1,
            rep.reverse_ratio_large,
            rep.reverse_ratio_moderate
        ),
    );
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_09_degiorgi_bounds() {
    use wavelab::degiorgi;
    let start = Instant::now();
    let end = EndStates::canonical(2.0, 1.95, 0.0).unwrap();
    let tc = TheoremConstants::defaults_for(&end);
    let grid = Grid::new(-480.0, 480.0, 2049, Frame::Moving).unwrap();
    let profile = wave::build_profile(&end, &tc, &grid).unwrap();
    let pert = Perturbation {
        kind: PerturbationKind::Gaussian,
        amplitude: 0.5,
        width: 8.0,
        center: 0.0,
        seed: 0,
        q_amplitude: 0.0,
    };
    let initial = pert.apply(&profile);
    let opts = EvolveOptions {
        t_end: 5.0,
        output_every: 0.5,
        dt_safety: 0.9,
        dt_max: None,
        keep_snapshots: true,
    };
    let ev = solver::evolve(&initial, &profile, &opts).unwrap();
    let times: Vec<f64> = ev.snapshots.iter().map(|s| s.state.t).collect();
    let dx = grid.dx();

    let mut certified = Vec::new();
    for name in ["n", "inv_n"] {
        let fields: Vec<Vec<f64>> = ev
            .snapshots
            .iter()
            .map(|s| {
                if name == "n" {
                    s.state.n.clone()
                } else {
                    s.state.n.iter().map(|v| 1.0 / v).collect()
                }
            })
            .collect();
        let series = degiorgi::FieldSeries {
            times: &times,
            fields: &fields,
            dx,
        };
        let m0_max = numerics::linf_norm(&fields[0]);
        let r_bound = m0_max + 2.0 * ev.running_max_abs_q + 2.0 * numerics::linf_norm(&profile.q_tilde) + 2.0;
        let caps = degiorgi::cap_grid(r_bound, 0.9 * m0_max);
        let scan = degiorgi::degiorgi_report(&series, &caps, 40).unwrap();
        let m = scan.smallest_passing_m.expect("a cap certifies");
        assert!(scan.field_max <= m, "{name}: certified cap below field max");
        certified.push(format!(
            "{name}: max {:.4} <= M = {m:.4}",
            scan.field_max
        ));
    }

    let conv = degiorgi::sequence_lemma_iterate(2.0, 2.0, 0.125, 256).unwrap();
    let div = degiorgi::sequence_lemma_iterate(2.0, 2.0, 1.0, 256).unwrap();
    let threshold = degiorgi::sequence_lemma_threshold(2.0, 2.0, 0.125, 1.0, 60).unwrap();
    let elapsed = start.elapsed();
    criterion(
        9,
        conv.verdict == degiorgi::SequenceVerdict::ConvergesToZero
            && div.verdict == degiorgi::SequenceVerdict::Diverges
            && (threshold - 0.5).abs() < 1e-9
            && elapsed.as_secs_f64() < 10.0,
        &format!(
            "truncation energies certify sup bounds [{}]; sequence recursion (C, beta) = (2, 2): \
             W0 = 1/8 converges, W0 = 1 diverges, bisected threshold C0 = {threshold:.9}, \
             runtime {elapsed:.2?} < 10 s",
            certified.join("; ")
        ),
    );
}

// --------------------------------------------------------------- criterion 10

#[test]
fn criterion_10_picard_construction() {
    let start = Instant::now();
    let end = EndStates::canonical(2.0, 1.0, 0.0).unwrap();
    let mut cfg = default_cfg(
        ExperimentKind::Picard,
        end,
        Grid::new(-60.0, 60.0, 1537, Frame::Fixed).unwrap(),
    );
    cfg.constants = TheoremConstants {
        kappa: 0.1,
        lambda: 0.2,
    };
    cfg.perturbation = Perturbation {
        kind: PerturbationKind::Gaussian,
        amplitude: -0.6,
        width: 6.0,
        center: 10.0,
        seed: 0,
        q_amplitude: -1.5,
    };
    cfg.t_span = 0.1;
    cfg.k_max = 12;
    let tmp = tempdir("picard-acceptance");
    let outcome = wavelab::lab::run_experiment(&cfg, &tmp, None).unwrap();
    let elapsed = start.elapsed();
    let detail = outcome
        .checks
        .iter()
        .map(|c| format!("{}{}", if c.passed { "" } else { "FAILED: " }, c.line))
        .collect::<Vec<_>>()
        .join("; ");
    let _ = std::fs::remove_dir_all(&tmp);
    criterion(
        10,
        outcome.passed && elapsed.as_secs_f64() < 60.0,
        &format!("{detail} ({elapsed:.2?} < 1 min)"),
    );
}

// --------------------------------------------------------------- criterion 11

#[test]
fn criterion_11_cole_hopf_equivalence() {
    // homogeneous case at round-off
    let g = Grid::new(-10.0, 10.0, 65, Frame::Fixed).unwrap();
    let ks0 = KSState::new(0.0, g.clone(), vec![1.25; g.n_points], vec![0.8; g.n_points]).unwrap();
    let series = kellersegel::ks_evolve(&ks0, 1.0, 0.5, 0.25, None).unwrap();
    let mut homo = 0.0_f64;
    for s in &series {
        let q = kellersegel::cole_hopf_forward(&s.c, g.dx()).unwrap();
        homo = homo.max(numerics::linf_norm(&q));
        homo = homo.max(
            s.n.iter()
                .map(|v| (v - 1.25).abs())
                .fold(0.0_f64, f64::max),
        );
    }

    // joint-refinement order of the cross-model residual
    let end = EndStates::canonical(2.0, 1.0, 0.0).unwrap();
    let mut cfg = default_cfg(
        ExperimentKind::KsCompare,
        end,
        Grid::new(-60.0, 60.0, 769, Frame::Fixed).unwrap(),
    );
    cfg.constants = TheoremConstants {
        kappa: 0.1,
        lambda: 0.2,
    };
    cfg.perturbation = Perturbation {
        kind: PerturbationKind::Gaussian,
        amplitude: 0.3,
        width: 5.0,
        center: 0.0,
        seed: 0,
        q_amplitude: 0.0,
    };
    cfg.t_end = 0.5;
    cfg.output_every = 0.125;
    let table = refinement::ks_refinement(&cfg, 3).unwrap();
    let fitted = table.fitted_order();
    criterion(
        11,
        homo < 1e-10 && fitted >= 1.8 && table.final_order() >= 1.8,
        &format!(
            "homogeneous case residual {homo:.2e} at round-off; cross-model orders {:?} \
             (fitted {fitted:.2}) >= 1.8 under joint refinement",
            table.orders
        ),
    );
}

// --------------------------------------------------------------- criterion 12

#[test]
fn criterion_12_reflection_and_scaling() {
    // reflection: evolve the mirrored problem and compare pointwise
    let end = EndStates::canonical(2.0, 1.5, 0.25).unwrap();
    let tc = TheoremConstants {
        kappa: 0.12,
        lambda: 0.25,
    };
    let grid = Grid::new(-50.0, 50.0, 1001, Frame::Moving).unwrap();
    let profile = wave::build_profile(&end, &tc, &grid).unwrap();
    let pert = Perturbation {
        kind: PerturbationKind::Gaussian,
        amplitude: 0.3,
        width: 4.0,
        center: 6.0,
        seed: 0,
        q_amplitude: 0.0,
    };
    let opts = EvolveOptions {
        t_end: 1.0,
        output_every: 1.0,
        dt_safety: 0.9,
        dt_max: None,
        keep_snapshots: false,
    };
    let ev = solver::evolve(&pert.apply(&profile), &profile, &opts).unwrap();

    let end_r = params::reflect_problem(&end).unwrap();
    let profile_r = wave::build_profile(&end_r, &tc, &grid).unwrap();
    let ev_r = solver::evolve(&pert.mirrored().apply(&profile_r), &profile_r, &opts).unwrap();
    let n_pts = grid.n_points;
    let mut reflect_dev = 0.0_f64;
    for i in 0..n_pts {
        let j = n_pts - 1 - i;
        reflect_dev = reflect_dev.max((ev_r.final_state.n[i] - ev.final_state.n[j]).abs());
        reflect_dev = reflect_dev.max((ev_r.final_state.q[i] + ev.final_state.q[j]).abs());
    }
    let reflect_tol = 10.0 * (grid.dx() * grid.dx() + ev.mean_dt());

    // scaling: run the nu = 2 system at a staggered resolution, map it back,
    // compare against the canonical run by interpolation
    let nu = 2.0;
    let t_end = 1.0;
    let end_1 = EndStates::canonical(2.0, 1.95, 0.0).unwrap();
    let tc_1 = TheoremConstants::defaults_for(&end_1);
    let g_1 = Grid::new(-480.0, 480.0, 2049, Frame::Moving).unwrap();
    let p_1 = wave::build_profile(&end_1, &tc_1, &g_1).unwrap();
    let pert_1 = Perturbation {
        kind: PerturbationKind::Gaussian,
        amplitude: 0.3,
        width: 10.0,
        center: 0.0,
        seed: 0,
        q_amplitude: 0.0,
    };
    let opts_1 = EvolveOptions {
        t_end,
        output_every: t_end,
        dt_safety: 0.9,
        dt_max: None,
        keep_snapshots: false,
    };
    let ev_1 = solver::evolve(&pert_1.apply(&p_1), &p_1, &opts_1).unwrap();

    let end_nu = EndStates::new(2.0, 1.95, 0.0, nu).unwrap();
    let g_nu = Grid::new(-960.0, 960.0, 3073, Frame::Moving).unwrap();
    let p_nu = wave::build_profile(&end_nu, &tc_1, &g_nu).unwrap();
    let opts_nu = EvolveOptions {
        t_end: nu * t_end,
        output_every: nu * t_end,
        dt_safety: 0.9,
        dt_max: None,
        keep_snapshots: false,
    };
    let ev_nu = solver::evolve(&pert_1.scaled(nu).apply(&p_nu), &p_nu, &opts_nu).unwrap();
    let mapped = params::scale_solution(nu, &ev_nu.final_state).unwrap();
    assert!((mapped.t - ev_1.final_state.t).abs() < 1e-12);
    let dx_1 = g_1.dx();
    let mut dn = vec![0.0; g_1.n_points];
    let mut dq = vec![0.0; g_1.n_points];
    for i in 0..g_1.n_points {
        let xi = g_1.xi(i);
        dn[i] = numerics::interp_clamped(&mapped.n, mapped.grid.xi_min, mapped.grid.dx(), xi)
            - ev_1.final_state.n[i];
        dq[i] = numerics::interp_clamped(&mapped.q, mapped.grid.xi_min, mapped.grid.dx(), xi)
            - ev_1.final_state.q[i];
    }
    let scale_gap = numerics::l2_norm(&dn, dx_1) + numerics::l2_norm(&dq, dx_1);
    let scale_tol = 10.0 * (dx_1 * dx_1 + ev_1.mean_dt().max(ev_nu.mean_dt() / nu));

    criterion(
        12,
        reflect_dev < reflect_tol && scale_gap < scale_tol,
        &format!(
            "reflected run mirrors the canonical run within {reflect_dev:.2e} < {reflect_tol:.2e}; \
             nu = 2 run maps onto the canonical run within {scale_gap:.2e} < {scale_tol:.2e}"
        ),
    );
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "wavelab-{tag}-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
