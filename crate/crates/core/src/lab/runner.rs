//! Experiment dispatch: each kind builds its inputs, runs the owning
//! modules, writes CSV artifacts into a fresh run directory, and reports one
//! pass/fail line per invariant checked. Run directories are never reused;
//! reruns allocate the next free index.

use crate::degiorgi;
use crate::entropy;
use crate::error::{Error, Result};
use crate::grid::{FieldState, Frame, Grid, VACUUM_FLOOR};
use crate::kellersegel::{self, KSState};
use crate::lab::config::{ExperimentConfig, ExperimentKind};
use crate::lab::csv::{fmt, CsvWriter};
use crate::lab::perturbation::{Perturbation, PerturbationKind};
use crate::numerics;
use crate::solver::{self, EvolveOptions};
use crate::wave::{self, WaveProfile, TAIL_TOL};
use std::path::{Path, PathBuf};

/// One checked invariant: pass flag and a human-readable line.
#[derive(Clone, Debug)]
pub struct Check {
    pub passed: bool,
    pub line: String,
}

fn check(passed: bool, line: impl Into<String>) -> Check {
    Check {
        passed,
        line: line.into(),
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub dir: PathBuf,
    pub checks: Vec<Check>,
}

/// Allocate `<out_root>/<kind>-NNNN`, smallest free index.
fn allocate_run_dir(out_root: &Path, kind: ExperimentKind) -> Result<PathBuf> {
    std::fs::create_dir_all(out_root)?;
    for idx in 1..10_000 {
        let candidate = out_root.join(format!("{}-{idx:04}", kind.name()));
        if !candidate.exists() {
            std::fs::create_dir(&candidate)?;
            return Ok(candidate);
        }
    }
    Err(Error::Validation("run directory space exhausted".into()))
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_root: &Path,
    seed_override: Option<u64>,
) -> Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if let Some(seed) = seed_override {
        cfg.perturbation.seed = seed;
        cfg.notes.push(format!("seed overridden on the command line: {seed}"));
    }
    let dir = allocate_run_dir(out_root, cfg.kind)?;
    std::fs::write(dir.join("config_echo.txt"), cfg.echo())?;

    let checks = match cfg.kind {
        ExperimentKind::Wave => run_wave(&cfg, &dir)?,
        ExperimentKind::Evolve => run_evolve(&cfg, &dir)?,
        ExperimentKind::Contraction => run_contraction(&cfg, &dir)?,
        ExperimentKind::Picard => run_picard(&cfg, &dir)?,
        ExperimentKind::DeGiorgi => run_degiorgi(&cfg, &dir)?,
        ExperimentKind::KsCompare => run_ks_compare(&cfg, &dir)?,
        ExperimentKind::CheckLemmas => run_check_lemmas(&cfg, &dir)?,
    };

    let passed = checks.iter().all(|c| c.passed);
    let mut summary = String::new();
    for c in &checks {
        summary.push_str(if c.passed { "[PASS] " } else { "[FAIL] " });
        summary.push_str(&c.line);
        summary.push('\n');
    }
    summary.push_str(if passed { "RESULT: PASS\n" } else { "RESULT: FAIL\n" });
    std::fs::write(dir.join("summary.txt"), &summary)?;
    Ok(RunOutcome { passed, dir, checks })
}

fn write_profile_csv(profile: &WaveProfile, path: &Path) -> Result<()> {
    let mut w = CsvWriter::create(path, &["xi", "n_tilde", "q_tilde", "n_tilde_prime", "a"])?;
    for i in 0..profile.grid.n_points {
        w.row(&[
            profile.grid.xi(i),
            profile.n_tilde[i],
            profile.q_tilde[i],
            profile.n_tilde_prime[i],
            profile.a[i],
        ])?;
    }
    w.finish()
}

const EVOLUTION_HEADER: [&str; 12] = [
    "t",
    "re_plain",
    "re_weighted_shifted",
    "shift_X",
    "dissipation",
    "m1_l1",
    "m2_l2",
    "sqrt_n_diss",
    "min_n",
    "max_abs_q",
    "h1_norm",
    "cum_dissipation",
];

fn write_evolution_csv(rows: &[solver::EvolutionRow], path: &Path) -> Result<()> {
    let mut w = CsvWriter::create(path, &EVOLUTION_HEADER)?;
    for r in rows {
        w.row(&[
            r.report.t,
            r.report.re_plain,
            r.report.re_weighted_shifted,
            r.report.shift_x,
            r.report.dissipation,
            r.report.m1_l1,
            r.report.m2_l2,
            r.report.sqrt_n_diss,
            r.min_n,
            r.max_abs_q,
            r.h1_norm,
            r.cum_dissipation,
        ])?;
    }
    w.finish()
}

fn write_snapshots(snapshots: &[solver::Snapshot], dir: &Path) -> Result<()> {
    let snap_dir = dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;
    for (k, snap) in snapshots.iter().enumerate() {
        let mut w = CsvWriter::create(&snap_dir.join(format!("snap_{k:04}.csv")), &["xi", "n", "q"])?;
        let g = &snap.state.grid;
        for i in 0..g.n_points {
            w.row(&[g.xi(i), snap.state.n[i], snap.state.q[i]])?;
        }
        w.finish()?;
    }
    Ok(())
}

pub fn build_profile_for(cfg: &ExperimentConfig) -> Result<WaveProfile> {
    wave::build_profile(&cfg.end, &cfg.constants, &cfg.grid)
}

fn run_wave(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let profile = build_profile_for(cfg)?;
    write_profile_csv(&profile, &dir.join("profile.csv"))?;
    let d = wave::profile_diagnostics(&profile);
    let residual = wave::profile_pde_residual(&profile);
    Ok(vec![
        check(
            d.tail_dev_left <= TAIL_TOL && d.tail_dev_right <= TAIL_TOL,
            format!(
                "profile endpoint deviations ({:.3e}, {:.3e}) within {TAIL_TOL:.0e}",
                d.tail_dev_left, d.tail_dev_right
            ),
        ),
        check(
            d.monotonicity_violations == 0,
            format!(
                "strict density monotonicity ({} violations)",
                d.monotonicity_violations
            ),
        ),
        check(
            d.weight_monotonicity_violations == 0,
            format!(
                "strict weight monotonicity ({} violations)",
                d.weight_monotonicity_violations
            ),
        ),
        check(d.min_n_tilde > 0.0, format!("min n_tilde = {} > 0", d.min_n_tilde)),
        check(
            d.max_weight_dev_from_one <= profile.lambda + 1e-12,
            format!(
                "|a - 1| <= lambda ({:.6} <= {:.6})",
                d.max_weight_dev_from_one, profile.lambda
            ),
        ),
        check(
            residual.is_finite(),
            format!("stationary system residual {residual:.3e} (second order under refinement)"),
        ),
    ])
}

fn run_evolve(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let profile = build_profile_for(cfg)?;
    write_profile_csv(&profile, &dir.join("profile.csv"))?;
    let initial = cfg.perturbation.apply(&profile);
    let opts = EvolveOptions {
        t_end: cfg.t_end,
        output_every: cfg.output_every,
        dt_safety: cfg.dt_safety,
        dt_max: cfg.dt_max,
        keep_snapshots: true,
    };
    let ev = solver::evolve(&initial, &profile, &opts)?;
    write_evolution_csv(&ev.rows, &dir.join("evolution.csv"))?;
    write_snapshots(&ev.snapshots, dir)?;
    let states: Vec<FieldState> = ev.snapshots.iter().map(|s| s.state.clone()).collect();
    let h1_rows = solver::h1_diagnostics(&states, &profile);
    let mut hw = CsvWriter::create(
        &dir.join("h1.csv"),
        &["t", "dn_l2", "dq_l2", "cum_ddn_l2sq", "h1_norm"],
    )?;
    for r in &h1_rows {
        hw.row(&[r.t, r.dn_l2, r.dq_l2, r.cumulative_ddn_l2sq, r.h1_norm])?;
    }
    hw.finish()?;
    let all_finite = ev
        .rows
        .iter()
        .all(|r| r.h1_norm.is_finite() && r.report.re_plain.is_finite());
    Ok(vec![
        check(
            ev.running_min_n > 1e3 * VACUUM_FLOOR,
            format!("no vacuum: running min n = {:.6e}", ev.running_min_n),
        ),
        check(all_finite, "all diagnostics finite to t_end (no blow-up)"),
        check(
            ev.rows.iter().all(|r| r.report.re_weighted_shifted >= 0.0),
            "weighted shifted relative entropy nonnegative",
        ),
    ])
}

/// The contraction experiment: calibrate the numerical-drift constant on the
/// unperturbed (stationary) run, then demand
///   re_ws(t) + sqrt(kappa)·cumulative dissipation <= re_ws(0) + c·(dx²+dt)·t
/// at every output of the perturbed run.
fn run_contraction(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let profile = build_profile_for(cfg)?;
    write_profile_csv(&profile, &dir.join("profile.csv"))?;
    let opts = EvolveOptions {
        t_end: cfg.t_end,
        output_every: cfg.output_every,
        dt_safety: cfg.dt_safety,
        dt_max: cfg.dt_max,
        keep_snapshots: false,
    };

    // calibration run: exact wave data
    let stationary = Perturbation {
        kind: PerturbationKind::None,
        ..cfg.perturbation
    }
    .apply(&profile);
    let cal = solver::evolve(&stationary, &profile, &opts)?;
    write_evolution_csv(&cal.rows, &dir.join("calibration.csv"))?;
    let sqrt_kappa = cfg.constants.kappa.sqrt();
    let dx = profile.grid.dx();
    let dt = cal.mean_dt();
    let lhs0_cal = cal.rows[0].report.re_weighted_shifted;
    let mut c_cal = 0.0_f64;
    for r in cal.rows.iter().skip(1) {
        let drift =
            r.report.re_weighted_shifted + sqrt_kappa * r.cum_dissipation - lhs0_cal;
        let t = r.report.t - cal.rows[0].report.t;
        c_cal = c_cal.max(drift / ((dx * dx + dt) * t));
    }
    let c_used = (10.0 * c_cal).max(1.0);

    // perturbed run
    let initial = cfg.perturbation.apply(&profile);
    let ev = solver::evolve(&initial, &profile, &opts)?;
    write_evolution_csv(&ev.rows, &dir.join("evolution.csv"))?;
    let re0 = ev.rows[0].report.re_weighted_shifted;
    let t0 = ev.rows[0].report.t;
    let dt_run = ev.mean_dt();

    let mut contraction_ok = true;
    let mut monotone_ok = true;
    let mut worst_margin = f64::INFINITY;
    for r in ev.rows.iter().skip(1) {
        let t = r.report.t - t0;
        let tol = c_used * (dx * dx + dt_run) * t;
        let lhs = r.report.re_weighted_shifted + sqrt_kappa * r.cum_dissipation;
        worst_margin = worst_margin.min(re0 + tol - lhs);
        if lhs > re0 + tol {
            contraction_ok = false;
        }
        if r.report.re_weighted_shifted > re0 + tol {
            monotone_ok = false;
        }
    }

    // shift envelope |X(t)| <= C (t + 1), C fitted once on this run
    let c_shift = ev
        .rows
        .iter()
        .map(|r| r.report.shift_x.abs() / (r.report.t - t0 + 1.0))
        .fold(0.0_f64, f64::max);
    let shift_violations = ev
        .rows
        .iter()
        .filter(|r| r.report.shift_x.abs() > c_shift * (r.report.t - t0 + 1.0) * (1.0 + 1e-12))
        .count();

    let h1_finite = ev.rows.iter().all(|r| r.h1_norm.is_finite());
    Ok(vec![
        check(
            contraction_ok,
            format!(
                "contraction with dissipation: re_ws(t) + sqrt(kappa)*cumdiss <= re_ws(0) + tol \
                 (worst margin {worst_margin:.3e}, c = {c_used:.3})"
            ),
        ),
        check(
            monotone_ok,
            "monotone contraction: re_ws(t) <= re_ws(0) + tol at every output",
        ),
        check(
            ev.running_min_n > 1e3 * VACUUM_FLOOR,
            format!("no vacuum: running min n = {:.6e}", ev.running_min_n),
        ),
        check(h1_finite, "H1 distance finite at every output (no blow-up)"),
        check(
            shift_violations == 0,
            format!(
                "shift envelope |X(t)| <= C(t+1) with C = {c_shift:.4} ({shift_violations} violations)"
            ),
        ),
    ])
}

fn run_picard(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let profile = build_profile_for(cfg)?;
    let initial = cfg.perturbation.apply(&profile);
    initial.check_no_vacuum()?;
    let r0 = initial.min_n();
    let nu = profile.end.nu;
    let dx = initial.grid.dx();
    let dt_target = cfg.dt_safety * solver::stable_dt(&initial, 0.0, nu);

    // main window
    let run = solver::picard_run(&initial, cfg.t_span, cfg.k_max, dt_target, nu)?;
    let mut w = CsvWriter::create(
        &dir.join("picard_trace.csv"),
        &["k", "diff_n", "diff_q", "diff_dn", "min_n"],
    )?;
    for r in &run.trace.rows {
        w.raw_row(&[
            r.k.to_string(),
            fmt(r.diff_n),
            fmt(r.diff_q),
            fmt(r.diff_dn),
            fmt(r.min_n),
        ])?;
    }
    w.finish()?;

    // Factorial envelope d_k <= d_0 (C t)^k / k!: fit the smallest valid C
    // from the observed ratios, then demand (a) the fit is reproduced on the
    // half window (a plain geometric contraction would double it) and
    // (b) each difference shrinks by ~2^k when the window halves, the
    // t-power signature of the iterated time integrals.
    let half_run = solver::picard_run(&initial, 0.5 * cfg.t_span, cfg.k_max, dt_target, nu)?;
    let diffs = |tr: &solver::PicardTrace| -> Vec<f64> {
        tr.rows.iter().map(|r| r.diff_n + r.diff_q).collect()
    };
    let fit_c = |d: &[f64], t_span: f64| -> f64 {
        let mut c: f64 = 0.0;
        for k in 0..d.len().saturating_sub(1) {
            if d[k + 1] < 1e-10 * d[0] || d[k] < 1e-10 * d[0] {
                break;
            }
            c = c.max(d[k + 1] / d[k] * (k + 2) as f64 / t_span);
        }
        c
    };
    let d_full = diffs(&run.trace);
    let d_half = diffs(&half_run.trace);
    let c_full = fit_c(&d_full, cfg.t_span);
    let c_half = fit_c(&d_half, 0.5 * cfg.t_span);
    let mut envelope_ok = c_full > 0.0 && c_half > 0.0 && c_half <= 1.5 * c_full;
    let mut checked = 0usize;
    for k in 0..d_full.len().min(d_half.len()) {
        if d_full[k] < 1e-9 * d_full[0] || d_half[k] < 1e-9 * d_full[0] {
            break;
        }
        let power = (d_full[k] / d_half[k]).log2();
        if power < 0.8 * (k + 1) as f64 {
            envelope_ok = false;
        }
        checked += 1;
    }

    // cross-solver agreement at t_span (fixed frame, matched step)
    let opts = EvolveOptions {
        t_end: cfg.t_span,
        output_every: cfg.t_span,
        dt_safety: cfg.dt_safety,
        dt_max: Some(run.trace.dt),
        keep_snapshots: false,
    };
    let ev = solver::evolve(&initial, &profile, &opts)?;
    let pn = run.final_iterate.n.last().unwrap();
    let pq = run.final_iterate.q.last().unwrap();
    let dn: Vec<f64> = (0..pn.len())
        .map(|i| pn[i] - ev.final_state.n[i])
        .collect();
    let dq: Vec<f64> = (0..pq.len())
        .map(|i| pq[i] - ev.final_state.q[i])
        .collect();
    let gap = numerics::l2_norm(&dn, dx) + numerics::l2_norm(&dq, dx);
    let gap_tol = 10.0 * (dx * dx + run.trace.dt);

    // lower-bound windows: shrink t_span by 2 over a bit more than a decade
    let mut windows = Vec::new();
    for j in 0..5 {
        let t_span = cfg.t_span / 2f64.powi(j);
        let r = solver::picard_run(&initial, t_span, cfg.k_max, dt_target.min(t_span / 8.0), nu)?;
        let min_n = r
            .trace
            .rows
            .iter()
            .map(|row| row.min_n)
            .fold(f64::INFINITY, f64::min);
        windows.push((t_span, min_n));
    }
    let mut wlb = CsvWriter::create(&dir.join("lower_bound.csv"), &["t_span", "min_n", "deficit"])?;
    let lb = solver::lower_bound_check(&windows, r0);
    for (t, m, d) in &lb.samples {
        wlb.row(&[*t, *m, *d])?;
    }
    wlb.finish()?;

    let deficits_positive = lb.samples.iter().all(|s| s.2 > 1e-12);
    let slope_ok = match lb.deficit_slope {
        Some(s) if deficits_positive => s >= 0.75,
        _ => !deficits_positive, // no deficit: the bound holds trivially
    };

    Ok(vec![
        check(!run.trace.diverged, "successive differences never grew 3 times in a row"),
        check(
            envelope_ok && checked >= 3,
            format!(
                "factorial envelope: fitted C stable across windows ({c_full:.3} vs {c_half:.3}) \
                 and t-power signature over {checked} rows"
            ),
        ),
        check(
            gap < gap_tol,
            format!("agreement with the IMEX evolution: L2 gap {gap:.3e} < {gap_tol:.3e}"),
        ),
        check(
            lb.all_above_half_r0,
            format!("min over k,t,x of n stays above r0/2 = {:.4}", 0.5 * r0),
        ),
        check(
            slope_ok,
            format!(
                "deficit vs window slope {:?} consistent with the T^(3/4) envelope",
                lb.deficit_slope
            ),
        ),
    ])
}

fn run_degiorgi(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let profile = build_profile_for(cfg)?;
    let initial = cfg.perturbation.apply(&profile);
    let opts = EvolveOptions {
        t_end: cfg.t_end,
        output_every: cfg.output_every,
        dt_safety: cfg.dt_safety,
        dt_max: cfg.dt_max,
        keep_snapshots: true,
    };
    let ev = solver::evolve(&initial, &profile, &opts)?;
    let times: Vec<f64> = ev.snapshots.iter().map(|s| s.state.t).collect();
    let n_fields: Vec<Vec<f64>> = ev.snapshots.iter().map(|s| s.state.n.clone()).collect();
    let inv_fields: Vec<Vec<f64>> = ev
        .snapshots
        .iter()
        .map(|s| s.state.n.iter().map(|v| 1.0 / v).collect())
        .collect();
    let dx = profile.grid.dx();

    let mut w = CsvWriter::create(&dir.join("degiorgi.csv"), &["field", "m_cap", "k", "e_k"])?;
    let mut checks = Vec::new();
    for (name, fields) in [("n", &n_fields), ("inv_n", &inv_fields)] {
        let series = degiorgi::FieldSeries {
            times: &times,
            fields,
            dx,
        };
        // R assembled from the initial sup bound and the p-function norms of
        // the substitution (p1, p2, p3) = (-q, -(q-q̂), -q̂) resp. signs for 1/n
        let m0_max = numerics::linf_norm(&fields[0]);
        let q_max = ev
            .snapshots
            .iter()
            .map(|s| s.state.max_abs_q())
            .fold(0.0_f64, f64::max);
        let p3_max = numerics::linf_norm(&profile.q_tilde);
        let m2_max = if name == "n" {
            numerics::linf_norm(&profile.n_tilde)
        } else {
            profile
                .n_tilde
                .iter()
                .map(|v| 1.0 / v)
                .fold(0.0_f64, f64::max)
        };
        let r_bound = m0_max + 2.0 * q_max + p3_max + m2_max;
        let caps = degiorgi::cap_grid(r_bound, numerics::linf_norm(&fields[0]) * 0.9);
        let scan = degiorgi::degiorgi_report(&series, &caps, 40)?;
        for rep in &scan.reports {
            for (k, e) in rep.energies.iter().enumerate() {
                w.raw_row(&[
                    name.to_string(),
                    fmt(rep.m_cap),
                    k.to_string(),
                    fmt(*e),
                ])?;
            }
        }
        let nonincreasing = scan
            .reports
            .iter()
            .all(|r| r.energies.windows(2).all(|p| p[1] <= p[0] + 1e-15));
        checks.push(check(
            nonincreasing,
            format!("[{name}] truncation energies nonincreasing in k"),
        ));
        match scan.smallest_passing_m {
            Some(m) => {
                checks.push(check(
                    scan.field_max <= m,
                    format!(
                        "[{name}] certified sup bound M = {m:.4} dominates the field max {:.4}",
                        scan.field_max
                    ),
                ));
                checks.push(check(
                    m <= 2.0 * scan.field_max + 1.0,
                    format!("[{name}] certified cap within 2*max + margin"),
                ));
            }
            None => checks.push(check(false, format!("[{name}] no cap certified"))),
        }
    }
    w.finish()?;

    // abstract sequence recursion: convergence/divergence seeds and the
    // bisected threshold for (C, beta) = (2, 2)
    let conv = degiorgi::sequence_lemma_iterate(2.0, 2.0, 0.125, 256)?;
    let div = degiorgi::sequence_lemma_iterate(2.0, 2.0, 1.0, 256)?;
    let threshold = degiorgi::sequence_lemma_threshold(2.0, 2.0, 0.125, 1.0, 50)?;
    checks.push(check(
        conv.verdict == degiorgi::SequenceVerdict::ConvergesToZero,
        "sequence recursion W0 = 1/8 converges to zero",
    ));
    checks.push(check(
        div.verdict == degiorgi::SequenceVerdict::Diverges,
        "sequence recursion W0 = 1 diverges",
    ));
    checks.push(check(
        threshold.is_finite() && threshold > 0.125 && threshold < 1.0,
        format!("bisected convergence threshold C0 = {threshold:.9}"),
    ));
    Ok(checks)
}

fn run_ks_compare(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // homogeneous closed-form case first: residual at round-off
    {
        let g = Grid::new(-10.0, 10.0, 65, Frame::Fixed)?;
        let n0 = vec![1.25; g.n_points];
        let c0 = vec![0.8; g.n_points];
        let ks0 = KSState::new(0.0, g.clone(), n0.clone(), c0)?;
        let ks_series = kellersegel::ks_evolve(&ks0, 1.0, 0.5, 0.25, None)?;
        let mut worst = 0.0_f64;
        for s in &ks_series {
            let q = kellersegel::cole_hopf_forward(&s.c, g.dx())?;
            worst = worst.max(numerics::linf_norm(&q));
            worst = worst.max(
                s.n.iter()
                    .map(|v| (v - 1.25).abs())
                    .fold(0.0_f64, f64::max),
            );
        }
        checks.push(check(
            worst < 1e-10,
            format!("homogeneous data stays homogeneous (residual {worst:.3e})"),
        ));
    }

    // matched wave + perturbation comparison on the configured grid
    let (ks_series, _nq_series, residuals) = ks_matched_runs(cfg)?;
    let mut w = CsvWriter::create(&dir.join("residuals.csv"), &["t", "residual_l2"])?;
    for (s, r) in ks_series.iter().zip(&residuals) {
        w.row(&[s.t, *r])?;
    }
    w.finish()?;
    let max_res = residuals.iter().cloned().fold(0.0_f64, f64::max);
    checks.push(check(
        max_res.is_finite(),
        format!(
            "cross-model residual finite, max {max_res:.3e} over {} outputs (order checked under refinement)",
            residuals.len()
        ),
    ));
    checks.push(check(
        ks_series.iter().all(|s| s.min_c() > 0.0),
        "concentration stayed strictly positive",
    ));
    Ok(checks)
}

/// Matched fixed-frame runs of the two models from transform-consistent
/// data; returns both series and the equivalence residuals.
pub fn ks_matched_runs(
    cfg: &ExperimentConfig,
) -> Result<(Vec<KSState>, Vec<FieldState>, Vec<f64>)> {
    let mut grid = cfg.grid.clone();
    grid.frame = Frame::Fixed;
    let profile = wave::build_profile(&cfg.end, &cfg.constants, &grid)?;
    let initial = cfg.perturbation.apply(&profile);
    let dx = profile.grid.dx();

    // c0 from q0 through the inverse transform, anchored at 1 on the left
    let c0 = kellersegel::cole_hopf_inverse(&initial.q, dx, 1.0, 0)?;
    let ks0 = KSState::new(0.0, profile.grid.clone(), initial.n.clone(), c0)?;

    let dt_cap = cfg.dt_max;
    let ks_series = kellersegel::ks_evolve(&ks0, cfg.end.nu, cfg.t_end, cfg.output_every, dt_cap)?;
    let opts = EvolveOptions {
        t_end: cfg.t_end,
        output_every: cfg.output_every,
        dt_safety: cfg.dt_safety,
        dt_max: dt_cap,
        keep_snapshots: true,
    };
    let ev = solver::evolve(&initial, &profile, &opts)?;
    let nq_series: Vec<FieldState> = ev.snapshots.iter().map(|s| s.state.clone()).collect();
    let residuals = kellersegel::equivalence_check(&ks_series, &nq_series)?;
    Ok((ks_series, nq_series, residuals))
}

fn run_check_lemmas(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<Check>> {
    let rep = entropy::lemma28_check(
        cfg.end.n_minus,
        cfg.delta,
        cfg.samples,
        cfg.perturbation.seed,
    )?;
    let mut w = CsvWriter::create(
        &dir.join("lemma_bands.csv"),
        &["band", "min", "max", "samples"],
    )?;
    for (name, band) in [
        ("near_quadratic", &rep.near_quadratic),
        ("far_log", &rep.far_log),
        ("far_linear_lower", &rep.far_linear_lower),
        ("far_quadratic_upper", &rep.far_quadratic_upper),
    ] {
        w.raw_row(&[
            name.to_string(),
            fmt(band.min),
            fmt(band.max),
            band.samples.to_string(),
        ])?;
    }
    w.finish()?;

    // interpolation-bound demonstration fields
    let n = 801;
    let dx = 0.05;
    let zeros = vec![0.0; n];
    let f1: Vec<f64> = (0..n)
        .map(|i| (-(((i as f64) * dx - 20.0) / 2.0).powi(2)).exp())
        .collect();
    let g2 = vec![1.0; n];
    let linf = entropy::linfty_decomposition_bound(&f1, &zeros, &zeros, &g2, dx);

    Ok(vec![
        check(
            rep.monotonicity_violations == 0,
            format!(
                "relative-potential monotonicity on ordered triples ({} checks, {} violations)",
                rep.monotonicity_checks, rep.monotonicity_violations
            ),
        ),
        check(
            rep.near_quadratic.finite_and_positive(),
            format!(
                "near-field quadratic band finite: [{:.4e}, {:.4e}]",
                rep.near_quadratic.min, rep.near_quadratic.max
            ),
        ),
        check(
            rep.far_log.finite_and_positive(),
            format!(
                "far-field log band finite: [{:.4e}, {:.4e}]",
                rep.far_log.min, rep.far_log.max
            ),
        ),
        check(
            rep.far_linear_lower.finite_and_positive() && rep.far_quadratic_upper.finite_and_positive(),
            "far-field linear-lower and quadratic-upper bands finite",
        ),
        check(
            rep.reverse_ratio_large < rep.reverse_ratio_moderate / 10.0,
            format!(
                "reversed quadratic lower bound fails: ratio drops {:.3e} -> {:.3e} at n1 = {:.1e}",
                rep.reverse_ratio_moderate, rep.reverse_ratio_large, rep.reverse_counterexample_n1
            ),
        ),
        check(
            linf.bound_holds && linf.precondition_excess <= 1e-12,
            "L1+Linf interpolation bound holds on the demonstration fields",
        ),
    ])
}
