//! Time evolution of (n, q): IMEX moving-frame stepping, the Picard
//! iteration as an independent construction of local solutions, and residual
//! checks of the pointwise identities satisfied by the flow.
//!
//! The scheme treats diffusion implicitly (one constant-coefficient
//! tridiagonal solve per step) and every transport/flux term explicitly with
//! centered differences; boundaries are pinned to the exact end states,
//! which the moving frame makes time-independent. First order in time,
//! second order in space.

use crate::entropy::{self, EntropyReport};
use crate::error::{Error, Result};
use crate::grid::{FieldState, Frame, VACUUM_FLOOR};
use crate::numerics;
use crate::wave::WaveProfile;

/// Advective stability bound dt ≤ 0.9·dx/(|σ| + max|q| + max n); the step
/// rejects anything above it.
pub fn advective_dt_bound(state: &FieldState, sigma: f64) -> f64 {
    let speed = sigma.abs() + state.max_abs_q() + state.max_n();
    0.9 * state.grid.dx() / speed
}

/// Largest dt the full splitting tolerates. Beyond the advective bound, the
/// flux-variable equation needs the coupling-mediated damping to beat its
/// explicit centered advection, which caps dt at O(min_n·dx²/ν u²) on fine
/// grids and at O(ν/u²) on coarse ones (u = |σ| + max|q|). Both caps were
/// checked conservative against a numerically bisected von Neumann boundary.
pub fn stable_dt(state: &FieldState, sigma: f64, nu: f64) -> f64 {
    let u = sigma.abs() + state.max_abs_q();
    let n_max = state.max_n();
    let n_min = state.min_n().max(VACUUM_FLOOR);
    let dx = state.grid.dx();
    let advective = 0.9 * dx / (u + n_max);
    let coupling = if u > 0.0 {
        n_min * dx * dx / (2.0 * nu * u * u)
    } else {
        f64::INFINITY
    };
    let saturation = nu / (2.0 * (u + n_max.sqrt()).powi(2));
    advective.min(coupling).min(saturation)
}

fn frame_sigma(state: &FieldState, profile: &WaveProfile) -> f64 {
    match state.grid.frame {
        Frame::Moving => profile.end.sigma,
        Frame::Fixed => 0.0,
    }
}

/// One IMEX step. Equilibrium constant states are fixed points to round-off;
/// dt = 0 is the identity.
pub fn step_imex(state: &FieldState, profile: &WaveProfile, dt: f64) -> Result<FieldState> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("invalid dt = {dt}")));
    }
    let sigma = frame_sigma(state, profile);
    let bound = advective_dt_bound(state, sigma);
    if dt > bound * (1.0 + 1e-9) {
        return Err(Error::Stability { dt, max_dt: bound });
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }

    let e = &profile.end;
    let g = &state.grid;
    let n_pts = g.n_points;
    let dx = g.dx();
    let half = 0.5 / dx;
    let n = &state.n;
    let q = &state.q;

    // Dirichlet pins hold the boundary values of the incoming state; valid
    // states carry the exact end states there (enforced at ingestion), and a
    // constant state is then an exact equilibrium.
    let (nb_l, nb_r) = (n[0], n[n_pts - 1]);
    let (qb_l, qb_r) = (q[0], q[n_pts - 1]);

    // Explicit transport and flux on n, then the implicit diffusion solve.
    let mut rhs = vec![0.0; n_pts];
    rhs[0] = nb_l;
    rhs[n_pts - 1] = nb_r;
    for i in 1..n_pts - 1 {
        let d0_n = (n[i + 1] - n[i - 1]) * half;
        let d0_nq = (n[i + 1] * q[i + 1] - n[i - 1] * q[i - 1]) * half;
        rhs[i] = n[i] + dt * (sigma * d0_n + d0_nq);
    }
    let mu = e.nu * dt / (dx * dx);
    let n_new = numerics::tridiagonal_dirichlet(-mu, 1.0 + 2.0 * mu, -mu, &rhs, nb_l, nb_r);

    let mut q_new = vec![0.0; n_pts];
    q_new[0] = qb_l;
    q_new[n_pts - 1] = qb_r;
    for i in 1..n_pts - 1 {
        let d0_q = (q[i + 1] - q[i - 1]) * half;
        let d0_n = (n[i + 1] - n[i - 1]) * half;
        q_new[i] = q[i] + dt * (sigma * d0_q + d0_n);
    }

    let out = FieldState::new(state.t + dt, g.clone(), n_new, q_new)?;
    out.check_no_vacuum()?;
    Ok(out)
}

/// Evolution controls. `dt_max` bounds the step from above (used by
/// refinement studies to force dt ∝ dx²); `dt_safety` scales the stability
/// policy.
#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub output_every: f64,
    pub dt_safety: f64,
    pub dt_max: Option<f64>,
    pub keep_snapshots: bool,
}

impl EvolveOptions {
    pub fn new(t_end: f64, output_every: f64) -> Self {
        EvolveOptions {
            t_end,
            output_every,
            dt_safety: 0.9,
            dt_max: None,
            keep_snapshots: false,
        }
    }
}

/// One output row of an evolution. `cum_dissipation` is ∫₀ᵗ D(τ)dτ
/// accumulated per solver step (trapezoid at the most recent output's
/// shift), so a fast-decaying early dissipation spike is integrated
/// accurately no matter how sparse the output cadence is.
#[derive(Clone, Debug)]
pub struct EvolutionRow {
    pub report: EntropyReport,
    pub min_n: f64,
    pub max_abs_q: f64,
    pub h1_norm: f64,
    pub cum_dissipation: f64,
}

/// A stored snapshot and, except at t = 0, the state one solver step before
/// it; the pair feeds the identity residual checks at full time accuracy.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub state: FieldState,
    pub before: Option<FieldState>,
}

#[derive(Debug)]
pub struct Evolution {
    pub final_state: FieldState,
    pub rows: Vec<EvolutionRow>,
    pub snapshots: Vec<Snapshot>,
    pub running_min_n: f64,
    pub running_max_abs_q: f64,
    pub steps: usize,
}

impl Evolution {
    /// Mean step actually taken (tolerance budgets use it as "dt").
    pub fn mean_dt(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            (self.final_state.t - self.rows[0].report.t) / self.steps as f64
        }
    }
}

/// H¹ distance to the wave in the state's frame.
pub fn h1_distance(state: &FieldState, profile: &WaveProfile) -> f64 {
    let g = &state.grid;
    let dx = g.dx();
    let dn: Vec<f64> = (0..g.n_points)
        .map(|i| state.n[i] - profile.n_tilde[i])
        .collect();
    let dq: Vec<f64> = (0..g.n_points)
        .map(|i| state.q[i] - profile.q_tilde[i])
        .collect();
    let ddn = numerics::derivative(&dn, dx);
    let ddq = numerics::derivative(&dq, dx);
    numerics::trapezoid_with(g.n_points, dx, |i| {
        dn[i] * dn[i] + dq[i] * dq[i] + ddn[i] * ddn[i] + ddq[i] * ddq[i]
    })
    .sqrt()
}

fn boundary_mismatch(state: &FieldState, profile: &WaveProfile) -> f64 {
    let e = &profile.end;
    let last = state.grid.n_points - 1;
    (state.n[0] - e.n_minus)
        .abs()
        .max((state.q[0] - e.q_minus).abs())
        .max((state.n[last] - e.n_plus).abs())
        .max((state.q[last] - e.q_plus).abs())
}

/// Run the IMEX scheme to `t_end`, emitting entropy reports at the output
/// cadence. The shift search warm-starts from the previous output's shift.
pub fn evolve(
    initial: &FieldState,
    profile: &WaveProfile,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    if !initial.grid.same_layout(&profile.grid) {
        return Err(Error::Grid("initial state grid differs from profile".into()));
    }
    let mismatch = boundary_mismatch(initial, profile);
    if mismatch >= 1e-8 {
        return Err(Error::Validation(format!(
            "initial data does not decay to the end states at the boundary (mismatch {mismatch:.3e})"
        )));
    }
    initial.check_no_vacuum()?;
    if !(opts.output_every > 0.0) || !(opts.t_end >= 0.0) {
        return Err(Error::Validation("bad time controls".into()));
    }

    let sigma = frame_sigma(initial, profile);
    let nu = profile.end.nu;
    let mut state = initial.clone();
    let mut prev: Option<FieldState>;
    let mut shift_hint = 0.0;
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut running_min_n = state.min_n();
    let mut running_max_q = state.max_abs_q();
    let mut steps = 0usize;

    let mut cum_diss = 0.0_f64;
    let mut last_diss;

    let emit = |state: &FieldState,
                    before: Option<&FieldState>,
                    shift_hint: &mut f64,
                    cum_diss: f64,
                    rows: &mut Vec<EvolutionRow>,
                    snapshots: &mut Vec<Snapshot>|
     -> Result<f64> {
        let report = entropy::entropy_report(state, profile, *shift_hint)?;
        *shift_hint = report.shift_x;
        let diss = report.dissipation;
        rows.push(EvolutionRow {
            report,
            min_n: state.min_n(),
            max_abs_q: state.max_abs_q(),
            h1_norm: h1_distance(state, profile),
            cum_dissipation: cum_diss,
        });
        if opts.keep_snapshots {
            snapshots.push(Snapshot {
                state: state.clone(),
                before: before.cloned(),
            });
        }
        Ok(diss)
    };

    last_diss = emit(&state, None, &mut shift_hint, cum_diss, &mut rows, &mut snapshots)?;

    let mut next_output = opts.output_every.min(opts.t_end);
    let t0 = state.t;
    while state.t - t0 < opts.t_end - 1e-12 {
        let mut dt = opts.dt_safety * stable_dt(&state, sigma, nu);
        if let Some(cap) = opts.dt_max {
            dt = dt.min(cap);
        }
        // land on the output time with evenly split steps; a clipped
        // micro-step would poison the one-step residual pairs
        let remaining = (t0 + next_output) - state.t;
        let n_sub = (remaining / dt).ceil().max(1.0);
        dt = remaining / n_sub;
        let new_state = step_imex(&state, profile, dt)?;
        prev = Some(std::mem::replace(&mut state, new_state));
        steps += 1;
        running_min_n = running_min_n.min(state.min_n());
        running_max_q = running_max_q.max(state.max_abs_q());
        let diss_now = entropy::dissipation_integral(&state, profile, shift_hint)?;
        cum_diss += 0.5 * (last_diss + diss_now) * dt;
        last_diss = diss_now;
        if (state.t - t0) >= next_output - 1e-9 * opts.output_every {
            last_diss = emit(
                &state,
                prev.as_ref(),
                &mut shift_hint,
                cum_diss,
                &mut rows,
                &mut snapshots,
            )?;
            next_output = (next_output + opts.output_every).min(opts.t_end);
        }
    }

    Ok(Evolution {
        final_state: state,
        rows,
        snapshots,
        running_min_n,
        running_max_abs_q: running_max_q,
        steps,
    })
}

/// Integrated relative-entropy identity residual on a (before, at) snapshot
/// pair:
///
///   d/dt ∫η(U|Ũ) + ∫|∂ξn|²/n − ∫∂ξn·ñ′/ñ + ∫(n−ñ)ñ″/ñ − ∫(ñ′/ñ)(n−ñ)(q−q̃)
///
/// with the time derivative a one-step difference and the space integrals
/// averaged over the pair (midpoint rule). The flux terms of the pointwise
/// identity integrate out for perturbations decaying to the end states.
pub fn relative_entropy_residual(snapshots: &[Snapshot], profile: &WaveProfile) -> Result<Vec<f64>> {
    let g = &profile.grid;
    let dx = g.dx();
    let second = profile.n_tilde_second();
    let space_terms = |state: &FieldState| -> f64 {
        let dn = numerics::derivative(&state.n, dx);
        numerics::trapezoid_with(g.n_points, dx, |i| {
            let nt = profile.n_tilde[i];
            let ntp = profile.n_tilde_prime[i];
            let diff_n = state.n[i] - nt;
            let diff_q = state.q[i] - profile.q_tilde[i];
            dn[i] * dn[i] / state.n[i] - dn[i] * ntp / nt + diff_n * second[i] / nt
                - ntp / nt * diff_n * diff_q
        })
    };
    let mut out = Vec::new();
    for snap in snapshots {
        let Some(before) = &snap.before else { continue };
        let dt = snap.state.t - before.t;
        if dt <= 0.0 {
            return Err(Error::Validation("snapshot pair out of order".into()));
        }
        let re_b = entropy::plain_relative_entropy(before, profile)?;
        let re_a = entropy::plain_relative_entropy(&snap.state, profile)?;
        let d_re = (re_a - re_b) / dt;
        let mid = 0.5 * (space_terms(before) + space_terms(&snap.state));
        out.push((d_re + mid).abs());
    }
    Ok(out)
}

/// Residual report for the auxiliary variable w = n − ∂ξq.
#[derive(Clone, Debug)]
pub struct WResidualReport {
    /// max |∂t w − σ∂ξw + n w − n² − q ∂ξn| over interior nodes and pairs
    pub max_residual: f64,
    /// max positive part of (∂t|w| − σ∂ξ|w|) − n² − |q ∂ξn|
    pub max_inequality_violation: f64,
    /// magnitude scale of the right side, for tolerance budgeting
    pub rhs_scale: f64,
}

/// Check the w-equation on snapshot pairs. In the moving frame the equation
/// picks up a −σ∂ξw transport term; the sign inequality inherits it.
pub fn w_residual(snapshots: &[Snapshot], sigma: f64) -> Result<WResidualReport> {
    let mut max_residual = 0.0_f64;
    let mut max_violation = 0.0_f64;
    let mut rhs_scale = 0.0_f64;
    for snap in snapshots {
        let Some(before) = &snap.before else { continue };
        let a = before;
        let b = &snap.state;
        let dt = b.t - a.t;
        let g = &a.grid;
        let dx = g.dx();
        let n_pts = g.n_points;
        let w_of = |s: &FieldState| -> Vec<f64> {
            let dq = numerics::derivative(&s.q, dx);
            (0..n_pts).map(|i| s.n[i] - dq[i]).collect()
        };
        let wa = w_of(a);
        let wb = w_of(b);
        let wa_abs: Vec<f64> = wa.iter().map(|v| v.abs()).collect();
        let wb_abs: Vec<f64> = wb.iter().map(|v| v.abs()).collect();
        let w_mid: Vec<f64> = (0..n_pts).map(|i| 0.5 * (wa[i] + wb[i])).collect();
        let w_abs_mid: Vec<f64> = (0..n_pts).map(|i| 0.5 * (wa_abs[i] + wb_abs[i])).collect();
        let dw_mid = numerics::derivative(&w_mid, dx);
        let dw_abs_mid = numerics::derivative(&w_abs_mid, dx);
        let dn_a = numerics::derivative(&a.n, dx);
        let dn_b = numerics::derivative(&b.n, dx);
        // skip two nodes each side: w already consumed one stencil width
        for i in 2..n_pts - 2 {
            let n_mid = 0.5 * (a.n[i] + b.n[i]);
            let qdn_mid = 0.5 * (a.q[i] * dn_a[i] + b.q[i] * dn_b[i]);
            let qdn_abs_mid = 0.5 * ((a.q[i] * dn_a[i]).abs() + (b.q[i] * dn_b[i]).abs());
            let nw_mid = 0.5 * (a.n[i] * wa[i] + b.n[i] * wb[i]);
            let n2_mid = 0.5 * (a.n[i] * a.n[i] + b.n[i] * b.n[i]);
            let res = (wb[i] - wa[i]) / dt - sigma * dw_mid[i] + nw_mid - n2_mid - qdn_mid;
            max_residual = max_residual.max(res.abs());
            let lhs_ineq = (wb_abs[i] - wa_abs[i]) / dt - sigma * dw_abs_mid[i];
            let rhs_ineq = n2_mid + qdn_abs_mid;
            max_violation = max_violation.max(lhs_ineq - rhs_ineq);
            rhs_scale = rhs_scale.max(rhs_ineq + (n_mid * w_mid[i]).abs());
        }
    }
    Ok(WResidualReport {
        max_residual,
        max_inequality_violation: max_violation.max(0.0),
        rhs_scale,
    })
}

/// Per-time gradient norms and the cumulative second-derivative dissipation.
#[derive(Clone, Debug)]
pub struct H1Row {
    pub t: f64,
    pub dn_l2: f64,
    pub dq_l2: f64,
    pub cumulative_ddn_l2sq: f64,
    pub h1_norm: f64,
}

pub fn h1_diagnostics(states: &[FieldState], profile: &WaveProfile) -> Vec<H1Row> {
    let mut out = Vec::new();
    let mut cum = 0.0;
    let mut prev: Option<(f64, f64)> = None; // (t, ||ddn||^2)
    for s in states {
        let g = &s.grid;
        let dx = g.dx();
        let dn_pert: Vec<f64> = (0..g.n_points)
            .map(|i| s.n[i] - profile.n_tilde[i])
            .collect();
        let dq_pert: Vec<f64> = (0..g.n_points)
            .map(|i| s.q[i] - profile.q_tilde[i])
            .collect();
        let dn = numerics::derivative(&dn_pert, dx);
        let dq = numerics::derivative(&dq_pert, dx);
        let ddn = numerics::second_derivative(&s.n, dx);
        let ddn_sq = numerics::trapezoid_with(g.n_points, dx, |i| ddn[i] * ddn[i]);
        if let Some((tp, vp)) = prev {
            cum += 0.5 * (vp + ddn_sq) * (s.t - tp);
        }
        prev = Some((s.t, ddn_sq));
        out.push(H1Row {
            t: s.t,
            dn_l2: numerics::l2_norm(&dn, dx),
            dq_l2: numerics::l2_norm(&dq, dx),
            cumulative_ddn_l2sq: cum,
            h1_norm: h1_distance(s, profile),
        });
    }
    out
}

/// Discrete convolution with the 1D heat kernel Φ(t, x), mass-normalized so
/// constants are preserved exactly. The field is extended by its endpoint
/// values.
pub fn heat_kernel_convolve(field: &[f64], dx: f64, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    let n = field.len();
    let radius = ((8.0 * (2.0 * t).sqrt() / dx).ceil() as usize).max(2);
    let mut weights = Vec::with_capacity(2 * radius + 1);
    let norm = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
    for j in -(radius as isize)..=(radius as isize) {
        let x = j as f64 * dx;
        weights.push(norm * (-x * x / (4.0 * t)).exp());
    }
    let mass: f64 = weights.iter().sum::<f64>() * dx;
    for w in &mut weights {
        *w /= mass;
    }
    let sample = |i: isize| -> f64 {
        let i = i.clamp(0, n as isize - 1);
        field[i as usize]
    };
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (jj, w) in weights.iter().enumerate() {
            let j = jj as isize - radius as isize;
            acc += w * sample(i as isize - j);
        }
        *o = acc * dx;
    }
    Ok(out)
}

/// One Picard iterate: the full time history of (n, q) on the local window.
#[derive(Clone, Debug)]
pub struct PicardIterate {
    pub times: Vec<f64>,
    pub n: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl PicardIterate {
    fn min_n(&self) -> f64 {
        self.n
            .iter()
            .flat_map(|v| v.iter())
            .fold(f64::INFINITY, |m, v| m.min(*v))
    }
}

/// Per-iteration successive-difference norms.
#[derive(Clone, Debug)]
pub struct PicardRow {
    pub k: usize,
    /// sup over the window of ‖nᵏ − nᵏ⁻¹‖_{L²}
    pub diff_n: f64,
    /// sup over the window of ‖qᵏ − qᵏ⁻¹‖_{L²}
    pub diff_q: f64,
    /// ‖∂ξ(nᵏ − nᵏ⁻¹)‖_{L²(L²)}
    pub diff_dn: f64,
    /// min over (t, x) of nᵏ
    pub min_n: f64,
}

#[derive(Clone, Debug)]
pub struct PicardTrace {
    pub t_span: f64,
    pub dt: f64,
    pub rows: Vec<PicardRow>,
    pub diverged: bool,
}

/// Advance the linear problem ∂t n = ν∂ξξ n + ∂ξ(n⁽ᵖʳᵉᵛ⁾ q⁽ᵖʳᵉᵛ⁾),
/// ∂t q = ∂ξ n from the shared initial data, with the source frozen at the
/// previous iterate (fixed frame). Boundaries are pinned to the initial
/// boundary values.
pub fn picard_iterate(
    prev: &PicardIterate,
    initial: &FieldState,
    nu: f64,
) -> Result<PicardIterate> {
    let g = &initial.grid;
    let n_pts = g.n_points;
    let dx = g.dx();
    let half = 0.5 / dx;
    let steps = prev.times.len() - 1;
    let dt = if steps > 0 {
        (prev.times[steps] - prev.times[0]) / steps as f64
    } else {
        return Err(Error::Validation("previous iterate has no time window".into()));
    };
    let (nb_l, nb_r) = (initial.n[0], initial.n[n_pts - 1]);
    let (qb_l, qb_r) = (initial.q[0], initial.q[n_pts - 1]);

    let mut n_hist = Vec::with_capacity(steps + 1);
    let mut q_hist = Vec::with_capacity(steps + 1);
    n_hist.push(initial.n.clone());
    q_hist.push(initial.q.clone());

    let mu = nu * dt / (dx * dx);
    for m in 0..steps {
        let n_cur = &n_hist[m];
        let q_cur = &q_hist[m];
        let np = &prev.n[m];
        let qp = &prev.q[m];
        let mut rhs = vec![0.0; n_pts];
        rhs[0] = nb_l;
        rhs[n_pts - 1] = nb_r;
        for i in 1..n_pts - 1 {
            let src = (np[i + 1] * qp[i + 1] - np[i - 1] * qp[i - 1]) * half;
            rhs[i] = n_cur[i] + dt * src;
        }
        let n_next =
            numerics::tridiagonal_dirichlet(-mu, 1.0 + 2.0 * mu, -mu, &rhs, nb_l, nb_r);
        let mut q_next = vec![0.0; n_pts];
        q_next[0] = qb_l;
        q_next[n_pts - 1] = qb_r;
        for i in 1..n_pts - 1 {
            q_next[i] = q_cur[i] + dt * (n_cur[i + 1] - n_cur[i - 1]) * half;
        }
        n_hist.push(n_next);
        q_hist.push(q_next);
    }
    Ok(PicardIterate {
        times: prev.times.clone(),
        n: n_hist,
        q: q_hist,
    })
}

/// Frozen zeroth iterate (n⁰, q⁰)(t, ·) = (n₀, q₀).
pub fn picard_seed(initial: &FieldState, t_span: f64, dt_target: f64) -> PicardIterate {
    let steps = (t_span / dt_target).ceil().max(1.0) as usize;
    let dt = t_span / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|m| initial.t + m as f64 * dt).collect();
    PicardIterate {
        n: vec![initial.n.clone(); steps + 1],
        q: vec![initial.q.clone(); steps + 1],
        times,
    }
}

pub struct PicardRun {
    pub trace: PicardTrace,
    pub final_iterate: PicardIterate,
}

/// Iterate the linear scheme `k_max` times (or until the successive
/// differences hit round-off), recording the difference norms. Flags
/// divergence after three consecutive growths.
pub fn picard_run(
    initial: &FieldState,
    t_span: f64,
    k_max: usize,
    dt_target: f64,
    nu: f64,
) -> Result<PicardRun> {
    initial.check_no_vacuum()?;
    let mut prev = picard_seed(initial, t_span, dt_target);
    let dt = prev.times[1] - prev.times[0];
    let dx = initial.grid.dx();
    let mut rows = Vec::new();
    let mut growths = 0usize;
    let mut diverged = false;

    for k in 1..=k_max {
        let next = picard_iterate(&prev, initial, nu)?;
        let mut sup_dn = 0.0_f64;
        let mut sup_dq = 0.0_f64;
        let mut cum_ddn = 0.0_f64;
        for m in 0..next.times.len() {
            let dn: Vec<f64> = (0..next.n[m].len())
                .map(|i| next.n[m][i] - prev.n[m][i])
                .collect();
            let dq: Vec<f64> = (0..next.q[m].len())
                .map(|i| next.q[m][i] - prev.q[m][i])
                .collect();
            sup_dn = sup_dn.max(numerics::l2_norm(&dn, dx));
            sup_dq = sup_dq.max(numerics::l2_norm(&dq, dx));
            let ddn = numerics::derivative(&dn, dx);
            let w = if m == 0 || m == next.times.len() - 1 {
                0.5
            } else {
                1.0
            };
            cum_ddn += w * dt * numerics::trapezoid_with(ddn.len(), dx, |i| ddn[i] * ddn[i]);
        }
        let row = PicardRow {
            k,
            diff_n: sup_dn,
            diff_q: sup_dq,
            diff_dn: cum_ddn.sqrt(),
            min_n: next.min_n(),
        };
        if let Some(last) = rows.last() {
            let last: &PicardRow = last;
            if row.diff_n + row.diff_q > last.diff_n + last.diff_q {
                growths += 1;
                if growths >= 3 {
                    diverged = true;
                }
            } else {
                growths = 0;
            }
        }
        let done = row.diff_n + row.diff_q < 1e-15;
        rows.push(row);
        prev = next;
        if done || diverged {
            break;
        }
    }
    Ok(PicardRun {
        trace: PicardTrace {
            t_span,
            dt,
            rows,
            diverged,
        },
        final_iterate: prev,
    })
}

/// Lower-bound report across Picard windows: the heat-kernel argument
/// promises min nᵏ ≥ r₀ − C·T^{3/4} ≥ r₀/2 on a short window, so the deficit
/// r₀ − min nᵏ must shrink at least like T^{3/4} as the window shrinks.
#[derive(Clone, Debug)]
pub struct LowerBoundReport {
    pub r0: f64,
    pub all_above_half_r0: bool,
    /// (t_span, min over k,t,x of n, deficit)
    pub samples: Vec<(f64, f64, f64)>,
    /// log-log slope of deficit vs t_span over the positive deficits
    pub deficit_slope: Option<f64>,
}

pub fn lower_bound_check(runs: &[(f64, f64)], r0: f64) -> LowerBoundReport {
    let mut samples = Vec::new();
    let mut all_above = true;
    let mut pts = Vec::new();
    for &(t_span, min_n) in runs {
        let deficit = r0 - min_n;
        samples.push((t_span, min_n, deficit));
        if min_n < 0.5 * r0 {
            all_above = false;
        }
        if deficit > 1e-12 {
            pts.push((t_span.ln(), deficit.ln()));
        }
    }
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() > 1e-14 {
            Some((n * sxy - sx * sy) / denom)
        } else {
            None
        }
    } else {
        None
    };
    LowerBoundReport {
        r0,
        all_above_half_r0: all_above,
        samples,
        deficit_slope: slope,
    }
}
