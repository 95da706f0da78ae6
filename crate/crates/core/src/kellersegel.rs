//! Direct simulation of the Keller–Segel system with singular sensitivity
//! χ(c) = 1/c and unit consumption,
//!
//! ```text
//! ∂t n = ν ∂xx n − ∂x(n ∂x c / c),
//! ∂t c = −c n,
//! ```
//!
//! and verification of its equivalence with the (n, q) system under the
//! transform q = −∂x log c. The concentration update uses the exact nodewise
//! integrating factor c ← c·exp(−n·dt), so positivity of c — which the
//! singular sensitivity needs — holds unconditionally.

use crate::error::{Error, Result};
use crate::grid::{FieldState, Frame, Grid, VACUUM_FLOOR};
use crate::numerics;

/// Concentration/density pair on a fixed-frame grid.
#[derive(Clone, Debug)]
pub struct KSState {
    pub t: f64,
    pub grid: Grid,
    pub n: Vec<f64>,
    pub c: Vec<f64>,
}

impl KSState {
    pub fn new(t: f64, grid: Grid, n: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if grid.frame != Frame::Fixed {
            return Err(Error::Grid("Keller-Segel runs use the fixed frame".into()));
        }
        if n.len() != grid.n_points || c.len() != grid.n_points {
            return Err(Error::Grid("field length does not match grid".into()));
        }
        if c.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain("concentration must be strictly positive".into()));
        }
        Ok(KSState { t, grid, n, c })
    }

    pub fn min_c(&self) -> f64 {
        self.c.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// q = −∂x log c by centered differences (one-sided at the ends).
pub fn cole_hopf_forward(c: &[f64], dx: f64) -> Result<Vec<f64>> {
    if c.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("cole_hopf_forward needs c > 0".into()));
    }
    let log_c: Vec<f64> = c.iter().map(|v| v.ln()).collect();
    Ok(numerics::derivative(&log_c, dx)
        .into_iter()
        .map(|v| -v)
        .collect())
}

/// Invert the transform up to the anchor gauge: c(ξ) = c_anchor·exp(−∫ q)
/// with the trapezoid antiderivative taken from `anchor_index`.
pub fn cole_hopf_inverse(
    q: &[f64],
    dx: f64,
    c_anchor: f64,
    anchor_index: usize,
) -> Result<Vec<f64>> {
    if !(c_anchor > 0.0) {
        return Err(Error::Domain("anchor concentration must be positive".into()));
    }
    let n = q.len();
    if anchor_index >= n {
        return Err(Error::Grid("anchor index outside grid".into()));
    }
    // antiderivative of q with F(anchor) = 0
    let mut f = vec![0.0; n];
    for i in anchor_index + 1..n {
        f[i] = f[i - 1] + 0.5 * (q[i - 1] + q[i]) * dx;
    }
    for i in (0..anchor_index).rev() {
        f[i] = f[i + 1] - 0.5 * (q[i] + q[i + 1]) * dx;
    }
    Ok(f.iter().map(|&v| c_anchor * (-v).exp()).collect())
}

/// One step: implicit diffusion on n with the chemotactic flux explicit,
/// then the exact integrating-factor update of c driven by the pre-step n.
pub fn ks_step(state: &KSState, nu: f64, dt: f64) -> Result<KSState> {
    let g = &state.grid;
    let n_pts = g.n_points;
    let dx = g.dx();
    let half = 0.5 / dx;
    let n = &state.n;
    let c = &state.c;

    // chemotactic velocity ∂x c / c at each node
    let dc = numerics::derivative(c, dx);
    let vel: Vec<f64> = (0..n_pts).map(|i| dc[i] / c[i]).collect();

    let (nb_l, nb_r) = (n[0], n[n_pts - 1]);
    let mut rhs = vec![0.0; n_pts];
    rhs[0] = nb_l;
    rhs[n_pts - 1] = nb_r;
    for i in 1..n_pts - 1 {
        let d0_flux = (n[i + 1] * vel[i + 1] - n[i - 1] * vel[i - 1]) * half;
        rhs[i] = n[i] - dt * d0_flux;
    }
    let mu = nu * dt / (dx * dx);
    let n_new = numerics::tridiagonal_dirichlet(-mu, 1.0 + 2.0 * mu, -mu, &rhs, nb_l, nb_r);

    // c-update: multiply by a positive number, so positivity is exact
    let c_new: Vec<f64> = (0..n_pts).map(|i| c[i] * (-n[i] * dt).exp()).collect();

    if n_new.iter().any(|&v| v < VACUUM_FLOOR) {
        return Err(Error::VacuumBreach {
            t: state.t + dt,
            min_n: n_new.iter().cloned().fold(f64::INFINITY, f64::min),
            xi: 0.0,
        });
    }
    KSState::new(state.t + dt, g.clone(), n_new, c_new)
}

/// Evolve to `t_end`, storing a snapshot at every output time (t = 0
/// included). `dt_max` caps the step for refinement studies.
pub fn ks_evolve(
    initial: &KSState,
    nu: f64,
    t_end: f64,
    output_every: f64,
    dt_max: Option<f64>,
) -> Result<Vec<KSState>> {
    let mut out = vec![initial.clone()];
    let mut state = initial.clone();
    let mut next_output = output_every.min(t_end);
    while state.t - initial.t < t_end - 1e-12 {
        let q_now = cole_hopf_forward(&state.c, state.grid.dx())?;
        let fake = FieldState::new(
            state.t,
            state.grid.clone(),
            state.n.clone(),
            q_now,
        )?;
        let mut dt = 0.9 * crate::solver::stable_dt(&fake, 0.0, nu);
        if let Some(cap) = dt_max {
            dt = dt.min(cap);
        }
        dt = dt.min(initial.t + next_output - state.t);
        state = ks_step(&state, nu, dt)?;
        if state.t - initial.t >= next_output - 1e-9 * output_every {
            out.push(state.clone());
            next_output = (next_output + output_every).min(t_end);
        }
    }
    Ok(out)
}

/// Cross-model residual per matched output time:
/// ‖−∂x log c − q‖_{L²} + ‖n_KS − n‖_{L²}. Both runs must share the grid and
/// the output cadence.
pub fn equivalence_check(ks_series: &[KSState], nq_series: &[FieldState]) -> Result<Vec<f64>> {
    if ks_series.len() != nq_series.len() {
        return Err(Error::Validation(format!(
            "series lengths differ: {} vs {}",
            ks_series.len(),
            nq_series.len()
        )));
    }
    let mut out = Vec::with_capacity(ks_series.len());
    for (ks, nq) in ks_series.iter().zip(nq_series.iter()) {
        if !ks.grid.same_layout(&nq.grid) {
            return Err(Error::Grid("mismatched grids in equivalence check".into()));
        }
        if (ks.t - nq.t).abs() > 1e-9 * (1.0 + ks.t.abs()) {
            return Err(Error::Validation(format!(
                "mismatched output times {} vs {}",
                ks.t, nq.t
            )));
        }
        let dx = ks.grid.dx();
        let q_ks = cole_hopf_forward(&ks.c, dx)?;
        let dq: Vec<f64> = (0..q_ks.len()).map(|i| q_ks[i] - nq.q[i]).collect();
        let dn: Vec<f64> = (0..ks.n.len()).map(|i| ks.n[i] - nq.n[i]).collect();
        out.push(numerics::l2_norm(&dq, dx) + numerics::l2_norm(&dn, dx));
    }
    Ok(out)
}
