//! Relative-entropy calculus: the Bregman divergence Π(·|·) of
//! Π(n) = n log n − n, the state distance η, weighted and shifted
//! functionals, the dissipation integral, the argmin shift, and the
//! randomized inequality suites.
//!
//! All integrals are trapezoid sums on the uniform grid; shifted evaluation
//! interpolates linearly and extends the tails by the exact end states, so a
//! translate of the wave costs nothing.

use crate::error::{Error, Result};
use crate::grid::{FieldState, VACUUM_FLOOR};
use crate::numerics;
use crate::wave::WaveProfile;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Π(n) = n log n − n.
pub fn pi_potential(n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("pi_potential needs n > 0, got {n}")));
    }
    Ok(n * n.ln() - n)
}

/// Π(n₁|n₂) = Π(n₁) − Π(n₂) − Π′(n₂)(n₁−n₂) = n₁ log(n₁/n₂) − (n₁−n₂).
/// Positive definite by strict convexity of Π.
pub fn pi_relative(n1: f64, n2: f64) -> Result<f64> {
    if !(n1 > 0.0) || !(n2 > 0.0) {
        return Err(Error::Domain(format!(
            "pi_relative needs positive densities, got ({n1}, {n2})"
        )));
    }
    // ln_1p form avoids cancellation for n1 near n2.
    Ok(n1 * ((n1 - n2) / n2).ln_1p() - (n1 - n2))
}

/// η(U₁|U₂) = |q₁−q₂|²/2 + Π(n₁|n₂).
pub fn eta_relative(u1: (f64, f64), u2: (f64, f64)) -> Result<f64> {
    let dq = u1.1 - u2.1;
    Ok(0.5 * dq * dq + pi_relative(u1.0, u2.0)?)
}

/// Sample the state at ξ + shift with linear interpolation; outside the grid
/// the state is the exact end state of the profile. The sign convention makes
/// the recovered shift of a right-translate of the wave positive; the weight
/// stays glued to the wave coordinate.
fn shifted_sample(state: &FieldState, profile: &WaveProfile, xi: f64, shift: f64) -> (f64, f64) {
    let x = xi + shift;
    let g = &state.grid;
    if x < g.xi_min {
        (profile.end.n_minus, profile.end.q_minus)
    } else if x > g.xi_max {
        (profile.end.n_plus, profile.end.q_plus)
    } else {
        (
            numerics::interp_clamped(&state.n, g.xi_min, g.dx(), x),
            numerics::interp_clamped(&state.q, g.xi_min, g.dx(), x),
        )
    }
}

/// ∫ a(ξ) η(U(ξ+shift) | Ũ(ξ)) dξ.
pub fn weighted_relative_entropy(
    state: &FieldState,
    profile: &WaveProfile,
    shift: f64,
) -> Result<f64> {
    if !state.grid.same_layout(&profile.grid) {
        return Err(Error::Grid(
            "state and profile grids are incompatible".into(),
        ));
    }
    let g = &profile.grid;
    let dx = g.dx();
    let mut bad: Option<f64> = None;
    let v = numerics::trapezoid_with(g.n_points, dx, |i| {
        let xi = g.xi(i);
        let u = shifted_sample(state, profile, xi, shift);
        if u.0 <= 0.0 {
            bad = Some(u.0);
            return 0.0;
        }
        let ut = (profile.n_tilde[i], profile.q_tilde[i]);
        profile.a[i] * eta_relative(u, ut).unwrap_or(f64::NAN)
    });
    if let Some(n) = bad {
        return Err(Error::Domain(format!(
            "nonpositive density {n} in weighted relative entropy"
        )));
    }
    Ok(v)
}

/// Unweighted, unshifted relative entropy ∫ η(U|Ũ) dξ.
pub fn plain_relative_entropy(state: &FieldState, profile: &WaveProfile) -> Result<f64> {
    let g = &profile.grid;
    Ok(numerics::trapezoid_with(g.n_points, g.dx(), |i| {
        eta_relative(
            (state.n[i], state.q[i]),
            (profile.n_tilde[i], profile.q_tilde[i]),
        )
        .unwrap_or(f64::NAN)
    }))
}

/// ∫ a(ξ) n(ξ−shift) |∂ξ log(n(ξ−shift)/ñ(ξ))|² dξ with centered differences
/// on the grid after the shift.
pub fn dissipation_integral(
    state: &FieldState,
    profile: &WaveProfile,
    shift: f64,
) -> Result<f64> {
    let g = &profile.grid;
    let dx = g.dx();
    let n_pts = g.n_points;
    let mut log_ratio = vec![0.0; n_pts];
    let mut n_shifted = vec![0.0; n_pts];
    for i in 0..n_pts {
        let xi = g.xi(i);
        let (ns, _) = shifted_sample(state, profile, xi, shift);
        if ns < VACUUM_FLOOR {
            return Err(Error::VacuumBreach {
                t: state.t,
                min_n: ns,
                xi,
            });
        }
        n_shifted[i] = ns;
        log_ratio[i] = (ns / profile.n_tilde[i]).ln();
    }
    let d = numerics::derivative(&log_ratio, dx);
    Ok(numerics::trapezoid_with(n_pts, dx, |i| {
        profile.a[i] * n_shifted[i] * d[i] * d[i]
    }))
}

/// ∫ |∂ξ √n|² dξ.
pub fn sqrt_n_dissipation(state: &FieldState) -> f64 {
    let dx = state.grid.dx();
    let sqrtn: Vec<f64> = state.n.iter().map(|v| v.max(0.0).sqrt()).collect();
    let d = numerics::derivative(&sqrtn, dx);
    numerics::trapezoid_with(state.grid.n_points, dx, |i| d[i] * d[i])
}

/// Argmin search controls; the defaults implement a coarse scan over the
/// bracket followed by golden-section refinement to 1e−6·dx, widening the
/// bracket up to `max_widenings` times when the minimizer pins an edge.
pub struct ShiftSearch {
    pub scan_points: usize,
    pub max_widenings: usize,
}

impl Default for ShiftSearch {
    fn default() -> Self {
        ShiftSearch {
            scan_points: 33,
            max_widenings: 8,
        }
    }
}

/// Minimize shift ↦ weighted_relative_entropy over a bracket. Returns the
/// argmin and the value there; the value is no larger than at any probed
/// shift (the best probe is kept if refinement cannot beat it).
pub fn optimal_shift(
    state: &FieldState,
    profile: &WaveProfile,
    bracket: (f64, f64),
) -> Result<(f64, f64)> {
    optimal_shift_with(state, profile, bracket, &ShiftSearch::default())
}

pub fn optimal_shift_with(
    state: &FieldState,
    profile: &WaveProfile,
    bracket: (f64, f64),
    search: &ShiftSearch,
) -> Result<(f64, f64)> {
    let dx = profile.grid.dx();
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    if lo == hi {
        lo -= dx;
        hi += dx;
    }
    let eval = |s: f64| weighted_relative_entropy(state, profile, s).unwrap_or(f64::INFINITY);

    for widening in 0..=search.max_widenings {
        let m = search.scan_points.max(5);
        let step = (hi - lo) / (m - 1) as f64;
        let mut best_i = 0;
        let mut best_v = f64::INFINITY;
        let mut values = Vec::with_capacity(m);
        for k in 0..m {
            let v = eval(lo + k as f64 * step);
            values.push(v);
            if v < best_v {
                best_v = v;
                best_i = k;
            }
        }
        if best_i == 0 || best_i == m - 1 {
            if widening == search.max_widenings {
                return Err(Error::BracketExhausted {
                    widenings: widening,
                    edge: lo + best_i as f64 * step,
                });
            }
            let width = hi - lo;
            lo -= width;
            hi += width;
            continue;
        }
        let a = lo + (best_i - 1) as f64 * step;
        let b = lo + (best_i + 1) as f64 * step;
        let (x, v) = numerics::golden_section_min(eval, a, b, 1e-6 * dx);
        return if v <= best_v {
            Ok((x, v))
        } else {
            Ok((lo + best_i as f64 * step, best_v))
        };
    }
    unreachable!()
}

/// Split n − n̂ by the relative-size indicator at 1/2:
/// m₁ carries the far field |n/n̂ − 1| ≥ 1/2, m₂ the near field.
pub fn perturbation_decomposition(
    state: &FieldState,
    profile: &WaveProfile,
) -> (Vec<f64>, Vec<f64>) {
    let n_pts = state.grid.n_points;
    let mut m1 = vec![0.0; n_pts];
    let mut m2 = vec![0.0; n_pts];
    for i in 0..n_pts {
        let diff = state.n[i] - profile.n_tilde[i];
        if (state.n[i] / profile.n_tilde[i] - 1.0).abs() >= 0.5 {
            m1[i] = diff;
        } else {
            m2[i] = diff;
        }
    }
    (m1, m2)
}

/// Per-time entropy diagnostics emitted along an evolution.
#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub t: f64,
    pub re_plain: f64,
    pub re_weighted_shifted: f64,
    pub shift_x: f64,
    pub dissipation: f64,
    pub m1_l1: f64,
    pub m2_l2: f64,
    pub sqrt_n_diss: f64,
}

/// Assemble the full report for one state, searching the shift around
/// `shift_hint`.
pub fn entropy_report(
    state: &FieldState,
    profile: &WaveProfile,
    shift_hint: f64,
) -> Result<EntropyReport> {
    let dx = state.grid.dx();
    let half_width = (20.0 * dx).max(1.0);
    let (shift, re_ws) = optimal_shift(
        state,
        profile,
        (shift_hint - half_width, shift_hint + half_width),
    )?;
    let (m1, m2) = perturbation_decomposition(state, profile);
    Ok(EntropyReport {
        t: state.t,
        re_plain: plain_relative_entropy(state, profile)?,
        re_weighted_shifted: re_ws,
        shift_x: shift,
        dissipation: dissipation_integral(state, profile, shift)?,
        m1_l1: numerics::l1_norm(&m1, dx),
        m2_l2: numerics::l2_norm(&m2, dx),
        sqrt_n_diss: sqrt_n_dissipation(state),
    })
}

/// Empirical min/max of a ratio over a sweep, with the sample counts needed
/// to judge coverage.
#[derive(Clone, Copy, Debug)]
pub struct RatioBand {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl RatioBand {
    fn new() -> Self {
        RatioBand {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            samples: 0,
        }
    }
    fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.samples += 1;
    }
    pub fn finite_and_positive(&self) -> bool {
        self.samples > 0 && self.min > 0.0 && self.max.is_finite()
    }
}

/// Result of the randomized sweep over the comparison inequalities for
/// Π(·|·): quadratic two-sided band near the base point, log-weighted band
/// and mixed band far from it, exact monotonicity on ordered triples, and an
/// explicit counterexample to the reversed quadratic lower bound.
#[derive(Clone, Debug)]
pub struct Lemma28Report {
    pub delta: f64,
    /// Π/|n₁−n₂|² on |n₁/n₂ − 1| ≤ δ.
    pub near_quadratic: RatioBand,
    /// Π/(1 + n₁ log⁺(n₁/n₂)) on |n₁/n₂ − 1| ≥ δ.
    pub far_log: RatioBand,
    /// Π/|n₁−n₂| (lower) on |n₁/n₂ − 1| ≥ δ.
    pub far_linear_lower: RatioBand,
    /// Π/|n₁−n₂|² (upper) on |n₁/n₂ − 1| ≥ δ.
    pub far_quadratic_upper: RatioBand,
    pub monotonicity_checks: usize,
    pub monotonicity_violations: usize,
    /// Reversed-bound counterexample: ratios Π/|n₁−n₂|² at a moderate and at
    /// a large n₁ for the same n₂; the large-n₁ ratio collapses, so no
    /// uniform quadratic lower bound can hold.
    pub reverse_ratio_moderate: f64,
    pub reverse_ratio_large: f64,
    pub reverse_counterexample_n1: f64,
    pub reverse_counterexample_n2: f64,
}

/// Randomized verification sweep: n₁ ∈ (0, 10³], n₂ ∈ (n₋/2, n₋).
pub fn lemma28_check(n_minus: f64, delta: f64, samples: usize, seed: u64) -> Result<Lemma28Report> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, 1/2]")));
    }
    if !(n_minus > 0.0) {
        return Err(Error::Domain("n_minus must be positive".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut near = RatioBand::new();
    let mut far_log = RatioBand::new();
    let mut far_lin = RatioBand::new();
    let mut far_quad = RatioBand::new();
    let mut mono_checks = 0usize;
    let mut mono_violations = 0usize;

    for _ in 0..samples {
        // log-uniform n1 over (1e-3, 1e3], uniform n2 in (n_minus/2, n_minus)
        let n1 = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let n2 = n_minus * rng.gen_range(0.5..1.0);
        let rel = (n1 / n2 - 1.0).abs();
        if rel < 1e-12 {
            continue; // ratio test skipped at equality
        }
        let p = pi_relative(n1, n2)?;
        let d2 = (n1 - n2) * (n1 - n2);
        if rel <= delta {
            near.push(p / d2);
        } else {
            let log_plus = (n1 / n2).ln().max(0.0);
            far_log.push(p / (1.0 + n1 * log_plus));
            far_lin.push(p / (n1 - n2).abs());
            far_quad.push(p / d2);
        }

        // Monotonicity on an ordered triple built from the same draw:
        // m <= n2' <= n1' or n1' <= n2' <= m.
        let m = n_minus * rng.gen_range(0.25..1.0);
        let (a, b): (f64, f64) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
        let (lo, hi) = (a.min(b), a.max(b));
        let up = rng.gen::<bool>();
        let (big, small) = if up {
            (m + hi, m + lo)
        } else {
            ((m - hi).max(1e-6), (m - lo).max(1e-6))
        };
        mono_checks += 1;
        let p_big = pi_relative(big, m)?;
        let p_small = pi_relative(small, m)?;
        // exact inequality, guarded only by round-off on near-equal pairs
        if p_big < p_small - 1e-12 * (1.0 + p_big.abs().max(p_small.abs())) {
            mono_violations += 1;
        }
    }

    // Reversed Remark-style bound: the quadratic lower constant collapses
    // for large n1 because Π grows like n1 log n1.
    let n2 = 0.75 * n_minus;
    let moderate = 2.0 * n2;
    let large = 1e6;
    let r_mod = pi_relative(moderate, n2)? / (moderate - n2).powi(2);
    let r_big = pi_relative(large, n2)? / (large - n2).powi(2);

    Ok(Lemma28Report {
        delta,
        near_quadratic: near,
        far_log,
        far_linear_lower: far_lin,
        far_quadratic_upper: far_quad,
        monotonicity_checks: mono_checks,
        monotonicity_violations: mono_violations,
        reverse_ratio_moderate: r_mod,
        reverse_ratio_large: r_big,
        reverse_counterexample_n1: large,
        reverse_counterexample_n2: n2,
    })
}

/// Discrete check of the L¹+L∞ interpolation bound
/// ‖f‖∞ ≤ 2(‖f₁‖₁ + ‖f₂‖∞ + ‖g₁‖₁ + ‖g₂‖∞) for f = f₁+f₂ with
/// |f′| ≤ g₁+g₂.
#[derive(Clone, Debug)]
pub struct LinftyBoundReport {
    pub f_linf: f64,
    pub rhs: f64,
    pub bound_holds: bool,
    /// worst excess of |f'| over g1+g2 (precondition residual; ≤ tol means
    /// the hypothesis held on the grid)
    pub precondition_excess: f64,
}

pub fn linfty_decomposition_bound(
    f1: &[f64],
    f2: &[f64],
    g1: &[f64],
    g2: &[f64],
    dx: f64,
) -> LinftyBoundReport {
    let n = f1.len();
    let f: Vec<f64> = (0..n).map(|i| f1[i] + f2[i]).collect();
    let fp = numerics::derivative(&f, dx);
    let mut excess = 0.0_f64;
    for i in 0..n {
        excess = excess.max(fp[i].abs() - (g1[i] + g2[i]));
    }
    let f_linf = numerics::linf_norm(&f);
    let rhs = 2.0
        * (numerics::l1_norm(f1, dx)
            + numerics::linf_norm(f2)
            + numerics::l1_norm(g1, dx)
            + numerics::linf_norm(g2));
    LinftyBoundReport {
        f_linf,
        rhs,
        bound_holds: f_linf <= rhs + 1e-14,
        precondition_excess: excess,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Frame, Grid};
    use crate::params::{EndStates, TheoremConstants};
    use crate::wave::build_profile;
    use proptest::prelude::*;

    fn test_profile() -> WaveProfile {
        let e = EndStates::canonical(2.0, 1.0, 0.0).unwrap();
        let tc = TheoremConstants {
            kappa: 0.1,
            lambda: 0.2,
        };
        let grid = Grid::new(-40.0, 40.0, 1601, Frame::Moving).unwrap();
        build_profile(&e, &tc, &grid).unwrap()
    }

    fn wave_state(profile: &WaveProfile, shift: f64) -> FieldState {
        let g = &profile.grid;
        let n: Vec<f64> = (0..g.n_points)
            .map(|i| profile.n_tilde_at(g.xi(i) - shift))
            .collect();
        let q: Vec<f64> = (0..g.n_points)
            .map(|i| profile.q_tilde_at(g.xi(i) - shift))
            .collect();
        FieldState::new(0.0, g.clone(), n, q).unwrap()
    }

    #[test]
    fn potential_and_relative_closed_forms() {
        assert!((pi_potential(1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(pi_potential(std::f64::consts::E).unwrap().abs() < 1e-14);
        assert!((pi_potential(2.0).unwrap() - (2.0 * 2f64.ln() - 2.0)).abs() < 1e-15);

        assert_eq!(pi_relative(1.0, 1.0).unwrap(), 0.0);
        assert!((pi_relative(std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((pi_relative(2.0, 1.0).unwrap() - 0.3862943611198906).abs() < 1e-15);
        assert!(pi_relative(-1.0, 1.0).is_err());
    }

    #[test]
    fn eta_closed_forms() {
        assert_eq!(eta_relative((1.0, 1.0), (1.0, 1.0)).unwrap(), 0.0);
        assert!((eta_relative((1.0, 1.0), (1.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((eta_relative((2.0, 1.0), (1.0, 0.0)).unwrap() - 0.8862943611198906).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pi_relative_positive_definite(n1 in 1e-3f64..1e3, n2 in 1e-3f64..1e3) {
            let p = pi_relative(n1, n2).unwrap();
            prop_assert!(p >= -1e-12);
            if (n1 - n2).abs() > 1e-9 * n2 {
                prop_assert!(p > 0.0);
            }
        }

        #[test]
        fn weighted_re_respects_weight_bounds(bump in 0.01f64..0.8, width in 2.0f64..8.0) {
            let profile = test_profile();
            let g = profile.grid.clone();
            let n: Vec<f64> = (0..g.n_points)
                .map(|i| profile.n_tilde[i] + bump * (-(g.xi(i) / width).powi(2)).exp())
                .collect();
            let q = profile.q_tilde.clone();
            let st = FieldState::new(0.0, g, n, q).unwrap();
            let plain = plain_relative_entropy(&st, &profile).unwrap();
            let weighted = weighted_relative_entropy(&st, &profile, 0.0).unwrap();
            prop_assert!(weighted >= plain / (1.0 + profile.lambda) - 1e-12);
            prop_assert!(weighted <= (1.0 + profile.lambda) * plain + 1e-12);
        }
    }

    #[test]
    fn weighted_re_vanishes_on_the_wave_and_its_translates() {
        let profile = test_profile();
        let st = wave_state(&profile, 0.0);
        assert!(weighted_relative_entropy(&st, &profile, 0.0).unwrap() < 1e-12);

        let shifted = wave_state(&profile, 3.0);
        let v = weighted_relative_entropy(&shifted, &profile, 3.0).unwrap();
        assert!(v < 1e-6, "translation cancellation left {v}");
    }

    #[test]
    fn optimal_shift_recovers_translation() {
        let profile = test_profile();
        let st = wave_state(&profile, 1.7);
        let (x, v) = optimal_shift(&st, &profile, (-4.0, 4.0)).unwrap();
        assert!((x - 1.7).abs() < 1e-3, "argmin {x}");
        assert!(v < 1e-7);
        // argmin dominance over probe at 0
        let at0 = weighted_relative_entropy(&st, &profile, 0.0).unwrap();
        assert!(v <= at0);
    }

    #[test]
    fn exhausted_bracket_is_a_flagged_failure() {
        let profile = test_profile();
        let st = wave_state(&profile, 30.0);
        let search = ShiftSearch {
            scan_points: 9,
            max_widenings: 1,
        };
        let err = optimal_shift_with(&st, &profile, (-0.5, 0.5), &search).unwrap_err();
        assert!(matches!(err, crate::error::Error::BracketExhausted { .. }));
    }

    #[test]
    fn optimal_shift_widens_bracket() {
        let profile = test_profile();
        let st = wave_state(&profile, 5.0);
        // minimizer far outside the initial bracket
        let (x, _) = optimal_shift(&st, &profile, (-0.5, 0.5)).unwrap();
        assert!((x - 5.0).abs() < 1e-2, "argmin {x}");
    }

    #[test]
    fn dissipation_vanishes_for_proportional_density() {
        let profile = test_profile();
        let g = profile.grid.clone();
        let st = wave_state(&profile, 0.0);
        assert!(dissipation_integral(&st, &profile, 0.0).unwrap() < 1e-20);

        let n: Vec<f64> = profile.n_tilde.iter().map(|v| 1.37 * v).collect();
        let st2 = FieldState::new(0.0, g, n, profile.q_tilde.clone()).unwrap();
        let v = dissipation_integral(&st2, &profile, 0.0).unwrap();
        assert!(v < 1e-18, "constant log ratio should not dissipate, got {v}");
    }

    #[test]
    fn dissipation_matches_sqrt_identity() {
        // a n |d log(n/ñ)|² = 4 a ñ |d sqrt(n/ñ)|² pointwise; the two
        // quadratures agree up to discretization on a smooth perturbed state.
        let profile = test_profile();
        let g = profile.grid.clone();
        let dx = g.dx();
        let n: Vec<f64> = (0..g.n_points)
            .map(|i| profile.n_tilde[i] * (1.0 + 0.3 * (-(g.xi(i) / 6.0).powi(2)).exp()))
            .collect();
        let st = FieldState::new(0.0, g.clone(), n.clone(), profile.q_tilde.clone()).unwrap();
        let lhs = dissipation_integral(&st, &profile, 0.0).unwrap();

        let ratio_sqrt: Vec<f64> = (0..g.n_points)
            .map(|i| (n[i] / profile.n_tilde[i]).sqrt())
            .collect();
        let d = numerics::derivative(&ratio_sqrt, dx);
        let rhs = numerics::trapezoid_with(g.n_points, dx, |i| {
            4.0 * profile.a[i] * profile.n_tilde[i] * d[i] * d[i]
        });
        assert!(
            (lhs - rhs).abs() < 5e-3 * lhs.max(1e-12),
            "identity gap {} vs {}",
            lhs,
            rhs
        );
    }

    #[test]
    fn decomposition_indicator_cases() {
        let profile = test_profile();
        let g = profile.grid.clone();
        // n = n̂ exactly
        let st = wave_state(&profile, 0.0);
        let (m1, m2) = perturbation_decomposition(&st, &profile);
        assert!(numerics::linf_norm(&m1) < 1e-12 && numerics::linf_norm(&m2) < 1e-12);

        // n = 2 n̂: all mass in m1
        let n: Vec<f64> = profile.n_tilde.iter().map(|v| 2.0 * v).collect();
        let st = FieldState::new(0.0, g.clone(), n, profile.q_tilde.clone()).unwrap();
        let (m1, m2) = perturbation_decomposition(&st, &profile);
        assert!(numerics::linf_norm(&m2) == 0.0);
        assert!((numerics::linf_norm(&m1) - profile.end.n_minus).abs() < 1e-9);

        // n = 1.25 n̂: all mass in m2
        let n: Vec<f64> = profile.n_tilde.iter().map(|v| 1.25 * v).collect();
        let st = FieldState::new(0.0, g.clone(), n, profile.q_tilde.clone()).unwrap();
        let (m1, m2) = perturbation_decomposition(&st, &profile);
        assert!(numerics::linf_norm(&m1) == 0.0);
        assert!(numerics::linf_norm(&m2) > 0.0);
        // supports disjoint and sum identity by construction
        for i in 0..g.n_points {
            assert!(m1[i] == 0.0 || m2[i] == 0.0);
        }
    }

    #[test]
    fn quadrature_converges_at_second_order_on_smooth_fields() {
        // closed-form state (logistic wave + analytic bump) evaluated at
        // three resolutions; the functional values must converge at ~dx^2
        let e = EndStates::canonical(2.0, 1.0, 0.0).unwrap();
        let tc = TheoremConstants {
            kappa: 0.1,
            lambda: 0.2,
        };
        let value_at = |n_points: usize| -> f64 {
            let grid = Grid::new(-40.0, 40.0, n_points, Frame::Moving).unwrap();
            let p = build_profile(&e, &tc, &grid).unwrap();
            let n: Vec<f64> = (0..n_points)
                .map(|i| {
                    let xi = grid.xi(i);
                    crate::wave::logistic_reference(&e, xi) + 0.4 * (-(xi / 5.0).powi(2)).exp()
                })
                .collect();
            let q: Vec<f64> = (0..n_points)
                .map(|i| {
                    let xi = grid.xi(i);
                    let nt = crate::wave::logistic_reference(&e, xi);
                    e.q_minus - (nt - e.n_minus) / e.sigma + 0.1 * (-(xi / 7.0).powi(2)).exp()
                })
                .collect();
            let st = FieldState::new(0.0, grid, n, q).unwrap();
            weighted_relative_entropy(&st, &p, 0.0).unwrap()
        };
        let coarse = value_at(501);
        let mid = value_at(1001);
        let fine = value_at(4001); // reference
        let order = ((coarse - fine).abs() / (mid - fine).abs()).log2();
        assert!(order > 1.8, "quadrature order {order}");
    }

    #[test]
    fn lemma_sweep_small() {
        let rep = lemma28_check(2.0, 0.5, 20_000, 7).unwrap();
        assert_eq!(rep.monotonicity_violations, 0);
        assert!(rep.near_quadratic.finite_and_positive());
        assert!(rep.far_log.finite_and_positive());
        assert!(rep.far_linear_lower.finite_and_positive());
        assert!(rep.far_quadratic_upper.finite_and_positive());
        // the reversed quadratic lower bound collapses at large n1
        assert!(rep.reverse_ratio_large < rep.reverse_ratio_moderate / 10.0);
    }

    #[test]
    fn monotonicity_example_values() {
        // m = 1 <= n2 = 2 <= n1 = 3
        let p31 = pi_relative(3.0, 1.0).unwrap();
        let p21 = pi_relative(2.0, 1.0).unwrap();
        assert!((p31 - 1.2958368660043291).abs() < 1e-14);
        assert!(p31 >= p21);
    }

    #[test]
    fn linfty_bound_cases() {
        let n = 801;
        let dx = 0.05;
        let zeros = vec![0.0; n];
        // f = f2 = 1
        let ones = vec![1.0; n];
        let rep = linfty_decomposition_bound(&zeros, &ones, &zeros, &zeros, dx);
        assert!(rep.bound_holds && (rep.f_linf - 1.0).abs() < 1e-15);

        // f = f1 = Gaussian bump, derivative bounded by g2
        let f1: Vec<f64> = (0..n)
            .map(|i| (-(((i as f64) * dx - 20.0) / 2.0).powi(2)).exp())
            .collect();
        let g2 = vec![1.0; n];
        let rep = linfty_decomposition_bound(&f1, &zeros, &zeros, &g2, dx);
        assert!(rep.bound_holds);
        assert!(rep.precondition_excess <= 0.0);

        // zero edge case
        let rep = linfty_decomposition_bound(&zeros, &zeros, &zeros, &zeros, dx);
        assert!(rep.bound_holds && rep.f_linf == 0.0);
    }
}
