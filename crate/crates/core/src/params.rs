//! End-state algebra: jump conditions, admissibility, and the symmetry and
//! scaling transforms that reduce every admissible configuration to the
//! canonical case n₋ > n₊ > 0, ν = 1.
//!
//! The wave speed solves σ² + q₋σ − n₊ = 0, with the sign branch selected by
//! the ordering of the end densities; q₊ then follows from the jump of the
//! second equation. Both jump relations are satisfied to round-off by
//! construction and are re-checked relative to scale `RH_TOL`.

use crate::error::{Error, Result};
use crate::grid::FieldState;

/// Relative tolerance for the jump-condition residuals (closed-form
/// arithmetic, so essentially round-off).
pub const RH_TOL: f64 = 1e-12;

/// Shock data: end densities and flux variables, wave speed, shock strength,
/// viscosity. `sigma`, `q_plus` and `epsilon` are derived from
/// `(n_minus, n_plus, q_minus)`; `epsilon` is negative for a non-canonical
/// ordering and positive after canonicalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndStates {
    pub n_minus: f64,
    pub n_plus: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub nu: f64,
}

impl EndStates {
    /// Build from the free data `(n₋, n₊, q₋, ν)`, deriving σ, q₊, ε.
    pub fn new(n_minus: f64, n_plus: f64, q_minus: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("viscosity nu = {nu} must be > 0")));
        }
        let sigma = compute_sigma(n_minus, n_plus, q_minus)?;
        let q_plus = compute_q_plus(n_minus, n_plus, q_minus, sigma)?;
        Ok(EndStates {
            n_minus,
            n_plus,
            q_minus,
            q_plus,
            sigma,
            epsilon: n_minus - n_plus,
            nu,
        })
    }

    /// Canonical-form constructor: ν = 1.
    pub fn canonical(n_minus: f64, n_plus: f64, q_minus: f64) -> Result<Self> {
        Self::new(n_minus, n_plus, q_minus, 1.0)
    }

    pub fn is_canonical(&self) -> bool {
        self.n_minus > self.n_plus && self.nu == 1.0
    }

    /// Residuals of the two jump relations, relative to the magnitude of
    /// their largest term.
    pub fn rh_residuals(&self) -> (f64, f64) {
        let r1 = -self.sigma * (self.n_plus - self.n_minus)
            - (self.n_plus * self.q_plus - self.n_minus * self.q_minus);
        let s1 = (self.sigma * (self.n_plus - self.n_minus)).abs()
            + (self.n_plus * self.q_plus).abs()
            + (self.n_minus * self.q_minus).abs();
        let r2 = -self.sigma * (self.q_plus - self.q_minus) - (self.n_plus - self.n_minus);
        let s2 = (self.sigma * (self.q_plus - self.q_minus)).abs()
            + (self.n_plus - self.n_minus).abs();
        (r1.abs() / s1.max(1e-300), r2.abs() / s2.max(1e-300))
    }
}

/// Wave speed from the quadratic branch selected by the density ordering:
/// `(−q₋ + √(q₋² + 4 n₊)) / 2 > 0` for n₋ > n₊, the conjugate root for
/// n₋ < n₊.
pub fn compute_sigma(n_minus: f64, n_plus: f64, q_minus: f64) -> Result<f64> {
    if !(n_minus > 0.0) || !(n_plus > 0.0) {
        return Err(Error::Domain(format!(
            "end densities must be positive, got n_minus = {n_minus}, n_plus = {n_plus}"
        )));
    }
    if n_minus == n_plus {
        return Err(Error::Domain(
            "degenerate end states: n_minus = n_plus".into(),
        ));
    }
    let disc = (q_minus * q_minus + 4.0 * n_plus).sqrt();
    Ok(if n_minus > n_plus {
        (-q_minus + disc) / 2.0
    } else {
        (-q_minus - disc) / 2.0
    })
}

/// `q₊ = q₋ + (n₋ − n₊)/σ`.
pub fn compute_q_plus(n_minus: f64, n_plus: f64, q_minus: f64, sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Err(Error::Domain("q_plus undefined for sigma = 0".into()));
    }
    let _ = n_plus; // enters through sigma; kept for signature symmetry
    Ok(q_minus + (n_minus - n_plus) / sigma)
}

/// Admissibility report for one configuration: the jump residuals, the Lax
/// sign case, and whether the theorem-constant window is satisfiable at all.
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub positive_densities: bool,
    pub distinct_densities: bool,
    pub rh_residual_1: f64,
    pub rh_residual_2: f64,
    pub rh_ok: bool,
    /// true: n₋ > n₊ with q₋ < q₊ (canonical orientation);
    /// false: n₋ < n₊ with q₋ < q₊ (admissible after reflection).
    pub case_decreasing: bool,
    pub lax_ok: bool,
    pub constants_window_nonempty: bool,
    pub admissible: bool,
}

pub fn validate_end_states(end: &EndStates) -> AdmissibilityReport {
    let positive = end.n_minus > 0.0 && end.n_plus > 0.0;
    let distinct = end.n_minus != end.n_plus;
    let (r1, r2) = end.rh_residuals();
    let rh_ok = positive && distinct && r1 < RH_TOL && r2 < RH_TOL;
    let case_decreasing = end.n_minus > end.n_plus;
    let lax_ok = distinct && end.q_minus < end.q_plus;
    // The kappa window (0, min{n₋/15, 1/8}) must admit epsilon = |n₋ − n₊|.
    let kappa_cap = (end.n_minus / 15.0).min(0.125);
    let constants_window_nonempty = positive && end.epsilon.abs() < kappa_cap;
    AdmissibilityReport {
        positive_densities: positive,
        distinct_densities: distinct,
        rh_residual_1: r1,
        rh_residual_2: r2,
        rh_ok,
        case_decreasing,
        lax_ok,
        constants_window_nonempty,
        admissible: positive && distinct && rh_ok && lax_ok,
    }
}

/// Reflection x ↦ −x with σ ↦ −σ, swapping the roles of the end states and
/// flipping the sign of the flux variable: (n, q)(x) ↦ (n, −q)(−x). An
/// involution on admissible configurations; applied at ingestion to reduce
/// n₋ < n₊ data to the canonical ordering.
pub fn reflect_problem(end: &EndStates) -> Result<EndStates> {
    let reflected = EndStates::new(end.n_plus, end.n_minus, -end.q_plus, end.nu)?;
    // The derived speed must be the mirror of the original.
    debug_assert!(
        (reflected.sigma + end.sigma).abs() <= 1e-10 * (1.0 + end.sigma.abs()),
        "reflection speed mismatch: {} vs {}",
        reflected.sigma,
        -end.sigma
    );
    Ok(reflected)
}

/// Reduce any admissible configuration to canonical ordering, reporting
/// whether a reflection was applied.
pub fn canonicalize(end: &EndStates) -> Result<(EndStates, bool)> {
    if end.n_minus > end.n_plus {
        Ok((*end, false))
    } else {
        Ok((reflect_problem(end)?, true))
    }
}

/// Map a state of the ν-system onto the canonical ν = 1 system via
/// `U(t, x) = U^ν(νt, νx)`: node values are unchanged, the grid and the time
/// stamp are relabeled by 1/ν. ν = 1 is the identity.
pub fn scale_solution(nu: f64, state: &FieldState) -> Result<FieldState> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("scaling viscosity nu = {nu} must be > 0")));
    }
    let mut grid = state.grid.clone();
    grid.xi_min /= nu;
    grid.xi_max /= nu;
    FieldState::new(state.t / nu, grid, state.n.clone(), state.q.clone())
}

/// Admissibility bound κ and weight amplitude λ of the contraction theorem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremConstants {
    pub kappa: f64,
    pub lambda: f64,
}

impl TheoremConstants {
    /// Defaults: κ = 0.9·min{n₋/15, 1/8} (the theorem gives only the upper
    /// bound); λ = √ε, the geometric mean of the admissible window
    /// (ε/√κ, √κ), valid whenever ε < κ.
    pub fn defaults_for(end: &EndStates) -> TheoremConstants {
        let kappa = 0.9 * (end.n_minus / 15.0).min(0.125);
        let lambda = end.epsilon.abs().sqrt();
        TheoremConstants { kappa, lambda }
    }
}

/// Per-inequality report of the theorem-constant window.
#[derive(Clone, Debug)]
pub struct ConstantsReport {
    pub kappa_positive: bool,
    pub kappa_below_cap: bool,
    pub epsilon_positive: bool,
    pub epsilon_below_kappa: bool,
    pub lambda_above_lower: bool,
    pub lambda_below_upper: bool,
    pub all_ok: bool,
}

pub fn check_theorem_constants(end: &EndStates, tc: &TheoremConstants) -> ConstantsReport {
    let kappa_cap = (end.n_minus / 15.0).min(0.125);
    let eps = end.epsilon;
    let kappa_positive = tc.kappa > 0.0;
    let kappa_below_cap = tc.kappa < kappa_cap;
    let epsilon_positive = eps > 0.0;
    let epsilon_below_kappa = eps < tc.kappa;
    let sqrt_kappa = tc.kappa.max(0.0).sqrt();
    let lambda_above_lower = sqrt_kappa > 0.0 && tc.lambda > eps / sqrt_kappa;
    let lambda_below_upper = tc.lambda < sqrt_kappa;
    let all_ok = kappa_positive
        && kappa_below_cap
        && epsilon_positive
        && epsilon_below_kappa
        && lambda_above_lower
        && lambda_below_upper;
    ConstantsReport {
        kappa_positive,
        kappa_below_cap,
        epsilon_positive,
        epsilon_below_kappa,
        lambda_above_lower,
        lambda_below_upper,
        all_ok,
    }
}
