//! Refinement studies: rerun an experiment at (dx, dt), (dx/2, dt/4), … and
//! report the observed convergence order of every residual-type diagnostic.

use crate::error::Result;
use crate::grid::Grid;
use crate::lab::config::{ExperimentConfig, ExperimentKind};
use crate::lab::perturbation::PerturbationKind;
use crate::lab::runner;
use crate::numerics;
use crate::solver::{self, EvolveOptions};
use crate::wave;

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub name: String,
    /// (dx, dt, residual) per level
    pub levels: Vec<(f64, f64, f64)>,
    /// observed order between consecutive levels: log2(r_l / r_{l+1})
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    fn from_levels(name: &str, levels: Vec<(f64, f64, f64)>) -> Self {
        let orders = levels
            .windows(2)
            .map(|w| (w[0].2 / w[1].2).log2())
            .collect();
        ConvergenceTable {
            name: name.into(),
            levels,
            orders,
        }
    }

    pub fn final_order(&self) -> f64 {
        *self.orders.last().unwrap_or(&f64::NAN)
    }

    /// Least-squares slope of log residual against log dx across all levels.
    pub fn fitted_order(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .levels
            .iter()
            .filter(|l| l.2 > 0.0)
            .map(|l| (l.0.ln(), l.2.ln()))
            .collect();
        let n = pts.len() as f64;
        if pts.len() < 2 {
            return f64::NAN;
        }
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }
}

fn refined_config(base: &ExperimentConfig, base_grid: &Grid, level: u32) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.grid = Grid {
        xi_min: base_grid.xi_min,
        xi_max: base_grid.xi_max,
        n_points: (base_grid.n_points - 1) * 2usize.pow(level) + 1,
        frame: base_grid.frame,
    };
    cfg
}

/// Rerun at successively halved dx (dt forced ∝ dx² through `dt_max`), and
/// tabulate the residual diagnostics owned by the experiment kind.
pub fn refinement_study(cfg: &ExperimentConfig, levels: usize) -> Result<Vec<ConvergenceTable>> {
    assert!(levels >= 2, "need at least two levels for an order");
    // fix the domain once: the coarse profile may auto-extend
    let base_profile = runner::build_profile_for(cfg)?;
    let base_grid = base_profile.grid.clone();
    let dt0 = {
        let initial = cfg.perturbation.apply(&base_profile);
        cfg.dt_safety * solver::stable_dt(&initial, cfg.end.sigma, cfg.end.nu)
    };

    match cfg.kind {
        ExperimentKind::Wave => {
            let mut rows = Vec::new();
            for l in 0..levels {
                let rcfg = refined_config(cfg, &base_grid, l as u32);
                let profile = runner::build_profile_for(&rcfg)?;
                rows.push((
                    profile.grid.dx(),
                    0.0,
                    wave::profile_pde_residual(&profile),
                ));
            }
            Ok(vec![ConvergenceTable::from_levels("profile_pde_residual", rows)])
        }
        ExperimentKind::KsCompare => {
            let mut rows = Vec::new();
            for l in 0..levels {
                let mut rcfg = refined_config(cfg, &base_grid, l as u32);
                let dt = dt0 / 4f64.powi(l as i32);
                rcfg.dt_max = Some(dt);
                let (_, _, residuals) = runner::ks_matched_runs(&rcfg)?;
                let max_res = residuals.iter().cloned().fold(0.0_f64, f64::max);
                rows.push((rcfg.grid.dx(), dt, max_res));
            }
            Ok(vec![ConvergenceTable::from_levels("equivalence_residual", rows)])
        }
        _ => {
            // evolution diagnostics: stationary drift, the integrated
            // relative-entropy identity, and the w-equation
            let mut drift_rows = Vec::new();
            let mut re_rows = Vec::new();
            let mut w_rows = Vec::new();
            for l in 0..levels {
                let rcfg = refined_config(cfg, &base_grid, l as u32);
                let dt = dt0 / 4f64.powi(l as i32);
                let profile = runner::build_profile_for(&rcfg)?;
                let opts = EvolveOptions {
                    t_end: rcfg.t_end,
                    output_every: rcfg.output_every,
                    dt_safety: rcfg.dt_safety,
                    dt_max: Some(dt),
                    keep_snapshots: true,
                };

                // stationary drift per unit time
                let stationary = crate::lab::perturbation::Perturbation {
                    kind: PerturbationKind::None,
                    ..rcfg.perturbation
                }
                .apply(&profile);
                let ev0 = solver::evolve(&stationary, &profile, &opts)?;
                let g = &ev0.final_state.grid;
                let dn: Vec<f64> = (0..g.n_points)
                    .map(|i| ev0.final_state.n[i] - profile.n_tilde[i])
                    .collect();
                let drift = numerics::l2_norm(&dn, g.dx()) / rcfg.t_end;
                drift_rows.push((g.dx(), dt, drift));

                // perturbed run for the identity residuals
                let initial = rcfg.perturbation.apply(&profile);
                let ev = solver::evolve(&initial, &profile, &opts)?;
                let re_res = solver::relative_entropy_residual(&ev.snapshots, &profile)?;
                let re_max = re_res.iter().cloned().fold(0.0_f64, f64::max);
                re_rows.push((g.dx(), dt, re_max));
                let sigma = match rcfg.grid.frame {
                    crate::grid::Frame::Moving => rcfg.end.sigma,
                    crate::grid::Frame::Fixed => 0.0,
                };
                let w_rep = solver::w_residual(&ev.snapshots, sigma)?;
                w_rows.push((g.dx(), dt, w_rep.max_residual));
            }
            Ok(vec![
                ConvergenceTable::from_levels("stationary_drift", drift_rows),
                ConvergenceTable::from_levels("relative_entropy_identity", re_rows),
                ConvergenceTable::from_levels("w_equation", w_rows),
            ])
        }
    }
}

/// Equivalence-check residual under joint refinement with both models
/// stepped at dt ∝ dx² (used directly by the acceptance suite).
pub fn ks_refinement(cfg: &ExperimentConfig, levels: usize) -> Result<ConvergenceTable> {
    let tables = refinement_study(
        &ExperimentConfig {
            kind: ExperimentKind::KsCompare,
            ..cfg.clone()
        },
        levels,
    )?;
    Ok(tables.into_iter().next().expect("one table"))
}
