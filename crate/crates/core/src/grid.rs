//! Uniform 1D grids and time-stamped field states.

use crate::error::{Error, Result};

/// Coordinate frame of a grid: `Moving` is the wave frame ξ = x − σt where
/// the profile is stationary; `Fixed` is the lab frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Moving,
    Fixed,
}

/// Uniform grid on `[xi_min, xi_max]` with `n_points` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n_points: usize,
    pub frame: Frame,
}

impl Grid {
    pub fn new(xi_min: f64, xi_max: f64, n_points: usize, frame: Frame) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::Grid(format!("n_points = {n_points}, need at least 3")));
        }
        if !(xi_min < 0.0 && 0.0 < xi_max) {
            return Err(Error::Grid(format!(
                "domain [{xi_min}, {xi_max}] must straddle 0"
            )));
        }
        let g = Grid {
            xi_min,
            xi_max,
            n_points,
            frame,
        };
        if !(g.dx() > 0.0) || !g.dx().is_finite() {
            return Err(Error::Grid("non-positive or non-finite spacing".into()));
        }
        Ok(g)
    }

    pub fn dx(&self) -> f64 {
        (self.xi_max - self.xi_min) / (self.n_points - 1) as f64
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.xi_min + i as f64 * self.dx()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.xi(i)).collect()
    }

    /// Same node layout (spacing, extent, count); frame may differ.
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.n_points == other.n_points
            && (self.xi_min - other.xi_min).abs() < 1e-12 * self.dx().max(1.0)
            && (self.xi_max - other.xi_max).abs() < 1e-12 * self.dx().max(1.0)
    }
}

/// Density/flux-variable pair sampled on a grid at one instant.
#[derive(Clone, Debug)]
pub struct FieldState {
    pub t: f64,
    pub grid: Grid,
    pub n: Vec<f64>,
    pub q: Vec<f64>,
}

/// Vacuum guard: densities below this floor abort a run rather than clamp.
pub const VACUUM_FLOOR: f64 = 1e-12;

impl FieldState {
    pub fn new(t: f64, grid: Grid, n: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if n.len() != grid.n_points || q.len() != grid.n_points {
            return Err(Error::Grid(format!(
                "field length {}/{} does not match grid n_points {}",
                n.len(),
                q.len(),
                grid.n_points
            )));
        }
        Ok(FieldState { t, grid, n, q })
    }

    pub fn min_n(&self) -> f64 {
        self.n.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    pub fn max_abs_q(&self) -> f64 {
        self.q.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_n(&self) -> f64 {
        self.n.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    /// Index and position of the nodal minimum of n.
    pub fn argmin_n(&self) -> (usize, f64) {
        let mut idx = 0;
        for (i, v) in self.n.iter().enumerate() {
            if *v < self.n[idx] {
                idx = i;
            }
        }
        (idx, self.grid.xi(idx))
    }

    pub fn check_no_vacuum(&self) -> Result<()> {
        let (idx, xi) = self.argmin_n();
        if self.n[idx] < VACUUM_FLOOR {
            return Err(Error::VacuumBreach {
                t: self.t,
                min_n: self.n[idx],
                xi,
            });
        }
        Ok(())
    }
}
