//! Initial-data perturbations: Gaussian bumps, square bumps (non-mean-zero,
//! amplitudes up to the left state), and seeded smooth noise. Everything is
//! deterministic given the seed, and every shape is confined well inside the
//! domain so the boundary stays on the end states.

use crate::grid::FieldState;
use crate::wave::WaveProfile;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationKind {
    None,
    Gaussian,
    Square,
    Random,
}

impl PerturbationKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::None),
            "gaussian" => Some(Self::Gaussian),
            "square" => Some(Self::Square),
            "random" => Some(Self::Random),
            _ => None,
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Gaussian => "gaussian",
            Self::Square => "square",
            Self::Random => "random",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    pub seed: u64,
    /// amplitude of the odd-shaped companion bump on q (zero by default);
    /// used by the Picard lower-bound experiments to drive the density
    /// minimum down at a controlled linear rate
    pub q_amplitude: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            kind: PerturbationKind::None,
            amplitude: 0.0,
            width: 1.0,
            center: 0.0,
            seed: 0,
            q_amplitude: 0.0,
        }
    }
}

/// Smooth compactly supported bump, exactly zero for |s| ≥ 1.
fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

impl Perturbation {
    /// Apply on top of the wave profile, returning the initial state.
    pub fn apply(&self, profile: &WaveProfile) -> FieldState {
        let g = profile.grid.clone();
        let mut n = profile.n_tilde.clone();
        let mut q = profile.q_tilde.clone();
        match self.kind {
            PerturbationKind::None => {}
            PerturbationKind::Gaussian => {
                for i in 0..g.n_points {
                    let s = (g.xi(i) - self.center) / self.width;
                    n[i] += self.amplitude * (-s * s).exp();
                }
            }
            PerturbationKind::Square => {
                for i in 0..g.n_points {
                    if (g.xi(i) - self.center).abs() <= 0.5 * self.width {
                        n[i] += self.amplitude;
                    }
                }
            }
            PerturbationKind::Random => {
                let noise = smooth_noise(&g.xis(), self.center, self.width, self.seed);
                for i in 0..g.n_points {
                    n[i] += self.amplitude * noise[i];
                }
            }
        }
        if self.q_amplitude != 0.0 {
            // odd bump: slope q' = q_amplitude/width at the center
            for i in 0..g.n_points {
                let s = (g.xi(i) - self.center) / self.width;
                q[i] += self.q_amplitude * s * (-s * s).exp();
            }
        }
        FieldState::new(0.0, g, n, q).expect("profile grid is consistent")
    }

    /// The mirror image under x ↦ −x (used by the reflection experiments):
    /// even n-shape recentered, odd q-shape invariant up to the recentering.
    pub fn mirrored(&self) -> Perturbation {
        Perturbation {
            center: -self.center,
            ..*self
        }
    }

    /// The ν-scaled image: positions stretch by ν, values unchanged.
    pub fn scaled(&self, nu: f64) -> Perturbation {
        Perturbation {
            center: self.center * nu,
            width: self.width * nu,
            ..*self
        }
    }
}

/// Seeded smooth noise localized by a compact envelope: random nodal values
/// smoothed by repeated [1 2 1]/4 passes, normalized to unit max.
fn smooth_noise(xis: &[f64], center: f64, width: f64, seed: u64) -> Vec<f64> {
    let n = xis.len();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..8 {
        let mut w = v.clone();
        for i in 1..n - 1 {
            w[i] = 0.25 * v[i - 1] + 0.5 * v[i] + 0.25 * v[i + 1];
        }
        w[0] = 0.0;
        w[n - 1] = 0.0;
        v = w;
    }
    for (i, val) in v.iter_mut().enumerate() {
        *val *= bump((xis[i] - center) / width);
    }
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max > 0.0 {
        for val in v.iter_mut() {
            *val /= max;
        }
    }
    v
}
