//! De Giorgi truncation-energy machinery: levels c_k = M(1 − 2^{−k−1})
//! climbing toward a cap M, truncations m_k = (m − c_k)₊, and the energies
//!
//!   E_k = sup_t ∫ m_k² dξ + ∫∫ |∂ξ m_k|² dξ dt,
//!
//! whose collapse to zero certifies ‖m‖_∞ ≤ M. Applied to solver fields
//! m = n and m = 1/n, and backed by the abstract sequence recursion
//! W_{k+1} = Cᵏ W_k^β run in logarithms.

use crate::error::{Error, Result};
use crate::numerics;

/// Truncation levels c_k = M(1 − 2^{−k−1}), k = 0..k_max inclusive.
pub fn truncation_levels(m_cap: f64, k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| m_cap * (1.0 - 0.5f64.powi(k as i32 + 1)))
        .collect()
}

/// A scalar field history on a common grid: snapshots of m(t, ·).
pub struct FieldSeries<'a> {
    pub times: &'a [f64],
    pub fields: &'a [Vec<f64>],
    pub dx: f64,
}

/// Truncation energy at one level: sup over snapshot times of ∫(m−c)₊² plus
/// the time-cumulative ∫∫|∂ξ(m−c)₊|², with the truncation derivative taken
/// as ∂ξm·1{m>c}.
pub fn truncation_energy(series: &FieldSeries, level: f64) -> f64 {
    let mut sup_part = 0.0_f64;
    let mut grad_cum = 0.0_f64;
    let mut prev: Option<(f64, f64)> = None;
    for (t, m) in series.times.iter().zip(series.fields.iter()) {
        let cut: Vec<f64> = m.iter().map(|&v| (v - level).max(0.0)).collect();
        sup_part = sup_part.max(numerics::trapezoid_with(cut.len(), series.dx, |i| {
            cut[i] * cut[i]
        }));
        let dm = numerics::derivative(m, series.dx);
        let grad_sq = numerics::trapezoid_with(m.len(), series.dx, |i| {
            if m[i] > level {
                dm[i] * dm[i]
            } else {
                0.0
            }
        });
        if let Some((tp, gp)) = prev {
            grad_cum += 0.5 * (gp + grad_sq) * (t - tp);
        }
        prev = Some((*t, grad_sq));
    }
    sup_part + grad_cum
}

/// Energy cascade at one cap M.
#[derive(Clone, Debug)]
pub struct DeGiorgiReport {
    pub m_cap: f64,
    pub levels: Vec<f64>,
    pub energies: Vec<f64>,
    pub converged: bool,
}

/// Convergence criterion: E_{k_max} < 1e−12·E₀ (or E₀ = 0 outright).
pub const ENERGY_COLLAPSE_FACTOR: f64 = 1e-12;

pub fn energy_cascade(series: &FieldSeries, m_cap: f64, k_max: usize) -> DeGiorgiReport {
    let levels = truncation_levels(m_cap, k_max);
    let energies: Vec<f64> = levels
        .iter()
        .map(|&c| truncation_energy(series, c))
        .collect();
    let e0 = energies[0];
    let converged = e0 == 0.0 || energies[k_max] < ENERGY_COLLAPSE_FACTOR * e0;
    DeGiorgiReport {
        m_cap,
        levels,
        energies,
        converged,
    }
}

/// Reports over a cap grid, plus the smallest converging cap — the empirical
/// sup bound the truncation argument certifies.
#[derive(Debug)]
pub struct DeGiorgiScan {
    pub reports: Vec<DeGiorgiReport>,
    pub smallest_passing_m: Option<f64>,
    pub field_max: f64,
}

pub fn degiorgi_report(series: &FieldSeries, m_grid: &[f64], k_max: usize) -> Result<DeGiorgiScan> {
    if series.times.len() != series.fields.len() || series.times.is_empty() {
        return Err(Error::Validation("empty or ragged field series".into()));
    }
    let field_max = series
        .fields
        .iter()
        .flat_map(|f| f.iter())
        .fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let mut reports = Vec::new();
    let mut smallest: Option<f64> = None;
    for &m_cap in m_grid {
        let rep = energy_cascade(series, m_cap, k_max);
        if rep.converged {
            smallest = Some(match smallest {
                Some(cur) => cur.min(m_cap),
                None => m_cap,
            });
        }
        reports.push(rep);
    }
    Ok(DeGiorgiScan {
        reports,
        smallest_passing_m: smallest,
        field_max,
    })
}

/// Geometric cap grid of the scan, factor 1.25, spanning down from 2R to
/// slightly below `floor` (search space for the smallest certified cap).
pub fn cap_grid(r_bound: f64, floor: f64) -> Vec<f64> {
    let mut caps = Vec::new();
    let mut m = 2.0 * r_bound;
    let lo = floor.max(1e-8);
    while m > lo / 1.25 {
        caps.push(m);
        m /= 1.25;
    }
    caps.reverse();
    caps
}

/// Result of the extremal sequence recursion W_{k+1} = Cᵏ W_k^β, iterated in
/// logarithms so overflow cannot occur.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceVerdict {
    ConvergesToZero,
    Diverges,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct SequenceLemmaResult {
    pub log_w: Vec<f64>,
    pub verdict: SequenceVerdict,
}

/// Iterate l_{k+1} = k·ln C + β·l_k from l₀ = ln W₀. Convergence = l_k
/// escaping below −800 (W below ~1e−347), divergence = escaping above +800.
pub fn sequence_lemma_iterate(
    c_const: f64,
    beta: f64,
    w0: f64,
    k_max: usize,
) -> Result<SequenceLemmaResult> {
    if !(c_const > 1.0) || !(beta > 1.0) {
        return Err(Error::Domain(format!(
            "sequence lemma needs C > 1 and beta > 1, got ({c_const}, {beta})"
        )));
    }
    if !(w0 > 0.0) {
        return Err(Error::Domain("W_0 must be positive".into()));
    }
    let ln_c = c_const.ln();
    let mut l = w0.ln();
    let mut log_w = vec![l];
    let mut verdict = SequenceVerdict::Undecided;
    for k in 0..k_max {
        l = k as f64 * ln_c + beta * l;
        log_w.push(l);
        if l < -800.0 {
            verdict = SequenceVerdict::ConvergesToZero;
            break;
        }
        if l > 800.0 {
            verdict = SequenceVerdict::Diverges;
            break;
        }
    }
    Ok(SequenceLemmaResult { log_w, verdict })
}

/// Bisect the convergence threshold in W₀ between a converging `lo` and a
/// diverging `hi`.
pub fn sequence_lemma_threshold(
    c_const: f64,
    beta: f64,
    mut lo: f64,
    mut hi: f64,
    bisections: usize,
) -> Result<f64> {
    let verdict_of = |w: f64| -> Result<SequenceVerdict> {
        Ok(sequence_lemma_iterate(c_const, beta, w, 10_000)?.verdict)
    };
    if verdict_of(lo)? != SequenceVerdict::ConvergesToZero {
        return Err(Error::Domain(format!("lower seed {lo} does not converge")));
    }
    if verdict_of(hi)? != SequenceVerdict::Diverges {
        return Err(Error::Domain(format!("upper seed {hi} does not diverge")));
    }
    for _ in 0..bisections {
        let mid = 0.5 * (lo + hi);
        match verdict_of(mid)? {
            SequenceVerdict::ConvergesToZero => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_formula() {
        let c = truncation_levels(4.0, 2);
        assert_eq!(c, vec![2.0, 3.0, 3.5]);
        // increments telescope: c_{k+1} - c_k = M 2^{-k-2}
        let c = truncation_levels(1.0, 20);
        for k in 0..20 {
            assert!((c[k + 1] - c[k] - 0.5f64.powi(k as i32 + 2)).abs() < 1e-15);
        }
        assert!((c[20] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn energy_of_constant_field() {
        // m ≡ 3 on a domain of length L with M = 4: E0 sup-part = L·1², no
        // gradient part; one snapshot so no time accumulation either.
        let times = [0.0, 1.0];
        let fields = vec![vec![3.0; 101], vec![3.0; 101]];
        let series = FieldSeries {
            times: &times,
            fields: &fields,
            dx: 0.1,
        };
        let e0 = truncation_energy(&series, 2.0);
        assert!((e0 - 10.0 * 1.0).abs() < 1e-12);
        // below M/2 everywhere: all energies vanish
        let low = vec![vec![1.9; 101], vec![1.9; 101]];
        let series_low = FieldSeries {
            times: &times,
            fields: &low,
            dx: 0.1,
        };
        let rep = energy_cascade(&series_low, 4.0, 10);
        assert!(rep.energies.iter().all(|&e| e == 0.0) && rep.converged);
    }

    #[test]
    fn energies_nonincreasing_in_k() {
        let times = [0.0, 0.5, 1.0];
        let n = 201;
        let dx = 0.05;
        let fields: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| {
                (0..n)
                    .map(|i| {
                        let x = i as f64 * dx - 5.0;
                        2.0 + (1.0 + t) * (-x * x).exp()
                    })
                    .collect()
            })
            .collect();
        let series = FieldSeries {
            times: &times,
            fields: &fields,
            dx,
        };
        let rep = energy_cascade(&series, 3.5, 12);
        for w in rep.energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "E_k must not increase");
        }
    }

    #[test]
    fn cap_below_max_plateaus_above_zero() {
        let times = [0.0, 1.0];
        let n = 201;
        let dx = 0.05;
        // plateau field exceeding the cap on a set of positive measure
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * dx - 5.0;
                if x.abs() < 1.0 {
                    4.0
                } else {
                    1.0
                }
            })
            .collect();
        let fields = vec![f.clone(), f];
        let series = FieldSeries {
            times: &times,
            fields: &fields,
            dx,
        };
        let rep = energy_cascade(&series, 3.2, 30);
        assert!(!rep.converged);
        let last = rep.energies.last().unwrap();
        assert!(*last > 1e-3, "plateau energy {last}");
    }

    #[test]
    fn scan_certifies_a_cap_above_the_max() {
        let times = [0.0, 1.0];
        let n = 401;
        let dx = 0.05;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * dx - 10.0;
                1.0 + 1.5 * (-(x / 2.0).powi(2)).exp()
            })
            .collect();
        let fields = vec![f.clone(), f];
        let series = FieldSeries {
            times: &times,
            fields: &fields,
            dx,
        };
        let caps = cap_grid(2.5, 1.0);
        let scan = degiorgi_report(&series, &caps, 40).unwrap();
        let m = scan.smallest_passing_m.expect("some cap certifies");
        assert!(m >= scan.field_max, "certified cap below the actual max");
        assert!(m <= 2.0 * scan.field_max + 1.0, "cap not sharp: {m}");
    }

    #[test]
    fn sequence_lemma_exact_log_arithmetic() {
        // C = 2, beta = 2, W0 = 1/8: log2 W = -3, -6, -11, -20, ...
        let r = sequence_lemma_iterate(2.0, 2.0, 0.125, 64).unwrap();
        let log2: Vec<f64> = r.log_w.iter().map(|l| l / 2f64.ln()).collect();
        assert!((log2[0] + 3.0).abs() < 1e-12);
        assert!((log2[1] + 6.0).abs() < 1e-12);
        assert!((log2[2] + 11.0).abs() < 1e-12);
        assert!((log2[3] + 20.0).abs() < 1e-12);
        assert_eq!(r.verdict, SequenceVerdict::ConvergesToZero);

        let r = sequence_lemma_iterate(2.0, 2.0, 1.0, 64).unwrap();
        assert_eq!(r.verdict, SequenceVerdict::Diverges);

        assert!(sequence_lemma_iterate(0.5, 2.0, 1.0, 4).is_err());
    }

    #[test]
    fn threshold_bisection_finds_one_half() {
        // closed form for (C, beta) = (2, 2): l_k = 2^k(l0 + ln 2) - ... the
        // transition sits exactly at W0 = 1/2
        let c0 = sequence_lemma_threshold(2.0, 2.0, 0.125, 1.0, 60).unwrap();
        assert!((c0 - 0.5).abs() < 1e-9, "threshold {c0}");
    }
}
