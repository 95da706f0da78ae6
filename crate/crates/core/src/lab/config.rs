//! Experiment configuration: `key = value` lines under bracketed section
//! headers, `#` comments, unknown keys rejected with line numbers. Every
//! applied default is echoed into the run log, and non-canonical
//! configurations (n₋ < n₊ or ν ≠ 1) are reduced to canonical form at
//! ingestion by the reflection and scaling transforms.

use crate::error::{Error, Result};
use crate::grid::{Frame, Grid};
use crate::lab::perturbation::{Perturbation, PerturbationKind};
use crate::params::{self, EndStates, TheoremConstants};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Wave,
    Evolve,
    Contraction,
    Picard,
    DeGiorgi,
    KsCompare,
    CheckLemmas,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wave" => Some(Self::Wave),
            "evolve" => Some(Self::Evolve),
            "contraction" => Some(Self::Contraction),
            "picard" => Some(Self::Picard),
            "degiorgi" => Some(Self::DeGiorgi),
            "ks-compare" => Some(Self::KsCompare),
            "check-lemmas" => Some(Self::CheckLemmas),
            _ => None,
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            Self::Wave => "wave",
            Self::Evolve => "evolve",
            Self::Contraction => "contraction",
            Self::Picard => "picard",
            Self::DeGiorgi => "degiorgi",
            Self::KsCompare => "ks-compare",
            Self::CheckLemmas => "check-lemmas",
        }
    }
}

/// Fully resolved, validated, canonicalized experiment plan.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub end: EndStates,
    pub constants: TheoremConstants,
    pub grid: Grid,
    pub dt_safety: f64,
    pub dt_max: Option<f64>,
    pub t_end: f64,
    pub output_every: f64,
    pub perturbation: Perturbation,
    /// picard window and iteration cap
    pub t_span: f64,
    pub k_max: usize,
    /// check-lemmas sweep size and delta
    pub samples: usize,
    pub delta: f64,
    /// defaults applied and transforms performed, echoed into the run log
    pub notes: Vec<String>,
}

struct RawConfig {
    // (section, key) -> (value, line)
    entries: BTreeMap<(String, String), (String, usize)>,
}

const SECTIONS: &[&str] = &[
    "end_states",
    "constants",
    "grid",
    "time",
    "perturbation",
    "experiment",
];

const KEYS: &[(&str, &str)] = &[
    ("end_states", "n_minus"),
    ("end_states", "n_plus"),
    ("end_states", "q_minus"),
    ("end_states", "nu"),
    ("constants", "kappa"),
    ("constants", "lambda"),
    ("grid", "xi_min"),
    ("grid", "xi_max"),
    ("grid", "n_points"),
    ("time", "dt_safety"),
    ("time", "dt_max"),
    ("time", "t_end"),
    ("time", "output_every"),
    ("perturbation", "kind"),
    ("perturbation", "amplitude"),
    ("perturbation", "width"),
    ("perturbation", "center"),
    ("perturbation", "seed"),
    ("perturbation", "q_amplitude"),
    ("experiment", "kind"),
    ("experiment", "t_span"),
    ("experiment", "k_max"),
    ("experiment", "samples"),
    ("experiment", "delta"),
];

fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut entries = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config {
                    line: line_no,
                    msg: format!("malformed section header `{line}`"),
                });
            }
            let name = line[1..line.len() - 1].trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::Config {
                    line: line_no,
                    msg: format!("unknown section `[{name}]`"),
                });
            }
            section = name;
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::Config {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if section.is_empty() {
            return Err(Error::Config {
                line: line_no,
                msg: format!("key `{key}` appears before any [section] header"),
            });
        }
        if !KEYS.contains(&(section.as_str(), key.as_str())) {
            return Err(Error::Config {
                line: line_no,
                msg: format!("unknown key `{key}` in section [{section}]"),
            });
        }
        if entries
            .insert((section.clone(), key.clone()), (value, line_no))
            .is_some()
        {
            return Err(Error::Config {
                line: line_no,
                msg: format!("duplicate key `{key}` in section [{section}]"),
            });
        }
    }
    Ok(RawConfig { entries })
}

impl RawConfig {
    fn take(&self, section: &str, key: &str) -> Option<(String, usize)> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .cloned()
    }

    fn f64_or(
        &self,
        section: &str,
        key: &str,
        default: Option<f64>,
        notes: &mut Vec<String>,
    ) -> Result<Option<f64>> {
        match self.take(section, key) {
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| Error::Config {
                line,
                msg: format!("cannot parse `{v}` as a number for {section}.{key}"),
            }),
            None => {
                if let Some(d) = default {
                    notes.push(format!("default applied: {section}.{key} = {d}"));
                }
                Ok(default)
            }
        }
    }

    fn usize_or(
        &self,
        section: &str,
        key: &str,
        default: usize,
        notes: &mut Vec<String>,
    ) -> Result<usize> {
        match self.take(section, key) {
            Some((v, line)) => v.parse::<usize>().map_err(|_| Error::Config {
                line,
                msg: format!("cannot parse `{v}` as an integer for {section}.{key}"),
            }),
            None => {
                notes.push(format!("default applied: {section}.{key} = {default}"));
                Ok(default)
            }
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_str(&text)
}

pub fn load_config_str(text: &str) -> Result<ExperimentConfig> {
    let raw = parse_raw(text)?;
    let mut notes = Vec::new();

    let kind_entry = raw.take("experiment", "kind").ok_or(Error::Config {
        line: 0,
        msg: "missing experiment.kind".into(),
    })?;
    let kind = ExperimentKind::parse(&kind_entry.0).ok_or(Error::Config {
        line: kind_entry.1,
        msg: format!("unknown experiment kind `{}`", kind_entry.0),
    })?;

    let n_minus = raw
        .f64_or("end_states", "n_minus", None, &mut notes)?
        .ok_or(Error::Config {
            line: 0,
            msg: "missing end_states.n_minus".into(),
        })?;
    let n_plus = raw
        .f64_or("end_states", "n_plus", None, &mut notes)?
        .ok_or(Error::Config {
            line: 0,
            msg: "missing end_states.n_plus".into(),
        })?;
    let q_minus = raw
        .f64_or("end_states", "q_minus", Some(0.0), &mut notes)?
        .unwrap();
    let nu = raw.f64_or("end_states", "nu", Some(1.0), &mut notes)?.unwrap();

    let end_raw = EndStates::new(n_minus, n_plus, q_minus, nu)
        .map_err(|e| Error::Validation(format!("end-state precondition violated: {e}")))?;
    let rep = params::validate_end_states(&end_raw);
    if !rep.admissible {
        return Err(Error::Validation(format!(
            "end states not admissible (rh_ok = {}, lax_ok = {})",
            rep.rh_ok, rep.lax_ok
        )));
    }

    // Canonicalization at ingestion: reflection then viscosity scaling.
    let (mut end, reflected) = params::canonicalize(&end_raw)?;
    if reflected {
        notes.push(format!(
            "ingestion reflection applied: (n-, n+, q-) = ({}, {}, {}) -> ({}, {}, {})",
            n_minus, n_plus, q_minus, end.n_minus, end.n_plus, end.q_minus
        ));
    }
    let scale = if end.nu != 1.0 {
        let nu_orig = end.nu;
        end = EndStates::new(end.n_minus, end.n_plus, end.q_minus, 1.0)?;
        notes.push(format!(
            "ingestion scaling applied: nu = {nu_orig} run mapped onto nu = 1 with (t, x) -> (t/{nu_orig}, x/{nu_orig})"
        ));
        nu_orig
    } else {
        1.0
    };

    // Admissibility constants with their documented defaults.
    let kappa_default = 0.9 * (end.n_minus / 15.0).min(0.125);
    let kappa = raw
        .f64_or("constants", "kappa", Some(kappa_default), &mut notes)?
        .unwrap();
    let lambda_default = end.epsilon.abs().sqrt();
    let lambda = raw
        .f64_or("constants", "lambda", Some(lambda_default), &mut notes)?
        .unwrap();
    let constants = TheoremConstants { kappa, lambda };
    if !(lambda > 0.0) || !(kappa > 0.0) {
        return Err(Error::Validation(
            "constants must be positive: kappa > 0, lambda > 0".into(),
        ));
    }
    if kind == ExperimentKind::Contraction {
        let crep = params::check_theorem_constants(&end, &constants);
        if !crep.all_ok {
            let mut broken = Vec::new();
            if !crep.kappa_below_cap {
                broken.push("kappa < min{n_minus/15, 1/8}");
            }
            if !crep.epsilon_below_kappa {
                broken.push("epsilon < kappa");
            }
            if !crep.lambda_above_lower {
                broken.push("lambda > epsilon/sqrt(kappa)");
            }
            if !crep.lambda_below_upper {
                broken.push("lambda < sqrt(kappa)");
            }
            return Err(Error::Validation(format!(
                "theorem-constant window violated: {}",
                broken.join(", ")
            )));
        }
    }

    // Grid (scaled into canonical coordinates when nu != 1).
    let xi_min = raw
        .f64_or("grid", "xi_min", Some(-60.0), &mut notes)?
        .unwrap()
        / scale;
    let xi_max = raw
        .f64_or("grid", "xi_max", Some(60.0), &mut notes)?
        .unwrap()
        / scale;
    let n_points = raw.usize_or("grid", "n_points", 2049, &mut notes)?;
    let frame = if kind == ExperimentKind::KsCompare || kind == ExperimentKind::Picard {
        Frame::Fixed
    } else {
        Frame::Moving
    };
    let grid = Grid::new(xi_min, xi_max, n_points, frame)?;

    // Time block.
    let dt_safety = raw
        .f64_or("time", "dt_safety", Some(0.9), &mut notes)?
        .unwrap();
    if !(dt_safety > 0.0 && dt_safety <= 1.0) {
        return Err(Error::Validation(format!(
            "time.dt_safety = {dt_safety} violates the stability-bound precondition (0 < dt_safety <= 1)"
        )));
    }
    let dt_max = raw
        .f64_or("time", "dt_max", None, &mut notes)?
        .map(|v| v / scale);
    let t_end = raw.f64_or("time", "t_end", Some(20.0), &mut notes)?.unwrap() / scale;
    let output_every = raw
        .f64_or("time", "output_every", Some(0.5), &mut notes)?
        .unwrap()
        / scale;
    if !(t_end >= 0.0) || !(output_every > 0.0) {
        return Err(Error::Validation("time controls must be positive".into()));
    }

    // Perturbation block.
    let kind_str = raw.take("perturbation", "kind");
    let pk = match &kind_str {
        Some((v, line)) => PerturbationKind::parse(v).ok_or(Error::Config {
            line: *line,
            msg: format!("unknown perturbation kind `{v}`"),
        })?,
        None => {
            notes.push("default applied: perturbation.kind = none".into());
            PerturbationKind::None
        }
    };
    let mut perturbation = Perturbation {
        kind: pk,
        amplitude: raw
            .f64_or("perturbation", "amplitude", Some(0.0), &mut notes)?
            .unwrap(),
        width: raw
            .f64_or("perturbation", "width", Some(10.0), &mut notes)?
            .unwrap(),
        center: raw
            .f64_or("perturbation", "center", Some(0.0), &mut notes)?
            .unwrap(),
        seed: raw.usize_or("perturbation", "seed", 0, &mut notes)? as u64,
        q_amplitude: raw
            .f64_or("perturbation", "q_amplitude", Some(0.0), &mut notes)?
            .unwrap(),
    };
    if !(perturbation.width > 0.0) {
        return Err(Error::Validation("perturbation.width must be positive".into()));
    }
    if reflected {
        perturbation = perturbation.mirrored();
        notes.push("perturbation mirrored with the ingestion reflection".into());
    }
    if scale != 1.0 {
        perturbation = perturbation.scaled(1.0 / scale);
        notes.push("perturbation rescaled with the ingestion scaling".into());
    }

    // Experiment-specific knobs.
    let t_span = raw
        .f64_or("experiment", "t_span", Some(0.1), &mut notes)?
        .unwrap()
        / scale;
    let k_max = raw.usize_or("experiment", "k_max", 12, &mut notes)?;
    let samples = raw.usize_or("experiment", "samples", 1_000_000, &mut notes)?;
    let delta = raw
        .f64_or("experiment", "delta", Some(0.5), &mut notes)?
        .unwrap();
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Validation(format!(
            "experiment.delta = {delta} violates the sweep precondition (0 < delta <= 1/2)"
        )));
    }

    Ok(ExperimentConfig {
        kind,
        end,
        constants,
        grid,
        dt_safety,
        dt_max,
        t_end,
        output_every,
        perturbation,
        t_span,
        k_max,
        samples,
        delta,
        notes,
    })
}

impl ExperimentConfig {
    /// Resolved-config echo written into every run directory.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let p = &self.perturbation;
        s.push_str(&format!(
            "[experiment]\nkind = {}\nt_span = {}\nk_max = {}\nsamples = {}\ndelta = {}\n\n",
            self.kind.name(),
            self.t_span,
            self.k_max,
            self.samples,
            self.delta
        ));
        s.push_str(&format!(
            "[end_states]\nn_minus = {}\nn_plus = {}\nq_minus = {}\nq_plus = {}\nsigma = {}\nepsilon = {}\nnu = {}\n\n",
            self.end.n_minus,
            self.end.n_plus,
            self.end.q_minus,
            self.end.q_plus,
            self.end.sigma,
            self.end.epsilon,
            self.end.nu
        ));
        s.push_str(&format!(
            "[constants]\nkappa = {}\nlambda = {}\n\n",
            self.constants.kappa, self.constants.lambda
        ));
        s.push_str(&format!(
            "[grid]\nxi_min = {}\nxi_max = {}\nn_points = {}\nframe = {:?}\n\n",
            self.grid.xi_min, self.grid.xi_max, self.grid.n_points, self.grid.frame
        ));
        s.push_str(&format!(
            "[time]\ndt_safety = {}\ndt_max = {:?}\nt_end = {}\noutput_every = {}\n\n",
            self.dt_safety, self.dt_max, self.t_end, self.output_every
        ));
        s.push_str(&format!(
            "[perturbation]\nkind = {}\namplitude = {}\nwidth = {}\ncenter = {}\nseed = {}\nq_amplitude = {}\n\n",
            p.kind.name(),
            p.amplitude,
            p.width,
            p.center,
            p.seed,
            p.q_amplitude
        ));
        if !self.notes.is_empty() {
            s.push_str("# resolution log\n");
            for n in &self.notes {
                s.push_str(&format!("# {n}\n"));
            }
        }
        s
    }
}
