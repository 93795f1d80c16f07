//! Run configuration: a flat `key = value` file with `[section]` headers.
//!
//! Blank lines and lines starting with `#` are ignored. Every key belongs
//! to a fixed section, may appear at most once, and must be relevant to the
//! selected experiment; anything else is rejected up front so a typo cannot
//! silently fall back to a default.
//!
//! Frequencies are written in cyclic Hz (`*_hz` keys) and converted to
//! angular rad/s exactly once, here at ingestion. The only exception is
//! `sigma_f_hz`, which feeds a model parameter that is itself defined in Hz.
//! Times are seconds, angles radians.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use mollow::dephasing::DephasingModel;
use mollow::experiments::{geomspace, linspace};
use mollow::sequences::{Prep, Protocol, PulseMode};

use crate::failure::Failure;

const TWO_PI: f64 = 2.0 * PI;

/// Every key the parser accepts, with its section. The order here is the
/// canonical order used when rendering a config snapshot.
const REGISTRY: &[(&str, &str)] = &[
    ("run", "experiment"),
    ("run", "label"),
    ("run", "out_dir"),
    ("run", "threads"),
    ("sequence", "protocol"),
    ("sequence", "n_pi"),
    ("sequence", "n_pi_list"),
    ("sequence", "tau_s"),
    ("sequence", "mode"),
    ("sequence", "omega_dd_hz"),
    ("signal", "omega_rf_hz"),
    ("signal", "phi_rf_rad"),
    ("signal", "delta_hz"),
    ("signal", "delta_start_hz"),
    ("signal", "delta_stop_hz"),
    ("signal", "delta_points"),
    ("scan", "tau_start_s"),
    ("scan", "tau_stop_s"),
    ("scan", "tau_points"),
    ("scan", "tau_spacing"),
    ("scan", "duration_s"),
    ("scan", "duration_start_s"),
    ("scan", "duration_stop_s"),
    ("scan", "duration_points"),
    ("scan", "theta0_rad"),
    ("prep", "prep"),
    ("dephasing", "t2_star_s"),
    ("dephasing", "sigma_f_hz"),
    ("dephasing", "nodes"),
    ("fid", "carrier_hz"),
    ("fid", "t_max_s"),
    ("fid", "dt_s"),
];

/// Keys that apply to every experiment.
const RUN_KEYS: &[&str] = &["experiment", "label", "out_dir", "threads"];

/// Optional dephasing block, accepted everywhere.
const DEPHASING_KEYS: &[&str] = &["t2_star_s", "sigma_f_hz", "nodes"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Differential response versus signal detuning at fixed sequence.
    ScanDelta,
    /// 2-D combined-quadrature power map over (τ, Δ).
    Map,
    /// Filter linewidth versus total duration at fixed τ.
    Linewidth,
    /// Signal-induced Rabi trace versus pulse count.
    Rabi,
    /// Response amplitude versus τ at fixed accumulated phase.
    Breakdown,
    /// CW sideband oscillation versus drive duration.
    CwTrace,
    /// CW absorption versus signal detuning at fixed duration.
    CwScan,
    /// Ramsey free-induction decay and its line spectrum.
    Fid,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ScanDelta => "scan_delta",
            Experiment::Map => "map",
            Experiment::Linewidth => "linewidth",
            Experiment::Rabi => "rabi",
            Experiment::Breakdown => "breakdown",
            Experiment::CwTrace => "cw_trace",
            Experiment::CwScan => "cw_scan",
            Experiment::Fid => "fid",
        }
    }

    fn parse(name: &str) -> Result<Self, Failure> {
        Ok(match name {
            "scan_delta" => Experiment::ScanDelta,
            "map" => Experiment::Map,
            "linewidth" => Experiment::Linewidth,
            "rabi" => Experiment::Rabi,
            "breakdown" => Experiment::Breakdown,
            "cw_trace" => Experiment::CwTrace,
            "cw_scan" => Experiment::CwScan,
            "fid" => Experiment::Fid,
            other => {
                return Err(Failure::config(format!(
                    "unknown experiment `{other}` (expected scan_delta|map|linewidth|rabi|\
                     breakdown|cw_trace|cw_scan|fid)"
                )))
            }
        })
    }

    /// Keys this experiment understands, beyond `[run]` and `[dephasing]`.
    fn allowed_keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::ScanDelta => &[
                "protocol",
                "n_pi",
                "tau_s",
                "mode",
                "omega_dd_hz",
                "omega_rf_hz",
                "phi_rf_rad",
                "delta_start_hz",
                "delta_stop_hz",
                "delta_points",
            ],
            Experiment::Map => &[
                "protocol",
                "n_pi",
                "mode",
                "omega_dd_hz",
                "omega_rf_hz",
                "delta_start_hz",
                "delta_stop_hz",
                "delta_points",
                "tau_start_s",
                "tau_stop_s",
                "tau_points",
                "tau_spacing",
            ],
            Experiment::Linewidth => &[
                "protocol",
                "n_pi_list",
                "tau_s",
                "mode",
                "omega_dd_hz",
                "omega_rf_hz",
                "phi_rf_rad",
            ],
            Experiment::Rabi => &[
                "protocol",
                "n_pi_list",
                "tau_s",
                "mode",
                "omega_dd_hz",
                "omega_rf_hz",
                "phi_rf_rad",
                "delta_hz",
            ],
            Experiment::Breakdown => &[
                "protocol",
                "n_pi",
                "theta0_rad",
                "tau_start_s",
                "tau_stop_s",
                "tau_points",
                "tau_spacing",
            ],
            Experiment::CwTrace => &[
                "omega_dd_hz",
                "omega_rf_hz",
                "phi_rf_rad",
                "delta_hz",
                "duration_start_s",
                "duration_stop_s",
                "duration_points",
                "prep",
            ],
            Experiment::CwScan => &[
                "omega_dd_hz",
                "omega_rf_hz",
                "phi_rf_rad",
                "duration_s",
                "delta_start_hz",
                "delta_stop_hz",
                "delta_points",
                "prep",
            ],
            Experiment::Fid => &["carrier_hz", "t_max_s", "dt_s"],
        }
    }
}

/// A fully validated run description. Angular frequencies are rad/s; the
/// original key/value text is retained so a byte-faithful snapshot can be
/// written next to the results.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub label: String,
    pub out_dir: Option<String>,
    pub threads: usize,

    /// One entry normally; all four when `protocol = all`.
    pub protocols: Vec<Protocol>,
    pub n_pi: usize,
    pub n_pi_list: Vec<usize>,
    pub tau_s: f64,
    pub mode: PulseMode,
    /// Drive Rabi rate (rad/s) for CW experiments.
    pub omega_dd: f64,

    /// Signal Rabi rate (rad/s).
    pub omega_rf: f64,
    pub phi_rf: f64,
    /// Fixed signal detuning (rad/s).
    pub delta: f64,
    /// Detuning grid (rad/s).
    pub delta_grid: Vec<f64>,

    pub tau_grid: Vec<f64>,
    pub durations: Vec<f64>,
    pub duration_s: f64,
    pub theta0: f64,

    pub prep: Prep,
    pub model: DephasingModel,

    /// FID fringe carrier (rad/s).
    pub carrier: f64,
    pub t_max_s: f64,
    pub dt_s: f64,

    raw: BTreeMap<String, String>,
}

impl RunConfig {
    /// Render the config back out in canonical section/key order. Parsing
    /// the snapshot yields a run identical to this one.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        let mut current = "";
        for (section, key) in REGISTRY {
            if let Some(v) = self.raw.get(*key) {
                if *section != current {
                    if !s.is_empty() {
                        s.push('\n');
                    }
                    s.push('[');
                    s.push_str(section);
                    s.push_str("]\n");
                    current = section;
                }
                s.push_str(key);
                s.push_str(" = ");
                s.push_str(v);
                s.push('\n');
            }
        }
        s
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, Failure> {
    build(parse_raw(text)?)
}

/// Lex the file into a key→value map, enforcing sections and uniqueness.
fn parse_raw(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut section: Option<&'static str> = None;
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner.strip_suffix(']').ok_or_else(|| {
                Failure::config(format!("line {n}: malformed section header `{line}`"))
            })?;
            section = Some(
                REGISTRY
                    .iter()
                    .map(|(s, _)| *s)
                    .find(|s| *s == name)
                    .ok_or_else(|| {
                        Failure::config(format!("line {n}: unknown section `[{name}]`"))
                    })?,
            );
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::config(format!("line {n}: expected `key = value`, got `{line}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let home = REGISTRY
            .iter()
            .find(|(_, k)| *k == key)
            .map(|(s, _)| *s)
            .ok_or_else(|| Failure::config(format!("line {n}: unknown key `{key}`")))?;
        match section {
            Some(s) if s == home => {}
            Some(s) => {
                return Err(Failure::config(format!(
                    "line {n}: key `{key}` belongs in [{home}], not [{s}]"
                )))
            }
            None => {
                return Err(Failure::config(format!(
                    "line {n}: key `{key}` must appear under a [{home}] header"
                )))
            }
        }
        if value.is_empty() {
            return Err(Failure::config(format!(
                "line {n}: key `{key}` has no value"
            )));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Failure::config(format!("line {n}: duplicate key `{key}`")));
        }
    }
    Ok(map)
}

/// Typed access to the raw map with uniform error wording.
struct Raw(BTreeMap<String, String>);

impl Raw {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, Failure> {
        self.get(key)
            .ok_or_else(|| Failure::config(format!("missing required key `{key}`")))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Failure::config(format!("key `{key}`: `{v}` is not a number")))?;
                if !x.is_finite() {
                    return Err(Failure::config(format!("key `{key}` must be finite")));
                }
                Ok(Some(x))
            }
        }
    }

    fn require_f64(&self, key: &str) -> Result<f64, Failure> {
        self.require(key)?;
        Ok(self.f64(key)?.unwrap())
    }

    fn require_positive(&self, key: &str) -> Result<f64, Failure> {
        let x = self.require_f64(key)?;
        if x <= 0.0 {
            return Err(Failure::config(format!("key `{key}` must be > 0, got {x}")));
        }
        Ok(x)
    }

    fn require_non_negative(&self, key: &str) -> Result<f64, Failure> {
        let x = self.require_f64(key)?;
        if x < 0.0 {
            return Err(Failure::config(format!(
                "key `{key}` must be >= 0, got {x}"
            )));
        }
        Ok(x)
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, Failure> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => Ok(Some(v.parse().map_err(|_| {
                Failure::config(format!("key `{key}`: `{v}` is not a non-negative integer"))
            })?)),
        }
    }

    fn require_usize(&self, key: &str) -> Result<usize, Failure> {
        self.require(key)?;
        Ok(self.usize(key)?.unwrap())
    }

    /// Grid point count: at least two so a grid is actually a grid.
    fn points(&self, key: &str) -> Result<usize, Failure> {
        let n = self.require_usize(key)?;
        if n < 2 {
            return Err(Failure::config(format!(
                "key `{key}` must be >= 2, got {n}"
            )));
        }
        Ok(n)
    }
}

fn build(map: BTreeMap<String, String>) -> Result<RunConfig, Failure> {
    let raw = Raw(map);
    let experiment = Experiment::parse(raw.require("experiment")?)?;

    for key in raw.0.keys() {
        let known = RUN_KEYS.contains(&key.as_str())
            || DEPHASING_KEYS.contains(&key.as_str())
            || experiment.allowed_keys().contains(&key.as_str());
        if !known {
            return Err(Failure::config(format!(
                "key `{key}` does not apply to experiment `{}`",
                experiment.name()
            )));
        }
    }

    let label = raw.get("label").unwrap_or(experiment.name()).to_string();
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(Failure::config(format!(
            "label `{label}` must be non-empty and use only [A-Za-z0-9_-]"
        )));
    }

    let mut cfg = RunConfig {
        experiment,
        label,
        out_dir: raw.get("out_dir").map(String::from),
        threads: raw.usize("threads")?.unwrap_or(0),
        protocols: Vec::new(),
        n_pi: 0,
        n_pi_list: Vec::new(),
        tau_s: 0.0,
        mode: PulseMode::Ideal,
        omega_dd: 0.0,
        omega_rf: 0.0,
        phi_rf: PI / 2.0,
        delta: 0.0,
        delta_grid: Vec::new(),
        tau_grid: Vec::new(),
        durations: Vec::new(),
        duration_s: 0.0,
        theta0: 0.0,
        prep: Prep::y(),
        model: dephasing_model(&raw)?,
        carrier: 0.0,
        t_max_s: 0.0,
        dt_s: 0.0,
        raw: raw.0.clone(),
    };

    match experiment {
        Experiment::ScanDelta => {
            cfg.protocols = protocols(&raw, true)?;
            cfg.n_pi = raw.require_usize("n_pi")?;
            cfg.tau_s = raw.require_positive("tau_s")?;
            cfg.mode = pulse_mode(&raw)?;
            cfg.omega_rf = TWO_PI * raw.require_non_negative("omega_rf_hz")?;
            cfg.phi_rf = phi_rf(&raw)?;
            cfg.delta_grid = delta_grid(&raw)?;
        }
        Experiment::Map => {
            cfg.protocols = protocols(&raw, false)?;
            cfg.n_pi = raw.require_usize("n_pi")?;
            cfg.mode = pulse_mode(&raw)?;
            cfg.omega_rf = TWO_PI * raw.require_non_negative("omega_rf_hz")?;
            cfg.delta_grid = delta_grid(&raw)?;
            cfg.tau_grid = tau_grid(&raw)?;
        }
        Experiment::Linewidth => {
            cfg.protocols = protocols(&raw, false)?;
            cfg.n_pi_list = n_pi_list(&raw)?;
            cfg.tau_s = raw.require_positive("tau_s")?;
            cfg.mode = pulse_mode(&raw)?;
            cfg.omega_rf = TWO_PI * raw.require_non_negative("omega_rf_hz")?;
            cfg.phi_rf = phi_rf(&raw)?;
        }
        Experiment::Rabi => {
            cfg.protocols = protocols(&raw, false)?;
            cfg.n_pi_list = n_pi_list(&raw)?;
            cfg.tau_s = raw.require_positive("tau_s")?;
            cfg.mode = pulse_mode(&raw)?;
            cfg.omega_rf = TWO_PI * raw.require_non_negative("omega_rf_hz")?;
            cfg.phi_rf = phi_rf(&raw)?;
            cfg.delta = TWO_PI * raw.require_f64("delta_hz")?;
        }
        Experiment::Breakdown => {
            cfg.protocols = protocols(&raw, false)?;
            cfg.n_pi = raw.require_usize("n_pi")?;
            cfg.theta0 = raw.require_positive("theta0_rad")?;
            cfg.tau_grid = tau_grid(&raw)?;
        }
        Experiment::CwTrace => {
            cfg.omega_dd = TWO_PI * raw.require_positive("omega_dd_hz")?;
            cfg.omega_rf = TWO_PI * raw.require_non_negative("omega_rf_hz")?;
            cfg.phi_rf = phi_rf(&raw)?;
            cfg.delta = TWO_PI * raw.require_f64("delta_hz")?;
            cfg.durations = duration_grid(&raw)?;
            cfg.prep = prep(&raw)?;
        }
        Experiment::CwScan => {
            cfg.omega_dd = TWO_PI * raw.require_positive("omega_dd_hz")?;
            cfg.omega_rf = TWO_PI * raw.require_non_negative("omega_rf_hz")?;
            cfg.phi_rf = phi_rf(&raw)?;
            cfg.duration_s = raw.require_positive("duration_s")?;
            cfg.delta_grid = delta_grid(&raw)?;
            cfg.prep = prep(&raw)?;
        }
        Experiment::Fid => {
            cfg.carrier = TWO_PI * raw.require_f64("carrier_hz")?;
            cfg.t_max_s = raw.require_positive("t_max_s")?;
            cfg.dt_s = raw.require_positive("dt_s")?;
        }
    }

    Ok(cfg)
}

fn protocols(raw: &Raw, allow_all: bool) -> Result<Vec<Protocol>, Failure> {
    let name = raw.require("protocol")?;
    if name == "all" {
        if allow_all {
            return Ok(Protocol::all().to_vec());
        }
        return Err(Failure::config(
            "protocol `all` is only supported by scan_delta",
        ));
    }
    Ok(vec![
        Protocol::parse(name).map_err(|e| Failure::config(e.to_string()))?
    ])
}

fn n_pi_list(raw: &Raw) -> Result<Vec<usize>, Failure> {
    let text = raw.require("n_pi_list")?;
    let list: Vec<usize> = text
        .split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| {
                Failure::config(format!("key `n_pi_list`: `{tok}` is not a pulse count"))
            })
        })
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(Failure::config(
            "key `n_pi_list` must list at least one count",
        ));
    }
    Ok(list)
}

/// Pulsed-sequence mode: `ideal` (default) or `finite` with `omega_dd_hz`.
fn pulse_mode(raw: &Raw) -> Result<PulseMode, Failure> {
    match raw.get("mode").unwrap_or("ideal") {
        "ideal" => {
            if raw.get("omega_dd_hz").is_some() {
                return Err(Failure::config(
                    "key `omega_dd_hz` requires `mode = finite`",
                ));
            }
            Ok(PulseMode::Ideal)
        }
        "finite" => Ok(PulseMode::Finite {
            omega_dd: TWO_PI * raw.require_positive("omega_dd_hz")?,
        }),
        other => Err(Failure::config(format!(
            "key `mode`: `{other}` is not one of ideal|finite"
        ))),
    }
}

fn phi_rf(raw: &Raw) -> Result<f64, Failure> {
    Ok(raw.f64("phi_rf_rad")?.unwrap_or(PI / 2.0))
}

fn prep(raw: &Raw) -> Result<Prep, Failure> {
    match raw.get("prep").unwrap_or("y") {
        "y" => Ok(Prep::y()),
        "x" => Ok(Prep::x()),
        other => Err(Failure::config(format!(
            "key `prep`: `{other}` is not one of x|y"
        ))),
    }
}

fn delta_grid(raw: &Raw) -> Result<Vec<f64>, Failure> {
    let start = raw.require_f64("delta_start_hz")?;
    let stop = raw.require_f64("delta_stop_hz")?;
    let n = raw.points("delta_points")?;
    if start >= stop {
        return Err(Failure::config(
            "delta grid requires delta_start_hz < delta_stop_hz",
        ));
    }
    Ok(linspace(TWO_PI * start, TWO_PI * stop, n))
}

fn tau_grid(raw: &Raw) -> Result<Vec<f64>, Failure> {
    let start = raw.require_positive("tau_start_s")?;
    let stop = raw.require_positive("tau_stop_s")?;
    let n = raw.points("tau_points")?;
    if start >= stop {
        return Err(Failure::config(
            "tau grid requires tau_start_s < tau_stop_s",
        ));
    }
    match raw.get("tau_spacing").unwrap_or("linear") {
        "linear" => Ok(linspace(start, stop, n)),
        "geom" => Ok(geomspace(start, stop, n)),
        other => Err(Failure::config(format!(
            "key `tau_spacing`: `{other}` is not one of linear|geom"
        ))),
    }
}

fn duration_grid(raw: &Raw) -> Result<Vec<f64>, Failure> {
    let start = raw.require_positive("duration_start_s")?;
    let stop = raw.require_positive("duration_stop_s")?;
    let n = raw.points("duration_points")?;
    if start >= stop {
        return Err(Failure::config(
            "duration grid requires duration_start_s < duration_stop_s",
        ));
    }
    Ok(linspace(start, stop, n))
}

/// `t2_star_s` and `sigma_f_hz` are two spellings of the same width; exactly
/// one may be given. `nodes` (default 21) only makes sense alongside one.
fn dephasing_model(raw: &Raw) -> Result<DephasingModel, Failure> {
    let t2 = raw.f64("t2_star_s")?;
    let sigma = raw.f64("sigma_f_hz")?;
    let nodes = raw.usize("nodes")?;
    match (t2, sigma) {
        (Some(_), Some(_)) => Err(Failure::config(
            "give either t2_star_s or sigma_f_hz, not both",
        )),
        (Some(t2), None) => Ok(DephasingModel::from_t2_star(t2, nodes.unwrap_or(21))?),
        (None, Some(s)) => Ok(DephasingModel::new(s, nodes.unwrap_or(21))?),
        (None, None) => {
            if nodes.is_some() {
                return Err(Failure::config(
                    "key `nodes` requires t2_star_s or sigma_f_hz",
                ));
            }
            Ok(DephasingModel::none())
        }
    }
}
