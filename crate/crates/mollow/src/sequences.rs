//! Declarative pulse-program construction: prep/readout framing plus
//! builders for the decoupling protocols and the CW sideband drive.
//!
//! A [`PulseSequence`] is an immutable program: an optional (π/2) prep
//! pulse, an ordered body of [`PulseSegment`]s, and a readout-flip flag.
//! Protocol builders produce the standard spacing — π pulses centered at
//! `(k + 1/2)·τ` with τ/2 free-evolution edges, so the body duration is
//! exactly `n_pi·τ`.
//!
//! Two pulse modes exist: `Finite` models π pulses of duration
//! `t_π = π/Ω_dd`; `Ideal` is the `t_π → 0` limit (instantaneous unitaries,
//! spacing measured center-to-center), in which the analytic resonance
//! conditions such as `Δ = π/τ` hold exactly.
//!
//! Sequences serialize to a flat, diffable text format, one segment per
//! line: `kind duration_s amplitude_rad_s phase_rad label`, with `#%`
//! metadata headers; parsing round-trips field-by-field.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::fmt;

/// Absolute tolerance on pulse area (rad) for validation.
pub const AREA_TOLERANCE: f64 = 1e-9;
/// Relative tolerance on pulse spacing for validation.
pub const SPACING_RELATIVE_TOLERANCE: f64 = 1e-9;

/// Segment kinds. Drive pulses are split by rotation angle (π vs π/2);
/// `CwDrive` is a continuous drive evolved concurrently with the signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    PiPulse,
    HalfPiPulse,
    SignalWindow,
    Idle,
    CwDrive,
}

impl SegmentKind {
    fn token(&self) -> &'static str {
        match self {
            SegmentKind::PiPulse => "pi",
            SegmentKind::HalfPiPulse => "half_pi",
            SegmentKind::SignalWindow => "signal",
            SegmentKind::Idle => "idle",
            SegmentKind::CwDrive => "cw",
        }
    }

    fn from_token(tok: &str) -> Result<Self> {
        Ok(match tok {
            "pi" => SegmentKind::PiPulse,
            "half_pi" => SegmentKind::HalfPiPulse,
            "signal" => SegmentKind::SignalWindow,
            "idle" => SegmentKind::Idle,
            "cw" => SegmentKind::CwDrive,
            other => return Err(Error::parse(format!("unknown segment kind `{other}`"))),
        })
    }
}

/// One timed segment of a pulse program.
///
/// Field meaning by kind:
/// - pulses (`PiPulse`, `HalfPiPulse`, `CwDrive`): `amplitude` is the drive
///   Rabi frequency (rad/s; 0 for ideal zero-duration pulses), `phase` is
///   the carrier phase at the segment start (before frame precession), and
///   `label` is the axis tag `X`/`Y`/`-X`/`-Y`.
/// - `SignalWindow`: `phase` is the per-window signal phase offset of the
///   phase-switching program (0 where unused); amplitude is 0 — the signal
///   strength is a run parameter, not a sequence property.
/// - `Idle`: free evolution; all fields but `duration` are 0/empty.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    pub duration: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub label: String,
}

impl PulseSegment {
    fn window(duration: f64, phase_offset: f64) -> Self {
        PulseSegment {
            kind: SegmentKind::SignalWindow,
            duration,
            amplitude: 0.0,
            phase: phase_offset,
            label: String::new(),
        }
    }

    fn idle(duration: f64) -> Self {
        PulseSegment {
            kind: SegmentKind::Idle,
            duration,
            amplitude: 0.0,
            phase: 0.0,
            label: String::new(),
        }
    }

    fn pulse(kind: SegmentKind, axis: &str, mode: PulseMode) -> Self {
        let angle = match kind {
            SegmentKind::PiPulse => PI,
            SegmentKind::HalfPiPulse => PI / 2.0,
            _ => unreachable!("pulse() is only called for pulse kinds"),
        };
        let (duration, amplitude) = match mode {
            PulseMode::Ideal => (0.0, 0.0),
            PulseMode::Finite { omega_dd } => (angle / omega_dd, omega_dd),
        };
        PulseSegment {
            kind,
            duration,
            amplitude,
            phase: axis_phase(axis).expect("builder uses canonical axis labels"),
            label: axis.to_string(),
        }
    }

    /// True for π and π/2 drive pulses (not CW).
    pub fn is_sharp_pulse(&self) -> bool {
        matches!(self.kind, SegmentKind::PiPulse | SegmentKind::HalfPiPulse)
    }
}

/// Carrier phase of a canonical axis label.
pub fn axis_phase(label: &str) -> Option<f64> {
    match label {
        "X" => Some(0.0),
        "Y" => Some(PI / 2.0),
        "-X" => Some(PI),
        "-Y" => Some(1.5 * PI),
        _ => None,
    }
}

/// Decoupling protocol of a built sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Cpmg,
    Xy4,
    Xy8,
    /// XY8 with the per-window signal phase-switching program; its intended
    /// resonance is Δ = 0.
    Xy8PhaseSwitched,
}

impl Protocol {
    /// Number of π pulses per protocol block.
    pub fn block_size(&self) -> usize {
        match self {
            Protocol::Cpmg => 1,
            Protocol::Xy4 => 4,
            Protocol::Xy8 | Protocol::Xy8PhaseSwitched => 8,
        }
    }

    /// Axis-label pattern of one block.
    pub fn axis_pattern(&self) -> &'static [&'static str] {
        match self {
            Protocol::Cpmg => &["X"],
            Protocol::Xy4 => &["X", "Y", "X", "Y"],
            Protocol::Xy8 | Protocol::Xy8PhaseSwitched => &["X", "Y", "X", "Y", "Y", "X", "Y", "X"],
        }
    }

    /// Whether the per-window phase-switching program is applied.
    pub fn phase_switching(&self) -> bool {
        matches!(self, Protocol::Xy8PhaseSwitched)
    }

    /// The protocol's resonance detuning for pulse spacing `tau`.
    pub fn resonance_delta(&self, tau: f64) -> f64 {
        match self {
            Protocol::Cpmg => PI / tau,
            Protocol::Xy4 | Protocol::Xy8 => PI / (2.0 * tau),
            Protocol::Xy8PhaseSwitched => 0.0,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "cpmg" => Protocol::Cpmg,
            "xy4" => Protocol::Xy4,
            "xy8" => Protocol::Xy8,
            "xy8-ps" => Protocol::Xy8PhaseSwitched,
            other => {
                return Err(Error::parse(format!(
                    "unknown protocol `{other}` (expected cpmg|xy4|xy8|xy8-ps)"
                )))
            }
        })
    }

    pub fn all() -> [Protocol; 4] {
        [
            Protocol::Cpmg,
            Protocol::Xy4,
            Protocol::Xy8,
            Protocol::Xy8PhaseSwitched,
        ]
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Protocol::Cpmg => "cpmg",
            Protocol::Xy4 => "xy4",
            Protocol::Xy8 => "xy8",
            Protocol::Xy8PhaseSwitched => "xy8-ps",
        };
        f.write_str(s)
    }
}

/// Drive-pulse timing model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseMode {
    /// Instantaneous pulses (`t_π → 0`); spacing measured center-to-center.
    Ideal,
    /// Finite pulses of duration `t_π = π/omega_dd` at Rabi rate `omega_dd`.
    Finite { omega_dd: f64 },
}

/// Preparation pulse: a π/2 rotation about the in-plane axis at `phase`
/// (π/2 = the Y axis, taking `|0⟩` to `+x̂`), applied as an instantaneous
/// unitary before the body clock starts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prep {
    pub phase: f64,
}

impl Prep {
    /// The default (π/2)_Y preparation.
    pub fn y() -> Self {
        Prep { phase: PI / 2.0 }
    }

    /// (π/2)_X preparation (used for central-line CW response).
    pub fn x() -> Self {
        Prep { phase: 0.0 }
    }
}

/// Signal parameters a CW sideband sequence was designed for. Recorded by
/// the builder as bookkeeping metadata; the engine always takes the actual
/// signal parameters from the run, not from the sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CwSignalHint {
    pub omega_rf: f64,
    pub delta: f64,
}

/// An immutable pulse program.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pub prep: Option<Prep>,
    pub body: Vec<PulseSegment>,
    /// Apply an extra π pulse before readout (differential readout).
    pub readout_flip: bool,
    pub protocol: Option<Protocol>,
    /// Number of π pulses in the body.
    pub n_pi: usize,
    /// Nominal pulse spacing (seconds); 0 for non-protocol sequences.
    pub tau: f64,
    pub mode: PulseMode,
    pub cw_hint: Option<CwSignalHint>,
}

impl PulseSequence {
    /// Total body duration (sum of segment durations).
    pub fn total_duration(&self) -> f64 {
        self.body.iter().map(|s| s.duration).sum()
    }

    /// Total signal exposure: the summed duration of signal windows only
    /// (the signal is off during drive pulses).
    pub fn signal_exposure(&self) -> f64 {
        self.body
            .iter()
            .filter(|s| s.kind == SegmentKind::SignalWindow)
            .map(|s| s.duration)
            .sum()
    }

    /// Number of π-pulse segments in the body.
    pub fn pi_pulse_count(&self) -> usize {
        self.body
            .iter()
            .filter(|s| s.kind == SegmentKind::PiPulse)
            .count()
    }

    /// Copy with a different readout-flip flag.
    pub fn with_readout_flip(&self, flip: bool) -> Self {
        let mut seq = self.clone();
        seq.readout_flip = flip;
        seq
    }
}

fn check_common(n_pi: usize, tau: f64, mode: PulseMode) -> Result<()> {
    if n_pi == 0 {
        return Err(Error::invalid("n_pi must be at least 1"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau must be positive and finite"));
    }
    if let PulseMode::Finite { omega_dd } = mode {
        if !(omega_dd.is_finite() && omega_dd > 0.0) {
            return Err(Error::invalid("omega_dd must be positive and finite"));
        }
        let t_pi = PI / omega_dd;
        if t_pi >= tau {
            return Err(Error::invalid(format!(
                "pulse spacing tau = {tau:.3e} s must exceed the pi-pulse duration {t_pi:.3e} s"
            )));
        }
    }
    Ok(())
}

/// Build a decoupling sequence for any protocol and pulse mode.
///
/// The body is `n_pi + 1` signal windows interleaved with `n_pi` π pulses:
/// pulse centers at `(k + 1/2)·τ`, edge windows of τ/2, total duration
/// exactly `n_pi·τ`. `n_pi` must be a positive multiple of the protocol's
/// block size. For the phase-switched XY8 variant, window phase offsets of
/// π are applied wherever the sensitivity sign is negative, so every window
/// contributes to the rotation with a single sign at Δ = 0.
pub fn build_protocol(
    protocol: Protocol,
    n_pi: usize,
    tau: f64,
    mode: PulseMode,
) -> Result<PulseSequence> {
    check_common(n_pi, tau, mode)?;
    let block = protocol.block_size();
    if !n_pi.is_multiple_of(block) {
        return Err(Error::invalid(format!(
            "n_pi = {n_pi} must be a multiple of the {protocol} block size {block}"
        )));
    }
    let pattern = protocol.axis_pattern();
    let t_pi = match mode {
        PulseMode::Ideal => 0.0,
        PulseMode::Finite { omega_dd } => PI / omega_dd,
    };
    let edge = 0.5 * (tau - t_pi);
    let interior = tau - t_pi;

    let mut body = Vec::with_capacity(2 * n_pi + 1);
    let mut g_sign = 1i8; // sensitivity sign of the upcoming window
    for k in 0..=n_pi {
        let duration = if k == 0 || k == n_pi { edge } else { interior };
        let offset = if protocol.phase_switching() && g_sign < 0 {
            PI
        } else {
            0.0
        };
        body.push(PulseSegment::window(duration, offset));
        if k < n_pi {
            let axis = pattern[k % pattern.len()];
            body.push(PulseSegment::pulse(SegmentKind::PiPulse, axis, mode));
            if axis == "X" || axis == "-X" {
                g_sign = -g_sign;
            }
        }
    }

    Ok(PulseSequence {
        prep: Some(Prep::y()),
        body,
        readout_flip: false,
        protocol: Some(protocol),
        n_pi,
        tau,
        mode,
        cw_hint: None,
    })
}

/// CPMG: `n_pi` X-axis π pulses spaced τ (τ/2 edges), finite pulses at
/// Rabi rate `omega_dd`.
pub fn build_cpmg(n_pi: usize, tau: f64, omega_dd: f64) -> Result<PulseSequence> {
    build_protocol(Protocol::Cpmg, n_pi, tau, PulseMode::Finite { omega_dd })
}

/// XY4: axis pattern X,Y,X,Y per block of 4.
pub fn build_xy4(n_blocks: usize, tau: f64, omega_dd: f64) -> Result<PulseSequence> {
    build_protocol(
        Protocol::Xy4,
        n_blocks
            .checked_mul(4)
            .ok_or_else(|| Error::invalid("n_blocks overflow"))?,
        tau,
        PulseMode::Finite { omega_dd },
    )
}

/// XY8: axis pattern X,Y,X,Y,Y,X,Y,X per block of 8, with or without the
/// per-window signal phase-switching program.
pub fn build_xy8(
    n_blocks: usize,
    tau: f64,
    omega_dd: f64,
    phase_switching: bool,
) -> Result<PulseSequence> {
    let protocol = if phase_switching {
        Protocol::Xy8PhaseSwitched
    } else {
        Protocol::Xy8
    };
    build_protocol(
        protocol,
        n_blocks
            .checked_mul(8)
            .ok_or_else(|| Error::invalid("n_blocks overflow"))?,
        tau,
        PulseMode::Finite { omega_dd },
    )
}

/// Continuous drive along X for sideband spectroscopy. The duration is
/// rounded to the nearest integer multiple of a π rotation (`π/omega_dd`)
/// and the rounded value is recorded in the sequence. The weak signal
/// coexists with the drive in time; its intended parameters are recorded as
/// a hint, but the engine always takes the actual signal from the run.
pub fn build_cw_sideband(
    duration: f64,
    omega_dd: f64,
    omega_rf: f64,
    delta: f64,
) -> Result<PulseSequence> {
    if !(omega_dd.is_finite() && omega_dd > 0.0) {
        return Err(Error::invalid("cw drive amplitude must be positive"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid("cw duration must be positive"));
    }
    if !(omega_rf.is_finite() && omega_rf >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(
            "cw signal hint must be finite, omega_rf >= 0",
        ));
    }
    let t_pi = PI / omega_dd;
    let n_rot = (duration / t_pi).round();
    if n_rot < 1.0 {
        return Err(Error::invalid(format!(
            "cw duration {duration:.3e} s rounds to zero pi rotations (pi rotation = {t_pi:.3e} s)"
        )));
    }
    let rounded = n_rot * t_pi;
    let body = vec![PulseSegment {
        kind: SegmentKind::CwDrive,
        duration: rounded,
        amplitude: omega_dd,
        phase: 0.0,
        label: "X".to_string(),
    }];
    Ok(PulseSequence {
        prep: Some(Prep::y()),
        body,
        readout_flip: false,
        protocol: None,
        n_pi: 0,
        tau: 0.0,
        mode: PulseMode::Finite { omega_dd },
        cw_hint: Some(CwSignalHint { omega_rf, delta }),
    })
}

/// Ramsey frame for free-induction decay: (π/2)_Y prep, free evolution for
/// `duration`, closing (π/2)_Y pulse (ideal timing).
pub fn build_ramsey(duration: f64) -> Result<PulseSequence> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("ramsey duration must be non-negative"));
    }
    let body = vec![
        PulseSegment::idle(duration),
        PulseSegment::pulse(SegmentKind::HalfPiPulse, "Y", PulseMode::Ideal),
    ];
    Ok(PulseSequence {
        prep: Some(Prep::y()),
        body,
        readout_flip: false,
        protocol: None,
        n_pi: 0,
        tau: 0.0,
        mode: PulseMode::Ideal,
        cw_hint: None,
    })
}

/// Severity of a validation finding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    /// The sequence violates an invariant and must not be run.
    Error,
    /// The sequence is runnable but has a documented structural caveat.
    Advisory,
}

/// One validation finding: severity, offending segment (if localized), and
/// the violated rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub severity: Severity,
    pub segment: Option<usize>,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Advisory => "advisory",
        };
        match self.segment {
            Some(i) => write!(f, "[{sev}] segment {i}: {}", self.rule),
            None => write!(f, "[{sev}] {}", self.rule),
        }
    }
}

fn violation(severity: Severity, segment: Option<usize>, rule: impl Into<String>) -> Violation {
    Violation {
        severity,
        segment,
        rule: rule.into(),
    }
}

/// Check all sequence invariants; returns an empty list iff the sequence is
/// well-formed with no caveats. Violations are data, not errors.
pub fn validate(seq: &PulseSequence) -> Vec<Violation> {
    let mut out = Vec::new();

    for (i, seg) in seq.body.iter().enumerate() {
        if !seg.duration.is_finite() || seg.duration < 0.0 {
            out.push(violation(
                Severity::Error,
                Some(i),
                format!("segment duration {} must be finite and >= 0", seg.duration),
            ));
        }
        if seg.is_sharp_pulse() {
            match axis_phase(&seg.label) {
                None => out.push(violation(
                    Severity::Error,
                    Some(i),
                    format!("pulse label `{}` is not one of X, Y, -X, -Y", seg.label),
                )),
                Some(canon) => {
                    if (seg.phase - canon).abs() > 1e-12 {
                        out.push(violation(
                            Severity::Error,
                            Some(i),
                            format!(
                                "pulse phase {:.6} does not match label `{}` (expected {:.6})",
                                seg.phase, seg.label, canon
                            ),
                        ));
                    }
                }
            }
            if seg.duration > 0.0 {
                let target = match seg.kind {
                    SegmentKind::PiPulse => PI,
                    _ => PI / 2.0,
                };
                let area = seg.amplitude * seg.duration;
                if (area - target).abs() > AREA_TOLERANCE {
                    out.push(violation(
                        Severity::Error,
                        Some(i),
                        format!("pulse area {area:.12} differs from {target:.12} by more than {AREA_TOLERANCE:.0e}"),
                    ));
                }
            }
        }
        if seg.kind == SegmentKind::CwDrive {
            if seg.amplitude <= 0.0 {
                out.push(violation(
                    Severity::Error,
                    Some(i),
                    "cw drive amplitude must be positive",
                ));
            } else {
                let rotations = seg.duration * seg.amplitude / PI;
                if (rotations - rotations.round()).abs() > 1e-9 {
                    out.push(violation(
                        Severity::Error,
                        Some(i),
                        format!(
                            "cw duration is {rotations:.6} pi rotations; must be an integer multiple"
                        ),
                    ));
                }
            }
        }
    }

    let actual_n_pi = seq.pi_pulse_count();
    if actual_n_pi != seq.n_pi {
        out.push(violation(
            Severity::Error,
            None,
            format!(
                "sequence declares n_pi = {} but contains {} pi pulses",
                seq.n_pi, actual_n_pi
            ),
        ));
    }

    // Pulse-spacing check for protocol sequences: π-pulse centers must sit
    // at (k + 1/2)·τ, i.e. consecutive center gaps equal τ and the edges
    // equal τ/2. Each deviant gap is one violation.
    if seq.protocol.is_some() && seq.tau > 0.0 {
        let tol = SPACING_RELATIVE_TOLERANCE * seq.tau;
        let mut centers = Vec::with_capacity(seq.n_pi);
        let mut t = 0.0;
        let mut seg_of_center = Vec::with_capacity(seq.n_pi);
        for (i, seg) in seq.body.iter().enumerate() {
            if seg.kind == SegmentKind::PiPulse {
                centers.push(t + 0.5 * seg.duration);
                seg_of_center.push(i);
            }
            t += seg.duration;
        }
        let total = t;
        if let (Some(first), Some(last)) = (centers.first(), centers.last()) {
            if (first - 0.5 * seq.tau).abs() > tol {
                out.push(violation(
                    Severity::Error,
                    Some(seg_of_center[0]),
                    format!(
                        "first pulse center at {first:.6e} s, expected tau/2 = {:.6e} s",
                        0.5 * seq.tau
                    ),
                ));
            }
            if ((total - last) - 0.5 * seq.tau).abs() > tol {
                out.push(violation(
                    Severity::Error,
                    Some(*seg_of_center.last().unwrap()),
                    format!(
                        "last pulse center {:.6e} s before sequence end, expected tau/2 = {:.6e} s",
                        total - last,
                        0.5 * seq.tau
                    ),
                ));
            }
        }
        for (k, pair) in centers.windows(2).enumerate() {
            let gap = pair[1] - pair[0];
            if (gap - seq.tau).abs() > tol {
                out.push(violation(
                    Severity::Error,
                    Some(seg_of_center[k + 1]),
                    format!(
                        "pulse spacing {gap:.6e} s differs from tau = {:.6e} s",
                        seq.tau
                    ),
                ));
            }
        }
    }

    // XY8 without phase switching: its X-axis pulses are unequally spaced
    // (gaps of 2τ and 3τ), so a signal with no per-window phase control
    // cannot accumulate with a single sign. Runnable, but flagged.
    if seq.protocol == Some(Protocol::Xy8) {
        out.push(violation(
            Severity::Advisory,
            None,
            "xy8 requires per-window phase switching for single-sign signal accumulation; \
             without it, use the sideband resonance at delta = pi/(2 tau)",
        ));
    }

    out
}

/// Error out if validation produced any `Error`-severity violation.
pub fn assert_valid(seq: &PulseSequence) -> Result<()> {
    let errors: Vec<String> = validate(seq)
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .map(|v| v.to_string())
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "sequence validation failed: {}",
            errors.join("; ")
        )))
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::parse(format!("cannot parse {what} from `{tok}`")))
}

/// Serialize to the flat text format (ASCII, space-separated, exact
/// round-trip: floats are written with 17 significant digits).
pub fn serialize(seq: &PulseSequence) -> String {
    let mut s = String::new();
    s.push_str("#%format mollow-seq-v1\n");
    match seq.protocol {
        Some(p) => s.push_str(&format!("#%protocol {p}\n")),
        None => s.push_str("#%protocol none\n"),
    }
    s.push_str(&format!("#%n_pi {}\n", seq.n_pi));
    s.push_str(&format!("#%tau_s {}\n", fmt_f64(seq.tau)));
    match seq.mode {
        PulseMode::Ideal => s.push_str("#%mode ideal\n"),
        PulseMode::Finite { omega_dd } => {
            s.push_str("#%mode finite\n");
            s.push_str(&format!("#%omega_dd_rad_s {}\n", fmt_f64(omega_dd)));
        }
    }
    match seq.prep {
        Some(p) => s.push_str(&format!("#%prep_phase_rad {}\n", fmt_f64(p.phase))),
        None => s.push_str("#%prep none\n"),
    }
    s.push_str(&format!("#%readout_flip {}\n", seq.readout_flip));
    if let Some(h) = seq.cw_hint {
        s.push_str(&format!("#%cw_omega_rf_rad_s {}\n", fmt_f64(h.omega_rf)));
        s.push_str(&format!("#%cw_delta_rad_s {}\n", fmt_f64(h.delta)));
    }
    for seg in &seq.body {
        let label = if seg.label.is_empty() {
            "-"
        } else {
            &seg.label
        };
        s.push_str(&format!(
            "{} {} {} {} {}\n",
            seg.kind.token(),
            fmt_f64(seg.duration),
            fmt_f64(seg.amplitude),
            fmt_f64(seg.phase),
            label
        ));
    }
    s
}

/// Parse the flat text format produced by [`serialize`].
pub fn parse(text: &str) -> Result<PulseSequence> {
    let mut protocol: Option<Protocol> = None;
    let mut saw_format = false;
    let mut n_pi: Option<usize> = None;
    let mut tau: Option<f64> = None;
    let mut mode_tok: Option<String> = None;
    let mut omega_dd: Option<f64> = None;
    let mut prep: Option<Option<Prep>> = None;
    let mut readout_flip: Option<bool> = None;
    let mut cw_omega_rf: Option<f64> = None;
    let mut cw_delta: Option<f64> = None;
    let mut body = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix("#%") {
            let mut it = meta.splitn(2, ' ');
            let key = it.next().unwrap_or("");
            let val = it.next().unwrap_or("").trim();
            match key {
                "format" => {
                    if val != "mollow-seq-v1" {
                        return Err(Error::parse(format!("unsupported format `{val}`")));
                    }
                    saw_format = true;
                }
                "protocol" => {
                    protocol = if val == "none" {
                        None
                    } else {
                        Some(Protocol::parse(val)?)
                    };
                }
                "n_pi" => {
                    n_pi =
                        Some(val.parse::<usize>().map_err(|_| {
                            Error::parse(format!("line {}: bad n_pi `{val}`", ln + 1))
                        })?);
                }
                "tau_s" => tau = Some(parse_f64(val, "tau_s")?),
                "mode" => mode_tok = Some(val.to_string()),
                "omega_dd_rad_s" => omega_dd = Some(parse_f64(val, "omega_dd_rad_s")?),
                "prep_phase_rad" => {
                    prep = Some(Some(Prep {
                        phase: parse_f64(val, "prep_phase_rad")?,
                    }))
                }
                "prep" => {
                    if val == "none" {
                        prep = Some(None);
                    } else {
                        return Err(Error::parse(format!("line {}: bad prep `{val}`", ln + 1)));
                    }
                }
                "readout_flip" => {
                    readout_flip = Some(val.parse::<bool>().map_err(|_| {
                        Error::parse(format!("line {}: bad readout_flip `{val}`", ln + 1))
                    })?);
                }
                "cw_omega_rf_rad_s" => cw_omega_rf = Some(parse_f64(val, "cw_omega_rf_rad_s")?),
                "cw_delta_rad_s" => cw_delta = Some(parse_f64(val, "cw_delta_rad_s")?),
                other => {
                    return Err(Error::parse(format!(
                        "line {}: unknown metadata key `{other}`",
                        ln + 1
                    )))
                }
            }
            continue;
        }
        if line.starts_with('#') {
            continue; // plain comment
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(format!(
                "line {}: expected 5 fields `kind duration amplitude phase label`, got {}",
                ln + 1,
                fields.len()
            )));
        }
        let kind = SegmentKind::from_token(fields[0])?;
        let label = if fields[4] == "-" {
            String::new()
        } else {
            fields[4].to_string()
        };
        body.push(PulseSegment {
            kind,
            duration: parse_f64(fields[1], "duration")?,
            amplitude: parse_f64(fields[2], "amplitude")?,
            phase: parse_f64(fields[3], "phase")?,
            label,
        });
    }

    if !saw_format {
        return Err(Error::parse("missing `#%format mollow-seq-v1` header"));
    }
    let mode = match mode_tok.as_deref() {
        Some("ideal") => PulseMode::Ideal,
        Some("finite") => PulseMode::Finite {
            omega_dd: omega_dd
                .ok_or_else(|| Error::parse("finite mode requires omega_dd_rad_s"))?,
        },
        Some(other) => return Err(Error::parse(format!("unknown mode `{other}`"))),
        None => return Err(Error::parse("missing `#%mode` header")),
    };
    let cw_hint = match (cw_omega_rf, cw_delta) {
        (Some(omega_rf), Some(delta)) => Some(CwSignalHint { omega_rf, delta }),
        (None, None) => None,
        _ => {
            return Err(Error::parse(
                "cw hint requires both cw_omega_rf_rad_s and cw_delta_rad_s",
            ))
        }
    };
    Ok(PulseSequence {
        prep: prep.ok_or_else(|| Error::parse("missing `#%prep_phase_rad` or `#%prep none`"))?,
        body,
        readout_flip: readout_flip.ok_or_else(|| Error::parse("missing `#%readout_flip`"))?,
        protocol,
        n_pi: n_pi.ok_or_else(|| Error::parse("missing `#%n_pi`"))?,
        tau: tau.ok_or_else(|| Error::parse("missing `#%tau_s`"))?,
        mode,
        cw_hint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const OMEGA_DD: f64 = 2.0 * PI * 25e6; // 20 ns π pulse

    #[test]
    fn cpmg_n1_is_hahn_echo_shape() {
        let seq = build_protocol(Protocol::Cpmg, 1, 100e-9, PulseMode::Ideal).unwrap();
        let kinds: Vec<_> = seq.body.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            vec![
                SegmentKind::SignalWindow,
                SegmentKind::PiPulse,
                SegmentKind::SignalWindow
            ]
        );
        assert_abs_diff_eq!(seq.body[0].duration, 50e-9, epsilon = 1e-18);
        assert_abs_diff_eq!(seq.body[2].duration, 50e-9, epsilon = 1e-18);
    }

    #[test]
    fn body_duration_is_n_tau_in_both_modes() {
        for mode in [PulseMode::Ideal, PulseMode::Finite { omega_dd: OMEGA_DD }] {
            let seq = build_protocol(Protocol::Cpmg, 8, 100e-9, mode).unwrap();
            assert_abs_diff_eq!(seq.total_duration(), 0.8e-6, epsilon = 1e-15);
        }
        let seq = build_cpmg(24, 43.6e-9, OMEGA_DD).unwrap();
        assert_abs_diff_eq!(seq.total_duration(), 24.0 * 43.6e-9, epsilon = 1e-15);
    }

    #[test]
    fn xy4_axis_pattern_and_orthogonal_spacing() {
        let seq = build_xy4(1, 100e-9, OMEGA_DD).unwrap();
        let labels: Vec<_> = seq
            .body
            .iter()
            .filter(|s| s.kind == SegmentKind::PiPulse)
            .map(|s| s.label.as_str())
            .collect();
        assert_eq!(labels, vec!["X", "Y", "X", "Y"]);

        // X pulses are 2τ apart.
        let mut t = 0.0;
        let mut x_centers = Vec::new();
        for seg in &seq.body {
            if seg.kind == SegmentKind::PiPulse && seg.label == "X" {
                x_centers.push(t + 0.5 * seg.duration);
            }
            t += seg.duration;
        }
        assert_eq!(x_centers.len(), 2);
        assert_abs_diff_eq!(x_centers[1] - x_centers[0], 200e-9, epsilon = 1e-15);
    }

    #[test]
    fn xy8_axis_pattern_and_block_count() {
        let seq = build_xy8(1, 100e-9, OMEGA_DD, false).unwrap();
        let labels: Vec<_> = seq
            .body
            .iter()
            .filter(|s| s.kind == SegmentKind::PiPulse)
            .map(|s| s.label.as_str())
            .collect();
        assert_eq!(labels, vec!["X", "Y", "X", "Y", "Y", "X", "Y", "X"]);

        let seq24 = build_xy8(3, 43.6e-9, OMEGA_DD, false).unwrap();
        assert_eq!(seq24.n_pi, 24);
        assert_eq!(seq24.pi_pulse_count(), 24);
    }

    #[test]
    fn xy8_phase_switch_program_follows_sensitivity_sign() {
        let seq = build_xy8(1, 100e-9, OMEGA_DD, true).unwrap();
        let offsets: Vec<f64> = seq
            .body
            .iter()
            .filter(|s| s.kind == SegmentKind::SignalWindow)
            .map(|s| s.phase)
            .collect();
        // g over windows: + - - + + + - - +  →  offsets π where negative.
        let expected = [0.0, PI, PI, 0.0, 0.0, 0.0, PI, PI, 0.0];
        assert_eq!(offsets.len(), expected.len());
        for (o, e) in offsets.iter().zip(expected) {
            assert_abs_diff_eq!(*o, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn finite_pulses_have_pi_area() {
        let seq = build_cpmg(4, 100e-9, OMEGA_DD).unwrap();
        for seg in seq.body.iter().filter(|s| s.kind == SegmentKind::PiPulse) {
            assert_abs_diff_eq!(seg.amplitude * seg.duration, PI, epsilon = 1e-12);
        }
        assert!(validate(&seq).is_empty());
    }

    #[test]
    fn tau_shorter_than_pulse_is_rejected() {
        // t_π = 20 ns: τ = 15 ns is impossible.
        assert!(build_cpmg(4, 15e-9, OMEGA_DD).is_err());
        // Ideal mode has no such limit.
        assert!(build_protocol(Protocol::Cpmg, 4, 15e-9, PulseMode::Ideal).is_ok());
    }

    #[test]
    fn block_size_enforced() {
        assert!(build_protocol(Protocol::Xy4, 6, 100e-9, PulseMode::Ideal).is_err());
        assert!(build_protocol(Protocol::Xy8, 12, 100e-9, PulseMode::Ideal).is_err());
        assert!(build_protocol(Protocol::Xy8, 16, 100e-9, PulseMode::Ideal).is_ok());
    }

    #[test]
    fn well_formed_cpmg_validates_clean() {
        let seq = build_cpmg(8, 100e-9, OMEGA_DD).unwrap();
        assert!(validate(&seq).is_empty());
    }

    #[test]
    fn perturbed_spacing_yields_one_violation() {
        let mut seq = build_cpmg(8, 100e-9, OMEGA_DD).unwrap();
        // Perturb one interior window by 10%.
        let idx = seq
            .body
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SegmentKind::SignalWindow)
            .nth(3)
            .unwrap()
            .0;
        seq.body[idx].duration *= 1.1;
        let violations = validate(&seq);
        assert_eq!(violations.len(), 1, "violations: {violations:?}");
        assert_eq!(violations[0].severity, Severity::Error);
        assert!(violations[0].rule.contains("spacing"));
    }

    #[test]
    fn xy8_without_phase_switching_gets_advisory() {
        let seq = build_xy8(2, 100e-9, OMEGA_DD, false).unwrap();
        let v = validate(&seq);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Advisory);
        assert!(v[0].rule.contains("phase switching"));

        let ps = build_xy8(2, 100e-9, OMEGA_DD, true).unwrap();
        assert!(validate(&ps).is_empty());
    }

    #[test]
    fn cw_duration_rounds_to_pi_multiples() {
        let omega_dd = 2.0 * PI * 25e6;
        let t_pi = PI / omega_dd; // 20 ns
        let seq = build_cw_sideband(1.3e-6, omega_dd, 1e5, omega_dd).unwrap();
        let rot = seq.body[0].duration / t_pi;
        assert_abs_diff_eq!(rot, rot.round(), epsilon = 1e-9);
        assert_abs_diff_eq!(seq.body[0].duration, 1.3e-6, epsilon = t_pi);
        assert!(validate(&seq).is_empty());
    }

    #[test]
    fn cw_zero_amplitude_rejected() {
        assert!(build_cw_sideband(1e-6, 0.0, 1e5, 0.0).is_err());
        assert!(build_cw_sideband(1e-9, 2.0 * PI * 25e6, 1e5, 0.0).is_err()); // rounds to 0
    }

    #[test]
    fn serialize_round_trip_exact() {
        let seqs = vec![
            build_cpmg(24, 43.6e-9, OMEGA_DD).unwrap(),
            build_xy8(3, 43.6e-9, OMEGA_DD, true).unwrap(),
            build_protocol(Protocol::Xy4, 8, 77.7e-9, PulseMode::Ideal).unwrap(),
            build_cw_sideband(1.3e-6, OMEGA_DD, 2.0 * PI * 1e5, OMEGA_DD).unwrap(),
            build_ramsey(1.23e-6).unwrap(),
        ];
        for seq in seqs {
            let text = serialize(&seq);
            let back = parse(&text).unwrap();
            assert_eq!(seq, back);
        }
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse("pi 1 2 3 X\n").is_err()); // no header
        assert!(parse("#%format mollow-seq-v1\n#%bogus 1\n").is_err());
        let seq = build_cpmg(2, 100e-9, OMEGA_DD).unwrap();
        let mangled = serialize(&seq).replace("pi ", "quux ");
        assert!(parse(&mangled).is_err());
    }

    proptest! {
        #[test]
        fn prop_serialize_round_trip(
            proto_i in 0usize..4,
            blocks in 1usize..4,
            tau_ns in 30.0f64..500.0,
            ideal in proptest::bool::ANY,
            flip in proptest::bool::ANY,
        ) {
            let protocol = Protocol::all()[proto_i];
            let mode = if ideal { PulseMode::Ideal } else { PulseMode::Finite { omega_dd: OMEGA_DD } };
            let n_pi = protocol.block_size() * blocks;
            let seq = build_protocol(protocol, n_pi, tau_ns * 1e-9, mode)
                .unwrap()
                .with_readout_flip(flip);
            let back = parse(&serialize(&seq)).unwrap();
            prop_assert_eq!(seq, back);
        }

        #[test]
        fn prop_builders_satisfy_invariants(
            proto_i in 0usize..4,
            blocks in 1usize..5,
            tau_ns in 30.0f64..500.0,
        ) {
            let protocol = Protocol::all()[proto_i];
            let n_pi = protocol.block_size() * blocks;
            let tau = tau_ns * 1e-9;
            let seq = build_protocol(protocol, n_pi, tau, PulseMode::Finite { omega_dd: OMEGA_DD }).unwrap();
            prop_assert!((seq.total_duration() - n_pi as f64 * tau).abs() < 1e-15 * n_pi as f64);
            prop_assert!(validate(&seq).iter().all(|v| v.severity != Severity::Error));
        }
    }
}
