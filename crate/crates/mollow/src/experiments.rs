//! Experiment drivers: parameter scans over sequences, resonance/linewidth
//! extraction, Rabi traces, dephasing-breakdown sweeps, and CW traces.
//!
//! All scans evaluate points in parallel with deterministic, index-ordered
//! collection: results are bit-identical regardless of thread count.

use crate::dephasing::{ensemble_average, ensemble_average_with, DephasingModel};
pub use crate::engine::differential_readout;
use crate::engine::{readout, SignalParams};
use crate::error::{Error, Result};
use crate::frames::FrameConfig;
use crate::sequences::{build_cw_sideband, build_protocol, Prep, Protocol, PulseMode};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// A 1-D or 2-D scan result with named axes and run metadata.
///
/// `values` is row-major over `axis1` (and `axis2` when present):
/// `values[i * axis2.len() + j]` for 2-D scans, `values[i]` for 1-D.
#[derive(Clone, Debug)]
pub struct ScanResult {
    pub axis1_name: String,
    pub axis1: Vec<f64>,
    pub axis2_name: Option<String>,
    pub axis2: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl ScanResult {
    fn new_1d(axis1_name: &str, axis1: Vec<f64>, values: Vec<f64>) -> Self {
        ScanResult {
            axis1_name: axis1_name.to_string(),
            axis1,
            axis2_name: None,
            axis2: Vec::new(),
            values,
            metadata: BTreeMap::new(),
        }
    }

    fn new_2d(
        axis1_name: &str,
        axis1: Vec<f64>,
        axis2_name: &str,
        axis2: Vec<f64>,
        values: Vec<f64>,
    ) -> Self {
        ScanResult {
            axis1_name: axis1_name.to_string(),
            axis1,
            axis2_name: Some(axis2_name.to_string()),
            axis2,
            values,
            metadata: BTreeMap::new(),
        }
    }

    /// Value at `(i, j)` of a 2-D scan (or `(i, 0)` of a 1-D scan).
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if self.axis2.is_empty() {
            self.values[i]
        } else {
            self.values[i * self.axis2.len() + j]
        }
    }

    /// Long-format CSV: one row per point, axes first, value last.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match &self.axis2_name {
            None => {
                s.push_str(&format!("{},value\n", self.axis1_name));
                for (x, v) in self.axis1.iter().zip(&self.values) {
                    s.push_str(&format!("{x:.16e},{v:.16e}\n"));
                }
            }
            Some(name2) => {
                s.push_str(&format!("{},{},value\n", self.axis1_name, name2));
                for (i, x1) in self.axis1.iter().enumerate() {
                    for (j, x2) in self.axis2.iter().enumerate() {
                        s.push_str(&format!(
                            "{x1:.16e},{x2:.16e},{:.16e}\n",
                            self.values[i * self.axis2.len() + j]
                        ));
                    }
                }
            }
        }
        s
    }

    fn annotate(mut self, pairs: &[(&str, String)]) -> Self {
        for (k, v) in pairs {
            self.metadata.insert((*k).to_string(), v.clone());
        }
        self
    }
}

fn mode_meta(mode: PulseMode) -> String {
    match mode {
        PulseMode::Ideal => "ideal".to_string(),
        PulseMode::Finite { omega_dd } => format!("finite omega_dd={omega_dd:.6e}"),
    }
}

/// Ensemble-averaged differential response of a decoupling sequence over a
/// signal-detuning grid (rad/s). The sequence is rebuilt once; each grid
/// point runs in its own resonant frame.
pub fn scan_delta(
    protocol: Protocol,
    n_pi: usize,
    tau: f64,
    mode: PulseMode,
    signal: &SignalParams,
    deltas: &[f64],
    model: &DephasingModel,
) -> Result<ScanResult> {
    let seq = build_protocol(protocol, n_pi, tau, mode)?;
    let values: Vec<f64> = deltas
        .par_iter()
        .map(|d| ensemble_average(&seq, &FrameConfig::resonant_drive(*d), signal, model))
        .collect::<Result<_>>()?;
    Ok(
        ScanResult::new_1d("delta_rad_s", deltas.to_vec(), values).annotate(&[
            ("protocol", protocol.to_string()),
            ("n_pi", n_pi.to_string()),
            ("tau_s", format!("{tau:.16e}")),
            ("mode", mode_meta(mode)),
            ("omega_rf_rad_s", format!("{:.16e}", signal.omega_rf)),
            ("phi_rf_rad", format!("{:.16e}", signal.phi_rf)),
        ]),
    )
}

/// Phase-combined power profile `D²(φ_rf = 0) + D²(φ_rf = π/2)` over a
/// detuning grid. Quadrature-agnostic: peaks exactly on the protocol
/// resonances where either single quadrature can peak off-center.
pub fn combined_power_scan(
    protocol: Protocol,
    n_pi: usize,
    tau: f64,
    mode: PulseMode,
    omega_rf: f64,
    deltas: &[f64],
    model: &DephasingModel,
) -> Result<ScanResult> {
    let seq = build_protocol(protocol, n_pi, tau, mode)?;
    let values: Vec<f64> = deltas
        .par_iter()
        .map(|d| {
            let frame = FrameConfig::resonant_drive(*d);
            let d0 = ensemble_average(&seq, &frame, &SignalParams::new(omega_rf, 0.0)?, model)?;
            let d1 =
                ensemble_average(&seq, &frame, &SignalParams::new(omega_rf, PI / 2.0)?, model)?;
            Ok(d0 * d0 + d1 * d1)
        })
        .collect::<Result<_>>()?;
    Ok(
        ScanResult::new_1d("delta_rad_s", deltas.to_vec(), values).annotate(&[
            ("protocol", protocol.to_string()),
            ("n_pi", n_pi.to_string()),
            ("tau_s", format!("{tau:.16e}")),
            ("mode", mode_meta(mode)),
            ("omega_rf_rad_s", format!("{omega_rf:.16e}")),
            ("profile", "combined_power".to_string()),
        ]),
    )
}

/// Peak position of a resonance profile by least-squares parabola over the
/// contiguous apex region (all points ≥ 80 % of the maximum around the
/// argmax). More robust than a 3-point parabola on flat-topped lobes.
pub fn extract_resonance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::invalid("extract_resonance: need >= 3 points"));
    }
    let (imax, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let cut = 0.8 * ymax;
    let mut lo = imax;
    while lo > 0 && ys[lo - 1] >= cut {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < ys.len() && ys[hi + 1] >= cut {
        hi += 1;
    }
    if hi - lo + 1 < 3 {
        lo = imax.saturating_sub(1);
        hi = (imax + 1).min(ys.len() - 1);
    }
    if hi - lo + 1 < 3 {
        return Err(Error::invalid(
            "extract_resonance: peak sits on the grid edge",
        ));
    }

    // LSQ quadratic y = a u² + b u + c with u = x − x[imax].
    let x0 = xs[imax];
    let (mut s0, mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
    for k in lo..=hi {
        let u = xs[k] - x0;
        let y = ys[k];
        let u2 = u * u;
        s0 += 1.0;
        s1 += u;
        s2 += u2;
        s3 += u2 * u;
        s4 += u2 * u2;
        t0 += y;
        t1 += u * y;
        t2 += u2 * y;
    }
    let m = [[s4, s3, s2], [s3, s2, s1], [s2, s1, s0]];
    let rhs = [t2, t1, t0];
    let sol =
        solve3(m, rhs).ok_or_else(|| Error::numeric("extract_resonance: singular apex fit"))?;
    let (a, b) = (sol[0], sol[1]);
    if a.is_nan() || a >= 0.0 {
        return Err(Error::numeric("extract_resonance: apex fit is not concave"));
    }
    Ok(x0 - b / (2.0 * a))
}

/// Full width at half maximum of a non-negative profile after subtracting
/// its baseline (minimum). Half-max crossings are located by linear
/// interpolation on either side of the global maximum.
pub fn profile_fwhm(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 5 {
        return Err(Error::invalid("profile_fwhm: need >= 5 points"));
    }
    let base = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let prof: Vec<f64> = ys.iter().map(|y| y - base).collect();
    let (pk, &pmax) = prof
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if pmax <= 0.0 {
        return Err(Error::invalid("profile_fwhm: flat profile"));
    }
    let half = 0.5 * pmax;
    let cross = |dir: i64| -> Option<f64> {
        let mut i = pk as i64;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= prof.len() {
                return None;
            }
            if prof[next as usize] <= half {
                let (xa, ya) = (xs[i as usize], prof[i as usize]);
                let (xb, yb) = (xs[next as usize], prof[next as usize]);
                return Some(xa + (half - ya) * (xb - xa) / (yb - ya));
            }
            i = next;
        }
    };
    match (cross(-1), cross(1)) {
        (Some(lo), Some(hi)) => Ok((hi - lo).abs()),
        _ => Err(Error::invalid(
            "profile_fwhm: half-max crossing runs off the grid",
        )),
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let pivot = m[col];
        for row in (col + 1)..3 {
            let f = m[row][col] / pivot[col];
            for (cell, p) in m[row].iter_mut().zip(pivot).skip(col) {
                *cell -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Differential response vs accumulated signal exposure, stepping the
/// sequence in whole protocol repetitions with end readout.
///
/// `counts` are π-pulse totals; each must be a positive multiple of the
/// protocol block size. The x-axis is the total signal-window exposure of
/// each sequence (windows only — pulses blank the signal).
pub fn rabi_trace(
    protocol: Protocol,
    counts: &[usize],
    tau: f64,
    mode: PulseMode,
    signal: &SignalParams,
    delta: f64,
    model: &DephasingModel,
) -> Result<ScanResult> {
    if counts.is_empty() {
        return Err(Error::invalid("rabi_trace: empty count list"));
    }
    for &n in counts {
        if n == 0 || n % protocol.block_size() != 0 {
            return Err(Error::invalid(format!(
                "rabi_trace: pulse count {n} is not a positive multiple of the {protocol} \
                 block size {}",
                protocol.block_size()
            )));
        }
    }
    let frame = FrameConfig::resonant_drive(delta);
    let points: Vec<(f64, f64)> = counts
        .par_iter()
        .map(|&n| {
            let seq = build_protocol(protocol, n, tau, mode)?;
            let v = ensemble_average(&seq, &frame, signal, model)?;
            Ok((seq.signal_exposure(), v))
        })
        .collect::<Result<_>>()?;
    let (axis, values): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    Ok(ScanResult::new_1d("exposure_s", axis, values).annotate(&[
        ("protocol", protocol.to_string()),
        ("tau_s", format!("{tau:.16e}")),
        ("mode", mode_meta(mode)),
        ("delta_rad_s", format!("{delta:.16e}")),
        ("omega_rf_rad_s", format!("{:.16e}", signal.omega_rf)),
        ("phi_rf_rad", format!("{:.16e}", signal.phi_rf)),
        (
            "counts",
            counts
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        ),
    ]))
}

/// Least-squares angular frequency of `y ≈ a cos(ωx) + b sin(ωx) + c`.
///
/// A dense frequency scan (4000 candidates between a quarter period per
/// span and 98 % of the grid Nyquist rate) seeds a bisection hill-climb on
/// the LSQ residual. Deterministic; intended for clean simulated traces.
pub fn fit_cosine(xs: &[f64], ys: &[f64]) -> Result<f64> {
    fit_cosine_below(xs, ys, f64::INFINITY)
}

/// [`fit_cosine`] with the candidate search capped at `w_max` (rad per
/// x-unit). Use when the trace carries faster ancillary structure (for
/// example micromotion ripple on a slow sideband oscillation) that an
/// unconstrained residual scan could lock onto.
pub fn fit_cosine_below(xs: &[f64], ys: &[f64], w_max: f64) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 6 {
        return Err(Error::invalid("fit_cosine: need >= 6 points"));
    }
    let span = xs[xs.len() - 1] - xs[0];
    let mut min_dx = f64::INFINITY;
    for k in 1..xs.len() {
        let dx = xs[k] - xs[k - 1];
        if dx <= 0.0 {
            return Err(Error::invalid("fit_cosine: x grid must be increasing"));
        }
        min_dx = min_dx.min(dx);
    }
    if span.is_nan() || span <= 0.0 {
        return Err(Error::invalid("fit_cosine: zero span"));
    }

    let resid = |w: f64| -> f64 {
        let (mut s0, mut s1, mut s2, mut s3, mut s4, mut s5) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(ys) {
            let c = (w * x).cos();
            let s = (w * x).sin();
            s0 += c * c;
            s1 += c * s;
            s2 += s * s;
            s3 += c;
            s4 += s;
            s5 += 1.0;
            t0 += c * y;
            t1 += s * y;
            t2 += y;
        }
        let m = [[s0, s1, s3], [s1, s2, s4], [s3, s4, s5]];
        match solve3(m, [t0, t1, t2]) {
            Some(coef) => {
                let mut r = 0.0;
                for (x, y) in xs.iter().zip(ys) {
                    let f = coef[0] * (w * x).cos() + coef[1] * (w * x).sin() + coef[2];
                    r += (f - y) * (f - y);
                }
                r
            }
            None => f64::INFINITY,
        }
    };

    if w_max.is_nan() || w_max <= 0.0 {
        return Err(Error::invalid("fit_cosine: w_max must be positive"));
    }
    let w_lo = 0.25 * PI / span;
    let w_hi = (0.98 * PI / min_dx).min(w_max);
    if w_hi <= w_lo {
        return Err(Error::invalid("fit_cosine: degenerate frequency window"));
    }
    let n_scan = 4000;
    let mut best_w = w_lo;
    let mut best_r = f64::INFINITY;
    for k in 0..n_scan {
        let w = w_lo + (w_hi - w_lo) * k as f64 / (n_scan - 1) as f64;
        let r = resid(w);
        if r < best_r {
            best_r = r;
            best_w = w;
        }
    }
    let mut w0 = best_w;
    let mut dw = (w_hi - w_lo) / (n_scan - 1) as f64;
    for _ in 0..60 {
        let r0 = resid(w0);
        let rp = resid(w0 + dw);
        let rm = resid(w0 - dw);
        if rp < r0 {
            w0 += dw;
        } else if rm < r0 {
            w0 -= dw;
        } else {
            dw /= 2.0;
        }
    }
    Ok(w0)
}

/// 2-D map of the response over (τ, Δ). Values are the combined power
/// profile when `combined`, else the signed differential at `signal`.
#[allow(clippy::too_many_arguments)] // figure-level driver mirroring the experiment's knobs
pub fn scan_map(
    protocol: Protocol,
    n_pi: usize,
    mode: PulseMode,
    taus: &[f64],
    deltas: &[f64],
    signal: &SignalParams,
    model: &DephasingModel,
    combined: bool,
) -> Result<ScanResult> {
    let rows: Vec<Vec<f64>> = taus
        .par_iter()
        .map(|&tau| {
            let row = if combined {
                combined_power_scan(protocol, n_pi, tau, mode, signal.omega_rf, deltas, model)?
            } else {
                scan_delta(protocol, n_pi, tau, mode, signal, deltas, model)?
            };
            Ok(row.values)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(ScanResult::new_2d(
        "tau_s",
        taus.to_vec(),
        "delta_rad_s",
        deltas.to_vec(),
        values,
    )
    .annotate(&[
        ("protocol", protocol.to_string()),
        ("n_pi", n_pi.to_string()),
        ("mode", mode_meta(mode)),
        ("omega_rf_rad_s", format!("{:.16e}", signal.omega_rf)),
        ("combined", combined.to_string()),
    ]))
}

/// Per-row |response| argmax of a 2-D map: `(axis1_value, axis2_at_max)`.
pub fn map_ridge(map: &ScanResult) -> Result<Vec<(f64, f64)>> {
    if map.axis2.is_empty() {
        return Err(Error::invalid("map_ridge: not a 2-D scan"));
    }
    let n2 = map.axis2.len();
    Ok(map
        .axis1
        .iter()
        .enumerate()
        .map(|(i, &x1)| {
            let row = &map.values[i * n2..(i + 1) * n2];
            let j = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(j, _)| j)
                .unwrap_or(0);
            (x1, map.axis2[j])
        })
        .collect())
}

/// Resonance linewidth vs total sequence duration, over a pulse-count grid
/// at fixed spacing.
///
/// For each count the signal detuning is scanned over ±4π/T around the
/// protocol resonance (241 points) and the FWHM of the squared,
/// baseline-subtracted response profile is measured — the transition-
/// probability lineshape. Axis 1 is the sequence duration T; values are
/// angular FWHM (rad/s). Metadata records `t2_star_s` when the model
/// dephases, so the 1/T₂* reference line can be drawn next to the data.
pub fn linewidth_vs_t(
    protocol: Protocol,
    n_pis: &[usize],
    tau: f64,
    mode: PulseMode,
    signal: &SignalParams,
    model: &DephasingModel,
) -> Result<ScanResult> {
    if n_pis.is_empty() {
        return Err(Error::invalid("linewidth_vs_t: empty pulse-count list"));
    }
    let d0 = protocol.resonance_delta(tau);
    if d0 == 0.0 {
        return Err(Error::invalid(
            "linewidth_vs_t: protocol resonates at zero detuning; the ±4π/T window \
             around it has no one-sided lobe to measure",
        ));
    }
    let mut axis = Vec::with_capacity(n_pis.len());
    let mut values = Vec::with_capacity(n_pis.len());
    for &n_pi in n_pis {
        let seq = build_protocol(protocol, n_pi, tau, mode)?;
        let t = seq.total_duration();
        let deltas = linspace(d0 - 4.0 * PI / t, d0 + 4.0 * PI / t, 241);
        let scan = scan_delta(protocol, n_pi, tau, mode, signal, &deltas, model)?;
        let squared: Vec<f64> = scan.values.iter().map(|v| v * v).collect();
        axis.push(t);
        values.push(profile_fwhm(&deltas, &squared)?);
    }
    let mut out = ScanResult::new_1d("duration_s", axis, values).annotate(&[
        ("protocol", protocol.to_string()),
        ("tau_s", format!("{tau:.16e}")),
        ("mode", mode_meta(mode)),
        ("omega_rf_rad_s", format!("{:.16e}", signal.omega_rf)),
        ("phi_rf_rad", format!("{:.16e}", signal.phi_rf)),
        ("value_unit", "fwhm_rad_s".to_string()),
    ]);
    if model.sigma_f > 0.0 {
        out.metadata
            .insert("t2_star_s".to_string(), format!("{:.16e}", model.t2_star()));
    }
    Ok(out)
}

/// |Ensemble response| vs pulse spacing at fixed accumulated angle
/// `theta0 = Ω_rf·T` (the signal amplitude is rescaled per point), with
/// each point at the protocol's own resonance. The decay of this curve
/// against `τ/T₂*` is the dephasing-breakdown diagnostic.
pub fn breakdown_scan(
    protocol: Protocol,
    n_pi: usize,
    theta0: f64,
    taus: &[f64],
    model: &DephasingModel,
) -> Result<ScanResult> {
    if !(theta0.is_finite() && theta0 > 0.0) {
        return Err(Error::invalid("breakdown_scan: theta0 must be positive"));
    }
    let values: Vec<f64> = taus
        .par_iter()
        .map(|&tau| {
            let seq = build_protocol(protocol, n_pi, tau, PulseMode::Ideal)?;
            let t = seq.total_duration();
            let signal = SignalParams::new(theta0 / t, PI / 2.0)?;
            let frame = FrameConfig::resonant_drive(protocol.resonance_delta(tau));
            Ok(ensemble_average(&seq, &frame, &signal, model)?.abs())
        })
        .collect::<Result<_>>()?;
    Ok(
        ScanResult::new_1d("tau_s", taus.to_vec(), values).annotate(&[
            ("protocol", protocol.to_string()),
            ("n_pi", n_pi.to_string()),
            ("theta0_rad", format!("{theta0:.16e}")),
            ("sigma_f_hz", format!("{:.16e}", model.sigma_f)),
            ("nodes", model.nodes.to_string()),
        ]),
    )
}

/// ⟨σ_z⟩ after a CW drive of each (rounded) duration, signal on
/// throughout. The axis holds the rounded durations actually run.
pub fn cw_time_trace(
    omega_dd: f64,
    signal: &SignalParams,
    delta: f64,
    durations: &[f64],
    prep: Prep,
    model: &DephasingModel,
) -> Result<ScanResult> {
    let frame = FrameConfig::resonant_drive(delta);
    let points: Vec<(f64, f64)> = durations
        .par_iter()
        .map(|&dur| {
            let mut seq = build_cw_sideband(dur, omega_dd, signal.omega_rf, delta)?;
            seq.prep = Some(prep);
            let z = ensemble_average_with(model, |offset| {
                let p0 = readout(&seq, &frame.with_qubit_offset(offset), signal)?;
                Ok(2.0 * p0 - 1.0)
            })?;
            Ok((seq.total_duration(), z))
        })
        .collect::<Result<_>>()?;
    let (axis, values): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    Ok(ScanResult::new_1d("duration_s", axis, values).annotate(&[
        ("omega_dd_rad_s", format!("{omega_dd:.16e}")),
        ("omega_rf_rad_s", format!("{:.16e}", signal.omega_rf)),
        ("phi_rf_rad", format!("{:.16e}", signal.phi_rf)),
        ("delta_rad_s", format!("{delta:.16e}")),
        ("prep_phase_rad", format!("{:.16e}", prep.phase)),
    ]))
}

/// ⟨σ_z⟩ after a fixed-duration CW drive, scanned over the signal detuning
/// (the absorption-spectrum geometry: dips at the carrier and at the
/// sidebands Δ = ±Ω_dd).
pub fn cw_absorption_scan(
    omega_dd: f64,
    signal: &SignalParams,
    duration: f64,
    deltas: &[f64],
    prep: Prep,
    model: &DephasingModel,
) -> Result<ScanResult> {
    let values: Vec<f64> = deltas
        .par_iter()
        .map(|&d| {
            let mut seq = build_cw_sideband(duration, omega_dd, signal.omega_rf, d)?;
            seq.prep = Some(prep);
            let frame = FrameConfig::resonant_drive(d);
            ensemble_average_with(model, |offset| {
                let p0 = readout(&seq, &frame.with_qubit_offset(offset), signal)?;
                Ok(2.0 * p0 - 1.0)
            })
        })
        .collect::<Result<_>>()?;
    Ok(
        ScanResult::new_1d("delta_rad_s", deltas.to_vec(), values).annotate(&[
            ("omega_dd_rad_s", format!("{omega_dd:.16e}")),
            ("omega_rf_rad_s", format!("{:.16e}", signal.omega_rf)),
            ("phi_rf_rad", format!("{:.16e}", signal.phi_rf)),
            ("duration_s", format!("{duration:.16e}")),
            ("prep_phase_rad", format!("{:.16e}", prep.phase)),
        ]),
    )
}

/// Linearly spaced grid (inclusive endpoints).
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Geometrically spaced grid (inclusive endpoints); both ends positive.
pub fn geomspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let r = (stop / start).ln();
    (0..n)
        .map(|k| start * (r * k as f64 / (n - 1) as f64).exp())
        .collect()
}
