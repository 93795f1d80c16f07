//! Turn a validated [`RunConfig`] into result tables and summary lines.
//!
//! `execute` is pure compute: it returns the would-be file contents and
//! never touches the filesystem, so a failed run can't leave partial
//! outputs behind.

use std::f64::consts::PI;

use mollow::dephasing::fid_spectrum;
use mollow::engine::SignalParams;
use mollow::experiments::{
    breakdown_scan, cw_absorption_scan, cw_time_trace, fit_cosine, fit_cosine_below,
    linewidth_vs_t, map_ridge, rabi_trace, scan_delta, scan_map,
};
use mollow::frames::FrameConfig;

use crate::config::{Experiment, RunConfig};
use crate::failure::Failure;

const TWO_PI: f64 = 2.0 * PI;

pub struct Artifacts {
    /// `(file name, contents)` pairs, ready to be written to the out dir.
    pub files: Vec<(String, String)>,
    /// Human-readable one-liners describing what came out.
    pub summaries: Vec<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    match cfg.experiment {
        Experiment::ScanDelta => run_scan_delta(cfg),
        Experiment::Map => run_map(cfg),
        Experiment::Linewidth => run_linewidth(cfg),
        Experiment::Rabi => run_rabi(cfg),
        Experiment::Breakdown => run_breakdown(cfg),
        Experiment::CwTrace => run_cw_trace(cfg),
        Experiment::CwScan => run_cw_scan(cfg),
        Experiment::Fid => run_fid(cfg),
    }
}

fn mhz(omega: f64) -> f64 {
    omega / TWO_PI * 1e-6
}

fn khz(omega: f64) -> f64 {
    omega / TWO_PI * 1e-3
}

/// Index of the largest |value|.
fn argmax_abs(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn run_scan_delta(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let signal = SignalParams::new(cfg.omega_rf, cfg.phi_rf)?;
    let multi = cfg.protocols.len() > 1;
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for &protocol in &cfg.protocols {
        let scan = scan_delta(
            protocol,
            cfg.n_pi,
            cfg.tau_s,
            cfg.mode,
            &signal,
            &cfg.delta_grid,
            &cfg.model,
        )?;
        let i = argmax_abs(&scan.values);
        summaries.push(format!(
            "{protocol}: peak |response| {:.4} at delta = {:.4} MHz",
            scan.values[i].abs(),
            mhz(scan.axis1[i])
        ));
        let name = if multi {
            format!("{}_{protocol}.csv", cfg.label)
        } else {
            format!("{}.csv", cfg.label)
        };
        files.push((name, scan.to_csv()));
    }
    Ok(Artifacts { files, summaries })
}

fn run_map(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let protocol = cfg.protocols[0];
    let signal = SignalParams::new(cfg.omega_rf, cfg.phi_rf)?;
    let map = scan_map(
        protocol,
        cfg.n_pi,
        cfg.mode,
        &cfg.tau_grid,
        &cfg.delta_grid,
        &signal,
        &cfg.model,
        true,
    )?;
    let ridge = map_ridge(&map)?;
    let step = cfg.delta_grid[1] - cfg.delta_grid[0];
    let worst = ridge
        .iter()
        .map(|&(tau, d)| (d - protocol.resonance_delta(tau)).abs() / step)
        .fold(0.0, f64::max);
    let summaries = vec![format!(
        "{protocol} ridge tracks its resonance within {worst:.2} detuning grid steps (worst row)"
    )];
    let files = vec![(format!("{}.csv", cfg.label), map.to_csv())];
    Ok(Artifacts { files, summaries })
}

fn run_linewidth(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let signal = SignalParams::new(cfg.omega_rf, cfg.phi_rf)?;
    let scan = linewidth_vs_t(
        cfg.protocols[0],
        &cfg.n_pi_list,
        cfg.tau_s,
        cfg.mode,
        &signal,
        &cfg.model,
    )?;
    let mut summaries: Vec<String> = scan
        .axis1
        .iter()
        .zip(&scan.values)
        .map(|(t, w)| format!("T = {:.3} us: FWHM = {:.2} kHz", t * 1e6, khz(*w)))
        .collect();
    if cfg.model.sigma_f > 0.0 {
        summaries.push(format!(
            "reference inhomogeneous line 1/T2* = {:.2} kHz",
            1e-3 / cfg.model.t2_star()
        ));
    }
    let files = vec![(format!("{}.csv", cfg.label), scan.to_csv())];
    Ok(Artifacts { files, summaries })
}

fn run_rabi(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let signal = SignalParams::new(cfg.omega_rf, cfg.phi_rf)?;
    let trace = rabi_trace(
        cfg.protocols[0],
        &cfg.n_pi_list,
        cfg.tau_s,
        cfg.mode,
        &signal,
        cfg.delta,
        &cfg.model,
    )?;
    let summaries = vec![oscillation_summary(
        &trace.axis1,
        &trace.values,
        cfg.omega_rf,
        f64::INFINITY,
    )];
    let files = vec![(format!("{}.csv", cfg.label), trace.to_csv())];
    Ok(Artifacts { files, summaries })
}

fn run_breakdown(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let scan = breakdown_scan(
        cfg.protocols[0],
        cfg.n_pi,
        cfg.theta0,
        &cfg.tau_grid,
        &cfg.model,
    )?;
    let half = 0.5 * scan.values[0];
    let mut summary = String::from("response stays above half its first point");
    for k in 1..scan.values.len() {
        let (v0, v1) = (scan.values[k - 1], scan.values[k]);
        if v0 >= half && v1 < half {
            // interpolate in log-tau: the natural axis for a geometric grid
            let f = (half - v0) / (v1 - v0);
            let tau = (scan.axis1[k - 1].ln() * (1.0 - f) + scan.axis1[k].ln() * f).exp();
            summary = format!(
                "response falls to half its first point at tau = {:.3} us",
                tau * 1e6
            );
            if cfg.model.sigma_f > 0.0 {
                summary.push_str(&format!(" = {:.2} x T2*", tau / cfg.model.t2_star()));
            }
            break;
        }
    }
    let files = vec![(format!("{}.csv", cfg.label), scan.to_csv())];
    Ok(Artifacts {
        files,
        summaries: vec![summary],
    })
}

fn run_cw_trace(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let signal = SignalParams::new(cfg.omega_rf, cfg.phi_rf)?;
    let trace = cw_time_trace(
        cfg.omega_dd,
        &signal,
        cfg.delta,
        &cfg.durations,
        cfg.prep,
        &cfg.model,
    )?;
    // Cap the fit below the micromotion ripple left by the strong drive.
    let summaries = vec![oscillation_summary(
        &trace.axis1,
        &trace.values,
        cfg.omega_rf,
        3.0 * cfg.omega_rf,
    )];
    let files = vec![(format!("{}.csv", cfg.label), trace.to_csv())];
    Ok(Artifacts { files, summaries })
}

fn run_cw_scan(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let signal = SignalParams::new(cfg.omega_rf, cfg.phi_rf)?;
    let scan = cw_absorption_scan(
        cfg.omega_dd,
        &signal,
        cfg.duration_s,
        &cfg.delta_grid,
        cfg.prep,
        &cfg.model,
    )?;
    let i = scan
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let summaries = vec![format!(
        "deepest absorption at delta = {:.4} MHz (z = {:.4})",
        mhz(scan.axis1[i]),
        scan.values[i]
    )];
    let files = vec![(format!("{}.csv", cfg.label), scan.to_csv())];
    Ok(Artifacts { files, summaries })
}

fn run_fid(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let frame = FrameConfig::new(cfg.carrier, 0.0);
    let out = fid_spectrum(cfg.t_max_s, cfg.dt_s, &cfg.model, &frame)?;

    let mut trace = String::from("time_s,signal\n");
    for (t, v) in out.times.iter().zip(&out.signal) {
        trace.push_str(&format!("{t:.16e},{v:.16e}\n"));
    }
    let mut spectrum = String::from("freq_hz,amplitude\n");
    for (f, a) in out.freqs.iter().zip(&out.spectrum) {
        spectrum.push_str(&format!("{f:.16e},{a:.16e}\n"));
    }

    let mut summaries = vec![format!(
        "line peak at {:.4} MHz, FWHM = {:.2} kHz",
        out.peak_freq * 1e-6,
        out.fwhm * 1e-3
    )];
    if cfg.model.sigma_f > 0.0 {
        summaries.push(format!(
            "FWHM x T2* = {:.4}",
            out.fwhm * cfg.model.t2_star()
        ));
    }
    let files = vec![
        (format!("{}_trace.csv", cfg.label), trace),
        (format!("{}_spectrum.csv", cfg.label), spectrum),
    ];
    Ok(Artifacts { files, summaries })
}

/// Fit a cosine to a trace and describe the rate relative to `omega_rf`.
/// Falls back to a plain note when the trace is too short to fit.
fn oscillation_summary(xs: &[f64], ys: &[f64], omega_rf: f64, w_max: f64) -> String {
    let fit = if w_max.is_finite() {
        fit_cosine_below(xs, ys, w_max)
    } else {
        fit_cosine(xs, ys)
    };
    match fit {
        Ok(w) if omega_rf > 0.0 => format!(
            "fitted oscillation rate {:.6e} rad/s ({:.4} x omega_rf)",
            w,
            w / omega_rf
        ),
        Ok(w) => format!("fitted oscillation rate {w:.6e} rad/s"),
        Err(_) => "trace too short for a rate fit".to_string(),
    }
}
