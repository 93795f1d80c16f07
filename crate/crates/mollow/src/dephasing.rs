//! Quasi-static Gaussian dephasing: ensemble averaging over a frozen
//! qubit-frequency offset, and the free-induction-decay spectrum.
//!
//! The inhomogeneous ensemble draws a static frequency offset
//! `δ ~ N(0, (2π σ_f)²)` (rad/s) per member; `σ_f` is the standard
//! deviation of the *frequency* distribution in Hz. The resulting
//! free-induction envelope is Gaussian,
//! `⟨cos δt⟩ = exp(−(2π σ_f t)²/2)`, with spectral FWHM
//! `2√(2 ln 2)·σ_f`. The inverse of that spectral FWHM is the coherence
//! time `T₂*`, giving the mapping `σ_f = 1/(2√(2 ln 2)·T₂*)`.
//!
//! Gaussian expectation values are computed with Gauss–Hermite quadrature:
//! `⟨f(δ)⟩ = (1/√π) Σ_i w_i f(√2·(2π σ_f)·x_i)`. The rule is exact for
//! polynomial integrands of degree ≤ 2n−1; for oscillatory integrands
//! (`cos δt`) it is accurate while `√2·(2π σ_f)·t·x_max ≲ 2n+1` and *rings*
//! beyond, which [`fid_spectrum`] guards against explicitly.

use crate::engine::{differential_readout, SignalParams};
use crate::error::{Error, Result};
use crate::frames::FrameConfig;
use crate::sequences::{build_ramsey, PulseSequence};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Zero-padded transform length for [`fid_spectrum`].
pub const FID_FFT_LEN: usize = 32768;

/// 2√(2 ln 2): FWHM of a unit-σ Gaussian.
pub const GAUSSIAN_FWHM_SIGMA_RATIO: f64 = 2.354820045030949;

/// Quasi-static Gaussian dephasing model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingModel {
    /// Standard deviation of the qubit-frequency offset, in Hz.
    pub sigma_f: f64,
    /// Gauss–Hermite node count for ensemble averages.
    pub nodes: usize,
}

impl DephasingModel {
    /// No dephasing: a single ensemble member at zero offset.
    pub fn none() -> Self {
        DephasingModel {
            sigma_f: 0.0,
            nodes: 1,
        }
    }

    pub fn new(sigma_f: f64, nodes: usize) -> Result<Self> {
        if !(sigma_f.is_finite() && sigma_f >= 0.0) {
            return Err(Error::invalid("sigma_f must be finite and >= 0"));
        }
        if nodes == 0 {
            return Err(Error::invalid("node count must be at least 1"));
        }
        Ok(DephasingModel { sigma_f, nodes })
    }

    /// Model with the Gaussian line FWHM pinned to `1/t2_star`:
    /// `σ_f = 1/(2√(2 ln 2)·T₂*)`.
    pub fn from_t2_star(t2_star: f64, nodes: usize) -> Result<Self> {
        if !(t2_star.is_finite() && t2_star > 0.0) {
            return Err(Error::invalid("t2_star must be positive and finite"));
        }
        Self::new(1.0 / (GAUSSIAN_FWHM_SIGMA_RATIO * t2_star), nodes)
    }

    /// The coherence time implied by `sigma_f` (inverse spectral FWHM).
    pub fn t2_star(&self) -> f64 {
        if self.sigma_f == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (GAUSSIAN_FWHM_SIGMA_RATIO * self.sigma_f)
        }
    }

    /// Exact free-induction envelope `⟨cos δt⟩ = exp(−(2π σ_f t)²/2)`.
    pub fn envelope(&self, t: f64) -> f64 {
        let s = 2.0 * PI * self.sigma_f * t;
        (-0.5 * s * s).exp()
    }
}

/// Physicists' Gauss–Hermite nodes and weights:
/// `∫ e^{−x²} f(x) dx ≈ Σ w_i f(x_i)`, nodes ascending, `Σ w_i = √π`.
///
/// Newton iteration on the orthonormal Hermite recurrence; converges in a
/// handful of steps for any practical `n`.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("gauss_hermite: need at least 1 node"));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0f64;

    for i in 0..m {
        // Initial guesses for roots in descending order (largest first).
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[n - 1],
            3 => 1.91 * z - 0.91 * x[n - 2],
            _ => 2.0 * z - x[n - i + 1],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            // Orthonormal Hermite polynomials at z.
            let mut p1 = PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numeric(format!(
                "gauss_hermite: Newton iteration failed to converge for n = {n}"
            )));
        }
        // Store symmetric pair (ascending order).
        x[n - 1 - i] = z;
        x[i] = -z;
        let wi = 2.0 / (pp * pp);
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    Ok((x, w))
}

/// Ensemble members as `(frequency offset rad/s, normalized weight)` pairs;
/// the weights sum to 1.
pub fn member_offsets(model: &DephasingModel) -> Result<Vec<(f64, f64)>> {
    if model.sigma_f == 0.0 || model.nodes == 1 {
        return Ok(vec![(0.0, 1.0)]);
    }
    let (x, w) = gauss_hermite(model.nodes)?;
    let s = 2.0 * PI * model.sigma_f;
    let norm = PI.sqrt();
    Ok(x.iter()
        .zip(&w)
        .map(|(xi, wi)| (std::f64::consts::SQRT_2 * s * xi, wi / norm))
        .collect())
}

/// Gaussian ensemble expectation of an arbitrary per-member observable
/// `f(δ)`, `δ` the member's frequency offset in rad/s.
pub fn ensemble_average_with<F>(model: &DephasingModel, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for (offset, weight) in member_offsets(model)? {
        acc += weight * f(offset)?;
    }
    Ok(acc)
}

/// Ensemble-averaged differential readout of a sequence: each member runs
/// with its frequency offset folded into the frame; the drive and signal
/// synthesizers are shared (offsets shift only the precession rate, not
/// the pulse-phase advance).
pub fn ensemble_average(
    seq: &PulseSequence,
    frame: &FrameConfig,
    signal: &SignalParams,
    model: &DephasingModel,
) -> Result<f64> {
    ensemble_average_with(model, |offset| {
        differential_readout(seq, &frame.with_qubit_offset(offset), signal)
    })
}

/// Free-induction-decay record and its spectrum.
#[derive(Clone, Debug)]
pub struct FidSpectrum {
    /// Ramsey evolution times (s).
    pub times: Vec<f64>,
    /// Ensemble-averaged differential signal at each time.
    pub signal: Vec<f64>,
    /// One-sided frequency axis (Hz).
    pub freqs: Vec<f64>,
    /// Magnitude of the symmetrized cosine transform.
    pub spectrum: Vec<f64>,
    /// Interpolated peak position (Hz).
    pub peak_freq: f64,
    /// Full width at half maximum of the line (Hz).
    pub fwhm: f64,
}

/// Simulate a Ramsey free-induction decay and return its line spectrum.
///
/// The fringe carrier is the frame's signal detuning `delta_rf`; both π/2
/// pulses are referenced to the frame oscillator (fixed axes), so the
/// differential signal of each member is `−cos((Δ_rf + δ)·t)` and the
/// ensemble line is a Gaussian of FWHM `2√(2 ln 2)·σ_f` centered at
/// `Δ_rf/2π`.
///
/// The record `y(t_j)`, `t_j = j·dt`, is zero-padded to [`FID_FFT_LEN`] and
/// symmetrized: since `y(−t) = y(t)` for a cosine fringe, the two-sided
/// transform is `2·Re(FFT) − y₀`, which avoids the dispersive distortion of
/// a one-sided magnitude spectrum.
///
/// Errors if `dt` undersamples the fastest ensemble member (Nyquist) or if
/// `t_max` exceeds the reliable range of the Gauss–Hermite rule
/// (`√2·(2π σ_f)·t_max·x_max ≤ 2n + 3`), where the quadrature would ring.
pub fn fid_spectrum(
    t_max: f64,
    dt: f64,
    model: &DephasingModel,
    frame: &FrameConfig,
) -> Result<FidSpectrum> {
    if !(dt.is_finite() && dt > 0.0) || !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid(
            "fid_spectrum: t_max and dt must be positive",
        ));
    }
    let n_samples = (t_max / dt + 1e-9).floor() as usize;
    if n_samples < 8 {
        return Err(Error::invalid(
            "fid_spectrum: fewer than 8 samples; reduce dt or increase t_max",
        ));
    }
    if n_samples > FID_FFT_LEN / 2 {
        return Err(Error::invalid(format!(
            "fid_spectrum: {n_samples} samples exceed half the transform length {FID_FFT_LEN}"
        )));
    }

    let members = member_offsets(model)?;
    let max_offset = members.iter().map(|(o, _)| o.abs()).fold(0.0, f64::max);
    let fastest = frame.delta_rf.abs() + max_offset;
    if fastest > 0.0 && dt > PI / fastest {
        return Err(Error::invalid(format!(
            "fid_spectrum: dt = {dt:.3e} s undersamples the fastest fringe at {:.3e} rad/s",
            fastest
        )));
    }
    if model.sigma_f > 0.0 && model.nodes > 1 {
        let arg = max_offset * t_max;
        let limit = 2.0 * model.nodes as f64 + 3.0;
        if arg > limit {
            return Err(Error::invalid(format!(
                "fid_spectrum: t_max = {t_max:.3e} s is beyond the reliable range of a \
                 {}-node quadrature (ringing); need sqrt(2)*(2 pi sigma_f)*t_max*x_max = \
                 {arg:.1} <= {limit:.1}. Increase nodes or reduce t_max",
                model.nodes
            )));
        }
    }

    // Ramsey pulses share the frame reference oscillator: fixed pulse axes.
    let fid_frame = FrameConfig::new(frame.delta_rf, 0.0);
    let signal = SignalParams::OFF;

    let mut times = Vec::with_capacity(n_samples);
    let mut record = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let t = j as f64 * dt;
        let seq = build_ramsey(t)?;
        let mut acc = 0.0;
        for (offset, weight) in &members {
            acc += weight
                * differential_readout(&seq, &fid_frame.with_qubit_offset(*offset), &signal)?;
        }
        times.push(t);
        record.push(acc);
    }

    let mut buf: Vec<Complex64> = record
        .iter()
        .map(|y| Complex64::new(*y, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(FID_FFT_LEN)
        .collect();
    FftPlanner::new()
        .plan_fft_forward(FID_FFT_LEN)
        .process(&mut buf);

    let half = FID_FFT_LEN / 2;
    let df = 1.0 / (FID_FFT_LEN as f64 * dt);
    let y0 = record[0];
    let mut freqs = Vec::with_capacity(half);
    let mut spectrum = Vec::with_capacity(half);
    for (k, z) in buf.iter().take(half).enumerate() {
        freqs.push(k as f64 * df);
        spectrum.push((dt * (2.0 * z.re - y0)).abs());
    }

    let pk = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::numeric("fid_spectrum: empty spectrum"))?;

    let peak_freq = if pk > 0 && pk < half - 1 {
        let (y0_, y1, y2) = (spectrum[pk - 1], spectrum[pk], spectrum[pk + 1]);
        let denom = y0_ - 2.0 * y1 + y2;
        let shift = if denom != 0.0 {
            0.5 * (y0_ - y2) / denom
        } else {
            0.0
        };
        (pk as f64 + shift) * df
    } else {
        pk as f64 * df
    };

    let halfmax = spectrum[pk] / 2.0;
    let cross = |dir: i64| -> Option<f64> {
        let mut i = pk as i64;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= half {
                return None;
            }
            if spectrum[next as usize] <= halfmax {
                let (xa, ya) = (i as f64 * df, spectrum[i as usize]);
                let (xb, yb) = (next as f64 * df, spectrum[next as usize]);
                return Some(xa + (halfmax - ya) * (xb - xa) / (yb - ya));
            }
            i = next;
        }
    };
    let hi = cross(1).ok_or_else(|| Error::numeric("fid_spectrum: no upper half-max crossing"))?;
    let fwhm = match cross(-1) {
        Some(lo) => hi - lo,
        // Peak pinned at DC: the line is symmetric about 0.
        None => 2.0 * (hi - peak_freq),
    };

    Ok(FidSpectrum {
        times,
        signal: record,
        freqs,
        spectrum,
        peak_freq,
        fwhm,
    })
}
