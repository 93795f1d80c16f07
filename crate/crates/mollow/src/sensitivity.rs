//! Piecewise-constant sensitivity function of a decoupling sequence and the
//! first-order (linear-response) prediction built on it.
//!
//! The sensitivity function g(t) over the sequence body is ±1 between
//! π-pulse centers: it starts at +1 and flips sign at every X-family pulse
//! (`X`/`-X`), which anticommutes with the accumulated in-plane rotation
//! axis; Y-family pulses leave the sign unchanged. Breakpoints sit at the
//! *ideal* pulse centers even for finite-duration pulses, so the linear
//! prediction is exact in the ideal-pulse limit and an O(t_π) approximation
//! otherwise.
//!
//! To first order in the signal amplitude, the accumulated rotation angle
//! about the in-plane axis selected by the reference phase φ₀ is
//!
//! ```text
//! R(φ₀) = Ω_rf ∫ g(t) · sin(Δ·t + φ₀ − off(t)) dt
//! ```
//!
//! where `off(t)` is the per-window signal phase offset of the
//! phase-switching program (0 elsewhere). Each interval integrates in
//! closed form to `s_k · h_k · sinc(Δ h_k / 2) · sin(Δ t̄_k + φ₀ − off_k)`
//! (h_k the interval length, t̄_k its midpoint), which is branch-free
//! through Δ = 0.

use crate::error::{Error, Result};
use crate::sequences::{PulseSequence, SegmentKind};
use crate::spin::sinc;

/// Piecewise-constant sensitivity of a sequence body.
///
/// `breakpoints` has one more entry than `values`/`offsets`; interval `k`
/// spans `[breakpoints[k], breakpoints[k+1])` with sign `values[k]` and
/// signal phase offset `offsets[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl SensitivityFunction {
    /// Number of constant intervals.
    pub fn intervals(&self) -> usize {
        self.values.len()
    }

    /// Body duration covered by the function.
    pub fn duration(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
            - self.breakpoints.first().copied().unwrap_or(0.0)
    }

    /// Sign and phase offset at body time `t` (clamped to the domain).
    pub fn value_at(&self, t: f64) -> (f64, f64) {
        let n = self.values.len();
        let mut k = 0;
        while k + 1 < n && t >= self.breakpoints[k + 1] {
            k += 1;
        }
        (self.values[k], self.offsets[k])
    }

    /// CSV dump: one row per interval.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t_start_s,t_end_s,sign,phase_offset_rad\n");
        for k in 0..self.values.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{},{:.16e}\n",
                self.breakpoints[k],
                self.breakpoints[k + 1],
                self.values[k] as i32,
                self.offsets[k]
            ));
        }
        s
    }
}

/// Compute the sensitivity function of a π-pulse decoupling body.
///
/// The body must consist of signal windows interleaved with labeled π
/// pulses (the builder layout). Other segment kinds — π/2 pulses, idles, CW
/// drives — have no toggling-sign description and are rejected, as are π
/// pulses with missing or non-canonical axis labels.
pub fn sensitivity_of(seq: &PulseSequence) -> Result<SensitivityFunction> {
    let mut centers = Vec::new();
    let mut signs_at = Vec::new();
    let mut offsets = Vec::new();
    let mut sign = 1.0f64;
    let mut t = 0.0;

    for (i, seg) in seq.body.iter().enumerate() {
        match seg.kind {
            SegmentKind::SignalWindow => offsets.push(seg.phase),
            SegmentKind::PiPulse => match seg.label.as_str() {
                "X" | "-X" => {
                    centers.push(t + 0.5 * seg.duration);
                    signs_at.push(sign);
                    sign = -sign;
                }
                "Y" | "-Y" => {
                    centers.push(t + 0.5 * seg.duration);
                    signs_at.push(sign);
                }
                other => {
                    return Err(Error::invalid(format!(
                        "segment {i}: pi pulse with unlabeled or unknown axis `{other}`; \
                             the sensitivity function needs canonical X/Y/-X/-Y labels"
                    )))
                }
            },
            SegmentKind::HalfPiPulse | SegmentKind::Idle | SegmentKind::CwDrive => {
                return Err(Error::invalid(format!(
                    "segment {i}: sensitivity function is defined only for bodies of \
                     signal windows and pi pulses"
                )))
            }
        }
        t += seg.duration;
    }

    if offsets.len() != centers.len() + 1 {
        return Err(Error::invalid(format!(
            "body has {} signal windows for {} pi pulses; expected n_pi + 1 windows",
            offsets.len(),
            centers.len()
        )));
    }

    let mut breakpoints = Vec::with_capacity(centers.len() + 2);
    breakpoints.push(0.0);
    breakpoints.extend_from_slice(&centers);
    breakpoints.push(t);
    let mut values = signs_at;
    values.push(sign); // last interval carries the final toggled sign

    Ok(SensitivityFunction {
        breakpoints,
        values,
        offsets,
    })
}

/// First-order accumulated rotation angle (rad) about the φ₀ reference
/// axis, for signal amplitude `omega_rf` (rad/s) at detuning `delta`
/// (rad/s).
pub fn predict_response(g: &SensitivityFunction, omega_rf: f64, delta: f64, phi0: f64) -> f64 {
    let mut r = 0.0;
    for k in 0..g.values.len() {
        let t0 = g.breakpoints[k];
        let t1 = g.breakpoints[k + 1];
        let h = t1 - t0;
        let mid = 0.5 * (t0 + t1);
        r += g.values[k] * h * sinc(0.5 * delta * h) * (delta * mid + phi0 - g.offsets[k]).sin();
    }
    omega_rf * r
}

/// Quadrature integrals `(A, B)` of the sensitivity function at `delta`:
/// `A = Σ_k s_k ∫ sin(Δt − off_k) dt`, `B = Σ_k s_k ∫ cos(Δt − off_k) dt`,
/// so `predict_response = Ω_rf (A cos φ₀ + B sin φ₀)`.
pub fn quadratures(g: &SensitivityFunction, delta: f64) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for k in 0..g.values.len() {
        let t0 = g.breakpoints[k];
        let t1 = g.breakpoints[k + 1];
        let h = t1 - t0;
        let mid = 0.5 * (t0 + t1);
        let weight = g.values[k] * h * sinc(0.5 * delta * h);
        let arg = delta * mid - g.offsets[k];
        a += weight * arg.sin();
        b += weight * arg.cos();
    }
    (a, b)
}

/// Largest first-order rotation angle over φ₀: `Ω_rf √(A² + B²)`.
pub fn peak_response(g: &SensitivityFunction, omega_rf: f64, delta: f64) -> f64 {
    let (a, b) = quadratures(g, delta);
    omega_rf * a.hypot(b)
}

/// Effective Rabi-rate factor at `delta`: the first-order rotation rate per
/// unit signal amplitude, `√(A² + B²) / T`. Equals 2/π for CPMG at its
/// resonance Δ = π/τ and 1 for phase-switched XY8 at Δ = 0.
pub fn effective_rabi_factor(g: &SensitivityFunction, delta: f64) -> f64 {
    let (a, b) = quadratures(g, delta);
    a.hypot(b) / g.duration()
}
