//! Exact two-level-system state and propagator algebra.
//!
//! A rotation vector `w = (wx, wy, wz)` (angular frequencies, rad/s) defines
//! the Hamiltonian `H = (ħ/2) w·σ`; the propagator over a duration `t` is the
//! closed-form matrix exponential
//!
//! ```text
//! U = exp(-i (w·σ) t / 2) = cos(θ/2) I − i sin(θ/2) (ŵ·σ),   θ = |w| t.
//! ```
//!
//! With this convention a field of magnitude `|w| = Ω` applied for
//! `t = π/Ω` is exactly a π pulse. The closed form is exact for 2×2
//! Hermitian generators — there is no truncation error to manage.
//!
//! Global phase is neither normalized nor part of the contract; only
//! moduli such as `|⟨0|ψ⟩|²` are observable.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Norm drift above which [`apply`] silently renormalizes the state.
pub const NORM_RENORM_THRESHOLD: f64 = 1e-12;
/// Norm drift above which [`apply`] reports a propagator-construction bug.
pub const NORM_ERROR_THRESHOLD: f64 = 1e-9;

/// Pure state of a two-level system: amplitudes of `|0⟩` and `|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinState {
    /// Amplitude of `|0⟩`.
    pub a0: Complex64,
    /// Amplitude of `|1⟩`.
    pub a1: Complex64,
}

impl SpinState {
    /// The basis state `|0⟩`.
    pub fn ket0() -> Self {
        SpinState {
            a0: Complex64::new(1.0, 0.0),
            a1: Complex64::new(0.0, 0.0),
        }
    }

    /// The basis state `|1⟩`.
    pub fn ket1() -> Self {
        SpinState {
            a0: Complex64::new(0.0, 0.0),
            a1: Complex64::new(1.0, 0.0),
        }
    }

    /// Squared norm `|a0|² + |a1|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }
}

/// Rotation vector: angular-frequency components along σ_x, σ_y, σ_z (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationVector {
    pub wx: f64,
    pub wy: f64,
    pub wz: f64,
}

impl RotationVector {
    pub fn new(wx: f64, wy: f64, wz: f64) -> Self {
        RotationVector { wx, wy, wz }
    }

    /// Magnitude `√(wx² + wy² + wz²)`.
    pub fn magnitude(&self) -> f64 {
        (self.wx * self.wx + self.wy * self.wy + self.wz * self.wz).sqrt()
    }

    fn is_finite(&self) -> bool {
        self.wx.is_finite() && self.wy.is_finite() && self.wz.is_finite()
    }
}

/// A 2×2 unitary, stored entrywise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2 {
    pub u00: Complex64,
    pub u01: Complex64,
    pub u10: Complex64,
    pub u11: Complex64,
}

impl Unitary2 {
    /// The identity.
    pub fn identity() -> Self {
        Unitary2 {
            u00: Complex64::new(1.0, 0.0),
            u01: Complex64::new(0.0, 0.0),
            u10: Complex64::new(0.0, 0.0),
            u11: Complex64::new(1.0, 0.0),
        }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Unitary2) -> Unitary2 {
        Unitary2 {
            u00: self.u00 * other.u00 + self.u01 * other.u10,
            u01: self.u00 * other.u01 + self.u01 * other.u11,
            u10: self.u10 * other.u00 + self.u11 * other.u10,
            u11: self.u10 * other.u01 + self.u11 * other.u11,
        }
    }

    /// Maximum entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        // Rows of U†U.
        let g00 = self.u00.conj() * self.u00 + self.u10.conj() * self.u10;
        let g01 = self.u00.conj() * self.u01 + self.u10.conj() * self.u11;
        let g10 = self.u01.conj() * self.u00 + self.u11.conj() * self.u10;
        let g11 = self.u01.conj() * self.u01 + self.u11.conj() * self.u11;
        let one = Complex64::new(1.0, 0.0);
        [(g00 - one), g01, g10, (g11 - one)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `sin(x)/x`, accurate through the removable singularity at 0.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        // Taylor: 1 - x²/6 + x⁴/120; at |x| < 1e-6 the x⁴ term is < 1e-26.
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Closed-form propagator `U = exp(-i (w·σ) t / 2)`.
///
/// Returns the identity for `|w| = 0`. Rejects non-finite inputs and
/// negative durations.
pub fn propagator(w: RotationVector, t: f64) -> Result<Unitary2> {
    if !w.is_finite() || !t.is_finite() {
        return Err(Error::invalid("propagator: non-finite input"));
    }
    if t < 0.0 {
        return Err(Error::invalid("propagator: negative duration"));
    }
    let theta_half = 0.5 * w.magnitude() * t;
    let c = theta_half.cos();
    // k = sin(θ/2)/|w| = (t/2)·sinc(θ/2); finite at |w| = 0.
    let k = 0.5 * t * sinc(theta_half);
    Ok(Unitary2 {
        u00: Complex64::new(c, -k * w.wz),
        u01: Complex64::new(-k * w.wy, -k * w.wx),
        u10: Complex64::new(k * w.wy, -k * w.wx),
        u11: Complex64::new(c, k * w.wz),
    })
}

/// Rotation by `angle` about the in-plane (equatorial) axis at azimuth `phi`:
/// `exp(-i angle (cos φ σ_x + sin φ σ_y) / 2)`.
pub fn rot_inplane(phi: f64, angle: f64) -> Unitary2 {
    let c = (0.5 * angle).cos();
    let s = (0.5 * angle).sin();
    Unitary2 {
        u00: Complex64::new(c, 0.0),
        u01: Complex64::new(-s * phi.sin(), -s * phi.cos()),
        u10: Complex64::new(s * phi.sin(), -s * phi.cos()),
        u11: Complex64::new(c, 0.0),
    }
}

/// Apply a unitary to a state.
///
/// Renormalizes if the norm drifted by more than [`NORM_RENORM_THRESHOLD`];
/// drift beyond [`NORM_ERROR_THRESHOLD`] signals a propagator-construction
/// bug and is an error.
pub fn apply(u: &Unitary2, s: &SpinState) -> Result<SpinState> {
    let mut out = SpinState {
        a0: u.u00 * s.a0 + u.u01 * s.a1,
        a1: u.u10 * s.a0 + u.u11 * s.a1,
    };
    let n2 = out.norm_sqr();
    let drift = (n2 - 1.0).abs();
    if drift > NORM_ERROR_THRESHOLD {
        return Err(Error::numeric(format!(
            "state norm drifted by {drift:.3e} (> {NORM_ERROR_THRESHOLD:.0e})"
        )));
    }
    if drift > NORM_RENORM_THRESHOLD {
        let inv = 1.0 / n2.sqrt();
        out.a0 *= inv;
        out.a1 *= inv;
    }
    Ok(out)
}

/// Readout probability of `|0⟩`: `|a0|²`, clamped to `[0, 1]`.
pub fn readout_p0(s: &SpinState) -> f64 {
    s.a0.norm_sqr().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Closed-form detuned-Rabi transition probability
    /// P₁(t) = Ω²/(Ω²+Δ²) · sin²(√(Ω²+Δ²)·t/2) for w = (Ω, 0, Δ) on |0⟩.
    fn detuned_rabi_p1(omega: f64, delta: f64, t: f64) -> f64 {
        let w = (omega * omega + delta * delta).sqrt();
        if w == 0.0 {
            return 0.0;
        }
        let s = (0.5 * w * t).sin();
        omega * omega / (w * w) * s * s
    }

    #[test]
    fn resonant_pi_pulse_inverts_population() {
        let omega = 2.0 * PI * 25e6;
        let u = propagator(RotationVector::new(omega, 0.0, 0.0), PI / omega).unwrap();
        let s = apply(&u, &SpinState::ket0()).unwrap();
        assert_abs_diff_eq!(readout_p0(&s), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.a1.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn z_field_preserves_population() {
        let u = propagator(RotationVector::new(0.0, 0.0, 3.7e6), 1.23e-6).unwrap();
        let s = apply(&u, &SpinState::ket0()).unwrap();
        assert_abs_diff_eq!(readout_p0(&s), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_vector_gives_identity() {
        let u = propagator(RotationVector::new(0.0, 0.0, 0.0), 1e-6).unwrap();
        assert_eq!(u, Unitary2::identity());
    }

    #[test]
    fn two_half_pi_pulses_equal_one_pi_pulse() {
        let omega = 1e7;
        let w = RotationVector::new(omega, 0.0, 0.0);
        let half = propagator(w, 0.5 * PI / omega).unwrap();
        let full = propagator(w, PI / omega).unwrap();
        let composed = half.compose(&half);
        for (a, b) in [
            (composed.u00, full.u00),
            (composed.u01, full.u01),
            (composed.u10, full.u10),
            (composed.u11, full.u11),
        ] {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pi_x_on_plus_x_is_fixed_point() {
        let plus = apply(&rot_inplane(PI / 2.0, PI / 2.0), &SpinState::ket0()).unwrap();
        let flipped = apply(&rot_inplane(0.0, PI), &plus).unwrap();
        // |+⟩ is a σ_x eigenstate: only a global phase may change.
        assert_abs_diff_eq!(readout_p0(&flipped), 0.5, epsilon = 1e-14);
        let overlap = (plus.a0.conj() * flipped.a0 + plus.a1.conj() * flipped.a1).norm();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn detuned_rabi_oracle_spot_checks() {
        for (omega, delta, t) in [
            (1e6, 0.0, 3e-6),
            (1e6, 2e6, 0.7e-6),
            (2.0 * PI * 25e6, 2.0 * PI * 3e6, 55e-9),
        ] {
            let u = propagator(RotationVector::new(omega, 0.0, delta), t).unwrap();
            let s = apply(&u, &SpinState::ket0()).unwrap();
            let p1 = 1.0 - readout_p0(&s);
            assert_abs_diff_eq!(p1, detuned_rabi_p1(omega, delta, t), epsilon = 1e-12);
        }
    }

    #[test]
    fn readout_examples() {
        assert_eq!(readout_p0(&SpinState::ket0()), 1.0);
        assert_eq!(readout_p0(&SpinState::ket1()), 0.0);
        let plus = apply(&rot_inplane(PI / 2.0, PI / 2.0), &SpinState::ket0()).unwrap();
        assert_abs_diff_eq!(readout_p0(&plus), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn non_finite_and_negative_inputs_rejected() {
        assert!(propagator(RotationVector::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
        assert!(propagator(RotationVector::new(0.0, f64::INFINITY, 0.0), 1.0).is_err());
        assert!(propagator(RotationVector::new(1.0, 0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn norm_drift_is_renormalized_or_rejected() {
        // Mild drift (above renorm threshold, below error): renormalized.
        let eps = 4e-11;
        let mild = SpinState {
            a0: Complex64::new((1.0f64 + eps).sqrt(), 0.0),
            a1: Complex64::new(0.0, 0.0),
        };
        let out = apply(&Unitary2::identity(), &mild).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-14);

        // Severe drift: an error.
        let severe = SpinState {
            a0: Complex64::new((1.0f64 + 2e-9).sqrt(), 0.0),
            a1: Complex64::new(0.0, 0.0),
        };
        assert!(apply(&Unitary2::identity(), &severe).is_err());
    }

    proptest! {
        #[test]
        fn prop_propagator_is_unitary(
            wx in -1e9f64..1e9, wy in -1e9f64..1e9, wz in -1e9f64..1e9,
            t in 0.0f64..1e-3,
        ) {
            let u = propagator(RotationVector::new(wx, wy, wz), t).unwrap();
            prop_assert!(u.unitarity_defect() < 1e-12);
        }

        #[test]
        fn prop_propagator_additive_in_time(
            wx in -1e8f64..1e8, wy in -1e8f64..1e8, wz in -1e8f64..1e8,
            t1 in 0.0f64..1e-5, t2 in 0.0f64..1e-5,
        ) {
            let w = RotationVector::new(wx, wy, wz);
            let u12 = propagator(w, t1 + t2).unwrap();
            let u2u1 = propagator(w, t2).unwrap().compose(&propagator(w, t1).unwrap());
            for (a, b) in [
                (u12.u00, u2u1.u00), (u12.u01, u2u1.u01),
                (u12.u10, u2u1.u10), (u12.u11, u2u1.u11),
            ] {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn prop_detuned_rabi_oracle(
            omega in 1e4f64..1e8, delta in -1e8f64..1e8, t in 0.0f64..1e-4,
        ) {
            let u = propagator(RotationVector::new(omega, 0.0, delta), t).unwrap();
            let s = apply(&u, &SpinState::ket0()).unwrap();
            let p1 = 1.0 - readout_p0(&s);
            prop_assert!((p1 - detuned_rabi_p1(omega, delta, t)).abs() < 1e-10);
        }
    }
}
