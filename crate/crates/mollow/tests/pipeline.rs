//! Cross-module pipeline checks: sequence text round-trips feeding the
//! engine, thread-count invariance of parallel scans, the continuous-drive
//! sideband Rabi rate, and the sidelobe structure of the pulsed resonance
//! profile against the closed form.

use mollow::dephasing::DephasingModel;
use mollow::engine::{differential_readout, SignalParams};
use mollow::experiments::{
    combined_power_scan, cw_time_trace, fit_cosine_below, linspace, scan_delta,
};
use mollow::frames::FrameConfig;
use mollow::sensitivity::{peak_response, sensitivity_of};
use mollow::sequences::{build_protocol, parse, serialize, Prep, Protocol, PulseMode};
use std::f64::consts::PI;

const TAU: f64 = 43.6e-9;

#[test]
fn parsed_sequence_drives_the_engine_identically() {
    let original = build_protocol(
        Protocol::Xy8,
        16,
        80e-9,
        PulseMode::Finite {
            omega_dd: 2.0 * PI * 25e6,
        },
    )
    .unwrap();
    let reparsed = parse(&serialize(&original)).unwrap();
    // The text format prints 17 significant digits, so every duration,
    // amplitude, and phase survives exactly and the engine output is
    // bit-identical, not merely close.
    for delta in [0.0, PI / (2.0 * 80e-9), 2.0 * PI * 3.3e6] {
        let frame = FrameConfig::resonant_drive(delta);
        for phi in [0.0, PI / 2.0, 1.1] {
            let signal = SignalParams::new(0.05 / original.total_duration(), phi).unwrap();
            let a = differential_readout(&original, &frame, &signal).unwrap();
            let b = differential_readout(&reparsed, &frame, &signal).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "delta {delta}, phi {phi}");
        }
    }
}

#[test]
fn scan_values_do_not_depend_on_the_thread_count() {
    let t = 8.0 * TAU;
    let signal = SignalParams::new(0.1 / t, PI / 2.0).unwrap();
    let deltas = linspace(0.0, 2.0 * PI / TAU, 81);
    let model = DephasingModel::from_t2_star(1.8e-6, 7).unwrap();
    let run = || {
        scan_delta(
            Protocol::Xy8,
            8,
            TAU,
            PulseMode::Finite {
                omega_dd: 2.0 * PI * 25e6,
            },
            &signal,
            &deltas,
            &model,
        )
        .unwrap()
        .values
    };
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(serial, parallel);
}

#[test]
fn cw_sideband_oscillates_at_half_the_signal_rabi_rate() {
    let omega_dd = 2.0 * PI * 25e6;
    let omega_rf = 2.0 * PI * 0.25e6;
    let t_pi = PI / omega_dd;
    let signal = SignalParams::new(omega_rf, PI / 2.0).unwrap();
    // Signal parked on the upper dressed sideband; sample at odd multiples
    // of the drive period so the micromotion phase repeats.
    let durations: Vec<f64> = (0..60).map(|k| (2 * k + 1) as f64 * 2.0 * t_pi).collect();
    let trace = cw_time_trace(
        omega_dd,
        &signal,
        omega_dd,
        &durations,
        Prep::y(),
        &DephasingModel::none(),
    )
    .unwrap();
    let w = fit_cosine_below(&trace.axis1, &trace.values, 3.0 * omega_rf).unwrap();
    let expect = omega_rf / 2.0;
    assert!(
        ((w - expect) / expect).abs() < 2e-3,
        "fitted sideband rate {w:.6e} vs {expect:.6e}"
    );
}

#[test]
fn simulated_sidelobes_match_the_closed_form_ratio() {
    let n_pi = 8;
    let t = n_pi as f64 * TAU;
    let omega_rf = 0.01 / t;
    let d0 = PI / TAU;
    let unit = 2.0 * PI / t;
    let deltas = linspace(d0 - 3.0 * unit, d0 + 3.0 * unit, 481);

    let sim = combined_power_scan(
        Protocol::Cpmg,
        n_pi,
        TAU,
        PulseMode::Ideal,
        omega_rf,
        &deltas,
        &DephasingModel::none(),
    )
    .unwrap();
    let g = sensitivity_of(&build_protocol(Protocol::Cpmg, n_pi, TAU, PulseMode::Ideal).unwrap())
        .unwrap();
    let closed: Vec<f64> = deltas
        .iter()
        .map(|&d| peak_response(&g, omega_rf, d).powi(2))
        .collect();

    // First-sidelobe-to-main ratio: global max, then the first local max
    // past the first null on the high-detuning side.
    let ratio = |ys: &[f64]| -> f64 {
        let (imax, &main) = ys
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let mut i = imax;
        while i + 1 < ys.len() && ys[i + 1] < ys[i] {
            i += 1;
        }
        while i + 1 < ys.len() && ys[i + 1] > ys[i] {
            i += 1;
        }
        ys[i] / main
    };
    let r_sim = ratio(&sim.values);
    let r_closed = ratio(&closed);
    assert!(
        r_closed > 0.0 && ((r_sim - r_closed) / r_closed).abs() < 0.20,
        "sidelobe ratio: simulated {r_sim:.5} vs closed form {r_closed:.5}"
    );
}
