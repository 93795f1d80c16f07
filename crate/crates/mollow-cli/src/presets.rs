//! Built-in run presets, one per published figure panel.
//!
//! Each preset is an ordinary config file embedded in the binary;
//! `mollow preset <name>` is exactly `mollow run` on that text. The
//! physics defaults shared by most panels: drive Rabi rate 25 MHz
//! (t_pi = 20 ns), pulse spacing 43.6 ns, coherence time T2* = 1.8 us.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

pub fn find(name: &str) -> Option<&'static Preset> {
    ALL.iter().find(|p| p.name == name)
}

pub const ALL: &[Preset] = &[
    Preset {
        name: "fig2a",
        description: "Figure 2a: CW sideband oscillation at half the signal Rabi rate",
        config: "\
[run]
experiment = cw_trace
label = fig2a

[sequence]
omega_dd_hz = 25e6

[signal]
omega_rf_hz = 2.5e5
phi_rf_rad = 1.5707963267948966
delta_hz = 25e6

[scan]
duration_start_s = 4e-8
duration_stop_s = 4.76e-6
duration_points = 60

[prep]
prep = y
",
    },
    Preset {
        name: "fig2b",
        description: "Figure 2b: CW central-line response of the in-phase quadrature",
        config: "\
[run]
experiment = cw_trace
label = fig2b

[sequence]
omega_dd_hz = 25e6

[signal]
omega_rf_hz = 2.5e5
phi_rf_rad = 0
delta_hz = 0

[scan]
duration_start_s = 4e-8
duration_stop_s = 4.76e-6
duration_points = 60

[prep]
prep = x
",
    },
    Preset {
        name: "fig3b",
        description: "Figure 3b: combined response power map over pulse spacing and detuning",
        config: "\
[run]
experiment = map
label = fig3b

[sequence]
protocol = cpmg
n_pi = 8
mode = ideal

[signal]
omega_rf_hz = 1e4
delta_start_hz = 1e6
delta_stop_hz = 3e7
delta_points = 201

[scan]
tau_start_s = 2e-8
tau_stop_s = 2e-7
tau_points = 101
tau_spacing = linear
",
    },
    Preset {
        name: "fig3c",
        description: "Figure 3c: filter linewidth narrowing below the inhomogeneous line",
        config: "\
[run]
experiment = linewidth
label = fig3c

[sequence]
protocol = cpmg
n_pi_list = 8 16 32 64
tau_s = 1e-7
mode = ideal

[signal]
omega_rf_hz = 7.46e3
phi_rf_rad = 1.5707963267948966

[dephasing]
t2_star_s = 1.8e-6
nodes = 21
",
    },
    Preset {
        name: "fig3d",
        description: "Figure 3d: detuning response of all four protocols at tau = 43.6 ns",
        config: "\
[run]
experiment = scan_delta
label = fig3d

[sequence]
protocol = all
n_pi = 24
tau_s = 4.36e-8
mode = ideal

[signal]
omega_rf_hz = 2.387324146378430e5
phi_rf_rad = 1.5707963267948966
delta_start_hz = 0
delta_stop_hz = 2.293577981651376e7
delta_points = 401
",
    },
    Preset {
        name: "fig4b",
        description:
            "Figure 4b: slow signal-induced Rabi oscillation on the phase-switched resonance",
        config: "\
[run]
experiment = rabi
label = fig4b

[sequence]
protocol = xy8-ps
n_pi_list = 8 16 24 32 40 48 56 64 72 80 88 96 104 112 120
tau_s = 4.36e-8
mode = ideal

[signal]
omega_rf_hz = 1.5e5
phi_rf_rad = 1.5707963267948966
delta_hz = 0

[dephasing]
t2_star_s = 1.8e-6
nodes = 21
",
    },
    Preset {
        name: "fig4c",
        description: "Figure 4c: response breakdown as the pulse spacing approaches T2*",
        config: "\
[run]
experiment = breakdown
label = fig4c

[sequence]
protocol = xy8-ps
n_pi = 16

[scan]
theta0_rad = 0.5
tau_start_s = 3.6e-8
tau_stop_s = 1.08e-5
tau_points = 25
tau_spacing = geom

[dephasing]
t2_star_s = 1.8e-6
nodes = 21
",
    },
    Preset {
        name: "s1",
        description: "Figure S1: free-induction decay and its inhomogeneously broadened line",
        config: "\
[run]
experiment = fid
label = s1

[dephasing]
t2_star_s = 1.8e-6
nodes = 21

[fid]
carrier_hz = 2e6
t_max_s = 3.6e-6
dt_s = 4e-8
",
    },
    Preset {
        name: "s3b",
        description: "Figure S3b: protocol comparison over the symmetric detuning range",
        config: "\
[run]
experiment = scan_delta
label = s3b

[sequence]
protocol = all
n_pi = 24
tau_s = 4.36e-8
mode = ideal

[signal]
omega_rf_hz = 2.387324146378430e5
phi_rf_rad = 1.5707963267948966
delta_start_hz = -2.293577981651376e7
delta_stop_hz = 2.293577981651376e7
delta_points = 481
",
    },
    Preset {
        name: "s3c",
        description: "Figure S3c: XY4 Rabi oscillation driven on its pulse-spacing resonance",
        config: "\
[run]
experiment = rabi
label = s3c

[sequence]
protocol = xy4
n_pi_list = 24 48 72 96 120 144 168 192 216 240 264 288 312 336 360 384 408 432 456 480
tau_s = 4.36e-8
mode = ideal

[signal]
omega_rf_hz = 2.387324146378430e5
phi_rf_rad = 1.5707963267948966
delta_hz = 5.733944954128440e6
",
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn presets_are_unique_documented_and_parseable() {
        assert!(ALL.len() >= 10);
        for (i, p) in ALL.iter().enumerate() {
            assert!(
                ALL[i + 1..].iter().all(|q| q.name != p.name),
                "duplicate preset name {}",
                p.name
            );
            assert!(
                p.description.contains("Figure"),
                "{} must cite its figure",
                p.name
            );
            let cfg = parse_config(p.config)
                .unwrap_or_else(|e| panic!("preset {} fails to parse: {e}", p.name));
            // files land under the preset's own name
            assert_eq!(cfg.label, p.name, "label mismatch in {}", p.name);
            assert!(cfg.out_dir.is_none(), "presets must not pin an out dir");
        }
        assert!(find("fig3d").is_some());
        assert!(find("nope").is_none());
    }
}
