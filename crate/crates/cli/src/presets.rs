//! Built-in scenarios, named by the figure they regenerate, and the
//! named device parameter sets.
//!
//! Distance presets use the APD set `parameter1`. Print one with
//! `mdiqkd presets --show <name>`, switch `device.preset` to `parameter2`
//! for the SNSPD variant and run the edited file.

use mdiqkd::channel::DeviceParams;

use crate::config::{parse, Scenario};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

impl Preset {
    pub fn scenario(&self) -> Result<Scenario> {
        parse(self.config)
    }
}

macro_rules! scenario {
    ($($line:expr),* $(,)?) => { concat!($($line, "\n"),*) };
}

macro_rules! distances {
    () => {
        "sweep.values = [0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]"
    };
}
macro_rules! mu_grid {
    () => {
        "grid.min = 1e-3\ngrid.max = 1.0\ngrid.points = 31"
    };
}
macro_rules! decoy_grid {
    () => {
        "grid.min = 0.01\ngrid.max = 1.0\ngrid.points = 11"
    };
}
macro_rules! losses {
    () => {
        "sweep.values = [0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60]"
    };
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        description: "phase encoding, two bases, APD, key rate vs distance",
        config: scenario!(
            "protocol.family = \"phase\"",
            "protocol.bases = 2",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\"]",
        ),
    },
    Preset {
        name: "fig2_one_basis",
        description: "phase encoding, one basis, APD, key rate vs distance",
        config: scenario!(
            "protocol.family = \"phase\"",
            "protocol.bases = 1",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\"]",
        ),
    },
    Preset {
        name: "fig2_three_bases",
        description: "phase encoding, three bases, APD, key rate vs distance",
        config: scenario!(
            "protocol.family = \"phase\"",
            "protocol.bases = 3",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\"]",
        ),
    },
    Preset {
        name: "fig3_nu0",
        description: "phase encoding with Trojan leakage nu = 0, SDP vs quantum coin, APD",
        config: scenario!(
            "protocol.family = \"phase_trojan\"",
            "protocol.bases = 2",
            "protocol.nu = 0.0",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\", \"coin\"]",
        ),
    },
    Preset {
        name: "fig3_nu1e-5",
        description: "phase encoding with Trojan leakage nu = 1e-5, SDP vs quantum coin, APD",
        config: scenario!(
            "protocol.family = \"phase_trojan\"",
            "protocol.bases = 2",
            "protocol.nu = 1e-5",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\", \"coin\"]",
        ),
    },
    Preset {
        name: "fig3_nu1e-4",
        description: "phase encoding with Trojan leakage nu = 1e-4, SDP vs quantum coin, APD",
        config: scenario!(
            "protocol.family = \"phase_trojan\"",
            "protocol.bases = 2",
            "protocol.nu = 1e-4",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\", \"coin\"]",
        ),
    },
    Preset {
        name: "fig3_nu1e-3",
        description: "phase encoding with Trojan leakage nu = 1e-3, SDP vs quantum coin, APD",
        config: scenario!(
            "protocol.family = \"phase_trojan\"",
            "protocol.bases = 2",
            "protocol.nu = 1e-3",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\", \"coin\"]",
        ),
    },
    Preset {
        name: "fig4",
        description: "decoy-state time-bin protocol with Trojan leakage nu = 1e-4, SDP vs quantum coin, APD",
        config: scenario!(
            "protocol.family = \"decoy\"",
            "protocol.nu = 1e-4",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            decoy_grid!(),
            "methods = [\"sdp\", \"coin\"]",
        ),
    },
    Preset {
        name: "fig5_phase",
        description: "coherent-state phase encoding without leakage, for comparison with fig5_decoy, APD",
        config: scenario!(
            "protocol.family = \"phase\"",
            "protocol.bases = 2",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            mu_grid!(),
            "methods = [\"sdp\"]",
        ),
    },
    Preset {
        name: "fig5_decoy",
        description: "decoy-state protocol without leakage, for comparison with fig5_phase, APD",
        config: scenario!(
            "protocol.family = \"decoy\"",
            "protocol.nu = 0.0",
            "device.preset = \"parameter1\"",
            "sweep.axis = \"distance\"",
            distances!(),
            decoy_grid!(),
            "methods = [\"sdp\"]",
        ),
    },
    Preset {
        name: "fig6a_two_states",
        description: "phase matching, two test states, noiseless devices, vs total loss with PLOB and infinite test states",
        config: scenario!(
            "protocol.family = \"phase_matching\"",
            "protocol.bases = 2",
            "device.preset = \"ideal\"",
            "sweep.axis = \"loss\"",
            losses!(),
            "grid.min = 1e-3\ngrid.max = 1.0\ngrid.points = 16",
            "methods = [\"sdp\", \"plob\", \"infinite_test\"]",
        ),
    },
    Preset {
        name: "fig6a_four_states",
        description: "phase matching, four test states, noiseless devices, vs total loss with PLOB",
        config: scenario!(
            "protocol.family = \"phase_matching\"",
            "protocol.bases = 3",
            "device.preset = \"ideal\"",
            "sweep.axis = \"loss\"",
            losses!(),
            "grid.min = 1e-3\ngrid.max = 1.0\ngrid.points = 8",
            "methods = [\"sdp\", \"plob\", \"infinite_test\"]",
        ),
    },
    Preset {
        name: "fig6b_two_states",
        description: "phase matching, two test states, SNSPD parameters, vs total loss with PLOB",
        config: scenario!(
            "protocol.family = \"phase_matching\"",
            "protocol.bases = 2",
            "device.preset = \"parameter2\"",
            "sweep.axis = \"loss\"",
            losses!(),
            "grid.min = 1e-3\ngrid.max = 1.0\ngrid.points = 16",
            "methods = [\"sdp\", \"plob\"]",
        ),
    },
    Preset {
        name: "fig6b",
        description: "phase matching, four test states, SNSPD parameters, vs total loss with PLOB",
        config: scenario!(
            "protocol.family = \"phase_matching\"",
            "protocol.bases = 3",
            "device.preset = \"parameter2\"",
            "sweep.axis = \"loss\"",
            losses!(),
            "grid.min = 1e-3\ngrid.max = 1.0\ngrid.points = 8",
            "methods = [\"sdp\", \"plob\"]",
        ),
    },
];

/// Named device parameter sets accepted by `device.preset`.
pub const DEVICE_PRESETS: &[(&str, &str)] = &[
    ("parameter1", "APD detectors"),
    ("parameter2", "SNSPD detectors"),
    ("ideal", "noiseless, lossless detectors"),
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

pub fn device_preset(name: &str) -> Option<DeviceParams> {
    DEVICE_PRESETS.iter().any(|(n, _)| *n == name).then(|| DeviceParams::preset(name)).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_presets_resolve() {
        for (name, _) in DEVICE_PRESETS {
            assert!(device_preset(name).is_some(), "{name}");
        }
        assert_eq!(device_preset("parameter1"), Some(DeviceParams::parameter1()));
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }
}
