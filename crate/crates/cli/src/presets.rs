//! Named experiments and the assertions each one carries.

use crate::config::{ExperimentConfig, GaugeConfig, ModelKind};

pub const PRESET_NAMES: [&str; 6] =
    ["fig-element", "fig-fidelity", "fig-loss", "fig-sweep-random", "check-lindblad", "check-gauge"];

/// Presets run by `check --all`.
pub const CHECK_NAMES: [&str; 2] = ["check-lindblad", "check-gauge"];

/// Assertions beyond the invariant and positivity checks every sweep carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepChecks {
    /// Output element ordered by Γ at the longest run time.
    Element,
    /// Normalized fidelity increasing in T for each Γ.
    Fidelity,
    /// Losses increasing in Γ at T = 100 and the small-Γ fidelities close together.
    Loss,
    /// Interior minimum of the maximal error for Γ > 0, decrease for Γ = 0.
    InteriorMinimum,
    /// Nothing beyond the common checks.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Sweep(SweepChecks),
    Lindblad,
    Gauge,
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub config: ExperimentConfig,
}

fn holonomy(gammas: &[f64], times: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelKind::Holonomy,
        gamma_list: gammas.to_vec(),
        t_list: times,
        dt: adiabat::experiment::DEFAULT_DT,
        initial_state: None,
        path: None,
        gauge: GaugeConfig::EquatorRegular,
        seed: adiabat::experiment::DEFAULT_SEED,
        dim: 4,
        outputs: None,
        checkpoints: adiabat::experiment::DEFAULT_CHECKPOINTS,
    }
}

const HOLONOMY_GAMMAS: [f64; 3] = [0.0, 0.01, 0.1];

fn every_twenty() -> Vec<f64> {
    (1..=10).map(|i| 20.0 * i as f64).collect()
}

pub fn preset(name: &str) -> Option<Preset> {
    let (name, kind, config) = match name {
        "fig-element" => ("fig-element", PresetKind::Sweep(SweepChecks::Element), holonomy(&HOLONOMY_GAMMAS, every_twenty())),
        "fig-fidelity" => (
            "fig-fidelity",
            PresetKind::Sweep(SweepChecks::Fidelity),
            holonomy(&HOLONOMY_GAMMAS, vec![10.0, 20.0, 40.0, 80.0, 160.0]),
        ),
        "fig-loss" => ("fig-loss", PresetKind::Sweep(SweepChecks::Loss), holonomy(&HOLONOMY_GAMMAS, every_twenty())),
        "fig-sweep-random" => {
            let mut config = holonomy(&[0.0, 0.002, 0.004, 0.006, 0.008, 0.01], vec![10.0, 20.0, 40.0, 80.0, 160.0, 320.0]);
            config.model = ModelKind::RandomRotating;
            ("fig-sweep-random", PresetKind::Sweep(SweepChecks::InteriorMinimum), config)
        }
        "check-lindblad" => ("check-lindblad", PresetKind::Lindblad, holonomy(&HOLONOMY_GAMMAS, vec![100.0])),
        "check-gauge" => ("check-gauge", PresetKind::Gauge, holonomy(&HOLONOMY_GAMMAS, vec![100.0])),
        _ => return None,
    };
    Some(Preset { name, kind, config })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves_and_validates() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            p.config.validate().unwrap();
        }
        assert!(preset("fig-nothing").is_none());
    }

    #[test]
    fn element_sweep_has_thirty_points() {
        assert_eq!(preset("fig-element").unwrap().config.points().len(), 30);
    }
}
