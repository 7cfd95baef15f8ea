//! Equilibrium checks, support-constrained solving and punishment search.

mod nash;
mod punish;
mod solve;
mod system;

pub use nash::{enumerate_pure_nash, is_nash, is_pure_nash, Deviation, NashCheck};
pub use punish::{
    find_punishment_equilibrium, find_punishment_or_pure, probe_against, probe_strong_punishability, sample_perturbation, ProbeFailure,
    PunishabilityReport, Punishment, PunishmentSource,
};
pub use solve::{is_non_degenerate, solve_on_support, DegeneracyReport, SolveOutcome, RESIDUAL_GUARD};
pub use system::{build_characteristic_system, relative_det_test, CharacteristicSystem, Equation, EquationKind};
