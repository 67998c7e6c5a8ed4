//! Schedules, problem instances and Hamiltonian assembly.

mod hamiltonian;
mod instance;
mod perturb;
mod probe;
mod schedule;

pub use hamiltonian::{
    assemble_hamiltonian, assemble_with_scales, flip_mask, ising_energies, sigma_z_diagonal, spin, HermitianOperator,
};
pub use instance::ProblemInstance;
pub use perturb::{sample_rng, Perturbation};
pub use probe::{assemble_probe_hamiltonian, left_hamiltonian, Lineshape, ProbeConfig};
pub use schedule::{AnnealSchedule, ScheduleValue, SYNTHETIC_LABEL};
