/// Boltzmann constant over Planck constant, GHz per kelvin.
pub const K_B_OVER_H_GHZ_PER_K: f64 = 20.8366;

/// Largest system handled by the dense representation.
pub const MAX_QUBITS: usize = 12;

/// Operating temperature of the reference experiment, millikelvin.
pub const DEFAULT_TEMPERATURE_MK: f64 = 12.5;

/// Fractional spread of per-qubit tunneling amplitudes.
pub const DELTA_SPREAD: f64 = 0.08;

/// Fractional spread of coupler energies.
pub const COUPLING_SPREAD: f64 = 0.05;

/// Ferromagnetic coupling of the reference instances.
pub const FM_COUPLING: f64 = -2.5;
