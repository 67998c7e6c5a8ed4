//! Probe-qubit tunneling spectroscopy: rate spectra, peak fits and
//! equilibrium population extraction.

mod fit;
mod populations;
mod rate;

pub use fit::{fit_gaussians, fit_peaks, Peak, PeakFit};
pub use populations::{estimate_populations, simulate_population_protocol, PopulationEstimate, ProtocolResult};
pub use rate::{gamma0, lineshape_value, resonances, simulate_rate_spectrum, RateSpectrum, Resonances};
