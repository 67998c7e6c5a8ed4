//! Concurrence, negativity and related two-party measures.

mod bipartition;
mod measures;
mod series;

pub use bipartition::{enumerate_bipartitions, Bipartition};
pub use measures::{
    concurrence, entanglement_of_formation, geometric_mean, global_negativity, negativity, negativity_trace_norm,
    partial_transpose, spin_flip, GlobalNegativity, NEGATIVITY_FLOOR,
};
pub use series::{measure_series, Band, MeasureSeries, SeriesOptions};
