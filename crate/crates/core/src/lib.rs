#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > y)` is deliberate: it also catches NaN

pub mod constants;
pub mod entangle;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod qts;
pub mod scalar;
pub mod spectra;
pub mod thermal;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type AnnealSchedule64 = model::AnnealSchedule<f64>;
pub type AnnealSchedule32 = model::AnnealSchedule<f32>;
pub type ProblemInstance64 = model::ProblemInstance<f64>;
pub type ProblemInstance32 = model::ProblemInstance<f32>;
pub type HermitianOperator64 = model::HermitianOperator<f64>;
pub type HermitianOperator32 = model::HermitianOperator<f32>;
pub type Spectrum64 = spectra::Spectrum<f64>;
pub type Spectrum32 = spectra::Spectrum<f32>;
pub type DensityMatrix64 = thermal::DensityMatrix<f64>;
pub type DensityMatrix32 = thermal::DensityMatrix<f32>;
pub type WitnessOperator64 = witness::WitnessOperator<f64>;
pub type WitnessOperator32 = witness::WitnessOperator<f32>;
