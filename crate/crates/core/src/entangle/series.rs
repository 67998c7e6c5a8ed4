use rayon::prelude::*;

use crate::entangle::{concurrence, entanglement_of_formation, global_negativity};
use crate::error::{Error, Result};
use crate::model::{assemble_with_scales, sample_rng, AnnealSchedule, Perturbation, ProblemInstance};
use crate::scalar::Real;
use crate::spectra::eigendecompose;
use crate::thermal::{equilibrium_state, Ensemble};

/// Central value with a one-standard-deviation spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<T> {
    pub value: T,
    pub err: T,
}

/// Options for [`measure_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOptions<T> {
    /// Levels kept in the density matrix (`None` keeps the full spectrum).
    pub levels: Option<usize>,
    /// Monte-Carlo samples for the error band; 0 disables it.
    pub samples: usize,
    pub seed: u64,
    pub perturbation: Perturbation<T>,
    /// Also evaluate the negativity for two-qubit systems.
    pub negativity: bool,
}

impl<T: Real> Default for SeriesOptions<T> {
    fn default() -> Self {
        Self { levels: Some(2), samples: 1000, seed: 0, perturbation: Perturbation::default(), negativity: true }
    }
}

/// Entanglement measures along the anneal.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries<T> {
    pub s: Vec<T>,
    /// Two-qubit systems only.
    pub concurrence: Option<Vec<Band<T>>>,
    /// Two-qubit systems only; from the central concurrence.
    pub formation: Option<Vec<T>>,
    /// Geometric-mean negativity over all cuts.
    pub negativity: Option<Vec<Band<T>>>,
}

struct Point<T> {
    concurrence: Option<T>,
    negativity: Option<T>,
}

fn evaluate<T: Real>(
    instance: &ProblemInstance<T>,
    delta: T,
    escale: T,
    ensemble: Ensemble<T>,
    options: &SeriesOptions<T>,
) -> Result<Point<T>> {
    let spectrum = eigendecompose(&assemble_with_scales(instance, delta, escale))?;
    let rho = equilibrium_state(&spectrum, ensemble, options.levels)?;
    let two = instance.n() == 2;
    Ok(Point {
        concurrence: if two { Some(concurrence(&rho)?) } else { None },
        negativity: if !two || options.negativity { Some(global_negativity(&rho)?.value) } else { None },
    })
}

fn std_dev<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    let n = T::from_usize(xs.len()).expect("len fits");
    let mean = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let var = xs.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / (n - T::one());
    var.sqrt()
}

/// Concurrence (two qubits) and global negativity of the equilibrium state
/// at each `s`, with error bands from resampling the per-qubit tunneling
/// amplitudes and coupler energies. Sample `k` at every `s` uses the same
/// perturbed instance (stream `k` of `seed`).
pub fn measure_series<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    ensemble: Ensemble<T>,
    s_grid: &[T],
    options: &SeriesOptions<T>,
) -> Result<MeasureSeries<T>> {
    if s_grid.is_empty() {
        return Err(Error::validation("s grid is empty"));
    }
    if instance.n() < 2 {
        return Err(Error::validation("entanglement measures need at least two qubits"));
    }
    let scales = s_grid.iter().map(|&s| schedule.at(s)).collect::<Result<Vec<_>>>()?;
    let perturbed: Vec<ProblemInstance<T>> = (0..options.samples)
        .map(|k| options.perturbation.apply(instance, &mut sample_rng(options.seed, k as u64)))
        .collect::<Result<_>>()?;

    let points = scales
        .par_iter()
        .map(|v| {
            let centre = evaluate(instance, v.delta, v.escale, ensemble, options)?;
            let samples = perturbed
                .par_iter()
                .map(|inst| evaluate(inst, v.delta, v.escale, ensemble, options))
                .collect::<Result<Vec<_>>>()?;
            Ok((centre, samples))
        })
        .collect::<Result<Vec<_>>>()?;

    let band = |pick: fn(&Point<T>) -> Option<T>| -> Option<Vec<Band<T>>> {
        points
            .iter()
            .map(|(centre, samples)| {
                let value = pick(centre)?;
                let draws: Vec<T> = samples.iter().filter_map(pick).collect();
                Some(Band { value, err: std_dev(&draws) })
            })
            .collect()
    };
    let concurrence_band = band(|p| p.concurrence);
    let formation = concurrence_band
        .as_ref()
        .map(|b| b.iter().map(|x| entanglement_of_formation(x.value)).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(MeasureSeries {
        s: s_grid.to_vec(),
        concurrence: concurrence_band,
        formation,
        negativity: band(|p| p.negativity),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::Temperature;

    #[test]
    fn fm2_series_shape() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let t = Temperature::from_millikelvin(12.5).unwrap();
        let grid = [0.2, 0.4, 0.7];
        let opts = SeriesOptions { samples: 8, ..SeriesOptions::default() };
        let out = measure_series(&ProblemInstance::fm2(), &sched, Ensemble::Thermal(t), &grid, &opts).unwrap();
        let c: Vec<f64> = out.concurrence.as_ref().unwrap().iter().map(|b| b.value).collect();
        assert!(c[1] > c[0] && c[1] > c[2], "{c:?}");
        assert!(out.concurrence.unwrap().iter().all(|b| b.err >= 0.0));
        assert_eq!(out.formation.unwrap().len(), 3);
        let again = measure_series(&ProblemInstance::fm2(), &sched, Ensemble::Thermal(t), &grid, &opts).unwrap();
        assert_eq!(out.negativity, again.negativity);
    }

    #[test]
    fn empty_grid_rejected() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let opts = SeriesOptions { samples: 0, ..SeriesOptions::default() };
        assert!(measure_series(&ProblemInstance::fm2(), &sched, Ensemble::Ground, &[], &opts).is_err());
    }
}
