use rayon::prelude::*;

use super::{construct_witness_operator, sdp_upper_bound, SdpResult};
use crate::entangle::{Band, Bipartition};
use crate::error::{Error, Result};
use crate::model::{assemble_with_scales, sample_rng, AnnealSchedule, Perturbation, ProblemInstance};
use crate::scalar::Real;
use crate::spectra::eigendecompose;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessOptions<T> {
    pub samples: usize,
    pub seed: u64,
    pub perturbation: Perturbation<T>,
}

impl<T: Real> Default for RobustnessOptions<T> {
    fn default() -> Self {
        Self { samples: 1000, seed: 0, perturbation: Perturbation::default() }
    }
}

/// Distribution of SDP bounds over perturbed Hamiltonians for one cut.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessSummary<T> {
    pub partition: Bipartition,
    pub samples: usize,
    /// Bound for the unperturbed Hamiltonian.
    pub unperturbed: T,
    /// Bounds of the samples that solved, in sample order.
    pub bounds: Vec<T>,
    /// Sample index and message for each sample that failed.
    pub failures: Vec<(usize, String)>,
}

impl<T: Real> RobustnessSummary<T> {
    pub fn certified(&self) -> usize {
        self.bounds.iter().filter(|&&b| b < T::zero()).count()
    }

    /// Certified samples over all samples; failed samples count as not
    /// certified.
    pub fn certified_fraction(&self) -> T {
        if self.samples == 0 {
            return T::zero();
        }
        T::from_usize(self.certified()).expect("fits") / T::from_usize(self.samples).expect("fits")
    }

    /// Linearly interpolated quantile of the solved bounds.
    pub fn quantile(&self, q: T) -> Option<T> {
        quantile(&self.bounds, q)
    }
}

pub(crate) fn quantile<T: Real>(values: &[T], q: T) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite bounds"));
    let pos = q.max(T::zero()).min(T::one()) * T::from_usize(sorted.len() - 1).expect("fits");
    let lo = pos.floor().to_usize().expect("index fits");
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - T::from_usize(lo).expect("fits");
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Ground-state witness for `part` and its SDP bound for one instance.
pub(crate) fn bound_for<T: Real>(
    instance: &ProblemInstance<T>,
    delta: T,
    escale: T,
    part: &Bipartition,
    p1: Band<T>,
    p2: Band<T>,
) -> Result<SdpResult<T>> {
    let spectrum = eigendecompose(&assemble_with_scales(instance, delta, escale))?;
    let w = construct_witness_operator(&spectrum.state(0), part)?;
    sdp_upper_bound(&w, &spectrum, p1, p2)
}

/// Re-solves the witness bound for `samples` perturbed copies of the
/// Hamiltonian. Each sample draws from its own stream of `seed`, rebuilds
/// the two lowest eigenstates and the witness, and keeps the measured
/// populations `p1`, `p2` fixed.
#[allow(clippy::too_many_arguments)]
pub fn robustness_monte_carlo<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    part: &Bipartition,
    p1: Band<T>,
    p2: Band<T>,
    options: &RobustnessOptions<T>,
) -> Result<RobustnessSummary<T>> {
    if options.samples == 0 {
        return Err(Error::validation("robustness study needs at least one sample"));
    }
    let v = schedule.at(s)?;
    let unperturbed = bound_for(instance, v.delta, v.escale, part, p1, p2)?.upper_bound;
    let outcomes: Vec<Result<T>> = (0..options.samples)
        .into_par_iter()
        .map(|k| {
            let perturbed = options.perturbation.apply(instance, &mut sample_rng(options.seed, k as u64))?;
            Ok(bound_for(&perturbed, v.delta, v.escale, part, p1, p2)?.upper_bound)
        })
        .collect();
    let mut bounds = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(b) => bounds.push(b),
            Err(e) => failures.push((k, e.to_string())),
        }
    }
    Ok(RobustnessSummary { partition: *part, samples: options.samples, unperturbed, bounds, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.0), Some(1.0));
        assert_eq!(quantile(&v, 1.0), Some(4.0));
        assert_eq!(quantile(&v, 0.5), Some(2.5));
        assert_eq!(quantile::<f64>(&[], 0.5), None);
    }

    #[test]
    fn zero_spread_reproduces_unperturbed_bound() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let inst = ProblemInstance::ring(4, -2.5);
        let part = Bipartition::new(4, &[0, 1]).unwrap();
        let p1 = Band { value: 0.95, err: 0.01 };
        let p2 = Band { value: 0.05, err: 0.01 };
        let opts = RobustnessOptions { samples: 3, seed: 7, perturbation: Perturbation::none() };
        let out = robustness_monte_carlo(&inst, &sched, 0.3, &part, p1, p2, &opts).unwrap();
        assert!(out.failures.is_empty());
        assert!(out.bounds.iter().all(|&b| (b - out.unperturbed).abs() < 1e-12));
    }
}
