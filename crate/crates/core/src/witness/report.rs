use rayon::prelude::*;

use super::robustness::{bound_for, quantile};
use super::{cross_susceptibility, witness_r, witness_wchi, RobustnessOptions, SusceptibilityMatrix};
use crate::entangle::{enumerate_bipartitions, Band, Bipartition};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::model::{assemble_with_scales, sample_rng, AnnealSchedule, ProblemInstance};
use crate::scalar::Real;
use crate::spectra::eigendecompose;
use crate::thermal::{populations, Ensemble};

/// One-sigma quantiles of a normal distribution.
const LOWER_QUANTILE: f64 = 0.158_655_253_931_457;
const UPPER_QUANTILE: f64 = 0.841_344_746_068_543;

/// Witness value for one cut at one `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessRow<T> {
    pub s: T,
    pub partition: Bipartition,
    /// `R_AB` or the SDP upper bound; NaN when the state has no witness on
    /// this cut.
    pub value: T,
    pub err_lo: T,
    pub err_hi: T,
    pub certified: bool,
}

fn rows_table<T: Real>(rows: &[WitnessRow<T>], value_column: &str) -> Table {
    let mut t = Table::new(["s", "partition_id", value_column, "bound_err_lo", "bound_err_hi", "certified"]);
    for r in rows {
        t.push(vec![
            r.s.to_f64_lossy(),
            f64::from(r.partition.mask()),
            r.value.to_f64_lossy(),
            r.err_lo.to_f64_lossy(),
            r.err_hi.to_f64_lossy(),
            if r.certified { 1.0 } else { 0.0 },
        ]);
    }
    t
}

/// Columns `s, partition_id, bound, bound_err_lo, bound_err_hi, certified`.
pub fn sdp_table<T: Real>(rows: &[WitnessRow<T>]) -> Table {
    rows_table(rows, "bound")
}

/// Columns `s, partition_id, r_ab, bound_err_lo, bound_err_hi, certified`.
pub fn susceptibility_table<T: Real>(rows: &[WitnessRow<T>]) -> Table {
    rows_table(rows, "r_ab")
}

/// Median, minimum and maximum bound over cuts at each `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSummary<T> {
    pub s: T,
    pub median: T,
    pub min: T,
    pub max: T,
    /// Every cut at this `s` has a negative bound.
    pub all_certified: bool,
}

pub fn summarize_bounds<T: Real>(rows: &[WitnessRow<T>]) -> Vec<BoundSummary<T>> {
    let mut out: Vec<BoundSummary<T>> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let s = rows[start].s;
        let end = start + rows[start..].iter().take_while(|r| r.s == s).count();
        let group = &rows[start..end];
        let values: Vec<T> = group.iter().map(|r| r.value).filter(|v| v.is_finite_value()).collect();
        let nan = T::from_f64(f64::NAN).unwrap_or_else(T::zero);
        out.push(BoundSummary {
            s,
            median: quantile(&values, T::lit(0.5)).unwrap_or(nan),
            min: quantile(&values, T::zero()).unwrap_or(nan),
            max: quantile(&values, T::one()).unwrap_or(nan),
            all_certified: group.iter().all(|r| r.certified),
        });
        start = end;
    }
    out
}

/// Columns `s, median, min, max, all_certified`.
pub fn summary_table<T: Real>(summary: &[BoundSummary<T>]) -> Table {
    let mut t = Table::new(["s", "median", "min", "max", "all_certified"]);
    for r in summary {
        t.push(vec![
            r.s.to_f64_lossy(),
            r.median.to_f64_lossy(),
            r.min.to_f64_lossy(),
            r.max.to_f64_lossy(),
            if r.all_certified { 1.0 } else { 0.0 },
        ]);
    }
    t
}

/// Options for [`sdp_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSweepOptions<T> {
    /// Absolute uncertainties on the measured `P_1` and `P_2`.
    pub delta: (T, T),
    pub ensemble: Ensemble<T>,
    /// Cuts to evaluate; all of them when `None`.
    pub partitions: Option<Vec<Bipartition>>,
    /// Error bars from perturbed Hamiltonians (one-sigma quantiles around the
    /// bound); none when `None`.
    pub robustness: Option<RobustnessOptions<T>>,
}

fn cuts_for(n: usize, partitions: &Option<Vec<Bipartition>>) -> Result<Vec<Bipartition>> {
    match partitions {
        Some(p) if p.is_empty() => Err(Error::validation("partition list is empty")),
        Some(p) => {
            if p.iter().any(|c| c.n() != n) {
                return Err(Error::validation("partition size does not match the instance"));
            }
            Ok(p.clone())
        }
        None => enumerate_bipartitions(n),
    }
}

fn check_grid<T: Real>(s_grid: &[T]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::validation("s grid is empty"));
    }
    Ok(())
}

/// SDP upper bounds of the ground-state witness on each cut along the anneal,
/// with populations taken from the equilibrium ensemble.
pub fn sdp_sweep<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s_grid: &[T],
    options: &SdpSweepOptions<T>,
) -> Result<Vec<WitnessRow<T>>> {
    check_grid(s_grid)?;
    let cuts = cuts_for(instance.n(), &options.partitions)?;
    let perturbed = match &options.robustness {
        Some(r) => (0..r.samples)
            .map(|k| r.perturbation.apply(instance, &mut sample_rng(r.seed, k as u64)))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let mut rows = Vec::new();
    for &s in s_grid {
        let v = schedule.at(s)?;
        let spectrum = eigendecompose(&assemble_with_scales(instance, v.delta, v.escale))?;
        let pops = populations(&spectrum, options.ensemble);
        let p1 = Band { value: pops[0], err: options.delta.0 };
        let p2 = Band { value: pops[1], err: options.delta.1 };
        let per_cut = cuts
            .par_iter()
            .map(|cut| {
                let value = match bound_for(instance, v.delta, v.escale, cut, p1, p2) {
                    Ok(r) => r.upper_bound,
                    Err(Error::NoWitness { .. }) => {
                        return Ok(WitnessRow {
                            s,
                            partition: *cut,
                            value: T::from_f64(f64::NAN).unwrap_or_else(T::zero),
                            err_lo: T::zero(),
                            err_hi: T::zero(),
                            certified: false,
                        })
                    }
                    Err(e) => return Err(e),
                };
                let samples: Vec<T> = perturbed
                    .iter()
                    .filter_map(|inst| bound_for(inst, v.delta, v.escale, cut, p1, p2).ok())
                    .map(|r| r.upper_bound)
                    .collect();
                let (err_lo, err_hi) = match (
                    quantile(&samples, T::lit(LOWER_QUANTILE)),
                    quantile(&samples, T::lit(UPPER_QUANTILE)),
                ) {
                    (Some(lo), Some(hi)) => ((value - lo).max(T::zero()), (hi - value).max(T::zero())),
                    _ => (T::zero(), T::zero()),
                };
                Ok(WitnessRow { s, partition: *cut, value, err_lo, err_hi, certified: value < T::zero() })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(per_cut);
    }
    Ok(rows)
}

/// `R_AB` on each cut and `W_χ` along the anneal.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilitySweep<T: Real> {
    /// `err_lo = err_hi` is the change of `R_AB` between the half-step and
    /// the extrapolated susceptibility. `certified` marks `R_AB > 0`.
    pub rows: Vec<WitnessRow<T>>,
    pub w_chi: Vec<Band<T>>,
    pub matrices: Vec<SusceptibilityMatrix<T>>,
}

/// `W_χ` is only reported when every cut is evaluated; with an explicit
/// partition list it is computed over the listed cuts.
pub fn susceptibility_sweep<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s_grid: &[T],
    ensemble: Ensemble<T>,
    step: T,
    partitions: &Option<Vec<Bipartition>>,
) -> Result<SusceptibilitySweep<T>> {
    check_grid(s_grid)?;
    let cuts = cuts_for(instance.n(), partitions)?;
    let mut rows = Vec::new();
    let mut w_chi = Vec::new();
    let mut matrices = Vec::new();
    for &s in s_grid {
        let chi = cross_susceptibility(instance, schedule, s, ensemble, step)?;
        let fine = SusceptibilityMatrix { chi: chi.fine.clone(), ..chi.clone() };
        let mut r_best = Vec::with_capacity(cuts.len());
        let mut r_fine = Vec::with_capacity(cuts.len());
        for cut in &cuts {
            let r = witness_r(&chi, instance, cut)?;
            let rf = witness_r(&fine, instance, cut)?;
            let err = (r - rf).abs();
            rows.push(WitnessRow { s, partition: *cut, value: r, err_lo: err, err_hi: err, certified: r > T::zero() });
            r_best.push(r);
            r_fine.push(rf);
        }
        let w = witness_wchi(&r_best);
        w_chi.push(Band { value: w, err: (w - witness_wchi(&r_fine)).abs() });
        matrices.push(chi);
    }
    Ok(SusceptibilitySweep { rows, w_chi, matrices })
}
