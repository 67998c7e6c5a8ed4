use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::entangle::{enumerate_bipartitions, Bipartition};
use crate::error::{Error, Result};
use crate::model::{assemble_with_scales, sigma_z_diagonal, AnnealSchedule, ProblemInstance};
use crate::scalar::Real;
use crate::spectra::{eigendecompose, Spectrum};
use crate::thermal::{populations, Ensemble};

/// Default bias step for the finite difference, in units of `𝓔`.
pub const DEFAULT_CHI_STEP: f64 = 1e-3;
/// Smallest gap, GHz, at which the ground state counts as non-degenerate.
pub const MIN_GROUND_GAP: f64 = 1e-6;

/// Linear response `χ_ij = d⟨σz_i⟩/dh̃_j` in GHz⁻¹ at zero bias.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityMatrix<T: Real> {
    /// Richardson extrapolation of the two central differences.
    pub chi: DMatrix<T>,
    /// Central difference with the full step.
    pub coarse: DMatrix<T>,
    /// Central difference with half the step.
    pub fine: DMatrix<T>,
    pub s: T,
    /// `𝓔(s)`, GHz.
    pub escale: T,
    pub ensemble: Ensemble<T>,
    pub step: T,
}

impl<T: Real> SusceptibilityMatrix<T> {
    pub fn n(&self) -> usize {
        self.chi.nrows()
    }

    /// `max |χ_ij - χ_ji|`.
    pub fn asymmetry(&self) -> T {
        let n = self.n();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.chi[(i, j)] - self.chi[(j, i)]).abs());
            }
        }
        worst
    }

    /// `max |fine - coarse| / max |fine|`: relative change when the step is halved.
    pub fn step_sensitivity(&self) -> T {
        let scale = self.fine.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        (&self.fine - &self.coarse).iter().fold(T::zero(), |a, &b| a.max(b.abs())) / scale
    }
}

/// `⟨σz_i⟩` of the ensemble state of `spectrum`.
fn polarization<T: Real>(spectrum: &Spectrum<T>, ensemble: Ensemble<T>, n: usize) -> Vec<T> {
    let weights = populations(spectrum, ensemble);
    let dim = spectrum.len();
    let states = spectrum.states();
    let mut diag = vec![T::zero(); dim];
    for (k, &p) in weights.iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        for (b, d) in diag.iter_mut().enumerate() {
            *d += p * states[(b, k)].norm_sqr();
        }
    }
    (0..n)
        .map(|i| {
            sigma_z_diagonal::<T>(n, i).iter().zip(&diag).fold(T::zero(), |a, (&z, &d)| a + z * d)
        })
        .collect()
}

/// Cross-susceptibilities at the zero-bias degeneracy point by central
/// differences: qubit `j`'s bias is set to `±step` (so `h̃_j = ±step·𝓔`),
/// repeated with `step/2`, and the two estimates Richardson-extrapolated.
///
/// With a thermal ensemble the full Boltzmann state is used.
pub fn cross_susceptibility<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    ensemble: Ensemble<T>,
    step: T,
) -> Result<SusceptibilityMatrix<T>> {
    if !instance.is_unbiased() {
        return Err(Error::validation("susceptibilities are taken at zero bias; instance has nonzero h"));
    }
    if !(step > T::zero()) || !step.is_finite_value() {
        return Err(Error::validation("finite-difference step must be positive"));
    }
    let v = schedule.at(s)?;
    let n = instance.n();
    let centre = eigendecompose(&assemble_with_scales(instance, v.delta, v.escale))?;
    if centre.len() > 1 && centre.gap() < T::lit(MIN_GROUND_GAP) {
        return Err(Error::DegenerateGround { gap: centre.gap().to_f64_lossy() });
    }
    let response = |h: T, j: usize| -> Result<Vec<T>> {
        let sp = eigendecompose(&assemble_with_scales(&instance.with_bias(j, h), v.delta, v.escale))?;
        Ok(polarization(&sp, ensemble, n))
    };
    let columns = (0..n)
        .into_par_iter()
        .map(|j| {
            let diff = |h: T| -> Result<Vec<T>> {
                let (up, down) = (response(h, j)?, response(-h, j)?);
                let denom = T::lit(2.0) * h * v.escale;
                Ok(up.iter().zip(&down).map(|(&a, &b)| (a - b) / denom).collect())
            };
            Ok((diff(step)?, diff(step / T::lit(2.0))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coarse = DMatrix::zeros(n, n);
    let mut fine = DMatrix::zeros(n, n);
    for (j, (c, f)) in columns.iter().enumerate() {
        for i in 0..n {
            coarse[(i, j)] = c[i];
            fine[(i, j)] = f[i];
        }
    }
    let chi = (&fine * T::lit(4.0) - &coarse) / T::lit(3.0);
    Ok(SusceptibilityMatrix { chi, coarse, fine, s, escale: v.escale, ensemble, step })
}

/// `R_AB = |Σ_{i∈A, j∈B} J̃_ij χ_ij| / (4 N_AB)` with `J̃ = 𝓔 J` and `N_AB`
/// the number of nonzero couplings crossing the cut.
pub fn witness_r<T: Real>(chi: &SusceptibilityMatrix<T>, instance: &ProblemInstance<T>, part: &Bipartition) -> Result<T> {
    if chi.n() != instance.n() || part.n() != instance.n() {
        return Err(Error::validation("susceptibility, instance and cut sizes differ"));
    }
    let crossing = part.crossing_couplings(instance);
    if crossing.is_empty() {
        return Err(Error::UndefinedCut { mask: part.mask() });
    }
    let sum = crossing.iter().fold(T::zero(), |acc, &(i, j, jij)| {
        let (a, b) = if part.contains(i) { (i, j) } else { (j, i) };
        acc + chi.escale * jij * chi.chi[(a, b)]
    });
    let count = T::from_usize(crossing.len()).expect("small");
    Ok(sum.abs() / (T::lit(4.0) * count))
}

/// `W_χ = sqrt(G / (1 + G))` with `G` the geometric mean of the `R_AB`.
/// Zero when any `R_AB` is zero (or the list is empty); tends to one as the
/// `R_AB` grow.
pub fn witness_wchi<T: Real>(r_values: &[T]) -> T {
    if r_values.is_empty() || r_values.iter().any(|&r| !(r > T::zero())) {
        return T::zero();
    }
    if r_values.iter().any(|r| !r.is_finite_value()) {
        return T::one();
    }
    let log_mean = r_values.iter().fold(T::zero(), |a, &r| a + r.ln()) / T::from_usize(r_values.len()).expect("small");
    let g = log_mean.exp();
    if !g.is_finite_value() {
        return T::one();
    }
    (g / (T::one() + g)).sqrt()
}

/// `R_AB` on every cut and the resulting `W_χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityWitness<T> {
    pub per_cut: Vec<(Bipartition, T)>,
    pub w_chi: T,
}

pub fn susceptibility_witness<T: Real>(
    chi: &SusceptibilityMatrix<T>,
    instance: &ProblemInstance<T>,
) -> Result<SusceptibilityWitness<T>> {
    let per_cut = enumerate_bipartitions(instance.n())?
        .into_iter()
        .map(|cut| witness_r(chi, instance, &cut).map(|r| (cut, r)))
        .collect::<Result<Vec<_>>>()?;
    let r: Vec<T> = per_cut.iter().map(|p| p.1).collect();
    Ok(SusceptibilityWitness { w_chi: witness_wchi(&r), per_cut })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(delta: f64, escale: f64) -> AnnealSchedule<f64> {
        AnnealSchedule::from_rows(&[(0.0, delta, escale), (1.0, delta, escale)], "flat").unwrap()
    }

    #[test]
    fn uncoupled_pair_has_no_cross_response() {
        let inst = ProblemInstance::<f64>::new(2, vec![0.0; 2], []).unwrap();
        let chi = cross_susceptibility(&inst, &flat(1.0, 1.0), 0.5, Ensemble::Ground, 1e-3).unwrap();
        assert!(chi.chi[(0, 1)].abs() < 1e-10);
        // Single spin: ⟨σz⟩ = h̃/sqrt(h̃² + Δ²/4) so χ = 2/Δ.
        assert!((chi.chi[(0, 0)] - 2.0).abs() < 1e-8);
        let cut = Bipartition::new(2, &[0]).unwrap();
        assert!(matches!(witness_r(&chi, &inst, &cut), Err(Error::UndefinedCut { .. })));
    }

    #[test]
    fn ferromagnetic_response_is_positive_and_symmetric() {
        let chi = cross_susceptibility(&ProblemInstance::fm2(), &flat(1.0, 1.0), 0.5, Ensemble::Ground, 1e-3).unwrap();
        assert!(chi.chi[(0, 1)] > 0.0);
        assert!(chi.asymmetry() < 1e-8);
        assert!(chi.step_sensitivity() < 1e-3);
    }

    #[test]
    fn degenerate_ground_is_rejected() {
        let r = cross_susceptibility(&ProblemInstance::fm2(), &flat(0.0, 1.0), 0.5, Ensemble::Ground, 1e-3);
        assert!(matches!(r, Err(Error::DegenerateGround { .. })));
        let biased = ProblemInstance::<f64>::fm2().with_uniform_bias(0.1);
        assert!(cross_susceptibility(&biased, &flat(1.0, 1.0), 0.5, Ensemble::Ground, 1e-3).is_err());
    }

    #[test]
    fn wchi_limits() {
        assert_eq!(witness_wchi(&[1.0, 0.0]), 0.0);
        assert_eq!(witness_wchi::<f64>(&[]), 0.0);
        assert!((witness_wchi(&[1.0, 1.0]) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(witness_wchi(&[1e300, 1e300]) > 0.999_999);
        assert_eq!(witness_wchi(&[f64::INFINITY]), 1.0);
    }
}
