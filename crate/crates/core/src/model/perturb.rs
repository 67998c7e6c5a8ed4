use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{COUPLING_SPREAD, DELTA_SPREAD};
use crate::error::Result;
use crate::model::ProblemInstance;
use crate::scalar::Real;

/// Bounded fractional calibration errors: every qubit's tunneling amplitude
/// and every coupler energy gets an independent multiplier drawn uniformly
/// from `[1 - f, 1 + f]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation<T> {
    pub delta_spread: T,
    pub coupling_spread: T,
}

impl<T: Real> Default for Perturbation<T> {
    fn default() -> Self {
        Self { delta_spread: T::lit(DELTA_SPREAD), coupling_spread: T::lit(COUPLING_SPREAD) }
    }
}

impl<T: Real> Perturbation<T> {
    pub fn none() -> Self {
        Self { delta_spread: T::zero(), coupling_spread: T::zero() }
    }

    /// Both spreads multiplied by `factor`.
    pub fn scaled(self, factor: T) -> Self {
        Self { delta_spread: self.delta_spread * factor, coupling_spread: self.coupling_spread * factor }
    }

    pub fn is_zero(&self) -> bool {
        self.delta_spread == T::zero() && self.coupling_spread == T::zero()
    }

    /// Draws one perturbed copy of `instance`. Existing tunneling multipliers
    /// are composed with the new ones.
    pub fn apply<R: Rng>(&self, instance: &ProblemInstance<T>, rng: &mut R) -> Result<ProblemInstance<T>> {
        let n = instance.n();
        let deltas: Vec<T> = (0..n)
            .map(|i| instance.delta_factor(i) * draw(self.delta_spread, rng))
            .collect();
        let couplers: Vec<T> = (0..instance.num_couplings()).map(|_| draw(self.coupling_spread, rng)).collect();
        instance.with_coupling_factors(&couplers)?.with_delta_scale(deltas)
    }
}

fn draw<T: Real, R: Rng>(spread: T, rng: &mut R) -> T {
    let u: f64 = rng.gen_range(-1.0..=1.0);
    T::one() + spread * T::lit(u)
}

/// Independent deterministic stream for Monte-Carlo sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multipliers_stay_in_band() {
        let inst = ProblemInstance::<f64>::fm8();
        let p = Perturbation::default();
        for k in 0..50 {
            let out = p.apply(&inst, &mut sample_rng(7, k)).unwrap();
            for i in 0..8 {
                let f = out.delta_factor(i);
                assert!((0.92..=1.08).contains(&f), "{f}");
            }
            for (_, _, v) in out.couplings() {
                assert!((-2.5 * 1.05..=-2.5 * 0.95).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn zero_spread_is_identity_and_streams_are_reproducible() {
        let inst = ProblemInstance::<f64>::fm2();
        let same = Perturbation::none().apply(&inst, &mut sample_rng(1, 0)).unwrap();
        assert_eq!(same.coupling(0, 1), -2.5);
        assert_eq!(same.delta_factor(1), 1.0);
        let p = Perturbation::default();
        let a = p.apply(&inst, &mut sample_rng(3, 9)).unwrap();
        let b = p.apply(&inst, &mut sample_rng(3, 9)).unwrap();
        let c = p.apply(&inst, &mut sample_rng(3, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
