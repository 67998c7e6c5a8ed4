use crate::error::{Error, Result};
use crate::model::{AnnealSchedule, ProbeConfig, ProblemInstance};
use crate::qts::resonances;
use crate::scalar::Real;
use crate::thermal::{boltzmann_weights, ground_weights, populations, Ensemble};

/// System populations recovered from aligned-probe equilibrium measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationEstimate<T> {
    /// Level energies, GHz, in input order.
    pub energies: Vec<T>,
    /// `P^L` at each alignment.
    pub pl_raw: Vec<T>,
    /// `P_n = P^L / (1 - P^L)`.
    pub p: Vec<T>,
}

/// Applies `P_n = P^L / (1 - P^L)` to `(E_n, P^L)` pairs.
pub fn estimate_populations<T: Real>(pl_values: &[(T, T)]) -> Result<PopulationEstimate<T>> {
    let mut p = Vec::with_capacity(pl_values.len());
    for &(_, pl) in pl_values {
        if !pl.is_finite_value() || pl < T::zero() || pl > T::one() {
            return Err(Error::OutOfRange { what: "P^L", value: pl.to_f64_lossy(), min: 0.0, max: 1.0 });
        }
        if pl == T::one() {
            return Err(Error::ProbeSaturated(pl.to_f64_lossy()));
        }
        p.push(pl / (T::one() - pl));
    }
    Ok(PopulationEstimate {
        energies: pl_values.iter().map(|v| v.0).collect(),
        pl_raw: pl_values.iter().map(|v| v.1).collect(),
        p,
    })
}

/// Simulated population measurement next to its direct equilibrium value.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult<T> {
    pub estimate: PopulationEstimate<T>,
    /// Equilibrium populations of the probed levels computed directly.
    pub reference: Vec<T>,
    /// `|P^L + Σ P^R_n - 1|` at each alignment.
    pub conservation: Vec<T>,
    /// Equilibrium weight the probe-down manifold would put on states other
    /// than `|ψ_0^L⟩` at the first alignment; the protocol neglects it.
    pub neglected_left_weight: T,
    pub warnings: Vec<String>,
}

/// Equilibrium populations of the lowest `levels` eigenstates measured
/// through the probe.
///
/// For each level the probe bias is set so `|ψ_0^L,↓⟩` is degenerate with
/// `|n,↑⟩`; the composite equilibrium over `{|ψ_0^L,↓⟩} ∪ {|i,↑⟩}` gives
/// `P^L`, which is converted with [`estimate_populations`].
pub fn simulate_population_protocol<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    ensemble: Ensemble<T>,
    probe: &ProbeConfig<T>,
    levels: usize,
) -> Result<ProtocolResult<T>> {
    let res = resonances(instance, schedule, s, None, probe)?;
    let energies = res.system.energies();
    let levels = levels.min(energies.len());
    if levels == 0 {
        return Err(Error::validation("at least one level must be probed"));
    }
    let mut pl_values = Vec::with_capacity(levels);
    let mut conservation = Vec::with_capacity(levels);
    for &e_n in &energies[..levels] {
        // Probe-down state aligned at E_n, followed by the probe-up manifold.
        let mut composite = Vec::with_capacity(energies.len() + 1);
        composite.push(e_n);
        composite.extend_from_slice(energies);
        let w = match ensemble {
            Ensemble::Ground => ground_weights(&composite),
            Ensemble::Thermal(t) => boltzmann_weights(&composite, t.as_ghz()),
        };
        let total = w.iter().fold(T::zero(), |a, &b| a + b);
        conservation.push((total - T::one()).abs());
        pl_values.push((e_n, w[0]));
    }
    let neglected_left_weight = match ensemble {
        Ensemble::Ground => T::zero(),
        Ensemble::Thermal(t) => {
            let w = boltzmann_weights(res.left_spectrum.energies(), t.as_ghz());
            T::one() - w[0]
        }
    };
    let warnings = match ensemble {
        Ensemble::Thermal(t) => probe.thermal_warning(t.as_ghz()).into_iter().collect(),
        Ensemble::Ground => Vec::new(),
    };
    let reference = populations(&res.system, ensemble)[..levels].to_vec();
    Ok(ProtocolResult {
        estimate: estimate_populations(&pl_values)?,
        reference,
        conservation,
        neglected_left_weight,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::Temperature;

    #[test]
    fn probe_ratio_algebra() {
        let est = estimate_populations(&[(0.0, 0.5), (1.0, 1.0 / 3.0), (2.0, 0.0)]).unwrap();
        assert!((est.p[0] - 1.0f64).abs() < 1e-15);
        assert!((est.p[1] - 0.5f64).abs() < 1e-15);
        assert_eq!(est.p[2], 0.0);
        assert!(matches!(estimate_populations(&[(0.0, 1.0)]), Err(Error::ProbeSaturated(_))));
        assert!(estimate_populations(&[(0.0, -0.1)]).is_err());
    }

    #[test]
    fn zero_temperature_protocol_is_exact() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let out =
            simulate_population_protocol(&ProblemInstance::fm2(), &sched, 0.3, Ensemble::Ground, &ProbeConfig::default(), 2)
                .unwrap();
        assert_eq!(out.estimate.p, vec![1.0, 0.0]);
        assert_eq!(out.reference, vec![1.0, 0.0]);
    }

    #[test]
    fn thermal_protocol_matches_boltzmann() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let t = Temperature::from_millikelvin(12.5).unwrap();
        let out = simulate_population_protocol(
            &ProblemInstance::fm2(),
            &sched,
            0.5,
            Ensemble::Thermal(t),
            &ProbeConfig::default(),
            4,
        )
        .unwrap();
        for (a, b) in out.estimate.p.iter().zip(&out.reference) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(out.conservation.iter().all(|&c| c < 1e-12));
    }
}
