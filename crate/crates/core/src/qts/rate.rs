use crate::error::{Error, Result};
use crate::model::{assemble_hamiltonian, left_hamiltonian, AnnealSchedule, Lineshape, ProbeConfig, ProblemInstance};
use crate::scalar::Real;
use crate::spectra::{eigendecompose, Spectrum};
use crate::thermal::Temperature;

/// Resonance positions and strengths seen by the probe: for each system
/// eigenstate `n`, the probe bias `E_n - E_0^L` at which `|ψ_0^L,↓⟩` is
/// degenerate with `|n,↑⟩`, and the overlap weight `|⟨ψ_0^L|n⟩|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonances<T: Real> {
    pub system: Spectrum<T>,
    /// Ground state and energy of `H_S - 2 J̃_P σz_a`.
    pub left_energy: T,
    pub left_spectrum: Spectrum<T>,
    pub offsets: Vec<T>,
    pub weights: Vec<T>,
}

/// Probe tunneling rate against probe bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSpectrum<T: Real> {
    pub eps_p: Vec<T>,
    /// Rate in μs⁻¹.
    pub gamma_raw: Vec<T>,
    /// Rate divided by its maximum over the grid.
    pub gamma_norm: Vec<T>,
    /// `|⟨ψ_0^L|n⟩|²` per system eigenstate, ascending energy.
    pub weights: Vec<T>,
    /// Resonance positions `E_n - E_0^L`, GHz.
    pub offsets: Vec<T>,
    /// Rate prefactor `(Δ_P / 1 MHz)²` μs⁻¹.
    pub gamma0: T,
    pub linewidth: T,
    pub lineshape: Lineshape,
    pub warnings: Vec<String>,
}

impl<T: Real> RateSpectrum<T> {
    /// Columns `eps_p_ghz, gamma_norm, gamma_raw_per_us`.
    pub fn to_table(&self) -> crate::io::Table {
        let mut t = crate::io::Table::new(["eps_p_ghz", "gamma_norm", "gamma_raw_per_us"]);
        for k in 0..self.eps_p.len() {
            t.push(vec![
                self.eps_p[k].to_f64_lossy(),
                self.gamma_norm[k].to_f64_lossy(),
                self.gamma_raw[k].to_f64_lossy(),
            ]);
        }
        t
    }
}

/// Unit-area profile of full width at half maximum `width`, at offset `x`.
pub fn lineshape_value<T: Real>(shape: Lineshape, x: T, width: T) -> T {
    match shape {
        Lineshape::Gaussian => {
            let sigma = width / T::lit(2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
            let z = x / sigma;
            (-(z * z) / T::lit(2.0)).exp() / (sigma * T::two_pi().sqrt())
        }
        Lineshape::Lorentzian => {
            let g = width / T::lit(2.0);
            g / (T::pi() * (x * x + g * g))
        }
    }
}

/// `Γ₀` in μs⁻¹ for a probe tunneling amplitude in GHz.
pub fn gamma0<T: Real>(delta_p: T) -> T {
    let mhz = delta_p * T::lit(1000.0);
    mhz * mhz
}

/// Diagonalizes the bare system and the probe-down system.
pub fn resonances<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    h_uniform: Option<T>,
    probe: &ProbeConfig<T>,
) -> Result<Resonances<T>> {
    probe.validate(instance.n(), schedule.delta(s)?)?;
    let system_h = assemble_hamiltonian(instance, schedule, s, h_uniform)?;
    let left_h = left_hamiltonian(&system_h, instance.n(), probe.attach_to, probe.j_p);
    let system = eigendecompose(&system_h)?;
    let left_spectrum = eigendecompose(&left_h)?;
    let left_energy = left_spectrum.energies()[0];
    let psi_l = left_spectrum.states().column(0);
    let overlaps = system.states().adjoint() * psi_l;
    let weights = overlaps.iter().map(|z| z.norm_sqr()).collect();
    let offsets = system.energies().iter().map(|&e| e - left_energy).collect();
    Ok(Resonances { system, left_energy, left_spectrum, offsets, weights })
}

/// `Γ(ε_P) = Γ₀ Σ_n |⟨ψ_0^L|n⟩|² G(ε_P - (E_n - E_0^L); w)` on the probe's
/// bias grid. A warning is attached when `|J̃_P|` is not well above `k_B T`.
pub fn simulate_rate_spectrum<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    h_uniform: Option<T>,
    probe: &ProbeConfig<T>,
    temperature: Option<Temperature<T>>,
) -> Result<RateSpectrum<T>> {
    if probe.eps_p_grid.is_empty() {
        return Err(Error::validation("probe bias grid is empty"));
    }
    if probe.eps_p_grid.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::validation("probe bias grid has non-finite values"));
    }
    let res = resonances(instance, schedule, s, h_uniform, probe)?;
    let g0 = gamma0(probe.delta_p);
    let gamma_raw: Vec<T> = probe
        .eps_p_grid
        .iter()
        .map(|&eps| {
            let sum = res.offsets.iter().zip(&res.weights).fold(T::zero(), |acc, (&off, &w)| {
                acc + w * lineshape_value(probe.lineshape, eps - off, probe.linewidth)
            });
            g0 * sum
        })
        .collect();
    let max = gamma_raw.iter().fold(T::zero(), |a, &b| a.max(b));
    let gamma_norm = if max > T::zero() {
        gamma_raw.iter().map(|&g| g / max).collect()
    } else {
        vec![T::zero(); gamma_raw.len()]
    };
    let warnings = temperature.and_then(|t| probe.thermal_warning(t.as_ghz())).into_iter().collect();
    Ok(RateSpectrum {
        eps_p: probe.eps_p_grid.clone(),
        gamma_raw,
        gamma_norm,
        weights: res.weights,
        offsets: res.offsets,
        gamma0: g0,
        linewidth: probe.linewidth,
        lineshape: probe.lineshape,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lineshapes_have_unit_area_and_fwhm() {
        for shape in [Lineshape::Gaussian, Lineshape::Lorentzian] {
            let w = 0.4;
            let peak = lineshape_value(shape, 0.0, w);
            let half = lineshape_value(shape, w / 2.0, w);
            assert!((half / peak - 0.5f64).abs() < 1e-12, "{shape:?}");
        }
        let h = 1e-3;
        let area: f64 = (-4000..=4000).map(|k| lineshape_value(Lineshape::Gaussian, k as f64 * h, 0.4) * h).sum();
        assert!((area - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weights_sum_to_one() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let probe = ProbeConfig::default();
        let r = resonances(&ProblemInstance::fm2(), &sched, 0.339, None, &probe).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(r.offsets.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let sched = AnnealSchedule::<f64>::synthetic();
        let probe = ProbeConfig::default();
        assert!(simulate_rate_spectrum(&ProblemInstance::fm2(), &sched, 0.339, None, &probe, None).is_err());
    }
}
