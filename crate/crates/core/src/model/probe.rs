use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::model::{assemble_hamiltonian, spin, AnnealSchedule, HermitianOperator, ProblemInstance};
use crate::scalar::Real;

/// Spectral profile assigned to each tunneling resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lineshape {
    #[default]
    Gaussian,
    Lorentzian,
}

/// Weakly tunneling probe qubit coupled to one system qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig<T> {
    /// Probe tunneling amplitude, GHz.
    pub delta_p: T,
    /// Probe coupling energy `J̃_P`, GHz.
    pub j_p: T,
    /// Probe bias sweep, GHz.
    pub eps_p_grid: Vec<T>,
    pub attach_to: usize,
    /// Full width at half maximum of each resonance, GHz.
    pub linewidth: T,
    pub lineshape: Lineshape,
    /// Required ratio `min(delta, |j_p|) / delta_p`.
    pub ratio_threshold: T,
}

impl<T: Real> Default for ProbeConfig<T> {
    fn default() -> Self {
        Self {
            delta_p: T::lit(1e-3),
            j_p: T::lit(-1.5),
            eps_p_grid: Vec::new(),
            attach_to: 0,
            linewidth: T::lit(0.4),
            lineshape: Lineshape::Gaussian,
            ratio_threshold: T::lit(100.0),
        }
    }
}

impl<T: Real> ProbeConfig<T> {
    /// Uniform bias grid `start..=stop` with `count` points.
    pub fn with_grid(mut self, start: T, stop: T, count: usize) -> Self {
        self.eps_p_grid = linspace(start, stop, count);
        self
    }

    /// Checks the probe is a weak perturbation of a system with tunneling
    /// amplitude `delta` (GHz).
    pub fn validate(&self, n: usize, delta: T) -> Result<()> {
        if self.attach_to >= n {
            return Err(Error::ProbeConstraint(format!(
                "probe attached to qubit {} of a {n}-qubit system",
                self.attach_to
            )));
        }
        if !(self.linewidth > T::zero()) || !self.linewidth.is_finite_value() {
            return Err(Error::ProbeConstraint("linewidth must be positive".into()));
        }
        if !self.delta_p.is_finite_value() || self.delta_p < T::zero() || !self.j_p.is_finite_value() {
            return Err(Error::ProbeConstraint("probe energies must be finite, delta_p >= 0".into()));
        }
        let limit = delta.min(self.j_p.abs());
        if self.delta_p * self.ratio_threshold > limit {
            return Err(Error::ProbeConstraint(format!(
                "delta_p = {} GHz is not {}x below min(delta, |j_p|) = {} GHz",
                self.delta_p.to_f64_lossy(),
                self.ratio_threshold.to_f64_lossy(),
                limit.to_f64_lossy()
            )));
        }
        Ok(())
    }

    /// Warning text when the probe coupling is not well above `k_B T`.
    pub fn thermal_warning(&self, kt_ghz: T) -> Option<String> {
        if self.j_p.abs() < T::lit(5.0) * kt_ghz {
            Some(format!(
                "|j_p| = {} GHz is not much larger than k_B T = {} GHz; the prepared state may be thermally mixed",
                self.j_p.abs().to_f64_lossy(),
                kt_ghz.to_f64_lossy()
            ))
        } else {
            None
        }
    }
}

pub(crate) fn linspace<T: Real>(start: T, stop: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / T::from_usize(count - 1).expect("count fits");
            (0..count)
                .map(|k| if k + 1 == count { stop } else { start + step * T::from_usize(k).expect("index fits") })
                .collect()
        }
    }
}

/// `H_S - 2 J̃_P σz_a`: the system as seen with the probe in its down state,
/// without the probe bias.
pub fn left_hamiltonian<T: Real>(system: &HermitianOperator<T>, n: usize, attach: usize, j_p: T) -> HermitianOperator<T> {
    let mut m = system.matrix().clone();
    let two = T::lit(2.0);
    for b in 0..(1usize << n) {
        let z = if spin(b, attach, n) > 0 { T::one() } else { -T::one() };
        m[(b, b)] -= c(two * j_p * z);
    }
    HermitianOperator::new(m).expect("diagonal shift keeps Hermiticity")
}

/// System + probe operator on `n + 1` qubits. The probe is the most
/// significant qubit, so the upper-left `2^n` block (probe up) equals the
/// bare system Hamiltonian and the lower-right block (probe down) is
/// `H_S - 2 J̃_P σz_a + eps_p`.
pub fn assemble_probe_hamiltonian<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    h_override: Option<T>,
    probe: &ProbeConfig<T>,
    eps_p: T,
) -> Result<HermitianOperator<T>> {
    if !eps_p.is_finite_value() {
        return Err(Error::validation("probe bias is not finite"));
    }
    let n = instance.n();
    let delta = schedule.delta(s)?;
    probe.validate(n, delta)?;
    let system = assemble_hamiltonian(instance, schedule, s, h_override)?;
    let left = left_hamiltonian(&system, n, probe.attach_to, probe.j_p);
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(2 * dim, 2 * dim);
    m.view_mut((0, 0), (dim, dim)).copy_from(system.matrix());
    m.view_mut((dim, dim), (dim, dim)).copy_from(left.matrix());
    let tunnel = c(-T::lit(0.5) * probe.delta_p);
    for b in 0..dim {
        m[(dim + b, dim + b)] += c(eps_p);
        m[(b, dim + b)] = tunnel;
        m[(dim + b, b)] = tunnel;
    }
    HermitianOperator::new(m)
}
