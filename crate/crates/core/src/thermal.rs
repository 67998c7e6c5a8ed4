//! Boltzmann populations and density matrices.

use crate::constants::K_B_OVER_H_GHZ_PER_K;
use crate::error::{Error, Result};
use crate::linalg::{c, check_hermitian, eigvalsh, CMatrix, CVector};
use crate::scalar::Real;
use crate::spectra::Spectrum;

/// Positive temperature in millikelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Temperature<T> {
    millikelvin: T,
}

impl<T: Real> Temperature<T> {
    pub fn from_millikelvin(mk: T) -> Result<Self> {
        if !mk.is_finite_value() || mk <= T::zero() {
            return Err(Error::validation(format!(
                "temperature must be positive and finite, got {} mK",
                mk.to_f64_lossy()
            )));
        }
        Ok(Self { millikelvin: mk })
    }

    pub fn millikelvin(&self) -> T {
        self.millikelvin
    }

    /// `k_B T / h` in GHz.
    pub fn as_ghz(&self) -> T {
        self.millikelvin * T::lit(K_B_OVER_H_GHZ_PER_K * 1e-3)
    }
}

/// Which equilibrium state to build: the zero-temperature limit or a finite
/// temperature Boltzmann state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble<T> {
    Ground,
    Thermal(Temperature<T>),
}

/// `exp(-(E_n - E_1)/k_BT) / Z` over the whole spectrum.
pub fn boltzmann_populations<T: Real>(spectrum: &Spectrum<T>, temperature: Temperature<T>) -> Vec<T> {
    boltzmann_weights(spectrum.energies(), temperature.as_ghz())
}

pub(crate) fn boltzmann_weights<T: Real>(energies: &[T], kt: T) -> Vec<T> {
    let e0 = energies.iter().copied().fold(energies[0], |a, b| a.min(b));
    let mut w: Vec<T> = energies.iter().map(|&e| (-(e - e0) / kt).exp()).collect();
    let z = w.iter().fold(T::zero(), |a, &b| a + b);
    for p in &mut w {
        *p /= z;
    }
    w
}

/// Zero-temperature limit: the lowest level (and anything exactly degenerate
/// with it, within `1e-12` relative) shares the population equally.
pub fn ground_populations<T: Real>(spectrum: &Spectrum<T>) -> Vec<T> {
    ground_weights(spectrum.energies())
}

/// Zero-temperature weights of energies in any order.
pub(crate) fn ground_weights<T: Real>(energies: &[T]) -> Vec<T> {
    let e0 = energies.iter().copied().fold(energies[0], |a, b| a.min(b));
    let scale = energies.iter().fold(T::one(), |a, &b| a.max(b.abs()));
    let tol = T::tol(1e-12) * scale;
    let lowest: Vec<bool> = energies.iter().map(|&x| x - e0 <= tol).collect();
    let count = lowest.iter().filter(|&&b| b).count();
    let share = T::one() / T::from_usize(count).expect("count fits");
    lowest.iter().map(|&b| if b { share } else { T::zero() }).collect()
}

pub fn populations<T: Real>(spectrum: &Spectrum<T>, ensemble: Ensemble<T>) -> Vec<T> {
    match ensemble {
        Ensemble::Ground => ground_populations(spectrum),
        Ensemble::Thermal(t) => boltzmann_populations(spectrum, t),
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace (1e-10) and positivity (eigenvalues ≥ -1e-10).
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        check_hermitian(&matrix, T::tol(1e-10))?;
        if !matrix.nrows().is_power_of_two() {
            return Err(Error::InvalidDensityMatrix(format!("dimension {} is not a power of two", matrix.nrows())));
        }
        let tr = matrix.trace().re;
        if (tr - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::InvalidDensityMatrix(format!("trace {} != 1", tr.to_f64_lossy())));
        }
        let min = eigvalsh(&matrix)?[0];
        if min < -T::tol(1e-10) {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {}", min.to_f64_lossy())));
        }
        Ok(Self { matrix })
    }

    /// Projector onto a state, normalized.
    pub fn pure(psi: &CVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > T::zero()) || !norm.is_finite_value() {
            return Err(Error::validation("state vector has zero or non-finite norm"));
        }
        if !psi.len().is_power_of_two() {
            return Err(Error::InvalidDensityMatrix(format!("dimension {} is not a power of two", psi.len())));
        }
        let v = psi.unscale(norm);
        Ok(Self { matrix: &v * v.adjoint() })
    }

    /// `I / dim`.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let p = T::one() / T::from_usize(dim).expect("dim fits");
        Self { matrix: CMatrix::from_diagonal_element(dim, dim, c(p)) }
    }

    /// Kronecker product, `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.kronecker(&other.matrix) }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.matrix.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        eigvalsh(&self.matrix)
    }
}

/// `Σ P_i |ψ_i⟩⟨ψ_i|` over the spectrum's eigenvectors. With `truncate = k`
/// only the lowest `k` levels are kept and their populations renormalized.
pub fn build_density_matrix<T: Real>(
    spectrum: &Spectrum<T>,
    populations: &[T],
    truncate: Option<usize>,
) -> Result<DensityMatrix<T>> {
    if populations.len() > spectrum.len() {
        return Err(Error::validation(format!(
            "{} populations for {} levels",
            populations.len(),
            spectrum.len()
        )));
    }
    if let Some(p) = populations.iter().find(|p| !p.is_finite_value() || **p < T::zero()) {
        return Err(Error::validation(format!("invalid population {}", p.to_f64_lossy())));
    }
    let total = populations.iter().fold(T::zero(), |a, &b| a + b);
    if total > T::one() + T::tol(1e-9) {
        return Err(Error::validation(format!("populations sum to {} > 1", total.to_f64_lossy())));
    }
    let keep = truncate.map_or(populations.len(), |k| k.min(populations.len()));
    let mut p: Vec<T> = populations[..keep].to_vec();
    let kept = p.iter().fold(T::zero(), |a, &b| a + b);
    if !(kept > T::zero()) {
        return Err(Error::validation("retained populations sum to zero"));
    }
    if truncate.is_some() || (kept - T::one()).abs() > T::tol(1e-9) {
        for x in &mut p {
            *x /= kept;
        }
    }
    let dim = spectrum.len();
    let active: Vec<usize> = (0..keep).filter(|&k| p[k] > T::zero()).collect();
    let mut weighted = CMatrix::zeros(dim, active.len());
    let mut plain = CMatrix::zeros(dim, active.len());
    for (col, &k) in active.iter().enumerate() {
        let v = spectrum.states().column(k);
        plain.set_column(col, &v);
        weighted.set_column(col, &v.scale(p[k]));
    }
    let mut rho = weighted * plain.adjoint();
    // Exact Hermitian symmetry regardless of rounding in the product.
    for i in 0..dim {
        rho[(i, i)] = c(rho[(i, i)].re);
        for j in 0..i {
            let avg = (rho[(i, j)] + rho[(j, i)].conj()).unscale(T::lit(2.0));
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
    Ok(DensityMatrix { matrix: rho })
}

/// Density matrix of an ensemble; `levels` truncates as in
/// [`build_density_matrix`].
pub fn equilibrium_state<T: Real>(
    spectrum: &Spectrum<T>,
    ensemble: Ensemble<T>,
    levels: Option<usize>,
) -> Result<DensityMatrix<T>> {
    build_density_matrix(spectrum, &populations(spectrum, ensemble), levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_with_scales, ProblemInstance};
    use crate::spectra::eigendecompose;

    fn fm2(delta: f64, escale: f64) -> Spectrum<f64> {
        eigendecompose(&assemble_with_scales(&ProblemInstance::fm2(), delta, escale)).unwrap()
    }

    #[test]
    fn temperature_conversion() {
        let t = Temperature::from_millikelvin(12.5).unwrap();
        assert!((t.as_ghz() - 0.2604575f64).abs() < 1e-9);
        assert!(Temperature::from_millikelvin(0.0).is_err());
        assert!(Temperature::from_millikelvin(-1.0f64).is_err());
    }

    #[test]
    fn two_level_ratio() {
        let kt = 0.3;
        let p = boltzmann_weights(&[1.0, 1.0 + kt * 2f64.ln()], kt);
        assert!((p[1] / p[0] - 0.5).abs() < 1e-14);
        let cold = boltzmann_weights(&[0.0, 10.0 * kt], kt);
        assert!(cold[0] > 0.9999);
    }

    #[test]
    fn ground_limit_splits_degenerate_pair() {
        let p = ground_populations(&fm2(0.0, 1.0));
        assert_eq!(p, vec![0.5, 0.5, 0.0, 0.0]);
        let q = ground_populations(&fm2(1.0, 1.0));
        assert_eq!(q, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn density_matrix_properties() {
        let sp = fm2(1.0, 1.0);
        let pure = build_density_matrix(&sp, &[1.0], None).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let t = Temperature::from_millikelvin(2000.0).unwrap();
        let p = boltzmann_populations(&sp, t);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        let rho = build_density_matrix(&sp, &p, None).unwrap();
        let sum_sq: f64 = p.iter().map(|x| x * x).sum();
        assert!((rho.purity() - sum_sq).abs() < 1e-12);
        let mut eig = rho.eigenvalues().unwrap();
        eig.reverse();
        for (a, b) in eig.iter().zip(&p) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn truncation_renormalizes() {
        let sp = fm2(1.0, 1.0);
        let rho = build_density_matrix(&sp, &[0.6, 0.2, 0.2], Some(2)).unwrap();
        let mut eig = rho.eigenvalues().unwrap();
        eig.reverse();
        assert!((eig[0] - 0.75).abs() < 1e-12 && (eig[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_populations() {
        let sp = fm2(1.0, 1.0);
        assert!(build_density_matrix(&sp, &[1.1], None).is_err());
        assert!(build_density_matrix(&sp, &[0.5, -0.1], None).is_err());
        assert!(build_density_matrix(&sp, &[0.2; 5], None).is_err());
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidDensityMatrix(_))));
    }
}
