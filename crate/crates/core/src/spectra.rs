//! Exact diagonalization and parameter scans.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::Table;
use crate::linalg::{eigh, CMatrix, CVector};
use crate::model::{assemble_hamiltonian, sigma_z_diagonal, AnnealSchedule, HermitianOperator, ProblemInstance};
use crate::scalar::Real;

/// Eigenvalues (ascending, GHz) and matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Real> {
    energies: Vec<T>,
    states: CMatrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Eigenvectors as columns.
    pub fn states(&self) -> &CMatrix<T> {
        &self.states
    }

    pub fn state(&self, k: usize) -> CVector<T> {
        self.states.column(k).into_owned()
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `E_2 - E_1`, zero for fewer than two levels.
    pub fn gap(&self) -> T {
        if self.energies.len() < 2 {
            return T::zero();
        }
        (self.energies[1] - self.energies[0]).max(T::zero())
    }

    /// Energies relative to the ground state.
    pub fn excitations(&self) -> Vec<T> {
        let e0 = self.energies[0];
        self.energies.iter().map(|&e| e - e0).collect()
    }

    /// `⟨k|σz_i|k⟩` for each qubit `i` of an `n`-qubit register.
    pub fn polarization(&self, k: usize) -> Vec<T> {
        let n = self.energies.len().trailing_zeros() as usize;
        let col = self.states.column(k);
        (0..n)
            .map(|i| {
                sigma_z_diagonal::<T>(n, i)
                    .iter()
                    .zip(col.iter())
                    .fold(T::zero(), |acc, (&z, a)| acc + z * a.norm_sqr())
            })
            .collect()
    }

    /// `max_k |H v_k - E_k v_k|`.
    pub fn max_residual(&self, h: &HermitianOperator<T>) -> T {
        let hv = h.matrix() * &self.states;
        let mut worst = T::zero();
        for k in 0..self.len() {
            let r = (hv.column(k) - self.states.column(k).scale(self.energies[k])).norm();
            worst = worst.max(r);
        }
        worst
    }

    /// `max |V† V - I|`.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.states.adjoint() * &self.states;
        let mut worst = T::zero();
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max(crate::linalg::cabs(g[(i, j)] - nalgebra::Complex::new(target, T::zero())));
            }
        }
        worst
    }
}

/// Full spectrum of a Hermitian operator, eigenvector phases fixed so the
/// largest component of each is real positive.
pub fn eigendecompose<T: Real>(h: &HermitianOperator<T>) -> Result<Spectrum<T>> {
    let (energies, states) = eigh(h.matrix())?;
    Ok(Spectrum { energies, states })
}

/// `E_2 - E_1` of a spectrum.
pub fn extract_gap<T: Real>(spectrum: &Spectrum<T>) -> T {
    spectrum.gap()
}

/// Scan coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    H,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::S => "s",
            Axis::H => "h",
        }
    }
}

/// Direction of the gap along a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    StrictlyDecreasing,
    StrictlyIncreasing,
    Mixed,
}

/// Level structure along a one-parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScan<T: Real> {
    pub axis: Axis,
    pub grid: Vec<T>,
    /// `E_n - E_1`, one row per level and one column per grid point.
    pub levels: DMatrix<T>,
    pub gap: Vec<T>,
    /// Ground-state `⟨σz_i⟩`, one inner vector per grid point.
    pub polarization: Vec<Vec<T>>,
}

impl<T: Real> SpectrumScan<T> {
    fn from_spectra(axis: Axis, grid: Vec<T>, spectra: Vec<Spectrum<T>>) -> Self {
        let levels_n = spectra.first().map_or(0, |s| s.len());
        let mut levels = DMatrix::zeros(levels_n, grid.len());
        let mut gap = Vec::with_capacity(grid.len());
        let mut polarization = Vec::with_capacity(grid.len());
        for (col, sp) in spectra.iter().enumerate() {
            for (row, e) in sp.excitations().into_iter().enumerate() {
                levels[(row, col)] = e;
            }
            gap.push(sp.gap());
            polarization.push(sp.polarization(0));
        }
        Self { axis, grid, levels, gap, polarization }
    }

    /// Grid index, axis value and size of the smallest gap.
    pub fn min_gap(&self) -> (usize, T, T) {
        let mut best = 0;
        for k in 1..self.gap.len() {
            if self.gap[k] < self.gap[best] {
                best = k;
            }
        }
        (best, self.grid[best], self.gap[best])
    }

    /// First axis value at which the gap is below `threshold`.
    pub fn first_below(&self, threshold: T) -> Option<T> {
        self.gap.iter().position(|&g| g < threshold).map(|k| self.grid[k])
    }

    pub fn gap_trend(&self) -> Trend {
        if self.gap.windows(2).all(|w| w[1] < w[0]) {
            Trend::StrictlyDecreasing
        } else if self.gap.windows(2).all(|w| w[1] > w[0]) {
            Trend::StrictlyIncreasing
        } else {
            Trend::Mixed
        }
    }

    /// Columns `<axis>, E2-E1, ..., E{k}-E1, gap` keeping at most `max_levels`
    /// levels above the ground state.
    pub fn to_table(&self, max_levels: Option<usize>) -> Table {
        let available = self.levels.nrows().saturating_sub(1);
        let keep = max_levels.map_or(available, |m| m.min(available));
        let mut columns = vec![self.axis.name().to_string()];
        columns.extend((0..keep).map(|k| format!("E{}-E1", k + 2)));
        columns.push("gap".into());
        let mut table = Table::new(columns);
        for (col, x) in self.grid.iter().enumerate() {
            let mut row = vec![x.to_f64_lossy()];
            row.extend((1..=keep).map(|k| self.levels[(k, col)].to_f64_lossy()));
            row.push(self.gap[col].to_f64_lossy());
            table.push(row);
        }
        table
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::validation("scan grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::validation("scan grid has non-finite values"));
    }
    Ok(())
}

/// Spectra along the anneal at the instance's own biases.
pub fn scan_vs_s<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s_grid: &[T],
) -> Result<SpectrumScan<T>> {
    check_grid(s_grid)?;
    let spectra = s_grid
        .par_iter()
        .map(|&s| eigendecompose(&assemble_hamiltonian(instance, schedule, s, None)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan::from_spectra(Axis::S, s_grid.to_vec(), spectra))
}

/// Spectra at fixed `s` against a uniform bias applied to every qubit.
pub fn scan_vs_h<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    h_grid: &[T],
) -> Result<SpectrumScan<T>> {
    check_grid(h_grid)?;
    let spectra = h_grid
        .par_iter()
        .map(|&h| eigendecompose(&assemble_hamiltonian(instance, schedule, s, Some(h))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan::from_spectra(Axis::H, h_grid.to_vec(), spectra))
}
