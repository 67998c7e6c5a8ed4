use crate::error::{Error, Result};
use crate::linalg::{c, check_hermitian, CMatrix};
use crate::model::{AnnealSchedule, ProblemInstance};
use crate::scalar::Real;

/// Dense Hermitian matrix in GHz on the computational basis.
///
/// Basis index `b` encodes qubit 0 in its most significant bit; a zero bit is
/// spin up (`σz = +1`).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Wraps `matrix` after checking `max |M - M†| < 1e-12` (scaled for `T`).
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        check_hermitian(&matrix, T::tol(1e-12))?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> T {
        self.matrix.diagonal().iter().fold(T::zero(), |a, z| a + z.re)
    }
}

/// `σz` eigenvalue of qubit `i` in basis state `b` of an `n`-qubit register.
#[inline]
pub fn spin(b: usize, i: usize, n: usize) -> i32 {
    if (b >> (n - 1 - i)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Bit mask flipping qubit `i`.
#[inline]
pub fn flip_mask(i: usize, n: usize) -> usize {
    1 << (n - 1 - i)
}

/// Diagonal of `σz_i`.
pub fn sigma_z_diagonal<T: Real>(n: usize, i: usize) -> Vec<T> {
    (0..1usize << n).map(|b| if spin(b, i, n) > 0 { T::one() } else { -T::one() }).collect()
}

/// Classical energies `escale · (-Σ h_i σ_i + Σ J_ij σ_i σ_j)` of every basis state.
pub fn ising_energies<T: Real>(instance: &ProblemInstance<T>, escale: T) -> Vec<T> {
    let n = instance.n();
    (0..instance.dim())
        .map(|b| {
            let mut e = T::zero();
            for (i, &h) in instance.h().iter().enumerate() {
                if spin(b, i, n) > 0 {
                    e -= h;
                } else {
                    e += h;
                }
            }
            for (i, j, v) in instance.couplings() {
                if spin(b, i, n) == spin(b, j, n) {
                    e += v;
                } else {
                    e -= v;
                }
            }
            e * escale
        })
        .collect()
}

/// `escale · H_P - ½ Σ_i delta · d_i σx_i` where `d_i` is the instance's
/// per-qubit tunneling multiplier.
pub fn assemble_with_scales<T: Real>(instance: &ProblemInstance<T>, delta: T, escale: T) -> HermitianOperator<T> {
    let n = instance.n();
    let dim = instance.dim();
    let diag = ising_energies(instance, escale);
    let mut m = CMatrix::zeros(dim, dim);
    let half = T::lit(0.5);
    for b in 0..dim {
        m[(b, b)] = c(diag[b]);
        for i in 0..n {
            let amp = -half * delta * instance.delta_factor(i);
            m[(b, b ^ flip_mask(i, n))] = c(amp);
        }
    }
    HermitianOperator { matrix: m }
}

/// System Hamiltonian at anneal fraction `s`. `h_override` replaces every
/// bias with one uniform value.
pub fn assemble_hamiltonian<T: Real>(
    instance: &ProblemInstance<T>,
    schedule: &AnnealSchedule<T>,
    s: T,
    h_override: Option<T>,
) -> Result<HermitianOperator<T>> {
    let scales = schedule.at(s)?;
    if let Some(h) = h_override {
        if !h.is_finite_value() {
            return Err(Error::validation("bias override is not finite"));
        }
        let inst = instance.with_uniform_bias(h);
        return Ok(assemble_with_scales(&inst, scales.delta, scales.escale));
    }
    Ok(assemble_with_scales(instance, scales.delta, scales.escale))
}
