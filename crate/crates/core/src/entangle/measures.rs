use nalgebra::Complex;
use rayon::prelude::*;

use crate::entangle::{enumerate_bipartitions, Bipartition};
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, eigvalsh, CMatrix};
use crate::scalar::Real;
use crate::thermal::DensityMatrix;

/// Per-cut negativities below this are treated as zero when forming the
/// geometric mean.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Transposes the `A` factor of an operator on `part.n()` qubits.
pub fn partial_transpose<T: Real>(m: &CMatrix<T>, part: &Bipartition) -> Result<CMatrix<T>> {
    let dim = 1usize << part.n();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::validation(format!(
            "operator is {}x{}, bipartition expects {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    let a = part.basis_mask();
    Ok(CMatrix::from_fn(dim, dim, |r, col| {
        // Element (r, col) of the result is element (r', c') of the input
        // with the A bits of row and column exchanged.
        let r2 = (r & !a) | (col & a);
        let c2 = (col & !a) | (r & a);
        m[(r2, c2)]
    }))
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^{T_A}`.
pub fn negativity<T: Real>(rho: &DensityMatrix<T>, part: &Bipartition) -> Result<T> {
    let pt = partial_transpose(rho.matrix(), part)?;
    let eig = eigvalsh(&pt)?;
    Ok(eig.iter().filter(|&&x| x < T::zero()).fold(T::zero(), |a, &x| a - x))
}

/// `(‖ρ^{T_A}‖₁ - 1) / 2` via singular values.
pub fn negativity_trace_norm<T: Real>(rho: &DensityMatrix<T>, part: &Bipartition) -> Result<T> {
    let pt = partial_transpose(rho.matrix(), part)?;
    let dim = pt.nrows();
    let svd = nalgebra::linalg::SVD::try_new(pt, false, false, T::default_epsilon(), 200 * dim)
        .ok_or(Error::EigenNonConvergence { dim })?;
    let norm = svd.singular_values.iter().fold(T::zero(), |a, &s| a + s);
    Ok(((norm - rho.trace()) / T::lit(2.0)).max(T::zero()))
}

/// Negativity of every canonical cut and their geometric mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalNegativity<T> {
    pub value: T,
    pub per_cut: Vec<(Bipartition, T)>,
}

/// Geometric mean of the negativity over all `2^(n-1) - 1` cuts; zero as soon
/// as any cut is separable.
pub fn global_negativity<T: Real>(rho: &DensityMatrix<T>) -> Result<GlobalNegativity<T>> {
    let cuts = enumerate_bipartitions(rho.qubits())?;
    let per_cut = cuts
        .par_iter()
        .map(|cut| negativity(rho, cut).map(|v| (*cut, v)))
        .collect::<Result<Vec<_>>>()?;
    let value = geometric_mean(per_cut.iter().map(|p| p.1), T::tol(NEGATIVITY_FLOOR));
    Ok(GlobalNegativity { value, per_cut })
}

/// Geometric mean that is exactly zero when any term is at or below `floor`.
pub fn geometric_mean<T: Real>(values: impl Iterator<Item = T>, floor: T) -> T {
    let mut log_sum = T::zero();
    let mut count = 0usize;
    for v in values {
        if !(v > floor) {
            return T::zero();
        }
        log_sum += v.ln();
        count += 1;
    }
    if count == 0 {
        return T::zero();
    }
    (log_sum / T::from_usize(count).expect("count fits")).exp()
}

/// `(σy ⊗ σy) ρ* (σy ⊗ σy)` in the computational basis.
pub fn spin_flip<T: Real>(rho: &CMatrix<T>) -> CMatrix<T> {
    // σy ⊗ σy is real and anti-diagonal: (-1, 1, 1, -1) from top-right.
    let sign = [-T::one(), T::one(), T::one(), -T::one()];
    CMatrix::from_fn(4, 4, |i, j| rho[(3 - i, 3 - j)].conj() * c(sign[i] * sign[j]))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != 4 {
        return Err(Error::validation(format!("concurrence needs a two-qubit state, got dimension {}", rho.dim())));
    }
    // The square roots of the eigenvalues of ρρ̃ equal the eigenvalues of the
    // Hermitian matrix sqrt(√ρ ρ̃ √ρ).
    let (vals, vecs) = eigh(rho.matrix())?;
    let roots: Vec<Complex<T>> = vals.iter().map(|&v| c(v.max(T::zero()).sqrt())).collect();
    let sqrt_rho = &vecs * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots)) * vecs.adjoint();
    let mut m = &sqrt_rho * spin_flip(rho.matrix()) * &sqrt_rho;
    m = (&m + m.adjoint()).unscale(T::lit(2.0));
    let ev = eigvalsh(&m)?;
    // Eigenvalues at the rounding floor would otherwise contribute ~sqrt(eps).
    let floor = ev[3].abs() * T::tol(1e-14);
    let mut lambda: Vec<T> = ev.into_iter().map(|x| if x > floor { x.sqrt() } else { T::zero() }).collect();
    lambda.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(T::zero()))
}

/// `h₂((1 + √(1 - C²)) / 2)` in bits.
pub fn entanglement_of_formation<T: Real>(concurrence: T) -> Result<T> {
    let slack = T::tol(1e-12);
    if !concurrence.is_finite_value() || concurrence < -slack || concurrence > T::one() + slack {
        return Err(Error::OutOfRange { what: "concurrence", value: concurrence.to_f64_lossy(), min: 0.0, max: 1.0 });
    }
    let cc = concurrence.max(T::zero()).min(T::one());
    let x = (T::one() + (T::one() - cc * cc).sqrt()) / T::lit(2.0);
    Ok(binary_entropy(x))
}

fn binary_entropy<T: Real>(x: T) -> T {
    let term = |p: T| if p > T::zero() { -p * p.log2() } else { T::zero() };
    term(x) + term(T::one() - x)
}
