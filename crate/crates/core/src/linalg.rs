//! Dense Hermitian helpers shared by every module.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Modulus of a complex scalar.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = cabs(m[(i, j)] - m[(j, i)].conj());
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Rejects non-square, non-finite or non-Hermitian input.
pub fn check_hermitian<T: Real>(m: &CMatrix<T>, tol: T) -> Result<()> {
    if !m.is_square() {
        return Err(Error::validation(format!(
            "operator is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite_value() || !z.im.is_finite_value()) {
        return Err(Error::validation("operator has non-finite entries"));
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian { deviation: defect.to_f64_lossy() });
    }
    Ok(())
}

fn real_part<T: Real>(m: &CMatrix<T>) -> Option<DMatrix<T>> {
    if m.iter().all(|z| z.im == T::zero()) {
        Some(m.map(|z| z.re))
    } else {
        None
    }
}

fn max_iterations(dim: usize) -> usize {
    200 * dim.max(4)
}

/// Makes the largest-magnitude component of `v` real and positive.
///
/// Ties within a relative `1e-8` go to the lowest index so the choice does
/// not depend on rounding noise.
pub fn fix_phase<T: Real>(v: &mut CVector<T>) {
    let Some(max) = v.iter().map(|z| cabs(*z)).reduce(|a, b| if b > a { b } else { a }) else {
        return;
    };
    if max == T::zero() {
        return;
    }
    let cut = max * (T::one() - T::tol(1e-8));
    let k = v.iter().position(|z| cabs(*z) >= cut).unwrap_or(0);
    let phase = v[k].conj() / c(cabs(v[k]));
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[k] = c(v[k].re);
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues ascend (stable order), columns of the returned matrix are the
/// matching orthonormal eigenvectors with [`fix_phase`] applied.
pub fn eigh<T: Real>(m: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    check_hermitian(m, hermitian_tol(m))?;
    let dim = m.nrows();
    let (values, vectors): (Vec<T>, CMatrix<T>) = match real_part(m) {
        Some(re) => {
            let eig = SymmetricEigen::try_new(re, T::default_epsilon(), max_iterations(dim))
                .ok_or(Error::EigenNonConvergence { dim })?;
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(c))
        }
        None => {
            let eig = SymmetricEigen::try_new(m.clone(), T::default_epsilon(), max_iterations(dim))
                .ok_or(Error::EigenNonConvergence { dim })?;
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let mut sorted = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: CVector<T> = vectors.column(src).into_owned();
        fix_phase(&mut col);
        sorted.set_column(dst, &col);
    }
    Ok((sorted_values, sorted))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    check_hermitian(m, hermitian_tol(m))?;
    let mut values: Vec<T> = match real_part(m) {
        Some(re) => re.symmetric_eigenvalues().iter().copied().collect(),
        None => m.symmetric_eigenvalues().iter().copied().collect(),
    };
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(values)
}

/// Hermiticity tolerance relative to the operator scale.
fn hermitian_tol<T: Real>(m: &CMatrix<T>) -> T {
    let scale = m.iter().map(|z| cabs(*z)).fold(T::one(), |a, b| if b > a { b } else { a });
    T::tol(1e-12) * scale
}

/// `v^dagger A v`, real part.
pub fn expectation<T: Real>(a: &CMatrix<T>, v: &CVector<T>) -> T {
    v.dotc(&(a * v)).re
}

/// Outer product `v v^dagger`.
pub fn projector<T: Real>(v: &CVector<T>) -> CMatrix<T> {
    v * v.adjoint()
}

/// Kronecker product `a ⊗ b` with `a` on the more significant index.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: usize, data: &[(f64, f64)]) -> CMatrix<f64> {
        CMatrix::from_row_iterator(rows, rows, data.iter().map(|&(r, i)| Complex::new(r, i)))
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = cm(2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let (vals, vecs) = eigh(&x).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        // Largest component made real positive; tie goes to index 0.
        assert!(vecs[(0, 0)].re > 0.0 && vecs[(0, 0)].im == 0.0);
        assert!(vecs[(0, 1)].re > 0.0);
    }

    #[test]
    fn complex_hermitian_path() {
        let y = cm(2, &[(0., 0.), (0., -1.), (0., 1.), (0., 0.)]);
        let (vals, vecs) = eigh(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        for (k, &val) in vals.iter().enumerate() {
            let v: CVector<f64> = vecs.column(k).into_owned();
            let r = &y * &v - v.scale(val);
            assert!(r.norm() < 1e-13);
        }
        assert_eq!(eigvalsh(&y).unwrap().len(), 2);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = cm(2, &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
        let nan = cm(1, &[(f64::NAN, 0.)]);
        assert!(matches!(eigvalsh(&nan), Err(Error::Validation(_))));
    }

    #[test]
    fn phase_fix_is_idempotent() {
        let mut v = CVector::from_vec(vec![Complex::new(0.1, 0.2), Complex::new(-0.3, 0.9)]);
        fix_phase(&mut v);
        let once = v.clone();
        fix_phase(&mut v);
        assert!((once - v).norm() < 1e-15);
    }
}
