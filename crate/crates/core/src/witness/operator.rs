use crate::entangle::{partial_transpose, Bipartition};
use crate::error::{Error, Result};
use crate::linalg::{c, expectation, fix_phase, projector, CMatrix, CVector};
use crate::scalar::Real;
use crate::thermal::DensityMatrix;

/// Separability threshold on the most negative partial-transpose eigenvalue.
pub const NO_WITNESS_THRESHOLD: f64 = 1e-9;

/// `W = |φ⟩⟨φ|^{T_A}`, where `φ` is the most negative eigenvector of the
/// partial transpose of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOperator<T: Real> {
    matrix: CMatrix<T>,
    partition: Bipartition,
    phi: CVector<T>,
    lambda_min: T,
    built_from: String,
}

impl<T: Real> WitnessOperator<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn partition(&self) -> Bipartition {
        self.partition
    }

    pub fn phi(&self) -> &CVector<T> {
        &self.phi
    }

    /// Smallest eigenvalue of the source state's partial transpose, which is
    /// also `Tr[W |ψ⟩⟨ψ|]`.
    pub fn lambda_min(&self) -> T {
        self.lambda_min
    }

    pub fn built_from(&self) -> &str {
        &self.built_from
    }

    /// Relabels the source state, e.g. `"ground state, s=0.32"`.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.built_from = label.into();
        self
    }

    pub fn expectation(&self, rho: &DensityMatrix<T>) -> T {
        (&self.matrix * rho.matrix()).trace().re
    }

    pub fn expectation_pure(&self, psi: &CVector<T>) -> T {
        expectation(&self.matrix, psi)
    }
}

/// Row (A) and column (B) index of each basis state in the split layout.
/// Within each side the lowest-numbered qubit is the most significant bit.
pub(crate) fn split_indices(part: &Bipartition) -> Vec<(usize, usize)> {
    let n = part.n();
    let (a, b) = (part.a(), part.b());
    let gather = |idx: usize, qubits: &[usize]| {
        qubits.iter().fold(0usize, |acc, &q| acc << 1 | (idx >> (n - 1 - q) & 1))
    };
    (0..1usize << n).map(|idx| (gather(idx, &a), gather(idx, &b))).collect()
}

/// Builds the partial-transpose witness of `psi` across `part` from its
/// Schmidt decomposition `ψ = Σ s_k |a_k⟩|b_k⟩`: the partial transpose has
/// smallest eigenvalue `-s_1 s_2` with eigenvector
/// `(|a_1* b_2⟩ - |a_2* b_1⟩)/√2`.
///
/// When the two leading Schmidt coefficients are equal the eigenvector is not
/// unique; the one from the SVD, with the phase convention of
/// [`fix_phase`], is used.
pub fn construct_witness_operator<T: Real>(psi: &CVector<T>, part: &Bipartition) -> Result<WitnessOperator<T>> {
    let n = part.n();
    let dim = 1usize << n;
    if psi.len() != dim {
        return Err(Error::validation(format!("state has length {}, expected {dim}", psi.len())));
    }
    let norm = psi.norm();
    if !norm.is_finite_value() || (norm - T::one()).abs() > T::tol(1e-8) {
        return Err(Error::validation(format!("state norm {} is not 1", norm.to_f64_lossy())));
    }
    let layout = split_indices(part);
    let rows = 1usize << part.a().len();
    let cols = dim / rows;
    let mut m = CMatrix::zeros(rows, cols);
    for (idx, &(r, col)) in layout.iter().enumerate() {
        m[(r, col)] = psi[idx];
    }
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).expect("finite"));
    let sv = |k: usize| order.get(k).map_or(T::zero(), |&o| svd.singular_values[o]);
    let lambda_min = -(sv(0) * sv(1));
    if lambda_min >= -T::tol(NO_WITNESS_THRESHOLD) {
        return Err(Error::NoWitness { mask: part.mask(), lambda_min: lambda_min.to_f64_lossy() });
    }
    // a_k* is conj(U[:,k]); b_k is conj(V[:,k]) = the k-th row of V^H.
    let (k1, k2) = (order[0], order[1]);
    let half = c(T::lit(std::f64::consts::FRAC_1_SQRT_2));
    let mut phi = CVector::zeros(dim);
    for (idx, &(r, col)) in layout.iter().enumerate() {
        let first = u[(r, k1)].conj() * v_t[(k2, col)];
        let second = u[(r, k2)].conj() * v_t[(k1, col)];
        phi[idx] = (first - second) * half;
    }
    fix_phase(&mut phi);
    let matrix = partial_transpose(&projector(&phi), part)?;
    Ok(WitnessOperator { matrix, partition: *part, phi, lambda_min, built_from: "supplied state".into() })
}
