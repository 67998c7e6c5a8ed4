use nalgebra::Complex;
use proptest::prelude::*;

use qa_entangle::entangle::{
    concurrence, enumerate_bipartitions, entanglement_of_formation, global_negativity, negativity,
    negativity_trace_norm, partial_transpose, Bipartition,
};
use qa_entangle::linalg::{eigvalsh, CMatrix, CVector};
use qa_entangle::model::{assemble_with_scales, ProblemInstance};
use qa_entangle::spectra::eigendecompose;
use qa_entangle::thermal::DensityMatrix;

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn ket(n: usize, amps: &[(usize, f64)]) -> CVector<f64> {
    let mut v = CVector::zeros(1 << n);
    for &(i, a) in amps {
        v[i] = Complex::new(a, 0.0);
    }
    v
}

fn pure(v: &CVector<f64>) -> DensityMatrix<f64> {
    DensityMatrix::pure(v).unwrap()
}

/// Transposes the B factor by swapping B bits between row and column.
fn transpose_b(m: &CMatrix<f64>, cut: &Bipartition) -> CMatrix<f64> {
    let n = cut.n();
    let b_bits: usize = cut.b().iter().map(|&q| 1usize << (n - 1 - q)).sum();
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let r2 = (r & !b_bits) | (c & b_bits);
        let c2 = (c & !b_bits) | (r & b_bits);
        m[(r2, c2)]
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn state_strategy(n: usize) -> impl Strategy<Value = DensityMatrix<f64>> {
    let d = 1usize << n;
    (1..=d).prop_flat_map(move |rank| {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * rank).prop_map(move |entries| {
            let g = CMatrix::from_iterator(d, rank, entries.into_iter().map(|(a, b)| Complex::new(a, b)));
            let mut m = &g * g.adjoint();
            let tr = m.trace();
            m /= tr;
            let m = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
            DensityMatrix::new(m).unwrap()
        })
    })
}

#[test]
fn bell_partial_transpose_spectrum() {
    let rho = pure(&ket(2, &[(0, R2), (3, R2)]));
    let cut = Bipartition::new(2, &[0]).unwrap();
    let ev = eigvalsh(&partial_transpose(rho.matrix(), &cut).unwrap()).unwrap();
    let expect = [-0.5, 0.5, 0.5, 0.5];
    for (a, b) in ev.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn transposing_either_side_gives_the_same_spectrum() {
    let mut rng_state = 11u64;
    let mut next = || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let g = CMatrix::from_fn(8, 8, |_, _| Complex::new(next(), next()));
    let mut m = &g * g.adjoint();
    let tr = m.trace();
    m /= tr;
    for mask in [1, 3, 5] {
        let cut = Bipartition::from_mask(3, mask).unwrap();
        let ta = eigvalsh(&partial_transpose(&m, &cut).unwrap()).unwrap();
        let tb = sorted(eigvalsh(&transpose_b(&m, &cut)).unwrap());
        for (a, b) in ta.iter().zip(&tb) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn even_bell_mixture_is_separable() {
    let plus = pure(&ket(2, &[(0, R2), (3, R2)]));
    let minus = pure(&ket(2, &[(0, R2), (3, -R2)]));
    let mix = DensityMatrix::new((plus.matrix() + minus.matrix()) * Complex::new(0.5, 0.0)).unwrap();
    let cut = Bipartition::new(2, &[0]).unwrap();
    assert!(negativity(&mix, &cut).unwrap().abs() < 1e-12);
    assert!(concurrence(&mix).unwrap().abs() < 1e-12);
}

#[test]
fn ghz_negativity_on_every_cut() {
    let ghz = pure(&ket(8, &[(0, R2), (255, R2)]));
    for cut in enumerate_bipartitions(8).unwrap() {
        assert!((negativity(&ghz, &cut).unwrap() - 0.5).abs() < 1e-10, "{cut}");
    }
    let g = global_negativity(&ghz).unwrap();
    assert!((g.value - 0.5).abs() < 1e-10);
}

#[test]
fn fm2_ground_concurrence_closed_form() {
    // Symmetric sector basis (|↑↑⟩+|↓↓⟩)/√2, (|↑↓⟩+|↓↑⟩)/√2 with a = |J|𝓔.
    let (a, delta) = (2.5f64, 1.0f64);
    let r = (a * a + delta * delta).sqrt();
    let alpha = ((1.0 + a / r) / 2.0).sqrt();
    let beta = ((1.0 - a / r) / 2.0).sqrt();
    let expect = alpha * alpha - beta * beta;
    let sp = eigendecompose(&assemble_with_scales(&ProblemInstance::fm2(), delta, 1.0)).unwrap();
    let c = concurrence(&pure(&sp.state(0))).unwrap();
    assert!((c - expect).abs() < 1e-12, "{c} vs {expect}");
    assert!((c - a / r).abs() < 1e-12);
}

#[test]
fn formation_is_monotone_with_known_endpoints() {
    assert_eq!(entanglement_of_formation(0.0f64).unwrap(), 0.0);
    assert!((entanglement_of_formation(1.0f64).unwrap() - 1.0).abs() < 1e-12);
    let mut prev = 0.0f64;
    for k in 1..=100 {
        let e = entanglement_of_formation(k as f64 / 100.0).unwrap();
        assert!(e > prev);
        prev = e;
    }
    assert!(entanglement_of_formation(1.5f64).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negativity_routes_agree(rho in state_strategy(3), mask in 1u32..4) {
        let cut = Bipartition::from_mask(3, mask).unwrap();
        let a = negativity(&rho, &cut).unwrap();
        let b = negativity_trace_norm(&rho, &cut).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn partial_transpose_keeps_trace_and_is_involutive(rho in state_strategy(3), mask in 1u32..4) {
        let cut = Bipartition::from_mask(3, mask).unwrap();
        let pt = partial_transpose(rho.matrix(), &cut).unwrap();
        prop_assert!((pt.trace() - Complex::new(1.0, 0.0)).norm() < 1e-12);
        let back = partial_transpose(&pt, &cut).unwrap();
        prop_assert!((back - rho.matrix()).norm() < 1e-14);
    }

    #[test]
    fn product_states_have_no_entanglement(
        a in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2),
        b in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2),
    ) {
        let v = |x: &[(f64, f64)]| {
            let v = CVector::from_iterator(2, x.iter().map(|&(r, i)| Complex::new(r, i)));
            let n = v.norm();
            v / Complex::new(n, 0.0)
        };
        let (va, vb) = (v(&a), v(&b));
        prop_assume!(va.iter().all(|z| z.norm() > 1e-3) || vb.iter().all(|z| z.norm() > 1e-3));
        let psi = va.kronecker(&vb);
        let rho = pure(&psi);
        prop_assert!(concurrence(&rho).unwrap() < 1e-7);
        prop_assert!(negativity(&rho, &Bipartition::new(2, &[0]).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn concurrence_bounded_and_formation_in_range(rho in state_strategy(2)) {
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        let e = entanglement_of_formation(c.min(1.0)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
    }
}

fn normalized(x: &[(f64, f64)]) -> CVector<f64> {
    let v = CVector::from_iterator(x.len(), x.iter().map(|&(r, i)| Complex::new(r, i)));
    let n = v.norm();
    v / Complex::new(n, 0.0)
}

fn amplitudes(d: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_ancilla_leaves_negativity_unchanged(rho in state_strategy(2), anc in state_strategy(1)) {
        let joint = DensityMatrix::new(rho.matrix().kronecker(anc.matrix())).unwrap();
        let before = negativity(&rho, &Bipartition::new(2, &[0]).unwrap()).unwrap();
        let after = negativity(&joint, &Bipartition::new(3, &[0]).unwrap()).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn pure_concurrence_formula(x in amplitudes(4)) {
        let psi = normalized(&x);
        let expected = 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm();
        prop_assert!((concurrence(&pure(&psi)).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn global_mean_at_most_the_largest_cut(rho in state_strategy(3)) {
        let g = global_negativity(&rho).unwrap();
        let max = g.per_cut.iter().map(|p| p.1).fold(0.0, f64::max);
        prop_assert!(g.value <= max + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // Two qubits: a positive partial transpose is equivalent to separability.
    #[test]
    fn concurrence_and_negativity_agree_on_entanglement(
        x in amplitudes(4), y in amplitudes(4), p in 0.0..1.0f64,
    ) {
        let (a, b) = (normalized(&x), normalized(&y));
        let m = &a * a.adjoint() * Complex::new(p, 0.0) + &b * b.adjoint() * Complex::new(1.0 - p, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let c = concurrence(&rho).unwrap();
        let n = negativity(&rho, &Bipartition::new(2, &[0]).unwrap()).unwrap();
        if c > 1e-4 {
            prop_assert!(n > 1e-10, "C = {c} but N = {n}");
        }
        if n > 1e-8 {
            prop_assert!(c > 1e-8, "N = {n} but C = {c}");
        }
    }
}

#[test]
fn global_mean_equals_common_value() {
    let ghz = ket(4, &[(0, R2), (15, R2)]);
    let g = global_negativity(&pure(&ghz)).unwrap();
    assert!((g.value - g.per_cut[0].1).abs() < 1e-12);
}
