use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

use qa_entangle::linalg::CMatrix;
use qa_entangle::model::{
    assemble_hamiltonian, assemble_probe_hamiltonian, assemble_with_scales, left_hamiltonian, AnnealSchedule,
    ProbeConfig, ProblemInstance,
};
use qa_entangle::spectra::eigendecompose;
use qa_entangle::thermal::{boltzmann_populations, build_density_matrix, Temperature};

fn flat(delta: f64, escale: f64) -> AnnealSchedule<f64> {
    AnnealSchedule::from_rows(&[(0.0, delta, escale), (1.0, delta, escale)], "flat").unwrap()
}

fn pauli(kind: char) -> DMatrix<f64> {
    match kind {
        'x' => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        'z' => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        _ => DMatrix::identity(2, 2),
    }
}

/// `σ` acting on the listed qubits, identity elsewhere; qubit 0 leftmost.
fn embed(n: usize, ops: &[(usize, char)]) -> DMatrix<f64> {
    (0..n).fold(DMatrix::identity(1, 1), |acc, q| {
        let kind = ops.iter().find(|o| o.0 == q).map_or('i', |o| o.1);
        acc.kronecker(&pauli(kind))
    })
}

/// Tensor-product construction of the annealing Hamiltonian.
fn kron_hamiltonian(inst: &ProblemInstance<f64>, delta: f64, escale: f64) -> DMatrix<f64> {
    let n = inst.n();
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for (i, &hi) in inst.h().iter().enumerate() {
        h -= embed(n, &[(i, 'z')]) * (escale * hi);
    }
    for (i, j, v) in inst.couplings() {
        h += embed(n, &[(i, 'z'), (j, 'z')]) * (escale * v);
    }
    for i in 0..n {
        h -= embed(n, &[(i, 'x')]) * (0.5 * delta * inst.delta_factor(i));
    }
    h
}

fn max_diff(a: &CMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, &y)| (x - Complex::new(y, 0.0)).norm()).fold(0.0, f64::max)
}

fn instance_strategy() -> impl Strategy<Value = ProblemInstance<f64>> {
    (2usize..=5).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        (
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(prop::option::of(-3.0..3.0f64), m),
            prop::collection::vec(0.5..1.5f64, n),
        )
            .prop_map(move |(h, js, scale)| {
                let couplings = pairs.iter().zip(js).filter_map(|(&(i, j), v)| v.map(|v| (i, j, v)));
                ProblemInstance::new(n, h, couplings).unwrap().with_delta_scale(scale).unwrap()
            })
    })
}

#[test]
fn fm2_matrix_elements() {
    let h = assemble_hamiltonian(&ProblemInstance::fm2(), &flat(1.0, 1.0), 0.5, None).unwrap();
    let m = h.matrix();
    let diag: Vec<f64> = (0..4).map(|k| m[(k, k)].re).collect();
    assert_eq!(diag, vec![-2.5, 2.5, 2.5, -2.5]);
    for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        assert_eq!(m[(a, b)].re, -0.5);
        assert_eq!(m[(b, a)].re, -0.5);
    }
    assert_eq!(m[(0, 3)].re, 0.0);
    assert_eq!(m[(1, 2)].re, 0.0);
}

#[test]
fn uniform_bias_shifts_each_basis_state() {
    let escale = 0.7;
    let base = assemble_hamiltonian(&ProblemInstance::fm2(), &flat(1.0, escale), 0.5, None).unwrap();
    let biased = assemble_hamiltonian(&ProblemInstance::fm2(), &flat(1.0, escale), 0.5, Some(4.0)).unwrap();
    // (σ0, σ1) per basis state with bit 0 = spin up.
    let spins = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    for (k, (s0, s1)) in spins.iter().enumerate() {
        let shift = biased.matrix()[(k, k)].re - base.matrix()[(k, k)].re;
        assert!((shift + escale * 4.0 * (s0 + s1)).abs() < 1e-12);
    }
    assert!((biased.matrix()[(0, 0)].re - biased.matrix()[(3, 3)].re).abs() > 1.0);
}

#[test]
fn probe_alignment_degenerates_blocks() {
    let sched = AnnealSchedule::<f64>::synthetic();
    let inst = ProblemInstance::fm2();
    let s = 0.35;
    let probe = ProbeConfig::<f64>::default();
    let system = eigendecompose(&assemble_hamiltonian(&inst, &sched, s, None).unwrap()).unwrap();
    let left = eigendecompose(&left_hamiltonian(
        &assemble_hamiltonian(&inst, &sched, s, None).unwrap(),
        2,
        probe.attach_to,
        probe.j_p,
    ))
    .unwrap();
    let eps = system.energies()[1] - left.energies()[0];
    let full = assemble_probe_hamiltonian(&inst, &sched, s, None, &probe, eps).unwrap();
    let m = full.matrix();
    let up = m.view((0, 0), (4, 4)).map(|z| z.re).symmetric_eigen();
    let down = m.view((4, 4), (4, 4)).map(|z| z.re).symmetric_eigen();
    let mut up: Vec<f64> = up.eigenvalues.iter().copied().collect();
    up.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let down_min = down.eigenvalues.min();
    assert!((down_min - up[1]).abs() < 1e-9);
    // Off-diagonal blocks carry only the probe tunneling.
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j { -0.5 * probe.delta_p } else { 0.0 };
            assert!((m[(i, 4 + j)].re - expect).abs() < 1e-15);
        }
    }
}

#[test]
fn probe_coupling_sign_sets_left_polarization() {
    let sched = AnnealSchedule::<f64>::synthetic();
    let system = assemble_hamiltonian(&ProblemInstance::fm2(), &sched, 0.35, None).unwrap();
    let polar = |j_p: f64| {
        let m = left_hamiltonian(&system, 2, 0, j_p).matrix().map(|z| z.re);
        let eig = m.symmetric_eigen();
        let v = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
        let z0 = embed(2, &[(0, 'z')]);
        v.dot(&(&z0 * &v))
    };
    let a = polar(-1.5);
    let b = polar(1.5);
    assert!(a * b < 0.0 && a.abs() > 0.5, "{a} {b}");
}

#[test]
fn fm2_closed_form_spectrum() {
    let sp = eigendecompose(&assemble_with_scales(&ProblemInstance::fm2(), 1.0, 1.0)).unwrap();
    let r = 7.25f64.sqrt();
    let expect = [-r, -2.5, 2.5, r];
    for (e, x) in sp.energies().iter().zip(expect) {
        assert!((e - x).abs() < 1e-12);
    }
    assert!((sp.gap() - 0.192582403567252).abs() < 1e-12);
}

#[test]
fn large_tunneling_gap_approaches_delta() {
    let sp = eigendecompose(&assemble_with_scales(&ProblemInstance::<f64>::fm8(), 100.0, 0.01)).unwrap();
    assert!((sp.gap() - 100.0).abs() / 100.0 < 0.01);
}

#[test]
fn boltzmann_state_at_quoted_gap() {
    // Choose Δ so the fm2 gap is 1.75 GHz at 𝓔 = 1.
    let a: f64 = 2.5;
    let delta = ((1.75 + a).powi(2) - a * a).sqrt();
    let sp = eigendecompose(&assemble_with_scales(&ProblemInstance::fm2(), delta, 1.0)).unwrap();
    let t = Temperature::from_millikelvin(12.5).unwrap();
    let kt = 20.8366e-3 * 12.5;
    let r = (a * a + delta * delta).sqrt();
    let levels = [-r, -a, a, r];
    let z: f64 = levels.iter().map(|e| (-(e + r) / kt).exp()).sum();
    let p = boltzmann_populations(&sp, t);
    assert!((p[0] - 1.0 / z).abs() < 1e-12);
    assert!((p[0] - 0.9988).abs() < 5e-5);

    let rho = build_density_matrix(&sp, &p, None).unwrap();
    let h = assemble_with_scales(&ProblemInstance::fm2(), delta, 1.0);
    let comm = rho.matrix() * h.matrix() - h.matrix() * rho.matrix();
    assert!(comm.norm() < 1e-9);
}

#[test]
fn late_anneal_population_ratio() {
    let sched = AnnealSchedule::<f64>::synthetic();
    let t = Temperature::from_millikelvin(12.5).unwrap();
    let sp = eigendecompose(&assemble_hamiltonian(&ProblemInstance::fm2(), &sched, 0.6, None).unwrap()).unwrap();
    let g = sp.gap();
    assert!(g < 3.0 * t.as_ghz(), "gap {g} should be comparable to kT");
    let p = boltzmann_populations(&sp, t);
    assert!((p[1] / p[0] - (-g / t.as_ghz()).exp()).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assembly_matches_tensor_products(inst in instance_strategy(), delta in 0.0..5.0f64, escale in 0.0..3.0f64) {
        let ours = assemble_with_scales(&inst, delta, escale);
        prop_assert!(max_diff(ours.matrix(), &kron_hamiltonian(&inst, delta, escale)) < 1e-12);
    }

    #[test]
    fn spectrum_is_an_orthonormal_eigenbasis(inst in instance_strategy(), delta in 0.1..5.0f64, escale in 0.1..3.0f64) {
        let h = assemble_with_scales(&inst, delta, escale);
        let sp = eigendecompose(&h).unwrap();
        prop_assert!(sp.energies().windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(sp.max_residual(&h) < 1e-9);
        prop_assert!(sp.orthonormality_defect() < 1e-10);
        let sum: f64 = sp.energies().iter().sum();
        prop_assert!((sum - h.trace()).abs() < 1e-9);
    }

    #[test]
    fn boltzmann_weights_are_normalized_and_ordered(inst in instance_strategy(), mk in 1.0..200.0f64) {
        let sp = eigendecompose(&assemble_with_scales(&inst, 1.0, 1.0)).unwrap();
        let p = boltzmann_populations(&sp, Temperature::from_millikelvin(mk).unwrap());
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
