use proptest::prelude::*;
use quench_core::bose_hubbard::{from_oscillator, to_oscillator, BoseHubbardSpec};
use quench_core::chain::{
    build_coupling_matrix, eigendecompose, periodic_eigenvalues, quench_modes,
};
use quench_core::*;

#[test]
fn bose_hubbard_round_trip_draws() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..10_000 {
        let j: f64 = rng.random_range(0.0..5.0);
        let w: f64 = j + rng.random_range(1e-3..5.0);
        let p = to_oscillator(w, j, Phase::Pre).unwrap();
        let (w2, j2) = from_oscillator(p.omega, p.k);
        assert!((w2 - w).abs() < 1e-12 && (j2 - j).abs() < 1e-12);
        assert!(
            (p.omega_minus.powi(2) - (p.omega.powi(2) + 2.0 * p.k)).abs()
                < 1e-12 * p.omega_minus.powi(2)
        );
    }
}

#[test]
fn bose_hubbard_pipeline_is_the_mapped_pipeline() {
    let bh = BoseHubbardSpec {
        omega_bh_i: 3.0,
        omega_bh_f: 2.06,
        hopping: 2.0,
    };
    let via_bh = bh.to_chain_spec().unwrap();
    let direct = ChainSpec::new(
        2,
        (1.0, 12.0),
        (2.06 - 2.0, 2.0 * 2.06 * 2.0),
        Boundary::Open,
    )
    .unwrap();
    let grid = TimeGrid::new(20.0, 0.1).unwrap();
    let p = Partition::second_half(2).unwrap();
    let a = entropy_series(&via_bh, &ChainProtocol::Sudden, &p, &grid, &[1, 2]).unwrap();
    let b = entropy_series(&direct, &ChainProtocol::Sudden, &p, &grid, &[1, 2]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn hopping_free_pair_is_unentangled() {
    let spec = BoseHubbardSpec {
        omega_bh_i: 2.0,
        omega_bh_f: 0.7,
        hopping: 0.0,
    }
    .to_chain_spec()
    .unwrap();
    let grid = TimeGrid::new(30.0, 0.1).unwrap();
    let s = entropy_series(
        &spec,
        &ChainProtocol::Sudden,
        &Partition::second_half(2).unwrap(),
        &grid,
        &[1, 2],
    )
    .unwrap();
    assert!(s.s1().unwrap().iter().all(|v| v.abs() < 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modes_diagonalize_coupling(n in 2usize..24, w in 0.01f64..4.0, k in 0.0f64..4.0, periodic in any::<bool>()) {
        let b = if periodic { Boundary::Periodic } else { Boundary::Open };
        let spec = ChainSpec::new(n, (w, k), (w, k), b).unwrap();
        let km = build_coupling_matrix(&spec, Phase::Pre);
        let modes = eigendecompose(&km).unwrap();
        let u = modes.u();
        let ortho = u * u.transpose() - nalgebra::DMatrix::<f64>::identity(n, n);
        prop_assert!(ortho.amax() < 1e-12);
        let d = u * km.as_matrix() * u.transpose();
        let scale = modes.lambda().iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    prop_assert!(d[(i, j)].abs() < 1e-10 * scale);
                }
            }
        }
        prop_assert!(modes.lambda().windows(2).all(|p| p[0] <= p[1]));
        if periodic {
            let mut closed = periodic_eigenvalues(&spec, Phase::Pre).unwrap();
            closed.sort_by(f64::total_cmp);
            for (a, c) in modes.lambda().iter().zip(&closed) {
                prop_assert!((a - c).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn shared_basis_diagonalizes_both_phases(n in 2usize..16, wi in 0.1f64..3.0, ki in 0.0f64..3.0, wf in 0.0f64..3.0, kf in 0.0f64..3.0) {
        let spec = ChainSpec::new(n, (wi, ki), (wf, kf), Boundary::Periodic).unwrap();
        let qm = quench_modes(&spec).unwrap();
        let kfm = build_coupling_matrix(&spec, Phase::Post);
        let d = qm.pre.u() * kfm.as_matrix() * qm.pre.u().transpose();
        for i in 0..n {
            prop_assert!((d[(i, i)] - qm.post[i]).abs() < 1e-10 * (1.0 + kf + wf * wf));
        }
        // smallest post-quench frequency is the on-site one
        let min = qm.post.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((min - wf * wf).abs() < 1e-12);
    }
}
