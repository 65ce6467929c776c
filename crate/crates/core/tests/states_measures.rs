use std::f64::consts::PI;

use rand::Rng;
use xlab_core::matcore::{self, cr, kron, CMatrix, C64};
use xlab_core::measures::{self, concurrence, concurrence_x, negativity_e};
use xlab_core::qstates::{self, Family, Meb2x3, XMode, XParams};
use xlab_core::{rng, tgx, DensityMatrix};

fn assert_state(rho: &DensityMatrix, ctx: &str) {
    let m = rho.matrix();
    assert!(m.hermitian_deviation() <= 1e-12, "{ctx}: not Hermitian");
    assert!((m.trace().re - 1.0).abs() <= 1e-12 && m.trace().im.abs() <= 1e-12, "{ctx}: trace");
    assert!(rho.spectrum().iter().all(|&l| l >= -1e-10), "{ctx}: negative eigenvalue");
}

/// Partial trace by explicit summation over the traced index.
fn partial_trace_oracle(m: &CMatrix, da: usize, db: usize, keep: usize) -> CMatrix {
    match keep {
        0 => CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        _ => CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    }
}

/// Partial transpose on the first factor: `sum_ij |j><i| ⊗ B_ij` for `rho = sum_ij |i><j| ⊗ B_ij`.
fn partial_transpose_oracle(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..da {
            let block = CMatrix::from_fn(db, db, |r, s| m[(i * db + r, j * db + s)]);
            let mut unit = CMatrix::zeros(da, da);
            unit[(j, i)] = cr(1.0);
            acc = &acc + &kron(&unit, &block);
        }
    }
    acc
}

fn pure_concurrence(psi: &[C64]) -> f64 {
    2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm()
}

#[test]
fn constructors_produce_valid_states() {
    for i in 0..10_000u64 {
        let mut r = rng::stream(201, i);
        let p = XParams::random(&mut r);
        assert_state(&qstates::general_x_state(&p, XMode::Full), "general_x");
        let rank = 1 + (i % 4) as usize;
        let thetas: Vec<f64> = (0..rank).map(|_| r.gen::<f64>() * PI / 2.0).collect();
        let angles: Vec<f64> = (0..rank - 1).map(|_| 0.05 + r.gen::<f64>() * 1.4).collect();
        let probs = qstates::hyperspherical_probs(&angles);
        if let Ok(x) = qstates::rank_x_state(rank, &thetas, &probs) {
            assert_state(&x, "rank_x");
            assert_eq!(measures::anti_x_measure(&x).unwrap(), 0.0);
        }
        let r6 = 1 + (i % 6) as usize;
        let t6: Vec<f64> = (0..r6).map(|_| 0.1 + r.gen::<f64>() * 1.3).collect();
        let a6: Vec<f64> = (0..r6 - 1).map(|_| 0.05 + r.gen::<f64>() * 1.4).collect();
        let p6 = qstates::hyperspherical_probs(&a6);
        for s in [qstates::lx_rank_state(r6, &t6, &p6), qstates::tgx_rank_state(r6, &t6, &p6)].into_iter().flatten() {
            assert_state(&s, "2x3 rank family");
        }
    }
}

#[test]
fn general_x_states_have_no_anti_x_weight() {
    for i in 0..1000u64 {
        let mut r = rng::stream(202, i);
        let x = qstates::general_x_state(&XParams::random(&mut r), XMode::Reduced);
        assert_eq!(measures::anti_x_measure(&x).unwrap(), 0.0);
    }
}

#[test]
fn theta_state_concurrence_law() {
    for a in 0..=40 {
        for b in 0..8 {
            let (theta, phi) = (a as f64 * PI / 80.0, b as f64 * PI / 4.0);
            for fam in [Family::Phi, Family::Psi] {
                let got = concurrence(&qstates::theta_state(fam, theta, phi)).unwrap();
                assert!((got - (2.0 * theta).sin().abs()).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn concurrence_matches_pure_state_formula() {
    for i in 0..2000u64 {
        let mut r = rng::stream(203, i);
        let psi = qstates::random_ket(4, &mut r);
        let rho = DensityMatrix::from_ket(&[2, 2], &psi).unwrap();
        assert!((concurrence(&rho).unwrap() - pure_concurrence(&psi)).abs() <= 1e-9, "sample {i}");
    }
}

#[test]
fn concurrence_agrees_with_x_formula() {
    for i in 0..10_000u64 {
        let mut r = rng::stream(204, i);
        let x = qstates::general_x_state(&XParams::random(&mut r), XMode::Full);
        assert!((concurrence(&x).unwrap() - concurrence_x(&x).unwrap()).abs() <= 1e-9, "sample {i}");
    }
}

#[test]
fn concurrence_is_local_unitary_invariant() {
    for i in 0..1000u64 {
        let mut r = rng::stream(205, i);
        let rho = qstates::random_mixed(&[2, 2], 1 + (i % 4) as usize, &mut r).unwrap();
        let u = qstates::random_local_unitary(&[2, 2], &mut r);
        let moved = rho.transform(&u).unwrap();
        assert!((concurrence(&moved).unwrap() - concurrence(&rho).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn partial_trace_matches_index_formula() {
    for (k, dims) in [[2usize, 2], [2, 3], [3, 2], [3, 3]].iter().enumerate() {
        for i in 0..200u64 {
            let mut r = rng::stream(206 + k as u64, i);
            let n = dims[0] * dims[1];
            let rho = qstates::random_mixed(dims, 1 + (i as usize % n), &mut r).unwrap();
            for keep in 0..2 {
                let got = measures::partial_trace(&rho, keep).unwrap();
                let want = partial_trace_oracle(rho.matrix(), dims[0], dims[1], keep);
                assert!(got.matrix().max_abs_diff(&want) <= 1e-12);
            }
        }
    }
}

#[test]
fn partial_transpose_matches_block_formula() {
    for dims in [[2usize, 2], [2, 3]] {
        for i in 0..300u64 {
            let mut r = rng::stream(210, i);
            let rho = qstates::random_mixed(&dims, 1 + (i as usize % 4), &mut r).unwrap();
            let got = measures::partial_transpose(&rho, 0).unwrap();
            let want = partial_transpose_oracle(rho.matrix(), dims[0], dims[1]);
            assert!(got.max_abs_diff(&want) <= 1e-15);
            let back = measures::partial_transpose(&rho, 1).unwrap();
            assert!(back.max_abs_diff(&want.transpose()) <= 1e-15);
        }
    }
}

#[test]
fn negativity_of_pure_states_from_schmidt_coefficients() {
    for i in 0..1000u64 {
        let mut r = rng::stream(211, i);
        let psi = qstates::random_ket(6, &mut r);
        let rho = DensityMatrix::from_ket(&[2, 3], &psi).unwrap();
        let red = measures::partial_trace(&rho, 0).unwrap().spectrum();
        let want = 2.0 * (red[0].max(0.0) * red[1].max(0.0)).sqrt();
        assert!((negativity_e(&rho).unwrap() - want).abs() <= 1e-9, "sample {i}");
    }
}

#[test]
fn product_and_l2_states_pass_peres() {
    for i in 0..1000u64 {
        let mut r = rng::stream(212, i);
        for dims in [[2usize, 2], [2, 3]] {
            let rho = qstates::random_product(&dims, &mut r).unwrap();
            let tn = matcore::trace_norm(&measures::partial_transpose(&rho, 0).unwrap()).unwrap();
            assert!((tn - 1.0).abs() <= 1e-10);
        }
        let l2 = qstates::meb_state_2x3(Meb2x3::L2, r.gen::<f64>() * PI, r.gen::<f64>() * 2.0 * PI);
        let tn = matcore::trace_norm(&measures::partial_transpose(&l2, 0).unwrap()).unwrap();
        assert!((tn - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn reductions_of_projected_states_are_diagonal() {
    for (k, dims) in [vec![2usize, 2], vec![2, 3], vec![3, 3]].into_iter().enumerate() {
        for i in 0..1000u64 {
            let mut r = rng::stream(220 + k as u64, i);
            let n: usize = dims.iter().product();
            let rho = qstates::random_mixed(&dims, 1 + (i as usize % n), &mut r).unwrap();
            let proj = DensityMatrix::new(&dims, tgx::project_tgx(&rho).unwrap());
            let Ok(proj) = proj else { continue };
            for keep in 0..dims.len() {
                let red = measures::partial_trace(&proj, keep).unwrap();
                let m = red.matrix();
                let off = (0..m.rows())
                    .flat_map(|a| (0..m.cols()).map(move |b| (a, b)))
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| m[(a, b)].norm())
                    .fold(0.0, f64::max);
                assert!(off <= 1e-12);
            }
        }
    }
}

#[test]
fn random_mixed_rank_floor() {
    for i in 0..2000u64 {
        let mut r = rng::stream(230, i);
        let rank = 1 + (i % 4) as usize;
        let rho = qstates::random_mixed(&[2, 2], rank, &mut r).unwrap();
        assert!(rho.purity() >= 1.0 / rank as f64 - 1e-12);
    }
}

#[test]
fn mems_2x2_round_trip_and_continuity() {
    for k in 0..100 {
        let p = 0.25 + 0.75 * k as f64 / 99.0;
        let m = qstates::mems_2x2(p).unwrap();
        assert_state(&m, "mems_2x2");
        assert!((m.purity() - p).abs() <= 1e-9, "p = {p}");
        let want = measures::mems_boundary_2x2(p).unwrap();
        assert!((concurrence(&m).unwrap() - want).abs() <= 1e-9, "p = {p}");
    }
    for p in [1.0 / 3.0, 5.0 / 9.0] {
        let lo = qstates::mems_2x2(p - 1e-13).unwrap();
        let hi = qstates::mems_2x2(p).unwrap();
        assert!(lo.matrix().max_abs_diff(hi.matrix()) <= 1e-6);
    }
}

#[test]
fn mems_2x3_round_trip_and_continuity() {
    for k in 0..100 {
        let p = 1.0 / 6.0 + (5.0 / 6.0) * k as f64 / 99.0;
        let m = qstates::mems_2x3(p).unwrap();
        assert_state(&m, "mems_2x3");
        assert!((m.purity() - p).abs() <= 1e-9, "p = {p}");
    }
    for p in [0.2, 0.375] {
        let lo = qstates::mems_2x3(p - 1e-13).unwrap();
        let hi = qstates::mems_2x3(p).unwrap();
        assert!(lo.matrix().max_abs_diff(hi.matrix()) <= 1e-6);
    }
}

#[test]
fn mems_2x3_boundary_interpolation_is_accurate() {
    for k in 0..=2000 {
        let p = 1.0 / 6.0 + (5.0 / 6.0) * k as f64 / 2000.0;
        let direct = negativity_e(&qstates::mems_2x3(p).unwrap()).unwrap();
        assert!((measures::mems_boundary_2x3(p).unwrap() - direct).abs() <= 1e-8, "p = {p}");
    }
    let nodes = measures::mems_boundary_2x3_nodes();
    assert_eq!(nodes.len(), 1000);
    assert!(nodes.windows(2).all(|w| w[0].0 < w[1].0));
    for p in [0.2, 0.375] {
        assert!(nodes.iter().any(|n| n.0 == p));
    }
}

#[test]
fn h_state_round_trip_across_branches() {
    let mut seen = std::collections::HashSet::new();
    for a in 0..=20 {
        for b in 0..=30 {
            let (cv, p) = (a as f64 / 20.0, 0.25 + 0.75 * b as f64 / 30.0);
            let Ok(branch) = qstates::h_branch(cv, p) else { continue };
            seen.insert(format!("{branch:?}"));
            let h = qstates::h_state(cv, p).unwrap();
            assert_state(&h, "h_state");
            assert!((concurrence(&h).unwrap() - cv).abs() <= 1e-9, "({cv}, {p})");
            assert!((h.purity() - p).abs() <= 1e-9, "({cv}, {p})");
        }
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn dcet_companions_share_concurrence() {
    for i in 0..1000u64 {
        let mut r = rng::stream(240, i);
        let rho = qstates::random_mixed(&[2, 2], 1 + (i % 4) as usize, &mut r).unwrap();
        let cv = concurrence(&rho).unwrap();
        let pure = measures::pure_companion(cv).unwrap();
        let mems = measures::mems_companion(cv).unwrap();
        assert!((concurrence(&pure).unwrap() - cv).abs() <= 1e-9);
        assert!((concurrence(&mems).unwrap() - cv).abs() <= 1e-9);
        assert!(mems.purity() <= pure.purity() + 1e-12);
    }
}

#[test]
fn entanglement_never_exceeds_boundaries() {
    for i in 0..20_000u64 {
        let mut r = rng::stream(250, i);
        let rho = qstates::random_mixed(&[2, 2], 1 + (i % 4) as usize, &mut r).unwrap();
        assert!(concurrence(&rho).unwrap() <= measures::mems_boundary_2x2(rho.purity()).unwrap() + 1e-9);
        let rho = qstates::random_mixed(&[2, 3], 1 + (i % 6) as usize, &mut r).unwrap();
        assert!(negativity_e(&rho).unwrap() <= measures::mems_boundary_2x3(rho.purity()).unwrap() + 1e-6);
    }
}

#[test]
fn spin_flip_of_pure_bell_state_is_itself() {
    let phi = qstates::bell_phi_plus();
    let flipped = measures::spin_flip(&phi).unwrap();
    assert!(flipped.max_abs_diff(phi.matrix()) <= 1e-15);
}
