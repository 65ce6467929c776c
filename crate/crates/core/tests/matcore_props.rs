use proptest::prelude::*;
use rand::Rng;
use xlab_core::matcore::{self, c, kron, CMatrix};
use xlab_core::{qstates, rng};

fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&g + &g.adjoint()).scale_real(0.5)
}

fn arb_hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(-2.0f64..2.0, 2 * n * n).prop_map(move |v| {
        let g = CMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
        (&g + &g.adjoint()).scale_real(0.5)
    })
}

#[test]
fn eigendecomposition_reconstructs_and_is_unitary() {
    for i in 0..10_000u64 {
        let mut r = rng::stream(101, i);
        let n = if i % 2 == 0 { 4 } else { 6 };
        let m = random_hermitian(n, &mut r);
        let e = matcore::eig_hermitian(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) <= 1e-10, "sample {i}");
        assert!(e.vectors.unitarity_deviation() <= 1e-10, "sample {i}");
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]), "sample {i}");
    }
}

#[test]
fn gauge_makes_largest_component_real_positive() {
    for i in 0..200u64 {
        let mut r = rng::stream(102, i);
        let e = matcore::eig_hermitian(&random_hermitian(5, &mut r)).unwrap();
        for j in 0..5 {
            let col = e.vectors.column(j);
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let k = col.iter().position(|z| z.norm() >= big - 1e-12).unwrap();
            assert!(col[k].im.abs() < 1e-14 && col[k].re > 0.0);
        }
    }
}

#[test]
fn sqrt_of_projector_is_itself() {
    for i in 0..200u64 {
        let mut r = rng::stream(103, i);
        let psi = qstates::random_ket(4, &mut r);
        let p = CMatrix::outer(&psi);
        assert!(matcore::sqrt_psd(&p).unwrap().max_abs_diff(&p) <= 1e-9);
    }
}

#[test]
fn sqrt_squares_back() {
    for i in 0..1000u64 {
        let mut r = rng::stream(104, i);
        let rho = qstates::random_mixed(&[2, 3], 1 + (i % 6) as usize, &mut r).unwrap();
        let s = matcore::sqrt_psd(rho.matrix()).unwrap();
        assert!((&s * &s).max_abs_diff(rho.matrix()) <= 1e-9, "sample {i}");
    }
}

#[test]
fn trace_norm_and_rank_of_ginibre_states() {
    for i in 0..1000u64 {
        let mut r = rng::stream(105, i);
        let rank = 1 + (i % 4) as usize;
        let rho = qstates::random_mixed(&[2, 2], rank, &mut r).unwrap();
        assert!((matcore::trace_norm(rho.matrix()).unwrap() - 1.0).abs() <= 1e-12);
        assert_eq!(matcore::numerical_rank(rho.matrix()).unwrap(), rank);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kron_is_associative(a in arb_hermitian(2), b in arb_hermitian(2), m in arb_hermitian(3)) {
        let left = kron(&kron(&a, &b), &m);
        let right = kron(&a, &kron(&b, &m));
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    #[test]
    fn kron_of_products_is_product_of_krons(a in arb_hermitian(2), b in arb_hermitian(2), x in arb_hermitian(2), y in arb_hermitian(2)) {
        let lhs = kron(&(&a * &x), &(&b * &y));
        let rhs = &kron(&a, &b) * &kron(&x, &y);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn spectrum_sums_to_trace(m in arb_hermitian(4)) {
        let e = matcore::eig_hermitian(&m).unwrap();
        prop_assert!((e.values.iter().sum::<f64>() - m.trace().re).abs() <= 1e-10);
    }

    #[test]
    fn singular_values_match_gram_spectrum(m in arb_hermitian(4), n in arb_hermitian(4)) {
        let a = &m * &n.conj();
        let sv = matcore::singular_values(&a);
        let gram = matcore::eig_hermitian(&(&a * &a.adjoint())).unwrap();
        for (s, g) in sv.iter().zip(&gram.values) {
            prop_assert!((s * s - g).abs() <= 1e-9 * (1.0 + g.abs()));
        }
    }
}
