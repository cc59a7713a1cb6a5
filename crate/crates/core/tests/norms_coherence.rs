mod common;

use common::{matrix, odometer, random_dense, rng};
use proptest::prelude::*;
use ttmax_core::bounds::{coherence_error_bound, rank_bound_tt};
use ttmax_core::coherence::{
    block_coherence, gamma_bound_via_coherence, subspace_coherence, tt_core_coherences, NormSelector,
};
use ttmax_core::generators::random_tt;
use ttmax_core::linalg::thin_qr;
use ttmax_core::norms::{balance_cores, core_norm_f_inf, cp_to_tt, gamma_cp_upper, gamma_tt_upper};
use ttmax_core::{orthogonalize, tt_svd, DMatrix, Truncation};

fn orthonormal(seed: u64, m: usize, q: usize) -> DMatrix<f64> {
    thin_qr(&matrix(&mut rng(seed), m, q)).0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coherence_depends_on_subspace_only(seed in any::<u64>(), m in 2usize..12, q in 1usize..4) {
        let q = q.min(m);
        let basis = orthonormal(seed, m, q);
        let rotation = orthonormal(seed ^ 1, q, q);
        let mu = subspace_coherence(&basis).unwrap();
        prop_assert!((mu - subspace_coherence(&(&basis * rotation)).unwrap()).abs() < 1e-10);
        // row energies lie in [q/m, 1] on average / at most
        prop_assert!(mu >= 1.0 - 1e-12 && mu <= m as f64 / q as f64 + 1e-12);
    }

    #[test]
    fn coherence_lower_bounds(dims in prop::collection::vec(2usize..5, 2..=4), seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), &dims);
        let p = tt_core_coherences(&a).unwrap();
        let d = dims.len();
        let r: Vec<f64> = std::iter::once(1).chain(p.ranks.iter().copied()).chain(std::iter::once(1)).map(|x| x as f64).collect();
        for s in 0..d - 1 {
            // left coherence of core s uses blocks of r_{s-1}; right of core s+1 blocks of r_{s+1}
            prop_assert!(p.left[s] >= r[s] - 1e-9, "left {s}: {} < {}", p.left[s], r[s]);
            prop_assert!(p.right[s] >= r[s + 2] - 1e-9, "right {s}: {} < {}", p.right[s], r[s + 2]);
        }
    }

    #[test]
    fn block_coherence_brute_force(seed in any::<u64>(), blocks in 1usize..5, p in 1usize..4, q in 1usize..4) {
        let m = blocks * p;
        let q = q.min(m);
        let basis = orthonormal(seed, m, q);
        let mut worst = 0.0f64;
        for b in 0..blocks {
            let mut e = 0.0;
            for i in b * p..(b + 1) * p {
                for j in 0..q {
                    e += basis[(i, j)] * basis[(i, j)];
                }
            }
            worst = worst.max(e);
        }
        let expect = m as f64 / q as f64 * worst;
        let got = block_coherence(&basis, p, NormSelector::Frobenius).unwrap();
        prop_assert!((got - expect).abs() < 1e-12 * expect.max(1.0));
        let spectral = block_coherence(&basis, p, NormSelector::Spectral).unwrap();
        prop_assert!(spectral <= got + 1e-12);
    }

    #[test]
    fn gamma_bounds_dominate_max_entry(seed in any::<u64>()) {
        let tt = random_tt(&[3, 4, 2, 3], &[2, 3, 2], seed).unwrap();
        let a = tt.to_dense().unwrap();
        let gamma = gamma_tt_upper(&tt);
        prop_assert!(a.max_abs() <= gamma * (1.0 + 1e-12));
        let balanced = balance_cores(&tt).unwrap();
        prop_assert!((gamma_tt_upper(&balanced) - gamma).abs() < 1e-12 * gamma);
        prop_assert!(a.max_abs_diff(&balanced.to_dense().unwrap()).unwrap() < 1e-12 * gamma);
        let target = gamma.powf(0.25);
        for g in balanced.cores() {
            prop_assert!((core_norm_f_inf(g) - target).abs() < 1e-12 * target);
        }
    }

    #[test]
    fn coherence_gamma_bound_covers_orthogonal_factorizations(dims in prop::collection::vec(2usize..5, 2..=4), seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), &dims);
        let tt = tt_svd(&a, &Truncation::exact()).unwrap();
        for pivot in 0..dims.len() {
            let bound = gamma_bound_via_coherence(&a, pivot).unwrap();
            let actual = gamma_tt_upper(&orthogonalize(&tt, pivot).unwrap());
            prop_assert!(actual <= bound + 1e-10, "pivot {pivot}: {actual} > {bound}");
        }
    }

    #[test]
    fn rank_bound_grows_logarithmically(dims in prop::collection::vec(1usize..500, 2..=5), eps in 0.05f64..0.95, c_d in 0.5f64..10.0) {
        let r = rank_bound_tt(&dims, eps, c_d).unwrap();
        let doubled: Vec<usize> = dims.iter().map(|n| 2 * n).collect();
        let r2 = rank_bound_tt(&doubled, eps, c_d).unwrap();
        let step = (c_d * dims.len() as f64 * 2f64.ln() / (eps * eps)).ceil() as u64 + 1;
        prop_assert!(r <= r2 && r2 <= r + step);
    }
}

#[test]
fn cp_to_tt_matches_cp_sum() {
    let mut g = rng(21);
    let factors: Vec<DMatrix<f64>> = [3usize, 2, 4, 2].iter().map(|&n| matrix(&mut g, n, 3)).collect();
    let tt = cp_to_tt(&factors).unwrap();
    let a = tt.to_dense().unwrap();
    for idx in odometer(&[3, 2, 4, 2]) {
        let direct: f64 = (0..3).map(|k| idx.iter().enumerate().map(|(s, &i)| factors[s][(i, k)]).product::<f64>()).sum();
        assert!((a.get(&idx).unwrap() - direct).abs() < 1e-13);
    }
    // diagonal interior slices make the two bounds coincide
    let (cp, tt_gamma) = (gamma_cp_upper(&factors).unwrap(), gamma_tt_upper(&tt));
    assert!((cp - tt_gamma).abs() < 1e-12 * cp);
}

#[test]
fn identity_profiles() {
    let (i4, _) = ttmax_core::identity_tensor(4, 2).unwrap();
    let p = tt_core_coherences(&i4).unwrap();
    assert_eq!(p.ranks, vec![4]);
    assert!((p.left[0] - 1.0).abs() < 1e-12 && (p.right[0] - 1.0).abs() < 1e-12);
    let (i3, _) = ttmax_core::identity_tensor(3, 3).unwrap();
    let p = tt_core_coherences(&i3).unwrap();
    // interior core: (n r / r) max block energy with blocks of r = 3 rows
    for (got, want) in p.left.iter().zip([1.0, 3.0]).chain(p.right.iter().zip([3.0, 1.0])) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let b = coherence_error_bound(&i3, 0.5, 1.0).unwrap();
    assert_eq!(b.per_split.len(), 2);
    // every split gives r_t sqrt(mu products) |A^<t>|_2 = 3 sqrt(3) * 1
    for v in &b.per_split {
        assert!((v - 3.0 * 3f64.sqrt()).abs() < 1e-10, "{v}");
    }
}
