mod common;

use common::{numerical_rank, odometer, random_dense, rng, sorted_singular_values, unfolding};
use proptest::prelude::*;
use ttmax_core::generators::random_tt;
use ttmax_core::tensor::decomp::{left_orthogonality_defect, right_orthogonality_defect, tt_rank_of_dense};
use ttmax_core::tensor::io::{read_tnsr, write_tnsr};
use ttmax_core::{orthogonalize, tt_round, tt_svd, DenseTensor, Shape, Truncation};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 2..=4)
}

fn relative_gap(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.max_abs_diff(b).unwrap() / a.max_abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tnsr_round_trip_is_bit_exact(dims in dims_strategy(), seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), &dims);
        let mut buf = Vec::new();
        write_tnsr(&a, &mut buf).unwrap();
        let b = read_tnsr(buf.as_slice()).unwrap();
        prop_assert_eq!(a.dims(), b.dims());
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn linear_and_multi_index_agree_with_odometer(dims in dims_strategy()) {
        let shape = Shape::new(dims.clone()).unwrap();
        for (lin, idx) in odometer(&dims).into_iter().enumerate() {
            prop_assert_eq!(shape.linear_index(&idx).unwrap(), lin);
            prop_assert_eq!(shape.multi_index(lin), idx);
        }
    }

    #[test]
    fn unfold_matches_oracle_and_folds_back(dims in dims_strategy(), seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), &dims);
        for s in 1..dims.len() {
            let m = a.unfold(s).unwrap().matrix;
            prop_assert_eq!(&m, &unfolding(&a, s));
            let back = DenseTensor::fold(a.shape().clone(), s, &m).unwrap();
            prop_assert_eq!(&back, &a);
        }
    }

    #[test]
    fn tt_svd_at_full_rank_reconstructs(dims in dims_strategy(), seed in any::<u64>()) {
        let a = random_dense(&mut rng(seed), &dims);
        let tt = tt_svd(&a, &Truncation::exact()).unwrap();
        prop_assert!(relative_gap(&a, &tt.to_dense().unwrap()) < 1e-12);
        // ranks never exceed the unfolding ranks
        for (s, &r) in tt.ranks().iter().enumerate() {
            prop_assert!(r <= numerical_rank(&unfolding(&a, s + 1), 1e-10).max(1));
        }
    }

    #[test]
    fn tt_svd_recovers_planted_ranks(seed in any::<u64>(), r in 1usize..=3) {
        let tt = random_tt(&[3, 4, 4, 3], &[r.min(3), r, r.min(3)], seed).unwrap();
        let a = tt.to_dense().unwrap();
        let ranks = tt_rank_of_dense(&a, 1e-10).unwrap();
        for s in 1..4 {
            prop_assert_eq!(ranks[s - 1], numerical_rank(&unfolding(&a, s), 1e-10));
        }
        let b = tt_svd(&a, &Truncation::ranks(ranks.clone())).unwrap().to_dense().unwrap();
        prop_assert!(relative_gap(&a, &b) < 1e-10);
    }

    #[test]
    fn truncation_error_within_discarded_mass(dims in prop::collection::vec(2usize..=5, 3), seed in any::<u64>(), r in 1usize..=3) {
        let a = random_dense(&mut rng(seed), &dims);
        let b = tt_svd(&a, &Truncation::rank(r)).unwrap().to_dense().unwrap();
        let mut discarded = 0.0;
        for s in 1..dims.len() {
            discarded += sorted_singular_values(&unfolding(&a, s)).iter().skip(r).map(|x| x * x).sum::<f64>();
        }
        prop_assert!(a.frobenius_diff(&b).unwrap() <= discarded.sqrt() + 1e-10);
    }

    #[test]
    fn orthogonalize_keeps_tensor_and_gauge(seed in any::<u64>(), pivot in 0usize..4) {
        let tt = random_tt(&[3, 4, 4, 3], &[2, 3, 2], seed).unwrap();
        let a = tt.to_dense().unwrap();
        let o = orthogonalize(&tt, pivot).unwrap();
        prop_assert!(relative_gap(&a, &o.to_dense().unwrap()) < 1e-12);
        for (s, core) in o.cores().iter().enumerate() {
            if s < pivot {
                prop_assert!(left_orthogonality_defect(core) < 1e-12);
            } else if s > pivot {
                prop_assert!(right_orthogonality_defect(core) < 1e-12);
            }
        }
    }

    #[test]
    fn rounding_above_true_rank_is_lossless(seed in any::<u64>()) {
        let tt = random_tt(&[4, 4, 4], &[2, 2], seed).unwrap();
        let padded = tt.add(&tt.scaled(0.5)).unwrap();
        prop_assert_eq!(padded.ranks(), vec![4, 4]);
        let rounded = tt_round(&padded, 2).unwrap();
        prop_assert_eq!(rounded.ranks(), vec![2, 2]);
        let expect = tt.to_dense().unwrap().scaled(1.5);
        prop_assert!(relative_gap(&expect, &rounded.to_dense().unwrap()) < 1e-10);
    }
}

#[test]
fn entries_agree_with_dense_form() {
    let tt = random_tt(&[2, 3, 4], &[2, 3], 9).unwrap();
    let a = tt.to_dense().unwrap();
    for idx in odometer(&[2, 3, 4]) {
        let direct = tt.eval(&idx).unwrap();
        assert!((direct - a.get(&idx).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn tnsr_reader_accepts_scientific_notation_and_free_layout() {
    let text = "dims: 2 2\n1e0   -2.5E-1\n\n3.0e+2 4\n";
    let a = read_tnsr(text.as_bytes()).unwrap();
    assert_eq!(a.values(), &[1.0, -0.25, 300.0, 4.0]);
    assert!(read_tnsr("dims: 2 2\n1 2 3\n".as_bytes()).is_err());
    assert!(read_tnsr("dims 2 2\n1 2 3 4\n".as_bytes()).is_err());
}
