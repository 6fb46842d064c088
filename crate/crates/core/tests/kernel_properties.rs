use boa_core::kernel::*;
use proptest::prelude::*;

fn frames_strategy(max_dim: usize, max_frames: usize) -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1..=max_dim).prop_flat_map(move |dim| {
        (
            Just(dim),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, dim), 1..=max_frames),
        )
    })
}

fn matrix(rows: &[Vec<f64>]) -> FrameAttributeMatrix {
    FrameAttributeMatrix::from_rows(rows).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pooling_is_permutation_invariant(
        (_, rows) in frames_strategy(40, 12),
        seed in any::<u64>(),
    ) {
        let mut shuffled = rows.clone();
        // deterministic Fisher-Yates from the seed
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        for &mode in PoolingMode::ALL {
            let a = pool(&matrix(&rows), mode).unwrap();
            let b = pool(&matrix(&shuffled), mode).unwrap();
            if mode == PoolingMode::Max {
                prop_assert_eq!(a.values(), b.values());
            } else {
                prop_assert!(close(a.values(), b.values(), 1e-12));
            }
        }
    }

    #[test]
    fn max_pool_dominates_and_is_attained((dim, rows) in frames_strategy(60, 10)) {
        let pooled = pool(&matrix(&rows), PoolingMode::Max).unwrap();
        for j in 0..dim {
            prop_assert!(rows.iter().all(|r| r[j] <= pooled.values()[j]));
            prop_assert!(rows.iter().any(|r| r[j] == pooled.values()[j]));
        }
    }

    #[test]
    fn max_pool_ignores_duplicates((_, rows) in frames_strategy(30, 8), mask in any::<u16>()) {
        let mut dup = rows.clone();
        for (i, r) in rows.iter().enumerate() {
            if mask & (1 << (i % 16)) != 0 {
                dup.push(r.clone());
            }
        }
        let once = pool(&matrix(&rows), PoolingMode::Max).unwrap();
        let twice = pool(&matrix(&dup), PoolingMode::Max).unwrap();
        prop_assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn sum_pool_is_additive(
        (dim, a) in frames_strategy(30, 6),
        extra in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 30), 1..6),
    ) {
        let b: Vec<Vec<f64>> = extra.into_iter().map(|r| r[..dim].to_vec()).collect();
        let union: Vec<Vec<f64>> = a.iter().chain(&b).cloned().collect();
        let sa = pool(&matrix(&a), PoolingMode::Sum).unwrap();
        let sb = pool(&matrix(&b), PoolingMode::Sum).unwrap();
        let su = pool(&matrix(&union), PoolingMode::Sum).unwrap();
        let sum: Vec<f64> = sa.values().iter().zip(sb.values()).map(|(x, y)| x + y).collect();
        prop_assert!(close(su.values(), &sum, 1e-12));
    }

    #[test]
    fn avg_is_sum_over_count((_, rows) in frames_strategy(50, 15)) {
        let m = matrix(&rows);
        let avg = pool(&m, PoolingMode::Avg).unwrap();
        let sum = pool(&m, PoolingMode::Sum).unwrap();
        for (a, s) in avg.values().iter().zip(sum.values()) {
            prop_assert!((a - s / rows.len() as f64).abs() <= 1e-12);
        }
    }

    #[test]
    fn hard_coding_one_hot(scores in prop::collection::vec(0.0f64..1.0, 1..200), scale in 1e-3f64..1e3) {
        let v = AttributeVector::new(scores.clone()).unwrap();
        let hard = code_frame(&v, CodingMode::Hard).unwrap();
        let ones: Vec<usize> = hard.values().iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, _)| i).collect();
        prop_assert_eq!(ones.len(), 1);
        prop_assert_eq!(hard.values()[ones[0]], 1.0);
        // lowest index attaining the maximum
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(ones[0], scores.iter().position(|&s| s == max).unwrap());

        let scaled = AttributeVector::new(scores.iter().map(|s| s * scale).collect()).unwrap();
        let hard_scaled = code_frame(&scaled, CodingMode::Hard).unwrap();
        prop_assert_eq!(hard_scaled.values(), hard.values());
    }

    #[test]
    fn soft_coding_identity(scores in prop::collection::vec(0.0f64..10.0, 1..100)) {
        let v = AttributeVector::new(scores.clone()).unwrap();
        let soft = code_frame(&v, CodingMode::Soft).unwrap();
        prop_assert_eq!(soft.values(), scores.as_slice());
    }

    #[test]
    fn l2_is_a_metric(
        (a, b, c) in (1usize..64).prop_flat_map(|d| (
            prop::collection::vec(0.0f64..5.0, d),
            prop::collection::vec(0.0f64..5.0, d),
            prop::collection::vec(0.0f64..5.0, d),
        ))
    ) {
        let p = Provenance::default();
        let (a, b, c) = (
            BoaVector::new(a, p).unwrap(),
            BoaVector::new(b, p).unwrap(),
            BoaVector::new(c, p).unwrap(),
        );
        let ab = l2_distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, l2_distance(&b, &a).unwrap());
        prop_assert_eq!(l2_distance(&a, &a).unwrap(), 0.0);
        let ac = l2_distance(&a, &c).unwrap();
        let cb = l2_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9);
    }

    #[test]
    fn l2_normalization_gives_unit_norm(values in prop::collection::vec(0.0f64..100.0, 1..300)) {
        let v = BoaVector::new(values, Provenance::default()).unwrap();
        let n = normalize(&v, NormMode::L2);
        let norm: f64 = n.values().iter().map(|x| x * x).sum::<f64>().sqrt();
        if v.values().iter().any(|&x| x > 0.0) {
            prop_assert!((norm - 1.0).abs() <= 1e-9);
        } else {
            prop_assert_eq!(norm, 0.0);
        }
        prop_assert!(n.values().iter().all(|x| x.is_finite() && *x >= 0.0));
    }
}
