//! Average precision against a definitional brute-force oracle.

mod common;

use boa_core::eval::{average_precision, avg_map, mean};
use common::{ap_oracle, random_instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_examples() {
    assert!((ap_oracle(&[true, false, true], 2) - 0.8333333333333334).abs() < 1e-15);
    assert_eq!(ap_oracle(&[true, true, false], 2), 1.0);
    assert!((ap_oracle(&[false, false, true], 1) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(20160401);
    for _ in 0..5000 {
        let (flags, relevant) = random_instance(&mut rng);
        let got = average_precision(&flags, relevant).unwrap();
        assert!((got - ap_oracle(&flags, relevant)).abs() <= 1e-12, "{flags:?} R={relevant}");
    }
}

fn flags_strategy() -> impl Strategy<Value = (Vec<bool>, usize)> {
    prop::collection::vec(any::<bool>(), 1..12).prop_flat_map(|flags| {
        let hits = flags.iter().filter(|&&f| f).count();
        (Just(flags), hits.max(1)..hits + 4)
    })
}

proptest! {
    #[test]
    fn ap_bounded((flags, r) in flags_strategy()) {
        let ap = average_precision(&flags, r).unwrap();
        prop_assert!((0.0..=1.0).contains(&ap));
    }

    #[test]
    fn ap_is_one_iff_positives_lead((flags, r) in flags_strategy()) {
        let ap = average_precision(&flags, r).unwrap();
        let leading = flags.iter().take_while(|&&f| f).count();
        let total = flags.iter().filter(|&&f| f).count();
        let perfect = leading == r && total == r;
        prop_assert_eq!(ap == 1.0, perfect);
    }

    #[test]
    fn trailing_negatives_do_not_matter((flags, r) in flags_strategy(), extra in 0usize..5) {
        let mut longer = flags.clone();
        longer.extend(std::iter::repeat_n(false, extra));
        prop_assert_eq!(average_precision(&flags, r).unwrap(), average_precision(&longer, r).unwrap());
    }

    #[test]
    fn means_are_bounded(values in prop::collection::vec(0.0f64..1.0, 1..20)) {
        let m = avg_map(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::MAX, f64::min);
        let hi = values.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!(lo - 1e-15 <= m && m <= hi + 1e-15);
        prop_assert_eq!(m, mean(&values).unwrap());
    }
}
