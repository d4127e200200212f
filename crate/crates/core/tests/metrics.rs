use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lingtransfer::analysis::macro_f1;
use lingtransfer::fewshot::sample_fewshot;

fn labelled() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (2usize..6).prop_flat_map(|c| {
        (1usize..60).prop_flat_map(move |n| {
            (Just(c), proptest::collection::vec(0..c, n), proptest::collection::vec(0..c, n))
        })
    })
}

proptest! {
    #[test]
    fn macro_f1_ignores_class_names((c, pred, gold) in labelled(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..c).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let rename = |v: &[usize]| v.iter().map(|&x| perm[x]).collect::<Vec<_>>();
        let a = macro_f1(&pred, &gold, c).unwrap();
        let b = macro_f1(&rename(&pred), &rename(&gold), c).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn macro_f1_ignores_instance_order((c, pred, gold) in labelled(), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..pred.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let p: Vec<usize> = order.iter().map(|&i| pred[i]).collect();
        let g: Vec<usize> = order.iter().map(|&i| gold[i]).collect();
        let a = macro_f1(&pred, &gold, c).unwrap();
        prop_assert!((a - macro_f1(&p, &g, c).unwrap()).abs() < 1e-9);
        prop_assert!((0.0..=100.0).contains(&a));
    }

    #[test]
    fn sampler_draws_only_from_the_pool(sizes in proptest::collection::vec(1usize..30, 1..5), k in 1usize..40, seed in any::<u64>()) {
        let items: Vec<(usize, usize)> = sizes.iter().enumerate().flat_map(|(c, &n)| (0..n).map(move |_| c)).enumerate().collect();
        let s = sample_fewshot(&items, |x| x.1, k, seed).unwrap();
        prop_assert_eq!(s.len(), sizes.iter().map(|&n| n.min(k)).sum::<usize>());
        prop_assert!(s.iter().all(|x| items.contains(x)));
    }
}

#[test]
fn empty_and_mismatched_inputs_are_errors() {
    assert!(macro_f1(&[], &[], 2).is_err());
    assert!(macro_f1(&[0, 1], &[0], 2).is_err());
}
