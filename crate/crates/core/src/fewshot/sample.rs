use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FewShotError;

/// Up to `k` items per class, without replacement.
///
/// Each class (in label order) is shuffled with one seeded stream and its
/// first `min(k, |class|)` items kept, so a larger `k` with the same seed
/// always yields a superset.
pub fn sample_fewshot<T: Clone, L: Ord>(
    items: &[T],
    label_of: impl Fn(&T) -> L,
    k: usize,
    seed: u64,
) -> Result<Vec<T>, FewShotError> {
    if items.is_empty() {
        return Err(FewShotError::EmptyTrainingSet);
    }
    if k == 0 {
        return Err(FewShotError::Invalid("K must be at least 1".into()));
    }
    let mut by_class: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        by_class.entry(label_of(item)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for idx in by_class.values_mut() {
        idx.shuffle(&mut rng);
        out.extend(idx.iter().take(k).map(|&i| items[i].clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool() -> Vec<(usize, &'static str)> {
        let mut v = Vec::new();
        for i in 0..3 {
            v.push((i, "a"));
        }
        for i in 3..20 {
            v.push((i, "b"));
        }
        v
    }

    #[test]
    fn small_class_taken_whole() {
        let s = sample_fewshot(&pool(), |x| x.1, 5, 1).unwrap();
        assert_eq!(s.iter().filter(|x| x.1 == "a").count(), 3);
        assert_eq!(s.iter().filter(|x| x.1 == "b").count(), 5);
    }

    #[test]
    fn deterministic_and_monotone() {
        let a = sample_fewshot(&pool(), |x| x.1, 4, 9).unwrap();
        assert_eq!(a, sample_fewshot(&pool(), |x| x.1, 4, 9).unwrap());
        let b = sample_fewshot(&pool(), |x| x.1, 10, 9).unwrap();
        assert!(a.iter().all(|x| b.contains(x)));
    }

    #[test]
    fn empty_is_an_error() {
        let empty: Vec<(usize, &str)> = vec![];
        assert!(matches!(sample_fewshot(&empty, |x| x.1, 1, 0), Err(FewShotError::EmptyTrainingSet)));
    }
}
