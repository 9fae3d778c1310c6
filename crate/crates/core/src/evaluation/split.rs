use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    /// Ascending dataset indices.
    pub train: Vec<usize>,
    /// Ascending dataset indices.
    pub test: Vec<usize>,
}

/// Per-group test counts: proportional quotas `n_i n_test / n` rounded by
/// largest remainder, then topped up so every group has at least one test
/// member. A top-up is taken from the group furthest above its quota among
/// those that can spare one.
pub fn allocate_test_counts(sizes: &[usize], n_test: usize) -> Result<Vec<usize>> {
    let g = sizes.len();
    let n: usize = sizes.iter().sum();
    if let Some(i) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidCv(format!("group {i} is empty")));
    }
    if n_test < g {
        return Err(Error::TestTooSmall { n_test, groups: g });
    }
    if n_test >= n {
        return Err(Error::InvalidCv(format!(
            "test size {n_test} leaves no training data out of {n}"
        )));
    }
    let quotas: Vec<f64> = sizes
        .iter()
        .map(|&s| s as f64 * n_test as f64 / n as f64)
        .collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..g).collect();
    let frac = |i: usize| quotas[i] - quotas[i].floor();
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    let assigned: usize = alloc.iter().sum();
    for &i in order.iter().take(n_test - assigned) {
        alloc[i] += 1;
    }
    while let Some(needy) = alloc.iter().position(|&a| a == 0) {
        let donor = (0..g)
            .filter(|&i| alloc[i] >= 2)
            .max_by(|&a, &b| {
                let sa = alloc[a] as f64 - quotas[a];
                let sb = alloc[b] as f64 - quotas[b];
                sa.total_cmp(&sb).then(b.cmp(&a))
            })
            .ok_or(Error::TestTooSmall { n_test, groups: g })?;
        alloc[donor] -= 1;
        alloc[needy] += 1;
    }
    Ok(alloc)
}

/// Stratified random train/test split; members of each group are drawn
/// uniformly without replacement.
pub fn stratified_split<R: Rng + ?Sized>(
    labels: &[usize],
    n_groups: usize,
    n_test: usize,
    rng: &mut R,
) -> Result<Split> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_groups {
            return Err(Error::LabelOutOfRange {
                label: l,
                groups: n_groups,
            });
        }
        members[l].push(i);
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let alloc = allocate_test_counts(&sizes, n_test)?;
    let mut in_test = vec![false; labels.len()];
    for (group, &count) in members.iter().zip(&alloc) {
        for pick in sample(rng, group.len(), count) {
            in_test[group[pick]] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| in_test[i]);
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn glass_allocation() {
        // raw quotas 9.81, 10.65, 2.38, 1.82, 1.26, 4.07
        let alloc = allocate_test_counts(&[70, 76, 17, 13, 9, 29], 30).unwrap();
        assert_eq!(alloc, vec![10, 11, 2, 2, 1, 4]);
    }

    #[test]
    fn every_group_gets_one() {
        let alloc = allocate_test_counts(&[100, 1, 1, 1], 4).unwrap();
        assert_eq!(alloc, vec![1, 1, 1, 1]);
        let alloc = allocate_test_counts(&[50, 50, 2], 5).unwrap();
        assert_eq!(alloc.iter().sum::<usize>(), 5);
        assert!(alloc.iter().all(|&a| a >= 1));
    }

    #[test]
    fn allocation_errors() {
        assert_eq!(
            allocate_test_counts(&[5, 5, 5], 2),
            Err(Error::TestTooSmall {
                n_test: 2,
                groups: 3
            })
        );
        assert!(matches!(
            allocate_test_counts(&[5, 5], 10),
            Err(Error::InvalidCv(_))
        ));
        assert!(matches!(
            allocate_test_counts(&[5, 0], 2),
            Err(Error::InvalidCv(_))
        ));
    }

    #[test]
    fn two_equal_groups() {
        let labels = [0, 0, 0, 1, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = stratified_split(&labels, 2, 2, &mut rng).unwrap();
        assert_eq!(s.test.len(), 2);
        assert_eq!(labels[s.test[0]], 0);
        assert_eq!(labels[s.test[1]], 1);
        assert_eq!(s.train.len(), 4);
    }

    #[test]
    fn seeded_determinism() {
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let a = stratified_split(&labels, 3, 12, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = stratified_split(&labels, 3, 12, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let c = stratified_split(&labels, 3, 12, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..60).collect::<Vec<_>>());
    }
}
