use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::Instance;

/// Requests in ascending `l_i + e_{i+n}`, ties by request index. Fixed for a
/// whole run; burn bands index into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedList(Vec<usize>);

impl SortedList {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Request at 1-based list position `pos`.
    pub fn at(&self, pos: usize) -> usize {
        self.0[pos - 1]
    }

    pub fn keys(&self, inst: &Instance) -> Vec<f64> {
        self.0.iter().map(|&r| inst.request(r).sort_key).collect()
    }
}

/// A fresh uniform permutation of the requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomList(Vec<usize>);

impl RandomList {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Sorts requests of a window-adjusted instance by their sort key.
pub fn build_sorted_list(inst: &Instance) -> SortedList {
    let mut order: Vec<_> = inst.requests().collect();
    order.sort_by(|a, b| {
        a.sort_key
            .total_cmp(&b.sort_key)
            .then(a.index.cmp(&b.index))
    });
    SortedList(order.into_iter().map(|r| r.index).collect())
}

pub fn build_random_list<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RandomList {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    RandomList(order)
}
