use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Packs a fixed-length tuple of small digits into one `u128`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyCodec {
    radices: Vec<u32>,
}

impl KeyCodec {
    pub fn new(radices: Vec<u32>) -> Result<Self> {
        let mut space: u128 = 1;
        for &r in &radices {
            if r == 0 {
                return Err(Error::InvalidParams("zero radix".into()));
            }
            space = space.checked_mul(u128::from(r)).ok_or_else(|| {
                Error::InvalidParams(format!("a {}-symbol observation does not fit a 128-bit key", radices.len()))
            })?;
        }
        Ok(KeyCodec { radices })
    }

    pub fn uniform(radix: u32, len: usize) -> Result<Self> {
        Self::new(vec![radix; len])
    }

    pub fn len(&self) -> usize {
        self.radices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radices.is_empty()
    }

    pub fn encode(&self, digits: &[u32]) -> u128 {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits.iter().zip(&self.radices).fold(0u128, |acc, (&d, &r)| {
            debug_assert!(d < r);
            acc * u128::from(r) + u128::from(d)
        })
    }

    pub fn decode(&self, mut key: u128) -> Vec<u32> {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = (key % u128::from(r)) as u32;
            key /= u128::from(r);
        }
        out
    }
}

/// Joint and marginal counts of a pair of discrete observations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DistributionCounter {
    joint: HashMap<(u128, u128), u64>,
    left: HashMap<u128, u64>,
    right: HashMap<u128, u64>,
    total: u64,
}

/// Outcome of the product-rule test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// A cell where `total * joint != left * right`.
    Violated { x: u128, y: u128, joint: u64, left: u64, right: u64 },
}

impl DistributionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, x: u128, y: u128) {
        *self.joint.entry((x, y)).or_default() += 1;
        *self.left.entry(x).or_default() += 1;
        *self.right.entry(y).or_default() += 1;
        self.total += 1;
    }

    /// Combine counts from a disjoint part of the universe.
    pub fn merge(mut self, other: Self) -> Self {
        // Fold the smaller table into the larger one.
        let (mut big, small) = if self.joint.len() >= other.joint.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, self)
        };
        for (k, v) in small.joint {
            *big.joint.entry(k).or_default() += v;
        }
        for (k, v) in small.left {
            *big.left.entry(k).or_default() += v;
        }
        for (k, v) in small.right {
            *big.right.entry(k).or_default() += v;
        }
        big.total += small.total;
        big
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn joint(&self, x: u128, y: u128) -> u64 {
        self.joint.get(&(x, y)).copied().unwrap_or(0)
    }

    pub fn left(&self, x: u128) -> u64 {
        self.left.get(&x).copied().unwrap_or(0)
    }

    pub fn right(&self, y: u128) -> u64 {
        self.right.get(&y).copied().unwrap_or(0)
    }

    pub fn left_support(&self) -> BTreeSet<u128> {
        self.left.keys().copied().collect()
    }

    /// Decide independence exactly: `total * joint(x, y) = left(x) * right(y)`
    /// for every `(x, y)` in the product of the supports. The reported
    /// witness is the smallest violating cell in `(x, y)` order.
    pub fn independence(&self) -> Independence {
        let total = u128::from(self.total);
        let mut worst: Option<(u128, u128)> = None;
        for (&(x, y), &j) in &self.joint {
            if total * u128::from(j) != u128::from(self.left[&x]) * u128::from(self.right[&y])
                && worst.is_none_or(|w| (x, y) < w)
            {
                worst = Some((x, y));
            }
        }
        // Any empty cell inside the product of supports breaks the rule too.
        if self.joint.len() != self.left.len() * self.right.len() {
            let xs: BTreeSet<u128> = self.left.keys().copied().collect();
            let ys: BTreeSet<u128> = self.right.keys().copied().collect();
            'outer: for &x in &xs {
                if worst.is_some_and(|w| w.0 < x) {
                    break;
                }
                for &y in &ys {
                    if !self.joint.contains_key(&(x, y)) {
                        if worst.is_none_or(|w| (x, y) < w) {
                            worst = Some((x, y));
                        }
                        break 'outer;
                    }
                }
            }
        }
        match worst {
            None => Independence::Independent,
            Some((x, y)) => Independence::Violated {
                x,
                y,
                joint: self.joint(x, y),
                left: self.left(x),
                right: self.right(y),
            },
        }
    }

    /// With `x` taking values that index equally likely conditions, check
    /// that the count table of `y` is identical under every condition.
    /// Returns the first mismatch as `(y, x_a, count_a, x_b, count_b)`.
    pub fn conditional_mismatch(&self) -> Option<(u128, u128, u64, u128, u64)> {
        let xs: Vec<u128> = self.left_support().into_iter().collect();
        let (&first, rest) = xs.split_first()?;
        let ys: BTreeSet<u128> = self.right.keys().copied().collect();
        for &y in &ys {
            let base = self.joint(first, y);
            for &x in rest {
                let c = self.joint(x, y);
                if c != base {
                    return Some((y, first, base, x, c));
                }
            }
        }
        None
    }
}

/// Evidence that a privacy property fails, decoded into symbol tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `total * joint != left * right` at cell `(x, y)`.
    ProductRule { x: Vec<u32>, y: Vec<u32>, joint: u64, left: u64, right: u64, total: u64 },
    /// The count of `y` differs between two requested-file indices.
    ConditionalMismatch { y: Vec<u32>, theta_a: u32, count_a: u64, theta_b: u32, count_b: u64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn codec_round_trip_mixed_radix() {
        let c = KeyCodec::new(vec![3, 2, 5]).unwrap();
        for a in 0..3 {
            for b in 0..2 {
                for d in 0..5 {
                    assert_eq!(c.decode(c.encode(&[a, b, d])), vec![a, b, d]);
                }
            }
        }
        assert!(KeyCodec::uniform(2, 128).is_err());
        assert!(KeyCodec::uniform(2, 127).is_ok());
    }

    #[test]
    fn product_distribution_is_independent() {
        let mut c = DistributionCounter::new();
        for x in 0..3 {
            for y in 0..4 {
                for _ in 0..(y + 1) {
                    c.record(x, y);
                }
            }
        }
        assert_eq!(c.independence(), Independence::Independent);
        assert_eq!(c.conditional_mismatch(), None);
    }

    #[test]
    fn copy_is_dependent() {
        let mut c = DistributionCounter::new();
        for v in 0..2 {
            c.record(v, v);
        }
        // Missing cell (0, 1) has joint 0 but positive marginals; (0, 0) is
        // itself a violating cell and the smaller one.
        assert_eq!(
            c.independence(),
            Independence::Violated { x: 0, y: 0, joint: 1, left: 1, right: 1 }
        );
        assert_eq!(c.conditional_mismatch(), Some((0, 0, 1, 1, 0)));
    }

    #[test]
    fn support_with_a_hole_is_dependent() {
        let mut c = DistributionCounter::new();
        c.record(0, 0);
        c.record(0, 1);
        c.record(1, 0);
        assert!(matches!(c.independence(), Independence::Violated { .. }));
    }

    proptest! {
        #[test]
        fn merging_partitions_matches_single_pass(pairs in prop::collection::vec((0u128..4, 0u128..6), 1..200), split in 0usize..200) {
            let split = split.min(pairs.len());
            let mut whole = DistributionCounter::new();
            let mut a = DistributionCounter::new();
            let mut b = DistributionCounter::new();
            for (i, &(x, y)) in pairs.iter().enumerate() {
                whole.record(x, y);
                if i < split { a.record(x, y) } else { b.record(x, y) }
            }
            let merged = a.merge(b);
            prop_assert_eq!(&merged, &whole);
            prop_assert_eq!(merged.independence(), whole.independence());
        }
    }
}
