//! Sampled fallback for universes too large to enumerate.
//!
//! Observations are hashed into a small contingency table and tested with
//! Pearson's chi-square. A verdict here is statistical, never exact, and
//! loses power once the number of distinct observations per bucket grows.

use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const X_BUCKETS: usize = 16;
pub const Y_BUCKETS: usize = 64;
/// Dependence is flagged when the p-value falls below this.
pub const SIGNIFICANCE: f64 = 1e-6;

/// FNV-1a over the symbols; stable across runs and platforms.
pub fn bucket(symbols: &[u32], buckets: usize) -> usize {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for s in symbols {
        for b in s.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    (h % buckets as u64) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    cells: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
}

impl ChiSquareOutcome {
    pub fn flagged(&self) -> bool {
        self.p_value < SIGNIFICANCE
    }
}

impl Default for ContingencyTable {
    fn default() -> Self {
        ContingencyTable { cells: vec![0; X_BUCKETS * Y_BUCKETS] }
    }
}

impl ContingencyTable {
    pub fn record(&mut self, x: usize, y: usize) {
        self.cells[x * Y_BUCKETS + y] += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            *a += b;
        }
        self
    }

    pub fn test(&self) -> ChiSquareOutcome {
        let rows: Vec<u64> = (0..X_BUCKETS).map(|x| self.cells[x * Y_BUCKETS..(x + 1) * Y_BUCKETS].iter().sum()).collect();
        let cols: Vec<u64> = (0..Y_BUCKETS).map(|y| (0..X_BUCKETS).map(|x| self.cells[x * Y_BUCKETS + y]).sum()).collect();
        let total: u64 = rows.iter().sum();
        let live_rows = rows.iter().filter(|&&r| r > 0).count() as u64;
        let live_cols = cols.iter().filter(|&&c| c > 0).count() as u64;
        let df = live_rows.saturating_sub(1) * live_cols.saturating_sub(1);
        if df == 0 || total == 0 {
            return ChiSquareOutcome { statistic: 0.0, degrees_of_freedom: df, p_value: 1.0 };
        }
        let mut statistic = 0.0;
        for (x, &r) in rows.iter().enumerate() {
            for (y, &c) in cols.iter().enumerate() {
                if r == 0 || c == 0 {
                    continue;
                }
                let expected = r as f64 * c as f64 / total as f64;
                let diff = self.cells[x * Y_BUCKETS + y] as f64 - expected;
                statistic += diff * diff / expected;
            }
        }
        let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
        ChiSquareOutcome { statistic, degrees_of_freedom: df, p_value: dist.sf(statistic) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn independent_samples_are_not_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = ContingencyTable::default();
        for _ in 0..50_000 {
            t.record(rng.gen_range(0..X_BUCKETS), rng.gen_range(0..Y_BUCKETS));
        }
        let out = t.test();
        assert!(!out.flagged(), "{out:?}");
        assert_eq!(out.degrees_of_freedom, 15 * 63);
    }

    #[test]
    fn copied_samples_are_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = ContingencyTable::default();
        for _ in 0..5_000 {
            let x = rng.gen_range(0..X_BUCKETS);
            t.record(x, x);
        }
        assert!(t.test().flagged());
    }

    #[test]
    fn degenerate_tables_pass() {
        let mut t = ContingencyTable::default();
        t.record(0, 3);
        t.record(0, 5);
        assert_eq!(t.test().p_value, 1.0);
    }

    #[test]
    fn buckets_are_stable() {
        assert_eq!(bucket(&[1, 2, 3], 64), bucket(&[1, 2, 3], 64));
        assert!(bucket(&[7; 40], 16) < 16);
    }
}
