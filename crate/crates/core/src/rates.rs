//! Exact rate formulas and rate measurement.
//!
//! The formulas are generic over the integer type backing [`Ratio`]; the
//! crate-level [`Rational`](crate::Rational) uses big integers so that
//! geometric sums over many files never overflow. Rates are ratios of symbol
//! counts: every symbol lives in the same field, so the `log q` factors of
//! the entropies cancel.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::Transcript;
use crate::Rational;

fn check_code(n: u32, m: u32) -> Result<()> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParams(format!("need 1 <= M < N, got N = {n}, M = {m}")));
    }
    Ok(())
}

fn ratio<I: Integer + Clone + From<u32>>(num: u32, den: u32) -> Ratio<I> {
    Ratio::new(I::from(num), I::from(den))
}

/// Minimum shared randomness per file symbol, `M / (N - M)`.
pub fn secrecy_floor<I: Integer + Clone + From<u32>>(n: u32, m: u32) -> Result<Ratio<I>> {
    check_code(n, m)?;
    Ok(ratio(m, n - m))
}

/// `1 - M/N` when `secrecy >= M/(N - M)`, otherwise 0.
pub fn spir_capacity<I: Integer + Clone + From<u32>>(n: u32, m: u32, secrecy: &Ratio<I>) -> Result<Ratio<I>> {
    let floor = secrecy_floor::<I>(n, m)?;
    if *secrecy >= floor {
        Ok(ratio(n - m, n))
    } else {
        Ok(Ratio::zero())
    }
}

/// `(1 + M/N + ... + (M/N)^(K-1))^-1`, the capacity without database privacy.
pub fn pir_capacity_mds<I: Integer + Clone + From<u32>>(n: u32, m: u32, k: u32) -> Result<Ratio<I>> {
    check_code(n, m)?;
    if k == 0 {
        return Err(Error::InvalidParams("K must be at least 1".into()));
    }
    let step: Ratio<I> = ratio(m, n);
    let mut term = Ratio::<I>::one();
    let mut sum = Ratio::<I>::zero();
    for _ in 0..k {
        sum = sum + term.clone();
        term = term * step.clone();
    }
    Ok(sum.recip())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateReport {
    #[serde(with = "crate::harness::rational_json")]
    pub achieved_rate: Rational,
    #[serde(with = "crate::harness::rational_json")]
    pub capacity: Rational,
    #[serde(with = "crate::harness::rational_json")]
    pub achieved_secrecy: Rational,
    #[serde(with = "crate::harness::rational_json")]
    pub secrecy_floor: Rational,
    pub at_capacity: bool,
}

/// Compare what a transcript achieved against the capacity formulas.
pub fn measure(transcript: &Transcript) -> Result<RateReport> {
    let p = &transcript.params;
    let (n, m) = (to_u32(p.n)?, to_u32(p.m)?);
    let file_len = to_u32(p.file_len())?;
    if transcript.download_count == 0 {
        return Err(Error::InvalidParams("transcript records no downloads".into()));
    }
    let achieved_rate: Rational = ratio(file_len, to_u32(transcript.download_count)?);
    let achieved_secrecy: Rational = ratio(to_u32(transcript.randomness_count)?, file_len);
    let capacity = spir_capacity(n, m, &achieved_secrecy)?;
    let floor = secrecy_floor(n, m)?;
    let at_capacity = achieved_rate == capacity && achieved_secrecy >= floor;
    Ok(RateReport { achieved_rate, capacity, achieved_secrecy, secrecy_floor: floor, at_capacity })
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidParams(format!("{v} does not fit in 32 bits")))
}
