//! Continued-fraction probe of `limsup log q_{k+1}/q_k = 0`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Deepest expansion accepted.
pub const MAX_DEPTH: usize = 60;

/// Convergents are kept while `q_k q_{k+1} ≤ 2^48`, so that they are also
/// convergents of the real number the double approximates.
const TRUST_LIMIT: f64 = 281_474_976_710_656.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlProbe {
    pub partial_quotients: Vec<u128>,
    pub denominators: Vec<u128>,
    /// `log q_{k+1} / q_k`.
    pub log_ratios: Vec<f64>,
    pub max_log_ratio: f64,
    /// The expansion of the double ended exactly (rational input).
    pub terminating: bool,
    /// Stopped early because further convergents are not reliable.
    pub precision_limited: bool,
    /// The last ratio exceeds every earlier one: at this depth the ratios are
    /// still growing.
    pub violates_proxy: bool,
    /// Always false: a finite expansion cannot decide a limsup.
    pub conclusive: bool,
}

/// Exact rational value `num/den` of a double in `[0, 1)`.
fn exact_fraction(x: f64) -> Result<(u128, u128)> {
    if x == 0.0 {
        return Ok((0, 1));
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
    let shift = 1075 - exp;
    if !(0..=126).contains(&shift) {
        return Err(Error::PrecisionExhausted);
    }
    let (mut num, mut den) = (mant as u128, 1u128 << shift);
    while num % 2 == 0 && den > 1 {
        num /= 2;
        den /= 2;
    }
    Ok((num, den))
}

pub fn hl_condition_probe(chi: f64, depth: usize) -> Result<HlProbe> {
    if depth > MAX_DEPTH || !chi.is_finite() {
        return Err(Error::PrecisionExhausted);
    }
    let a0 = chi.floor();
    let (mut num, mut den) = exact_fraction(chi - a0)?;
    let mut partial_quotients = vec![a0 as u128];
    let mut denominators = vec![1u128];
    let (mut q_prev, mut q) = (0u128, 1u128);
    let mut terminating = num == 0;
    let mut precision_limited = false;
    while !terminating && partial_quotients.len() <= depth {
        // next quotient of den/num
        let a = den / num;
        let rem = den % num;
        let q_next = a.saturating_mul(q).saturating_add(q_prev);
        if (q as f64) * (q_next as f64) > TRUST_LIMIT {
            precision_limited = true;
            break;
        }
        partial_quotients.push(a);
        denominators.push(q_next);
        (q_prev, q) = (q, q_next);
        (den, num) = (num, rem);
        terminating = num == 0;
    }
    let log_ratios: Vec<f64> = denominators.windows(2).map(|w| (w[1] as f64).ln() / w[0] as f64).collect();
    let max_log_ratio = log_ratios.iter().copied().fold(0.0, f64::max);
    let violates_proxy = !terminating
        && log_ratios.len() >= 3
        && log_ratios[..log_ratios.len() - 1].iter().all(|&r| r < log_ratios[log_ratios.len() - 1]);
    Ok(HlProbe {
        partial_quotients,
        denominators,
        log_ratios,
        max_log_ratio,
        terminating,
        precision_limited,
        violates_proxy,
        conclusive: false,
    })
}
