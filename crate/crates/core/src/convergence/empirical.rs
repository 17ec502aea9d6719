//! Weyl-type orbit averages `(1/n) Σ_{k<n} log|H(q^k)|` estimating `log r_c⁻¹`.

use serde::{Deserialize, Serialize};

use crate::line::QSpec;
use crate::series::{check_balancing, term_ratio_at, SeriesSpec};
use crate::sum::NeumaierSum;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTrace {
    /// `(m, average of the first m terms)` on a logarithmic grid ending at `n`.
    pub checkpoints: Vec<(u64, f64)>,
    pub value: f64,
    pub n: u64,
}

/// Checkpoints `10, 20, 50, 100, …` below `n`, then `n` itself.
pub fn log_checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 10u64;
    'outer: loop {
        for mult in [1, 2, 5] {
            let m = decade * mult;
            if m >= n {
                break 'outer;
            }
            out.push(m);
        }
        decade *= 10;
    }
    out.push(n);
    out
}

/// Average of `log|g(u_k, k)|` over the reduced orbit `u_k ≡ q^k (mod p^ℤ)`.
pub fn empirical_log_average<F>(g: F, qspec: &QSpec, n: u64) -> Result<EmpiricalTrace>
where
    F: Fn(C64, u64) -> Result<C64>,
{
    if n == 0 {
        return Err(Error::ConstraintViolation("need n >= 1".into()));
    }
    let marks = log_checkpoints(n);
    let mut next = 0;
    let mut acc = NeumaierSum::new();
    let mut checkpoints = Vec::with_capacity(marks.len());
    for k in 0..n {
        let v = match g(qspec.orbit_point(k), k) {
            Ok(v) => v,
            Err(Error::PoleHit { .. }) => return Err(Error::PoleProximity { k }),
            Err(e) => return Err(e),
        };
        let l = v.norm().ln();
        if !l.is_finite() {
            return Err(Error::PoleProximity { k });
        }
        acc.add(l);
        if k + 1 == marks[next] {
            checkpoints.push((k + 1, acc.value() / (k + 1) as f64));
            next += 1;
        }
    }
    let value = acc.value() / n as f64;
    Ok(EmpiricalTrace { checkpoints, value, n })
}

fn require_balanced(spec: &SeriesSpec, qspec: &QSpec) -> Result<()> {
    let bal = check_balancing(spec, 1e-10)?;
    if !bal.balanced {
        return Err(Error::Unbalanced(bal.deviation));
    }
    if !crate::rel_close(spec.q, qspec.q(), 1e-12) {
        return Err(Error::ConstraintViolation("series base differs from the line base".into()));
    }
    Ok(())
}

/// Orbit average of the term ratio of a balanced series. Balancing makes the
/// ratio `p`-periodic, so reduced orbit points may be used.
pub fn series_log_average(spec: &SeriesSpec, qspec: &QSpec, n: u64) -> Result<EmpiricalTrace> {
    require_balanced(spec, qspec)?;
    empirical_log_average(|u, k| term_ratio_at(spec, u, k as i64), qspec, n)
}

/// `(1/n) Σ log|H(q^k) sin(π(k+1)χ)|`; tends to `log r_c⁻¹ − log 2`.
pub fn sin_regularized_log_average(spec: &SeriesSpec, qspec: &QSpec, n: u64) -> Result<EmpiricalTrace> {
    require_balanced(spec, qspec)?;
    let pi = std::f64::consts::PI;
    empirical_log_average(
        |u, k| {
            let s = (pi * crate::frac((k + 1) as f64 * qspec.chi)).sin();
            Ok(term_ratio_at(spec, u, k as i64)? * s)
        },
        qspec,
        n,
    )
}
