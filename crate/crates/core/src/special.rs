//! Explicit convergence domains of `₀E₀` and `₁E₀` for `|q| ≠ 1`, built on
//! lower bounds of `|θ(qⁿ;p)|`.
//!
//! The infimum constants are replaced by minima over `n ≤ scan_depth`; they
//! are finite-depth proxies, not certified constants.

use serde::{Deserialize, Serialize};

use crate::theta::{ln_abs_theta_from_log, qpochhammer_inf};
use crate::{frac, Error, Result, C64, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rationality {
    /// `α = a/b` in lowest terms.
    Rational { a: i64, b: i64 },
    Irrational,
}

/// `α = log|q|/log|p|`, `N_n = ⌊nα⌋` and `{nα}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaDecomposition {
    pub alpha: f64,
    pub n_n: i64,
    pub frac: f64,
    pub rationality: Rationality,
}

impl AlphaDecomposition {
    pub fn new(q: C64, p: C64, n: u64, rationality: Rationality) -> Result<Self> {
        check_pair(q, p)?;
        let alpha = q.norm().ln() / p.norm().ln();
        let x = n as f64 * alpha;
        let n_n = x.floor() as i64;
        Ok(Self { alpha, n_n, frac: frac(x), rationality })
    }
}

fn check_pair(q: C64, p: C64) -> Result<()> {
    let (mq, mp) = (q.norm(), p.norm());
    if !(mp < 1.0) {
        return Err(Error::DivergedModulus(mp));
    }
    if mq == 0.0 || mp == 0.0 {
        return Err(Error::ZeroArgument);
    }
    Ok(())
}

fn ln_pp_abs_sq(p: C64) -> Result<f64> {
    let a = C64::new(p.norm(), 0.0);
    Ok(2.0 * qpochhammer_inf(a, a)?.re.ln())
}

/// `ln` of `|p|^{−binom(N_n,2)} (1−|p|^{{nα}})(1−|p|^{1−{nα}}) (|p|;|p|)²_∞`,
/// a lower bound for `ln|θ(qⁿ;p)|` when `0 < |q| < 1`.
pub fn ln_theta_qn_lower_bound(q: C64, p: C64, n: u64) -> Result<f64> {
    check_pair(q, p)?;
    if !(q.norm() < 1.0) {
        return Err(Error::ConstraintViolation("need 0 < |q| < 1".into()));
    }
    let dec = AlphaDecomposition::new(q, p, n, Rationality::Irrational)?;
    let lp = p.ln();
    // qⁿ p^{−N_n} on the unit circle (after the modulus shift) means θ(qⁿ) = 0
    let mut v = n as f64 * q.ln() - dec.n_n as f64 * lp;
    v.im -= TWO_PI * (v.im / TWO_PI).round();
    if v.norm() < 1e-12 || (v - lp).norm() < 1e-12 {
        return Err(Error::LatticeDegenerate);
    }
    let rho = p.norm().ln();
    let nn = dec.n_n as f64;
    let f = dec.frac;
    Ok(-0.5 * nn * (nn - 1.0) * rho
        + (1.0 - (f * rho).exp()).ln()
        + (1.0 - ((1.0 - f) * rho).exp()).ln()
        + ln_pp_abs_sq(p)?)
}

/// The bound itself; may over- or underflow for large `n`, see
/// [`ln_theta_qn_lower_bound`].
pub fn theta_qn_lower_bound(q: C64, p: C64, n: u64) -> Result<f64> {
    Ok(ln_theta_qn_lower_bound(q, p, n)?.exp())
}

/// `ln|θ(qⁿ;p)|` evaluated directly.
pub fn ln_abs_theta_qn(q: C64, p: C64, n: u64) -> Result<f64> {
    ln_abs_theta_from_log(n as f64 * q.ln(), p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZBound {
    /// Series converges for `|z| <` this value.
    pub bound: f64,
    /// Finite-depth proxy for the infimum constant `C`.
    pub c_proxy: f64,
    pub scan_depth: usize,
    pub rationality: Rationality,
    /// Sampled supremum `S` (already inflated); `None` for `₀E₀`.
    pub theta_sup: Option<f64>,
}

/// Inflation applied to the grid maximum of `|θ|`.
pub const SUP_INFLATION: f64 = 1.5;
const SUP_GRID: usize = 512;

fn normalize_q(q: C64) -> Result<C64> {
    let m = q.norm();
    if (m - 1.0).abs() < 1e-14 {
        return Err(Error::ConstraintViolation("|q| = 1 is not covered".into()));
    }
    // θ(q⁻ⁿ) = −q⁻ⁿ θ(qⁿ) shows the |q| > 1 series converges at least as well
    Ok(if m > 1.0 { q.inv() } else { q })
}

/// `σ ∈ [0, 1)` with `q^b p^{−a} = e^{2πiσ}`.
fn sigma(q: C64, p: C64, a: i64, b: i64) -> Result<f64> {
    let alpha = q.norm().ln() / p.norm().ln();
    if b <= 0 || crate::line::gcd(a, b) != 1 || (alpha - a as f64 / b as f64).abs() > 1e-12 * alpha.abs().max(1.0) {
        return Err(Error::ConstraintViolation("rationality a/b does not match log|q|/log|p|".into()));
    }
    let l = b as f64 * q.ln() - a as f64 * p.ln();
    Ok(frac(l.im / TWO_PI))
}

fn min_frac_pm(x: f64) -> f64 {
    let f = frac(x);
    f.min(1.0 - f)
}

fn check_sigma(sig: f64, depth: usize) -> Result<()> {
    for k in 1..=depth {
        if min_frac_pm(k as f64 * sig) < 1e-12 {
            return Err(Error::UndefinedSeries);
        }
    }
    Ok(())
}

fn positive(c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 1e-300) {
        return Err(Error::NonPositiveInfimumProxy);
    }
    Ok(c)
}

/// Radius bound for `₀E₀ = Σ zⁿ/θ(q;p;q)_n`. `rationality` describes
/// `α = log|q|/log|p|` after mapping `|q| > 1` to `1/q`.
pub fn z_bound_0e0(q: C64, p: C64, rationality: Rationality, scan_depth: usize) -> Result<ZBound> {
    check_pair(q, p)?;
    let q = normalize_q(q)?;
    let pm = p.norm();
    let rho = pm.ln();
    let pp2 = ln_pp_abs_sq(p)?.exp();
    let (bound, c_proxy) = match rationality {
        Rationality::Rational { a, b } => {
            let sig = sigma(q, p, a, b)?;
            check_sigma(sig, scan_depth)?;
            let c = (1..=scan_depth)
                .map(|k| {
                    let ka = (k as i64 * a) as f64;
                    (-0.5 * ka * (ka - 1.0) * rho + min_frac_pm(k as f64 * sig).ln()).exp()
                })
                .fold(f64::INFINITY, f64::min);
            let c = positive(c)?;
            let gap = (1.0 - pm.powf(1.0 / b as f64)).powi(2);
            (c.min(gap) * pp2, c)
        }
        Rationality::Irrational => {
            let alpha = q.norm().ln() / rho;
            let c = (1..=scan_depth)
                .map(|n| {
                    let x = n as f64 * alpha;
                    let f = frac(x);
                    (-0.5 * (x - 1.0) * (x - 2.0) * rho).exp() * f * (1.0 - f)
                })
                .fold(f64::INFINITY, f64::min);
            let c = positive(c)?;
            (c * pm * rho * rho * pp2, c)
        }
    };
    Ok(ZBound { bound, c_proxy, scan_depth, rationality, theta_sup: None })
}

/// `1.5 · max |θ(x v;p)|` over a 512×512 grid of the annulus `|p| ≤ |v| ≤ 1`.
pub fn theta_annulus_sup(x: C64, p: C64) -> Result<f64> {
    let rho = p.norm().ln();
    let mut best = 0.0_f64;
    for i in 0..SUP_GRID {
        let s = i as f64 / (SUP_GRID - 1) as f64;
        for j in 0..SUP_GRID {
            let phi = TWO_PI * j as f64 / SUP_GRID as f64;
            let lv = C64::new(s * rho, phi) + x.ln();
            best = best.max(ln_abs_theta_from_log(lv, p)?.exp());
        }
    }
    Ok(SUP_INFLATION * best)
}

/// Radius bound for `₁E₀ = Σ θ(t₀;p;q)_n/θ(q;p;q)_n zⁿ`.
pub fn z_bound_1e0(t0: C64, q: C64, p: C64, rationality: Rationality, scan_depth: usize) -> Result<ZBound> {
    check_pair(q, p)?;
    if t0.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    if q.norm() > 1.0 {
        return Err(Error::ConstraintViolation("z_bound_1e0 needs |q| < 1".into()));
    }
    let q = normalize_q(q)?;
    let pm = p.norm();
    let rho = pm.ln();
    let pp2 = ln_pp_abs_sq(p)?.exp();
    let s = theta_annulus_sup(t0 / q, p)?;
    let ratio = (q / t0).norm();
    let (bound, c_proxy) = match rationality {
        Rationality::Rational { a, b } => {
            if ratio > 1.0 {
                return Err(Error::ConstraintViolation("rational case needs |q/t0| <= 1".into()));
            }
            let sig = sigma(q, p, a, b)?;
            check_sigma(sig, scan_depth)?;
            let c = (1..=scan_depth)
                .map(|k| (-((k as i64 * a) as f64) * ratio.ln() + min_frac_pm(k as f64 * sig).ln()).exp())
                .fold(f64::INFINITY, f64::min);
            let c = positive(c)?;
            let gap = (1.0 - pm.powf(1.0 / b as f64)).powi(2);
            (gap.min(c) * pp2 / s, c)
        }
        Rationality::Irrational => {
            let alpha = q.norm().ln() / rho;
            let c = (1..=scan_depth)
                .map(|n| {
                    let x = n as f64 * alpha;
                    let f = frac(x);
                    (-(x.floor()) * ratio.ln()).exp() * f * (1.0 - f)
                })
                .fold(f64::INFINITY, f64::min);
            let c = positive(c)?;
            (c * pm * rho * rho * pp2 / s, c)
        }
    };
    Ok(ZBound { bound, c_proxy, scan_depth, rationality, theta_sup: Some(s) })
}
