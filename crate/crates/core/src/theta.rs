//! Theta function `θ(z;p) = (z;p)_∞ (p/z;p)_∞`, its Fourier expansion,
//! quasi-periodicity and the elliptic Pochhammer symbol.

use serde::{Deserialize, Serialize};

use crate::sum::ComplexSum;
use crate::{Error, Result, C64, TWO_PI};

/// Relative distance to `p^ℤ` below which `θ` is snapped to an exact zero.
pub const LATTICE_SNAP: f64 = 1e-13;

/// The nome `p = e^{2πiτ}` together with `τ`.
///
/// `p = 0` is allowed and stands for `τ = i∞`; operations that need a finite
/// `τ` reject it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nome {
    tau: C64,
    p: C64,
}

impl Nome {
    pub fn from_tau(tau: C64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() {
            return Err(Error::DivergedModulus((-TWO_PI * tau.im).exp()));
        }
        let p = (C64::i() * TWO_PI * tau).exp();
        Ok(Self { tau, p })
    }

    pub fn from_p(p: C64) -> Result<Self> {
        let m = p.norm();
        if !(m < 1.0) {
            return Err(Error::DivergedModulus(m));
        }
        if m == 0.0 {
            return Ok(Self { tau: C64::new(0.0, f64::INFINITY), p });
        }
        let tau = p.ln() / (C64::i() * TWO_PI);
        Ok(Self { tau, p })
    }

    pub fn p(&self) -> C64 {
        self.p
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn is_degenerate(&self) -> bool {
        self.p.norm() == 0.0
    }

    /// `τ`, or `ConstraintViolation` when `p = 0`.
    pub fn finite_tau(&self) -> Result<C64> {
        if self.is_degenerate() {
            return Err(Error::ConstraintViolation("operation needs 0 < |p| < 1".into()));
        }
        Ok(self.tau)
    }
}

/// Stopping rule for infinite products and bilateral sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { abs_tol: 1e-17, max_terms: 100_000 }
    }
}

fn check_nome(p: C64) -> Result<()> {
    let m = p.norm();
    if !(m < 1.0) {
        return Err(Error::DivergedModulus(m));
    }
    Ok(())
}

/// `(a;p)_∞ = ∏_{k≥0} (1 - a p^k)`.
pub fn qpochhammer_inf(a: C64, p: C64) -> Result<C64> {
    qpochhammer_inf_with(a, p, &TruncationPolicy::default())
}

pub fn qpochhammer_inf_with(a: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    check_nome(p)?;
    let cutoff = policy.abs_tol * (1.0 - p.norm());
    let mut prod = C64::new(1.0, 0.0);
    let mut x = a;
    for _ in 0..policy.max_terms {
        if x.norm() < cutoff {
            return Ok(prod);
        }
        prod *= 1.0 - x;
        x *= p;
    }
    Err(Error::TruncationExceeded(policy.max_terms))
}

/// True if `z` lies within relative [`LATTICE_SNAP`] of `p^ℤ`.
pub fn on_p_lattice(z: C64, p: C64) -> bool {
    if z == C64::new(0.0, 0.0) {
        return false;
    }
    if p.norm() == 0.0 {
        return (z - 1.0).norm() < LATTICE_SNAP;
    }
    let lz = z.ln();
    let lp = p.ln();
    let k = (lz.re / lp.re).round();
    let mut d = lz - k * lp;
    d.im -= TWO_PI * (d.im / TWO_PI).round();
    d.norm() < LATTICE_SNAP
}

/// `θ(z;p)` by the product definition. Returns an exact zero on `p^ℤ`.
pub fn theta(z: C64, p: C64) -> Result<C64> {
    theta_with(z, p, &TruncationPolicy::default())
}

pub fn theta_with(z: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    check_nome(p)?;
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    if on_p_lattice(z, p) {
        return Ok(C64::new(0.0, 0.0));
    }
    theta_raw(z, p, policy)
}

/// `a/b` scaled by `|b|` first; `C64` division squares `|b|` and loses
/// arguments below about `1e-154`.
fn div_scaled(a: C64, b: C64) -> C64 {
    let m = b.norm();
    a * (b / m).conj() / m
}

/// Product evaluation without lattice snapping.
pub fn theta_raw(z: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    Ok(qpochhammer_inf_with(z, p, policy)? * qpochhammer_inf_with(div_scaled(p, z), p, policy)?)
}

/// `θ(z;p)` through the bilateral sum `Σ p^{n(n-1)/2} (-z)^n / (p;p)_∞`.
pub fn theta_sum(z: C64, p: C64) -> Result<C64> {
    theta_sum_with(z, p, &TruncationPolicy::default())
}

pub fn theta_sum_with(z: C64, p: C64, policy: &TruncationPolicy) -> Result<C64> {
    check_nome(p)?;
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let pp = qpochhammer_inf_with(p, p, policy)?;
    let mut acc = ComplexSum::new();
    acc.add(C64::new(1.0, 0.0));
    let rel = 1e-18;

    // n = 1, 2, ...: t_{n+1} = t_n (-z) p^n
    let mut term = C64::new(1.0, 0.0);
    let mut pn = C64::new(1.0, 0.0);
    let mut peak = 1.0_f64;
    let mut done = false;
    for _ in 0..policy.max_terms {
        term *= -z * pn;
        let past_peak = z.norm() * pn.norm() < 1.0;
        pn *= p;
        acc.add(term);
        peak = peak.max(term.norm());
        if past_peak && term.norm() <= rel * peak {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::TruncationExceeded(policy.max_terms));
    }

    // n = -1, -2, ...: t_{n-1} = t_n (-1/z) p^{1-n}
    let zi = z.inv();
    let mut term = C64::new(1.0, 0.0);
    let mut pn = p;
    let mut done = false;
    for _ in 0..policy.max_terms {
        term *= -zi * pn;
        let past_peak = zi.norm() * pn.norm() < 1.0;
        pn *= p;
        acc.add(term);
        peak = peak.max(term.norm());
        if past_peak && term.norm() <= rel * peak {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::TruncationExceeded(policy.max_terms));
    }
    Ok(acc.value() / pp)
}

/// `θ(p^k z;p) = (-z)^{-k} p^{-k(k-1)/2} θ(z;p)`.
pub fn theta_shift(z: C64, p: C64, k: i32) -> Result<C64> {
    let th = theta(z, p)?;
    let b = (k as i64 * (k as i64 - 1) / 2) as f64;
    let log_factor = -(k as f64) * (-z).ln() - b * p.ln();
    Ok(th * log_factor.exp())
}

/// `θ(t;p;q)_n = ∏_{m=0}^{n-1} θ(t q^m;p)`.
pub fn elliptic_pochhammer(t: C64, p: C64, q: C64, n: usize) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    let mut x = t;
    for _ in 0..n {
        prod *= theta(x, p)?;
        x *= q;
    }
    Ok(prod)
}

/// Complex logarithm of `θ(z;p)` as a sum of factor logarithms (branch
/// arbitrary). Avoids overflow when `|z|` is far outside the unit annulus.
pub fn ln_theta(z: C64, p: C64) -> Result<C64> {
    check_nome(p)?;
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let policy = TruncationPolicy::default();
    let cutoff = policy.abs_tol * (1.0 - p.norm());
    let mut acc = ComplexSum::new();
    for start in [z, div_scaled(p, z)] {
        let mut x = start;
        let mut n = 0;
        while x.norm() >= cutoff {
            acc.add((1.0 - x).ln());
            x *= p;
            n += 1;
            if n > policy.max_terms {
                return Err(Error::TruncationExceeded(policy.max_terms));
            }
        }
    }
    Ok(acc.value())
}

/// `ln|θ(e^L;p)|` for a complex logarithm `L`, reduced into the annulus
/// `|p| < |x| ≤ 1` first so that huge or tiny moduli stay finite. No lattice
/// snapping: exact zeros give `-∞`.
pub fn ln_abs_theta_from_log(log_z: C64, p: C64) -> Result<f64> {
    check_nome(p)?;
    let policy = TruncationPolicy::default();
    if p.norm() == 0.0 {
        return Ok((1.0 - log_z.exp()).norm().ln());
    }
    let lp = p.ln();
    let rho = lp.re;
    let k = (log_z.re / rho).floor();
    let reduced = log_z - k * lp;
    let base = theta_raw(reduced.exp(), p, &policy)?.norm().ln();
    Ok(-k * reduced.re - 0.5 * k * (k - 1.0) * rho + base)
}

/// `ln|θ(z;p)|`.
pub fn ln_abs_theta(z: C64, p: C64) -> Result<f64> {
    if z.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    ln_abs_theta_from_log(z.ln(), p)
}

/// `|θ(-|z|;|p|)|`, an upper envelope for `|θ(z;p)|` used to judge when a
/// theta value is numerically zero.
pub fn theta_envelope(z: C64, p: C64) -> Result<f64> {
    let r = C64::new(-z.norm(), 0.0);
    Ok(theta_raw(r, C64::new(p.norm(), 0.0), &TruncationPolicy::default())?.norm())
}

/// `B_{2,2}(u;ω₁,ω₂)`, the quadratic Bernoulli polynomial.
pub fn b22(u: C64, omega1: C64, omega2: C64) -> C64 {
    u * u / (omega1 * omega2) - u / omega1 - u / omega2
        + omega1 / (6.0 * omega2)
        + omega2 / (6.0 * omega1)
        + 0.5
}

/// Both sides of the modular transformation
/// `θ(e^{-2πiu/ω₁}; e^{-2πiω₂/ω₁}) = e^{πi B₂₂(u;ω₁,ω₂)} θ(e^{2πiu/ω₂}; e^{2πiω₁/ω₂})`.
pub fn modular_check(u: C64, omega1: C64, omega2: C64) -> Result<(C64, C64)> {
    let i2pi = C64::i() * TWO_PI;
    let p1 = (-i2pi * omega2 / omega1).exp();
    let p2 = (i2pi * omega1 / omega2).exp();
    check_nome(p1)?;
    check_nome(p2)?;
    let lhs = theta((-i2pi * u / omega1).exp(), p1)?;
    let rhs = (C64::i() * std::f64::consts::PI * b22(u, omega1, omega2)).exp()
        * theta((i2pi * u / omega2).exp(), p2)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_on_lattice() {
        let p = c(0.2, 0.1);
        assert_eq!(theta(c(1.0, 0.0), p).unwrap(), c(0.0, 0.0));
        assert_eq!(theta(p * p, p).unwrap(), c(0.0, 0.0));
        assert_eq!(theta(p.inv(), p).unwrap(), c(0.0, 0.0));
        assert!(theta_sum(c(1.0, 0.0), p).unwrap().norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(theta(c(0.5, 0.0), c(1.0, 0.0)), Err(Error::DivergedModulus(_))));
        assert!(matches!(theta(c(0.0, 0.0), c(0.5, 0.0)), Err(Error::ZeroArgument)));
        assert!(Nome::from_tau(c(0.3, -0.1)).is_err());
    }

    #[test]
    fn degenerate_nome() {
        let z = c(0.3, -0.7);
        assert_eq!(theta(z, c(0.0, 0.0)).unwrap(), 1.0 - z);
        assert!((theta_sum(z, c(0.0, 0.0)).unwrap() - (1.0 - z)).norm() < 1e-15);
        let n = Nome::from_p(c(0.0, 0.0)).unwrap();
        assert!(n.is_degenerate() && n.finite_tau().is_err());
    }

    #[test]
    fn nome_round_trip() {
        let n = Nome::from_tau(c(0.25, 0.8)).unwrap();
        let back = Nome::from_p(n.p()).unwrap();
        assert!((back.tau() - n.tau()).norm() < 1e-14);
    }

    #[test]
    fn shift_matches_direct_product() {
        let p = c(0.1, 0.25);
        let z = c(0.7, -0.4);
        for k in -4..=4 {
            let direct = theta(z * p.powi(k), p).unwrap();
            let shifted = theta_shift(z, p, k).unwrap();
            assert!((direct - shifted).norm() <= 1e-11 * direct.norm(), "k={k}");
        }
    }

    #[test]
    fn log_domain_agrees_with_direct() {
        let p = c(0.05, 0.1);
        let z = c(2.0, 1.0);
        for k in -6..=6 {
            let x = z * p.powi(k);
            let direct = theta(x, p).unwrap();
            let la = ln_abs_theta(x, p).unwrap();
            assert!((la - direct.norm().ln()).abs() < 1e-10);
            let lc = ln_theta(x, p).unwrap();
            assert!((lc.exp() - direct).norm() <= 1e-10 * direct.norm());
        }
    }

    #[test]
    fn bernoulli_polynomial_symmetry() {
        let (w1, w2) = (c(1.0, 0.0), c(0.3, 1.1));
        let u = c(0.2, 0.4);
        assert!((b22(u, w1, w2) - b22(w1 + w2 - u, w1, w2)).norm() < 1e-14);
        assert!((b22(u, w1, w2) - b22(u, w2, w1)).norm() < 1e-14);
    }
}
