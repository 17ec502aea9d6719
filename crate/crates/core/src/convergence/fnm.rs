//! The integrals `F_{N,M}(t) = ∫₀¹ log|θ(t e^{2πix(N+Mτ)};p)| dx` and the
//! half-line integrals `I_{N,M}(t)`, in closed form and by quadrature.

use std::f64::consts::PI;

use super::dilog::{dilog, dilog_circle_re};
use super::quadrature::{integrate, QuadResult};
use crate::line::LineSpec;
use crate::theta::ln_abs_theta_from_log;
use crate::{Error, Result, C64, TWO_PI};

const DILOG_TOL: f64 = 1e-17;

fn nonzero(t: C64) -> Result<()> {
    if t.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    Ok(())
}

/// Real angle `arg t + (N + M Re τ) log|t| / (M Im τ)` of `μ(t)`, unreduced.
pub fn mu_angle(t: C64, line: &LineSpec) -> Result<f64> {
    nonzero(t)?;
    if line.m == 0 {
        return Err(Error::ConstraintViolation("mu needs M != 0".into()));
    }
    let tau = line.tau();
    let m = line.m as f64;
    Ok(t.arg() + (line.n as f64 + m * tau.re) * t.norm().ln() / (m * tau.im))
}

/// `μ(t) = (t/|t|) e^{i(N + M Re τ) log|t| / (M Im τ)}`, a point on the unit circle.
pub fn mu(t: C64, line: &LineSpec) -> Result<C64> {
    Ok(C64::from_polar(1.0, mu_angle(t, line)?))
}

/// Closed form of `I_{N,M}(t) = ∫₀^∞ log|1 − t e^{2πix(N+Mτ)}| dx` for `M > 0`.
pub fn i_nm(t: C64, line: &LineSpec) -> Result<f64> {
    nonzero(t)?;
    if line.m <= 0 {
        return Err(Error::ConstraintViolation("I_NM needs M > 0".into()));
    }
    if t.norm() >= 1.0 {
        i_nm_outer(t, line)
    } else {
        i_nm_inner(t, line)
    }
}

/// Branch of `I_{N,M}` valid for `|t| ≤ 1`.
pub fn i_nm_inner(t: C64, line: &LineSpec) -> Result<f64> {
    let w = line.w();
    Ok((dilog(t, DILOG_TOL)? / (C64::i() * TWO_PI * w)).re)
}

/// Branch of `I_{N,M}` valid for `|t| ≥ 1`.
pub fn i_nm_outer(t: C64, line: &LineSpec) -> Result<f64> {
    let w = line.w();
    let im_tau = line.im_tau();
    let m = line.m as f64;
    let lt = t.norm().ln();
    Ok(lt * lt / (4.0 * PI * m * im_tau)
        - (dilog(t.inv(), DILOG_TOL)? / (C64::i() * TWO_PI * w)).re
        - m * im_tau * dilog_circle_re(mu_angle(t, line)?) / (PI * w.norm_sqr()))
}

/// `F_{1,0}(t) = log²|t|/(4π Im τ) + log|t|/2 + π Im τ/6 − (Im τ/π) Re Li₂(e^{i log|t|/Im τ})`.
fn f10(t: C64, im_tau: f64) -> f64 {
    let lt = t.norm().ln();
    lt * lt / (4.0 * PI * im_tau) + 0.5 * lt + PI * im_tau / 6.0 - im_tau / PI * dilog_circle_re(lt / im_tau)
}

/// Closed form of `F_{N,M}(t)`. `M < 0` is mapped to `-M` through `x ↦ 1 − x`.
pub fn f_nm(t: C64, line: &LineSpec) -> Result<f64> {
    nonzero(t)?;
    let im_tau = line.im_tau();
    if line.m == 0 {
        return Ok(f10(t, im_tau));
    }
    if line.m < 0 {
        let flipped = LineSpec { n: -line.n, m: -line.m, nome: line.nome };
        let p = line.nome.p();
        return f_nm(t * p.powi(line.m as i32), &flipped);
    }
    let m = line.m as f64;
    let d = line.d() as f64;
    let lt = t.norm().ln();
    Ok(lt * lt / (4.0 * PI * im_tau) - (m - 1.0) * lt / 2.0 + (m - 1.0) * (2.0 * m - 1.0) * PI * im_tau / 6.0
        - d * d * im_tau / (PI * line.w().norm_sqr()) * dilog_circle_re(m / d * mu_angle(t, line)?))
}

/// `F_{N,M} − F_{N/D,M/D}` predicted by the gcd reduction.
pub fn fnm_gcd_correction(t: C64, line: &LineSpec) -> f64 {
    let d = line.d() as f64;
    let m = line.m as f64;
    PI * line.im_tau() * m * (d - 1.0) * (2.0 * m * (d + 1.0) - 3.0 * d) / (6.0 * d * d)
        - t.norm().ln() * m * (d - 1.0) / (2.0 * d)
}

/// Points in `(0, 1)` where `t e^{2πix(N+Mτ)}` can meet `p^ℤ`.
fn zero_crossings(t: C64, line: &LineSpec) -> Vec<f64> {
    let tau = line.tau();
    let wlog = t.ln() / (C64::i() * TWO_PI);
    // wlog = a + bτ with real a, b
    let b = wlog.im / tau.im;
    let a = wlog.re - b * tau.re;
    let mut out = Vec::new();
    for (coef, off) in [(line.m as f64, b), (line.n as f64, a)] {
        if coef == 0.0 {
            continue;
        }
        let (lo, hi) = if coef > 0.0 { (off, coef + off) } else { (coef + off, off) };
        let mut k = lo.ceil();
        while k <= hi {
            let x = (k - off) / coef;
            if x > 0.0 && x < 1.0 {
                out.push(x);
            }
            k += 1.0;
        }
    }
    out
}

/// `F_{N,M}(t)` by adaptive quadrature of its defining integral.
pub fn f_nm_quadrature(t: C64, line: &LineSpec, abs_tol: f64) -> Result<QuadResult> {
    nonzero(t)?;
    let p = line.nome.p();
    let lt = t.ln();
    let w = line.w();
    let f = |x: f64| ln_abs_theta_from_log(lt + C64::i() * TWO_PI * x * w, p).unwrap_or(f64::NAN);
    integrate(f, 0.0, 1.0, &zero_crossings(t, line), abs_tol)
}

fn ln_abs_one_minus_exp(l: C64) -> f64 {
    if l.re > 30.0 {
        l.re + (1.0 - (-l).exp()).norm().ln()
    } else {
        (1.0 - l.exp()).norm().ln()
    }
}

/// `I_{N,M}(t)` by quadrature, truncating where `|t| e^{-2πMx Im τ} < 1e-14`.
pub fn i_nm_quadrature(t: C64, line: &LineSpec, abs_tol: f64) -> Result<QuadResult> {
    nonzero(t)?;
    if line.m <= 0 {
        return Err(Error::ConstraintViolation("I_NM needs M > 0".into()));
    }
    let decay = TWO_PI * line.m as f64 * line.im_tau();
    let x_end = ((t.norm() / 1e-14).ln() / decay).max(1.0);
    let x0 = t.norm().ln() / decay;
    let lt = t.ln();
    let w = line.w();
    let f = |x: f64| ln_abs_one_minus_exp(lt + C64::i() * TWO_PI * x * w);
    integrate(f, 0.0, x_end, &[x0], abs_tol)
}
