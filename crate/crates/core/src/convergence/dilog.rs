//! Dilogarithm `Li₂(x) = Σ xⁿ/n²` on the closed unit disc.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::{Error, Result, C64, TWO_PI};

const K_MAX: usize = 60;

/// `ζ(2k)/(2π)^{2k}` for `k = 1..=K_MAX` (index 0 unused).
fn zeta_scaled() -> &'static [f64; K_MAX + 1] {
    static TABLE: OnceLock<[f64; K_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [0.0; K_MAX + 1];
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let s = 2 * k as i32;
            let zeta = match k {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => {
                    let n_max = 2000;
                    let mut acc = 0.0;
                    for n in (1..=n_max).rev() {
                        acc += (n as f64).powi(-s);
                    }
                    let nf = n_max as f64;
                    acc + nf.powi(1 - s) / (s as f64 - 1.0) - 0.5 * nf.powi(-s)
                }
            };
            *slot = zeta / TWO_PI.powi(s);
        }
        out
    })
}

/// `Re Li₂(e^{iθ}) = θ²/4 − πθ/2 + π²/6` for `θ` reduced into `[0, 2π)`.
pub fn dilog_circle_re(arg: f64) -> f64 {
    let mut t = arg.rem_euclid(TWO_PI);
    if t >= TWO_PI {
        t = 0.0;
    }
    t * t / 4.0 - PI * t / 2.0 + PI * PI / 6.0
}

/// Clausen function `Cl₂(θ) = Im Li₂(e^{iθ}) = Σ sin(nθ)/n²`.
pub fn clausen(arg: f64) -> f64 {
    let mut t = arg.rem_euclid(TWO_PI);
    if t > PI {
        t -= TWO_PI;
    }
    if t == 0.0 {
        return 0.0;
    }
    let z = zeta_scaled();
    let t2 = t * t;
    let mut pow = t;
    let mut acc = t - t * t.abs().ln();
    for (k, zk) in z.iter().enumerate().skip(1) {
        pow *= t2;
        let kf = k as f64;
        let term = zk * pow / (kf * (2.0 * kf + 1.0));
        acc += term;
        if term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
    }
    acc
}

fn li2_direct(x: C64, tol: f64) -> C64 {
    let a = x.norm();
    let mut acc = C64::new(0.0, 0.0);
    let mut xn = C64::new(1.0, 0.0);
    let mut k = 1usize;
    loop {
        xn *= x;
        let kf = k as f64;
        acc += xn / (kf * kf);
        let tail = a.powi(k as i32 + 1) / (kf * kf) / (1.0 - a);
        if tail < tol || xn.norm() == 0.0 {
            return acc;
        }
        k += 1;
    }
}

/// `Σ B_n u^{n+1}/(n+1)!` with `u = -log(1-x)`; valid for `|u| < 2π`.
fn li2_bernoulli(u: C64) -> C64 {
    let z = zeta_scaled();
    let u2 = u * u;
    let mut pow = u;
    let mut acc = u - u2 / 4.0;
    for (k, zk) in z.iter().enumerate().skip(1) {
        pow *= u2;
        let sign = if k % 2 == 1 { 2.0 } else { -2.0 };
        let term = pow * (sign * zk / (2.0 * k as f64 + 1.0));
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
    }
    acc
}

/// `Li₂(x)` for `|x| ≤ 1`. On the unit circle the real part comes from the
/// Bernoulli polynomial and the imaginary part from [`clausen`].
pub fn dilog(x: C64, tol: f64) -> Result<C64> {
    let a = x.norm();
    if a > 1.0 + 1e-14 {
        return Err(Error::OutsideDomain);
    }
    if (a - 1.0).abs() <= 1e-14 {
        let t = x.arg();
        return Ok(C64::new(dilog_circle_re(t), clausen(t)));
    }
    if a <= 0.5 {
        return Ok(li2_direct(x, tol));
    }
    if x.re > 0.5 {
        // reflection Li₂(x) = π²/6 − log x log(1−x) − Li₂(1−x)
        let y = 1.0 - x;
        let li_y = if y.norm() <= 0.5 { li2_direct(y, tol) } else { li2_bernoulli(-x.ln()) };
        return Ok(PI * PI / 6.0 - x.ln() * y.ln() - li_y);
    }
    Ok(li2_bernoulli(-(1.0 - x).ln()))
}
