//! Truncated checks of the infinite-order q-difference equations satisfied by
//! `ₛEᵣ`, the explicit `₂E₁` equation, its `p → 0` limit and the kernel of
//! `θ(aq^δ;p)`.

use serde::{Deserialize, Serialize};

use crate::phi::phi_n;
use crate::series::{eval_qhyper, eval_ser, PartialSumResult, SeriesSpec};
use crate::sum::ComplexSum;
use crate::theta::{ln_theta, qpochhammer_inf, theta, Nome};
use crate::{Error, Result, C64};

/// Terms of the series solution summed at each shifted point; stop rule.
const F_TAIL_TOL: f64 = 1e-18;
/// Normalized residual treated as exact zero when judging monotone decay.
const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorTruncation {
    pub n_range: usize,
    pub f_truncation: usize,
}

impl OperatorTruncation {
    pub fn new(n_range: usize, f_truncation: usize) -> Result<Self> {
        let t = Self { n_range, f_truncation };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_range < 1 || self.f_truncation < self.n_range + 10 {
            return Err(Error::ConstraintViolation("need n_range >= 1 and f_truncation >= n_range + 10".into()));
        }
        Ok(())
    }
}

impl Default for OperatorTruncation {
    fn default() -> Self {
        Self { n_range: 32, f_truncation: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: C64,
    /// Largest summand magnitude.
    pub residual_scale: f64,
    pub n_range_used: usize,
    pub converged: bool,
    /// Normalized residual at each window size tried, ending with `n_range_used`.
    pub history: Vec<(usize, f64)>,
    /// Summands for `n = -n_range_used ..= n_range_used`.
    pub summands: Vec<C64>,
}

impl ResidualReport {
    pub fn normalized(&self) -> f64 {
        if self.residual_scale == 0.0 {
            return 0.0;
        }
        self.residual.norm() / self.residual_scale
    }

    /// Summand for index `n`, if inside the window.
    pub fn summand(&self, n: i64) -> Option<C64> {
        let idx = n + self.n_range_used as i64;
        self.summands.get(usize::try_from(idx).ok()?).copied()
    }
}

fn window_sizes(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut nr = 4.min(max);
    loop {
        out.push(nr);
        if nr >= max {
            return out;
        }
        nr = (2 * nr).min(max);
    }
}

/// Builds the report from summands on `-max..=max`, re-summing at each window.
fn report_from_summands(all: &[C64], max: usize) -> ResidualReport {
    let mut history = Vec::new();
    let mut last = None;
    for nr in window_sizes(max) {
        let slice = &all[max - nr..=max + nr];
        let residual = crate::sum::sum_complex(slice.iter().copied());
        let scale = slice.iter().map(|s| s.norm()).fold(0.0, f64::max);
        let norm = if scale == 0.0 { 0.0 } else { residual.norm() / scale };
        history.push((nr, norm));
        last = Some((nr, residual, scale, slice.to_vec()));
    }
    let tail = &history[history.len().saturating_sub(3)..];
    let converged = tail.windows(2).all(|w| w[1].1 <= 1.1 * w[0].1 || w[1].1 < RESIDUAL_FLOOR);
    let (n_range_used, residual, residual_scale, summands) = last.expect("at least one window");
    ResidualReport { residual, residual_scale, n_range_used, converged, history, summands }
}

fn sample<F>(f: &F, q: C64, z: C64, max: usize) -> Result<Vec<C64>>
where
    F: Fn(C64) -> Result<C64>,
{
    let m = max as i64;
    (-m..=m).map(|n| f(q.powi(n as i32) * z)).collect()
}

fn series_sampler(spec: &SeriesSpec, trunc: OperatorTruncation) -> impl Fn(C64) -> Result<C64> + '_ {
    move |x| {
        let res: PartialSumResult = eval_ser(spec, x, trunc.f_truncation, F_TAIL_TOL)?;
        if !res.converged {
            return Err(Error::OutsideRadius);
        }
        Ok(res.value)
    }
}

/// `Σ_n [(p;p)^{s−1−r}_∞ Φ_n(1, w/q) − z Φ_n(t)] f(qⁿz)` with `f = ₛEᵣ`.
pub fn residual_series_eq(spec: &SeriesSpec, z: C64, trunc: OperatorTruncation) -> Result<ResidualReport> {
    residual_series_eq_with(spec, z, trunc, series_sampler(spec, trunc))
}

/// As [`residual_series_eq`] for an arbitrary function `f`.
pub fn residual_series_eq_with<F>(spec: &SeriesSpec, z: C64, trunc: OperatorTruncation, f: F) -> Result<ResidualReport>
where
    F: Fn(C64) -> Result<C64>,
{
    trunc.validate()?;
    let p = spec.p();
    let max = trunc.n_range;
    let mut lower = vec![C64::new(1.0, 0.0)];
    lower.extend(spec.w.iter().map(|&w| w / spec.q));
    let pref = qpochhammer_inf(p, p)?.powi(spec.s() as i32 - 1 - spec.r() as i32);
    let fs = sample(&f, spec.q, z, max)?;
    let mut all = Vec::with_capacity(2 * max + 1);
    for (i, n) in (-(max as i64)..=max as i64).enumerate() {
        let a = pref * phi_n(&lower, p, n)?;
        let b = phi_n(&spec.t, p, n)?;
        all.push((a - z * b) * fs[i]);
    }
    Ok(report_from_summands(&all, max))
}

fn ln_p_binom(n: i64, lp: C64) -> C64 {
    (n * (n - 1) / 2) as f64 * lp
}

/// Per-`n` summands of the explicit `₂E₁` equation
/// `Σ (−1)ⁿ p^{n(n−1)/2} (θ(−(q/c)p^{n+1};p²) − z aⁿ θ(−(a/b)p^{n+1};p²)) f(qⁿz)`,
/// evaluated in the log domain to survive the large theta arguments.
fn e21_summand(a: C64, b: C64, c: C64, q: C64, p: C64, z: C64, n: i64, fv: C64) -> Result<C64> {
    let p2 = p * p;
    let lp = p.ln();
    let pn1 = ((n + 1) as f64 * lp).exp();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let base = ln_p_binom(n, lp);
    let x1 = -(q / c) * pn1;
    let x2 = -(a / b) * pn1;
    let t1 = (base + ln_theta(x1, p2)?).exp();
    let t2 = (base + n as f64 * a.ln() + ln_theta(x2, p2)?).exp();
    Ok(sign * (t1 - z * t2) * fv)
}

fn e21_spec(a: C64, b: C64, c: C64, q: C64, p: C64) -> Result<SeriesSpec> {
    SeriesSpec::new(vec![a, b], vec![c], q, Nome::from_p(p)?)
}

/// The explicit `₂E₁` equation; equals the `r = 1` final equation divided by
/// `(p²;p²)_∞`.
pub fn residual_2e1(a: C64, b: C64, c: C64, q: C64, p: C64, z: C64, trunc: OperatorTruncation) -> Result<ResidualReport> {
    trunc.validate()?;
    let spec = e21_spec(a, b, c, q, p)?;
    let fs = sample(&series_sampler(&spec, trunc), q, z, trunc.n_range)?;
    let max = trunc.n_range as i64;
    let all = (-max..=max)
        .zip(&fs)
        .map(|(n, &fv)| e21_summand(a, b, c, q, p, z, n, fv))
        .collect::<Result<Vec<_>>>()?;
    Ok(report_from_summands(&all, trunc.n_range))
}

/// Split-form coefficients `(A_n, B_n)` of the `₂E₁` equation, in which the
/// `p`-powers are cleared from the theta arguments:
/// `n = 2k`: `p^{k(k−1)} θ(−pq/c;p²)(c/q)^k`, `p^{k(k−1)} θ(−pa/b;p²)(ab)^k`;
/// `n = 2k+1`: `−p^{k²} θ(−q/c;p²)(c/q)^{k+1}`, `−p^{k²} b θ(−a/b;p²)(ab)^k`.
#[derive(Debug, Clone, Copy)]
pub struct SplitCoefficients {
    lp: C64,
    l_cq: C64,
    l_ab: C64,
    b: C64,
    th_even: (C64, C64),
    th_odd: (C64, C64),
}

impl SplitCoefficients {
    pub fn new(a: C64, b: C64, c: C64, q: C64, p: C64) -> Result<Self> {
        if p.norm() == 0.0 {
            return Err(Error::ConstraintViolation("split form needs p != 0".into()));
        }
        let p2 = p * p;
        Ok(Self {
            lp: p.ln(),
            l_cq: (c / q).ln(),
            l_ab: (a * b).ln(),
            b,
            th_even: (theta(-p * q / c, p2)?, theta(-p * a / b, p2)?),
            th_odd: (theta(-q / c, p2)?, theta(-a / b, p2)?),
        })
    }

    /// `(A_n, B_n)`; the equation reads `Σ (A_n − z B_n) f(qⁿz) = 0`.
    pub fn coefficients(&self, n: i64) -> (C64, C64) {
        self.coefficients_scaled(n, C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    /// `(A_n e^{sa}, B_n e^{sb})` with the exponentials folded into the log
    /// domain, which avoids overflow when multiplying by large `q`-powers.
    pub fn coefficients_scaled(&self, n: i64, sa: C64, sb: C64) -> (C64, C64) {
        let k = n.div_euclid(2);
        let kf = k as f64;
        if n.rem_euclid(2) == 0 {
            let lpk = kf * (kf - 1.0) * self.lp;
            (
                self.th_even.0 * (lpk + kf * self.l_cq + sa).exp(),
                self.th_even.1 * (lpk + kf * self.l_ab + sb).exp(),
            )
        } else {
            let lpk = kf * kf * self.lp;
            (
                -self.th_odd.0 * (lpk + (kf + 1.0) * self.l_cq + sa).exp(),
                -self.b * self.th_odd.1 * (lpk + kf * self.l_ab + sb).exp(),
            )
        }
    }
}

/// The `₂E₁` equation in split form, reported per original index `n`.
pub fn residual_2e1_split(a: C64, b: C64, c: C64, q: C64, p: C64, z: C64, trunc: OperatorTruncation) -> Result<ResidualReport> {
    trunc.validate()?;
    let spec = e21_spec(a, b, c, q, p)?;
    let fs = sample(&series_sampler(&spec, trunc), q, z, trunc.n_range)?;
    let split = SplitCoefficients::new(a, b, c, q, p)?;
    let max = trunc.n_range as i64;
    let all: Vec<C64> = (-max..=max)
        .zip(&fs)
        .map(|(n, &fv)| {
            let (an, bn) = split.coefficients(n);
            (an - z * bn) * fv
        })
        .collect();
    Ok(report_from_summands(&all, trunc.n_range))
}

/// Magnitudes `(k, |even summand|, |odd summand|)` of the split `₂E₁`
/// equation for `k` in `k_range`, i.e. original indices `2k` and `2k + 1`.
pub fn split_summand_magnitudes(
    a: C64,
    b: C64,
    c: C64,
    q: C64,
    p: C64,
    z: C64,
    k_range: std::ops::RangeInclusive<i64>,
    trunc: OperatorTruncation,
) -> Result<Vec<(i64, f64, f64)>> {
    let spec = e21_spec(a, b, c, q, p)?;
    let f = series_sampler(&spec, trunc);
    let split = SplitCoefficients::new(a, b, c, q, p)?;
    k_range
        .map(|k| {
            let mut mags = [0.0; 2];
            for (slot, n) in [2 * k, 2 * k + 1].into_iter().enumerate() {
                let (an, bn) = split.coefficients(n);
                let coef = an - z * bn;
                mags[slot] = if coef.norm() == 0.0 { 0.0 } else { (coef * f(q.powi(n as i32) * z)?).norm() };
            }
            Ok((k, mags[0], mags[1]))
        })
        .collect()
}

/// Residual of the finite-order equation
/// `[(1−q^δ)∏(1−w_k q^{δ−1}) − z∏(1−t_j q^δ)] ₛφᵣ = 0`.
pub fn residual_basic_eq(t: &[C64], w: &[C64], q: C64, z: C64, max_terms: usize) -> Result<ResidualReport> {
    // coefficients of the shift polynomials in X = q^δ
    let mut lhs = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
    for &wk in w {
        lhs = poly_mul_linear(&lhs, -wk / q);
    }
    let mut rhs = vec![C64::new(1.0, 0.0)];
    for &tj in t {
        rhs = poly_mul_linear(&rhs, -tj);
    }
    let deg = lhs.len().max(rhs.len());
    let mut all = Vec::with_capacity(deg);
    for n in 0..deg {
        let fv = eval_qhyper(t, w, q, q.powi(n as i32) * z, max_terms, F_TAIL_TOL)?;
        if !fv.converged {
            return Err(Error::OutsideRadius);
        }
        let l = lhs.get(n).copied().unwrap_or_default();
        let r = rhs.get(n).copied().unwrap_or_default();
        all.push((l - z * r) * fv.value);
    }
    let residual = crate::sum::sum_complex(all.iter().copied());
    let residual_scale = all.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let norm = if residual_scale == 0.0 { 0.0 } else { residual.norm() / residual_scale };
    Ok(ResidualReport {
        residual,
        residual_scale,
        n_range_used: deg - 1,
        converged: true,
        history: vec![(deg - 1, norm)],
        summands: all,
    })
}

/// `poly · (1 + c X)`.
fn poly_mul_linear(poly: &[C64], c: C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); poly.len() + 1];
    for (i, &a) in poly.iter().enumerate() {
        out[i] += a;
        out[i + 1] += a * c;
    }
    out
}

/// Laurent solution `Σ c_m z^m` of the `₂E₁` equation, generated by the first
/// order recurrence `c_m α(m) = c_{m−1} β(m)` with
/// `α(m) = Σ A_n q^{nm}`, `β(m) = Σ B_n q^{n(m−1)}` from the split form.
#[derive(Debug, Clone)]
pub struct Laurent2E1 {
    split: SplitCoefficients,
    lq: C64,
    /// `c_{−1}/c_0 = α(0)/β(0)`, snapped to zero when `α(0)` vanishes to
    /// rounding.
    pub d0: C64,
}

fn bilateral<F: Fn(i64) -> C64>(term: F) -> (C64, f64) {
    let mut acc = ComplexSum::new();
    let mut abs = 0.0;
    let mut peak = 0.0_f64;
    let t0 = term(0);
    acc.add(t0);
    abs += t0.norm();
    peak = peak.max(t0.norm());
    for dir in [1i64, -1] {
        let mut prev = f64::INFINITY;
        let mut n = dir;
        loop {
            let t = term(n);
            let m = t.norm();
            acc.add(t);
            abs += m;
            peak = peak.max(m);
            let small = m <= 1e-20 * peak;
            if (small && m <= prev) || n.abs() > 10_000 {
                break;
            }
            prev = m;
            n += dir;
        }
    }
    (acc.value(), abs)
}

impl Laurent2E1 {
    pub fn alpha(&self, m: i64) -> (C64, f64) {
        let lq = self.lq;
        bilateral(|n| self.split.coefficients_scaled(n, (n * m) as f64 * lq, C64::new(0.0, 0.0)).0)
    }

    pub fn beta(&self, m: i64) -> (C64, f64) {
        let lq = self.lq;
        bilateral(|n| self.split.coefficients_scaled(n, C64::new(0.0, 0.0), (n * (m - 1)) as f64 * lq).1)
    }

    /// `c_0, …, c_{n_max}` with `c_0 = 1`.
    pub fn coefficients(&self, n_max: usize) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(1.0, 0.0)];
        for m in 1..=n_max as i64 {
            let (al, al_abs) = self.alpha(m);
            if al.norm() <= 1e-13 * al_abs {
                return Err(Error::DegenerateParameters(format!("alpha({m}) vanishes")));
            }
            let (be, _) = self.beta(m);
            let prev = *out.last().expect("c_0 present");
            out.push(prev * be / al);
        }
        Ok(out)
    }

    /// `c_{−1}, …, c_{−n_max}`.
    pub fn negative_coefficients(&self, n_max: usize) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(n_max);
        let mut cur = self.d0;
        for m in 0..n_max as i64 {
            if m > 0 {
                let (be, be_abs) = self.beta(-m);
                if be.norm() <= 1e-13 * be_abs {
                    return Err(Error::DegenerateParameters(format!("beta({}) vanishes", -m)));
                }
                cur = cur * self.alpha(-m).0 / be;
            }
            out.push(cur);
        }
        Ok(out)
    }
}

pub fn laurent_recurrence_2e1(a: C64, b: C64, c: C64, q: C64, p: C64) -> Result<Laurent2E1> {
    if [a, b, c, q].iter().any(|x| x.norm() == 0.0) {
        return Err(Error::ZeroArgument);
    }
    let split = SplitCoefficients::new(a, b, c, q, p)?;
    let mut lr = Laurent2E1 { split, lq: q.ln(), d0: C64::new(0.0, 0.0) };
    let (al0, al0_abs) = lr.alpha(0);
    let (be0, be0_abs) = lr.beta(0);
    if be0.norm() <= 1e-13 * be0_abs {
        return Err(Error::DegenerateParameters("beta(0) vanishes".into()));
    }
    if al0.norm() > 1e-12 * al0_abs {
        lr.d0 = al0 / be0;
    }
    Ok(lr)
}

/// Applies `θ(aq^δ;p) = (p;p)^{-1}_∞ Σ p^{n(n−1)/2}(−a)ⁿ q^{nδ}` to `z^μ`,
/// letting `q^{nδ}` act by its eigenvalue `e^{nμ log q}`.
pub fn apply_theta_operator(a: C64, q: C64, p: C64, mu: C64, z: C64, trunc: OperatorTruncation) -> Result<ResidualReport> {
    trunc.validate()?;
    if z.norm() == 0.0 || (z.im == 0.0 && z.re < 0.0) {
        return Err(Error::BranchCut);
    }
    if (q.norm() - 1.0).abs() < 1e-14 {
        return Err(Error::ConstraintViolation("kernel check needs |q| != 1".into()));
    }
    let lp = p.ln();
    let lq = q.ln();
    let lma = (-a).ln();
    let lz = z.ln();
    let inv_pp = qpochhammer_inf(p, p)?.inv();
    let max = trunc.n_range as i64;
    let all: Vec<C64> = (-max..=max)
        .map(|n| inv_pp * (ln_p_binom(n, lp) + n as f64 * lma + mu * (n as f64 * lq + lz)).exp())
        .collect();
    Ok(report_from_summands(&all, trunc.n_range))
}

/// `θ(aq^δ;p) z^μ` with `μ = −log(apᵏ)/log q`, which lies in the kernel.
pub fn kernel_check(a: C64, q: C64, p: C64, k: i64, z: C64, trunc: OperatorTruncation) -> Result<ResidualReport> {
    if a.norm() == 0.0 || p.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let mu = -(a.ln() + k as f64 * p.ln()) / q.ln();
    apply_theta_operator(a, q, p, mu, z, trunc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn truncation_invariants() {
        assert!(OperatorTruncation::new(0, 20).is_err());
        assert!(OperatorTruncation::new(8, 17).is_err());
        assert!(OperatorTruncation::new(8, 18).is_ok());
    }

    #[test]
    fn window_schedule() {
        assert_eq!(window_sizes(32), vec![4, 8, 16, 32]);
        assert_eq!(window_sizes(20), vec![4, 8, 16, 20]);
        assert_eq!(window_sizes(2), vec![2]);
    }

    #[test]
    fn kernel_simple_case() {
        // a = q, k = 0: f(z) = 1/z
        let q = c(0.5, 0.1);
        let rep = kernel_check(q, q, c(0.1, 0.05), 0, c(0.7, 0.3), OperatorTruncation::new(16, 30).unwrap()).unwrap();
        assert!(rep.normalized() < 1e-8);
        assert!(kernel_check(q, q, c(0.1, 0.0), 0, c(-1.0, 0.0), OperatorTruncation::default()).is_err());
    }

    #[test]
    fn basic_equation_for_2phi1() {
        let (a, b, cc, q) = (c(0.3, 0.2), c(-0.4, 0.1), c(0.5, -0.3), c(0.6, 0.2));
        let rep = residual_basic_eq(&[a, b], &[cc], q, c(0.3, -0.2), 2000).unwrap();
        assert!(rep.normalized() < 1e-13);
    }
}
