//! Elliptic hypergeometric series
//! `ₛEᵣ(t;w;q,p;z) = Σ_n θ(t₀,…,t_{s-1};p;q)_n / θ(q,w₁,…,w_r;p;q)_n zⁿ`
//! and the very-well-poised series `V`.

use serde::{Deserialize, Serialize};

use crate::line::{gcd, QSpec};
use crate::theta::{ln_theta, on_p_lattice, theta, theta_envelope, Nome};
use crate::sum::ComplexSum;
use crate::{rel_close, Error, Result, C64};

/// `|θ(x)| / envelope` below which a denominator counts as a pole.
pub const POLE_GUARD: f64 = 1e-12;

/// Consecutive sub-tolerance terms required before declaring convergence.
const TAIL_RUN: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub t: Vec<C64>,
    pub w: Vec<C64>,
    pub q: C64,
    pub nome: Nome,
}

impl SeriesSpec {
    pub fn new(t: Vec<C64>, w: Vec<C64>, q: C64, nome: Nome) -> Result<Self> {
        if q.norm() == 0.0 || t.iter().chain(w.iter()).any(|x| x.norm() == 0.0) {
            return Err(Error::ZeroArgument);
        }
        Ok(Self { t, w, q, nome })
    }

    pub fn p(&self) -> C64 {
        self.nome.p()
    }

    /// Number of lower parameters besides `q`.
    pub fn r(&self) -> usize {
        self.w.len()
    }

    pub fn s(&self) -> usize {
        self.t.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSumResult {
    pub value: C64,
    pub terms_used: usize,
    pub last_term_magnitude: f64,
    pub terminated: bool,
    pub converged: bool,
    /// `ln|c_{n+1} z^{n+1} / (c_n z^n)|` for each step taken.
    pub term_log_ratios: Vec<f64>,
}

fn guarded_theta(x: C64, p: C64, label: &str, n: i64) -> Result<C64> {
    let th = theta(x, p)?;
    if th.norm() == 0.0 || th.norm() < POLE_GUARD * theta_envelope(x, p)? {
        return Err(Error::PoleHit { factor: label.to_string(), n });
    }
    Ok(th)
}

/// `h(u) = ∏θ(t_m u) / (θ(qu) ∏θ(w_k u))`; `n` only labels pole errors.
/// An upper parameter equal to `q` cancels `θ(qu)` identically, which keeps
/// the ratio finite when `qu` falls on `p^ℤ`.
pub fn term_ratio_at(spec: &SeriesSpec, u: C64, n: i64) -> Result<C64> {
    let p = spec.p();
    let cancel = spec.t.iter().position(|&tm| rel_close(tm, spec.q, 1e-14));
    let mut num = C64::new(1.0, 0.0);
    for (m, &tm) in spec.t.iter().enumerate() {
        if Some(m) != cancel {
            num *= theta(tm * u, p)?;
        }
    }
    if num.norm() == 0.0 {
        return Ok(num);
    }
    let mut den = match cancel {
        Some(_) => C64::new(1.0, 0.0),
        None => guarded_theta(spec.q * u, p, "q", n)?,
    };
    for (k, &wk) in spec.w.iter().enumerate() {
        den *= guarded_theta(wk * u, p, &format!("w[{k}]"), n)?;
    }
    let h = num / den;
    if h.is_finite() || p.norm() == 0.0 {
        return Ok(h);
    }
    // far outside the unit annulus the factors overflow separately while
    // their quotient stays moderate
    let mut l = ComplexSum::new();
    for (m, &tm) in spec.t.iter().enumerate() {
        if Some(m) != cancel {
            l.add(ln_theta(tm * u, p)?);
        }
    }
    if cancel.is_none() {
        l.add(-ln_theta(spec.q * u, p)?);
    }
    for &wk in &spec.w {
        l.add(-ln_theta(wk * u, p)?);
    }
    Ok(l.value().exp())
}

/// `c_{n+1}/c_n = h(qⁿ)`.
pub fn term_ratio_h(spec: &SeriesSpec, n: i64) -> Result<C64> {
    term_ratio_at(spec, spec.q.powi(n as i32), n)
}

/// Terms below this magnitude no longer change a sum of order one.
const UNDERFLOW_MAG: f64 = 1e-280;

/// Runs the partial sums; `ratio(n)` yields `c_{n+1}/c_n`, or `None` when the
/// series terminates exactly.
fn accumulate<F>(mut ratio: F, z: C64, max_terms: usize, tail_tol: f64) -> Result<PartialSumResult>
where
    F: FnMut(i64) -> Result<Option<C64>>,
{
    let mut term = C64::new(1.0, 0.0);
    let mut acc = ComplexSum::new();
    acc.add(term);
    let mut out = PartialSumResult {
        value: term,
        terms_used: 1,
        last_term_magnitude: 1.0,
        terminated: false,
        converged: false,
        term_log_ratios: Vec::new(),
    };
    let mut prev = 1.0;
    let mut run = 0;
    let mut n = 0i64;
    while out.terms_used < max_terms {
        let Some(h) = ratio(n)? else {
            out.terminated = true;
            out.converged = true;
            break;
        };
        if !h.is_finite() {
            return Err(Error::NotConverged(format!("term ratio not finite at n = {n}")));
        }
        let step = h * z;
        let next = term * step;
        if next.norm() == 0.0 && term.norm() < UNDERFLOW_MAG {
            // remaining terms are below the smallest double
            out.converged = true;
            break;
        }
        if !next.is_finite() {
            // diverging terms overflowed; the partial sum stays meaningful
            break;
        }
        out.term_log_ratios.push(step.norm().ln());
        term = next;
        acc.add(term);
        out.terms_used += 1;
        let mag = term.norm();
        out.last_term_magnitude = mag;
        if mag < tail_tol && mag < prev {
            run += 1;
        } else {
            run = 0;
        }
        if run >= TAIL_RUN {
            out.converged = true;
            break;
        }
        prev = mag;
        n += 1;
    }
    out.value = acc.value();
    Ok(out)
}

/// Whether the term ratio is invariant under `u → pu` (balanced `_{r+1}E_r`).
fn ratio_is_elliptic(spec: &SeriesSpec) -> bool {
    if spec.nome.is_degenerate() || spec.s() != spec.r() + 1 {
        return false;
    }
    let lhs: C64 = spec.t.iter().product();
    let rhs: C64 = spec.q * spec.w.iter().product::<C64>();
    rel_close(lhs, rhs, 1e-13)
}

/// `|θ(x)|` grows like `exp(ln²|x| / 2|ln p|)` away from the unit annulus;
/// theta factors are evaluated at `qⁿ` directly while that stays below
/// `exp(DIRECT_LOG_MAG)`.
const DIRECT_LOG_MAG: f64 = 500.0;

fn nonzero(h: C64) -> Option<C64> {
    (h.norm() != 0.0).then_some(h)
}

/// Partial sums of `ₛEᵣ(z)`, stopping after five consecutive non-increasing
/// terms below `tail_tol`, on termination, or at `max_terms`.
///
/// `qⁿ` is tracked as `pᵏu` with `|p| < |u| ≤ 1`. Balanced series use `u`
/// alone, their ratio being `p`-periodic; otherwise `qⁿ` is used directly
/// while it is representable and beyond that `h(pᵏu)` follows from `h(u)`
/// and the multiplier `h(px)/h(x) = (−x)^{r+1−s} q∏w/∏t`.
pub fn eval_ser(spec: &SeriesSpec, z: C64, max_terms: usize, tail_tol: f64) -> Result<PartialSumResult> {
    if spec.nome.is_degenerate() {
        let mut u = C64::new(1.0, 0.0);
        return accumulate(
            |n| {
                let h = term_ratio_at(spec, u, n)?;
                u *= spec.q;
                Ok(nonzero(h))
            },
            z,
            max_terms,
            tail_tol,
        );
    }
    let elliptic = ratio_is_elliptic(spec);
    let p = spec.p();
    let (lp, pn) = (p.ln(), p.norm());
    let excess = (spec.r() + 1) as f64 - spec.s() as f64;
    let ln_c = spec.q.ln() + spec.w.iter().map(|w| w.ln()).sum::<C64>() - spec.t.iter().map(|t| t.ln()).sum::<C64>();
    let mut u = C64::new(1.0, 0.0);
    let mut k = 0i64;
    accumulate(
        |n| {
            let kf = k as f64;
            let ln_abs = u.norm().ln() + kf * lp.re;
            let h = if elliptic {
                term_ratio_at(spec, u, n)?
            } else if ln_abs * ln_abs < 2.0 * DIRECT_LOG_MAG * lp.re.abs() {
                term_ratio_at(spec, u * p.powi(k as i32), n)?
            } else {
                let base = term_ratio_at(spec, u, n)?;
                if base.norm() == 0.0 {
                    base
                } else {
                    let l = excess * (kf * (-u).ln() + 0.5 * kf * (kf - 1.0) * lp) + kf * ln_c;
                    let h = base * l.exp();
                    if h.norm() == 0.0 {
                        // the ratio underflowed without the series terminating
                        C64::new(f64::MIN_POSITIVE, 0.0)
                    } else {
                        h
                    }
                }
            };
            u *= spec.q;
            while u.norm() <= pn {
                u /= p;
                k += 1;
            }
            while u.norm() > 1.0 {
                u *= p;
                k -= 1;
            }
            Ok(nonzero(h))
        },
        z,
        max_terms,
        tail_tol,
    )
}

/// Basic hypergeometric `ₛφᵣ` in the form
/// `Σ (t₀,…;q)_n / (q,w₁,…;q)_n zⁿ` (the `p = 0` limit of `ₛEᵣ`).
pub fn eval_qhyper(t: &[C64], w: &[C64], q: C64, z: C64, max_terms: usize, tail_tol: f64) -> Result<PartialSumResult> {
    let mut u = C64::new(1.0, 0.0);
    accumulate(
        |n| {
            let mut num = C64::new(1.0, 0.0);
            for &tm in t {
                let f = 1.0 - tm * u;
                num *= if f.norm() < 1e-13 { C64::new(0.0, 0.0) } else { f };
            }
            if num.norm() == 0.0 {
                return Ok(None);
            }
            let mut den = 1.0 - q * u;
            if den.norm() < 1e-14 {
                return Err(Error::PoleHit { factor: "q".into(), n });
            }
            for (k, &wk) in w.iter().enumerate() {
                let f = 1.0 - wk * u;
                if f.norm() < 1e-14 {
                    return Err(Error::PoleHit { factor: format!("w[{k}]"), n });
                }
                den *= f;
            }
            u *= q;
            Ok(Some(num / den))
        },
        z,
        max_terms,
        tail_tol,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    /// `|∏t - q∏w| / |q∏w|`.
    pub deviation: f64,
    pub balanced: bool,
    /// `t₁w₁ = … = t_r w_r`.
    pub well_poised: bool,
    /// Well-poised with common product `q t₀` plus the extra parameters
    /// `±q√t₀, q√(t₀/p), qp√(t₀/p)` (up to sign).
    pub very_well_poised: bool,
}

/// Classify an `ₛEᵣ` with `s = r + 1`.
pub fn check_balancing(spec: &SeriesSpec, tol: f64) -> Result<BalanceReport> {
    if spec.s() != spec.r() + 1 {
        return Err(Error::ConstraintViolation("balancing needs s = r + 1".into()));
    }
    let lhs: C64 = spec.t.iter().product();
    let rhs: C64 = spec.q * spec.w.iter().product::<C64>();
    let deviation = (lhs - rhs).norm() / rhs.norm();
    let products: Vec<C64> = spec.w.iter().zip(&spec.t[1..]).map(|(&w, &t)| w * t).collect();
    let well_poised = products.iter().all(|&x| rel_close(x, products[0], tol));
    let mut very_well_poised = false;
    if well_poised && rel_close(products[0], spec.q * spec.t[0], tol) && !spec.nome.is_degenerate() {
        let p = spec.p();
        let q2t0 = spec.q * spec.q * spec.t[0];
        let sq: Vec<C64> = spec.t[1..].iter().map(|x| x * x).collect();
        let find = |target: C64| sq.iter().position(|&x| rel_close(x, target, tol));
        let pair = sq
            .iter()
            .enumerate()
            .filter(|(_, &x)| rel_close(x, q2t0, tol))
            .count()
            >= 2;
        very_well_poised = pair && find(q2t0 / p).is_some() && find(q2t0 * p).is_some();
    }
    Ok(BalanceReport { deviation, balanced: deviation < tol, well_poised, very_well_poised })
}

/// The very-well-poised series
/// `V = Σ θ(t₀q^{2n})/θ(t₀) ∏_{m=0}^{r-4} θ(t_m)_n/θ(qt₀/t_m)_n qⁿ`
/// with `t_0 = t₀` and `t` holding `t₁,…,t_{r-4}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VwpSpec {
    pub t0: C64,
    pub t: Vec<C64>,
    pub nu: C64,
    pub q: C64,
    pub nome: Nome,
}

fn principal_pow(x: C64, e: f64) -> C64 {
    (e * x.ln()).exp()
}

impl VwpSpec {
    pub fn new(t0: C64, t: Vec<C64>, nu: C64, q: C64, nome: Nome) -> Result<Self> {
        let spec = Self { t0, t, nu, q, nome };
        spec.validate()?;
        Ok(spec)
    }

    /// Completes `t_free` (the first `r - 5` parameters) with the one value
    /// that satisfies the balancing condition.
    pub fn balanced(t0: C64, t_free: Vec<C64>, nu: C64, q: C64, nome: Nome) -> Result<Self> {
        let r = t_free.len() + 5;
        let target = nu * principal_pow(t0, (r as f64 - 5.0) / 2.0) * principal_pow(q, (r as f64 - 7.0) / 2.0);
        let prod: C64 = t_free.iter().product();
        if prod.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        let mut t = t_free;
        t.push(target / prod);
        Self::new(t0, t, nu, q, nome)
    }

    pub fn r(&self) -> usize {
        self.t.len() + 4
    }

    fn validate(&self) -> Result<()> {
        if self.t.is_empty() {
            return Err(Error::ConstraintViolation("need r >= 5".into()));
        }
        if self.t0.norm() == 0.0 || self.q.norm() == 0.0 || self.t.iter().any(|x| x.norm() == 0.0) {
            return Err(Error::ZeroArgument);
        }
        let r = self.r();
        if r % 2 == 1 && !rel_close(self.nu, C64::new(1.0, 0.0), 1e-12) {
            return Err(Error::ConstraintViolation("nu must be 1 for odd r".into()));
        }
        if r % 2 == 0 && !rel_close(self.nu * self.nu, C64::new(1.0, 0.0), 1e-12) {
            return Err(Error::ConstraintViolation("nu must be +1 or -1".into()));
        }
        let prod: C64 = self.t.iter().product();
        let target = self.nu
            * principal_pow(self.t0, (r as f64 - 5.0) / 2.0)
            * principal_pow(self.q, (r as f64 - 7.0) / 2.0);
        let dev = (prod - target).norm() / target.norm();
        if dev > 1e-12 {
            return Err(Error::Unbalanced(dev));
        }
        Ok(())
    }

    /// All parameters `t₀, t₁, …, t_{r-4}`.
    pub fn params(&self) -> Vec<C64> {
        std::iter::once(self.t0).chain(self.t.iter().copied()).collect()
    }

    /// The same series written as `_{r+1}E_r` at `z = -1`.
    pub fn as_series(&self) -> Result<SeriesSpec> {
        let p = self.nome.p();
        if self.nome.is_degenerate() {
            return Err(Error::ConstraintViolation("needs p != 0".into()));
        }
        let sq = self.t0.sqrt();
        let s = (self.t0 / p).sqrt();
        let mut t = self.params();
        t.extend([self.q * sq, -self.q * sq, self.q * s, -self.q * p * s]);
        let c = self.q * self.t0;
        let w = t[1..].iter().map(|&x| c / x).collect();
        SeriesSpec::new(t, w, self.q, self.nome)
    }

    /// Ratio of consecutive terms `V_{n+1}/V_n`.
    pub fn term_ratio(&self, n: i64) -> Result<C64> {
        self.term_ratio_at(self.q.powi(n as i32), n)
    }

    /// The ratio as a function of `u = qⁿ`; balancing makes it invariant under
    /// `u → pu`. `n` only labels pole errors.
    pub fn term_ratio_at(&self, u: C64, n: i64) -> Result<C64> {
        let p = self.nome.p();
        let mut num = theta(self.t0 * u * u * self.q * self.q, p)?;
        let mut den = guarded_theta(self.t0 * u * u, p, "t0 q^{2n}", n)?;
        for (m, tm) in self.params().into_iter().enumerate() {
            num *= theta(tm * u, p)?;
            den *= guarded_theta(self.q * self.t0 / tm * u, p, &format!("q t0/t[{m}]"), n)?;
        }
        if num.norm() == 0.0 {
            return Ok(num);
        }
        Ok(num / den * self.q)
    }

    /// The first `count` terms.
    pub fn terms(&self, count: usize) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(count);
        let mut term = C64::new(1.0, 0.0);
        let mut u = C64::new(1.0, 0.0);
        for n in 0..count {
            out.push(term);
            term *= self.term_ratio_at(u, n as i64)?;
            u = self.step(u);
        }
        Ok(out)
    }

    /// `u → qu`, reduced into `|p| < |u| ≤ 1` when `p ≠ 0`.
    fn step(&self, u: C64) -> C64 {
        let p = self.nome.p();
        let mut u = u * self.q;
        if !self.nome.is_degenerate() {
            while u.norm() <= p.norm() {
                u /= p;
            }
            while u.norm() > 1.0 {
                u *= p;
            }
        }
        u
    }
}

pub fn eval_vwp(spec: &VwpSpec, max_terms: usize, tail_tol: f64) -> Result<PartialSumResult> {
    let mut u = C64::new(1.0, 0.0);
    accumulate(
        |n| {
            let h = spec.term_ratio_at(u, n)?;
            u = spec.step(u);
            Ok(nonzero(h))
        },
        C64::new(1.0, 0.0),
        max_terms,
        tail_tol,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalChiSum {
    pub value: C64,
    /// `R = ∏_{l<b} H(q^l)`.
    pub period_product: C64,
    /// `|R|^{-1/b}`.
    pub radius: f64,
}

/// Closed form `Σ_{l<b} c_l z^l / (1 - R z^b)` of a balanced series with
/// `t₀ = q` and rational `χ = a/b`, where `c_{n+b} = R c_n`.
pub fn rational_chi_sum(spec: &SeriesSpec, qspec: &QSpec, a: i64, b: i64, z: C64) -> Result<RationalChiSum> {
    if b <= 0 || gcd(a, b) != 1 {
        return Err(Error::ConstraintViolation("need b > 0 and gcd(a, b) = 1".into()));
    }
    if (qspec.chi - a as f64 / b as f64).abs() > 1e-14 {
        return Err(Error::ConstraintViolation("chi differs from a/b".into()));
    }
    if !rel_close(spec.q, qspec.q(), 1e-12) {
        return Err(Error::ConstraintViolation("series base differs from the line base".into()));
    }
    if spec.t.is_empty() || !rel_close(spec.t[0], spec.q, 1e-12) {
        return Err(Error::ConstraintViolation("need t0 = q".into()));
    }
    let bal = check_balancing(spec, 1e-12)?;
    if !bal.balanced {
        return Err(Error::Unbalanced(bal.deviation));
    }
    let p = spec.p();
    let qb = spec.q.powi(b as i32);
    let pma = p.powi((qspec.line.m * a) as i32);
    if !rel_close(qb, pma, 1e-10) && !on_p_lattice(qb, p) {
        return Err(Error::ConstraintViolation("q^b is not a power of p".into()));
    }
    let mut prefix = Vec::with_capacity(b as usize + 1);
    let mut c = C64::new(1.0, 0.0);
    for l in 0..b {
        prefix.push(c);
        c *= term_ratio_at(spec, qspec.orbit_point(l as u64), l)?;
    }
    let period_product = c;
    let rzb = period_product * z.powi(b as i32);
    if (rzb.norm() - 1.0).abs() <= 1e-10 {
        return Err(Error::OnBoundary);
    }
    if rzb.norm() > 1.0 {
        return Err(Error::OutsideRadius);
    }
    let mut num = ComplexSum::new();
    let mut zl = C64::new(1.0, 0.0);
    for cl in prefix {
        num.add(cl * zl);
        zl *= z;
    }
    Ok(RationalChiSum {
        value: num.value() / (1.0 - rzb),
        period_product,
        radius: period_product.norm().powf(-1.0 / b as f64),
    })
}
