//! Radii of convergence of balanced series with `q` on a line `(N+Mτ)ℝ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::fnm::f_nm;
use crate::line::{LineSpec, QSpec, ON_LINE_TOL};
use crate::series::{check_balancing, SeriesSpec, VwpSpec};
use crate::{frac, rel_close, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    Balanced,
    Singular,
    Wellpoised,
    Vwp,
    VwpLineIntegral,
    RationalChi,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub log_rc_inv: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub method: RadiusMethod,
    /// `(m, average after m terms)` checkpoints for empirical estimates.
    pub empirical_trace: Option<Vec<(u64, f64)>>,
}

impl RadiusReport {
    pub fn rc(&self) -> f64 {
        (-self.log_rc_inv).exp()
    }
}

/// Fractional line position of `x`; `OnLine` if it is an integer.
fn frac_position(line: &LineSpec, x: C64, label: &str) -> Result<f64> {
    let pos = line.position(x)?;
    if (pos - pos.round()).abs() < ON_LINE_TOL {
        return Err(Error::OnLine(label.to_string()));
    }
    Ok(frac(pos))
}

fn bernoulli_gap(alpha: f64, beta: f64) -> f64 {
    alpha * (alpha - 1.0) - beta * (beta - 1.0)
}

fn check_q_on_line(spec: &SeriesSpec, line: &LineSpec) -> Result<()> {
    if !line.is_on_line(spec.q)? {
        return Err(Error::ConstraintViolation("q does not lie on the line (N + M tau)R".into()));
    }
    if !rel_close(spec.nome.p(), line.nome.p(), 1e-14) {
        return Err(Error::ConstraintViolation("series and line use different nomes".into()));
    }
    Ok(())
}

fn check_balanced(spec: &SeriesSpec) -> Result<()> {
    let bal = check_balancing(spec, 1e-10)?;
    if !bal.balanced {
        return Err(Error::Unbalanced(bal.deviation));
    }
    Ok(())
}

/// Shared sum over `(t_k, w_k)` pairs. Pairs whose `w` is `q` itself carry
/// `α = 0` by construction.
fn assemble(pairs: &[(C64, C64, bool)], line: &LineSpec, method: RadiusMethod) -> Result<RadiusReport> {
    let line = line.reduced();
    let im_tau = line.im_tau();
    let scale = PI * im_tau / line.w().norm_sqr();
    let mut total = 0.0;
    let mut alpha = Vec::with_capacity(pairs.len());
    let mut beta = Vec::with_capacity(pairs.len());
    for (k, &(t, w, w_is_q)) in pairs.iter().enumerate() {
        let a = if w_is_q { 0.0 } else { frac_position(&line, w, &format!("w[{k}]"))? };
        let b = frac_position(&line, t, &format!("t[{k}]"))?;
        let (lt, lw) = (t.norm().ln(), w.norm().ln());
        total += (lt * lt - lw * lw) / (4.0 * PI * im_tau) + scale * bernoulli_gap(a, b);
        alpha.push(a);
        beta.push(b);
    }
    Ok(RadiusReport { log_rc_inv: total, alpha, beta, method, empirical_trace: None })
}

/// `log r_c⁻¹` of a balanced series with `t₀ = q`:
/// `Σ_k (log²|t_k| − log²|w_k|)/(4π Im τ) + π Im τ/|N+Mτ|² (α_k(α_k−1) − β_k(β_k−1))`.
/// The line is reduced by `gcd(N, M)` first.
pub fn radius_balanced(spec: &SeriesSpec, line: &LineSpec) -> Result<RadiusReport> {
    if spec.s() != spec.r() + 1 {
        return Err(Error::ConstraintViolation("need s = r + 1".into()));
    }
    if !rel_close(spec.t[0], spec.q, 1e-12) {
        return Err(Error::ConstraintViolation("need t0 = q".into()));
    }
    check_q_on_line(spec, line)?;
    check_balanced(spec)?;
    let pairs: Vec<_> = spec.t[1..].iter().zip(&spec.w).map(|(&t, &w)| (t, w, false)).collect();
    assemble(&pairs, line, RadiusMethod::Balanced)
}

/// General balanced case: the sum runs over `k = 0..r` with `w₀ = q`, `α₀ = 0`.
pub fn radius_singular(spec: &SeriesSpec, line: &LineSpec) -> Result<RadiusReport> {
    if spec.s() != spec.r() + 1 {
        return Err(Error::ConstraintViolation("need s = r + 1".into()));
    }
    check_q_on_line(spec, line)?;
    check_balanced(spec)?;
    let mut pairs = vec![(spec.t[0], spec.q, true)];
    if rel_close(spec.t[0], spec.q, 1e-12) {
        // t₀ = q: the k = 0 pair contributes exactly zero
        pairs.clear();
    }
    pairs.extend(spec.t[1..].iter().zip(&spec.w).map(|(&t, &w)| (t, w, false)));
    let mut rep = assemble(&pairs, line, RadiusMethod::Singular)?;
    if rel_close(spec.t[0], spec.q, 1e-12) {
        rep.alpha.insert(0, 0.0);
        rep.beta.insert(0, 0.0);
    }
    Ok(rep)
}

/// Coordinates `t_j = e^{h_j·2πiχ(N+Mτ) + φ_j·2π Im τ/(N+Mτ̄)}` of a
/// well-poised series, and likewise `(h̃, φ̃)` for the `w_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WpParametrization {
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    pub h_tilde: Vec<f64>,
    pub phi_tilde: Vec<f64>,
}

impl WpParametrization {
    pub fn validate(&self) -> Result<()> {
        let r = self.h.len();
        if r == 0 || self.phi.len() != r || self.h_tilde.len() != r || self.phi_tilde.len() != r {
            return Err(Error::ConstraintViolation("parametrization vectors must share a positive length".into()));
        }
        let tol = 1e-12;
        let c_phi = self.phi[0] + self.phi_tilde[0];
        let c_h = self.h[0] + self.h_tilde[0];
        for i in 0..r {
            if (self.phi[i] + self.phi_tilde[i] - c_phi).abs() > tol || (self.h[i] + self.h_tilde[i] - c_h).abs() > tol {
                return Err(Error::ConstraintViolation("phi + phi~ and h + h~ must be constant".into()));
            }
        }
        let s = |v: &[f64]| v.iter().sum::<f64>();
        if (s(&self.phi) - s(&self.phi_tilde)).abs() > tol * r as f64 || (s(&self.h) - s(&self.h_tilde)).abs() > tol * r as f64 {
            return Err(Error::ConstraintViolation("sum phi = sum phi~ and sum h = sum h~ required".into()));
        }
        Ok(())
    }

    /// Parameters `(t, w)` for the given base.
    pub fn to_params(&self, qspec: &QSpec) -> (Vec<C64>, Vec<C64>) {
        let t = self.h.iter().zip(&self.phi).map(|(&h, &f)| qspec.from_hphi(h, f)).collect();
        let w = self.h_tilde.iter().zip(&self.phi_tilde).map(|(&h, &f)| qspec.from_hphi(h, f)).collect();
        (t, w)
    }
}

/// `log r_c⁻¹ = π Im τ/|N+Mτ|² Σ_k ({φ̃_k} − {φ_k})({φ̃_k} + {φ_k} − 1)`.
pub fn radius_wellpoised(wp: &WpParametrization, line: &LineSpec) -> Result<RadiusReport> {
    wp.validate()?;
    let scale = PI * line.im_tau() / line.w().norm_sqr();
    let alpha: Vec<f64> = wp.phi_tilde.iter().map(|&x| frac(x)).collect();
    let beta: Vec<f64> = wp.phi.iter().map(|&x| frac(x)).collect();
    let log_rc_inv = scale * alpha.iter().zip(&beta).map(|(&a, &b)| (a - b) * (a + b - 1.0)).sum::<f64>();
    Ok(RadiusReport { log_rc_inv, alpha, beta, method: RadiusMethod::Wellpoised, empirical_trace: None })
}

/// `(επ Im τ/|N+Mτ|²)(2λ + (2/r − 1)(2k + 4 − r))` with `ε = (k+1)/(r/2 + λ)`.
pub fn rc_gt1_log_rc_inv(r: usize, k: usize, lambda: f64, line: &LineSpec) -> f64 {
    let rf = r as f64;
    let eps = (k as f64 + 1.0) / (rf / 2.0 + lambda);
    eps * PI * line.im_tau() / line.w().norm_sqr() * (2.0 * lambda + (2.0 / rf - 1.0) * (2.0 * k as f64 + 4.0 - rf))
}

/// Well-poised balanced series built from
/// `φ₁ = 1 + εr/2`, `φ_{j≥2} = 1 − ε`, `φ̃_j = φ₀ − φ_j` with `ε = (k+1)/(r/2+λ)`.
/// `h` supplies the free coordinates `h_j`; `h̃_j = (2/r)Σh − h_j`.
pub fn construct_wp_example(
    r: usize,
    k: usize,
    lambda: f64,
    qspec: &QSpec,
    h: &[f64],
) -> Result<(SeriesSpec, WpParametrization, RadiusReport)> {
    let rf = r as f64;
    if r <= 2 {
        return Err(Error::ConstraintViolation("need r > 2".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0 - 2.0 / rf) {
        return Err(Error::ConstraintViolation("need 0 < lambda < 1 - 2/r".into()));
    }
    if 2 * (k + 1) > r {
        return Err(Error::ConstraintViolation("need k + 1 <= r/2".into()));
    }
    if h.len() != r {
        return Err(Error::ConstraintViolation(format!("need {r} h values")));
    }
    let eps = (k as f64 + 1.0) / (rf / 2.0 + lambda);
    let mut phi = vec![1.0 - eps; r];
    phi[0] = 1.0 + eps * rf / 2.0;
    let phi0 = 2.0 / rf * phi.iter().sum::<f64>();
    let phi_tilde = phi.iter().map(|&f| phi0 - f).collect();
    let h0 = 2.0 / rf * h.iter().sum::<f64>();
    let h_tilde = h.iter().map(|&x| h0 - x).collect();
    let wp = WpParametrization { h: h.to_vec(), phi, h_tilde, phi_tilde };
    let (t, w) = wp.to_params(qspec);
    let q = qspec.q();
    let mut all_t = vec![q];
    all_t.extend(t);
    let spec = SeriesSpec::new(all_t, w, q, qspec.line.nome)?;
    let report = radius_wellpoised(&wp, &qspec.line)?;
    Ok((spec, wp, report))
}

fn vwp_pairs(spec: &VwpSpec) -> Vec<(C64, C64)> {
    spec.params().into_iter().map(|t| (t, spec.q * spec.t0 / t)).collect()
}

fn check_vwp_line(spec: &VwpSpec, line: &LineSpec) -> Result<()> {
    if line.d() != 1 {
        return Err(Error::ConstraintViolation("need gcd(N, M) = 1".into()));
    }
    if !line.is_on_line(spec.q)? {
        return Err(Error::ConstraintViolation("q does not lie on the line (N + M tau)R".into()));
    }
    Ok(())
}

/// `log r_c⁻¹ = M log|q| + π Im τ/|N+Mτ|² Σ_{k=0}^{r−4} ({φ̃_k} − {φ_k})({φ̃_k} + {φ_k} − 1)`
/// with `w_k = q t₀/t_k` and `φ̃₀ = 0`.
pub fn radius_vwp(spec: &VwpSpec, line: &LineSpec) -> Result<RadiusReport> {
    check_vwp_line(spec, line)?;
    let scale = PI * line.im_tau() / line.w().norm_sqr();
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut total = line.m as f64 * spec.q.norm().ln();
    for (k, (t, w)) in vwp_pairs(spec).into_iter().enumerate() {
        let a = if k == 0 { 0.0 } else { frac_position(line, w, &format!("w[{k}]"))? };
        let b = frac_position(line, t, &format!("t[{k}]"))?;
        total += scale * (a - b) * (a + b - 1.0);
        alpha.push(a);
        beta.push(b);
    }
    Ok(RadiusReport { log_rc_inv: total, alpha, beta, method: RadiusMethod::Vwp, empirical_trace: None })
}

/// Line integral of `log|H|` for the very-well-poised ratio, assembled from
/// `F` values. The quadratic factor `θ(t₀u²)` is integrated along the doubled
/// line, i.e. with `F_{2N,2M}`.
pub fn vwp_line_integral(spec: &VwpSpec, line: &LineSpec) -> Result<RadiusReport> {
    check_vwp_line(spec, line)?;
    let doubled = LineSpec { n: 2 * line.n, m: 2 * line.m, nome: line.nome };
    let q = spec.q;
    let mut total = q.norm().ln() + f_nm(q * q * spec.t0, &doubled)? - f_nm(spec.t0, &doubled)?;
    for (t, w) in vwp_pairs(spec) {
        total += f_nm(t, line)? - f_nm(w, line)?;
    }
    Ok(RadiusReport {
        log_rc_inv: total,
        alpha: Vec::new(),
        beta: Vec::new(),
        method: RadiusMethod::VwpLineIntegral,
        empirical_trace: None,
    })
}
