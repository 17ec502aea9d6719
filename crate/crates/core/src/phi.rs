//! The lattice sums
//! `Φ_n(s₁,…,s_r;p) = Σ_{m₁+…+m_r=n} ∏_j p^{m_j(m_j-1)/2} (-s_j)^{m_j}`,
//! i.e. the Fourier coefficients of `∏_j (p;p)_∞ θ(s_j z;p)`.

use serde::{Deserialize, Serialize};

use crate::sum::ComplexSum;
use crate::theta::{qpochhammer_inf, theta, theta_envelope};
use crate::{Error, Result, C64, TWO_PI};

/// Largest number of lattice points a single sum may visit.
const MAX_LATTICE_POINTS: f64 = 2e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiRequest {
    pub s: Vec<C64>,
    pub p: C64,
    pub n: i64,
    pub lattice_radius: usize,
}

fn check(s: &[C64], p: C64) -> Result<()> {
    if !(p.norm() < 1.0) {
        return Err(Error::DivergedModulus(p.norm()));
    }
    if s.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::ZeroArgument);
    }
    Ok(())
}

/// Truncated lattice sum over `|m_j| ≤ radius`. Returns the value and the sum
/// of absolute values of the visited terms.
pub(crate) fn lattice_sum(s: &[C64], p: C64, n: i64, radius: usize) -> (C64, f64) {
    let r = s.len();
    if r == 0 {
        return (C64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0), 1.0);
    }
    let rad = radius as i64;
    let width = 2 * radius + 1;
    let table: Vec<Vec<C64>> = s
        .iter()
        .map(|&sj| {
            (-rad..=rad)
                .map(|m| {
                    let b = (m * (m - 1) / 2) as i32;
                    p.powi(b) * (-sj).powi(m as i32)
                })
                .collect()
        })
        .collect();

    struct Walk<'a> {
        table: &'a [Vec<C64>],
        rad: i64,
        width: usize,
        n: i64,
        acc: ComplexSum,
        abs: f64,
    }

    impl Walk<'_> {
        fn go(&mut self, j: usize, msum: i64, prod: C64) {
            let last = self.table.len() - 1;
            if j == last {
                let m = self.n - msum;
                if m.abs() <= self.rad {
                    let t = prod * self.table[j][(m + self.rad) as usize];
                    self.acc.add(t);
                    self.abs += t.norm();
                }
                return;
            }
            for idx in 0..self.width {
                let f = self.table[j][idx];
                if f.norm() == 0.0 {
                    continue;
                }
                let next = prod * f;
                if next.norm() == 0.0 {
                    continue;
                }
                self.go(j + 1, msum + idx as i64 - self.rad, next);
            }
        }
    }

    let mut walk = Walk { table: &table, rad, width, n, acc: ComplexSum::new(), abs: 0.0 };
    walk.go(0, 0, C64::new(1.0, 0.0));
    (walk.acc.value(), walk.abs)
}

fn agree(a: C64, b: C64, abs_scale: f64) -> bool {
    let d = (a - b).norm();
    d <= 1e-12 * a.norm().max(b.norm()) || d <= 1e-15 * abs_scale
}

/// `Φ_n` at a fixed lattice radius; fails with `NotConverged` if enlarging the
/// radius by two changes the value by more than relative `1e-12`.
pub fn phi_n_lattice(req: &PhiRequest) -> Result<C64> {
    check(&req.s, req.p)?;
    if (req.lattice_radius as i64) < req.n.abs() + 2 {
        return Err(Error::ConstraintViolation("lattice_radius must be at least |n| + 2".into()));
    }
    let (v, _) = lattice_sum(&req.s, req.p, req.n, req.lattice_radius);
    let (v2, abs2) = lattice_sum(&req.s, req.p, req.n, req.lattice_radius + 2);
    if !agree(v, v2, abs2) {
        return Err(Error::NotConverged(format!(
            "lattice radius {} too small for n = {}",
            req.lattice_radius, req.n
        )));
    }
    Ok(v)
}

/// `Φ_n` with the lattice radius doubled from `|n| + 6` until two consecutive
/// evaluations agree.
pub fn phi_n(s: &[C64], p: C64, n: i64) -> Result<C64> {
    check(s, p)?;
    let r = s.len().max(1) as i32;
    let mut radius = n.unsigned_abs() as usize + 6;
    let (mut v, _) = lattice_sum(s, p, n, radius);
    loop {
        let next = 2 * radius;
        if ((2 * next + 1) as f64).powi(r - 1) > MAX_LATTICE_POINTS {
            return Err(Error::NotConverged(format!("lattice sum for n = {n} did not settle")));
        }
        let (v2, abs2) = lattice_sum(s, p, n, next);
        if agree(v, v2, abs2) {
            return Ok(v2);
        }
        v = v2;
        radius = next;
    }
}

/// `∏_j θ(s_j z; p)`.
pub fn theta_product(s: &[C64], z: C64, p: C64) -> Result<C64> {
    s.iter().try_fold(C64::new(1.0, 0.0), |acc, &sj| Ok(acc * theta(sj * z, p)?))
}

/// Closed form of `Φ₀` through a sum over the `r`-th roots of unity, with the
/// primitive root `ζ = e^{2πi/r}`:
///
/// `Φ₀ = (p;p)^r_∞ / (r (p^r;p^r)_∞) · Σ_m ∏_j θ(s_j z ζ^m;p) / θ(-(-z)^r ∏ s_j; p^r)`.
pub fn phi0_closed(s: &[C64], p: C64, z_aux: C64) -> Result<C64> {
    phi0_closed_root(s, p, z_aux, 1)
}

/// As [`phi0_closed`] with `ζ = e^{2πik/r}`; `k` must be coprime to `r`.
pub fn phi0_closed_root(s: &[C64], p: C64, z_aux: C64, k: usize) -> Result<C64> {
    check(s, p)?;
    let r = s.len();
    if r == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if crate::line::gcd(k as i64, r as i64) != 1 {
        return Err(Error::ConstraintViolation("root of unity must be primitive".into()));
    }
    if z_aux.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let zeta = C64::from_polar(1.0, TWO_PI * k as f64 / r as f64);
    let pr = p.powi(r as i32);
    let prod_s: C64 = s.iter().product();
    let arg = -(-z_aux).powi(r as i32) * prod_s;
    let den = theta(arg, pr)?;
    if den.norm() <= 1e-13 * theta_envelope(arg, pr)? {
        return Err(Error::SingularAuxiliary);
    }
    let mut num = ComplexSum::new();
    let mut zm = z_aux;
    for _ in 0..r {
        num.add(theta_product(s, zm, p)?);
        zm *= zeta;
    }
    let pref = qpochhammer_inf(p, p)?.powi(r as i32) / (r as f64 * qpochhammer_inf(pr, pr)?);
    Ok(pref * num.value() / den)
}

/// `Φ₀` from the closed form, rotating the auxiliary variable away from
/// singular choices.
pub fn phi0(s: &[C64], p: C64) -> Result<C64> {
    let mut z = C64::new(1.0, 0.0);
    let rot = C64::from_polar(1.0, 0.37);
    for _ in 0..8 {
        match phi0_closed(s, p, z) {
            Err(Error::SingularAuxiliary) => z *= rot * 1.07,
            other => return other,
        }
    }
    Err(Error::SingularAuxiliary)
}

/// `Φ_n(s) = p^{n(n-1)/2} (-s_j)^n Φ₀(…, s_j p^n, …)`; `j` is zero-based.
pub fn phi_shift(s: &[C64], p: C64, n: i64, j: usize) -> Result<C64> {
    check(s, p)?;
    if j >= s.len() {
        return Err(Error::ConstraintViolation(format!("index {j} out of range")));
    }
    let mut shifted = s.to_vec();
    shifted[j] *= p.powi(n as i32);
    let b = (n * (n - 1) / 2) as i32;
    Ok(p.powi(b) * (-s[j]).powi(n as i32) * phi0(&shifted, p)?)
}
