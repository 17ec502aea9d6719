//! Lines `(N + Mτ)ℝ` in the `τ`-plane and the base `q = e^{2πiχ(N+Mτ)}`.

use serde::{Deserialize, Serialize};

use crate::theta::Nome;
use crate::{frac, Error, Result, C64, TWO_PI};

/// Distance (in the line coordinate) below which a parameter counts as lying
/// on the line.
pub const ON_LINE_TOL: f64 = 1e-9;

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub n: i64,
    pub m: i64,
    pub nome: Nome,
}

impl LineSpec {
    pub fn new(n: i64, m: i64, nome: Nome) -> Result<Self> {
        if n == 0 && m == 0 {
            return Err(Error::ConstraintViolation("(N, M) must not both vanish".into()));
        }
        nome.finite_tau()?;
        Ok(Self { n, m, nome })
    }

    pub fn tau(&self) -> C64 {
        self.nome.tau()
    }

    pub fn im_tau(&self) -> f64 {
        self.nome.tau().im
    }

    /// `N + Mτ`.
    pub fn w(&self) -> C64 {
        self.n as f64 + self.m as f64 * self.tau()
    }

    pub fn d(&self) -> i64 {
        gcd(self.n, self.m)
    }

    /// The primitive line `(N/D, M/D)`.
    pub fn reduced(&self) -> Self {
        let d = self.d();
        Self { n: self.n / d, m: self.m / d, nome: self.nome }
    }

    /// `Re((N+Mτ) log x̄) / (2π Im τ)`; defined modulo `M`.
    pub fn position(&self, x: C64) -> Result<f64> {
        if x.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        Ok((self.w() * x.ln().conj()).re / (TWO_PI * self.im_tau()))
    }

    pub fn is_on_line(&self, x: C64) -> Result<bool> {
        let pos = self.position(x)?;
        Ok((pos - pos.round()).abs() < ON_LINE_TOL)
    }
}

/// `q = e^{2πiχ(N+Mτ)}` with real `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QSpec {
    pub chi: f64,
    pub line: LineSpec,
}

impl QSpec {
    pub fn new(chi: f64, line: LineSpec) -> Result<Self> {
        if !chi.is_finite() {
            return Err(Error::ConstraintViolation("chi must be finite".into()));
        }
        Ok(Self { chi, line })
    }

    pub fn q(&self) -> C64 {
        (C64::i() * TWO_PI * self.chi * self.line.w()).exp()
    }

    pub fn p(&self) -> C64 {
        self.line.nome.p()
    }

    /// Representative of `q^k` modulo `p^ℤ`: `e^{2πi{kχ}(N+Mτ)}`.
    pub fn orbit_point(&self, k: u64) -> C64 {
        let f = frac(k as f64 * self.chi);
        (C64::i() * TWO_PI * f * self.line.w()).exp()
    }

    /// `e^{h·2πiχ(N+Mτ) + φ·2π Im τ/(N+Mτ̄)}`.
    pub fn from_hphi(&self, h: f64, phi: f64) -> C64 {
        (self.hphi_log(h, phi)).exp()
    }

    /// `log` of [`Self::from_hphi`] before exponentiation.
    pub fn hphi_log(&self, h: f64, phi: f64) -> C64 {
        let w = self.line.w();
        h * C64::i() * TWO_PI * self.chi * w + phi * TWO_PI * self.line.im_tau() / w.conj()
    }

    /// Inverse of [`Self::from_hphi`] on the principal branch of `log x`.
    pub fn to_hphi(&self, x: C64) -> Result<(f64, f64)> {
        if x.norm() == 0.0 {
            return Err(Error::ZeroArgument);
        }
        if self.chi == 0.0 {
            return Err(Error::ConstraintViolation("chi = 0 gives no h coordinate".into()));
        }
        self.hphi_from_log(x.ln())
    }

    /// Coordinates `(h, φ)` of a logarithm `l`; exact inverse of [`Self::hphi_log`].
    pub fn hphi_from_log(&self, l: C64) -> Result<(f64, f64)> {
        if self.chi == 0.0 {
            return Err(Error::ConstraintViolation("chi = 0 gives no h coordinate".into()));
        }
        let a = self.hphi_log(1.0, 0.0);
        let b = self.hphi_log(0.0, 1.0);
        let det = a.re * b.im - a.im * b.re;
        let h = (l.re * b.im - l.im * b.re) / det;
        let phi = (a.re * l.im - a.im * l.re) / det;
        Ok((h, phi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qspec() -> QSpec {
        let nome = Nome::from_tau(C64::new(0.1, 0.9)).unwrap();
        QSpec::new(0.3819660112501051, LineSpec::new(2, 1, nome).unwrap()).unwrap()
    }

    #[test]
    fn hphi_round_trip_and_position() {
        let qs = qspec();
        let x = qs.from_hphi(0.17, 0.42);
        let (h, phi) = qs.to_hphi(x).unwrap();
        assert!((h - 0.17).abs() < 1e-12 && (phi - 0.42).abs() < 1e-12);
        let pos = qs.line.position(x).unwrap();
        assert!((frac(pos) - 0.42).abs() < 1e-12);
    }

    #[test]
    fn q_and_orbit_lie_on_line() {
        let qs = qspec();
        assert!(qs.line.is_on_line(qs.q()).unwrap());
        assert!(qs.line.is_on_line(qs.orbit_point(17)).unwrap());
        let direct = qs.q().powi(5);
        let reduced = qs.orbit_point(5);
        // same class modulo p^Z
        let ratio = (direct / reduced).ln() / qs.p().ln();
        assert!((ratio.re - ratio.re.round()).abs() < 1e-10);
    }

    #[test]
    fn gcd_reduction() {
        assert_eq!(gcd(-6, 4), 2);
        let nome = Nome::from_tau(C64::new(0.0, 1.0)).unwrap();
        let l = LineSpec::new(-6, 4, nome).unwrap().reduced();
        assert_eq!((l.n, l.m), (-3, 2));
    }
}
