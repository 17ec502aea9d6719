#![allow(dead_code)]

use elliptheta_core::series::SeriesSpec;
use elliptheta_core::{LineSpec, Nome, QSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn polar_draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..TAU))
}

pub fn qspec(chi: f64, n: i64, m: i64, tau: C64) -> QSpec {
    let nome = Nome::from_tau(tau).unwrap();
    QSpec::new(chi, LineSpec::new(n, m, nome).unwrap()).unwrap()
}

pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Balanced `_{r+1}E_r` with `t₀ = t0` (or `q` when `None`): random `t₁…t_r`,
/// `w₁…w_{r-1}`, and `w_r` fixed by `∏t = q∏w`.
pub fn balanced_spec(rng: &mut ChaCha8Rng, qs: &QSpec, r: usize, t0: Option<C64>) -> SeriesSpec {
    let q = qs.q();
    let t0 = t0.unwrap_or(q);
    let mut t = vec![t0];
    t.extend((0..r).map(|_| polar_draw(rng, 0.4, 2.5)));
    let mut w: Vec<C64> = (0..r - 1).map(|_| polar_draw(rng, 0.4, 2.5)).collect();
    let pt: C64 = t.iter().product();
    let pw: C64 = w.iter().product();
    w.push(pt / (q * pw));
    SeriesSpec::new(t, w, q, qs.line.nome).unwrap()
}
