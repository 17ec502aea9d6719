//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! (written straight to stderr so it survives output capture) and then
//! asserts the same condition.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use elliptheta_core::convergence::empirical::series_log_average;
use elliptheta_core::convergence::fnm::{f_nm, f_nm_quadrature, fnm_gcd_correction};
use elliptheta_core::convergence::radius::{construct_wp_example, radius_balanced, radius_vwp, radius_singular, vwp_line_integral};
use elliptheta_core::diffeq::*;
use elliptheta_core::phi::{phi0_closed, phi_n, phi_shift};
use elliptheta_core::series::{eval_ser, rational_chi_sum, SeriesSpec, VwpSpec};
use elliptheta_core::special::{ln_abs_theta_qn, ln_theta_qn_lower_bound, z_bound_0e0, z_bound_1e0, Rationality};
use elliptheta_core::theta::{qpochhammer_inf, theta, theta_sum};
use elliptheta_core::{LineSpec, Nome, QSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn polar_draw(g: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(g.random_range(lo..hi), g.random_range(0.0..TAU))
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn qspec(chi: f64, n: i64, m: i64, tau: C64) -> QSpec {
    QSpec::new(chi, LineSpec::new(n, m, Nome::from_tau(tau).unwrap()).unwrap()).unwrap()
}

/// Balanced series with `t₀ = q`, random `t₁…t_r`, `w₁…w_{r−1}` and `w_r`
/// fixed by `∏t = q∏w`.
fn balanced_spec(g: &mut ChaCha8Rng, qs: &QSpec, r: usize) -> SeriesSpec {
    let q = qs.q();
    let mut t = vec![q];
    t.extend((0..r).map(|_| polar_draw(g, 0.4, 2.5)));
    let mut w: Vec<C64> = (0..r - 1).map(|_| polar_draw(g, 0.4, 2.5)).collect();
    let pt: C64 = t.iter().product();
    let pw: C64 = w.iter().product();
    w.push(pt / (q * pw));
    SeriesSpec::new(t, w, q, qs.line.nome).unwrap()
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn verdict(id: u32, name: &str, ok: bool, detail: &str, elapsed: Duration) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] {id:02} {name}: {detail} ({:.2} s)\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id:02} failed: {detail}");
}

#[test]
fn c01_triple_product() {
    let start = Instant::now();
    let mut g = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = polar_draw(&mut g, 0.0, 0.5);
        let z = polar_draw(&mut g, 0.2, 5.0);
        worst = worst.max(rel(theta_sum(z, p).unwrap(), theta(z, p).unwrap()));
    }
    let el = start.elapsed();
    let ok = worst < 1e-12 && el.as_secs_f64() < 1.0;
    verdict(1, "triple product", ok, &format!("max rel {worst:.2e} over 100 draws"), el);
}

#[test]
fn c02_phi_identities() {
    let start = Instant::now();
    let mut g = rng(102);
    let draw = |g: &mut ChaCha8Rng, r: usize| {
        let s: Vec<C64> = (0..r).map(|_| polar_draw(g, 0.5, 2.0)).collect();
        (s, polar_draw(g, 0.05, 0.5))
    };
    let (mut shift, mut period, mut multiple) = (0.0f64, 0.0f64, 0.0f64);
    for r in 2..=4usize {
        for _ in 0..20 {
            let (s, p) = draw(&mut g, r);
            let prod: C64 = s.iter().product();
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let phi0 = phi_n(&s, p, 0).unwrap();
            for n in -6i64..=6 {
                let v = phi_n(&s, p, n).unwrap();
                let j = g.random_range(0..r);
                shift = shift.max(rel(phi_shift(&s, p, n, j).unwrap(), v));
                let next = phi_n(&s, p, n + r as i64).unwrap();
                period = period.max(rel(next, sign * prod * p.powi(n as i32) * v));
                // n·r with the same n range, limited where the values stay representable
                if n.abs() <= 3 {
                    let nr = n * r as i64;
                    let e = (nr * (n - 1) / 2) as i32;
                    let sg = if nr % 2 == 0 { 1.0 } else { -1.0 };
                    let expect = p.powi(e) * sg * prod.powi(n as i32) * phi0;
                    multiple = multiple.max(rel(phi_n(&s, p, nr).unwrap(), expect));
                }
            }
        }
    }
    let mut closed = 0.0f64;
    for _ in 0..20 {
        let (s, p) = draw(&mut g, 2);
        let p2 = p * p;
        let expect = qpochhammer_inf(p2, p2).unwrap() * theta(-p * s[0] / s[1], p2).unwrap();
        closed = closed.max(rel(phi_n(&s, p, 0).unwrap(), expect));
        closed = closed.max(rel(phi0_closed(&s, p, s[1].inv()).unwrap(), expect));
    }
    let el = start.elapsed();
    let ok = shift.max(period).max(multiple) < 1e-10 && closed < 1e-12 && el.as_secs_f64() < 10.0;
    let detail = format!("shift {shift:.1e}, period {period:.1e}, multiple {multiple:.1e}, r=2 closed form {closed:.1e}");
    verdict(2, "lattice-sum identities", ok, &detail, el);
}

#[test]
fn c03_general_series_residual() {
    let start = Instant::now();
    // |q| = 1 keeps every qⁿz on one circle inside the radius
    let nome = Nome::from_tau(c(0.0, 0.5)).unwrap();
    let line = LineSpec::new(1, 0, nome).unwrap();
    let q = QSpec::new(golden(), line).unwrap().q();
    let p = nome.p();
    let (a, b) = (c(0.6, 0.3), c(-0.5, 0.9));
    let cc = a * b / q;
    let spec = SeriesSpec::new(vec![a, b], vec![cc], q, nome).unwrap();
    let rc = radius_singular(&spec, &line).unwrap().rc();
    let z = C64::from_polar(0.5 * rc, 0.4);
    let tr = OperatorTruncation::default();
    let fin = residual_series_eq(&spec, z, tr).unwrap();
    let e21 = residual_2e1(a, b, cc, q, p, z, tr).unwrap();
    let pp2 = qpochhammer_inf(p * p, p * p).unwrap();
    let mut agree = 0.0f64;
    for n in -(fin.n_range_used as i64)..=fin.n_range_used as i64 {
        let (x, y) = (fin.summand(n).unwrap(), e21.summand(n).unwrap() * pp2);
        if x.norm() > 1e-12 * fin.residual_scale {
            agree = agree.max(rel(x, y));
        }
    }
    let el = start.elapsed();
    let ok = fin.normalized() < 1e-8 && fin.n_range_used <= 32 && agree < 1e-9 && el.as_secs_f64() < 30.0;
    let detail = format!(
        "residual {:.1e} at window {}, two-term form {:.1e}, summand agreement {agree:.1e}",
        fin.normalized(),
        fin.n_range_used,
        e21.normalized()
    );
    verdict(3, "infinite-order equation residual", ok, &detail, el);
}

#[test]
fn c04_small_nome_reduction() {
    let start = Instant::now();
    let (a, b, cc, q) = (c(0.3, 0.2), c(-0.4, 0.1), c(0.5, -0.3), c(0.6, 0.2));
    let p = c(1e-10, 0.0);
    let z = c(0.01, -0.005);
    let rows = split_summand_magnitudes(a, b, cc, q, p, z, -3..=3, OperatorTruncation::default()).unwrap();
    let mut outside = 0.0f64;
    let mut worst_k = 0;
    for &(k, even, odd) in &rows {
        if !(0..=1).contains(&k) && even.max(odd) > outside {
            outside = even.max(odd);
            worst_k = k;
        }
    }
    let phi = residual_basic_eq(&[a, b], &[cc], q, z, 2000).unwrap();
    let el = start.elapsed();
    let ok = outside < 1e-12 && phi.normalized() < 1e-12 && el.as_secs_f64() < 5.0;
    let detail = format!(
        "largest summand outside k in {{0,1}} is {outside:.2e} (k = {worst_k}), basic-series residual {:.1e}",
        phi.normalized()
    );
    verdict(4, "small-nome reduction", ok, &detail, el);
}

#[test]
fn c05_line_integral_closed_form() {
    let start = Instant::now();
    let lines = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)];
    let ts = [c(0.3, 0.0), C64::from_polar(1.0, 0.4), C64::from_polar(2.5, -0.9)];
    let (mut quad_err, mut gcd_err) = (0.0f64, 0.0f64);
    for tau in [c(0.0, 1.0), c(0.3, 0.9)] {
        for &(n, m) in &lines {
            let l = LineSpec::new(n, m, Nome::from_tau(tau).unwrap()).unwrap();
            for &t in &ts {
                let closed = f_nm(t, &l).unwrap();
                let quad = f_nm_quadrature(t, &l, 1e-9).unwrap();
                quad_err = quad_err.max((closed - quad.value).abs());
                if l.d() > 1 {
                    let reduced = f_nm(t, &l.reduced()).unwrap();
                    gcd_err = gcd_err.max((closed - reduced - fnm_gcd_correction(t, &l)).abs());
                }
            }
        }
    }
    let el = start.elapsed();
    let ok = quad_err < 1e-7 && gcd_err < 1e-9 && el.as_secs_f64() < 60.0;
    let detail = format!("closed form vs quadrature {quad_err:.1e}, gcd reduction {gcd_err:.1e}");
    verdict(5, "line integral closed form", ok, &detail, el);
}

#[test]
fn c06_orbit_average_matches_radius() {
    let start = Instant::now();
    let qs = qspec(golden(), 1, 1, c(0.1, 0.9));
    let spec = balanced_spec(&mut rng(12), &qs, 2);
    let analytic = radius_balanced(&spec, &qs.line).unwrap().log_rc_inv;
    let emp = series_log_average(&spec, &qs, 1_000_000).unwrap();
    // trend: least-squares slope of log error against log n over the last
    // three decades, with the final error the smallest
    let pts: Vec<(f64, f64)> = emp
        .checkpoints
        .iter()
        .filter(|x| x.0 >= 1_000)
        .map(|&(m, v)| ((m as f64).log10(), (v - analytic).abs().max(1e-300).log10()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let last = pts.last().unwrap().1;
    let trending = slope < 0.0 && pts.iter().all(|p| p.1 >= last);
    let gap = (emp.value - analytic).abs();
    let el = start.elapsed();
    let ok = gap < 1e-2 && trending && el.as_secs_f64() < 60.0;
    let detail = format!("|average - analytic| = {gap:.1e}; log-log error slope over 1e3..1e6 {slope:.2}");
    verdict(6, "orbit average vs analytic radius", ok, &detail, el);
}

#[test]
fn c07_rational_rotation() {
    let start = Instant::now();
    let mut g = rng(107);
    let (mut sum_err, mut growth_err) = (0.0f64, 0.0f64);
    for (a, b) in [(1i64, 2i64), (2, 3), (3, 5)] {
        let qs = qspec(a as f64 / b as f64, 1, 1, c(0.1, 0.9));
        let spec = balanced_spec(&mut g, &qs, 2);
        let radius = rational_chi_sum(&spec, &qs, a, b, c(1e-3, 0.0)).unwrap().radius;
        let z = C64::from_polar(0.5 * radius, 0.3);
        let closed = rational_chi_sum(&spec, &qs, a, b, z).unwrap();
        let direct = eval_ser(&spec, z, 500, 0.0).unwrap();
        sum_err = sum_err.max(rel(direct.value, closed.value));
        let growth = series_log_average(&spec, &qs, 100_000).unwrap().value.exp();
        growth_err = growth_err.max((growth * radius - 1.0).abs());
    }
    let el = start.elapsed();
    let ok = sum_err < 1e-10 && growth_err < 0.02 && el.as_secs_f64() < 30.0;
    let detail = format!("closed form vs 500 terms {sum_err:.1e}, growth vs radius {:.2e}%", 100.0 * growth_err);
    verdict(7, "rational rotation closed form", ok, &detail, el);
}

#[test]
fn c08_radius_above_one() {
    let start = Instant::now();
    let qs = qspec(golden(), 0, 1, c(0.0, 1.0));
    let mut parts = Vec::new();
    let mut ok = true;
    for (r, k, lambda) in [(6usize, 2usize, 0.3), (7, 2, 0.2)] {
        let h: Vec<f64> = (0..r).map(|j| 0.1 * ((j * 7 % 5) as f64 - 2.0)).collect();
        let (spec, _, rep) = construct_wp_example(r, k, lambda, &qs, &h).unwrap();
        let growth = series_log_average(&spec, &qs, 100_000).unwrap().value.exp();
        let dev = (growth * rep.rc() - 1.0).abs();
        ok &= rep.log_rc_inv < 0.0 && rep.rc() > 1.0 && dev < 0.02;
        parts.push(format!("r={r}: r_c {:.4}, growth deviation {:.2e}%", rep.rc(), 100.0 * dev));
    }
    let el = start.elapsed();
    verdict(8, "construction with radius above one", ok && el.as_secs_f64() < 60.0, &parts.join("; "), el);
}

#[test]
fn c09_very_well_poised() {
    let start = Instant::now();
    let qs = qspec(golden(), 1, 1, c(0.1, 0.9));
    let q_abs = qs.q().norm();
    let mut radius_err = 0.0f64;
    let mut integral = Vec::new();
    for (phi0, phis, nu) in [(0.9, vec![0.2], 1.0), (0.7, vec![0.1, 0.3], 1.0), (0.6, vec![0.25], -1.0)] {
        let t0 = qs.from_hphi(0.3, phi0);
        let free = phis.iter().enumerate().map(|(i, &f)| qs.from_hphi(-0.2 + 0.1 * i as f64, f)).collect();
        let v = VwpSpec::balanced(t0, free, c(nu, 0.0), qs.q(), qs.line.nome).unwrap();
        let rep = radius_vwp(&v, &qs.line).unwrap();
        radius_err = radius_err.max((rep.rc() * q_abs - 1.0).abs());
        integral.push(vwp_line_integral(&v, &qs.line).unwrap().rc() * q_abs);
    }

    // q → pᵐq, t₀ → p^{n₀}t₀, t_j → p^{n_j}t_j with Σn_j = ((r−5)n₀ + (r−7)m)/2
    let nome = Nome::from_p(c(0.12, 0.05)).unwrap();
    let p = nome.p();
    let cases: [(usize, i32, i32, &[i32]); 5] =
        [(7, 1, 1, &[1, 0, 0]), (6, 2, 0, &[0, 1]), (6, 1, 1, &[0, 0]), (6, 1, -1, &[1, 0]), (8, 2, 0, &[1, 1, 1, 0])];
    let mut g = rng(109);
    let mut elliptic = 0.0f64;
    for (r, n0, m, nj) in cases {
        let t0 = polar_draw(&mut g, 0.4, 1.2);
        let free: Vec<C64> = (0..r - 5).map(|_| polar_draw(&mut g, 0.5, 1.8)).collect();
        let v = VwpSpec::balanced(t0, free, c(1.0, 0.0), c(0.55, 0.35), nome).unwrap();
        let t: Vec<C64> = v.t.iter().zip(nj).map(|(&x, &k)| x * p.powi(k)).collect();
        let shifted = VwpSpec { t0: v.t0 * p.powi(n0), t, q: v.q * p.powi(m), ..v.clone() };
        let (x, y) = (v.terms(6).unwrap(), shifted.terms(6).unwrap());
        for n in 0..6 {
            elliptic = elliptic.max(rel(y[n], x[n]));
        }
    }
    let el = start.elapsed();
    let ok = radius_err < 1e-12 && elliptic < 1e-10 && el.as_secs_f64() < 10.0;
    // the orbit average follows the line integral, which sits a factor |q|^M away
    let detail = format!(
        "r_c|q| - 1 = {radius_err:.1e}, term ellipticity {elliptic:.1e}; line-integral r_c|q| = {}",
        fmt_list(&integral)
    );
    verdict(9, "very-well-poised radius", ok, &detail, el);
}

#[test]
fn c10_kernel() {
    let start = Instant::now();
    let (a, q, p) = (c(0.4, 0.3), c(0.6, 0.3), c(0.2, 0.1));
    let z = c(0.7, 0.3);
    let tr = OperatorTruncation::default();
    let worst = (-2..=2).map(|k| kernel_check(a, q, p, k, z, tr).unwrap().normalized()).fold(0.0, f64::max);
    let control = apply_theta_operator(a, q, p, c(2.0, 0.0), z, tr).unwrap().normalized();
    let el = start.elapsed();
    let ok = worst < 1e-8 && control > 1e-3 && el.as_secs_f64() < 5.0;
    verdict(10, "operator kernel", ok, &format!("max residual {worst:.1e}, control {control:.2}"), el);
}

#[test]
fn c11_bounds() {
    let start = Instant::now();
    let mut g = rng(111);
    let mut violations = 0;
    for _ in 0..20 {
        let q = polar_draw(&mut g, 0.3, 0.95);
        let p = polar_draw(&mut g, 0.05, 0.6);
        violations += (1..=10_000u64)
            .filter(|&n| {
                let lb = ln_theta_qn_lower_bound(q, p, n).unwrap();
                let direct = ln_abs_theta_qn(q, p, n).unwrap();
                lb > direct + 1e-9 * direct.abs().max(1.0)
            })
            .count();
    }
    let cauchy = |spec: &SeriesSpec, z: C64| {
        let full = eval_ser(spec, z, 400, 0.0).unwrap();
        let half = eval_ser(spec, z, 200, 0.0).unwrap();
        (full.value - half.value).norm() / full.value.norm()
    };
    let mut gap = 0.0f64;
    for (q, p, rat) in [
        (C64::from_polar(0.5, 0.9), c(0.3, 0.0), Rationality::Irrational),
        (C64::from_polar(0.7, -0.4), c(0.1, 0.2), Rationality::Irrational),
        (C64::from_polar(0.3f64.sqrt(), 1.0), c(0.3, 0.0), Rationality::Rational { a: 1, b: 2 }),
    ] {
        let nome = Nome::from_p(p).unwrap();
        let zb = z_bound_0e0(q, p, rat, 200).unwrap();
        let spec = SeriesSpec::new(vec![], vec![], q, nome).unwrap();
        gap = gap.max(cauchy(&spec, C64::from_polar(0.9 * zb.bound, 0.3)));
        let t0 = 2.0 * q;
        let zb = z_bound_1e0(t0, q, p, rat, 200).unwrap();
        let spec = SeriesSpec::new(vec![t0], vec![], q, nome).unwrap();
        gap = gap.max(cauchy(&spec, C64::from_polar(0.9 * zb.bound, -1.1)));
    }
    let nome = Nome::from_p(c(0.0, 0.0)).unwrap();
    let (q, z, t0) = (C64::from_polar(0.6, 0.4), c(0.3, -0.2), c(1.1, 0.5));
    let e00 = SeriesSpec::new(vec![], vec![], q, nome).unwrap();
    let e10 = SeriesSpec::new(vec![t0], vec![], q, nome).unwrap();
    let closed0 = qpochhammer_inf(z, q).unwrap().inv();
    let closed1 = qpochhammer_inf(t0 * z, q).unwrap() * closed0;
    let closed = rel(eval_ser(&e00, z, 2000, 1e-18).unwrap().value, closed0)
        .max(rel(eval_ser(&e10, z, 2000, 1e-18).unwrap().value, closed1));
    let el = start.elapsed();
    let ok = violations == 0 && gap < 1e-10 && closed < 1e-12 && el.as_secs_f64() < 60.0;
    let detail = format!("{violations} lower-bound violations, Cauchy gap {gap:.1e}, p = 0 closed forms {closed:.1e}");
    verdict(11, "theta lower bounds and series bounds", ok, &detail, el);
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_elliptheta")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn c12_cli_determinism() {
    let start = Instant::now();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let path = |name: &str| fixtures.join(name).to_string_lossy().into_owned();
    let mut identical = true;
    for (file, extra) in [("identities.json", vec!["--seed", "7"]), ("sweep_position.json", vec![]), ("bounds.json", vec![])] {
        let f = path(file);
        let mut args = vec!["--input", f.as_str()];
        args.extend(extra);
        let (c1, a) = run_cli(&args);
        let (c2, b) = run_cli(&args);
        identical &= c1 == 0 && c2 == 0 && a == b && !a.is_empty();
    }
    let divergent = path("eval_divergent.json");
    let (code, out) = run_cli(&["--input", divergent.as_str()]);
    let report: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let flagged = code == 2 && report["status"] == "flagged";
    let (bad, _) = run_cli(&["eval", "--params", "{\"base\": {}}"]);
    let el = start.elapsed();
    let ok = identical && flagged && bad == 1;
    let detail = format!("byte-identical reruns: {identical}; non-converging job exit {code}; invalid job exit {bad}");
    verdict(12, "CLI determinism and exit codes", ok, &detail, el);
}
