use elliptheta_core::convergence::{
    construct_wp_example, empirical_log_average, radius_singular, radius_balanced, radius_vwp, radius_wellpoised,
    rc_gt1_log_rc_inv, series_log_average, sin_regularized_log_average, vwp_line_integral, EmpiricalTrace, RadiusReport,
};
use elliptheta_core::diffeq::{
    apply_theta_operator, kernel_check, residual_2e1, residual_2e1_split, residual_series_eq, residual_basic_eq,
    OperatorTruncation, ResidualReport,
};
use elliptheta_core::phi::{phi0, phi_n, phi_shift};
use elliptheta_core::series::{check_balancing, eval_ser, eval_vwp, rational_chi_sum, SeriesSpec, VwpSpec};
use elliptheta_core::special::{
    ln_abs_theta_qn, ln_theta_qn_lower_bound, z_bound_0e0, z_bound_1e0, AlphaDecomposition, ZBound,
};
use elliptheta_core::theta::{qpochhammer_inf, theta, theta_sum};
use elliptheta_core::{Error, Nome, QSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{LN_2, TAU};

use crate::job::*;
use crate::{is_numerical, CliError, Outcome};

pub fn dispatch(job: &Job, settings: &Settings) -> Result<Outcome, CliError> {
    match job {
        Job::Eval(p) => eval(p, settings),
        Job::Radius(p) => radius(p, settings),
        Job::Residual(p) => residual(p, settings),
        Job::Identities(p) => identities(p, settings),
        Job::Bounds(p) => bounds(p, settings),
        Job::Sweep(p) => sweep(p, settings),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

const DEFAULT_TAIL_TOL: f64 = 1e-16;

#[derive(Serialize)]
struct EvalResult {
    value: C64,
    terms_used: usize,
    last_term_magnitude: f64,
    terminated: bool,
    converged: bool,
    tail_tol: f64,
    max_terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    balancing_deviation: Option<f64>,
}

fn eval(p: &EvalParams, s: &Settings) -> Result<Outcome, CliError> {
    let tail_tol = s.tol.unwrap_or(DEFAULT_TAIL_TOL);
    let (res, dev) = match p.series.build(&p.base)? {
        Built::General(spec) => {
            let z = p.z.ok_or_else(|| CliError::Invalid("eval of a general series needs z".into()))?;
            let dev = check_balancing(&spec, 1e-10)?.deviation;
            (eval_ser(&spec, z, s.max_terms, tail_tol)?, Some(dev))
        }
        Built::Vwp(spec) => (eval_vwp(&spec, s.max_terms, tail_tol)?, None),
    };
    let mut flags = Vec::new();
    if !res.converged {
        flags.push(format!("series did not converge within {} terms", s.max_terms));
    }
    let out = EvalResult {
        value: res.value,
        terms_used: res.terms_used,
        last_term_magnitude: res.last_term_magnitude,
        terminated: res.terminated,
        converged: res.converged,
        tail_tol,
        max_terms: s.max_terms,
        balancing_deviation: dev,
    };
    Ok(Outcome { flags, result: to_value(&out) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodStatus {
    Ok,
    NotApplicable,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
struct MethodOutcome {
    method: &'static str,
    status: MethodStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_rc_inv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<(u64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl MethodOutcome {
    fn value(method: &'static str, log_rc_inv: f64) -> Self {
        Self {
            method,
            status: MethodStatus::Ok,
            log_rc_inv: Some(log_rc_inv),
            rc: Some((-log_rc_inv).exp()),
            alpha: None,
            beta: None,
            trace: None,
            note: None,
        }
    }

    fn from_report(method: &'static str, rep: RadiusReport) -> Self {
        let mut m = Self::value(method, rep.log_rc_inv);
        if !rep.alpha.is_empty() {
            m.alpha = Some(rep.alpha);
            m.beta = Some(rep.beta);
        }
        m.trace = rep.empirical_trace;
        m
    }

    fn from_trace(method: &'static str, tr: EmpiricalTrace, offset: f64) -> Self {
        let mut m = Self::value(method, tr.value + offset);
        m.trace = Some(tr.checkpoints.into_iter().map(|(k, v)| (k, v + offset)).collect());
        m
    }

    fn from_error(method: &'static str, e: &Error) -> Self {
        Self {
            method,
            status: if is_numerical(e) { MethodStatus::Failed } else { MethodStatus::NotApplicable },
            log_rc_inv: None,
            rc: None,
            alpha: None,
            beta: None,
            trace: None,
            note: Some(e.to_string()),
        }
    }
}

fn attempt(method: &'static str, r: elliptheta_core::Result<MethodOutcome>) -> MethodOutcome {
    r.unwrap_or_else(|e| MethodOutcome::from_error(method, &e))
}

#[derive(Serialize)]
struct Deviation {
    a: &'static str,
    b: &'static str,
    abs_diff: f64,
}

#[derive(Serialize)]
struct RadiusResult {
    methods: Vec<MethodOutcome>,
    deviations: Vec<Deviation>,
    n_empirical: u64,
}

/// All applicable radius methods for a general series.
fn general_methods(spec: &SeriesSpec, qs: &QSpec, n_emp: u64, rational: Option<[i64; 2]>) -> Vec<MethodOutcome> {
    let line = &qs.line;
    let t0_is_q = spec.t.first().is_some_and(|&t0| (t0 - spec.q).norm() <= 1e-12 * spec.q.norm());
    let mut out = Vec::new();
    if t0_is_q {
        out.push(attempt("balanced", radius_balanced(spec, line).map(|r| MethodOutcome::from_report("balanced", r))));
    }
    out.push(attempt("singular", radius_singular(spec, line).map(|r| MethodOutcome::from_report("singular", r))));
    if let Some([a, b]) = rational {
        out.push(attempt(
            "rational_chi",
            rational_chi_sum(spec, qs, a, b, C64::new(0.0, 0.0))
                .map(|r| MethodOutcome::value("rational_chi", -r.radius.ln())),
        ));
    }
    if n_emp > 0 {
        out.push(attempt(
            "empirical",
            series_log_average(spec, qs, n_emp).map(|t| MethodOutcome::from_trace("empirical", t, 0.0)),
        ));
        if !t0_is_q {
            // the sin-regularized average sits log 2 below log r_c⁻¹
            out.push(attempt(
                "empirical_sin_regularized",
                sin_regularized_log_average(spec, qs, n_emp)
                    .map(|t| MethodOutcome::from_trace("empirical_sin_regularized", t, LN_2)),
            ));
        }
    }
    out
}

fn vwp_methods(spec: &VwpSpec, qs: &QSpec, n_emp: u64) -> Vec<MethodOutcome> {
    let line = &qs.line;
    let mut out = vec![
        attempt("vwp", radius_vwp(spec, line).map(|r| MethodOutcome::from_report("vwp", r))),
        attempt(
            "vwp_line_integral",
            vwp_line_integral(spec, line).map(|r| MethodOutcome::from_report("vwp_line_integral", r)),
        ),
    ];
    if n_emp > 0 {
        out.push(attempt(
            "empirical",
            empirical_log_average(|u, k| spec.term_ratio_at(u, k as i64), qs, n_emp)
                .map(|t| MethodOutcome::from_trace("empirical", t, 0.0)),
        ));
    }
    out
}

fn deviations(methods: &[MethodOutcome]) -> Vec<Deviation> {
    let ok: Vec<&MethodOutcome> = methods.iter().filter(|m| m.status == MethodStatus::Ok).collect();
    let mut out = Vec::new();
    for (i, a) in ok.iter().enumerate() {
        for b in &ok[i + 1..] {
            out.push(Deviation {
                a: a.method,
                b: b.method,
                abs_diff: (a.log_rc_inv.unwrap_or(f64::NAN) - b.log_rc_inv.unwrap_or(f64::NAN)).abs(),
            });
        }
    }
    out
}

fn radius(p: &RadiusParams, s: &Settings) -> Result<Outcome, CliError> {
    let qs = p.base.qspec()?;
    let n_emp = s.n_empirical;
    let given = [p.series.is_some(), p.construction.is_some(), p.wellpoised.is_some()];
    if given.iter().filter(|&&x| x).count() != 1 {
        return Err(CliError::Invalid("give exactly one of series, construction, wellpoised".into()));
    }
    let methods = if let Some(series) = &p.series {
        match series.build(&p.base)? {
            Built::General(spec) => general_methods(&spec, &qs, n_emp, p.rational),
            Built::Vwp(spec) => vwp_methods(&spec, &qs, n_emp),
        }
    } else if let Some(c) = &p.construction {
        let (spec, _, rep) = construct_wp_example(c.r, c.k, c.lambda, &qs, &c.h)?;
        let mut m = vec![
            MethodOutcome::value("construction_formula", rc_gt1_log_rc_inv(c.r, c.k, c.lambda, &qs.line)),
            MethodOutcome::from_report("wellpoised", rep),
        ];
        m.extend(general_methods(&spec, &qs, n_emp, p.rational));
        m
    } else {
        let wp = p.wellpoised.as_ref().expect("checked above");
        let rep = radius_wellpoised(wp, &qs.line)?;
        let (t, w) = wp.to_params(&qs);
        let mut all_t = vec![qs.q()];
        all_t.extend(t);
        let spec = SeriesSpec::new(all_t, w, qs.q(), qs.line.nome)?;
        let mut m = vec![MethodOutcome::from_report("wellpoised", rep)];
        m.extend(general_methods(&spec, &qs, n_emp, p.rational));
        m
    };
    let ok = methods.iter().any(|m| m.status == MethodStatus::Ok);
    let failed: Vec<String> = methods
        .iter()
        .filter(|m| m.status == MethodStatus::Failed)
        .map(|m| format!("{}: {}", m.method, m.note.clone().unwrap_or_default()))
        .collect();
    if !ok && failed.is_empty() {
        let why: Vec<String> = methods.iter().filter_map(|m| m.note.clone()).collect();
        return Err(CliError::Invalid(format!("no radius method applies: {}", why.join("; "))));
    }
    let out = RadiusResult { deviations: deviations(&methods), methods, n_empirical: n_emp };
    Ok(Outcome { flags: failed, result: to_value(&out) })
}

#[derive(Serialize)]
struct ResidualEntry {
    form: String,
    normalized: f64,
    residual: C64,
    residual_scale: f64,
    n_range_used: usize,
    converged: bool,
    history: Vec<(usize, f64)>,
    passed: bool,
}

#[derive(Serialize)]
struct ResidualResult {
    entries: Vec<ResidualEntry>,
    tolerance: f64,
    n_range: usize,
    f_truncation: usize,
}

const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

fn entry(form: String, r: &ResidualReport, tol: f64) -> ResidualEntry {
    ResidualEntry {
        form,
        normalized: r.normalized(),
        residual: r.residual,
        residual_scale: r.residual_scale,
        n_range_used: r.n_range_used,
        converged: r.converged,
        history: r.history.clone(),
        passed: r.normalized() < tol,
    }
}

fn residual(p: &ResidualParams, s: &Settings) -> Result<Outcome, CliError> {
    let tol = s.tol.unwrap_or(DEFAULT_RESIDUAL_TOL);
    let def = OperatorTruncation::default();
    let n_range = p.n_range.unwrap_or(def.n_range);
    let f_truncation = p.f_truncation.unwrap_or(s.max_terms.max(n_range + 10));
    let trunc = OperatorTruncation::new(n_range, f_truncation)?;
    let q = p.base.q()?;
    let mut entries = Vec::new();
    match p.equation {
        Equation::Final => {
            let spec = SeriesSpec::new(p.t.clone(), p.w.clone(), q, p.base.nome()?)?;
            entries.push(entry("final".into(), &residual_series_eq(&spec, p.z, trunc)?, tol));
        }
        Equation::E21 => {
            let (a, b, c) = match (p.t.as_slice(), p.w.as_slice()) {
                (&[a, b], &[c]) => (a, b, c),
                _ => return Err(CliError::Invalid("e21 needs t = [a, b] and w = [c]".into())),
            };
            let nome = p.base.nome()?;
            let spec = SeriesSpec::new(p.t.clone(), p.w.clone(), q, nome)?;
            let pp = nome.p();
            entries.push(entry("final".into(), &residual_series_eq(&spec, p.z, trunc)?, tol));
            entries.push(entry("e21".into(), &residual_2e1(a, b, c, q, pp, p.z, trunc)?, tol));
            entries.push(entry("e21_split".into(), &residual_2e1_split(a, b, c, q, pp, p.z, trunc)?, tol));
        }
        Equation::Phi => {
            entries.push(entry("phi".into(), &residual_basic_eq(&p.t, &p.w, q, p.z, f_truncation)?, tol));
        }
        Equation::Kernel => {
            let a = p.a.ok_or_else(|| CliError::Invalid("kernel needs a".into()))?;
            let pp = p.base.nome()?.p();
            let ks = p.k.clone().unwrap_or_else(|| (-2..=2).collect());
            for k in ks {
                entries.push(entry(format!("kernel_k{k}"), &kernel_check(a, q, pp, k, p.z, trunc)?, tol));
            }
            // z² is not in the kernel
            let ctl = apply_theta_operator(a, q, pp, C64::new(2.0, 0.0), p.z, trunc)?;
            let mut e = entry("control_mu2".into(), &ctl, tol);
            e.passed = ctl.normalized() > 1e-3;
            entries.push(e);
        }
    }
    let flags = entries
        .iter()
        .filter(|e| !e.converged)
        .map(|e| format!("{}: residual window did not settle", e.form))
        .collect();
    Ok(Outcome { flags, result: to_value(&ResidualResult { entries, tolerance: tol, n_range, f_truncation }) })
}

#[derive(Serialize)]
struct Suite {
    suite: &'static str,
    cases: usize,
    failures: usize,
    max_rel_error: f64,
    tolerance: f64,
}

struct SuiteAcc {
    suite: &'static str,
    tol: f64,
    cases: usize,
    failures: usize,
    max: f64,
}

impl SuiteAcc {
    fn new(suite: &'static str, tol: f64) -> Self {
        Self { suite, tol, cases: 0, failures: 0, max: 0.0 }
    }

    fn check(&mut self, got: elliptheta_core::Result<C64>, want: elliptheta_core::Result<C64>) {
        self.cases += 1;
        match (got, want) {
            (Ok(g), Ok(w)) => {
                let e = (g - w).norm() / w.norm().max(f64::MIN_POSITIVE);
                self.max = self.max.max(e);
                if !(e < self.tol) {
                    self.failures += 1;
                }
            }
            _ => self.failures += 1,
        }
    }

    fn finish(self) -> Suite {
        Suite { suite: self.suite, cases: self.cases, failures: self.failures, max_rel_error: self.max, tolerance: self.tol }
    }
}

fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..TAU))
}

fn identities(p: &IdentityParams, s: &Settings) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let tol12 = s.tol.unwrap_or(1e-12);
    let tol10 = s.tol.unwrap_or(1e-10);
    let draws = p.draws.max(1);

    let mut tpi = SuiteAcc::new("triple_product", tol12);
    let mut quasi = SuiteAcc::new("quasiperiodicity", tol12);
    let mut refl = SuiteAcc::new("reflection", tol12);
    for _ in 0..5 * draws {
        let z = polar(&mut rng, 0.3, 3.0);
        let pp = polar(&mut rng, 0.0, 0.5);
        let th = theta(z, pp);
        // keep away from zeros, where relative errors are meaningless
        if th.as_ref().map_or(true, |v| v.norm() < 1e-8) {
            continue;
        }
        tpi.check(theta_sum(z, pp), th.clone());
        quasi.check(theta(pp * z, pp), th.clone().map(|v| -v / z));
        refl.check(theta(z.inv(), pp), theta(pp * z, pp));
    }

    let mut shift = SuiteAcc::new("phi_shift", tol10);
    let mut period = SuiteAcc::new("phi_period", tol10);
    let mut multiple = SuiteAcc::new("phi_multiple_period", tol10);
    let mut closed = SuiteAcc::new("phi0_r2_closed_form", tol12);
    for r in 2..=4usize {
        for _ in 0..draws {
            let sv: Vec<C64> = (0..r).map(|_| polar(&mut rng, 0.5, 2.0)).collect();
            let pp = polar(&mut rng, 0.05, 0.5);
            let prod: C64 = sv.iter().product();
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let base = phi_n(&sv, pp, 0);
            for n in -6i64..=6 {
                let v = phi_n(&sv, pp, n);
                let j = rng.random_range(0..r);
                shift.check(phi_shift(&sv, pp, n, j), v.clone());
                period.check(phi_n(&sv, pp, n + r as i64), v.map(|v| sign * prod * pp.powi(n as i32) * v));
            }
            for n in -3i64..=3 {
                let e = (r as i64 * n * (n - 1) / 2) as i32;
                let sg = if (n * r as i64) % 2 == 0 { 1.0 } else { -1.0 };
                let want = base.clone().map(|b| pp.powi(e) * sg * prod.powi(n as i32) * b);
                multiple.check(phi_n(&sv, pp, n * r as i64), want);
            }
            if r == 2 {
                let p2 = pp * pp;
                let want = qpochhammer_inf(p2, p2).and_then(|a| Ok(a * theta(-pp * sv[0] / sv[1], p2)?));
                closed.check(phi0(&sv, pp), want);
            }
        }
    }
    let suites: Vec<Suite> =
        [tpi, quasi, refl, shift, period, multiple, closed].into_iter().map(SuiteAcc::finish).collect();
    let flags = suites.iter().filter(|s| s.failures > 0).map(|s| format!("{}: {} failures", s.suite, s.failures)).collect();
    let total: usize = suites.iter().map(|s| s.cases).sum();
    let failed: usize = suites.iter().map(|s| s.failures).sum();
    Ok(Outcome {
        flags,
        result: serde_json::json!({ "suites": to_value(&suites), "cases": total, "failures": failed, "seed": s.seed }),
    })
}

#[derive(Serialize)]
struct LowerBoundScan {
    n_max: u64,
    violations: u64,
    /// Smallest `ln|θ(qⁿ)| − ln(bound)` seen.
    min_log_margin: f64,
}

#[derive(Serialize)]
struct ConvergenceCheck {
    z_abs: f64,
    cauchy_gap: f64,
    converged: bool,
}

#[derive(Serialize)]
struct BoundsResult {
    alpha: AlphaDecomposition,
    lower_bound_scan: LowerBoundScan,
    z_bound_0e0: ZBound,
    check_0e0: ConvergenceCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_bound_1e0: Option<ZBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check_1e0: Option<ConvergenceCheck>,
}

/// Sums at `0.9 × bound` and compares the partial sums at `n` and `n/2`.
fn cauchy_check(spec: &SeriesSpec, bound: f64, max_terms: usize, tol: f64) -> Result<ConvergenceCheck, CliError> {
    let z = C64::new(0.9 * bound, 0.0);
    let full = eval_ser(spec, z, max_terms, 0.0)?;
    let half = eval_ser(spec, z, max_terms / 2, 0.0)?;
    let gap = (full.value - half.value).norm() / full.value.norm();
    Ok(ConvergenceCheck { z_abs: z.norm(), cauchy_gap: gap, converged: gap < tol })
}

fn bounds(p: &BoundsParams, s: &Settings) -> Result<Outcome, CliError> {
    let tol = s.tol.unwrap_or(1e-10);
    let alpha = AlphaDecomposition::new(p.q, p.p, 1, p.rationality)?;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    if p.q.norm() < 1.0 {
        for n in 1..=p.n_check {
            let margin = ln_abs_theta_qn(p.q, p.p, n)? - ln_theta_qn_lower_bound(p.q, p.p, n)?;
            min_margin = min_margin.min(margin);
            if margin < -1e-9 {
                violations += 1;
            }
        }
    }
    let nome = Nome::from_p(p.p)?;
    let max_terms = s.max_terms.min(2000);
    let zb0 = z_bound_0e0(p.q, p.p, p.rationality, p.scan_depth)?;
    let spec0 = SeriesSpec::new(vec![], vec![], p.q, nome)?;
    let check0 = cauchy_check(&spec0, zb0.bound, max_terms, tol)?;
    let (zb1, check1) = match p.t0 {
        Some(t0) => {
            let zb = z_bound_1e0(t0, p.q, p.p, p.rationality, p.scan_depth)?;
            let spec = SeriesSpec::new(vec![t0], vec![], p.q, nome)?;
            let ch = cauchy_check(&spec, zb.bound, max_terms, tol)?;
            (Some(zb), Some(ch))
        }
        None => (None, None),
    };
    let mut flags = Vec::new();
    if violations > 0 {
        flags.push(format!("lower bound exceeded |theta(q^n)| {violations} times"));
    }
    for (name, ch) in [("0E0", Some(&check0)), ("1E0", check1.as_ref())] {
        if let Some(ch) = ch.filter(|c| !c.converged) {
            flags.push(format!("{name} partial sums not settled at 0.9 x bound (gap {:e})", ch.cauchy_gap));
        }
    }
    let out = BoundsResult {
        alpha,
        lower_bound_scan: LowerBoundScan { n_max: p.n_check, violations, min_log_margin: min_margin },
        z_bound_0e0: zb0,
        check_0e0: check0,
        z_bound_1e0: zb1,
        check_1e0: check1,
    };
    Ok(Outcome { flags, result: to_value(&out) })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis_value: f64,
    pub method: &'static str,
    pub status: MethodStatus,
    pub log_rc_inv: Option<f64>,
    pub rc: Option<f64>,
    pub note: Option<String>,
}

fn grid(p: &SweepParams) -> Result<Vec<f64>, CliError> {
    if p.count == 0 || !(p.start.is_finite() && p.stop.is_finite()) {
        return Err(CliError::Invalid("sweep needs count >= 1 and finite bounds".into()));
    }
    if p.count == 1 {
        return Ok(vec![p.start]);
    }
    let step = (p.stop - p.start) / (p.count - 1) as f64;
    Ok((0..p.count).map(|i| p.start + i as f64 * step).collect())
}

/// Base and series for one grid point.
fn sweep_point(p: &SweepParams, v: f64) -> Result<(Base, Series), CliError> {
    let mut base = p.base.clone();
    let mut series = p.series.clone();
    match p.axis {
        Axis::Chi => {
            base.chi = Some(v);
            base.q = None;
        }
        Axis::Position { index } => {
            let qs = base.qspec()?;
            let Series::General { t, w } = &mut series else {
                return Err(CliError::Invalid("position sweeps need a general series".into()));
            };
            if index >= t.len() || w.is_empty() {
                return Err(CliError::Invalid(format!("t[{index}] does not exist")));
            }
            let (h, _) = qs.to_hphi(t[index])?;
            t[index] = qs.from_hphi(h, v);
            let pt: C64 = t.iter().product();
            let pw: C64 = w[..w.len() - 1].iter().product();
            let last = w.len() - 1;
            w[last] = pt / (qs.q() * pw);
        }
    }
    Ok((base, series))
}

fn sweep_rows(p: &SweepParams, n_emp: u64, index: usize, v: f64) -> Vec<SweepRow> {
    let methods = match sweep_point(p, v).and_then(|(b, s)| Ok((b.qspec()?, s.build(&b)?))) {
        Ok((qs, Built::General(spec))) => general_methods(&spec, &qs, n_emp, None),
        Ok((qs, Built::Vwp(spec))) => vwp_methods(&spec, &qs, n_emp),
        Err(e) => {
            let status = match &e {
                CliError::Core(c) if is_numerical(c) => MethodStatus::Failed,
                _ => MethodStatus::NotApplicable,
            };
            return vec![SweepRow { index, axis_value: v, method: "setup", status, log_rc_inv: None, rc: None, note: Some(e.to_string()) }];
        }
    };
    methods
        .into_iter()
        .map(|m| SweepRow {
            index,
            axis_value: v,
            method: m.method,
            status: m.status,
            log_rc_inv: m.log_rc_inv,
            rc: m.rc,
            note: m.note,
        })
        .collect()
}

fn sweep(p: &SweepParams, s: &Settings) -> Result<Outcome, CliError> {
    let values = grid(p)?;
    // validate the first point eagerly so malformed input fails with exit 1
    let (b, series) = sweep_point(p, values[0])?;
    b.qspec()?;
    series.build(&b)?;
    let n_emp = if p.empirical { s.n_empirical } else { 0 };
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| sweep_rows(p, n_emp, i, v))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let flags = rows
        .iter()
        .filter(|r| r.status == MethodStatus::Failed)
        .map(|r| format!("point {} {}: {}", r.index, r.method, r.note.clone().unwrap_or_default()))
        .collect();
    Ok(Outcome { flags, result: serde_json::json!({ "rows": to_value(&rows), "count": p.count }) })
}
