//! Job files: `{"command": ..., "params": {...}}` with complex numbers as
//! `[re, im]`.

use elliptheta_core::convergence::WpParametrization;
use elliptheta_core::series::{SeriesSpec, VwpSpec};
use elliptheta_core::special::Rationality;
use elliptheta_core::{LineSpec, Nome, QSpec, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "snake_case")]
pub enum Job {
    Eval(EvalParams),
    Radius(RadiusParams),
    Residual(ResidualParams),
    Identities(IdentityParams),
    Bounds(BoundsParams),
    Sweep(SweepParams),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Eval(_) => "eval",
            Job::Radius(_) => "radius",
            Job::Residual(_) => "residual",
            Job::Identities(_) => "identities",
            Job::Bounds(_) => "bounds",
            Job::Sweep(_) => "sweep",
        }
    }
}

/// Where `q` and `p` come from: `q` directly or `chi` on `line = [N, M]`;
/// `p` directly or through `tau`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Base {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<C64>,
}

impl Base {
    pub fn nome(&self) -> Result<Nome, CliError> {
        match (self.tau, self.p) {
            (Some(tau), None) => Ok(Nome::from_tau(tau)?),
            (None, Some(p)) => Ok(Nome::from_p(p)?),
            _ => Err(CliError::Invalid("give exactly one of base.tau and base.p".into())),
        }
    }

    pub fn line(&self) -> Result<LineSpec, CliError> {
        let [n, m] = self.line.ok_or_else(|| CliError::Invalid("base.line = [N, M] is required".into()))?;
        Ok(LineSpec::new(n, m, self.nome()?)?)
    }

    pub fn qspec(&self) -> Result<QSpec, CliError> {
        let chi = self.chi.ok_or_else(|| CliError::Invalid("base.chi is required".into()))?;
        let qs = QSpec::new(chi, self.line()?)?;
        if let Some(q) = self.q {
            if (q - qs.q()).norm() > 1e-12 * q.norm() {
                return Err(CliError::Invalid("base.q disagrees with chi on the line".into()));
            }
        }
        Ok(qs)
    }

    pub fn q(&self) -> Result<C64, CliError> {
        match (self.q, self.chi) {
            (Some(q), None) => Ok(q),
            (_, Some(_)) => Ok(self.qspec()?.q()),
            (None, None) => Err(CliError::Invalid("give base.q or base.chi with base.line".into())),
        }
    }
}

/// A general `ₛEᵣ` or a very-well-poised series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Series {
    General {
        t: Vec<C64>,
        w: Vec<C64>,
    },
    /// `t` holds `t₁…t_{r−4}`; with `balance = true` the last one is
    /// replaced by the value that balances the series.
    Vwp {
        t0: C64,
        t: Vec<C64>,
        nu: C64,
        #[serde(default)]
        balance: bool,
    },
}

pub enum Built {
    General(SeriesSpec),
    Vwp(VwpSpec),
}

impl Series {
    pub fn build(&self, base: &Base) -> Result<Built, CliError> {
        let nome = base.nome()?;
        let q = base.q()?;
        Ok(match self {
            Series::General { t, w } => Built::General(SeriesSpec::new(t.clone(), w.clone(), q, nome)?),
            Series::Vwp { t0, t, nu, balance } => {
                if *balance {
                    let free = t.get(..t.len().saturating_sub(1)).unwrap_or_default().to_vec();
                    Built::Vwp(VwpSpec::balanced(*t0, free, *nu, q, nome)?)
                } else {
                    Built::Vwp(VwpSpec::new(*t0, t.clone(), *nu, q, nome)?)
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    pub base: Base,
    pub series: Series,
    /// Ignored for very-well-poised series, which are summed at `z = 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<C64>,
}

/// Well-poised construction with prescribed radius (`r > 2`, `k + 1 ≤ r/2`,
/// `0 < λ < 1 − 2/r`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Construction {
    pub r: usize,
    pub k: usize,
    pub lambda: f64,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusParams {
    pub base: Base,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    /// Well-poised coordinates; the series is built from them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wellpoised: Option<WpParametrization>,
    /// `chi = a/b`, enabling the periodic closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<[i64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// Infinite-order equation of a general series.
    Final,
    /// `₂E₁` (`t = [a, b]`, `w = [c]`): final, explicit and split forms.
    E21,
    /// The `p = 0` finite-order equation for `ₛφᵣ`.
    Phi,
    /// `θ(a q^δ) z^μ` with `μ = −log(apᵏ)/log q`.
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualParams {
    pub base: Base,
    pub equation: Equation,
    #[serde(default)]
    pub t: Vec<C64>,
    #[serde(default)]
    pub w: Vec<C64>,
    pub z: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    #[serde(default = "default_draws")]
    pub draws: usize,
}

fn default_draws() -> usize {
    20
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self { draws: default_draws() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    pub q: C64,
    pub p: C64,
    pub rationality: Rationality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<C64>,
    #[serde(default = "default_scan_depth")]
    pub scan_depth: usize,
    /// Largest `n` in the lower-bound soundness scan.
    #[serde(default = "default_n_check")]
    pub n_check: u64,
}

fn default_scan_depth() -> usize {
    200
}

fn default_n_check() -> u64 {
    10_000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Axis {
    /// Rotation number of `q` on its line.
    Chi,
    /// Line position of `t[index]`; the last `w` absorbs the change so the
    /// series stays balanced.
    Position { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub base: Base,
    pub series: Series,
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Also run the orbit average at each point.
    #[serde(default)]
    pub empirical: bool,
}

/// Global overrides from the command line, echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub max_terms: usize,
    pub n_empirical: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { seed: 0, tol: None, max_terms: 10_000, n_empirical: 100_000 }
    }
}

pub fn parse_job(text: &str) -> Result<Job, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}
