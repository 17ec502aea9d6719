//! Radius-of-convergence machinery: dilogarithm, the `F_{N,M}` integrals,
//! closed-form radii, orbit averages and a continued-fraction probe.

pub mod dilog;
pub mod diophantine;
pub mod empirical;
pub mod fnm;
pub mod quadrature;
pub mod radius;

pub use dilog::{clausen, dilog, dilog_circle_re};
pub use diophantine::{hl_condition_probe, HlProbe};
pub use empirical::{empirical_log_average, series_log_average, sin_regularized_log_average, EmpiricalTrace};
pub use fnm::{f_nm, f_nm_quadrature, fnm_gcd_correction, i_nm, i_nm_quadrature, mu};
pub use radius::{
    construct_wp_example, radius_singular, radius_balanced, radius_vwp, radius_wellpoised, rc_gt1_log_rc_inv,
    vwp_line_integral, RadiusMethod, RadiusReport, WpParametrization,
};
