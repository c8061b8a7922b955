//! Closed-form outage probabilities of the secondary user, the high-SNR
//! approximations, and a quadrature oracle that integrates the Case II
//! outage regions directly.
//!
//! Cases I and III are shared by RS, QoS-SIC and NH-SIC, so only the
//! Case II term differs between those three schemes.

use crate::error::{Error, Result};
use crate::model::{SchemeKind, SystemParams};
use crate::quadrature::{self, DEFAULT_MAX_EVALUATIONS};
use crate::scalar::Real;

/// Width of the `|nu + 1|` window where `mu` switches to its series form.
pub const MU_SERIES_WINDOW: f64 = 1e-6;

/// Outer integration length for unbounded QoS-SIC regions; the density
/// `e^{-g0}` has dropped below `1e-26` by then.
const QOS_TAIL_LENGTH: f64 = 60.0;
const GEOMETRIC_PIECES: i32 = 48;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuArgs<T> {
    pub nu: T,
    pub eta0: T,
    pub eps1: T,
}

/// Per-case and total outage probabilities of U1 under one scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutageBreakdown<T> {
    pub scheme: SchemeKind,
    pub p_case1: T,
    pub p_case2: T,
    pub p_case3: T,
    pub p_total: T,
    /// `None` when the Case II condition has zero probability.
    pub conditional_case2: Option<T>,
}

/// `mu(nu) = integral of e^{-y (nu + 1)} for y in [eta0, eta0 (1 + eps1)]`.
///
/// Continuous in `nu`; at `nu = -1` it is the interval length `eta0 eps1`.
pub fn mu<T: Real>(args: MuArgs<T>) -> T {
    scaled_mu(T::zero(), args.nu, args.eta0, args.eps1)
}

/// `e^{log_scale} * mu(nu)`, with the prefactor folded into the exponent so
/// that neither factor overflows on its own.
fn scaled_mu<T: Real>(log_scale: T, nu: T, eta0: T, eps1: T) -> T {
    if eta0 == T::zero() || eps1 == T::zero() {
        return T::zero();
    }
    let s = nu + T::one();
    let width = eta0 * eps1;
    let upper = eta0 + width;
    if s.abs() < T::lit(MU_SERIES_WINDOW) {
        let ws = width * s;
        let series = T::one() - ws / T::lit(2.0) + ws * ws / T::lit(6.0);
        (log_scale - eta0 * s).exp() * width * series
    } else if s > T::zero() {
        (log_scale - eta0 * s).exp() * -(-width * s).exp_m1() / s
    } else {
        (log_scale - upper * s).exp() * (width * s).exp_m1() / s
    }
}

fn probability_slack<T: Real>() -> T {
    T::lit(1e-12).max(T::lit(64.0) * T::epsilon())
}

/// Clamps round-off just outside `[0, 1]`; anything further out is a bug.
fn clamp_probability<T: Real>(context: &'static str, p: T) -> Result<T> {
    let slack = probability_slack::<T>();
    if p.is_nan() || p < -slack || p > T::one() + slack {
        return Err(Error::Consistency { context, value: p.as_f64() });
    }
    Ok(p.max(T::zero()).min(T::one()))
}

fn no_secondary_outage<T: Real>(params: &SystemParams<T>) -> bool {
    params.eps1() == T::zero()
}

// e^{1/p1} mu(1/(p1 eta0)): the g1 lower bound term shared by every Case II form.
fn case2_lower_term<T: Real>(params: &SystemParams<T>) -> T {
    let (p1, eta0) = (params.p1(), params.eta0());
    if eta0 == T::zero() {
        return T::zero();
    }
    scaled_mu(T::one() / p1, T::one() / (p1 * eta0), eta0, params.eps1())
}

// e^{-(eps0 + eps1 + eps0 eps1)/p1} mu(-p0/p1): the RS upper bound term.
fn rs_upper_term<T: Real>(params: &SystemParams<T>) -> T {
    let (e0, e1) = (params.eps0(), params.eps1());
    scaled_mu(-(e0 + e1 + e0 * e1) / params.p1(), -params.p0() / params.p1(), params.eta0(), e1)
}

// e^{-eta1} mu(p0 eta1): the benchmark upper bound term.
fn benchmark_upper_term<T: Real>(params: &SystemParams<T>) -> T {
    scaled_mu(-params.eta1(), params.p0() * params.eta1(), params.eta0(), params.eps1())
}

/// `e^{-eta1} (1 - e^{-eta0 (p0 eta1 + 1)}) / (p0 eta1 + 1)`, shared by the
/// Case III and total expressions.
fn case3_tail<T: Real>(params: &SystemParams<T>) -> T {
    let b = params.p0() * params.eta1() + T::one();
    (-params.eta1()).exp() * -(-params.eta0() * b).exp_m1() / b
}

/// Outage of U1 in Case II of the rate-splitting scheme.
pub fn p_case2_rs<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if no_secondary_outage(params) || params.eta0() == T::zero() {
        return Ok(T::zero());
    }
    clamp_probability("p_case2_rs", case2_lower_term(params) - rs_upper_term(params))
}

/// Outage of U1 in Case I (common to RS, QoS-SIC and NH-SIC).
pub fn p_case1<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if no_secondary_outage(params) {
        return Ok(T::zero());
    }
    let (eta0, eta1, eps1) = (params.eta0(), params.eta1(), params.eps1());
    let value = (-eta0).exp() - case2_lower_term(params) - (-eta0 * (T::one() + eps1) - eta1).exp();
    clamp_probability("p_case1", value)
}

/// Outage of U1 in Case III (common to RS, QoS-SIC and NH-SIC).
pub fn p_case3<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if no_secondary_outage(params) || params.eps0() == T::zero() {
        return Ok(T::zero());
    }
    clamp_probability("p_case3", -(-params.eta0()).exp_m1() - case3_tail(params))
}

/// Total RS outage evaluated in one expression, alongside its case terms.
pub fn p_total_rs<T: Real>(params: &SystemParams<T>) -> Result<OutageBreakdown<T>> {
    let p_total = if no_secondary_outage(params) {
        T::zero()
    } else {
        let (eta0, eta1, eps1) = (params.eta0(), params.eta1(), params.eps1());
        let value = -(-eta0 * (T::one() + eps1) - eta1).exp_m1() - rs_upper_term(params) - case3_tail(params);
        clamp_probability("p_total_rs", value)?
    };
    let p_case2 = p_case2_rs(params)?;
    Ok(OutageBreakdown {
        scheme: SchemeKind::Rs,
        p_case1: p_case1(params)?,
        p_case2,
        p_case3: p_case3(params)?,
        p_total,
        conditional_case2: conditional_from(p_case2, params),
    })
}

/// High-SNR approximation of the total RS outage: `eta1`.
pub fn p_total_rs_high_snr<T: Real>(params: &SystemParams<T>) -> T {
    params.eta1()
}

/// High-SNR per-case approximations `(case I, case II, case III)` quoted
/// for equal transmit powers. Only the Case I term, which dominates, tracks
/// the exact values closely.
pub fn high_snr_case_terms<T: Real>(params: &SystemParams<T>) -> (T, T, T) {
    let (e0, e1, p1) = (params.eps0(), params.eps1(), params.p1());
    let one = T::one();
    let p1sq = p1 * p1;
    (params.eta1(), e0 * e1 * (one + e0) * (one + e1) / p1sq, e0 * e1 * (one + e0) / p1sq)
}

/// NH-SIC Case II outage.
pub fn p_case2_nh<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if no_secondary_outage(params) || params.eta0() == T::zero() {
        return Ok(T::zero());
    }
    clamp_probability("p_case2_nh", case2_lower_term(params) - benchmark_upper_term(params))
}

/// QoS-SIC Case II outage, integrated over the region where the g1 interval
/// `((p0 g0/eps0 - 1)/p1, eps1 (1 + p0 g0)/p1)` is non-empty. That region is
/// bounded only when `eps0 eps1 < 1`.
pub fn p_case2_qos<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if no_secondary_outage(params) || params.eta0() == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let (p0, p1, e0, e1) = (params.p0(), params.p1(), params.eps0(), params.eps1());
    let (eta0, eta1) = (params.eta0(), params.eta1());
    let a = one + one / (p1 * eta0);
    let b = one + p0 * eta1;
    // length of the g0 interval above eta0
    let span = if e0 * e1 < one { eta0 * e1 * (one + e0) / (one - e0 * e1) } else { T::infinity() };
    let lower = (-eta0).exp() * -(-a * span).exp_m1() / a;
    let upper = (-eta1 - b * eta0).exp() * -(-b * span).exp_m1() / b;
    clamp_probability("p_case2_qos", lower - upper)
}

/// The high-SNR floor of the QoS-SIC Case II outage,
/// `P0 P1 (eps0 eps1 - 1) / ((P0 eps1 + P1)(P0 + eps0 P1))` when
/// `eps0 eps1 >= 1`, and zero otherwise.
pub fn qos_error_floor<T: Real>(params: &SystemParams<T>) -> T {
    let (p0, p1, e0, e1) = (params.p0(), params.p1(), params.eps0(), params.eps1());
    if e0 * e1 < T::one() {
        return T::zero();
    }
    p0 * p1 * (e0 * e1 - T::one()) / ((p0 * e1 + p1) * (p0 + e0 * p1))
}

/// How much lower the RS Case II outage is than NH-SIC's.
pub fn delta_case2<T: Real>(params: &SystemParams<T>) -> Result<T> {
    if no_secondary_outage(params) || params.eta0() == T::zero() {
        return Ok(T::zero());
    }
    clamp_probability("delta_case2", rs_upper_term(params) - benchmark_upper_term(params))
}

/// `Pr{tau > 0, p1 g1 > tau}`.
pub fn pr_case2_condition<T: Real>(params: &SystemParams<T>) -> T {
    let x = params.p1() * params.eta0();
    if x.is_infinite() {
        return T::zero();
    }
    x * (-params.eta0()).exp() / (T::one() + x)
}

fn conditional_from<T: Real>(p_case2: T, params: &SystemParams<T>) -> Option<T> {
    let condition = pr_case2_condition(params);
    if condition.as_f64() < 1e-300 {
        None
    } else {
        Some((p_case2 / condition).min(T::one()))
    }
}

pub fn p_case2<T: Real>(scheme: SchemeKind, params: &SystemParams<T>) -> Result<T> {
    match scheme {
        SchemeKind::Rs => p_case2_rs(params),
        SchemeKind::QosSic => p_case2_qos(params),
        SchemeKind::NhSic => p_case2_nh(params),
        other => Err(Error::UnsupportedScheme(other.name())),
    }
}

/// Case II outage given the Case II channel condition.
pub fn conditional_case2<T: Real>(scheme: SchemeKind, params: &SystemParams<T>) -> Result<T> {
    let p = p_case2(scheme, params)?;
    conditional_from(p, params).ok_or(Error::ConditionImpossible)
}

/// Outage breakdown for any scheme with a closed form.
pub fn outage_breakdown<T: Real>(scheme: SchemeKind, params: &SystemParams<T>) -> Result<OutageBreakdown<T>> {
    if scheme == SchemeKind::Rs {
        return p_total_rs(params);
    }
    let p_case2 = p_case2(scheme, params)?;
    let p_case1 = p_case1(params)?;
    let p_case3 = p_case3(params)?;
    Ok(OutageBreakdown {
        scheme,
        p_case1,
        p_case2,
        p_case3,
        p_total: clamp_probability("p_total", p_case1 + p_case2 + p_case3)?,
        conditional_case2: conditional_from(p_case2, params),
    })
}

/// U0 outage when it occupies the resource alone.
pub fn oma_primary_outage<T: Real>(params: &SystemParams<T>) -> T {
    -(-params.eta0()).exp_m1()
}

/// Numerically integrates the scheme's Case II outage region against the
/// joint density `e^{-g0} e^{-g1}`. The inner g1 integral is exact; the
/// outer g0 integral is adaptive.
pub fn quadrature_case2<T: Real>(scheme: SchemeKind, params: &SystemParams<T>, tol: T) -> Result<T> {
    if !(tol > T::zero() && tol <= T::lit(1e-4)) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("{tol} not in (0, 1e-4]") });
    }
    if !scheme.has_closed_form() {
        return Err(Error::UnsupportedScheme(scheme.name()));
    }
    if no_secondary_outage(params) || params.eta0() == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let (p0, p1, e0, e1, eta0) = (params.p0(), params.p1(), params.eps0(), params.eps1(), params.eta0());

    // g1 must clear the interference threshold for the draw to be in Case II
    let lower = move |g0: T| (g0 / eta0 - one) / p1;
    let upper: Box<dyn Fn(T) -> T + Send + Sync> = match scheme {
        SchemeKind::Rs => Box::new(move |g0: T| ((one + e0) * (one + e1) - (one + p0 * g0)) / p1),
        _ => Box::new(move |g0: T| e1 * (one + p0 * g0) / p1),
    };
    let outer_end = match scheme {
        SchemeKind::Rs | SchemeKind::NhSic => eta0 * (one + e1),
        _ if e0 * e1 < one => eta0 * (one + e1) / (one - e0 * e1),
        _ => eta0 + T::lit(QOS_TAIL_LENGTH),
    };
    let integrand = |g0: T| {
        let lo = lower(g0).max(T::zero());
        let hi = upper(g0);
        if hi <= lo {
            T::zero()
        } else {
            (-g0 - lo).exp() * -(lo - hi).exp_m1()
        }
    };
    // The mass can sit in a sliver just above eta0 (width ~ p1 eta0), too
    // narrow for a single rule on the whole range to notice, so the range
    // is cut into pieces that double in width away from eta0.
    let length = outer_end - eta0;
    let mut total = T::zero();
    let mut start = eta0;
    for k in (0..=GEOMETRIC_PIECES).rev() {
        let end = if k == 0 { outer_end } else { eta0 + length * T::lit(0.5f64.powi(k)) };
        total = total + quadrature::integrate(&integrand, start, end, tol, T::zero(), DEFAULT_MAX_EVALUATIONS)?.value;
        start = end;
    }
    clamp_probability("quadrature_case2", total)
}
