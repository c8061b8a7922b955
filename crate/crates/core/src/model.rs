//! Per-realization logic of the uplink CR-NOMA link.
//!
//! Everything here is a pure function of `(SystemParams, ChannelRealization)`:
//! the interference threshold the base station hands to the secondary user,
//! the operating case it implies, the rate-splitting power split, and the
//! outcome of one transmission block under each decoding scheme.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Transmit SNRs, target rates and the constants derived from them.
///
/// Noise power is normalized to one, so a transmit power is a transmit SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T> {
    p0: T,
    p1: T,
    r0_target: T,
    r1_target: T,
    eps0: T,
    eps1: T,
    eta0: T,
    eta1: T,
}

impl<T: Real> SystemParams<T> {
    /// Builds parameters from linear transmit SNRs and target rates in BPCU.
    pub fn from_linear(p0: T, p1: T, r0_target: T, r1_target: T) -> Result<Self> {
        check_positive("p0", p0)?;
        check_positive("p1", p1)?;
        check_rate("r0_target", r0_target)?;
        check_rate("r1_target", r1_target)?;
        let two = T::lit(2.0);
        let eps0 = two.powf(r0_target) - T::one();
        let eps1 = two.powf(r1_target) - T::one();
        Ok(Self {
            p0,
            p1,
            r0_target,
            r1_target,
            eps0,
            eps1,
            eta0: eps0 / p0,
            eta1: eps1 / p1,
        })
    }

    /// Builds parameters from transmit SNRs in dB.
    pub fn from_db(p0_db: T, p1_db: T, r0_target: T, r1_target: T) -> Result<Self> {
        check_finite("p0_db", p0_db)?;
        check_finite("p1_db", p1_db)?;
        Self::from_linear(db_to_linear(p0_db), db_to_linear(p1_db), r0_target, r1_target)
    }

    pub fn p0(&self) -> T {
        self.p0
    }
    pub fn p1(&self) -> T {
        self.p1
    }
    pub fn r0_target(&self) -> T {
        self.r0_target
    }
    pub fn r1_target(&self) -> T {
        self.r1_target
    }
    /// `2^r0 - 1`
    pub fn eps0(&self) -> T {
        self.eps0
    }
    /// `2^r1 - 1`
    pub fn eps1(&self) -> T {
        self.eps1
    }
    /// `eps0 / p0`, the channel gain U0 needs to meet its own target.
    pub fn eta0(&self) -> T {
        self.eta0
    }
    /// `eps1 / p1`
    pub fn eta1(&self) -> T {
        self.eta1
    }
}

/// `derive_params`: dB powers and BPCU targets to [`SystemParams`].
pub fn derive_params<T: Real>(p0_db: T, p1_db: T, r0_target: T, r1_target: T) -> Result<SystemParams<T>> {
    SystemParams::from_db(p0_db, p1_db, r0_target, r1_target)
}

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

fn check_finite<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("{v} is not finite") })
    }
}

fn check_positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    check_finite(name, v)?;
    if v > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("{v} must be > 0") })
    }
}

fn check_rate<T: Real>(name: &'static str, v: T) -> Result<()> {
    check_finite(name, v)?;
    if v >= T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("{v} must be >= 0") })
    }
}

/// One fading draw: `g_i = |h_i|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    pub g0: T,
    pub g1: T,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(g0: T, g1: T) -> Result<Self> {
        for (name, g) in [("g0", g0), ("g1", g1)] {
            if !(g >= T::zero()) || !g.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("{g} must be finite and >= 0") });
            }
        }
        Ok(Self { g0, g1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemeKind {
    /// Proposed rate-splitting scheme.
    Rs,
    QosSic,
    NhSic,
    CsiSic,
    /// U0 alone on the resource block; only its outage is meaningful.
    OmaPrimary,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] =
        [SchemeKind::Rs, SchemeKind::QosSic, SchemeKind::NhSic, SchemeKind::CsiSic, SchemeKind::OmaPrimary];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Rs => "RS",
            SchemeKind::QosSic => "QOS_SIC",
            SchemeKind::NhSic => "NH_SIC",
            SchemeKind::CsiSic => "CSI_SIC",
            SchemeKind::OmaPrimary => "OMA_PRIMARY",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == norm)
    }

    /// Schemes that share Cases I and III and differ only in Case II.
    pub fn has_closed_form(self) -> bool {
        matches!(self, SchemeKind::Rs | SchemeKind::QosSic | SchemeKind::NhSic)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatingCase {
    /// `tau > 0` and `p1 g1 <= tau`
    CaseI,
    /// `tau > 0` and `p1 g1 > tau`
    CaseII,
    /// `tau = 0`
    CaseIII,
}

impl OperatingCase {
    pub fn index(self) -> usize {
        match self {
            OperatingCase::CaseI => 0,
            OperatingCase::CaseII => 1,
            OperatingCase::CaseIII => 2,
        }
    }
}

/// SINRs at each SIC stage and the rates they support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBreakdown<T> {
    pub gamma11: T,
    pub gamma0: T,
    pub gamma12: T,
    pub r11: T,
    pub r12: T,
    pub r1: T,
    pub r0: T,
}

impl<T: Real> RateBreakdown<T> {
    fn from_sinrs(gamma11: T, gamma0: T, gamma12: T) -> Self {
        let r11 = gamma11.log2_1p();
        let r12 = gamma12.log2_1p();
        Self { gamma11, gamma0, gamma12, r11, r12, r1: r11 + r12, r0: gamma0.log2_1p() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmissionOutcome<T> {
    pub scheme: SchemeKind,
    pub case: OperatingCase,
    pub tau: T,
    pub alpha: T,
    pub rates: RateBreakdown<T>,
    pub u1_transmits: bool,
    pub u1_outage: bool,
    pub u0_outage: bool,
    /// `r1_target` when U1 is not in outage, else 0.
    pub u1_throughput_fixed: T,
    /// Achieved `r1` whenever U1 transmits, else 0.
    pub u1_throughput_adaptive: T,
}

/// Interference power U0 can absorb while still meeting its target.
///
/// Returns `+inf` when `eps0 = 0`: a zero-rate primary never falls into
/// outage, so U1 is unconstrained.
pub fn interference_threshold<T: Real>(params: &SystemParams<T>, g0: T) -> T {
    if params.eps0 == T::zero() {
        return T::infinity();
    }
    (params.p0 * g0 / params.eps0 - T::one()).max(T::zero())
}

/// The boundary `p1 g1 = tau` belongs to Case I, where Case I and Case II
/// rates coincide.
pub fn classify_case<T: Real>(params: &SystemParams<T>, ch: &ChannelRealization<T>) -> OperatingCase {
    let tau = interference_threshold(params, ch.g0);
    case_for(tau, params.p1 * ch.g1)
}

fn case_for<T: Real>(tau: T, rx1: T) -> OperatingCase {
    if tau == T::zero() {
        OperatingCase::CaseIII
    } else if rx1 <= tau {
        OperatingCase::CaseI
    } else {
        OperatingCase::CaseII
    }
}

/// Fraction of `p1` given to the first-decoded stream `x1,1`.
pub fn rs_power_split<T: Real>(params: &SystemParams<T>, ch: &ChannelRealization<T>) -> (OperatingCase, T) {
    let tau = interference_threshold(params, ch.g0);
    let rx1 = params.p1 * ch.g1;
    let case = case_for(tau, rx1);
    let alpha = match case {
        OperatingCase::CaseI => T::zero(),
        OperatingCase::CaseII => T::one() - tau / rx1,
        OperatingCase::CaseIII => T::one(),
    };
    (case, alpha)
}

/// SINRs for the decoding order `x1,1 -> x0 -> x1,2`.
pub fn compute_sinrs<T: Real>(params: &SystemParams<T>, ch: &ChannelRealization<T>, alpha: T) -> RateBreakdown<T> {
    let rx1 = params.p1 * ch.g1;
    split_sinrs(params.p0 * ch.g0, alpha * rx1, (T::one() - alpha) * rx1)
}

/// SINRs given the received powers of `x1,1` and `x1,2` directly.
fn split_sinrs<T: Real>(rx0: T, first: T, residual: T) -> RateBreakdown<T> {
    let gamma11 = first / (rx0 + residual + T::one());
    let gamma0 = rx0 / (residual + T::one());
    RateBreakdown::from_sinrs(gamma11, gamma0, residual)
}

/// Achievable U1 rate of the rate-splitting scheme in each operating case.
pub fn rs_achievable_rate<T: Real>(params: &SystemParams<T>, ch: &ChannelRealization<T>) -> (OperatingCase, T) {
    let tau = interference_threshold(params, ch.g0);
    let rx0 = params.p0 * ch.g0;
    let rx1 = params.p1 * ch.g1;
    let case = case_for(tau, rx1);
    let r1 = match case {
        OperatingCase::CaseI => rx1.log2_1p(),
        OperatingCase::CaseII => ((rx1 - tau) / (rx0 + tau + T::one())).log2_1p() + tau.log2_1p(),
        OperatingCase::CaseIII => (rx1 / (rx0 + T::one())).log2_1p(),
    };
    (case, r1)
}

/// QoS-SIC Case II rate: U1 decoded first, treating U0 as noise.
pub fn qos_sic_rate_case2<T: Real>(params: &SystemParams<T>, ch: &ChannelRealization<T>) -> T {
    (params.p1 * ch.g1 / (params.p0 * ch.g0 + T::one())).log2_1p()
}

/// NH-SIC Case II rate: better of decoding U1 first or power-controlling it
/// down to `tau` and decoding it last.
pub fn nh_sic_rate_case2<T: Real>(params: &SystemParams<T>, ch: &ChannelRealization<T>) -> T {
    let tau = interference_threshold(params, ch.g0);
    qos_sic_rate_case2(params, ch).max(tau.log2_1p())
}

pub fn evaluate_outcome<T: Real>(
    scheme: SchemeKind,
    params: &SystemParams<T>,
    ch: &ChannelRealization<T>,
) -> TransmissionOutcome<T> {
    let tau = interference_threshold(params, ch.g0);
    let rx0 = params.p0 * ch.g0;
    let rx1 = params.p1 * ch.g1;
    let case = case_for(tau, rx1);
    let u0_oma_outage = rx0 < params.eps0;

    let (alpha, rates, u1_transmits, u0_outage) = match scheme {
        SchemeKind::OmaPrimary => {
            let rates = RateBreakdown::from_sinrs(T::zero(), rx0, T::zero());
            (T::zero(), rates, false, u0_oma_outage)
        }
        SchemeKind::CsiSic => {
            let (rates, u0_outage) = csi_sic_chain(params, rx0, rx1);
            (T::one(), rates, true, u0_outage)
        }
        SchemeKind::Rs | SchemeKind::QosSic | SchemeKind::NhSic => {
            let (alpha, rates, transmits) = match (case, scheme) {
                (OperatingCase::CaseI, _) => (T::zero(), compute_sinrs(params, ch, T::zero()), true),
                (OperatingCase::CaseIII, _) => (T::one(), compute_sinrs(params, ch, T::one()), true),
                (OperatingCase::CaseII, SchemeKind::Rs) => {
                    let alpha = T::one() - tau / rx1;
                    let rates = split_sinrs(rx0, rx1 - tau, tau);
                    // x1,1 must be decodable before x0, otherwise U1 stays silent.
                    let transmits = rates.r1 >= params.r1_target;
                    (alpha, rates, transmits)
                }
                (OperatingCase::CaseII, SchemeKind::NhSic) if tau.log2_1p() > qos_sic_rate_case2(params, ch) => {
                    let rates = RateBreakdown::from_sinrs(T::zero(), rx0 / (tau + T::one()), tau);
                    (T::zero(), rates, true)
                }
                (OperatingCase::CaseII, _) => (T::one(), compute_sinrs(params, ch, T::one()), true),
            };
            (alpha, rates, transmits, u0_oma_outage)
        }
    };

    let u1_outage = !u1_transmits || rates.r1 < params.r1_target;
    let (fixed, adaptive) = if scheme == SchemeKind::OmaPrimary {
        (T::zero(), T::zero())
    } else {
        (
            if u1_outage { T::zero() } else { params.r1_target },
            if u1_transmits { rates.r1 } else { T::zero() },
        )
    };

    TransmissionOutcome {
        scheme,
        case,
        tau,
        alpha,
        rates,
        u1_transmits,
        u1_outage,
        u0_outage,
        u1_throughput_fixed: fixed,
        u1_throughput_adaptive: adaptive,
    }
}

/// Two-user SIC ordered by received power (ties decode U0 first). A failed
/// first stage leaves its signal uncancelled for the second.
fn csi_sic_chain<T: Real>(params: &SystemParams<T>, rx0: T, rx1: T) -> (RateBreakdown<T>, bool) {
    let one = T::one();
    let (sinr0, sinr1) = if rx0 >= rx1 {
        let sinr0 = rx0 / (rx1 + one);
        let first_ok = sinr0.log2_1p() >= params.r0_target;
        (sinr0, if first_ok { rx1 } else { rx1 / (rx0 + one) })
    } else {
        let sinr1 = rx1 / (rx0 + one);
        let first_ok = sinr1.log2_1p() >= params.r1_target;
        (if first_ok { rx0 } else { rx0 / (rx1 + one) }, sinr1)
    };
    let rates = RateBreakdown::from_sinrs(sinr1, sinr0, T::zero());
    let u0_outage = rates.r0 < params.r0_target;
    (rates, u0_outage)
}
