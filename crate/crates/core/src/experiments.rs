//! Parameter sweeps over transmit SNR or secondary target rate, run through
//! both the closed forms and the Monte Carlo simulator, and written out as
//! CSV rows.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::{SchemeKind, SystemParams};
use crate::montecarlo::{self, binomial_sigma, Summary};

pub const CSV_HEADER: [&str; 10] =
    ["p0_db", "p1_db", "r0_target", "r1_target", "scheme", "metric", "analytic", "mc", "mc_ci95", "n_trials"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    P1Db,
    R1Target,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCoupling {
    /// `P0 = P1`
    Equal,
    /// `P0 = P1 / 10`
    #[serde(rename = "ratio_10")]
    Ratio10,
    /// `P0` taken from `p0_db`.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThroughputMode {
    FixedRate,
    AdaptiveRate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Unconditional,
    ConditionalCase2,
    Throughput,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub sweep_variable: SweepVariable,
    pub range: SweepRange,
    pub power_coupling: PowerCoupling,
    /// Used when `power_coupling` is `fixed`.
    pub p0_db: f64,
    /// Used when the swept variable is `r1_target`.
    pub p1_db: f64,
    pub r0_target: f64,
    /// Used when the swept variable is `p1_db`.
    pub r1_target: f64,
    pub schemes: Vec<SchemeKind>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_streams")]
    pub streams: u32,
    pub throughput_mode: ThroughputMode,
    pub outputs: Vec<OutputKind>,
}

fn default_streams() -> u32 {
    8
}

pub const PRESETS: [&str; 5] = ["fig1a", "fig1b", "fig2a", "fig2b", "fig3"];

const BENCHMARK_SCHEMES: [SchemeKind; 4] =
    [SchemeKind::Rs, SchemeKind::QosSic, SchemeKind::NhSic, SchemeKind::CsiSic];

impl SweepSpec {
    /// Named settings for the published figures. Target rates that the
    /// figures leave unstated default to 1 BPCU.
    pub fn preset(name: &str) -> Result<SweepSpec> {
        let snr_sweep = |coupling, outputs: Vec<OutputKind>| SweepSpec {
            sweep_variable: SweepVariable::P1Db,
            range: SweepRange { start: 0.0, stop: 40.0, step: 2.0 },
            power_coupling: coupling,
            p0_db: 0.0,
            p1_db: 0.0,
            r0_target: 1.0,
            r1_target: 1.0,
            schemes: BENCHMARK_SCHEMES.to_vec(),
            trials: 1_000_000,
            seed: 2024,
            streams: default_streams(),
            throughput_mode: ThroughputMode::AdaptiveRate,
            outputs,
        };
        let outage = vec![OutputKind::Unconditional, OutputKind::ConditionalCase2];
        Ok(match name {
            "fig1a" => snr_sweep(PowerCoupling::Equal, outage),
            "fig1b" => snr_sweep(PowerCoupling::Ratio10, outage),
            "fig2a" => snr_sweep(PowerCoupling::Ratio10, vec![OutputKind::ConditionalCase2]),
            "fig2b" => SweepSpec {
                sweep_variable: SweepVariable::R1Target,
                range: SweepRange { start: 0.1, stop: 3.0, step: 0.1 },
                power_coupling: PowerCoupling::Fixed,
                p0_db: 15.0,
                p1_db: 20.0,
                ..snr_sweep(PowerCoupling::Fixed, vec![OutputKind::ConditionalCase2])
            },
            "fig3" => snr_sweep(PowerCoupling::Ratio10, vec![OutputKind::Throughput]),
            other => {
                return Err(Error::Config {
                    field: "preset".into(),
                    reason: format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
                })
            }
        })
    }

    pub fn from_json(text: &str) -> Result<SweepSpec> {
        serde_json::from_str(text).map_err(|e| Error::Config { field: "config".into(), reason: e.to_string() })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::Config { field: field.into(), reason });
        let SweepRange { start, stop, step } = self.range;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return bad("range", "non-finite bound".into());
        }
        if step <= 0.0 {
            return bad("range.step", format!("{step} must be > 0"));
        }
        if stop < start {
            return bad("range", format!("empty range {start}..{stop}"));
        }
        if self.trials == 0 {
            return bad("trials", "must be >= 1".into());
        }
        if self.streams == 0 {
            return bad("streams", "must be >= 1".into());
        }
        if self.schemes.is_empty() {
            return bad("schemes", "no scheme selected".into());
        }
        if self.outputs.is_empty() {
            return bad("outputs", "no output selected".into());
        }
        for (field, v) in [("p0_db", self.p0_db), ("p1_db", self.p1_db)] {
            if !v.is_finite() {
                return bad(field, format!("{v} is not finite"));
            }
        }
        for (field, v) in [("r0_target", self.r0_target), ("r1_target", self.r1_target)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(field, format!("{v} must be finite and >= 0"));
            }
        }
        if self.sweep_variable == SweepVariable::R1Target && start < 0.0 {
            return bad("range.start", "target rates must be >= 0".into());
        }
        for point in self.grid() {
            point.params()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let SweepRange { start, stop, step } = self.range;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                // snap to a 1e-9 lattice so 0.1 + 0.1 + ... does not drift
                let x = ((start + i as f64 * step) * 1e9).round() / 1e9;
                let (p1_db, r1_target) = match self.sweep_variable {
                    SweepVariable::P1Db => (x, self.r1_target),
                    SweepVariable::R1Target => (self.p1_db, x),
                };
                let p0_db = match self.power_coupling {
                    PowerCoupling::Equal => p1_db,
                    PowerCoupling::Ratio10 => p1_db - 10.0,
                    PowerCoupling::Fixed => self.p0_db,
                };
                GridPoint { index: i, p0_db, p1_db, r0_target: self.r0_target, r1_target }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub p0_db: f64,
    pub p1_db: f64,
    pub r0_target: f64,
    pub r1_target: f64,
}

impl GridPoint {
    pub fn params(&self) -> Result<SystemParams<f64>> {
        SystemParams::from_db(self.p0_db, self.p1_db, self.r0_target, self.r1_target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    U1Outage,
    U1OutageCase1,
    U1OutageCase2,
    U1OutageCase3,
    Case2Condition,
    U0Outage,
    U1ConditionalCase2,
    ThroughputFixed,
    ThroughputAdaptive,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::U1Outage => "u1_outage",
            MetricKind::U1OutageCase1 => "u1_outage_case1",
            MetricKind::U1OutageCase2 => "u1_outage_case2",
            MetricKind::U1OutageCase3 => "u1_outage_case3",
            MetricKind::Case2Condition => "case2_condition",
            MetricKind::U0Outage => "u0_outage",
            MetricKind::U1ConditionalCase2 => "u1_conditional_case2",
            MetricKind::ThroughputFixed => "throughput_fixed",
            MetricKind::ThroughputAdaptive => "throughput_adaptive",
        }
    }

    fn is_probability(self) -> bool {
        !matches!(self, MetricKind::ThroughputFixed | MetricKind::ThroughputAdaptive)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub p0_db: f64,
    pub p1_db: f64,
    pub r0_target: f64,
    pub r1_target: f64,
    pub scheme: SchemeKind,
    pub metric: MetricKind,
    pub analytic: Option<f64>,
    pub mc: Option<f64>,
    pub mc_ci95: Option<f64>,
    pub n_trials: u64,
    /// Samples behind `mc` (the Case II draws for the conditional metric).
    pub mc_samples: u64,
    /// Set when the closed form could not be evaluated.
    pub error: Option<String>,
}

fn metrics_for(scheme: SchemeKind, outputs: &[OutputKind], mode: ThroughputMode) -> Vec<MetricKind> {
    if scheme == SchemeKind::OmaPrimary {
        return if outputs.contains(&OutputKind::Unconditional) { vec![MetricKind::U0Outage] } else { vec![] };
    }
    let mut metrics = Vec::new();
    for out in outputs {
        match out {
            OutputKind::Unconditional => metrics.extend([
                MetricKind::U1Outage,
                MetricKind::U1OutageCase1,
                MetricKind::U1OutageCase2,
                MetricKind::U1OutageCase3,
                MetricKind::Case2Condition,
                MetricKind::U0Outage,
            ]),
            OutputKind::ConditionalCase2 => metrics.push(MetricKind::U1ConditionalCase2),
            OutputKind::Throughput => match mode {
                ThroughputMode::AdaptiveRate => {
                    metrics.extend([MetricKind::ThroughputAdaptive, MetricKind::ThroughputFixed])
                }
                ThroughputMode::FixedRate => {
                    metrics.extend([MetricKind::ThroughputFixed, MetricKind::ThroughputAdaptive])
                }
            },
        }
    }
    metrics.dedup();
    metrics
}

/// Closed-form value of a metric; `Ok(None)` when the scheme has none.
fn analytic_value(scheme: SchemeKind, metric: MetricKind, params: &SystemParams<f64>) -> Result<Option<f64>> {
    if scheme == SchemeKind::OmaPrimary {
        return Ok((metric == MetricKind::U0Outage).then(|| analytic::oma_primary_outage(params)));
    }
    if !scheme.has_closed_form() {
        return Ok(None);
    }
    let b = analytic::outage_breakdown(scheme, params)?;
    Ok(match metric {
        MetricKind::U1Outage => Some(b.p_total),
        MetricKind::U1OutageCase1 => Some(b.p_case1),
        MetricKind::U1OutageCase2 => Some(b.p_case2),
        MetricKind::U1OutageCase3 => Some(b.p_case3),
        MetricKind::Case2Condition => Some(analytic::pr_case2_condition(params)),
        MetricKind::U0Outage => Some(analytic::oma_primary_outage(params)),
        MetricKind::U1ConditionalCase2 => b.conditional_case2,
        MetricKind::ThroughputFixed => Some(params.r1_target() * (1.0 - b.p_total)),
        MetricKind::ThroughputAdaptive => None,
    })
}

/// `(estimate, ci95 half-width, samples)`.
fn mc_value(metric: MetricKind, s: &Summary, r1_target: f64) -> (Option<f64>, Option<f64>, u64) {
    let est = |e: &montecarlo::EstimateWithCI| (Some(e.p_hat), Some(e.ci95_halfwidth), e.n);
    match metric {
        MetricKind::U1Outage => est(&s.u1),
        MetricKind::U1OutageCase1 => est(&s.per_case[0]),
        MetricKind::U1OutageCase2 => est(&s.per_case[1]),
        MetricKind::U1OutageCase3 => est(&s.per_case[2]),
        MetricKind::Case2Condition => est(&s.case2_condition),
        MetricKind::U0Outage => est(&s.u0),
        MetricKind::U1ConditionalCase2 => s.conditional_case2.as_ref().map_or((None, None, 0), est),
        MetricKind::ThroughputFixed => {
            (Some(s.throughput_fixed), Some(r1_target * s.u1.ci95_halfwidth), s.u1.n)
        }
        MetricKind::ThroughputAdaptive => (Some(s.throughput_adaptive), None, s.u1.n),
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Master seed of one grid point. Schemes at the same point share it.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

fn run_point(spec: &SweepSpec, point: &GridPoint) -> Result<Vec<ResultRow>> {
    let params = point.params()?;
    let seed = point_seed(spec.seed, point.index);
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        let metrics = metrics_for(scheme, &spec.outputs, spec.throughput_mode);
        if metrics.is_empty() {
            continue;
        }
        let acc = montecarlo::run_parallel(scheme, &params, spec.trials, seed, spec.streams)?;
        let summary = montecarlo::summarize(&acc)?;
        for metric in metrics {
            let (analytic, error) = match analytic_value(scheme, metric, &params) {
                Ok(v) => (v, None),
                Err(e) => (None, Some(e.to_string())),
            };
            let (mc, mc_ci95, mc_samples) = mc_value(metric, &summary, point.r1_target);
            rows.push(ResultRow {
                p0_db: point.p0_db,
                p1_db: point.p1_db,
                r0_target: point.r0_target,
                r1_target: point.r1_target,
                scheme,
                metric,
                analytic,
                mc,
                mc_ci95,
                n_trials: acc.n_trials,
                mc_samples,
                error,
            });
        }
    }
    Ok(rows)
}

/// Rows ordered by grid point, then scheme in spec order, then metric.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let per_point = spec.grid().par_iter().map(|p| run_point(spec, p)).collect::<Result<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_sig9).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let analytic = if r.error.is_some() { "ERR".to_string() } else { opt(r.analytic) };
        w.write_record([
            format_sig9(r.p0_db),
            format_sig9(r.p1_db),
            format_sig9(r.r0_target),
            format_sig9(r.r1_target),
            r.scheme.name().to_string(),
            r.metric.name().to_string(),
            analytic,
            opt(r.mc),
            opt(r.mc_ci95),
            r.n_trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    write_csv(rows, file).map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flag {
    pub p0_db: f64,
    pub p1_db: f64,
    pub r1_target: f64,
    pub scheme: SchemeKind,
    pub metric: MetricKind,
    pub analytic: f64,
    pub mc: f64,
    /// `|mc - analytic| / sigma`
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuralFailure {
    pub p0_db: f64,
    pub p1_db: f64,
    pub r1_target: f64,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub sigma_band: f64,
    pub comparisons: usize,
    pub flags: Vec<Flag>,
    pub flag_rate: f64,
    pub max_flag_rate: f64,
    /// `(scheme, metric)` series flagged at every grid point.
    pub systematic: Vec<(SchemeKind, MetricKind)>,
    pub structural_checks: usize,
    pub structural_failures: Vec<StructuralFailure>,
    pub row_errors: Vec<String>,
    pub passed: bool,
}

pub const DEFAULT_MAX_FLAG_RATE: f64 = 0.01;
const FLOAT_SLACK: f64 = 1e-12;
const QUADRATURE_TOL: f64 = 1e-10;
const QUADRATURE_AGREEMENT: f64 = 1e-8;

/// Sampling standard deviation of the estimate behind `row`, taken at the
/// analytic value.
fn row_sigma(row: &ResultRow, analytic: f64) -> Option<f64> {
    if row.metric.is_probability() {
        Some(binomial_sigma(analytic, row.mc_samples))
    } else if row.metric == MetricKind::ThroughputFixed && row.r1_target > 0.0 {
        let p_out = (1.0 - analytic / row.r1_target).clamp(0.0, 1.0);
        Some(row.r1_target * binomial_sigma(p_out, row.mc_samples))
    } else {
        None
    }
}

fn structural_checks(point: &GridPoint, spec: &SweepSpec) -> (usize, Vec<StructuralFailure>) {
    let mut count = 0;
    let mut failures = Vec::new();
    let mut fail = |check: &str, detail: String| {
        failures.push(StructuralFailure {
            p0_db: point.p0_db,
            p1_db: point.p1_db,
            r1_target: point.r1_target,
            check: check.into(),
            detail,
        })
    };
    let params = match point.params() {
        Ok(p) => p,
        Err(e) => {
            fail("params", e.to_string());
            return (1, failures);
        }
    };
    let closed: Vec<SchemeKind> = spec.schemes.iter().copied().filter(|s| s.has_closed_form()).collect();
    if closed.is_empty() {
        return (0, failures);
    }

    count += 1;
    match analytic::p_total_rs(&params) {
        Ok(b) => {
            let sum = b.p_case1 + b.p_case2 + b.p_case3;
            if (b.p_total - sum).abs() > FLOAT_SLACK {
                fail("additivity", format!("total {:e} vs case sum {sum:e}", b.p_total));
            }
        }
        Err(e) => fail("additivity", e.to_string()),
    }

    count += 1;
    match (analytic::delta_case2(&params), analytic::p_case2_nh(&params), analytic::p_case2_rs(&params)) {
        (Ok(d), Ok(nh), Ok(rs)) => {
            if d < 0.0 || (d - (nh - rs)).abs() > FLOAT_SLACK {
                fail("delta", format!("delta {d:e}, nh - rs {:e}", nh - rs));
            }
        }
        (d, nh, rs) => fail("delta", format!("{d:?} {nh:?} {rs:?}")),
    }

    for scheme in closed {
        count += 1;
        let closed_form = analytic::p_case2(scheme, &params);
        let quad = analytic::quadrature_case2(scheme, &params, QUADRATURE_TOL);
        match (closed_form, quad) {
            (Ok(c), Ok(q)) => {
                let gap = (c - q).abs();
                if gap > QUADRATURE_AGREEMENT * c.abs().max(q.abs()) && gap > 1e-15 {
                    fail("quadrature", format!("{scheme}: closed form {c:e}, quadrature {q:e}"));
                }
            }
            (c, q) => fail("quadrature", format!("{scheme}: {c:?} / {q:?}")),
        }
    }
    (count, failures)
}

/// Runs the sweep, compares every Monte Carlo estimate with its closed form
/// inside a `sigma_band` binomial band, and re-checks the closed forms
/// against each other and against quadrature at each grid point.
pub fn validate(spec: &SweepSpec, sigma_band: f64) -> Result<(Vec<ResultRow>, ValidationReport)> {
    if !(sigma_band.is_finite() && sigma_band > 0.0) {
        return Err(Error::Config { field: "sigma_band".into(), reason: format!("{sigma_band} must be > 0") });
    }
    let rows = run_sweep(spec)?;
    let grid = spec.grid();

    let mut comparisons = 0;
    let mut flags = Vec::new();
    let mut row_errors = Vec::new();
    let mut series: std::collections::BTreeMap<(SchemeKind, MetricKind), (usize, usize)> = Default::default();
    for row in &rows {
        if let Some(e) = &row.error {
            row_errors.push(format!("{} {} at p1={} dB r1={}: {e}", row.scheme, row.metric, row.p1_db, row.r1_target));
            continue;
        }
        let (Some(a), Some(mc)) = (row.analytic, row.mc) else { continue };
        let Some(sigma) = row_sigma(row, a) else { continue };
        comparisons += 1;
        let gap = (mc - a).abs();
        let entry = series.entry((row.scheme, row.metric)).or_default();
        entry.0 += 1;
        if gap > sigma_band * sigma + FLOAT_SLACK {
            entry.1 += 1;
            flags.push(Flag {
                p0_db: row.p0_db,
                p1_db: row.p1_db,
                r1_target: row.r1_target,
                scheme: row.scheme,
                metric: row.metric,
                analytic: a,
                mc,
                z: if sigma > 0.0 { gap / sigma } else { f64::INFINITY },
            });
        }
    }
    let systematic = series
        .iter()
        .filter(|(_, &(n, bad))| n >= 3 && bad == n)
        .map(|(&k, _)| k)
        .collect::<Vec<_>>();

    let structural = grid.par_iter().map(|p| structural_checks(p, spec)).collect::<Vec<_>>();
    let structural_checks = structural.iter().map(|(n, _)| n).sum();
    let structural_failures: Vec<StructuralFailure> = structural.into_iter().flat_map(|(_, f)| f).collect();

    let flag_rate = if comparisons == 0 { 0.0 } else { flags.len() as f64 / comparisons as f64 };
    let passed = structural_failures.is_empty()
        && row_errors.is_empty()
        && systematic.is_empty()
        && flag_rate <= DEFAULT_MAX_FLAG_RATE;
    let report = ValidationReport {
        sigma_band,
        comparisons,
        flags,
        flag_rate,
        max_flag_rate: DEFAULT_MAX_FLAG_RATE,
        systematic,
        structural_checks,
        structural_failures,
        row_errors,
        passed,
    };
    Ok((rows, report))
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation ({}-sigma band)", self.sigma_band)?;
        writeln!(
            f,
            "  monte carlo vs closed form: {} comparisons, {} flagged ({:.3}%, limit {:.1}%)",
            self.comparisons,
            self.flags.len(),
            100.0 * self.flag_rate,
            100.0 * self.max_flag_rate
        )?;
        for fl in &self.flags {
            writeln!(
                f,
                "    FLAG {} {} p0={} dB p1={} dB r1={}: analytic {:.6e} mc {:.6e} (z = {:.2})",
                fl.scheme, fl.metric, fl.p0_db, fl.p1_db, fl.r1_target, fl.analytic, fl.mc, fl.z
            )?;
        }
        for (scheme, metric) in &self.systematic {
            writeln!(f, "    SYSTEMATIC {scheme} {metric}: flagged at every grid point")?;
        }
        writeln!(
            f,
            "  structural checks: {} run, {} failed",
            self.structural_checks,
            self.structural_failures.len()
        )?;
        for s in &self.structural_failures {
            writeln!(f, "    FAIL {} at p0={} dB p1={} dB r1={}: {}", s.check, s.p0_db, s.p1_db, s.r1_target, s.detail)?;
        }
        for e in &self.row_errors {
            writeln!(f, "    ERROR {e}")?;
        }
        write!(f, "  result: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}
