use std::process::ExitCode;
use std::time::Instant;

use crnoma::analytic::{self, delta_case2, high_snr_case_terms, p_case1, p_case2_nh, p_case2_qos, p_case2_rs, p_case3};
use crnoma::experiments::{self, ResultRow, SweepSpec, ValidationReport};
use crnoma::model::{self, nh_sic_rate_case2, qos_sic_rate_case2, rs_achievable_rate};
use crnoma::montecarlo::{self, ChannelStream, RngSpec, TrialAccumulator};
use crnoma::{ChannelRealization, OperatingCase, SchemeKind, SystemParams};

type Outcome = Result<String, String>;

fn lin(p0: f64, p1: f64, r0: f64, r1: f64) -> SystemParams {
    SystemParams::from_linear(p0, p1, r0, r1).expect("valid parameters")
}

fn db(p0: f64, p1: f64, r0: f64, r1: f64) -> SystemParams {
    SystemParams::from_db(p0, p1, r0, r1).expect("valid parameters")
}

fn close(what: &str, got: f64, want: f64, tol: f64, log: &mut Vec<String>) -> bool {
    let ok = (got - want).abs() <= tol;
    log.push(format!("{what}={got:.7} (want {want}, |d|={:.1e})", (got - want).abs()));
    ok
}

fn verdict(ok: bool, log: Vec<String>) -> Outcome {
    if ok { Ok(log.join("; ")) } else { Err(log.join("; ")) }
}

fn example_rates(p0: f64, p1: f64, want: [f64; 3]) -> Outcome {
    let params = lin(p0, p1, 2.0, 1.0);
    let ch = ChannelRealization::new(10.0, 10.0).unwrap();
    let (case, rs) = rs_achievable_rate(&params, &ch);
    let mut log = vec![format!("{case:?}")];
    let mut ok = case == OperatingCase::CaseII;
    ok &= close("RS", rs, want[0], 1e-3, &mut log);
    ok &= close("QoS", qos_sic_rate_case2(&params, &ch), want[1], 1e-3, &mut log);
    ok &= close("NH", nh_sic_rate_case2(&params, &ch), want[2], 1e-3, &mut log);
    verdict(ok, log)
}

fn criterion_1() -> Outcome {
    example_rates(1.0, 10.0, [4.794, 3.335, 3.335])
}

fn criterion_2() -> Outcome {
    example_rates(10.0, 20.0, [6.233, 1.575, 5.059])
}

fn criterion_3() -> Outcome {
    let powers = [0.0, 10.0, 20.0, 30.0, 40.0];
    let rates = [0.5, 1.0, 2.0];
    let (mut worst, mut at, mut count, mut failures) = (0.0f64, String::new(), 0, Vec::new());
    for &p0 in &powers {
        for &p1 in &powers {
            for &r0 in &rates {
                for &r1 in &rates {
                    let params = db(p0, p1, r0, r1);
                    for scheme in [SchemeKind::Rs, SchemeKind::NhSic] {
                        count += 1;
                        let closed = analytic::p_case2(scheme, &params);
                        let quad = analytic::quadrature_case2(scheme, &params, 1e-10);
                        match (closed, quad) {
                            (Ok(c), Ok(q)) => {
                                let rel = if c == 0.0 { q.abs() } else { ((q - c) / c).abs() };
                                if rel > worst {
                                    worst = rel;
                                    at = format!("{scheme} P0={p0} P1={p1} R0={r0} R1={r1}");
                                }
                                if rel > 1e-8 {
                                    failures.push(format!("{scheme} ({p0},{p1},{r0},{r1}) rel {rel:.2e}"));
                                }
                            }
                            (c, q) => failures.push(format!("{scheme} ({p0},{p1},{r0},{r1}) {c:?} {q:?}")),
                        }
                    }
                }
            }
        }
    }
    let summary = format!("{count} comparisons, worst rel {worst:.2e} at {at}");
    if failures.is_empty() { Ok(summary) } else { Err(format!("{summary}; {}", failures.join(", "))) }
}

fn describe(name: &str, report: &ValidationReport) -> String {
    let mut s = format!(
        "{name}: {}/{} flagged ({:.2}%), {} systematic, {}/{} structural failures",
        report.flags.len(),
        report.comparisons,
        100.0 * report.flag_rate,
        report.systematic.len(),
        report.structural_failures.len(),
        report.structural_checks
    );
    for f in &report.flags {
        s.push_str(&format!(
            "\n      flag {} {} P1={} dB: analytic {:.4e} mc {:.4e} z={:.2}",
            f.scheme,
            f.metric.name(),
            f.p1_db,
            f.analytic,
            f.mc,
            f.z
        ));
    }
    s
}

/// Systematic and structural failures reject the build; isolated flags are
/// reported with their z-scores.
fn criterion_4(fig1a_rows: &mut Option<Vec<ResultRow>>) -> Outcome {
    let mut ok = true;
    let mut log = Vec::new();
    for name in ["fig1a", "fig1b"] {
        let spec = SweepSpec::preset(name).map_err(|e| e.to_string())?;
        let (rows, report) = experiments::validate(&spec, 4.0).map_err(|e| e.to_string())?;
        ok &= report.systematic.is_empty() && report.structural_failures.is_empty() && report.row_errors.is_empty();
        log.push(describe(name, &report));
        if name == "fig1a" {
            *fig1a_rows = Some(rows);
        }
    }
    verdict(ok, log)
}

fn criterion_5() -> Outcome {
    let params = lin(10.0, 10.0, 1.0, 1.0);
    let run = || -> crnoma::Result<_> {
        let total = analytic::p_total_rs(&params)?.p_total;
        Ok([
            ("p_case1", p_case1(&params)?, 0.0820095986771),
            ("p_case2_rs", p_case2_rs(&params)?, 0.00792777660895),
            ("p_case3", p_case3(&params)?, 0.0131529832869),
            ("p_total", total, 0.103090358573),
            ("p_case2_nh", p_case2_nh(&params)?, 0.0148658181926),
            ("delta", delta_case2(&params)?, 0.00693804158363),
        ])
    };
    let values = run().map_err(|e| e.to_string())?;
    let mut log = Vec::new();
    let mut ok = true;
    for (name, got, want) in values {
        ok &= close(name, got, want, 1e-6, &mut log);
    }
    verdict(ok, log)
}

fn criterion_6() -> Outcome {
    let mut log = Vec::new();
    let params = db(40.0, 40.0, 1.0, 1.0);
    let total = analytic::p_total_rs(&params).map_err(|e| e.to_string())?.p_total;
    let ratio = total / params.eta1();
    let mut ok = (ratio - 1.0).abs() <= 0.1;
    log.push(format!("P_total/eta1 at 40 dB = {ratio:.6}"));

    for name in experiments::PRESETS {
        let spec = SweepSpec::preset(name).map_err(|e| e.to_string())?;
        if spec.sweep_variable != experiments::SweepVariable::P1Db {
            continue;
        }
        let mut deltas = Vec::new();
        for point in spec.grid().iter().filter(|p| p.p1_db >= 20.0) {
            let params = point.params().map_err(|e| e.to_string())?;
            deltas.push(delta_case2(&params).map_err(|e| e.to_string())?);
        }
        let decreasing = deltas.windows(2).all(|w| w[1] < w[0]) && deltas.iter().all(|&d| d >= 0.0);
        ok &= decreasing;
        log.push(format!(
            "{name}: delta {:.3e} -> {:.3e} over {} points, decreasing={decreasing}",
            deltas.first().copied().unwrap_or(f64::NAN),
            deltas.last().copied().unwrap_or(f64::NAN),
            deltas.len()
        ));
    }
    verdict(ok, log)
}

fn criterion_7() -> Outcome {
    let mut log = Vec::new();
    let params = lin(10.0, 10.0, 2.0, 1.0);
    let floor = analytic::qos_error_floor(&params);
    let mut ok = close("floor", floor, 0.25, 1e-12, &mut log);
    let exact = p_case2_qos(&params).map_err(|e| e.to_string())?;
    log.push(format!("exact QoS Case II at 10 dB = {exact:.6}"));

    let mut trail = Vec::new();
    let mut previous_gap = f64::INFINITY;
    for p_db in [10.0, 20.0, 30.0, 40.0, 50.0, 60.0] {
        let params = db(p_db, p_db, 2.0, 1.0);
        let qos = p_case2_qos(&params).map_err(|e| e.to_string())?;
        let gap = qos - floor;
        ok &= qos >= 0.2 && gap >= 0.0 && gap < previous_gap;
        previous_gap = gap;
        trail.push(format!("{p_db}dB:{qos:.5}"));
    }
    ok &= previous_gap < 1e-3;
    log.push(format!("QoS Case II -> floor: {}", trail.join(" ")));

    let params = db(40.0, 40.0, 1.0, 1.0);
    let total = analytic::p_total_rs(&params).map_err(|e| e.to_string())?.p_total;
    ok &= total <= 2.0 * params.eta1();
    log.push(format!("RS total at 40 dB = {total:.4e} (2 eta1 = {:.1e})", 2.0 * params.eta1()));
    verdict(ok, log)
}

fn criterion_8() -> Outcome {
    let draws = 1_000_000u64;
    let mut log = Vec::new();
    let mut total_mismatch = 0u64;
    for (p0, p1) in [(10.0, 10.0), (10.0, 20.0), (30.0, 40.0)] {
        let params = db(p0, p1, 1.0, 1.0);
        let mut stream = ChannelStream::at_trial(0x5eed, 0);
        let mut mismatches = 0u64;
        let mut outages = 0u64;
        for _ in 0..draws {
            let ch = stream.sample_channel::<f64>();
            let rs = model::evaluate_outcome(SchemeKind::Rs, &params, &ch);
            let oma = model::evaluate_outcome(SchemeKind::OmaPrimary, &params, &ch);
            mismatches += u64::from(rs.u0_outage != oma.u0_outage);
            outages += u64::from(rs.u0_outage);
        }
        total_mismatch += mismatches;
        log.push(format!("({p0},{p1}) dB: {mismatches} mismatches, {outages} U0 outages"));
    }
    verdict(total_mismatch == 0, log)
}

fn criterion_9() -> Outcome {
    let target = 1_000_000u64;
    let params = db(10.0, 10.0, 1.0, 1.0);
    let mut stream = ChannelStream::at_trial(0x04d3, 0);
    let (mut case2, mut draws, mut violations, mut strict) = (0u64, 0u64, 0u64, 0u64);
    while case2 < target {
        let ch = stream.sample_channel::<f64>();
        draws += 1;
        let (case, rs) = rs_achievable_rate(&params, &ch);
        if case != OperatingCase::CaseII {
            continue;
        }
        case2 += 1;
        let nh = nh_sic_rate_case2(&params, &ch);
        let qos = qos_sic_rate_case2(&params, &ch);
        let slack = |x: f64| 1e-12 * x.abs();
        if rs < nh - slack(nh) || nh < qos - slack(qos) {
            violations += 1;
        }
        strict += u64::from(rs > nh);
    }
    let log = format!("{case2} Case II draws of {draws}: {violations} violations, RS strictly above NH in {strict}");
    if violations == 0 { Ok(log) } else { Err(log) }
}

fn csv_bytes(rows: &[ResultRow]) -> Vec<u8> {
    let mut out = Vec::new();
    experiments::write_csv(rows, &mut out).expect("in-memory CSV");
    out
}

fn criterion_10(fig1a_rows: Option<Vec<ResultRow>>) -> Outcome {
    let mut log = Vec::new();
    let spec = SweepSpec::preset("fig1a").map_err(|e| e.to_string())?;
    let first = match fig1a_rows {
        Some(rows) => rows,
        None => experiments::run_sweep(&spec).map_err(|e| e.to_string())?,
    };
    let second = experiments::run_sweep(&spec).map_err(|e| e.to_string())?;
    let (a, b) = (csv_bytes(&first), csv_bytes(&second));
    let mut ok = a == b;
    log.push(format!("fig1a rerun: {} bytes, identical={}", a.len(), a == b));

    let params = db(10.0, 10.0, 1.0, 1.0);
    for scheme in [SchemeKind::Rs, SchemeKind::CsiSic] {
        let single = montecarlo::run_trials(scheme, &params, 1_000_000, RngSpec::single(2024)).map_err(|e| e.to_string())?;
        let split = RngSpec::streams(2024, 8)
            .map(|spec| montecarlo::run_trials(scheme, &params, 1_000_000, spec))
            .collect::<crnoma::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?
            .iter()
            .fold(TrialAccumulator::default(), |acc, part| acc.merge(part));
        let same = single == split;
        ok &= same;
        log.push(format!("{scheme} 8 vs 1 streams identical={same} (u1 outages {})", single.u1_outage_count));
    }
    verdict(ok, log)
}

fn remark1_ratios() {
    for p_db in [20.0, 30.0, 40.0] {
        let params = db(p_db, p_db, 1.0, 1.0);
        let (a1, a2, a3) = high_snr_case_terms(&params);
        let exact = (p_case1(&params), p_case2_rs(&params), p_case3(&params));
        if let (Ok(e1), Ok(e2), Ok(e3)) = exact {
            println!(
                "  info: high-SNR per-case terms / exact at {p_db} dB: I {:.4}, II {:.4}, III {:.4}",
                a1 / e1,
                a2 / e2,
                a3 / e3
            );
        }
    }
}

fn main() -> ExitCode {
    let mut fig1a_rows = None;
    let mut failed = 0;
    let mut report = |id: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>2} {title} [{secs:.1}s]\n    {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {title} [{secs:.1}s]\n    {detail}");
            }
        }
    };
    report(1, "example 1 rates", &mut criterion_1);
    report(2, "example 2 rates", &mut criterion_2);
    report(3, "quadrature vs closed form", &mut criterion_3);
    report(4, "analytic vs monte carlo", &mut || criterion_4(&mut fig1a_rows));
    report(5, "hand-derived anchors", &mut criterion_5);
    report(6, "high-SNR asymptotics", &mut criterion_6);
    report(7, "error-floor contrast", &mut criterion_7);
    report(8, "primary protection", &mut criterion_8);
    report(9, "per-draw rate ordering", &mut criterion_9);
    report(10, "determinism", &mut || criterion_10(fig1a_rows.take()));
    remark1_ratios();
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
