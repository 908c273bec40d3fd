//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qrec::{
    gen_unit_poisson, gen_unit_poisson_in, initial_ranks, k_corners, k_records, oracle, reflect, run_scenario,
    PlanarPointSet, RngStream, RunConfig, ScenarioId, ScenarioReport, Window,
};

const ORACLE_WINDOWS: u64 = 500;
const ORACLE_MAX_POINTS: usize = 300;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const HYPERBOLIC_WINDOWS: u64 = 100;
const V8_BUDGET: Duration = Duration::from_secs(60);
const V5_BUDGET: Duration = Duration::from_secs(120);
const SUITE_BUDGET: Duration = Duration::from_secs(300);
const KS: [usize; 4] = [1, 2, 3, 5];

struct Line {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn qrec_bin(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_qrec"))
        .args(args)
        .env_remove("QR_SEED")
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn load_reports(dir: &Path) -> BTreeMap<String, ScenarioReport> {
    let mut out = BTreeMap::new();
    for id in ScenarioId::ALL {
        let p = dir.join(format!("{id}.json"));
        if let Ok(s) = fs::read_to_string(&p) {
            let r: ScenarioReport = serde_json::from_str(&s).expect("report parses");
            out.insert(id.to_string(), r);
        }
    }
    out
}

fn stripped(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for id in ScenarioId::ALL {
        let p = dir.join(format!("{id}.json"));
        let Ok(s) = fs::read_to_string(&p) else { continue };
        let mut v: serde_json::Value = serde_json::from_str(&s).expect("report parses");
        v["runtime_ms"] = 0.into();
        out.insert(id.to_string(), v.to_string());
    }
    out
}

fn failed_tests(r: &ScenarioReport) -> String {
    let names: Vec<&str> = r.tests.iter().filter(|t| !t.passed).map(|t| t.name.as_str()).collect();
    if names.is_empty() {
        String::new()
    } else {
        format!(" failed: {}", names.join(","))
    }
}

fn describe(r: &ScenarioReport) -> String {
    format!(
        "{} k={} {}/{} tests, {} ms{}",
        r.scenario_id,
        r.k,
        r.tests.iter().filter(|t| t.passed).count(),
        r.tests.len(),
        r.runtime_ms,
        failed_tests(r)
    )
}

fn run_at(id: ScenarioId, k: f64) -> Result<ScenarioReport, String> {
    run_scenario(id, &RunConfig { k, ..RunConfig::default() }).map_err(|e| format!("{id} k={k}: {e}"))
}

/// Scenario reports from the suite run, plus extra runs at other `k`.
fn scenario_line(
    id: u32,
    title: &'static str,
    suite: &BTreeMap<String, ScenarioReport>,
    at_default: &[ScenarioId],
    extra: &[(ScenarioId, f64)],
    budget: Option<Duration>,
) -> Line {
    let mut passed = true;
    let mut parts = Vec::new();
    let mut total_ms = 0u64;
    for sid in at_default {
        match suite.get(&sid.to_string()) {
            Some(r) => {
                passed &= r.passed;
                total_ms += r.runtime_ms;
                parts.push(describe(r));
            }
            None => {
                passed = false;
                parts.push(format!("{sid}: no report"));
            }
        }
    }
    for &(sid, k) in extra {
        match run_at(sid, k) {
            Ok(r) => {
                passed &= r.passed;
                total_ms += r.runtime_ms;
                parts.push(describe(&r));
            }
            Err(e) => {
                passed = false;
                parts.push(e);
            }
        }
    }
    if let Some(b) = budget {
        passed &= Duration::from_millis(total_ms) < b;
        parts.push(format!("total {total_ms} ms < {} s", b.as_secs()));
    }
    Line {
        id,
        title,
        passed,
        detail: parts.join("; "),
    }
}

fn random_window(seed: u64) -> PlanarPointSet {
    let mut s = RngStream::new(seed, 0);
    loop {
        let area = s.uniform_in(20.0, 280.0);
        let aspect = s.uniform_in(-4f64.ln(), 4f64.ln()).exp();
        let t = (area * aspect).sqrt();
        let ps = gen_unit_poisson(&mut s, t, area / t).expect("valid window");
        if ps.len() <= ORACLE_MAX_POINTS {
            return ps;
        }
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Number of identity violations in one realization.
fn structural_violations(ps: &PlanarPointSet, k: usize) -> usize {
    let cs = k_corners(ps, k);
    let mut bad = 0;
    bad += usize::from(cs.records() != k_records(ps, k));
    bad += usize::from(k_corners(&reflect(ps), k) != cs.reflect());
    let ranks = initial_ranks(ps);
    let times: Vec<f64> = ranks
        .iter()
        .enumerate()
        .filter(|(i, r)| r.initial_rank <= k && *i + 1 >= k)
        .map(|(_, r)| r.point.t)
        .collect();
    bad += usize::from(cs.times() != times);
    let all_values = sorted(ps.points().iter().map(|p| p.x).collect());
    let values: Vec<f64> = ranks
        .iter()
        .filter(|r| r.initial_rank <= k)
        .map(|r| r.point.x)
        .filter(|x| all_values.partition_point(|v| v < x) + 1 >= k)
        .collect();
    bad += usize::from(sorted(cs.values()) != sorted(values));
    bad
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let mut mismatches = 0usize;
    let mut points = 0usize;
    for seed in 0..ORACLE_WINDOWS {
        let ps = random_window(seed);
        points += ps.len();
        for k in KS {
            mismatches += usize::from(initial_ranks(&ps) != oracle::initial_ranks(&ps));
            mismatches += usize::from(k_records(&ps, k) != oracle::k_records(&ps, k));
            mismatches += usize::from(k_corners(&ps, k) != oracle::k_corners(&ps, k));
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 1,
        title: "fast extraction equals brute-force oracle",
        passed: mismatches == 0 && elapsed < ORACLE_BUDGET,
        detail: format!(
            "{ORACLE_WINDOWS} windows, {points} points, k in {KS:?}, {mismatches} mismatches, {} ms < {} s",
            elapsed.as_millis(),
            ORACLE_BUDGET.as_secs()
        ),
    }
}

fn criterion_2() -> Line {
    let mut violations = 0usize;
    let mut realizations = 0usize;
    for seed in 0..ORACLE_WINDOWS {
        let ps = random_window(seed);
        for k in KS {
            violations += structural_violations(&ps, k);
            realizations += 1;
        }
    }
    let window = Window::hyperbolic(250.0, 1.0, 6f64.exp(), 1.25).expect("valid window");
    for r in 0..HYPERBOLIC_WINDOWS {
        let ps = gen_unit_poisson_in(&mut RngStream::new(1_000 + r, 0), &window);
        for k in KS {
            violations += structural_violations(&ps, k);
            realizations += 1;
        }
    }
    Line {
        id: 2,
        title: "records, projections and reflection identities",
        passed: violations == 0,
        detail: format!("{realizations} realizations, {violations} violations"),
    }
}

fn criterion_11(dir: &Path) -> Line {
    let mut passed = true;
    let mut parts = Vec::new();
    for id in ScenarioId::ALL {
        let out = dir.join(format!("control_{id}"));
        let (code, _) = qrec_bin(&["verify", "--control", "--scenario", &id.to_string(), "--out", out.to_str().unwrap()]);
        passed &= code == 1;
        parts.push(format!("{id}:exit {code}"));
    }
    let out = dir.join("thin");
    let (code, _) = qrec_bin(&["verify", "--scenario", "V3", "--thin-p", "0.1", "--out", out.to_str().unwrap()]);
    passed &= code == 1;
    parts.push(format!("V3 thin-p 0.1:exit {code}"));
    Line {
        id: 11,
        title: "perturbed controls are rejected",
        passed,
        detail: parts.join(" "),
    }
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let (first, second) = (tmp.path().join("run1"), tmp.path().join("run2"));

    let start = Instant::now();
    let (code1, _) = qrec_bin(&["verify", "--jobs", "1", "--out", first.to_str().unwrap()]);
    let suite_time = start.elapsed();
    let (code2, _) = qrec_bin(&["verify", "--out", second.to_str().unwrap()]);
    let suite = load_reports(&first);

    let mut lines = vec![criterion_1(), criterion_2()];
    lines.push(scenario_line(
        3,
        "gamma marginal of the k-th minimum",
        &suite,
        &[ScenarioId::V8],
        &[(ScenarioId::V8, 1.0), (ScenarioId::V8, 5.0)],
        Some(V8_BUDGET),
    ));
    lines.push(scenario_line(4, "record counts and corner rate", &suite, &[ScenarioId::V1], &[], None));
    lines.push(scenario_line(5, "thinning equals records", &suite, &[ScenarioId::V3], &[], None));
    lines.push(scenario_line(
        6,
        "order statistics at a record",
        &suite,
        &[ScenarioId::V4],
        &[(ScenarioId::V4, 3.0), (ScenarioId::V4, 5.0)],
        None,
    ));
    lines.push(scenario_line(7, "self-similar spacings", &suite, &[ScenarioId::V5], &[], Some(V5_BUDGET)));
    lines.push(scenario_line(
        8,
        "corner intensity and marked lifetimes",
        &suite,
        &[ScenarioId::V2, ScenarioId::V6],
        &[],
        None,
    ));
    let mut joint = scenario_line(
        9,
        "joint corner density, held-value exponent",
        &suite,
        &[ScenarioId::V9],
        &[(ScenarioId::V9, 1.0)],
        None,
    );
    let noted = suite.get("V9").is_some_and(|r| r.notes.contains("HeldValue"));
    joint.passed &= noted;
    joint.detail.push_str(&format!("; convention noted: {noted}"));
    lines.push(joint);
    lines.push(scenario_line(10, "record trial counts and lifetimes", &suite, &[ScenarioId::V10], &[], None));
    lines.push(criterion_11(tmp.path()));

    let (a, b) = (stripped(&first), stripped(&second));
    let identical = a.len() == ScenarioId::ALL.len() && a == b;
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    lines.push(Line {
        id: 12,
        title: "determinism and suite runtime",
        passed: identical && code1 == 0 && code2 == 0 && suite_time < SUITE_BUDGET,
        detail: format!(
            "{} reports, identical modulo runtime: {identical}{}, exit codes {code1}/{code2}, single-thread suite {:.1} s < {} s",
            a.len(),
            if differing.is_empty() { String::new() } else { format!(" (differ: {differing:?})") },
            suite_time.as_secs_f64(),
            SUITE_BUDGET.as_secs()
        ),
    });

    let mut all = true;
    for l in &lines {
        all &= l.passed;
        println!("criterion {:>2} {} {}: {}", l.id, if l.passed { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
