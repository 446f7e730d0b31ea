//! End-to-end acceptance run: one PASS / FAIL line per criterion.
//!
//! Exits non-zero when any criterion fails. A flagged pass is reported as `PASS (flagged)`.

mod common;

use num_complex::Complex64;
use std::process::ExitCode;
use std::time::{Duration, Instant};
use twogen::coeffsearch::{delta_for, search_all_coeffs, windows};
use twogen::field::FieldSpec;
use twogen::geometry::{free_test, Verdict};
use twogen::pipeline::{list_tables, reference, run_all, run_triple, Manifest, RunConfig, Table};
use twogen::sieve::{norm_sieve, run_sieves};

const NORM_BUDGET: Duration = Duration::from_secs(10);
const LISTS_BUDGET: Duration = Duration::from_secs(60);
const RUN_ALL_BUDGET: Duration = Duration::from_secs(30 * 60);
const GOLDEN_COUNT: usize = 17;
const FREE_LEVEL: u8 = 3;
const PROPERTY_CASES: u32 = 1000;
const ROUNDTRIP_CASES: u32 = 100;
const FACTOR_CASES: u32 = 50;
const SCHUR_SAMPLES: u32 = 20_000;
/// Two printed values for the (24,24,2) c0 count.
const C0_24_ALLOWED: [&str; 2] = ["72", "74"];

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Flagged,
    Fail,
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, n: u32, status: Status, detail: impl AsRef<str>) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Flagged => "PASS (flagged)",
            Status::Fail => {
                self.failed += 1;
                "FAIL"
            }
        };
        println!("criterion {n:>2} {tag}: {}", detail.as_ref());
    }
}

fn table<'a>(m: &'a Manifest, name: &str) -> &'a Table {
    m.tables.iter().find(|t| t.name == name).unwrap_or_else(|| panic!("missing table {name}"))
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn lists(report: &mut Report, cfg: &RunConfig) {
    let t = Instant::now();
    let norm = norm_sieve();
    let norm_time = t.elapsed();
    let t = Instant::now();
    let lists = run_sieves(cfg.t_grid);
    let lists_time = t.elapsed();
    assert_eq!(norm.len(), lists.norm.len());
    let tables = list_tables(&lists);
    let budgets = [(NORM_BUDGET, norm_time), (LISTS_BUDGET, lists_time), (LISTS_BUDGET, lists_time)];
    for (i, (t, (budget, took))) in tables.iter().zip(budgets).enumerate() {
        let bad = t.mismatches();
        let ok = bad == 0 && took <= budget;
        report.line(
            i as u32 + 1,
            if ok { Status::Pass } else { Status::Fail },
            format!("{}: {} rows, {bad} mismatches, {} (budget {})", t.name, t.rows.len(), secs(took), secs(budget)),
        );
    }
}

fn basic_spot_checks(report: &mut Report, cfg: &RunConfig) {
    let reference = reference();
    let ex = &reference.basic_example;
    let mut notes = Vec::new();
    let mut ok = true;
    let field = FieldSpec::new(ex.p, ex.q).expect("field");
    let delta = delta_for(ex.p, ex.q, ex.r);
    let w = windows(&field, &cfg.bounds(ex.p, ex.q), &delta).expect("windows");
    let res = search_all_coeffs(&field, &w, ex.r, cfg.search_cap).expect("search");
    let (c0, c1) = (res[0].candidates.len(), res[1].candidates.len());
    let space = res[0].space_estimate;
    ok &= c0 == ex.c0 && c1 == ex.c1;
    ok &= space.leading == ex.space_leading && space.trailing == ex.space_trailing as f64;
    notes.push(format!(
        "({},{},{}) c0 {c0}/{} c1 {c1}/{} space {}x{}/{}x{}",
        ex.p, ex.q, ex.r, ex.c0, ex.c1, space.leading, space.trailing, ex.space_leading, ex.space_trailing
    ));
    for row in &reference.no_candidates {
        let out = run_triple(cfg, row.p, row.q, row.r).expect("triple");
        let n = out.count(&row.empty).unwrap_or(0);
        let groups = out.count("factor").unwrap_or(0);
        ok &= n == 0;
        notes.push(format!("({},{},{}) {} {n}/0 (factor {groups})", row.p, row.q, row.r, row.empty));
    }
    report.line(4, if ok { Status::Pass } else { Status::Fail }, notes.join("; "));
}

fn candidate_rows(report: &mut Report, n: u32, m: &Manifest, name: &str, took: Duration) {
    let t = table(m, name);
    let mut bad = Vec::new();
    for row in &t.rows {
        for (col, cell) in t.columns.iter().zip(&row.cells) {
            let tolerated = row.label == "(24,24,2)" && col == "c0" && C0_24_ALLOWED.contains(&cell.computed.as_str());
            if cell.matches == Some(false) && !tolerated {
                bad.push(format!("{} {col} {}/{}", row.label, cell.computed, cell.published));
            }
        }
    }
    let ok = bad.is_empty() && took <= RUN_ALL_BUDGET;
    let mut detail = format!("{}: {} rows, {} mismatched cells, run {}", t.name, t.rows.len(), bad.len(), secs(took));
    if !bad.is_empty() {
        detail.push_str(&format!(" [{}]", bad.join(", ")));
    }
    report.line(n, if ok { Status::Pass } else { Status::Fail }, detail);
}

/// Final-outcome stages; a deviation elsewhere only flags the run.
fn is_final(label: &str) -> bool {
    label.ends_with(" irreducible") || label == "(6,6,5) contour" || label == "(6,6,4) contour"
}

fn milestones(report: &mut Report, m: &Manifest) {
    let t = table(m, "linked milestones");
    let (mut finals, mut flags) = (Vec::new(), Vec::new());
    for row in &t.rows {
        let c = &row.cells[0];
        if c.matches == Some(false) {
            let note = format!("{} {}/{}", row.label, c.computed, c.published);
            if is_final(&row.label) {
                finals.push(note);
            } else {
                flags.push(note);
            }
        }
    }
    let status = match (finals.is_empty(), flags.is_empty()) {
        (false, _) => Status::Fail,
        (true, false) => Status::Flagged,
        (true, true) => Status::Pass,
    };
    report.line(
        7,
        status,
        format!(
            "{} milestones; final outcomes off: [{}]; intermediate off: [{}]",
            t.rows.len(),
            finals.join(", "),
            flags.join(", ")
        ),
    );
}

fn golden(report: &mut Report, m: &Manifest) {
    let g = &m.golden;
    let worst = g.rows.iter().filter_map(|r| r.gamma_error).fold(0.0, f64::max);
    let real_ok = !g.real_rows.is_empty() && g.real_rows.iter().all(|&(_, found)| found);
    let ok = g.rows.len() == GOLDEN_COUNT && g.all_ok() && real_ok;
    report.line(
        8,
        if ok { Status::Pass } else { Status::Fail },
        format!(
            "matched {}/{} (max gamma error {worst:.1e}), real rows excluded {:?}; {} survivors need geometric confirmation, {} further proved free",
            g.matched(),
            g.rows.len(),
            g.real_rows,
            g.needs_geometric_confirmation.len(),
            g.proved_free_extras
        ),
    );
}

fn free_regression(report: &mut Report) {
    let ex = reference().free_example;
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (g, &want)) in ex.gammas.iter().zip(&ex.proved_free).enumerate() {
        let o = free_test(ex.p, ex.q, Complex64::new(g[0], g[1]), FREE_LEVEL);
        let got = o.verdict == Verdict::ProvedFree;
        ok &= got == want;
        let verdict = if got { format!("free@{}", o.level) } else { "inconclusive".into() };
        notes.push(format!("#{} {verdict} (expected {})", i + 1, if want { "free" } else { "inconclusive" }));
    }
    report.line(9, if ok { Status::Pass } else { Status::Fail }, notes.join(", "));
}

fn properties(report: &mut Report) {
    let checks: [(&str, Result<(), String>); 6] = [
        ("homomorphism", common::homomorphism(PROPERTY_CASES)),
        ("norm product", common::norm_product_identity()),
        ("vandermonde bound", common::schur_dominates(SCHUR_SAMPLES)),
        ("gamma round trip", common::gamma_roundtrip(ROUNDTRIP_CASES)),
        ("factorization oracle", common::factorization_oracle(FACTOR_CASES)),
        ("golden residuals", common::golden_residuals()),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let detail = match failed.is_empty() {
        true => format!("{} suites green", checks.len()),
        false => failed.join("; "),
    };
    report.line(10, if failed.is_empty() { Status::Pass } else { Status::Fail }, detail);
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = RunConfig { output_dir: dir.path().to_path_buf(), ..RunConfig::default() };
    let mut report = Report { failed: 0 };

    lists(&mut report, &cfg);
    basic_spot_checks(&mut report, &cfg);
    let t = Instant::now();
    let manifest = run_all(&cfg).expect("full run");
    let took = t.elapsed();
    candidate_rows(&mut report, 5, &manifest, "degree 2 candidates", took);
    candidate_rows(&mut report, 6, &manifest, "degree 3 candidates", took);
    milestones(&mut report, &manifest);
    golden(&mut report, &manifest);
    free_regression(&mut report);
    properties(&mut report);

    println!("acceptance: {} of 10 criteria failed", report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
