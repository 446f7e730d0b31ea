//! Orchestration: per-triple runs, persisted stage outputs, manifests and comparison tables.

use crate::coeffsearch::{delta_for, search_all_coeffs, windows, DeltaChoice, SearchError};
use crate::field::{FieldError, FieldSpec};
use crate::geometry::{free_test, normalize_generators, svg, GeometryError, OmegaBounds, Verdict};
use crate::invariants::{golden_compare, golden_rows, GoldenReport, InvariantError, Survivor};
use crate::linked::{Chain, LinkedError};
use crate::polyfilter::{contour_stage, factor_stage, reduce, Filter, GammaCandidate};
use crate::sieve::{rows_of, run_sieves, SieveLists, TripleRecord};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

const REFERENCE_JSON: &str = include_str!("../data/reference.json");
/// Highest free-product test level.
pub const FREE_LEVELS: u8 = 3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Linked(#[from] LinkedError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Recorded for provenance; counting decisions are made in exact integer arithmetic.
    pub precision_bits: u32,
    pub contour_samples: usize,
    pub t_grid: usize,
    pub slack: f64,
    pub search_cap: f64,
    /// Worker threads; 0 uses every core.
    pub parallelism: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: 200,
            contour_samples: 4096,
            t_grid: 100_000,
            slack: 1e-9,
            search_cap: 1e9,
            parallelism: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue { key: key.to_string(), value: value.to_string() };
        match key {
            "precision_bits" => self.precision_bits = value.parse().map_err(|_| bad())?,
            "contour_samples" => self.contour_samples = value.parse().map_err(|_| bad())?,
            "t_grid" => self.t_grid = value.parse::<f64>().map_err(|_| bad())? as usize,
            "slack" => self.slack = value.parse().map_err(|_| bad())?,
            "search_cap" => self.search_cap = value.parse().map_err(|_| bad())?,
            "parallelism" => self.parallelism = value.parse().map_err(|_| bad())?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Parses a `key = value` file; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = self.precision_bits > 0
            && self.contour_samples > 0
            && self.t_grid > 0
            && self.slack > 0.0
            && self.search_cap > 0.0;
        if !positive {
            return Err(ConfigError::Invalid("all numeric settings must be positive".into()));
        }
        if self.slack >= 1e-6 {
            return Err(ConfigError::Invalid(format!("slack {} must be below 1e-6", self.slack)));
        }
        Ok(())
    }

    pub fn bounds(&self, p: u32, q: u32) -> OmegaBounds {
        OmegaBounds::new(p, q, self.t_grid, self.contour_samples)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Basic,
    Linked,
}

/// Degree at least four uses the linked chain, as does the one degree-three case whose
/// direct search space is out of reach.
pub fn method_for(p: u32, q: u32, r: u32) -> Method {
    if r >= 4 || (p, q, r) == (30, 30, 3) {
        Method::Linked
    } else {
        Method::Basic
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub count: usize,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleOutcome {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub method: Method,
    pub delta: String,
    pub stages: Vec<Stage>,
    /// Distinct non-real parameters passing every arithmetic filter.
    pub survivors: Vec<Survivor>,
    /// Real parameters passing root location, kept for reporting.
    pub real_excluded: Vec<Survivor>,
}

impl TripleOutcome {
    pub fn count(&self, stage: &str) -> Option<usize> {
        self.stages.iter().find(|s| s.name == stage).map(|s| s.count)
    }
}

struct Clock {
    start: Instant,
    stages: Vec<Stage>,
}

impl Clock {
    fn new() -> Self {
        Clock { start: Instant::now(), stages: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, count: usize) {
        let elapsed_ms = self.start.elapsed().as_millis() as u64;
        self.stages.push(Stage { name: name.into(), count, elapsed_ms });
    }
}

fn survivors_of(
    field: &FieldSpec,
    delta: &DeltaChoice,
    cands: &[GammaCandidate],
) -> Result<Vec<Survivor>, PipelineError> {
    let all: Vec<Survivor> = cands
        .par_iter()
        .map(|c| Survivor::from_candidate(field, delta, c))
        .collect::<Result<_, _>>()?;
    let mut seen = HashSet::new();
    Ok(all.into_iter().filter(|s| seen.insert(s.minpoly_over_l.clone())).collect())
}

fn free_stages(p: u32, q: u32, survivors: &mut [Survivor], clock: &mut Clock) {
    let outcomes: Vec<_> = survivors.par_iter().map(|s| free_test(p, q, s.gamma, FREE_LEVELS)).collect();
    for level in 1..=FREE_LEVELS {
        let n = outcomes
            .iter()
            .filter(|o| o.verdict == Verdict::ProvedFree && o.level == level)
            .count();
        clock.push(format!("free_level{level}"), n);
    }
    let open = outcomes.iter().filter(|o| o.verdict == Verdict::Inconclusive).count();
    for (s, o) in survivors.iter_mut().zip(outcomes) {
        s.free = Some(o.into());
    }
    clock.push("free_inconclusive", open);
}

/// Runs one triple from coefficient search to free-product tests.
pub fn run_triple(cfg: &RunConfig, p: u32, q: u32, r: u32) -> Result<TripleOutcome, PipelineError> {
    let mut clock = Clock::new();
    let bounds = cfg.bounds(p, q);
    let field = FieldSpec::new(p, q)?;
    let method = method_for(p, q, r);
    let (delta, mut survivors, real_excluded) = match method {
        Method::Linked => {
            let chain = Chain::new(p, r, bounds, cfg.search_cap)?;
            let out = chain.run()?;
            for s in &out.stages {
                clock.push(s.stage, s.count);
            }
            clock.push("reducible", out.reducible);
            let delta = DeltaChoice::GAMMA2P;
            let survivors = survivors_of(&field, &delta, &out.survivors)?;
            clock.push("distinct", survivors.len());
            (delta, survivors, Vec::new())
        }
        Method::Basic => {
            let delta = delta_for(p, q, r);
            let w = windows(&field, &bounds, &delta)?;
            let lists = search_all_coeffs(&field, &w, r, cfg.search_cap)?;
            for l in &lists {
                clock.push(format!("c{}", l.j), l.candidates.len());
            }
            let lists: Vec<_> = lists.into_iter().map(|l| l.candidates).collect();
            let reduced = reduce(&field, &w, &lists);
            clock.push("reduced", reduced.len());
            let mut cands = contour_stage(&field, &bounds, &delta, &w, r, &reduced);
            clock.push("contour", cands.iter().filter(|c| c.has(Filter::Contour)).count());
            factor_stage(&field, &delta, &mut cands)?;
            let passed: Vec<GammaCandidate> = cands.iter().filter(|c| c.has(Filter::Factorization)).cloned().collect();
            clock.push("factor", passed.len());
            let survivors = survivors_of(&field, &delta, &passed)?;
            clock.push("distinct", survivors.len());
            let real: Vec<GammaCandidate> = cands.into_iter().filter(|c| c.is_real()).collect();
            let real_excluded = survivors_of(&field, &delta, &real)?;
            clock.push("real_gamma", real_excluded.len());
            (delta, survivors, real_excluded)
        }
    };
    free_stages(p, q, &mut survivors, &mut clock);
    Ok(TripleOutcome {
        p,
        q,
        r,
        method,
        delta: delta.label(),
        stages: clock.stages,
        survivors,
        real_excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub triple: (u32, u32, u32),
    pub stage: String,
    pub count: usize,
    pub elapsed_ms: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleStatus {
    pub triple: (u32, u32, u32),
    pub method: Option<Method>,
    pub delta: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub lists: ListCounts,
    pub triples: Vec<TripleStatus>,
    pub records: Vec<StageRecord>,
    pub golden: GoldenReport,
    pub tables: Vec<Table>,
    /// Hash over every stage file hash, in record order.
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListCounts {
    pub norm: usize,
    pub discriminant: usize,
    pub aspiring: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<String, PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

#[derive(Serialize)]
struct StageFile<'a> {
    triple: (u32, u32, u32),
    stage: &'a str,
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    items: Option<&'a [Survivor]>,
}

/// Writes `p_q_r_stage.json` for every stage of one outcome.
pub fn persist(dir: &Path, out: &TripleOutcome) -> Result<Vec<StageRecord>, PipelineError> {
    let triple = (out.p, out.q, out.r);
    let mut records = Vec::new();
    let mut emit = |stage: &str, count: usize, elapsed_ms: u64, items: Option<&[Survivor]>| -> Result<(), PipelineError> {
        let path = dir.join(format!("{}_{}_{}_{}.json", out.p, out.q, out.r, stage));
        let sha256 = write_json(&path, &StageFile { triple, stage, count, items })?;
        records.push(StageRecord { triple, stage: stage.to_string(), count, elapsed_ms, sha256 });
        Ok(())
    };
    for s in &out.stages {
        emit(&s.name, s.count, s.elapsed_ms, None)?;
    }
    let last = out.stages.last().map_or(0, |s| s.elapsed_ms);
    emit("survivors", out.survivors.len(), last, Some(&out.survivors))?;
    emit("real_excluded", out.real_excluded.len(), last, Some(&out.real_excluded))?;
    Ok(records)
}

fn triples_of(lists: &SieveLists) -> Vec<(u32, u32, u32)> {
    let mut v: Vec<_> = lists.aspiring.iter().map(|t: &TripleRecord| (t.p, t.q, t.r)).collect();
    v.sort();
    v
}

/// Runs every aspiring triple, persists stage outputs and writes `manifest.json`.
pub fn run_all(cfg: &RunConfig) -> Result<Manifest, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    pool.install(|| run_all_in_pool(cfg))
}

fn run_all_in_pool(cfg: &RunConfig) -> Result<Manifest, PipelineError> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let lists = run_sieves(cfg.t_grid);
    let triples = triples_of(&lists);
    let mut outcomes = Vec::new();
    let mut statuses = Vec::new();
    let mut records = Vec::new();
    for &(p, q, r) in &triples {
        let res = std::panic::catch_unwind(|| run_triple(cfg, p, q, r));
        let res = match res {
            Ok(r) => r.map_err(|e| e.to_string()),
            Err(_) => Err("worker panicked".to_string()),
        };
        match res {
            Ok(out) => {
                records.extend(persist(&cfg.output_dir, &out)?);
                statuses.push(TripleStatus {
                    triple: (p, q, r),
                    method: Some(out.method),
                    delta: Some(out.delta.clone()),
                    error: None,
                });
                outcomes.push(out);
            }
            Err(e) => statuses.push(TripleStatus { triple: (p, q, r), method: None, delta: None, error: Some(e) }),
        }
    }
    let survivors: Vec<Survivor> = outcomes.iter().flat_map(|o| o.survivors.iter().cloned()).collect();
    let real: Vec<Survivor> = outcomes.iter().flat_map(|o| o.real_excluded.iter().cloned()).collect();
    let golden = golden_compare(&golden_rows(), &survivors, &real)?;
    let tables = comparison_tables(&lists, &outcomes);
    let mut h = Sha256::new();
    for rec in &records {
        h.update(rec.sha256.as_bytes());
    }
    let fingerprint = hex::encode(h.finalize());
    let manifest = Manifest {
        config: cfg.clone(),
        lists: ListCounts {
            norm: lists.norm.len(),
            discriminant: lists.discriminant.len(),
            aspiring: lists.aspiring.len(),
        },
        triples: statuses,
        records,
        golden,
        tables,
        fingerprint,
    };
    write_json(&cfg.output_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Reference values bundled with the crate.
#[derive(Clone, Debug, Deserialize)]
pub struct Reference {
    pub norm_list: Vec<(u32, u32, u32)>,
    pub discriminant_list: Vec<(u32, u32, Vec<u32>)>,
    pub aspiring_list: Vec<(u32, u32, Vec<u32>)>,
    pub no_candidates: Vec<EmptyRow>,
    pub basic_example: BasicExample,
    pub degree2: Vec<CandidateRow>,
    pub degree3: Vec<CandidateRow>,
    pub geometric: Vec<GeometricRow>,
    pub milestones: Vec<Milestone>,
    pub free_example: FreeExample,
}

#[derive(Clone, Debug, Deserialize)]
pub struct EmptyRow {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub empty: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct BasicExample {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub c0: usize,
    pub c1: usize,
    pub space_leading: u64,
    pub space_trailing: u64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CandidateRow {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub lists: Vec<Option<usize>>,
    pub pr: Option<usize>,
    pub b: Option<usize>,
    pub f: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct GeometricRow {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub count: usize,
    pub ft2: usize,
    pub ft3: usize,
    pub remaining: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Milestone {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub stage: String,
    pub count: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct FreeExample {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub gammas: Vec<[f64; 2]>,
    pub proved_free: Vec<bool>,
}

pub fn reference() -> Reference {
    serde_json::from_str(REFERENCE_JSON).expect("bundled reference tables are valid")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub published: String,
    pub computed: String,
    /// `None` when the reference value is missing or the methods are not comparable.
    pub matches: Option<bool>,
}

impl Cell {
    fn exact(published: Option<String>, computed: Option<String>) -> Self {
        let matches = published.as_ref().map(|p| Some(p) == computed.as_ref());
        Cell {
            published: published.unwrap_or_else(|| "-".into()),
            computed: computed.unwrap_or_else(|| "-".into()),
            matches,
        }
    }

    fn counts(published: Option<usize>, computed: Option<usize>) -> Self {
        Cell::exact(published.map(|x| x.to_string()), computed.map(|x| x.to_string()))
    }

    fn unmatched(published: String, computed: String) -> Self {
        Cell { published, computed, matches: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    #[serde(default)]
    pub note: Option<String>,
}

impl Table {
    pub fn mismatches(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| &r.cells)
            .filter(|c| c.matches == Some(false))
            .count()
    }
}

fn fmt_rs(rs: &[u32]) -> String {
    rs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
}

fn list_table<'a>(
    name: &str,
    published: impl Iterator<Item = ((u32, u32), String)>,
    computed: impl Iterator<Item = ((u32, u32), String)> + 'a,
) -> Table {
    let mut keyed: BTreeMap<(u32, u32), (Option<String>, Option<String>)> = BTreeMap::new();
    for (k, v) in published {
        keyed.entry(k).or_default().0 = Some(v);
    }
    for (k, v) in computed {
        keyed.entry(k).or_default().1 = Some(v);
    }
    let rows = keyed
        .into_iter()
        .map(|((p, q), (a, b))| {
            let cell = match (&a, &b) {
                (None, _) => Cell { published: "-".into(), computed: b.clone().unwrap_or_default(), matches: Some(false) },
                _ => Cell::exact(a, b),
            };
            Row { label: format!("({p},{q})"), cells: vec![cell] }
        })
        .collect();
    Table { name: name.into(), columns: vec!["r".into()], rows, note: None }
}

/// Norm, discriminant and aspiring lists against the reference.
pub fn list_tables(lists: &SieveLists) -> Vec<Table> {
    let reference = reference();
    let norm = crate::sieve::norm_table(&lists.norm);
    let rows = |ts: &[TripleRecord]| rows_of(ts).into_iter().map(|r| ((r.p, r.q), fmt_rs(&r.rs))).collect::<Vec<_>>();
    vec![
        list_table(
            "norm list",
            reference.norm_list.iter().map(|&(p, q, r)| ((p, q), r.to_string())),
            norm.into_iter().map(|(p, q, r)| ((p, q), r.to_string())),
        ),
        list_table(
            "discriminant list",
            reference.discriminant_list.iter().map(|(p, q, rs)| ((*p, *q), fmt_rs(rs))),
            rows(&lists.discriminant).into_iter(),
        ),
        list_table(
            "aspiring list",
            reference.aspiring_list.iter().map(|(p, q, rs)| ((*p, *q), fmt_rs(rs))),
            rows(&lists.aspiring).into_iter(),
        ),
    ]
}

fn find(outcomes: &[TripleOutcome], p: u32, q: u32, r: u32) -> Option<&TripleOutcome> {
    outcomes.iter().find(|o| (o.p, o.q, o.r) == (p, q, r))
}

fn candidate_table(name: &str, rows: &[CandidateRow], outcomes: &[TripleOutcome]) -> Table {
    let width = rows.first().map_or(0, |r| r.lists.len());
    let mut columns: Vec<String> = (0..width).map(|j| format!("c{j}")).collect();
    columns.extend(["PR", "B", "F"].map(String::from));
    let rows = rows
        .iter()
        .map(|row| {
            let out = find(outcomes, row.p, row.q, row.r);
            let got = |stage: &str| out.map(|o| o.count(stage).unwrap_or(0));
            let linked = out.is_some_and(|o| o.method == Method::Linked);
            let mut cells: Vec<Cell> = row
                .lists
                .iter()
                .enumerate()
                .map(|(j, &v)| match linked {
                    true => Cell::unmatched(v.map_or("-".into(), |x| x.to_string()), "-".into()),
                    false => Cell::counts(v, got(&format!("c{j}"))),
                })
                .collect();
            if linked {
                cells.extend([Cell::counts(row.pr, None), Cell::counts(row.b, None)]);
                cells.push(Cell::counts(row.f, got("distinct")));
            } else {
                cells.extend([
                    Cell::counts(row.pr, got("reduced")),
                    Cell::counts(row.b, got("contour")),
                    Cell::counts(row.f, got("factor")),
                ]);
            }
            Row { label: format!("({},{},{})", row.p, row.q, row.r), cells }
        })
        .collect();
    Table { name: name.into(), columns, rows, note: None }
}

fn geometric_table(rows: &[GeometricRow], outcomes: &[TripleOutcome]) -> Table {
    let rows = rows
        .iter()
        .map(|row| {
            let out = find(outcomes, row.p, row.q, row.r);
            let got = |stage: &str| out.and_then(|o| o.count(stage)).unwrap_or(0).to_string();
            let free = |level| Cell::unmatched(String::new(), got(&format!("free_level{level}")));
            Row {
                label: format!("({},{},{})", row.p, row.q, row.r),
                cells: vec![
                    Cell::counts(Some(row.count), out.map(|o| o.survivors.len())),
                    Cell { published: row.ft2.to_string(), ..free(2) },
                    Cell { published: row.ft3.to_string(), ..free(3) },
                    Cell::unmatched(row.remaining.to_string(), got("free_inconclusive")),
                ],
            }
        })
        .collect();
    Table {
        name: "geometric tests".into(),
        columns: ["No.", "FT2", "FT3", "Rem."].map(String::from).to_vec(),
        rows,
        note: Some("method differs: free-product levels are not the hand-drawn tests, so FT columns are not compared".into()),
    }
}

fn milestone_table(ms: &[Milestone], outcomes: &[TripleOutcome]) -> Table {
    let rows = ms
        .iter()
        .map(|m| {
            let got = find(outcomes, m.p, m.q, m.r).map(|o| o.count(&m.stage).unwrap_or(0));
            Row { label: format!("({},{},{}) {}", m.p, m.q, m.r, m.stage), cells: vec![Cell::counts(Some(m.count), got)] }
        })
        .collect();
    Table { name: "linked milestones".into(), columns: vec!["count".into()], rows, note: None }
}

/// Every comparison table for a finished run.
pub fn comparison_tables(lists: &SieveLists, outcomes: &[TripleOutcome]) -> Vec<Table> {
    let reference = reference();
    let mut tables = list_tables(lists);
    tables.push(candidate_table("degree 2 candidates", &reference.degree2, outcomes));
    tables.push(candidate_table("degree 3 candidates", &reference.degree3, outcomes));
    tables.push(geometric_table(&reference.geometric, outcomes));
    tables.push(milestone_table(&reference.milestones, outcomes));
    tables
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(format!("unknown format {s}")),
        }
    }
}

fn flag(m: Option<bool>) -> &'static str {
    match m {
        Some(true) => "ok",
        Some(false) => "MISMATCH",
        None => "n/a",
    }
}

/// Renders one table; each cell becomes published, computed and match columns.
pub fn render_table(t: &Table, format: Format) -> String {
    let mut header = vec!["row".to_string()];
    for c in &t.columns {
        header.extend([format!("{c} published"), format!("{c} computed"), format!("{c} match")]);
    }
    let body: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            let mut line = vec![r.label.clone()];
            for c in &r.cells {
                line.extend([c.published.clone(), c.computed.clone(), flag(c.matches).to_string()]);
            }
            line
        })
        .collect();
    match format {
        Format::Json => serde_json::to_string_pretty(t).unwrap_or_default() + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for line in std::iter::once(&header).chain(&body) {
                let _ = w.write_record(line);
            }
            w.into_inner().map(|b| String::from_utf8_lossy(&b).into_owned()).unwrap_or_default()
        }
        Format::Markdown => {
            let mut s = format!("### {}\n\n", t.name);
            if let Some(n) = &t.note {
                let _ = writeln!(s, "{n}\n");
            }
            let _ = writeln!(s, "| {} |", header.join(" | "));
            let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
            for l in &body {
                let _ = writeln!(s, "| {} |", l.join(" | "));
            }
            s
        }
    }
}

/// Writes every table of a manifest into `dir`, one file per table.
pub fn render_tables(manifest: &Manifest, format: Format, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Markdown => "md",
    };
    manifest
        .tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.{ext}", t.name.replace(' ', "_")));
            std::fs::write(&path, render_table(t, format))?;
            Ok(path)
        })
        .collect()
}

/// The contour of `(p, q)` and its conjugate reflection.
pub fn plot_contour(cfg: &RunConfig, p: u32, q: u32) -> String {
    let b = cfg.bounds(p, q);
    let mirror = b.contour.iter().map(|z| z.conj()).collect();
    svg::render_paths(&[("contour".into(), b.contour.clone()), ("reflection".into(), mirror)])
}

/// Isometric circles of both generators and the second-level images.
pub fn plot_circles(p: u32, q: u32, gamma: Complex64) -> Result<String, GeometryError> {
    let pair = normalize_generators(p, q, gamma)?;
    Ok(svg::render(&svg::layers(&pair)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let cfg = RunConfig::parse("# run\nt_grid = 1e4\nslack=1e-10\noutput_dir = /tmp/x\n").unwrap();
        assert_eq!(cfg.t_grid, 10_000);
        assert_eq!(cfg.slack, 1e-10);
        assert_eq!(cfg.contour_samples, 4096);
        assert!(matches!(RunConfig::parse("slack = 1e-3"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(RunConfig::parse("t_grid"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn routing() {
        assert_eq!(method_for(7, 7, 4), Method::Linked);
        assert_eq!(method_for(30, 30, 3), Method::Linked);
        assert_eq!(method_for(6, 6, 3), Method::Basic);
    }

    #[test]
    fn reference_tables_load() {
        let r = reference();
        assert_eq!(r.norm_list.len(), 86);
        assert_eq!(r.aspiring_list.len(), 34);
        assert_eq!(r.degree2.len(), 31);
    }

    #[test]
    fn empty_stage_renders_zero() {
        let row = CandidateRow { p: 9, q: 6, r: 2, lists: vec![Some(4), Some(7)], pr: Some(1), b: Some(0), f: Some(0) };
        let out = TripleOutcome {
            p: 9,
            q: 6,
            r: 2,
            method: Method::Basic,
            delta: "gamma".into(),
            stages: vec![Stage { name: "c0".into(), count: 4, elapsed_ms: 0 }],
            survivors: vec![],
            real_excluded: vec![],
        };
        let t = candidate_table("t", &[row], &[out]);
        assert_eq!(t.rows[0].cells[3].computed, "0");
        let md = render_table(&t, Format::Markdown);
        assert!(md.contains("| (9,6,2) | 4 | 4 | ok |"));
        let csv = render_table(&t, Format::Csv);
        assert_eq!(csv.lines().count(), 2);
    }
}
