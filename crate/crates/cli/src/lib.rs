//! Command-line driver: loads a scenario, runs one pipeline and writes its
//! artifacts with a manifest.

pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use braidstab::braid::extract::{position_permutation, torus_summary, TorusBraidSummary};
use braidstab::braid::{are_conjugate, braid_word_with_retry, normal_form, suspend_orbits, BraidWord, ConjugacyVerdict};
use braidstab::entropy::{gamma_estimate_with_cap, GrowthEstimate};
use braidstab::flow::HamiltonianFlow;
use braidstab::gf2::run_corpus;
use braidstab::orbits::{find_periodic_points, DegenerateRoot, OrbitSet, SearchDiagnostics};
use braidstab::stability::{run_stability_experiment, selected, OrbitRow, StabilityReport};
use braidstab::symbolic::{build_q, q_braid_gamma_demo, verify_q_structure, QBraidDemo, QStructureReport};
use braidstab::{Surface, TimePeriodicHamiltonian};

use report::{fmt_f, fmt_opt, Bundle, Kind, Table};
use scenario::Scenario;

pub const THREADS_ENV: &str = "BRAIDSTAB_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("scenario error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Io(_) | CliError::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn keeps(self, kind: Kind) -> bool {
        matches!((self, kind), (Format::Both, _) | (Format::Csv, Kind::Csv) | (Format::Json, Kind::Json))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Periodic points of the time-k map with Floquet data and actions.
    Orbits,
    /// Braid word of the selected orbits, with a projection-angle sweep.
    Braid,
    /// Word-growth entropy estimate of an explicit or orbit-derived braid.
    Entropy,
    /// Hofer-perturbation sweep with braid conjugacy verdicts per amplitude.
    Stability,
    /// Randomized transverse-pairing corpus checked against brute force.
    Gf2Corpus,
    /// Cylinder checks of the symbolic orbit Q and its template braid.
    SymbolicCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Orbits => "orbits",
            Command::Braid => "braid",
            Command::Entropy => "entropy",
            Command::Stability => "stability",
            Command::Gf2Corpus => "gf2-corpus",
            Command::SymbolicCheck => "symbolic-check",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "braidstab", version, about = "Braids, entropy bounds and Hofer-stability experiments for periodic orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (.toml or .json).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomized corpora; overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

/// What a run produced; `falsified` and `failed` select exit code 1.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub falsified: bool,
    pub failed: bool,
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.falsified || self.failed {
            1
        } else {
            0
        }
    }
}

#[derive(Serialize)]
struct Timings<'a> {
    command: &'a str,
    seconds: f64,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let scenario = match &cli.scenario {
        Some(p) => Scenario::load(p)?,
        None if matches!(cli.command, Command::Gf2Corpus | Command::SymbolicCheck) => Scenario::default(),
        None => return Err(CliError::Schema(format!("`{}` needs --scenario", cli.command.name()))),
    };
    let seed = cli.seed.or(scenario.seed).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build().map_err(runtime)?;
    let start = Instant::now();
    let (bundle, mut outcome) = pool.install(|| dispatch(cli.command, &scenario, seed))?;
    let seconds = start.elapsed().as_secs_f64();

    let mut canonical = scenario.clone();
    canonical.seed = Some(seed);
    outcome.files = bundle.write(
        &cli.out,
        |k| cli.format.keeps(k),
        cli.command.name(),
        &canonical.canonical_json(),
        seed,
    )?;
    let timings = cli.out.join("timings.json");
    std::fs::write(&timings, report::to_json(&Timings { command: cli.command.name(), seconds })?)
        .map_err(|e| CliError::Io(format!("{}: {e}", timings.display())))?;
    outcome.files.push(timings);
    Ok(outcome)
}

fn dispatch(command: Command, s: &Scenario, seed: u64) -> Result<(Bundle, Outcome), CliError> {
    match command {
        Command::Orbits => orbits(s),
        Command::Braid => braid(s),
        Command::Entropy => entropy(s),
        Command::Stability => stability(s),
        Command::Gf2Corpus => gf2_corpus(s, seed),
        Command::SymbolicCheck => symbolic_check(s),
    }
}

fn build_hamiltonian(s: &Scenario) -> Result<TimePeriodicHamiltonian, CliError> {
    s.hamiltonian()?.build().map_err(|e| CliError::Schema(format!("at `hamiltonian`: {e}")))
}

struct Search {
    h: TimePeriodicHamiltonian,
    period: u32,
    set: OrbitSet,
}

fn search(s: &Scenario) -> Result<Search, CliError> {
    let h = build_hamiltonian(s)?;
    let sec = s.orbits()?;
    if sec.period == 0 {
        return Err(CliError::Schema("at `orbits.period`: must be at least 1".into()));
    }
    let flow = HamiltonianFlow::with_step(h.clone(), sec.step);
    let set = find_periodic_points(&flow, sec.period, &sec.seeds, &sec.search).map_err(runtime)?;
    Ok(Search { h, period: sec.period, set })
}

fn orbit_table(rows: &[OrbitRow], period: u32) -> Table {
    let mut t = Table::new(&[
        "index",
        "x",
        "y",
        "period",
        "stability",
        "multiplier1_re",
        "multiplier1_im",
        "multiplier2_re",
        "multiplier2_im",
        "action",
        "stationary_action",
        "residual",
        "class",
    ]);
    for r in rows {
        t.push(vec![
            r.index.to_string(),
            fmt_f(r.x),
            fmt_f(r.y),
            period.to_string(),
            format!("{:?}", r.stability).to_lowercase(),
            fmt_f(r.multipliers[0][0]),
            fmt_f(r.multipliers[0][1]),
            fmt_f(r.multipliers[1][0]),
            fmt_f(r.multipliers[1][1]),
            fmt_opt(r.action),
            fmt_opt(r.stationary_action),
            fmt_f(r.residual),
            r.class.clone(),
        ]);
    }
    t
}

#[derive(Serialize)]
struct OrbitsJson<'a> {
    scenario: String,
    hamiltonian: &'a str,
    surface: Surface,
    period: u32,
    orbits: &'a [OrbitRow],
    degenerate_roots: &'a [DegenerateRoot],
    diagnostics: &'a SearchDiagnostics,
}

fn orbits(s: &Scenario) -> Result<(Bundle, Outcome), CliError> {
    let Search { h, period, set } = search(s)?;
    let rows: Vec<OrbitRow> = set.orbits.iter().enumerate().map(|(i, o)| OrbitRow::from_orbit(i, o)).collect();
    let mut b = Bundle::new();
    b.csv("orbits.csv", &orbit_table(&rows, period))?;
    b.json(
        "orbits.json",
        &OrbitsJson {
            scenario: s.name(),
            hamiltonian: h.name(),
            surface: h.surface(),
            period,
            orbits: &rows,
            degenerate_roots: &set.degenerate,
            diagnostics: &set.diagnostics,
        },
    )?;
    for (i, o) in set.orbits.iter().enumerate() {
        b.raw_csv(&format!("trajectory_{i}.csv"), o.samples.to_csv());
    }
    let mut summary = vec![format!("{} orbits of period {period}, {} degenerate roots", rows.len(), set.degenerate.len())];
    for r in &rows {
        summary.push(format!(
            "  #{} ({}, {}) {:?} action {}",
            r.index,
            fmt_f(r.x),
            fmt_f(r.y),
            r.stability,
            fmt_opt(r.action)
        ));
    }
    Ok((b, Outcome { summary, ..Default::default() }))
}

/// Generic projection directions for the invariance sweep.
pub const SWEEP_ANGLES: usize = 16;

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    angle: f64,
    word: String,
    verdict: ConjugacyVerdict,
}

#[derive(Serialize)]
struct BraidJson {
    scenario: String,
    hamiltonian: String,
    surface: Surface,
    period: u32,
    targets: Vec<OrbitRow>,
    strands: usize,
    word: Option<BraidWord>,
    normal_form: Option<String>,
    angle: Option<f64>,
    permutation: Vec<usize>,
    sweep: Vec<SweepRow>,
    sweep_all_conjugate: Option<bool>,
    torus: Option<TorusBraidSummary>,
}

struct Braided {
    json: BraidJson,
    strands_csv: String,
}

fn braid_from_orbits(s: &Scenario) -> Result<Braided, CliError> {
    let Search { h, period, set } = search(s)?;
    let sel = s.target.clone().unwrap_or_default();
    let bs = s.braid.unwrap_or_default();
    let picked: Vec<usize> = (0..set.orbits.len()).filter(|&i| selected(&set.orbits[i], &sel)).collect();
    if picked.is_empty() {
        return Err(runtime("no orbits pass the target selection"));
    }
    let targets: Vec<OrbitRow> = picked.iter().map(|&i| OrbitRow::from_orbit(i, &set.orbits[i])).collect();
    let chosen = OrbitSet::from_orbits(picked.iter().map(|&i| set.orbits[i].clone()).collect());
    let g = suspend_orbits(&chosen, bs.samples, bs.collision_radius).map_err(runtime)?;
    let mut json = BraidJson {
        scenario: s.name(),
        hamiltonian: h.name().to_string(),
        surface: h.surface(),
        period,
        targets,
        strands: g.n_strands(),
        word: None,
        normal_form: None,
        angle: None,
        permutation: Vec::new(),
        sweep: Vec::new(),
        sweep_all_conjugate: None,
        torus: None,
    };
    match h.surface() {
        Surface::Torus => {
            let t = torus_summary(&chosen, &g).map_err(runtime)?;
            json.permutation = t.permutation.clone();
            json.torus = Some(t);
        }
        Surface::Disk => {
            let (word, angle) = braid_word_with_retry(&g, bs.angle, bs.collision_radius).map_err(runtime)?;
            let sweep: Vec<SweepRow> = (0..SWEEP_ANGLES)
                .map(|j| {
                    let theta = bs.angle + std::f64::consts::PI * (j as f64 + 0.37) / SWEEP_ANGLES as f64;
                    let (w, a) = braid_word_with_retry(&g, theta, bs.collision_radius).map_err(runtime)?;
                    let verdict = are_conjugate(&word, &w, bs.budget).map_err(runtime)?;
                    Ok(SweepRow { angle: a, word: w.to_string(), verdict })
                })
                .collect::<Result<_, CliError>>()?;
            json.sweep_all_conjugate = Some(sweep.iter().all(|r| r.verdict.is_yes()));
            json.sweep = sweep;
            json.permutation = position_permutation(&g, angle).map_err(runtime)?;
            json.normal_form = Some(normal_form(&word).to_string());
            json.angle = Some(angle);
            json.word = Some(word);
        }
    }
    Ok(Braided { json, strands_csv: g.to_csv() })
}

fn braid(s: &Scenario) -> Result<(Bundle, Outcome), CliError> {
    let Braided { json, strands_csv } = braid_from_orbits(s)?;
    let mut summary = vec![format!("{} strands", json.strands)];
    if let Some(w) = &json.word {
        summary.push(format!("word: {w}"));
    }
    if let Some(nf) = &json.normal_form {
        summary.push(format!("normal form: {nf}"));
    }
    if let Some(ok) = json.sweep_all_conjugate {
        summary.push(format!("{SWEEP_ANGLES}-angle sweep conjugate: {}", if ok { "yes" } else { "no" }));
    }
    let mut sweep = Table::new(&["angle", "word", "verdict"]);
    for r in &json.sweep {
        sweep.push(vec![fmt_f(r.angle), r.word.clone(), r.verdict.label().into()]);
    }
    let mut b = Bundle::new();
    b.json("braid.json", &json)?;
    b.raw_csv("strands.csv", strands_csv);
    b.csv("sweep.csv", &sweep)?;
    Ok((b, Outcome { summary, ..Default::default() }))
}

fn entropy(s: &Scenario) -> Result<(Bundle, Outcome), CliError> {
    let sec = s.entropy.clone().unwrap_or_default();
    let word = match &sec.word {
        Some(text) => {
            let n = sec.strands.ok_or_else(|| CliError::Schema("at `entropy.strands`: required with `entropy.word`".into()))?;
            BraidWord::parse(n, text).map_err(|e| CliError::Schema(format!("at `entropy.word`: {e}")))?
        }
        None => {
            let b = braid_from_orbits(s)?;
            b.json.word.ok_or_else(|| runtime("entropy of torus orbit sets is not supported"))?
        }
    };
    let est: GrowthEstimate = gamma_estimate_with_cap(&word, sec.iterations, sec.letter_cap).map_err(|e| {
        CliError::Schema(format!("at `entropy`: {e}"))
    })?;
    let mut t = Table::new(&["loop", "k", "length"]);
    for (g, lengths) in est.lengths.iter().enumerate() {
        for (k, l) in lengths.iter().enumerate() {
            t.push(vec![format!("x{}x{}", g + 1, g + 2), k.to_string(), l.to_string()]);
        }
    }
    let summary = vec![
        format!("word {} on {} strands", est.word, est.n_strands),
        format!("rate {}{}", fmt_f(est.rate), if est.any_saturated() { " (saturated)" } else { "" }),
        est.label.clone(),
    ];
    let mut b = Bundle::new();
    b.json("entropy.json", &est)?;
    b.csv("entropy.csv", &t)?;
    Ok((b, Outcome { summary, ..Default::default() }))
}

fn stability_table(r: &StabilityReport) -> Table {
    let mut t = Table::new(&[
        "amplitude",
        "hofer",
        "below_epsilon",
        "hypothesis_met",
        "label",
        "orbits",
        "witness",
        "witness_orbits",
        "word",
        "verdict",
        "entropy",
        "max_drift",
        "drift_ok",
        "discrepancy",
        "falsification",
        "notes",
        "error",
    ]);
    for row in &r.rows {
        t.push(vec![
            fmt_f(row.amplitude),
            fmt_f(row.hofer),
            row.below_epsilon.to_string(),
            row.hypothesis_met.to_string(),
            row.label.clone(),
            row.orbits.len().to_string(),
            serde_json::to_value(row.witness).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            row.witness_orbits.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            row.braid.as_ref().map(|b| b.word.to_string()).unwrap_or_default(),
            row.verdict_label().into(),
            fmt_opt(row.entropy),
            fmt_opt(row.max_drift),
            row.drift_ok.to_string(),
            row.discrepancy.to_string(),
            row.falsification.to_string(),
            row.hypothesis_notes.join("; "),
            row.error.clone().unwrap_or_default(),
        ]);
    }
    t
}

fn stability(s: &Scenario) -> Result<(Bundle, Outcome), CliError> {
    let sc = s.stability()?;
    build_hamiltonian(s)?;
    sc.perturbation.profile.build().map_err(|e| CliError::Schema(format!("at `perturbation.profile`: {e}")))?;
    let r = run_stability_experiment(&sc).map_err(runtime)?;
    let mut summary = vec![
        format!(
            "{} orbits, {} targets, epsilon {}{}",
            r.orbits.len(),
            r.targets.len(),
            fmt_f(r.isolation.epsilon),
            if r.isolation.epsilon_derived { " (derived)" } else { "" }
        ),
        match &r.braid {
            Some(b) => format!("braid on {} strands: [{}]", b.strands, b.word),
            None => format!("no braid: {}", r.braid_error.as_deref().unwrap_or("unknown")),
        },
    ];
    for row in &r.rows {
        summary.push(format!(
            "  amplitude {} hofer {} [{}] verdict {}{}",
            fmt_f(row.amplitude),
            fmt_f(row.hofer),
            row.label,
            row.verdict_label(),
            if row.falsification { " FALSIFICATION" } else { "" }
        ));
    }
    let mut b = Bundle::new();
    b.json("stability.json", &r)?;
    b.csv("stability.csv", &stability_table(&r))?;
    Ok((b, Outcome { falsified: r.falsified, summary, ..Default::default() }))
}

fn gf2_corpus(s: &Scenario, seed: u64) -> Result<(Bundle, Outcome), CliError> {
    let sec = s.gf2.clone().unwrap_or_default();
    if sec.max_dim == 0 || sec.max_dim > braidstab::gf2::MAX_DIM {
        return Err(CliError::Schema(format!("at `gf2.max_dim`: must lie in 1..={}", braidstab::gf2::MAX_DIM)));
    }
    let r = run_corpus(seed, sec.instances, sec.max_dim);
    let mut t = Table::new(&["seed", "instances", "max_dim", "constructed_and_verified", "oracle_found", "failures"]);
    t.push(vec![
        r.seed.to_string(),
        r.instances.to_string(),
        r.max_dim.to_string(),
        r.constructed_and_verified.to_string(),
        r.oracle_found.to_string(),
        r.failures.len().to_string(),
    ]);
    let summary = vec![
        format!("pass {}/{}", r.constructed_and_verified, r.instances),
        format!("oracle {}/{}", r.oracle_found, r.instances),
        format!("fail {}", r.failures.len()),
    ];
    let mut b = Bundle::new();
    b.json("gf2_corpus.json", &r)?;
    b.csv("gf2_corpus.csv", &t)?;
    Ok((b, Outcome { failed: !r.passed(), summary, ..Default::default() }))
}

#[derive(Serialize)]
struct SymbolicJson {
    words: Vec<(usize, String)>,
    checks: Vec<(QStructureReport, bool)>,
    demos: Vec<QBraidDemo>,
}

fn symbolic_check(s: &Scenario) -> Result<(Bundle, Outcome), CliError> {
    let sec = s.symbolic.clone().unwrap_or_default();
    let domain = |e: braidstab::symbolic::SymbolicError| CliError::Schema(format!("at `symbolic`: {e}"));
    let mut json = SymbolicJson { words: Vec::new(), checks: Vec::new(), demos: Vec::new() };
    let mut t = Table::new(&["m", "j", "point", "condition", "pass"]);
    let mut summary = Vec::new();
    for &m in &sec.m {
        let q = build_q(m).map_err(domain)?;
        let word: String = q.word().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        let rep = verify_q_structure(m).map_err(domain)?;
        let ok = rep.all_pass();
        summary.push(format!("m = {m}: Q = {word}"));
        summary.push(format!("  period {} (expected {})", rep.period, rep.expected_period));
        for r in &rep.rows {
            summary.push(format!("  {:<8} {:<22} {}", r.point, r.condition, if r.pass { "pass" } else { "FAIL" }));
            t.push(vec![m.to_string(), r.j.to_string(), r.point.clone(), r.condition.clone(), r.pass.to_string()]);
        }
        summary.push(format!("  {}", if ok { "all pass" } else { "FAILED" }));
        json.words.push((m, word));
        json.checks.push((rep, ok));
    }
    for &m in &sec.demo_m {
        let d = q_braid_gamma_demo(m, sec.iterations).map_err(domain)?;
        summary.push(format!(
            "demo m = {m}: {} strands, rate {} vs log(m-2) = {}",
            d.strands,
            fmt_f(d.estimate.rate),
            fmt_f(d.bound)
        ));
        json.demos.push(d);
    }
    let failed = json.checks.iter().any(|c| !c.1);
    let mut b = Bundle::new();
    b.json("symbolic.json", &json)?;
    b.csv("symbolic.csv", &t)?;
    Ok((b, Outcome { failed, summary, ..Default::default() }))
}

/// Parses arguments, runs, prints the summary and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(o) => {
            for line in &o.summary {
                println!("{line}");
            }
            println!("wrote {} files to {}", o.files.len(), display(&cli.out));
            o.exit_code()
        }
        Err(e) => {
            eprintln!("braidstab {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
