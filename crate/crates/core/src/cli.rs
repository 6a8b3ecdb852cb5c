//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebra::{op_norm, MatrixLevelElement};
use crate::basis::{qt_identity_check, triple_norm, unconditional_triple_norm, CoefficientSequence};
use crate::error::{Error, Result};
use crate::frame::{lebesgue_constant, FreeGroupFrame};
use crate::multipliers::{schedule_sup_bound, schedule_table, DEFAULT_SCHEDULE_KMAX};
use crate::norms::{matrix_level_norm, NormConfig, NormEstimate, DEFAULT_RADIUS, DEFAULT_TOLERANCE};
use crate::verify::{self, VerifyConfig};

/// Environment variable consulted for the thread count when `--threads` is absent.
pub const THREADS_ENV: &str = "FREEFRAME_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "freeframe", version, about = "Explicit cb-frame for the reduced free-group C*-algebra")]
pub struct Cli {
    /// Truncation ball radius R for norm certification.
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    /// Relative residual tolerance of the eigenvalue iteration.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to FREEFRAME_THREADS, then the hardware default.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// key=value file supplying defaults for the global flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the identity word as "e" instead of "".
    #[arg(long, global = true)]
    pub pretty_identity: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame terms n = start..=max-n: (n, k, p, j, word, a_n).
    FrameTable {
        #[arg(long)]
        max_n: u128,
        #[arg(long, default_value_t = 1)]
        start: u128,
    },
    /// Reconstruction errors ‖x − S_m(x)‖ for each cutoff m.
    Reconstruct {
        #[arg(long)]
        element: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<u128>,
    },
    /// Certified norm interval of an element; --radii sweeps R.
    Norm {
        #[arg(long)]
        element: PathBuf,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<usize>,
    },
    /// Multiplier schedule: tails, cb defects and the resulting bounds.
    Params {
        #[arg(long, default_value_t = DEFAULT_SCHEDULE_KMAX)]
        k_max: usize,
    },
    /// Lebesgue constants L_1..L_K.
    Lebesgue {
        #[arg(long = "max-K", alias = "max-k")]
        max_k: usize,
        #[arg(long, default_value_t = 1e-12)]
        quad_tol: f64,
    },
    /// Triple norm of a coefficient sequence.
    BasisNorm {
        #[arg(long)]
        coeffs: PathBuf,
        /// Expected matrix level of the sequence.
        #[arg(long)]
        level: Option<usize>,
        /// Maximize over all subsets of the support instead of prefixes.
        #[arg(long)]
        unconditional: bool,
    },
    /// ℓ¹ residual ‖x − QT_N(x)‖ for each N.
    QtCheck {
        #[arg(long)]
        element: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u128>,
    },
    /// Runs the acceptance checks and prints the report.
    Verify,
}

/// Effective settings after merging the config file, environment and flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub radius: usize,
    pub tol: f64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub pretty_identity: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            radius: DEFAULT_RADIUS,
            tol: DEFAULT_TOLERANCE,
            seed: 0,
            threads: None,
            format: None,
            output: None,
            pretty_identity: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::input(format!("config key {key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Applies `key=value` lines; blank lines and `#` comments are ignored.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::input(format!("config line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "radius" => self.radius = parse_value(key, value)?,
                "tol" => self.tol = parse_value(key, value)?,
                "seed" => self.seed = parse_value(key, value)?,
                "threads" => self.threads = Some(parse_value(key, value)?),
                "format" => {
                    self.format = Some(
                        Format::from_str(value, true)
                            .map_err(|_| Error::input(format!("config key format: unknown format {value:?}")))?,
                    )
                }
                "output" => self.output = Some(PathBuf::from(value)),
                "pretty_identity" | "pretty-identity" => self.pretty_identity = parse_value(key, value)?,
                _ => return Err(Error::input(format!("config line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        Ok(())
    }

    /// Config file first, then `FREEFRAME_THREADS`, then flags.
    pub fn resolve(cli: &Cli, env_threads: Option<String>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &cli.config {
            cfg.apply_file(&fs::read_to_string(path)?)?;
        }
        if cfg.threads.is_none() {
            if let Some(v) = env_threads.filter(|v| !v.trim().is_empty()) {
                cfg.threads = Some(parse_value(THREADS_ENV, v.trim())?);
            }
        }
        if let Some(r) = cli.radius {
            cfg.radius = r;
        }
        if let Some(t) = cli.tol {
            cfg.tol = t;
        }
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(t) = cli.threads {
            cfg.threads = Some(t);
        }
        if let Some(f) = cli.format {
            cfg.format = Some(f);
        }
        if let Some(o) = &cli.output {
            cfg.output = Some(o.clone());
        }
        cfg.pretty_identity |= cli.pretty_identity;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::input(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.threads == Some(0) {
            return Err(Error::input("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn norm_config(&self) -> NormConfig {
        NormConfig::default().with_radius(self.radius).with_tol(self.tol).with_seed(self.seed)
    }
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_doc<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Renders rows either as CSV with `header` or as a JSON document
/// `{ "<key>": [ {header[i]: value, …}, … ] }` with typed values.
fn table<T: Serialize>(format: Format, key: &str, header: &[&str], rows: &[T], cells: impl Fn(&T) -> Vec<String>) -> Result<String> {
    match format {
        Format::Csv => csv_table(header, rows.iter().map(cells).collect()),
        Format::Json => {
            let mut doc = BTreeMap::new();
            doc.insert(key, rows);
            json_doc(&doc)
        }
    }
}

fn read_element(path: &Path) -> Result<MatrixLevelElement> {
    MatrixLevelElement::from_json(&fs::read_to_string(path)?)
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[derive(Serialize)]
struct FrameRow {
    n: String,
    k: usize,
    p: String,
    j: u64,
    word: String,
    a_n: f64,
}

#[derive(Serialize)]
struct ReconstructRow {
    m: String,
    l1_error: f64,
    norm_lower: f64,
    norm_upper: f64,
}

#[derive(Serialize)]
struct NormRow {
    radius: usize,
    lower: f64,
    upper: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct LebesgueRow {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L_K")]
    l_k: f64,
    error_estimate: f64,
    converged: bool,
}

#[derive(Serialize)]
struct QtRow {
    #[serde(rename = "N")]
    n: String,
    residual: f64,
}

#[derive(Serialize)]
struct ParamsDoc<'a> {
    schedule: &'a [crate::multipliers::ScheduleRow],
    schedule_sup_bound: f64,
    sm_cb_upper_global: f64,
}

#[derive(Serialize)]
struct IntervalDoc<'a> {
    kind: &'a str,
    level: usize,
    #[serde(flatten)]
    estimate: NormEstimate,
}

/// Caps the number of rows `frame-table` will print.
pub const FRAME_TABLE_ROW_CAP: u128 = 10_000_000;

/// Executes a parsed command and returns its rendered output.
pub fn execute(cli: &Cli, cfg: &RunConfig) -> Result<(String, bool)> {
    let frame = FreeGroupFrame::default();
    let ncfg = cfg.norm_config();
    let out = match &cli.command {
        Command::FrameTable { max_n, start } => {
            if *start == 0 || start > max_n {
                return Err(Error::input(format!("need 1 <= start <= max-n, got start {start}, max-n {max_n}")));
            }
            if max_n - start >= FRAME_TABLE_ROW_CAP {
                return Err(Error::capacity(format!("frame-table prints at most {FRAME_TABLE_ROW_CAP} rows")));
            }
            let rows = frame
                .terms(*start, *max_n)
                .map(|t| {
                    let t = t?;
                    Ok(FrameRow {
                        n: t.index.n.to_string(),
                        k: t.index.k,
                        p: t.index.p.to_string(),
                        j: t.index.j,
                        word: t.word.to_string_with(cfg.pretty_identity),
                        a_n: t.coefficient,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table(cfg.format.unwrap_or(Format::Csv), "terms", &["n", "k", "p", "j", "word", "a_n"], &rows, |r| {
                vec![r.n.clone(), r.k.to_string(), r.p.clone(), r.j.to_string(), r.word.clone(), fmt_f64(r.a_n)]
            })?
        }
        Command::Reconstruct { element, m_list } => {
            let u = read_element(element)?;
            let rows = m_list
                .iter()
                .map(|&m| {
                    let map = frame.partial_sum_map(m)?;
                    let l1 = crate::sum::compensated_sum(
                        u.terms().map(|(w, c)| op_norm(c) * (1.0 - crate::algebra::CoefficientMap::weight(&map, w))),
                    );
                    let est = frame.reconstruction_error_matrix(&u, m, &ncfg)?;
                    Ok(ReconstructRow { m: m.to_string(), l1_error: l1, norm_lower: est.lower, norm_upper: est.upper })
                })
                .collect::<Result<Vec<_>>>()?;
            table(cfg.format.unwrap_or(Format::Csv), "rows", &["m", "l1_error", "norm_lower", "norm_upper"], &rows, |r| {
                vec![r.m.clone(), fmt_f64(r.l1_error), fmt_f64(r.norm_lower), fmt_f64(r.norm_upper)]
            })?
        }
        Command::Norm { element, radii } => {
            let u = read_element(element)?;
            if radii.is_empty() {
                let est = matrix_level_norm(&u, &ncfg)?;
                match cfg.format.unwrap_or(Format::Json) {
                    Format::Json => json_doc(&IntervalDoc { kind: "norm", level: u.level(), estimate: est })?,
                    Format::Csv => csv_table(
                        &["radius", "lower", "upper", "iterations", "converged"],
                        vec![vec![
                            est.radius.to_string(),
                            fmt_f64(est.lower),
                            fmt_f64(est.upper),
                            est.iterations.to_string(),
                            est.converged.to_string(),
                        ]],
                    )?,
                }
            } else {
                let rows = radii
                    .iter()
                    .map(|&r| {
                        let est = matrix_level_norm(&u, &ncfg.with_radius(r))?;
                        Ok(NormRow { radius: r, lower: est.lower, upper: est.upper, iterations: est.iterations, converged: est.converged })
                    })
                    .collect::<Result<Vec<_>>>()?;
                table(cfg.format.unwrap_or(Format::Csv), "sweep", &["radius", "lower", "upper", "iterations", "converged"], &rows, |r| {
                    vec![r.radius.to_string(), fmt_f64(r.lower), fmt_f64(r.upper), r.iterations.to_string(), r.converged.to_string()]
                })?
            }
        }
        Command::Params { k_max } => {
            if *k_max == 0 {
                return Err(Error::input("k-max must be at least 1"));
            }
            let rows = schedule_table(*k_max);
            let sup = schedule_sup_bound(*k_max)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => json_doc(&ParamsDoc { schedule: &rows, schedule_sup_bound: sup, sm_cb_upper_global: 3.0 * sup + 1.0 })?,
                Format::Csv => csv_table(
                    &["k", "t", "m", "tail", "cb_defect", "cumulative_sup"],
                    rows.iter()
                        .map(|r| {
                            vec![
                                r.k.to_string(),
                                fmt_f64(r.t),
                                r.m.to_string(),
                                fmt_f64(r.tail),
                                fmt_f64(r.cb_defect),
                                fmt_f64(r.cumulative_sup),
                            ]
                        })
                        .collect(),
                )?,
            }
        }
        Command::Lebesgue { max_k, quad_tol } => {
            if *max_k == 0 {
                return Err(Error::input("max-K must be at least 1"));
            }
            let rows = (1..=*max_k)
                .map(|k| {
                    let q = lebesgue_constant(k, *quad_tol)?;
                    Ok(LebesgueRow { k, l_k: q.value, error_estimate: q.error_estimate, converged: q.converged })
                })
                .collect::<Result<Vec<_>>>()?;
            table(cfg.format.unwrap_or(Format::Csv), "rows", &["K", "L_K"], &rows, |r| vec![r.k.to_string(), fmt_f64(r.l_k)])?
        }
        Command::BasisNorm { coeffs, level, unconditional } => {
            let u = CoefficientSequence::from_json(&fs::read_to_string(coeffs)?)?;
            if let Some(l) = level {
                if *l != u.level() {
                    return Err(Error::input(format!("--level {l} does not match the sequence level {}", u.level())));
                }
            }
            let (kind, est) = if *unconditional {
                ("unconditional_triple_norm", unconditional_triple_norm(&u, &frame, &ncfg)?)
            } else {
                ("triple_norm", triple_norm(&u, &frame, &ncfg)?)
            };
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => json_doc(&IntervalDoc { kind, level: u.level(), estimate: est })?,
                Format::Csv => csv_table(
                    &["kind", "level", "radius", "lower", "upper", "converged"],
                    vec![vec![
                        kind.to_string(),
                        u.level().to_string(),
                        est.radius.to_string(),
                        fmt_f64(est.lower),
                        fmt_f64(est.upper),
                        est.converged.to_string(),
                    ]],
                )?,
            }
        }
        Command::QtCheck { element, n_list } => {
            let u = read_element(element)?;
            let x = u
                .to_scalar()
                .ok_or_else(|| Error::input("qt-check takes a scalar (level 1) element"))?;
            let rows = n_list
                .iter()
                .map(|&n| Ok(QtRow { n: n.to_string(), residual: qt_identity_check(&x, &frame, n)? }))
                .collect::<Result<Vec<_>>>()?;
            table(cfg.format.unwrap_or(Format::Csv), "rows", &["N", "residual"], &rows, |r| vec![r.n.clone(), fmt_f64(r.residual)])?
        }
        Command::Verify => {
            let report = verify::run(&VerifyConfig { seed: cfg.seed, tol: cfg.tol })?;
            let passed = report.passed();
            let text = match cfg.format {
                None => report.to_text(),
                Some(Format::Json) => json_doc(&report)?,
                Some(Format::Csv) => csv_table(
                    &["criterion", "name", "passed", "detail"],
                    report
                        .criteria
                        .iter()
                        .map(|c| vec![c.id.to_string(), c.name.to_string(), c.passed.to_string(), c.detail.clone()])
                        .collect(),
                )?,
            };
            return Ok((text, passed));
        }
    };
    Ok((out, true))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => EXIT_CAPACITY,
        _ => EXIT_INPUT,
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::resolve(&cli, std::env::var(THREADS_ENV).ok()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("freeframe: {e}");
            return exit_code(&e);
        }
    };
    let result = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &cfg)),
            Err(e) => Err(Error::input(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli, &cfg),
    };
    let (text, passed) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("freeframe: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.output {
        Some(path) => fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("freeframe: {}", Error::Io(e));
        return EXIT_INPUT;
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}
