//! `ceti`: command-line front end for MiniLang repair, the two reductions, the
//! reachability solver and the corpus benchmark.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 `repair` found no patch,
//! 3 `equiv` found a mismatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use ceti::corpus::bench;
use ceti::domain::{Domain, Domains};
use ceti::faultloc::{tarantula, Spectrum};
use ceti::gen;
use ceti::interp::{run_suite, Interpreter, TestSuite, DEFAULT_FUEL};
use ceti::minilang::{parse, print, stmt_head, validate, Program, Valuation};
use ceti::reductions::{check_reach_witness, check_synthesis_witness, gadget_r2s, gadget_s2r, ReachInstance, SynthesisInstance};
use ceti::repair::{repair, RepairConfig, RepairStatus};
use ceti::solver::{solve, SolverConfig};
use ceti::templates::{TemplateSet, CONST_RANGE};

#[derive(Parser)]
#[command(name = "ceti", version, about = "Template-based repair of MiniLang programs through reachability")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a program parses and is well formed.
    Parse {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Pretty-print a program in canonical form.
    Print {
        file: PathBuf,
        /// List statements with their ids instead of printing the program.
        #[arg(long)]
        ids: bool,
    },
    /// Run a program once and print its outcome.
    Run {
        file: PathBuf,
        /// Global values, `x=1,y=-2`.
        #[arg(long, default_value = "")]
        globals: String,
        /// Hole values, `c0=1,c1=2`.
        #[arg(long, default_value = "")]
        holes: String,
        /// Entry arguments, `1,2,3`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        args: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Rank statements by Tarantula suspiciousness (TSV).
    Faultloc {
        file: PathBuf,
        tests: PathBuf,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Reduce a template program and its tests to a reachability instance.
    S2r {
        template: PathBuf,
        tests: PathBuf,
        /// Hole domains; holes not listed get the default constant range.
        #[arg(long)]
        domains: Option<PathBuf>,
        /// Write the program here, with `.rename` and `.domains` sidecars next to it.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Reduce a reachability instance to a synthesis instance.
    R2s {
        program: PathBuf,
        /// Input globals and their domains; the listed names are the inputs.
        domains: PathBuf,
        /// Write the program here, with `.rename`, `.domains` and `.tests` sidecars next to it.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Search input domains for values that reach the `reach` statement (JSON).
    Solve {
        program: PathBuf,
        domains: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        no_timing: bool,
    },
    /// Repair a program against a test suite (JSON). Exits 2 when no patch is found.
    Repair {
        program: PathBuf,
        tests: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Zero every timing field so the output is byte-stable.
        #[arg(long)]
        no_timing: bool,
    },
    /// Repair every entry of a corpus and tabulate the results.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Wall-clock cap per entry, in seconds.
        #[arg(long, default_value_t = 60.0)]
        entry_cap_s: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        no_timing: bool,
    },
    /// Check both reductions on generated instances by exhaustive enumeration.
    Equiv {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Largest domain size of generated instances.
        #[arg(long, default_value_t = 40)]
        max_domain: usize,
    },
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 64)]
    loop_bound: u32,
    #[arg(long, default_value_t = 100_000)]
    max_paths: u64,
    /// Solver time cap per candidate, in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_cap_s: f64,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            loop_bound: self.loop_bound,
            max_paths: self.max_paths,
            time_cap: seconds(self.time_cap_s)?,
            ..SolverConfig::default()
        })
    }
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 80)]
    top_n: usize,
    /// Template families, e.g. `const,ops,linear`.
    #[arg(long, default_value = "const,ops,linear")]
    templates: TemplateSet,
    #[arg(long, default_value_t = 1)]
    edits: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Keep searching after the first patch and report the others.
    #[arg(long)]
    all: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<RepairConfig> {
        Ok(RepairConfig {
            top_n: self.top_n,
            templates: self.templates.clone(),
            edits: self.edits,
            solver: self.solver.config()?,
            stop_at_first: !self.all,
            ..RepairConfig::default()
        })
    }
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| anyhow!("bad duration {s}"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_program(path: &Path) -> Result<Program> {
    parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_suite(path: &Path) -> Result<TestSuite> {
    read(path)?.parse().with_context(|| format!("{}", path.display()))
}

fn load_domains(path: &Path) -> Result<Domains> {
    Domains::parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

/// `a=1,b=-2` into a valuation.
fn assignments(s: &str) -> Result<Valuation> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("expected name=value, got `{p}`"))?;
            Ok((k.trim().to_string(), v.trim().parse().with_context(|| format!("bad integer in `{p}`"))?))
        })
        .collect()
}

fn integers(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().with_context(|| format!("bad integer `{p}`")))
        .collect()
}

fn sidecar(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

macro_rules! outln {
    ($($t:tt)*) => { emit(&format!("{}\n", format_args!($($t)*))) };
}

fn print_json(v: &serde_json::Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

/// One row per statement: id, source line, statement head.
fn statement_table(p: &Program) -> String {
    let mut out = String::from("stmt_id\tline\tstatement\n");
    for s in p.statements() {
        out.push_str(&format!("{}\t{}\t{}\n", s.id.0, s.span.line, stmt_head(s)));
    }
    out
}

fn cmd_parse(file: &Path, as_json: bool) -> Result<ExitCode> {
    let p = load_program(file)?;
    validate(&p).with_context(|| format!("{}", file.display()))?;
    let holes: Vec<String> = p.holes().iter().map(|h| h.to_string()).collect();
    if as_json {
        print_json(&json!({
            "functions": p.functions.iter().map(|f| &f.name).collect::<Vec<_>>(),
            "globals": p.globals,
            "statements": p.statement_count(),
            "holes": holes,
            "nodes": p.node_count(),
        }));
    } else {
        outln!(
            "ok: {} functions, {} statements, {} holes, {} nodes",
            p.functions.len(),
            p.statement_count(),
            holes.len(),
            p.node_count()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_faultloc(file: &Path, tests: &Path, top: Option<usize>, as_json: bool) -> Result<ExitCode> {
    let p = load_program(file)?;
    let suite = load_suite(tests)?;
    let results = run_suite(&p, &suite, DEFAULT_FUEL);
    let sp = Spectrum::build(&results, p.statement_count())?;
    let ranking = tarantula(&sp);
    let rows = ranking.iter().take(top.unwrap_or(usize::MAX));
    if as_json {
        let v: Vec<_> = rows
            .enumerate()
            .map(|(i, r)| json!({"rank": i + 1, "stmtId": r.stmt.0, "score": r.score, "source": stmt_head(p.stmt(r.stmt).unwrap())}))
            .collect();
        print_json(&json!(v));
    } else {
        outln!("rank\tstmt_id\tscore\tsource_line");
        for (i, r) in rows.enumerate() {
            let s = p.stmt(r.stmt).expect("ranked statements exist");
            outln!("{}\t{}\t{:.4}\t{}", i + 1, r.stmt.0, r.score, stmt_head(s));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_s2r(template: &Path, tests: &Path, domains: Option<&Path>, out: Option<&Path>) -> Result<ExitCode> {
    let p = load_program(template)?;
    let suite = load_suite(tests)?;
    let given = domains.map(load_domains).transpose()?.unwrap_or_default();
    let default = Domain::range(CONST_RANGE.0, CONST_RANGE.1)?;
    let doms = Domains(
        p.holes()
            .iter()
            .map(|h| (h.to_string(), given.get(h.as_str()).cloned().unwrap_or_else(|| default.clone())))
            .collect(),
    );
    let si = SynthesisInstance::new(p, suite, doms)?;
    let (ri, names) = gadget_s2r(&si)?;
    let reach_domains = Domains(ri.input_vars.iter().map(|x| (x.clone(), ri.domains.get(x).unwrap().clone())).collect());
    match out {
        Some(out) => {
            write(out, &print(&ri.program))?;
            write(&sidecar(out, ".rename"), &names.to_string())?;
            write(&sidecar(out, ".domains"), &reach_domains.to_string())?;
        }
        None => emit(&print(&ri.program)),
    }
    Ok(ExitCode::SUCCESS)
}

fn reach_instance(program: &Path, domains: &Path) -> Result<ReachInstance> {
    let p = load_program(program)?;
    let d = load_domains(domains)?;
    let inputs = d.names().map(str::to_string).collect();
    Ok(ReachInstance::new(p, inputs, d)?)
}

fn cmd_r2s(program: &Path, domains: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let ri = reach_instance(program, domains)?;
    let (si, names) = gadget_r2s(&ri)?;
    match out {
        Some(out) => {
            write(out, &print(&si.program))?;
            write(&sidecar(out, ".rename"), &names.to_string())?;
            write(&sidecar(out, ".domains"), &si.domains.to_string())?;
            write(&sidecar(out, ".tests"), &si.suite.to_string())?;
        }
        None => emit(&print(&si.program)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(program: &Path, domains: &Path, args: &SolverArgs, no_timing: bool) -> Result<ExitCode> {
    let ri = reach_instance(program, domains)?;
    let report = solve(&ri, &args.config()?);
    let mut v = report.to_json();
    if no_timing {
        v["timeMs"] = json!(0);
    }
    print_json(&v);
    Ok(ExitCode::SUCCESS)
}

fn cmd_repair(program: &Path, tests: &Path, search: &SearchArgs, no_timing: bool) -> Result<ExitCode> {
    let p = load_program(program)?;
    let suite = load_suite(tests)?;
    let report = repair(&p, &suite, &search.config()?)?;
    print_json(&report.to_json(!no_timing));
    Ok(match report.status {
        RepairStatus::Repaired(_) => ExitCode::SUCCESS,
        RepairStatus::NoRepairFound => ExitCode::from(2),
    })
}

fn cmd_bench(dir: &Path, search: &SearchArgs, entry_cap_s: f64, jobs: usize, as_json: bool, no_timing: bool) -> Result<ExitCode> {
    let cap = seconds(entry_cap_s)?;
    let manifest = dir.join(ceti::corpus::MANIFEST);
    let mut report = if manifest.exists() {
        bench(dir, &search.config()?, Some(cap), jobs)?
    } else if dir.is_dir() {
        log::warn!("{} has no manifest; nothing to run", dir.display());
        ceti::corpus::BenchReport::from_rows(Vec::new())
    } else {
        bail!("{} is not a directory", dir.display());
    };
    if no_timing {
        report.rows.iter_mut().for_each(|r| r.time_ms = 0);
    }
    if as_json {
        print_json(&report.to_json());
    } else {
        emit(&report.to_tsv());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_equiv(seed: u64, count: usize, max_domain: usize) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s2r_bad, mut r2s_bad, mut points) = (0usize, 0usize, 0usize);
    for _ in 0..count {
        let si = gen::synthesis_instance(&mut rng, max_domain);
        let (ri, names) = gadget_s2r(&si)?;
        for v in lex_points(&si.domains) {
            points += 1;
            if check_synthesis_witness(&si, &v, DEFAULT_FUEL) != check_reach_witness(&ri, &names.forward(&v), DEFAULT_FUEL) {
                s2r_bad += 1;
            }
        }
        let ri = gen::reach_instance(&mut rng, max_domain.min(12));
        let (si, names) = gadget_r2s(&ri)?;
        for v in lex_points(&ri.domains) {
            points += 1;
            if check_reach_witness(&ri, &v, DEFAULT_FUEL) != check_synthesis_witness(&si, &names.forward(&v), DEFAULT_FUEL) {
                r2s_bad += 1;
            }
        }
    }
    outln!("instances\t{count}\npoints\t{points}\ns2r_mismatches\t{s2r_bad}\nr2s_mismatches\t{r2s_bad}");
    Ok(if s2r_bad + r2s_bad == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

/// Every point of the product of `d`, in lexicographic order.
fn lex_points(d: &Domains) -> Vec<Valuation> {
    d.0.iter().fold(vec![Valuation::new()], |acc, (name, dom)| {
        acc.iter()
            .flat_map(|v| {
                dom.values().map(move |x| {
                    let mut w = v.clone();
                    w.insert(name.clone(), x);
                    w
                })
            })
            .collect()
    })
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Parse { file, json } => cmd_parse(&file, json),
        Cmd::Print { file, ids } => {
            let p = load_program(&file)?;
            emit(&if ids { statement_table(&p) } else { print(&p) });
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { file, globals, holes, args, fuel } => {
            let p = load_program(&file)?;
            let holes = assignments(&holes)?;
            let out = Interpreter::new(&p).fuel(fuel).holes(&holes).run(&assignments(&globals)?, &integers(&args)?);
            outln!("{}", out.kind);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Faultloc { file, tests, top_n, json } => cmd_faultloc(&file, &tests, top_n, json),
        Cmd::S2r { template, tests, domains, out } => cmd_s2r(&template, &tests, domains.as_deref(), out.as_deref()),
        Cmd::R2s { program, domains, out } => cmd_r2s(&program, &domains, out.as_deref()),
        Cmd::Solve { program, domains, solver, no_timing } => cmd_solve(&program, &domains, &solver, no_timing),
        Cmd::Repair { program, tests, search, no_timing } => cmd_repair(&program, &tests, &search, no_timing),
        Cmd::Bench { dir, search, entry_cap_s, jobs, json, no_timing } => {
            cmd_bench(&dir, &search, entry_cap_s, jobs, json, no_timing)
        }
        Cmd::Equiv { seed, count, max_domain } => cmd_equiv(seed, count, max_domain),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
