mod netfile;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qbnet::density::fmt9;
use qbnet::infotheory::{self, Ensemble};
use qbnet::netcore::{validate, QbNet};
use qbnet::protocols::{self, ProtocolFixture, Quantity, SysEnvParams, TwoMixParams};
use qbnet::qprob::{p_gamma, p_gamma_cond};
use qbnet::recipe::Recipe;
use qbnet::suites::{self, PropertyResult};
use qbnet::{random, Error};

use netfile::NetFile;

const EXIT_PARSE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "qbnet", version, about = "Quantum and classical Bayesian nets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every norm condition of a net file.
    Validate { file: PathBuf },
    /// Entropy of an expression on a reduction of the meta state.
    Entropy {
        file: PathBuf,
        /// Steps such as `trace(a);esum(b);project(c=1)`; empty keeps μ.
        #[arg(long, default_value = "")]
        recipe: String,
        #[arg(long)]
        expr: Option<String>,
        #[arg(long, value_enum, default_value_t = Kind::S)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Out::Value)]
        out: Out,
    },
    /// Probability table of a node set, optionally conditioned.
    Probs {
        file: PathBuf,
        /// Comma-separated node names.
        #[arg(long)]
        gamma: String,
        /// Conditioning event `name=k,...`.
        #[arg(long)]
        given: Option<String>,
    },
    /// Holevo information of an ensemble file.
    Holevo { file: PathBuf },
    /// Accessible information: random-restart search, or a given POM file.
    Accinfo {
        file: PathBuf,
        /// Number of POM outcomes (default d²).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        pom: Option<PathBuf>,
    },
    /// Run a seeded property suite.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the entropy tables of a worked net.
    Demo {
        #[arg(value_enum)]
        name: Demo,
        /// Input amplitudes for teleport (2) or densecode (4).
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Interactions of the system-environment net (1 or 2).
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Write a worked net as a net file, or the trine data as ensemble / POM files.
    Export {
        #[arg(value_enum)]
        name: Export,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Output path; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    S,
    H,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Out {
    Value,
    Matrix,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Table1,
    Dp,
    Protocols,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Epr,
    Eraser,
    Teleport,
    Densecode,
    Sysenv,
    Twomix,
    Holevo,
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    Epr,
    Eraser,
    Teleport,
    Densecode,
    Sysenv,
    Twomix,
    Witness,
    Trine,
    DoubleTrine,
    TrinePom,
}

struct Failure {
    code: u8,
    msg: String,
    /// Partial output still printed to stdout.
    report: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Failure { code, msg: msg.into(), report: String::new() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        use Error::*;
        let code = match e {
            Parse { .. } | Syntax { .. } | EmptyExpression | TooManyVariables(_) => EXIT_PARSE,
            DuplicateNode(_) | UnknownNode(_) | SelfParent(_) | EmptyShape(_) | CycleDetected(_)
            | DimensionMismatch(_) | StoryCapExceeded { .. } | UnknownAxis(_) | EmptyGamma | InvalidPom(_)
            | InvalidEnsemble(_) => EXIT_INVALID,
            _ => EXIT_NUMERIC,
        };
        Failure::new(code, e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, f: Failure) -> Failure {
    Failure::new(f.code, format!("{}: {}", path.display(), f.msg))
}

/// Parses and validates a net file.
fn load_net(path: &Path) -> Result<QbNet, Failure> {
    let net = NetFile::parse(&read(path)?).and_then(|f| f.to_net()).map_err(|e| with_path(path, e.into()))?;
    let report = validate(&net);
    if !report.is_valid() {
        return Err(Failure::new(EXIT_INVALID, format!("{}: invalid net\n{report}", path.display())));
    }
    Ok(net)
}

fn load_ensemble(path: &Path) -> Result<Ensemble, Failure> {
    netfile::parse_ensemble(&read(path)?).map_err(|e| with_path(path, e.into()))
}

fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn cmd_validate(file: &Path) -> CmdResult {
    load_net(file)?;
    Ok("valid\n".into())
}

fn cmd_entropy(file: &Path, recipe: &str, expr: Option<&str>, kind: Kind, out: Out) -> CmdResult {
    let net = load_net(file)?;
    let recipe: Recipe = recipe.parse()?;
    let rho = recipe.apply(&net)?;
    if out == Out::Matrix {
        return Ok(rho.to_tsv());
    }
    let expr = expr.ok_or_else(|| Failure::new(EXIT_PARSE, "--expr is required"))?;
    let v = match kind {
        Kind::S => rho.s(expr)?,
        Kind::H => rho.h(expr)?,
    };
    Ok(format!("{}\n", fmt9(v)))
}

fn cmd_probs(file: &Path, gamma: &str, given: Option<&str>) -> CmdResult {
    let net = load_net(file)?;
    let g1 = list(gamma);
    let table = match given {
        None => p_gamma(&net, &g1)?,
        Some(cond) => {
            let mut names = Vec::new();
            let mut values = Vec::new();
            for part in list(cond) {
                let (n, k) = part
                    .split_once('=')
                    .ok_or_else(|| Failure::new(EXIT_PARSE, format!("expected `name=k` in --given, found `{part}`")))?;
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| Failure::new(EXIT_PARSE, format!("invalid state index in `{part}`")))?;
                names.push(n.trim());
                values.push(k);
            }
            p_gamma_cond(&net, &g1, &names, &values)?
        }
    };
    Ok(table.to_tsv())
}

fn cmd_holevo(file: &Path) -> CmdResult {
    let e = load_ensemble(file)?;
    Ok(format!("chi\t{}\n", fmt9(infotheory::holevo(&e)?)))
}

fn cmd_accinfo(file: &Path, m: Option<usize>, restarts: usize, seed: u64, pom: Option<&Path>) -> CmdResult {
    let e = load_ensemble(file)?;
    let chi = infotheory::holevo(&e)?;
    let value = match pom {
        Some(p) => {
            let pom = netfile::parse_pom(&read(p)?).map_err(|err| with_path(p, err.into()))?;
            infotheory::mutual_info(&infotheory::channel(&e, &pom)?)
        }
        None => infotheory::maximize_accessible_info(&e, m, restarts, seed)?.1,
    };
    Ok(format!("mutual_info\t{}\nchi\t{}\n", fmt9(value), fmt9(chi)))
}

fn print_results(rows: &[PropertyResult]) -> CmdResult {
    let mut s: String = rows.iter().map(|r| format!("{r}\n")).collect();
    let passed = rows.iter().filter(|r| r.pass()).count();
    s.push_str(&format!("{passed}/{} properties pass\n", rows.len()));
    if passed == rows.len() {
        Ok(s)
    } else {
        Err(Failure { code: EXIT_INVALID, msg: format!("{} properties fail", rows.len() - passed), report: s })
    }
}

fn cmd_check(suite: Suite, trials: Option<usize>, seed: u64) -> CmdResult {
    let rows = match suite {
        Suite::Table1 => {
            let n = trials.unwrap_or(100);
            let mut rows = suites::table1_classical(n, seed)?;
            rows.extend(suites::table1_quantum(n, seed)?);
            rows
        }
        Suite::Dp => {
            let n = trials.unwrap_or(200);
            suites::dp_suite(n, n.div_ceil(2), seed)?
        }
        Suite::Protocols => suites::protocol_suite(trials.unwrap_or(20), seed)?,
    };
    print_results(&rows)
}

fn alpha_or(alpha: Option<&str>, default: Vec<num_complex::Complex64>) -> Result<Vec<num_complex::Complex64>, Failure> {
    match alpha {
        Some(a) => Ok(netfile::parse_complex_list(a)?),
        None => Ok(default),
    }
}

fn fixture(name: Demo, alpha: Option<&str>, seed: u64, steps: usize) -> Result<ProtocolFixture, Failure> {
    let mut rng = random::seeded(seed);
    Ok(match name {
        Demo::Epr => protocols::epr_net(),
        Demo::Eraser => protocols::eraser_net(),
        Demo::Teleport => protocols::teleport_net(&alpha_or(alpha, protocols::demo_alpha2())?)?,
        Demo::Densecode => protocols::dense_coding_net(&alpha_or(alpha, protocols::demo_alpha4())?)?,
        Demo::Sysenv => {
            if !(1..=2).contains(&steps) {
                return Err(Failure::new(EXIT_INVALID, "--steps must be 1 or 2"));
            }
            protocols::sys_env_net(steps, &SysEnvParams::random(&mut rng, steps, 2, 2, 2))?
        }
        Demo::Twomix => protocols::two_mixtures_net(&TwoMixParams::random(&mut rng, [2, 2], [2, 2]))?,
        Demo::Holevo => unreachable!("holevo has no fixture"),
    })
}

/// Entropy rows grouped per reduction, then every other check.
fn render_fixture(fx: &ProtocolFixture) -> CmdResult {
    let outcomes = fx.check()?;
    let mut table: Vec<(String, String, Option<f64>, Option<f64>)> = Vec::new();
    let mut other = Vec::new();
    for (e, o) in fx.expected.iter().zip(&outcomes) {
        let (expr, is_s) = match &e.quantity {
            Quantity::S(x) => (x, true),
            Quantity::H(x) => (x, false),
            _ => {
                other.push(o);
                continue;
            }
        };
        let state = e.state.clone().unwrap_or_default();
        let pos = table.iter().position(|r| r.0 == state && &r.1 == expr).unwrap_or_else(|| {
            table.push((state, expr.clone(), None, None));
            table.len() - 1
        });
        if is_s { table[pos].2 = Some(o.actual) } else { table[pos].3 = Some(o.actual) }
    }
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt9);
    let mut s = format!("# {}\nstate\texpr\tS\tH\n", fx.name);
    for (state, expr, sv, hv) in &table {
        s.push_str(&format!("{state}\t{expr}\t{}\t{}\n", cell(*sv), cell(*hv)));
    }
    if !other.is_empty() {
        s.push_str("# checks\n");
        for o in other {
            s.push_str(&format!("{o}\n"));
        }
    }
    let failed = outcomes.iter().filter(|o| !o.pass()).count();
    if failed > 0 {
        return Err(Failure { code: EXIT_NUMERIC, msg: format!("{failed} checks failed"), report: s });
    }
    Ok(s)
}

fn demo_holevo(restarts: usize, seed: u64) -> CmdResult {
    let e = infotheory::trine_ensemble();
    let chi = infotheory::holevo(&e)?;
    let trine_info = infotheory::mutual_info(&infotheory::channel(&e, &infotheory::trine_pom())?);
    let (_, best) = infotheory::maximize_accessible_info(&e, Some(3), restarts, seed)?;
    let report = infotheory::holevo_net_check(&e, &infotheory::trine_pom())?;
    let mut s = String::from("# holevo\n");
    for (k, v) in [
        ("chi", chi),
        ("trine_pom_info", trine_info),
        ("search_info", best),
        ("S(a:q) before", report.s_a_q_initial),
        ("S(a:all) after", report.s_a_all_final),
        ("S(a:b_f)", report.s_a_b_final),
        ("H(a:b_f)", report.h_a_b_final),
    ] {
        s.push_str(&format!("{k}\t{}\n", fmt9(v)));
    }
    Ok(s)
}

fn cmd_demo(name: Demo, alpha: Option<&str>, seed: u64, steps: usize, restarts: usize) -> CmdResult {
    match name {
        Demo::Holevo => demo_holevo(restarts, seed),
        _ => render_fixture(&fixture(name, alpha, seed, steps)?),
    }
}

fn cmd_export(name: Export, alpha: Option<&str>, seed: u64, steps: usize, output: Option<&Path>) -> CmdResult {
    let net_text = |net: &QbNet| NetFile::from_net(net).write();
    let text = match name {
        Export::Epr => net_text(&fixture(Demo::Epr, alpha, seed, steps)?.net),
        Export::Eraser => net_text(&fixture(Demo::Eraser, alpha, seed, steps)?.net),
        Export::Teleport => net_text(&fixture(Demo::Teleport, alpha, seed, steps)?.net),
        Export::Densecode => net_text(&fixture(Demo::Densecode, alpha, seed, steps)?.net),
        Export::Sysenv => net_text(&fixture(Demo::Sysenv, alpha, seed, steps)?.net),
        Export::Twomix => net_text(&fixture(Demo::Twomix, alpha, seed, steps)?.net),
        Export::Witness => net_text(&protocols::interference_witness()),
        Export::Trine => netfile::write_ensemble(&infotheory::trine_ensemble()),
        Export::DoubleTrine => netfile::write_ensemble(&infotheory::double_trine_ensemble()),
        Export::TrinePom => netfile::write_pom(&infotheory::trine_pom()),
    };
    match output {
        Some(p) => {
            fs::write(p, text)
                .map_err(|e| Failure::new(EXIT_NUMERIC, format!("cannot write {}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Validate { file } => cmd_validate(&file),
        Cmd::Entropy { file, recipe, expr, kind, out } => cmd_entropy(&file, &recipe, expr.as_deref(), kind, out),
        Cmd::Probs { file, gamma, given } => cmd_probs(&file, &gamma, given.as_deref()),
        Cmd::Holevo { file } => cmd_holevo(&file),
        Cmd::Accinfo { file, m, restarts, seed, pom } => cmd_accinfo(&file, m, restarts, seed, pom.as_deref()),
        Cmd::Check { suite, trials, seed } => cmd_check(suite, trials, seed),
        Cmd::Demo { name, alpha, seed, steps, restarts } => cmd_demo(name, alpha.as_deref(), seed, steps, restarts),
        Cmd::Export { name, alpha, seed, steps, output } => {
            cmd_export(name, alpha.as_deref(), seed, steps, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            print!("{}", f.report);
            eprintln!("error: {}", f.msg.trim_end());
            ExitCode::from(f.code)
        }
    }
}
