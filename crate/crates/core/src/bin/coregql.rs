use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coregql::corpus::random_database;
use coregql::datalog::{encode_graph, eval_datalog, eval_naive, parse_program};
use coregql::experiments::{run_experiment, ExperimentConfig};
use coregql::graph::{generate, load_graph, save_graph, GraphFamily, GraphFamilySpec};
use coregql::lcra::{eval_lcra_query, lcra_to_ra, parse_lcra, ra_to_lcra, LcraQuery};
use coregql::patmatch::pattern_to_automaton;
use coregql::pattern::{is_plus_normal_form, one_way_violations, parse_pattern, plus_normal_form, OneWayViolation, PnfMode};
use coregql::query::{eval_core, parse_query_file, render_csv, render_json, CoreQueryFile, QueryBody};
use coregql::relalg::{eval_ra, parse_ra, parse_schema, RAExpr, Schema};
use coregql::PropertyGraph;

#[derive(Parser)]
#[command(name = "coregql", version, about = "Core GQL / Core PGQ reference evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query file over a graph.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Inspect a path pattern.
    Pattern {
        #[arg(value_enum)]
        action: PatternAction,
        /// Pattern text; read from `--file` when absent.
        pattern: Option<String>,
        #[arg(long, conflicts_with = "pattern")]
        file: Option<PathBuf>,
        /// Normal-form mode for `pnf`.
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        /// Words over `a` (forward) and `b` (backward) to test against the automaton.
        #[arg(long = "word")]
        words: Vec<String>,
    },
    /// Translate between RA and LCRA.
    Translate {
        #[arg(long, value_enum)]
        from: Lang,
        #[arg(long, value_enum)]
        to: Lang,
        /// A bare expression, or a query file with `rel` declarations.
        #[arg(long)]
        query: PathBuf,
        /// Schema text such as `R(A,B); S(B)`, or a file holding it.
        #[arg(long)]
        schema: Option<String>,
        /// Evaluate source and translation and compare the results.
        #[arg(long)]
        check: bool,
        /// Graph for `--check` on query files.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Random databases for `--check` on bare expressions.
        #[arg(long, default_value_t = 20)]
        databases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute the least model of a Datalog program over a graph.
    Datalog {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        program: PathBuf,
        /// Use naive instead of semi-naive iteration.
        #[arg(long)]
        naive: bool,
    },
    /// Run the increasing-edge-values benchmark.
    Experiment {
        /// Inclusive range `lo..hi`.
        #[arg(long, default_value = "4..30", value_parser = parse_range)]
        n_range: (usize, usize),
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        graphs: usize,
        #[arg(long, default_value_t = 10.0)]
        timeout_secs: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        min_len: usize,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Do not stop scanning `n` after the first infinite median.
        #[arg(long)]
        full_grid: bool,
    },
    /// Generate a graph as JSON.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "val")]
        key: String,
        #[arg(long, default_value_t = 0)]
        lo: i64,
        #[arg(long, default_value_t = 100)]
        hi: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternAction {
    Parse,
    FreeVars,
    OneWay,
    Pnf,
    Automaton,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    General,
    Dataless,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Lang {
    Ra,
    Lcra,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    DatalessPath,
    Gnp,
    AnnotatedPath,
    NodeAnnotatedPath,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected `lo..hi`")?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

enum Failure {
    Usage(String),
    Eval(String),
}

type Outcome = Result<(), Failure>;

fn eval_err(e: impl std::fmt::Display) -> Failure {
    Failure::Eval(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn graph_from(path: &Path) -> Result<PropertyGraph, Failure> {
    let text = read(path)?;
    load_graph(text.as_bytes()).map_err(|e| Failure::Eval(format!("{}: {e}", path.display())))
}

fn eval(graph: &Path, query: &Path, format: Format) -> Outcome {
    let g = graph_from(graph)?;
    let qf = parse_query_file(&read(query)?).map_err(eval_err)?;
    let rel = eval_core(&g, &qf).map_err(eval_err)?;
    match format {
        Format::Csv => print!("{}", render_csv(&g, &rel)),
        Format::Json => println!("{}", render_json(&g, &rel)),
    }
    if rel.is_empty() {
        eprintln!("status: empty");
    } else {
        eprintln!("status: nonempty, {} rows", rel.len());
    }
    Ok(())
}

fn pattern_cmd(action: PatternAction, text: Option<String>, file: Option<PathBuf>, mode: Mode, words: &[String]) -> Outcome {
    let text = match (text, file) {
        (Some(t), _) => t,
        (None, Some(f)) => read(&f)?,
        (None, None) => return Err(Failure::Usage("expected a pattern or --file".into())),
    };
    let psi = parse_pattern(&text).map_err(eval_err)?;
    match action {
        PatternAction::Parse => println!("{psi}"),
        PatternAction::FreeVars => {
            let vars: Vec<String> = psi.free_vars().into_iter().collect();
            println!("{}", vars.join(","));
        }
        PatternAction::OneWay => {
            let violations = one_way_violations(&psi);
            println!("{}", violations.is_empty());
            for v in violations {
                match v {
                    OneWayViolation::BackwardEdge(p) => println!("backward edge: {p}"),
                    OneWayViolation::SharedVariables { subterm, shared } => {
                        let shared: Vec<String> = shared.into_iter().collect();
                        println!("shared variables {{{}}} in: {subterm}", shared.join(","))
                    }
                }
            }
        }
        PatternAction::Pnf => {
            let mode = match mode {
                Mode::General => PnfMode::General,
                Mode::Dataless => PnfMode::Dataless,
            };
            let pnf = plus_normal_form(&psi, mode).map_err(eval_err)?;
            debug_assert!(is_plus_normal_form(&pnf));
            println!("{pnf}");
        }
        PatternAction::Automaton => {
            let a = pattern_to_automaton(&psi).map_err(eval_err)?;
            print!("{a}");
            for w in words {
                let letters = w
                    .chars()
                    .map(coregql::patmatch::Letter::from_char)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Failure::Usage(format!("--word {w}: letters must be `a` or `b`")))?;
                println!("{w}: {}", a.accepts(&letters));
            }
        }
    }
    Ok(())
}

fn schema_arg(arg: Option<&str>) -> Result<Schema, Failure> {
    let arg = arg.ok_or_else(|| Failure::Usage("--schema is required for bare expressions".into()))?;
    let text = if Path::new(arg).is_file() { read(Path::new(arg))? } else { arg.to_string() };
    parse_schema(&text).map_err(eval_err)
}

enum Expr {
    Ra(RAExpr),
    Lcra(LcraQuery),
}

impl Expr {
    fn translate(&self, schema: &Schema) -> Result<Expr, Failure> {
        Ok(match self {
            Expr::Ra(e) => Expr::Lcra(ra_to_lcra(e, schema).map_err(eval_err)?),
            Expr::Lcra(q) => Expr::Ra(lcra_to_ra(q, schema).map_err(eval_err)?),
        })
    }

    fn eval(&self, db: &coregql::relalg::Database) -> Result<coregql::Relation, Failure> {
        match self {
            Expr::Ra(e) => eval_ra(db, e).map_err(eval_err),
            Expr::Lcra(q) => eval_lcra_query(db, q).map_err(eval_err),
        }
    }

    fn into_body(self) -> QueryBody {
        match self {
            Expr::Ra(e) => QueryBody::Pgq(e),
            Expr::Lcra(q) => QueryBody::Gql(q),
        }
    }
}

struct TranslateArgs {
    from: Lang,
    to: Lang,
    query: PathBuf,
    schema: Option<String>,
    check: bool,
    graph: Option<PathBuf>,
    databases: usize,
    seed: u64,
}

fn translate(a: TranslateArgs) -> Outcome {
    if a.from == a.to {
        return Err(Failure::Usage("--from and --to must differ".into()));
    }
    let text = read(&a.query)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with("rel") || trimmed.starts_with("query") {
        let qf = parse_query_file(&text).map_err(eval_err)?;
        let source = match (&qf.body, a.from) {
            (QueryBody::Pgq(e), Lang::Ra) => Expr::Ra(e.clone()),
            (QueryBody::Gql(q), Lang::Lcra) => Expr::Lcra(q.clone()),
            _ => return Err(Failure::Usage("query body does not match --from".into())),
        };
        let target = source.translate(&qf.schema())?;
        let out = CoreQueryFile::new(qf.relations.clone(), target.into_body()).map_err(eval_err)?;
        print!("{out}");
        if a.check {
            let path = a.graph.ok_or_else(|| Failure::Usage("--check on a query file needs --graph".into()))?;
            let g = graph_from(&path)?;
            let left = eval_core(&g, &qf).map_err(eval_err)?;
            let right = eval_core(&g, &out).map_err(eval_err)?;
            report_check(left == right, 1)?;
        }
        return Ok(());
    }
    let schema = schema_arg(a.schema.as_deref())?;
    let source = match a.from {
        Lang::Ra => Expr::Ra(parse_ra(&text).map_err(eval_err)?),
        Lang::Lcra => Expr::Lcra(parse_lcra(&text).map_err(eval_err)?),
    };
    let target = source.translate(&schema)?;
    match &target {
        Expr::Ra(e) => println!("{e}"),
        Expr::Lcra(q) => println!("{q}"),
    }
    if a.check {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let mut same = true;
        for _ in 0..a.databases {
            let db = random_database(&mut rng, &schema, 4, 6);
            same &= source.eval(&db)? == target.eval(&db)?;
        }
        report_check(same, a.databases)?;
    }
    Ok(())
}

fn report_check(same: bool, inputs: usize) -> Outcome {
    if same {
        eprintln!("check: equal on {inputs} input(s)");
        Ok(())
    } else {
        Err(Failure::Eval("check: source and translation disagree".into()))
    }
}

fn datalog(graph: &Path, program: &Path, naive: bool) -> Outcome {
    let g = graph_from(graph)?;
    let p = parse_program(&read(program)?).map_err(eval_err)?;
    let facts = encode_graph(&g);
    let model = if naive { eval_naive(&facts, &p) } else { eval_datalog(&facts, &p) }.map_err(eval_err)?;
    if let Some(b) = model.boolean() {
        println!("{b}");
        return Ok(());
    }
    let Some(out) = model.out.as_deref() else {
        return Err(Failure::Usage("program has no `.out` directive".into()));
    };
    for row in model.get(out).into_iter().flatten() {
        let cells: Vec<String> = row.iter().map(|v| g.render(v)).collect();
        println!("{}", cells.join(","));
    }
    Ok(())
}

fn run() -> Outcome {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { Err(Failure::Usage(String::new())) } else { Ok(()) };
        }
    };
    match cli.command {
        Command::Eval { graph, query, format } => eval(&graph, &query, format),
        Command::Pattern {
            action,
            pattern,
            file,
            mode,
            words,
        } => pattern_cmd(action, pattern, file, mode, &words),
        Command::Translate {
            from,
            to,
            query,
            schema,
            check,
            graph,
            databases,
            seed,
        } => translate(TranslateArgs {
            from,
            to,
            query,
            schema,
            check,
            graph,
            databases,
            seed,
        }),
        Command::Datalog { graph, program, naive } => datalog(&graph, &program, naive),
        Command::Experiment {
            n_range,
            p,
            graphs,
            timeout_secs,
            seed,
            min_len,
            out,
            full_grid,
        } => {
            if !(timeout_secs > 0.0 && timeout_secs.is_finite()) {
                return Err(Failure::Usage(format!("--timeout-secs {timeout_secs}: must be positive")));
            }
            let cfg = ExperimentConfig {
                ns: (n_range.0..=n_range.1).collect(),
                ps: p,
                graphs_per_point: graphs,
                timeout: Duration::from_secs_f64(timeout_secs),
                min_path_len: min_len,
                seed,
                full_grid,
                ..ExperimentConfig::default()
            };
            let result = run_experiment(&cfg, |s| match s.median {
                Some(m) => eprintln!("n={} p={} timeouts={:.2} median={:.3}ms", s.n, s.p, s.timeout_fraction, m.as_secs_f64() * 1e3),
                None => eprintln!("n={} p={} timeouts={:.2} median=inf", s.n, s.p, s.timeout_fraction),
            })
            .map_err(eval_err)?;
            write_out(out.as_deref(), &result.to_csv())
        }
        Command::Generate {
            kind,
            n,
            p,
            seed,
            key,
            lo,
            hi,
            out,
        } => {
            let family = match kind {
                Kind::DatalessPath => GraphFamily::DatalessPath,
                Kind::Gnp => GraphFamily::Gnp,
                Kind::AnnotatedPath => GraphFamily::AnnotatedPath,
                Kind::NodeAnnotatedPath => GraphFamily::NodeAnnotatedPath,
            };
            let spec = GraphFamilySpec {
                p,
                ..GraphFamilySpec::new(family, n).with_seed(seed).with_values(&key, lo, hi)
            };
            let g = generate(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            write_out(out.as_deref(), &save_graph(&g))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Eval(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
