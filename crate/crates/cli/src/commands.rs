use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use evosplit_core::evo::multi::ParetoFront;
use evosplit_core::oracle::ORACLE_LIMIT;
use evosplit_core::{
    dataset_stats, exhaustive_optimal, iterative_stratification, nsga2_best_of, pair_stats, random_split, run_best_of,
    second_order_iterative_stratification, Assignment, EaParams, Execution, FoldSpec, Format, Metric,
    MultiLabelDataset, ObjectivePair, SplitError, SplitEvaluator, SplitReport,
};
use serde_json::{json, Map, Value};

use crate::args::{
    AnalyzeArgs, CompareArgs, EngineArgs, EvaluateArgs, FoldArgs, FormatArg, InputArgs, Method, SplitArgs,
};
use crate::table;

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub const INPUT: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const ORACLE: i32 = 4;
    pub const ASSIGNMENT: i32 = 5;

    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(Self::INPUT, message)
    }

    fn config(message: impl Into<String>) -> Self {
        Self::new(Self::CONFIG, message)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load(input: &InputArgs) -> Result<(MultiLabelDataset, Format)> {
    let format = match input.format {
        Some(FormatArg::Jsonl) => Format::Jsonl,
        Some(FormatArg::SparseText) => Format::SparseText,
        None => match input.input.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json") => Format::Jsonl,
            _ => Format::SparseText,
        },
    };
    let path = &input.input;
    let file = File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    let d = MultiLabelDataset::load(BufReader::new(file), format)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((d, format))
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Jsonl => "jsonl",
        Format::SparseText => "sparse-text",
    }
}

fn fold_spec(args: &FoldArgs, m: usize, fallback_k: Option<usize>) -> Result<FoldSpec> {
    let spec = match (&args.proportions, &args.targets) {
        (Some(p), _) => {
            if args.k.is_some_and(|k| k != p.len()) {
                return Err(CliError::config("--k disagrees with the number of proportions"));
            }
            FoldSpec::from_proportions(p, m)
        }
        (None, Some(t)) => {
            if args.k.is_some_and(|k| k != t.len()) {
                return Err(CliError::config("--k disagrees with the number of targets"));
            }
            let spec = FoldSpec::from_targets(t).map_err(|e| CliError::config(e.to_string()))?;
            if spec.total() != m {
                return Err(CliError::config(format!(
                    "targets sum to {}, dataset has {m} examples",
                    spec.total()
                )));
            }
            Ok(spec)
        }
        (None, None) => match args.k.or(fallback_k) {
            Some(k) => FoldSpec::equal(k, m),
            None => return Err(CliError::config("one of --k, --proportions or --targets is required")),
        },
    };
    spec.map_err(|e| CliError::config(e.to_string()))
}

fn write_out(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|e| CliError::input(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn report_fields(r: &SplitReport) -> Map<String, Value> {
    match serde_json::to_value(r).expect("report serializes") {
        Value::Object(map) => map,
        _ => unreachable!("reports serialize as objects"),
    }
}

/// Runs `f` on a rayon pool of the requested size.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("cannot start {n} threads: {e}")))?;
        return Ok(pool.install(f));
    }
    if threads == Some(0) {
        return Err(CliError::config("--threads must be positive"));
    }
    Ok(f())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let (d, _) = load(&args.input)?;
    let s = dataset_stats(&d);
    let p = pair_stats(&d);
    if !s.absent_labels.is_empty() {
        let names: Vec<&str> = s.absent_labels.iter().map(|&l| d.label_names()[l].as_str()).collect();
        eprintln!(
            "warning: labels without examples (excluded from avg_ir and scumble): {}",
            names.join(", ")
        );
    }
    let out = json!({
        "m": s.m,
        "q": s.q,
        "card": s.card,
        "dens": s.dens,
        "div": s.div,
        "pdiv": s.pdiv,
        "tcs_raw": s.tcs_raw,
        "tcs_log": s.tcs_log,
        "avg_ir": s.avg_ir,
        "scumble": s.scumble,
        "max_labels": s.max_labels,
        "max_frequency": s.max_frequency,
        "card2": p.card2,
        "dens2": p.dens2,
        "div2": p.div2,
        "pdiv2": p.pdiv2,
        "max_frequency2": p.max_frequency2,
    });
    write_out(args.out_report.as_deref(), &to_json_line(&out))
}

/// Everything a method produced besides the assignment itself.
struct Outcome {
    assignment: Assignment,
    generations: Option<usize>,
    params: Option<EaParams>,
    front: Option<ParetoFront>,
    knee: Option<ObjectivePair>,
    constraint_unmet: Option<usize>,
}

fn validate_engine(engine: &EngineArgs, methods: &[Method]) -> Result<()> {
    let any_evo = methods.iter().any(|m| m.is_evolutionary());
    if engine.runs.is_some() && !any_evo {
        return Err(CliError::config("--runs only applies to ea-ld, ea-lpd and moea"));
    }
    if engine.constrained && !any_evo {
        return Err(CliError::config("--constrained only applies to ea-ld, ea-lpd and moea"));
    }
    if engine.runs == Some(0) {
        return Err(CliError::config("--runs must be at least 1"));
    }
    Ok(())
}

fn ea_params(method: Method, engine: &EngineArgs) -> EaParams {
    EaParams {
        fitness: if method == Method::EaLpd {
            Metric::Lpd
        } else {
            Metric::LdPrime
        },
        constrained: engine.constrained,
        seed: engine.seed,
        runs: engine.runs.unwrap_or(5),
        execution: Execution::Parallel,
        ..EaParams::default()
    }
}

fn run_method(
    method: Method,
    d: &MultiLabelDataset,
    spec: &FoldSpec,
    engine: &EngineArgs,
) -> std::result::Result<Outcome, SplitError> {
    let plain = |assignment| Outcome {
        assignment,
        generations: None,
        params: None,
        front: None,
        knee: None,
        constraint_unmet: None,
    };
    let seed = engine.seed;
    Ok(match method {
        Method::Random => plain(random_split(d.num_examples(), spec, seed)),
        Method::Is => plain(iterative_stratification(d, spec, seed)),
        Method::Sois => plain(second_order_iterative_stratification(d, spec, seed)),
        Method::EaLd | Method::EaLpd => {
            let params = ea_params(method, engine);
            let r = run_best_of(d, spec, &params)?;
            Outcome {
                assignment: r.best_assignment,
                generations: Some(r.generations),
                params: Some(params),
                front: None,
                knee: None,
                constraint_unmet: Some(r.constraint_unmet),
            }
        }
        Method::Moea => {
            let params = ea_params(method, engine);
            let r = nsga2_best_of(d, spec, &params)?;
            let knee = r.knee().clone();
            Outcome {
                assignment: knee.assignment,
                generations: Some(r.generations),
                params: Some(params),
                knee: Some(knee.objectives),
                front: Some(r.front),
                constraint_unmet: Some(r.constraint_unmet),
            }
        }
    })
}

fn oracle_metric(method: Method) -> Metric {
    match method {
        Method::EaLpd => Metric::Lpd,
        Method::EaLd | Method::Moea => Metric::LdPrime,
        _ => Metric::Ld,
    }
}

pub fn split(args: &SplitArgs) -> Result<()> {
    validate_engine(&args.engine, &[args.method])?;
    if args.out_front.is_some() && args.method != Method::Moea {
        return Err(CliError::config("--out-front only applies to moea"));
    }
    let (d, format) = load(&args.input)?;
    let spec = fold_spec(&args.folds, d.num_examples(), None)?;
    if spec.k() < 2 {
        return Err(CliError::config("at least two folds are required"));
    }

    let started = Instant::now();
    let (outcome, oracle) = with_threads(args.engine.threads, || {
        let outcome = run_method(args.method, &d, &spec, &args.engine);
        let oracle = args
            .oracle
            .then(|| exhaustive_optimal(&d, &spec, oracle_metric(args.method), Execution::Parallel));
        (outcome, oracle)
    })?;
    let outcome = outcome.map_err(|e| CliError::config(e.to_string()))?;
    let runtime_ms = started.elapsed().as_millis() as u64;

    let ev = SplitEvaluator::new(&d);
    let report = ev
        .report(&outcome.assignment, &spec)
        .map_err(|e| CliError::new(CliError::ASSIGNMENT, e.to_string()))?;

    let mut out = report_fields(&report);
    out.insert("method".into(), json!(args.method.name()));
    out.insert("seed".into(), json!(args.engine.seed));
    out.insert("k".into(), json!(spec.k()));
    out.insert("proportions".into(), json!(spec.proportions()));
    out.insert("targets".into(), json!(spec.targets()));
    out.insert("constrained".into(), json!(args.engine.constrained));
    out.insert("runs".into(), json!(outcome.params.as_ref().map(|p| p.runs)));
    out.insert("generations".into(), json!(outcome.generations));
    out.insert(
        "runtime_ms".into(),
        if args.timing { json!(runtime_ms) } else { Value::Null },
    );
    if let Some(knee) = outcome.knee {
        out.insert("knee".into(), json!(knee));
        out.insert("front_size".into(), json!(outcome.front.as_ref().map(ParetoFront::len)));
    }
    if let Some(unmet) = outcome.constraint_unmet {
        out.insert("constraint_repair_exhausted".into(), json!(unmet));
    }
    if let Some(oracle) = oracle {
        let oracle = oracle.map_err(|e| match e {
            SplitError::TooLarge(_) => CliError::new(CliError::ORACLE, format!("--oracle: {e} (limit {ORACLE_LIMIT})")),
            other => CliError::config(other.to_string()),
        })?;
        out.insert(
            "oracle".into(),
            json!({
                "metric": oracle.metric,
                "optimum_value": oracle.optimum_value,
                "optimizers": oracle.optimizers.len(),
                "enumerated": oracle.enumerated,
            }),
        );
    }
    out.insert(
        "config".into(),
        json!({
            "input": args.input.input.display().to_string(),
            "format": format_name(format),
            "method": args.method.name(),
            "ea": outcome.params,
        }),
    );

    if let Some(path) = &args.out_assignment {
        let mut buf = Vec::new();
        outcome.assignment.write_csv(&mut buf).expect("in-memory write");
        std::fs::write(path, buf).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    }
    if let (Some(path), Some(front)) = (&args.out_front, &outcome.front) {
        write_out(Some(path), &to_json_line(&front.to_json_pairs()))?;
    }
    write_out(args.out_report.as_deref(), &to_json_line(&Value::Object(out)))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let (d, _) = load(&args.input)?;
    let path = &args.assignment;
    let file = File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    let a = Assignment::read_csv(BufReader::new(file))
        .map_err(|e| CliError::new(CliError::ASSIGNMENT, format!("{}: {e}", path.display())))?;
    let inferred_k = a.as_slice().iter().max().map(|&f| f + 1);
    let spec = fold_spec(&args.folds, d.num_examples(), inferred_k)?;
    let report = SplitEvaluator::new(&d)
        .report(&a, &spec)
        .map_err(|e| CliError::new(CliError::ASSIGNMENT, e.to_string()))?;
    write_out(
        args.out_report.as_deref(),
        &to_json_line(&Value::Object(report_fields(&report))),
    )
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    if args.methods.len() < 2 {
        return Err(CliError::config("compare needs at least two methods"));
    }
    validate_engine(&args.engine, &args.methods)?;
    let (d, _) = load(&args.input)?;
    let spec = fold_spec(&args.folds, d.num_examples(), None)?;
    if spec.k() < 2 {
        return Err(CliError::config("at least two folds are required"));
    }
    let ev = SplitEvaluator::new(&d);

    let rows: Vec<table::Row> = with_threads(args.engine.threads, || {
        args.methods
            .iter()
            .map(|&method| {
                let report = run_method(method, &d, &spec, &args.engine)
                    .and_then(|o| ev.report(&o.assignment, &spec))
                    .map_err(|e| e.to_string());
                table::Row {
                    method: method.name(),
                    report,
                }
            })
            .collect()
    })?;

    print!("{}", table::render(&rows));
    let json = table::to_json(&rows, &spec, args.engine.seed);
    if let Some(path) = &args.out_report {
        write_out(Some(path), &to_json_line(&json))?;
    }
    if rows.iter().all(|r| r.report.is_err()) {
        return Err(CliError::config("every method failed"));
    }
    Ok(())
}
