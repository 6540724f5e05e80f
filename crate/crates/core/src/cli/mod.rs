//! The `mhsic` command line: `estimate`, `test`, `power`, `discover` and
//! `replay`.
//!
//! Every command writes one artifact to stdout (JSON, or CSV for `power`)
//! that embeds a [`RunManifest`]. Without `--timings` the artifact depends
//! only on the arguments, so `replay --verify` can check it byte for byte.
//! Exit codes: 0 success, 1 failed verification, 2 usage error, 3 data
//! error, 4 degenerate sample.

mod args;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use args::{Cli, Command, DataArgs, DiscoverArgs, EstimateArgs, MethodArgs, PermutationArgs, PowerArgs, ReplayArgs, TestArgs};

use crate::causal::{discover, enumerate_dags, enumerate_full_dags, Dag, DiscoveryConfig};
use crate::data::{generate, load_csv, ColumnRoles, CsvSchema, GeneratorKind, GeneratorSpec};
use crate::error::Error;
use crate::estimators::n_hsic0;
use crate::kernels::KernelSpec;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sample::MultiSample;
use crate::testing::{
    permutation_test_with, power_curve, EstimatorKind, NystromSchedule, PermutedComponents, Statistic, TestConfig,
};

/// Recorded in every artifact; `argv` is enough to re-run the command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub params: Value,
    /// Only present with `--timings`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("replay verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e {
                Error::InvalidInput(_) | Error::Unsupported(_) => 2,
                Error::Parse { .. } | Error::Csv(_) | Error::Io(_) => 3,
                Error::DegenerateSample(_) => 4,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `argv` (program name first), runs the command and returns what
/// should go to stdout.
pub fn run<I, T>(argv: I) -> CliResult<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => return Ok(e.to_string()),
        Err(e) => return Err(usage(e.render().to_string())),
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect();
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, recorded),
        Command::Test(a) => cmd_test(&a, recorded),
        Command::Power(a) => cmd_power(&a, recorded),
        Command::Discover(a) => cmd_discover(&a, recorded),
        Command::Replay(a) => cmd_replay(&a),
    }
}

/// Runs and prints, returning the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(argv) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Sizes the global thread pool from `MHSIC_THREADS` (unset or 0 = one
/// thread per core).
pub fn configure_threads() {
    let Ok(raw) = std::env::var("MHSIC_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(k) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                log::warn!("could not configure {k} threads: {e}");
            }
        }
        Err(_) => log::warn!("ignoring MHSIC_THREADS={raw:?}: not a number"),
    }
}

fn manifest(command: &str, argv: Vec<String>, seed: u64, params: &impl Serialize, timings: Option<BTreeMap<String, f64>>) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        argv,
        seed,
        params: serde_json::to_value(params).expect("argument structs serialize"),
        timings_ms: timings,
    }
}

fn render_json(mut body: Value, manifest: &RunManifest) -> String {
    body["manifest"] = serde_json::to_value(manifest).expect("manifest serializes");
    let mut s = serde_json::to_string_pretty(&body).expect("values serialize");
    s.push('\n');
    s
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn timing(enabled: bool, label: &str, ms: f64) -> Option<BTreeMap<String, f64>> {
    enabled.then(|| BTreeMap::from([(label.to_string(), ms)]))
}

enum GeneratorChoice {
    Fixed(GeneratorKind),
    AnmFull(usize),
}

fn parse_generator(s: &str) -> CliResult<GeneratorChoice> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize, default: usize| -> CliResult<usize> {
        parts.get(i).map_or(Ok(default), |p| {
            p.parse::<usize>()
                .map_err(|_| usage(format!("bad number {p:?} in generator {s:?}")))
        })
    };
    let choice = match parts[0] {
        "indep" if parts.len() <= 3 => GeneratorChoice::Fixed(GeneratorKind::IndepGaussians { m: num(1, 2)?, d: num(2, 1)? }),
        "linear" if parts.len() <= 2 => {
            let noise_sd = parts.get(1).map_or(Ok(1.0), |p| {
                p.parse::<f64>().map_err(|_| usage(format!("bad noise level {p:?}")))
            })?;
            GeneratorChoice::Fixed(GeneratorKind::LinearDependent { noise_sd })
        }
        "anm" if parts.len() <= 2 => GeneratorChoice::AnmFull(num(1, 4)?),
        _ => {
            return Err(usage(format!(
                "unknown generator {s:?} (expected indep[:M[:d]], linear[:noise_sd] or anm[:M])"
            )))
        }
    };
    Ok(choice)
}

/// Resolves a generator string. `anm:M` picks one fully connected DAG on
/// `M` nodes and its structural functions from `seed`.
fn resolve_generator(s: &str, seed: u64) -> CliResult<(GeneratorKind, Option<Dag>)> {
    Ok(match parse_generator(s)? {
        GeneratorChoice::Fixed(kind) => (kind, None),
        GeneratorChoice::AnmFull(m) => {
            let dags = enumerate_full_dags(m)?;
            let pick = rng_from_seed(derive_seed(seed, "dag", 0)).random_range(0..dags.len());
            let dag = dags[pick].clone();
            (
                GeneratorKind::AnmDag {
                    dag: dag.clone(),
                    f_seed: derive_seed(seed, "anm", 0),
                },
                Some(dag),
            )
        }
    })
}

fn parse_columns(s: &str) -> CliResult<ColumnRoles> {
    s.split(',')
        .map(|tok| match tok.trim() {
            "-" => Ok(None),
            t => match t.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(Some(k - 1)),
                _ => Err(usage(format!("bad column role {t:?} (expected a component number >= 1 or '-')"))),
            },
        })
        .collect::<CliResult<Vec<_>>>()
        .map(ColumnRoles::Explicit)
}

fn parse_delimiter(s: &str) -> CliResult<u8> {
    match s {
        "tab" | "\\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(usage(format!("delimiter must be one ASCII character or 'tab', got {s:?}"))),
    }
}

/// Loads or generates the sample. Generated data uses a seed derived from
/// `seed`, so the test's own randomness stays independent of it.
fn load_data(d: &DataArgs, seed: u64) -> CliResult<(MultiSample, Option<Dag>)> {
    match (&d.input, &d.generate) {
        (Some(path), None) => {
            let schema = CsvSchema {
                column_roles: match &d.columns {
                    Some(c) => parse_columns(c)?,
                    None => ColumnRoles::OnePerColumn,
                },
                has_header: d.header,
                delimiter: parse_delimiter(&d.delimiter)?,
            };
            Ok((load_csv(path, &schema)?, None))
        }
        (None, Some(g)) => {
            let (kind, dag) = resolve_generator(g, seed)?;
            let sample = generate(&GeneratorSpec::new(kind, d.n, derive_seed(seed, "data", 0)))?;
            Ok((sample, dag))
        }
        _ => Err(usage("exactly one of --input and --generate is required")),
    }
}

fn parse_kernel(s: &str) -> CliResult<KernelSpec> {
    if s == "median" {
        return Ok(KernelSpec::default());
    }
    let gamma = s
        .strip_prefix("fixed:")
        .and_then(|g| g.parse::<f64>().ok())
        .ok_or_else(|| usage(format!("bad --gamma {s:?} (expected median or fixed:<gamma>)")))?;
    Ok(KernelSpec::gaussian_fixed(gamma)?)
}

fn parse_estimator(s: &str) -> CliResult<EstimatorKind> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

fn parse_schedule(s: &str) -> CliResult<NystromSchedule> {
    s.parse().map_err(|e: Error| usage(e.to_string()))
}

fn test_config(method: &MethodArgs, perm: &PermutationArgs) -> CliResult<TestConfig> {
    let config = TestConfig {
        num_permutations: perm.permutations,
        alpha: perm.alpha,
        estimator: parse_estimator(&method.estimator)?,
        nystrom: parse_schedule(&method.nystrom)?,
        seed: method.seed,
        freeze_plan: perm.freeze_plan,
        permuted: if perm.permute_first {
            PermutedComponents::FirstOnly
        } else {
            PermutedComponents::AllButFirst
        },
    };
    config.validate()?;
    Ok(config)
}

fn n_prime_field(stat: &Statistic) -> Value {
    if stat.kind.uses_landmarks() {
        json!(stat.n_prime)
    } else {
        Value::Null
    }
}

fn cmd_estimate(a: &EstimateArgs, argv: Vec<String>) -> CliResult<String> {
    let kind = parse_estimator(&a.method.estimator)?;
    let schedule = parse_schedule(&a.method.nystrom)?;
    let kernel = parse_kernel(&a.method.gamma)?;
    let (sample, _) = load_data(&a.data, a.method.seed)?;

    let start = Instant::now();
    let stat = Statistic::new(kind, &sample, &[kernel], schedule)?;
    let landmarks = stat.landmarks(sample.n(), derive_seed(a.method.seed, "plan", 0))?;
    let (squared, fallback) = if kind == EstimatorKind::NHsic0 {
        let b = n_hsic0(&sample, &stat.kernels, &landmarks)?;
        (b.value.squared, json!(b.singular_fallback()))
    } else {
        (stat.eval(&sample, &landmarks)?, Value::Null)
    };
    let ms = ms_since(start);

    let m = manifest("estimate", argv, a.method.seed, a, timing(a.method.timings, "estimate", ms));
    Ok(render_json(
        json!({
            "estimator": kind.name(),
            "n": sample.n(),
            "num_components": sample.num_components(),
            "n_prime": n_prime_field(&stat),
            "gammas": stat.kernels.iter().map(|k| k.gamma).collect::<Vec<_>>(),
            "statistic_squared": squared,
            "statistic": squared.max(0.0).sqrt(),
            "singular_fallback": fallback,
            "runtime_ms": a.method.timings.then_some(ms),
        }),
        &m,
    ))
}

fn cmd_test(a: &TestArgs, argv: Vec<String>) -> CliResult<String> {
    let config = test_config(&a.method, &a.perm)?;
    let kernel = parse_kernel(&a.method.gamma)?;
    let (sample, _) = load_data(&a.data, a.method.seed)?;

    let start = Instant::now();
    let stat = Statistic::new(config.estimator, &sample, &[kernel], config.nystrom)?;
    let result = permutation_test_with(&sample, &stat, &config)?;
    let ms = ms_since(start);

    let m = manifest("test", argv, a.method.seed, a, timing(a.method.timings, "test", ms));
    let mut body = json!({
        "estimator": config.estimator.name(),
        "n": sample.n(),
        "num_components": sample.num_components(),
        "n_prime": n_prime_field(&stat),
        "statistic_squared": result.statistic,
        "p_value": result.p_value,
        "reject": result.reject,
        "alpha": config.alpha,
        "permutations": config.num_permutations,
        "runtime_ms": a.method.timings.then_some(ms),
    });
    if a.emit_null {
        body["null_samples"] = json!(result.null_samples);
    }
    Ok(render_json(body, &m))
}

fn parse_list<T>(s: &str, what: &str, f: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(f)
        .collect::<CliResult<Vec<T>>>()?;
    if items.is_empty() {
        return Err(usage(format!("{what} must not be empty")));
    }
    Ok(items)
}

fn cmd_power(a: &PowerArgs, argv: Vec<String>) -> CliResult<String> {
    let grid = parse_list(&a.n_grid, "--n-grid", |t| {
        t.parse::<usize>().map_err(|_| usage(format!("bad sample size {t:?} in --n-grid")))
    })?;
    let estimators = parse_list(&a.estimators, "--estimators", parse_estimator)?;
    let schedule = parse_schedule(&a.nystrom)?;
    let kernel = parse_kernel(&a.gamma)?;
    let (kind, _) = resolve_generator(&a.generate, a.seed)?;
    let gen = |n: usize, seed: u64| generate(&GeneratorSpec::new(kind.clone(), n, seed));

    let mut rows = String::from("estimator,n,trials,rejections,power,mean_runtime_ms\n");
    let mut timings = BTreeMap::new();
    for est in estimators {
        let config = TestConfig {
            num_permutations: a.perm.permutations,
            alpha: a.perm.alpha,
            estimator: est,
            nystrom: schedule,
            seed: a.seed,
            freeze_plan: a.perm.freeze_plan,
            permuted: if a.perm.permute_first {
                PermutedComponents::FirstOnly
            } else {
                PermutedComponents::AllButFirst
            },
        };
        let start = Instant::now();
        let curve = power_curve(gen, &[kernel], &config, &grid, a.trials)?;
        timings.insert(est.name().to_string(), ms_since(start));
        for p in curve {
            let rt = if a.timings { format!("{:.4}", p.mean_runtime_ms) } else { String::new() };
            writeln!(rows, "{},{},{},{},{},{}", est.name(), p.n, p.trials, p.rejections, p.power, rt).expect("writing to a String");
        }
    }
    let m = manifest("power", argv, a.seed, a, a.timings.then_some(timings));
    let header = serde_json::to_string(&m).expect("manifest serializes");
    Ok(format!("# manifest: {header}\n{rows}"))
}

fn cmd_discover(a: &DiscoverArgs, argv: Vec<String>) -> CliResult<String> {
    let test = test_config(&a.method, &a.perm)?;
    let kernel = parse_kernel(&a.method.gamma)?;
    let (sample, true_dag) = load_data(&a.data, a.method.seed)?;
    let m = sample.num_components();
    let candidates = match a.dags.as_str() {
        "all" => enumerate_dags(m)?,
        "full" => enumerate_full_dags(m)?,
        other => return Err(usage(format!("bad --dags {other:?} (expected all or full)"))),
    };
    let config = DiscoveryConfig {
        test,
        kernel,
        ridge: a.ridge,
    };

    let start = Instant::now();
    let ranked = discover(&sample, &candidates, &config)?;
    let ms = ms_since(start);

    let true_rank = true_dag
        .as_ref()
        .and_then(|t| ranked.iter().position(|s| &s.dag == t).map(|r| r + 1));
    let ranking: Vec<Value> = ranked
        .iter()
        .enumerate()
        .map(|(r, s)| {
            json!({
                "rank": r + 1,
                "candidate": s.candidate + 1,
                "dag": s.dag.to_string(),
                "edges": s.dag.edges().iter().map(|&(p, c)| [p + 1, c + 1]).collect::<Vec<_>>(),
                "p_value": s.p_value,
                "residual_statistic": s.residual_statistic,
            })
        })
        .collect();
    let man = manifest("discover", argv, a.method.seed, a, timing(a.method.timings, "discover", ms));
    Ok(render_json(
        json!({
            "estimator": config.test.estimator.name(),
            "n": sample.n(),
            "num_nodes": m,
            "num_candidates": candidates.len(),
            "true_dag": true_dag.map(|d| d.to_string()),
            "true_dag_rank": true_rank,
            "ranking": ranking,
            "runtime_ms": a.method.timings.then_some(ms),
        }),
        &man,
    ))
}

/// Extracts the manifest from a JSON artifact or a `# manifest:` CSV line.
pub fn read_manifest(text: &str) -> CliResult<RunManifest> {
    let bad = |e: serde_json::Error| usage(format!("cannot read manifest: {e}"));
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# manifest: ")) {
        return serde_json::from_str(line).map_err(bad);
    }
    let value: Value = serde_json::from_str(text).map_err(bad)?;
    let inner = value
        .get("manifest")
        .cloned()
        .ok_or_else(|| usage("the file has no manifest"))?;
    serde_json::from_value(inner).map_err(bad)
}

fn cmd_replay(a: &ReplayArgs) -> CliResult<String> {
    let text = std::fs::read_to_string(&a.manifest).map_err(Error::from)?;
    let manifest = read_manifest(&text)?;
    if manifest.command == "replay" {
        return Err(usage("refusing to replay a replay"));
    }
    let mut argv = vec![manifest.tool.clone()];
    argv.extend(manifest.argv.iter().cloned());
    let out = run(argv)?;
    if let Some(path) = &a.verify {
        let expected = std::fs::read_to_string(path).map_err(Error::from)?;
        if expected != out {
            return Err(CliError::Verify(format!("output differs from {}", path.display())));
        }
    }
    Ok(out)
}
