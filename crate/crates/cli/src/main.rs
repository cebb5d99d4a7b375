use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lieblab::conjugate::{ConjugateDirection, ConjugateFn, SearchConfig};
use lieblab::lieb::{lieb_inverted, lieb_trace, map_power_fn, mean_norm_fn, mean_trace_fn, LiebSpec, PosLinMap};
use lieblab::matrix::PosDefMatrix;
use lieblab::means::{MeanDescriptor, OperatorMean};
use lieblab::scalar::ScalarFn;
use lieblab::verifier::{
    boundary_control, compression_counterexample, falsify_boundary, mean_root_map, missing_region_points,
    passage_check, run_points, run_suite, Executor, FalsifyConfig, Form, MatrixSampler,
    PassageReport, PointReport, RunHeader, RunSettings, SuiteReport, SuiteSpec, TheoremId,
};
use lieblab::Error;

const SUITE_DIR_VAR: &str = "LIEBLAB_SUITE_DIR";

#[derive(Parser)]
#[command(name = "lieblab", version, about = "Joint concavity and convexity checks for matrix trace functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a theorem suite, `passage`, or `falsify`.
    Verify(VerifyArgs),
    /// Tabulate the hat or check conjugate of a function as `t,value`.
    Conjugate(ConjugateArgs),
    /// Evaluate one functional from a JSON input.
    Eval(EvalArgs),
    /// Reproduce a closed-form counterexample.
    Counterexample(CounterexampleArgs),
    /// Exploratory sweep over a parameter region with no known answer.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct RunFlags {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Trials per grid point [default: 1000; 10000 for falsify].
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    dims: Vec<usize>,
    /// Relative violation tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Largest condition number of sampled matrices.
    #[arg(long, default_value_t = 100.0)]
    cond_cap: f64,
    /// Worker threads; 1 runs sequentially [default: all cores].
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct OutputFlags {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

impl RunFlags {
    fn settings(&self, default_trials: usize) -> RunSettings {
        RunSettings {
            trials: self.trials.unwrap_or(default_trials),
            rel_tol: self.tol,
            cond_cap: self.cond_cap,
            seed: self.seed,
        }
    }

    fn executor(&self) -> lieblab::Result<Executor> {
        Executor::with_jobs(self.jobs)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite id (thm2.1, thm3.1, cor3.2, cor4.2, cor4.5, thm5.2, thm5.3,
    /// thm5.4, thm5.6, range_i .. range_iv), `passage` or `falsify`.
    suite: String,
    /// Exponent p for `falsify`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    p: f64,
    /// Exponent q for `falsify`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    q: f64,
    /// Exponents s for `falsify`, all outside the concavity region.
    #[arg(long, value_delimiter = ',', default_value = "0.6", allow_negative_numbers = true)]
    s: Vec<f64>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct ConjugateArgs {
    /// Function descriptor as JSON, e.g. '{"kind":"power","params":{"s":2}}'.
    #[arg(long)]
    f: String,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    #[arg(long, default_value_t = 0.1)]
    from: f64,
    #[arg(long, default_value_t = 10.0)]
    to: f64,
    #[arg(long, default_value_t = 21)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Hat,
    Check,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON file with the input, or `-` for stdin.
    input: PathBuf,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Counterexample id; only `remark4.6`.
    which: String,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    s: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Region id; only `missing-region`.
    region: String,
    #[command(flatten)]
    run: RunFlags,
}

/// `eval` input. Maps default to the identity.
#[derive(Deserialize)]
struct EvalInput {
    f: ScalarFn,
    p: f64,
    #[serde(default)]
    q: f64,
    #[serde(default)]
    phi: Option<PosLinMap>,
    #[serde(default)]
    psi: Option<PosLinMap>,
    #[serde(default = "lieb_form")]
    form: Form,
    a: PosDefMatrix,
    #[serde(default)]
    b: Option<PosDefMatrix>,
}

fn lieb_form() -> Form {
    Form::Lieb
}

#[derive(Serialize)]
struct EvalOutput {
    value: f64,
}

#[derive(Debug)]
enum Failure {
    /// Bad flags, inputs or paths.
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(format!("malformed JSON: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type CliResult = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Conjugate(args) => conjugate(args),
        Command::Eval(args) => eval(args),
        Command::Counterexample(args) => counterexample(args),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Fails early, before a long run, when the report path cannot be written.
fn check_writable(out: &Option<PathBuf>) -> Result<(), Failure> {
    if let Some(path) = out {
        fs::OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn to_json(value: &impl Serialize) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn emit_report(report: &SuiteReport, output: &OutputFlags) -> Result<(), Failure> {
    let bytes = match output.format {
        Format::Json => to_json(report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SuiteReport::CSV_HEADER)?;
            for row in report.csv_rows() {
                w.write_record(&row)?;
            }
            w.into_inner().map_err(|e| Failure::Config(e.to_string()))?
        }
    };
    write_output(&output.out, &bytes)
}

fn summarize(report: &SuiteReport, verdict: &str) {
    eprintln!(
        "{}: {} points, {} violations, worst gap {:.3e}, {} ms: {}",
        report.suite,
        report.points.len(),
        report.total_violations(),
        report.worst_gap(),
        report.runtime_ms(),
        verdict
    );
}

fn load_suite(theorem: TheoremId, dims: &[usize]) -> Result<SuiteSpec, Failure> {
    let Some(dir) = std::env::var_os(SUITE_DIR_VAR) else {
        return Ok(SuiteSpec::default_grid(theorem, dims));
    };
    let dir = Path::new(&dir);
    let names = [
        format!("{theorem}.json"),
        format!("{}.json", theorem.as_str().replace('.', "_")),
    ];
    let Some(path) = names.iter().map(|n| dir.join(n)).find(|p| p.is_file()) else {
        return Ok(SuiteSpec::default_grid(theorem, dims));
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let spec: SuiteSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("malformed suite file {}: {e}", path.display())))?;
    if spec.theorem != theorem {
        return Err(Failure::Config(format!(
            "{} declares suite {}, expected {theorem}",
            path.display(),
            spec.theorem
        )));
    }
    Ok(spec)
}

fn verify(args: VerifyArgs) -> CliResult {
    match args.suite.as_str() {
        "falsify" => return falsify(args),
        "passage" => return passage(args),
        _ => {}
    }
    let theorem: TheoremId = args.suite.parse()?;
    let settings = args.run.settings(1000);
    let spec = load_suite(theorem, &args.run.dims)?;
    check_writable(&args.run.output.out)?;
    let report = run_suite(&spec, &settings, &args.run.executor()?)?;
    summarize(&report, if report.passed { "PASS" } else { "FAIL" });
    emit_report(&report, &args.run.output)?;
    Ok(report.passed)
}

fn falsify(args: VerifyArgs) -> CliResult {
    let settings = args.run.settings(10_000);
    settings.validate()?;
    let dim = match args.run.dims.as_slice() {
        // Falsification runs in one dimension; the suite default of 2,3 maps to 2.
        [d, ..] => *d,
        [] => return Err(Failure::Config("no dimension given".into())),
    };
    let cfg = FalsifyConfig {
        p: args.p,
        q: args.q,
        dim,
        trials: settings.trials,
        rel_tol: settings.rel_tol,
        cond_cap: settings.cond_cap,
        seed: settings.seed,
    };
    check_writable(&args.run.output.out)?;
    let exec = args.run.executor()?;
    let runs = falsify_boundary(&cfg, &args.s, &exec)?;
    let found = runs.iter().all(|r| r.found());
    let mut points: Vec<PointReport> = runs
        .into_iter()
        .map(|r| PointReport::new(r.params, r.report))
        .collect();
    let mut note = format!(
        "falsification: points 0..{} must show a concavity violation",
        points.len()
    );
    let mut control_ok = true;
    if let Ok(control) = boundary_control(&cfg, &exec) {
        control_ok = !control.found();
        note.push_str(&format!("; point {} is the s = 1/(p+q) control and must show none", points.len()));
        points.push(PointReport::new(control.params, control.report));
    }
    let mut report = SuiteReport::new("falsify".into(), cfg.seed, RunHeader::new(&settings, vec![dim]), points);
    report.passed = found && control_ok;
    report.note = Some(note);
    for (i, p) in report.points.iter().enumerate() {
        eprintln!(
            "falsify point {i}: s = {} ({} trials run, {} violations)",
            p.params.f.label(),
            p.trials,
            p.violations
        );
    }
    eprintln!("falsify: {}", if report.passed { "PASS" } else { "FAIL" });
    emit_report(&report, &args.run.output)?;
    Ok(report.passed)
}

#[derive(Serialize)]
struct PassageEntry {
    mean: MeanDescriptor,
    p: f64,
    q: f64,
    dim: usize,
    report: PassageReport,
}

#[derive(Serialize)]
struct PassageOutput {
    suite: &'static str,
    seed: u64,
    config: RunHeader,
    points: Vec<PassageEntry>,
    passed: bool,
}

fn passage(args: VerifyArgs) -> CliResult {
    let settings = args.run.settings(1000);
    settings.validate()?;
    check_writable(&args.run.output.out)?;
    let exec = args.run.executor()?;
    let mut points = Vec::new();
    let mut index = 0;
    for &dim in &args.run.dims {
        for (p, q) in [(0.5, 1.0), (-0.5, -0.75)] {
            let gamma: f64 = if p > 0.0 { f64::max(p, q) } else { f64::min(p, q) };
            for mean in [MeanDescriptor::Arithmetic, MeanDescriptor::Geometric, MeanDescriptor::Harmonic] {
                let sampler = MatrixSampler {
                    dim,
                    out_dim: dim,
                    arity: 2,
                    cond_cap: settings.cond_cap,
                    maps: vec![lieblab::lieb::MapKind::RandomKraus { rank: 2 }; 2],
                };
                let map = mean_root_map(OperatorMean::new(mean.clone())?, p, q, gamma);
                let seed = lieblab::verifier::point_seed(settings.seed, index);
                let report = passage_check(&map, &sampler, settings.trials, seed, &exec)?;
                points.push(PassageEntry {
                    mean,
                    p,
                    q,
                    dim,
                    report,
                });
                index += 1;
            }
        }
    }
    let passed = points.iter().all(|e| e.report.holds());
    eprintln!("passage: {} points: {}", points.len(), if passed { "PASS" } else { "FAIL" });
    let out = PassageOutput {
        suite: "passage",
        seed: settings.seed,
        config: RunHeader::new(&settings, args.run.dims.clone()),
        points,
        passed,
    };
    write_output(&args.run.output.out, &to_json(&out)?)?;
    Ok(passed)
}

fn conjugate(args: ConjugateArgs) -> CliResult {
    let f: ScalarFn = serde_json::from_str(&args.f)?;
    let direction = match args.direction {
        DirectionArg::Hat => ConjugateDirection::Hat,
        DirectionArg::Check => ConjugateDirection::Check,
    };
    if !(args.from > 0.0 && args.from <= args.to) || args.points < 1 {
        return Err(Failure::Config("need 0 < from <= to and at least one point".into()));
    }
    let conj = ConjugateFn::new(f, direction, SearchConfig::default())?;
    let step = if args.points > 1 {
        (args.to - args.from) / (args.points - 1) as f64
    } else {
        0.0
    };
    let rows = (0..args.points)
        .map(|i| {
            let t = args.from + step * i as f64;
            conj.eval(t).map(|v| (t, v))
        })
        .collect::<lieblab::Result<Vec<_>>>()?;
    let bytes = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                t: f64,
                value: f64,
            }
            let rows: Vec<Row> = rows.into_iter().map(|(t, value)| Row { t, value }).collect();
            to_json(&rows)?
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "value"])?;
            for (t, v) in rows {
                w.write_record([t.to_string(), v.to_string()])?;
            }
            w.into_inner().map_err(|e| Failure::Config(e.to_string()))?
        }
    };
    write_output(&args.out, &bytes)?;
    Ok(true)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        return Ok(io::read_to_string(io::stdin())?);
    }
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn eval(args: EvalArgs) -> CliResult {
    let input: EvalInput = serde_json::from_str(&read_input(&args.input)?)?;
    let n = input.a.dim();
    let phi = input.phi.unwrap_or_else(|| PosLinMap::identity(n));
    let value = if let Form::MapPower { r, norm } = &input.form {
        if input.p == 0.0 {
            return Err(Failure::Config("one-variable forms need p ≠ 0".into()));
        }
        map_power_fn(&input.f, &phi, input.p, *r, norm.as_ref(), &input.a)?
    } else {
        let b = input
            .b
            .ok_or_else(|| Failure::Config("two-variable forms need a matrix `b`".into()))?;
        let psi = input.psi.unwrap_or_else(|| PosLinMap::identity(b.dim()));
        let spec = LiebSpec::new(input.f, phi, psi, input.p, input.q)?;
        match &input.form {
            Form::Lieb => lieb_trace(&spec, &input.a, &b)?,
            Form::LiebInverted => lieb_inverted(&spec, &input.a, &b)?,
            Form::MeanNorm { mean, norm } => mean_norm_fn(&spec, &OperatorMean::new(mean.clone())?, norm, &input.a, &b)?,
            Form::MeanTrace { mean } => mean_trace_fn(&spec, &OperatorMean::new(mean.clone())?, &input.a, &b)?,
            Form::MapPower { .. } => unreachable!("handled above"),
        }
    };
    write_output(&None, &to_json(&EvalOutput { value })?)?;
    Ok(true)
}

fn counterexample(args: CounterexampleArgs) -> CliResult {
    if !matches!(args.which.as_str(), "remark4.6" | "remark4_6" | "remark-4.6") {
        return Err(Failure::Config(format!(
            "unknown counterexample {:?}; known: remark4.6",
            args.which
        )));
    }
    let r = compression_counterexample(args.t, args.p, args.s)?;
    println!(
        "lhs={} rhs={} {}",
        r.lhs,
        r.rhs,
        if r.convexity_violated { "VIOLATED" } else { "not violated" }
    );
    eprintln!("direct evaluation deviation {:.3e}", r.direct_deviation);
    Ok(r.direct_deviation <= lieblab::verifier::DIRECT_TOL)
}

const NO_CLAIM: &str = "NO-CLAIM: -1<p<0, 1<q<2, 1/(p+q) <= s < min{1/(p+1), 1/(q-1)} is an open region; \
violation counts below are exploratory and assert nothing";

fn sweep(args: SweepArgs) -> CliResult {
    if args.region != "missing-region" {
        return Err(Failure::Config(format!(
            "unknown sweep {:?}; known: missing-region",
            args.region
        )));
    }
    eprintln!("{NO_CLAIM}");
    let settings = args.run.settings(1000);
    check_writable(&args.run.output.out)?;
    let points = missing_region_points(&args.run.dims);
    let mut report = run_points("missing-region", &points, &settings, &args.run.executor()?)?;
    report.note = Some(NO_CLAIM.to_string());
    summarize(&report, "no claim");
    emit_report(&report, &args.run.output)?;
    Ok(true)
}
