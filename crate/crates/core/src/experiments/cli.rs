//! Command-line front end: argument parsing, JSON ingestion and CSV/JSON
//! emission. Exit codes: 0 success, 1 failed `verify`, 2 invalid input.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::divergence::bregman_point;
use crate::error::Error;
use crate::finite_probability::{conditional_expectation_vector, SpaceInput};
use crate::generators::Generator;
use crate::geometry::{compare_divergence_distance, distance, geodesic, midpoint, Claim};
use crate::point::Point;
use crate::prediction::{d_conditional_expectation, d_mean, d_variance};
use crate::rng::stream_rng;

use super::instances::{random_partition, random_space, random_vector};
use super::verify::{verify, DEFAULT_CASES};
use super::{
    asset_experiment, lln_experiment, table_reproduction, variance_unbiasedness_experiment, AssetModel,
    ExperimentResult, Sampler,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "divgeo",
    version,
    about = "Bregman divergences, their derived metrics and d-predictors"
)]
struct Cli {
    /// Generator kind: quadratic, exp, neg_exp, xlogx, neglog or power:<p>.
    #[arg(long, global = true)]
    generator: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON payload: `{"x": [..], "y": [..]}` for pair commands, or
    /// `{"weights": [..], "values": [[..], ..], "partition": [[..], ..]}`.
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// First point, comma separated (alternative to --in).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Second point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Geodesic distance d(x, y).
    Distance(PairArgs),
    /// Equispaced samples of the geodesic from x to y.
    Geodesic {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Geodesic midpoint of x and y.
    Midpoint(PairArgs),
    /// Bregman divergence in both orders.
    Divergence(PairArgs),
    /// d-mean, arithmetic mean and d-variance of a random vector.
    Dmean,
    /// d-conditional and classical conditional expectation per outcome.
    Condexp,
    /// δ(y, x)² against ½d(x, y)² for a pair.
    Compare(PairArgs),
    /// Seeded property suite; all shipped generators unless --generator is set.
    Verify {
        #[arg(long, default_value_t = DEFAULT_CASES)]
        cases: usize,
    },
    /// Law of large numbers for the sample d-mean.
    Lln {
        /// gaussian:<mean>:<sd>, lognormal:<mu>:<sigma> or constant:<c>.
        #[arg(long)]
        sampler: Option<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [100, 1000, 10000])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Unbiasedness of the sample d-variance.
    Variance {
        #[arg(long)]
        sampler: Option<String>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Two-day asset prediction under the logarithmic metric.
    Asset {
        #[arg(long, default_value_t = 1.0)]
        s0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu2: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma1: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Closed-form conditional expectations against H(E[h(X) | G]).
    Table2,
}

/// A diagnostic naming the offending input.
#[derive(Debug)]
struct Failure {
    field: String,
    message: String,
}

impl Failure {
    fn new(field: &str, message: impl ToString) -> Self {
        Failure {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let field = match &e {
            Error::UnknownKind(_) | Error::InvalidPower(_) | Error::UnsupportedGenerator(_) => "generator",
            Error::OutOfDomain { field, .. }
            | Error::OutOfRange { field, .. }
            | Error::InvalidModel { field, .. }
            | Error::InvalidArgument { field, .. } => field,
            Error::DomainSamplerMismatch { .. } => "sampler",
            Error::InvalidWeights(_) => "weights",
            Error::InvalidPartition(_) | Error::RefinementViolation => "partition",
            Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } | Error::SpaceMismatch { .. } => "values",
            _ => "input",
        };
        Failure::new(field, e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Deserialize)]
struct PairInput {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Option<PathBuf>) -> CliResult<T> {
    let path = path
        .as_ref()
        .ok_or_else(|| Failure::new("in", "a JSON input file is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::new("in", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new("in", format!("{}: {e}", path.display())))
}

fn pair(cli_input: &Option<PathBuf>, args: &PairArgs) -> CliResult<(Point, Point)> {
    match (&args.x, &args.y) {
        (Some(x), Some(y)) => Ok((Point::new(x.clone()), Point::new(y.clone()))),
        (None, None) => {
            let p: PairInput = read_json(cli_input)?;
            Ok((Point::new(p.x), Point::new(p.y)))
        }
        (None, Some(_)) => Err(Failure::new("x", "missing (give both --x and --y, or --in)")),
        (Some(_), None) => Err(Failure::new("y", "missing (give both --x and --y, or --in)")),
    }
}

fn generator(cli: &Cli) -> CliResult<Generator> {
    let name = cli
        .generator
        .as_deref()
        .ok_or_else(|| Failure::new("generator", "required for this command"))?;
    name.parse::<Generator>().map_err(Failure::from)
}

/// Explicit generator, or every shipped generator when none is given.
fn generators_or_all(cli: &Cli) -> CliResult<Vec<Generator>> {
    match cli.generator {
        Some(_) => Ok(vec![generator(cli)?]),
        None => Ok(Generator::shipped()),
    }
}

fn sampler_for(spec: &Option<String>, gen: &Generator) -> CliResult<Sampler> {
    let s = match spec {
        Some(s) => s.parse::<Sampler>()?,
        None => Sampler::default_for(gen),
    };
    s.check_compatible(gen)?;
    Ok(s)
}

fn point_columns(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("{prefix}{i}")).collect()
}

fn result_with(name: &str, columns: &[String], seed: u64, gen: String) -> ExperimentResult {
    let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    ExperimentResult::new(name, &refs, seed, gen)
}

fn claim_text(c: Option<Claim>) -> &'static str {
    match c {
        Some(Claim::AtMost) => "at_most",
        Some(Claim::AtLeast) => "at_least",
        Some(Claim::Equal) => "equal",
        None => "none",
    }
}

struct Outcome {
    result: ExperimentResult,
    exit: i32,
}

fn execute(cli: &Cli, err: &mut dyn Write) -> CliResult<Outcome> {
    let ok = |result| Ok(Outcome { result, exit: 0 });
    match &cli.command {
        Command::Distance(args) => {
            let gen = generator(cli)?;
            let (x, y) = pair(&cli.input, args)?;
            let d = distance(&gen, &x, &y)?;
            let mut res = ExperimentResult::new("distance", &["generator", "d"], cli.seed, gen.name());
            res.push(vec![gen.name().into(), d.into()]);
            ok(res)
        }
        Command::Geodesic { pair: args, samples } => {
            let gen = generator(cli)?;
            let (x, y) = pair(&cli.input, args)?;
            if *samples < 2 {
                return Err(Failure::new("samples", "need at least 2"));
            }
            let path = geodesic(&gen, &x, &y)?;
            let mut cols = vec!["t".to_string()];
            cols.extend(point_columns("x", x.dim()));
            let mut res = result_with("geodesic", &cols, cli.seed, gen.name());
            for i in 0..*samples {
                let t = i as f64 / (*samples - 1) as f64;
                let p = path.sample(t)?;
                let mut row = vec![t.into()];
                row.extend(p.iter().map(|&v| v.into()));
                res.push(row);
            }
            ok(res)
        }
        Command::Midpoint(args) => {
            let gen = generator(cli)?;
            let (x, y) = pair(&cli.input, args)?;
            let m = midpoint(&gen, &x, &y)?;
            let mut res = result_with("midpoint", &point_columns("m", m.dim()), cli.seed, gen.name());
            res.push(m.iter().map(|&v| v.into()).collect());
            ok(res)
        }
        Command::Divergence(args) => {
            let gen = generator(cli)?;
            let (x, y) = pair(&cli.input, args)?;
            let mut res = ExperimentResult::new(
                "divergence",
                &["generator", "divergence_xy", "divergence_yx"],
                cli.seed,
                gen.name(),
            );
            res.push(vec![
                gen.name().into(),
                bregman_point(&gen, &x, &y)?.into(),
                bregman_point(&gen, &y, &x)?.into(),
            ]);
            ok(res)
        }
        Command::Compare(args) => {
            let gen = generator(cli)?;
            let (x, y) = pair(&cli.input, args)?;
            let rec = compare_divergence_distance(&gen, &x, &y)?;
            let mut res = ExperimentResult::new(
                "compare",
                &[
                    "generator",
                    "divergence",
                    "half_distance_sq",
                    "phi3_sign",
                    "orientation",
                    "claim",
                    "satisfied",
                ],
                cli.seed,
                gen.name(),
            );
            res.push(vec![
                gen.name().into(),
                rec.divergence.into(),
                rec.half_distance_sq.into(),
                (rec.phi3_sign as f64).into(),
                (rec.orientation as f64).into(),
                claim_text(rec.claim).into(),
                rec.satisfied.into(),
            ]);
            ok(res)
        }
        Command::Dmean => {
            let gen = generator(cli)?;
            let input: SpaceInput = read_json(&cli.input)?;
            let (space, x, _) = input.build()?;
            let m = d_mean(&gen, &space, &x)?;
            let arith = conditional_expectation_vector(&space, &x, &crate::Partition::trivial(space.n_outcomes()))?;
            let var = d_variance(&gen, &space, &x)?;
            let mut res = ExperimentResult::new(
                "dmean",
                &["coordinate", "d_mean", "arithmetic_mean", "d_variance"],
                cli.seed,
                gen.name(),
            );
            for (i, (&a, &b)) in m.iter().zip(arith.values()[0].iter()).enumerate() {
                res.push(vec![i.into(), a.into(), b.into(), var.into()]);
            }
            ok(res)
        }
        Command::Condexp => {
            let gen = generator(cli)?;
            let input: SpaceInput = read_json(&cli.input)?;
            let (space, x, part) = input.build()?;
            let pred = d_conditional_expectation(&gen, &space, &x, &part)?;
            let classical = conditional_expectation_vector(&space, &x, &part)?;
            let mut res = ExperimentResult::new(
                "condexp",
                &["outcome", "block", "coordinate", "x", "d_condexp", "condexp"],
                cli.seed,
                gen.name(),
            );
            for w in 0..space.n_outcomes() {
                for i in 0..x.dim() {
                    res.push(vec![
                        w.into(),
                        part.block_of(w).into(),
                        i.into(),
                        x.values()[w][i].into(),
                        pred.values()[w][i].into(),
                        classical.values()[w][i].into(),
                    ]);
                }
            }
            ok(res)
        }
        Command::Verify { cases } => {
            if *cases == 0 {
                return Err(Failure::new("cases", "need at least one case"));
            }
            let gens = generators_or_all(cli)?;
            let mut res = ExperimentResult::new(
                "verify",
                &[
                    "generator",
                    "property",
                    "gated",
                    "cases",
                    "failures",
                    "max_residual",
                    "passed",
                ],
                cli.seed,
                if gens.len() == 1 { gens[0].name() } else { "all".into() },
            );
            let mut all_passed = true;
            for gen in &gens {
                let rep = verify(gen, cli.seed, *cases)?;
                all_passed &= rep.passed();
                for row in rep.to_result().rows {
                    let mut r = vec![gen.name().into()];
                    r.extend(row);
                    res.push(r);
                }
                let gated: Vec<_> = rep.outcomes.iter().filter(|o| o.gated).collect();
                let failed: Vec<_> = gated.iter().filter(|o| !o.passed()).map(|o| o.name).collect();
                let _ = writeln!(
                    err,
                    "verify {}: {}/{} properties passed{}",
                    gen.name(),
                    gated.len() - failed.len(),
                    gated.len(),
                    if failed.is_empty() {
                        String::new()
                    } else {
                        format!(" (failed: {})", failed.join(", "))
                    }
                );
            }
            Ok(Outcome {
                result: res,
                exit: if all_passed { 0 } else { 1 },
            })
        }
        Command::Lln { sampler, n, trials } => {
            let gen = generator(cli)?;
            let s = sampler_for(sampler, &gen)?;
            ok(lln_experiment(&gen, &s, n, *trials, cli.seed)?)
        }
        Command::Variance { sampler, n, trials } => {
            let gen = generator(cli)?;
            let s = sampler_for(sampler, &gen)?;
            ok(variance_unbiasedness_experiment(&gen, &s, *n, *trials, cli.seed)?)
        }
        Command::Asset {
            s0,
            mu1,
            mu2,
            sigma1,
            sigma2,
            rho,
            paths,
            bins,
        } => {
            let model = AssetModel {
                s0: *s0,
                mu1: *mu1,
                mu2: *mu2,
                sigma1: *sigma1,
                sigma2: *sigma2,
                rho: *rho,
            };
            let rep = asset_experiment(&model, *paths, *bins, cli.seed)?;
            let _ = writeln!(
                err,
                "asset: divergence error {:.6}, distance error {:.6}, phi''' < 0 ordering {}; pathwise E_d < E violations: {}",
                rep.divergence_error,
                rep.distance_error,
                if rep.prediction_ordering_satisfied { "holds" } else { "fails" },
                rep.pathwise_violations
            );
            ok(rep.result)
        }
        Command::Table2 => {
            let gens = generators_or_all(cli)?;
            let (space, x, part) = match &cli.input {
                Some(_) => read_json::<SpaceInput>(&cli.input)?.build()?,
                None => {
                    // Positive values fit every shipped domain.
                    let mut rng = stream_rng(cli.seed, 0);
                    let positive: Generator = "neglog".parse()?;
                    let space = random_space(8, &mut rng);
                    let x = random_vector(&positive, 8, 1, &mut rng);
                    let part = random_partition(8, 3, &mut rng);
                    (space, x, part)
                }
            };
            let mut res: Option<ExperimentResult> = None;
            for gen in &gens {
                let r = table_reproduction(gen, &space, &x, &part)?;
                match res.as_mut() {
                    None => res = Some(r),
                    Some(acc) => acc.rows.extend(r.rows),
                }
            }
            let mut res = res.expect("at least one generator");
            res.seed = cli.seed;
            if gens.len() > 1 {
                res.generator_kind = "all".into();
            }
            ok(res)
        }
    }
}

fn emit(cli: &Cli, result: &ExperimentResult, out: &mut dyn Write) -> CliResult<()> {
    let body = match cli.format {
        Format::Csv => result.to_csv_string(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&result.to_json()).expect("JSON values serialize");
            s.push('\n');
            s
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::new("out", format!("{}: {e}", path.display()))),
        None => out.write_all(body.as_bytes()).map_err(|e| Failure::new("out", e)),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Results go to `out` (or `--out`), diagnostics to `err`.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let outcome = execute(&cli, err).and_then(|o| emit(&cli, &o.result, out).map(|_| o.exit));
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}: {}", f.field, f.message);
            2
        }
    }
}

pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
