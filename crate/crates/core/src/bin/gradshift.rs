//! `gradshift`: spectral analysis, shift-rule construction, derivative
//! evaluation, variance maps and self-verification from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 singular or numerical failure,
//! 4 verification failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use gradshift::io::{parse_angle, parse_angle_list, read_circuit, resolve_operator, to_json};
use gradshift::rules::{apply_chain, build_rule, RuleMethod, ShiftRule, WARN_CONDITION};
use gradshift::sampling::{
    estimate_derivative_unchecked, variance_grid, DerivativeEstimate, GridAxis, GridFamily, GridPreset,
};
use gradshift::spectral::{analyze, GapSet};
use gradshift::verify::{run_all, Mutation, VerifyOptions};
use gradshift::{Error, Result};

#[derive(Parser)]
#[command(name = "gradshift", version, about = "Parameter-shift rules for arbitrary generators")]
struct Cli {
    /// Master seed for every sampled quantity.
    #[arg(long, global = true, env = "GRADSHIFT_SEED", default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and unique spectral gaps of a generator.
    Analyze {
        /// Catalog name (pauli:XX, fsim:theta, cr:1,-0.5,1,0,0, ...), JSON file or inline JSON.
        #[arg(long)]
        generator: String,
    },
    /// Build a shift rule as JSON.
    Rule {
        /// Comma-separated gaps; π-literals allowed.
        #[arg(long, conflicts_with = "generator")]
        gaps: Option<String>,
        #[arg(long)]
        generator: Option<String>,
        #[arg(long, default_value = "symmetric")]
        method: String,
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        /// Evaluation point for point-dependent methods.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
    /// Differentiate a circuit at a point.
    Diff {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "symmetric", conflicts_with = "rule")]
        method: String,
        /// Use a rule JSON file instead of building one.
        #[arg(long)]
        rule: Option<PathBuf>,
        /// Override the generator gaps the rule is built for.
        #[arg(long)]
        gaps: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        /// Also report the exact and finite-difference derivatives.
        #[arg(long)]
        oracle: bool,
        /// Sample each rule term with this many shots.
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Constant-σ variance over a shift grid, as CSV plus a JSON summary.
    VarianceMap {
        #[arg(long, value_parser = ["fig2a", "fig2b", "fig3"])]
        preset: Option<String>,
        /// symmetric or triangulation.
        #[arg(long, default_value = "symmetric")]
        method: String,
        #[arg(long)]
        gaps: Option<String>,
        /// Reference shift of the triangulation family.
        #[arg(long, allow_hyphen_values = true)]
        shifts: Option<String>,
        /// `start:end:points` per axis, comma-separated, or a point count for presets.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Run the verification suite.
    Verify {
        /// Check id, name fragment or tag.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
}

enum Failure {
    Lib(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SingularSystem(_)
        | Error::SingularShift { .. }
        | Error::SingularShiftPair(..)
        | Error::SingularStencil(_)
        | Error::DegenerateStencil(..)
        | Error::ConvergenceFailure { .. }
        | Error::ShiftSelectionFailure { .. }
        | Error::EmptyGapSet
        | Error::Internal(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Verify(summary)) => {
            eprintln!("{summary}");
            ExitCode::from(4)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    emit(out, &text)
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Analyze { generator } => emit_json(out, &analyze(&resolve_operator(generator)?)?)?,
        Command::Rule { gaps, generator, method, shifts, x } => {
            let gaps = match (gaps, generator) {
                (Some(g), _) => GapSet::from_values(&parse_angle_list(g)?)?,
                (None, Some(g)) => gradshift::spectral::gaps_of(&resolve_operator(g)?)?,
                (None, None) => return Err(Error::InvalidArgument("pass --gaps or --generator".into()).into()),
            };
            let rule = make_rule(method, &gaps, shifts.as_deref(), x.as_deref().map(parse_angle).transpose()?)?;
            warn_conditioning(&rule);
            emit_json(out, &rule)?;
        }
        Command::Diff { circuit, x, method, rule, gaps, shifts, oracle, shots } => {
            let report = diff(
                circuit,
                parse_angle(x)?,
                method,
                rule.as_deref(),
                gaps.as_deref(),
                shifts.as_deref(),
                *oracle,
                *shots,
                cli.seed,
            )?;
            emit_json(out, &report)?;
        }
        Command::VarianceMap { preset, method, gaps, shifts, grid } => {
            variance_map(out, preset.as_deref(), method, gaps.as_deref(), shifts.as_deref(), grid.as_deref())?
        }
        Command::Verify { filter, mutate } => {
            let mutation = match mutate.as_deref() {
                None => None,
                Some("flip-closed-s2-sign") => Some(Mutation::FlipClosedS2Sign),
                Some(other) => return Err(Error::InvalidArgument(format!("unknown mutation {other:?}")).into()),
            };
            let report = run_all(filter.as_deref(), &VerifyOptions { seed: cli.seed, mutation });
            for c in &report.checks {
                eprintln!("check {:>2} {:<22} {} {}", c.id, c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
            }
            emit_json(out, &report)?;
            if report.checks.is_empty() {
                return Err(Error::InvalidArgument(format!("filter {filter:?} selects no checks")).into());
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Verify(format!("{failed} of {} checks failed", report.checks.len())));
            }
        }
    }
    Ok(())
}

fn make_rule(method: &str, gaps: &GapSet, shifts: Option<&str>, x: Option<f64>) -> Result<ShiftRule> {
    let method: RuleMethod = method.parse()?;
    let shifts = shifts.map(parse_angle_list).transpose()?;
    build_rule(method, gaps, shifts.as_deref(), x)
}

fn warn_conditioning(rule: &ShiftRule) {
    if rule.condition_number > WARN_CONDITION {
        eprintln!("warning: condition number {:.3e} exceeds {WARN_CONDITION:.0e}", rule.condition_number);
    }
}

#[derive(Serialize)]
struct OracleReport {
    exact: f64,
    finite_difference: f64,
    richardson: f64,
    abs_error_vs_exact: f64,
    abs_error_vs_finite_difference: f64,
    abs_error_vs_richardson: f64,
}

#[derive(Serialize)]
struct DiffReport {
    x: f64,
    rule: ShiftRule,
    value: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<DerivativeEstimate>,
}

const FD_STEP: f64 = 1e-5;
const RICHARDSON_STEP: f64 = 1e-3;

#[allow(clippy::too_many_arguments)]
fn diff(
    circuit_path: &Path,
    x: f64,
    method: &str,
    rule_path: Option<&Path>,
    gaps: Option<&str>,
    shifts: Option<&str>,
    oracle: bool,
    shots: Option<u64>,
    seed: u64,
) -> Result<DiffReport> {
    let circuit = read_circuit(circuit_path)?.prepare()?;
    let rule = match rule_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<ShiftRule>(&text)?
        }
        None => {
            let gaps = match gaps {
                Some(g) => GapSet::from_values(&parse_angle_list(g)?)?,
                None => GapSet::from_values(circuit.generator_gaps())?,
            };
            make_rule(method, &gaps, shifts, Some(x))?
        }
    };
    let rule = apply_chain(&rule.at_point(x)?, circuit.dphi_dx());
    warn_conditioning(&rule);
    let mut warnings = Vec::new();
    if let Err(e @ Error::GapMismatch { .. }) = circuit.check_gaps(&rule) {
        warnings.push(format!("{e}; the rule is not exact for this generator"));
    }
    if rule.is_ill_conditioned() {
        warnings.push(format!("condition number {:.3e} exceeds {WARN_CONDITION:.0e}", rule.condition_number));
    }
    let value = circuit.evaluate_rule_unchecked(x, &rule)?;
    let oracle = if oracle {
        let exact = circuit.exact_derivative(x)?;
        let finite_difference = circuit.fd_derivative(x, FD_STEP)?;
        let coarse = circuit.fd_derivative(x, RICHARDSON_STEP)?;
        let fine = circuit.fd_derivative(x, RICHARDSON_STEP / 2.0)?;
        let richardson = (4.0 * fine - coarse) / 3.0;
        Some(OracleReport {
            exact,
            finite_difference,
            richardson,
            abs_error_vs_exact: (value - exact).abs(),
            abs_error_vs_finite_difference: (value - finite_difference).abs(),
            abs_error_vs_richardson: (value - richardson).abs(),
        })
    } else {
        None
    };
    let estimate = match shots {
        Some(n) => Some(estimate_derivative_unchecked(&circuit, x, &rule, n, seed)?),
        None => None,
    };
    Ok(DiffReport { x, rule, value, warnings, oracle, estimate })
}

fn parse_axis(text: &str) -> Result<GridAxis> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, points] = parts[..] else {
        return Err(Error::Parse(format!("grid axis {text:?} is not start:end:points")));
    };
    let points = points.trim().parse::<usize>().map_err(|_| Error::Parse(format!("grid points {points:?}")))?;
    GridAxis::new(parse_angle(start)?, parse_angle(end)?, points)
}

fn variance_map(
    out: Option<&Path>,
    preset: Option<&str>,
    method: &str,
    gaps: Option<&str>,
    shifts: Option<&str>,
    grid_spec: Option<&str>,
) -> Result<()> {
    let grid = match preset {
        Some(name) => {
            let preset: GridPreset = name.parse()?;
            let points = match grid_spec {
                Some(g) => g
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("with --preset, --grid is a point count, got {g:?}")))?,
                None => 201,
            };
            preset.grid(points)?
        }
        None => {
            let gaps = parse_angle_list(gaps.ok_or_else(|| Error::InvalidArgument("pass --preset or --gaps".into()))?)?;
            let family = match (method.parse::<RuleMethod>()?, gaps.as_slice()) {
                (RuleMethod::SymmetricGeneral | RuleMethod::ClosedS1, [g]) => GridFamily::SymmetricS1 { gap: *g },
                (RuleMethod::SymmetricGeneral | RuleMethod::ClosedS2, [g1, g2]) => GridFamily::SymmetricS2 { gaps: [*g1, *g2] },
                (RuleMethod::TriangulationGeneral | RuleMethod::TriangulationS1, [g]) => {
                    let reference = shifts.map(parse_angle).transpose()?.unwrap_or(0.0);
                    GridFamily::TriangulationS1 { gap: *g, reference }
                }
                (m, g) => {
                    return Err(Error::InvalidArgument(format!(
                        "variance maps cover symmetric rules with 1 or 2 gaps and triangulation with 1 gap, not {m} with {} gaps",
                        g.len()
                    )))
                }
            };
            let spec = grid_spec
                .ok_or_else(|| Error::InvalidArgument("pass --grid start:end:points[,start:end:points]".into()))?;
            let mut axes = spec.split(',').map(parse_axis).collect::<Result<Vec<_>>>()?;
            if axes.len() == 1 && family.dimensions() == 2 {
                axes.push(axes[0]);
            }
            variance_grid(family, &axes)?
        }
    };
    let summary = to_json(&grid.summary())? + "\n";
    emit(out, &grid.to_csv())?;
    match out {
        Some(path) => {
            let sidecar = path.with_extension("json");
            std::fs::write(&sidecar, summary)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", sidecar.display())))?;
        }
        None => eprint!("{summary}"),
    }
    Ok(())
}
