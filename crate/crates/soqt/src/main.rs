//! Command-line front end: every pipeline stage as a subcommand with
//! JSON/CSV output for scripting and figure reproduction.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use soqt::evolve::propagator_analytic;
use soqt::experiment::{
    delta_error_curve, sweep_bloch_grid, EvolutionMethod, NoiseKind, NoiseSpec, SweepAggregate,
    TomographyConfig, DEFAULT_J12_HZ,
};
use soqt::model::XyzParams;
use soqt::optimize::{
    disordered_optimum_params, failure_check, maximize_delta, pure_optimum_params, DisorderedModel,
    PureOptimumSpec,
};
use soqt::pulsesim::{
    compile_unitary, exact_decomposition_sequence, gate_fidelity, trotter_propagator,
    trotter_sequence,
};
use soqt::transfer::{
    abs_delta_analytic, reconstruct, transfer_matrix, AssistantState, JointProbabilities,
    TransferError,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_ARG: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_IO: u8 = 4;

enum CliError {
    Arg(String),
    Singular(f64),
    Io(String),
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::SingularTransfer { abs_delta } => CliError::Singular(abs_delta),
        }
    }
}

impl From<soqt::experiment::ExperimentError> for CliError {
    fn from(e: soqt::experiment::ExperimentError) -> Self {
        match e {
            soqt::experiment::ExperimentError::Transfer(t) => t.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "soqt",
    about = "Qubit state determination from a single factorized observable via a Heisenberg-coupled assistant",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamsArg {
    /// Path to the Hamiltonian JSON {"b1":..,"b2":..,"jx":..,"jy":..,"jz":..}
    #[arg(long)]
    params: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form eigenvalues and eigenvectors of the coupling Hamiltonian
    Spectrum {
        #[command(flatten)]
        params: ParamsArg,
    },
    /// |Delta| from the closed form plus the brute-force cross-check
    Delta {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Globally maximize |Delta| at fixed assistant polarization
    Optimize {
        #[arg(long)]
        epsilon: f64,
        /// Fix the evolution time instead of searching over it
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
    },
    /// The analytic optimal Hamiltonians (xyx | xxz | xz+ | xz- | pure)
    Optimum {
        #[arg(long)]
        model: String,
    },
    /// Evaluate the documented Delta = 0 failure predicates
    Failure {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Short-period-expansion gate fidelity against the exact propagator
    Trotter {
        /// Optimal-model name (xyx | xxz | xz+ | xz-)
        #[arg(long, default_value = "xz+")]
        model: String,
        #[arg(long)]
        segments: u32,
    },
    /// Emit a pulse sequence (trotter:<m> | exact) and its fidelity
    Pulse {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        method: String,
        /// Scalar coupling of the spin pair in Hz
        #[arg(long, default_value_t = DEFAULT_J12_HZ)]
        j12: f64,
    },
    /// Invert a probability record back to a Bloch vector
    Reconstruct {
        /// Path to {"p11":..,"p12":..,"p21":..,"p22":..}
        #[arg(long)]
        probs: PathBuf,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Bloch-sphere grid sweep to CSV
    Sweep {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        epsilon: f64,
        /// analytic | trotter:<m> | exact
        #[arg(long, default_value = "analytic")]
        method: String,
        /// none | gaussian:<sigma> | shots:<n>
        #[arg(long, default_value = "none")]
        noise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated Bloch radii
        #[arg(long, default_value = "1,0.5", value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// |Delta|, error amplification and concurrence versus tau, to CSV
    Curve {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        tau_max: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximal |Delta| versus assistant polarization, to CSV
    Deltamax {
        /// Number of epsilon grid intervals (steps + 1 rows)
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60_000)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_params(path: &Path) -> CliResult<XyzParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let p: XyzParams = serde_json::from_str(&text).map_err(|e| {
        CliError::Arg(format!(
            "invalid Hamiltonian JSON in {}: {e}",
            path.display()
        ))
    })?;
    if !p.is_finite() {
        return Err(CliError::Arg(
            "Hamiltonian parameters must be finite".into(),
        ));
    }
    Ok(p)
}

fn require_epsilon(epsilon: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(epsilon)
    } else {
        Err(CliError::Arg(format!(
            "epsilon must be in [0, 1], got {epsilon}"
        )))
    }
}

fn require_positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Arg(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Write via a temporary file and rename, so failures leave no partial file.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot rename to {}: {e}", path.display())))?;
    Ok(())
}

fn parse_method(s: &str) -> CliResult<EvolutionMethod> {
    if s == "analytic" {
        return Ok(EvolutionMethod::Analytic);
    }
    if s == "exact" {
        return Ok(EvolutionMethod::ExactDecomposition);
    }
    if let Some(m) = s.strip_prefix("trotter:") {
        let m: u32 = m
            .parse()
            .map_err(|_| CliError::Arg(format!("invalid segment count in method '{s}'")))?;
        if m == 0 {
            return Err(CliError::Arg("trotter segment count must be >= 1".into()));
        }
        return Ok(EvolutionMethod::Trotter(m));
    }
    Err(CliError::Arg(format!(
        "unknown method '{s}' (expected analytic | trotter:<m> | exact)"
    )))
}

fn parse_noise(s: &str, seed: u64) -> CliResult<NoiseSpec> {
    if s == "none" {
        return Ok(NoiseSpec {
            kind: NoiseKind::None,
            seed,
        });
    }
    if let Some(v) = s.strip_prefix("gaussian:") {
        let sigma: f64 = v
            .parse()
            .map_err(|_| CliError::Arg(format!("invalid sigma in noise '{s}'")))?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(CliError::Arg("gaussian sigma must be nonnegative".into()));
        }
        return Ok(NoiseSpec {
            kind: NoiseKind::Gaussian(sigma),
            seed,
        });
    }
    if let Some(v) = s.strip_prefix("shots:") {
        let n: u64 = v
            .parse()
            .map_err(|_| CliError::Arg(format!("invalid shot count in noise '{s}'")))?;
        if n == 0 {
            return Err(CliError::Arg("shot count must be >= 1".into()));
        }
        return Ok(NoiseSpec {
            kind: NoiseKind::Shots(n),
            seed,
        });
    }
    Err(CliError::Arg(format!(
        "unknown noise '{s}' (expected none | gaussian:<sigma> | shots:<n>)"
    )))
}

fn parse_disordered(s: &str) -> CliResult<DisorderedModel> {
    match s {
        "xyx" => Ok(DisorderedModel::Xyx),
        "xxz" => Ok(DisorderedModel::Xxz),
        "xz+" => Ok(DisorderedModel::XzPlus),
        "xz-" => Ok(DisorderedModel::XzMinus),
        _ => Err(CliError::Arg(format!(
            "unknown model '{s}' (expected xyx | xxz | xz+ | xz-)"
        ))),
    }
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SpectrumOut {
    lambdas: [f64; 4],
    vectors: [[f64; 4]; 4],
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DeltaOut {
    abs_delta_analytic: f64,
    abs_delta_brute_force: f64,
    discrepancy: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OptimumOut {
    model: String,
    params: XyzParams,
    tau: f64,
    epsilon: f64,
    abs_delta: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FidelityOut {
    raw_re: f64,
    raw_im: f64,
    magnitude: f64,
    squared: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReconstructOut {
    s: [f64; 3],
    non_physical: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SweepSummary {
    out: String,
    records: usize,
    aggregates: Vec<SweepAggregate>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum { params } => {
            let p = read_params(&params.params)?;
            let s = soqt::model::spectrum(&p);
            print_json(&SpectrumOut {
                lambdas: s.lambdas,
                vectors: s.vectors,
            })
        }
        Command::Delta {
            params,
            tau,
            epsilon,
        } => {
            let p = read_params(&params.params)?;
            let tau = require_positive("tau", tau)?;
            let epsilon = require_epsilon(epsilon)?;
            let analytic = abs_delta_analytic(&p, tau, epsilon);
            let u = propagator_analytic(&p, tau);
            let brute = transfer_matrix(&AssistantState::new(epsilon), &u).abs_delta;
            print_json(&DeltaOut {
                abs_delta_analytic: analytic,
                abs_delta_brute_force: brute,
                discrepancy: (analytic - brute).abs(),
            })
        }
        Command::Optimize {
            epsilon,
            tau,
            seed,
            budget,
        } => {
            let epsilon = require_epsilon(epsilon)?;
            if let Some(t) = tau {
                require_positive("tau", t)?;
            }
            if budget < 1000 {
                return Err(CliError::Arg("budget must be at least 1000".into()));
            }
            let result = maximize_delta(epsilon, tau, seed, budget);
            print_json(&result)
        }
        Command::Optimum { model } => {
            let out = if model == "pure" {
                let spec = PureOptimumSpec::paper_default();
                let p = pure_optimum_params(&spec, 1.0);
                OptimumOut {
                    model,
                    params: p,
                    tau: 1.0,
                    epsilon: 1.0,
                    abs_delta: abs_delta_analytic(&p, 1.0, 1.0),
                }
            } else {
                let (p, tau) = disordered_optimum_params(parse_disordered(&model)?);
                OptimumOut {
                    model,
                    params: p,
                    tau,
                    epsilon: 0.0,
                    abs_delta: abs_delta_analytic(&p, tau, 0.0),
                }
            };
            print_json(&out)
        }
        Command::Failure {
            params,
            tau,
            epsilon,
        } => {
            let p = read_params(&params.params)?;
            let tau = require_positive("tau", tau)?;
            let epsilon = require_epsilon(epsilon)?;
            print_json(&failure_check(&p, tau, epsilon))
        }
        Command::Trotter { model, segments } => {
            if segments == 0 {
                return Err(CliError::Arg("segment count must be >= 1".into()));
            }
            let (p, tau) = disordered_optimum_params(parse_disordered(&model)?);
            let exact = propagator_analytic(&p, tau).u;
            let approx = trotter_propagator(&p, tau, segments);
            let f = gate_fidelity(&exact, &approx).map_err(|e| CliError::Arg(e.to_string()))?;
            print_json(&FidelityOut {
                raw_re: f.raw.re,
                raw_im: f.raw.im,
                magnitude: f.magnitude,
                squared: f.squared(),
            })
        }
        Command::Pulse {
            params,
            tau,
            method,
            j12,
        } => {
            let p = read_params(&params.params)?;
            let tau = require_positive("tau", tau)?;
            let j12 = require_positive("j12", j12)?;
            let seq = match parse_method(&method)? {
                EvolutionMethod::Trotter(m) => {
                    trotter_sequence(&p, tau, m, j12).map_err(|e| CliError::Arg(e.to_string()))?
                }
                EvolutionMethod::ExactDecomposition => exact_decomposition_sequence(&p, tau, j12),
                EvolutionMethod::Analytic => {
                    return Err(CliError::Arg(
                        "pulse method must be trotter:<m> or exact".into(),
                    ))
                }
            };
            print!("{}", seq.dump());
            let compiled = compile_unitary(&seq).map_err(|e| CliError::Arg(e.to_string()))?;
            let f = gate_fidelity(&propagator_analytic(&p, tau).u, &compiled)
                .map_err(|e| CliError::Arg(e.to_string()))?;
            println!(
                "# fidelity vs analytic: magnitude={} squared={}",
                f.magnitude,
                f.squared()
            );
            Ok(())
        }
        Command::Reconstruct {
            probs,
            params,
            tau,
            epsilon,
        } => {
            let p = read_params(&params.params)?;
            let tau = require_positive("tau", tau)?;
            let epsilon = require_epsilon(epsilon)?;
            let text = std::fs::read_to_string(&probs)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", probs.display())))?;
            let record: JointProbabilities = serde_json::from_str(&text)
                .map_err(|e| CliError::Arg(format!("invalid probability JSON: {e}")))?;
            let u = propagator_analytic(&p, tau);
            let tm = transfer_matrix(&AssistantState::new(epsilon), &u);
            let rec = reconstruct(&record, &tm)?;
            print_json(&ReconstructOut {
                s: rec.s,
                non_physical: rec.non_physical,
            })
        }
        Command::Sweep {
            params,
            tau,
            epsilon,
            method,
            noise,
            seed,
            r,
            out,
        } => {
            let p = read_params(&params.params)?;
            let tau = require_positive("tau", tau)?;
            let epsilon = require_epsilon(epsilon)?;
            if r.is_empty() {
                return Err(CliError::Arg("at least one radius is required".into()));
            }
            for &rv in &r {
                if !(0.0..=1.0).contains(&rv) {
                    return Err(CliError::Arg(format!("radius must be in [0, 1], got {rv}")));
                }
            }
            let config = TomographyConfig {
                params: p,
                tau,
                epsilon,
                method: parse_method(&method)?,
                noise: parse_noise(&noise, seed)?,
            };
            let result = sweep_bloch_grid(&config, &r)?;
            let mut csv = String::from(
                "r,theta,phi,sx_in,sy_in,sz_in,sx_out,sy_out,sz_out,fidelity,distance\n",
            );
            for rec in &result.records {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    rec.r,
                    rec.theta,
                    rec.phi,
                    rec.s_in[0],
                    rec.s_in[1],
                    rec.s_in[2],
                    rec.s_out[0],
                    rec.s_out[1],
                    rec.s_out[2],
                    rec.fidelity,
                    rec.distance
                )
                .expect("string write");
            }
            write_atomic(&out, &csv)?;
            print_json(&SweepSummary {
                out: out.display().to_string(),
                records: result.records.len(),
                aggregates: result.aggregates,
            })
        }
        Command::Curve {
            params,
            epsilon,
            tau_max,
            steps,
            out,
        } => {
            let p = read_params(&params.params)?;
            let epsilon = require_epsilon(epsilon)?;
            let tau_max = require_positive("tau-max", tau_max)?;
            if steps == 0 {
                return Err(CliError::Arg("steps must be >= 1".into()));
            }
            let grid: Vec<f64> = (1..=steps)
                .map(|i| i as f64 * tau_max / steps as f64)
                .collect();
            let curve = delta_error_curve(&p, epsilon, &grid);
            let mut csv = String::from(
                "tau,abs_delta,error_coeff,product,c_state1,c_state2,c_state3,c_state4\n",
            );
            for pt in &curve {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    pt.tau,
                    pt.abs_delta,
                    fmt_maybe_inf(pt.error_coeff),
                    fmt_maybe_inf(pt.product),
                    pt.concurrence[0],
                    pt.concurrence[1],
                    pt.concurrence[2],
                    pt.concurrence[3]
                )
                .expect("string write");
            }
            write_atomic(&out, &csv)?;
            println!(
                "{{\"out\":{:?},\"rows\":{}}}",
                out.display().to_string(),
                curve.len()
            );
            Ok(())
        }
        Command::Deltamax {
            steps,
            seed,
            budget,
            out,
        } => {
            if steps == 0 {
                return Err(CliError::Arg("steps must be >= 1".into()));
            }
            if budget < 1000 {
                return Err(CliError::Arg("budget must be at least 1000".into()));
            }
            let mut csv = String::from("epsilon,abs_delta_max,converged,evaluations\n");
            for k in 0..=steps {
                let epsilon = k as f64 / steps as f64;
                let r = maximize_delta(epsilon, None, seed, budget);
                writeln!(
                    csv,
                    "{},{},{},{}",
                    epsilon, r.abs_delta, r.converged, r.evaluations
                )
                .expect("string write");
            }
            write_atomic(&out, &csv)?;
            println!(
                "{{\"out\":{:?},\"rows\":{}}}",
                out.display().to_string(),
                steps + 1
            );
            Ok(())
        }
    }
}

fn fmt_maybe_inf(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Arg(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ARG)
        }
        Err(CliError::Singular(abs_delta)) => {
            eprintln!("error: transfer matrix is singular (|Delta| = {abs_delta:.3e}); the measurement scheme fails at this configuration");
            ExitCode::from(EXIT_SINGULAR)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
