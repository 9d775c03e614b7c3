use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fmo_gks::basis::OperatorBasis;
use fmo_gks::channel::{
    cptp_check, evolve_exact, evolve_rk4, simulate_conjugated, trajectory, trajectory_with, trotter_components,
    trotter_evolve, DensityMatrix, Splitting,
};
use fmo_gks::circuit::{matrix_distance, published, synthesize_two_level, verify_equiv, Circuit};
use fmo_gks::claims::{published_claims, SAMPLE_RATES};
use fmo_gks::decomposition::{decompose, IDENTITY_TOL};
use fmo_gks::linalg::{max_abs, spectral_norm, trace_distance, ComplexMatrix};
use fmo_gks::master_eq::LindbladModel;
use fmo_gks::model_file::ModelFile;
use fmo_gks::report::DecompositionReport;
use fmo_gks::trajectory::Trajectory;
use fmo_gks::Error;

const EXIT_PARSE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_USAGE: u8 = 4;

/// Decompose Markovian FMO dynamics into rank-one generators and verify the
/// decomposition by simulation.
#[derive(Parser)]
#[command(name = "fmo-gks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the GKS matrix, eigenpairs and canonical frames as JSON.
    Decompose {
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve the initial state and write a CSV trajectory.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Number of grid intervals; the grid has steps + 1 points.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// exact, rk4 or trotter.
        #[arg(long, default_value = "exact")]
        method: String,
        /// Product-formula steps used by the trotter method.
        #[arg(long, default_value_t = 256)]
        trotter_steps: usize,
        /// Use symmetric (Strang) splitting for the trotter method.
        #[arg(long)]
        strang: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print identity residuals, Trotter convergence and CPTP checks.
    Verify {
        model: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Trotter step count n; the error is also measured at 2n.
        #[arg(long, default_value_t = 64)]
        steps: usize,
    },
    /// Emit a circuit as QASM text and report its distance to the target.
    Synth {
        /// eq16, eq24, fig1-drawn, fig1-prose, fig2-drawn, fig2-prose,
        /// derived:<k> or identity.
        #[arg(long)]
        target: String,
        /// Model file for derived:<k>; defaults to the dissipative preset
        /// with rates 0.1..0.7.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Lower controlled gates to single-qubit gates and CNOTs.
        #[arg(long)]
        lower: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute every published value and print MATCH/MISMATCH per item.
    #[command(name = "paper-check")]
    Claims {
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Field { .. } | Error::InvalidArgument(_) => EXIT_PARSE,
            _ => EXIT_INVARIANT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> CmdResult {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn cmd_decompose(model: &Path, out: Option<&Path>) -> CmdResult {
    let file = ModelFile::load(model)?;
    let basis = OperatorBasis::fmo();
    let gks = file.gks(&basis)?;
    let process = file.model()?.process();
    let report = DecompositionReport::build(&gks, process)?;
    emit(out, &(report.to_json() + "\n"))?;
    eprintln!(
        "decomposed: {} generators, {} nonzero GKS entries, {} flagged",
        report.generators.len(),
        report.gks_nonzero.len(),
        report.flagged
    );
    if report.flagged > 0 {
        return Err(Failure {
            code: EXIT_INVARIANT,
            message: format!("{} generators exceed residual tolerance {IDENTITY_TOL:e}", report.flagged),
        });
    }
    Ok(())
}

fn time_grid(t: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("--t must be finite and >= 0, got {t}")).into());
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("--steps must be at least 1".into()).into());
    }
    if t == 0.0 {
        return Ok(vec![0.0]);
    }
    Ok((0..=steps).map(|i| t * i as f64 / steps as f64).collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model_path: &Path,
    t: f64,
    steps: usize,
    method: &str,
    trotter_steps: usize,
    strang: bool,
    out: Option<&Path>,
) -> CmdResult {
    if !matches!(method, "exact" | "rk4" | "trotter") {
        return Err(usage(format!("unknown method {method:?}; expected exact, rk4 or trotter")));
    }
    let file = ModelFile::load(model_path)?;
    let grid = time_grid(t, steps)?;
    let model = file.model()?;
    let rho0 = file.initial_state()?;
    let exact = trajectory(&model, &rho0, &grid)?;
    let traj = match method {
        "exact" => exact.clone(),
        "rk4" => rk4_trajectory(&model, &rho0, &grid)?,
        _ => {
            if trotter_steps == 0 {
                return Err(Error::InvalidArgument("--trotter-steps must be at least 1".into()).into());
            }
            let basis = OperatorBasis::fmo();
            let gks = file.gks(&basis)?;
            let gens = decompose(&gks)?;
            let comps = trotter_components(&gks, &gens);
            let splitting = if strang { Splitting::Strang } else { Splitting::Lie };
            trajectory_with(&grid, |tau| trotter_evolve(&comps, &rho0, tau, trotter_steps, splitting))?
        }
    };
    emit(out, &traj.to_csv())?;
    if method != "exact" {
        eprintln!("max row discrepancy vs exact: {:.3e}", traj.max_discrepancy(&exact));
    }
    eprintln!("wrote {} rows ({method})", traj.rows.len());
    Ok(())
}

/// RK4 from grid point to grid point, at least 1000 steps over the run.
fn rk4_trajectory(model: &LindbladModel, rho0: &DensityMatrix, grid: &[f64]) -> Result<Trajectory, Failure> {
    let intervals = grid.len().saturating_sub(1).max(1);
    let sub = 1000usize.div_ceil(intervals);
    let mut rho = rho0.clone();
    let mut rows = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    for &tau in grid {
        rho = evolve_rk4(model, &rho, tau - prev, sub)?;
        prev = tau;
        rows.push(fmo_gks::trajectory::TrajectoryRow::from_state(rho.matrix()));
    }
    Ok(Trajectory {
        times: grid.to_vec(),
        rows,
    })
}

fn cmd_verify(model_path: &Path, t: f64, steps: usize) -> CmdResult {
    time_grid(t, steps)?;
    let file = ModelFile::load(model_path)?;
    let basis = OperatorBasis::fmo();
    let model = file.model()?;
    let gks = file.gks(&basis)?;
    let gens = decompose(&gks)?;
    let rho0 = file.initial_state()?;
    let mut worst = 0.0_f64;

    println!("process: {:?}, generators: {}", model.process(), gens.len());
    println!("generator  lambda              phase_split  conjugation  targets      covariance");
    for (k, g) in gens.iter().enumerate() {
        let direct = fmo_gks::channel::generator_channel(g, &basis, t)?.apply(rho0.matrix());
        let rotated = simulate_conjugated(g, &basis, &rho0, t)?;
        let cov = trace_distance(rotated.matrix(), &direct);
        let r = g.residuals;
        worst = worst.max(r.phase_split).max(r.conjugation).max(r.targets).max(cov);
        println!(
            "{:>9}  {:<18.12} {:<12.3e} {:<12.3e} {:<12.3e} {:.3e}",
            k + 1,
            g.weight,
            r.phase_split,
            r.conjugation,
            r.targets,
            cov
        );
    }

    let round_trip = if file.gks_entries.is_empty() {
        let back = gks.to_lindblad()?.liouvillian();
        spectral_norm(&(back.matrix() - model.liouvillian().matrix()))
    } else {
        0.0
    };
    worst = worst.max(round_trip);
    println!("liouvillian round trip (operator norm): {round_trip:.3e}");
    let direct_l = gks.liouvillian();
    let gks_vs_model = if file.gks_entries.is_empty() {
        spectral_norm(&(direct_l.matrix() - model.liouvillian().matrix()))
    } else {
        0.0
    };
    worst = worst.max(gks_vs_model);
    println!("GKS-form liouvillian vs model (operator norm): {gks_vs_model:.3e}");

    let exact = evolve_exact(&direct_l, &rho0, t)?;
    let comps = trotter_components(&gks, &gens);
    let e1 = trace_distance(trotter_evolve(&comps, &rho0, t, steps, Splitting::Lie)?.matrix(), exact.matrix());
    let e2 = trace_distance(trotter_evolve(&comps, &rho0, t, 2 * steps, Splitting::Lie)?.matrix(), exact.matrix());
    let order = if e1 < 1e-12 {
        "n/a (components commute)".to_string()
    } else {
        format!("{:.3}", (e1 / e2).log2())
    };
    println!(
        "trotter ({} components): error(n={steps}) = {e1:.3e}, error(n={}) = {e2:.3e}, order = {order}",
        comps.len(),
        2 * steps
    );

    let channel = direct_l.exp(t)?;
    let cptp = cptp_check(&channel);
    println!(
        "cptp exp(tL): min Choi eigenvalue = {:.3e}, max trace deviation = {:.3e}",
        cptp.min_choi_eigenvalue, cptp.max_trace_deviation
    );
    let cptp_bad = cptp.min_choi_eigenvalue < -IDENTITY_TOL || cptp.max_trace_deviation > IDENTITY_TOL;
    if worst > IDENTITY_TOL || cptp_bad {
        println!("status: FAILED (worst residual {worst:.3e})");
        return Err(Failure {
            code: EXIT_INVARIANT,
            message: format!("identity residual {worst:e} exceeds {IDENTITY_TOL:e}"),
        });
    }
    println!("status: OK (worst residual {worst:.3e})");
    Ok(())
}

enum SynthSource {
    Matrix(ComplexMatrix),
    Drawn(Circuit, ComplexMatrix),
}

fn synth_source(target: &str, model: Option<&Path>) -> Result<SynthSource, Failure> {
    Ok(match target {
        "eq16" => SynthSource::Matrix(published::dissipative_frame_unitary()),
        "eq24" => SynthSource::Matrix(published::dephasing_frame_unitary()),
        "identity" => SynthSource::Matrix(ComplexMatrix::identity(8, 8)),
        "fig1-drawn" => SynthSource::Drawn(published::dissipative_circuit_drawn(), published::dissipative_frame_unitary()),
        "fig1-prose" => SynthSource::Drawn(published::dissipative_circuit_prose(), published::dissipative_frame_unitary()),
        "fig2-drawn" => SynthSource::Drawn(published::dephasing_circuit_drawn(), published::dephasing_frame_unitary()),
        "fig2-prose" => SynthSource::Drawn(published::dephasing_circuit_prose(), published::dephasing_frame_unitary()),
        other => {
            let k: usize = other
                .strip_prefix("derived:")
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| usage(format!("unknown target {other:?}")))?;
            let basis = OperatorBasis::fmo();
            let gks = match model {
                Some(p) => ModelFile::load(p)?.gks(&basis)?,
                None => LindbladModel::fmo_dissipative(&SAMPLE_RATES)?.to_gks(&basis)?,
            };
            let gens = decompose(&gks)?;
            let g = k
                .checked_sub(1)
                .and_then(|i| gens.get(i))
                .ok_or_else(|| usage(format!("derived:{k}: model has {} generators", gens.len())))?;
            // The frame rotation W = U^dagger, original frame to canonical.
            SynthSource::Matrix(g.conjugator.adjoint())
        }
    })
}

fn cmd_synth(target: &str, model: Option<&Path>, lower: bool, out: Option<&Path>) -> CmdResult {
    let source = synth_source(target, model)?;
    let (mut circuit, reference) = match source {
        SynthSource::Matrix(u) => (synthesize_two_level(&u)?, u),
        SynthSource::Drawn(c, u) => (c, u),
    };
    if lower {
        circuit = circuit.lower();
    }
    emit(out, &circuit.to_qasm())?;
    let lines = [
        format!("target: {target}"),
        format!("gates: {}", circuit.len()),
        format!("distance to target matrix (phase-adjusted Frobenius): {:.3e}", verify_equiv(&circuit, &reference)),
        format!(
            "distance to adjoint of target matrix: {:.3e}",
            matrix_distance(&circuit.evaluate(), &reference.adjoint())
        ),
        format!("target unitarity defect: {:.3e}", max_abs(&(&reference * reference.adjoint() - ComplexMatrix::identity(8, 8)))),
    ];
    for l in lines {
        if out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    Ok(())
}

fn cmd_claims(json: bool, out: Option<&Path>) -> CmdResult {
    let report = published_claims()?;
    let text = if json { report.to_json() + "\n" } else { report.to_text() };
    emit(out, &text)?;
    if out.is_some() {
        print!("{}", report.to_text().lines().last().map(|l| format!("{l}\n")).unwrap_or_default());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose { model, out } => cmd_decompose(model, out.as_deref()),
        Command::Simulate {
            model,
            t,
            steps,
            method,
            trotter_steps,
            strang,
            out,
        } => cmd_simulate(model, *t, *steps, method, *trotter_steps, *strang, out.as_deref()),
        Command::Verify { model, t, steps } => cmd_verify(model, *t, *steps),
        Command::Synth {
            target,
            model,
            lower,
            out,
        } => cmd_synth(target, model.as_deref(), *lower, out.as_deref()),
        Command::Claims { json, out } => cmd_claims(*json, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
