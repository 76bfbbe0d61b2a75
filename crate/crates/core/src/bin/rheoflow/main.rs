//! `rheoflow` command-line tool. All results are written to files; the
//! process exit code reports the outcome class.

mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::{Deserialize, Serialize};

use args::{
    Cli, Command, ConvergenceArgs, FitArgs, FitFamilyArgs, PerturbArgs, PlateauArgs, SolveArgs,
    StudyCommand, TrainArgs, VerifyArgs,
};
use rheoflow::experiments::{self, FitFamilyConfig};
use rheoflow::fem::{self, NewtonConfig, NewtonStep, StokesSolution};
use rheoflow::icnn::{self, TrainConfig};
use rheoflow::{
    CarreauParams, Error, PowerLawParams, RheologyDataset, VerifierConfig, ViscosityModel,
};

const EXIT_INPUT: u8 = 2;
const EXIT_TRAINING: u8 = 3;
const EXIT_UNSATISFIED: u8 = 4;
const EXIT_NEWTON: u8 = 5;
const EXIT_OTHER: u8 = 1;

/// Failure of a command with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::ModelRange { .. } => EXIT_INPUT,
            Error::TrainingDiverged { .. } => EXIT_TRAINING,
            Error::NonConvergence { .. } => EXIT_NEWTON,
            _ => EXIT_OTHER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// Contents of the effective configuration file.
#[derive(Serialize, Deserialize)]
struct RunConfig {
    rheoflow_version: String,
    command: Command,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rheoflow: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    let command = match command {
        Command::Rerun { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", config.display())))?;
            let rc: RunConfig = serde_json::from_str(&text)
                .map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", config.display())))?;
            rc.command
        }
        c => c,
    };
    let command = apply_seed_override(command)?;
    match &command {
        Command::Fit(a) => fit(a, &command),
        Command::Verify(a) => verify(a, &command),
        Command::Solve(a) => solve(a, &command),
        Command::Study(StudyCommand::Convergence(a)) => convergence(a, &command),
        Command::Study(StudyCommand::Plateau(a)) => plateau(a, &command),
        Command::Study(StudyCommand::Perturb(a)) => perturb(a, &command),
        Command::Study(StudyCommand::FitFamily(a)) => fit_family(a, &command),
        Command::Rerun { .. } => Err(fail(
            EXIT_INPUT,
            "a configuration file cannot contain a rerun",
        )),
    }
}

/// `RHEOFLOW_SEED` replaces the seed of any command that has one.
fn apply_seed_override(mut command: Command) -> Result<Command, Failure> {
    let Ok(text) = std::env::var("RHEOFLOW_SEED") else {
        return Ok(command);
    };
    let seed: u64 = text.trim().parse().map_err(|_| {
        fail(
            EXIT_INPUT,
            format!("RHEOFLOW_SEED is not an integer: {text:?}"),
        )
    })?;
    match &mut command {
        Command::Fit(a) => a.train.seed = seed,
        Command::Verify(a) => a.seed = seed,
        Command::Study(StudyCommand::Plateau(a)) => a.train.seed = seed,
        Command::Study(StudyCommand::FitFamily(a)) => a.train.seed = seed,
        _ => {}
    }
    Ok(command)
}

fn write_config(path: &Path, command: &Command) -> Outcome {
    let rc = RunConfig {
        rheoflow_version: env!("CARGO_PKG_VERSION").into(),
        command: command.clone(),
    };
    experiments::write_json(path, &rc)?;
    Ok(())
}

fn create_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", dir.display())))
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    TrainConfig {
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        seed: a.seed,
        activation: a.activation.into(),
        ..TrainConfig::default()
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

#[derive(Serialize)]
struct FitReport {
    dataset: String,
    samples: usize,
    branch: icnn::Branch,
    sign: f64,
    loss_convex: f64,
    loss_concave: f64,
    rmse: f64,
    r_squared: f64,
}

fn fit(a: &FitArgs, command: &Command) -> Outcome {
    let data = RheologyDataset::load_csv(&a.dataset)?;
    let cfg = train_config(&a.train);
    let (inputs, targets) = data.as_points();
    let sel = icnn::select_convex_concave(&inputs, &targets, &a.train.arch, &cfg)?;
    let (rmse, r_squared) = experiments::fit_metrics(&sel.model, &data);
    icnn::save_model(&sel.model, &a.out)?;
    let report = FitReport {
        dataset: data.name.clone(),
        samples: data.samples.len(),
        branch: sel.branch,
        sign: sel.branch.sign(),
        loss_convex: sel.loss_convex,
        loss_concave: sel.loss_concave,
        rmse,
        r_squared,
    };
    experiments::write_json(sibling(&a.out, "fit.json"), &report)?;
    write_config(&sibling(&a.out, "config.json"), command)
}

fn verifier_config(a: &VerifyArgs) -> VerifierConfig {
    VerifierConfig {
        t_max: a.t_max,
        n_samples: a.samples,
        de_generations: a.generations,
        seed: a.seed,
        ..VerifierConfig::default()
    }
}

fn verify(a: &VerifyArgs, command: &Command) -> Outcome {
    let count = |v: &[f64], n: usize, what: &str| {
        if v.len() == n {
            Ok(())
        } else {
            Err(fail(EXIT_INPUT, format!("{what} takes {n} values, got {}", v.len())))
        }
    };
    let model = match (&a.model, &a.carreau, &a.power) {
        (Some(path), _, _) => ViscosityModel::icnn(icnn::load_model(path)?),
        (_, Some(c), _) => {
            count(c, 4, "--carreau")?;
            ViscosityModel::carreau(CarreauParams::new(c[0], c[1], c[2], c[3])?)
        }
        (_, _, Some(p)) => {
            count(p, 2, "--power")?;
            ViscosityModel::power_law(PowerLawParams::new(p[0], p[1])?)
        }
        _ => return Err(fail(EXIT_INPUT, "give a model file, --carreau or --power")),
    };
    let cert = rheoflow::verifier::verify(&model, &verifier_config(a))?;
    cert.save(&a.out)?;
    write_config(&sibling(&a.out, "config.json"), command)?;
    if cert.satisfied {
        Ok(())
    } else {
        Err(fail(
            EXIT_UNSATISFIED,
            format!(
                "constraints violated (worst residual {:.3e})",
                cert.worst_residuals.min()
            ),
        ))
    }
}

fn parse_numbers(text: &str, count: usize) -> Result<Vec<f64>, Failure> {
    let v: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == count => Ok(v),
        _ => Err(fail(
            EXIT_INPUT,
            format!("expected {count} comma-separated numbers, got {text:?}"),
        )),
    }
}

fn parse_law(spec: &str) -> Result<ViscosityModel, Failure> {
    if let Some(rest) = spec.strip_prefix("carreau:") {
        let c = parse_numbers(rest, 4)?;
        return Ok(ViscosityModel::carreau(CarreauParams::new(
            c[0], c[1], c[2], c[3],
        )?));
    }
    if let Some(rest) = spec.strip_prefix("power:") {
        let p = parse_numbers(rest, 2)?;
        return Ok(ViscosityModel::power_law(PowerLawParams::new(p[0], p[1])?));
    }
    Ok(ViscosityModel::icnn(icnn::load_model(spec)?))
}

fn write_newton_log(path: &Path, log: &[NewtonStep]) -> Outcome {
    experiments::write_csv(path, log)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    mesh: usize,
    degree: usize,
    h: f64,
    n_unknowns: usize,
    r: f64,
    err_u: f64,
    err_p: f64,
    newton_iterations: usize,
    residual_norm: f64,
    continuation_used: bool,
}

fn solve(a: &SolveArgs, command: &Command) -> Outcome {
    let model = parse_law(&a.viscosity)?;
    let forcing = match &a.forcing {
        Some(s) => parse_law(s)?,
        None if model.power_index().is_some() => model.clone(),
        None => {
            return Err(fail(
                EXIT_INPUT,
                "a network viscosity needs --forcing with an analytic law",
            ))
        }
    };
    let r = match (a.r, forcing.power_index()) {
        (Some(r), _) => r,
        (None, Some(n)) => n,
        (None, None) => return Err(fail(EXIT_INPUT, "give --r for a network forcing law")),
    };
    create_dir(&a.out)?;
    write_config(&a.out.join("config.json"), command)?;
    let space = fem::FeSpace::new(fem::build_mesh(a.mesh)?, a.degree)?;
    let case = fem::ManufacturedCase::reference();
    let (x, report) = match fem::newton_solve(
        &space,
        &model,
        &forcing,
        &case,
        &NewtonConfig::default(),
        None,
    ) {
        Ok(v) => v,
        Err(Error::NonConvergence { reason, log }) => {
            write_newton_log(&a.out.join("newton.csv"), &log)?;
            return Err(fail(
                EXIT_NEWTON,
                format!("Newton solver did not converge: {reason} (log in newton.csv)"),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    write_newton_log(&a.out.join("newton.csv"), &report.log)?;
    let errors = fem::compute_errors(&space, &x, &case, r)?;
    StokesSolution::from_vector(&space, &x)?.save(a.out.join("solution.json"))?;
    let summary = SolveReport {
        mesh: a.mesh,
        degree: a.degree,
        h: space.mesh.h,
        n_unknowns: space.n_unknowns(),
        r,
        err_u: errors.err_u,
        err_p: errors.err_p,
        newton_iterations: report.iterations,
        residual_norm: report.residual_norm,
        continuation_used: report.continuation_used,
    };
    experiments::write_json(a.out.join("report.json"), &summary)?;
    Ok(())
}

fn convergence(a: &ConvergenceArgs, command: &Command) -> Outcome {
    create_dir(&a.out)?;
    write_config(&a.out.join("config.json"), command)?;
    let model = ViscosityModel::carreau(CarreauParams::new(2.0, 0.0, 2.0, a.r)?);
    let table =
        fem::convergence_study(&model, &a.degree, &a.meshes, a.r, &NewtonConfig::default())?;
    table.save_csv(a.out.join("rates.csv"))?;
    experiments::write_json(a.out.join("rates.json"), &table)?;
    if table.has_failures() {
        let n = table.rows.iter().filter(|r| r.failure.is_some()).count();
        return Err(fail(
            EXIT_NEWTON,
            format!("{n} solve(s) failed; see rates.csv"),
        ));
    }
    Ok(())
}

fn carreau_target(n: f64) -> Result<CarreauParams, Failure> {
    Ok(CarreauParams::new(2.0, 0.0, 2.0, n)?)
}

fn plateau(a: &PlateauArgs, command: &Command) -> Outcome {
    create_dir(&a.out)?;
    write_config(&a.out.join("config.json"), command)?;
    let params = carreau_target(a.r)?;
    let model = match &a.model {
        Some(p) => icnn::load_model(p)?,
        None => {
            let cfg = FitFamilyConfig {
                architecture: a.train.arch.clone(),
                train: train_config(&a.train),
                seed: a.train.seed,
                ..FitFamilyConfig::default()
            };
            let fit = experiments::fit_carreau(a.r, &cfg)?;
            experiments::write_json(a.out.join("fit.json"), &fit.summary())?;
            fit.model
        }
    };
    icnn::save_model(&model, a.out.join("model.json"))?;
    let cert = rheoflow::verifier::verify(
        &ViscosityModel::icnn(model.clone()),
        &VerifierConfig::default(),
    )?;
    cert.save(a.out.join("certificate.json"))?;
    if !cert.satisfied {
        log::warn!("the network viscosity is not certified; solves may be ill-posed");
    }
    let mut meshes = a.meshes.clone();
    if let Some(m) = a.reference_mesh {
        if !meshes.contains(&m) {
            meshes.push(m);
        }
    }
    let series = experiments::solve_icnn_series(
        &model,
        params,
        a.degree,
        &meshes,
        &NewtonConfig::default(),
    )?;
    let study = experiments::plateau_from_series(&series, &model)?;
    experiments::write_csv(a.out.join("plateau.csv"), &study.rows)?;
    experiments::write_json(a.out.join("plateau.json"), &study)?;
    if let Some(m) = a.reference_mesh {
        let below: Vec<usize> = a.meshes.iter().copied().filter(|&k| k < m).collect();
        let table = experiments::reference_rates_from_series(&series, &below, m)?;
        table.save_csv(a.out.join("reference_rates.csv"))?;
        experiments::write_json(a.out.join("reference_rates.json"), &table)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PerturbRow {
    delta: f64,
    lhs_u: f64,
    lhs_p: f64,
    k_gap_1: f64,
    k_gap_2: f64,
    strain_norm_1: f64,
    strain_norm_2: f64,
    rhs_1: f64,
    rhs_2: f64,
    ratio_u_1: Option<f64>,
    ratio_u_2: Option<f64>,
    ratio_p_1: Option<f64>,
    ratio_p_2: Option<f64>,
}

fn perturb(a: &PerturbArgs, command: &Command) -> Outcome {
    create_dir(&a.out)?;
    write_config(&a.out.join("config.json"), command)?;
    let check = experiments::perturbation_check(
        carreau_target(a.n)?,
        &a.deltas,
        a.degree,
        a.mesh,
        &NewtonConfig::default(),
    )?;
    let rows: Vec<PerturbRow> = check
        .rows
        .iter()
        .map(|r| PerturbRow {
            delta: r.delta,
            lhs_u: r.lhs_u,
            lhs_p: r.lhs_p,
            k_gap_1: r.k_gap[0],
            k_gap_2: r.k_gap[1],
            strain_norm_1: r.strain_norm[0],
            strain_norm_2: r.strain_norm[1],
            rhs_1: r.rhs[0],
            rhs_2: r.rhs[1],
            ratio_u_1: r.ratio_u[0],
            ratio_u_2: r.ratio_u[1],
            ratio_p_1: r.ratio_p[0],
            ratio_p_2: r.ratio_p[1],
        })
        .collect();
    experiments::write_csv(a.out.join("perturb.csv"), &rows)?;
    experiments::write_json(a.out.join("perturb.json"), &check)?;
    Ok(())
}

#[derive(Serialize)]
struct CurvePoint {
    t: f64,
    carreau: f64,
    network: f64,
}

fn fit_family(a: &FitFamilyArgs, command: &Command) -> Outcome {
    create_dir(&a.out)?;
    write_config(&a.out.join("config.json"), command)?;
    let cfg = FitFamilyConfig {
        n_samples: a.samples,
        architecture: a.train.arch.clone(),
        train: train_config(&a.train),
        seed: a.train.seed,
        ..FitFamilyConfig::default()
    };
    let mut summaries = Vec::new();
    for &n in &a.n {
        let fit = experiments::fit_carreau(n, &cfg)?;
        icnn::save_model(&fit.model, a.out.join(format!("model_n{n}.json")))?;
        let curve: Vec<CurvePoint> = (0..=700)
            .map(|i| {
                let t = cfg.t_max * i as f64 / 700.0;
                CurvePoint {
                    t,
                    carreau: rheoflow::rheology::carreau_eval(t, &fit.params),
                    network: fit.model.eval_scalar(t),
                }
            })
            .collect();
        experiments::write_csv(a.out.join(format!("curve_n{n}.csv")), &curve)?;
        summaries.push(fit.summary());
    }
    experiments::write_csv(a.out.join("summary.csv"), &summaries)?;
    experiments::write_json(a.out.join("summary.json"), &summaries)?;
    Ok(())
}
