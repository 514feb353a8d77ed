//! `gausschan` — analyze Gaussian channels, states, and observables from
//! JSON descriptions: validity, classification, entanglement breaking with
//! certificates, partial-transpose screening, dilation, conjectured
//! capacity, grid sweeps, and sampling checks.
//!
//! Exit codes: 0 affirmative verdict or successful computation, 1 usage or
//! parse problem, 2 negative verdict, 3 undecided.

mod files;
mod report;

use std::process;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use gausschan::channels::{apply, compose, validate_channel, GaussianChannel};
use gausschan::eb::{
    cq_check, eb_decide, eb_decide_force_numeric, mc_simulate, ppt_necessary, EbStatus,
    SolverOptions,
};
use gausschan::error::GaussError;
use gausschan::observables::{naimark_dilate, validate_observable};
use gausschan::one_mode::{
    capacity_conjectured, classify, eb_decide_analytic, normal_form_channel, LogBase, OneModeCase,
};
use gausschan::states::validate_state;

use files::{read_any, read_json, write_json, ChannelFile, InputFile, ObservableFile, StateFile};
use report::{
    base_str, status_str, CapacitySection, ClassSection, DilationSection, EbSection,
    MatrixSection, PptSection, Report, SimulationSection, SweepCell, SweepSection, Tolerances,
    ValiditySection,
};

/// A diagnostic with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }

    pub fn verdict(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }
}

/// Library failures keep their message; the exit code depends on whether the
/// input was malformed (usage) or well-formed but rejected (verdict).
fn lib_err(e: GaussError) -> CliError {
    let code = match &e {
        GaussError::InvalidArgument(_) | GaussError::InternalInconsistency(_) => 1,
        GaussError::PreconditionViolation(_)
        | GaussError::UnsupportedCase(_)
        | GaussError::InconsistentChannel(_) => 2,
    };
    CliError {
        message: e.to_string(),
        code,
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaseArg {
    Nat,
    Two,
}

impl From<BaseArg> for LogBase {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Nat => LogBase::Nat,
            BaseArg::Two => LogBase::Two,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gausschan",
    version,
    about = "Gaussian channel analysis at the covariance-matrix level"
)]
struct Cli {
    /// Tolerance for exact matrix inequalities (validity, classification,
    /// transpose screen)
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Acceptance tolerance for numerically found split certificates
    #[arg(long, global = true, default_value_t = 1e-8)]
    feas_tol: f64,
    /// Iteration budget of the split solver
    #[arg(long, global = true, default_value_t = 5000)]
    max_iter: usize,
    /// Seed for solver restarts, sweeps, and sampling
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count for simulate-mp
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    /// Logarithm base for capacity values
    #[arg(long, global = true, value_enum, default_value_t = BaseArg::Nat)]
    log_base: BaseArg,
    /// Emit the machine-readable report instead of text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the defining matrix inequality of a channel, state, or
    /// observable file
    Validate { path: String },
    /// Push a state file through a channel file and write the output state
    Apply {
        channel: String,
        state: String,
        /// Output state file
        #[arg(long)]
        out: String,
    },
    /// Chain two channel files (`first` acts first) and write the composite
    Compose {
        first: String,
        second: String,
        /// Output channel file
        #[arg(long)]
        out: String,
    },
    /// One-mode classification from the (det K, sqrt det alpha) invariants
    Classify { path: String },
    /// Decide entanglement breaking; prints a split certificate when found
    Eb {
        path: String,
        /// Skip the one-mode closed forms and run the numeric solver
        #[arg(long)]
        force_numeric: bool,
    },
    /// Necessary partial-transpose screen for a breaking split
    Ppt { path: String },
    /// Does the channel's pulled-back symplectic form vanish
    /// (classical-quantum degeneracy)?
    Cq { path: String },
    /// Extend a noisy observable to a sharp one on system plus ancilla
    Dilate { path: String },
    /// Conjectured classical capacity of a one-mode channel
    Capacity {
        path: String,
        /// Mean photon-number budget at the input
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
    },
    /// Tabulate breaking verdicts over a (k, N) grid of one-mode normal
    /// forms
    Sweep {
        /// Family tag: A, B1, B2, C, or D
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 1.0)]
        k_min: f64,
        #[arg(long, default_value_t = 1.0)]
        k_max: f64,
        #[arg(long, default_value_t = 1)]
        k_steps: usize,
        #[arg(long, default_value_t = 0.0)]
        n_min: f64,
        #[arg(long, default_value_t = 0.0)]
        n_max: f64,
        #[arg(long, default_value_t = 1)]
        n_steps: usize,
        /// Also run the numeric solver per cell (seed = --seed + cell index)
        #[arg(long)]
        force_numeric: bool,
    },
    /// Sample a measure-and-prepare channel and compare moments with the
    /// exact output
    SimulateMp {
        /// State file whose covariance is the preparation seed (mean
        /// ignored)
        #[arg(long)]
        nu: String,
        /// Observable file for the measurement side
        #[arg(long)]
        obs: String,
        /// Input state file
        #[arg(long)]
        input: String,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    let json = cli.json;
    let t0 = Instant::now();
    match run(cli) {
        Ok((mut report, code)) => {
            report.walltime_ms = t0.elapsed().as_secs_f64() * 1e3;
            if json {
                match serde_json::to_string_pretty(&report) {
                    Ok(mut s) => {
                        s.push('\n');
                        emit(&s);
                    }
                    Err(e) => {
                        eprintln!("error: cannot serialize report: {e}");
                        process::exit(1);
                    }
                }
            } else {
                emit(&report.render_text());
            }
            process::exit(code);
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            process::exit(e.code);
        }
    }
}

/// Write to stdout, treating a closed pipe as a normal early exit rather
/// than a panic.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            process::exit(0);
        }
        eprintln!("error: cannot write report: {e}");
        process::exit(1);
    }
}

fn solver_options(cli: &Cli) -> SolverOptions {
    SolverOptions {
        max_iterations: cli.max_iter,
        feas_tol: cli.feas_tol,
        seed: cli.seed,
        tol: cli.tol,
        ..SolverOptions::default()
    }
}

fn tolerances(cli: &Cli) -> Tolerances {
    Tolerances {
        tol: cli.tol,
        feas_tol: cli.feas_tol,
        max_iterations: cli.max_iter,
        seed: cli.seed,
    }
}

fn echo<T: Serialize>(role: &str, value: &T) -> Result<Value, CliError> {
    let v = serde_json::to_value(value)
        .map_err(|e| CliError::usage(format!("cannot echo input: {e}")))?;
    Ok(serde_json::json!({ role: v }))
}

fn merge(parts: Vec<Value>) -> Value {
    let mut map = serde_json::Map::new();
    for p in parts {
        if let Value::Object(o) = p {
            map.extend(o);
        }
    }
    Value::Object(map)
}

/// Read a channel file, insisting on the channel schema.
fn channel_input(path: &str) -> Result<(ChannelFile, GaussianChannel), CliError> {
    let cf: ChannelFile = read_json(path)?;
    let c = cf.to_channel()?;
    Ok((cf, c))
}

fn run(cli: Cli) -> Result<(Report, i32), CliError> {
    let tols = tolerances(&cli);
    match &cli.command {
        Command::Validate { path } => cmd_validate(&cli, path, tols),
        Command::Apply { channel, state, out } => cmd_apply(&cli, channel, state, out, tols),
        Command::Compose { first, second, out } => cmd_compose(&cli, first, second, out, tols),
        Command::Classify { path } => cmd_classify(&cli, path, tols),
        Command::Eb {
            path,
            force_numeric,
        } => cmd_eb(&cli, path, *force_numeric, tols),
        Command::Ppt { path } => cmd_ppt(&cli, path, tols),
        Command::Cq { path } => cmd_cq(&cli, path, tols),
        Command::Dilate { path } => cmd_dilate(&cli, path, tols),
        Command::Capacity { path, budget } => cmd_capacity(&cli, path, *budget, tols),
        Command::Sweep {
            case,
            k_min,
            k_max,
            k_steps,
            n_min,
            n_max,
            n_steps,
            force_numeric,
        } => cmd_sweep(
            &cli,
            case,
            (*k_min, *k_max, *k_steps),
            (*n_min, *n_max, *n_steps),
            *force_numeric,
            tols,
        ),
        Command::SimulateMp { nu, obs, input } => cmd_simulate_mp(&cli, nu, obs, input, tols),
    }
}

fn cmd_validate(cli: &Cli, path: &str, tols: Tolerances) -> Result<(Report, i32), CliError> {
    let input = read_any(path)?;
    let (echo_val, section) = match &input {
        InputFile::Channel(cf) => {
            let c = cf.to_channel()?;
            let v = validate_channel(&c, cli.tol);
            (
                echo("channel", cf)?,
                ValiditySection {
                    kind: "channel".to_string(),
                    valid: v.valid,
                    min_eig: v.min_eig,
                    scale: v.scale,
                },
            )
        }
        InputFile::State(sf) => {
            let s = sf.to_state()?;
            let r = validate_state(&s, cli.tol);
            (echo("state", sf)?, ValiditySection::from_psd("state", &r))
        }
        InputFile::Observable(of) => {
            let o = of.to_observable()?;
            let r = validate_observable(&o, cli.tol);
            (
                echo("observable", of)?,
                ValiditySection::from_psd("observable", &r),
            )
        }
    };
    let code = if section.valid { 0 } else { 2 };
    let mut report = Report::new("validate", echo_val, tols);
    report.validity = Some(section);
    Ok((report, code))
}

fn cmd_apply(
    cli: &Cli,
    channel: &str,
    state: &str,
    out: &str,
    tols: Tolerances,
) -> Result<(Report, i32), CliError> {
    let (cf, c) = channel_input(channel)?;
    let sf: StateFile = read_json(state)?;
    let s = sf.to_state()?;
    let result = apply(&c, &s).map_err(lib_err)?;
    let out_file = StateFile::from_state(&result);
    write_json(out, &out_file)?;
    let mut report = Report::new(
        "apply",
        merge(vec![echo("channel", &cf)?, echo("state", &sf)?]),
        tols,
    );
    report.validity = Some({
        let v = validate_channel(&c, cli.tol);
        ValiditySection {
            kind: "channel".to_string(),
            valid: v.valid,
            min_eig: v.min_eig,
            scale: v.scale,
        }
    });
    report.output_path = Some(out.to_string());
    Ok((report, 0))
}

fn cmd_compose(
    _cli: &Cli,
    first: &str,
    second: &str,
    out: &str,
    tols: Tolerances,
) -> Result<(Report, i32), CliError> {
    let (ff, fc) = channel_input(first)?;
    let (sf, sc) = channel_input(second)?;
    // `first` acts first: the composite is second-after-first
    let composite = compose(&sc, &fc).map_err(lib_err)?;
    write_json(out, &ChannelFile::from_channel(&composite))?;
    let mut report = Report::new(
        "compose",
        merge(vec![echo("first", &ff)?, echo("second", &sf)?]),
        tols,
    );
    report.output_path = Some(out.to_string());
    Ok((report, 0))
}

fn cmd_classify(cli: &Cli, path: &str, tols: Tolerances) -> Result<(Report, i32), CliError> {
    let (cf, c) = channel_input(path)?;
    let cls = classify(&c, cli.tol).map_err(lib_err)?;
    let breaking = eb_decide_analytic(&cls);
    let mut report = Report::new("classify", echo("channel", &cf)?, tols);
    report.classification = Some(ClassSection::from_class(&cls, breaking));
    Ok((report, 0))
}

/// Validity gate shared by the verdict commands: invalid channels exit 2
/// with the validity section, before any analysis runs.
fn gated_channel(
    cli: &Cli,
    command: &str,
    path: &str,
    tols: Tolerances,
) -> Result<(Report, GaussianChannel, Option<i32>), CliError> {
    let (cf, c) = channel_input(path)?;
    let v = validate_channel(&c, cli.tol);
    let mut report = Report::new(command, echo("channel", &cf)?, tols);
    report.validity = Some(ValiditySection {
        kind: "channel".to_string(),
        valid: v.valid,
        min_eig: v.min_eig,
        scale: v.scale,
    });
    let early = if v.valid {
        None
    } else {
        report.note = Some("channel fails its noise inequality; no analysis run".to_string());
        Some(2)
    };
    Ok((report, c, early))
}

fn cmd_eb(
    cli: &Cli,
    path: &str,
    force_numeric: bool,
    tols: Tolerances,
) -> Result<(Report, i32), CliError> {
    let (mut report, c, early) = gated_channel(cli, "eb", path, tols)?;
    if let Some(code) = early {
        return Ok((report, code));
    }
    report.classical_quantum = Some(cq_check(&c, cli.tol));
    report.ppt = Some(PptSection::from_report(&ppt_necessary(&c, cli.tol)));
    if c.space_in().n_modes() == 1 && c.space_out().n_modes() == 1 {
        if let Ok(cls) = classify(&c, cli.tol) {
            let breaking = eb_decide_analytic(&cls);
            report.classification = Some(ClassSection::from_class(&cls, breaking));
        }
    }
    let opts = solver_options(cli);
    let verdict = if force_numeric {
        eb_decide_force_numeric(&c, &opts)
    } else {
        eb_decide(&c, &opts)
    }
    .map_err(lib_err)?;
    let code = match verdict.status {
        EbStatus::Feasible => 0,
        EbStatus::Infeasible => 2,
        EbStatus::Undecided => 3,
    };
    report.eb = Some(EbSection::from_verdict(&verdict));
    Ok((report, code))
}

fn cmd_ppt(cli: &Cli, path: &str, tols: Tolerances) -> Result<(Report, i32), CliError> {
    let (mut report, c, early) = gated_channel(cli, "ppt", path, tols)?;
    if let Some(code) = early {
        return Ok((report, code));
    }
    let r = ppt_necessary(&c, cli.tol);
    let code = if r.holds { 0 } else { 2 };
    report.ppt = Some(PptSection::from_report(&r));
    Ok((report, code))
}

fn cmd_cq(cli: &Cli, path: &str, tols: Tolerances) -> Result<(Report, i32), CliError> {
    let (mut report, c, early) = gated_channel(cli, "cq", path, tols)?;
    if let Some(code) = early {
        return Ok((report, code));
    }
    let cq = cq_check(&c, cli.tol);
    report.classical_quantum = Some(cq);
    Ok((report, if cq { 0 } else { 2 }))
}

fn cmd_dilate(cli: &Cli, path: &str, tols: Tolerances) -> Result<(Report, i32), CliError> {
    let of: ObservableFile = read_json(path)?;
    let o = of.to_observable()?;
    let v = validate_observable(&o, cli.tol);
    let mut report = Report::new("dilate", echo("observable", &of)?, tols);
    report.validity = Some(ValiditySection::from_psd("observable", &v));
    if !v.psd {
        report.note = Some("observable fails its noise inequality; no dilation run".to_string());
        return Ok((report, 2));
    }
    match naimark_dilate(&o, cli.tol) {
        Ok(dil) => {
            report.dilation = Some(DilationSection {
                n_modes_ancilla: dil.space_anc.n_modes(),
                k_c: MatrixSection::from_matrix(&dil.k_c),
                alpha_c: MatrixSection::from_matrix(&dil.alpha_c),
            });
            Ok((report, 0))
        }
        Err(e @ GaussError::UnsupportedCase(_)) => {
            report.note = Some(e.to_string());
            Ok((report, 2))
        }
        Err(e) => Err(lib_err(e)),
    }
}

fn cmd_capacity(
    cli: &Cli,
    path: &str,
    budget: f64,
    tols: Tolerances,
) -> Result<(Report, i32), CliError> {
    let (cf, c) = channel_input(path)?;
    let cls = classify(&c, cli.tol).map_err(lib_err)?;
    let breaking = eb_decide_analytic(&cls);
    let mut report = Report::new("capacity", echo("channel", &cf)?, tols);
    report.classification = Some(ClassSection::from_class(&cls, breaking));
    match capacity_conjectured(&cls, budget, cli.log_base.into()) {
        Ok(est) => {
            report.capacity = Some(CapacitySection {
                value: est.value,
                log_base: base_str(est.base).to_string(),
                photon_budget: budget,
                status: "CONJECTURED".to_string(),
            });
            Ok((report, 0))
        }
        Err(e @ GaussError::UnsupportedCase(_)) => {
            report.note = Some(e.to_string());
            Ok((report, 2))
        }
        Err(e) => Err(lib_err(e)),
    }
}

fn parse_case(tag: &str) -> Result<OneModeCase, CliError> {
    match tag.to_ascii_uppercase().as_str() {
        "A" => Ok(OneModeCase::A),
        "B1" => Ok(OneModeCase::B1),
        "B2" => Ok(OneModeCase::B2),
        "C" => Ok(OneModeCase::C),
        "D" => Ok(OneModeCase::D),
        _ => Err(CliError::usage(format!(
            "unknown family tag {tag:?}; expected A, B1, B2, C, or D"
        ))),
    }
}

fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    (0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect()
}

#[derive(Serialize)]
struct SweepInput<'a> {
    case: &'a str,
    #[serde(serialize_with = "files::ser_f64")]
    k_min: f64,
    #[serde(serialize_with = "files::ser_f64")]
    k_max: f64,
    k_steps: usize,
    #[serde(serialize_with = "files::ser_f64")]
    n_min: f64,
    #[serde(serialize_with = "files::ser_f64")]
    n_max: f64,
    n_steps: usize,
    force_numeric: bool,
}

fn cmd_sweep(
    cli: &Cli,
    case_tag: &str,
    (k_min, k_max, k_steps): (f64, f64, usize),
    (n_min, n_max, n_steps): (f64, f64, usize),
    force_numeric: bool,
    tols: Tolerances,
) -> Result<(Report, i32), CliError> {
    let case = parse_case(case_tag)?;
    if k_steps == 0 || n_steps == 0 {
        return Err(CliError::usage("sweep grid is empty; steps must be at least 1"));
    }
    let ks = linspace(k_min, k_max, k_steps);
    let ns = linspace(n_min, n_max, n_steps);
    let total = ks.len() * ns.len();
    let base_opts = solver_options(cli);
    let tol = cli.tol;

    // cells are independent; order is restored by collecting in grid-index
    // order regardless of which thread finishes first
    let cells: Result<Vec<SweepCell>, CliError> = (0..total)
        .into_par_iter()
        .map(|index| {
            let k = ks[index / ns.len()];
            let n = ns[index % ns.len()];
            let c = normal_form_channel(case, k, n).map_err(lib_err)?;
            let cls = classify(&c, tol).map_err(lib_err)?;
            let analytic = eb_decide_analytic(&cls);
            let (numeric_status, agrees) = if force_numeric {
                let opts = SolverOptions {
                    seed: base_opts.seed.wrapping_add(index as u64),
                    ..base_opts.clone()
                };
                let v = eb_decide_force_numeric(&c, &opts).map_err(lib_err)?;
                let agree = match v.status {
                    EbStatus::Feasible => analytic,
                    EbStatus::Infeasible => !analytic,
                    EbStatus::Undecided => false,
                };
                (Some(status_str(v.status).to_string()), Some(agree))
            } else {
                (None, None)
            };
            Ok(SweepCell {
                index,
                k,
                n,
                breaking_analytic: analytic,
                numeric_status,
                agrees,
            })
        })
        .collect();
    let cells = cells?;

    let input = SweepInput {
        case: case_tag,
        k_min,
        k_max,
        k_steps,
        n_min,
        n_max,
        n_steps,
        force_numeric,
    };
    let mut report = Report::new("sweep", echo("grid", &input)?, tols);
    report.sweep = Some(SweepSection {
        case: case.to_string(),
        cells,
    });
    Ok((report, 0))
}

fn cmd_simulate_mp(
    cli: &Cli,
    nu_path: &str,
    obs_path: &str,
    input_path: &str,
    tols: Tolerances,
) -> Result<(Report, i32), CliError> {
    let nu_file: StateFile = read_json(nu_path)?;
    let nu_state = nu_file.to_state()?;
    let of: ObservableFile = read_json(obs_path)?;
    let o = of.to_observable()?;
    let in_file: StateFile = read_json(input_path)?;
    let input = in_file.to_state()?;

    let sim = mc_simulate(&nu_state.cov().clone(), &o, &input, cli.samples, cli.seed)
        .map_err(lib_err)?;
    let se = sim.cov_standard_error();
    let reference = sim.reference.cov();
    let mut max_dev_in_se = 0.0f64;
    for i in 0..reference.nrows() {
        for j in 0..reference.ncols() {
            let dev = (sim.empirical_cov[(i, j)] - reference[(i, j)]).abs();
            let ratio = if dev == 0.0 {
                0.0
            } else {
                dev / se[(i, j)].max(f64::MIN_POSITIVE)
            };
            max_dev_in_se = max_dev_in_se.max(ratio);
        }
    }
    let within = max_dev_in_se <= 5.0;
    let mut report = Report::new(
        "simulate-mp",
        merge(vec![
            echo("nu", &nu_file)?,
            echo("observable", &of)?,
            echo("input", &in_file)?,
        ]),
        tols,
    );
    report.simulation = Some(SimulationSection {
        n_samples: sim.n_samples,
        seed: cli.seed,
        reference_cov: MatrixSection::from_matrix(reference),
        empirical_cov: MatrixSection::from_matrix(&sim.empirical_cov),
        empirical_mean_rows: sim.empirical_mean.len(),
        empirical_mean: sim.empirical_mean.iter().copied().collect(),
        max_dev_in_se,
        within_five_se: within,
    });
    Ok((report, if within { 0 } else { 2 }))
}
