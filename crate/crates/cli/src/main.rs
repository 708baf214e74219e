use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hfic_core::harness::{
    board_protocol, compare_planners_protocol, compute_metrics, emit_report, letters_protocol, plan_trajectory,
    replay_planner, run_closed_loop, ExperimentConfig, PlannerKind, Report, ReportFormat, SimLog,
};
use hfic_core::planner::PlannerSet;
use hfic_core::trajectory::{synth_trajectory, SynthSpec, TrajectoryStream};
use hfic_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "hfic", version, about = "Harmonic planning and fractal impedance control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay one planner over a via-point stream and write the planned path.
    Plan(PlanArgs),
    /// Run a closed-loop episode described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale a stream in space about its centroid and in time.
    Scale {
        #[arg(long)]
        traj: String,
        #[arg(long)]
        sx: f64,
        #[arg(long)]
        st: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render tables and figures from a simulation log.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        /// Output directory; defaults to the log's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start of the steady-state window (s).
        #[arg(long, default_value_t = 1.0)]
        settle: f64,
    },
    /// Generate a synthetic via-point stream.
    Synth {
        /// circle, figure8, script or letter.
        #[arg(long)]
        kind: String,
        /// Generator parameter as key=value; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Both planners on all six parameter sets.
    ComparePlanners {
        #[arg(long, default_value = "synth:script")]
        traj: String,
        #[command(flatten)]
        output: ProtocolOutput,
    },
    /// Letters B, F, H at quarter speed with both FIC presets.
    Letters {
        #[arg(long, default_value = "arm7")]
        model: String,
        #[command(flatten)]
        output: ProtocolOutput,
    },
    /// Circle and figure-eight with and without perturbation.
    Board {
        #[arg(long, default_value = "arm7")]
        model: String,
        #[command(flatten)]
        output: ProtocolOutput,
    },
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    traj: String,
    #[arg(long, default_value = "harmonic")]
    planner: PlannerKind,
    /// Parameter set index, 1 to 6.
    #[arg(long, default_value_t = 3)]
    params: usize,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long = "fn")]
    f_n: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    #[arg(long)]
    v_max: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProtocolOutput {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Also write the simulation log of every episode.
    #[arg(long)]
    logs: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.render().to_string().trim()),
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn run(command: Command) -> hfic_core::Result<serde_json::Value> {
    match command {
        Command::Plan(args) => plan(args),
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Scale { traj, sx, st, out } => {
            let scaled = TrajectoryStream::resolve(&traj)?.scale(sx, st)?;
            scaled.write_csv(&out)?;
            Ok(json!({ "out": out, "samples": scaled.len(), "duration": scaled.duration() }))
        }
        Command::Report { log, format, out, settle } => {
            let sim = SimLog::load_csv(&log)?;
            let name = log.file_stem().and_then(|s| s.to_str()).unwrap_or("report").to_string();
            let dir = out.unwrap_or_else(|| log.parent().map(Path::to_path_buf).unwrap_or_default());
            let files = emit(&Report::from_log(&name, &sim, &compute_metrics(&sim, settle)), format, &dir)?;
            Ok(json!({ "files": files }))
        }
        Command::Synth { kind, params, out } => {
            if let Some(p) = params.iter().find(|p| !p.contains('=')) {
                return Err(Error::InvalidParameter(format!("generator parameter '{p}' is not key=value")));
            }
            let text = if params.is_empty() { kind } else { format!("{kind}:{}", params.join(",")) };
            let spec: SynthSpec = text.parse()?;
            let stream = synth_trajectory(&spec)?;
            stream.write_csv(&out)?;
            Ok(json!({ "out": out, "samples": stream.len(), "duration": stream.duration() }))
        }
        Command::ComparePlanners { traj, output } => {
            let (rows, report) = compare_planners_protocol(&TrajectoryStream::resolve(&traj)?)?;
            let files = emit(&report, output.format, &output.out)?;
            let best = hfic_core::harness::best_set(&rows).map(|c| c.harmonic.set);
            Ok(json!({ "files": files, "best_set": best }))
        }
        Command::Letters { model, output } => {
            let (outcomes, report) = letters_protocol(&model)?;
            let mut files = emit(&report, output.format, &output.out)?;
            if output.logs {
                for o in &outcomes {
                    files.push(write_log(&o.log, &output.out, &format!("letters_{}_{}", o.letter, o.fic))?);
                }
            }
            Ok(json!({ "files": files, "summary": summary(&report) }))
        }
        Command::Board { model, output } => {
            let (outcomes, report) = board_protocol(&model)?;
            let mut files = emit(&report, output.format, &output.out)?;
            if output.logs {
                for o in &outcomes {
                    let tag = if o.perturbed { "perturbed" } else { "free" };
                    files.push(write_log(&o.log, &output.out, &format!("board_{}_{}_{tag}", o.shape, o.fic))?);
                }
            }
            Ok(json!({ "files": files, "summary": summary(&report) }))
        }
    }
}

fn plan(args: PlanArgs) -> hfic_core::Result<serde_json::Value> {
    let traj = TrajectoryStream::resolve(&args.traj)?;
    let mut set = PlannerSet::by_index(args.params)?;
    set.zeta = args.zeta.unwrap_or(set.zeta);
    set.f_n = args.f_n.unwrap_or(set.f_n);
    set.a_max = args.a_max.unwrap_or(set.a_max);
    set.v_max = args.v_max.unwrap_or(set.v_max);
    set.harmonic_params().validate()?;

    let path = plan_trajectory(args.planner, &set, &traj)?;
    let row = replay_planner(args.planner, &set, &traj)?;
    std::fs::create_dir_all(&args.out)?;
    let file = args.out.join(format!("plan_{}_set{}.csv", args.planner.name(), set.index));
    let mut text = String::from("t,x,y,z,vx,vy,vz\n");
    for ((t, p), v) in path.t.iter().zip(&path.position).zip(&path.velocity) {
        let _ = writeln!(text, "{t},{},{},{},{},{},{}", p.x, p.y, p.z, v.x, v.y, v.z);
    }
    std::fs::write(&file, text)?;
    Ok(json!({
        "out": file,
        "planner": args.planner.name(),
        "set": set.index,
        "rmse": { "y": row.rmse_y, "z": row.rmse_z, "vy": row.rmse_vy, "vz": row.rmse_vz },
    }))
}

fn simulate(config: &Path, out: Option<PathBuf>) -> hfic_core::Result<serde_json::Value> {
    let cfg = ExperimentConfig::load(config)?;
    let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let log = run_closed_loop(&cfg)?;
    let file = write_log(&log, &dir, "sim_log")?;
    let m = compute_metrics(&log, cfg.settle);
    Ok(json!({
        "log": file,
        "rows": log.rows.len(),
        "rmse": [m.rmse.x, m.rmse.y, m.rmse.z],
        "max_error": m.max_error,
        "steady_max_error": m.steady_max_error,
        "max_fic_force": m.max_fic_force,
        "recovery_times": m.recoveries.iter().map(|r| r.time).collect::<Vec<_>>(),
    }))
}

fn write_log(log: &SimLog, dir: &Path, name: &str) -> hfic_core::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let file = dir.join(format!("{name}.csv"));
    log.write_csv(&file)?;
    Ok(file)
}

fn emit(report: &Report, format: ReportFormat, dir: &Path) -> hfic_core::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    emit_report(report, format, dir)
}

fn summary(report: &Report) -> serde_json::Map<String, serde_json::Value> {
    report.summary.iter().map(|(k, v)| (k.clone(), json!(v))).collect()
}
