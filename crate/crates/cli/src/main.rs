//! `msp` — optimize movable superdirective pair arrays and regenerate the
//! pattern, spectral-efficiency, movement-range and runtime studies.
//!
//! Exit codes: 0 success, 1 a check failed its tolerance, 2 bad usage,
//! 3 invalid configuration, 4 file I/O failure, 5 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use msp_core::array::{composite_pattern, directivity, phi_grid};
use msp_core::baselines::{fpa_mrc_snr, pso_optimize, FpaConfig, PsoConfig};
use msp_core::config::{key_reference, Config};
use msp_core::experiments::{
    pattern_csv, run_fig2, run_fig3, run_fig4, run_gradcheck, run_table1, AggregateResult,
    ExperimentKind, Method,
};
use msp_core::io::{self, fmt_f64, SceneFile, StateFile};
use msp_core::optimizer::{alternating_optimize_with, initialize};
use msp_core::{coupling_matrix, generate_scene, MspError, Objective};

#[derive(Parser)]
#[command(name = "msp", version, about = "Movable superdirective pair array toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one array on one scene; writes scene, states, trace and summary.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Overrides `method`.
        #[arg(long, value_parser = ["msp-ao", "pso", "fpa-mrc"])]
        method: Option<String>,
    },
    /// Sample the composite pattern of the state given in --config.
    Pattern {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Patterns before and after optimization on the fixed three-path scene.
    Fig2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Spectral efficiency of the optimized array and the fixed MRC array vs M and L.
    Fig3 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Optimized SNR vs movement range.
    Fig4 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// SNR and runtime of the alternating optimizer against PSO.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Compare analytic gradients with central differences; fails above tolerance.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Key-value config file (a scene or state file also works).
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(short, long)]
    seed: Option<u64>,
    /// Output directory, created if absent.
    #[arg(short, long, env = "MSP_OUT_DIR", default_value = "results")]
    out: PathBuf,
    /// Progress on stderr; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

impl Common {
    fn load(&self) -> Result<Config, Failure> {
        let mut config = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
            if let Some(scene) = &mut config.scene_file {
                scene.seed = Some(seed);
            }
        }
        Ok(config)
    }

    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("msp: {}", msg.as_ref());
        }
    }
}

/// A reason to exit nonzero.
enum Failure {
    Check(String),
    Core(MspError),
}

impl From<MspError> for Failure {
    fn from(e: MspError) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Core(e) => match e {
                MspError::Io { .. } => 4,
                MspError::NonFinite { .. } | MspError::Pattern(_) => 5,
                _ => 3,
            },
        }
    }
}

fn set_trials(config: &mut Config, kind: &str, trials: Option<usize>) -> Result<(), Failure> {
    let Some(t) = trials else { return Ok(()) };
    if t == 0 {
        return Err(MspError::Config("--trials must be at least 1".into()).into());
    }
    match kind {
        "fig3" => config.fig3.trials = t,
        "fig4" => config.fig4.trials = t,
        "table1" => config.table1.trials = t,
        _ => config.gradcheck.trials = t,
    }
    Ok(())
}

fn set_grid(config: &mut Config, grid: Option<usize>) -> Result<(), Failure> {
    if let Some(g) = grid {
        if g < 2 {
            return Err(MspError::Config("--grid must be at least 2".into()).into());
        }
        config.grid = g;
    }
    Ok(())
}

fn write(out: &Path, name: &str, config: &Config, body: &str) -> Result<(), Failure> {
    io::write_text(out.join(name), &config.header(), body)?;
    Ok(())
}

fn write_config(out: &Path, name: &str, config: &Config) -> Result<(), Failure> {
    io::write_text(out.join(format!("{name}_config.cfg")), "", &config.echo())?;
    Ok(())
}

fn optimize(common: &Common, method: Option<String>) -> Result<(), Failure> {
    let mut config = common.load()?;
    if let Some(m) = method {
        config.method = Method::parse(&m).expect("clap restricts the method names");
    }
    let geom = config.geometry.clone();
    let scene_file = match &config.scene_file {
        Some(f) => f.clone(),
        None => {
            let spec = config.scene.clone();
            SceneFile::new(generate_scene(&spec, config.seed)?, Some(config.seed))
        }
    };
    let scene = &scene_file.scene;
    let out = &common.out;
    common.note(format!(
        "{} on M = {}, L = {}, seed {}",
        config.method.name(),
        geom.num_pairs,
        scene.num_paths(),
        config.seed
    ));

    let start = Instant::now();
    let coupling = coupling_matrix(geom.d_intra, geom.wavenumber())?;
    let objective = Objective::new(&geom, &coupling, scene)?;
    write(out, "scene.cfg", &config, &scene_file.to_kv())?;

    let mut summary = String::from("method,snr_linear,snr_db,se,iterations,elapsed_s\n");
    let (report, iterations, elapsed) = match config.method {
        Method::FpaMrc => {
            let r = fpa_mrc_snr(&FpaConfig::matching(geom.num_pairs), scene);
            (r, 0, start.elapsed().as_secs_f64())
        }
        method => {
            let trace = match method {
                Method::Pso => {
                    let cfg = PsoConfig { seed: config.seed, ..config.pso.clone() };
                    pso_optimize(&geom, &coupling, scene, &cfg)?
                }
                _ => {
                    let init = match &config.state {
                        Some(s) => s.clone(),
                        None => initialize(scene, &geom, config.optimizer.init_jitter, config.seed)?,
                    };
                    alternating_optimize_with(&objective, init, &config.optimizer, start)?
                }
            };
            for (name, state) in [
                ("state_initial.cfg", &trace.initial_state),
                ("state_optimized.cfg", &trace.best_state),
            ] {
                let file = StateFile { scene: scene_file.clone(), state: state.clone(), method };
                write(out, name, &config, &file.to_kv())?;
            }
            write(out, "trace.csv", &config, &io::trace_csv(&trace))?;
            (objective.snr(&trace.best_state), trace.iterations, trace.elapsed_s)
        }
    };
    summary.push_str(&format!(
        "{},{},{},{},{iterations},{}\n",
        config.method.name(),
        fmt_f64(report.linear),
        fmt_f64(report.db),
        fmt_f64(report.spectral_efficiency),
        fmt_f64(elapsed)
    ));
    write(out, "summary.csv", &config, &summary)?;
    write_config(out, "optimize", &config)?;
    println!(
        "{}: SNR {:.4} dB, SE {:.4} bit/s/Hz, {iterations} iterations, {:.4} s",
        config.method.name(),
        report.db,
        report.spectral_efficiency,
        elapsed
    );
    Ok(())
}

fn pattern(common: &Common, grid: Option<usize>) -> Result<(), Failure> {
    let mut config = common.load()?;
    set_grid(&mut config, grid)?;
    let state = config.state.clone().ok_or_else(|| {
        MspError::Config("pattern needs a state file (theta_deg / theta_rad and y) via --config".into())
    })?;
    let geom = &config.geometry;
    let coupling = coupling_matrix(geom.d_intra, geom.wavenumber())?;
    let phis = phi_grid(config.grid);
    let samples = composite_pattern(geom, &state, &coupling, &phis)?;
    write(&common.out, "pattern.csv", &config, &pattern_csv(&phis, &samples))?;
    let (peak, _) = phis
        .iter()
        .zip(&samples)
        .fold((0.0, f64::NEG_INFINITY), |best, (phi, f)| {
            if f.norm() > best.1 { (*phi, f.norm()) } else { best }
        });
    println!(
        "pattern: {} samples, peak at {:.2} deg, directivity there {:.4}",
        phis.len(),
        peak.to_degrees(),
        directivity(&samples, peak)?
    );
    Ok(())
}

fn fig2(common: &Common, grid: Option<usize>) -> Result<(), Failure> {
    let mut config = common.load()?;
    set_grid(&mut config, grid)?;
    let geom = config.geometry.clone().with_num_pairs(config.fig2_num_pairs);
    let r = run_fig2(&geom, &config.optimizer, config.grid, config.seed)?;
    let out = &common.out;
    write(out, "fig2_pattern_initial.csv", &config, &pattern_csv(&r.grid, &r.initial_pattern))?;
    write(out, "fig2_pattern_optimized.csv", &config, &pattern_csv(&r.grid, &r.optimized_pattern))?;
    let scene = SceneFile::new(msp_core::fig2_scene(), Some(config.seed));
    for (name, state) in [
        ("fig2_state_initial.cfg", &r.initial_state),
        ("fig2_state_optimized.cfg", &r.optimized_state),
    ] {
        let file = StateFile { scene: scene.clone(), state: state.clone(), method: Method::MspAo };
        write(out, name, &config, &file.to_kv())?;
    }
    write(out, "fig2_trace.csv", &config, &io::trace_csv(&r.trace))?;
    let summary = format!(
        "stage,snr_db,se\ninitial,{},{}\noptimized,{},{}\n",
        fmt_f64(r.initial_snr.db),
        fmt_f64(r.initial_snr.spectral_efficiency),
        fmt_f64(r.optimized_snr.db),
        fmt_f64(r.optimized_snr.spectral_efficiency)
    );
    write(out, "fig2_summary.csv", &config, &summary)?;
    write_config(out, "fig2", &config)?;
    println!(
        "fig2: SNR {:.4} dB -> {:.4} dB after {} iterations",
        r.initial_snr.db, r.optimized_snr.db, r.trace.iterations
    );
    Ok(())
}

fn sweep(common: &Common, kind: ExperimentKind, trials: Option<usize>) -> Result<(), Failure> {
    let mut config = common.load()?;
    set_trials(&mut config, kind.name(), trials)?;
    let spec = config.experiment(kind);
    common.note(format!(
        "{}: M {:?}, L {:?}, {} trials",
        kind.name(),
        spec.m_values,
        spec.l_values,
        spec.trials
    ));
    let result: AggregateResult = match kind {
        ExperimentKind::Fig3 => run_fig3(&spec)?,
        ExperimentKind::Fig4 => run_fig4(&spec)?,
        _ => run_table1(&spec)?,
    };
    let name = kind.name();
    let table = result.to_csv();
    write(&common.out, &format!("{name}.csv"), &config, &table)?;
    write(&common.out, &format!("{name}_trials.csv"), &config, &result.trials_csv())?;
    write_config(&common.out, name, &config)?;
    print!("{table}");
    Ok(())
}

fn gradcheck(common: &Common, trials: Option<usize>) -> Result<(), Failure> {
    let mut config = common.load()?;
    set_trials(&mut config, "gradcheck", trials)?;
    let report = run_gradcheck(&config.gradcheck_spec())?;
    println!(
        "gradcheck: {} configs, max rel error theta {:.3e} (tol {:.1e}), y {:.3e} (tol {:.1e})",
        report.configs, report.max_rel_theta, report.tol_theta, report.max_rel_y, report.tol_y
    );
    println!(
        "gradcheck: without the P_signal floor: theta {:.3e}, y {:.3e}",
        report.max_raw_theta, report.max_raw_y
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check("gradient check exceeded tolerance".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Optimize { common, method } => optimize(&common, method),
        Command::Pattern { common, grid } => pattern(&common, grid),
        Command::Fig2 { common, grid } => fig2(&common, grid),
        Command::Fig3 { common, trials } => sweep(&common, ExperimentKind::Fig3, trials),
        Command::Fig4 { common, trials } => sweep(&common, ExperimentKind::Fig4, trials),
        Command::Table1 { common, trials } => sweep(&common, ExperimentKind::Table1, trials),
        Command::Gradcheck { common, trials } => gradcheck(&common, trials),
    }
}

fn main() -> ExitCode {
    let help = format!("Config keys (key = default [unit] description):\n{}", key_reference());
    let command = Cli::command()
        .mut_subcommands(|sub| sub.after_long_help(help.clone()))
        .after_long_help(help.clone());
    let cli = match Cli::from_arg_matches(&command.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check(msg) => eprintln!("msp: check failed: {msg}"),
                Failure::Core(e) => eprintln!("msp: error: {e}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
