use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quench_cli::sweep::{run_sweep, sweep_points, SweepParam};
use quench_cli::verify::{deviation, report, verify_reference};
use quench_cli::{load_config, run, write_figure, CliError, Figure, Result};

/// Entanglement entropy after quenches of coupled harmonic oscillators.
#[derive(Debug, Parser)]
#[command(name = "quench", version)]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write its CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output file; defaults to `output.path` or stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
    },
    /// Run the cartesian product of parameter lists over a base configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `key=v1,v2,..`, e.g. `model.omega_f=0.3,0.1`; repeatable.
        #[arg(long = "param", required = true)]
        params: Vec<SweepParam>,
        #[arg(long, default_value = "sweep")]
        outdir: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
    },
    /// Write the curves of a preset figure.
    Figure {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
    },
    /// Compare the closed-form pipeline with the covariance oracle.
    Verify {
        /// Check this configuration instead of the reference curves.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
    },
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            output,
            dt,
            t_max,
        } => {
            let cfg = load_config(&config)?.with_time(t_max, dt)?;
            let table = run(&cfg)?;
            match output.or_else(|| cfg.output.path.as_ref().map(PathBuf::from)) {
                Some(path) => table.save(&path, cfg.output.precision),
                None => table
                    .write_csv(std::io::stdout().lock(), cfg.output.precision)
                    .map_err(|e| CliError::write("<stdout>", e)),
            }
        }
        Command::Sweep {
            config,
            params,
            outdir,
            dt,
            t_max,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::Read {
                path: config.clone(),
                message: e.to_string(),
            })?;
            let base: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::config("", e.to_string()))?;
            let points = sweep_points(&base, &params, t_max, dt)?;
            let written = run_sweep(&points, &outdir)?;
            eprintln!("wrote {} files to {}", written.len(), outdir.display());
            Ok(())
        }
        Command::Figure {
            figure,
            outdir,
            dt,
            t_max,
        } => {
            for path in write_figure(figure, &outdir, t_max, dt)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Verify { config, dt, t_max } => {
            let devs = match config {
                Some(path) => {
                    let cfg = load_config(&path)?.with_time(t_max, dt)?;
                    vec![deviation(&path.display().to_string(), &cfg.job()?)?]
                }
                None => verify_reference()?,
            };
            print!("{}", report(&devs));
            let _ = std::io::stdout().flush();
            let failed = devs.iter().filter(|d| !d.passes()).count();
            if failed > 0 {
                return Err(CliError::Acceptance(format!(
                    "{failed} configuration(s) deviate from the oracle by 1e-8 or more"
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(2);
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
