use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use patchkit_cli::{commands, exit_code, load_run, RawRun, StageError};

#[derive(Parser)]
#[command(
    name = "patchkit",
    version,
    about = "Microstrip patch antenna design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run file (TOML).
    #[arg(long)]
    run: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `section.key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Cell-step budget per solver run; overrides `simulation.budget`.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print and save the patch design record.
    Design(RunArgs),
    /// Sweep the stacking displacement with the coupled-resonator model.
    Tune(RunArgs),
    /// Export per-layer copper masks.
    Masks(RunArgs),
    /// Run the full design-to-pattern pipeline.
    Simulate(RunArgs),
    /// Re-run `simulate` over values of one run-file key.
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Run-file key to vary, for example `overrides.displacement_mm`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Re-render an S11, tune or pattern CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(args: &RunArgs) -> Result<RawRun, StageError> {
    let mut sets = args.set.clone();
    if let Some(out) = &args.out {
        sets.push(format!(
            "output.dir={}",
            toml_string(&out.display().to_string())
        ));
    }
    if let Some(b) = args.budget {
        sets.push(format!("simulation.budget={b}"));
    }
    load_run(&args.run, &sets).map_err(|error| StageError {
        stage: "run file",
        error,
    })
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn list(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn dispatch(cmd: Command) -> Result<(), StageError> {
    match cmd {
        Command::Design(a) => {
            let (text, files) = commands::cmd_design(&load(&a)?)?;
            print!("{text}");
            list(&files);
        }
        Command::Tune(a) => {
            let r = commands::cmd_tune(&load(&a)?)?;
            print!("{}", r.summary);
            list(&r.files);
        }
        Command::Masks(a) => list(&commands::cmd_masks(&load(&a)?)?),
        Command::Simulate(a) => {
            let b = commands::cmd_simulate(&load(&a)?)?;
            print!("{}", b.summary);
            list(&b.files);
        }
        Command::Sweep {
            args,
            param,
            values,
        } => {
            let (rows, csv) = commands::cmd_sweep(&load(&args)?, &param, &values)?;
            for r in &rows {
                match &r.outcome {
                    Ok(_) => println!("{} = {}: ok ({})", param, r.value, r.dir.display()),
                    Err(e) => println!("{} = {}: failed: {e}", param, r.value),
                }
            }
            println!("{}", csv.display());
        }
        Command::Plot { csv, out } => println!("{}", commands::cmd_plot(&csv, &out)?.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error {e}");
            ExitCode::from(exit_code(&e.error) as u8)
        }
    }
}
