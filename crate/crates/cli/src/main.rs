use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rqc_cli::sweep::{run_sweep, SweepConfig};
use rqc_cli::{
    execute, replay, BoundsArgs, CliError, FrameArgs, GapArgs, McArgs, Run, RunRecord, TqoArgs,
};

/// Spectral gaps, frame potentials and bound calculators for local random
/// quantum circuits.
#[derive(Parser)]
#[command(name = "rqc", version)]
struct Cli {
    /// Print the run record as one JSON line instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// λ₂ of the local or parallel moment operator and the Hamiltonian gap.
    Gap(GapArgs),
    /// Column sum and frame-operator deviation of the permutation frame.
    Frame(FrameArgs),
    /// Monte Carlo frame potential of a random circuit ensemble.
    Mc(McArgs),
    /// Local indistinguishability of two evolved product states.
    Tqo(TqoArgs),
    /// Evaluates a closed-form bound, e.g. `bounds converse n=10 t=4 d=2 eps=0.1`.
    Bounds(BoundsArgs),
    /// Runs a grid of configurations; JSON Lines on stdout, CSV via --out.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-runs JSON Lines run records and checks that results are reproduced.
    Replay {
        /// Record file; `-` reads standard input.
        file: PathBuf,
    },
}

fn emit(record: &RunRecord, json: bool) {
    if json {
        println!("{}", record.to_json_line());
    } else {
        println!("{}", record.render_text());
    }
}

fn run_replay(file: &PathBuf, json: bool) -> Result<u8, CliError> {
    let reader: Box<dyn BufRead> = if file.as_os_str() == "-" {
        Box::new(std::io::stdin().lock())
    } else {
        let f = std::fs::File::open(file)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
        Box::new(std::io::BufReader::new(f))
    };
    let mut worst = 0;
    for line in reader.lines() {
        let line = line.map_err(|e| CliError::Usage(format!("read failed: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = RunRecord::from_json(&line)?;
        match replay(&record) {
            Ok(fresh) => emit(&fresh, json),
            Err(e) => {
                eprintln!("error: {e}");
                worst = worst.max(e.exit_code());
            }
        }
    }
    Ok(worst)
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let run = match cli.command {
        Command::Gap(a) => Run::Gap(a),
        Command::Frame(a) => Run::Frame(a),
        Command::Mc(a) => Run::Mc(a),
        Command::Tqo(a) => Run::Tqo(a),
        Command::Bounds(a) => Run::Bounds(a),
        Command::Sweep { config, out } => {
            let config = SweepConfig::from_file(&config)?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let code = run_sweep(&config, &mut lock, out.as_deref())?;
            lock.flush().ok();
            return Ok(code);
        }
        Command::Replay { file } => return run_replay(&file, cli.json),
    };
    let record = execute(&run)?;
    emit(&record, cli.json);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
