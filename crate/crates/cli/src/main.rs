use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use coupled_cli::{cmd_check, cmd_demo, cmd_list, cmd_solve, Flags, Run, EXIT_BAD_INPUT};
use coupled_core::render_trace_csv;

#[derive(Parser, Debug)]
#[command(name = "coupled", version, about = "Check and solve coupled fixed-point problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify the hypotheses of the problem's existence theorem on samples
    Check {
        /// Problem file or built-in name
        problem: String,
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        out: Output,
    },
    /// Run the constructive iteration from one or more starts
    Solve {
        problem: String,
        /// Start point; repeat for a multi-start run
        #[arg(long, num_args = 2, value_names = ["X0", "Y0"], allow_hyphen_values = true)]
        start: Vec<String>,
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        out: Output,
    },
    /// Check and solve a built-in problem and summarise what it reproduces
    Demo {
        name: String,
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        out: Output,
    },
    /// List built-in problems
    List,
}

#[derive(clap::Args, Debug)]
struct Output {
    /// Write the iteration trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON report to a file, or to standard error with `-`
    #[arg(long)]
    json: Option<PathBuf>,
}

fn emit(run: &Run, out: Option<&Output>) -> anyhow::Result<()> {
    print!("{}", run.summary);
    std::io::stdout().flush()?;
    let Some(out) = out else { return Ok(()) };
    if let Some(path) = &out.json {
        let json = serde_json::to_string_pretty(&run.report)?;
        if path.as_os_str() == "-" {
            eprintln!("{json}");
        } else {
            std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if let (Some(path), Some(trace)) = (&out.trace, &run.trace) {
        std::fs::write(path, render_trace_csv(trace)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (result, out) = match &cli.command {
        Command::Check { problem, flags, out } => (cmd_check(problem, flags), Some(out)),
        Command::Solve { problem, start, flags, out } => {
            let starts: Vec<(String, String)> = start.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
            (cmd_solve(problem, &starts, flags), Some(out))
        }
        Command::Demo { name, flags, out } => (cmd_demo(name, flags), Some(out)),
        Command::List => (Ok(cmd_list()), None),
    };
    match result {
        Ok(run) => match emit(&run, out) {
            Ok(()) => ExitCode::from(run.report.exit_code as u8),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_BAD_INPUT as u8)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_BAD_INPUT as u8)
        }
    }
}
