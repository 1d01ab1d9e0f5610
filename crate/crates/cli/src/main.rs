use clap::Parser;
use std::process::ExitCode;

use swarmjam_cli::config::{Cli, Command};
use swarmjam_cli::{plot, run};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => run::cmd_solve(args),
        Command::Sweep(args) => run::cmd_sweep(args),
        Command::Compare(args) => {
            let sweep = swarmjam_cli::config::SweepArgs {
                m_values: args.m_values.clone(),
                k: args.k,
                num_seeds: args.num_seeds,
                seed: args.seed,
                schemes: vec![
                    swarmjam_cli::config::SchemeArg::Proposed,
                    swarmjam_cli::config::SchemeArg::Baseline1,
                    swarmjam_cli::config::SchemeArg::Baseline2,
                ],
                out: args.out.clone(),
                jobs: args.jobs,
                overrides: args.overrides.clone(),
            };
            run::cmd_sweep(&sweep)
        }
        Command::Plot(args) => plot::cmd_plot(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
