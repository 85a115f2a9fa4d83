/*
Copyright 2026 The segman-rs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
use clap::{Parser, Subcommand};
use log::LevelFilter;
use segman_cli::{cmd_bench, cmd_render, cmd_solve, cmd_validate, BenchArgs, SolveArgs, EXIT_IO};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

/// Sequential pick-and-place puzzle planner.
#[derive(Parser)]
#[command(name = "segman", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a scene and write the solution JSON.
    Solve {
        scene: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Seconds before the planner gives up.
        #[arg(long)]
        time_budget: Option<f64>,
        /// JSON file of solver parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Solution file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Log every subgoal and search step.
        #[arg(long)]
        trace: bool,
        /// Include the wall time in the solution file.
        #[arg(long)]
        with_timing: bool,
    },
    /// Check a plan against a scene.
    Validate { scene: PathBuf, plan: PathBuf },
    /// Draw a scene and a plan as SVG.
    Render {
        scene: PathBuf,
        plan: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every task of a directory over several seeds.
    Bench {
        #[arg(long, default_value = "tasks")]
        tasks: PathBuf,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_logging(trace: bool) {
    let level = if trace {
        LevelFilter::Trace
    } else {
        std::env::var("SEGMAN_LOG")
            .ok()
            .and_then(|v| LevelFilter::from_str(&v).ok())
            .unwrap_or(LevelFilter::Off)
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let trace = matches!(cli.command, Command::Solve { trace: true, .. });
    init_logging(trace);
    let result = match cli.command {
        Command::Solve {
            scene,
            seed,
            time_budget,
            params,
            out,
            svg,
            with_timing,
            ..
        } => cmd_solve(&SolveArgs {
            scene,
            seed,
            time_budget,
            params,
            out,
            svg,
            with_timing,
        }),
        Command::Validate { scene, plan } => cmd_validate(&scene, &plan),
        Command::Render { scene, plan, out } => cmd_render(&scene, plan.as_deref(), out.as_deref()),
        Command::Bench {
            tasks,
            seeds,
            time_budget,
            params,
            out,
        } => cmd_bench(&BenchArgs {
            tasks,
            seeds,
            time_budget,
            params,
            out,
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO as u8)
        }
    }
}
