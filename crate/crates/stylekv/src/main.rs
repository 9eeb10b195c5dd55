use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stylekv::commands;
use stylekv::record::RunSettings;
use stylekv_core::embedding::DEFAULT_ALPHA_GRID;
use stylekv_core::transition::Window;

#[derive(Parser)]
#[command(name = "stylekv", version, about = "Style transitions by KV-cache swapping on a toy decoder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the toy model from a JSON config and write its weights file.
    BuildModel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate whole utterances over a range of interpolation strengths.
    InterpSweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = DEFAULT_ALPHA_GRID)]
        alphas: Vec<f32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one mid-utterance transition and write a run record.
    Transition {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 64)]
        t_star: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Window size or `full`.
        #[arg(long, default_value = "8")]
        window: Window,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        alpha: f32,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f32>,
        /// Replace the style memory only, without swapping the cache prefix.
        #[arg(long)]
        naive: bool,
        #[arg(long, default_value_t = 128)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample at this temperature instead of decoding greedily.
        #[arg(long)]
        temperature: Option<f32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full method over a window × k grid.
    Grid {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,full")]
        windows: Vec<Window>,
        #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        alpha: f32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write attention-variance and attention-map CSVs for a run record.
    Diagnose {
        #[arg(long)]
        run: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::BuildModel { config, out } => commands::cmd_build_model(&config, &out),
        Command::InterpSweep { model, alphas, out } => commands::cmd_interp_sweep(&model, &alphas, &out),
        Command::Transition {
            model,
            t_star,
            k,
            window,
            alpha,
            beta,
            naive,
            steps,
            seed,
            temperature,
            out,
        } => {
            let settings = RunSettings {
                t_star,
                k,
                window,
                alpha,
                beta,
                naive,
                steps,
                seed,
                temperature,
                ..RunSettings::default()
            };
            commands::cmd_transition(&model, &settings, &out)
        }
        Command::Grid {
            model,
            windows,
            ks,
            alpha,
            out,
        } => commands::cmd_grid(&model, &windows, &ks, alpha, &out),
        Command::Diagnose { run, out } => commands::cmd_diagnose(&run, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
