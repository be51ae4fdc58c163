use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parity_opt_cli::commands;

/// Optimal classifiers under the demographic parity constraint, from
/// group-labeled score data.
#[derive(Parser)]
#[command(name = "parity-opt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the fair score transform from a score CSV and write the model.
    Fit {
        /// Input CSV with header score,group[,label][,weight].
        #[arg(long = "in")]
        input: PathBuf,
        /// Output model JSON.
        #[arg(long)]
        out: PathBuf,
        /// Barycenter discretization grid.
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Solve the optimal threshold for a linear-fractional measure.
    Threshold {
        #[arg(long)]
        model: PathBuf,
        /// Measure spec JSON: {"n": [..], "d": [..], "label_prior": x} or
        /// {"preset": "accuracy"|"f_beta"|"jaccard"|"am"|"recall", "beta": b}.
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a fitted model on a score CSV; the report goes to stdout.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        measure: PathBuf,
    },
    /// Reduce a two-group unaware joint to the aware problem and solve it.
    ReduceUnaware {
        /// Joint JSON: {"points": [...], "p1": [...], "p2": [...],
        /// "priors": [p1, p2], "eta": [...]}.
        #[arg(long)]
        joint: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit curve samples (curve,x,y CSV) for CDF/threshold plots.
    PlotData {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit { input, out, grid } => commands::cmd_fit(&input, &out, grid),
        Command::Threshold {
            model,
            measure,
            out,
        } => commands::cmd_threshold(&model, &measure, &out),
        Command::Evaluate {
            model,
            input,
            measure,
        } => commands::cmd_evaluate(&model, &input, &measure).map(|report| {
            println!("{report}");
        }),
        Command::ReduceUnaware { joint, out } => commands::cmd_reduce_unaware(&joint, &out),
        Command::PlotData { model, out } => commands::cmd_plot_data(&model, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
