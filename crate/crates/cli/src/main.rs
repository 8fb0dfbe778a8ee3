use std::path::PathBuf;

use clap::{Parser, Subcommand};
use netrepr::synth::PlantedConfig;
use netrepr_cli::commands::{self, DensityAxes};

#[derive(Parser)]
#[command(name = "netrepr", version, about = "Representation learning and attribution for multivariate networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run feature extraction, training, simplification and attribution,
    /// then save the session.
    Run {
        config: PathBuf,
        /// Directory that receives the session directory.
        #[arg(long, default_value = "sessions")]
        sessions: PathBuf,
    },
    /// Serve saved sessions over WebSocket.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "sessions")]
        sessions: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Export a view of a saved session (.png raster or .json document).
    Export {
        /// Session directory.
        #[arg(long)]
        session: PathBuf,
        /// density, legend, summary, representation, shap, layout,
        /// composites or histograms.
        #[arg(long)]
        view: String,
        #[arg(long)]
        out: PathBuf,
        /// Density x axis: representation, attribute:<name>, shap:<name>
        /// or composite:<index>.
        #[arg(long)]
        x: Option<String>,
        /// Density y axis (same sources as --x).
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        /// Use the equal-weighted class ratio.
        #[arg(long)]
        equal_weighted: bool,
    },
    /// Write a synthetic dataset with target = σ(2a − 3b + ε).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        nodes: usize,
        #[arg(long, default_value_t = 10)]
        attributes: usize,
        #[arg(long, default_value_t = 6.0)]
        mean_degree: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, sessions } => commands::run(&config, &sessions).map(|_| ()),
        Command::Serve { port, sessions, host } => commands::serve(&host, port, &sessions),
        Command::Export {
            session,
            view,
            out,
            x,
            y,
            width,
            height,
            equal_weighted,
        } => commands::export(
            &session,
            &view,
            &out,
            DensityAxes {
                x,
                y,
                width,
                height,
                equal_weighted,
            },
        ),
        Command::Synth {
            out,
            nodes,
            attributes,
            mean_degree,
            noise_sd,
            seed,
        } => commands::synth(
            &out,
            &PlantedConfig {
                nodes,
                attributes,
                mean_degree,
                noise_sd,
                seed,
            },
        ),
    }
}
