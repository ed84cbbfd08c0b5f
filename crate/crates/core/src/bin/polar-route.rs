use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polar_route::config::RunConfig;
use polar_route::pipeline::{self, RouteOptions};
use polar_route::planner::Objective;

#[derive(Parser)]
#[command(name = "polar-route", version, about = "Mesh-based route planning through sea ice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the environmental mesh and write it as JSON.
    MeshBuild {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "mesh.json")]
        out: PathBuf,
    },
    /// Plan between two named waypoints and write GeoJSON.
    Route {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        objective: Option<Objective>,
        #[arg(long)]
        smooth: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of total time per smoothing iteration.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Use a stored mesh instead of rebuilding it.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
    /// Check routes against unaveraged ice data.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        routes: PathBuf,
        #[arg(long, num_args = 1..)]
        raw: Option<Vec<PathBuf>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dijkstra and smoothed times for many pairs, as CSV.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// JSON array of [from, to] pairs; defaults to the config's pairs.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the crossing objective between two touching cells.
    CrossingTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        src: usize,
        #[arg(long)]
        dst: usize,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> polar_route::Result<()> {
    match cli.command {
        Command::MeshBuild { config, out: path } => {
            let cfg = RunConfig::read(&config)?;
            pipeline::cmd_mesh_build(&cfg, &path, out).map(drop)
        }
        Command::Route {
            config,
            from,
            to,
            objective,
            smooth,
            out: path,
            trace,
            mesh,
        } => {
            let cfg = RunConfig::read(&config)?;
            let opts = RouteOptions {
                from,
                to,
                objective,
                smooth,
                out: path,
                trace,
                mesh,
            };
            pipeline::cmd_route(&cfg, &opts, out).map(drop)
        }
        Command::Validate {
            config,
            routes,
            raw,
            out: path,
        } => {
            let cfg = RunConfig::read(&config)?;
            pipeline::cmd_validate(&cfg, &routes, raw.as_deref(), path.as_deref(), out).map(drop)
        }
        Command::Compare {
            config,
            pairs,
            mesh,
            out: path,
        } => {
            let cfg = RunConfig::read(&config)?;
            pipeline::cmd_compare(&cfg, pairs.as_deref(), mesh.as_deref(), path.as_deref(), out).map(drop)
        }
        Command::CrossingTable {
            config,
            src,
            dst,
            samples,
            mesh,
        } => {
            let cfg = RunConfig::read(&config)?;
            pipeline::cmd_crossing_table(&cfg, mesh.as_deref(), src, dst, samples, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
