//! `autocam`: command-line pipeline from glimpse scores to NFOV videos and
//! evaluation reports.

mod config;
mod run;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "autocam", version, about = "Virtual camera control for 360° video")]
struct Cli {
    /// Pipeline config file (TOML); command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridSource {
    /// Video duration in seconds.
    #[arg(long, conflicts_with = "frames")]
    duration: Option<f64>,
    /// Frame directory to take the duration from.
    #[arg(long)]
    frames: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the glimpse lattice for a video.
    Grid {
        #[command(flatten)]
        source: GridSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Produce a score map.
    #[command(subcommand)]
    Score(ScoreCommand),
    /// Train a capture-worthiness model, leaving one 360° video out.
    Train {
        /// HumanCam clip features (positives).
        #[arg(long)]
        humancam: PathBuf,
        /// Glimpse features of all 360° videos (negative pool).
        #[arg(long)]
        glimpses: PathBuf,
        /// Video whose glimpses are excluded from the negatives.
        #[arg(long)]
        heldout: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select the top-K smooth trajectories from a score map.
    Solve {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate baseline trajectories.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Turn discrete trajectories into per-frame camera directions.
    Interp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        fps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an NFOV video along a continuous trajectory.
    Render {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        /// Which trajectory of the file to render.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate trajectories or generated videos.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Distribution of scores over latitude and longitude.
    AnalyzeScores {
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the annotation server.
    Serve {
        /// Directory with one frame directory per video.
        #[arg(long)]
        videos: PathBuf,
        /// Where finalized trajectories are written.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[derive(Subcommand)]
enum ScoreCommand {
    /// Validate and normalize an existing score file.
    File {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        source: GridSource,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score glimpses with the built-in contrast/motion stand-in.
    Standin {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        video_id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score glimpse features with a trained model.
    Model {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        source: GridSource,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BaselineGrid {
    /// Score map whose lattice (and video id) to use.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[command(flatten)]
    source: GridSource,
    #[arg(long, default_value = "video")]
    video_id: String,
}

#[derive(Subcommand)]
enum BaselineCommand {
    /// Random walks starting at the panorama center.
    Center {
        #[command(flatten)]
        grid: BaselineGrid,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// One static eye-level camera per lattice longitude.
    Eyelevel {
        #[command(flatten)]
        grid: BaselineGrid,
        #[arg(long)]
        out: PathBuf,
    },
    /// Independent per-step sampling from the score softmax.
    Nostitch {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Similarity of generated trajectories to human-edited ones.
    Humanedit {
        /// `NAME=FILE`; repeat for several methods or files.
        #[arg(long = "method", num_args = 1.., required = true)]
        methods: Vec<String>,
        /// Human-edited trajectory files.
        #[arg(long, num_args = 1.., required = true)]
        humans: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Agreement between human annotators.
    Consistency {
        #[arg(long, num_args = 1.., required = true)]
        humans: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated error of telling generated from human video.
    Distinguish {
        /// `NAME=FEATURES`; repeat for several methods.
        #[arg(long = "method", num_args = 1.., required = true)]
        methods: Vec<String>,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-video-out ranking by human-likeness.
    Likeness {
        #[arg(long = "method", num_args = 1.., required = true)]
        methods: Vec<String>,
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-domain category classification accuracy.
    Transfer {
        /// Generated-video features with class labels.
        #[arg(long)]
        auto: PathBuf,
        /// Human-video features with class labels.
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
