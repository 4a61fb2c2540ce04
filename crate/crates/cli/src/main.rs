use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use memnet_core::Split;

mod commands;

#[derive(Parser)]
#[command(
    name = "memnet",
    version,
    about = "Memristive denoise-and-recognise network simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the four canonical MNIST files and print class counts.
    Check {
        #[arg(long)]
        mnist_dir: PathBuf,
    },
    /// Write a noisy copy of one split in IDX format.
    Noise {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, value_enum, default_value_t = SplitArg::Train)]
        split: SplitArg,
        /// Output directory; receives the canonical file names.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the two cellular layers on one image and dump the current map.
    Preprocess {
        /// MNIST directory to pick the image from (with --index).
        #[arg(long)]
        mnist_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SplitArg::Test)]
        split: SplitArg,
        /// Image index within the split.
        #[arg(long)]
        index: Option<usize>,
        /// Read the image from a PGM file instead.
        #[arg(long, conflicts_with_all = ["mnist_dir", "index"])]
        pgm: Option<PathBuf>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = memnet_core::preprocess::DEFAULT_EDGE_THRESHOLD_MV)]
        edge_threshold: f64,
        /// Output prefix; writes <out>.txt and <out>.pgm.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the drift layer on the noisy training split and save the model.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = memnet_core::preprocess::DEFAULT_EDGE_THRESHOLD_MV)]
        edge_threshold: f64,
        /// Constant window factor on the drift slope, in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        window_factor: f64,
        /// Train the control model on raw noisy crops (no cellular layers).
        #[arg(long)]
        control: bool,
        #[arg(long)]
        model: PathBuf,
        /// Use only the first N training images.
        #[arg(long)]
        images: Option<usize>,
    },
    /// Classify the noisy test split and write the confusion matrix.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        model: PathBuf,
        /// Feed cellular-layer output (scaled by 1/10) to the drift layer.
        #[arg(long)]
        preprocess_inference: bool,
        /// Confusion matrix CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use only the first N test images.
        #[arg(long)]
        images: Option<usize>,
    },
    /// Print the timing/throughput model.
    Perf {
        /// Clock frequency in Hz.
        #[arg(long, default_value_t = memnet_core::perf::DEFAULT_CLOCK_HZ)]
        freq: f64,
        /// Number of training images.
        #[arg(long, default_value_t = memnet_core::perf::DEFAULT_TRAIN_IMAGES)]
        images: u64,
        #[arg(long, default_value_t = 28)]
        height: usize,
        #[arg(long, default_value_t = 28)]
        width: usize,
        /// Emit key=value lines instead of the aligned table.
        #[arg(long)]
        kv: bool,
    },
    /// Accuracy and per-class totals of a confusion-matrix CSV.
    Accuracy {
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Directory with the four canonical MNIST IDX files.
    #[arg(long)]
    mnist_dir: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct NoiseArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Gaussian noise standard deviation in pixel units.
    #[arg(long, default_value_t = memnet_core::noise::DEFAULT_SIGMA)]
    sigma: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
