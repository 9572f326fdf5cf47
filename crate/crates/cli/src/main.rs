mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use animlayout::st::StStage;

/// Generate, validate, render, evaluate and extract animated layouts.
#[derive(Debug, Parser)]
#[command(name = "animlayout", version)]
struct Cli {
    /// TOML config file (defaults to $ANIMLAYOUT_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap for parallel work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StageArg {
    Full,
    Banner,
    Mainground,
    Animation,
}

impl From<StageArg> for StStage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Full => StStage::Full,
            StageArg::Banner => StStage::Banner,
            StageArg::Mainground => StStage::Mainground,
            StageArg::Animation => StStage::Animation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Mock,
    Http,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate ST files; prints one JSON report per file.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "full")]
        stage: StageArg,
        /// Prompt whose quoted strings must appear as text elements.
        #[arg(long)]
        prompt: Option<String>,
    },
    /// Run the three-stage generator and write st.json and trace.json.
    Generate {
        /// Description of the banners.
        #[arg(long)]
        banner_prompt: String,
        /// Description of the foreground and background.
        #[arg(long)]
        mainground_prompt: String,
        /// Overrides the backend kind from the config (default mock).
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Completion endpoint for the http backend.
        #[arg(long)]
        endpoint: Option<String>,
        /// Directory of canned responses for the mock backend.
        #[arg(long)]
        canned_dir: Option<PathBuf>,
        /// Ask for reasoning and structured output in one completion.
        #[arg(long)]
        single_call: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a document to PNG frames plus manifest.json.
    Render {
        st_path: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Pixels per canvas unit (default 1).
        #[arg(long)]
        scale: Option<f64>,
        /// TrueType/OpenType font instead of the built-in bitmap font.
        #[arg(long)]
        font: Option<PathBuf>,
        /// Images named by the SHA-256 of the background caption.
        #[arg(long)]
        background_dir: Option<PathBuf>,
    },
    /// Compare generated documents with real ones.
    Eval {
        #[arg(long)]
        gen: PathBuf,
        #[arg(long)]
        real: PathBuf,
        /// Lines of `<gen file> <real file>`; default pairs identical file names.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        include_banner_objects: bool,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a directory of PGM id masks into Animation ST.
    Extract {
        mask_dir: PathBuf,
        /// Keyframe tolerance in pixels (default 2).
        #[arg(long)]
        tol: Option<f64>,
        /// Write the Animation ST here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), commands::Failure> {
    use commands::Classify;
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .env()?;
    }
    let cfg = config::Config::resolve(cli.config.as_deref()).env()?;
    match cli.command {
        Command::Validate { paths, stage, prompt } => commands::validate(&cfg, &paths, stage.into(), prompt.as_deref()),
        Command::Generate {
            banner_prompt,
            mainground_prompt,
            backend,
            endpoint,
            canned_dir,
            single_call,
            out,
        } => commands::generate(
            &cfg,
            commands::GenerateArgs {
                banner_prompt,
                mainground_prompt,
                http: backend.map(|b| b == BackendArg::Http),
                endpoint,
                canned_dir,
                single_call,
                out,
            },
        ),
        Command::Render {
            st_path,
            out_dir,
            scale,
            font,
            background_dir,
        } => commands::render(&cfg, &st_path, &out_dir, scale, font, background_dir),
        Command::Eval {
            gen,
            real,
            pairs,
            include_banner_objects,
            out,
        } => commands::eval(&cfg, &gen, &real, pairs.as_deref(), include_banner_objects, out.as_deref()),
        Command::Extract { mask_dir, tol, out } => commands::extract(&cfg, &mask_dir, tol, out.as_deref()),
    }
}
