use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xenakis_core::ingest::{BoundingBox, CACHE_DIR_ENV, PROVIDER_URL_ENV};
use xenakis_core::synth::{MAX_BPM, MIN_BPM};
use xenakis_service::{DEFAULT_LOOP_CAPACITY, DEFAULT_PROVIDER_URL, LOOP_CAPACITY_ENV, MAX_BINS};

#[derive(Debug, Parser)]
#[command(name = "xenakis", version, about = "Turn street orientations into drum-and-bass loops")]
pub struct Cli {
    /// Report failures as one JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Download a region from the map data provider as GeoJSON.
    Fetch {
        #[arg(long, value_parser = parse_bbox)]
        bbox: BoundingBox,
        /// Output file; `-` or absent for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Print the orientation histogram of a region.
    Histogram {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 16, value_parser = parse_bins)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Street kinds to keep: `all` or a comma separated list.
        #[arg(long)]
        highway: Option<String>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Render a region as a WAV loop, optionally with MIDI and the pattern text.
    Sonify {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 16, value_parser = parse_bins)]
        bins: usize,
        #[arg(long, default_value_t = 120.0, value_parser = parse_bpm)]
        bpm: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        midi: Option<PathBuf>,
        /// Write the pattern text to this file, `-` for stdout.
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long)]
        highway: Option<String>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Print the Euclidean rhythm E(k, n).
    Euclid {
        k: usize,
        n: usize,
        /// Also print the evenness score.
        #[arg(long)]
        evenness: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long, env = LOOP_CAPACITY_ENV, default_value_t = DEFAULT_LOOP_CAPACITY)]
        loop_capacity: usize,
        /// Allowed browser origin; repeatable. Any origin when absent.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// GeoJSON file, `-` for stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Fetch `min_lon,min_lat,max_lon,max_lat` from the provider instead.
    #[arg(long, value_parser = parse_bbox)]
    pub bbox: Option<BoundingBox>,
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    #[arg(long, env = PROVIDER_URL_ENV, default_value = DEFAULT_PROVIDER_URL)]
    pub provider: String,
    #[arg(long, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn parse_bbox(s: &str) -> Result<BoundingBox, String> {
    BoundingBox::parse_csv(s).map_err(|e| e.to_string())
}

fn parse_bins(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 4 || !n.is_multiple_of(2) || n > MAX_BINS {
        return Err(format!("must be even and between 4 and {MAX_BINS}"));
    }
    Ok(n)
}

fn parse_bpm(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(MIN_BPM..=MAX_BPM).contains(&v) {
        return Err(format!("must lie in [{MIN_BPM}, {MAX_BPM}]"));
    }
    Ok(v)
}
