use std::fs;
use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use xenakis_core::ingest::{
    parse_feature_collection_bytes, BoundingBox, CacheHandle, FetcherConfig, RegionFetcher, StreetFilter, DEFAULT_TTL,
};
use xenakis_core::orientation::HistogramDocument;
use xenakis_core::pipeline::{histogram_from_geojson, sonify_geojson, PipelineConfig};
use xenakis_core::rhythm::{bjorklund, evenness};
use xenakis_core::synth::{encode_midi_with, encode_wav};
use xenakis_service::ServiceConfig;

use crate::args::{Command, Format, ProviderArgs, Source};
use crate::error::CliError;

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Fetch { bbox, out, provider } => {
            let doc = fetch(&provider, &bbox)?;
            write_output(out.as_deref(), doc.as_bytes())
        }
        Command::Histogram {
            source,
            bins,
            format,
            highway,
            provider,
        } => {
            let doc = read_source(&source, &provider)?;
            let cfg = PipelineConfig {
                bins,
                filter: filter(highway.as_deref()),
                ..PipelineConfig::default()
            };
            let (hist, _) = histogram_from_geojson(&doc, &cfg)?;
            let doc = HistogramDocument::new(&hist);
            let text = match format {
                Format::Json => doc.to_json(),
                Format::Csv => doc.to_csv(),
            };
            write_output(None, text.as_bytes())
        }
        Command::Sonify {
            source,
            bins,
            bpm,
            out,
            midi,
            pattern,
            highway,
            provider,
        } => {
            let doc = read_source(&source, &provider)?;
            let cfg = PipelineConfig {
                bins,
                bpm,
                filter: filter(highway.as_deref()),
                ..PipelineConfig::default()
            };
            let s = sonify_geojson(&doc, &cfg)?;
            write_file(&out, &encode_wav(&s.audio))?;
            if let Some(path) = midi {
                write_file(&path, &encode_midi_with(&s.pattern, bpm, &cfg.mapping))?;
            }
            if let Some(path) = pattern {
                let text = format!("{}\n", s.pattern.text());
                write_output(Some(&path), text.as_bytes())?;
            }
            Ok(())
        }
        Command::Euclid { k, n, evenness: show } => {
            let p = bjorklund(k, n).map_err(|e| CliError::usage("bad_params", e.to_string()))?;
            let mut line = p.notation();
            if show {
                match evenness(&p) {
                    Ok(e) => line.push_str(&format!(" {e:.6}")),
                    Err(_) => line.push_str(" -"),
                }
            }
            line.push('\n');
            write_output(None, line.as_bytes())
        }
        Command::Serve {
            port,
            host,
            provider,
            loop_capacity,
            cors_origins,
        } => {
            let mut cfg = ServiceConfig {
                provider_url: provider.provider,
                loop_capacity,
                cors_origins,
                ..ServiceConfig::default()
            };
            if let Some(dir) = provider.cache_dir {
                cfg.cache_dir = dir;
            }
            serve(SocketAddr::new(host, port), cfg)
        }
    }
}

fn serve(addr: SocketAddr, cfg: ServiceConfig) -> Result<(), CliError> {
    xenakis_service::run_blocking(addr, cfg, |local| eprintln!("xenakis: listening on http://{local}")).map_err(|e| {
        CliError {
            exit: crate::error::EXIT_PROVIDER,
            code: "serve".into(),
            message: format!("service on {addr}: {e}"),
        }
    })
}

fn filter(highway: Option<&str>) -> StreetFilter {
    highway.map(StreetFilter::parse).unwrap_or_default()
}

fn fetcher(provider: &ProviderArgs) -> Result<RegionFetcher, CliError> {
    let dir = provider.cache_dir.clone().unwrap_or_else(CacheHandle::default_dir);
    let cache = CacheHandle::open(&dir, DEFAULT_TTL).map_err(|e| CliError::io(&format!("cache {}", dir.display()), e))?;
    Ok(RegionFetcher::new(cache, FetcherConfig::default()))
}

fn fetch(provider: &ProviderArgs, bbox: &BoundingBox) -> Result<String, CliError> {
    Ok(fetcher(provider)?.fetch(bbox, &provider.provider)?)
}

fn read_source(source: &Source, provider: &ProviderArgs) -> Result<String, CliError> {
    match (&source.input, &source.bbox) {
        (Some(path), _) => read_input(path),
        (None, Some(bbox)) => fetch(provider, bbox),
        (None, None) => Err(CliError::usage("usage", "one of --input or --bbox is required")),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|e| CliError::io("stdin", e))?;
        buf
    } else {
        fs::read(path).map_err(|e| CliError::io(&path.display().to_string(), e))?
    };
    String::from_utf8(bytes).map_err(|e| {
        let err = parse_feature_collection_bytes(e.as_bytes()).expect_err("invalid UTF-8 is malformed");
        CliError::input("malformed_document", format!("{}: {err}", path.display()))
    })
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(&path.display().to_string(), e))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => write_file(&p.to_path_buf(), bytes),
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("stdout", e))
        }
    }
}
