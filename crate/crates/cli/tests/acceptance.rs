//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p xenakis-cli --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::io::{BufRead, BufReader};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use xenakis_core::ingest::stub::StubProvider;
use xenakis_core::ingest::{parse_feature_collection, parse_feature_collection_bytes, GeoPoint, ParseError, StreetSegment};
use xenakis_core::orientation::{build_histogram, normalize};
use xenakis_core::pipeline::{histogram_from_geojson, sonify_geojson, PipelineConfig};
use xenakis_core::rhythm::{bjorklund, MappingConfig, RhythmPattern};
use xenakis_core::synth::{encode_wav, render_loop, render_voice, Voice, VoiceParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const GRID_BBOX: [f64; 4] = [16.36, 48.19, 16.38, 48.21];
const OCEAN_BBOX: [f64; 4] = [-30.0, 30.0, -29.9, 30.1];

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fs::read_to_string(fixtures().join(name)).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn golden_hash() -> String {
    fixture("golden/grid_loop.wav.sha256")
        .split_whitespace()
        .next()
        .unwrap()
        .to_string()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Random street segments around a random city centre.
fn random_segments(rng: &mut ChaCha8Rng) -> Vec<StreetSegment> {
    let lat0 = uniform(rng) * 140.0 - 70.0;
    let lon0 = uniform(rng) * 340.0 - 170.0;
    let count = 1 + (rng.next_u64() % 300) as usize;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = GeoPoint::new(lat0 + uniform(rng) * 0.05, lon0 + uniform(rng) * 0.05).unwrap();
        let b = GeoPoint::new(a.lat + (uniform(rng) - 0.5) * 0.01, a.lon + (uniform(rng) - 0.5) * 0.01).unwrap();
        if let Some(s) = StreetSegment::between(a, b) {
            out.push(s);
        }
    }
    out
}

fn random_bins(rng: &mut ChaCha8Rng) -> usize {
    4 + 2 * (rng.next_u64() % 31) as usize
}

fn symmetry_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for set in 0..1000 {
        let segs = random_segments(&mut rng);
        let n = random_bins(&mut rng);
        let h = build_histogram(&segs, n).map_err(|e| e.to_string())?;
        let b = h.bins();
        for i in 0..n / 2 {
            ensure(b[i].to_bits() == b[i + n / 2].to_bits(), || {
                format!("set {set}: bins[{i}]={} bins[{}]={}", b[i], i + n / 2, b[i + n / 2])
            })?;
        }
        let rev: Vec<StreetSegment> = segs.iter().map(|s| s.reversed().unwrap()).collect();
        let hr = build_histogram(&rev, n).map_err(|e| e.to_string())?;
        ensure(hr == h, || format!("set {set}: reversing segments changed the histogram"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2}s, limit 10s"))?;
    Ok(format!("1000 sets, exact symmetry and reversal invariance, {secs:.2}s"))
}

fn mass_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for set in 0..1000 {
        let segs = random_segments(&mut rng);
        let n = random_bins(&mut rng);
        let h = build_histogram(&segs, n).map_err(|e| e.to_string())?;
        let total: f64 = h.bins().iter().sum();
        let lengths: f64 = segs.iter().map(|s| s.length_m).sum();
        let rel = (total - 2.0 * lengths).abs() / (2.0 * lengths);
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || format!("set {set}: relative error {rel:e}"))?;
    }
    Ok(format!("1000 sets, worst relative error {worst:.2e}"))
}

fn grid_oracle() -> Outcome {
    let cfg = PipelineConfig::default();
    let (h, _) = histogram_from_geojson(&fixture("grid.geojson"), &cfg).map_err(|e| e.to_string())?;
    let b = h.bins();
    let v = normalize(&h).values;
    let pattern = xenakis_core::rhythm::histogram_to_pattern(&normalize(&h), &cfg.mapping).text();
    for (i, want) in [(0, 1000.0), (8, 1000.0), (4, 500.0), (12, 500.0)] {
        ensure((b[i] - want).abs() <= 1.0, || format!("bins[{i}] = {} not within 1 m of {want}", b[i]))?;
    }
    ensure(v[0] == 1.0 && v[8] == 1.0, || format!("values[0,8] = {}, {}", v[0], v[8]))?;
    ensure((v[4] - 0.5).abs() < 1e-3 && (v[12] - 0.5).abs() < 1e-3, || {
        format!("values[4,12] = {}, {}", v[4], v[12])
    })?;
    ensure(pattern == "X...H...X...H...", || format!("pattern {pattern}"))?;

    let frozen: Value = serde_json::from_str(&fixture("oracle/grid_expected.json")).unwrap();
    let mut oracles = vec![("frozen", frozen)];
    let live = Command::new("python3")
        .arg(fixtures().join("oracle/grid_oracle.py"))
        .arg(fixtures().join("grid.geojson"))
        .output();
    if let Ok(o) = live {
        if o.status.success() {
            oracles.push(("python", serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?));
        }
    }
    for (name, o) in &oracles {
        ensure(o["pattern"] == pattern, || format!("{name} oracle pattern {}", o["pattern"]))?;
        for (i, got) in b.iter().enumerate() {
            let want = o["bins"][i].as_f64().unwrap();
            ensure((got - want).abs() <= 1e-6, || format!("{name} oracle bins[{i}] {want} vs {got}"))?;
        }
    }
    let used: Vec<&str> = oracles.iter().map(|(n, _)| *n).collect();
    Ok(format!(
        "bins {:.3}/{:.3} m, pattern {pattern}, oracles: {}",
        b[0],
        b[4],
        used.join("+")
    ))
}

/// Sum of chord lengths between all onset pairs on the unit circle.
fn chord_evenness(onsets: &[usize], n: usize) -> f64 {
    let mut e = 0.0;
    for (a, &i) in onsets.iter().enumerate() {
        for &j in &onsets[a + 1..] {
            e += 2.0 * (PI * (j - i) as f64 / n as f64).sin();
        }
    }
    e
}

fn euclidean_correctness() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 1..=12usize {
        for k in 0..=n {
            let p = bjorklund(k, n).map_err(|e| e.to_string())?;
            let bools = p.to_bools();
            let onsets: Vec<usize> = (0..n).filter(|&i| bools[i]).collect();
            ensure(onsets.len() == k, || format!("E({k},{n}) has {} onsets", onsets.len()))?;
            let mine = chord_evenness(&onsets, n);
            let best = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| {
                    let s: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
                    chord_evenness(&s, n)
                })
                .fold(f64::MIN, f64::max);
            ensure(mine >= best - 1e-9, || format!("E({k},{n}) evenness {mine} below optimum {best}"))?;
            checked += 1;
        }
    }
    let e38 = bjorklund(3, 8).map_err(|e| e.to_string())?.notation();
    ensure(e38 == "x..x..x.", || format!("E(3,8) = {e38}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.2}s, limit 30s"))?;
    Ok(format!("{checked} (k,n) pairs maximally even, E(3,8) = {e38}, {secs:.2}s"))
}

fn grid_pattern() -> Result<RhythmPattern, String> {
    sonify_geojson(&fixture("grid.geojson"), &PipelineConfig::default())
        .map(|s| s.pattern)
        .map_err(|e| e.to_string())
}

fn audio_determinism() -> Outcome {
    let p = grid_pattern()?;
    let m = MappingConfig::default();
    let a = render_loop(&p, 120.0, 44_100, &m).map_err(|e| e.to_string())?;
    let b = render_loop(&p, 120.0, 44_100, &m).map_err(|e| e.to_string())?;
    ensure(a.samples.len() == 88_200, || format!("{} samples", a.samples.len()))?;
    let (wa, wb) = (encode_wav(&a), encode_wav(&b));
    ensure(wa == wb, || "two renders differ".into())?;
    ensure(wa.len() == 176_444, || format!("WAV is {} bytes", wa.len()))?;

    let mut header = Vec::new();
    header.extend_from_slice(b"RIFF");
    header.extend_from_slice(&(36u32 + 176_400).to_le_bytes());
    header.extend_from_slice(b"WAVEfmt ");
    header.extend_from_slice(&16u32.to_le_bytes());
    header.extend_from_slice(&1u16.to_le_bytes());
    header.extend_from_slice(&1u16.to_le_bytes());
    header.extend_from_slice(&44_100u32.to_le_bytes());
    header.extend_from_slice(&88_200u32.to_le_bytes());
    header.extend_from_slice(&2u16.to_le_bytes());
    header.extend_from_slice(&16u16.to_le_bytes());
    header.extend_from_slice(b"data");
    header.extend_from_slice(&176_400u32.to_le_bytes());
    ensure(wa[..44] == header[..], || "header differs from canonical PCM header".into())?;

    let hash = sha256_hex(&wa);
    ensure(hash == golden_hash(), || format!("sha256 {hash} differs from golden {}", golden_hash()))?;
    Ok(format!("88200 samples, 176444 bytes, sha256 {}..", &hash[..16]))
}

fn dtft_magnitude(x: &[f32], freq: f64, rate: f64) -> f64 {
    let w = TAU * freq / rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &s) in x.iter().enumerate() {
        re += s as f64 * (w * n as f64).cos();
        im -= s as f64 * (w * n as f64).sin();
    }
    re.hypot(im)
}

fn spectral_check() -> Outcome {
    let bass = render_voice(Voice::Bass, &VoiceParams::default_for(Voice::Bass), Some(55.0), 0.5, 44_100)
        .map_err(|e| e.to_string())?;
    let (mut peak_hz, mut peak) = (0.0, 0.0);
    let mut f = 20.0;
    while f <= 400.0 {
        let m = dtft_magnitude(&bass, f, 44_100.0);
        if m > peak {
            (peak_hz, peak) = (f, m);
        }
        f += 0.25;
    }
    ensure((peak_hz - 55.0_f64).abs() <= 1.0, || format!("peak at {peak_hz} Hz"))?;
    let silence = render_loop(&RhythmPattern::rests(16), 120.0, 44_100, &MappingConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(silence.rms() == 0.0, || format!("silence RMS {}", silence.rms()))?;
    Ok(format!("bass peak {peak_hz} Hz, silence RMS 0"))
}

/// `xenakis serve` on an ephemeral port, killed on drop.
struct Server {
    child: Child,
    base: String,
    _cache: tempfile::TempDir,
}

impl Server {
    fn start(provider: &str) -> Result<Self, String> {
        let cache = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut child = Command::new(env!("CARGO_BIN_EXE_xenakis"))
            .args(["serve", "--port", "0", "--provider", provider, "--cache-dir"])
            .arg(cache.path())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| e.to_string())?;
        let mut line = String::new();
        BufReader::new(child.stderr.take().unwrap())
            .read_line(&mut line)
            .map_err(|e| e.to_string())?;
        let base = line
            .trim()
            .strip_prefix("xenakis: listening on ")
            .ok_or_else(|| format!("unexpected server banner {line:?}"))?
            .to_string();
        Ok(Self {
            child,
            base,
            _cache: cache,
        })
    }

    fn agent() -> ureq::Agent {
        ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into()
    }

    fn post(&self, body: &Value) -> Result<(u16, Value), String> {
        let mut resp = Self::agent()
            .post(&format!("{}/v1/sonify", self.base))
            .header("content-type", "application/json")
            .send(body.to_string())
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok((status, serde_json::from_str(&text).map_err(|e| format!("{e}: {text}"))?))
    }

    fn get(&self, path: &str) -> Result<(u16, Vec<u8>), String> {
        let mut resp = Self::agent()
            .get(&format!("{}{path}", self.base))
            .call()
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let bytes = resp
            .body_mut()
            .with_config()
            .limit(64 << 20)
            .read_to_vec()
            .map_err(|e| e.to_string())?;
        Ok((status, bytes))
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn service_end_to_end() -> Outcome {
    let stub = StubProvider::start(&[&fixture("grid.geojson")]).map_err(|e| e.to_string())?;
    let server = Server::start(&stub.url())?;
    let req = json!({ "bbox": GRID_BBOX });
    let (status, first) = server.post(&req)?;
    ensure(status == 200, || format!("sonify status {status}: {first}"))?;
    ensure(first["pattern_text"] == "X...H...X...H...", || format!("pattern {}", first["pattern_text"]))?;
    let url = first["loop_url"].as_str().ok_or("no loop_url")?;
    let (status, wav) = server.get(url)?;
    ensure(status == 200, || format!("loop status {status}"))?;
    let hash = sha256_hex(&wav);
    ensure(hash == golden_hash(), || format!("served WAV sha256 {hash} differs from golden"))?;

    let (status, second) = server.post(&req)?;
    ensure(status == 200, || format!("repeat status {status}"))?;
    ensure(second["loop_id"] == first["loop_id"], || "repeat returned a different loop_id".into())?;
    let (_, health) = server.get("/healthz")?;
    let health: Value = serde_json::from_slice(&health).map_err(|e| e.to_string())?;
    let renders = health["loop_store"]["renders"].as_u64();
    ensure(renders == Some(1), || format!("render counter {renders:?} after two requests"))?;
    ensure(stub.requests() == 1, || format!("provider saw {} requests", stub.requests()))?;
    Ok(format!("loop {} served, golden bytes, 1 render for 2 requests", first["loop_id"]))
}

fn malformed_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(fixtures().join("malformed"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
}

fn cli_exit(args: &[&str], input: &Path) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_xenakis"))
        .args(args)
        .arg(input)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .ok()?
        .code()
}

fn robustness() -> Outcome {
    let files = malformed_files();
    ensure(files.len() >= 10, || format!("only {} malformed files", files.len()))?;
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let wav = scratch.path().join("out.wav");
    let wav_arg = wav.to_str().unwrap();
    for f in &files {
        let bytes = fs::read(f).unwrap();
        let parsed = panic::catch_unwind(|| parse_feature_collection_bytes(&bytes))
            .map_err(|_| format!("{}: parser panicked", f.display()))?;
        ensure(matches!(parsed, Err(ParseError::MalformedDocument { .. })), || {
            format!("{}: {parsed:?}", f.display())
        })?;
        for args in [&["histogram", "--input"][..], &["sonify", "--out", wav_arg, "--input"][..]] {
            let code = cli_exit(args, f);
            ensure(code == Some(2), || format!("{} {}: exit {code:?}", args[0], f.display()))?;
        }
    }

    let empty = fixtures().join("empty.geojson");
    let code = cli_exit(&["sonify", "--out", wav_arg, "--input"], &empty);
    ensure(code == Some(0), || format!("empty sonify exit {code:?}"))?;
    let decoded: Vec<i16> = hound::WavReader::open(&wav)
        .map_err(|e| e.to_string())?
        .samples::<i16>()
        .map(|s| s.unwrap())
        .collect();
    ensure(decoded.len() == 88_200 && decoded.iter().all(|&s| s == 0), || {
        "empty region did not render silence".into()
    })?;
    ensure(parse_feature_collection(&fixture("empty.geojson")).is_ok(), || "empty fixture rejected".into())?;

    let stub = StubProvider::start(&[&fixture("grid.geojson")]).map_err(|e| e.to_string())?;
    let server = Server::start(&stub.url())?;
    let (status, body) = server.post(&json!({ "bbox": OCEAN_BBOX }))?;
    ensure(status == 200, || format!("ocean sonify status {status}"))?;
    ensure(body["pattern_text"] == "................", || format!("ocean pattern {}", body["pattern_text"]))?;
    let (status, _) = server.post(&json!({ "geojson": fixture("malformed/03_not_json.geojson") }))?;
    ensure(status == 400, || format!("malformed inline document status {status}"))?;
    Ok(format!(
        "{} malformed files rejected by parser and CLI (exit 2); empty regions silent (exit 0, HTTP 200)",
        files.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("symmetry and reversal invariance", symmetry_suite),
        ("mass conservation", mass_conservation),
        ("grid-city oracle", grid_oracle),
        ("Euclidean correctness", euclidean_correctness),
        ("audio determinism and length law", audio_determinism),
        ("spectral check", spectral_check),
        ("service end-to-end", service_end_to_end),
        ("robustness", robustness),
    ];
    // keep panic noise out of the report; failures are reported below
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
