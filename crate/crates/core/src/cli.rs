//! The `qldpc` command line tool.
//!
//! Every command writes a `<output>.manifest.json` next to its main output
//! with the resolved arguments, tool version, seed, SHA-256 digests of the
//! inputs, and the list of files written.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codes::{generate_regular_code, parse_alist, write_alist};
use crate::dde::{DesignMode, GridSpec, NodeDegrees};
use crate::decoder::{verify_cn_circuit, CheckRule, DecoderSpec, DesignConfig};
use crate::sim::{write_csv, CodewordMode, DecoderChoice, SimConfig, Simulator};
use crate::translate::TieRule;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "qldpc", version, about = "Design and simulate coarsely quantized LDPC decoders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Design a decoder by discrete density evolution.
    Design(DesignArgs),
    /// Generate a regular PEG code as an alist file.
    Gencode(GencodeArgs),
    /// Measure BER/FER over an Eb/N0 grid.
    Simulate(SimulateArgs),
    /// Exhaustively check the two-input check node circuit.
    VerifyCn(VerifyCnArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct DesignArgs {
    #[arg(long)]
    pub dv: usize,
    #[arg(long)]
    pub dc: usize,
    /// Message width in bits.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=8))]
    pub w: u32,
    /// Channel message width in bits.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6))]
    pub wch: u32,
    /// Design Eb/N0 in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub ebno: f64,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long, default_value_t = DesignMode::Aware)]
    pub mode: DesignMode,
    /// Code rate for the noise variance; defaults to 1 - dv/dc.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Number of log-spaced Δ values.
    #[arg(long, default_value_t = 256)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 2f64.powi(-12))]
    pub delta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_max: f64,
    /// Largest right shift r searched.
    #[arg(long, default_value_t = 8)]
    pub max_shift: u32,
    /// Width of the integer translation tables.
    #[arg(long, default_value_t = 8)]
    pub wphi: u32,
    #[arg(long, default_value = "random", value_parser = parse_tie_rule)]
    #[serde(serialize_with = "ser_tie")]
    pub tie_rule: TieRule,
    /// Cells of the fine LLR grid used for the channel quantizer.
    #[arg(long, default_value_t = crate::channel::DEFAULT_BINS)]
    pub bins: usize,
    /// Output spec JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Trace CSV; defaults to `<out>.trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GencodeArgs {
    #[arg(long)]
    pub dv: usize,
    #[arg(long)]
    pub dc: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub girth: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// Parity-check matrix in alist format.
    #[arg(long)]
    pub code: PathBuf,
    /// Decoder spec JSON; omit together with `--bp` for the float baseline.
    #[arg(long, required_unless_present = "bp")]
    pub spec: Option<PathBuf>,
    /// Use box-plus belief propagation instead of a spec.
    #[arg(long, conflicts_with = "spec")]
    pub bp: bool,
    #[arg(long, default_value_t = 50)]
    pub bp_iters: usize,
    /// Use the minimum approximation in the BP check node.
    #[arg(long)]
    pub bp_min_sum: bool,
    /// Comma separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub ebno_list: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub min_errors: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_frames: u64,
    #[arg(long, default_value = "all_zero", value_parser = parse_codeword_mode)]
    #[serde(serialize_with = "ser_mode")]
    pub codeword: CodewordMode,
    /// Rate for the noise variance; defaults to the code's GF(2) rate.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Record wall-clock seconds in the CSV.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyCnArgs {
    #[arg(long)]
    pub w: u32,
}

fn parse_tie_rule(s: &str) -> std::result::Result<TieRule, String> {
    match s {
        "random" => Ok(TieRule::Random),
        "deterministic_plus" | "plus" => Ok(TieRule::DeterministicPlus),
        _ => Err(format!("unknown tie rule {s:?} (random | deterministic_plus)")),
    }
}

fn parse_codeword_mode(s: &str) -> std::result::Result<CodewordMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn ser_tie<S: serde::Serializer>(t: &TieRule, s: S) -> std::result::Result<S::Ok, S::Error> {
    t.serialize(s)
}

fn ser_mode<S: serde::Serializer>(m: &CodewordMode, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.serialize(s)
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    version: &'a str,
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

fn digest(path: &Path) -> Result<InputDigest> {
    let bytes = std::fs::read(path)?;
    Ok(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest<C: Serialize>(
    command: &str,
    config: &C,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<PathBuf> {
    let m = RunManifest {
        command,
        config,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = manifest_path(outputs[0]);
    std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(path)
}

fn cmd_design(a: &DesignArgs) -> Result<i32> {
    let degrees = NodeDegrees::new(a.dv, a.dc)?;
    let grid = GridSpec::log_spaced(a.w, a.delta_min, a.delta_max, a.grid_points, a.max_shift, a.wphi);
    let cfg = DesignConfig {
        mode: a.mode,
        degrees,
        w_ch: a.wch,
        ebno_db: a.ebno,
        rate: a.rate,
        iterations: a.iters,
        grid,
        tie_rule: a.tie_rule,
        bins: a.bins,
    };
    let (spec, trace) = DecoderSpec::design(&cfg)?;
    spec.save(&a.out)?;
    let trace_path = a.trace.clone().unwrap_or_else(|| {
        let mut s: OsString = a.out.as_os_str().to_owned();
        s.push(".trace.csv");
        PathBuf::from(s)
    });
    trace.write_csv(std::fs::File::create(&trace_path)?)?;
    write_manifest("design", a, None, &[], &[&a.out, &trace_path])?;
    let last = trace.iterations.last().expect("at least one iteration");
    println!(
        "{} design, {} iterations: final I(X;Tc) = {:.6}, app MI = {:.6}",
        a.mode, a.iters, last.mi_ctv, last.mi_app
    );
    Ok(0)
}

fn cmd_gencode(a: &GencodeArgs) -> Result<i32> {
    let g = generate_regular_code(a.dv, a.dc, a.n, a.seed, a.girth)?;
    std::fs::write(&a.out, write_alist(&g))?;
    write_manifest("gencode", a, Some(a.seed), &[], &[&a.out])?;
    println!(
        "({}, {}) code: N = {}, M = {}, rate {:.6}",
        a.dv,
        a.dc,
        g.num_vars(),
        g.num_checks(),
        g.actual_rate()
    );
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let graph = parse_alist(&std::fs::read_to_string(&a.code)?)?;
    let spec = a.spec.as_deref().map(DecoderSpec::load).transpose()?;
    let choice = match &spec {
        Some(s) => DecoderChoice::Fixed(s),
        None => DecoderChoice::Bp {
            max_iters: a.bp_iters,
            rule: if a.bp_min_sum { CheckRule::MinSum } else { CheckRule::BoxPlus },
        },
    };
    let cfg = SimConfig {
        ebno_db: a.ebno_list.clone(),
        max_frames: a.max_frames,
        min_frame_errors: a.min_errors,
        seed: a.seed,
        codeword_mode: a.codeword,
        rate: a.rate,
    };
    let sim = Simulator::new(&graph, choice, cfg)?;
    let records = sim.sweep()?;
    write_csv(&records, a.timing, std::fs::File::create(&a.out)?)?;
    let mut inputs: Vec<&Path> = vec![&a.code];
    if let Some(p) = &a.spec {
        inputs.push(p);
    }
    write_manifest("simulate", a, Some(a.seed), &inputs, &[&a.out])?;
    for r in &records {
        println!("{:>7.3} dB  frames {:>8}  FER {:.4e}  BER {:.4e}", r.ebno_db, r.frames, r.fer, r.ber);
    }
    Ok(0)
}

fn cmd_verify_cn(a: &VerifyCnArgs) -> Result<i32> {
    let (hits, total, gates, depth) = verify_cn_circuit(a.w)?;
    println!("{hits}/{total} match, gates={gates}, depth={depth}");
    Ok(if hits == total { 0 } else { 1 })
}

fn configure_threads() {
    if let Some(n) = std::env::var("QLDPC_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            // A second call in the same process keeps the first pool.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args` and runs the command. Returns the process exit code:
/// 0 success, 1 verification mismatch, 2 any error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Gencode(a) => cmd_gencode(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::VerifyCn(a) => cmd_verify_cn(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
