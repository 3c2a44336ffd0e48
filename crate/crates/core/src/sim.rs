//! Monte Carlo BER/FER measurement over BPSK/AWGN.
//!
//! Frame `f` draws all of its randomness (information bits, noise, tie bits)
//! from a ChaCha8 stream selected by `(seed, f)`, and the noise is drawn in
//! units of σ. Results are therefore independent of the worker count, and
//! different SNR points see the same underlying realizations.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::codes::{CodeGraph, Encoder};
use crate::decoder::{BpDecoder, CheckRule, DecodeOptions, DecoderSpec, FixedDecoder};
use crate::dist::JointBitDist;
use crate::{Error, Result};

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959964;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodewordMode {
    /// Transmit the all-zero word; errors counted over all `N` bits.
    #[default]
    AllZero,
    /// Uniform information bits through the systematic encoder; errors
    /// counted over the `K` information positions.
    RandomInfo,
}

impl std::str::FromStr for CodewordMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_zero" => Ok(CodewordMode::AllZero),
            "random_info" => Ok(CodewordMode::RandomInfo),
            _ => Err(Error::Config(format!("unknown codeword mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub ebno_db: Vec<f64>,
    pub max_frames: u64,
    /// A point stops once this many frame errors are seen.
    pub min_frame_errors: u64,
    pub seed: u64,
    pub codeword_mode: CodewordMode,
    /// Rate used for the noise variance; `None` uses the code's GF(2) rate.
    pub rate: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ebno_db.is_empty() {
            return Err(Error::Config("empty Eb/N0 grid".into()));
        }
        if self.ebno_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("non-finite Eb/N0 value".into()));
        }
        if self.min_frame_errors == 0 || self.max_frames == 0 {
            return Err(Error::Config("frame limits must be positive".into()));
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("rate {r} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Which decoder a [`Simulator`] drives.
#[derive(Clone, Copy, Debug)]
pub enum DecoderChoice<'a> {
    Fixed(&'a DecoderSpec),
    Bp { max_iters: usize, rule: CheckRule },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub ebno_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
    pub mean_iters: f64,
    pub seconds: f64,
}

pub const CSV_HEADER: &str = "ebno_db,frames,bit_errors,frame_errors,ber,fer,fer_ci_lo,fer_ci_hi,mean_iters,seconds";

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Writes records as CSV. Without `timing` the seconds column is 0 so that
/// reruns are byte-identical.
pub fn write_csv<W: Write>(records: &[SimRecord], timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        let mut row = r.clone();
        if !timing {
            row.seconds = 0.0;
        }
        w.write_record([
            row.ebno_db.to_string(),
            row.frames.to_string(),
            row.bit_errors.to_string(),
            row.frame_errors.to_string(),
            row.ber.to_string(),
            row.fer.to_string(),
            row.fer_ci_lo.to_string(),
            row.fer_ci_hi.to_string(),
            row.mean_iters.to_string(),
            row.seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default)]
struct Outcome {
    bit_errors: u64,
    frame_error: bool,
    iterations: usize,
}

enum Engine<'a> {
    Fixed(FixedDecoder<'a>),
    Bp(BpDecoder<'a>, usize),
}

struct Worker<'a> {
    engine: Engine<'a>,
    tx: Vec<u8>,
    llr: Vec<f64>,
}

/// Drives one decoder on one code.
pub struct Simulator<'a> {
    graph: &'a CodeGraph,
    decoder: DecoderChoice<'a>,
    config: SimConfig,
    encoder: Encoder,
    rate: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(graph: &'a CodeGraph, decoder: DecoderChoice<'a>, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if let DecoderChoice::Fixed(spec) = decoder {
            spec.validate()?;
            spec.check_graph(graph)?;
        }
        let encoder = Encoder::new(graph);
        let rate = config.rate.unwrap_or(encoder.dimension() as f64 / graph.num_vars() as f64);
        if rate <= 0.0 {
            return Err(Error::Config("code has no information bits".into()));
        }
        Ok(Simulator { graph, decoder, config, encoder, rate })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Rate used for the noise variance.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn worker(&self) -> Worker<'a> {
        let engine = match self.decoder {
            DecoderChoice::Fixed(spec) => Engine::Fixed(FixedDecoder::new(self.graph, spec).expect("validated")),
            DecoderChoice::Bp { max_iters, rule } => Engine::Bp(BpDecoder::new(self.graph, rule), max_iters),
        };
        let n = self.graph.num_vars();
        Worker { engine, tx: vec![0; n], llr: vec![0.0; n] }
    }

    /// Transmitted bits and channel LLRs of frame `idx`; returns the tie seed.
    fn channel_frame(&self, idx: u64, sigma: f64, tx: &mut [u8], llr: &mut [f64]) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(idx);
        match self.config.codeword_mode {
            CodewordMode::AllZero => tx.fill(0),
            CodewordMode::RandomInfo => {
                let info: Vec<u8> = (0..self.encoder.dimension()).map(|_| rng.random_range(0..2u8)).collect();
                tx.copy_from_slice(&self.encoder.encode(&info));
            }
        }
        let scale = 2.0 / (sigma * sigma);
        for (l, &b) in llr.iter_mut().zip(tx.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            let x = 1.0 - 2.0 * b as f64;
            *l = scale * (x + sigma * z);
        }
        rng.next_u64()
    }

    fn run_frame(&self, w: &mut Worker<'a>, idx: u64, sigma: f64) -> Outcome {
        let tie_seed = self.channel_frame(idx, sigma, &mut w.tx, &mut w.llr);
        let result = match &mut w.engine {
            Engine::Fixed(dec) => {
                let spec = match self.decoder {
                    DecoderChoice::Fixed(s) => s,
                    DecoderChoice::Bp { .. } => unreachable!(),
                };
                let msgs = spec.quantize_channel(&w.llr);
                dec.decode(&msgs, tie_seed).expect("validated inputs")
            }
            Engine::Bp(dec, iters) => dec.decode(&w.llr, *iters),
        };
        let bit_errors = match self.config.codeword_mode {
            CodewordMode::AllZero => result.bits.iter().filter(|&&b| b != 0).count(),
            CodewordMode::RandomInfo => {
                self.encoder.info_positions().iter().filter(|&&p| result.bits[p] != w.tx[p]).count()
            }
        } as u64;
        let frame_error = result.bits != w.tx;
        Outcome { bit_errors, frame_error, iterations: result.iterations }
    }

    fn sigma(&self, ebno_db: f64) -> Result<f64> {
        Ok(ChannelModel::new(ebno_db, self.rate)?.sigma())
    }

    fn batch_size() -> u64 {
        (rayon::current_num_threads() as u64 * 16).max(64)
    }

    /// Simulates frames at one SNR until the error target or the frame limit.
    pub fn run_point(&self, ebno_db: f64) -> Result<SimRecord> {
        let sigma = self.sigma(ebno_db)?;
        let start = Instant::now();
        let (mut frames, mut bit_errors, mut frame_errors, mut iters) = (0u64, 0u64, 0u64, 0u64);
        let batch = Self::batch_size();
        'outer: while frames < self.config.max_frames {
            let end = (frames + batch).min(self.config.max_frames);
            let outcomes: Vec<Outcome> = (frames..end)
                .into_par_iter()
                .map_init(|| self.worker(), |w, idx| self.run_frame(w, idx, sigma))
                .collect();
            // Fold in frame order so the stopping point does not depend on scheduling.
            for o in outcomes {
                frames += 1;
                bit_errors += o.bit_errors;
                frame_errors += o.frame_error as u64;
                iters += o.iterations as u64;
                if frame_errors >= self.config.min_frame_errors {
                    break 'outer;
                }
            }
        }
        let bits_per_frame = match self.config.codeword_mode {
            CodewordMode::AllZero => self.graph.num_vars(),
            CodewordMode::RandomInfo => self.encoder.dimension(),
        } as f64;
        let (lo, hi) = wilson_interval(frame_errors, frames);
        Ok(SimRecord {
            ebno_db,
            frames,
            bit_errors,
            frame_errors,
            ber: bit_errors as f64 / (frames as f64 * bits_per_frame),
            fer: frame_errors as f64 / frames as f64,
            fer_ci_lo: lo,
            fer_ci_hi: hi,
            mean_iters: iters as f64 / frames as f64,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Runs every grid point and warns when the FER rises significantly with SNR.
    pub fn sweep(&self) -> Result<Vec<SimRecord>> {
        let mut out: Vec<SimRecord> = Vec::with_capacity(self.config.ebno_db.len());
        for &e in &self.config.ebno_db {
            let rec = self.run_point(e)?;
            log::info!("Eb/N0 {e} dB: {} frames, FER {:.3e}, BER {:.3e}", rec.frames, rec.fer, rec.ber);
            out.push(rec);
        }
        let mut sorted: Vec<&SimRecord> = out.iter().collect();
        sorted.sort_by(|a, b| a.ebno_db.total_cmp(&b.ebno_db));
        for p in sorted.windows(2) {
            let (a, b) = (p[0], p[1]);
            let sd = |r: &SimRecord| (r.fer * (1.0 - r.fer) / r.frames as f64).sqrt();
            let spread = (sd(a).powi(2) + sd(b).powi(2)).sqrt();
            if b.fer - a.fer > 3.0 * spread && b.fer > a.fer {
                log::warn!("FER rises from {} dB ({:.3e}) to {} dB ({:.3e})", a.ebno_db, a.fer, b.ebno_db, b.fer);
            }
        }
        Ok(out)
    }

    /// Joint histogram of `(b, t^v)` over all edges after the variable-node
    /// pass of `iteration`, from consecutive frames until `min_edges` edges
    /// have been collected. Labels are the transmitted bits.
    pub fn measure_edge_density(&self, ebno_db: f64, iteration: usize, min_edges: u64) -> Result<JointBitDist> {
        let DecoderChoice::Fixed(spec) = self.decoder else {
            return Err(Error::Config("edge densities need the fixed-point decoder".into()));
        };
        if iteration == 0 || iteration > spec.max_iterations {
            return Err(Error::Config(format!("iteration {iteration} outside 1..={}", spec.max_iterations)));
        }
        let sigma = self.sigma(ebno_db)?;
        let half = 1usize << (spec.w - 1);
        let edges = self.graph.num_edges() as u64;
        let frames = min_edges.div_ceil(edges).max(1);
        let opts = DecodeOptions { early_stop: false, mirror_ties: false };
        let counts = (0..frames)
            .into_par_iter()
            .map_init(
                || self.worker(),
                |w, idx| {
                    let tie_seed = self.channel_frame(idx, sigma, &mut w.tx, &mut w.llr);
                    let msgs = spec.quantize_channel(&w.llr);
                    let mut hist = vec![[0u64; 2]; 2 * half];
                    let Engine::Fixed(dec) = &mut w.engine else { unreachable!() };
                    dec.decode_with(&msgs, tie_seed, opts, |it, v2c| {
                        if it == iteration {
                            for (e, &t) in v2c.iter().enumerate() {
                                let b = w.tx[self.graph.edge_var(e)] as usize;
                                let i = if t < 0 { (t as i64 + half as i64) as usize } else { t as usize + half - 1 };
                                hist[i][b] += 1;
                            }
                        }
                    })
                    .expect("validated inputs");
                    hist
                },
            )
            .reduce(
                || vec![[0u64; 2]; 2 * half],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        x[0] += y[0];
                        x[1] += y[1];
                    }
                    a
                },
            );
        let total = (frames * edges) as f64;
        let p0 = counts.iter().map(|c| c[0] as f64 / total).collect();
        let p1 = counts.iter().map(|c| c[1] as f64 / total).collect();
        JointBitDist::signed(half, p0, p1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::generate_regular_code;
    use crate::dde::{DesignMode, GridSpec, NodeDegrees};
    use crate::decoder::DesignConfig;

    fn spec() -> DecoderSpec {
        let mut cfg = DesignConfig::new(DesignMode::Aware, NodeDegrees::new(3, 6).unwrap(), 2, 3, 2.5, 6);
        cfg.grid = GridSpec::log_spaced(2, 2f64.powi(-6), 1.0, 24, 5, 8);
        cfg.bins = 1000;
        DecoderSpec::design(&cfg).unwrap().0
    }

    fn config(grid: Vec<f64>) -> SimConfig {
        SimConfig {
            ebno_db: grid,
            max_frames: 400,
            min_frame_errors: 30,
            seed: 17,
            codeword_mode: CodewordMode::AllZero,
            rate: None,
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036994).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403832).abs() < 1e-5 && (hi - 0.596168).abs() < 1e-5);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn config_validation() {
        assert!(config(vec![]).validate().is_err());
        let mut c = config(vec![1.0]);
        c.min_frame_errors = 0;
        assert!(c.validate().is_err());
        assert!(config(vec![1.0, 2.0]).validate().is_ok());
    }

    #[test]
    fn sweep_is_reproducible_and_thread_independent() {
        let g = generate_regular_code(3, 6, 96, 2, 6).unwrap();
        let s = spec();
        let sim = Simulator::new(&g, DecoderChoice::Fixed(&s), config(vec![1.0, 2.0, 3.0])).unwrap();
        let a = sim.sweep().unwrap();
        assert_eq!(a.len(), 3);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sim.sweep().unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.frames, x.bit_errors, x.frame_errors), (y.frames, y.bit_errors, y.frame_errors));
            assert_eq!(x.mean_iters, y.mean_iters);
        }
        assert!(a[0].fer >= a[2].fer);
        let mut buf = Vec::new();
        write_csv(&a, false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",0"));
    }

    #[test]
    fn high_snr_has_no_errors() {
        let g = generate_regular_code(3, 6, 96, 2, 6).unwrap();
        let s = spec();
        let mut c = config(vec![12.0]);
        c.max_frames = 200;
        let rec = Simulator::new(&g, DecoderChoice::Fixed(&s), c).unwrap().run_point(12.0).unwrap();
        assert_eq!((rec.frames, rec.frame_errors, rec.bit_errors), (200, 0, 0));
        let bp = Simulator::new(&g, DecoderChoice::Bp { max_iters: 20, rule: CheckRule::BoxPlus }, config(vec![12.0]))
            .unwrap()
            .run_point(12.0)
            .unwrap();
        assert_eq!(bp.frame_errors, 0);
    }

    #[test]
    fn random_info_mode_counts_information_bits() {
        let g = generate_regular_code(3, 6, 96, 2, 6).unwrap();
        let s = spec();
        let mut c = config(vec![2.0]);
        c.codeword_mode = CodewordMode::RandomInfo;
        let sim = Simulator::new(&g, DecoderChoice::Fixed(&s), c).unwrap();
        let rec = sim.run_point(2.0).unwrap();
        assert!(rec.frames > 0);
        let k = sim.encoder.dimension() as f64;
        assert!((rec.ber - rec.bit_errors as f64 / (rec.frames as f64 * k)).abs() < 1e-15);
    }

    #[test]
    fn codeword_modes_agree_within_intervals() {
        let g = generate_regular_code(3, 6, 96, 2, 6).unwrap();
        let s = spec();
        let mut c = config(vec![2.0]);
        c.max_frames = 3000;
        c.min_frame_errors = 150;
        let zero = Simulator::new(&g, DecoderChoice::Fixed(&s), c.clone()).unwrap().run_point(2.0).unwrap();
        c.codeword_mode = CodewordMode::RandomInfo;
        let info = Simulator::new(&g, DecoderChoice::Fixed(&s), c).unwrap().run_point(2.0).unwrap();
        assert!(zero.frame_errors >= 150 && info.frame_errors >= 150);
        assert!(zero.fer_ci_lo <= info.fer_ci_hi && info.fer_ci_lo <= zero.fer_ci_hi, "{zero:?} vs {info:?}");
    }

    #[test]
    fn noiseless_edge_density_is_a_point_mass() {
        let g = generate_regular_code(3, 6, 96, 2, 6).unwrap();
        let s = spec();
        let sim = Simulator::new(&g, DecoderChoice::Fixed(&s), config(vec![60.0])).unwrap();
        let d = sim.measure_edge_density(60.0, 1, 1000).unwrap();
        assert_eq!(d.prob(0, 2), 1.0);
        assert_eq!(d.total(), 1.0);
        let bp = Simulator::new(&g, DecoderChoice::Bp { max_iters: 5, rule: CheckRule::MinSum }, config(vec![1.0]))
            .unwrap();
        assert!(bp.measure_edge_density(1.0, 1, 10).is_err());
    }
}
