use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{design_channel_quantizer, fine_llr_density, ChannelModel, ChannelQuantizer, DEFAULT_BINS};
use crate::codes::CodeGraph;
use crate::dde::{ceil_log2, evolve, DesignMode, EvolutionTrace, GridSpec, IterationDesign, NodeDegrees};
use crate::translate::TieRule;
use crate::{Error, Result};

/// Inputs of a complete decoder design run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub mode: DesignMode,
    pub degrees: NodeDegrees,
    pub w_ch: u32,
    pub ebno_db: f64,
    /// Code rate used for the noise variance; `None` uses the design rate.
    pub rate: Option<f64>,
    pub iterations: usize,
    pub grid: GridSpec,
    pub tie_rule: TieRule,
    /// Cells of the fine LLR grid behind the channel quantizer.
    pub bins: usize,
}

impl DesignConfig {
    pub fn new(mode: DesignMode, degrees: NodeDegrees, w: u32, w_ch: u32, ebno_db: f64, iterations: usize) -> Self {
        DesignConfig {
            mode,
            degrees,
            w_ch,
            ebno_db,
            rate: None,
            iterations,
            grid: GridSpec::default_for(w),
            tie_rule: TieRule::default(),
            bins: DEFAULT_BINS,
        }
    }
}

/// Everything the fixed-point decoder needs, one table set per iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSpec {
    pub mode: DesignMode,
    pub degrees: NodeDegrees,
    pub w: u32,
    pub w_ch: u32,
    pub w_phi: u32,
    /// Two's-complement width of the variable-node accumulator.
    pub w_y: u32,
    pub design_ebno_db: f64,
    pub rate: f64,
    /// Ascending channel LLR magnitude thresholds.
    pub channel_thresholds: Vec<f64>,
    pub max_iterations: usize,
    pub tie_rule: TieRule,
    pub iterations: Vec<IterationDesign>,
}

impl DecoderSpec {
    /// Designs the channel quantizer and `cfg.iterations` variable-node updates.
    pub fn design(cfg: &DesignConfig) -> Result<(DecoderSpec, EvolutionTrace)> {
        cfg.grid.validate()?;
        let rate = cfg.rate.unwrap_or_else(|| cfg.degrees.design_rate());
        let model = ChannelModel::new(cfg.ebno_db, rate)?;
        let fine = fine_llr_density(&model, cfg.bins, model.default_clip())?;
        let chq = design_channel_quantizer(&fine, cfg.w_ch)?;
        let trace = evolve(cfg.mode, cfg.degrees, &chq, cfg.iterations, &cfg.grid)?;
        let spec = DecoderSpec::from_trace(&trace, &chq, &cfg.grid, cfg.iterations, cfg.tie_rule, cfg.ebno_db, rate)?;
        Ok((spec, trace))
    }

    pub fn from_trace(
        trace: &EvolutionTrace,
        chq: &ChannelQuantizer,
        grid: &GridSpec,
        max_iterations: usize,
        tie_rule: TieRule,
        design_ebno_db: f64,
        rate: f64,
    ) -> Result<DecoderSpec> {
        let spec = DecoderSpec {
            mode: trace.mode,
            degrees: trace.degrees,
            w: grid.w,
            w_ch: chq.width,
            w_phi: grid.w_phi,
            w_y: grid.acc_width(trace.degrees.dv),
            design_ebno_db,
            rate,
            channel_thresholds: chq.thresholds.clone(),
            max_iterations,
            tie_rule,
            iterations: trace.iterations.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(2..=8).contains(&self.w) {
            return bad(format!("message width w = {} outside 2..=8", self.w));
        }
        if !(1..=6).contains(&self.w_ch) {
            return bad(format!("channel width {} outside 1..=6", self.w_ch));
        }
        let need = self.w_phi + ceil_log2(self.degrees.dv + 1);
        if self.w_y < need || self.w_y > 31 {
            return bad(format!("accumulator width {} cannot hold the sum, need {need}", self.w_y));
        }
        if self.max_iterations == 0 || self.iterations.len() < self.max_iterations {
            return bad(format!(
                "{} designed iterations for {} decoding iterations",
                self.iterations.len(),
                self.max_iterations
            ));
        }
        let levels = (1usize << (self.w_ch - 1)) - 1;
        if self.channel_thresholds.len() != levels
            || self.channel_thresholds.windows(2).any(|p| p[0] > p[1])
            || self.channel_thresholds.iter().any(|t| !t.is_finite() || *t < 0.0)
        {
            return bad(format!("expected {levels} ascending non-negative channel thresholds"));
        }
        for (i, d) in self.iterations.iter().enumerate() {
            if d.width != self.w || d.shift > 30 || !(d.delta > 0.0) {
                return bad(format!("iteration {} has inconsistent quantizer parameters", i + 1));
            }
            if d.channel_table.alphabet.width() != self.w_ch || d.channel_table.w_phi != self.w_phi {
                return bad(format!("iteration {} channel table does not match widths", i + 1));
            }
            match (&d.check_table, i) {
                (None, 0) => {}
                (Some(t), _) if t.alphabet.width() == self.w && t.w_phi == self.w_phi => {}
                _ => return bad(format!("iteration {} check table does not match widths", i + 1)),
            }
        }
        Ok(())
    }

    /// Errors unless the graph is regular with the designed degrees.
    pub fn check_graph(&self, graph: &CodeGraph) -> Result<()> {
        match graph.regular_degrees() {
            Some((dv, dc)) if dv == self.degrees.dv && dc == self.degrees.dc => Ok(()),
            got => Err(Error::Config(format!(
                "decoder designed for ({}, {}) but code degrees are {got:?}",
                self.degrees.dv, self.degrees.dc
            ))),
        }
    }

    /// Channel quantizer: magnitude `1 + #{τ <= |L|}`, sign of `L` (zero counts as +).
    pub fn quantize_llr(&self, llr: f64) -> i16 {
        let mag = 1 + self.channel_thresholds.partition_point(|&t| t <= llr.abs()) as i16;
        if llr < 0.0 {
            -mag
        } else {
            mag
        }
    }

    pub fn quantize_channel(&self, llrs: &[f64]) -> Vec<i16> {
        llrs.iter().map(|&l| self.quantize_llr(l)).collect()
    }

    /// Design used in 1-based iteration `it`; later iterations reuse the last one.
    pub fn design_at(&self, it: usize) -> &IterationDesign {
        &self.iterations[it.clamp(1, self.iterations.len()) - 1]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<DecoderSpec> {
        let spec: DecoderSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DecoderSpec> {
        DecoderSpec::from_json(&std::fs::read_to_string(path)?)
    }
}
