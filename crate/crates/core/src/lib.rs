//! Design and simulation of coarsely quantized LDPC decoders.
//!
//! The crate covers the whole loop of a finite-alphabet decoder design:
//!
//! * [`dist`]: joint bit/message distributions and information measures,
//! * [`channel`]: BPSK over AWGN and the symmetric MI-maximizing channel quantizer,
//! * [`translate`]: LLR translation tables and the uniform variable-node quantizer,
//! * [`dde`]: discrete density evolution and the check-node-aware `(Δ, r)` search,
//! * [`codes`]: parity-check matrices (alist I/O, PEG construction, GF(2) encoding),
//! * [`decoder`]: a bit-exact fixed-point flooding decoder and a float BP baseline,
//! * [`sim`]: reproducible Monte Carlo BER/FER measurement,
//! * [`cli`]: the `qldpc` command line front end.

pub mod channel;
pub mod cli;
pub mod codes;
pub mod dde;
pub mod decoder;
pub mod dist;
mod error;
pub mod sim;
pub mod translate;

pub use channel::{design_channel_quantizer, fine_llr_density, ChannelModel, ChannelQuantizer, LlrGrid};
pub use codes::CodeGraph;
pub use dde::{evolve, optimize_vn, DesignMode, EvolutionTrace, GridSpec, IterationDesign, NodeDegrees};
pub use decoder::{decode, decode_bp, DecodeResult, DecoderSpec};
pub use dist::{kl_divergence, mutual_information, JointBitDist, SignedAlphabet};
pub use error::{Error, Result};
pub use sim::{SimConfig, SimRecord, Simulator};
pub use translate::{TieRule, TranslationTable, UniformQuantizerParams};
