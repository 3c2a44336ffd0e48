//! Python bindings: `import qldpc`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qldpc_core::channel::design_for_model;
use qldpc_core::codes::{generate_regular_code, parse_alist, write_alist, Encoder};
use qldpc_core::decoder::{cn_update_min as core_cn_min, verify_cn_circuit, CheckRule, CnSchedule, DesignConfig};
use qldpc_core::sim::{CodewordMode, DecoderChoice};
use qldpc_core::{dde, ChannelModel, CodeGraph, JointBitDist};

fn err(e: qldpc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Parity-check matrix of an LDPC code.
#[pyclass(name = "Code", frozen)]
struct PyCode {
    graph: CodeGraph,
}

#[pymethods]
impl PyCode {
    /// Regular PEG construction.
    #[staticmethod]
    #[pyo3(signature = (dv, dc, n, seed = 1, girth = 6))]
    fn generate(dv: usize, dc: usize, n: usize, seed: u64, girth: u32) -> PyResult<Self> {
        Ok(PyCode { graph: generate_regular_code(dv, dc, n, seed, girth).map_err(err)? })
    }

    #[staticmethod]
    fn from_alist(text: &str) -> PyResult<Self> {
        Ok(PyCode { graph: parse_alist(text).map_err(err)? })
    }

    fn to_alist(&self) -> String {
        write_alist(&self.graph)
    }

    #[getter]
    fn n(&self) -> usize {
        self.graph.num_vars()
    }

    #[getter]
    fn m(&self) -> usize {
        self.graph.num_checks()
    }

    /// `(N - rank H) / N`.
    #[getter]
    fn rate(&self) -> f64 {
        self.graph.actual_rate()
    }

    fn girth_at_least_6(&self) -> bool {
        self.graph.is_four_cycle_free()
    }

    fn is_codeword(&self, bits: Vec<u8>) -> bool {
        self.graph.is_codeword(&bits)
    }

    /// Systematic encoding of `K` information bits.
    fn encode(&self, info: Vec<u8>) -> PyResult<Vec<u8>> {
        let enc = Encoder::new(&self.graph);
        if info.len() != enc.dimension() {
            return Err(PyValueError::new_err(format!("expected {} information bits", enc.dimension())));
        }
        Ok(enc.encode(&info))
    }
}

/// Designed fixed-point decoder.
#[pyclass(name = "DecoderSpec", frozen)]
struct PySpec {
    spec: qldpc_core::DecoderSpec,
}

#[pymethods]
impl PySpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySpec { spec: qldpc_core::DecoderSpec::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.spec.to_json().map_err(err)
    }

    #[getter]
    fn w(&self) -> u32 {
        self.spec.w
    }

    #[getter]
    fn w_ch(&self) -> u32 {
        self.spec.w_ch
    }

    #[getter]
    fn max_iterations(&self) -> usize {
        self.spec.max_iterations
    }

    #[getter]
    fn channel_thresholds(&self) -> Vec<f64> {
        self.spec.channel_thresholds.clone()
    }

    /// Per iteration: `(delta, r, I(B;Tv), I(X;Tc), app MI)`.
    fn trajectory(&self) -> Vec<(f64, u32, f64, f64, f64)> {
        self.spec.iterations.iter().map(|d| (d.delta, d.shift, d.mi_vtc, d.mi_ctv, d.mi_app)).collect()
    }

    fn quantize(&self, llrs: Vec<f64>) -> Vec<i16> {
        self.spec.quantize_channel(&llrs)
    }

    /// Returns `(bits, success, iterations)`.
    #[pyo3(signature = (code, channel_msgs, seed = 0))]
    fn decode(&self, code: &PyCode, channel_msgs: Vec<i16>, seed: u64) -> PyResult<(Vec<u8>, bool, usize)> {
        let r = qldpc_core::decode(&channel_msgs, &code.graph, &self.spec, seed).map_err(err)?;
        Ok((r.bits, r.success, r.iterations))
    }
}

/// Runs discrete density evolution and returns the decoder spec.
#[pyfunction]
#[pyo3(signature = (dv, dc, w, w_ch, ebno_db, iterations, mode = "aware", grid_points = 64))]
#[allow(clippy::too_many_arguments)]
fn design(
    dv: usize,
    dc: usize,
    w: u32,
    w_ch: u32,
    ebno_db: f64,
    iterations: usize,
    mode: &str,
    grid_points: usize,
) -> PyResult<PySpec> {
    let mode: dde::DesignMode = mode.parse().map_err(err)?;
    let degrees = dde::NodeDegrees::new(dv, dc).map_err(err)?;
    let mut cfg = DesignConfig::new(mode, degrees, w, w_ch, ebno_db, iterations);
    cfg.grid = dde::GridSpec::log_spaced(w, 2f64.powi(-12), 1.0, grid_points, 8, 8);
    let (spec, _) = qldpc_core::DecoderSpec::design(&cfg).map_err(err)?;
    Ok(PySpec { spec })
}

/// Box-plus (or min-sum) BP; returns `(bits, success, iterations)`.
#[pyfunction]
#[pyo3(signature = (code, llrs, max_iters = 50, min_sum = false))]
fn decode_bp(code: &PyCode, llrs: Vec<f64>, max_iters: usize, min_sum: bool) -> PyResult<(Vec<u8>, bool, usize)> {
    if llrs.len() != code.graph.num_vars() {
        return Err(PyValueError::new_err("llrs must have length N"));
    }
    let rule = if min_sum { CheckRule::MinSum } else { CheckRule::BoxPlus };
    let r = qldpc_core::decode_bp(&llrs, &code.graph, max_iters, rule);
    Ok((r.bits, r.success, r.iterations))
}

/// Monte Carlo sweep; `spec=None` runs box-plus BP. Returns rows of
/// `(ebno_db, frames, bit_errors, frame_errors, ber, fer)`.
#[pyfunction]
#[pyo3(signature = (code, spec, ebno_db, seed = 1, min_errors = 50, max_frames = 10000, random_info = false))]
fn simulate(
    code: &PyCode,
    spec: Option<&PySpec>,
    ebno_db: Vec<f64>,
    seed: u64,
    min_errors: u64,
    max_frames: u64,
    random_info: bool,
) -> PyResult<Vec<(f64, u64, u64, u64, f64, f64)>> {
    let choice = match spec {
        Some(s) => DecoderChoice::Fixed(&s.spec),
        None => DecoderChoice::Bp { max_iters: 50, rule: CheckRule::BoxPlus },
    };
    let cfg = qldpc_core::SimConfig {
        ebno_db,
        max_frames,
        min_frame_errors: min_errors,
        seed,
        codeword_mode: if random_info { CodewordMode::RandomInfo } else { CodewordMode::AllZero },
        rate: None,
    };
    let sim = qldpc_core::Simulator::new(&code.graph, choice, cfg).map_err(err)?;
    let recs = sim.sweep().map_err(err)?;
    Ok(recs.into_iter().map(|r| (r.ebno_db, r.frames, r.bit_errors, r.frame_errors, r.ber, r.fer)).collect())
}

/// MI-optimal symmetric channel quantizer: `(thresholds, I(B;T))`.
#[pyfunction]
fn channel_quantizer(ebno_db: f64, rate: f64, w_ch: u32) -> PyResult<(Vec<f64>, f64)> {
    let model = ChannelModel::new(ebno_db, rate).map_err(err)?;
    let q = design_for_model(&model, w_ch).map_err(err)?;
    let mi = q.mutual_information();
    Ok((q.thresholds, mi))
}

/// `I(B;T)` in bits of a joint table over a signed alphabet, given row by row.
#[pyfunction]
fn mutual_information(p0: Vec<f64>, p1: Vec<f64>) -> PyResult<f64> {
    if p0.len() != p1.len() || p0.len() < 2 || p0.len() % 2 != 0 {
        return Err(PyValueError::new_err("rows must have the same even length"));
    }
    let joint = JointBitDist::signed(p0.len() / 2, p0, p1).map_err(err)?;
    qldpc_core::mutual_information(&joint).map_err(err)
}

/// Minimum-approximation check node outputs.
#[pyfunction]
fn cn_update_min(inputs: Vec<i16>) -> PyResult<Vec<i16>> {
    if inputs.len() < 2 || inputs.contains(&0) {
        return Err(PyValueError::new_err("need at least two non-zero messages"));
    }
    Ok(core_cn_min(&inputs, CnSchedule::TwoMinima))
}

/// `(matching pairs, total pairs, gates, depth)` for the `w`-bit circuit.
#[pyfunction]
fn verify_cn(w: u32) -> PyResult<(usize, usize, usize, usize)> {
    verify_cn_circuit(w).map_err(err)
}

#[pymodule]
fn qldpc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCode>()?;
    m.add_class::<PySpec>()?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(decode_bp, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(channel_quantizer, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(cn_update_min, m)?)?;
    m.add_function(wrap_pyfunction!(verify_cn, m)?)?;
    Ok(())
}
