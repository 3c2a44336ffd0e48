//! Minimum-approximation check node: arithmetic schedules and gate-level circuits.

use crate::{Error, Result};

/// Evaluation schedule for [`cn_update_min`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnSchedule {
    /// Forward/backward binary tree of pairwise combines.
    Tree,
    /// Sign product plus first and second minimum search.
    TwoMinima,
}

#[inline]
fn combine(a: i16, b: i16) -> i16 {
    let m = a.abs().min(b.abs());
    if (a < 0) != (b < 0) {
        -m
    } else {
        m
    }
}

/// Extrinsic outputs `t_j = ∏_{i≠j} sgn(t_i) · min_{i≠j} |t_i|`.
///
/// Panics if an input is zero or fewer than two inputs are given.
pub fn cn_update_min(inputs: &[i16], schedule: CnSchedule) -> Vec<i16> {
    let mut out = vec![0; inputs.len()];
    match schedule {
        CnSchedule::Tree => {
            tree_update(inputs, &mut out);
        }
        CnSchedule::TwoMinima => two_minima_update(inputs, &mut out),
    }
    out
}

/// Two-minima update into `out`; the decoder's hot path.
#[inline]
pub(crate) fn two_minima_update(inputs: &[i16], out: &mut [i16]) {
    assert!(inputs.len() >= 2, "check node needs at least two inputs");
    let mut neg = false;
    let (mut m1, mut m2, mut pos) = (i16::MAX, i16::MAX, 0usize);
    for (i, &t) in inputs.iter().enumerate() {
        assert!(t != 0, "zero is not a message value");
        neg ^= t < 0;
        let a = t.abs();
        if a < m1 {
            m2 = m1;
            m1 = a;
            pos = i;
        } else if a < m2 {
            m2 = a;
        }
    }
    for (i, (&t, o)) in inputs.iter().zip(out.iter_mut()).enumerate() {
        let m = if i == pos { m2 } else { m1 };
        *o = if neg ^ (t < 0) { -m } else { m };
    }
}

struct Node {
    children: Option<(usize, usize)>,
    leaf: usize,
    val: i16,
}

/// Tree schedule; returns the number of pairwise combines performed.
pub(crate) fn tree_update(inputs: &[i16], out: &mut [i16]) -> usize {
    assert!(inputs.len() >= 2, "check node needs at least two inputs");
    assert!(inputs.iter().all(|&t| t != 0), "zero is not a message value");
    let mut nodes: Vec<Node> = Vec::with_capacity(2 * inputs.len());
    fn build(nodes: &mut Vec<Node>, inputs: &[i16], lo: usize, hi: usize) -> usize {
        let id = if hi - lo == 1 {
            nodes.push(Node { children: None, leaf: lo, val: inputs[lo] });
            nodes.len() - 1
        } else {
            let mid = (lo + hi) / 2;
            let l = build(nodes, inputs, lo, mid);
            let r = build(nodes, inputs, mid, hi);
            nodes.push(Node { children: Some((l, r)), leaf: 0, val: 0 });
            nodes.len() - 1
        };
        id
    }
    let root = build(&mut nodes, inputs, 0, inputs.len());
    let mut count = 0;
    // Up pass over non-root internal nodes (children precede parents).
    for id in 0..root {
        if let Some((l, r)) = nodes[id].children {
            nodes[id].val = combine(nodes[l].val, nodes[r].val);
            count += 1;
        }
    }
    // Down pass: each child receives everything outside its subtree.
    let mut stack: Vec<(usize, Option<i16>)> = vec![(root, None)];
    while let Some((id, outside)) = stack.pop() {
        match nodes[id].children {
            None => out[nodes[id].leaf] = outside.expect("root is internal"),
            Some((l, r)) => {
                let (lv, rv) = (nodes[l].val, nodes[r].val);
                let (lo, ro) = match outside {
                    None => (rv, lv),
                    Some(o) => {
                        count += 2;
                        (combine(o, rv), combine(o, lv))
                    }
                };
                stack.push((l, Some(lo)));
                stack.push((r, Some(ro)));
            }
        }
    }
    count
}

/// Number of pairwise combines the tree schedule uses for `dc` inputs.
pub fn tree_comparisons(dc: usize) -> usize {
    let inputs = vec![1i16; dc];
    let mut out = vec![0; dc];
    tree_update(&inputs, &mut out)
}

/// Two-input Boolean gate; operands index earlier signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    And(usize, usize),
    Or(usize, usize),
    Xor(usize, usize),
}

/// Combinational circuit. Signals `0..inputs` are primary inputs; gate `k`
/// drives signal `inputs + k`.
#[derive(Clone, Debug)]
pub struct Netlist {
    pub inputs: usize,
    pub gates: Vec<Gate>,
    pub outputs: Vec<usize>,
}

impl Netlist {
    pub fn eval(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.inputs);
        let mut s = x.to_vec();
        for g in &self.gates {
            let v = match *g {
                Gate::And(a, b) => s[a] & s[b],
                Gate::Or(a, b) => s[a] | s[b],
                Gate::Xor(a, b) => s[a] ^ s[b],
            };
            s.push(v);
        }
        self.outputs.iter().map(|&o| s[o]).collect()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Longest gate path from any input to any output.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.inputs];
        for g in &self.gates {
            let (Gate::And(a, b) | Gate::Or(a, b) | Gate::Xor(a, b)) = *g;
            d.push(1 + d[a].max(d[b]));
        }
        self.outputs.iter().map(|&o| d[o]).max().unwrap_or(0)
    }
}

/// Two-input check node circuit for `w`-bit messages.
///
/// Inputs are `[s1, m1.., s2, m2..]` with magnitude bits most significant
/// first; outputs are `[s, m..]`.
pub fn cn_netlist(w: u32) -> Result<Netlist> {
    use Gate::*;
    match w {
        2 => Ok(Netlist { inputs: 4, gates: vec![Xor(0, 2), And(1, 3)], outputs: vec![4, 5] }),
        3 => {
            // s1 a1 a0 s2 b1 b0 -> signals 0..6
            let gates = vec![
                Xor(0, 3),   // 6: sign
                And(1, 4),   // 7: m1 = a1 b1
                And(2, 5),   // 8: a0 b0
                Xor(1, 4),   // 9: a1 != b1
                And(1, 5),   // 10: a1 b0
                And(4, 2),   // 11: b1 a0
                Or(10, 11),  // 12: lsb of the smaller operand
                And(9, 12),  // 13
                Or(8, 13),   // 14: m0
            ];
            Ok(Netlist { inputs: 6, gates, outputs: vec![6, 7, 14] })
        }
        _ => Err(Error::Unsupported(format!("no check node circuit for w = {w}"))),
    }
}

/// Sign bit (set for negative) followed by `|t| - 1`, most significant bit first.
pub fn encode_sign_magnitude(t: i16, w: u32) -> Vec<bool> {
    let code = (t.unsigned_abs() - 1) as u32;
    let mut bits = vec![t < 0];
    bits.extend((0..w - 1).rev().map(|k| code >> k & 1 == 1));
    bits
}

pub fn decode_sign_magnitude(bits: &[bool]) -> i16 {
    let code = bits[1..].iter().fold(0i16, |acc, &b| acc << 1 | b as i16);
    if bits[0] {
        -(code + 1)
    } else {
        code + 1
    }
}

/// Evaluates the gate-level circuit for one pair of messages.
pub fn cn_update_boolean(t1: i16, t2: i16, w: u32) -> Result<i16> {
    let net = cn_netlist(w)?;
    let mut x = encode_sign_magnitude(t1, w);
    x.extend(encode_sign_magnitude(t2, w));
    Ok(decode_sign_magnitude(&net.eval(&x)))
}

/// Exhaustive check of the circuit against the arithmetic rule:
/// `(matching pairs, total pairs, gates, depth)`.
pub fn verify_cn_circuit(w: u32) -> Result<(usize, usize, usize, usize)> {
    let net = cn_netlist(w)?;
    let h = 1i16 << (w - 1);
    let values: Vec<i16> = (-h..=h).filter(|&t| t != 0).collect();
    let mut hits = 0;
    for &a in &values {
        for &b in &values {
            if cn_update_boolean(a, b, w)? == combine(a, b) {
                hits += 1;
            }
        }
    }
    Ok((hits, values.len() * values.len(), net.gate_count(), net.depth()))
}
