//! MacKay alist format: 1-based indices on disk, zero padding permitted.

use std::fmt::Write;

use super::CodeGraph;
use crate::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, integers).
    fn next_row(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("invalid integer {tok:?} in {what}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((line_no, nums));
        }
        Err(Error::Parse { line: 0, msg: format!("unexpected end of input while reading {what}") })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses alist text into a validated [`CodeGraph`].
pub fn parse_alist(text: &str) -> Result<CodeGraph> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (l, dims) = lines.next_row("dimensions")?;
    let [n, nc] = dims[..] else {
        return Err(perr(l, "expected `N N_c` on the first line"));
    };
    let (l, maxes) = lines.next_row("maximum degrees")?;
    let [max_dv, max_dc] = maxes[..] else {
        return Err(perr(l, "expected two maximum degrees"));
    };
    let (l, var_deg) = lines.next_row("variable degrees")?;
    if var_deg.len() != n {
        return Err(perr(l, format!("degree list length {} does not match N = {n}", var_deg.len())));
    }
    let (l, chk_deg) = lines.next_row("check degrees")?;
    if chk_deg.len() != nc {
        return Err(perr(l, format!("degree list length {} does not match N_c = {nc}", chk_deg.len())));
    }
    if let Some(d) = var_deg.iter().find(|&&d| d > max_dv) {
        return Err(perr(l, format!("variable degree {d} exceeds declared maximum {max_dv}")));
    }
    if let Some(d) = chk_deg.iter().find(|&&d| d > max_dc) {
        return Err(perr(l, format!("check degree {d} exceeds declared maximum {max_dc}")));
    }

    let mut from_vars = Vec::new();
    for (v, &deg) in var_deg.iter().enumerate() {
        let (l, row) = lines.next_row("variable neighbour list")?;
        let idx: Vec<usize> = row.into_iter().filter(|&x| x != 0).collect();
        if idx.len() != deg {
            return Err(perr(l, format!("variable {} lists {} checks, degree is {deg}", v + 1, idx.len())));
        }
        for c in idx {
            if c > nc {
                return Err(perr(l, format!("check index {c} out of range 1..={nc}")));
            }
            from_vars.push((c - 1, v));
        }
        let mut seen: Vec<_> = from_vars.iter().filter(|p| p.1 == v).map(|p| p.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(perr(l, format!("duplicate edge in variable {} list", v + 1)));
        }
    }
    let mut from_checks = Vec::new();
    for (c, &deg) in chk_deg.iter().enumerate() {
        let (l, row) = lines.next_row("check neighbour list")?;
        let mut idx: Vec<usize> = row.into_iter().filter(|&x| x != 0).collect();
        if idx.len() != deg {
            return Err(perr(l, format!("check {} lists {} variables, degree is {deg}", c + 1, idx.len())));
        }
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(perr(l, format!("duplicate edge in check {} list", c + 1)));
        }
        for v in idx {
            if v > n {
                return Err(perr(l, format!("variable index {v} out of range 1..={n}")));
            }
            from_checks.push((c, v - 1));
        }
    }
    from_vars.sort_unstable();
    from_checks.sort_unstable();
    if from_vars != from_checks {
        return Err(perr(0, "variable and check neighbour lists describe different matrices"));
    }
    CodeGraph::from_edges(n, nc, from_checks)
}

/// Canonical alist text: ascending neighbour lists, zero padded to the maximum degree.
pub fn write_alist(graph: &CodeGraph) -> String {
    let n = graph.num_vars();
    let nc = graph.num_checks();
    let var_deg: Vec<usize> = (0..n).map(|v| graph.var_degree(v)).collect();
    let chk_deg: Vec<usize> = (0..nc).map(|c| graph.check_degree(c)).collect();
    let max_dv = var_deg.iter().copied().max().unwrap_or(0);
    let max_dc = chk_deg.iter().copied().max().unwrap_or(0);
    let join = |xs: &mut dyn Iterator<Item = usize>| {
        xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    writeln!(out, "{n} {nc}").unwrap();
    writeln!(out, "{max_dv} {max_dc}").unwrap();
    writeln!(out, "{}", join(&mut var_deg.iter().copied())).unwrap();
    writeln!(out, "{}", join(&mut chk_deg.iter().copied())).unwrap();
    for v in 0..n {
        let checks = graph.var_neighbors(v);
        let mut it = checks.iter().map(|&c| c as usize + 1).chain(std::iter::repeat(0)).take(max_dv);
        writeln!(out, "{}", join(&mut it)).unwrap();
    }
    for c in 0..nc {
        let vars = graph.check_neighbors(c);
        let mut it = vars.iter().map(|&v| v as usize + 1).chain(std::iter::repeat(0)).take(max_dc);
        writeln!(out, "{}", join(&mut it)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "6 3
2 3
2 2 1 1 2 1
3 3 3

1 3
1 2
2 0
1 0
2 3
3 0
1 2 4
2 3 5
1 5 6
";

    #[test]
    fn handcrafted_round_trip() {
        let g = parse_alist(SMALL).unwrap();
        assert_eq!((g.num_vars(), g.num_checks()), (6, 3));
        assert!(g.is_consistent());
        let text = write_alist(&g);
        assert_eq!(text, SMALL.replace("\n\n", "\n"));
        assert_eq!(parse_alist(&text).unwrap(), g);
    }

    #[test]
    fn degree_list_length_mismatch() {
        let bad = SMALL.replacen("2 2 1 1 2 1", "2 2 1 1 2 1 1", 1);
        let err = parse_alist(&bad).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("degree list length"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn out_of_range_and_duplicates() {
        let bad = SMALL.replacen("1 3\n", "1 4\n", 1);
        assert!(matches!(parse_alist(&bad), Err(Error::Parse { line: 6, .. })));
        let dup = SMALL.replacen("1 2 4\n", "1 1 4\n", 1);
        assert!(parse_alist(&dup).is_err());
        let inconsistent = SMALL.replacen("1 5 6\n", "1 4 6\n", 1);
        assert!(parse_alist(&inconsistent).is_err());
        assert!(parse_alist("6 3\n2 3\n").is_err());
        assert!(parse_alist("6 x\n").is_err());
    }

    #[test]
    fn regular_matrix_counts() {
        // (3,6)-regular, N = 12: one permuted pair of checks per layer.
        let mut edges = Vec::new();
        for (layer, k) in [1usize, 5, 7].into_iter().enumerate() {
            for v in 0..12 {
                let c = layer * 2 + (v * k % 12) / 6;
                edges.push((c, v));
            }
        }
        let g = CodeGraph::from_edges(12, 6, edges).unwrap();
        let parsed = parse_alist(&write_alist(&g)).unwrap();
        assert_eq!(parsed.regular_degrees(), Some((3, 6)));
        for c in 0..6 {
            assert_eq!(parsed.check_degree(c), 6);
        }
        assert_eq!(parsed, g);
    }
}
