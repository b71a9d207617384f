//! Edge-list networks and trace CSV files.
//!
//! Edge lists hold one `src dst weight` triple per line, 1-based, separated
//! by whitespace. `#` starts a comment. A missing weight column means 1.
//! Pairs that do not appear have weight 0, self-loops included.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::dynamics::Trace;
use crate::error::{Error, Result};
use crate::network::InfluenceNetwork;
use crate::opinion::OpinionVector;

/// Raw `(src, dst, weight)` triples, 0-based, plus the agent count implied by
/// the largest index.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn parse_edge_list(text: &str, origin: &Path) -> Result<EdgeList> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(
                lineno,
                format!("expected 'src dst [weight]', found {} fields", fields.len()),
            ));
        }
        let index = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(0) => Err(parse_err(lineno, "agent indices are 1-based".into())),
                Ok(i) => Ok(i - 1),
                Err(_) => Err(parse_err(lineno, format!("bad agent index '{s}'"))),
            }
        };
        let src = index(fields[0])?;
        let dst = index(fields[1])?;
        let weight = match fields.get(2) {
            None => 1.0,
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| parse_err(lineno, format!("bad weight '{s}'")))?,
        };
        n = n.max(src + 1).max(dst + 1);
        edges.push((src, dst, weight));
    }
    if n == 0 {
        return Err(parse_err(0, "no edges".into()));
    }
    Ok(EdgeList { n, edges })
}

impl EdgeList {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_edge_list(&text, path)
    }

    /// Dense row-major weights; repeated pairs accumulate.
    pub fn dense(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n * self.n];
        for &(i, j, v) in &self.edges {
            w[i * self.n + j] += v;
        }
        w
    }

    pub fn into_network(self, normalize: bool) -> Result<InfluenceNetwork> {
        let n = self.n;
        let w = self.dense();
        if normalize {
            InfluenceNetwork::normalized(n, w)
        } else {
            InfluenceNetwork::new(n, w)
        }
    }
}

/// Reads an edge-list file into a network, optionally rescaling each row to
/// sum to one.
pub fn load_network(path: &Path, normalize: bool) -> Result<InfluenceNetwork> {
    EdgeList::read(path)?.into_network(normalize)
}

/// Edge-list text for every non-zero weight, row by row.
pub fn format_edge_list(net: &InfluenceNetwork) -> String {
    let mut out = String::new();
    for (i, row) in net.rows().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w != 0.0 {
                let _ = writeln!(out, "{} {} {:?}", i + 1, j + 1, w);
            }
        }
    }
    out
}

pub fn write_trace_csv<W: Write>(trace: &Trace, mut out: W) -> std::io::Result<()> {
    let mut header = String::from("t");
    for i in 1..=trace.n() {
        let _ = write!(header, ",x{i}");
    }
    header.push('\n');
    out.write_all(header.as_bytes())?;
    let mut line = String::new();
    for (t, state) in trace.iter() {
        line.clear();
        let _ = write!(line, "{t}");
        for v in state.iter() {
            // 17 significant digits
            let _ = write!(line, ",{v:.16e}");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// Writes the trace as CSV: header `t,x1,...,xn`, one row per recorded step.
pub fn export_trace(trace: &Trace, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(trace, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads back the `(t, state)` rows of a trace CSV.
pub fn read_trace_csv(path: &Path) -> Result<Vec<(usize, OpinionVector)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rows = Vec::new();
    let mut width = None;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split(',').collect();
        if lineno == 0 {
            if fields.first() != Some(&"t") {
                return Err(parse_err(1, "missing 't' header".into()));
            }
            width = Some(fields.len());
            continue;
        }
        if Some(fields.len()) != width {
            return Err(parse_err(lineno + 1, "row width differs from header".into()));
        }
        let t = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno + 1, format!("bad time '{}'", fields[0])))?;
        let x = fields[1..]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(lineno + 1, e.to_string()))?;
        rows.push((t, OpinionVector::new(x)?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StopReason;

    fn origin() -> &'static Path {
        Path::new("test.edges")
    }

    #[test]
    fn parses_reciprocal_pair() {
        let el = parse_edge_list("1 2 1.0\n2 1 1.0\n", origin()).unwrap();
        let net = el.into_network(false).unwrap();
        assert_eq!(net.n(), 2);
        assert_eq!(net.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn comments_and_default_weight() {
        let text = "# header\n1 1\n\n2 2 # trailing\n";
        let net = parse_edge_list(text, origin()).unwrap().into_network(false).unwrap();
        assert_eq!(net.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn short_row_needs_normalize() {
        let text = "1 1 0.5\n1 2 0.3\n2 2 1\n";
        let el = parse_edge_list(text, origin()).unwrap();
        assert!(matches!(el.clone().into_network(false), Err(Error::Input(_))));
        let net = el.into_network(true).unwrap();
        let row: f64 = net.row(0).iter().sum();
        assert!((row - 1.0).abs() < 1e-15);
        assert!((net.weight(0, 0) - 0.5 / 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_row_rejected_even_when_normalizing() {
        let el = parse_edge_list("1 2 1\n", origin()).unwrap();
        assert!(el.into_network(true).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [("1 2 1\n1 x 1\n", 2), ("\n\n0 1 1\n", 3), ("1 2 -1\n", 1), ("1\n", 1)] {
            match parse_edge_list(text, origin()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let net = InfluenceNetwork::from_rows(&[vec![0.25, 0.75], vec![0.1, 0.9]]).unwrap();
        let text = format_edge_list(&net);
        let back = parse_edge_list(&text, origin()).unwrap().into_network(false).unwrap();
        assert_eq!(back, net);
    }

    fn trace(states: Vec<Vec<f64>>) -> Trace {
        Trace {
            times: (0..states.len()).collect(),
            states: states.into_iter().map(|s| OpinionVector::new(s).unwrap()).collect(),
            converged: false,
            limit: None,
            steps: 0,
            stop_reason: StopReason::MaxSteps,
            period: None,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_trace_csv(&trace(vec![vec![0.5, -0.1], vec![1.0 / 3.0, 0.0]]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4); // three lines plus the final empty split
        assert_eq!(lines[0], "t,x1,x2");
        assert_eq!(lines[1], "0,5.0000000000000000e-1,-1.0000000000000001e-1");
        assert!(lines[2].starts_with("1,3.3333333333333331e-1,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn empty_trace_is_header_only() {
        let mut buf = Vec::new();
        write_trace_csv(&trace(vec![]), &mut buf).unwrap();
        assert_eq!(buf, b"t\n");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let states = vec![
            vec![0.1, 1e-300, -2.5e17],
            vec![std::f64::consts::PI, -0.0, 123456.789],
        ];
        let tr = trace(states.clone());
        export_trace(&tr, &path).unwrap();
        let back = read_trace_csv(&path).unwrap();
        for ((t, x), orig) in back.iter().zip(&states) {
            assert!(x.iter().zip(orig).all(|(a, b)| a.to_bits() == b.to_bits()), "t={t}");
        }
    }
}
