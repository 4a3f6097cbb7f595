//! Text formats: net files, complex literals, and the matrix-dump based
//! ensemble and POM files.
//!
//! A net file is a list of node blocks:
//!
//! ```text
//! [node e]
//! states = 2x2
//! parents =
//! matrix =
//!   0+0i
//!   0.7071067811865476+0i
//!   -0.7071067811865476+0i
//!   0+0i
//! ```
//!
//! Matrix rows are node states, columns are parent tuples in lexicographic
//! order with the first parent slowest. `#` starts a comment.

use num_complex::Complex64;
use qbnet::infotheory::Ensemble;
use qbnet::linalg::CMat;
use qbnet::measure::Pom;
use qbnet::netcore::{NetBuilder, QbNet};
use qbnet::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<Complex64>>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetFile {
    pub nodes: Vec<NodeBlock>,
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    }
}

/// Column (1-based) of `part` inside `line`; both must share storage.
fn col_of(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

/// Splits on whitespace, keeping each token's 1-based column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Length of the decimal prefix of `s` (digits, one point, optional exponent).
fn decimal_len(s: &[u8]) -> usize {
    let mut i = 0;
    let mut digits = 0;
    while i < s.len() && s[i].is_ascii_digit() {
        i += 1;
        digits += 1;
    }
    if i < s.len() && s[i] == b'.' {
        i += 1;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
    }
    if digits == 0 {
        return 0;
    }
    if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
        let mut j = i + 1;
        if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
            j += 1;
        }
        let k = j;
        while j < s.len() && s[j].is_ascii_digit() {
            j += 1;
        }
        if j > k {
            i = j;
        }
    }
    i
}

/// Parses `a`, `a+bi`, `a-bi` or `bi` (signs optional). On failure returns the
/// byte offset of the problem.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, (usize, String)> {
    let b = s.as_bytes();
    let mut i = 0;
    let sign = |c: u8| c == b'+' || c == b'-';
    if i < b.len() && sign(b[i]) {
        i += 1;
    }
    let n = decimal_len(&b[i..]);
    if n == 0 {
        return Err((i, format!("expected a decimal number in `{s}`")));
    }
    i += n;
    let first: f64 = s[..i].parse().map_err(|_| (0, format!("bad number `{}`", &s[..i])))?;
    if i == b.len() {
        return Ok(Complex64::new(first, 0.0));
    }
    if b[i] == b'i' && i + 1 == b.len() {
        return Ok(Complex64::new(0.0, first));
    }
    if !sign(b[i]) {
        return Err((i, format!("unexpected `{}`", &s[i..i + 1])));
    }
    let start = i;
    i += 1;
    let n = decimal_len(&b[i..]);
    i += n;
    if i >= b.len() || b[i] != b'i' {
        return Err((i, "imaginary part must end in `i`".into()));
    }
    if i + 1 != b.len() {
        return Err((i + 1, "trailing characters after `i`".into()));
    }
    let im = if n == 0 {
        if b[start] == b'-' { -1.0 } else { 1.0 }
    } else {
        s[start..i].parse().map_err(|_| (start, format!("bad number `{}`", &s[start..i])))?
    };
    Ok(Complex64::new(first, im))
}

/// Shortest round-trip form, `re+imi`.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn parse_row(line: &str, body: &str, lineno: usize) -> Result<Vec<Complex64>> {
    tokens(body)
        .into_iter()
        .map(|(c, tok)| {
            let c = c + col_of(line, body) - 1;
            parse_complex(tok).map_err(|(off, msg)| perr(lineno, c + off, msg))
        })
        .collect()
}

impl NetFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = NetFile::default();
        let mut in_matrix = false;
        let mut seen: Vec<&'static str> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let lineno = k + 1;
            let line = strip_comment(raw);
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let col = col_of(line, trimmed);
            if let Some(rest) = trimmed.strip_prefix('[') {
                let inner = rest
                    .strip_suffix(']')
                    .ok_or_else(|| perr(lineno, col + trimmed.len(), "expected `]`"))?;
                let name = inner
                    .trim()
                    .strip_prefix("node")
                    .filter(|r| r.starts_with(char::is_whitespace))
                    .map(str::trim)
                    .ok_or_else(|| perr(lineno, col + 1, "expected `[node <name>]`"))?;
                if !is_ident(name) {
                    return Err(perr(lineno, col_of(line, name), format!("invalid node name `{name}`")));
                }
                finish_block(&file, &seen)?;
                file.nodes.push(NodeBlock {
                    name: name.to_string(),
                    shape: Vec::new(),
                    parents: Vec::new(),
                    rows: Vec::new(),
                    line: lineno,
                });
                in_matrix = false;
                seen.clear();
                continue;
            }
            let Some(block) = file.nodes.last_mut() else {
                return Err(perr(lineno, col, "content before the first `[node ...]` block"));
            };
            if let Some(eq) = trimmed.find('=') {
                let key = trimmed[..eq].trim();
                let value = &trimmed[eq + 1..];
                let key: &'static str = match key {
                    "states" => "states",
                    "parents" => "parents",
                    "matrix" => "matrix",
                    _ => return Err(perr(lineno, col, format!("unknown key `{key}`"))),
                };
                if seen.contains(&key) {
                    return Err(perr(lineno, col, format!("duplicate key `{key}`")));
                }
                seen.push(key);
                in_matrix = false;
                match key {
                    "states" => {
                        for part in value.split(['x', 'X']) {
                            let p = part.trim();
                            let d: usize = p.parse().ok().filter(|&d| d > 0).ok_or_else(|| {
                                perr(lineno, col_of(line, p), format!("invalid dimension `{p}`"))
                            })?;
                            block.shape.push(d);
                        }
                    }
                    "parents" => {
                        if !value.trim().is_empty() {
                            for part in value.split(',') {
                                let p = part.trim();
                                if !is_ident(p) {
                                    return Err(perr(lineno, col_of(line, p), format!("invalid parent name `{p}`")));
                                }
                                block.parents.push(p.to_string());
                            }
                        }
                    }
                    _ => {
                        in_matrix = true;
                        if !value.trim().is_empty() {
                            block.rows.push(parse_row(line, value, lineno)?);
                        }
                    }
                }
                continue;
            }
            if !in_matrix {
                return Err(perr(lineno, col, "expected `key = value`"));
            }
            block.rows.push(parse_row(line, line, lineno)?);
        }
        finish_block(&file, &seen)?;
        Ok(file)
    }

    /// Builds the net. Shape and structure errors come from the net builder.
    pub fn to_net(&self) -> Result<QbNet> {
        let mut b = NetBuilder::new();
        for n in &self.nodes {
            let cols = n.rows.first().map_or(0, Vec::len);
            if let Some((r, row)) = n.rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
                return Err(Error::DimensionMismatch(format!(
                    "node `{}`: matrix row {} has {} entries, row 0 has {cols}",
                    n.name,
                    r,
                    row.len()
                )));
            }
            let flat: Vec<Complex64> = n.rows.iter().flatten().copied().collect();
            let m = CMat::from_row_slice(n.rows.len(), cols, &flat);
            let parents: Vec<&str> = n.parents.iter().map(String::as_str).collect();
            b = b.node(&n.name, &n.shape, &parents, m);
        }
        b.build()
    }

    pub fn from_net(net: &QbNet) -> Self {
        let dag = net.dag();
        let nodes = (0..dag.len())
            .map(|i| {
                let m = net.matrix_at(i);
                NodeBlock {
                    name: dag.name(i).to_string(),
                    shape: dag.node(i).shape.clone(),
                    parents: dag.parents_of(i).iter().map(|&p| dag.name(p).to_string()).collect(),
                    rows: (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect(),
                    line: 0,
                }
            })
            .collect();
        NetFile { nodes }
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let shape: Vec<String> = n.shape.iter().map(usize::to_string).collect();
            out.push_str(&format!("[node {}]\n", n.name));
            out.push_str(&format!("states = {}\n", shape.join("x")));
            out.push_str(&format!("parents = {}\n", n.parents.join(",")).replace(" \n", "\n"));
            out.push_str("matrix =\n");
            for row in &n.rows {
                let cells: Vec<String> = row.iter().map(|&z| format_complex(z)).collect();
                out.push_str(&format!("  {}\n", cells.join(" ")));
            }
        }
        out
    }
}

fn finish_block(file: &NetFile, seen: &[&str]) -> Result<()> {
    if let Some(n) = file.nodes.last() {
        for key in ["states", "matrix"] {
            if !seen.contains(&key) {
                return Err(perr(n.line, 1, format!("node `{}` has no `{key}`", n.name)));
            }
        }
        if n.rows.is_empty() {
            return Err(perr(n.line, 1, format!("node `{}` has an empty matrix", n.name)));
        }
    }
    Ok(())
}

/// Meaningful lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = strip_comment(l);
        (!l.trim().is_empty()).then_some((k + 1, l))
    })
}

/// `dim d, <what> n`.
fn parse_header(lineno: usize, line: &str, what: &str) -> Result<(usize, usize)> {
    let err = || perr(lineno, 1, format!("expected header `dim <d>, {what} <n>`"));
    let (a, b) = line.split_once(',').ok_or_else(err)?;
    let num = |part: &str, key: &str| -> Option<usize> {
        part.trim().strip_prefix(key)?.trim().parse().ok().filter(|&v| v > 0)
    };
    Ok((num(a, "dim").ok_or_else(err)?, num(b, what).ok_or_else(err)?))
}

/// `count` matrices of dimension `d` from `row col re im` lines.
fn parse_dumps<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, d: usize, count: usize) -> Result<Vec<CMat>> {
    let mut out = Vec::with_capacity(count);
    let mut last = 0;
    for k in 0..count {
        let mut m = CMat::zeros(d, d);
        let mut filled = vec![false; d * d];
        for _ in 0..d * d {
            let (lineno, line) =
                lines.next().ok_or_else(|| perr(last + 1, 1, format!("matrix {k} is incomplete")))?;
            last = lineno;
            let toks = tokens(line);
            if toks.len() != 4 {
                return Err(perr(lineno, 1, "expected `row col re im`"));
            }
            let idx = |t: usize| -> Result<usize> {
                toks[t].1.parse().ok().filter(|&v| v < d).ok_or_else(|| {
                    perr(lineno, toks[t].0, format!("index `{}` out of range 0..{d}", toks[t].1))
                })
            };
            let val = |t: usize| -> Result<f64> {
                toks[t].1.parse().map_err(|_| perr(lineno, toks[t].0, format!("bad number `{}`", toks[t].1)))
            };
            let (r, c) = (idx(0)?, idx(1)?);
            if filled[r * d + c] {
                return Err(perr(lineno, 1, format!("entry ({r}, {c}) given twice")));
            }
            filled[r * d + c] = true;
            m[(r, c)] = Complex64::new(val(2)?, val(3)?);
        }
        out.push(m);
    }
    if let Some((lineno, _)) = lines.next() {
        return Err(perr(lineno, 1, "unexpected content after the last matrix"));
    }
    Ok(out)
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    let mut lines = content_lines(text);
    let (lineno, header) = lines.next().ok_or_else(|| perr(1, 1, "empty ensemble file"))?;
    let (d, n) = parse_header(lineno, header, "signals")?;
    let (wline, weights) = lines.next().ok_or_else(|| perr(lineno + 1, 1, "missing weight line"))?;
    let w = tokens(weights)
        .into_iter()
        .map(|(c, t)| t.parse::<f64>().map_err(|_| perr(wline, c, format!("bad weight `{t}`"))))
        .collect::<Result<Vec<f64>>>()?;
    if w.len() != n {
        return Err(perr(wline, 1, format!("expected {n} weights, found {}", w.len())));
    }
    Ensemble::new(w, parse_dumps(&mut lines, d, n)?)
}

pub fn parse_pom(text: &str) -> Result<Pom> {
    let mut lines = content_lines(text);
    let (lineno, header) = lines.next().ok_or_else(|| perr(1, 1, "empty POM file"))?;
    let (d, m) = parse_header(lineno, header, "outcomes")?;
    Pom::new(parse_dumps(&mut lines, d, m)?)
}

fn dump(m: &CMat) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            s.push_str(&format!("{i}\t{j}\t{}\t{}\n", m[(i, j)].re, m[(i, j)].im));
        }
    }
    s
}

pub fn write_ensemble(e: &Ensemble) -> String {
    let w: Vec<String> = e.weights().iter().map(f64::to_string).collect();
    let mut s = format!("dim {}, signals {}\n{}\n", e.dim(), e.len(), w.join(" "));
    for m in e.signals() {
        s.push_str(&dump(m));
    }
    s
}

pub fn write_pom(p: &Pom) -> String {
    let mut s = format!("dim {}, outcomes {}\n", p.dim(), p.outcomes());
    for m in p.elements() {
        s.push_str(&dump(m));
    }
    s
}

/// Comma-separated complex literals, as taken by `--alpha`.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in s.split(',') {
        let lead = part.len() - part.trim_start().len();
        out.push(parse_complex(part.trim()).map_err(|(off, msg)| perr(1, offset + lead + off + 1, msg))?);
        offset += part.len() + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("1"), Ok(c(1.0, 0.0)));
        assert_eq!(parse_complex("-0.5+0.25i"), Ok(c(-0.5, 0.25)));
        assert_eq!(parse_complex("+.5-2i"), Ok(c(0.5, -2.0)));
        assert_eq!(parse_complex("0.5i"), Ok(c(0.0, 0.5)));
        assert_eq!(parse_complex("1-i"), Ok(c(1.0, -1.0)));
        assert_eq!(parse_complex("1e-3+2E2i"), Ok(c(1e-3, 200.0)));
        assert_eq!(parse_complex("1.2.3").unwrap_err().0, 3);
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2").is_err());
        assert!(parse_complex("1+2ix").is_err());
        for z in [c(0.1, -0.0), c(-1.0 / 3.0, 2.0f64.sqrt()), c(1e-300, -7.25)] {
            assert_eq!(parse_complex(&format_complex(z)), Ok(z));
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = "[node a]\nstates = 2\nparents =\nmatrix =\n  1+0i\n  0+0j\n";
        match NetFile::parse(text) {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (6, 6)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(NetFile::parse("states = 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(NetFile::parse("[node a]\nstates = 0\n"), Err(Error::Parse { line: 2, col: 10, .. })));
        assert!(matches!(NetFile::parse("[node a]\nstates = 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(NetFile::parse("[node a]\ncolor = 2\n"), Err(Error::Parse { line: 2, .. })));
    }

    fn round_trip(net: &QbNet) {
        let text = NetFile::from_net(net).write();
        let back = NetFile::parse(&text).unwrap().to_net().unwrap();
        assert_eq!(back.dag(), net.dag());
        let mut count = 0;
        for s in qbnet::netcore::stories(net.dag()).unwrap() {
            assert_eq!(back.story_amplitude(&s).unwrap(), net.story_amplitude(&s).unwrap());
            count += 1;
        }
        assert_eq!(count as u128, net.dag().story_count());
    }

    #[test]
    fn export_round_trip() {
        use qbnet::protocols::*;
        let mut rng = qbnet::random::seeded(3);
        round_trip(&epr_net().net);
        round_trip(&eraser_net().net);
        round_trip(&teleport_net(&demo_alpha2()).unwrap().net);
        round_trip(&dense_coding_net(&demo_alpha4()).unwrap().net);
        for steps in [1, 2] {
            let p = SysEnvParams::random(&mut rng, steps, 2, 2, 2);
            round_trip(&sys_env_net(steps, &p).unwrap().net);
        }
        round_trip(&two_mixtures_net(&TwoMixParams::random(&mut rng, [2, 3], [2, 1])).unwrap().net);
        round_trip(&interference_witness());
    }

    #[test]
    fn header_and_dumps() {
        let text = "# trivial\ndim 1, signals 2\n0.25 0.75\n0\t0\t1\t0\n0 0 1 0\n";
        let e = parse_ensemble(text).unwrap();
        assert_eq!(e.weights(), &[0.25, 0.75]);
        assert!(parse_ensemble("dim 1, signals 1\n1\n").is_err());
        assert!(parse_ensemble("dim x, signals 1\n1\n0 0 1 0\n").is_err());
        let p = parse_pom("dim 2, outcomes 1\n0 0 1 0\n0 1 0 0\n1 0 0 0\n1 1 1 0\n").unwrap();
        assert_eq!(p.outcomes(), 1);
        assert_eq!(parse_pom(&write_pom(&p)).unwrap().elements(), p.elements());
    }
}
