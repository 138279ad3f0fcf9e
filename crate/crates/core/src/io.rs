//! Matrix Market files carrying a `%%block m k` header, and TOML splitting
//! descriptors.
//!
//! Indices in files are 1-based; everything in memory is 0-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::blockcore::{BlockMatrix, BlockVector, Dense, C64};
use crate::error::{Error, Result};
use crate::splitting::{gaor_multisplitting, multisplit_from_index_sets, BlockWeights, IndexSetSplit, Multisplitting, Pair, TripleSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmFormat {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field_of(data: &Dense) -> Field {
    if data.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

fn write_value(out: &mut String, z: C64, field: Field) {
    match field {
        Field::Real => write!(out, "{:e}", z.re),
        Field::Complex => write!(out, "{:e} {:e}", z.re, z.im),
    }
    .expect("writing to a String");
}

fn mm_text(data: &Dense, block: (usize, usize), format: MmFormat) -> String {
    let field = field_of(data);
    let field_name = if field == Field::Real { "real" } else { "complex" };
    let (rows, cols) = data.shape();
    let mut out = String::new();
    match format {
        MmFormat::Array => {
            writeln!(out, "%%MatrixMarket matrix array {field_name} general").unwrap();
            writeln!(out, "%%block {} {}", block.0, block.1).unwrap();
            writeln!(out, "{rows} {cols}").unwrap();
            for j in 0..cols {
                for i in 0..rows {
                    write_value(&mut out, data[(i, j)], field);
                    out.push('\n');
                }
            }
        }
        MmFormat::Coordinate => {
            let nnz = data.iter().filter(|z| **z != C64::new(0.0, 0.0)).count();
            writeln!(out, "%%MatrixMarket matrix coordinate {field_name} general").unwrap();
            writeln!(out, "%%block {} {}", block.0, block.1).unwrap();
            writeln!(out, "{rows} {cols} {nnz}").unwrap();
            for j in 0..cols {
                for i in 0..rows {
                    let z = data[(i, j)];
                    if z != C64::new(0.0, 0.0) {
                        write!(out, "{} {} ", i + 1, j + 1).unwrap();
                        write_value(&mut out, z, field);
                        out.push('\n');
                    }
                }
            }
        }
    }
    out
}

pub fn write_matrix<W: Write>(mut w: W, a: &BlockMatrix, format: MmFormat) -> Result<()> {
    w.write_all(mm_text(a.as_dense(), (a.m(), a.k()), format).as_bytes())?;
    Ok(())
}

pub fn write_vector<W: Write>(mut w: W, v: &BlockVector) -> Result<()> {
    let col = Dense::from_column_slice(v.len(), 1, v.as_dense().as_slice());
    w.write_all(mm_text(&col, (v.m(), v.k()), MmFormat::Array).as_bytes())?;
    Ok(())
}

/// Parsed Matrix Market content with the optional block header.
#[derive(Debug, Clone, PartialEq)]
pub struct MmData {
    pub data: Dense,
    pub block: Option<(usize, usize)>,
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing value"))?;
    tok.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<usize>().map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_value<'a>(toks: &mut impl Iterator<Item = &'a str>, field: Field, line: usize) -> Result<C64> {
    let re = parse_f64(toks.next(), line)?;
    let im = if field == Field::Complex { parse_f64(toks.next(), line)? } else { 0.0 };
    Ok(C64::new(re, im))
}

pub fn read_mm<R: BufRead>(r: R) -> Result<MmData> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let banner = banner?;
    let words: Vec<String> = banner.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let format = match words[2].as_str() {
        "array" => MmFormat::Array,
        "coordinate" => MmFormat::Coordinate,
        other => return Err(parse_err(1, format!("unsupported format `{other}`"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut block = None;
    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, Vec<String>)> = Vec::new();
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("%%block") {
            let mut toks = rest.split_whitespace();
            let m = parse_usize(toks.next(), no, "block count")?;
            let k = parse_usize(toks.next(), no, "block size")?;
            block = Some((m, k));
            continue;
        }
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<String> = t.split_whitespace().map(str::to_owned).collect();
        if size.is_none() {
            let mut it = toks.iter().map(String::as_str);
            let rows = parse_usize(it.next(), no, "row count")?;
            let cols = parse_usize(it.next(), no, "column count")?;
            let nnz = match format {
                MmFormat::Coordinate => parse_usize(it.next(), no, "entry count")?,
                MmFormat::Array => match symmetry {
                    Symmetry::General => rows * cols,
                    _ => rows * (rows + 1) / 2,
                },
            };
            if symmetry != Symmetry::General && rows != cols {
                return Err(parse_err(no, "symmetric storage needs a square matrix"));
            }
            size = Some((rows, cols, nnz));
        } else {
            entries.push((no, toks));
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(parse_err(entries.last().map_or(1, |e| e.0), format!("expected {nnz} entries, found {}", entries.len())));
    }

    let mut data = Dense::zeros(rows, cols);
    let mut put = |i: usize, j: usize, z: C64| {
        data[(i, j)] = z;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => data[(j, i)] = z,
                Symmetry::Hermitian => data[(j, i)] = z.conj(),
            }
        }
    };
    match format {
        MmFormat::Array => {
            let positions: Vec<(usize, usize)> = match symmetry {
                Symmetry::General => (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).collect(),
                _ => (0..cols).flat_map(|j| (j..rows).map(move |i| (i, j))).collect(),
            };
            for ((no, toks), (i, j)) in entries.iter().zip(positions) {
                let mut it = toks.iter().map(String::as_str);
                put(i, j, parse_value(&mut it, field, *no)?);
            }
        }
        MmFormat::Coordinate => {
            for (no, toks) in &entries {
                let mut it = toks.iter().map(String::as_str);
                let i = parse_usize(it.next(), *no, "row index")?;
                let j = parse_usize(it.next(), *no, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(*no, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                if symmetry != Symmetry::General && j > i {
                    return Err(parse_err(*no, "symmetric storage lists the lower triangle only"));
                }
                put(i - 1, j - 1, parse_value(&mut it, field, *no)?);
            }
        }
    }
    Ok(MmData { data, block })
}

/// Reads a block matrix; `default_k` is used when the file has no `%%block` line.
pub fn read_matrix<R: BufRead>(r: R, default_k: Option<usize>) -> Result<BlockMatrix> {
    let mm = read_mm(r)?;
    let n = mm.data.nrows();
    let (m, k) = match (mm.block, default_k) {
        (Some(b), _) => b,
        (None, Some(k)) if k > 0 && n % k == 0 => (n / k, k),
        (None, Some(k)) => return Err(Error::DimensionMismatch(format!("block size {k} does not divide {n}"))),
        (None, None) => return Err(parse_err(1, "missing `%%block m k` header and no block size given")),
    };
    BlockMatrix::from_dense(mm.data, m, k)
}

/// Reads a column vector; `shape` is used when the file has no `%%block` line.
pub fn read_vector<R: BufRead>(r: R, shape: Option<(usize, usize)>) -> Result<BlockVector> {
    let mm = read_mm(r)?;
    if mm.data.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!("vector file has {} columns", mm.data.ncols())));
    }
    let (m, k) = mm.block.or(shape).ok_or_else(|| parse_err(1, "missing `%%block m k` header"))?;
    BlockVector::from_dense(DVector::from_column_slice(mm.data.as_slice()), m, k)
}

pub fn save_matrix(path: &Path, a: &BlockMatrix, format: MmFormat) -> Result<()> {
    write_matrix(fs::File::create(path)?, a, format)
}

pub fn load_matrix(path: &Path, default_k: Option<usize>) -> Result<BlockMatrix> {
    read_matrix(BufReader::new(fs::File::open(path)?), default_k)
}

pub fn save_vector(path: &Path, v: &BlockVector) -> Result<()> {
    write_vector(fs::File::create(path)?, v)
}

pub fn load_vector(path: &Path, shape: Option<(usize, usize)>) -> Result<BlockVector> {
    read_vector(BufReader::new(fs::File::open(path)?), shape)
}

/// A weight given as a number or as text such as `"1/6"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightValue {
    Number(f64),
    Text(String),
}

impl WeightValue {
    pub fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Self::Number(x) => Ok(*x),
            Self::Text(t) => {
                let t = t.trim();
                match t.split_once('/') {
                    Some((p, q)) => {
                        let p: f64 = p.trim().parse().map_err(|_| format!("invalid numerator in `{t}`"))?;
                        let q: f64 = q.trim().parse().map_err(|_| format!("invalid denominator in `{t}`"))?;
                        if q == 0.0 {
                            return Err(format!("zero denominator in `{t}`"));
                        }
                        Ok(p / q)
                    }
                    None => t.parse().map_err(|_| format!("invalid weight `{t}`")),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_set: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_set: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_set: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    weights: Vec<WeightValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DescriptorFile {
    m: usize,
    r: usize,
    #[serde(rename = "splitting")]
    splittings: Vec<EntryFile>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplittingSets {
    Index(Vec<IndexSetSplit>),
    Triples(Vec<TripleSplit>),
}

/// In-memory form of a splitting descriptor file.
///
/// ```toml
/// m = 3
/// r = 2
///
/// [[splitting]]
/// pairs = [[1, 2], [2, 3]]
/// weights = ["1/2", "1/2", 1]
///
/// [[splitting]]
/// pairs = []
/// weights = ["1/2", "1/2", 0]
/// ```
///
/// A BGAOR entry lists `r_set`, `s_set`, optionally `t_set` (default: the
/// complement), `gamma` and `omega` instead of `pairs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingDescriptor {
    pub m: usize,
    pub sets: SplittingSets,
    pub weights: Vec<BlockWeights>,
}

fn line_of(text: &str, err: &toml::de::Error) -> usize {
    err.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1)
}

fn to_pairs(m: usize, raw: &[[usize; 2]], what: &str) -> std::result::Result<BTreeSet<Pair>, String> {
    raw.iter()
        .map(|&[i, j]| {
            if i == 0 || j == 0 || i > m || j > m || i == j {
                Err(format!("{what}: ({i}, {j}) is not an off-diagonal pair of 1..={m}"))
            } else {
                Ok((i - 1, j - 1))
            }
        })
        .collect()
}

fn from_pairs(set: &BTreeSet<Pair>) -> Vec<[usize; 2]> {
    set.iter().map(|&(i, j)| [i + 1, j + 1]).collect()
}

impl SplittingDescriptor {
    pub fn index_sets(m: usize, qs: Vec<IndexSetSplit>, weights: Vec<BlockWeights>) -> Self {
        Self { m, sets: SplittingSets::Index(qs), weights }
    }

    pub fn triples(m: usize, triples: Vec<TripleSplit>, weights: Vec<BlockWeights>) -> Self {
        Self { m, sets: SplittingSets::Triples(triples), weights }
    }

    pub fn r(&self) -> usize {
        self.weights.len()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: DescriptorFile = toml::from_str(text).map_err(|e| parse_err(line_of(text, &e), e.message()))?;
        let m = file.m;
        if m == 0 {
            return Err(parse_err(1, "m must be positive"));
        }
        if file.r != file.splittings.len() {
            return Err(parse_err(1, format!("r = {} but {} [[splitting]] tables given", file.r, file.splittings.len())));
        }
        let mut index = Vec::new();
        let mut triples = Vec::new();
        let mut weights = Vec::new();
        for (s, e) in file.splittings.iter().enumerate() {
            let ctx = |msg: String| Error::BadParams(format!("splitting {}: {msg}", s + 1));
            let is_triple = e.r_set.is_some() || e.s_set.is_some() || e.t_set.is_some() || e.gamma.is_some() || e.omega.is_some();
            match (&e.pairs, is_triple) {
                (Some(_), true) => return Err(ctx("give either `pairs` or R/S/T sets, not both".into())),
                (Some(p), false) => index.push(IndexSetSplit::new(m, to_pairs(m, p, "pairs").map_err(ctx)?)?),
                (None, true) => {
                    let get = |v: &Option<Vec<[usize; 2]>>, what| to_pairs(m, v.as_deref().unwrap_or(&[]), what).map_err(ctx);
                    let (rs, ss) = (get(&e.r_set, "r_set")?, get(&e.s_set, "s_set")?);
                    let gamma = e.gamma.ok_or_else(|| ctx("missing gamma".into()))?;
                    let omega = e.omega.ok_or_else(|| ctx("missing omega".into()))?;
                    let t = match &e.t_set {
                        Some(_) => TripleSplit::new(m, rs, ss, get(&e.t_set, "t_set")?, gamma, omega),
                        None => TripleSplit::with_complement(m, rs, ss, gamma, omega),
                    };
                    triples.push(t.map_err(|err| ctx(err.to_string()))?);
                }
                (None, false) => return Err(ctx("needs `pairs` or R/S/T sets".into())),
            }
            let w: Vec<f64> = e.weights.iter().map(WeightValue::value).collect::<std::result::Result<_, _>>().map_err(ctx)?;
            if w.len() != m {
                return Err(ctx(format!("{} weights for {m} block rows", w.len())));
            }
            weights.push(BlockWeights::new(w)?);
        }
        let sets = match (index.is_empty(), triples.is_empty()) {
            (_, true) => SplittingSets::Index(index),
            (true, false) => SplittingSets::Triples(triples),
            (false, false) => return Err(Error::BadParams("cannot mix index-set and R/S/T splittings".into())),
        };
        Ok(Self { m, sets, weights })
    }

    pub fn to_toml(&self) -> String {
        let weights = |w: &BlockWeights| w.as_slice().iter().map(|&x| WeightValue::Number(x)).collect();
        let splittings = match &self.sets {
            SplittingSets::Index(qs) => qs
                .iter()
                .zip(&self.weights)
                .map(|(q, w)| EntryFile { pairs: Some(from_pairs(q.pairs())), weights: weights(w), ..Default::default() })
                .collect(),
            SplittingSets::Triples(ts) => ts
                .iter()
                .zip(&self.weights)
                .map(|(t, w)| EntryFile {
                    r_set: Some(from_pairs(&t.r_set)),
                    s_set: Some(from_pairs(&t.s_set)),
                    t_set: Some(from_pairs(&t.t_set)),
                    gamma: Some(t.gamma),
                    omega: Some(t.omega),
                    weights: weights(w),
                    ..Default::default()
                })
                .collect(),
        };
        let file = DescriptorFile { m: self.m, r: self.r(), splittings };
        toml::to_string(&file).expect("descriptor serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml())?;
        Ok(())
    }

    /// Overrides `(γ_s, ω_s)` of R/S/T entries; a single value applies to every splitting.
    pub fn with_parameters(mut self, gammas: Option<&[f64]>, omegas: Option<&[f64]>) -> Result<Self> {
        let SplittingSets::Triples(ts) = &mut self.sets else {
            return Err(Error::BadParams("gamma/omega apply to R/S/T splittings only".into()));
        };
        let r = ts.len();
        let pick = |v: &[f64], s: usize| if v.len() == 1 { Ok(v[0]) } else if v.len() == r { Ok(v[s]) } else {
            Err(Error::BadParams(format!("expected 1 or {r} parameter values, got {}", v.len())))
        };
        let mut out = Vec::with_capacity(r);
        for (s, t) in ts.iter().enumerate() {
            let gamma = gammas.map(|g| pick(g, s)).transpose()?.unwrap_or(t.gamma);
            let omega = omegas.map(|o| pick(o, s)).transpose()?.unwrap_or(t.omega);
            out.push(TripleSplit::new(self.m, t.r_set.clone(), t.s_set.clone(), t.t_set.clone(), gamma, omega)?);
        }
        *ts = out;
        Ok(self)
    }

    pub fn multisplitting(&self, a: &BlockMatrix) -> Result<Multisplitting> {
        if a.m() != self.m {
            return Err(Error::DimensionMismatch(format!("descriptor has m = {}, matrix has {} block rows", self.m, a.m())));
        }
        match &self.sets {
            SplittingSets::Index(qs) => multisplit_from_index_sets(a, qs, &self.weights),
            SplittingSets::Triples(ts) => gaor_multisplitting(a, ts, &self.weights),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn round_trip(a: &BlockMatrix, format: MmFormat) -> BlockMatrix {
        let mut buf = Vec::new();
        write_matrix(&mut buf, a, format).unwrap();
        read_matrix(buf.as_slice(), None).unwrap()
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let (a, _) = generators::example_5_1();
        let third = a.scale(1.0 / 3.0);
        for fmt in [MmFormat::Array, MmFormat::Coordinate] {
            assert_eq!(round_trip(&third, fmt), third);
        }
    }

    #[test]
    fn complex_round_trip() {
        let a = BlockMatrix::from_blocks(2, 2, |i, j| {
            Some(Dense::from_fn(2, 2, |p, q| C64::new((i + p) as f64 * 0.1, (j as f64 - q as f64) / 7.0)))
        });
        for fmt in [MmFormat::Array, MmFormat::Coordinate] {
            assert_eq!(round_trip(&a, fmt), a);
        }
    }

    #[test]
    fn header_and_layout() {
        let a = BlockMatrix::from_real_rows(1, 2, &[1.0, 2.0, 0.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a, MmFormat::Coordinate).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "%%MatrixMarket matrix coordinate real general\n%%block 1 2\n2 2 3\n1 1 1e0\n1 2 2e0\n2 2 4e0\n");
    }

    #[test]
    fn reads_symmetric_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 4\n2 1 -1\n2 2 4\n3 3 4\n";
        let a = read_matrix(text.as_bytes(), Some(1)).unwrap();
        assert_eq!(a.as_dense()[(0, 1)].re, -1.0);
        assert_eq!(a.as_dense()[(1, 0)].re, -1.0);
        assert_eq!((a.m(), a.k()), (3, 1));
    }

    #[test]
    fn reads_hermitian_coordinate() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n2 2 3\n1 1 2 0\n2 1 1 1\n2 2 2 0\n";
        let a = read_matrix(text.as_bytes(), Some(2)).unwrap();
        assert_eq!(a.as_dense()[(0, 1)], C64::new(1.0, -1.0));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad_banner = "%%MatrixMarket vector array real general\n";
        assert!(matches!(read_mm(bad_banner.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let bad_value = "%%MatrixMarket matrix array real general\n%%block 1 1\n1 1\nabc\n";
        assert!(matches!(read_mm(bad_value.as_bytes()), Err(Error::Parse { line: 4, .. })));
        let short = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert!(matches!(read_mm(short.as_bytes()), Err(Error::Parse { .. })));
        let outside = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read_mm(outside.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn missing_block_header() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n";
        assert!(read_matrix(text.as_bytes(), None).is_err());
        assert!(matches!(read_matrix(text.as_bytes(), Some(3)), Err(Error::DimensionMismatch(_))));
        assert_eq!(read_matrix(text.as_bytes(), Some(1)).unwrap(), BlockMatrix::identity(2, 1));
    }

    #[test]
    fn vector_round_trip() {
        let (_, b, _) = generators::example_5_2();
        let mut buf = Vec::new();
        write_vector(&mut buf, &b).unwrap();
        assert_eq!(read_vector(buf.as_slice(), None).unwrap(), b);
    }

    #[test]
    fn descriptor_with_rationals() {
        let text = r#"
m = 3
r = 3

[[splitting]]
pairs = [[1, 2], [1, 3], [2, 3]]
weights = ["1/2", "1/6", "1/3"]

[[splitting]]
pairs = [[2, 1], [3, 1], [3, 2]]
weights = ["1/6", "1/3", "1/2"]

[[splitting]]
pairs = []
weights = ["1/3", "1/2", "1/6"]
"#;
        let d = SplittingDescriptor::parse(text).unwrap();
        let (a, ms) = generators::example_5_1();
        let from_file = d.multisplitting(&a).unwrap();
        for s in 0..3 {
            assert_eq!(from_file.part(s).m, ms.part(s).m);
            assert_eq!(from_file.part(s).weights, ms.part(s).weights);
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let (qs, ws) = generators::example_5_1_index_sets();
        let d = SplittingDescriptor::index_sets(3, qs, ws);
        assert_eq!(SplittingDescriptor::parse(&d.to_toml()).unwrap(), d);

        let ts = generators::example_5_2_bgaor_triples(0.9, 1.0).unwrap();
        let d = SplittingDescriptor::triples(12, ts, vec![BlockWeights::uniform(12, 0.25); 4]);
        assert_eq!(SplittingDescriptor::parse(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn descriptor_triple_complement_and_override() {
        let text = "m = 2\nr = 1\n[[splitting]]\ns_set = [[2, 1]]\ngamma = 1.0\nomega = 1.0\nweights = [1, 1]\n";
        let d = SplittingDescriptor::parse(text).unwrap();
        let SplittingSets::Triples(ts) = &d.sets else { panic!() };
        assert!(ts[0].t_set.contains(&(0, 1)));
        let d = d.with_parameters(Some(&[0.5]), None).unwrap();
        let SplittingSets::Triples(ts) = &d.sets else { panic!() };
        assert_eq!((ts[0].gamma, ts[0].omega), (0.5, 1.0));
        assert!(d.with_parameters(Some(&[0.1, 0.2]), None).is_err());
    }

    #[test]
    fn descriptor_errors() {
        let cases = [
            ("m = 2\nr = 2\n[[splitting]]\npairs = []\nweights = [1, 1]\n", "count"),
            ("m = 2\nr = 1\n[[splitting]]\npairs = [[1, 1]]\nweights = [1, 1]\n", "diagonal pair"),
            ("m = 2\nr = 1\n[[splitting]]\npairs = [[1, 3]]\nweights = [1, 1]\n", "out of range"),
            ("m = 2\nr = 1\n[[splitting]]\npairs = []\nweights = [1]\n", "short weights"),
            ("m = 2\nr = 1\n[[splitting]]\npairs = []\nweights = [\"1/0\", 1]\n", "zero denominator"),
            ("m = 2\nr = 1\n[[splitting]]\npairs = []\ns_set = []\ngamma = 1.0\nomega = 1.0\nweights = [1, 1]\n", "mixed"),
            ("m = 2\nr = 1\n[[splitting]]\ns_set = []\nomega = 1.0\nweights = [1, 1]\n", "no gamma"),
            ("m = 2\nr = 1\n[[splitting]]\nweights = [1, 1]\n", "no sets"),
        ];
        for (text, what) in cases {
            assert!(SplittingDescriptor::parse(text).is_err(), "{what}");
        }
        let syntax = "m = 2\nr = 1\n[[splitting]]\npairs = [[1, 2]\n";
        assert!(matches!(SplittingDescriptor::parse(syntax), Err(Error::Parse { line, .. }) if line >= 4));
    }

    #[test]
    fn weight_sums_checked_on_build() {
        let text = "m = 2\nr = 1\n[[splitting]]\npairs = []\nweights = [1, 0.5]\n";
        let d = SplittingDescriptor::parse(text).unwrap();
        let (a, _) = generators::example_5_1();
        let a2 = BlockMatrix::from_dense(a.as_dense().view((0, 0), (4, 4)).into_owned(), 2, 2).unwrap();
        assert!(matches!(d.multisplitting(&a2), Err(Error::WeightSum { .. })));
    }
}
