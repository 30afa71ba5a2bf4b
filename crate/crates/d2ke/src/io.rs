//! Plain-text file formats for datasets, landmark samples, and matrices.
//!
//! Three dataset formats, one per object kind:
//!
//! - `.ts.tsv`: one series per line, `<label> <T> <V> v11 v12 ... vTV`
//!   (row-major), whitespace-separated decimals.
//! - `.str.txt`: an alphabet header line `#alphabet abcd` followed by one
//!   string per line, `<label> <symbols>`.
//! - `.vset.jsonl`: one JSON record per line,
//!   `{"label": int, "elements": [[real,...],...]}`.
//!
//! Lines starting with `#` are comments except where a format assigns them
//! meaning; every loader rejects lines longer than 10 MB. Landmark samples
//! reuse the dataset body formats with a `#omega` header carrying the seed
//! and distribution. Matrices use a `<rows> <cols>` header line followed by
//! rows of decimals with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::objects::{ObjectKind, StructuredObject, SymbolString, TimeSeries, VectorSet};
use crate::sampling::{OmegaSample, OmegaSpec};

/// Maximum accepted line length, in bytes.
pub const MAX_LINE_BYTES: usize = 10 * 1024 * 1024;

/// Characters assignable to alphabet indices when writing string files.
const ALPHABET_PALETTE: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

/// The three on-disk dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    TimeSeriesTsv,
    StringTxt,
    VectorSetJsonl,
}

impl FileFormat {
    pub fn tag(self) -> &'static str {
        match self {
            FileFormat::TimeSeriesTsv => "ts-tsv",
            FileFormat::StringTxt => "str-txt",
            FileFormat::VectorSetJsonl => "vset-jsonl",
        }
    }

    /// The object kind this format stores.
    pub fn object_kind(self) -> ObjectKind {
        match self {
            FileFormat::TimeSeriesTsv => ObjectKind::TimeSeries,
            FileFormat::StringTxt => ObjectKind::String,
            FileFormat::VectorSetJsonl => ObjectKind::VectorSet,
        }
    }

    /// The canonical format for an object kind.
    pub fn for_kind(kind: ObjectKind) -> FileFormat {
        match kind {
            ObjectKind::TimeSeries => FileFormat::TimeSeriesTsv,
            ObjectKind::String => FileFormat::StringTxt,
            ObjectKind::VectorSet => FileFormat::VectorSetJsonl,
        }
    }

    /// Infer the format from a conventional file suffix.
    pub fn from_path(path: &Path) -> Option<FileFormat> {
        let name = path.file_name()?.to_str()?;
        if name.ends_with(".ts.tsv") {
            Some(FileFormat::TimeSeriesTsv)
        } else if name.ends_with(".str.txt") {
            Some(FileFormat::StringTxt)
        } else if name.ends_with(".vset.jsonl") {
            Some(FileFormat::VectorSetJsonl)
        } else {
            None
        }
    }

    /// Conventional suffix for this format.
    pub fn suffix(self) -> &'static str {
        match self {
            FileFormat::TimeSeriesTsv => ".ts.tsv",
            FileFormat::StringTxt => ".str.txt",
            FileFormat::VectorSetJsonl => ".vset.jsonl",
        }
    }
}

impl std::str::FromStr for FileFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ts-tsv" => Ok(FileFormat::TimeSeriesTsv),
            "str-txt" => Ok(FileFormat::StringTxt),
            "vset-jsonl" => Ok(FileFormat::VectorSetJsonl),
            other => Err(Error::Config(format!(
                "unknown file format `{other}` (expected ts-tsv, str-txt, or vset-jsonl)"
            ))),
        }
    }
}

/// Numbered, length-checked lines of a text file.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut reader = BufReader::new(file);
    let mut lines = Vec::new();
    let mut line_no = 0usize;
    loop {
        let mut buf = String::new();
        let read = reader
            .read_line(&mut buf)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if read == 0 {
            break;
        }
        line_no += 1;
        if buf.len() > MAX_LINE_BYTES {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                msg: format!("line exceeds {MAX_LINE_BYTES} bytes"),
            });
        }
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        lines.push((line_no, buf));
    }
    Ok(lines)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

/// Load a labeled dataset, checking it holds the declared kind.
pub fn load_dataset(path: &Path, kind: ObjectKind, format: FileFormat) -> Result<Dataset> {
    if format.object_kind() != kind {
        return Err(Error::Config(format!(
            "format {} stores {} objects, not {}",
            format.tag(),
            format.object_kind(),
            kind
        )));
    }
    let lines = read_lines(path)?;
    let (objects, labels, alphabet) = parse_body(path, &lines, format, false)?;
    if objects.is_empty() {
        return Err(Error::EmptyDataset(path.display().to_string()));
    }
    let mut ds = Dataset::from_raw_labels(objects, labels, path.display().to_string())?;
    if let Some(alpha) = alphabet {
        ds.meta_mut().notes.insert("alphabet".into(), alpha);
    }
    Ok(ds)
}

/// Parse the object lines shared by dataset and landmark files.
///
/// Returns objects, labels, and the alphabet string for string files.
fn parse_body(
    path: &Path,
    lines: &[(usize, String)],
    format: FileFormat,
    skip_omega_header: bool,
) -> Result<(Vec<StructuredObject>, Vec<i64>, Option<String>)> {
    let mut objects: Vec<StructuredObject> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    let mut alphabet: Option<Vec<char>> = None;
    let mut shared_width: Option<(usize, usize)> = None; // (V or p, declaring line)

    for &(line_no, ref raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#alphabet") {
            if format != FileFormat::StringTxt {
                continue; // plain comment in other formats
            }
            if alphabet.is_some() {
                return Err(parse_err(path, line_no, "duplicate #alphabet line"));
            }
            if !objects.is_empty() {
                return Err(parse_err(
                    path,
                    line_no,
                    "#alphabet must precede all string lines",
                ));
            }
            let chars: Vec<char> = rest.trim().chars().collect();
            if chars.is_empty() {
                return Err(parse_err(path, line_no, "empty alphabet"));
            }
            for (i, c) in chars.iter().enumerate() {
                if c.is_whitespace() {
                    return Err(parse_err(path, line_no, "alphabet contains whitespace"));
                }
                if chars[..i].contains(c) {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!("duplicate alphabet symbol `{c}`"),
                    ));
                }
            }
            alphabet = Some(chars);
            continue;
        }
        if line.starts_with('#') {
            if skip_omega_header && line.starts_with("#omega") {
                continue;
            }
            continue; // comment
        }

        match format {
            FileFormat::TimeSeriesTsv => {
                let mut tokens = line.split_whitespace();
                let label = parse_token::<i64>(path, line_no, tokens.next(), "label")?;
                let t = parse_token::<usize>(path, line_no, tokens.next(), "step count T")?;
                let v = parse_token::<usize>(path, line_no, tokens.next(), "variable count V")?;
                if t == 0 || v == 0 {
                    return Err(parse_err(path, line_no, format!("invalid shape {t}x{v}")));
                }
                if let Some((w, at)) = shared_width {
                    if v != w {
                        return Err(Error::DimensionMismatch(format!(
                            "{}: line {line_no} declares V={v} but line {at} declared V={w}",
                            path.display()
                        )));
                    }
                } else {
                    shared_width = Some((v, line_no));
                }
                let mut values = Vec::with_capacity(t * v);
                for i in 0..t * v {
                    let x = parse_token::<f64>(path, line_no, tokens.next(), "value")?;
                    if !x.is_finite() {
                        return Err(parse_err(path, line_no, format!("non-finite value #{i}")));
                    }
                    values.push(x);
                }
                if tokens.next().is_some() {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!("trailing tokens after {t}x{v} values"),
                    ));
                }
                let arr = Array2::from_shape_vec((t, v), values)
                    .expect("shape matches collected length");
                objects.push(TimeSeries::new(arr)?.into());
                labels.push(label);
            }
            FileFormat::StringTxt => {
                let alphabet = alphabet.as_ref().ok_or_else(|| {
                    parse_err(path, line_no, "string line before #alphabet header")
                })?;
                let mut tokens = line.split_whitespace();
                let label = parse_token::<i64>(path, line_no, tokens.next(), "label")?;
                let symbols = match tokens.next() {
                    None => Vec::new(), // empty string
                    Some(text) => {
                        let mut syms = Vec::with_capacity(text.chars().count());
                        for c in text.chars() {
                            let idx = alphabet.iter().position(|&a| a == c).ok_or_else(|| {
                                parse_err(
                                    path,
                                    line_no,
                                    format!("symbol `{c}` not in declared alphabet"),
                                )
                            })?;
                            syms.push(idx as u32);
                        }
                        syms
                    }
                };
                if tokens.next().is_some() {
                    return Err(parse_err(path, line_no, "trailing tokens after symbols"));
                }
                objects.push(SymbolString::new(symbols, alphabet.len() as u32)?.into());
                labels.push(label);
            }
            FileFormat::VectorSetJsonl => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct Record {
                    label: i64,
                    elements: Vec<Vec<f64>>,
                }
                let rec: Record = serde_json::from_str(line)
                    .map_err(|e| parse_err(path, line_no, e.to_string()))?;
                if rec.elements.is_empty() {
                    return Err(parse_err(path, line_no, "empty vector set"));
                }
                let p = rec.elements[0].len();
                if rec.elements.iter().any(|e| e.len() != p) {
                    return Err(Error::DimensionMismatch(format!(
                        "{}: line {line_no} mixes element dimensions",
                        path.display()
                    )));
                }
                if let Some((w, at)) = shared_width {
                    if p != w {
                        return Err(Error::DimensionMismatch(format!(
                            "{}: line {line_no} has p={p} but line {at} had p={w}",
                            path.display()
                        )));
                    }
                } else {
                    shared_width = Some((p, line_no));
                }
                if rec.elements.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(parse_err(path, line_no, "non-finite element"));
                }
                objects.push(VectorSet::from_rows(rec.elements)?.into());
                labels.push(rec.label);
            }
        }
    }
    let alphabet_string = alphabet.map(|chars| chars.into_iter().collect());
    Ok((objects, labels, alphabet_string))
}

fn parse_token<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    token: Option<&str>,
    what: &str,
) -> Result<T> {
    let token = token.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    token
        .parse::<T>()
        .map_err(|_| parse_err(path, line, format!("invalid {what} `{token}`")))
}

/// Write a dataset in its canonical format (chosen by object kind).
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    write_body(
        &mut w,
        path,
        ds.objects(),
        |i| ds.original_label(ds.labels()[i]),
        ds.meta().notes.get("alphabet").map(String::as_str),
    )
}

/// Write object lines in the canonical format for their kind.
fn write_body<F: Fn(usize) -> i64>(
    w: &mut impl Write,
    path: &Path,
    objects: &[StructuredObject],
    label_of: F,
    alphabet: Option<&str>,
) -> Result<()> {
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let kind = objects.first().map(|o| o.kind());
    if kind == Some(ObjectKind::String) {
        let alphabet = match alphabet {
            Some(a) => a.to_string(),
            None => {
                let size = objects[0].as_string()?.alphabet_size() as usize;
                if size > ALPHABET_PALETTE.len() {
                    return Err(Error::InvalidArgument(format!(
                        "cannot write alphabets larger than {} symbols",
                        ALPHABET_PALETTE.len()
                    )));
                }
                ALPHABET_PALETTE[..size].to_string()
            }
        };
        writeln!(w, "#alphabet {alphabet}").map_err(io_err)?;
        let chars: Vec<char> = alphabet.chars().collect();
        for (i, obj) in objects.iter().enumerate() {
            let s = obj.as_string()?;
            if s.alphabet_size() as usize != chars.len() {
                return Err(Error::DimensionMismatch(format!(
                    "object {i} has alphabet size {} but file declares {}",
                    s.alphabet_size(),
                    chars.len()
                )));
            }
            let text: String = s.symbols().iter().map(|&c| chars[c as usize]).collect();
            if text.is_empty() {
                writeln!(w, "{}", label_of(i)).map_err(io_err)?;
            } else {
                writeln!(w, "{} {text}", label_of(i)).map_err(io_err)?;
            }
        }
        return Ok(());
    }
    for (i, obj) in objects.iter().enumerate() {
        match obj {
            StructuredObject::TimeSeries(t) => {
                let mut line = format!("{} {} {}", label_of(i), t.len(), t.n_variables());
                for x in t.values().iter() {
                    line.push(' ');
                    // Display prints the shortest digits that round-trip.
                    line.push_str(&format!("{x}"));
                }
                writeln!(w, "{line}").map_err(io_err)?;
            }
            StructuredObject::VectorSet(v) => {
                #[derive(Serialize)]
                struct Record<'a> {
                    label: i64,
                    elements: &'a Vec<Vec<f64>>,
                }
                let elements: Vec<Vec<f64>> =
                    v.elements().rows().into_iter().map(|r| r.to_vec()).collect();
                let rec = Record { label: label_of(i), elements: &elements };
                let json = serde_json::to_string(&rec)
                    .map_err(|e| Error::Numerical(e.to_string()))?;
                writeln!(w, "{json}").map_err(io_err)?;
            }
            StructuredObject::String(_) => unreachable!("string branch handled above"),
        }
    }
    Ok(())
}

/// Header payload stored on the `#omega` line of a landmark file.
#[derive(Debug, Serialize, Deserialize)]
struct OmegaHeader {
    seed: u64,
    spec: OmegaSpec,
}

/// Write a landmark sample: a `#omega` header plus dataset-format body with
/// all labels zero.
pub fn save_omega_sample(sample: &OmegaSample, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let header = OmegaHeader { seed: sample.seed(), spec: sample.spec().clone() };
    let json = serde_json::to_string(&header).map_err(|e| Error::Numerical(e.to_string()))?;
    writeln!(w, "#omega {json}").map_err(|e| Error::io(path.display().to_string(), e))?;
    write_body(&mut w, path, sample.objects(), |_| 0, None)
}

/// Load a landmark sample written by [`save_omega_sample`].
pub fn load_omega_sample(path: &Path, format: FileFormat) -> Result<OmegaSample> {
    let lines = read_lines(path)?;
    let header_line = lines
        .iter()
        .find(|(_, l)| l.trim_start().starts_with("#omega"))
        .ok_or_else(|| parse_err(path, 1, "missing #omega header"))?;
    let payload = header_line.1.trim_start().trim_start_matches("#omega").trim();
    let header: OmegaHeader = serde_json::from_str(payload)
        .map_err(|e| parse_err(path, header_line.0, e.to_string()))?;
    let (objects, _labels, _alphabet) = parse_body(path, &lines, format, true)?;
    if objects.is_empty() {
        return Err(Error::EmptyDataset(path.display().to_string()));
    }
    let sample = OmegaSample::from_parts(objects, header.seed, header.spec)?;
    if sample.kind() != format.object_kind() {
        return Err(Error::KindMismatch {
            expected: format.object_kind(),
            got: sample.kind(),
        });
    }
    Ok(sample)
}

/// Write a dense matrix: `<rows> <cols>` header then one row per line with
/// 17 significant digits, enough to reproduce every f64 exactly.
pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    writeln!(w, "{} {}", m.nrows(), m.ncols()).map_err(io_err)?;
    for row in m.rows() {
        let mut line = String::new();
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{x:.16e}"));
        }
        writeln!(w, "{line}").map_err(io_err)?;
    }
    Ok(())
}

/// Read a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let lines = read_lines(path)?;
    let mut content = lines.iter().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (hline, header) = content
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing matrix header"))?;
    let mut tokens = header.split_whitespace();
    let rows = parse_token::<usize>(path, *hline, tokens.next(), "row count")?;
    let cols = parse_token::<usize>(path, *hline, tokens.next(), "column count")?;
    if tokens.next().is_some() {
        return Err(parse_err(path, *hline, "trailing tokens in matrix header"));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (line_no, line) = content
            .next()
            .ok_or_else(|| parse_err(path, lines.len(), "missing matrix row"))?;
        let mut count = 0usize;
        for token in line.split_whitespace() {
            let x = parse_token::<f64>(path, *line_no, Some(token), "matrix entry")?;
            values.push(x);
            count += 1;
        }
        if count != cols {
            return Err(parse_err(
                path,
                *line_no,
                format!("expected {cols} entries, found {count}"),
            ));
        }
    }
    if content.next().is_some() {
        return Err(parse_err(path, lines.len(), "trailing content after matrix rows"));
    }
    Array2::from_shape_vec((rows, cols), values)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}
