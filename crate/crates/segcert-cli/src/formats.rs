//! Text file formats: counts files, joint-sample files, and label files.
//!
//! Counts file (ASCII, line oriented):
//!
//! ```text
//! segcert-counts 1
//! N=<int> C=<int> n0=<int> n=<int>
//! <C ints> | <C ints>        one line per component: selection | estimation
//! ```
//!
//! Joint-sample file, for the joint-classification baseline (counts cannot
//! carry whole labelings):
//!
//! ```text
//! segcert-joint 1
//! N=<int> C=<int> n0=<int> n=<int>
//! <N ints>                   n0 selection labelings, then n estimation ones
//! ```
//!
//! Label file: one token per line; a class id, `~` for abstain, `*` for
//! ignore.
//!
//! Parsing is strict and streaming: one reused line buffer, counts appended
//! directly to the flat output vectors.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use segcert::metrics::{Label, LabelMap};
use segcert::smoothing::CountsMatrix;

use crate::CliError;

/// One block of full labeling vectors (one vector per Monte Carlo draw).
pub type JointSamples = Vec<Vec<u32>>;

const COUNTS_MAGIC: &str = "segcert-counts 1";
const JOINT_MAGIC: &str = "segcert-joint 1";

pub struct CountsHeader {
    pub n_components: usize,
    pub n_classes: usize,
    pub n0: u32,
    pub n: u32,
}

fn data_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}:{line}: {msg}", path.display()))
}

fn io_err(path: &Path, err: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {err}", path.display()))
}

fn parse_header_field(path: &Path, token: Option<&str>, key: &str) -> Result<u64, CliError> {
    let token = token.ok_or_else(|| data_err(path, 2, format!("missing {key}= field")))?;
    let value = token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| data_err(path, 2, format!("expected {key}=<int>, got '{token}'")))?;
    value
        .parse()
        .map_err(|_| data_err(path, 2, format!("{key} value '{value}' is not an integer")))
}

fn read_header(
    path: &Path,
    reader: &mut impl BufRead,
    magic: &str,
) -> Result<CountsHeader, CliError> {
    let mut line = String::new();
    if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
        return Err(data_err(path, 1, "empty file"));
    }
    if line.trim_end() != magic {
        return Err(data_err(path, 1, format!("expected header '{magic}'")));
    }
    line.clear();
    if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
        return Err(data_err(path, 2, "missing dimension line"));
    }
    let mut tokens = line.trim_end().split(' ');
    let n_components = parse_header_field(path, tokens.next(), "N")? as usize;
    let n_classes = parse_header_field(path, tokens.next(), "C")? as usize;
    let n0 = parse_header_field(path, tokens.next(), "n0")?;
    let n = parse_header_field(path, tokens.next(), "n")?;
    if tokens.next().is_some() {
        return Err(data_err(path, 2, "trailing tokens on dimension line"));
    }
    let n0 = u32::try_from(n0).map_err(|_| data_err(path, 2, "n0 exceeds u32 range"))?;
    let n = u32::try_from(n).map_err(|_| data_err(path, 2, "n exceeds u32 range"))?;
    Ok(CountsHeader {
        n_components,
        n_classes,
        n0,
        n,
    })
}

/// Strict streaming parse of a counts file into the selection and estimation
/// matrices. Row-sum violations name the offending component.
pub fn parse_counts_file(path: &Path) -> Result<(CountsMatrix, CountsMatrix), CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let header = read_header(path, &mut reader, COUNTS_MAGIC)?;
    let (rows, classes) = (header.n_components, header.n_classes);
    if rows == 0 || classes < 2 {
        return Err(data_err(path, 2, "need N >= 1 and C >= 2"));
    }

    let mut counts0: Vec<u32> = Vec::with_capacity(rows * classes);
    let mut counts: Vec<u32> = Vec::with_capacity(rows * classes);
    let mut line = String::new();
    for component in 0..rows {
        let line_no = component + 3;
        line.clear();
        if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
            return Err(data_err(
                path,
                line_no,
                format!("missing row for component {component}"),
            ));
        }
        let mut sum0 = 0u64;
        let mut sum1 = 0u64;
        let mut seen0 = 0usize;
        let mut seen1 = 0usize;
        let mut past_pipe = false;
        for token in line.split_ascii_whitespace() {
            if token == "|" {
                if past_pipe {
                    return Err(data_err(path, line_no, "more than one '|' separator"));
                }
                past_pipe = true;
                continue;
            }
            let value: u32 = token
                .parse()
                .map_err(|_| data_err(path, line_no, format!("'{token}' is not a count")))?;
            if past_pipe {
                counts.push(value);
                sum1 += u64::from(value);
                seen1 += 1;
            } else {
                counts0.push(value);
                sum0 += u64::from(value);
                seen0 += 1;
            }
        }
        if !past_pipe || seen0 != classes || seen1 != classes {
            return Err(data_err(
                path,
                line_no,
                format!("expected {classes} counts, '|', then {classes} counts"),
            ));
        }
        if sum0 != u64::from(header.n0) {
            return Err(data_err(
                path,
                line_no,
                format!(
                    "component {component}: selection row sums to {sum0}, expected n0 = {}",
                    header.n0
                ),
            ));
        }
        if sum1 != u64::from(header.n) {
            return Err(data_err(
                path,
                line_no,
                format!(
                    "component {component}: estimation row sums to {sum1}, expected n = {}",
                    header.n
                ),
            ));
        }
    }
    line.clear();
    if reader.read_line(&mut line).map_err(|e| io_err(path, e))? != 0 && !line.trim().is_empty() {
        return Err(data_err(path, rows + 3, "unexpected data after last row"));
    }

    let counts0 = CountsMatrix::new(counts0, rows, classes, header.n0)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let counts = CountsMatrix::new(counts, rows, classes, header.n)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((counts0, counts))
}

/// Write a counts file in the canonical format.
pub fn write_counts_file(
    path: &Path,
    counts0: &CountsMatrix,
    counts: &CountsMatrix,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut line = String::new();
    writeln!(out, "{COUNTS_MAGIC}").map_err(|e| io_err(path, e))?;
    writeln!(
        out,
        "N={} C={} n0={} n={}",
        counts0.num_components(),
        counts0.num_classes(),
        counts0.draws(),
        counts.draws()
    )
    .map_err(|e| io_err(path, e))?;
    for i in 0..counts0.num_components() {
        line.clear();
        for &v in counts0.row(i) {
            let _ = write!(line, "{v} ");
        }
        line.push('|');
        for &v in counts.row(i) {
            let _ = write!(line, " {v}");
        }
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Parse a joint-sample file into (selection labelings, estimation labelings).
pub fn parse_joint_file(path: &Path) -> Result<(JointSamples, JointSamples), CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let header = read_header(path, &mut reader, JOINT_MAGIC)?;
    let classes =
        u32::try_from(header.n_classes).map_err(|_| data_err(path, 2, "C exceeds u32 range"))?;

    let mut read_block = |count: u32, what: &str, offset: usize| {
        let mut block = Vec::with_capacity(count as usize);
        let mut line = String::new();
        for s in 0..count {
            let line_no = offset + s as usize;
            line.clear();
            if reader.read_line(&mut line).map_err(|e| io_err(path, e))? == 0 {
                return Err(data_err(
                    path,
                    line_no,
                    format!("missing {what} sample {s}"),
                ));
            }
            let mut labeling = Vec::with_capacity(header.n_components);
            for token in line.split_ascii_whitespace() {
                let value: u32 = token
                    .parse()
                    .map_err(|_| data_err(path, line_no, format!("'{token}' is not a class id")))?;
                if value >= classes {
                    return Err(data_err(
                        path,
                        line_no,
                        format!("class id {value} outside [0, {classes})"),
                    ));
                }
                labeling.push(value);
            }
            if labeling.len() != header.n_components {
                return Err(data_err(
                    path,
                    line_no,
                    format!(
                        "expected {} class ids, found {}",
                        header.n_components,
                        labeling.len()
                    ),
                ));
            }
            block.push(labeling);
        }
        Ok(block)
    };

    let samples0 = read_block(header.n0, "selection", 3)?;
    let samples = read_block(header.n, "estimation", 3 + header.n0 as usize)?;
    Ok((samples0, samples))
}

/// Parse a label file (`~` abstain, `*` ignore, otherwise a class id).
pub fn parse_label_file(path: &Path, allow_ignore: bool) -> Result<Vec<Label>, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let label = match token {
            "~" => Label::Abstain,
            "*" if allow_ignore => Label::Ignore,
            "*" => {
                return Err(data_err(
                    path,
                    idx + 1,
                    "ignore sentinel '*' is only valid in ground truth",
                ))
            }
            _ => {
                let id: u32 = token.parse().map_err(|_| {
                    data_err(path, idx + 1, format!("'{token}' is not a label token"))
                })?;
                Label::Class(id)
            }
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no labels in file",
            path.display()
        )));
    }
    Ok(labels)
}

/// Write one label per line (`~` for abstain).
pub fn write_label_file(path: &Path, labels: &[Option<u32>]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for label in labels {
        match label {
            Some(id) => writeln!(out, "{id}").map_err(|e| io_err(path, e))?,
            None => writeln!(out, "~").map_err(|e| io_err(path, e))?,
        }
    }
    out.flush().map_err(|e| io_err(path, e))
}

/// Build a label map from raw labels, sizing the class range to fit both
/// operands.
pub fn label_map_from(labels: Vec<Label>, other_max: u32) -> Result<LabelMap, CliError> {
    let own_max = labels
        .iter()
        .filter_map(|l| match l {
            Label::Class(c) => Some(*c),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    LabelMap::new(labels, own_max.max(other_max) + 1).map_err(|e| CliError::Data(e.to_string()))
}

/// Largest class id appearing in a label list.
pub fn max_class(labels: &[Label]) -> u32 {
    labels
        .iter()
        .filter_map(|l| match l {
            Label::Class(c) => Some(*c),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}
