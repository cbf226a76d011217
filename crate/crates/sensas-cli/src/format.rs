//! The problem file format.
//!
//! A file starts with the magic line `SENSAS-PROBLEM v1`, then holds one
//! directive per logical block, in any order. `#` starts a comment that
//! runs to the end of the line; parsing is locale-independent (decimal
//! point, whitespace-separated tokens); omitted blocks default to zero;
//! indices in the file are one-based.
//!
//! Quadratic-family problems:
//!
//! ```text
//! dims <K_u> <N_alpha>
//! alpha0            # followed by N_alpha numbers
//! matrix L0         # followed by K_u lines of K_u numbers
//! matrix L <k>      # first-derivative operator block for parameter k
//! matrix L2 <j> <k> # quadratic operator block, j <= k, stored once
//! vector q0
//! vector q <k>
//! vector q2 <j> <k>
//! response c        # K_u numbers
//! response M        # K_u x K_u
//! response N        # K_u lines of N_alpha numbers
//! response d        # N_alpha numbers
//! response G        # N_alpha x N_alpha
//! ```
//!
//! Slab diffusion problems:
//!
//! ```text
//! slab <length> <cells>
//! region <frac> <D> <Sigma_a> <S>   # one line per region, left to right
//! detector <frac_lo> <frac_hi> <Sigma_d>
//! response_kind <linear_detector|quadratic_norm>
//! ```

use ndarray::{Array1, Array2};
use sensas::{AffineQuadraticProblem, Detector, ParameterVector, Region, ResponseKind, SlabConfig};
use thiserror::Error;

pub const MAGIC: &str = "SENSAS-PROBLEM v1";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing magic line: the file must begin with `{MAGIC}`")]
    MissingMagic,
    #[error("line {line}: unknown directive `{directive}`")]
    UnknownDirective { line: usize, directive: String },
    #[error("line {line}, column {col}: non-numeric token `{token}`")]
    NonNumeric {
        line: usize,
        col: usize,
        token: String,
    },
    #[error("duplicate block {block}")]
    DuplicateBlock { block: String },
    #[error("line {line}: numeric data outside any block")]
    DataOutsideBlock { line: usize },
    #[error("line {line}: {reason}")]
    BadDirective { line: usize, reason: String },
    #[error("missing `dims` directive")]
    MissingDims,
    #[error("dimension mismatch in block {block}: expected {expected}, found {found}")]
    DimensionMismatch {
        block: String,
        expected: String,
        found: String,
    },
    #[error("block {block}: parameter index {index} out of range 1..={max}")]
    IndexOutOfRange {
        block: String,
        index: usize,
        max: usize,
    },
    #[error("line {line}: slab and quadratic-family directives cannot be mixed")]
    MixedKinds { line: usize },
    #[error("slab problem is missing the `{field}` directive")]
    MissingSlabField { field: &'static str },
}

/// A parsed problem file, before model construction.
#[derive(Debug, Clone)]
pub enum ParsedProblem {
    Affine {
        data: Box<AffineQuadraticProblem>,
        alpha0: ParameterVector,
    },
    Slab(SlabConfig),
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Clone)]
enum BlockId {
    Dims,
    Alpha0,
    L0,
    L(usize),
    L2(usize, usize),
    Q0,
    Q(usize),
    Q2(usize, usize),
    C,
    M,
    N,
    D,
    G,
    Slab,
    Detector,
    ResponseKind,
}

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockId::Dims => write!(f, "dims"),
            BlockId::Alpha0 => write!(f, "alpha0"),
            BlockId::L0 => write!(f, "L0"),
            BlockId::L(k) => write!(f, "L {}", k + 1),
            BlockId::L2(j, k) => write!(f, "L2 {} {}", j + 1, k + 1),
            BlockId::Q0 => write!(f, "q0"),
            BlockId::Q(k) => write!(f, "q {}", k + 1),
            BlockId::Q2(j, k) => write!(f, "q2 {} {}", j + 1, k + 1),
            BlockId::C => write!(f, "c"),
            BlockId::M => write!(f, "M"),
            BlockId::N => write!(f, "N"),
            BlockId::D => write!(f, "d"),
            BlockId::G => write!(f, "G"),
            BlockId::Slab => write!(f, "slab"),
            BlockId::Detector => write!(f, "detector"),
            BlockId::ResponseKind => write!(f, "response_kind"),
        }
    }
}

#[derive(Debug)]
struct RawBlock {
    id: BlockId,
    line: usize,
    /// Directive-line numeric arguments (dims, slab, detector).
    args: Vec<f64>,
    /// Keyword argument (response_kind).
    keyword: Option<String>,
    /// Data rows following the directive line.
    rows: Vec<Vec<f64>>,
}

/// Tokens of one line with one-based column positions, comment stripped.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let body = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s + 1, &body[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push((s + 1, &body[s..]));
    }
    tokens
}

fn parse_number(line_no: usize, col: usize, token: &str) -> Result<f64, ParseError> {
    token.parse::<f64>().map_err(|_| ParseError::NonNumeric {
        line: line_no,
        col,
        token: token.to_string(),
    })
}

fn parse_index(line_no: usize, col: usize, token: &str) -> Result<usize, ParseError> {
    let raw: usize = token.parse().map_err(|_| ParseError::NonNumeric {
        line: line_no,
        col,
        token: token.to_string(),
    })?;
    if raw == 0 {
        return Err(ParseError::BadDirective {
            line: line_no,
            reason: "indices are one-based".into(),
        });
    }
    Ok(raw - 1)
}

fn starts_numeric(token: &str) -> bool {
    token
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.')
}

/// Parse the file text into problem data or a slab configuration.
pub fn parse_problem_text(text: &str) -> Result<ParsedProblem, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == MAGIC => {}
        _ => return Err(ParseError::MissingMagic),
    }

    // Phase 1: split into directive blocks with their data rows.
    let mut blocks: Vec<RawBlock> = Vec::new();
    let mut regions: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut seen: Vec<BlockId> = Vec::new();
    for (idx, raw_line) in lines {
        let line_no = idx + 1;
        let tokens = tokenize(raw_line);
        if tokens.is_empty() {
            continue;
        }
        if starts_numeric(tokens[0].1) {
            let row = tokens
                .iter()
                .map(|(col, t)| parse_number(line_no, *col, t))
                .collect::<Result<Vec<f64>, _>>()?;
            match blocks.last_mut() {
                Some(block) => block.rows.push(row),
                None => return Err(ParseError::DataOutsideBlock { line: line_no }),
            }
            continue;
        }
        let block = parse_directive(line_no, &tokens, &mut regions)?;
        if let Some(block) = block {
            if seen.contains(&block.id) {
                return Err(ParseError::DuplicateBlock {
                    block: block.id.to_string(),
                });
            }
            seen.push(block.id.clone());
            blocks.push(block);
        }
    }

    // Phase 2: interpret with known dimensions.
    let slab_mode = blocks.iter().any(|b| {
        matches!(
            b.id,
            BlockId::Slab | BlockId::Detector | BlockId::ResponseKind
        )
    }) || !regions.is_empty();
    if slab_mode {
        let affine = blocks.iter().find(|b| {
            !matches!(
                b.id,
                BlockId::Slab | BlockId::Detector | BlockId::ResponseKind
            )
        });
        if let Some(block) = affine {
            return Err(ParseError::MixedKinds { line: block.line });
        }
        return interpret_slab(&blocks, &regions);
    }
    interpret_affine(&blocks)
}

fn parse_directive(
    line_no: usize,
    tokens: &[(usize, &str)],
    regions: &mut Vec<(usize, Vec<f64>)>,
) -> Result<Option<RawBlock>, ParseError> {
    let bad = |reason: &str| ParseError::BadDirective {
        line: line_no,
        reason: reason.to_string(),
    };
    let head = tokens[0].1;
    let rest = &tokens[1..];
    let numbers = |expected: usize, what: &str| -> Result<Vec<f64>, ParseError> {
        if rest.len() != expected {
            return Err(bad(&format!("`{what}` expects {expected} argument(s)")));
        }
        rest.iter()
            .map(|(col, t)| parse_number(line_no, *col, t))
            .collect()
    };
    let block = |id: BlockId, args: Vec<f64>| RawBlock {
        id,
        line: line_no,
        args,
        keyword: None,
        rows: Vec::new(),
    };

    let parsed = match head {
        "dims" => block(BlockId::Dims, numbers(2, "dims")?),
        "alpha0" => {
            if !rest.is_empty() {
                return Err(bad("`alpha0` takes no arguments; data follows on the next line"));
            }
            block(BlockId::Alpha0, Vec::new())
        }
        "matrix" | "vector" => {
            let is_matrix = head == "matrix";
            let sub = rest
                .first()
                .ok_or_else(|| bad("missing block name after directive"))?;
            let idx_tokens = &rest[1..];
            let id = match (is_matrix, sub.1) {
                (true, "L0") => BlockId::L0,
                (true, "L") => BlockId::L(one_index(line_no, idx_tokens, 1)?[0]),
                (true, "L2") => {
                    let jk = one_index(line_no, idx_tokens, 2)?;
                    ordered_pair(line_no, jk[0], jk[1]).map(|(j, k)| BlockId::L2(j, k))?
                }
                (false, "q0") => BlockId::Q0,
                (false, "q") => BlockId::Q(one_index(line_no, idx_tokens, 1)?[0]),
                (false, "q2") => {
                    let jk = one_index(line_no, idx_tokens, 2)?;
                    ordered_pair(line_no, jk[0], jk[1]).map(|(j, k)| BlockId::Q2(j, k))?
                }
                _ => {
                    return Err(ParseError::UnknownDirective {
                        line: line_no,
                        directive: format!("{head} {}", sub.1),
                    })
                }
            };
            block(id, Vec::new())
        }
        "response" => {
            let sub = rest
                .first()
                .ok_or_else(|| bad("missing block name after `response`"))?;
            if rest.len() != 1 {
                return Err(bad("`response` takes exactly one block name"));
            }
            let id = match sub.1 {
                "c" => BlockId::C,
                "M" => BlockId::M,
                "N" => BlockId::N,
                "d" => BlockId::D,
                "G" => BlockId::G,
                other => {
                    return Err(ParseError::UnknownDirective {
                        line: line_no,
                        directive: format!("response {other}"),
                    })
                }
            };
            block(id, Vec::new())
        }
        "slab" => block(BlockId::Slab, numbers(2, "slab")?),
        "region" => {
            regions.push((line_no, numbers(4, "region")?));
            return Ok(None);
        }
        "detector" => block(BlockId::Detector, numbers(3, "detector")?),
        "response_kind" => {
            if rest.len() != 1 {
                return Err(bad("`response_kind` expects one keyword"));
            }
            let mut b = block(BlockId::ResponseKind, Vec::new());
            b.keyword = Some(rest[0].1.to_string());
            b
        }
        other => {
            return Err(ParseError::UnknownDirective {
                line: line_no,
                directive: other.to_string(),
            })
        }
    };
    Ok(Some(parsed))
}

fn one_index(
    line_no: usize,
    tokens: &[(usize, &str)],
    expected: usize,
) -> Result<Vec<usize>, ParseError> {
    if tokens.len() != expected {
        return Err(ParseError::BadDirective {
            line: line_no,
            reason: format!("expected {expected} parameter index(es)"),
        });
    }
    tokens
        .iter()
        .map(|(col, t)| parse_index(line_no, *col, t))
        .collect()
}

fn ordered_pair(line_no: usize, j: usize, k: usize) -> Result<(usize, usize), ParseError> {
    if j > k {
        return Err(ParseError::BadDirective {
            line: line_no,
            reason: format!(
                "quadratic blocks are stored once with j <= k, got j={} k={}",
                j + 1,
                k + 1
            ),
        });
    }
    Ok((j, k))
}

fn interpret_affine(blocks: &[RawBlock]) -> Result<ParsedProblem, ParseError> {
    let dims = blocks
        .iter()
        .find(|b| b.id == BlockId::Dims)
        .ok_or(ParseError::MissingDims)?;
    let k_u = dims.args[0] as usize;
    let n_alpha = dims.args[1] as usize;
    if k_u == 0 || n_alpha == 0 || dims.args.iter().any(|a| a.fract() != 0.0 || *a < 0.0) {
        return Err(ParseError::BadDirective {
            line: dims.line,
            reason: "`dims` expects two positive integers".into(),
        });
    }
    // Dense desk-scale storage; reject sizes that could not be meant.
    if k_u > 16384 || n_alpha > 16384 {
        return Err(ParseError::BadDirective {
            line: dims.line,
            reason: format!("dimensions {k_u} x {n_alpha} exceed the supported dense scale"),
        });
    }

    let mut data = AffineQuadraticProblem::zeros(k_u, n_alpha);
    let mut alpha0 = Array1::zeros(n_alpha);

    let check_param = |block: &RawBlock, index: usize| -> Result<(), ParseError> {
        if index >= n_alpha {
            return Err(ParseError::IndexOutOfRange {
                block: block.id.to_string(),
                index: index + 1,
                max: n_alpha,
            });
        }
        Ok(())
    };

    for block in blocks {
        match block.id {
            BlockId::Dims => {
                expect_shape(block, 0, 0)?;
            }
            BlockId::Alpha0 => alpha0 = read_vector(block, n_alpha)?,
            BlockId::L0 => data.l0 = read_matrix(block, k_u, k_u)?,
            BlockId::L(k) => {
                check_param(block, k)?;
                data.l1.insert(k, read_matrix(block, k_u, k_u)?);
            }
            BlockId::L2(j, k) => {
                check_param(block, k)?;
                data.l2.insert((j, k), read_matrix(block, k_u, k_u)?);
            }
            BlockId::Q0 => data.q0 = read_vector(block, k_u)?,
            BlockId::Q(k) => {
                check_param(block, k)?;
                data.q1.insert(k, read_vector(block, k_u)?);
            }
            BlockId::Q2(j, k) => {
                check_param(block, k)?;
                data.q2.insert((j, k), read_vector(block, k_u)?);
            }
            BlockId::C => data.c = read_vector(block, k_u)?,
            BlockId::M => data.m = read_matrix(block, k_u, k_u)?,
            BlockId::N => data.n = read_matrix(block, k_u, n_alpha)?,
            BlockId::D => data.d = read_vector(block, n_alpha)?,
            BlockId::G => data.g = read_matrix(block, n_alpha, n_alpha)?,
            _ => unreachable!("slab directives are rejected before this point"),
        }
    }

    let alpha0 = ParameterVector::new(alpha0).map_err(|e| ParseError::DimensionMismatch {
        block: "alpha0".into(),
        expected: "finite values".into(),
        found: e.to_string(),
    })?;
    Ok(ParsedProblem::Affine {
        data: Box::new(data),
        alpha0,
    })
}

fn expect_shape(block: &RawBlock, rows: usize, _cols: usize) -> Result<(), ParseError> {
    if block.rows.len() != rows {
        return Err(ParseError::DimensionMismatch {
            block: block.id.to_string(),
            expected: format!("{rows} data row(s)"),
            found: format!("{} data row(s)", block.rows.len()),
        });
    }
    Ok(())
}

fn read_matrix(block: &RawBlock, rows: usize, cols: usize) -> Result<Array2<f64>, ParseError> {
    if block.rows.len() != rows || block.rows.iter().any(|r| r.len() != cols) {
        return Err(ParseError::DimensionMismatch {
            block: block.id.to_string(),
            expected: format!("{rows} row(s) of {cols} number(s)"),
            found: format!(
                "{} row(s) of {} number(s)",
                block.rows.len(),
                block
                    .rows
                    .iter()
                    .map(|r| r.len().to_string())
                    .collect::<Vec<_>>()
                    .join("/")
            ),
        });
    }
    let flat: Vec<f64> = block.rows.iter().flatten().copied().collect();
    Ok(Array2::from_shape_vec((rows, cols), flat).expect("shape checked above"))
}

fn read_vector(block: &RawBlock, len: usize) -> Result<Array1<f64>, ParseError> {
    let flat: Vec<f64> = block.rows.iter().flatten().copied().collect();
    if flat.len() != len {
        return Err(ParseError::DimensionMismatch {
            block: block.id.to_string(),
            expected: format!("{len} number(s)"),
            found: format!("{} number(s)", flat.len()),
        });
    }
    Ok(Array1::from_vec(flat))
}

fn interpret_slab(
    blocks: &[RawBlock],
    regions: &[(usize, Vec<f64>)],
) -> Result<ParsedProblem, ParseError> {
    if let Some(block) = blocks.iter().find(|b| !b.rows.is_empty()) {
        return Err(ParseError::BadDirective {
            line: block.line,
            reason: format!("`{}` takes its values on the directive line", block.id),
        });
    }
    let slab = blocks
        .iter()
        .find(|b| b.id == BlockId::Slab)
        .ok_or(ParseError::MissingSlabField { field: "slab" })?;
    if regions.is_empty() {
        return Err(ParseError::MissingSlabField { field: "region" });
    }
    let detector = blocks
        .iter()
        .find(|b| b.id == BlockId::Detector)
        .ok_or(ParseError::MissingSlabField { field: "detector" })?;

    let cells = slab.args[1];
    if cells.fract() != 0.0 || cells < 0.0 {
        return Err(ParseError::BadDirective {
            line: slab.line,
            reason: "`slab` cell count must be a nonnegative integer".into(),
        });
    }
    let response_kind = match blocks.iter().find(|b| b.id == BlockId::ResponseKind) {
        None => ResponseKind::LinearDetector,
        Some(block) => match block.keyword.as_deref() {
            Some("linear_detector") => ResponseKind::LinearDetector,
            Some("quadratic_norm") => ResponseKind::QuadraticNorm,
            other => {
                return Err(ParseError::BadDirective {
                    line: block.line,
                    reason: format!(
                        "response_kind must be linear_detector or quadratic_norm, got `{}`",
                        other.unwrap_or("")
                    ),
                })
            }
        },
    };

    let cfg = SlabConfig {
        length: slab.args[0],
        cells: cells as usize,
        regions: regions
            .iter()
            .map(|(_, r)| Region {
                span_fraction: r[0],
                diffusion: r[1],
                absorption: r[2],
                source: r[3],
            })
            .collect(),
        detector: Detector {
            lo_fraction: detector.args[0],
            hi_fraction: detector.args[1],
            coefficient: detector.args[2],
        },
        response_kind,
    };
    Ok(ParsedProblem::Slab(cfg))
}

fn push_number(out: &mut String, v: f64) {
    // Shortest representation that round-trips to the same f64.
    out.push_str(&format!("{v}"));
}

fn push_row(out: &mut String, row: impl Iterator<Item = f64>) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        push_number(out, v);
        first = false;
    }
    out.push('\n');
}

/// Serialize problem data and its nominal parameters to the file format.
/// Dense fields that are entirely zero are omitted (they parse back as
/// zero); quadratic-family map entries are always written.
pub fn serialize_affine(data: &AffineQuadraticProblem, alpha0: &ParameterVector) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("dims {} {}\n", data.state_dim, data.param_dim));
    out.push_str("alpha0\n");
    push_row(&mut out, alpha0.values.iter().copied());

    let matrix = |name: String, m: &Array2<f64>, always: bool, out: &mut String| {
        // Bit-level zero test so negative zeros are written, not dropped.
        if !always && m.iter().all(|v| v.to_bits() == 0) {
            return;
        }
        out.push_str(&name);
        out.push('\n');
        for row in m.rows() {
            push_row(out, row.iter().copied());
        }
    };
    matrix("matrix L0".into(), &data.l0, false, &mut out);
    for (k, block) in &data.l1 {
        matrix(format!("matrix L {}", k + 1), block, true, &mut out);
    }
    for ((j, k), block) in &data.l2 {
        matrix(
            format!("matrix L2 {} {}", j + 1, k + 1),
            block,
            true,
            &mut out,
        );
    }

    let vector = |name: String, v: &Array1<f64>, always: bool, out: &mut String| {
        if !always && v.iter().all(|x| x.to_bits() == 0) {
            return;
        }
        out.push_str(&name);
        out.push('\n');
        push_row(out, v.iter().copied());
    };
    vector("vector q0".into(), &data.q0, false, &mut out);
    for (k, block) in &data.q1 {
        vector(format!("vector q {}", k + 1), block, true, &mut out);
    }
    for ((j, k), block) in &data.q2 {
        vector(
            format!("vector q2 {} {}", j + 1, k + 1),
            block,
            true,
            &mut out,
        );
    }

    vector("response c".into(), &data.c, false, &mut out);
    matrix("response M".into(), &data.m, false, &mut out);
    matrix("response N".into(), &data.n, false, &mut out);
    vector("response d".into(), &data.d, false, &mut out);
    matrix("response G".into(), &data.g, false, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sensas::scalar_fixture_parts;

    fn scalar_text() -> String {
        let (data, alpha0) = scalar_fixture_parts();
        serialize_affine(&data, &alpha0)
    }

    #[test]
    fn scalar_fixture_round_trips_block_for_block() {
        let (data, alpha0) = scalar_fixture_parts();
        let text = serialize_affine(&data, &alpha0);
        match parse_problem_text(&text).unwrap() {
            ParsedProblem::Affine {
                data: parsed,
                alpha0: parsed_alpha,
            } => {
                assert_eq!(*parsed, data);
                assert_eq!(parsed_alpha.values, alpha0.values);
            }
            other => panic!("expected affine problem, got {other:?}"),
        }
    }

    #[test]
    fn missing_magic_is_rejected() {
        let text = scalar_text().replacen(MAGIC, "SENSAS-PROBLEM v2", 1);
        assert!(matches!(
            parse_problem_text(&text),
            Err(ParseError::MissingMagic)
        ));
        assert!(matches!(
            parse_problem_text(""),
            Err(ParseError::MissingMagic)
        ));
    }

    #[test]
    fn wrong_row_count_names_the_block() {
        let text = format!("{MAGIC}\ndims 2 2\nmatrix L0\n1 0\n0 1\n0 0\n");
        match parse_problem_text(&text) {
            Err(ParseError::DimensionMismatch { block, .. }) => assert_eq!(block, "L0"),
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_token_carries_position() {
        let text = format!("{MAGIC}\ndims 1 1\nmatrix L0\n1,5\n");
        match parse_problem_text(&text) {
            Err(ParseError::NonNumeric { line, col, token }) => {
                assert_eq!(line, 4);
                assert_eq!(col, 1);
                assert_eq!(token, "1,5");
            }
            other => panic!("expected non-numeric error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_block_is_rejected() {
        let text = format!("{MAGIC}\ndims 1 1\nvector q0\n1\nvector q0\n2\n");
        match parse_problem_text(&text) {
            Err(ParseError::DuplicateBlock { block }) => assert_eq!(block, "q0"),
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn omitted_blocks_default_to_zero() {
        let text = format!("{MAGIC}\ndims 2 3\nmatrix L0\n1 0\n0 1\n");
        match parse_problem_text(&text).unwrap() {
            ParsedProblem::Affine { data, alpha0 } => {
                assert_eq!(data.q0, Array1::zeros(2));
                assert_eq!(data.c, Array1::zeros(2));
                assert!(data.l1.is_empty());
                assert_eq!(alpha0.values, Array1::zeros(3));
            }
            other => panic!("expected affine, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!(
            "{MAGIC}\n# a comment\n\ndims 1 2   # inline comment\nalpha0\n2 4\nmatrix L 1\n1\nvector q 2\n1\nresponse c\n1\n"
        );
        match parse_problem_text(&text).unwrap() {
            ParsedProblem::Affine { data, alpha0 } => {
                assert_eq!(alpha0.values, ndarray::arr1(&[2.0, 4.0]));
                assert_eq!(data.l1[&0], ndarray::arr2(&[[1.0]]));
                assert_eq!(data.q1[&1], ndarray::arr1(&[1.0]));
            }
            other => panic!("expected affine, got {other:?}"),
        }
    }

    #[test]
    fn parameter_index_out_of_range_is_rejected() {
        let text = format!("{MAGIC}\ndims 1 2\nmatrix L 3\n1\n");
        match parse_problem_text(&text) {
            Err(ParseError::IndexOutOfRange { block, index, max }) => {
                assert_eq!(block, "L 3");
                assert_eq!(index, 3);
                assert_eq!(max, 2);
            }
            other => panic!("expected index error, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_indices_must_be_ordered() {
        let text = format!("{MAGIC}\ndims 1 2\nmatrix L2 2 1\n1\n");
        assert!(matches!(
            parse_problem_text(&text),
            Err(ParseError::BadDirective { .. })
        ));
    }

    #[test]
    fn slab_file_parses() {
        let text = format!(
            "{MAGIC}\nslab 10 50\nregion 1 1 0.1 1\ndetector 0 1 1\nresponse_kind linear_detector\n"
        );
        match parse_problem_text(&text).unwrap() {
            ParsedProblem::Slab(cfg) => {
                assert_eq!(cfg.cells, 50);
                assert_eq!(cfg.regions.len(), 1);
                assert_eq!(cfg.response_kind, ResponseKind::LinearDetector);
            }
            other => panic!("expected slab, got {other:?}"),
        }
    }

    #[test]
    fn slab_and_affine_directives_cannot_mix() {
        let text = format!("{MAGIC}\ndims 1 1\nslab 10 50\nregion 1 1 0.1 1\ndetector 0 1 1\n");
        assert!(matches!(
            parse_problem_text(&text),
            Err(ParseError::MixedKinds { .. })
        ));
    }

    #[test]
    fn slab_missing_detector_is_rejected() {
        let text = format!("{MAGIC}\nslab 10 50\nregion 1 1 0.1 1\n");
        assert!(matches!(
            parse_problem_text(&text),
            Err(ParseError::MissingSlabField { field: "detector" })
        ));
    }

    #[test]
    fn unknown_directive_is_rejected() {
        let text = format!("{MAGIC}\ndims 1 1\nmatrices L0\n1\n");
        assert!(matches!(
            parse_problem_text(&text),
            Err(ParseError::UnknownDirective { .. })
        ));
    }

    #[test]
    fn data_before_any_block_is_rejected() {
        let text = format!("{MAGIC}\n1 2 3\n");
        assert!(matches!(
            parse_problem_text(&text),
            Err(ParseError::DataOutsideBlock { line: 2 })
        ));
    }
}
