//! Sparse SDPA (`.dat-s`) writer and parser.
//!
//! SDPA's primal form is `Σ Fᵢ yᵢ − F₀ ⪰ 0`; our blocks are `F₀' + Σ yᵢ Fᵢ ⪰ 0`,
//! so the file holds `F₀ = −F₀'`. Every block becomes its own SDPA block.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{LmiBlock, Op1Mode, Op1Problem};
use crate::error::{Error, Result};
use crate::symlin::{Mat, SymMatrix};

/// One block as read back from a file, in `F₀' + Σ yᵢ Fᵢ ⪰ 0` orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpaBlock {
    pub constant: SymMatrix,
    pub terms: Vec<(usize, SymMatrix)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpaData {
    pub comments: Vec<String>,
    pub objective: Vec<f64>,
    pub blocks: Vec<SdpaBlock>,
}

impl SdpaData {
    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    /// Block data of `prob` in the same normalized form the parser produces.
    pub fn from_problem(prob: &Op1Problem) -> Self {
        Self::from_blocks(&prob.objective, &prob.blocks)
    }

    pub fn from_blocks(objective: &[f64], blocks: &[LmiBlock]) -> Self {
        let blocks = blocks
            .iter()
            .map(|b| {
                let mut terms: Vec<(usize, SymMatrix)> = b
                    .terms
                    .iter()
                    .filter(|(_, m)| m.max_abs() != 0.0)
                    .cloned()
                    .collect();
                terms.sort_by_key(|(i, _)| *i);
                SdpaBlock {
                    constant: b.constant.clone(),
                    terms,
                }
            })
            .collect();
        Self {
            comments: Vec::new(),
            objective: objective.to_vec(),
            blocks,
        }
    }

    /// Equality of objective and block maps, ignoring comments.
    pub fn same_problem(&self, other: &SdpaData) -> bool {
        self.objective == other.objective && self.blocks == other.blocks
    }
}

fn header_lines(prob: &Op1Problem) -> Vec<String> {
    let mut h = vec![
        "* cpabound metric feasibility problem".to_string(),
        format!(
            "* mode {}",
            match prob.mode {
                Op1Mode::Constant => "constant",
                Op1Mode::Full => "full",
            }
        ),
        format!(
            "* grid counts {:?} offsets {:?}",
            prob.grid.counts, prob.grid.offsets
        ),
        format!("* mu {:e}", prob.mu),
        format!("* eps0 {:e}", prob.eps0),
        format!(
            "* variables {} blocks {}",
            prob.variables.len(),
            prob.blocks.len()
        ),
        "* simplex h B B3".to_string(),
    ];
    for (s, k) in prob.constants.iter().enumerate() {
        h.push(format!("* {s} {:e} {:e} {:e}", k.h, k.b2, k.b3));
    }
    h
}

fn push_entries(out: &mut String, matno: usize, blk: usize, m: &SymMatrix, sign: f64) {
    let n = m.dim();
    for i in 0..n {
        for j in i..n {
            let v = sign * m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{matno} {blk} {} {} {v:e}", i + 1, j + 1);
            }
        }
    }
}

/// Renders `prob` as sparse SDPA text.
pub fn to_sdpa_string(prob: &Op1Problem) -> String {
    render_blocks(&header_lines(prob), &prob.objective, &prob.blocks)
}

/// Sparse SDPA text for `min cᵀy` subject to every block being positive semidefinite.
pub fn render_blocks(comments: &[String], objective: &[f64], blocks: &[LmiBlock]) -> String {
    let mut out = String::new();
    for line in comments {
        out.push_str(line);
        out.push('\n');
    }
    let _ = writeln!(out, "{}", objective.len());
    let _ = writeln!(out, "{}", blocks.len());
    let sizes: Vec<String> = blocks.iter().map(|b| b.dim().to_string()).collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let c: Vec<String> = objective.iter().map(|v| format!("{v:e}")).collect();
    out.push_str(&c.join(" "));
    out.push('\n');
    for (k, b) in blocks.iter().enumerate() {
        push_entries(&mut out, 0, k + 1, &b.constant, -1.0);
        let mut terms: Vec<&(usize, SymMatrix)> = b.terms.iter().collect();
        terms.sort_by_key(|(i, _)| *i);
        for (i, m) in terms {
            push_entries(&mut out, i + 1, k + 1, m, 1.0);
        }
    }
    out
}

pub fn export_sdpa(prob: &Op1Problem, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_sdpa_string(prob).as_bytes())?;
    f.flush()?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        what: "sdpa",
        line,
        msg: msg.into(),
    }
}

fn numbers(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
        .filter(|t| !t.is_empty())
}

pub fn parse_sdpa(text: &str) -> Result<SdpaData> {
    let mut comments = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((_, l)) = lines.peek() {
        let t = l.trim_start();
        if t.starts_with('*') || t.starts_with('"') {
            comments.push(l.to_string());
            lines.next();
        } else {
            break;
        }
    }
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        for (i, l) in lines.by_ref() {
            if !l.trim().is_empty() {
                return Ok((i + 1, l.to_string()));
            }
        }
        Err(parse_err(0, format!("missing {what}")))
    };
    let first_int = |ln: usize, s: &str| -> Result<i64> {
        numbers(s)
            .next()
            .ok_or_else(|| parse_err(ln, "expected integer"))?
            .parse::<i64>()
            .map_err(|e| parse_err(ln, e.to_string()))
    };

    let (ln, l) = next_line("variable count")?;
    let m = first_int(ln, &l)? as usize;
    let (ln, l) = next_line("block count")?;
    let nblocks = first_int(ln, &l)? as usize;

    let mut sizes: Vec<i64> = Vec::with_capacity(nblocks);
    while sizes.len() < nblocks {
        let (ln, l) = next_line("block sizes")?;
        for t in numbers(&l) {
            if sizes.len() == nblocks {
                break;
            }
            sizes.push(
                t.parse()
                    .map_err(|e: std::num::ParseIntError| parse_err(ln, e.to_string()))?,
            );
        }
    }
    let mut objective: Vec<f64> = Vec::with_capacity(m);
    while objective.len() < m {
        let (ln, l) = next_line("objective")?;
        for t in numbers(&l) {
            if objective.len() == m {
                break;
            }
            objective.push(
                t.parse()
                    .map_err(|e: std::num::ParseFloatError| parse_err(ln, e.to_string()))?,
            );
        }
    }

    let mut constants: Vec<Mat> = sizes
        .iter()
        .map(|s| Mat::zeros(s.unsigned_abs() as usize))
        .collect();
    let mut terms: Vec<std::collections::BTreeMap<usize, Mat>> = vec![Default::default(); nblocks];
    for (i, l) in lines {
        let ln = i + 1;
        let toks: Vec<&str> = numbers(l).collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(ln, "entry needs 5 fields"));
        }
        let ints: Vec<usize> = toks[..4]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(ln, e.to_string())))
            .collect::<Result<_>>()?;
        let v: f64 = toks[4]
            .parse()
            .map_err(|e: std::num::ParseFloatError| parse_err(ln, e.to_string()))?;
        let (matno, blk, r, c) = (ints[0], ints[1], ints[2], ints[3]);
        if blk == 0 || blk > nblocks {
            return Err(parse_err(ln, format!("block {blk} out of range")));
        }
        let dim = sizes[blk - 1].unsigned_abs() as usize;
        if r == 0 || c == 0 || r > dim || c > dim {
            return Err(parse_err(
                ln,
                format!("index ({r}, {c}) outside block of size {dim}"),
            ));
        }
        if matno > m {
            return Err(parse_err(ln, format!("matrix {matno} out of range")));
        }
        let target = if matno == 0 {
            &mut constants[blk - 1]
        } else {
            terms[blk - 1]
                .entry(matno - 1)
                .or_insert_with(|| Mat::zeros(dim))
        };
        let v = if matno == 0 { -v } else { v };
        target[(r - 1, c - 1)] = v;
        target[(c - 1, r - 1)] = v;
    }

    let blocks = constants
        .into_iter()
        .zip(terms)
        .map(|(c, t)| SdpaBlock {
            constant: SymMatrix::new(c),
            terms: t
                .into_iter()
                .map(|(i, m)| (i, SymMatrix::new(m)))
                .filter(|(_, m)| m.max_abs() != 0.0)
                .collect(),
        })
        .collect();
    Ok(SdpaData {
        comments,
        objective,
        blocks,
    })
}

pub fn read_sdpa(path: &Path) -> Result<SdpaData> {
    parse_sdpa(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_triangulation, AxisBox, GridSpec};
    use crate::metricopt::assemble_op1_const;
    use crate::sysmodel::linear_model;

    #[test]
    fn scalar_problem_layout() {
        let bx = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let t = build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![1]).unwrap()).unwrap();
        let m = linear_model(Mat::diag(&[-1.0]));
        let mut prob = assemble_op1_const(&t, &m, 1.0, 0.1).unwrap();
        prob.blocks.truncate(1);
        prob.constants.clear();
        let text = to_sdpa_string(&prob);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('*')).collect();
        assert_eq!(&body[..4], &["2", "1", "1", "0e0 0e0"]);
        let back = parse_sdpa(&text).unwrap();
        assert_eq!(back.blocks.len(), 1);
        assert_eq!(back.blocks[0].constant[(0, 0)], -0.1);
        assert!(back.same_problem(&SdpaData::from_problem(&prob)));
    }

    #[test]
    fn comments_and_formatting_variants_parse() {
        let text = "\"quoted comment\n* star\n1 =mdim\n1\n(2)\n{1.0}\n0 1 1 1 -3.5\n1 1 1 2 1\n";
        let d = parse_sdpa(text).unwrap();
        assert_eq!(d.comments.len(), 2);
        assert_eq!(d.objective, vec![1.0]);
        assert_eq!(d.blocks[0].constant[(0, 0)], 3.5);
        assert_eq!(d.blocks[0].terms[0].1[(1, 0)], 1.0);
    }

    #[test]
    fn bad_entries_rejected() {
        assert!(parse_sdpa("1\n1\n2\n0\n0 1 3 1 1.0\n").is_err());
        assert!(parse_sdpa("1\n1\n2\n0\n0 2 1 1 1.0\n").is_err());
        assert!(parse_sdpa("1\n1\n2\n0\n0 1 1\n").is_err());
    }
}
