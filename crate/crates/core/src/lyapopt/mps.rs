//! Fixed-format MPS export of the LP and import of external solutions.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::LpProblem;
use crate::error::{Error, Result};

/// Most precise rendering of `v` that fits a 12-character MPS field.
pub fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let fixed = (0..=12).map(|p| format!("{v:.p$}"));
    let sci = (0..=12).map(|p| format!("{v:.p$e}"));
    fixed
        .chain(sci)
        .filter(|s| s.len() <= 12)
        .filter_map(|s| s.parse::<f64>().ok().map(|x| ((x - v).abs(), s)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.len().cmp(&b.1.len())))
        .map(|(_, s)| s)
        .unwrap_or_else(|| format!("{v:.0e}"))
}

fn row_name(r: usize) -> String {
    format!("R{r}")
}

/// Writes the LP in fixed MPS format to `out`.
pub fn write_mps(prob: &LpProblem, name: &str, out: &mut impl Write) -> Result<()> {
    let nvar = prob.variable_count();
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nvar];
    let mut rhs: Vec<(u32, f64)> = Vec::new();
    let mut r = 0u32;
    for s in 0..prob.elements.len() {
        for row in prob.element_rows(s) {
            let mut merged: Vec<(usize, f64)> = row.coeffs.clone();
            merged.sort_by_key(|(j, _)| *j);
            merged.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            for (j, v) in merged {
                if v != 0.0 {
                    cols[j].push((r, v));
                }
            }
            if row.rhs != 0.0 {
                rhs.push((r, row.rhs));
            }
            r += 1;
        }
    }
    writeln!(out, "NAME          {name}")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N  OBJ")?;
    for i in 0..r {
        writeln!(out, " L  {}", row_name(i as usize))?;
    }
    writeln!(out, "COLUMNS")?;
    let q = prob.q_index();
    for (j, entries) in cols.iter().enumerate() {
        let cname = prob.variable_name(j);
        if j == q {
            writeln!(
                out,
                "    {:<8}  {:<8}  {:>12}",
                cname,
                "OBJ",
                format_number(1.0)
            )?;
        }
        for &(i, v) in entries {
            writeln!(
                out,
                "    {:<8}  {:<8}  {:>12}",
                cname,
                row_name(i as usize),
                format_number(v)
            )?;
        }
    }
    writeln!(out, "RHS")?;
    for (i, v) in rhs {
        writeln!(
            out,
            "    {:<8}  {:<8}  {:>12}",
            "RHS",
            row_name(i as usize),
            format_number(v)
        )?;
    }
    writeln!(out, "BOUNDS")?;
    for j in (0..prob.vertex_count).chain(std::iter::once(q)) {
        writeln!(out, " FR {:<8}  {}", "BND", prob.variable_name(j))?;
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

pub fn export_mps(prob: &LpProblem, name: &str, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mps(prob, name, &mut f)?;
    f.flush()?;
    Ok(())
}

/// An LP read back from MPS: `min cᵀx`, rows `≤ rhs`, with per-column bounds.
#[derive(Clone, Debug, Default)]
pub struct MpsModel {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub objective: Vec<f64>,
    /// `(row, column, value)`
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub free: Vec<bool>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        what: "mps",
        line,
        msg: msg.into(),
    }
}

pub fn parse_mps(text: &str) -> Result<MpsModel> {
    let mut m = MpsModel::default();
    let mut row_idx: HashMap<String, usize> = HashMap::new();
    let mut col_idx: HashMap<String, usize> = HashMap::new();
    let mut obj_name = String::new();
    let mut section = "";
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        if !line.starts_with(' ') {
            section = match line.split_whitespace().next().unwrap_or("") {
                "NAME" => "NAME",
                "ROWS" => "ROWS",
                "COLUMNS" => "COLUMNS",
                "RHS" => "RHS",
                "BOUNDS" => "BOUNDS",
                "ENDATA" => break,
                other => return Err(perr(ln, format!("unknown section {other}"))),
            };
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|e| perr(ln, e.to_string()));
        match section {
            "ROWS" => {
                if f.len() != 2 {
                    return Err(perr(ln, "row line needs type and name"));
                }
                match f[0] {
                    "N" => obj_name = f[1].to_string(),
                    "L" => {
                        row_idx.insert(f[1].to_string(), m.rows.len());
                        m.rows.push(f[1].to_string());
                        m.rhs.push(0.0);
                    }
                    t => return Err(perr(ln, format!("unsupported row type {t}"))),
                }
            }
            "COLUMNS" => {
                if f.len() < 3 || f.len().is_multiple_of(2) {
                    return Err(perr(ln, "column line needs name and row/value pairs"));
                }
                let j = *col_idx.entry(f[0].to_string()).or_insert_with(|| {
                    m.columns.push(f[0].to_string());
                    m.objective.push(0.0);
                    m.free.push(false);
                    m.columns.len() - 1
                });
                for pair in f[1..].chunks(2) {
                    let v = num(pair[1])?;
                    if pair[0] == obj_name {
                        m.objective[j] += v;
                    } else {
                        let r = *row_idx
                            .get(pair[0])
                            .ok_or_else(|| perr(ln, format!("unknown row {}", pair[0])))?;
                        m.entries.push((r, j, v));
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    if pair.len() != 2 {
                        return Err(perr(ln, "rhs needs row/value pairs"));
                    }
                    let r = *row_idx
                        .get(pair[0])
                        .ok_or_else(|| perr(ln, format!("unknown row {}", pair[0])))?;
                    m.rhs[r] = num(pair[1])?;
                }
            }
            "BOUNDS" => {
                if f.len() < 3 || f[0] != "FR" {
                    return Err(perr(ln, "only FR bounds are supported"));
                }
                let j = *col_idx
                    .get(f[2])
                    .ok_or_else(|| perr(ln, format!("unknown column {}", f[2])))?;
                m.free[j] = true;
            }
            _ => return Err(perr(ln, "data outside a section")),
        }
    }
    Ok(m)
}

/// Reads `name value` pairs and returns the vertex values `V`.
pub fn parse_solution(prob: &LpProblem, text: &str) -> Result<Vec<f64>> {
    let mut v = vec![f64::NAN; prob.vertex_count];
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 2 {
            continue;
        }
        let Some(idx) = f[0].strip_prefix('V').and_then(|s| s.parse::<usize>().ok()) else {
            continue;
        };
        let Ok(val) = f[1].parse::<f64>() else {
            continue;
        };
        if idx >= prob.vertex_count {
            return Err(perr(i + 1, format!("vertex index {idx} out of range")));
        }
        v[idx] = val;
    }
    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
        return Err(perr(0, format!("missing value for V{k}")));
    }
    Ok(v)
}

pub fn read_solution(prob: &LpProblem, path: &Path) -> Result<Vec<f64>> {
    parse_solution(prob, &std::fs::read_to_string(path)?)
}
