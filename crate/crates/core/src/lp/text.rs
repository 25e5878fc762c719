//! Plain-text LP dump.
//!
//! ```text
//! VARS <n>
//! ROWS <m>
//! OBJ <offset>
//! c <j> <cost>            # nonzero costs only
//! col <j> <lower> <upper>
//! row <i> <lower> <upper>
//! a <i> <j> <value>
//! END
//! ```
//!
//! Infinite bounds are written `inf` / `-inf`. Numbers use the shortest
//! decimal text that reads back to the same `f64`.

use std::fmt::Write as _;

use super::LinearProgram;
use crate::error::{Error, Result};

pub fn write_lp(lp: &LinearProgram) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "VARS {}", lp.num_vars());
    let _ = writeln!(s, "ROWS {}", lp.num_rows());
    let _ = writeln!(s, "OBJ {}", lp.objective_offset);
    for (j, c) in lp.objective.iter().enumerate() {
        if *c != 0.0 {
            let _ = writeln!(s, "c {j} {c}");
        }
    }
    for j in 0..lp.num_vars() {
        let _ = writeln!(s, "col {j} {} {}", lp.col_lower[j], lp.col_upper[j]);
    }
    for i in 0..lp.num_rows() {
        let _ = writeln!(s, "row {i} {} {}", lp.row_lower[i], lp.row_upper[i]);
    }
    for (i, j, v) in &lp.triplets {
        let _ = writeln!(s, "a {i} {j} {v}");
    }
    s.push_str("END\n");
    s
}

pub fn parse_lp(text: &str) -> Result<LinearProgram> {
    let err = |line: usize, msg: String| Error::Syntax {
        path: "<lp>".into(),
        line,
        msg,
    };
    let mut lp = LinearProgram::new();
    let mut dims: (Option<usize>, Option<usize>) = (None, None);
    let mut ended = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if ended {
            return Err(err(line, "content after END".into()));
        }
        let f: Vec<&str> = content.split_whitespace().collect();
        let int = |i: usize| -> Result<usize> {
            f.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(line, format!("expected an index in column {}", i + 1)))
        };
        let num = |i: usize| -> Result<f64> {
            f.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(line, format!("expected a number in column {}", i + 1)))
        };
        let need = |count: usize| -> Result<()> {
            if f.len() == count {
                Ok(())
            } else {
                Err(err(line, format!("'{}' takes {} fields", f[0], count - 1)))
            }
        };
        let (n, m) = (dims.0.unwrap_or(0), dims.1.unwrap_or(0));
        match f[0] {
            "VARS" => {
                need(2)?;
                let n = int(1)?;
                dims.0 = Some(n);
                lp.objective = vec![0.0; n];
                lp.col_lower = vec![0.0; n];
                lp.col_upper = vec![f64::INFINITY; n];
            }
            "ROWS" => {
                need(2)?;
                let m = int(1)?;
                dims.1 = Some(m);
                lp.row_lower = vec![f64::NEG_INFINITY; m];
                lp.row_upper = vec![f64::INFINITY; m];
            }
            "OBJ" => {
                need(2)?;
                lp.objective_offset = num(1)?;
            }
            "c" => {
                need(3)?;
                let j = int(1)?;
                if j >= n {
                    return Err(err(line, format!("variable {j} out of range")));
                }
                lp.objective[j] = num(2)?;
            }
            "col" => {
                need(4)?;
                let j = int(1)?;
                if j >= n {
                    return Err(err(line, format!("variable {j} out of range")));
                }
                lp.col_lower[j] = num(2)?;
                lp.col_upper[j] = num(3)?;
            }
            "row" => {
                need(4)?;
                let i = int(1)?;
                if i >= m {
                    return Err(err(line, format!("row {i} out of range")));
                }
                lp.row_lower[i] = num(2)?;
                lp.row_upper[i] = num(3)?;
            }
            "a" => {
                need(4)?;
                let (i, j) = (int(1)?, int(2)?);
                if i >= m || j >= n {
                    return Err(err(line, format!("entry ({i}, {j}) out of range")));
                }
                lp.triplets.push((i, j, num(3)?));
            }
            "END" => ended = true,
            other => return Err(err(line, format!("unknown record '{other}'"))),
        }
    }
    if dims.0.is_none() || dims.1.is_none() {
        return Err(err(1, "missing VARS or ROWS header".into()));
    }
    if !ended {
        return Err(err(text.lines().count(), "missing END".into()));
    }
    lp.validate()?;
    Ok(lp)
}
