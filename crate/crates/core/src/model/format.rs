//! Plain-text sparse instance interchange format.
//!
//! ```text
//! # comment
//! n nprime m
//! c <nprime values>
//! f <n values>
//! b <m values>
//! A i j v        (one triplet per line)
//! B i j v
//! Y i j v        (optional side rows over y; column index n holds the rhs)
//! ```
//!
//! Whitespace-separated decimals; `#` starts a comment. Writing uses Rust's
//! shortest round-trip float formatting, so write-then-parse is exact.

use super::{ProblemData, SideRow, SparseMat, YDomain};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, msg: msg.into() })
}

pub fn parse_instance(text: &str) -> Result<ProblemData, FormatError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut c: Option<Vec<f64>> = None;
    let mut f: Option<Vec<f64>> = None;
    let mut b_vec: Option<Vec<f64>> = None;
    let mut a_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut b_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut y_trip: Vec<(usize, usize, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if header.is_none() {
            if tokens.len() != 3 {
                return err(line, "header must be `n nprime m`");
            }
            let parse_dim = |t: &str| -> Result<usize, FormatError> {
                t.parse::<usize>().map_err(|_| FormatError {
                    line,
                    msg: format!("bad dimension `{}`", t),
                })
            };
            header = Some((parse_dim(tokens[0])?, parse_dim(tokens[1])?, parse_dim(tokens[2])?));
            continue;
        }
        let (n, nprime, m) = header.unwrap();
        let parse_val = |t: &str| -> Result<f64, FormatError> {
            let v: f64 = t.parse().map_err(|_| FormatError {
                line,
                msg: format!("bad number `{}`", t),
            })?;
            if !v.is_finite() {
                return err(line, format!("non-finite number `{}`", t));
            }
            Ok(v)
        };
        let parse_vector = |expected: usize| -> Result<Vec<f64>, FormatError> {
            if tokens.len() - 1 != expected {
                return err(
                    line,
                    format!("expected {} values, found {}", expected, tokens.len() - 1),
                );
            }
            tokens[1..].iter().map(|t| parse_val(t)).collect()
        };
        let parse_triplet = |max_i: usize, max_j: usize| -> Result<(usize, usize, f64), FormatError> {
            if tokens.len() != 4 {
                return err(line, "triplet must be `tag i j v`");
            }
            let i: usize = tokens[1]
                .parse()
                .map_err(|_| FormatError { line, msg: format!("bad row index `{}`", tokens[1]) })?;
            let j: usize = tokens[2]
                .parse()
                .map_err(|_| FormatError { line, msg: format!("bad column index `{}`", tokens[2]) })?;
            if i >= max_i {
                return err(line, format!("row index {} out of range (max {})", i, max_i));
            }
            if j >= max_j {
                return err(line, format!("column index {} out of range (max {})", j, max_j));
            }
            Ok((i, j, parse_val(tokens[3])?))
        };
        match tokens[0] {
            "c" => c = Some(parse_vector(nprime)?),
            "f" => f = Some(parse_vector(n)?),
            "b" => b_vec = Some(parse_vector(m)?),
            "A" => a_trip.push(parse_triplet(m, nprime)?),
            "B" => b_trip.push(parse_triplet(m, n)?),
            "Y" => y_trip.push(parse_triplet(usize::MAX - 1, n + 1)?),
            other => return err(line, format!("unknown record tag `{}`", other)),
        }
    }

    let (n, nprime, m) = match header {
        Some(h) => h,
        None => return err(0, "missing header line"),
    };
    let c = c.unwrap_or_else(|| vec![0.0; nprime]);
    let f = match f {
        Some(v) => v,
        None if n == 0 => Vec::new(),
        None => return err(0, "missing `f` line"),
    };
    let b_vec = b_vec.unwrap_or_else(|| vec![0.0; m]);
    if c.len() != nprime {
        return err(0, "c length disagrees with header");
    }

    let a = SparseMat::from_triplets(m, nprime, &a_trip)
        .map_err(|e| FormatError { line: 0, msg: e.to_string() })?;
    let b = SparseMat::from_triplets(m, n, &b_trip)
        .map_err(|e| FormatError { line: 0, msg: e.to_string() })?;

    let mut side_rows: Vec<SideRow> = Vec::new();
    let mut sorted = y_trip;
    sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for (i, j, v) in sorted {
        while side_rows.len() <= i {
            side_rows.push(SideRow { coeffs: Vec::new(), rhs: 0.0 });
        }
        if j == n {
            side_rows[i].rhs = v;
        } else {
            side_rows[i].coeffs.push((j, v));
        }
    }

    Ok(ProblemData {
        c,
        f,
        a,
        b,
        rhs: b_vec,
        y_domain: YDomain { side_rows },
    })
}

pub fn write_instance(inst: &ProblemData) -> String {
    let mut out = String::new();
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    out.push_str(&format!("{} {} {}\n", inst.n(), inst.n_prime(), inst.m()));
    out.push_str(&format!("c {}\n", join(&inst.c)).replace("c \n", "c\n"));
    out.push_str(&format!("f {}\n", join(&inst.f)).replace("f \n", "f\n"));
    out.push_str(&format!("b {}\n", join(&inst.rhs)).replace("b \n", "b\n"));
    for (i, j, v) in inst.a.triplets() {
        out.push_str(&format!("A {} {} {}\n", i, j, v));
    }
    for (i, j, v) in inst.b.triplets() {
        out.push_str(&format!("B {} {} {}\n", i, j, v));
    }
    let n = inst.n();
    for (i, row) in inst.y_domain.side_rows.iter().enumerate() {
        for &(j, v) in &row.coeffs {
            out.push_str(&format!("Y {} {} {}\n", i, j, v));
        }
        out.push_str(&format!("Y {} {} {}\n", i, n, row.rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::micro_m1;

    #[test]
    fn round_trip_micro() {
        let inst = micro_m1();
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.n(), 1);
        assert_eq!(back.n_prime(), 1);
        assert_eq!(back.m(), 2);
        assert_eq!(back.c, inst.c);
        assert_eq!(back.f, inst.f);
        assert_eq!(back.rhs, inst.rhs);
        assert_eq!(back.a.triplets(), inst.a.triplets());
        assert_eq!(back.b.triplets(), inst.b.triplets());
        // and the serialization is stable
        assert_eq!(text, write_instance(&back));
    }

    #[test]
    fn side_rows_round_trip() {
        let mut inst = micro_m1();
        inst.y_domain.side_rows.push(SideRow { coeffs: vec![(0, 2.5)], rhs: 1.5 });
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.y_domain.side_rows.len(), 1);
        assert_eq!(back.y_domain.side_rows[0].coeffs, vec![(0, 2.5)]);
        assert_eq!(back.y_domain.side_rows[0].rhs, 1.5);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# instance\n1 1 1\n\nc 2 # cost\nf 3\nb 1\nA 0 0 1\nB 0 0 1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.c, vec![2.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "1 1 1\nc 2\nf 3\nb 1\nA 0 5 1\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 5);
    }
}
