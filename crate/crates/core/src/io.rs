//! The `.ten` text tensor format.
//!
//! ```text
//! # comment
//! order 3
//! shape 2 3 4
//! data
//! 1 2 3 ... (24 values in vectorization order)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Shape};

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Tokens of a text source with '#' comments removed, tagged with 1-based
/// line and column.
pub(crate) fn tokens(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().flat_map(|(ln, line)| {
        let body = line.split('#').next().unwrap_or("");
        body.split_whitespace().map(move |tok| {
            let col = tok.as_ptr() as usize - body.as_ptr() as usize + 1;
            (ln + 1, col, tok)
        })
    })
}

pub fn parse_ten<T: Scalar>(text: &str) -> Result<DenseTensor<T>> {
    let mut toks = tokens(text).peekable();
    let last_line = text.lines().count().max(1);
    let expect_kw = |kw: &str, toks: &mut std::iter::Peekable<_>| -> Result<(usize, usize)> {
        match toks.next() {
            Some((l, c, t)) if t == kw => Ok((l, c)),
            Some((l, c, t)) => Err(parse_err(l, c, format!("expected '{kw}', found '{t}'"))),
            None => Err(parse_err(last_line, 1, format!("expected '{kw}', found end of input"))),
        }
    };
    let parse_usize = |(l, c, t): (usize, usize, &str)| -> Result<usize> {
        t.parse::<usize>()
            .map_err(|_| parse_err(l, c, format!("expected a non-negative integer, found '{t}'")))
    };

    let (ol, oc) = expect_kw("order", &mut toks)?;
    let order = match toks.next() {
        Some(tok) => parse_usize(tok)?,
        None => return Err(parse_err(ol, oc, "missing order value")),
    };
    let (sl, sc) = expect_kw("shape", &mut toks)?;
    let mut extents = Vec::with_capacity(order);
    while let Some(&(l, c, t)) = toks.peek() {
        if t == "data" {
            break;
        }
        toks.next();
        let e = parse_usize((l, c, t))?;
        if e == 0 {
            return Err(parse_err(l, c, "extents must be positive"));
        }
        extents.push(e);
    }
    if extents.len() != order {
        return Err(parse_err(
            sl,
            sc,
            format!("order {order} but {} extents given", extents.len()),
        ));
    }
    let (dl, dc) = expect_kw("data", &mut toks)?;
    let shape = Shape::new(extents)?;
    let mut data = Vec::with_capacity(shape.numel());
    for (l, c, t) in toks {
        let v: f64 = t
            .parse()
            .map_err(|_| parse_err(l, c, format!("invalid number '{t}'")))?;
        if !v.is_finite() {
            return Err(parse_err(l, c, format!("non-finite value '{t}'")));
        }
        data.push(T::from_f64(v).ok_or_else(|| parse_err(l, c, "value out of range"))?);
    }
    if data.len() != shape.numel() {
        return Err(parse_err(
            dl,
            dc,
            format!("shape {shape} needs {} values, found {}", shape.numel(), data.len()),
        ));
    }
    DenseTensor::new(shape, data)
}

pub fn format_ten<T: Scalar>(t: &DenseTensor<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "order {}", t.order());
    s.push_str("shape");
    for e in t.extents() {
        let _ = write!(s, " {e}");
    }
    s.push_str("\ndata\n");
    let per_line = t.extents().first().copied().unwrap_or(1).clamp(1, 8);
    for (k, v) in t.data().iter().enumerate() {
        s.push_str(&fmt_f64(v.as_f64()));
        s.push(if (k + 1) % per_line == 0 || k + 1 == t.numel() { '\n' } else { ' ' });
    }
    s
}

pub fn read_ten<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseTensor<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_ten(&text)
}

pub fn write_ten<T: Scalar>(path: impl AsRef<Path>, t: &DenseTensor<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_ten(t)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
