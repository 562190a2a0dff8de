//! Parser for the `.tn` network format.
//!
//! ```text
//! # statements end at a newline or ';'
//! node A [i,j] @a.ten
//! node v [j:3] = 1 2 3
//! output [i]
//! ```
//!
//! A label may carry its extent as `label:extent`. Inline nodes take their
//! extents from these annotations, from other nodes sharing the label, or
//! (for a single remaining label) from the number of values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{is_ident, Node, TensorNetwork};
use crate::error::{Error, Result};
use crate::io::read_ten;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    LBracket,
    RBracket,
    Comma,
    Colon,
    At,
    Equals,
    End,
}

/// Label name, optional extent annotation, and its line and column.
type LabelSpec = (String, Option<usize>, usize, usize);

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: col,
        message: msg.into(),
    }
}

fn lex(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let body = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = body.chars().collect();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let col = k + 1;
            let single = match c {
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                '@' => Some(Tok::At),
                '=' => Some(Tok::Equals),
                ';' => Some(Tok::End),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    col,
                });
                k += 1;
                continue;
            }
            if c.is_whitespace() {
                k += 1;
                continue;
            }
            let start = k;
            while k < chars.len() && !chars[k].is_whitespace() && !"[],:@=;".contains(chars[k]) {
                k += 1;
            }
            out.push(Spanned {
                tok: Tok::Word(chars[start..k].iter().collect()),
                line: line_no,
                col,
            });
        }
        out.push(Spanned {
            tok: Tok::End,
            line: line_no,
            col: chars.len() + 1,
        });
    }
    out
}

/// Raw path text after '@': everything up to whitespace or ';'.
fn path_after(text: &str, line: usize, col: usize) -> String {
    let l = text.lines().nth(line - 1).unwrap_or("");
    l.chars()
        .skip(col)
        .skip_while(|c| c.is_whitespace())
        .take_while(|c| !c.is_whitespace() && *c != ';' && *c != '#')
        .collect()
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    text: &'a str,
}

enum Source {
    File(PathBuf, usize, usize),
    Inline(Vec<f64>),
}

struct PendingNode {
    name: String,
    labels: Vec<(String, Option<usize>, usize, usize)>,
    source: Source,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .or_else(|| self.toks.last())
            .map_or((1, 1), |s| (s.line, s.col))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Spanned> {
        let (l, c) = self.here();
        match self.next() {
            Some(s) if s.tok == want => Ok(s),
            Some(s) => Err(err(s.line, s.col, format!("expected {what}, found {}", describe(&s.tok)))),
            None => Err(err(l, c, format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize)> {
        let (l, c) = self.here();
        match self.next() {
            Some(Spanned {
                tok: Tok::Word(w),
                line,
                col,
            }) if is_ident(&w) => Ok((w, line, col)),
            Some(s) => Err(err(s.line, s.col, format!("expected {what}, found {}", describe(&s.tok)))),
            None => Err(err(l, c, format!("expected {what}, found end of input"))),
        }
    }

    /// `[a, b:3, ...]`
    fn label_list(&mut self, allow_extent: bool) -> Result<Vec<LabelSpec>> {
        self.expect(Tok::LBracket, "'['")?;
        let mut labels = Vec::new();
        if matches!(self.peek(), Some(Spanned { tok: Tok::RBracket, .. })) {
            self.next();
            return Ok(labels);
        }
        loop {
            let (name, line, col) = self.ident("a label")?;
            let mut extent = None;
            if allow_extent && matches!(self.peek(), Some(Spanned { tok: Tok::Colon, .. })) {
                self.next();
                let (l, c) = self.here();
                match self.next() {
                    Some(Spanned { tok: Tok::Word(w), .. }) => match w.parse::<usize>() {
                        Ok(e) if e > 0 => extent = Some(e),
                        _ => return Err(err(l, c, format!("invalid extent '{w}'"))),
                    },
                    _ => return Err(err(l, c, "expected an extent after ':'")),
                }
            }
            labels.push((name, extent, line, col));
            let (l, c) = self.here();
            match self.next().map(|s| s.tok) {
                Some(Tok::Comma) => continue,
                Some(Tok::RBracket) => break,
                Some(t) => return Err(err(l, c, format!("expected ',' or ']', found {}", describe(&t)))),
                None => return Err(err(l, c, "unterminated label list")),
            }
        }
        Ok(labels)
    }

    fn end_of_statement(&mut self) -> Result<()> {
        let (l, c) = self.here();
        match self.next() {
            None | Some(Spanned { tok: Tok::End, .. }) => Ok(()),
            Some(s) => Err(err(l, c, format!("expected end of statement, found {}", describe(&s.tok)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("'{w}'"),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Comma => "','".into(),
        Tok::Colon => "':'".into(),
        Tok::At => "'@'".into(),
        Tok::Equals => "'='".into(),
        Tok::End => "end of statement".into(),
    }
}

/// Parses a network; `@FILE` references resolve relative to `base_dir`.
pub fn parse_network<T: Scalar>(text: &str, base_dir: Option<&Path>) -> Result<TensorNetwork<T>> {
    let mut p = Parser {
        toks: lex(text),
        pos: 0,
        text,
    };
    let mut pending: Vec<PendingNode> = Vec::new();
    let mut output: Option<Vec<String>> = None;

    while let Some(s) = p.next() {
        match s.tok {
            Tok::End => continue,
            Tok::Word(ref w) if w == "node" => {
                let (name, line, col) = p.ident("a node name")?;
                let labels = p.label_list(true)?;
                let (l, c) = p.here();
                let source = match p.next().map(|s| s.tok) {
                    Some(Tok::At) => {
                        let raw = path_after(p.text, l, c);
                        if raw.is_empty() {
                            return Err(err(l, c + 1, "expected a file path after '@'"));
                        }
                        // the path may have been split into several tokens
                        while let Some(Spanned { tok, line, .. }) = p.peek() {
                            if *line != l || *tok == Tok::End {
                                break;
                            }
                            p.next();
                        }
                        let path = match base_dir {
                            Some(d) => d.join(&raw),
                            None => PathBuf::from(&raw),
                        };
                        Source::File(path, l, c + 1)
                    }
                    Some(Tok::Equals) => {
                        let mut vals = Vec::new();
                        while let Some(Spanned { tok: Tok::Word(w), line, col }) = p.peek().cloned() {
                            let v: f64 = w
                                .parse()
                                .map_err(|_| err(line, col, format!("invalid number '{w}'")))?;
                            if !v.is_finite() {
                                return Err(err(line, col, format!("non-finite value '{w}'")));
                            }
                            vals.push(v);
                            p.next();
                        }
                        Source::Inline(vals)
                    }
                    Some(t) => {
                        return Err(err(l, c, format!("expected '@' or '=', found {}", describe(&t))))
                    }
                    None => return Err(err(l, c, "expected '@' or '=', found end of input")),
                };
                p.end_of_statement()?;
                if pending.iter().any(|n| n.name == name) {
                    return Err(err(line, col, format!("duplicate node name '{name}'")));
                }
                pending.push(PendingNode {
                    name,
                    labels,
                    source,
                    line,
                    col,
                });
            }
            Tok::Word(ref w) if w == "output" => {
                if output.is_some() {
                    return Err(err(s.line, s.col, "more than one output statement"));
                }
                let labels = p.label_list(false)?;
                p.end_of_statement()?;
                output = Some(labels.into_iter().map(|l| l.0).collect());
            }
            ref t => {
                return Err(err(
                    s.line,
                    s.col,
                    format!("expected 'node' or 'output', found {}", describe(t)),
                ))
            }
        }
    }
    let output = output.ok_or_else(|| {
        let line = text.lines().count().max(1);
        err(line, 1, "missing output statement")
    })?;

    // load file-backed tensors first so their extents can resolve inline ones
    let mut loaded: Vec<Option<DenseTensor<T>>> = Vec::with_capacity(pending.len());
    let mut known: BTreeMap<String, usize> = BTreeMap::new();
    for n in &pending {
        for (label, ext, _, _) in &n.labels {
            if let Some(e) = ext {
                known.entry(label.clone()).or_insert(*e);
            }
        }
    }
    for n in &pending {
        match &n.source {
            Source::File(path, l, c) => {
                let t: DenseTensor<T> = read_ten(path).map_err(|e| match e {
                    Error::Io { .. } => err(*l, *c, format!("cannot read '{}'", path.display())),
                    other => err(*l, *c, format!("in '{}': {other}", path.display())),
                })?;
                if t.order() != n.labels.len() {
                    return Err(err(
                        n.line,
                        n.col,
                        format!(
                            "node '{}' has {} labels but '{}' has order {}",
                            n.name,
                            n.labels.len(),
                            path.display(),
                            t.order()
                        ),
                    ));
                }
                for (m, (label, ext, ll, lc)) in n.labels.iter().enumerate() {
                    let e = t.extents()[m];
                    if ext.is_some_and(|x| x != e) {
                        return Err(err(*ll, *lc, format!("label '{label}' annotated with a different extent than the file's {e}")));
                    }
                    known.entry(label.clone()).or_insert(e);
                }
                loaded.push(Some(t));
            }
            Source::Inline(_) => loaded.push(None),
        }
    }

    let mut nodes = Vec::with_capacity(pending.len());
    for (n, t) in pending.into_iter().zip(loaded) {
        let tensor = match (t, &n.source) {
            (Some(t), _) => t,
            (None, Source::Inline(vals)) => {
                let mut ext: Vec<Option<usize>> = n
                    .labels
                    .iter()
                    .map(|(l, e, _, _)| e.or_else(|| known.get(l).copied()))
                    .collect();
                let unknown: Vec<usize> = (0..ext.len()).filter(|&k| ext[k].is_none()).collect();
                if unknown.len() > 1 {
                    return Err(err(
                        n.line,
                        n.col,
                        format!("cannot infer extents of inline node '{}'; annotate labels as name:extent", n.name),
                    ));
                }
                if let [k] = unknown[..] {
                    let rest: usize = ext.iter().flatten().product();
                    if rest == 0 || vals.len() % rest != 0 || vals.is_empty() {
                        return Err(err(n.line, n.col, format!("{} values do not fit node '{}'", vals.len(), n.name)));
                    }
                    ext[k] = Some(vals.len() / rest);
                }
                let ext: Vec<usize> = ext.into_iter().flatten().collect();
                let data = vals
                    .iter()
                    .map(|&v| T::from_f64(v).ok_or_else(|| err(n.line, n.col, "value out of range")))
                    .collect::<Result<Vec<T>>>()?;
                DenseTensor::new(ext, data).map_err(|e| err(n.line, n.col, format!("node '{}': {e}", n.name)))?
            }
            (None, Source::File(..)) => unreachable!("file nodes are loaded above"),
        };
        nodes.push(Node {
            name: n.name,
            labels: n.labels.into_iter().map(|l| l.0).collect(),
            tensor,
        });
    }
    TensorNetwork::new(nodes, output)
}

/// Reads a `.tn` file; tensor paths resolve relative to its directory.
pub fn read_network<T: Scalar>(path: impl AsRef<Path>) -> Result<TensorNetwork<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_network(&text, path.parent())
}
