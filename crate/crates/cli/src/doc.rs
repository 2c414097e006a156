//! Setup description documents.
//!
//! Line-oriented text, one statement per line, `#` starts a comment:
//!
//! ```text
//! amplab-setup 1
//! setup early
//!   source 0 @ 0
//!   filter @ 2 : 3 5
//!   detector 4 @ 4
//! end
//! setup late
//!   source 4 @ 4
//!   detector 1 @ 9
//! end
//! both = early and late
//! result both
//! ```
//!
//! Points are `SITE @ TIME`. Filter holes are separated by spaces or commas.
//! `NAME = A and B and C` / `NAME = A or B` compose earlier definitions left to
//! right through the setup algebra, so its validity rules apply to parsed input;
//! a line may not mix `and` with `or`. `result NAME` selects the output setup,
//! otherwise the last definition is used.

use std::collections::BTreeMap;
use std::fmt;

use amplab_core::setup::{and_compose, or_compose, CompositionError, Filter, Setup, SpacetimePoint};
use thiserror::Error;

pub const HEADER: &str = "amplab-setup";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    /// A well-formed statement that violates a setup rule.
    Semantic {
        rule: &'static str,
        message: String,
    },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::Semantic { rule, message } => write!(f, "{message} [rule: {rule}]"),
        }
    }
}

/// Short name of the setup rule a composition error violates.
pub fn rule_name(e: &CompositionError) -> &'static str {
    match e {
        CompositionError::EmptyFilter { .. } => "nonempty-filter",
        CompositionError::NonMonotoneTimes { .. } => "increasing-times",
        CompositionError::EndpointMismatch { .. } => "and-endpoints",
        CompositionError::ShapeMismatch { .. } => "or-same-shape",
        CompositionError::DifferingFilterCount { .. } => "or-single-filter",
        CompositionError::OverlappingHoles { .. } => "or-disjoint-holes",
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Int(u64),
    At,
    Colon,
    Comma,
    Equals,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Token>, ParseError> {
    let code = text.split('#').next().unwrap_or("");
    let chars: Vec<char> = code.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '@' => Some(Tok::At),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, column });
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse()
                .map_err(|_| syntax(line_no, column, format!("integer {s} is too large")))?;
            out.push(Token {
                tok: Tok::Int(v),
                column,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(syntax(line_no, column, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

fn semantic(line: usize, column: usize, rule: &'static str, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Semantic {
            rule,
            message: msg.into(),
        },
    }
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [Token],
    pos: usize,
    end_column: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn next(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        let t = self.toks.get(self.pos).ok_or_else(|| {
            syntax(
                self.line,
                self.end_column,
                format!("expected {what}, found end of line"),
            )
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn int(&mut self, what: &str) -> Result<u64, ParseError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Int(v) => Ok(v),
            _ => Err(syntax(self.line, t.column, format!("expected {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<(&'a str, usize), ParseError> {
        let t = self.next(what)?;
        match &t.tok {
            Tok::Word(w) => Ok((w.as_str(), t.column)),
            _ => Err(syntax(self.line, t.column, format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next(what)?;
        if t.tok == tok {
            Ok(())
        } else {
            Err(syntax(self.line, t.column, format!("expected {what}")))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(syntax(self.line, t.column, "unexpected trailing input")),
        }
    }

    fn point(&mut self) -> Result<SpacetimePoint, ParseError> {
        let site = self.int("site")?;
        self.expect(Tok::At, "'@'")?;
        let time = self.int("time")?;
        let time = i64::try_from(time).map_err(|_| syntax(self.line, self.column(), "time out of range"))?;
        Ok(SpacetimePoint::new(site as usize, time))
    }
}

/// All named setups of a document plus the selected result.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupDocument {
    pub setups: BTreeMap<String, Setup>,
    pub result: String,
}

impl SetupDocument {
    pub fn result_setup(&self) -> &Setup {
        &self.setups[&self.result]
    }
}

#[derive(Default)]
struct Block {
    name: String,
    start_line: usize,
    source: Option<SpacetimePoint>,
    filters: Vec<(Filter, usize)>,
    detector: Option<SpacetimePoint>,
}

const KEYWORDS: [&str; 8] = ["setup", "end", "source", "filter", "detector", "result", "and", "or"];

pub fn parse_document(text: &str) -> Result<SetupDocument, ParseError> {
    let mut setups: BTreeMap<String, Setup> = BTreeMap::new();
    let mut last: Option<String> = None;
    let mut result: Option<(String, usize, usize)> = None;
    let mut block: Option<Block> = None;
    let mut seen_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line,
            toks: &toks,
            pos: 0,
            end_column: raw.chars().count() + 1,
        };
        if !seen_header {
            let (w, col) = cur.word("document header")?;
            if w != HEADER {
                return Err(syntax(
                    line,
                    col,
                    format!("document must start with '{HEADER} {VERSION}'"),
                ));
            }
            let col = cur.column();
            let v = cur.int("format version")?;
            if v != VERSION as u64 {
                return Err(syntax(
                    line,
                    col,
                    format!("unsupported format version {v}, expected {VERSION}"),
                ));
            }
            cur.finish()?;
            seen_header = true;
            continue;
        }

        let (head, head_col) = cur.word("statement")?;
        if let Some(b) = block.as_mut() {
            match head {
                "source" | "detector" => {
                    let p = cur.point()?;
                    cur.finish()?;
                    let slot = if head == "source" {
                        &mut b.source
                    } else {
                        &mut b.detector
                    };
                    if slot.is_some() {
                        return Err(syntax(
                            line,
                            head_col,
                            format!("duplicate {head} in setup '{}'", b.name),
                        ));
                    }
                    *slot = Some(p);
                }
                "filter" => {
                    cur.expect(Tok::At, "'@'")?;
                    let time = cur.int("filter time")? as i64;
                    cur.expect(Tok::Colon, "':'")?;
                    let mut holes = Vec::new();
                    while cur.pos < toks.len() {
                        if toks[cur.pos].tok == Tok::Comma && !holes.is_empty() {
                            cur.pos += 1;
                            continue;
                        }
                        holes.push(cur.int("hole site")? as usize);
                    }
                    let f =
                        Filter::new(time, holes).map_err(|e| semantic(line, head_col, rule_name(&e), e.to_string()))?;
                    b.filters.push((f, line));
                }
                "end" => {
                    cur.finish()?;
                    let b = block.take().unwrap_or_default();
                    let source = b
                        .source
                        .ok_or_else(|| syntax(line, head_col, format!("setup '{}' has no source", b.name)))?;
                    let detector = b
                        .detector
                        .ok_or_else(|| syntax(line, head_col, format!("setup '{}' has no detector", b.name)))?;
                    let mut filters: Vec<(Filter, usize)> = b.filters;
                    filters.sort_by_key(|(f, _)| f.time());
                    let setup = Setup::new(source, filters.into_iter().map(|(f, _)| f).collect(), detector)
                        .map_err(|e| semantic(b.start_line, 1, rule_name(&e), format!("setup '{}': {e}", b.name)))?;
                    setups.insert(b.name.clone(), setup);
                    last = Some(b.name);
                }
                other => {
                    return Err(syntax(
                        line,
                        head_col,
                        format!("unexpected '{other}' inside setup '{}'", b.name),
                    ));
                }
            }
            continue;
        }

        match head {
            "setup" => {
                let (name, col) = cur.word("setup name")?;
                cur.finish()?;
                check_new_name(name, col, line, &setups)?;
                block = Some(Block {
                    name: name.to_string(),
                    start_line: line,
                    ..Block::default()
                });
            }
            "result" => {
                let (name, col) = cur.word("setup name")?;
                cur.finish()?;
                result = Some((name.to_string(), line, col));
            }
            name if !KEYWORDS.contains(&name) => {
                check_new_name(name, head_col, line, &setups)?;
                cur.expect(Tok::Equals, "'='")?;
                let (first, col) = cur.word("setup name")?;
                let mut op: Option<&str> = None;
                let mut operands = Vec::new();
                while cur.pos < toks.len() {
                    let (w, op_col) = cur.word("'and' or 'or'")?;
                    if w != "and" && w != "or" {
                        return Err(syntax(line, op_col, "expected 'and' or 'or'"));
                    }
                    if op.is_some_and(|o| o != w) {
                        return Err(syntax(line, op_col, "cannot mix 'and' and 'or' on one line"));
                    }
                    op = Some(w);
                    let (rhs, rhs_col) = cur.word("setup name")?;
                    operands.push((op_col, rhs, rhs_col));
                }
                let mut acc = lookup(&setups, first, line, col)?.clone();
                for (op_col, rhs_name, rhs_col) in operands {
                    let rhs = lookup(&setups, rhs_name, line, rhs_col)?;
                    let w = op.unwrap_or("and");
                    let composed = if w == "and" {
                        and_compose(&acc, rhs)
                    } else {
                        or_compose(&acc, rhs)
                    };
                    acc = composed.map_err(|e| semantic(line, op_col, rule_name(&e), format!("{w}: {e}")))?;
                }
                setups.insert(name.to_string(), acc);
                last = Some(name.to_string());
            }
            other => return Err(syntax(line, head_col, format!("unexpected '{other}'"))),
        }
    }

    if !seen_header {
        return Err(syntax(1, 1, format!("empty document, expected '{HEADER} {VERSION}'")));
    }
    if let Some(b) = block {
        return Err(syntax(b.start_line, 1, format!("setup '{}' is missing 'end'", b.name)));
    }
    let result = match result {
        Some((name, line, col)) => {
            lookup(&setups, &name, line, col)?;
            name
        }
        None => last.ok_or_else(|| syntax(1, 1, "document defines no setups"))?,
    };
    Ok(SetupDocument { setups, result })
}

fn check_new_name(name: &str, col: usize, line: usize, setups: &BTreeMap<String, Setup>) -> Result<(), ParseError> {
    if KEYWORDS.contains(&name) {
        return Err(syntax(line, col, format!("'{name}' is a keyword")));
    }
    if setups.contains_key(name) {
        return Err(syntax(line, col, format!("setup '{name}' is already defined")));
    }
    Ok(())
}

fn lookup<'a>(
    setups: &'a BTreeMap<String, Setup>,
    name: &str,
    line: usize,
    col: usize,
) -> Result<&'a Setup, ParseError> {
    setups
        .get(name)
        .ok_or_else(|| syntax(line, col, format!("unknown setup '{name}'")))
}

/// The selected setup of a document.
pub fn parse_setup(text: &str) -> Result<Setup, ParseError> {
    let doc = parse_document(text)?;
    Ok(doc.result_setup().clone())
}

/// Single-block document describing `setup`.
pub fn serialize_setup(name: &str, setup: &Setup) -> String {
    let mut out = format!("{HEADER} {VERSION}\nsetup {name}\n");
    let s = setup.source();
    out.push_str(&format!("  source {} @ {}\n", s.site, s.time));
    for f in setup.filters() {
        let holes: Vec<String> = f.holes().iter().map(|h| h.to_string()).collect();
        out.push_str(&format!("  filter @ {} : {}\n", f.time(), holes.join(" ")));
    }
    let d = setup.detector();
    out.push_str(&format!("  detector {} @ {}\nend\nresult {name}\n", d.site, d.time));
    out
}
