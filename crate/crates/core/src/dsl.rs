//! Textual machine format.
//!
//! ```text
//! file    := machine+
//! machine := "machine" IDENT "{" "start" IDENT ";" stmt* "}"
//! stmt    := IDENT ":" body ";"
//! body    := "s" "->" IDENT
//!          | "t" D012 "->" IDENT "," IDENT     # 0-successor, 1-successor
//!          | ("l"|"r") D012 "->" IDENT
//!          | "w" D123 "=" BIT "->" IDENT
//!          | "accept" | "reject"
//!          | "?" "cont" "=" IDENT "query" "=" IDENT
//! ```
//!
//! `#` starts a comment running to the end of the line. A comment of the
//! exact shape `# layer: N` directly after a statement records a query
//! layer tag for that statement's vertex; all other comments are skipped.
//! The keyword `reject` stands in for the sink label `r`, which would
//! collide with the head-move mnemonics `r0`..`r2`.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::machine::{Label, MachineGraph, ReadTape, ValidationError, WriteTape};

/// 1-based source position attached to every syntax diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at {}:{}: {message}", span.line, span.column)]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    Equals,
    Question,
    Arrow,
    LayerTag(u32),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Number(s) => format!("number {s:?}"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Equals => "'='".into(),
            Tok::Question => "'?'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::LayerTag(n) => format!("layer tag {n}"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, SourceSpan)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let span = SourceSpan {
                line: self.line,
                column: self.column,
            };
            let Some(&c) = self.chars.peek() else {
                return Ok(out);
            };
            match c {
                '#' => {
                    let mut comment = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        comment.push(c);
                        self.bump();
                    }
                    let body = comment.trim_start_matches('#').trim();
                    if let Some(rest) = body.strip_prefix("layer:") {
                        if let Ok(n) = rest.trim().parse::<u32>() {
                            out.push((Tok::LayerTag(n), span));
                        }
                    }
                }
                '{' => {
                    self.bump();
                    out.push((Tok::LBrace, span));
                }
                '}' => {
                    self.bump();
                    out.push((Tok::RBrace, span));
                }
                ':' => {
                    self.bump();
                    out.push((Tok::Colon, span));
                }
                ';' => {
                    self.bump();
                    out.push((Tok::Semi, span));
                }
                ',' => {
                    self.bump();
                    out.push((Tok::Comma, span));
                }
                '=' => {
                    self.bump();
                    out.push((Tok::Equals, span));
                }
                '?' => {
                    self.bump();
                    out.push((Tok::Question, span));
                }
                '-' => {
                    self.bump();
                    if self.chars.peek() == Some(&'>') {
                        self.bump();
                        out.push((Tok::Arrow, span));
                    } else {
                        return Err(SyntaxError {
                            span,
                            message: "expected '->'".into(),
                        });
                    }
                }
                c if c.is_ascii_digit() => {
                    let mut num = String::new();
                    while matches!(self.chars.peek(), Some(c) if c.is_ascii_digit()) {
                        num.push(self.bump().unwrap());
                    }
                    out.push((Tok::Number(num), span));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut ident = String::new();
                    while matches!(self.chars.peek(), Some(c)
                        if c.is_ascii_alphanumeric() || *c == '_')
                    {
                        ident.push(self.bump().unwrap());
                    }
                    out.push((Tok::Ident(ident), span));
                }
                other => {
                    return Err(SyntaxError {
                        span,
                        message: format!("unexpected character {other:?}"),
                    });
                }
            }
        }
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, SourceSpan)> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, s)| *s)
            .unwrap_or(SourceSpan { line: 1, column: 1 })
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            span: self.here(),
            message: message.into(),
        })
    }

    fn next(&mut self, what: &str) -> Result<(Tok, SourceSpan), SyntaxError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.fail(format!("expected {what}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, SyntaxError> {
        let (t, span) = self.next(&tok.describe())?;
        if t == tok {
            Ok(span)
        } else {
            Err(SyntaxError {
                span,
                message: format!("expected {}, found {}", tok.describe(), t.describe()),
            })
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), SyntaxError> {
        let (t, span) = self.next(what)?;
        match t {
            Tok::Ident(s) => Ok((s, span)),
            other => Err(SyntaxError {
                span,
                message: format!("expected {what}, found {}", other.describe()),
            }),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), SyntaxError> {
        let (got, span) = self.ident(&format!("keyword '{word}'"))?;
        if got == word {
            Ok(())
        } else {
            Err(SyntaxError {
                span,
                message: format!("expected keyword '{word}', found {got:?}"),
            })
        }
    }

    fn bit(&mut self) -> Result<bool, SyntaxError> {
        let (t, span) = self.next("bit 0 or 1")?;
        match t {
            Tok::Number(n) if n == "0" => Ok(false),
            Tok::Number(n) if n == "1" => Ok(true),
            other => Err(SyntaxError {
                span,
                message: format!("expected bit 0 or 1, found {}", other.describe()),
            }),
        }
    }

    fn machine(&mut self) -> Result<MachineGraph, SyntaxError> {
        self.keyword("machine")?;
        let (name, _) = self.ident("machine name")?;
        self.expect(Tok::LBrace)?;
        self.keyword("start")?;
        let (start, _) = self.ident("start vertex name")?;
        self.expect(Tok::Semi)?;

        let mut graph = MachineGraph::new(name, start);
        let mut tags = std::collections::BTreeMap::new();
        loop {
            match self.peek() {
                Some((Tok::RBrace, _)) => {
                    self.pos += 1;
                    break;
                }
                Some((Tok::Ident(_), _)) => {
                    let (vertex, vspan) = self.ident("vertex name")?;
                    if graph.vertex(&vertex).is_some() {
                        return Err(SyntaxError {
                            span: vspan,
                            message: format!("duplicate vertex definition {vertex:?}"),
                        });
                    }
                    self.expect(Tok::Colon)?;
                    let (label, successors) = self.body()?;
                    self.expect(Tok::Semi)?;
                    if let Some((Tok::LayerTag(n), _)) = self.peek() {
                        tags.insert(vertex.clone(), *n);
                        self.pos += 1;
                    }
                    graph.add_vertex(vertex, label, successors);
                }
                Some((other, span)) => {
                    return Err(SyntaxError {
                        span: *span,
                        message: format!("expected statement or '}}', found {}", other.describe()),
                    });
                }
                None => return self.fail("expected statement or '}', found end of input"),
            }
        }
        if !tags.is_empty() {
            graph.set_layer_tags(tags);
        }
        Ok(graph)
    }

    fn body(&mut self) -> Result<(Label, Vec<String>), SyntaxError> {
        let (tok, span) = self.next("statement body")?;
        let bad = |span, msg: String| Err(SyntaxError { span, message: msg });
        match tok {
            Tok::Question => {
                self.keyword("cont")?;
                self.expect(Tok::Equals)?;
                let (cont, _) = self.ident("continuation vertex")?;
                self.keyword("query")?;
                self.expect(Tok::Equals)?;
                let (query, _) = self.ident("query vertex")?;
                Ok((Label::Query, vec![cont, query]))
            }
            Tok::Ident(word) => match word.as_str() {
                "accept" => Ok((Label::Accept, vec![])),
                "reject" => Ok((Label::Reject, vec![])),
                "s" => {
                    self.expect(Tok::Arrow)?;
                    let (succ, _) = self.ident("successor")?;
                    Ok((Label::Start, vec![succ]))
                }
                w => {
                    let mut chars = w.chars();
                    let kind = chars.next().unwrap();
                    let digits: String = chars.collect();
                    let tape: Option<usize> =
                        if digits.len() == 1 { digits.parse().ok() } else { None };
                    match (kind, tape) {
                        ('t', Some(i)) if ReadTape::from_index(i).is_some() => {
                            let t = ReadTape::from_index(i).unwrap();
                            self.expect(Tok::Arrow)?;
                            let (s0, _) = self.ident("0-successor")?;
                            self.expect(Tok::Comma)?;
                            let (s1, _) = self.ident("1-successor")?;
                            Ok((Label::Branch(t), vec![s0, s1]))
                        }
                        ('l', Some(i)) if ReadTape::from_index(i).is_some() => {
                            let t = ReadTape::from_index(i).unwrap();
                            self.expect(Tok::Arrow)?;
                            let (succ, _) = self.ident("successor")?;
                            Ok((Label::MoveLeft(t), vec![succ]))
                        }
                        ('r', Some(i)) if ReadTape::from_index(i).is_some() => {
                            let t = ReadTape::from_index(i).unwrap();
                            self.expect(Tok::Arrow)?;
                            let (succ, _) = self.ident("successor")?;
                            Ok((Label::MoveRight(t), vec![succ]))
                        }
                        ('w', Some(i)) if WriteTape::from_index(i).is_some() => {
                            let t = WriteTape::from_index(i).unwrap();
                            self.expect(Tok::Equals)?;
                            let b = self.bit()?;
                            self.expect(Tok::Arrow)?;
                            let (succ, _) = self.ident("successor")?;
                            Ok((Label::Write(t, b), vec![succ]))
                        }
                        _ => bad(span, format!("unknown statement body {word:?}")),
                    }
                }
            },
            other => bad(span, format!("expected statement body, found {}", other.describe())),
        }
    }

    fn file(&mut self) -> Result<Vec<MachineGraph>, SyntaxError> {
        let mut machines = Vec::new();
        while self.peek().is_some() {
            let span = self.here();
            let m = self.machine()?;
            if machines.iter().any(|g: &MachineGraph| g.name() == m.name()) {
                return Err(SyntaxError {
                    span,
                    message: format!("duplicate machine name {:?}", m.name()),
                });
            }
            machines.push(m);
        }
        if machines.is_empty() {
            return self.fail("expected at least one machine");
        }
        Ok(machines)
    }
}

/// Parses a source containing any number of machines; each is validated.
pub fn parse_file(text: &str) -> Result<Vec<MachineGraph>, DslError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut parser = Parser { toks, pos: 0 };
    let machines = parser.file()?;
    for m in &machines {
        m.validate()?;
    }
    Ok(machines)
}

/// Parses a source containing exactly one machine and validates it.
pub fn parse_machine(text: &str) -> Result<MachineGraph, DslError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut parser = Parser { toks, pos: 0 };
    let machines = parser.file()?;
    if machines.len() != 1 {
        return Err(DslError::Syntax(SyntaxError {
            span: SourceSpan { line: 1, column: 1 },
            message: format!("expected exactly one machine, found {}", machines.len()),
        }));
    }
    let m = machines.into_iter().next().unwrap();
    m.validate()?;
    Ok(m)
}

/// Prints a machine in the statement order start-first, remaining
/// vertices alphabetically. Layer tags are emitted as `# layer: N`
/// comments, which the parser reads back.
pub fn print_machine(m: &MachineGraph) -> Result<String, ValidationError> {
    m.validate()?;
    let mut out = String::new();
    writeln!(out, "machine {} {{", m.name()).unwrap();
    writeln!(out, "  start {};", m.start()).unwrap();
    let mut order: Vec<&str> = vec![m.start()];
    order.extend(m.vertices().keys().map(|s| s.as_str()).filter(|v| *v != m.start()));
    for name in order {
        let v = m.vertex(name).unwrap();
        let body = match v.label {
            Label::Start => format!("s -> {}", v.successors[0]),
            Label::Branch(t) => {
                format!("t{} -> {}, {}", t.index(), v.successors[0], v.successors[1])
            }
            Label::MoveLeft(t) => format!("l{} -> {}", t.index(), v.successors[0]),
            Label::MoveRight(t) => format!("r{} -> {}", t.index(), v.successors[0]),
            Label::Write(t, b) => {
                format!("w{}={} -> {}", t.index(), b as u8, v.successors[0])
            }
            Label::Accept => "accept".into(),
            Label::Reject => "reject".into(),
            Label::Query => format!(
                "? cont={} query={}",
                v.successors[0], v.successors[1]
            ),
        };
        write!(out, "  {name}: {body};").unwrap();
        if let Some(tag) = m.layer_tags().and_then(|t| t.get(name)) {
            write!(out, " # layer: {tag}").unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(out, "}}").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run, RunStatus, ValidationErrorKind};
    use crate::seq::EvSeq;

    const COPY_SRC: &str = "machine id { start s0; s0: s -> c; c: t0 -> z, o; \
         z: w3=0 -> h; o: w3=1 -> h2; h: r0 -> c; h2: r0 -> c; }";

    #[test]
    fn parses_copy_machine_and_it_copies() {
        let m = parse_machine(COPY_SRC).unwrap();
        assert_eq!(m.vertex_count(), 6);
        for text in [":0", "1101:0", "0101:1", ":1"] {
            let input: EvSeq = text.parse().unwrap();
            let r = run(&m, &input, 2000);
            assert_eq!(r.status, RunStatus::FuelExhausted);
            let k = r.output.available().unwrap();
            assert!(k >= 64);
            assert_eq!(r.output.first(64).unwrap(), input.first(64));
        }
    }

    #[test]
    fn duplicate_vertex_definition_is_a_syntax_error() {
        let err = parse_machine("machine bad { start s0; s0: s -> s0; s0: accept; }");
        match err {
            Err(DslError::Syntax(e)) => {
                assert!(e.message.contains("duplicate vertex"));
                // Points at the second `s0`, inside the offending token.
                assert_eq!(e.span, SourceSpan { line: 1, column: 38 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_start_labels_fail_validation() {
        let err = parse_machine("machine two_starts { start a; a: s -> b; b: s -> c; c: accept; }");
        match err {
            Err(DslError::Validation(e)) => {
                assert_eq!(e.kind, ValidationErrorKind::MultipleStart)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let m = parse_machine(COPY_SRC).unwrap();
        let printed = print_machine(&m).unwrap();
        let again = parse_machine(&printed).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn query_vertices_print_with_cont_and_query() {
        let src = "machine q { start s0; s0: s -> v; v: ? cont=c query=g; \
             c: accept; g: w3=1 -> ha; ha: accept; }";
        let m = parse_machine(src).unwrap();
        let printed = print_machine(&m).unwrap();
        assert!(printed.contains("? cont=c query=g"));
        assert_eq!(parse_machine(&printed).unwrap(), m);
    }

    #[test]
    fn empty_machine_fails_print_side_validation() {
        let m = MachineGraph::new("empty", "s0");
        let err = print_machine(&m).unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::NoStart);
    }

    #[test]
    fn layer_tags_survive_the_round_trip() {
        let src = "machine tagged { start s0;\n  s0: s -> a; # layer: 1\n  a: accept; # layer: 1\n}";
        let m = parse_machine(src).unwrap();
        let tags = m.layer_tags().unwrap();
        assert_eq!(tags.get("s0"), Some(&1));
        assert_eq!(tags.get("a"), Some(&1));
        let printed = print_machine(&m).unwrap();
        assert_eq!(parse_machine(&printed).unwrap(), m);
    }

    #[test]
    fn plain_comments_are_skipped() {
        let src = "# heading\nmachine c { start s0; # trailing\n s0: s -> a; a: accept; }";
        let m = parse_machine(src).unwrap();
        assert_eq!(m.vertex_count(), 2);
        assert!(m.layer_tags().is_none());
    }

    #[test]
    fn syntax_errors_carry_useful_spans() {
        let err = parse_machine("machine m {\n  start s0;\n  s0: q -> a;\n}");
        match err {
            Err(DslError::Syntax(e)) => {
                assert_eq!(e.span.line, 3);
                assert!(e.message.contains("unknown statement body"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_machine("").is_err());
        assert!(parse_machine("machine m { start s0; s0: w0=1 -> s0; }").is_err());
        assert!(parse_machine("machine m { start s0; s0: t3 -> a, b; }").is_err());
    }

    #[test]
    fn multi_machine_files_parse_in_order() {
        let src = format!(
            "{COPY_SRC}\nmachine halt {{ start s0; s0: s -> h; h: accept; }}"
        );
        let machines = parse_file(&src).unwrap();
        assert_eq!(machines.len(), 2);
        assert_eq!(machines[0].name(), "id");
        assert_eq!(machines[1].name(), "halt");
        let dup = format!("{COPY_SRC}\n{COPY_SRC}");
        assert!(matches!(parse_file(&dup), Err(DslError::Syntax(_))));
    }
}
