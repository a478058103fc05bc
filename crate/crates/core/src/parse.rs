//! Surface-syntax parser.
//!
//! The grammar is keyword-based ASCII (normative EBNF in `docs/formats.md`):
//! comprehensions are written `for x in src yield set body` (or `yield bag`),
//! conditionals `where set c do b`, unions `union` / `unionall`, coercions
//! `delta` / `iota`, empties `empty` / `emptybag` with an optional collection
//! type annotation, records `<l = e, ...>`, projections `e.l`, singletons
//! `{e}` and `{|e|}`. Comments run from `#` to end of line.
//!
//! Multi-generator comprehensions (`for x in s, y in t yield ...`) desugar to
//! nested single-binder comprehensions.

use std::fmt;

use thiserror::Error;

use crate::ast::{AtomType, Const, Term, Type};

/// Start position of a construct in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source spans mirroring the shape of the parsed term: `children` follows
/// `Term::children()` order, so a rewrite path indexes into this tree.
#[derive(Debug, Clone)]
pub struct SpanNode {
    pub span: Span,
    pub children: Vec<SpanNode>,
}

impl SpanNode {
    fn leaf(span: Span) -> SpanNode {
        SpanNode { span, children: vec![] }
    }

    /// Span of the node at a child-index path, if present.
    pub fn at(&self, path: &[usize]) -> Option<Span> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get(i)?;
        }
        Some(cur.span)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    For,
    In,
    Yield,
    Set,
    Bag,
    Where,
    Do,
    Union,
    UnionAll,
    Delta,
    Iota,
    Empty,
    EmptyBag,
    True,
    False,
    And,
    Or,
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBagBrace,
    RBagBrace,
    Lt,
    Gt,
    Ne,
    Eq,
    Comma,
    Dot,
    Colon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::For => "for",
            Tok::In => "in",
            Tok::Yield => "yield",
            Tok::Set => "set",
            Tok::Bag => "bag",
            Tok::Where => "where",
            Tok::Do => "do",
            Tok::Union => "union",
            Tok::UnionAll => "unionall",
            Tok::Delta => "delta",
            Tok::Iota => "iota",
            Tok::Empty => "empty",
            Tok::EmptyBag => "emptybag",
            Tok::True => "true",
            Tok::False => "false",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBagBrace => "{|",
            Tok::RBagBrace => "|}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Ne => "<>",
            Tok::Eq => "=",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            _ => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '(' => {
                bump!();
                out.push((Tok::LParen, span));
            }
            ')' => {
                bump!();
                out.push((Tok::RParen, span));
            }
            '{' => {
                bump!();
                if chars.peek() == Some(&'|') {
                    bump!();
                    out.push((Tok::LBagBrace, span));
                } else {
                    out.push((Tok::LBrace, span));
                }
            }
            '}' => {
                bump!();
                out.push((Tok::RBrace, span));
            }
            '|' => {
                bump!();
                if chars.peek() == Some(&'}') {
                    bump!();
                    out.push((Tok::RBagBrace, span));
                } else {
                    return Err(ParseError {
                        line: span.line,
                        col: span.col,
                        expected: vec!["`|}`".into()],
                        found: "`|`".into(),
                    });
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    out.push((Tok::Ne, span));
                } else {
                    out.push((Tok::Lt, span));
                }
            }
            '>' => {
                bump!();
                out.push((Tok::Gt, span));
            }
            '=' => {
                bump!();
                out.push((Tok::Eq, span));
            }
            ',' => {
                bump!();
                out.push((Tok::Comma, span));
            }
            '.' => {
                bump!();
                out.push((Tok::Dot, span));
            }
            ':' => {
                bump!();
                out.push((Tok::Colon, span));
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        None => {
                            return Err(ParseError {
                                line,
                                col,
                                expected: vec!["closing `\"`".into()],
                                found: "end of input".into(),
                            })
                        }
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\\') => {
                            bump!();
                            let esc = match chars.peek() {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('\\') => '\\',
                                Some('"') => '"',
                                other => {
                                    return Err(ParseError {
                                        line,
                                        col,
                                        expected: vec!["escape character".into()],
                                        found: other
                                            .map(|c| format!("`{c}`"))
                                            .unwrap_or_else(|| "end of input".into()),
                                    })
                                }
                            };
                            bump!();
                            s.push(esc);
                        }
                        Some(_) => s.push(bump!()),
                    }
                }
                out.push((Tok::Str(s), span));
            }
            '-' => {
                bump!();
                if !matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
                    return Err(ParseError {
                        line: span.line,
                        col: span.col,
                        expected: vec!["digit after `-`".into()],
                        found: chars
                            .peek()
                            .map(|c| format!("`{c}`"))
                            .unwrap_or_else(|| "end of input".into()),
                    });
                }
                let mut n = String::from("-");
                while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
                    n.push(bump!());
                }
                out.push((Tok::Int(n.parse().unwrap()), span));
            }
            c if c.is_ascii_digit() => {
                let mut n = String::new();
                while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
                    n.push(bump!());
                }
                out.push((Tok::Int(n.parse().unwrap()), span));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while matches!(chars.peek(), Some(c) if c.is_ascii_alphanumeric() || *c == '_') {
                    s.push(bump!());
                }
                let tok = match s.as_str() {
                    "for" => Tok::For,
                    "in" => Tok::In,
                    "yield" => Tok::Yield,
                    "set" => Tok::Set,
                    "bag" => Tok::Bag,
                    "where" => Tok::Where,
                    "do" => Tok::Do,
                    "union" => Tok::Union,
                    "unionall" => Tok::UnionAll,
                    "delta" => Tok::Delta,
                    "iota" => Tok::Iota,
                    "empty" => Tok::Empty,
                    "emptybag" => Tok::EmptyBag,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    _ => Tok::Ident(s),
                };
                out.push((tok, span));
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    expected: vec!["token".into()],
                    found: format!("`{other}`"),
                })
            }
        }
    }
    out.push((
        Tok::Eof,
        Span { line, col },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

type PTerm = (Term, SpanNode);

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        let sp = self.span();
        ParseError {
            line: sp.line,
            col: sp.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            let sp = self.span();
            self.next();
            Ok(sp)
        } else {
            Err(self.err(&[&format!("`{}`", tok.text())]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok((s, sp))
            }
            _ => Err(self.err(&[what])),
        }
    }

    fn term(&mut self) -> Result<PTerm, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<PTerm, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Or {
            let sp = self.span();
            self.next();
            let rhs = self.and_expr()?;
            lhs = (
                Term::or(lhs.0, rhs.0),
                SpanNode { span: sp, children: vec![lhs.1, rhs.1] },
            );
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<PTerm, ParseError> {
        let mut lhs = self.not_expr()?;
        while *self.peek() == Tok::And {
            let sp = self.span();
            self.next();
            let rhs = self.not_expr()?;
            lhs = (
                Term::and(lhs.0, rhs.0),
                SpanNode { span: sp, children: vec![lhs.1, rhs.1] },
            );
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<PTerm, ParseError> {
        if *self.peek() == Tok::Not {
            let sp = self.span();
            self.next();
            let inner = self.not_expr()?;
            return Ok((
                Term::not(inner.0),
                SpanNode { span: sp, children: vec![inner.1] },
            ));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<PTerm, ParseError> {
        let lhs = self.union_expr()?;
        let op = match self.peek() {
            Tok::Eq => Const::Eq,
            Tok::Ne => Const::Ne,
            Tok::Lt => Const::Lt,
            _ => return Ok(lhs),
        };
        let sp = self.span();
        self.next();
        let rhs = self.union_expr()?;
        Ok((
            Term::Const(op, vec![lhs.0, rhs.0]),
            SpanNode { span: sp, children: vec![lhs.1, rhs.1] },
        ))
    }

    fn union_expr(&mut self) -> Result<PTerm, ParseError> {
        let mut lhs = self.prefix_expr()?;
        loop {
            let bag = match self.peek() {
                Tok::Union => false,
                Tok::UnionAll => true,
                _ => return Ok(lhs),
            };
            let sp = self.span();
            self.next();
            let rhs = self.prefix_expr()?;
            let t = if bag {
                Term::bag_union(lhs.0, rhs.0)
            } else {
                Term::union(lhs.0, rhs.0)
            };
            lhs = (t, SpanNode { span: sp, children: vec![lhs.1, rhs.1] });
        }
    }

    fn prefix_expr(&mut self) -> Result<PTerm, ParseError> {
        match self.peek() {
            Tok::Delta | Tok::Iota => {
                let is_delta = *self.peek() == Tok::Delta;
                let sp = self.span();
                self.next();
                let inner = self.prefix_expr()?;
                let t = if is_delta {
                    Term::dedup(inner.0)
                } else {
                    Term::promote(inner.0)
                };
                Ok((t, SpanNode { span: sp, children: vec![inner.1] }))
            }
            _ => self.postfix_expr(),
        }
    }

    fn postfix_expr(&mut self) -> Result<PTerm, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Dot {
            let sp = self.span();
            self.next();
            let (label, _) = self.ident("field label")?;
            base = (
                Term::Project(Box::new(base.0), label),
                SpanNode { span: sp, children: vec![base.1] },
            );
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<PTerm, ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok((Term::int(n), SpanNode::leaf(sp)))
            }
            Tok::Str(s) => {
                self.next();
                Ok((Term::str(&s), SpanNode::leaf(sp)))
            }
            Tok::True => {
                self.next();
                Ok((Term::bool(true), SpanNode::leaf(sp)))
            }
            Tok::False => {
                self.next();
                Ok((Term::bool(false), SpanNode::leaf(sp)))
            }
            Tok::Ident(x) => {
                self.next();
                Ok((Term::Var(x), SpanNode::leaf(sp)))
            }
            Tok::LParen => {
                self.next();
                let inner = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::LBrace => {
                self.next();
                let inner = self.term()?;
                self.expect(Tok::RBrace)?;
                Ok((
                    Term::singleton_set(inner.0),
                    SpanNode { span: sp, children: vec![inner.1] },
                ))
            }
            Tok::LBagBrace => {
                self.next();
                let inner = self.term()?;
                self.expect(Tok::RBagBrace)?;
                Ok((
                    Term::singleton_bag(inner.0),
                    SpanNode { span: sp, children: vec![inner.1] },
                ))
            }
            Tok::Lt => self.record_literal(),
            // `<>` in value position is the empty record literal
            Tok::Ne => {
                self.next();
                Ok((Term::Record(vec![]), SpanNode::leaf(sp)))
            }
            Tok::Empty | Tok::EmptyBag => {
                let is_set = *self.peek() == Tok::Empty;
                self.next();
                let ann = if *self.peek() == Tok::Colon {
                    self.next();
                    let ty_span = self.span();
                    let ty = self.type_expr()?;
                    // the annotation is the collection type; store its element
                    let elem = match (&ty, is_set) {
                        (Type::SetOf(e), true) | (Type::BagOf(e), false) => (**e).clone(),
                        _ => {
                            return Err(ParseError {
                                line: ty_span.line,
                                col: ty_span.col,
                                expected: vec![if is_set {
                                    "set type annotation".into()
                                } else {
                                    "bag type annotation".into()
                                }],
                                found: format!("`{ty}`"),
                            })
                        }
                    };
                    Some(elem)
                } else {
                    None
                };
                let t = if is_set {
                    Term::EmptySet(ann)
                } else {
                    Term::EmptyBag(ann)
                };
                Ok((t, SpanNode::leaf(sp)))
            }
            Tok::For => self.comprehension(),
            Tok::Where => self.where_expr(),
            _ => Err(self.err(&["expression"])),
        }
    }

    fn record_literal(&mut self) -> Result<PTerm, ParseError> {
        let sp = self.expect(Tok::Lt)?;
        let mut fields = Vec::new();
        let mut spans = Vec::new();
        if *self.peek() != Tok::Gt {
            loop {
                let (label, lsp) = self.ident("field label")?;
                if fields.iter().any(|(l, _)| *l == label) {
                    return Err(ParseError {
                        line: lsp.line,
                        col: lsp.col,
                        expected: vec!["distinct field label".into()],
                        found: format!("duplicate `{label}`"),
                    });
                }
                self.expect(Tok::Eq)?;
                let value = self.term()?;
                fields.push((label, value.0));
                spans.push(value.1);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Gt)?;
        Ok((Term::Record(fields), SpanNode { span: sp, children: spans }))
    }

    fn comprehension(&mut self) -> Result<PTerm, ParseError> {
        let sp = self.expect(Tok::For)?;
        let mut gens = Vec::new();
        loop {
            let (var, vsp) = self.ident("binder")?;
            self.expect(Tok::In)?;
            let source = self.term()?;
            gens.push((var, vsp, source));
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Yield)?;
        let is_set = match self.peek() {
            Tok::Set => true,
            Tok::Bag => false,
            _ => return Err(self.err(&["`set`", "`bag`"])),
        };
        self.next();
        let body = self.term()?;

        // desugar multiple generators into nested comprehensions,
        // innermost generator closest to the body
        let (mut term, mut node) = (body.0, body.1);
        for (i, (var, vsp, (src, src_node))) in gens.into_iter().enumerate().rev() {
            let comp_span = if i == 0 { sp } else { vsp };
            term = if is_set {
                Term::set_comp(term, &var, src)
            } else {
                Term::bag_comp(term, &var, src)
            };
            node = SpanNode { span: comp_span, children: vec![src_node, node] };
        }
        Ok((term, node))
    }

    fn where_expr(&mut self) -> Result<PTerm, ParseError> {
        let sp = self.expect(Tok::Where)?;
        let is_set = match self.peek() {
            Tok::Set => true,
            Tok::Bag => false,
            _ => return Err(self.err(&["`set`", "`bag`"])),
        };
        self.next();
        let cond = self.term()?;
        self.expect(Tok::Do)?;
        let body = self.term()?;
        let t = if is_set {
            Term::where_set(cond.0, body.0)
        } else {
            Term::where_bag(cond.0, body.0)
        };
        Ok((t, SpanNode { span: sp, children: vec![cond.1, body.1] }))
    }

    fn type_expr(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let atom = match name.as_str() {
                    "Bool" => AtomType::Bool,
                    "Int" => AtomType::Int,
                    "String" => AtomType::String,
                    _ => return Err(self.err(&["`Bool`", "`Int`", "`String`"])),
                };
                self.next();
                Ok(Type::Atom(atom))
            }
            Tok::Lt => {
                self.next();
                let mut fields = Vec::new();
                if *self.peek() != Tok::Gt {
                    loop {
                        let (label, lsp) = self.ident("field label")?;
                        if fields.iter().any(|(l, _): &(String, Type)| *l == label) {
                            return Err(ParseError {
                                line: lsp.line,
                                col: lsp.col,
                                expected: vec!["distinct field label".into()],
                                found: format!("duplicate `{label}`"),
                            });
                        }
                        self.expect(Tok::Colon)?;
                        let ty = self.type_expr()?;
                        fields.push((label, ty));
                        if *self.peek() == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::Gt)?;
                Ok(Type::Record(fields))
            }
            Tok::Ne => {
                self.next();
                Ok(Type::Record(vec![]))
            }
            Tok::LBrace => {
                self.next();
                let inner = self.type_expr()?;
                self.expect(Tok::RBrace)?;
                Ok(Type::set_of(inner))
            }
            Tok::LBagBrace => {
                self.next();
                let inner = self.type_expr()?;
                self.expect(Tok::RBagBrace)?;
                Ok(Type::bag_of(inner))
            }
            _ => Err(self.err(&["type"])),
        }
    }
}

/// Parse a term, keeping source spans for diagnostics.
pub fn parse_term_with_spans(text: &str) -> Result<(Term, SpanNode), ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let out = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(&["end of input"]));
    }
    Ok(out)
}

/// Parse a term from surface syntax.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_term_with_spans(text).map(|(t, _)| t)
}

/// Parse a type written in the annotation syntax.
pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let ty = p.type_expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(&["end of input"]));
    }
    Ok(ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Term;

    #[test]
    fn comprehension_over_union() {
        let t = parse_term("for x in T union U yield set {x}").unwrap();
        let expected = Term::set_comp(
            Term::singleton_set(Term::var("x")),
            "x",
            Term::union(Term::var("T"), Term::var("U")),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn annotated_empty_under_iota() {
        let t = parse_term("iota (empty : {<Id: Int>})").unwrap();
        let ann = Type::record(vec![("Id", Type::Atom(AtomType::Int))]);
        assert_eq!(t, Term::promote(Term::EmptySet(Some(ann))));
    }

    #[test]
    fn multi_generator_desugars() {
        let t = parse_term("for x in T, y in U yield bag {|<a = x.a, b = y.b>|}").unwrap();
        let expected = Term::bag_comp(
            Term::bag_comp(
                Term::singleton_bag(Term::record(vec![
                    ("a", Term::project(Term::var("x"), "a")),
                    ("b", Term::project(Term::var("y"), "b")),
                ])),
                "y",
                Term::var("U"),
            ),
            "x",
            Term::var("T"),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn where_and_comparison_precedence() {
        let t = parse_term("where bag x.A = y.A and b do {|x|}").unwrap();
        let expected = Term::where_bag(
            Term::and(
                Term::eq(
                    Term::project(Term::var("x"), "A"),
                    Term::project(Term::var("y"), "A"),
                ),
                Term::var("b"),
            ),
            Term::singleton_bag(Term::var("x")),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn empty_record_literal() {
        assert_eq!(parse_term("{<>}").unwrap(), Term::singleton_set(Term::Record(vec![])));
    }

    #[test]
    fn error_has_position_and_expectation() {
        let err = parse_term("for x T").unwrap_err();
        assert_eq!((err.line, err.col), (1, 7));
        assert!(err.expected.iter().any(|e| e.contains("in")));
    }

    #[test]
    fn spans_follow_children() {
        let (_, spans) = parse_term_with_spans("for x in T yield set {x}").unwrap();
        // child 0 is the source, child 1 the body
        assert_eq!(spans.at(&[0]).unwrap().col, 10);
        assert_eq!(spans.at(&[1]).unwrap().col, 22);
    }

    #[test]
    fn rejects_duplicate_record_labels() {
        assert!(parse_term("<a = 1, a = 2>").is_err());
    }
}
