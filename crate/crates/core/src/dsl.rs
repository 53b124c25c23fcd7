//! The `.pmcs` text format.
//!
//! ```text
//! # comment
//! stratum {
//!   context c1 logic prop {
//!     kb { a. b. }
//!     br { r1: (1:c) <- (2:d), not (3:h). }
//!   }
//!   context c2 logic asp {
//!     atoms { extra }
//!     kb { d <- e, not -f. <- q, not p. }
//!     br { }
//!   }
//! }
//! ```
//!
//! Contexts are numbered 1, 2, ... in declaration order across all strata,
//! and a rule head must name its own context. Propositional formulas use
//! `~ & | ->` (tightest first, `->` right-associative); answer-set rules use
//! `-` for classical and `not` for default negation. The optional `atoms`
//! block extends the derived signature.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::logic::{AspProgram, AspRule, Formula, KnowledgeBase, Literal, LogicKind, PropKb};
use crate::mcs::{BodyRef, BridgeRule, Context, McsSystem};
use crate::pmcs::{validate_compatibility, PmcsSystem};
use crate::rule_id::RuleId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Lexical,
    Syntactic,
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Lexical => "lexical",
            ErrorKind::Syntactic => "syntax",
            ErrorKind::Semantic => "semantic",
        };
        write!(
            f,
            "{}:{}: {kind} error: {}",
            self.span.line, self.span.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Comma,
    Dot,
    LeftArrow,
    RightArrow,
    Tilde,
    Amp,
    Pipe,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LeftArrow => f.write_str("`<-`"),
            Tok::RightArrow => f.write_str("`->`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str, errors: &mut Vec<ParseError>) -> Vec<(Tok, SourceSpan)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&(start, c)) = chars.peek() {
        let span_at = |end: usize| SourceSpan {
            line,
            column: col,
            start,
            end,
        };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            let mut len = 0;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    end = i + c.len_utf8();
                    len += 1;
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(text[start..end].to_string()), span_at(end)));
            col += len;
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = start;
            let mut len = 0;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    end = i + 1;
                    len += 1;
                    chars.next();
                } else {
                    break;
                }
            }
            match text[start..end].parse() {
                Ok(n) => out.push((Tok::Int(n), span_at(end))),
                Err(_) => errors.push(ParseError {
                    span: span_at(end),
                    kind: ErrorKind::Lexical,
                    message: "integer too large".into(),
                }),
            }
            col += len;
            continue;
        }
        chars.next();
        let next = chars.peek().map(|&(_, c)| c);
        let (tok, width) = match (c, next) {
            ('<', Some('-')) => (Some(Tok::LeftArrow), 2),
            ('-', Some('>')) => (Some(Tok::RightArrow), 2),
            ('-', _) => (Some(Tok::Minus), 1),
            ('{', _) => (Some(Tok::LBrace), 1),
            ('}', _) => (Some(Tok::RBrace), 1),
            ('(', _) => (Some(Tok::LParen), 1),
            (')', _) => (Some(Tok::RParen), 1),
            (':', _) => (Some(Tok::Colon), 1),
            (',', _) => (Some(Tok::Comma), 1),
            ('.', _) => (Some(Tok::Dot), 1),
            ('~', _) => (Some(Tok::Tilde), 1),
            ('&', _) => (Some(Tok::Amp), 1),
            ('|', _) => (Some(Tok::Pipe), 1),
            _ => (None, 1),
        };
        if width == 2 {
            chars.next();
        }
        let end = start + if width == 2 { 2 } else { c.len_utf8() };
        match tok {
            Some(t) => out.push((t, span_at(end))),
            None => errors.push(ParseError {
                span: span_at(end),
                kind: ErrorKind::Lexical,
                message: format!("unexpected character `{c}`"),
            }),
        }
        col += width;
    }
    out.push((
        Tok::Eof,
        SourceSpan {
            line,
            column: col,
            start: text.len(),
            end: text.len(),
        },
    ));
    out
}

struct RawRule {
    rule: BridgeRule,
    head_span: SourceSpan,
    span: SourceSpan,
    refs: Vec<(usize, SourceSpan)>,
}

struct RawContext {
    name: String,
    name_span: SourceSpan,
    kb: KnowledgeBase,
    atoms: Vec<String>,
    rules: Vec<RawRule>,
}

/// Marker for a syntax error already recorded.
struct Recover;

type PResult<T> = std::result::Result<T, Recover>;

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, message: String) -> Recover {
        let span = self.span();
        self.errors.push(ParseError {
            span,
            kind: ErrorKind::Syntactic,
            message,
        });
        Recover
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            let found = self.peek().clone();
            Err(self.error(format!("expected {tok}, found {found}")))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.bump().1)
        } else {
            let found = self.peek().clone();
            Err(self.error(format!("expected `{kw}`, found {found}")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            other => Err(self.error(format!("expected {what}, found {other}"))),
        }
    }

    fn int(&mut self) -> PResult<(usize, SourceSpan)> {
        match self.peek().clone() {
            Tok::Int(n) => {
                let span = self.bump().1;
                Ok((n, span))
            }
            other => Err(self.error(format!("expected a context index, found {other}"))),
        }
    }

    /// Skip past the next `.` at this nesting level, or stop before a `}`.
    fn sync_item(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Dot if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::RBrace if depth == 0 => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            self.bump();
        }
    }

    /// Skip to just after the `}` closing the current block.
    fn sync_block(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.bump().0 {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
        }
    }

    fn document(&mut self) -> Vec<Vec<RawContext>> {
        let mut strata = Vec::new();
        while *self.peek() != Tok::Eof {
            if self.is_keyword("stratum") {
                self.bump();
                if self.expect(Tok::LBrace).is_err() {
                    self.sync_block();
                    continue;
                }
                let start = self.span();
                let mut contexts = Vec::new();
                while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    if let Some(c) = self.context() {
                        contexts.push(c);
                    }
                }
                if self.expect(Tok::RBrace).is_err() {
                    break;
                }
                if contexts.is_empty() {
                    self.errors.push(ParseError {
                        span: start,
                        kind: ErrorKind::Syntactic,
                        message: "a stratum needs at least one context".into(),
                    });
                }
                strata.push(contexts);
            } else {
                let found = self.peek().clone();
                self.error(format!("expected `stratum`, found {found}"));
                self.bump();
                self.sync_block();
            }
        }
        if strata.is_empty() && self.errors.is_empty() {
            self.error("a document needs at least one stratum".into());
        }
        strata
    }

    fn context(&mut self) -> Option<RawContext> {
        match self.context_inner() {
            Ok(c) => Some(c),
            Err(Recover) => {
                // resume at the next context or the end of the stratum
                while !(self.is_keyword("context") || matches!(self.peek(), Tok::Eof)) {
                    if *self.peek() == Tok::RBrace {
                        // a `}` directly followed by `}`/`context`/EOF ends the broken context
                        let after = &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0;
                        let closes = matches!(after, Tok::RBrace | Tok::Eof)
                            || matches!(after, Tok::Ident(s) if s == "context" || s == "stratum");
                        if closes {
                            self.bump();
                            break;
                        }
                    }
                    self.bump();
                }
                None
            }
        }
    }

    fn context_inner(&mut self) -> PResult<RawContext> {
        self.keyword("context")?;
        let (name, name_span) = self.ident("a context name")?;
        self.keyword("logic")?;
        let logic = match self.peek() {
            Tok::Ident(s) if s == "prop" => LogicKind::Prop,
            Tok::Ident(s) if s == "asp" => LogicKind::Asp,
            other => {
                let other = other.clone();
                return Err(self.error(format!("expected `prop` or `asp`, found {other}")));
            }
        };
        self.bump();
        self.expect(Tok::LBrace)?;
        let mut atoms = Vec::new();
        if self.is_keyword("atoms") {
            self.bump();
            self.expect(Tok::LBrace)?;
            while let Tok::Ident(_) = self.peek() {
                atoms.push(self.ident("an atom")?.0);
            }
            self.expect(Tok::RBrace)?;
        }
        self.keyword("kb")?;
        self.expect(Tok::LBrace)?;
        let kb = match logic {
            LogicKind::Prop => {
                let mut formulas = Vec::new();
                while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    match self
                        .formula()
                        .and_then(|f| self.expect(Tok::Dot).map(|_| f))
                    {
                        Ok(f) => formulas.push(f),
                        Err(Recover) => self.sync_item(),
                    }
                }
                KnowledgeBase::Prop(PropKb::new(formulas))
            }
            LogicKind::Asp => {
                let mut rules = Vec::new();
                while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    match self.asp_rule() {
                        Ok(r) => rules.push(r),
                        Err(Recover) => self.sync_item(),
                    }
                }
                KnowledgeBase::Asp(AspProgram::new(rules))
            }
        };
        self.expect(Tok::RBrace)?;
        self.keyword("br")?;
        self.expect(Tok::LBrace)?;
        let mut rules = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            match self.bridge_rule() {
                Ok(r) => rules.push(r),
                Err(Recover) => self.sync_item(),
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        Ok(RawContext {
            name,
            name_span,
            kb,
            atoms,
            rules,
        })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let negated = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (atom, _) = self.ident("an atom")?;
        Ok(Literal { atom, negated })
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::RightArrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            f = Formula::Or(Box::new(f), Box::new(self.conjunction()?));
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = Formula::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Tilde | Tok::Minus => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(a) => {
                self.bump();
                Ok(Formula::Atom(a))
            }
            other => Err(self.error(format!("expected a formula, found {other}"))),
        }
    }

    fn asp_rule(&mut self) -> PResult<AspRule> {
        let head = if *self.peek() == Tok::LeftArrow {
            None
        } else {
            Some(self.literal()?)
        };
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        if *self.peek() == Tok::LeftArrow {
            self.bump();
            loop {
                if self.is_keyword("not") {
                    self.bump();
                    neg.push(self.literal()?);
                } else {
                    pos.push(self.literal()?);
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        } else if head.is_none() {
            return Err(self.error("expected a rule".into()));
        }
        self.expect(Tok::Dot)?;
        Ok(AspRule { head, pos, neg })
    }

    fn body_ref(&mut self) -> PResult<(BodyRef, SourceSpan)> {
        let span = self.expect(Tok::LParen)?;
        let (k, _) = self.int()?;
        self.expect(Tok::Colon)?;
        let lit = self.literal()?;
        self.expect(Tok::RParen)?;
        Ok((BodyRef::new(k, lit), span))
    }

    fn bridge_rule(&mut self) -> PResult<RawRule> {
        let (id, span) = self.ident("a rule id")?;
        self.expect(Tok::Colon)?;
        let (head, head_span) = self.body_ref()?;
        self.expect(Tok::LeftArrow)?;
        let (mut pos, mut neg, mut refs) = (Vec::new(), Vec::new(), Vec::new());
        if *self.peek() != Tok::Dot {
            loop {
                let negated = if self.is_keyword("not") {
                    self.bump();
                    true
                } else {
                    false
                };
                let (r, s) = self.body_ref()?;
                refs.push((r.context, s));
                if negated {
                    neg.push(r);
                } else {
                    pos.push(r);
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::Dot)?;
        Ok(RawRule {
            rule: BridgeRule::new(id, head.context, head.literal, pos, neg),
            head_span,
            span,
            refs,
        })
    }
}

/// Parses and validates a document. On failure every error found is
/// returned, in source order.
pub fn parse(text: &str) -> Result<PmcsSystem, Vec<ParseError>> {
    let mut errors = Vec::new();
    let toks = lex(text, &mut errors);
    let mut p = Parser {
        toks,
        pos: 0,
        errors: Vec::new(),
    };
    let strata = p.document();
    errors.extend(p.errors);

    let contexts: Vec<&RawContext> = strata.iter().flatten().collect();
    let n = contexts.len();
    let semantic = |span, message| ParseError {
        span,
        kind: ErrorKind::Semantic,
        message,
    };
    let mut names: HashMap<&str, SourceSpan> = HashMap::new();
    let mut ids: HashMap<&RuleId, SourceSpan> = HashMap::new();
    let mut rule_spans: HashMap<RuleId, SourceSpan> = HashMap::new();
    for (i, c) in contexts.iter().enumerate() {
        if names.insert(&c.name, c.name_span).is_some() {
            errors.push(semantic(
                c.name_span,
                format!("duplicate context name `{}`", c.name),
            ));
        }
        for r in &c.rules {
            if r.rule.owner != i + 1 {
                errors.push(semantic(
                    r.head_span,
                    format!(
                        "head of rule {} names context {} but the rule belongs to context {} (`{}`)",
                        r.rule.id,
                        r.rule.owner,
                        i + 1,
                        c.name
                    ),
                ));
            }
            for &(k, span) in &r.refs {
                if k == 0 || k > n {
                    errors.push(semantic(
                        span,
                        format!(
                            "rule {} references context {k}, but there are {n} contexts",
                            r.rule.id
                        ),
                    ));
                }
            }
            if ids.insert(&r.rule.id, r.span).is_some() {
                errors.push(semantic(
                    r.span,
                    format!("duplicate rule id `{}`", r.rule.id),
                ));
            }
            rule_spans.insert(r.rule.id.clone(), r.span);
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span.start);
        return Err(errors);
    }

    let build: Vec<Context> = contexts
        .iter()
        .map(|c| {
            Context::new(
                c.name.clone(),
                c.kb.clone(),
                c.rules.iter().map(|r| r.rule.clone()).collect(),
            )
            .with_atoms(c.atoms.iter().cloned())
        })
        .collect();
    let base =
        McsSystem::new(build).map_err(|e| vec![semantic(SourceSpan::default(), e.to_string())])?;
    let mut next = 1;
    let partition: Vec<Vec<usize>> = strata
        .iter()
        .map(|s| {
            let block = (next..next + s.len()).collect();
            next += s.len();
            block
        })
        .collect();
    let violations = validate_compatibility(&base, &partition)
        .map_err(|e| vec![semantic(SourceSpan::default(), e.to_string())])?;
    if !violations.is_empty() {
        return Err(violations
            .into_iter()
            .map(|v| {
                let span = rule_spans.get(&v.rule).copied().unwrap_or_default();
                semantic(span, format!("compatibility violation: {v}"))
            })
            .collect());
    }
    PmcsSystem::new(base, partition)
        .map_err(|e| vec![semantic(SourceSpan::default(), e.to_string())])
}

/// Canonical text for a system; rules appear in id order.
pub fn serialize(p: &PmcsSystem) -> String {
    let mut out = String::new();
    let contexts = p.base().contexts();
    for (si, stratum) in p.strata().iter().enumerate() {
        if si > 0 {
            out.push('\n');
        }
        out.push_str("stratum {\n");
        for &k in stratum {
            let c = &contexts[k - 1];
            let _ = writeln!(out, "  context {} logic {} {{", c.name, c.logic());
            if !c.extra_atoms.is_empty() {
                let atoms: Vec<&str> = c.extra_atoms.iter().map(String::as_str).collect();
                let _ = writeln!(out, "    atoms {{ {} }}", atoms.join(" "));
            }
            let items: Vec<String> = match &c.kb {
                KnowledgeBase::Prop(kb) => kb.formulas.iter().map(|f| format!("{f}.")).collect(),
                KnowledgeBase::Asp(prog) => prog.rules.iter().map(|r| format!("{r}.")).collect(),
            };
            write_block(&mut out, "kb", &items);
            let mut rules: Vec<&BridgeRule> = c.rules.iter().collect();
            rules.sort_by(|a, b| a.id.cmp(&b.id));
            let rules: Vec<String> = rules.iter().map(|r| r.to_string()).collect();
            write_block(&mut out, "br", &rules);
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}

fn write_block(out: &mut String, name: &str, items: &[String]) {
    if items.is_empty() {
        let _ = writeln!(out, "    {name} {{ }}");
        return;
    }
    let _ = writeln!(out, "    {name} {{");
    for item in items {
        let _ = writeln!(out, "      {item}");
    }
    out.push_str("    }\n");
}
