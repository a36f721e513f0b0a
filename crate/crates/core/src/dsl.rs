//! Line-oriented text format for [`FsmSpec`].
//!
//! ```text
//! fsm <name>
//! inputs <name>...
//! outputs <name>...
//! pulses <name>...
//! initial <state>
//! reset <input>
//! state <Name> { <out>=<bit> ... }
//! trans <Src> -> <Dst> when <expr> [emit <pulse>...]
//! ```
//!
//! Guard expressions use `!` (tightest), `&`, `|` (loosest), parentheses and
//! the literals `0` and `1`. `#` starts a comment running to end of line.
//!
//! Parsing resolves names but does not check determinism; that is
//! [`crate::fsm::validate`]'s job.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::fsm::{FsmSpec, GuardExpr, StateDef, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line,
            column,
            length: length.max(1),
        }
    }

    /// True if both spans share at least one character.
    pub fn overlaps(&self, other: &SourceSpan) -> bool {
        self.line == other.line
            && self.column < other.column + other.length
            && other.column < self.column + self.length
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    UnknownSignal,
    DuplicateName,
    BadBit,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::UnknownSignal => "unknown-signal",
            ParseErrorKind::DuplicateName => "duplicate-name",
            ParseErrorKind::BadBit => "bad-bit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, kind: ParseErrorKind, message: impl Into<String>) -> Self {
        ParseError {
            span,
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.kind, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    Eq,
    Arrow,
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) => format!("`{}`", s),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_continue)
}

fn lex_line(line_no: usize, text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
            continue;
        } else if is_ident_start(c) {
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Number(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '=' => Tok::Eq,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '-' if chars.get(i) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                _ => {
                    return Err(ParseError::new(
                        SourceSpan::new(line_no, start + 1, 1),
                        ParseErrorKind::Syntax,
                        format!("unexpected character `{}`", c),
                    ))
                }
            }
        };
        tokens.push(Token {
            tok,
            span: SourceSpan::new(line_no, start + 1, i - start),
        });
    }
    Ok(tokens)
}

type Named = (String, SourceSpan);

/// Guard expression plus the spans of its variable leaves.
struct ParsedExpr {
    expr: GuardExpr,
    vars: Vec<Named>,
}

struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end_span: SourceSpan,
    vars: Vec<Named>,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn error_here(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(
                t.span,
                ParseErrorKind::Syntax,
                format!("expected {}, found {}", what, t.tok.describe()),
            ),
            None => ParseError::new(
                self.end_span,
                ParseErrorKind::Syntax,
                format!("expected {}, found end of line", what),
            ),
        }
    }

    fn or(&mut self) -> Result<GuardExpr, ParseError> {
        let mut lhs = self.and()?;
        while matches!(self.peek(), Some(Token { tok: Tok::Pipe, .. })) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = GuardExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<GuardExpr, ParseError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Some(Token { tok: Tok::Amp, .. })) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = GuardExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<GuardExpr, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.error_here("an expression"));
        };
        match &t.tok {
            Tok::Bang => {
                self.pos += 1;
                Ok(GuardExpr::not(self.unary()?))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.or()?;
                match self.peek() {
                    Some(Token { tok: Tok::RParen, .. }) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(self.error_here("`)`")),
                }
            }
            Tok::Ident(name) => {
                self.pos += 1;
                self.vars.push((name.clone(), t.span));
                Ok(GuardExpr::Var(name.clone()))
            }
            Tok::Number(n) => {
                self.pos += 1;
                Ok(GuardExpr::Const(parse_bit(n, t.span)?))
            }
            _ => Err(self.error_here("an expression")),
        }
    }
}

fn parse_bit(text: &str, span: SourceSpan) -> Result<bool, ParseError> {
    match text {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(ParseError::new(
            span,
            ParseErrorKind::BadBit,
            format!("`{}` is not a bit (expected 0 or 1)", text),
        )),
    }
}

struct RawState {
    name: Named,
    assignments: Vec<(Named, bool)>,
}

struct RawTrans {
    src: Named,
    dst: Named,
    guard: ParsedExpr,
    emits: Vec<Named>,
}

#[derive(Default)]
struct Raw {
    header: Option<Named>,
    inputs: Option<Vec<Named>>,
    outputs: Option<Vec<Named>>,
    pulses: Option<Vec<Named>>,
    initial: Option<Named>,
    reset: Option<Named>,
    states: Vec<RawState>,
    transitions: Vec<RawTrans>,
}

fn expect_ident(tokens: &[Token], pos: usize, end: SourceSpan, what: &str) -> Result<Named, ParseError> {
    match tokens.get(pos) {
        Some(Token { tok: Tok::Ident(s), span }) => Ok((s.clone(), *span)),
        Some(t) => Err(ParseError::new(
            t.span,
            ParseErrorKind::Syntax,
            format!("expected {}, found {}", what, t.tok.describe()),
        )),
        None => Err(ParseError::new(
            end,
            ParseErrorKind::Syntax,
            format!("expected {}, found end of line", what),
        )),
    }
}

fn expect_end(tokens: &[Token], pos: usize) -> Result<(), ParseError> {
    match tokens.get(pos) {
        None => Ok(()),
        Some(t) => Err(ParseError::new(
            t.span,
            ParseErrorKind::Syntax,
            format!("unexpected {}", t.tok.describe()),
        )),
    }
}

fn ident_list(tokens: &[Token], end: SourceSpan) -> Result<Vec<Named>, ParseError> {
    (1..tokens.len())
        .map(|i| expect_ident(tokens, i, end, "a signal name"))
        .collect()
}

fn set_once<T>(slot: &mut Option<T>, value: T, keyword: &Token) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError::new(
            keyword.span,
            ParseErrorKind::Syntax,
            format!("duplicate {} directive", keyword.tok.describe()),
        ));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_line(raw: &mut Raw, tokens: &[Token], end: SourceSpan) -> Result<(), ParseError> {
    let head = &tokens[0];
    let Tok::Ident(keyword) = &head.tok else {
        return Err(ParseError::new(
            head.span,
            ParseErrorKind::Syntax,
            format!("expected a directive, found {}", head.tok.describe()),
        ));
    };
    match keyword.as_str() {
        "fsm" => {
            let name = expect_ident(tokens, 1, end, "a machine name")?;
            expect_end(tokens, 2)?;
            set_once(&mut raw.header, name, head)
        }
        "inputs" => set_once(&mut raw.inputs, ident_list(tokens, end)?, head),
        "outputs" => set_once(&mut raw.outputs, ident_list(tokens, end)?, head),
        "pulses" => set_once(&mut raw.pulses, ident_list(tokens, end)?, head),
        "initial" => {
            let name = expect_ident(tokens, 1, end, "a state name")?;
            expect_end(tokens, 2)?;
            set_once(&mut raw.initial, name, head)
        }
        "reset" => {
            let name = expect_ident(tokens, 1, end, "an input name")?;
            expect_end(tokens, 2)?;
            set_once(&mut raw.reset, name, head)
        }
        "state" => {
            let name = expect_ident(tokens, 1, end, "a state name")?;
            match tokens.get(2) {
                Some(Token { tok: Tok::LBrace, .. }) => {}
                Some(t) => {
                    return Err(ParseError::new(
                        t.span,
                        ParseErrorKind::Syntax,
                        format!("expected `{{`, found {}", t.tok.describe()),
                    ))
                }
                None => {
                    return Err(ParseError::new(end, ParseErrorKind::Syntax, "expected `{`"));
                }
            }
            let mut pos = 3;
            let mut assignments = Vec::new();
            loop {
                match tokens.get(pos) {
                    Some(Token { tok: Tok::RBrace, .. }) => {
                        expect_end(tokens, pos + 1)?;
                        break;
                    }
                    Some(Token { tok: Tok::Ident(out), span }) => {
                        match tokens.get(pos + 1) {
                            Some(Token { tok: Tok::Eq, .. }) => {}
                            _ => {
                                return Err(ParseError::new(
                                    tokens.get(pos + 1).map_or(end, |t| t.span),
                                    ParseErrorKind::Syntax,
                                    "expected `=` after output name",
                                ))
                            }
                        }
                        let bit = match tokens.get(pos + 2) {
                            Some(Token { tok: Tok::Number(n), span }) => parse_bit(n, *span)?,
                            Some(Token { tok: Tok::Ident(s), span }) => {
                                return Err(ParseError::new(
                                    *span,
                                    ParseErrorKind::BadBit,
                                    format!("`{}` is not a bit (expected 0 or 1)", s),
                                ))
                            }
                            other => {
                                return Err(ParseError::new(
                                    other.map_or(end, |t| t.span),
                                    ParseErrorKind::Syntax,
                                    "expected a bit value",
                                ))
                            }
                        };
                        assignments.push(((out.clone(), *span), bit));
                        pos += 3;
                    }
                    Some(t) => {
                        return Err(ParseError::new(
                            t.span,
                            ParseErrorKind::Syntax,
                            format!("expected `out=bit` or `}}`, found {}", t.tok.describe()),
                        ))
                    }
                    None => return Err(ParseError::new(end, ParseErrorKind::Syntax, "expected `}`")),
                }
            }
            raw.states.push(RawState { name, assignments });
            Ok(())
        }
        "trans" => {
            let src = expect_ident(tokens, 1, end, "a source state")?;
            match tokens.get(2) {
                Some(Token { tok: Tok::Arrow, .. }) => {}
                other => {
                    return Err(ParseError::new(
                        other.map_or(end, |t| t.span),
                        ParseErrorKind::Syntax,
                        "expected `->`",
                    ))
                }
            }
            let dst = expect_ident(tokens, 3, end, "a destination state")?;
            match tokens.get(4) {
                Some(Token { tok: Tok::Ident(w), .. }) if w == "when" => {}
                other => {
                    return Err(ParseError::new(
                        other.map_or(end, |t| t.span),
                        ParseErrorKind::Syntax,
                        "expected `when`",
                    ))
                }
            }
            let mut p = ExprParser {
                tokens,
                pos: 5,
                end_span: end,
                vars: Vec::new(),
            };
            let expr = p.or()?;
            let mut pos = p.pos;
            let guard = ParsedExpr { expr, vars: p.vars };
            let mut emits = Vec::new();
            match tokens.get(pos) {
                None => {}
                Some(Token { tok: Tok::Ident(e), span }) if e == "emit" => {
                    pos += 1;
                    if pos == tokens.len() {
                        return Err(ParseError::new(
                            *span,
                            ParseErrorKind::Syntax,
                            "`emit` needs at least one pulse name",
                        ));
                    }
                    while pos < tokens.len() {
                        emits.push(expect_ident(tokens, pos, end, "a pulse name")?);
                        pos += 1;
                    }
                }
                Some(t) => {
                    return Err(ParseError::new(
                        t.span,
                        ParseErrorKind::Syntax,
                        format!("expected an operator or `emit`, found {}", t.tok.describe()),
                    ))
                }
            }
            raw.transitions.push(RawTrans {
                src,
                dst,
                guard,
                emits,
            });
            Ok(())
        }
        other => Err(ParseError::new(
            head.span,
            ParseErrorKind::Syntax,
            format!("unknown directive `{}`", other),
        )),
    }
}

/// Parses `.fsm` source. On failure every error found is returned, at most
/// one per line for syntax problems plus any name-resolution errors.
pub fn parse(text: &str) -> Result<FsmSpec, Vec<ParseError>> {
    let mut raw = Raw::default();
    let mut errors = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = match lex_line(line_no, line) {
            Ok(t) => t,
            Err(e) => {
                errors.push(e);
                continue;
            }
        };
        if tokens.is_empty() {
            continue;
        }
        let end = SourceSpan::new(line_no, line.trim_end().chars().count() + 1, 1);
        if let Err(e) = parse_line(&mut raw, &tokens, end) {
            errors.push(e);
        }
    }

    let Some((name, header_span)) = raw.header.clone() else {
        errors.insert(
            0,
            ParseError::new(SourceSpan::new(1, 1, 1), ParseErrorKind::Syntax, "missing fsm header"),
        );
        return Err(errors);
    };
    resolve(raw, name, header_span, errors)
}

fn resolve(
    raw: Raw,
    name: String,
    header_span: SourceSpan,
    mut errors: Vec<ParseError>,
) -> Result<FsmSpec, Vec<ParseError>> {
    let inputs = raw.inputs.unwrap_or_default();
    let outputs = raw.outputs.unwrap_or_default();
    let pulses = raw.pulses.unwrap_or_default();

    // Signal names share one namespace.
    let mut signal_kinds: HashMap<&str, &'static str> = HashMap::new();
    for (list, kind) in [(&inputs, "input"), (&outputs, "output"), (&pulses, "pulse")] {
        for (n, span) in list.iter() {
            if let Some(prev) = signal_kinds.insert(n.as_str(), kind) {
                signal_kinds.insert(n.as_str(), prev);
                errors.push(ParseError::new(
                    *span,
                    ParseErrorKind::DuplicateName,
                    format!("signal `{}` already declared as {}", n, prev),
                ));
            }
        }
    }
    let is_kind = |n: &str, kind: &str| signal_kinds.get(n) == Some(&kind);

    let mut state_index: HashMap<&str, usize> = HashMap::new();
    let mut states: Vec<StateDef> = Vec::new();
    for rs in &raw.states {
        let (sname, span) = &rs.name;
        if state_index.contains_key(sname.as_str()) {
            errors.push(ParseError::new(
                *span,
                ParseErrorKind::DuplicateName,
                format!("state `{}` already declared", sname),
            ));
            continue;
        }
        let mut assignments = BTreeMap::new();
        for ((out, ospan), bit) in &rs.assignments {
            if !is_kind(out, "output") {
                errors.push(ParseError::new(
                    *ospan,
                    ParseErrorKind::UnknownSignal,
                    format!("`{}` is not a declared output", out),
                ));
            } else if assignments.insert(out.clone(), *bit).is_some() {
                errors.push(ParseError::new(
                    *ospan,
                    ParseErrorKind::DuplicateName,
                    format!("output `{}` assigned twice", out),
                ));
            }
        }
        state_index.insert(sname.as_str(), states.len());
        states.push(StateDef {
            name: sname.clone(),
            moore_assignments: assignments,
            transitions: Vec::new(),
        });
    }

    let unknown_state = |n: &Named, role: &str| {
        ParseError::new(
            n.1,
            ParseErrorKind::UnknownSignal,
            format!("{} `{}` is not a declared state", role, n.0),
        )
    };

    let mut placed: Vec<(usize, Transition)> = Vec::new();
    for rt in raw.transitions {
        let mut ok = true;
        let src = state_index.get(rt.src.0.as_str()).copied();
        if src.is_none() {
            errors.push(unknown_state(&rt.src, "source"));
            ok = false;
        }
        if !state_index.contains_key(rt.dst.0.as_str()) {
            errors.push(unknown_state(&rt.dst, "destination"));
            ok = false;
        }
        for (v, span) in &rt.guard.vars {
            if !is_kind(v, "input") {
                errors.push(ParseError::new(
                    *span,
                    ParseErrorKind::UnknownSignal,
                    format!("`{}` is not a declared input", v),
                ));
                ok = false;
            }
        }
        let mut emitted = BTreeSet::new();
        for (p, span) in &rt.emits {
            if !is_kind(p, "pulse") {
                errors.push(ParseError::new(
                    *span,
                    ParseErrorKind::UnknownSignal,
                    format!("`{}` is not a declared pulse", p),
                ));
                ok = false;
            } else if !emitted.insert(p.clone()) {
                errors.push(ParseError::new(
                    *span,
                    ParseErrorKind::DuplicateName,
                    format!("pulse `{}` emitted twice", p),
                ));
            }
        }
        if let (true, Some(src)) = (ok, src) {
            placed.push((
                src,
                Transition {
                    guard: rt.guard.expr,
                    destination: rt.dst.0,
                    pulses: emitted,
                },
            ));
        }
    }
    for (src, t) in placed {
        states[src].transitions.push(t);
    }

    let initial_state = match raw.initial {
        Some(init) => {
            if !state_index.contains_key(init.0.as_str()) {
                errors.push(unknown_state(&init, "initial state"));
            }
            init.0
        }
        None => {
            errors.push(ParseError::new(
                header_span,
                ParseErrorKind::Syntax,
                "missing `initial` directive",
            ));
            String::new()
        }
    };
    if let Some((r, span)) = &raw.reset {
        if !is_kind(r, "input") {
            errors.push(ParseError::new(
                *span,
                ParseErrorKind::UnknownSignal,
                format!("reset `{}` is not a declared input", r),
            ));
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| (e.span.line, e.span.column));
        return Err(errors);
    }
    let names = |l: Vec<Named>| l.into_iter().map(|(n, _)| n).collect::<Vec<_>>();
    Ok(FsmSpec {
        name,
        inputs: names(inputs),
        moore_outputs: names(outputs),
        pulse_outputs: names(pulses),
        states,
        initial_state,
        reset_input: raw.reset.map(|(n, _)| n),
    })
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Or = 1,
    And = 2,
    Unary = 3,
}

/// Operator spellings, shared with the Verilog emitter.
pub(crate) struct ExprSyntax {
    pub not: &'static str,
    pub and: &'static str,
    pub or: &'static str,
    pub zero: &'static str,
    pub one: &'static str,
}

pub(crate) const DSL_SYNTAX: ExprSyntax = ExprSyntax {
    not: "!",
    and: " & ",
    or: " | ",
    zero: "0",
    one: "1",
};

/// Prints `e` with the minimum parentheses needed to reparse the same tree
/// under left-associative `&`/`|`.
pub(crate) fn write_expr(e: &GuardExpr, syn: &ExprSyntax, out: &mut String) {
    write_expr_prec(e, syn, Prec::Or, out)
}

fn write_expr_prec(e: &GuardExpr, syn: &ExprSyntax, ctx: Prec, out: &mut String) {
    let (prec, lhs_ctx, rhs_ctx, op, a, b) = match e {
        GuardExpr::Const(b) => {
            out.push_str(if *b { syn.one } else { syn.zero });
            return;
        }
        GuardExpr::Var(v) => {
            out.push_str(v);
            return;
        }
        GuardExpr::Not(inner) => {
            out.push_str(syn.not);
            write_expr_prec(inner, syn, Prec::Unary, out);
            return;
        }
        GuardExpr::And(a, b) => (Prec::And, Prec::And, Prec::Unary, syn.and, a, b),
        GuardExpr::Or(a, b) => (Prec::Or, Prec::Or, Prec::And, syn.or, a, b),
    };
    let paren = ctx > prec;
    if paren {
        out.push('(');
    }
    write_expr_prec(a, syn, lhs_ctx, out);
    out.push_str(op);
    write_expr_prec(b, syn, rhs_ctx, out);
    if paren {
        out.push(')');
    }
}

pub fn expr_to_string(e: &GuardExpr) -> String {
    let mut s = String::new();
    write_expr(e, &DSL_SYNTAX, &mut s);
    s
}

/// Canonical text for `spec`. Empty signal lists and an absent reset are
/// omitted; each state line is followed by its transitions.
pub fn serialize(spec: &FsmSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("fsm {}\n", spec.name));
    for (kw, list) in [
        ("inputs", &spec.inputs),
        ("outputs", &spec.moore_outputs),
        ("pulses", &spec.pulse_outputs),
    ] {
        if !list.is_empty() {
            out.push_str(&format!("{} {}\n", kw, list.join(" ")));
        }
    }
    out.push_str(&format!("initial {}\n", spec.initial_state));
    if let Some(r) = &spec.reset_input {
        out.push_str(&format!("reset {}\n", r));
    }
    for s in &spec.states {
        out.push_str(&format!("state {} {{", s.name));
        let declared = spec
            .moore_outputs
            .iter()
            .filter_map(|o| s.moore_assignments.get(o).map(|b| (o, b)));
        let stray = s
            .moore_assignments
            .iter()
            .filter(|(o, _)| !spec.moore_outputs.contains(o));
        for (o, b) in declared.chain(stray) {
            out.push_str(&format!(" {}={}", o, u8::from(*b)));
        }
        out.push_str(" }\n");
        for t in &s.transitions {
            out.push_str(&format!("trans {} -> {} when ", s.name, t.destination));
            write_expr(&t.guard, &DSL_SYNTAX, &mut out);
            if !t.pulses.is_empty() {
                out.push_str(" emit");
                let declared = spec.pulse_outputs.iter().filter(|p| t.pulses.contains(*p));
                let stray = t.pulses.iter().filter(|p| !spec.pulse_outputs.contains(p));
                for p in declared.chain(stray) {
                    out.push(' ');
                    out.push_str(p);
                }
            }
            out.push('\n');
        }
    }
    out
}
