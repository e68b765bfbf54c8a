//! Text formats: transducers, symbolic transducers, traces, regex protocols, and DOT output.
//!
//! ```text
//! signature in a, c; out b;
//! states s0, s1;
//! initial s0;
//! registers y;                  # symbolic transducers only
//! trans s0 -> s1 : {a} when y > 0 do y := y + 1;
//! trans s1 -> s0 : {};
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernel::{Label, Round, Signature, Trace, Transducer};
use crate::protocol::{ProtocolFile, ProtocolRegex};
use crate::symbolic::{BinOp, Expr, PortValue, Sfst, SymTransition, ValuedRound, ValuedTrace};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 17] = [
    "->", ":=", "<=", ">=", "{", "}", "(", ")", ";", ",", ":", "=", "<", ">", "+", "-", "*",
];

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (ln + 1, i + 1);
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Word(chars[start..i].iter().collect()));
            } else if c == '"' {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(Error::parse(line, column, "unterminated quoted name"));
                }
                push(&mut out, Tok::Str(chars[start..i].iter().collect()));
                i += 1;
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                    Some(s) => {
                        push(&mut out, Tok::Sym(s));
                        i += s.len();
                    }
                    None => {
                        return Err(Error::parse(line, column, format!("unexpected character `{c}`")))
                    }
                }
            }
        }
    }
    let (line, column) = out
        .last()
        .map_or((1, 1), |t| (t.line, t.column + 1));
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::parse(l, c, message))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", self.describe()))
        }
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Tok::Word(w) if crate::kernel::is_identifier(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn state_name(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Word(w) | Tok::Str(w) => {
                if let Err(e) = crate::kernel::check_state_name(&w) {
                    return self.error(e.to_string());
                }
                self.advance();
                Ok(w)
            }
            _ => self.error(format!("expected a state name, found {}", self.describe())),
        }
    }

    /// Comma-separated items up to (and consuming) `;`. Empty lists are allowed.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(";") {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(";") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn signature_clauses(&mut self) -> Result<Signature> {
        let mut inputs = None;
        let mut outputs = None;
        loop {
            let slot = if self.at_word("in") {
                &mut inputs
            } else if self.at_word("out") {
                &mut outputs
            } else {
                break;
            };
            if slot.is_some() {
                return self.error(format!("{} declared twice", self.describe()));
            }
            self.advance();
            let (l, c) = self.here();
            let names = self.list(|p| p.ident("a label"))?;
            let labels = names
                .into_iter()
                .map(Label::new)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::parse(l, c, e.to_string()))?;
            *slot = Some((labels, (l, c)));
        }
        if inputs.is_none() && outputs.is_none() {
            return self.error("expected `in` or `out` after `signature`");
        }
        let (ins, pos) = inputs.unwrap_or_default();
        let (outs, _) = outputs.unwrap_or_default();
        let mut seen = BTreeSet::new();
        for l in ins.iter().chain(&outs) {
            if !seen.insert(l) {
                return Err(Error::parse(pos.0, pos.1, format!("label `{l}` declared twice")));
            }
        }
        Signature::new(ins, outs).map_err(|e| Error::parse(pos.0, pos.1, e.to_string()))
    }

    fn round(&mut self, sig: Option<&Signature>) -> Result<Round> {
        self.expect("{")?;
        let mut events = BTreeSet::new();
        if self.eat("}") {
            return Ok(Round::new(events));
        }
        loop {
            let (l, c) = self.here();
            let name = self.ident("a label")?;
            let label = match sig {
                Some(sig) => sig
                    .lookup(&name)
                    .cloned()
                    .ok_or_else(|| Error::parse(l, c, format!("unknown label `{name}`")))?,
                None => Label::new(name).map_err(|e| Error::parse(l, c, e.to_string()))?,
            };
            if !events.insert(label) {
                return Err(Error::parse(l, c, "label repeated in round"));
            }
            if self.eat("}") {
                return Ok(Round::new(events));
            }
            self.expect(",")?;
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.and_expr()?;
        while self.eat_word("or") {
            e = Expr::bin(BinOp::Or, e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut e = self.not_expr()?;
        while self.eat_word("and") {
            e = Expr::bin(BinOp::And, e, self.not_expr()?);
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr> {
        if self.eat_word("not") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr> {
        let a = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(a),
        };
        self.advance();
        Ok(Expr::bin(op, a, self.add_expr()?))
    }

    fn add_expr(&mut self) -> Result<Expr> {
        let mut e = self.mul_expr()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(e);
            };
            e = Expr::bin(op, e, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.eat("*") {
            e = Expr::bin(BinOp::Mul, e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat("-") {
            if let Tok::Word(w) = self.peek() {
                if w.chars().all(|c| c.is_ascii_digit()) {
                    let w = w.clone();
                    let v = self.integer(&w, true)?;
                    self.advance();
                    return Ok(Expr::Int(v));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn integer(&self, digits: &str, negative: bool) -> Result<i64> {
        let text = if negative {
            format!("-{digits}")
        } else {
            digits.to_string()
        };
        match text.parse::<i64>() {
            Ok(v) => Ok(v),
            Err(_) => self.error(format!("integer literal `{text}` out of range")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.advance();
                Ok(Expr::Bool(w == "true"))
            }
            Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                let v = self.integer(&w, false)?;
                self.advance();
                Ok(Expr::Int(v))
            }
            Tok::Word(w) if crate::kernel::is_identifier(&w) && !is_keyword(&w) => {
                self.advance();
                Ok(Expr::Var(w))
            }
            _ => self.error(format!("expected an expression, found {}", self.describe())),
        }
    }

    fn regex(&mut self) -> Result<ProtocolRegex> {
        let mut alts = vec![self.regex_concat()?];
        while self.eat("+") {
            alts.push(self.regex_concat()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            ProtocolRegex::Alt(alts)
        })
    }

    fn regex_concat(&mut self) -> Result<ProtocolRegex> {
        let mut parts = Vec::new();
        while matches!(self.peek(), Tok::Word(_) | Tok::Sym("(")) {
            let mut atom = if self.eat("(") {
                let r = self.regex()?;
                self.expect(")")?;
                r
            } else {
                let (l, c) = self.here();
                let name = self.ident("an event")?;
                ProtocolRegex::Event(Label::new(name).map_err(|e| Error::parse(l, c, e.to_string()))?)
            };
            while self.eat("*") {
                atom = ProtocolRegex::Star(Box::new(atom));
            }
            parts.push(atom);
        }
        match parts.len() {
            0 => self.error(format!("expected an event or `(`, found {}", self.describe())),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(ProtocolRegex::Concat(parts)),
        }
    }

    fn finish(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.describe()))
        }
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(w, "and" | "or" | "not" | "true" | "false")
}

/// Parses a transducer with or without symbolic features.
pub fn parse_sfst(text: &str) -> Result<Sfst> {
    let mut p = Parser::new(text)?;
    let mut signature: Option<Signature> = None;
    let mut states: Option<Vec<String>> = None;
    let mut initial: Option<(String, (usize, usize))> = None;
    let mut registers: Option<Vec<String>> = None;
    let mut transitions = Vec::new();
    let mut refs: Vec<(String, (usize, usize))> = Vec::new();
    while *p.peek() != Tok::Eof {
        let at = p.here();
        let duplicate = |p: &Parser, what: &str| p.error::<()>(format!("`{what}` declared twice"));
        if p.eat_word("signature") {
            if signature.is_some() {
                duplicate(&p, "signature")?;
            }
            signature = Some(p.signature_clauses()?);
        } else if p.eat_word("states") {
            if states.is_some() {
                duplicate(&p, "states")?;
            }
            states = Some(p.list(Parser::state_name)?);
        } else if p.eat_word("initial") {
            if initial.is_some() {
                duplicate(&p, "initial")?;
            }
            let pos = p.here();
            initial = Some((p.state_name()?, pos));
            p.expect(";")?;
        } else if p.eat_word("registers") {
            if registers.is_some() {
                duplicate(&p, "registers")?;
            }
            registers = Some(p.list(|p| p.ident("a register name"))?);
        } else if p.eat_word("trans") {
            let Some(sig) = signature.as_ref() else {
                return Err(Error::parse(at.0, at.1, "`trans` before `signature`"));
            };
            let src_at = p.here();
            let source = p.state_name()?;
            p.expect("->")?;
            let dst_at = p.here();
            let target = p.state_name()?;
            p.expect(":")?;
            let round = p.round(Some(sig))?;
            let guard = if p.eat_word("when") {
                p.expr()?
            } else {
                Expr::Bool(true)
            };
            let mut updates = BTreeMap::new();
            if p.eat_word("do") {
                loop {
                    let (l, c) = p.here();
                    let name = p.ident("an update target")?;
                    p.expect(":=")?;
                    let rhs = p.expr()?;
                    if updates.insert(name.clone(), rhs).is_some() {
                        return Err(Error::parse(l, c, format!("`{name}` updated twice")));
                    }
                    if !p.eat(",") {
                        break;
                    }
                }
            }
            p.expect(";")?;
            refs.push((source.clone(), src_at));
            refs.push((target.clone(), dst_at));
            transitions.push(SymTransition::new(source, round, guard, updates, target));
        } else {
            return p.error(format!(
                "expected `signature`, `states`, `initial`, `registers` or `trans`, found {}",
                p.describe()
            ));
        }
    }
    let end = p.here();
    let signature =
        signature.ok_or_else(|| Error::parse(end.0, end.1, "missing `signature` declaration"))?;
    let states = states.ok_or_else(|| Error::parse(end.0, end.1, "missing `states` declaration"))?;
    let (initial, init_at) =
        initial.ok_or_else(|| Error::parse(end.0, end.1, "missing `initial` declaration"))?;
    let declared: BTreeSet<&String> = states.iter().collect();
    if !declared.contains(&initial) {
        return Err(Error::parse(
            init_at.0,
            init_at.1,
            Error::MissingInitial(initial).to_string(),
        ));
    }
    for (name, (l, c)) in &refs {
        if !declared.contains(name) {
            return Err(Error::parse(*l, *c, Error::UnknownState(name.clone()).to_string()));
        }
    }
    Sfst::new(
        signature,
        states,
        registers.unwrap_or_default(),
        initial,
        transitions,
    )
}

/// Parses a plain transducer; guards, updates and registers are rejected.
pub fn parse_transducer(text: &str) -> Result<Transducer> {
    let s = parse_sfst(text)?;
    if !s.registers().is_empty() || !crate::symbolic::is_symbolic_protocol(&s) {
        return Err(Error::parse(
            1,
            1,
            "plain transducer files may not declare registers, guards or updates",
        ));
    }
    Ok(s.skeleton())
}

/// One round per line, e.g. `{a, b}` or `{}`.
pub fn parse_trace(text: &str) -> Result<Trace> {
    let mut p = Parser::new(text)?;
    let mut rounds = Vec::new();
    while *p.peek() != Tok::Eof {
        rounds.push(p.round(None)?);
        p.eat(";");
    }
    Ok(Trace::new(rounds))
}

/// One valued round per line, e.g. `{x=2}`, `{r}`, `{x=-1, r=5}`.
pub fn parse_valued_trace(text: &str) -> Result<ValuedTrace> {
    let mut p = Parser::new(text)?;
    let mut rounds = Vec::new();
    while *p.peek() != Tok::Eof {
        p.expect("{")?;
        let mut events = BTreeMap::new();
        if !p.eat("}") {
            loop {
                let (l, c) = p.here();
                let name = p.ident("a label")?;
                let label = Label::new(name).map_err(|e| Error::parse(l, c, e.to_string()))?;
                let value = if p.eat("=") {
                    let negative = p.eat("-");
                    match p.peek().clone() {
                        Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                            let v = p.integer(&w, negative)?;
                            p.advance();
                            PortValue::Int(v)
                        }
                        _ => return p.error(format!("expected an integer, found {}", p.describe())),
                    }
                } else {
                    PortValue::Unit
                };
                if events.insert(label, value).is_some() {
                    return Err(Error::parse(l, c, "label repeated in round"));
                }
                if p.eat("}") {
                    break;
                }
                p.expect(",")?;
            }
        }
        p.eat(";");
        rounds.push(ValuedRound(events));
    }
    Ok(rounds)
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_regex(text: &str) -> Result<ProtocolRegex> {
    let mut p = Parser::new(text)?;
    let r = p.regex()?;
    p.finish()?;
    Ok(r)
}

/// `alphabet a, b;` (all labels inputs) or a `signature` line, then `regex ...;`.
pub fn parse_regex_file(text: &str) -> Result<ProtocolFile> {
    let mut p = Parser::new(text)?;
    let mut signature = None;
    let mut regex = None;
    while *p.peek() != Tok::Eof {
        if p.eat_word("alphabet") || p.eat_word("signature") {
            if signature.is_some() {
                return p.error("alphabet declared twice");
            }
            let keyword = &p.toks[p.pos - 1].tok;
            signature = Some(if *keyword == Tok::Word("alphabet".into()) {
                let (l, c) = p.here();
                let names = p.list(|p| p.ident("a label"))?;
                let labels = names
                    .into_iter()
                    .map(Label::new)
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::parse(l, c, e.to_string()))?;
                Signature::new(labels, []).map_err(|e| Error::parse(l, c, e.to_string()))?
            } else {
                p.signature_clauses()?
            });
        } else if p.eat_word("regex") {
            if regex.is_some() {
                return p.error("regex declared twice");
            }
            let at = p.here();
            let r = p.regex()?;
            p.expect(";")?;
            regex = Some((r, at));
        } else {
            return p.error(format!(
                "expected `alphabet`, `signature` or `regex`, found {}",
                p.describe()
            ));
        }
    }
    let end = p.here();
    let signature =
        signature.ok_or_else(|| Error::parse(end.0, end.1, "missing `alphabet` declaration"))?;
    let (regex, at) = regex.ok_or_else(|| Error::parse(end.0, end.1, "missing `regex`"))?;
    if let Some(l) = regex.events().into_iter().find(|l| !signature.contains(l)) {
        return Err(Error::parse(at.0, at.1, Error::UnknownLabel(l.to_string()).to_string()));
    }
    Ok(ProtocolFile { signature, regex })
}

/// State names that are plain words print bare; anything else is quoted.
pub fn quote_state(name: &str) -> String {
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

fn join_labels(labels: &BTreeSet<Label>) -> String {
    labels.iter().map(Label::as_str).collect::<Vec<_>>().join(", ")
}

fn write_header(
    out: &mut String,
    sig: &Signature,
    states: &BTreeSet<String>,
    initial: &str,
    registers: &BTreeSet<String>,
) {
    let _ = writeln!(
        out,
        "signature in {}; out {};",
        join_labels(sig.inputs()),
        join_labels(sig.outputs())
    );
    let names: Vec<String> = states.iter().map(|s| quote_state(s)).collect();
    let _ = writeln!(out, "states {};", names.join(", "));
    let _ = writeln!(out, "initial {};", quote_state(initial));
    if !registers.is_empty() {
        let regs: Vec<&str> = registers.iter().map(String::as_str).collect();
        let _ = writeln!(out, "registers {};", regs.join(", "));
    }
}

/// Canonical text: sorted states and transitions, so equal models print identically.
pub fn write_transducer(t: &Transducer) -> String {
    let mut out = String::new();
    write_header(&mut out, t.signature(), t.states(), t.initial(), &BTreeSet::new());
    for tr in t.transitions() {
        let _ = writeln!(
            out,
            "trans {} -> {} : {};",
            quote_state(&tr.source),
            quote_state(&tr.target),
            tr.round
        );
    }
    out
}

fn sym_label(t: &SymTransition) -> String {
    let mut s = t.round.to_string();
    if !t.guard.is_true() {
        let _ = write!(s, " when {}", t.guard);
    }
    if !t.updates.is_empty() {
        let ups: Vec<String> = t.updates.iter().map(|(k, v)| format!("{k} := {v}")).collect();
        let _ = write!(s, " do {}", ups.join(", "));
    }
    s
}

pub fn write_sfst(t: &Sfst) -> String {
    let mut out = String::new();
    write_header(&mut out, t.signature(), t.states(), t.initial(), t.registers());
    let mut lines: Vec<(&String, &Round, &String, String)> = t
        .transitions()
        .iter()
        .map(|tr| (&tr.source, &tr.round, &tr.target, sym_label(tr)))
        .collect();
    lines.sort();
    for (src, _, dst, label) in lines {
        let _ = writeln!(out, "trans {} -> {} : {label};", quote_state(src), quote_state(dst));
    }
    out
}

pub fn write_trace(t: &Trace) -> String {
    t.rounds().iter().map(|r| format!("{r}\n")).collect()
}

pub fn write_valued_trace(t: &[ValuedRound]) -> String {
    t.iter().map(|r| format!("{r}\n")).collect()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot(
    states: &BTreeSet<String>,
    initial: &str,
    edges: impl Iterator<Item = (String, String, String)>,
) -> String {
    let mut out = String::from("digraph transducer {\n  rankdir=LR;\n  node [shape=circle];\n");
    for s in states {
        let shape = if s == initial { " [shape=doublecircle]" } else { "" };
        let _ = writeln!(out, "  \"{}\"{shape};", dot_escape(s));
    }
    for (src, dst, label) in edges {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            dot_escape(&src),
            dot_escape(&dst),
            dot_escape(&label)
        );
    }
    out.push_str("}\n");
    out
}

/// DOT graph; the initial state is drawn as a double circle.
pub fn to_dot(t: &Transducer) -> String {
    dot(
        t.states(),
        t.initial(),
        t.transitions()
            .iter()
            .map(|tr| (tr.source.clone(), tr.target.clone(), tr.round.to_string())),
    )
}

pub fn sfst_to_dot(t: &Sfst) -> String {
    dot(
        t.states(),
        t.initial(),
        t.transitions()
            .iter()
            .map(|tr| (tr.source.clone(), tr.target.clone(), sym_label(tr))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fix1_round_trips() {
        let t = fixtures::fix1();
        let text = write_transducer(&t);
        let again = parse_transducer(&text).unwrap();
        assert_eq!(again, t);
        assert_eq!(write_transducer(&again), text);
    }

    #[test]
    fn undeclared_label_is_reported_with_position() {
        let text = "signature in b; out c;\nstates s0, s1;\ninitial s0;\ntrans s0 -> s1 : {a};\n";
        match parse_transducer(text) {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (4, 19));
                assert!(message.contains("`a`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_state_and_missing_initial() {
        let text = "signature in a; out;\nstates s0;\ninitial s0;\ntrans s0 -> s9 : {a};\n";
        assert!(matches!(parse_transducer(text), Err(Error::Parse { line: 4, .. })));
        let text = "signature in a; out;\nstates s0;\ninitial S9;\n";
        assert!(matches!(parse_transducer(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn adder_parses() {
        let a = fixtures::adder();
        assert_eq!(a.states().len(), 3);
        assert_eq!(a.registers().len(), 2);
        assert_eq!(a.transitions().len(), 3);
        let text = write_sfst(&a);
        assert_eq!(parse_sfst(&text).unwrap(), a);
    }

    #[test]
    fn quoted_state_names_round_trip() {
        let t = crate::algebra::intersect(&fixtures::fix1(), &fixtures::fix1()).unwrap();
        assert!(t.has_state("(s0,s0)"));
        assert_eq!(parse_transducer(&write_transducer(&t)).unwrap(), t);
    }

    #[test]
    fn traces_parse() {
        let t = parse_trace("{a}\n{}\n# comment\n{a, b}\n").unwrap();
        assert_eq!(t, Trace::from_names(&[&["a"], &[], &["a", "b"]]).unwrap());
        assert_eq!(write_trace(&t), "{a}\n{}\n{a, b}\n");
        let v = parse_valued_trace("{x=2}\n{x=-3}\n{r}\n").unwrap();
        assert_eq!(v[1], ValuedRound::from_pairs(&[("x", Some(-3))]).unwrap());
        assert_eq!(v[2], ValuedRound::from_pairs(&[("r", None)]).unwrap());
        assert_eq!(write_valued_trace(&v), "{x=2}\n{x=-3}\n{r}\n");
    }

    #[test]
    fn dot_output() {
        let d = to_dot(&fixtures::fix1());
        assert_eq!(d.lines().filter(|l| l.contains("->")).count(), 2);
        assert_eq!(
            d.lines().filter(|l| l.trim_start().starts_with('"') && !l.contains("->")).count(),
            2
        );
        assert!(d.contains("\"s0\" [shape=doublecircle]"));
        let s = sfst_to_dot(&fixtures::adder());
        assert!(s.contains("when y + z > 0 do r := y + z"));
    }

    #[test]
    fn regex_file_parses() {
        let f = parse_regex_file("alphabet a, b;\nregex (a b)*;\n").unwrap();
        assert_eq!(f.signature.inputs().len(), 2);
        assert!(matches!(
            parse_regex_file("alphabet a;\nregex (a c)*;\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_regex("(a b"), Err(Error::Parse { .. })));
    }
}
