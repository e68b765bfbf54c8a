//! Regex protocols, the online monitor, and the bundled protocol fixtures.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::coherence::bisim_minimize;
use crate::error::{Error, Result};
use crate::kernel::{fmt_round, Label, Round, Signature, Trace, Transducer, Transition};

pub use crate::fixtures::{display_protocol, inplace_map};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtocolRegex {
    Event(Label),
    Concat(Vec<ProtocolRegex>),
    Alt(Vec<ProtocolRegex>),
    Star(Box<ProtocolRegex>),
}

/// A regex protocol file: the signature it ranges over and the regex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolFile {
    pub signature: Signature,
    pub regex: ProtocolRegex,
}

impl ProtocolFile {
    pub fn compile(&self) -> Result<Transducer> {
        compile_regex(&self.regex, &self.signature)
    }
}

impl ProtocolRegex {
    pub fn parse(text: &str) -> Result<Self> {
        crate::format::parse_regex(text)
    }

    pub fn events(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        self.visit(&mut |l| {
            out.insert(l.clone());
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Label)) {
        match self {
            ProtocolRegex::Event(l) => f(l),
            ProtocolRegex::Concat(xs) | ProtocolRegex::Alt(xs) => {
                xs.iter().for_each(|x| x.visit(f))
            }
            ProtocolRegex::Star(x) => x.visit(f),
        }
    }
}

impl fmt::Display for ProtocolRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolRegex::Event(l) => write!(f, "{l}"),
            ProtocolRegex::Concat(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    if matches!(x, ProtocolRegex::Alt(_)) {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            ProtocolRegex::Alt(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            ProtocolRegex::Star(x) => match **x {
                ProtocolRegex::Event(_) | ProtocolRegex::Star(_) => write!(f, "{x}*"),
                _ => write!(f, "({x})*"),
            },
        }
    }
}

/// Position automaton data for one subexpression.
struct Positions {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

struct Glushkov {
    labels: Vec<Label>,
    follow: Vec<BTreeSet<usize>>,
}

impl Glushkov {
    fn walk(&mut self, r: &ProtocolRegex) -> Positions {
        match r {
            ProtocolRegex::Event(l) => {
                let p = self.labels.len();
                self.labels.push(l.clone());
                self.follow.push(BTreeSet::new());
                Positions {
                    nullable: false,
                    first: BTreeSet::from([p]),
                    last: BTreeSet::from([p]),
                }
            }
            ProtocolRegex::Alt(xs) => {
                let mut acc = Positions {
                    nullable: false,
                    first: BTreeSet::new(),
                    last: BTreeSet::new(),
                };
                for x in xs {
                    let p = self.walk(x);
                    acc.nullable |= p.nullable;
                    acc.first.extend(p.first);
                    acc.last.extend(p.last);
                }
                acc
            }
            ProtocolRegex::Concat(xs) => {
                let mut acc = Positions {
                    nullable: true,
                    first: BTreeSet::new(),
                    last: BTreeSet::new(),
                };
                for x in xs {
                    let p = self.walk(x);
                    for &l in &acc.last {
                        self.follow[l].extend(p.first.iter().copied());
                    }
                    if acc.nullable {
                        acc.first.extend(p.first.iter().copied());
                    }
                    if p.nullable {
                        acc.last.extend(p.last);
                    } else {
                        acc.last = p.last;
                    }
                    acc.nullable &= p.nullable;
                }
                acc
            }
            ProtocolRegex::Star(x) => {
                let p = self.walk(x);
                for &l in &p.last {
                    self.follow[l].extend(p.first.iter().copied());
                }
                Positions {
                    nullable: true,
                    ..p
                }
            }
        }
    }
}

/// Position automaton, subset construction, then minimisation. Every event becomes a singleton
/// round; the language is the prefix-closure of the regex. States are `q0, q1, ...` in
/// breadth-first order.
pub fn compile_regex(r: &ProtocolRegex, sig: &Signature) -> Result<Transducer> {
    if let Some(l) = r.events().into_iter().find(|l| !sig.contains(l)) {
        return Err(Error::UnknownLabel(l.to_string()));
    }
    let mut g = Glushkov {
        labels: Vec::new(),
        follow: Vec::new(),
    };
    let top = g.walk(r);
    // `None` stands for the start position.
    let successors = |set: &BTreeSet<Option<usize>>| -> BTreeMap<Label, BTreeSet<Option<usize>>> {
        let mut out: BTreeMap<Label, BTreeSet<Option<usize>>> = BTreeMap::new();
        for p in set {
            let next = match p {
                None => &top.first,
                Some(i) => &g.follow[*i],
            };
            for &q in next {
                out.entry(g.labels[q].clone()).or_default().insert(Some(q));
            }
        }
        out
    };
    let start = BTreeSet::from([None]);
    let mut ids: BTreeMap<BTreeSet<Option<usize>>, String> = BTreeMap::new();
    ids.insert(start.clone(), "q0".into());
    let mut queue = VecDeque::from([start]);
    let mut delta = BTreeSet::new();
    while let Some(set) = queue.pop_front() {
        let from = ids[&set].clone();
        for (label, next) in successors(&set) {
            let fresh = format!("q{}", ids.len());
            let to = ids.entry(next.clone()).or_insert_with(|| {
                queue.push_back(next);
                fresh
            });
            delta.insert(Transition::new(from.clone(), Round::new([label]), to.clone()));
        }
    }
    let dfa = Transducer::from_checked(sig.clone(), ids.into_values().collect(), "q0".into(), delta);
    Ok(renumber(&bisim_minimize(&dfa).model, "q"))
}

/// Renames states `{prefix}0, {prefix}1, ...` in breadth-first order from the initial state.
fn renumber(t: &Transducer, prefix: &str) -> Transducer {
    let mut order: BTreeMap<String, String> = BTreeMap::new();
    order.insert(t.initial().to_string(), format!("{prefix}0"));
    let mut queue = VecDeque::from([t.initial().to_string()]);
    while let Some(s) = queue.pop_front() {
        for tr in t.outgoing(&s) {
            if !order.contains_key(&tr.target) {
                order.insert(tr.target.clone(), format!("{prefix}{}", order.len()));
                queue.push_back(tr.target.clone());
            }
        }
    }
    for s in t.states() {
        if !order.contains_key(s) {
            order.insert(s.clone(), format!("{prefix}{}", order.len()));
        }
    }
    t.map_states(|s| order[s].clone())
}

/// Outcome of monitoring a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Violation {
        index: usize,
        offending: Round,
        /// Rounds the protocol allowed at that point.
        expected: BTreeSet<Round>,
    },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        *self == Verdict::Ok
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Ok => f.write_str("OK"),
            Verdict::Violation {
                index,
                offending,
                expected,
            } => {
                write!(f, "VIOLATION index={index} round={offending} expected={{")?;
                for (i, r) in expected.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    fmt_round(f, r.events().iter().map(Label::as_str))?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Online membership check against a deterministic protocol. Stops at the first illegal round.
#[derive(Clone, Debug)]
pub struct Monitor {
    protocol: Transducer,
    state: String,
    consumed: usize,
    verdict: Verdict,
}

impl Monitor {
    /// Nondeterministic protocols are determinised first.
    pub fn new(protocol: &Transducer) -> Self {
        let protocol = if protocol.is_deterministic() {
            protocol.clone()
        } else {
            protocol.determinize()
        };
        Monitor {
            state: protocol.initial().to_string(),
            protocol,
            consumed: 0,
            verdict: Verdict::Ok,
        }
    }

    pub fn verdict(&self) -> &Verdict {
        &self.verdict
    }

    /// Consumes one round; returns false once a violation has been seen.
    pub fn feed(&mut self, round: &Round) -> bool {
        if !self.verdict.is_ok() {
            return false;
        }
        let next = self
            .protocol
            .outgoing(&self.state)
            .find(|t| &t.round == round)
            .map(|t| t.target.clone());
        match next {
            Some(s) => {
                self.state = s;
                self.consumed += 1;
                true
            }
            None => {
                self.verdict = Verdict::Violation {
                    index: self.consumed,
                    offending: round.clone(),
                    expected: self
                        .protocol
                        .enabled_rounds(&self.state)
                        .into_iter()
                        .cloned()
                        .collect(),
                };
                false
            }
        }
    }
}

pub fn monitor(protocol: &Transducer, trace: &Trace) -> Result<Verdict> {
    for r in trace.rounds() {
        if let Some(l) = r.events().iter().find(|l| !protocol.signature().contains(l)) {
            return Err(Error::SignatureMismatch(format!(
                "label `{l}` is not part of the protocol signature"
            )));
        }
    }
    let mut m = Monitor::new(protocol);
    for r in trace.rounds() {
        if !m.feed(r) {
            break;
        }
    }
    Ok(m.verdict.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sig(names: &[&str]) -> Signature {
        Signature::from_names(names, &[]).unwrap()
    }

    fn tr(rounds: &[&[&str]]) -> Trace {
        Trace::from_names(rounds).unwrap()
    }

    #[test]
    fn alternating_ab() {
        let t = compile_regex(&ProtocolRegex::parse("(a b)*").unwrap(), &sig(&["a", "b"])).unwrap();
        assert_eq!(t.states().len(), 2);
        assert!(t.is_deterministic());
        let got = t.traces_upto(3).unwrap();
        let expected = BTreeSet::from([
            tr(&[]),
            tr(&[&["a"]]),
            tr(&[&["a"], &["b"]]),
            tr(&[&["a"], &["b"], &["a"]]),
        ]);
        assert_eq!(got.traces(), &expected);
    }

    #[test]
    fn single_literal() {
        let t = compile_regex(&ProtocolRegex::parse("a").unwrap(), &sig(&["a"])).unwrap();
        let got = t.traces_upto(4).unwrap();
        assert_eq!(got.traces(), &BTreeSet::from([tr(&[]), tr(&[&["a"]])]));
    }

    #[test]
    fn unknown_event_rejected() {
        let r = ProtocolRegex::parse("a c").unwrap();
        assert_eq!(
            compile_regex(&r, &sig(&["a"])),
            Err(Error::UnknownLabel("c".into()))
        );
    }

    #[test]
    fn inplace_map_regex_compiles() {
        let (_, p) = fixtures::inplace_map();
        assert!(p.is_deterministic());
        let got = p.traces_upto(3).unwrap();
        assert!(got.contains(&tr(&[&["r"]])));
        assert!(got.contains(&tr(&[&["r"], &["q_more"]])));
        assert!(got.contains(&tr(&[&["r"], &["q_more"], &["b_more"]])));
        assert!(!got.contains(&tr(&[&["q_more"]])));
    }

    #[test]
    fn display_protocol_traces() {
        let p = fixtures::display_protocol();
        assert!(p.accepts(&tr(&[&["q5"], &["d5"]])));
        assert!(p.accepts(&tr(&[
            &["q5"], &["r2"], &["q1"], &["n1"], &["q1"], &["n1"], &["d2"], &["d5"]
        ])));
        assert!(!p.accepts(&tr(&[&["d5"]])));
    }

    #[test]
    fn monitor_verdicts() {
        let p = fixtures::display_protocol();
        assert_eq!(monitor(&p, &fixtures::legal_trace()).unwrap(), Verdict::Ok);
        let v = monitor(&p, &fixtures::attack_trace()).unwrap();
        assert_eq!(v.to_string(), "VIOLATION index=2 round={d4} expected={{d2},{q1}}");
        assert_eq!(monitor(&p, &Trace::empty()).unwrap(), Verdict::Ok);
        assert!(matches!(
            monitor(&p, &tr(&[&["zz"]])),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn regex_display_reparses() {
        let (_, p) = fixtures::inplace_map();
        let file = crate::format::parse_regex_file(fixtures::INPLACE_MAP_RX).unwrap();
        let again = ProtocolRegex::parse(&file.regex.to_string()).unwrap();
        let recompiled = compile_regex(&again, &file.signature).unwrap();
        assert_eq!(recompiled.traces_upto(5).unwrap(), p.traces_upto(5).unwrap());
    }
}
