//! Signatures, rounds, traces and transducers with their exact finite semantics.
//!
//! A transducer's trace language is the set of traces that reach *some* state from the
//! initial one. There are no accepting states, so every language here is prefix-closed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Cap on the number of traces produced by bounded enumeration.
pub const DEFAULT_TRACE_CAP: usize = 1_000_000;

/// A port label: an identifier of letters, digits and underscores, not starting with a digit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Label(name))
        } else {
            Err(Error::InvalidLabel(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn check_state_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['"', '\n', '\r']) {
        Err(Error::InvalidStateName(name.to_string()))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Input,
    Output,
}

/// Input and output port labels of a transducer. The two sets are disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    inputs: BTreeSet<Label>,
    outputs: BTreeSet<Label>,
}

impl Signature {
    pub fn new(
        inputs: impl IntoIterator<Item = Label>,
        outputs: impl IntoIterator<Item = Label>,
    ) -> Result<Self> {
        let inputs: BTreeSet<Label> = inputs.into_iter().collect();
        let outputs: BTreeSet<Label> = outputs.into_iter().collect();
        if let Some(clash) = inputs.intersection(&outputs).next() {
            return Err(Error::LabelClash(clash.to_string()));
        }
        Ok(Signature { inputs, outputs })
    }

    pub fn from_names(inputs: &[&str], outputs: &[&str]) -> Result<Self> {
        let inputs = inputs.iter().map(|n| Label::new(*n)).collect::<Result<Vec<_>>>()?;
        let outputs = outputs.iter().map(|n| Label::new(*n)).collect::<Result<Vec<_>>>()?;
        Signature::new(inputs, outputs)
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn inputs(&self) -> &BTreeSet<Label> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<Label> {
        &self.outputs
    }

    /// All labels, inputs and outputs together.
    pub fn universe(&self) -> BTreeSet<Label> {
        self.inputs.union(&self.outputs).cloned().collect()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.inputs.contains(label) || self.outputs.contains(label)
    }

    pub fn lookup(&self, name: &str) -> Option<&Label> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .find(|l| l.as_str() == name)
    }

    pub fn polarity(&self, label: &Label) -> Option<Polarity> {
        if self.inputs.contains(label) {
            Some(Polarity::Input)
        } else if self.outputs.contains(label) {
            Some(Polarity::Output)
        } else {
            None
        }
    }

    /// The same labels with input and output swapped.
    pub fn dual(&self) -> Self {
        Signature {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
        }
    }

    /// True when every input of `self` is an input of `other` and likewise for outputs.
    pub fn is_sub_signature_of(&self, other: &Signature) -> bool {
        self.inputs.is_subset(&other.inputs) && self.outputs.is_subset(&other.outputs)
    }

    pub fn same_universe(&self, other: &Signature) -> bool {
        self.universe() == other.universe()
    }

    /// Keeps only the labels satisfying `keep`, preserving polarity.
    pub fn filter(&self, mut keep: impl FnMut(&Label) -> bool) -> Signature {
        Signature {
            inputs: self.inputs.iter().filter(|l| keep(l)).cloned().collect(),
            outputs: self.outputs.iter().filter(|l| keep(l)).cloned().collect(),
        }
    }

    pub(crate) fn require_same_universe(&self, other: &Signature, what: &str) -> Result<()> {
        if self.same_universe(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "{what}: label sets {} and {} differ",
                fmt_labels(&self.universe()),
                fmt_labels(&other.universe())
            )))
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(in {}; out {})",
            fmt_labels(&self.inputs),
            fmt_labels(&self.outputs)
        )
    }
}

fn fmt_labels(labels: &BTreeSet<Label>) -> String {
    let names: Vec<&str> = labels.iter().map(Label::as_str).collect();
    format!("{{{}}}", names.join(", "))
}

/// A possibly empty set of simultaneous events.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Round(BTreeSet<Label>);

impl Round {
    pub fn new(events: impl IntoIterator<Item = Label>) -> Self {
        Round(events.into_iter().collect())
    }

    pub fn empty() -> Self {
        Round::default()
    }

    pub fn from_names(names: &[&str]) -> Result<Self> {
        names
            .iter()
            .map(|n| Label::new(*n))
            .collect::<Result<BTreeSet<_>>>()
            .map(Round)
    }

    pub fn events(&self) -> &BTreeSet<Label> {
        &self.0
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Intersection with the labels of `sig`.
    pub fn project(&self, sig: &Signature) -> Round {
        Round(self.0.iter().filter(|l| sig.contains(l)).cloned().collect())
    }

    pub fn union(&self, other: &Round) -> Round {
        Round(self.0.union(&other.0).cloned().collect())
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        match self.0.iter().find(|l| !sig.contains(l)) {
            Some(l) => Err(Error::UnknownLabel(l.to_string())),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_round(f, self.0.iter().map(Label::as_str))
    }
}

pub(crate) fn fmt_round<'a>(
    f: &mut fmt::Formatter<'_>,
    events: impl Iterator<Item = &'a str>,
) -> fmt::Result {
    f.write_str("{")?;
    for (i, e) in events.enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        f.write_str(e)?;
    }
    f.write_str("}")
}

/// A finite sequence of rounds. Ordered by length first, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trace(Vec<Round>);

impl Trace {
    pub fn new(rounds: Vec<Round>) -> Self {
        Trace(rounds)
    }

    pub fn empty() -> Self {
        Trace::default()
    }

    /// Builds a trace from rounds given as label-name slices.
    pub fn from_names(rounds: &[&[&str]]) -> Result<Self> {
        rounds
            .iter()
            .map(|r| Round::from_names(r))
            .collect::<Result<Vec<_>>>()
            .map(Trace)
    }

    pub fn rounds(&self) -> &[Round] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extended(&self, round: Round) -> Trace {
        let mut rounds = self.0.clone();
        rounds.push(round);
        Trace(rounds)
    }

    pub fn prefix(&self, len: usize) -> Trace {
        Trace(self.0[..len].to_vec())
    }

    /// Restricts every round to `sig`; empty rounds stay, so the length is unchanged.
    pub fn project(&self, sig: &Signature) -> Trace {
        Trace(self.0.iter().map(|r| r.project(sig)).collect())
    }

    pub fn validate(&self, sig: &Signature) -> Result<()> {
        self.0.iter().try_for_each(|r| r.validate(sig))
    }
}

impl Ord for Trace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

/// Projects `trace` (over `of`) onto the sub-signature `keep`.
pub fn project_trace(trace: &Trace, of: &Signature, keep: &Signature) -> Result<Trace> {
    if !keep.is_sub_signature_of(of) {
        return Err(Error::SignatureMismatch(format!(
            "{keep} is not a sub-signature of {of}"
        )));
    }
    Ok(trace.project(keep))
}

/// Input/output polarities swapped.
pub fn dualize(sig: &Signature) -> Signature {
    sig.dual()
}

/// A finite set of traces over one signature, kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSet {
    signature: Signature,
    traces: BTreeSet<Trace>,
}

impl TraceSet {
    pub fn new(signature: Signature, traces: impl IntoIterator<Item = Trace>) -> Self {
        TraceSet {
            signature,
            traces: traces.into_iter().collect(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn traces(&self) -> &BTreeSet<Trace> {
        &self.traces
    }

    pub fn contains(&self, trace: &Trace) -> bool {
        self.traces.contains(trace)
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trace> {
        self.traces.iter()
    }

    pub fn max_len(&self) -> usize {
        self.traces.iter().map(Trace::len).max().unwrap_or(0)
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.traces.is_subset(&other.traces)
    }

    pub fn intersection(&self, other: &TraceSet) -> TraceSet {
        TraceSet {
            signature: self.signature.clone(),
            traces: self.traces.intersection(&other.traces).cloned().collect(),
        }
    }

    /// Traces no longer than `k`.
    pub fn truncated(&self, k: usize) -> TraceSet {
        TraceSet {
            signature: self.signature.clone(),
            traces: self.traces.iter().filter(|t| t.len() <= k).cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: String,
    pub round: Round,
    pub target: String,
}

impl Transition {
    pub fn new(source: impl Into<String>, round: Round, target: impl Into<String>) -> Self {
        Transition {
            source: source.into(),
            round,
            target: target.into(),
        }
    }
}

/// An unchecked transducer description, as read from a file or assembled by hand.
#[derive(Clone, Debug, Default)]
pub struct RawTransducer {
    pub signature: Signature,
    pub states: Vec<String>,
    pub initial: String,
    /// `(source, event names, target)`.
    pub transitions: Vec<(String, Vec<String>, String)>,
}

impl RawTransducer {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<Transducer> {
        let mut violations = Vec::new();
        let mut states = BTreeSet::new();
        for s in &self.states {
            if let Err(e) = check_state_name(s) {
                violations.push(e);
            } else if !states.insert(s.clone()) {
                violations.push(Error::Duplicate(s.clone()));
            }
        }
        if !states.contains(&self.initial) {
            violations.push(Error::MissingInitial(self.initial.clone()));
        }
        let mut delta = BTreeSet::new();
        for (src, events, dst) in &self.transitions {
            let mut ok = true;
            for s in [src, dst] {
                if !states.contains(s) {
                    violations.push(Error::UnknownState(s.clone()));
                    ok = false;
                }
            }
            let mut round = BTreeSet::new();
            for e in events {
                match self.signature.lookup(e) {
                    Some(l) => {
                        round.insert(l.clone());
                    }
                    None => {
                        violations.push(Error::UnknownLabel(e.clone()));
                        ok = false;
                    }
                }
            }
            if ok {
                delta.insert(Transition::new(src.clone(), Round(round), dst.clone()));
            }
        }
        if let Some(e) = Error::from_violations(violations) {
            return Err(e);
        }
        Ok(Transducer {
            signature: self.signature.clone(),
            states,
            initial: self.initial.clone(),
            delta,
        })
    }
}

/// Convenience wrapper around [`RawTransducer::validate`].
pub fn validate(raw: &RawTransducer) -> Result<Transducer> {
    raw.validate()
}

/// `⟨S, s⁰, δ⟩` over a signature. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    signature: Signature,
    states: BTreeSet<String>,
    initial: String,
    delta: BTreeSet<Transition>,
}

impl Transducer {
    pub fn new(
        signature: Signature,
        states: impl IntoIterator<Item = String>,
        initial: impl Into<String>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self> {
        let initial = initial.into();
        let mut violations = Vec::new();
        let mut set = BTreeSet::new();
        for s in states {
            if let Err(e) = check_state_name(&s) {
                violations.push(e);
            } else if !set.insert(s.clone()) {
                violations.push(Error::Duplicate(s));
            }
        }
        if !set.contains(&initial) {
            violations.push(Error::MissingInitial(initial.clone()));
        }
        let mut delta = BTreeSet::new();
        for t in transitions {
            let mut ok = true;
            for s in [&t.source, &t.target] {
                if !set.contains(s) {
                    violations.push(Error::UnknownState(s.clone()));
                    ok = false;
                }
            }
            if let Err(e) = t.round.validate(&signature) {
                violations.push(e);
                ok = false;
            }
            if ok {
                delta.insert(t);
            }
        }
        if let Some(e) = Error::from_violations(violations) {
            return Err(e);
        }
        Ok(Transducer {
            signature,
            states: set,
            initial,
            delta,
        })
    }

    /// Builder used by fixtures and tests: `(source, [labels], target)`.
    pub fn from_parts(
        signature: Signature,
        states: &[&str],
        initial: &str,
        transitions: &[(&str, &[&str], &str)],
    ) -> Result<Self> {
        let raw = RawTransducer {
            signature,
            states: states.iter().map(|s| s.to_string()).collect(),
            initial: initial.to_string(),
            transitions: transitions
                .iter()
                .map(|(s, r, t)| {
                    (
                        s.to_string(),
                        r.iter().map(|l| l.to_string()).collect(),
                        t.to_string(),
                    )
                })
                .collect(),
        };
        raw.validate()
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_checked(
        signature: Signature,
        states: BTreeSet<String>,
        initial: String,
        delta: BTreeSet<Transition>,
    ) -> Self {
        debug_assert!(states.contains(&initial));
        debug_assert!(delta
            .iter()
            .all(|t| states.contains(&t.source) && states.contains(&t.target)));
        Transducer {
            signature,
            states,
            initial,
            delta,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.delta
    }

    pub fn has_state(&self, s: &str) -> bool {
        self.states.contains(s)
    }

    pub(crate) fn require_state(&self, s: &str) -> Result<()> {
        if self.has_state(s) {
            Ok(())
        } else {
            Err(Error::UnknownState(s.to_string()))
        }
    }

    /// Transitions leaving `s`, ordered by round then target.
    pub fn outgoing<'a>(&'a self, s: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        let lower = Transition::new(s, Round::empty(), "");
        self.delta.range(lower..).take_while(move |t| t.source == s)
    }

    pub fn enabled_rounds<'a>(&'a self, s: &'a str) -> BTreeSet<&'a Round> {
        self.outgoing(s).map(|t| &t.round).collect()
    }

    /// `{ s′ | (s, V, s′) ∈ δ }`.
    pub fn step(&self, s: &str, round: &Round) -> Result<BTreeSet<String>> {
        self.require_state(s)?;
        Ok(self.step_unchecked(s, round))
    }

    fn step_unchecked(&self, s: &str, round: &Round) -> BTreeSet<String> {
        self.outgoing(s)
            .filter(|t| &t.round == round)
            .map(|t| t.target.clone())
            .collect()
    }

    /// Successors of a set of states under one round.
    pub fn post(&self, from: &BTreeSet<String>, round: &Round) -> BTreeSet<String> {
        from.iter()
            .flat_map(|s| self.step_unchecked(s, round))
            .collect()
    }

    /// States reached from the initial state by `trace`.
    pub fn run(&self, trace: &Trace) -> BTreeSet<String> {
        let mut current = BTreeSet::from([self.initial.clone()]);
        for round in trace.rounds() {
            if current.is_empty() {
                break;
            }
            current = self.post(&current, round);
        }
        current
    }

    /// Membership in the trace language.
    pub fn accepts(&self, trace: &Trace) -> bool {
        !self.run(trace).is_empty()
    }

    pub fn traces_upto(&self, k: usize) -> Result<TraceSet> {
        self.traces_upto_capped(k, DEFAULT_TRACE_CAP)
    }

    /// All traces of length at most `k`, by breadth-first exploration.
    pub fn traces_upto_capped(&self, k: usize, cap: usize) -> Result<TraceSet> {
        let mut out = BTreeSet::new();
        self.explore(k, cap, |trace, _| {
            out.insert(trace.clone());
        })?;
        Ok(TraceSet::new(self.signature.clone(), out))
    }

    pub fn witness_traces_upto(&self, s: &str, k: usize) -> Result<TraceSet> {
        self.witness_traces_upto_capped(s, k, DEFAULT_TRACE_CAP)
    }

    /// Traces of length at most `k` that lead from the initial state to `s`.
    pub fn witness_traces_upto_capped(&self, s: &str, k: usize, cap: usize) -> Result<TraceSet> {
        self.require_state(s)?;
        let mut out = BTreeSet::new();
        self.explore(k, cap, |trace, reached| {
            if reached.contains(s) {
                out.insert(trace.clone());
            }
        })?;
        Ok(TraceSet::new(self.signature.clone(), out))
    }

    fn explore(
        &self,
        k: usize,
        cap: usize,
        mut visit: impl FnMut(&Trace, &BTreeSet<String>),
    ) -> Result<()> {
        let limit = || Error::ResourceLimit {
            what: "trace enumeration",
            limit: cap,
        };
        let mut count = 1;
        let mut layer = vec![(Trace::empty(), BTreeSet::from([self.initial.clone()]))];
        for depth in 0..=k {
            for (trace, reached) in &layer {
                visit(trace, reached);
            }
            if depth == k {
                break;
            }
            let mut next = Vec::new();
            for (trace, reached) in &layer {
                let mut by_round: BTreeMap<&Round, BTreeSet<String>> = BTreeMap::new();
                for s in reached {
                    for t in self.outgoing(s) {
                        by_round.entry(&t.round).or_default().insert(t.target.clone());
                    }
                }
                for (round, targets) in by_round {
                    count += 1;
                    if count > cap {
                        return Err(limit());
                    }
                    next.push((trace.extended(round.clone()), targets));
                }
            }
            if next.is_empty() {
                break;
            }
            layer = next;
        }
        Ok(())
    }

    pub fn reachable_states(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([self.initial.clone()]);
        let mut queue = VecDeque::from([self.initial.as_str()]);
        while let Some(s) = queue.pop_front() {
            for t in self.outgoing(s) {
                if seen.insert(t.target.clone()) {
                    queue.push_back(&t.target);
                }
            }
        }
        seen
    }

    /// Drops states (and their transitions) not reachable from the initial state.
    pub fn restrict_to_reachable(&self) -> Transducer {
        let keep = self.reachable_states();
        let delta = self
            .delta
            .iter()
            .filter(|t| keep.contains(&t.source))
            .cloned()
            .collect();
        Transducer::from_checked(self.signature.clone(), keep, self.initial.clone(), delta)
    }

    /// At most one target per (state, round).
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.delta.iter().all(|t| seen.insert((&t.source, &t.round)))
    }

    /// Subset construction over reachable subsets. States are named `d0, d1, ...` in
    /// breadth-first discovery order.
    pub fn determinize(&self) -> Transducer {
        let start = BTreeSet::from([self.initial.clone()]);
        let mut ids: BTreeMap<BTreeSet<String>, String> = BTreeMap::new();
        ids.insert(start.clone(), "d0".to_string());
        let mut queue = VecDeque::from([start]);
        let mut delta = BTreeSet::new();
        while let Some(set) = queue.pop_front() {
            let from = ids[&set].clone();
            let mut by_round: BTreeMap<&Round, BTreeSet<String>> = BTreeMap::new();
            for s in &set {
                for t in self.outgoing(s) {
                    by_round.entry(&t.round).or_default().insert(t.target.clone());
                }
            }
            for (round, targets) in by_round {
                let next_id = format!("d{}", ids.len());
                let to = ids.entry(targets.clone()).or_insert_with(|| {
                    queue.push_back(targets);
                    next_id
                });
                delta.insert(Transition::new(from.clone(), round.clone(), to.clone()));
            }
        }
        let states = ids.into_values().collect();
        Transducer::from_checked(self.signature.clone(), states, "d0".to_string(), delta)
    }

    /// Renames states through `f`; transitions collapse as a set.
    pub(crate) fn map_states(&self, f: impl Fn(&str) -> String) -> Transducer {
        let states = self.states.iter().map(|s| f(s)).collect();
        let delta = self
            .delta
            .iter()
            .map(|t| Transition::new(f(&t.source), t.round.clone(), f(&t.target)))
            .collect();
        Transducer::from_checked(self.signature.clone(), states, f(&self.initial), delta)
    }

    /// Short stable digest of the canonical content, used to tag derived results.
    pub fn fingerprint(&self) -> String {
        let mut h = Fnv::new();
        h.write(self.signature.to_string().as_bytes());
        for s in &self.states {
            h.write(s.as_bytes());
            h.write(&[0]);
        }
        h.write(self.initial.as_bytes());
        for t in &self.delta {
            h.write(t.source.as_bytes());
            h.write(t.round.to_string().as_bytes());
            h.write(t.target.as_bytes());
        }
        format!("{:016x}", h.finish())
    }
}

pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
        self.0 ^= 0xff;
        self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

/// Compares the trace languages of `a` and `b` on traces of length at most `k`.
///
/// Explores pairs of reached state sets, so the cost is bounded by the number of distinct
/// subset pairs rather than the number of traces.
pub fn bounded_trace_equivalent(a: &Transducer, b: &Transducer, k: usize) -> Result<bool> {
    Ok(first_difference(a, b, k, DEFAULT_TRACE_CAP)?.is_none())
}

/// A shortest trace of length at most `k` in exactly one of the two languages.
pub fn first_difference(
    a: &Transducer,
    b: &Transducer,
    k: usize,
    cap: usize,
) -> Result<Option<Trace>> {
    type Pair = (BTreeSet<String>, BTreeSet<String>);
    let start: Pair = (
        BTreeSet::from([a.initial.clone()]),
        BTreeSet::from([b.initial.clone()]),
    );
    let mut seen: BTreeSet<Pair> = BTreeSet::from([start.clone()]);
    let mut layer = vec![(start, Trace::empty())];
    for _ in 0..k {
        let mut next = Vec::new();
        for ((sa, sb), trace) in &layer {
            let rounds: BTreeSet<&Round> = sa
                .iter()
                .flat_map(|s| a.outgoing(s))
                .chain(sb.iter().flat_map(|s| b.outgoing(s)))
                .map(|t| &t.round)
                .collect();
            for round in rounds {
                let na = a.post(sa, round);
                let nb = b.post(sb, round);
                if na.is_empty() != nb.is_empty() {
                    return Ok(Some(trace.extended(round.clone())));
                }
                let pair = (na, nb);
                if !seen.contains(&pair) {
                    if seen.len() >= cap {
                        return Err(Error::ResourceLimit {
                            what: "bounded equivalence check",
                            limit: cap,
                        });
                    }
                    seen.insert(pair.clone());
                    next.push((pair, trace.extended(round.clone())));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn r(names: &[&str]) -> Round {
        Round::from_names(names).unwrap()
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validate_accepts_two_state_cycle() {
        let t = fixtures::fix1();
        assert_eq!(t.states().len(), 2);
        assert_eq!(t.transitions().len(), 2);
    }

    #[test]
    fn validate_reports_unknown_label() {
        let sig = Signature::from_names(&["a"], &["b"]).unwrap();
        let err = Transducer::from_parts(sig, &["s0", "s1"], "s0", &[("s0", &["c"], "s1")]);
        assert_eq!(err, Err(Error::UnknownLabel("c".into())));
    }

    #[test]
    fn validate_reports_missing_initial() {
        let sig = Signature::from_names(&["a"], &["b"]).unwrap();
        let err = Transducer::from_parts(sig, &["s0", "s1"], "S9", &[]);
        assert_eq!(err, Err(Error::MissingInitial("S9".into())));
    }

    #[test]
    fn validate_collects_every_violation() {
        let raw = RawTransducer {
            signature: Signature::from_names(&["a"], &[]).unwrap(),
            states: vec!["s0".into()],
            initial: "s9".into(),
            transitions: vec![("s0".into(), vec!["z".into()], "s7".into())],
        };
        match raw.validate() {
            Err(Error::Invalid(list)) => {
                assert!(list.contains(&Error::MissingInitial("s9".into())));
                assert!(list.contains(&Error::UnknownState("s7".into())));
                assert!(list.contains(&Error::UnknownLabel("z".into())));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_transitions_collapse() {
        let sig = Signature::from_names(&["a"], &[]).unwrap();
        let t = Transducer::from_parts(
            sig,
            &["s"],
            "s",
            &[("s", &["a"], "s"), ("s", &["a"], "s")],
        )
        .unwrap();
        assert_eq!(t.transitions().len(), 1);
    }

    #[test]
    fn step_on_fixtures() {
        let t1 = fixtures::fix1();
        assert_eq!(t1.step("s0", &r(&["a"])).unwrap(), set(&["s1"]));
        assert!(t1.step("s0", &r(&["b"])).unwrap().is_empty());
        assert_eq!(
            t1.step("nope", &r(&["a"])),
            Err(Error::UnknownState("nope".into()))
        );
        let f3 = fixtures::fix3();
        assert_eq!(f3.step("r0", &r(&["i"])).unwrap(), set(&["P", "Q"]));
    }

    #[test]
    fn run_and_accepts() {
        let t1 = fixtures::fix1();
        assert_eq!(t1.run(&Trace::empty()), set(&["s0"]));
        let ab = Trace::from_names(&[&["a"], &["b"]]).unwrap();
        assert_eq!(t1.run(&ab), set(&["s0"]));
        assert!(t1.run(&Trace::from_names(&[&["b"]]).unwrap()).is_empty());
        assert!(t1.accepts(&Trace::empty()));
        assert!(t1.accepts(&Trace::from_names(&[&["a"]]).unwrap()));
        assert!(!t1.accepts(&Trace::from_names(&[&["a"], &["a"]]).unwrap()));
    }

    #[test]
    fn traces_upto_fix1() {
        let t1 = fixtures::fix1();
        let zero = t1.traces_upto(0).unwrap();
        assert_eq!(zero.traces(), &BTreeSet::from([Trace::empty()]));
        let two = t1.traces_upto(2).unwrap();
        let expected: Vec<Trace> = vec![
            Trace::empty(),
            Trace::from_names(&[&["a"]]).unwrap(),
            Trace::from_names(&[&["a"], &["b"]]).unwrap(),
        ];
        assert_eq!(two.iter().cloned().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn traces_upto_respects_cap() {
        let sig = Signature::from_names(&["a", "b"], &[]).unwrap();
        let t = Transducer::from_parts(
            sig,
            &["s"],
            "s",
            &[("s", &["a"], "s"), ("s", &["b"], "s")],
        )
        .unwrap();
        assert!(matches!(
            t.traces_upto_capped(10, 100),
            Err(Error::ResourceLimit { .. })
        ));
        assert_eq!(t.traces_upto_capped(3, 100).unwrap().len(), 15);
    }

    #[test]
    fn witness_traces_fix1() {
        let t1 = fixtures::fix1();
        assert_eq!(
            t1.witness_traces_upto("s0", 0).unwrap().traces(),
            &BTreeSet::from([Trace::empty()])
        );
        let w = t1.witness_traces_upto("s1", 3).unwrap();
        let expected = BTreeSet::from([
            Trace::from_names(&[&["a"]]).unwrap(),
            Trace::from_names(&[&["a"], &["b"], &["a"]]).unwrap(),
        ]);
        assert_eq!(w.traces(), &expected);
        assert!(t1.witness_traces_upto("s1", 0).unwrap().is_empty());
    }

    #[test]
    fn dualize_swaps_and_is_involutive() {
        let sig = Signature::from_names(&["a"], &["b"]).unwrap();
        let d = dualize(&sig);
        assert_eq!(d, Signature::from_names(&["b"], &["a"]).unwrap());
        assert_eq!(dualize(&d), sig);
        assert_eq!(dualize(&Signature::empty()), Signature::empty());
    }

    #[test]
    fn project_trace_examples() {
        let full = Signature::from_names(&["a", "b"], &["c"]).unwrap();
        let keep = Signature::from_names(&["a"], &["c"]).unwrap();
        let t = Trace::from_names(&[&["a", "b"], &["c"]]).unwrap();
        assert_eq!(
            project_trace(&t, &full, &keep).unwrap(),
            Trace::from_names(&[&["a"], &["c"]]).unwrap()
        );
        assert_eq!(project_trace(&t, &full, &full).unwrap(), t);
        let only_a = Signature::from_names(&["a"], &[]).unwrap();
        let emptied = project_trace(&Trace::from_names(&[&["b"]]).unwrap(), &full, &only_a).unwrap();
        assert_eq!(emptied, Trace::new(vec![Round::empty()]));
        let foreign = Signature::from_names(&["z"], &[]).unwrap();
        assert!(matches!(
            project_trace(&t, &full, &foreign),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn signature_rejects_overlap_and_bad_labels() {
        assert_eq!(
            Signature::from_names(&["a"], &["a"]),
            Err(Error::LabelClash("a".into()))
        );
        assert!(matches!(Label::new("9x"), Err(Error::InvalidLabel(_))));
        assert!(matches!(Label::new(""), Err(Error::InvalidLabel(_))));
        assert!(Label::new("_x9").is_ok());
    }

    #[test]
    fn trace_order_is_length_first() {
        let long = Trace::from_names(&[&["a"], &["a"]]).unwrap();
        let short = Trace::from_names(&[&["b"]]).unwrap();
        assert!(short < long);
        assert!(Trace::empty() < short);
    }

    #[test]
    fn determinize_preserves_language() {
        let f3 = fixtures::fix3();
        let d = f3.determinize();
        assert!(d.is_deterministic());
        assert!(!f3.is_deterministic());
        assert_eq!(f3.traces_upto(5).unwrap(), d.traces_upto(5).unwrap());
    }

    #[test]
    fn bounded_equivalence_finds_separating_trace() {
        let t1 = fixtures::fix1();
        let sig = t1.signature().clone();
        let looped = Transducer::from_parts(
            sig,
            &["s0", "s1"],
            "s0",
            &[("s0", &["a"], "s1"), ("s1", &["b"], "s0"), ("s1", &["a"], "s1")],
        )
        .unwrap();
        assert!(bounded_trace_equivalent(&t1, &t1, 6).unwrap());
        assert!(bounded_trace_equivalent(&t1, &looped, 1).unwrap());
        assert_eq!(
            first_difference(&t1, &looped, 4, 1000).unwrap(),
            Some(Trace::from_names(&[&["a"], &["a"]]).unwrap())
        );
    }
}
