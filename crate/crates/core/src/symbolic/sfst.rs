use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::expr::{eval, guard_equiv, Env, Expr, GuardMode, Type, Value};
use crate::coherence::{CoherenceRelation, Engine, Lts, MinimizeOptions, Minimized};
use crate::error::{Error, Result};
use crate::kernel::{
    check_state_name, is_identifier, Fnv, Label, Polarity, Round, Signature, Trace, Transducer,
    Transition,
};

/// Cap on the number of configurations an expansion may visit.
pub const DEFAULT_EXPANSION_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymTransition {
    pub source: String,
    pub round: Round,
    pub guard: Expr,
    /// Target register or output port, and the value assigned to it.
    pub updates: BTreeMap<String, Expr>,
    pub target: String,
}

impl SymTransition {
    pub fn new(
        source: impl Into<String>,
        round: Round,
        guard: Expr,
        updates: impl IntoIterator<Item = (String, Expr)>,
        target: impl Into<String>,
    ) -> Self {
        SymTransition {
            source: source.into(),
            round,
            guard,
            updates: updates.into_iter().collect(),
            target: target.into(),
        }
    }

    /// A transition with guard `true` and no updates.
    pub fn plain(source: impl Into<String>, round: Round, target: impl Into<String>) -> Self {
        SymTransition::new(source, round, Expr::Bool(true), [], target)
    }
}

/// Control states, integer registers (initially 0) and guarded, updating transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sfst {
    signature: Signature,
    states: BTreeSet<String>,
    registers: BTreeSet<String>,
    initial: String,
    delta: BTreeSet<SymTransition>,
}

impl Sfst {
    pub fn new(
        signature: Signature,
        states: impl IntoIterator<Item = String>,
        registers: impl IntoIterator<Item = String>,
        initial: impl Into<String>,
        transitions: impl IntoIterator<Item = SymTransition>,
    ) -> Result<Self> {
        let initial = initial.into();
        let mut violations = Vec::new();
        let mut state_set = BTreeSet::new();
        for s in states {
            if let Err(e) = check_state_name(&s) {
                violations.push(e);
            } else if !state_set.insert(s.clone()) {
                violations.push(Error::Duplicate(s));
            }
        }
        if !state_set.contains(&initial) {
            violations.push(Error::MissingInitial(initial.clone()));
        }
        let mut reg_set = BTreeSet::new();
        for r in registers {
            if !is_identifier(&r) {
                violations.push(Error::InvalidLabel(r));
            } else if signature.lookup(&r).is_some() || !reg_set.insert(r.clone()) {
                violations.push(Error::Duplicate(r));
            }
        }
        let mut delta = BTreeSet::new();
        for mut t in transitions {
            let before = violations.len();
            for s in [&t.source, &t.target] {
                if !state_set.contains(s) {
                    violations.push(Error::UnknownState(s.clone()));
                }
            }
            if let Err(e) = t.round.validate(&signature) {
                violations.push(e);
            }
            if violations.len() == before {
                check_transition(&signature, &reg_set, &t, &mut violations);
            }
            if violations.len() == before {
                t.updates
                    .retain(|target, rhs| !(reg_set.contains(target) && *rhs == Expr::var(target)));
                delta.insert(t);
            }
        }
        if let Some(e) = Error::from_violations(violations) {
            return Err(e);
        }
        Ok(Sfst {
            signature,
            states: state_set,
            registers: reg_set,
            initial,
            delta,
        })
    }

    /// The same transitions with guard `true` and no updates.
    pub fn from_transducer(t: &Transducer) -> Sfst {
        Sfst {
            signature: t.signature().clone(),
            states: t.states().clone(),
            registers: BTreeSet::new(),
            initial: t.initial().to_string(),
            delta: t
                .transitions()
                .iter()
                .map(|tr| SymTransition::plain(tr.source.clone(), tr.round.clone(), tr.target.clone()))
                .collect(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn registers(&self) -> &BTreeSet<String> {
        &self.registers
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn transitions(&self) -> &BTreeSet<SymTransition> {
        &self.delta
    }

    pub fn outgoing<'a>(&'a self, s: &'a str) -> impl Iterator<Item = &'a SymTransition> + 'a {
        self.delta.iter().filter(move |t| t.source == s)
    }

    /// The control skeleton: rounds only, guards and updates dropped.
    pub fn skeleton(&self) -> Transducer {
        let delta = self
            .delta
            .iter()
            .map(|t| Transition::new(t.source.clone(), t.round.clone(), t.target.clone()))
            .collect();
        Transducer::from_checked(
            self.signature.clone(),
            self.states.clone(),
            self.initial.clone(),
            delta,
        )
    }

    /// Input ports read by some guard or update and output ports assigned by some update.
    pub fn valued_ports(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for t in &self.delta {
            let mut names = t.guard.free_vars();
            for (target, rhs) in &t.updates {
                names.insert(target.clone());
                names.extend(rhs.free_vars());
            }
            for l in t.round.events() {
                if names.contains(l.as_str()) {
                    out.insert(l.clone());
                }
            }
        }
        out
    }

    pub(crate) fn map_states(&self, f: &dyn Fn(&str) -> String) -> Sfst {
        Sfst {
            signature: self.signature.clone(),
            states: self.states.iter().map(|s| f(s)).collect(),
            registers: self.registers.clone(),
            initial: f(&self.initial),
            delta: self
                .delta
                .iter()
                .map(|t| SymTransition {
                    source: f(&t.source),
                    target: f(&t.target),
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn restrict_to_reachable(&self) -> Sfst {
        let keep = self.skeleton().reachable_states();
        Sfst {
            signature: self.signature.clone(),
            states: keep.clone(),
            registers: self.registers.clone(),
            initial: self.initial.clone(),
            delta: self
                .delta
                .iter()
                .filter(|t| keep.contains(&t.source))
                .cloned()
                .collect(),
        }
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Fnv::new();
        h.write(self.to_string().as_bytes());
        format!("{:016x}", h.finish())
    }
}

impl fmt::Display for Sfst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::write_sfst(self))
    }
}

fn check_transition(
    sig: &Signature,
    registers: &BTreeSet<String>,
    t: &SymTransition,
    violations: &mut Vec<Error>,
) {
    let readable = |name: &str| {
        registers.contains(name)
            || t.round
                .events()
                .iter()
                .any(|l| l.as_str() == name && sig.polarity(l) == Some(Polarity::Input))
    };
    match t.guard.type_of(&readable) {
        Ok(Type::Bool) => {}
        Ok(Type::Int) => violations.push(Error::Type(format!("guard `{}` is not boolean", t.guard))),
        Err(e) => violations.push(e),
    }
    for (target, rhs) in &t.updates {
        let is_output = t
            .round
            .events()
            .iter()
            .any(|l| l.as_str() == target && sig.polarity(l) == Some(Polarity::Output));
        if !registers.contains(target) && !is_output {
            violations.push(Error::UnboundReference(format!(
                "{target} (update target must be a register or an output port of the round)"
            )));
        }
        match rhs.type_of(&readable) {
            Ok(Type::Int) => {}
            Ok(Type::Bool) => {
                violations.push(Error::Type(format!("update `{target} := {rhs}` is not integer")))
            }
            Err(e) => violations.push(e),
        }
    }
}

/// Every guard is `true` and no transition updates anything.
pub fn is_symbolic_protocol(t: &Sfst) -> bool {
    t.delta.iter().all(|tr| tr.guard.is_true() && tr.updates.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortValue {
    Unit,
    Int(i64),
}

/// A round whose events carry values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValuedRound(pub BTreeMap<Label, PortValue>);

pub type ValuedTrace = Vec<ValuedRound>;

impl ValuedRound {
    pub fn new(events: impl IntoIterator<Item = (Label, PortValue)>) -> Self {
        ValuedRound(events.into_iter().collect())
    }

    /// `[("x", Some(2)), ("r", None)]` style construction.
    pub fn from_pairs(events: &[(&str, Option<i64>)]) -> Result<Self> {
        events
            .iter()
            .map(|(n, v)| {
                Ok((
                    Label::new(*n)?,
                    v.map_or(PortValue::Unit, PortValue::Int),
                ))
            })
            .collect::<Result<_>>()
            .map(ValuedRound)
    }

    pub fn round(&self) -> Round {
        Round::new(self.0.keys().cloned())
    }
}

impl fmt::Display for ValuedRound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (l, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match v {
                PortValue::Unit => write!(f, "{l}")?,
                PortValue::Int(x) => write!(f, "{l}={x}")?,
            }
        }
        f.write_str("}")
    }
}

/// A control state with register values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub state: String,
    pub registers: BTreeMap<String, i64>,
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&config_name(&self.state, &self.registers))
    }
}

fn config_name(state: &str, registers: &BTreeMap<String, i64>) -> String {
    if registers.is_empty() {
        return state.to_string();
    }
    let vals: Vec<String> = registers.iter().map(|(r, v)| format!("{r}={v}")).collect();
    format!("{state}[{}]", vals.join(","))
}

fn env_for(t: &SymTransition, regs: &BTreeMap<String, i64>, ports: &BTreeMap<Label, Value>) -> Env {
    let mut env: Env = regs.iter().map(|(r, v)| (r.clone(), Value::Int(*v))).collect();
    for (l, v) in ports {
        if t.round.contains(l) {
            env.insert(l.to_string(), *v);
        }
    }
    env
}

/// Evaluates guard and updates. `None` when the guard is false.
fn fire(t: &SymTransition, env: &Env) -> Result<Option<BTreeMap<String, i64>>> {
    match eval(&t.guard, env)? {
        Value::Bool(true) => {}
        Value::Bool(false) => return Ok(None),
        other => return Err(Error::Type(format!("guard `{}` evaluated to {other}", t.guard))),
    }
    let mut out = BTreeMap::new();
    for (target, rhs) in &t.updates {
        match eval(rhs, env)? {
            Value::Int(v) => {
                out.insert(target.clone(), v);
            }
            other => {
                return Err(Error::Type(format!("update `{target} := {rhs}` evaluated to {other}")))
            }
        }
    }
    Ok(Some(out))
}

/// Configurations reachable by `trace` from the initial state with all registers 0.
pub fn sfst_run(t: &Sfst, trace: &[ValuedRound]) -> Result<BTreeSet<Config>> {
    let zero = t.registers.iter().map(|r| (r.clone(), 0)).collect();
    let mut current = BTreeSet::from([Config {
        state: t.initial.clone(),
        registers: zero,
    }]);
    for (index, vr) in trace.iter().enumerate() {
        let at = |e: Error| Error::AtRound {
            index,
            source: Box::new(e),
        };
        vr.round().validate(&t.signature).map_err(at)?;
        let ports: BTreeMap<Label, Value> = vr
            .0
            .iter()
            .map(|(l, v)| {
                let v = match v {
                    PortValue::Unit => Value::Unit,
                    PortValue::Int(x) => Value::Int(*x),
                };
                (l.clone(), v)
            })
            .collect();
        let round = vr.round();
        let mut next = BTreeSet::new();
        for cfg in &current {
            for tr in t.outgoing(&cfg.state).filter(|tr| tr.round == round) {
                let env = env_for(tr, &cfg.registers, &ports);
                let Some(assigned) = fire(tr, &env).map_err(at)? else {
                    continue;
                };
                let mut regs = cfg.registers.clone();
                let mut consistent = true;
                for (target, v) in assigned {
                    if t.registers.contains(&target) {
                        regs.insert(target, v);
                    } else if vr.0.get(t.signature.lookup(&target).expect("validated port"))
                        != Some(&PortValue::Int(v))
                    {
                        consistent = false;
                    }
                }
                if consistent {
                    next.insert(Config {
                        state: tr.target.clone(),
                        registers: regs,
                    });
                }
            }
        }
        current = next;
        if current.is_empty() {
            break;
        }
    }
    Ok(current)
}

/// Name of the explicit label for `label` carrying `value`: `x_2`, `x_n1`.
pub fn valued_label(label: &Label, value: i64) -> String {
    if value < 0 {
        format!("{label}_n{}", value.unsigned_abs())
    } else {
        format!("{label}_{value}")
    }
}

/// An explicit transducer equivalent to an SFST on a bounded value domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub transducer: Transducer,
    /// Ports whose events carry a value; the others keep their bare names.
    pub valued: BTreeSet<Label>,
    pub lo: i64,
    pub hi: i64,
}

impl Expansion {
    /// The explicit trace for a valued trace, or `None` when some value cannot be expressed.
    pub fn encode(&self, trace: &[ValuedRound]) -> Option<Trace> {
        let sig = self.transducer.signature();
        let mut rounds = Vec::new();
        for vr in trace {
            let mut events = BTreeSet::new();
            for (l, v) in &vr.0 {
                let name = if self.valued.contains(l) {
                    match v {
                        PortValue::Int(x) if (self.lo..=self.hi).contains(x) => valued_label(l, *x),
                        _ => return None,
                    }
                } else {
                    l.to_string()
                };
                events.insert(sig.lookup(&name)?.clone());
            }
            rounds.push(Round::new(events));
        }
        Some(Trace::new(rounds))
    }
}

pub fn expand(t: &Sfst, lo: i64, hi: i64) -> Result<Expansion> {
    expand_with(t, lo, hi, &t.valued_ports(), DEFAULT_EXPANSION_CAP)
}

/// Explores reachable configurations with port values drawn from `lo..=hi`. Ports in `valued`
/// become one label per value; the rest stay control-only.
pub fn expand_with(
    t: &Sfst,
    lo: i64,
    hi: i64,
    valued: &BTreeSet<Label>,
    cap: usize,
) -> Result<Expansion> {
    for tr in &t.delta {
        let lits = tr
            .guard
            .literals()
            .into_iter()
            .chain(tr.updates.values().flat_map(Expr::literals));
        for v in lits {
            if !(lo..=hi).contains(&v) {
                return Err(Error::DomainExceeded {
                    name: "literal".into(),
                    value: v,
                    lo,
                    hi,
                });
            }
        }
    }
    let sig = expanded_signature(t.signature(), valued, lo, hi)?;
    let label = |l: &Label, v: Option<i64>| -> Label {
        let name = match v {
            Some(v) => valued_label(l, v),
            None => l.to_string(),
        };
        sig.lookup(&name).expect("expanded label").clone()
    };
    let zero: BTreeMap<String, i64> = t.registers.iter().map(|r| (r.clone(), 0)).collect();
    let start = (t.initial.clone(), zero);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut delta = BTreeSet::new();
    let domain: Vec<i64> = (lo..=hi).collect();
    while let Some((state, regs)) = queue.pop_front() {
        let from = config_name(&state, &regs);
        for tr in t.outgoing(&state) {
            let inputs: Vec<&Label> = tr
                .round
                .events()
                .iter()
                .filter(|l| valued.contains(*l) && t.signature.polarity(l) == Some(Polarity::Input))
                .collect();
            for in_vals in assignments(&domain, inputs.len()) {
                let ports: BTreeMap<Label, Value> = inputs
                    .iter()
                    .zip(&in_vals)
                    .map(|(l, v)| ((*l).clone(), Value::Int(*v)))
                    .collect();
                let env = env_for(tr, &regs, &ports);
                let Some(assigned) = fire(tr, &env)? else {
                    continue;
                };
                let mut next = regs.clone();
                let mut fixed_outputs = BTreeMap::new();
                for (target, v) in assigned {
                    if t.registers.contains(&target) {
                        if !(lo..=hi).contains(&v) {
                            return Err(Error::DomainExceeded {
                                name: target,
                                value: v,
                                lo,
                                hi,
                            });
                        }
                        next.insert(target, v);
                    } else {
                        fixed_outputs.insert(target, v);
                    }
                }
                if fixed_outputs.values().any(|v| !(lo..=hi).contains(v)) {
                    continue;
                }
                let free_outputs: Vec<&Label> = tr
                    .round
                    .events()
                    .iter()
                    .filter(|l| {
                        valued.contains(*l)
                            && t.signature.polarity(l) == Some(Polarity::Output)
                            && !fixed_outputs.contains_key(l.as_str())
                    })
                    .collect();
                for out_vals in assignments(&domain, free_outputs.len()) {
                    let mut events = BTreeSet::new();
                    for l in tr.round.events() {
                        let v = if let Some(v) = fixed_outputs.get(l.as_str()) {
                            Some(*v)
                        } else if let Some(i) = inputs.iter().position(|x| *x == l) {
                            Some(in_vals[i])
                        } else {
                            free_outputs
                                .iter()
                                .position(|x| *x == l)
                                .map(|i| out_vals[i])
                        };
                        events.insert(label(l, v));
                    }
                    let target = (tr.target.clone(), next.clone());
                    delta.insert(Transition::new(
                        from.clone(),
                        Round::new(events),
                        config_name(&target.0, &target.1),
                    ));
                    if seen.insert(target.clone()) {
                        if seen.len() > cap {
                            return Err(Error::ResourceLimit {
                                what: "expansion",
                                limit: cap,
                            });
                        }
                        queue.push_back(target);
                    }
                }
            }
        }
    }
    let states = seen.iter().map(|(s, r)| config_name(s, r)).collect();
    let initial = config_name(&t.initial, &t.registers.iter().map(|r| (r.clone(), 0)).collect());
    Ok(Expansion {
        transducer: Transducer::from_checked(sig, states, initial, delta),
        valued: valued.clone(),
        lo,
        hi,
    })
}

fn assignments(domain: &[i64], n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                domain.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

fn expanded_signature(
    sig: &Signature,
    valued: &BTreeSet<Label>,
    lo: i64,
    hi: i64,
) -> Result<Signature> {
    let mut inputs = BTreeSet::new();
    let mut outputs = BTreeSet::new();
    for l in sig.universe() {
        let names: Vec<String> = if valued.contains(&l) {
            (lo..=hi).map(|v| valued_label(&l, v)).collect()
        } else {
            vec![l.to_string()]
        };
        let side = if sig.polarity(&l) == Some(Polarity::Input) {
            &mut inputs
        } else {
            &mut outputs
        };
        for n in names {
            let fresh = Label::new(n.clone())?;
            if !side.insert(fresh) {
                return Err(Error::Duplicate(n));
            }
        }
    }
    if let Some(clash) = inputs.intersection(&outputs).next() {
        return Err(Error::Duplicate(clash.to_string()));
    }
    Signature::new(inputs, outputs)
}

/// Per-target equivalence of update sets.
pub fn updates_equiv(
    a: &BTreeMap<String, Expr>,
    b: &BTreeMap<String, Expr>,
    mode: GuardMode,
) -> Result<bool> {
    if !a.keys().eq(b.keys()) {
        return Ok(false);
    }
    for (x, y) in a.values().zip(b.values()) {
        if !guard_equiv(x, y, mode)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Labels are classes of (round, guard, updates) under `mode`.
fn sfst_lts(t: &Sfst, mode: GuardMode) -> Result<Lts> {
    let mut reps: Vec<&SymTransition> = Vec::new();
    let mut label_of: Vec<usize> = Vec::new();
    for tr in &t.delta {
        let mut found = None;
        for (i, r) in reps.iter().enumerate() {
            if r.round == tr.round
                && guard_equiv(&r.guard, &tr.guard, mode)?
                && updates_equiv(&r.updates, &tr.updates, mode)?
            {
                found = Some(i);
                break;
            }
        }
        label_of.push(found.unwrap_or_else(|| {
            reps.push(tr);
            reps.len() - 1
        }));
    }
    let rounds = reps.iter().map(|r| r.round.clone()).collect();
    Ok(Lts::build(
        &t.states,
        &t.initial,
        t.delta
            .iter()
            .zip(label_of)
            .map(|(tr, l)| (tr.source.as_str(), l, tr.target.as_str())),
        rounds,
    ))
}

fn require_protocol(t: &Sfst, p: &Sfst) -> Result<Transducer> {
    if !is_symbolic_protocol(p) {
        return Err(Error::NotAProtocol(
            "protocol transitions must have guard `true` and no updates".into(),
        ));
    }
    t.signature.require_same_universe(&p.signature, "symbolic protocol")?;
    Ok(p.skeleton())
}

/// Coherent simulation on control states. Guards and updates must match under `mode`; the
/// protocol test runs on the control skeleton.
pub fn sfst_coherent_simulation(
    t: &Sfst,
    p: &Sfst,
    mode: GuardMode,
) -> Result<CoherenceRelation> {
    let skeleton = require_protocol(t, p)?;
    let lts = sfst_lts(t, mode)?;
    let rel = lts.coherent_simulation(&skeleton);
    Ok(CoherenceRelation {
        pairs: lts.relation_pairs(&rel),
        transducer_id: t.fingerprint(),
        protocol_id: p.fingerprint(),
        guard_mode: Some(mode),
    })
}

pub fn sfst_coherent_minimize(
    t: &Sfst,
    p: &Sfst,
    mode: GuardMode,
    opts: MinimizeOptions,
) -> Result<Minimized<Sfst>> {
    let skeleton = require_protocol(t, p)?;
    let lts = move |m: &Sfst| sfst_lts(m, mode);
    engine(&lts).coherent_minimize(t, &skeleton, opts)
}

/// Guard-sensitive partition refinement.
pub fn sfst_bisim_minimize(
    t: &Sfst,
    mode: GuardMode,
    opts: MinimizeOptions,
) -> Result<Minimized<Sfst>> {
    let lts = move |m: &Sfst| sfst_lts(m, mode);
    engine(&lts).bisim_minimize(t, opts)
}

fn engine<'a>(lts: &'a dyn Fn(&Sfst) -> Result<Lts>) -> Engine<'a, Sfst> {
    Engine {
        lts,
        rename: &|m: &Sfst, f: &dyn Fn(&str) -> String| m.map_states(f),
        restrict: &Sfst::restrict_to_reachable,
        states: &|m: &Sfst| m.states.clone(),
    }
}
