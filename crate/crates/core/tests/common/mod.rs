//! Independent oracles: brute force over relations, explicit trace sets and regex derivatives.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cohmin_core::kernel::{Label, Round, Signature, Trace, Transducer};
use cohmin_core::protocol::ProtocolRegex;

/// Whether `round` can follow some protocol-legal trace reaching `s`, found by enumerating
/// protocol traces up to the product size (enough to reach every reachable product pair).
pub fn extendable_by_enumeration(t: &Transducer, p: &Transducer, s: &str, round: &Round) -> bool {
    let bound = t.states().len() * p.states().len();
    let traces = p.traces_upto(bound).expect("oracle enumeration");
    let found = traces
        .iter()
        .any(|w| t.run(w).contains(s) && p.accepts(&w.extended(round.clone())));
    found
}

/// Union of every relation satisfying both coherent-simulation conditions, by enumerating all
/// subsets of the pairs that pass the protocol condition.
pub fn brute_force_simulation(t: &Transducer, p: &Transducer) -> BTreeSet<(String, String)> {
    let names: Vec<&String> = t.states().iter().collect();
    let n = names.len();
    assert!(n * n <= 16, "oracle limited to four states");
    let enabled = |s: &str| -> BTreeSet<Round> { t.outgoing(s).map(|x| x.round.clone()).collect() };
    let idx = |s: &str| names.iter().position(|x| x.as_str() == s).unwrap();
    let bit = |a: usize, b: usize| 1u32 << (a * n + b);

    let mut admissible = 0u32;
    for a in 0..n {
        for b in 0..n {
            let extra: Vec<Round> = enabled(names[a])
                .difference(&enabled(names[b]))
                .cloned()
                .collect();
            if extra
                .iter()
                .all(|v| !extendable_by_enumeration(t, p, names[b], v))
            {
                admissible |= bit(a, b);
            }
        }
    }
    // For pair (a, b): one requirement per move of b; each lists the pairs that would match it.
    let mut requirements: Vec<Vec<u32>> = vec![Vec::new(); n * n];
    for a in 0..n {
        for b in 0..n {
            for mb in t.outgoing(names[b]) {
                let mut mask = 0;
                for ma in t.outgoing(names[a]) {
                    if ma.round == mb.round {
                        mask |= bit(idx(&ma.target), idx(&mb.target));
                    }
                }
                requirements[a * n + b].push(mask);
            }
        }
    }
    let coherent = |r: u32| {
        (0..n * n)
            .filter(|i| r & (1 << i) != 0)
            .all(|i| requirements[i].iter().all(|m| m & r != 0))
    };
    let mut union = 0u32;
    let mut sub = admissible;
    loop {
        if sub & !union != 0 && coherent(sub) {
            union |= sub;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & admissible;
    }
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if union & bit(a, b) != 0 {
                out.insert((names[a].clone(), names[b].clone()));
            }
        }
    }
    out
}

/// `⟦T⟧ ∩ ⟦P⟧` truncated at `k`, computed on explicit trace sets.
pub fn protocol_traces(t: &Transducer, p: &Transducer, k: usize) -> BTreeSet<Trace> {
    let a = t.traces_upto(k).expect("oracle enumeration");
    let b = p.traces_upto(k).expect("oracle enumeration");
    a.traces().intersection(b.traces()).cloned().collect()
}

pub fn explicit_coherent_equiv(t: &Transducer, u: &Transducer, p: &Transducer, k: usize) -> bool {
    protocol_traces(t, p, k) == protocol_traces(u, p, k)
}

/// Regex with the extra constants needed by derivatives.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Re {
    Nothing,
    Eps,
    Lit(String),
    Cat(Box<Re>, Box<Re>),
    Alt(Box<Re>, Box<Re>),
    Star(Box<Re>),
}

pub fn to_re(r: &ProtocolRegex) -> Re {
    match r {
        ProtocolRegex::Event(l) => Re::Lit(l.to_string()),
        ProtocolRegex::Concat(xs) => xs
            .iter()
            .map(to_re)
            .reduce(|a, b| Re::Cat(Box::new(a), Box::new(b)))
            .unwrap_or(Re::Eps),
        ProtocolRegex::Alt(xs) => xs
            .iter()
            .map(to_re)
            .reduce(|a, b| Re::Alt(Box::new(a), Box::new(b)))
            .unwrap_or(Re::Nothing),
        ProtocolRegex::Star(x) => Re::Star(Box::new(to_re(x))),
    }
}

fn nullable(r: &Re) -> bool {
    match r {
        Re::Nothing | Re::Lit(_) => false,
        Re::Eps | Re::Star(_) => true,
        Re::Cat(a, b) => nullable(a) && nullable(b),
        Re::Alt(a, b) => nullable(a) || nullable(b),
    }
}

fn nonempty(r: &Re) -> bool {
    match r {
        Re::Nothing => false,
        Re::Eps | Re::Lit(_) | Re::Star(_) => true,
        Re::Cat(a, b) => nonempty(a) && nonempty(b),
        Re::Alt(a, b) => nonempty(a) || nonempty(b),
    }
}

fn cat(a: Re, b: Re) -> Re {
    match (&a, &b) {
        (Re::Nothing, _) | (_, Re::Nothing) => Re::Nothing,
        (Re::Eps, _) => b,
        (_, Re::Eps) => a,
        _ => Re::Cat(Box::new(a), Box::new(b)),
    }
}

fn alt(a: Re, b: Re) -> Re {
    match (&a, &b) {
        (Re::Nothing, _) => b,
        (_, Re::Nothing) => a,
        _ if a == b => a,
        _ => Re::Alt(Box::new(a), Box::new(b)),
    }
}

pub fn derive(r: &Re, c: &str) -> Re {
    match r {
        Re::Nothing | Re::Eps => Re::Nothing,
        Re::Lit(l) if l == c => Re::Eps,
        Re::Lit(_) => Re::Nothing,
        Re::Cat(a, b) => {
            let left = cat(derive(a, c), (**b).clone());
            if nullable(a) {
                alt(left, derive(b, c))
            } else {
                left
            }
        }
        Re::Alt(a, b) => alt(derive(a, c), derive(b, c)),
        Re::Star(a) => cat(derive(a, c), r.clone()),
    }
}

/// Membership of `word` in the prefix-closure of the regex language.
pub fn in_prefix_closure(r: &Re, word: &[String]) -> bool {
    let mut cur = r.clone();
    for c in word {
        cur = derive(&cur, c);
        if !nonempty(&cur) {
            return false;
        }
    }
    nonempty(&cur)
}

/// All words over `alphabet` of length at most `k` in the prefix-closure, as traces.
pub fn regex_prefix_traces(r: &Re, alphabet: &[String], k: usize) -> BTreeSet<Trace> {
    let mut out = BTreeSet::new();
    let mut layer: Vec<(Vec<String>, Re)> = vec![(Vec::new(), r.clone())];
    for depth in 0..=k {
        let mut next = Vec::new();
        for (w, d) in layer {
            if !nonempty(&d) {
                continue;
            }
            out.insert(word_trace(&w));
            if depth < k {
                for c in alphabet {
                    let mut w2 = w.clone();
                    w2.push(c.clone());
                    next.push((w2, derive(&d, c)));
                }
            }
        }
        layer = next;
    }
    out
}

pub fn word_trace(word: &[String]) -> Trace {
    Trace::new(
        word.iter()
            .map(|c| Round::new([Label::new(c.clone()).unwrap()]))
            .collect(),
    )
}

pub fn sig(inputs: &[&str], outputs: &[&str]) -> Signature {
    Signature::from_names(inputs, outputs).unwrap()
}

/// Classes of a state partition rendered as sorted name sets.
pub fn class_set(classes: &BTreeMap<String, BTreeSet<String>>) -> BTreeSet<BTreeSet<String>> {
    classes.values().filter(|c| c.len() > 1).cloned().collect()
}

pub fn names(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}
