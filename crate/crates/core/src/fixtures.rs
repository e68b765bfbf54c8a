//! Bundled example models.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::format::{parse_regex_file, parse_sfst, parse_trace, parse_transducer};
use crate::kernel::{Label, Round, Signature, Trace, Transducer, Transition};
use crate::symbolic::Sfst;

pub const FIX1: &str = include_str!("../fixtures/fix1.fst");
pub const FIX3: &str = include_str!("../fixtures/fix3.fst");
pub const PR1: &str = include_str!("../fixtures/pr1.prot");
pub const DISPLAY: &str = include_str!("../fixtures/display.prot");
pub const LEGAL_TRACE: &str = include_str!("../fixtures/legal.trc");
pub const ATTACK_TRACE: &str = include_str!("../fixtures/attack.trc");
pub const ADDER: &str = include_str!("../fixtures/adder.sfst");
pub const INPLACE_MAP: &str = include_str!("../fixtures/inplace_map.sfst");
pub const INPLACE_MAP_RX: &str = include_str!("../fixtures/inplace_map.rx");

fn load<T>(name: &str, parsed: Result<T>) -> T {
    parsed.unwrap_or_else(|e| panic!("bundled fixture {name} is malformed: {e}"))
}

/// Two-state cycle `s0 -{a}-> s1 -{b}-> s0`.
pub fn fix1() -> Transducer {
    load("fix1", parse_transducer(FIX1))
}

/// Nondeterministic transducer on which coherent minimisation beats bisimulation under [`pr1`].
pub fn fix3() -> Transducer {
    load("fix3", parse_transducer(FIX3))
}

/// Protocol allowing `{i}` then `{a}` only.
pub fn pr1() -> Transducer {
    load("pr1", parse_transducer(PR1))
}

pub fn display_protocol() -> Transducer {
    load("display", parse_transducer(DISPLAY))
}

pub fn legal_trace() -> Trace {
    load("legal trace", parse_trace(LEGAL_TRACE))
}

pub fn attack_trace() -> Trace {
    load("attack trace", parse_trace(ATTACK_TRACE))
}

pub fn adder() -> Sfst {
    load("adder", parse_sfst(ADDER))
}

/// The 13-state in-place map and its compiled protocol.
pub fn inplace_map() -> (Sfst, Transducer) {
    let t = load("inplace map", parse_sfst(INPLACE_MAP));
    let p = load(
        "inplace map protocol",
        parse_regex_file(INPLACE_MAP_RX).and_then(|f| f.compile()),
    );
    (t, p)
}

/// Allows only the empty trace.
pub fn empty_protocol(sig: &Signature) -> Transducer {
    Transducer::from_checked(
        sig.clone(),
        BTreeSet::from(["e0".to_string()]),
        "e0".into(),
        BTreeSet::new(),
    )
}

/// Largest signature for which [`universal_protocol`] enumerates every round.
pub const UNIVERSAL_LABEL_LIMIT: usize = 16;

/// One state looping on every round over the signature.
pub fn universal_protocol(sig: &Signature) -> Result<Transducer> {
    let labels: Vec<Label> = sig.universe().into_iter().collect();
    if labels.len() > UNIVERSAL_LABEL_LIMIT {
        return Err(Error::ResourceLimit {
            what: "universal protocol labels",
            limit: UNIVERSAL_LABEL_LIMIT,
        });
    }
    let delta = (0u32..1 << labels.len())
        .map(|mask| {
            let round = Round::new(
                labels
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, l)| l.clone()),
            );
            Transition::new("u0", round, "u0")
        })
        .collect();
    Ok(Transducer::from_checked(
        sig.clone(),
        BTreeSet::from(["u0".to_string()]),
        "u0".into(),
        delta,
    ))
}
