mod common;

use std::collections::BTreeSet;

use cohmin_core::fixtures;
use cohmin_core::kernel::{Label, Round, Trace};
use cohmin_core::protocol::{compile_regex, monitor, Monitor, ProtocolRegex, Verdict};
use cohmin_core::random::{random_round, random_transducer, Shape};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn lbl(s: &str) -> Label {
    Label::new(s).unwrap()
}

fn random_regex(rng: &mut StdRng, alphabet: &[&str], depth: usize) -> ProtocolRegex {
    if depth == 0 || rng.gen_bool(0.25) {
        return ProtocolRegex::Event(lbl(alphabet.choose(rng).unwrap()));
    }
    let k = rng.gen_range(2..=3);
    match rng.gen_range(0..3) {
        0 => ProtocolRegex::Concat((0..k).map(|_| random_regex(rng, alphabet, depth - 1)).collect()),
        1 => ProtocolRegex::Alt((0..k).map(|_| random_regex(rng, alphabet, depth - 1)).collect()),
        _ => ProtocolRegex::Star(Box::new(random_regex(rng, alphabet, depth - 1))),
    }
}

#[test]
fn compiled_regex_matches_derivatives() {
    let sig = common::sig(&["a", "b"], &["c"]);
    let alphabet: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..50 {
        let r = random_regex(&mut rng, &["a", "b", "c"], 4);
        let p = compile_regex(&r, &sig).unwrap();
        assert!(p.is_deterministic());
        let got = p.traces_upto(5).unwrap();
        let oracle = common::regex_prefix_traces(&common::to_re(&r), &alphabet, 5);
        assert_eq!(got.traces(), &oracle, "{r}");
        let reparsed = ProtocolRegex::parse(&r.to_string()).unwrap();
        assert_eq!(compile_regex(&reparsed, &sig).unwrap(), p, "{r}");
    }
}

#[test]
fn inplace_protocol_words() {
    let (_, p) = fixtures::inplace_map();
    let file = cohmin_core::format::parse_regex_file(fixtures::INPLACE_MAP_RX).unwrap();
    let re = common::to_re(&file.regex);
    let words: [&[&str]; 4] = [
        &["r", "q_more", "b_more", "d"],
        &["r", "q_f1", "q_f2", "m_f2", "m_f1", "w_l", "ok_l", "d", "r"],
        &["r", "d", "d"],
        &["q_more"],
    ];
    for w in words {
        let w: Vec<String> = w.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            p.accepts(&common::word_trace(&w)),
            common::in_prefix_closure(&re, &w),
            "{w:?}"
        );
    }
}

#[test]
fn monitor_agrees_with_membership() {
    let sig = common::sig(&["a"], &["b"]);
    let labels: Vec<Label> = sig.universe().into_iter().collect();
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..40 {
        let p = random_transducer(
            &mut rng,
            &sig,
            Shape {
                max_states: 4,
                max_transitions: 8,
                max_round: 2,
            },
        );
        for _ in 0..25 {
            let len = rng.gen_range(0..=8);
            let w = Trace::new((0..len).map(|_| random_round(&mut rng, &labels, 2)).collect());
            let verdict = monitor(&p, &w).unwrap();
            assert_eq!(verdict.is_ok(), p.accepts(&w));
            if let Verdict::Violation { index, .. } = verdict {
                assert!(p.accepts(&w.prefix(index)));
                assert!(!p.accepts(&w.prefix(index + 1)));
            }
        }
    }
}

#[test]
fn edited_walk_is_flagged_at_the_edit() {
    let p = fixtures::display_protocol();
    let labels: Vec<Label> = p.signature().universe().into_iter().collect();
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..100 {
        let mut state = p.initial().to_string();
        let mut rounds = Vec::new();
        let mut enabled_at = Vec::new();
        for _ in 0..rng.gen_range(1..=12) {
            let moves: Vec<_> = p.outgoing(&state).collect();
            let m = *moves.choose(&mut rng).unwrap();
            enabled_at.push(p.enabled_rounds(&state).into_iter().cloned().collect::<BTreeSet<Round>>());
            rounds.push(m.round.clone());
            state = m.target.clone();
        }
        assert!(monitor(&p, &Trace::new(rounds.clone())).unwrap().is_ok());
        let i = rng.gen_range(0..rounds.len());
        let bad = loop {
            let r = Round::new([labels.choose(&mut rng).unwrap().clone()]);
            if !enabled_at[i].contains(&r) {
                break r;
            }
        };
        rounds[i] = bad.clone();
        match monitor(&p, &Trace::new(rounds)).unwrap() {
            Verdict::Violation {
                index,
                offending,
                expected,
            } => {
                assert_eq!(index, i);
                assert_eq!(offending, bad);
                assert_eq!(expected, enabled_at[i]);
            }
            Verdict::Ok => panic!("edit at {i} not flagged"),
        }
    }
}

#[test]
fn monitor_stops_after_violation() {
    let p = fixtures::display_protocol();
    let mut m = Monitor::new(&p);
    for r in fixtures::attack_trace().rounds() {
        m.feed(r);
    }
    assert!(!m.feed(&Round::from_names(&["q5"]).unwrap()));
    assert_eq!(
        m.verdict().to_string(),
        "VIOLATION index=2 round={d4} expected={{d2},{q1}}"
    );
    assert!(monitor(&p, &fixtures::legal_trace()).unwrap().is_ok());
}
