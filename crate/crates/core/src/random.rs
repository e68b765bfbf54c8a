//! Seeded generators for property tests and benchmarks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::kernel::{Label, Round, Signature, Transducer, Transition};
use crate::symbolic::{BinOp, Expr, PortValue, Sfst, Type, ValuedRound, ValuedTrace};

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_states: usize,
    pub max_transitions: usize,
    /// Largest number of events in one round.
    pub max_round: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_states: 6,
            max_transitions: 10,
            max_round: 1,
        }
    }
}

pub fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// A round of at most `max` distinct labels, possibly empty.
pub fn random_round<R: Rng>(rng: &mut R, labels: &[Label], max: usize) -> Round {
    let k = rng.gen_range(0..=max.min(labels.len()));
    Round::new(labels.choose_multiple(rng, k).cloned())
}

pub fn random_transducer<R: Rng>(rng: &mut R, sig: &Signature, shape: Shape) -> Transducer {
    let labels: Vec<Label> = sig.universe().into_iter().collect();
    let n = rng.gen_range(1..=shape.max_states.max(1));
    let states = state_names(n);
    let m = rng.gen_range(0..=shape.max_transitions);
    let delta: Vec<Transition> = (0..m)
        .map(|_| {
            Transition::new(
                states.choose(rng).unwrap().clone(),
                random_round(rng, &labels, shape.max_round),
                states.choose(rng).unwrap().clone(),
            )
        })
        .collect();
    Transducer::new(sig.clone(), states.clone(), states[0].clone(), delta)
        .expect("generated transducers are well-formed")
}

/// At most one target per (state, round).
pub fn random_deterministic_transducer<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    shape: Shape,
) -> Transducer {
    let t = random_transducer(rng, sig, shape);
    let mut seen = BTreeSet::new();
    let delta: Vec<Transition> = t
        .transitions()
        .iter()
        .filter(|tr| seen.insert((tr.source.clone(), tr.round.clone())))
        .cloned()
        .collect();
    Transducer::new(sig.clone(), t.states().clone(), t.initial(), delta)
        .expect("generated transducers are well-formed")
}

/// Random well-typed expression over integer names `vars`.
pub fn random_expr<R: Rng>(rng: &mut R, vars: &[&str], want: Type, depth: usize) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    match want {
        Type::Int if leaf => {
            if vars.is_empty() || rng.gen_bool(0.4) {
                Expr::Int(rng.gen_range(-3..=3))
            } else {
                Expr::var(*vars.choose(rng).unwrap())
            }
        }
        Type::Bool if leaf => {
            if rng.gen_bool(0.2) {
                Expr::Bool(rng.gen())
            } else {
                let op = *[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq]
                    .choose(rng)
                    .unwrap();
                Expr::bin(op, random_expr(rng, vars, Type::Int, 0), random_expr(rng, vars, Type::Int, 0))
            }
        }
        Type::Int => match rng.gen_range(0..4) {
            0 => Expr::Neg(Box::new(random_expr(rng, vars, Type::Int, depth - 1))),
            k => {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][k - 1];
                Expr::bin(
                    op,
                    random_expr(rng, vars, Type::Int, depth - 1),
                    random_expr(rng, vars, Type::Int, depth - 1),
                )
            }
        },
        Type::Bool => match rng.gen_range(0..5) {
            0 => Expr::Not(Box::new(random_expr(rng, vars, Type::Bool, depth - 1))),
            1 | 2 => {
                let op = if rng.gen() { BinOp::And } else { BinOp::Or };
                Expr::bin(
                    op,
                    random_expr(rng, vars, Type::Bool, depth - 1),
                    random_expr(rng, vars, Type::Bool, depth - 1),
                )
            }
            _ => {
                let op = *[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq]
                    .choose(rng)
                    .unwrap();
                Expr::bin(
                    op,
                    random_expr(rng, vars, Type::Int, depth - 1),
                    random_expr(rng, vars, Type::Int, depth - 1),
                )
            }
        },
    }
}

/// A valued trace of length `len` whose rounds are drawn from the SFST's transition rounds.
/// Ports in `valued` carry a value from `lo..=hi`; others carry no value.
pub fn random_valued_trace<R: Rng>(
    rng: &mut R,
    t: &Sfst,
    valued: &BTreeSet<Label>,
    len: usize,
    lo: i64,
    hi: i64,
) -> ValuedTrace {
    let rounds: Vec<&Round> = t
        .transitions()
        .iter()
        .map(|tr| &tr.round)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    (0..len)
        .map(|_| {
            let round = rounds.choose(rng).map(|r| (*r).clone()).unwrap_or_default();
            ValuedRound::new(round.events().iter().map(|l| {
                let v = if valued.contains(l) {
                    PortValue::Int(rng.gen_range(lo..=hi))
                } else {
                    PortValue::Unit
                };
                (l.clone(), v)
            }))
        })
        .collect()
}
