//! Product constructions on transducers and the matching operations on finite trace sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::kernel::{Label, Polarity, Round, Signature, Trace, TraceSet, Transducer, Transition};

/// Cap on the number of traces an interaction of trace sets may produce.
pub const DEFAULT_INTERACTION_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProductOptions {
    /// Keep every pair of states instead of only those reachable from the initial pair.
    pub keep_unreachable: bool,
}

/// Result of a product construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub transducer: Transducer,
    /// Number of state pairs dropped as unreachable.
    pub pruned: usize,
}

pub fn product_state_name(left: &str, right: &str) -> String {
    format!("({left},{right})")
}

pub fn intersect(t: &Transducer, u: &Transducer) -> Result<Transducer> {
    Ok(intersect_with(t, u, ProductOptions::default())?.transducer)
}

/// Synchronous product: both operands take the same round.
pub fn intersect_with(t: &Transducer, u: &Transducer, opts: ProductOptions) -> Result<Product> {
    t.signature().require_same_universe(u.signature(), "intersect")?;
    build_product(t, u, t.signature().clone(), opts, |s, p| {
        let mut moves = Vec::new();
        for a in t.outgoing(s) {
            for b in u.outgoing(p) {
                if a.round == b.round {
                    moves.push((a.round.clone(), a.target.as_str(), b.target.as_str()));
                }
            }
        }
        moves
    })
}

/// Signature of `t ∥ u`: all labels of both. A shared label whose polarities disagree is an
/// output of the joint system.
pub fn interaction_signature(a: &Signature, b: &Signature) -> Result<Signature> {
    let mut inputs = BTreeSet::new();
    let mut outputs = BTreeSet::new();
    for l in a.universe().union(&b.universe()) {
        let pa = a.polarity(l);
        let pb = b.polarity(l);
        if pa == Some(Polarity::Output) || pb == Some(Polarity::Output) {
            outputs.insert(l.clone());
        } else {
            inputs.insert(l.clone());
        }
    }
    Signature::new(inputs, outputs)
}

/// Labels occurring in both signatures.
pub fn shared_labels(a: &Signature, b: &Signature) -> BTreeSet<Label> {
    a.universe().intersection(&b.universe()).cloned().collect()
}

pub fn interact(t: &Transducer, u: &Transducer) -> Result<Transducer> {
    Ok(interact_with(t, u, ProductOptions::default())?.transducer)
}

/// Interaction: a joint round steps `t` by its restriction to `t`'s labels and `u` by its
/// restriction to `u`'s labels. Both sides move on every round.
pub fn interact_with(t: &Transducer, u: &Transducer, opts: ProductOptions) -> Result<Product> {
    let sig = interaction_signature(t.signature(), u.signature())?;
    let shared = shared_labels(t.signature(), u.signature());
    let on_shared = |r: &Round| -> BTreeSet<Label> {
        r.events().intersection(&shared).cloned().collect()
    };
    build_product(t, u, sig, opts, |s, p| {
        let mut moves = Vec::new();
        for a in t.outgoing(s) {
            let key = on_shared(&a.round);
            for b in u.outgoing(p) {
                if on_shared(&b.round) == key {
                    moves.push((a.round.union(&b.round), a.target.as_str(), b.target.as_str()));
                }
            }
        }
        moves
    })
}

fn build_product<'a>(
    t: &'a Transducer,
    u: &'a Transducer,
    sig: Signature,
    opts: ProductOptions,
    moves: impl Fn(&'a str, &'a str) -> Vec<(Round, &'a str, &'a str)>,
) -> Result<Product> {
    let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut delta = BTreeSet::new();
    let mut queue = VecDeque::new();
    if opts.keep_unreachable {
        for s in t.states() {
            for p in u.states() {
                seen.insert((s, p));
                queue.push_back((s.as_str(), p.as_str()));
            }
        }
    } else {
        seen.insert((t.initial(), u.initial()));
        queue.push_back((t.initial(), u.initial()));
    }
    while let Some((s, p)) = queue.pop_front() {
        for (round, s2, p2) in moves(s, p) {
            delta.insert(Transition::new(
                product_state_name(s, p),
                round,
                product_state_name(s2, p2),
            ));
            if seen.insert((s2, p2)) {
                queue.push_back((s2, p2));
            }
        }
    }
    let states: BTreeSet<String> = seen
        .iter()
        .map(|(s, p)| product_state_name(s, p))
        .collect();
    let pruned = t.states().len() * u.states().len() - states.len();
    let initial = product_state_name(t.initial(), u.initial());
    Ok(Product {
        transducer: Transducer::from_checked(sig, states, initial, delta),
        pruned,
    })
}

/// Replaces each round by its restriction to `keep`.
pub fn project(t: &Transducer, keep: &Signature) -> Result<Transducer> {
    if !keep.is_sub_signature_of(t.signature()) {
        return Err(Error::SignatureMismatch(format!(
            "{keep} is not a sub-signature of {}",
            t.signature()
        )));
    }
    let delta = t
        .transitions()
        .iter()
        .map(|tr| Transition::new(tr.source.clone(), tr.round.project(keep), tr.target.clone()))
        .collect();
    Ok(Transducer::from_checked(
        keep.clone(),
        t.states().clone(),
        t.initial().to_string(),
        delta,
    ))
}

/// The labels of `t ∥ u` that are not shared, with their joint polarity.
pub fn composition_signature(a: &Signature, b: &Signature) -> Result<Signature> {
    let shared = shared_labels(a, b);
    Ok(interaction_signature(a, b)?.filter(|l| !shared.contains(l)))
}

/// Interaction followed by hiding the shared labels.
pub fn compose(t: &Transducer, u: &Transducer) -> Result<Transducer> {
    let joint = interact(t, u)?;
    let keep = composition_signature(t.signature(), u.signature())?;
    project(&joint, &keep)
}

/// `{ t : t↾θ ∈ θ, t↾θ′ ∈ θ′ }`. Since projection keeps length, every member is the pointwise
/// union of two equal-length traces that agree on the shared labels.
pub fn traceset_interact(a: &TraceSet, b: &TraceSet) -> Result<TraceSet> {
    traceset_interact_capped(a, b, DEFAULT_INTERACTION_CAP)
}

pub fn traceset_interact_capped(a: &TraceSet, b: &TraceSet, cap: usize) -> Result<TraceSet> {
    let sig = interaction_signature(a.signature(), b.signature())?;
    let shared = Signature::new(shared_labels(a.signature(), b.signature()), [])?;
    let mut by_key: BTreeMap<Trace, Vec<&Trace>> = BTreeMap::new();
    for u in b.iter() {
        by_key.entry(u.project(&shared)).or_default().push(u);
    }
    let mut out = BTreeSet::new();
    for t in a.iter() {
        if let Some(partners) = by_key.get(&t.project(&shared)) {
            for u in partners {
                let joint = t
                    .rounds()
                    .iter()
                    .zip(u.rounds())
                    .map(|(x, y)| x.union(y))
                    .collect();
                out.insert(Trace::new(joint));
                if out.len() > cap {
                    return Err(Error::ResourceLimit {
                        what: "trace-set interaction",
                        limit: cap,
                    });
                }
            }
        }
    }
    Ok(TraceSet::new(sig, out))
}

/// Interaction followed by hiding the shared labels.
pub fn traceset_compose(a: &TraceSet, b: &TraceSet) -> Result<TraceSet> {
    let joint = traceset_interact(a, b)?;
    let keep = composition_signature(a.signature(), b.signature())?;
    Ok(TraceSet::new(
        keep.clone(),
        joint.iter().map(|t| t.project(&keep)),
    ))
}
