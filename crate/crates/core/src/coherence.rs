//! Coherent simulation under a protocol, quotienting and minimisation.
//!
//! `(s′, s″) ∈ R` when every transition of `s″` is matched by one of `s′` landing in a related
//! pair, and every round `s′` offers beyond `s″` can never follow a protocol-legal witness of
//! `s″`. The engine works on an indexed labelled system so the symbolic layer can reuse it
//! with richer transition labels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::algebra::intersect;
use crate::error::{Error, Result};
use crate::kernel::{first_difference, Fnv, Round, Transducer, DEFAULT_TRACE_CAP};
use crate::symbolic::GuardMode;

/// The greatest coherent simulation of a transducer under a protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceRelation {
    pub pairs: BTreeSet<(String, String)>,
    pub transducer_id: String,
    pub protocol_id: String,
    /// Set for symbolic transducers: how guards and updates were compared.
    pub guard_mode: Option<GuardMode>,
}

impl CoherenceRelation {
    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.pairs.contains(&(a.to_string(), b.to_string()))
    }

    /// Unordered pairs `{a, b}`, `a < b`, related in both directions.
    pub fn equivalence_pairs(&self) -> BTreeSet<(String, String)> {
        self.pairs
            .iter()
            .filter(|(a, b)| a < b && self.pairs.contains(&(b.clone(), a.clone())))
            .cloned()
            .collect()
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Fnv::new();
        h.write(self.transducer_id.as_bytes());
        h.write(self.protocol_id.as_bytes());
        for (a, b) in &self.pairs {
            h.write(a.as_bytes());
            h.write(b.as_bytes());
        }
        format!("{:016x}", h.finish())
    }
}

impl fmt::Display for CoherenceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# transducer {}", self.transducer_id)?;
        writeln!(f, "# protocol {}", self.protocol_id)?;
        if let Some(mode) = self.guard_mode {
            writeln!(f, "# guards {mode}")?;
        }
        for (a, b) in &self.pairs {
            writeln!(f, "sim {a} {b}")?;
        }
        for (a, b) in self.equivalence_pairs() {
            writeln!(f, "equiv {a} {b}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Merge {
    pub kept: String,
    pub removed: String,
}

impl fmt::Display for Merge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "merge {} -> {}", self.removed, self.kept)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinimizeOptions {
    pub keep_unreachable: bool,
}

/// A minimised model with the merges that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minimized<M> {
    pub model: M,
    pub merges: Vec<Merge>,
    /// Original states folded into each surviving state, keyed by the survivor.
    pub classes: BTreeMap<String, BTreeSet<String>>,
}

impl<M> Minimized<M> {
    pub fn log(&self) -> String {
        self.merges.iter().map(|m| format!("{m}\n")).collect()
    }

    /// Classes with more than one member.
    pub fn merged_classes(&self) -> BTreeSet<BTreeSet<String>> {
        self.classes
            .values()
            .filter(|c| c.len() > 1)
            .cloned()
            .collect()
    }
}

/// Indexed labelled system. Labels are opaque class ids, each carrying the round it fires on.
#[derive(Clone, Debug)]
pub(crate) struct Lts {
    pub names: Vec<String>,
    pub init: usize,
    pub out: Vec<Vec<(usize, usize)>>,
    pub rounds: Vec<Round>,
}

impl Lts {
    pub(crate) fn from_transducer(t: &Transducer) -> Lts {
        let mut labels: BTreeMap<&Round, usize> = BTreeMap::new();
        let mut rounds = Vec::new();
        for tr in t.transitions() {
            labels.entry(&tr.round).or_insert_with(|| {
                rounds.push(tr.round.clone());
                rounds.len() - 1
            });
        }
        Lts::build(
            t.states(),
            t.initial(),
            t.transitions()
                .iter()
                .map(|tr| (tr.source.as_str(), labels[&tr.round], tr.target.as_str())),
            rounds,
        )
    }

    pub(crate) fn build<'a>(
        states: &BTreeSet<String>,
        initial: &str,
        edges: impl IntoIterator<Item = (&'a str, usize, &'a str)>,
        rounds: Vec<Round>,
    ) -> Lts {
        let names: Vec<String> = states.iter().cloned().collect();
        let index: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut out = vec![Vec::new(); names.len()];
        for (s, l, t) in edges {
            out[index[s]].push((l, index[t]));
        }
        for o in &mut out {
            o.sort_unstable();
            o.dedup();
        }
        Lts {
            init: index[initial],
            names,
            out,
            rounds,
        }
    }

    fn index_of(&self, s: &str) -> Result<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(s))
            .map_err(|_| Error::UnknownState(s.to_string()))
    }

    /// For each state, the protocol states reachable on a common trace.
    pub(crate) fn product_reach(&self, p: &Transducer) -> Vec<BTreeSet<String>> {
        let mut reach: Vec<BTreeSet<String>> = vec![BTreeSet::new(); self.names.len()];
        reach[self.init].insert(p.initial().to_string());
        let mut queue = VecDeque::from([(self.init, p.initial().to_string())]);
        while let Some((s, q)) = queue.pop_front() {
            for &(l, s2) in &self.out[s] {
                for pt in p.outgoing(&q) {
                    if pt.round == self.rounds[l] && reach[s2].insert(pt.target.clone()) {
                        queue.push_back((s2, pt.target.clone()));
                    }
                }
            }
        }
        reach
    }

    /// The greatest coherent simulation as a dense matrix.
    pub(crate) fn coherent_simulation(&self, p: &Transducer) -> Vec<Vec<bool>> {
        let reach = self.product_reach(p);
        let n = self.names.len();
        let extendable = |s: usize, round: &Round| {
            reach[s]
                .iter()
                .any(|q| p.outgoing(q).any(|t| &t.round == round))
        };
        let enabled: Vec<BTreeSet<usize>> = self
            .out
            .iter()
            .map(|o| o.iter().map(|&(l, _)| l).collect())
            .collect();
        let mut rel = vec![vec![true; n]; n];
        for a in 0..n {
            for b in 0..n {
                if enabled[a]
                    .difference(&enabled[b])
                    .any(|&l| extendable(b, &self.rounds[l]))
                {
                    rel[a][b] = false;
                }
            }
        }
        self.prune_matching(&mut rel);
        rel
    }

    /// Removes pairs whose second component has a move the first cannot match within the
    /// relation, until nothing changes.
    fn prune_matching(&self, rel: &mut [Vec<bool>]) {
        let n = self.names.len();
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..n {
                for b in 0..n {
                    if rel[a][b] && !self.matches(rel, a, b) {
                        rel[a][b] = false;
                        changed = true;
                    }
                }
            }
        }
    }

    fn matches(&self, rel: &[Vec<bool>], a: usize, b: usize) -> bool {
        self.out[b].iter().all(|&(l, rb)| {
            self.out[a]
                .iter()
                .any(|&(la, ra)| la == l && rel[ra][rb])
        })
    }

    pub(crate) fn relation_pairs(&self, rel: &[Vec<bool>]) -> BTreeSet<(String, String)> {
        let mut pairs = BTreeSet::new();
        for (a, row) in rel.iter().enumerate() {
            for (b, &related) in row.iter().enumerate() {
                if related {
                    pairs.insert((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        pairs
    }

    fn least_equivalent_pair(&self, rel: &[Vec<bool>]) -> Option<(usize, usize)> {
        let n = self.names.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .find(|&(a, b)| rel[a][b] && rel[b][a])
    }

    /// Coarsest partition stable under every label; blocks as sets of names.
    pub(crate) fn bisim_blocks(&self) -> Vec<BTreeSet<String>> {
        let n = self.names.len();
        let mut block = vec![0usize; n];
        let mut count = 1;
        loop {
            let mut ids: BTreeMap<(usize, BTreeSet<(usize, usize)>), usize> = BTreeMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let moves = self.out[s].iter().map(|&(l, t)| (l, block[t])).collect();
                    let len = ids.len();
                    *ids.entry((block[s], moves)).or_insert(len)
                })
                .collect();
            let stable = ids.len() == count;
            block = next;
            count = ids.len();
            if stable {
                break;
            }
        }
        let mut blocks = vec![BTreeSet::new(); count];
        for (s, &b) in block.iter().enumerate() {
            blocks[b].insert(self.names[s].clone());
        }
        blocks
    }
}

type Rename<M> = dyn Fn(&M, &dyn Fn(&str) -> String) -> M;

/// Shared merge loop for explicit and symbolic models.
pub(crate) struct Engine<'a, M> {
    pub lts: &'a dyn Fn(&M) -> Result<Lts>,
    pub rename: &'a Rename<M>,
    pub restrict: &'a dyn Fn(&M) -> M,
    pub states: &'a dyn Fn(&M) -> BTreeSet<String>,
}

impl<M> Engine<'_, M> {
    pub(crate) fn coherent_minimize(
        &self,
        model: &M,
        protocol: &Transducer,
        opts: MinimizeOptions,
    ) -> Result<Minimized<M>>
    where
        M: Clone,
    {
        let mut current = model.clone();
        let mut merges = Vec::new();
        let mut classes: BTreeMap<String, BTreeSet<String>> = (self.states)(model)
            .into_iter()
            .map(|s| (s.clone(), BTreeSet::from([s])))
            .collect();
        loop {
            let lts = (self.lts)(&current)?;
            let rel = lts.coherent_simulation(protocol);
            let Some((a, b)) = lts.least_equivalent_pair(&rel) else {
                break;
            };
            let kept = lts.names[a].clone();
            let removed = lts.names[b].clone();
            current = (self.rename)(&current, &|s: &str| {
                if s == removed {
                    kept.clone()
                } else {
                    s.to_string()
                }
            });
            let folded = classes.remove(&removed).unwrap_or_default();
            classes.entry(kept.clone()).or_default().extend(folded);
            merges.push(Merge { kept, removed });
        }
        Ok(self.finish(current, merges, classes, opts))
    }

    pub(crate) fn bisim_minimize(&self, model: &M, opts: MinimizeOptions) -> Result<Minimized<M>> {
        let lts = (self.lts)(model)?;
        let blocks = lts.bisim_blocks();
        let mut rep: BTreeMap<String, String> = BTreeMap::new();
        let mut merges = Vec::new();
        let mut classes = BTreeMap::new();
        for block in blocks {
            let kept = block.iter().next().cloned().unwrap_or_default();
            for s in &block {
                rep.insert(s.clone(), kept.clone());
                if *s != kept {
                    merges.push(Merge {
                        kept: kept.clone(),
                        removed: s.clone(),
                    });
                }
            }
            classes.insert(kept, block);
        }
        merges.sort();
        let merged = (self.rename)(model, &|s: &str| rep[s].clone());
        Ok(self.finish(merged, merges, classes, opts))
    }

    fn finish(
        &self,
        model: M,
        merges: Vec<Merge>,
        mut classes: BTreeMap<String, BTreeSet<String>>,
        opts: MinimizeOptions,
    ) -> Minimized<M> {
        let model = if opts.keep_unreachable {
            model
        } else {
            (self.restrict)(&model)
        };
        let alive = (self.states)(&model);
        classes.retain(|k, _| alive.contains(k));
        Minimized {
            model,
            merges,
            classes,
        }
    }
}

fn transducer_engine() -> Engine<'static, Transducer> {
    Engine {
        lts: &|t: &Transducer| Ok(Lts::from_transducer(t)),
        rename: &|t: &Transducer, f: &dyn Fn(&str) -> String| t.map_states(f),
        restrict: &Transducer::restrict_to_reachable,
        states: &|t: &Transducer| t.states().clone(),
    }
}

/// Pairs `(s, p)` reachable together on some common trace.
pub fn product_reach(t: &Transducer, p: &Transducer) -> Result<BTreeSet<(String, String)>> {
    t.signature().require_same_universe(p.signature(), "product_reach")?;
    let lts = Lts::from_transducer(t);
    let reach = lts.product_reach(p);
    Ok(lts
        .names
        .iter()
        .zip(reach)
        .flat_map(|(s, ps)| ps.into_iter().map(move |q| (s.clone(), q)))
        .collect())
}

/// Whether some protocol-legal witness of `s` can be followed by `round`.
pub fn protocol_extendable(t: &Transducer, p: &Transducer, s: &str, round: &Round) -> Result<bool> {
    t.signature().require_same_universe(p.signature(), "protocol_extendable")?;
    let lts = Lts::from_transducer(t);
    let i = lts.index_of(s)?;
    let reach = lts.product_reach(p);
    Ok(reach[i]
        .iter()
        .any(|q| p.outgoing(q).any(|tr| &tr.round == round)))
}

pub fn coherent_simulation(t: &Transducer, p: &Transducer) -> Result<CoherenceRelation> {
    t.signature().require_same_universe(p.signature(), "coherent_simulation")?;
    let lts = Lts::from_transducer(t);
    let rel = lts.coherent_simulation(p);
    Ok(CoherenceRelation {
        pairs: lts.relation_pairs(&rel),
        transducer_id: t.fingerprint(),
        protocol_id: p.fingerprint(),
        guard_mode: None,
    })
}

pub fn equivalence_pairs(t: &Transducer, p: &Transducer) -> Result<BTreeSet<(String, String)>> {
    Ok(coherent_simulation(t, p)?.equivalence_pairs())
}

/// Merges `s1` and `s2` into the lexicographically smaller name.
pub fn quotient(t: &Transducer, s1: &str, s2: &str) -> Result<Transducer> {
    t.require_state(s1)?;
    t.require_state(s2)?;
    if s1 == s2 {
        return Err(Error::SameState(s1.to_string()));
    }
    let (kept, removed) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
    Ok(t.map_states(|s| {
        if s == removed {
            kept.to_string()
        } else {
            s.to_string()
        }
    }))
}

pub fn coherent_minimize(t: &Transducer, p: &Transducer) -> Result<Minimized<Transducer>> {
    coherent_minimize_with(t, p, MinimizeOptions::default())
}

/// Repeatedly merges the least coherently equivalent pair, recomputing the relation after each
/// merge, then drops unreachable states.
pub fn coherent_minimize_with(
    t: &Transducer,
    p: &Transducer,
    opts: MinimizeOptions,
) -> Result<Minimized<Transducer>> {
    t.signature().require_same_universe(p.signature(), "coherent_minimize")?;
    transducer_engine().coherent_minimize(t, p, opts)
}

pub fn bisim_minimize(t: &Transducer) -> Minimized<Transducer> {
    bisim_minimize_with(t, MinimizeOptions::default())
}

pub fn bisim_minimize_with(t: &Transducer, opts: MinimizeOptions) -> Minimized<Transducer> {
    transducer_engine()
        .bisim_minimize(t, opts)
        .expect("explicit transducers always index")
}

/// Bounded coherent equivalence: `T ∩ P` and `T′ ∩ P` agree on traces of length at most `k`.
pub fn coherent_equiv_bounded(
    t: &Transducer,
    u: &Transducer,
    p: &Transducer,
    k: usize,
) -> Result<bool> {
    Ok(coherent_difference(t, u, p, k)?.is_none())
}

/// A shortest separating trace for [`coherent_equiv_bounded`], if any.
pub fn coherent_difference(
    t: &Transducer,
    u: &Transducer,
    p: &Transducer,
    k: usize,
) -> Result<Option<crate::kernel::Trace>> {
    t.signature().require_same_universe(u.signature(), "coherent_equiv_bounded")?;
    let a = intersect(t, p)?;
    let b = intersect(u, p)?;
    first_difference(&a, &b, k, DEFAULT_TRACE_CAP)
}
