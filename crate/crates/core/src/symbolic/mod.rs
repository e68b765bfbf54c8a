//! Symbolic transducers: guarded transitions that read port values and update registers.

mod expr;
mod sfst;

pub use expr::{
    eval, guard_equiv, normalize, BinOp, Env, Expr, GuardMode, Norm, Type, Value,
    SEMANTIC_ASSIGNMENT_CAP,
};
pub use sfst::{
    expand, expand_with, is_symbolic_protocol, sfst_bisim_minimize, sfst_coherent_minimize,
    sfst_coherent_simulation, sfst_run, updates_equiv, valued_label, Config, Expansion, PortValue,
    Sfst, SymTransition, ValuedRound, ValuedTrace, DEFAULT_EXPANSION_CAP,
};
