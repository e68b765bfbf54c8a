//! Transducer algebra with protocol-aware (coherent) minimisation.
//!
//! Transducers consume rounds (sets of simultaneous port events). A protocol is another
//! transducer delimiting what the environment may do; two transducers are coherently
//! equivalent when they agree on every protocol-legal trace. [`coherence::coherent_minimize`]
//! merges states that no legal environment can tell apart, which can yield smaller machines
//! than bisimulation.

pub mod algebra;
pub mod coherence;
mod error;
pub mod fixtures;
pub mod format;
pub mod kernel;
pub mod protocol;
pub mod random;
pub mod symbolic;

pub use error::{Error, Result};
pub use kernel::{Label, Round, Signature, Trace, TraceSet, Transducer, Transition};
