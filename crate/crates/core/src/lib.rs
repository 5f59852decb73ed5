//! Matching markets with uncertain preferences.
//!
//! This crate implements solvers and verifiers for *popular*, *dominant* and
//! *stable* matchings in bipartite markets whose preference data is not a
//! single fixed profile. Preferences can be given as
//!
//! - **layers**: a list of complete preference profiles that must all be
//!   satisfied at once,
//! - **independent** per-agent sets of possible preference lists, or
//! - a **robust** base profile together with a swap budget `k`, meaning each
//!   agent's true list may differ from the base list by at most `k` adjacent
//!   swaps.
//!
//! Markets are either two-sided (both sides rank each other, unit capacities)
//! or one-sided house allocation (only applicants rank, houses have
//! capacities). The [`two_sided`] and [`one_sided`] modules hold the
//! polynomial algorithms, [`oracle`] holds an exhaustive brute-force engine
//! used as ground truth on small instances, and [`gen`] produces seeded random
//! instances.

pub mod assign;
pub mod gen;
mod indexed;
pub mod instance;
pub mod one_sided;
pub mod oracle;
pub mod two_sided;

pub use instance::{
    parse_instance, parse_matching, serialize_instance, serialize_matching, AgentId, Error,
    MarketInstance, Matching, PreferenceList, Profile, Result, ScenarioSet, ScenarioWitness, Side,
    Verdict, Witness, LAST_RESORT_ID,
};
