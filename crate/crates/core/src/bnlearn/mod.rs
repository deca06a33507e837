//! Discrete Bayesian network over process nodes.
//!
//! Aggregate losses are binned into equal-width states, a DAG is learned by
//! BIC search, conditional probability tables are fitted with add-one
//! smoothing, and joint or per-node marginal distributions follow from the
//! factorization `P(x_1..x_N) = Π_i P(x_i | pa_i)`.

mod dag;
mod discretize;
mod network;
mod score;
mod search;

pub use dag::DagStructure;
pub use discretize::{discretize, Discretization, StateMatrix, DEFAULT_N_STATES};
pub use network::{joint, learn_cpts, marginal, Cpt, DiscreteBayesNet, Joint, MAX_JOINT_CONFIGURATIONS};
pub use score::{family_score, score};
pub use search::{learn_structure, SearchMode, EXHAUSTIVE_MAX_NODES};
