use thiserror::Error;

/// Resource ceilings for the reasoning procedures. Hitting one aborts the
/// operation rather than degrading the answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Fresh individuals a single satisfiability check may create.
    pub tableau_nodes: usize,
    /// Depth bound for resolution derivations; deeper branches are cut and
    /// reported as truncated rather than failed.
    pub max_depth: usize,
    /// Candidate substitutions a subsumption check may enumerate.
    pub theta_candidates: usize,
    /// Constraint selections an entailment-of-disjunctions check may try.
    pub selections: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            tableau_nodes: 1_000_000,
            max_depth: 50,
            theta_candidates: 100_000,
            selections: 100_000,
        }
    }
}

/// A resource ceiling was hit; the result of the operation is unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("tableau node limit of {0} exceeded")]
    TableauNodes(usize),
    #[error("substitution candidate limit of {0} exceeded")]
    ThetaCandidates(usize),
    #[error("constraint selection limit of {0} exceeded")]
    Selections(usize),
}
