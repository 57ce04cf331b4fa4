use num_rational::Ratio;

use crate::syntax::Concept;

/// Which bound operator labels taxonomy nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    MostGeneral,
    MostSpecific,
}

/// Declarative bias for the discovery search: the query language, the
/// frequency thresholds, and the taxonomy options.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasSpec {
    /// Reference concept whose individuals are counted.
    pub reference: String,
    /// Predicates (with arity) the search may use in query bodies.
    pub predicates: Vec<(String, usize)>,
    /// Constraint concepts per granularity level; `levels[0]` is level 1.
    pub levels: Vec<Vec<String>>,
    /// Greatest body length explored.
    pub max_depth: usize,
    /// Per-level minimum support thresholds; entry 0 is for level 1.
    pub minsup: Vec<Ratio<u64>>,
    /// Least granularity level a query must reach to enter the taxonomy.
    pub min_level: usize,
    /// Require every variable of a taxonomy query to carry a constraint.
    pub all_vars_constrained: bool,
    /// Bound operator used for taxonomy node descriptions.
    pub bound: BoundKind,
}

impl BiasSpec {
    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    pub fn reference_concept(&self) -> Concept {
        Concept::atomic(&self.reference)
    }

    pub fn minsup_for(&self, level: usize) -> Ratio<u64> {
        self.minsup[level - 1]
    }

    /// Concepts of one granularity level, in declaration order.
    pub fn level(&self, level: usize) -> &[String] {
        &self.levels[level - 1]
    }
}
