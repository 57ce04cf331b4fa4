//! Core syntax: terms, concepts, clauses, ontologies, and hybrid knowledge
//! bases, together with the well-formedness checks that couple the two
//! layers.

mod clause;
mod concept;
mod kb;
mod ontology;
mod term;

pub use clause::{ConstrainedClause, Constraint, DatalogAtom, OQuery, QueryShapeError};
pub use concept::Concept;
pub use kb::{validate_kb, KnowledgeBase, Observation, ValidationReport, Violation};
pub use ontology::{Assertion, Axiom, Ontology};
pub use term::{is_oi_substitution, Substitution, Term};
