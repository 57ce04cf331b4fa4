//! Hybrid knowledge bases that couple an ALC ontology with a constrained
//! Datalog program, plus the reasoning and rule-discovery machinery built on
//! top of them: consistency and entailment checking for the ontology layer,
//! query answering over the hybrid base, a generality order over queries with
//! least/greatest bound operators, levelwise discovery of frequent queries,
//! and their arrangement into a subsumption taxonomy.

pub mod bias;
pub mod discovery;
pub mod engine;
pub mod generality;
pub mod limits;
pub mod owl;
pub mod parse;
pub mod syntax;
pub mod tableau;
pub mod taxonomy;
