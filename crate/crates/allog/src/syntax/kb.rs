use std::collections::BTreeSet;
use std::fmt;

use super::clause::{ConstrainedClause, DatalogAtom};
use super::ontology::Ontology;
use super::term::Term;

/// A hybrid knowledge base: an ALC ontology coupled with a constrained
/// Datalog program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub sigma: Ontology,
    pub pi: Vec<ConstrainedClause>,
}

impl KnowledgeBase {
    pub fn new(sigma: Ontology, pi: Vec<ConstrainedClause>) -> Self {
        KnowledgeBase { sigma, pi }
    }

    pub fn facts(&self) -> impl Iterator<Item = &ConstrainedClause> {
        self.pi.iter().filter(|c| c.is_fact())
    }

    pub fn rules(&self) -> impl Iterator<Item = &ConstrainedClause> {
        self.pi.iter().filter(|c| !c.is_fact() && !c.is_goal())
    }

    /// Predicate signatures used anywhere in the program.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for clause in &self.pi {
            for atom in clause.datalog_atoms() {
                out.insert((atom.predicate.clone(), atom.arity()));
            }
        }
        out
    }

    /// Constants occurring anywhere in the program.
    pub fn program_constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for clause in &self.pi {
            out.extend(clause.constants());
        }
        out
    }

    /// A copy with additional ground facts appended, as when evaluating a
    /// hypothesis against an observation.
    pub fn with_extra_facts<I: IntoIterator<Item = DatalogAtom>>(&self, extra: I) -> Self {
        let mut out = self.clone();
        out.pi
            .extend(extra.into_iter().map(ConstrainedClause::fact));
        out
    }
}

/// A labelled example: a ground atom said to hold, together with the facts
/// describing it. Coverage checks add the facts to the knowledge base and ask
/// whether the hypothesis derives the label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub label: DatalogAtom,
    pub facts: Vec<DatalogAtom>,
}

impl Observation {
    pub fn new(label: DatalogAtom, facts: Vec<DatalogAtom>) -> Self {
        Observation { label, facts }
    }
}

/// A single well-formedness violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A Datalog predicate reuses a concept or role name.
    PredicateNameClash { predicate: String },
    /// A program constant is not a declared individual.
    UndeclaredConstant { constant: String, clause: String },
    /// A constraint mentions a variable absent from the clause's Datalog part.
    UnsafeConstraintVariable { variable: String, clause: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PredicateNameClash { predicate } => {
                write!(f, "predicate '{predicate}' clashes with an ontology concept or role name")
            }
            Violation::UndeclaredConstant { constant, clause } => {
                write!(f, "constant '{constant}' is not a declared individual (in: {clause})")
            }
            Violation::UnsafeConstraintVariable { variable, clause } => {
                write!(
                    f,
                    "constraint variable {variable} does not occur in the Datalog part (in: {clause})"
                )
            }
        }
    }
}

/// Outcome of checking the coupling conditions between ontology and program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        write!(f, "{} violation(s)", self.violations.len())
    }
}

/// Checks the three conditions that make the coupling safe:
/// predicate names are disjoint from concept and role names, every program
/// constant is a declared individual, and every constraint variable occurs in
/// the Datalog part of its clause.
pub fn validate_kb(kb: &KnowledgeBase) -> ValidationReport {
    let mut violations = Vec::new();

    let mut clashed = BTreeSet::new();
    for (predicate, _) in kb.predicates() {
        if (kb.sigma.concept_names.contains(&predicate)
            || kb.sigma.role_names.contains(&predicate))
            && clashed.insert(predicate.clone())
        {
            violations.push(Violation::PredicateNameClash { predicate });
        }
    }

    for clause in &kb.pi {
        let rendered = clause.to_string();
        for constant in clause.constants() {
            if !kb.sigma.individuals.contains(&constant) {
                violations.push(Violation::UndeclaredConstant {
                    constant,
                    clause: rendered.clone(),
                });
            }
        }
        let datalog_vars: BTreeSet<String> = clause
            .datalog_atoms()
            .flat_map(|a| a.vars().map(str::to_string))
            .collect();
        for c in &clause.constraints {
            if let Term::Var(v) = &c.term {
                if !datalog_vars.contains(v) {
                    violations.push(Violation::UnsafeConstraintVariable {
                        variable: v.clone(),
                        clause: rendered.clone(),
                    });
                }
            }
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::clause::Constraint;
    use crate::syntax::concept::Concept;

    fn v(n: &str) -> Term {
        Term::Var(n.into())
    }

    fn c(n: &str) -> Term {
        Term::Const(n.into())
    }

    fn base_sigma() -> Ontology {
        let mut o = Ontology::new();
        o.declare_concept("Country")
            .declare_role("Hosts")
            .declare_individual("IR");
        o
    }

    #[test]
    fn well_formed_kb_passes() {
        let kb = KnowledgeBase::new(
            base_sigma(),
            vec![ConstrainedClause::rule(
                DatalogAtom::new("speaks", vec![v("X"), v("Y")]),
                vec![DatalogAtom::new("language", vec![v("X"), v("Y")])],
                vec![Constraint::new(v("X"), Concept::atomic("Country"))],
            )],
        );
        assert!(validate_kb(&kb).is_ok());
    }

    #[test]
    fn predicate_clash_with_role_name_is_flagged() {
        let kb = KnowledgeBase::new(
            base_sigma(),
            vec![ConstrainedClause::fact(DatalogAtom::new(
                "Hosts",
                vec![c("IR")],
            ))],
        );
        let report = validate_kb(&kb);
        assert_eq!(
            report.violations,
            vec![Violation::PredicateNameClash {
                predicate: "Hosts".to_string()
            }]
        );
    }

    #[test]
    fn undeclared_constant_is_flagged_once_per_clause() {
        let kb = KnowledgeBase::new(
            base_sigma(),
            vec![ConstrainedClause::fact(DatalogAtom::new(
                "p",
                vec![c("XX"), c("XX")],
            ))],
        );
        let report = validate_kb(&kb);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            Violation::UndeclaredConstant { constant, .. } if constant == "XX"
        ));
    }

    #[test]
    fn constraint_variable_outside_datalog_part_is_flagged() {
        let kb = KnowledgeBase::new(
            base_sigma(),
            vec![ConstrainedClause::rule(
                DatalogAtom::new("p", vec![v("X")]),
                vec![],
                vec![
                    Constraint::new(v("X"), Concept::atomic("Country")),
                    Constraint::new(v("Z"), Concept::atomic("Country")),
                ],
            )],
        );
        let report = validate_kb(&kb);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            Violation::UnsafeConstraintVariable { variable, .. } if variable == "Z"
        ));
    }
}
