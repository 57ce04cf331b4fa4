use std::collections::BTreeSet;
use std::fmt;

use super::concept::Concept;

/// A terminological axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// `C == D.`
    Equivalence(Concept, Concept),
    /// `C <= D.`
    Subsumption(Concept, Concept),
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Equivalence(a, b) => write!(f, "{a} == {b}."),
            Axiom::Subsumption(a, b) => write!(f, "{a} <= {b}."),
        }
    }
}

/// A membership assertion about declared individuals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Assertion {
    /// `a : C.`
    Concept { individual: String, concept: Concept },
    /// `(a, b) : R.`
    Role {
        subject: String,
        object: String,
        role: String,
    },
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept { individual, concept } => write!(f, "{individual} : {concept}."),
            Assertion::Role {
                subject,
                object,
                role,
            } => write!(f, "({subject}, {object}) : {role}."),
        }
    }
}

/// An ALC ontology: declared names, terminological axioms, and assertions.
///
/// Name sets are kept explicit so that validation can flag undeclared names
/// instead of silently treating them as fresh.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ontology {
    pub concept_names: BTreeSet<String>,
    pub role_names: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
    pub axioms: Vec<Axiom>,
    pub assertions: Vec<Assertion>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_concept(&mut self, name: &str) -> &mut Self {
        self.concept_names.insert(name.to_string());
        self
    }

    pub fn declare_role(&mut self, name: &str) -> &mut Self {
        self.role_names.insert(name.to_string());
        self
    }

    pub fn declare_individual(&mut self, name: &str) -> &mut Self {
        self.individuals.insert(name.to_string());
        self
    }

    pub fn add_axiom(&mut self, axiom: Axiom) -> &mut Self {
        self.axioms.push(axiom);
        self
    }

    pub fn assert_concept(&mut self, individual: &str, concept: Concept) -> &mut Self {
        self.assertions.push(Assertion::Concept {
            individual: individual.to_string(),
            concept,
        });
        self
    }

    pub fn assert_role(&mut self, subject: &str, object: &str, role: &str) -> &mut Self {
        self.assertions.push(Assertion::Role {
            subject: subject.to_string(),
            object: object.to_string(),
            role: role.to_string(),
        });
        self
    }

    /// The axioms as subsumptions, with each equivalence contributing both
    /// directions in declaration order.
    pub fn subsumption_view(&self) -> Vec<(Concept, Concept)> {
        let mut out = Vec::new();
        for ax in &self.axioms {
            match ax {
                Axiom::Subsumption(a, b) => out.push((a.clone(), b.clone())),
                Axiom::Equivalence(a, b) => {
                    out.push((a.clone(), b.clone()));
                    out.push((b.clone(), a.clone()));
                }
            }
        }
        out
    }

    /// Concept and role names used in axioms or assertions but never declared.
    pub fn undeclared_names(&self) -> Vec<String> {
        let mut concepts = BTreeSet::new();
        let mut roles = BTreeSet::new();
        let mut individuals = BTreeSet::new();
        for ax in &self.axioms {
            let (Axiom::Equivalence(a, b) | Axiom::Subsumption(a, b)) = ax;
            a.atomic_names(&mut concepts);
            b.atomic_names(&mut concepts);
            a.role_names(&mut roles);
            b.role_names(&mut roles);
        }
        for assertion in &self.assertions {
            match assertion {
                Assertion::Concept { individual, concept } => {
                    individuals.insert(individual.clone());
                    concept.atomic_names(&mut concepts);
                    concept.role_names(&mut roles);
                }
                Assertion::Role {
                    subject,
                    object,
                    role,
                } => {
                    individuals.insert(subject.clone());
                    individuals.insert(object.clone());
                    roles.insert(role.clone());
                }
            }
        }
        let mut out: Vec<String> = Vec::new();
        out.extend(concepts.difference(&self.concept_names).cloned());
        out.extend(roles.difference(&self.role_names).cloned());
        out.extend(individuals.difference(&self.individuals).cloned());
        out
    }

    /// Concept assertions, in declaration order.
    pub fn concept_assertions(&self) -> impl Iterator<Item = (&str, &Concept)> {
        self.assertions.iter().filter_map(|a| match a {
            Assertion::Concept { individual, concept } => Some((individual.as_str(), concept)),
            Assertion::Role { .. } => None,
        })
    }

    /// Role assertions, in declaration order, as (subject, object, role).
    pub fn role_assertions(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.assertions.iter().filter_map(|a| match a {
            Assertion::Role {
                subject,
                object,
                role,
            } => Some((subject.as_str(), object.as_str(), role.as_str())),
            Assertion::Concept { .. } => None,
        })
    }

    /// A copy extended with additional concept assertions, registering any
    /// new individuals. Used when a query or hypothesis brings its own
    /// constraints into the ontology.
    pub fn with_concept_assertions<I>(&self, extra: I) -> Ontology
    where
        I: IntoIterator<Item = (String, Concept)>,
    {
        let mut out = self.clone();
        for (individual, concept) in extra {
            out.individuals.insert(individual.clone());
            out.assertions.push(Assertion::Concept { individual, concept });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_contributes_both_subsumptions() {
        let mut o = Ontology::new();
        o.declare_concept("A").declare_concept("B").declare_concept("C");
        o.add_axiom(Axiom::Equivalence(Concept::atomic("A"), Concept::atomic("B")));
        o.add_axiom(Axiom::Subsumption(Concept::atomic("B"), Concept::atomic("C")));
        let v = o.subsumption_view();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], (Concept::atomic("A"), Concept::atomic("B")));
        assert_eq!(v[1], (Concept::atomic("B"), Concept::atomic("A")));
        assert_eq!(v[2], (Concept::atomic("B"), Concept::atomic("C")));
    }

    #[test]
    fn undeclared_names_are_reported_sorted_by_kind() {
        let mut o = Ontology::new();
        o.declare_concept("Known");
        o.assert_concept("ir", Concept::some("Speaks", Concept::atomic("Unknown")));
        let missing = o.undeclared_names();
        assert_eq!(missing, vec!["Unknown", "Speaks", "ir"]);
    }

    #[test]
    fn extension_registers_new_individuals() {
        let mut o = Ontology::new();
        o.declare_concept("C").declare_individual("a");
        let extended =
            o.with_concept_assertions([("b".to_string(), Concept::atomic("C"))]);
        assert!(extended.individuals.contains("b"));
        assert_eq!(extended.assertions.len(), 1);
        assert_eq!(o.assertions.len(), 0);
    }
}
