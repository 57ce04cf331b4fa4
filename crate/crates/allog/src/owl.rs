//! RDF/XML rendering of an ontology over an OWL subset.
//!
//! Every declaration, axiom, and assertion becomes one fragment inside a
//! single `rdf:RDF` envelope: complement, intersection, union, and the two
//! restrictions render as their OWL class expressions, equivalence as
//! `owl:sameAs`, subsumption as `rdfs:subClassOf`, concept assertions as
//! typed individuals, role assertions as property elements. Atomic
//! operands render as resource references; nested expressions render
//! inline. Output is byte-stable: declarations print in name order,
//! axioms and assertions in storage order.

use std::fmt::Write as _;

use crate::syntax::{Assertion, Axiom, Concept, Ontology};

/// One XML element; attribute names are fixed by the vocabulary, values
/// are escaped on render.
struct Element {
    tag: String,
    attrs: Vec<(&'static str, String)>,
    children: Vec<Element>,
}

impl Element {
    fn new(tag: impl Into<String>) -> Element {
        Element {
            tag: tag.into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    fn attr(mut self, name: &'static str, value: &str) -> Element {
        self.attrs.push((name, value.to_string()));
        self
    }

    fn child(mut self, child: Element) -> Element {
        self.children.push(child);
        self
    }

    fn render(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let _ = write!(out, "{pad}<{}", self.tag);
        for (name, value) in &self.attrs {
            let _ = write!(out, " {name}=\"{}\"", escape(value));
        }
        if self.children.is_empty() {
            out.push_str(" />\n");
        } else {
            out.push_str(">\n");
            for child in &self.children {
                child.render(out, depth + 1);
            }
            let _ = writeln!(out, "{pad}</{}>", self.tag);
        }
    }
}

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn class_expression(concept: &Concept) -> Element {
    match concept {
        Concept::Top => Element::new("owl:Thing"),
        Concept::Bottom => Element::new("owl:Nothing"),
        Concept::Atomic(name) => Element::new("owl:Class").attr("rdf:ID", name),
        Concept::Not(inner) => Element::new("owl:Class")
            .child(Element::new("owl:complementOf").child(class_expression(inner))),
        Concept::And(a, b) => Element::new("owl:Class").child(
            Element::new("owl:intersectionOf")
                .attr("rdf:parseType", "Collection")
                .child(class_expression(a))
                .child(class_expression(b)),
        ),
        Concept::Or(a, b) => Element::new("owl:Class").child(
            Element::new("owl:unionOf")
                .attr("rdf:parseType", "Collection")
                .child(class_expression(a))
                .child(class_expression(b)),
        ),
        Concept::Some(role, filler) => Element::new("owl:Restriction")
            .child(Element::new("owl:onProperty").attr("rdf:resource", &format!("#{role}")))
            .child(filler_element("owl:someValuesFrom", filler)),
        Concept::All(role, filler) => Element::new("owl:Restriction")
            .child(Element::new("owl:onProperty").attr("rdf:resource", &format!("#{role}")))
            .child(filler_element("owl:allValuesFrom", filler)),
    }
}

/// An atomic operand of a relation stays a resource reference; anything
/// else nests its class expression.
fn filler_element(tag: &'static str, concept: &Concept) -> Element {
    match concept {
        Concept::Atomic(name) => Element::new(tag).attr("rdf:resource", &format!("#{name}")),
        other => Element::new(tag).child(class_expression(other)),
    }
}

/// The subject of an axiom: a named class when atomic, the inline
/// expression otherwise, with the relation element as final child.
fn axiom_element(lhs: &Concept, relation: Element) -> Element {
    match lhs {
        Concept::Atomic(name) => Element::new("owl:Class")
            .attr("rdf:ID", name)
            .child(relation),
        other => class_expression(other).child(relation),
    }
}

fn assertion_element(assertion: &Assertion) -> Element {
    match assertion {
        Assertion::Concept {
            individual,
            concept: Concept::Atomic(name),
        } => Element::new(name.as_str()).attr("rdf:ID", individual),
        Assertion::Concept {
            individual,
            concept,
        } => Element::new("owl:Thing")
            .attr("rdf:ID", individual)
            .child(Element::new("rdf:type").child(class_expression(concept))),
        Assertion::Role {
            subject,
            object,
            role,
        } => Element::new("owl:Thing")
            .attr("rdf:ID", subject)
            .child(Element::new(role.as_str()).attr("rdf:resource", &format!("#{object}"))),
    }
}

/// Renders the ontology as a single RDF/XML document.
pub fn export_owl(sigma: &Ontology) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\"?>\n\
         <rdf:RDF xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\"\n\
         \u{20}        xmlns:rdfs=\"http://www.w3.org/2000/01/rdf-schema#\"\n\
         \u{20}        xmlns:owl=\"http://www.w3.org/2002/07/owl#\">\n",
    );
    for name in &sigma.concept_names {
        Element::new("owl:Class").attr("rdf:ID", name).render(&mut out, 1);
    }
    for name in &sigma.role_names {
        Element::new("owl:ObjectProperty")
            .attr("rdf:ID", name)
            .render(&mut out, 1);
    }
    for name in &sigma.individuals {
        Element::new("owl:Thing").attr("rdf:ID", name).render(&mut out, 1);
    }
    for axiom in &sigma.axioms {
        let element = match axiom {
            Axiom::Equivalence(lhs, rhs) => axiom_element(lhs, filler_element("owl:sameAs", rhs)),
            Axiom::Subsumption(lhs, rhs) => {
                axiom_element(lhs, filler_element("rdfs:subClassOf", rhs))
            }
        };
        element.render(&mut out, 1);
    }
    for assertion in &sigma.assertions {
        assertion_element(assertion).render(&mut out, 1);
    }
    out.push_str("</rdf:RDF>\n");
    out
}
