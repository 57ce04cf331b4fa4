use super::{lex, parse_concept_expr, Diagnostic, Tok, TokenStream};
use crate::syntax::{Axiom, Ontology};

/// Parses an ontology file: name declarations, axioms, and assertions, each
/// terminated by a dot. Declarations may appear in any order; names must be
/// declared somewhere in the file before the whole ontology is accepted.
pub fn parse_ontology(src: &str) -> Result<Ontology, Diagnostic> {
    let mut ts = TokenStream::new(lex(src, '%', false)?);
    let mut onto = Ontology::new();

    while !ts.at_eof() {
        if ts.eat_ident("concept") {
            let name = ts.expect_cap_name("a concept name")?;
            ts.expect_sym(".")?;
            onto.declare_concept(&name);
            continue;
        }
        if ts.eat_ident("role") {
            let name = ts.expect_cap_name("a role name")?;
            ts.expect_sym(".")?;
            onto.declare_role(&name);
            continue;
        }
        if ts.eat_ident("individual") {
            let name = expect_individual(&mut ts)?;
            ts.expect_sym(".")?;
            onto.declare_individual(&name);
            continue;
        }
        // `(a, b) : R.` vs a parenthesized concept on an axiom's left side:
        // only the former has a comma right after the first name.
        if ts.at_sym("(") && is_name(ts.peek_at(1)) && matches!(ts.peek_at(2), Tok::Sym(",")) {
            ts.expect_sym("(")?;
            let subject = expect_individual(&mut ts)?;
            ts.expect_sym(",")?;
            let object = expect_individual(&mut ts)?;
            ts.expect_sym(")")?;
            ts.expect_sym(":")?;
            let role = ts.expect_cap_name("a role name")?;
            ts.expect_sym(".")?;
            onto.assert_role(&subject, &object, &role);
            continue;
        }
        if is_name(ts.peek()) && matches!(ts.peek_at(1), Tok::Sym(":")) {
            let individual = expect_individual(&mut ts)?;
            ts.expect_sym(":")?;
            let concept = parse_concept_expr(&mut ts)?;
            ts.expect_sym(".")?;
            onto.assert_concept(&individual, concept);
            continue;
        }

        let lhs = parse_concept_expr(&mut ts)?;
        let axiom = if ts.eat_sym("==") {
            Axiom::Equivalence(lhs, parse_concept_expr(&mut ts)?)
        } else if ts.eat_sym("<=") {
            Axiom::Subsumption(lhs, parse_concept_expr(&mut ts)?)
        } else {
            return Err(ts.error_here(format!(
                "expected '==' or '<=' after a concept, found {}",
                ts.peek().describe()
            )));
        };
        ts.expect_sym(".")?;
        onto.add_axiom(axiom);
    }

    let missing = onto.undeclared_names();
    if !missing.is_empty() {
        let (line, col) = ts.pos();
        return Err(Diagnostic::new(
            line,
            col,
            format!("undeclared names: {}", missing.join(", ")),
        ));
    }
    Ok(onto)
}

fn is_name(tok: &Tok) -> bool {
    matches!(tok, Tok::Ident(_) | Tok::Number(_) | Tok::Quoted(_))
}

fn expect_individual(ts: &mut TokenStream) -> Result<String, Diagnostic> {
    match ts.peek() {
        Tok::Ident(s) | Tok::Quoted(s) | Tok::Number(s) => {
            let s = s.clone();
            ts.bump();
            Ok(s)
        }
        other => Err(ts.error_here(format!(
            "expected an individual name, found {}",
            other.describe()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Assertion, Concept};

    #[test]
    fn declarations_axioms_and_assertions_parse() {
        let src = "
            % a small middle-east fragment
            concept Country.
            concept MiddleEastCountry.
            concept Language.
            role Hosts.
            individual IR.
            individual arab.
            individual 58.

            MiddleEastCountry <= Country and some(Hosts, Language).
            Country == not Language.
            IR : MiddleEastCountry.
            (IR, arab) : Hosts.
        ";
        let onto = parse_ontology(src).unwrap();
        assert_eq!(onto.concept_names.len(), 3);
        assert_eq!(onto.individuals.len(), 3);
        assert_eq!(onto.axioms.len(), 2);
        assert_eq!(
            onto.assertions[0],
            Assertion::Concept {
                individual: "IR".to_string(),
                concept: Concept::atomic("MiddleEastCountry"),
            }
        );
        assert_eq!(
            onto.assertions[1],
            Assertion::Role {
                subject: "IR".to_string(),
                object: "arab".to_string(),
                role: "Hosts".to_string(),
            }
        );
    }

    #[test]
    fn parenthesized_axiom_is_not_a_role_assertion() {
        let src = "
            concept A. concept B. concept C.
            (A and B) <= C.
        ";
        let onto = parse_ontology(src).unwrap();
        assert_eq!(onto.axioms.len(), 1);
    }

    #[test]
    fn undeclared_names_fail_the_whole_file() {
        let err = parse_ontology("concept A.\nB <= A.").unwrap_err();
        assert!(err.message.contains("undeclared names: B"), "{}", err.message);
    }

    #[test]
    fn first_error_aborts_with_position() {
        let err = parse_ontology("concept A.\nconcept b.").unwrap_err();
        assert_eq!((err.line, err.col), (2, 9));
    }

    #[test]
    fn quoted_individuals_normalize_to_bare_names() {
        let src = "concept C. individual 'IR'. 'IR' : C.";
        let onto = parse_ontology(src).unwrap();
        assert!(onto.individuals.contains("IR"));
    }
}
