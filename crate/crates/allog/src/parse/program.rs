use super::{lex, parse_concept_expr, Diagnostic, Tok, TokenStream};
use crate::syntax::{ConstrainedClause, Constraint, DatalogAtom, Term};

/// Parses a constrained program: facts, rules, and `?-` goals. Constraints
/// follow the body atoms after an `&`; a rule may have constraints and no
/// atoms.
pub fn parse_program(src: &str) -> Result<Vec<ConstrainedClause>, Diagnostic> {
    let mut ts = TokenStream::new(lex(src, '%', false)?);
    let mut clauses = Vec::new();
    while !ts.at_eof() {
        if ts.eat_sym("?-") {
            let (body, constraints) = parse_body(&mut ts)?;
            ts.expect_sym(".")?;
            clauses.push(ConstrainedClause::goal(body, constraints));
            continue;
        }
        let head = parse_atom(&mut ts)?;
        if ts.eat_sym(".") {
            clauses.push(ConstrainedClause {
                head: Some(head),
                body: Vec::new(),
                constraints: Vec::new(),
            });
            continue;
        }
        ts.expect_sym(":-")?;
        let (body, constraints) = parse_body(&mut ts)?;
        ts.expect_sym(".")?;
        clauses.push(ConstrainedClause::rule(head, body, constraints));
    }
    Ok(clauses)
}

fn parse_body(
    ts: &mut TokenStream,
) -> Result<(Vec<DatalogAtom>, Vec<Constraint>), Diagnostic> {
    let mut atoms = Vec::new();
    if !ts.at_sym("&") && !ts.at_sym(".") {
        atoms.push(parse_atom(ts)?);
        while ts.eat_sym(",") {
            atoms.push(parse_atom(ts)?);
        }
    }
    let mut constraints = Vec::new();
    if ts.eat_sym("&") {
        constraints.push(parse_constraint(ts)?);
        while ts.eat_sym(",") {
            constraints.push(parse_constraint(ts)?);
        }
    }
    if atoms.is_empty() && constraints.is_empty() {
        return Err(ts.error_here("a clause body needs at least one atom or constraint"));
    }
    Ok((atoms, constraints))
}

fn parse_atom(ts: &mut TokenStream) -> Result<DatalogAtom, Diagnostic> {
    let predicate = match ts.peek() {
        Tok::Ident(w) if w.chars().next().is_some_and(|c| c.is_ascii_lowercase()) => {
            let w = w.clone();
            ts.bump();
            w
        }
        other => {
            return Err(ts.error_here(format!(
                "expected a predicate name (lowercase), found {}",
                other.describe()
            )))
        }
    };
    ts.expect_sym("(")?;
    let mut args = vec![parse_term(ts)?];
    while ts.eat_sym(",") {
        args.push(parse_term(ts)?);
    }
    ts.expect_sym(")")?;
    Ok(DatalogAtom { predicate, args })
}

fn parse_term(ts: &mut TokenStream) -> Result<Term, Diagnostic> {
    match ts.peek() {
        Tok::Ident(w) => {
            let term = if w.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                Term::Var(w.clone())
            } else {
                Term::Const(w.clone())
            };
            ts.bump();
            Ok(term)
        }
        Tok::Quoted(s) | Tok::Number(s) => {
            let t = Term::Const(s.clone());
            ts.bump();
            Ok(t)
        }
        other => Err(ts.error_here(format!("expected a term, found {}", other.describe()))),
    }
}

fn parse_constraint(ts: &mut TokenStream) -> Result<Constraint, Diagnostic> {
    let term = parse_term(ts)?;
    ts.expect_sym(":")?;
    let concept = parse_concept_expr(ts)?;
    Ok(Constraint { term, concept })
}
