use std::collections::BTreeSet;
use std::fmt;

use super::concept::Concept;
use super::term::{Substitution, Term};

/// An atom over a Datalog predicate, e.g. `speaks(X, Y)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DatalogAtom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl DatalogAtom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        DatalogAtom {
            predicate: predicate.to_string(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_const)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn apply(&self, s: &Substitution) -> DatalogAtom {
        DatalogAtom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| s.apply_term(t)).collect(),
        }
    }
}

impl fmt::Display for DatalogAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// A membership constraint `t : C` attached to a clause.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub term: Term,
    pub concept: Concept,
}

impl Constraint {
    pub fn new(term: Term, concept: Concept) -> Self {
        Constraint { term, concept }
    }

    pub fn apply(&self, s: &Substitution) -> Constraint {
        Constraint {
            term: s.apply_term(&self.term),
            concept: self.concept.clone(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.term, self.concept)
    }
}

/// A constrained Datalog clause: an optional head atom, a body of atoms, and
/// membership constraints on terms of the Datalog part.
///
/// Facts are clauses with a ground head and nothing else; goals (queries
/// posed with `?-`) have no head.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstrainedClause {
    pub head: Option<DatalogAtom>,
    pub body: Vec<DatalogAtom>,
    pub constraints: Vec<Constraint>,
}

impl ConstrainedClause {
    pub fn fact(atom: DatalogAtom) -> Self {
        ConstrainedClause {
            head: Some(atom),
            body: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn rule(head: DatalogAtom, body: Vec<DatalogAtom>, constraints: Vec<Constraint>) -> Self {
        ConstrainedClause {
            head: Some(head),
            body,
            constraints,
        }
    }

    pub fn goal(body: Vec<DatalogAtom>, constraints: Vec<Constraint>) -> Self {
        ConstrainedClause {
            head: None,
            body,
            constraints,
        }
    }

    pub fn is_fact(&self) -> bool {
        match &self.head {
            Some(h) => h.is_ground() && self.body.is_empty() && self.constraints.is_empty(),
            None => false,
        }
    }

    pub fn is_goal(&self) -> bool {
        self.head.is_none()
    }

    /// Atoms of the Datalog part: head (if any) followed by the body.
    pub fn datalog_atoms(&self) -> impl Iterator<Item = &DatalogAtom> {
        self.head.iter().chain(self.body.iter())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for atom in self.datalog_atoms() {
            out.extend(atom.vars().map(str::to_string));
        }
        for c in &self.constraints {
            if let Term::Var(v) = &c.term {
                out.insert(v.clone());
            }
        }
        out
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for atom in self.datalog_atoms() {
            for t in &atom.args {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        for c in &self.constraints {
            if let Term::Const(n) = &c.term {
                out.insert(n.clone());
            }
        }
        out
    }

    /// All terms of the clause, for object-identity checks.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for atom in self.datalog_atoms() {
            out.extend(atom.args.iter().cloned());
        }
        for c in &self.constraints {
            out.insert(c.term.clone());
        }
        out
    }

    pub fn apply_substitution(&self, s: &Substitution) -> ConstrainedClause {
        ConstrainedClause {
            head: self.head.as_ref().map(|h| h.apply(s)),
            body: self.body.iter().map(|a| a.apply(s)).collect(),
            constraints: self.constraints.iter().map(|c| c.apply(s)).collect(),
        }
    }

    /// Checks that the clause is linked and connected.
    ///
    /// Linked: every literal (body atom or constraint) contains a term
    /// reachable from the seed by a chain of shared terms. The seed is the
    /// head's terms, or the first literal's terms for headless goals.
    /// Connected: every head variable occurs in the body or a constraint.
    pub fn is_linked_connected(&self) -> bool {
        let literal_terms: Vec<BTreeSet<Term>> = self
            .body
            .iter()
            .map(|a| a.args.iter().cloned().collect())
            .chain(
                self.constraints
                    .iter()
                    .map(|c| [c.term.clone()].into_iter().collect()),
            )
            .collect();

        let mut reached: BTreeSet<Term> = match &self.head {
            Some(h) => h.args.iter().cloned().collect(),
            None => match literal_terms.first() {
                Some(ts) => ts.clone(),
                None => return true,
            },
        };

        let mut linked = vec![false; literal_terms.len()];
        loop {
            let mut changed = false;
            for (i, ts) in literal_terms.iter().enumerate() {
                if !linked[i] && ts.iter().any(|t| reached.contains(t)) {
                    linked[i] = true;
                    reached.extend(ts.iter().cloned());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !linked.iter().all(|&l| l) {
            return false;
        }

        if let Some(h) = &self.head {
            let mut non_head_vars: BTreeSet<&str> = BTreeSet::new();
            for a in &self.body {
                non_head_vars.extend(a.vars());
            }
            for c in &self.constraints {
                if let Term::Var(v) = &c.term {
                    non_head_vars.insert(v.as_str());
                }
            }
            if !h.vars().all(|v| non_head_vars.contains(v)) {
                return false;
            }
        }
        true
    }

    /// Renames variables so that none collides with `taken`. First-occurrence
    /// order is preserved; variables already free keep their names.
    pub fn rename_apart(&self, taken: &BTreeSet<String>) -> ConstrainedClause {
        let mut s = Substitution::new();
        let mut used: BTreeSet<String> = taken.clone();
        for v in self.vars_in_order() {
            if s.get(&v).is_some() {
                continue;
            }
            if !used.contains(&v) {
                used.insert(v.clone());
                continue;
            }
            let mut i = 1;
            let fresh = loop {
                let cand = format!("{v}{i}");
                if !used.contains(&cand) && !self.vars().contains(&cand) {
                    break cand;
                }
                i += 1;
            };
            used.insert(fresh.clone());
            s.bind(&v, Term::Var(fresh));
        }
        self.apply_substitution(&s)
    }

    /// Variables in first-occurrence order: head, then body atoms, then
    /// constraints.
    fn vars_in_order(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |v: &str| {
            if seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        };
        for atom in self.datalog_atoms() {
            for v in atom.vars() {
                push(v);
            }
        }
        for c in &self.constraints {
            if let Term::Var(v) = &c.term {
                push(v);
            }
        }
        out
    }

    /// A canonical rendering that is invariant under variable renaming and
    /// body-atom reordering, used to deduplicate candidate queries.
    ///
    /// Every body permutation is tried and the lexicographically least
    /// rendering wins; bodies longer than eight atoms fall back to a single
    /// sorted order, which is stable but not fully renaming-invariant.
    pub fn canonical_text(&self) -> String {
        if self.body.len() <= 8 {
            permutations(self.body.len())
                .map(|perm| self.render_permuted(&perm))
                .min()
                .unwrap_or_else(|| self.render_permuted(&[]))
        } else {
            let mut idx: Vec<usize> = (0..self.body.len()).collect();
            idx.sort_by_key(|&i| (self.body[i].predicate.clone(), self.body[i].args.len()));
            self.render_permuted(&idx)
        }
    }

    fn render_permuted(&self, perm: &[usize]) -> String {
        let permuted = ConstrainedClause {
            head: self.head.clone(),
            body: perm.iter().map(|&i| self.body[i].clone()).collect(),
            constraints: self.constraints.clone(),
        };
        let mut s = Substitution::new();
        let mut next = 0usize;
        for v in permuted.vars_in_order() {
            s.bind(&v, Term::Var(canonical_var_name(next)));
            next += 1;
        }
        let mut renamed = permuted.apply_substitution(&s);
        renamed.constraints.sort();
        renamed.to_string()
    }
}

fn canonical_var_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("V{i}")
    }
}

/// Iterator over all permutations of 0..n in lexicographic order.
fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    // Heap's algorithm materialized; n is at most 8 here.
    let mut out = vec![(0..n).collect::<Vec<_>>()];
    let mut cur: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cur.swap(0, i);
            } else {
                cur.swap(c[i], i);
            }
            out.push(cur.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out.into_iter()
}

impl fmt::Display for ConstrainedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Some(h) => {
                write!(f, "{h}")?;
                if !self.body.is_empty() || !self.constraints.is_empty() {
                    write!(f, " :- ")?;
                }
            }
            None => write!(f, "?- ")?,
        }
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        if !self.constraints.is_empty() {
            if !self.body.is_empty() {
                write!(f, " ")?;
            }
            write!(f, "& ")?;
            for (i, c) in self.constraints.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
        }
        write!(f, ".")
    }
}

/// Why a clause was rejected as an observed-predicate query.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QueryShapeError {
    #[error("query clause has no head")]
    MissingHead,
    #[error("query head must have exactly one argument, a variable")]
    HeadNotUnaryVariable,
    #[error("expected exactly one reference-concept constraint on {0}")]
    ReferenceConstraint(String),
    #[error("query clause is not linked and connected")]
    NotLinkedConnected,
}

/// A query about individuals of a reference concept: a constrained clause
/// with head `q(X)` whose distinguished variable X carries exactly one
/// constraint naming the reference concept.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OQuery {
    clause: ConstrainedClause,
    distinguished: String,
    reference: Concept,
}

impl OQuery {
    pub fn new(clause: ConstrainedClause, reference: Concept) -> Result<Self, QueryShapeError> {
        let head = clause.head.as_ref().ok_or(QueryShapeError::MissingHead)?;
        let distinguished = match head.args.as_slice() {
            [Term::Var(v)] => v.clone(),
            _ => return Err(QueryShapeError::HeadNotUnaryVariable),
        };
        let on_distinguished = clause
            .constraints
            .iter()
            .filter(|c| c.term == Term::Var(distinguished.clone()) && c.concept == reference)
            .count();
        if on_distinguished != 1 {
            return Err(QueryShapeError::ReferenceConstraint(distinguished));
        }
        if !clause.is_linked_connected() {
            return Err(QueryShapeError::NotLinkedConnected);
        }
        Ok(OQuery {
            clause,
            distinguished,
            reference,
        })
    }

    /// The trivial query `q(X) :- & X:C` answered by every individual of the
    /// reference concept.
    pub fn trivial(reference: Concept) -> Self {
        let x = Term::Var("X".to_string());
        let clause = ConstrainedClause::rule(
            DatalogAtom::new("q", vec![x.clone()]),
            Vec::new(),
            vec![Constraint::new(x, reference.clone())],
        );
        OQuery {
            clause,
            distinguished: "X".to_string(),
            reference,
        }
    }

    pub fn clause(&self) -> &ConstrainedClause {
        &self.clause
    }

    pub fn distinguished(&self) -> &str {
        &self.distinguished
    }

    pub fn reference_concept(&self) -> &Concept {
        &self.reference
    }

    pub fn canonical_text(&self) -> String {
        self.clause.canonical_text()
    }
}

impl fmt::Display for OQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clause)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::Var(n.into())
    }

    fn c(n: &str) -> Term {
        Term::Const(n.into())
    }

    fn speaks_query() -> ConstrainedClause {
        ConstrainedClause::rule(
            DatalogAtom::new("q", vec![v("X")]),
            vec![DatalogAtom::new("speaks", vec![v("X"), v("Y")])],
            vec![
                Constraint::new(v("X"), Concept::atomic("MiddleEastCountry")),
                Constraint::new(v("Y"), Concept::atomic("Language")),
            ],
        )
    }

    #[test]
    fn display_round_trips_shape() {
        assert_eq!(
            speaks_query().to_string(),
            "q(X) :- speaks(X, Y) & X:MiddleEastCountry, Y:Language."
        );
        let fact = ConstrainedClause::fact(DatalogAtom::new(
            "language",
            vec![c("IR"), c("Persian"), c("58")],
        ));
        assert_eq!(fact.to_string(), "language('IR', 'Persian', 58).");
        let goal = ConstrainedClause::goal(
            vec![DatalogAtom::new("speaks", vec![c("IR"), v("Y")])],
            vec![Constraint::new(v("Y"), Concept::atomic("Language"))],
        );
        assert_eq!(goal.to_string(), "?- speaks('IR', Y) & Y:Language.");
    }

    #[test]
    fn grounding_substitutes_everywhere() {
        let s = Substitution::from_pairs([
            ("X".to_string(), c("IR")),
            ("Y".to_string(), c("Persian")),
        ]);
        let g = speaks_query().apply_substitution(&s);
        assert_eq!(
            g.to_string(),
            "q('IR') :- speaks('IR', 'Persian') & 'IR':MiddleEastCountry, 'Persian':Language."
        );
        assert!(g.vars().is_empty());
    }

    #[test]
    fn linked_and_connected_holds_for_chained_body() {
        assert!(speaks_query().is_linked_connected());
        let chained = ConstrainedClause::rule(
            DatalogAtom::new("q", vec![v("X")]),
            vec![
                DatalogAtom::new("p", vec![v("X"), v("Y")]),
                DatalogAtom::new("r", vec![v("Y"), v("Z")]),
            ],
            vec![],
        );
        assert!(chained.is_linked_connected());
    }

    #[test]
    fn isolated_atom_breaks_linkedness() {
        let mut q = speaks_query();
        q.body.push(DatalogAtom::new("r", vec![v("Z"), v("W")]));
        assert!(!q.is_linked_connected());
    }

    #[test]
    fn head_variable_missing_from_body_breaks_connectedness() {
        let q = ConstrainedClause::rule(
            DatalogAtom::new("q", vec![v("X"), v("W")]),
            vec![DatalogAtom::new("p", vec![v("X"), v("Y")])],
            vec![],
        );
        assert!(!q.is_linked_connected());
    }

    #[test]
    fn trivial_query_is_linked_via_its_constraint() {
        let t = OQuery::trivial(Concept::atomic("MiddleEastCountry"));
        assert_eq!(t.to_string(), "q(X) :- & X:MiddleEastCountry.");
        assert!(t.clause().is_linked_connected());
    }

    #[test]
    fn canonical_text_ignores_names_and_order() {
        let a = ConstrainedClause::rule(
            DatalogAtom::new("q", vec![v("X")]),
            vec![
                DatalogAtom::new("believes", vec![v("X"), v("Y")]),
                DatalogAtom::new("speaks", vec![v("X"), v("Z")]),
            ],
            vec![
                Constraint::new(v("X"), Concept::atomic("MiddleEastCountry")),
                Constraint::new(v("Z"), Concept::atomic("Language")),
            ],
        );
        let b = ConstrainedClause::rule(
            DatalogAtom::new("q", vec![v("U")]),
            vec![
                DatalogAtom::new("speaks", vec![v("U"), v("B")]),
                DatalogAtom::new("believes", vec![v("U"), v("A")]),
            ],
            vec![
                Constraint::new(v("B"), Concept::atomic("Language")),
                Constraint::new(v("U"), Concept::atomic("MiddleEastCountry")),
            ],
        );
        assert_eq!(a.canonical_text(), b.canonical_text());
        let mut distinct = a.clone();
        distinct.constraints.pop();
        assert_ne!(a.canonical_text(), distinct.canonical_text());
    }

    #[test]
    fn rename_apart_avoids_collisions() {
        let taken: BTreeSet<String> = ["X".to_string(), "Y".to_string()].into_iter().collect();
        let renamed = speaks_query().rename_apart(&taken);
        assert!(renamed.vars().is_disjoint(&taken));
        assert_eq!(renamed.body.len(), 1);
    }

    #[test]
    fn query_shape_is_validated() {
        let r = Concept::atomic("MiddleEastCountry");
        assert!(OQuery::new(speaks_query(), r.clone()).is_ok());

        let mut missing = speaks_query();
        missing.constraints.remove(0);
        assert_eq!(
            OQuery::new(missing, r.clone()),
            Err(QueryShapeError::ReferenceConstraint("X".to_string()))
        );

        let goal = ConstrainedClause::goal(vec![], vec![]);
        assert_eq!(OQuery::new(goal, r), Err(QueryShapeError::MissingHead));
    }
}
