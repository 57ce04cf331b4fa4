//! Generality order on constrained clauses relative to a background
//! knowledge base.
//!
//! h1 subsumes h2 when some substitution maps h1's variables into h2's
//! terms (or background constants), equates the heads, and makes the body
//! of h1 provable from the base extended with a skolemized body of h2. The
//! substitution must respect object identity: distinct terms of h1 keep
//! distinct images. Skolem constants are scoped to one test and never leak
//! into results.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::Engine;
use crate::limits::{Limits, ResourceError};
use crate::syntax::{
    is_oi_substitution, Concept, ConstrainedClause, KnowledgeBase, Substitution, Term,
};

/// The Skolem substitution of one subsumption test: each variable of the
/// skolemized clause maps to a fresh constant absent from the base and from
/// both clauses.
#[derive(Clone, Debug, Default)]
pub struct SkolemMap {
    to_const: BTreeMap<String, String>,
}

impl SkolemMap {
    pub fn is_empty(&self) -> bool {
        self.to_const.is_empty()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &str)> {
        self.to_const.iter().map(|(v, c)| (v.as_str(), c.as_str()))
    }

    pub fn fresh_constants(&self) -> impl Iterator<Item = &str> {
        self.to_const.values().map(String::as_str)
    }

    fn substitution(&self) -> Substitution {
        Substitution::from_pairs(
            self.to_const
                .iter()
                .map(|(v, c)| (v.clone(), Term::Const(c.clone()))),
        )
    }

    fn invert(&self) -> BTreeMap<String, String> {
        self.to_const.iter().map(|(v, c)| (c.clone(), v.clone())).collect()
    }
}

/// How two clauses relate under the generality order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparisonOutcome {
    MoreGeneral,
    LessGeneral,
    Equivalent,
    Incomparable,
}

/// A successful subsumption test's evidence: the variable mapping from the
/// more general clause into the other clause's terms, and the Skolem
/// substitution the proof ran under.
#[derive(Clone, Debug)]
pub struct Witness {
    pub theta: Substitution,
    pub sigma: SkolemMap,
}

/// A clause set standing for one concept description. Single-clause for
/// plain patterns; unions arise from most-general-descriptions of
/// incomparable patterns.
pub type Intension = Vec<ConstrainedClause>;

/// Maps each variable of the clause to a fresh constant unused anywhere in
/// the base or the clause. Variables are processed in name order.
pub fn skolemize(h: &ConstrainedClause, kb: &KnowledgeBase) -> (ConstrainedClause, SkolemMap) {
    let mut forbidden: BTreeSet<String> = kb.sigma.individuals.clone();
    forbidden.extend(kb.program_constants());
    for t in h.terms() {
        if let Term::Const(c) = t {
            forbidden.insert(c.clone());
        }
    }
    let mut map = SkolemMap::default();
    let mut counter = 0usize;
    for v in h.vars() {
        let fresh = loop {
            let candidate = format!("_sk{counter}");
            counter += 1;
            if !forbidden.contains(&candidate) {
                break candidate;
            }
        };
        forbidden.insert(fresh.clone());
        map.to_const.insert(v, fresh);
    }
    (h.apply_substitution(&map.substitution()), map)
}

/// Does h1 subsume h2 relative to the base?
pub fn b_subsumes(
    h1: &ConstrainedClause,
    h2: &ConstrainedClause,
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<bool, ResourceError> {
    Ok(b_subsumes_witness(h1, h2, kb, limits)?.is_some())
}

/// Like `b_subsumes`, returning the first witness found.
pub fn b_subsumes_witness(
    h1: &ConstrainedClause,
    h2: &ConstrainedClause,
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<Option<Witness>, ResourceError> {
    let (Some(head1), Some(head2)) = (&h1.head, &h2.head) else {
        return Ok(None);
    };
    if head1.predicate != head2.predicate || head1.arity() != head2.arity() {
        return Ok(None);
    }

    let (h2_ground, sigma) = skolemize(h2, kb);

    // The base extended with the skolemized body: atoms become facts,
    // constraints become assertions, fresh constants become individuals.
    let mut sigma_ext = kb.sigma.with_concept_assertions(
        h2_ground
            .constraints
            .iter()
            .map(|c| (c.term.name().to_string(), c.concept.clone())),
    );
    for fresh in sigma.fresh_constants() {
        sigma_ext.declare_individual(fresh);
    }
    let mut pi = kb.pi.clone();
    pi.extend(h2_ground.body.iter().cloned().map(ConstrainedClause::fact));
    let extended = KnowledgeBase::new(sigma_ext, pi);
    let engine = Engine::new(&extended, limits);

    // Head equation seeds the assignment, in the skolemized image space.
    let mut image = Substitution::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let skolem_of = sigma.substitution();
    for (t1, t2) in head1.args.iter().zip(&head2.args) {
        let target = match skolem_of.apply_term(t2) {
            Term::Const(c) => c,
            Term::Var(_) => unreachable!("skolemization grounds every variable"),
        };
        match t1 {
            Term::Const(c) => {
                if *c != target {
                    return Ok(None);
                }
            }
            Term::Var(v) => match image.apply_term(t1) {
                Term::Const(prior) => {
                    if prior != target {
                        return Ok(None);
                    }
                }
                Term::Var(_) => {
                    if !used.insert(target.clone()) {
                        // Two head variables of h1 against one h2 term would
                        // break object identity.
                        return Ok(None);
                    }
                    image.bind(v, Term::Const(target));
                }
            },
        }
    }

    let mut search = ThetaSearch {
        engine: &engine,
        h1,
        candidate_cap: limits.theta_candidates,
        candidates: 0,
        inverse: sigma.invert(),
    };
    let theta = search.run(&mut image, &mut used)?;
    Ok(theta.map(|theta| Witness { theta, sigma }))
}

struct ThetaSearch<'e, 'k> {
    engine: &'e Engine<'k>,
    h1: &'e ConstrainedClause,
    candidate_cap: usize,
    candidates: usize,
    /// Skolem constant back to the variable it stands for.
    inverse: BTreeMap<String, String>,
}

impl ThetaSearch<'_, '_> {
    fn run(
        &mut self,
        image: &mut Substitution,
        used: &mut BTreeSet<String>,
    ) -> Result<Option<Substitution>, ResourceError> {
        self.assign_atom(0, image, used)
    }

    /// Backtracks over per-atom derivable instances, extending the
    /// assignment variable by variable under the object-identity pruning.
    fn assign_atom(
        &mut self,
        i: usize,
        image: &mut Substitution,
        used: &mut BTreeSet<String>,
    ) -> Result<Option<Substitution>, ResourceError> {
        let Some(atom) = self.h1.body.get(i) else {
            return self.finish(image, used);
        };
        let pattern = atom.apply(image);
        for instance in self.engine.derivable_instances(&pattern) {
            let mut extension: BTreeMap<String, String> = BTreeMap::new();
            let mut ok = true;
            for (p, g) in pattern.args.iter().zip(&instance.args) {
                let Term::Const(c) = g else { unreachable!("instances are ground") };
                match p {
                    Term::Const(pc) => {
                        if pc != c {
                            ok = false;
                            break;
                        }
                    }
                    Term::Var(v) => match extension.get(v) {
                        Some(prior) if prior != c => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            if used.contains(c) || extension.values().any(|e| e == c) {
                                ok = false;
                                break;
                            }
                            extension.insert(v.clone(), c.clone());
                        }
                    },
                }
            }
            if !ok {
                continue;
            }
            for (v, c) in &extension {
                image.bind(v, Term::Const(c.clone()));
                used.insert(c.clone());
            }
            let found = self.assign_atom(i + 1, image, used)?;
            for (v, c) in &extension {
                image.unbind(v);
                used.remove(c);
            }
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// All body atoms assigned: check the candidate count, object identity
    /// over the whole clause, and finally provability of the instantiated
    /// body together with its constraints.
    fn finish(
        &mut self,
        image: &Substitution,
        used: &mut BTreeSet<String>,
    ) -> Result<Option<Substitution>, ResourceError> {
        // A variable can occur in the head or constraints only; linked
        // clauses do not produce these, but stay total and enumerate.
        let unassigned: Vec<String> = self
            .h1
            .vars()
            .into_iter()
            .filter(|v| matches!(image.apply_term(&Term::Var(v.clone())), Term::Var(_)))
            .collect();
        if let Some(v) = unassigned.first() {
            let universe: Vec<String> = self
                .engine
                .kb()
                .sigma
                .individuals
                .iter()
                .filter(|c| !used.contains(*c))
                .cloned()
                .collect();
            for c in universe {
                let mut image2 = image.clone();
                image2.bind(v, Term::Const(c.clone()));
                used.insert(c.clone());
                let found = self.finish(&image2, used)?;
                used.remove(&c);
                if found.is_some() {
                    return Ok(found);
                }
            }
            return Ok(None);
        }

        self.candidates += 1;
        if self.candidates > self.candidate_cap {
            return Err(ResourceError::ThetaCandidates(self.candidate_cap));
        }

        let theta = self.to_clause_space(image);
        if !is_oi_substitution(&theta, &self.h1.terms()) {
            return Ok(None);
        }
        let grounded = self.h1.apply_substitution(image);
        let goal = ConstrainedClause::goal(grounded.body, grounded.constraints);
        if self.engine.answer_ground_query(&goal)? {
            Ok(Some(theta))
        } else {
            Ok(None)
        }
    }

    /// Rewrites an image-space assignment (variables to constants, Skolem
    /// constants included) back into clause space, where Skolem constants
    /// name the variables they stand for.
    fn to_clause_space(&self, image: &Substitution) -> Substitution {
        Substitution::from_pairs(image.iter().map(|(v, t)| {
            let mapped = match t {
                Term::Const(c) => match self.inverse.get(c) {
                    Some(var) => Term::Var(var.clone()),
                    None => Term::Const(c.clone()),
                },
                Term::Var(_) => unreachable!("assignments are ground"),
            };
            (v.clone(), mapped)
        }))
    }
}

/// Classification of the two directed subsumption tests.
pub fn compare(
    h1: &ConstrainedClause,
    h2: &ConstrainedClause,
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<ComparisonOutcome, ResourceError> {
    let forward = b_subsumes(h1, h2, kb, limits)?;
    let backward = b_subsumes(h2, h1, kb, limits)?;
    Ok(match (forward, backward) {
        (true, true) => ComparisonOutcome::Equivalent,
        (true, false) => ComparisonOutcome::MoreGeneral,
        (false, true) => ComparisonOutcome::LessGeneral,
        (false, false) => ComparisonOutcome::Incomparable,
    })
}

/// Does every clause of s2 fall under some clause of s1? On single-clause
/// sets this is exactly clause subsumption.
pub fn intension_subsumes(
    s1: &[ConstrainedClause],
    s2: &[ConstrainedClause],
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<bool, ResourceError> {
    for c2 in s2 {
        let mut covered = false;
        for c1 in s1 {
            if b_subsumes(c1, c2, kb, limits)? {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Most general description of the intensions, folding left in insertion
/// order: a comparable pair keeps the more general side (the first on
/// equivalence); an incomparable pair unions the clause sets.
pub fn mgd(
    intensions: &[Intension],
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<Intension, ResourceError> {
    let Some((first, rest)) = intensions.split_first() else {
        return Ok(Vec::new());
    };
    let mut acc = first.clone();
    for s in rest {
        if intension_subsumes(&acc, s, kb, limits)? {
            continue;
        }
        if intension_subsumes(s, &acc, kb, limits)? {
            acc = s.clone();
            continue;
        }
        for clause in s {
            let dup = acc
                .iter()
                .any(|c| c.canonical_text() == clause.canonical_text());
            if !dup {
                acc.push(clause.clone());
            }
        }
    }
    Ok(acc)
}

/// Most specific description of the intensions, folding left in insertion
/// order: a comparable pair keeps the more specific side (the first on
/// equivalence); an incomparable pair conjoins into a single clause.
/// Conjunction is defined for single-clause intensions.
pub fn msd(
    intensions: &[Intension],
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<Intension, ResourceError> {
    let Some((first, rest)) = intensions.split_first() else {
        return Ok(Vec::new());
    };
    let mut acc = first.clone();
    for s in rest {
        let forward = intension_subsumes(&acc, s, kb, limits)?;
        let backward = intension_subsumes(s, &acc, kb, limits)?;
        match (forward, backward) {
            (true, true) | (false, true) => {}
            (true, false) => acc = s.clone(),
            (false, false) => {
                assert!(
                    acc.len() == 1 && s.len() == 1,
                    "conjunction needs single-clause intensions"
                );
                acc = vec![conjoin_clauses(&acc[0], &s[0])];
            }
        }
    }
    Ok(acc)
}

/// Single-clause conjunction: the second clause's distinguished variables
/// are identified with the first's, its other variables get a numeric
/// suffix where they collide, and the bodies and constraints are
/// concatenated with exact duplicates dropped.
pub fn conjoin_clauses(c1: &ConstrainedClause, c2: &ConstrainedClause) -> ConstrainedClause {
    let (Some(h1), Some(h2)) = (&c1.head, &c2.head) else {
        panic!("conjunction needs headed clauses");
    };
    assert_eq!(h1.predicate, h2.predicate, "conjunction needs a shared head");
    assert_eq!(h1.arity(), h2.arity(), "conjunction needs a shared head");

    let mut rename = Substitution::new();
    for (t1, t2) in h1.args.iter().zip(&h2.args) {
        if let (Term::Var(v2), t1) = (t2, t1) {
            rename.bind(v2, t1.clone());
        }
    }
    let aligned = c2.apply_substitution(&rename);

    let head_vars: BTreeSet<String> = h1.vars().map(str::to_string).collect();
    let mut taken: BTreeSet<String> = c1.vars();
    taken.extend(aligned.vars());
    let mut suffixes = Substitution::new();
    for v in ordered_vars(&aligned) {
        if head_vars.contains(&v) || !c1.vars().contains(&v) {
            continue;
        }
        let mut n = 1usize;
        let fresh = loop {
            let candidate = format!("{v}{n}");
            n += 1;
            if !taken.contains(&candidate) {
                break candidate;
            }
        };
        taken.insert(fresh.clone());
        suffixes.bind(&v, Term::Var(fresh));
    }
    let renamed = aligned.apply_substitution(&suffixes);

    let mut body = c1.body.clone();
    for atom in renamed.body {
        if !body.contains(&atom) {
            body.push(atom);
        }
    }
    let mut constraints = c1.constraints.clone();
    for c in renamed.constraints {
        if !constraints.contains(&c) {
            constraints.push(c);
        }
    }
    ConstrainedClause::rule(h1.clone(), body, constraints)
}

/// Non-head variables in first-occurrence order over body then constraints.
fn ordered_vars(clause: &ConstrainedClause) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for atom in &clause.body {
        for v in atom.vars() {
            if seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        }
    }
    for c in &clause.constraints {
        if let Term::Var(v) = &c.term {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
    }
    out
}

/// Union of per-clause answer sets: the extension of a (possibly
/// multi-clause) intension under one reference concept.
pub fn intension_answer_set(
    intension: &[ConstrainedClause],
    c_ref: &Concept,
    kb: &KnowledgeBase,
    limits: Limits,
) -> Result<BTreeSet<String>, ResourceError> {
    let engine = Engine::new(kb, limits);
    let mut out = BTreeSet::new();
    for clause in intension {
        let q = crate::syntax::OQuery::new(clause.clone(), c_ref.clone())
            .expect("intension clauses are well-formed O-queries");
        out.extend(engine.answer_set(&q)?);
    }
    Ok(out)
}
