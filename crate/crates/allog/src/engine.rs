//! Query answering over a hybrid knowledge base by constrained SLD
//! resolution.
//!
//! Resolution works on the Datalog part alone: constraints never take part
//! in unification, they accumulate along each branch until the atom list is
//! empty (a constrained empty clause). A ground query is proved when the
//! ontology entails the disjunction of the surviving constraint sets, one
//! disjunct per derivation; a single derivation is not enough when the
//! ontology only supports a disjunctive case split.
//!
//! Selection is leftmost. Clauses are tried facts first, then rules, each
//! group in program order. Ground subgoals are tabled; re-entering a ground
//! subgoal already on the call stack cuts that branch, which is harmless
//! because any proof through the cycle has a shorter variant whose final
//! constraint set is a subset. Non-ground recursion is cut by the depth cap
//! and reported through a truncation flag: a truncated search can miss
//! derivations but never invents one.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

use crate::limits::{Limits, ResourceError};
use crate::syntax::{
    is_oi_substitution, Concept, ConstrainedClause, Constraint, DatalogAtom, KnowledgeBase,
    OQuery, Observation, Substitution, Term,
};
use crate::tableau::Reasoner;

/// Ground membership constraints of a finished derivation: one merged
/// concept per constant (conjunction of everything collected for it).
pub type ConstraintSet = BTreeMap<String, Concept>;

/// Individuals answering an O-query, each standing for a binding of the
/// distinguished variable.
pub type AnswerSet = BTreeSet<String>;

/// One successful derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    /// Resolvents from the initial goal to the constrained empty clause.
    pub trace: Vec<ConstrainedClause>,
    /// Final bindings of the original goal's variables, all to constants.
    pub bindings: Substitution,
    /// Final constraint set, merged per constant.
    pub constraints: ConstraintSet,
}

/// Every derivation found for a goal (deduplicated by bindings and
/// constraint set), plus whether the depth cap cut any branch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResolutionOutcome {
    pub derivations: Vec<Derivation>,
    pub truncated: bool,
}

/// Failure modes beyond resource ceilings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("reference concept has no instances")]
    EmptyReference,
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

/// Resolution and entailment over one knowledge base. Ground-subgoal memos
/// and ontology-entailment caches live for the lifetime of the engine, so
/// reuse one engine for a batch of queries against the same base.
pub struct Engine<'a> {
    kb: &'a KnowledgeBase,
    reasoner: Reasoner<'a>,
    limits: Limits,
    /// Clause positions in `kb.pi` per predicate signature: facts first,
    /// then rules, each in program order. Headless clauses are not indexed.
    index: BTreeMap<(String, usize), Vec<usize>>,
    table: RefCell<BTreeMap<DatalogAtom, Vec<ConstraintSet>>>,
    in_progress: RefCell<BTreeSet<DatalogAtom>>,
}

impl<'a> Engine<'a> {
    pub fn new(kb: &'a KnowledgeBase, limits: Limits) -> Self {
        let mut index: BTreeMap<(String, usize), Vec<usize>> = BTreeMap::new();
        for (i, clause) in kb.pi.iter().enumerate() {
            if let Some(h) = &clause.head {
                if clause.is_fact() {
                    index.entry((h.predicate.clone(), h.arity())).or_default().push(i);
                }
            }
        }
        for (i, clause) in kb.pi.iter().enumerate() {
            if let Some(h) = &clause.head {
                if !clause.is_fact() {
                    index.entry((h.predicate.clone(), h.arity())).or_default().push(i);
                }
            }
        }
        Engine {
            kb,
            reasoner: Reasoner::new(&kb.sigma, limits),
            limits,
            index,
            table: RefCell::new(BTreeMap::new()),
            in_progress: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.kb
    }

    pub fn reasoner(&self) -> &Reasoner<'a> {
        &self.reasoner
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    /// All derivations of the goal's body under its constraints. The clause
    /// must be headless; variables are allowed and their final bindings are
    /// reported per derivation.
    pub fn resolve_all(&self, goal: &ConstrainedClause) -> ResolutionOutcome {
        debug_assert!(goal.is_goal(), "resolve_all expects a headless goal");
        let original_vars = goal.vars();
        let mut eval = Eval {
            engine: self,
            original_vars,
            truncated: false,
            cuts: BTreeSet::new(),
            derivations: Vec::new(),
        };
        let initial = ConstrainedClause::goal(goal.body.clone(), goal.constraints.clone());
        eval.solve(
            &goal.body,
            &goal.constraints,
            &Substitution::new(),
            0,
            &[initial],
            true,
        );
        debug_assert!(eval.cuts.is_empty(), "cycle cuts must discharge within the call");

        let mut seen = BTreeSet::new();
        let mut derivations = Vec::new();
        for d in eval.derivations {
            let key: (Vec<(String, Term)>, ConstraintSet) = (
                d.bindings.iter().map(|(v, t)| (v.clone(), t.clone())).collect(),
                d.constraints.clone(),
            );
            if seen.insert(key) {
                derivations.push(d);
            }
        }
        ResolutionOutcome {
            derivations,
            truncated: eval.truncated,
        }
    }

    /// Is the ground goal a consequence of the knowledge base? True iff the
    /// ontology entails the disjunction of the derivations' constraint sets.
    /// Remaining variables in the goal are read existentially. A truncated
    /// search can only under-approximate.
    pub fn answer_ground_query(&self, goal: &ConstrainedClause) -> Result<bool, ResourceError> {
        let outcome = self.resolve_all(goal);
        let disjuncts: Vec<Vec<(String, Concept)>> = outcome
            .derivations
            .iter()
            .map(|d| constraint_pairs(&d.constraints))
            .collect();
        self.reasoner.entails_ground_disjunction(&disjuncts)
    }

    /// Provable bindings of a goal with variables: derivations are grouped
    /// by their bindings and each group's constraint disjunction is checked
    /// separately. Unlike `answer_ground_query`, which pools all derivations
    /// into one existential disjunction, this reports only bindings that are
    /// provable on their own.
    pub fn answers(
        &self,
        goal: &ConstrainedClause,
    ) -> Result<Vec<(Substitution, Vec<ConstraintSet>)>, ResourceError> {
        let outcome = self.resolve_all(goal);
        let mut groups: BTreeMap<Vec<(String, Term)>, Vec<ConstraintSet>> = BTreeMap::new();
        for d in outcome.derivations {
            let key = d.bindings.iter().map(|(v, t)| (v.clone(), t.clone())).collect();
            groups.entry(key).or_default().push(d.constraints);
        }
        let mut out = Vec::new();
        for (key, sets) in groups {
            let disjuncts: Vec<Vec<(String, Concept)>> =
                sets.iter().map(constraint_pairs).collect();
            if self.reasoner.entails_ground_disjunction(&disjuncts)? {
                out.push((Substitution::from_pairs(key), sets));
            }
        }
        Ok(out)
    }

    /// Declared individuals that are entailed instances of the concept.
    pub fn instances_of(&self, concept: &Concept) -> Result<BTreeSet<String>, ResourceError> {
        let mut out = BTreeSet::new();
        for i in &self.kb.sigma.individuals {
            if self.reasoner.entails_assertion(i, concept)? {
                out.insert(i.clone());
            }
        }
        Ok(out)
    }

    /// Correct answers to an O-query: instances `a` of the reference concept
    /// such that the body grounded by the distinguished variable holds,
    /// remaining variables existentially bound during resolution. Final
    /// bindings must respect object identity: injective over the query's
    /// variables and avoiding its constants.
    pub fn answer_set(&self, q: &OQuery) -> Result<AnswerSet, ResourceError> {
        let mut out = BTreeSet::new();
        let qterms = q.clause().terms();
        for a in self.instances_of(q.reference_concept())? {
            let mut ground_x = Substitution::new();
            ground_x.bind(q.distinguished(), Term::Const(a.clone()));
            let grounded = q.clause().apply_substitution(&ground_x);
            let goal = ConstrainedClause::goal(grounded.body, grounded.constraints);
            let outcome = self.resolve_all(&goal);
            let mut disjuncts: Vec<Vec<(String, Concept)>> = Vec::new();
            for d in &outcome.derivations {
                let mut full = d.bindings.clone();
                full.bind(q.distinguished(), Term::Const(a.clone()));
                if !is_oi_substitution(&full, &qterms) {
                    continue;
                }
                disjuncts.push(constraint_pairs(&d.constraints));
            }
            if self.reasoner.entails_ground_disjunction(&disjuncts)? {
                out.insert(a);
            }
        }
        Ok(out)
    }

    /// Fraction of the reference concept's instances in the query's answer
    /// set, as an exact rational.
    pub fn support(&self, q: &OQuery) -> Result<Ratio<u64>, EngineError> {
        let total = self.instances_of(q.reference_concept())?.len() as u64;
        if total == 0 {
            return Err(EngineError::EmptyReference);
        }
        let hits = self.answer_set(q)?.len() as u64;
        Ok(Ratio::new(hits, total))
    }

    /// Ground instances of the atom with at least one derivation. Constraint
    /// satisfiability is not checked here; callers test constraints jointly
    /// over whole bodies afterwards.
    pub fn derivable_instances(&self, pattern: &DatalogAtom) -> BTreeSet<DatalogAtom> {
        let goal = ConstrainedClause::goal(vec![pattern.clone()], Vec::new());
        self.resolve_all(&goal)
            .derivations
            .iter()
            .map(|d| pattern.apply(&d.bindings))
            .filter(DatalogAtom::is_ground)
            .collect()
    }
}

/// Coverage relative to interpretations: the hypothesis covers the labelled
/// observation iff the base extended with the observation's facts and the
/// hypothesis clause proves the label atom.
pub fn covers_interpretations(
    h: &OQuery,
    k: &KnowledgeBase,
    o: &Observation,
    limits: Limits,
) -> Result<bool, ResourceError> {
    let mut kb = k.with_extra_facts(o.facts.iter().cloned());
    kb.pi.push(h.clause().clone());
    let engine = Engine::new(&kb, limits);
    engine.answer_ground_query(&ConstrainedClause::goal(vec![o.label.clone()], Vec::new()))
}

/// Coverage relative to entailment: the observation is a ground constrained
/// clause; its body atoms join the program as facts, its constraints join
/// the ontology as assertions, and the hypothesis must prove its head.
pub fn covers_entailment(
    h: &OQuery,
    k: &KnowledgeBase,
    o: &ConstrainedClause,
    limits: Limits,
) -> Result<bool, ResourceError> {
    let head = o.head.as_ref().expect("observation clause needs a ground head");
    assert!(o.vars().is_empty(), "observation clause must be ground");
    let sigma = k.sigma.with_concept_assertions(
        o.constraints
            .iter()
            .map(|c| (c.term.name().to_string(), c.concept.clone())),
    );
    let mut pi = k.pi.clone();
    pi.extend(o.body.iter().cloned().map(ConstrainedClause::fact));
    pi.push(h.clause().clone());
    let kb = KnowledgeBase::new(sigma, pi);
    let engine = Engine::new(&kb, limits);
    engine.answer_ground_query(&ConstrainedClause::goal(vec![head.clone()], Vec::new()))
}

/// Renders an exact ratio in [0, 1] as a percentage with one decimal,
/// truncating: 4/15 becomes "26.6 %".
pub fn percent_text(r: Ratio<u64>) -> String {
    let tenths = r.numer() * 1000 / r.denom();
    format!("{}.{} %", tenths / 10, tenths % 10)
}

fn constraint_pairs(set: &ConstraintSet) -> Vec<(String, Concept)> {
    set.iter().map(|(n, c)| (n.clone(), c.clone())).collect()
}

/// One in-flight proof. A fresh evaluator is spun up per tabled subgoal so
/// that its derivations and truncation state stay separate.
struct Eval<'e, 'a> {
    engine: &'e Engine<'a>,
    original_vars: BTreeSet<String>,
    truncated: bool,
    /// In-progress subgoals this proof was cut on; an entry other than the
    /// subgoal being tabled blocks memoization (the result is contextual).
    cuts: BTreeSet<DatalogAtom>,
    derivations: Vec<Derivation>,
}

impl Eval<'_, '_> {
    fn solve(
        &mut self,
        goal: &[DatalogAtom],
        constraints: &[Constraint],
        acc: &Substitution,
        depth: usize,
        trace: &[ConstrainedClause],
        allow_table: bool,
    ) {
        let Some((selected, rest)) = goal.split_first() else {
            self.finish(constraints, acc, trace);
            return;
        };
        if depth >= self.engine.limits.max_depth {
            self.truncated = true;
            return;
        }

        if allow_table && selected.is_ground() {
            for residue in self.prove_tabled(selected) {
                let mut c2 = constraints.to_vec();
                c2.extend(
                    residue
                        .iter()
                        .map(|(n, c)| Constraint::new(Term::Const(n.clone()), c.clone())),
                );
                let mut t2 = trace.to_vec();
                t2.push(ConstrainedClause::goal(rest.to_vec(), c2.clone()));
                self.solve(rest, &c2, acc, depth + 1, &t2, true);
            }
            return;
        }

        let key = (selected.predicate.clone(), selected.arity());
        let Some(indices) = self.engine.index.get(&key) else {
            return;
        };
        for &i in indices {
            let clause = &self.engine.kb.pi[i];
            let taken = self.taken_vars(goal, constraints, acc);
            let renamed = clause.rename_apart(&taken);
            let head = renamed.head.as_ref().expect("indexed clauses have heads");
            let Some(mgu) = unify_atoms(selected, head) else {
                continue;
            };
            let new_goal: Vec<DatalogAtom> = renamed
                .body
                .iter()
                .chain(rest.iter())
                .map(|a| a.apply(&mgu))
                .collect();
            let mut new_constraints: Vec<Constraint> =
                constraints.iter().map(|c| c.apply(&mgu)).collect();
            new_constraints.extend(renamed.constraints.iter().map(|c| c.apply(&mgu)));
            let new_acc = compose(acc, &mgu);
            let mut t2 = trace.to_vec();
            t2.push(ConstrainedClause::goal(new_goal.clone(), new_constraints.clone()));
            self.solve(&new_goal, &new_constraints, &new_acc, depth + 1, &t2, true);
        }
    }

    /// Constraint residues that prove one ground atom on its own. Completed
    /// results are memoized on the engine; results obtained while cutting on
    /// some *other* in-progress subgoal are contextual and are returned
    /// without being stored.
    fn prove_tabled(&mut self, atom: &DatalogAtom) -> Vec<ConstraintSet> {
        if let Some(done) = self.engine.table.borrow().get(atom) {
            return done.clone();
        }
        if self.engine.in_progress.borrow().contains(atom) {
            self.cuts.insert(atom.clone());
            return Vec::new();
        }
        self.engine.in_progress.borrow_mut().insert(atom.clone());
        let mut sub = Eval {
            engine: self.engine,
            original_vars: BTreeSet::new(),
            truncated: false,
            cuts: BTreeSet::new(),
            derivations: Vec::new(),
        };
        let initial = ConstrainedClause::goal(vec![atom.clone()], Vec::new());
        sub.solve(
            std::slice::from_ref(atom),
            &[],
            &Substitution::new(),
            0,
            &[initial],
            false,
        );
        self.engine.in_progress.borrow_mut().remove(atom);

        let set: BTreeSet<ConstraintSet> =
            sub.derivations.into_iter().map(|d| d.constraints).collect();
        let residues: Vec<ConstraintSet> = set.into_iter().collect();
        if sub.truncated {
            self.truncated = true;
        }
        sub.cuts.remove(atom);
        let contextual = !sub.cuts.is_empty();
        self.cuts.extend(sub.cuts);
        if !contextual && !sub.truncated {
            self.engine.table.borrow_mut().insert(atom.clone(), residues.clone());
        }
        residues
    }

    /// Empty atom list reached. Any variable still free (in a constraint or
    /// as the image of an original variable) is read existentially and
    /// enumerated over the declared individuals.
    fn finish(&mut self, constraints: &[Constraint], acc: &Substitution, trace: &[ConstrainedClause]) {
        let mut unbound: BTreeSet<String> = constraints
            .iter()
            .filter_map(|c| match &c.term {
                Term::Var(v) => Some(v.clone()),
                Term::Const(_) => None,
            })
            .collect();
        for v in &self.original_vars {
            if let Term::Var(w) = acc.apply_term(&Term::Var(v.clone())) {
                unbound.insert(w);
            }
        }
        if unbound.is_empty() {
            self.emit(constraints.to_vec(), acc, trace);
            return;
        }

        let individuals: Vec<&String> = self.engine.kb.sigma.individuals.iter().collect();
        if individuals.is_empty() {
            return;
        }
        let vars: Vec<String> = unbound.into_iter().collect();
        let mut choice = vec![0usize; vars.len()];
        loop {
            let g = Substitution::from_pairs(
                vars.iter()
                    .zip(&choice)
                    .map(|(v, &i)| (v.clone(), Term::Const(individuals[i].clone()))),
            );
            let c2: Vec<Constraint> = constraints.iter().map(|c| c.apply(&g)).collect();
            let acc2 = compose(acc, &g);
            self.emit(c2, &acc2, trace);

            let mut pos = 0;
            loop {
                if pos == vars.len() {
                    return;
                }
                choice[pos] += 1;
                if choice[pos] < individuals.len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }

    fn emit(&mut self, constraints: Vec<Constraint>, acc: &Substitution, trace: &[ConstrainedClause]) {
        let merged = merge_constraints(&constraints).expect("finished derivations are ground");
        let bindings = Substitution::from_pairs(self.original_vars.iter().filter_map(|v| {
            match acc.apply_term(&Term::Var(v.clone())) {
                t @ Term::Const(_) => Some((v.clone(), t)),
                Term::Var(_) => None,
            }
        }));
        let mut full_trace = trace.to_vec();
        full_trace.push(ConstrainedClause::goal(
            Vec::new(),
            merged
                .iter()
                .map(|(n, c)| Constraint::new(Term::Const(n.clone()), c.clone()))
                .collect(),
        ));
        self.derivations.push(Derivation {
            trace: full_trace,
            bindings,
            constraints: merged,
        });
    }

    fn taken_vars(
        &self,
        goal: &[DatalogAtom],
        constraints: &[Constraint],
        acc: &Substitution,
    ) -> BTreeSet<String> {
        let mut out = self.original_vars.clone();
        for a in goal {
            out.extend(a.vars().map(str::to_string));
        }
        for c in constraints {
            if let Term::Var(v) = &c.term {
                out.insert(v.clone());
            }
        }
        for (v, t) in acc.iter() {
            out.insert(v.clone());
            if let Term::Var(w) = t {
                out.insert(w.clone());
            }
        }
        out
    }
}

/// Merges ground constraints per constant; the concepts collected for one
/// constant are deduplicated and conjoined in their canonical order. Returns
/// None if any constraint term is still a variable.
fn merge_constraints(constraints: &[Constraint]) -> Option<ConstraintSet> {
    let mut per: BTreeMap<String, BTreeSet<Concept>> = BTreeMap::new();
    for c in constraints {
        match &c.term {
            Term::Const(n) => {
                per.entry(n.clone()).or_default().insert(c.concept.clone());
            }
            Term::Var(_) => return None,
        }
    }
    Some(
        per.into_iter()
            .map(|(n, set)| {
                let merged =
                    Concept::conjoin(set.into_iter().collect()).expect("at least one conjunct");
                (n, merged)
            })
            .collect(),
    )
}

/// Most general unifier of two atoms over flat terms. The second atom is
/// assumed variable-disjoint from the first (clauses are renamed apart).
fn unify_atoms(a: &DatalogAtom, b: &DatalogAtom) -> Option<Substitution> {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return None;
    }
    let mut s = Substitution::new();
    for (x, y) in a.args.iter().zip(&b.args) {
        let x = s.apply_term(x);
        let y = s.apply_term(y);
        match (x, y) {
            (Term::Const(c1), Term::Const(c2)) => {
                if c1 != c2 {
                    return None;
                }
            }
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                if t != Term::Var(v.clone()) {
                    s = compose_bind(&s, &v, &t);
                }
            }
        }
    }
    Some(s)
}

/// Extends a substitution with one binding, rewriting existing range terms
/// so that no range term mentions a bound variable. Terms are flat, so a
/// single rewrite pass keeps application idempotent.
fn compose_bind(s: &Substitution, v: &str, t: &Term) -> Substitution {
    let mut out = Substitution::from_pairs(s.iter().map(|(k, existing)| {
        let rewritten = if existing == &Term::Var(v.to_string()) {
            t.clone()
        } else {
            existing.clone()
        };
        (k.clone(), rewritten)
    }));
    out.bind(v, t.clone());
    out
}

/// Composition acc;m — applies m to acc's range and adopts m's bindings for
/// variables acc does not mention.
fn compose(acc: &Substitution, m: &Substitution) -> Substitution {
    let mut out =
        Substitution::from_pairs(acc.iter().map(|(k, t)| (k.clone(), m.apply_term(t))));
    for (k, t) in m.iter() {
        if out.get(k).is_none() {
            out.bind(k, t.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_ontology, parse_program};
    use crate::syntax::Axiom;

    fn v(n: &str) -> Term {
        Term::Var(n.into())
    }

    fn c(n: &str) -> Term {
        Term::Const(n.into())
    }

    fn atom(p: &str, args: Vec<Term>) -> DatalogAtom {
        DatalogAtom::new(p, args)
    }

    fn goal(atoms: Vec<DatalogAtom>, constraints: Vec<Constraint>) -> ConstrainedClause {
        ConstrainedClause::goal(atoms, constraints)
    }

    fn tiny_kb(individuals: &[&str], pi_src: &str) -> KnowledgeBase {
        let mut sigma = crate::syntax::Ontology::new();
        for i in individuals {
            sigma.declare_individual(i);
        }
        KnowledgeBase::new(sigma, parse_program(pi_src).unwrap())
    }

    fn fixture(name: &str) -> String {
        let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
    }

    fn mini_kb() -> KnowledgeBase {
        KnowledgeBase::new(
            parse_ontology(&fixture("mini.onto")).unwrap(),
            parse_program(&fixture("mini.dlp")).unwrap(),
        )
    }

    fn mini_with(extra_clauses: &str) -> KnowledgeBase {
        let mut kb = mini_kb();
        kb.pi.extend(parse_program(extra_clauses).unwrap());
        kb
    }

    const Q1: &str = "q(X) :- speaks(X, Y) & X:MiddleEastCountry, Y:Language.";
    const Q2: &str = "q(X) :- speaks(X, Y) & X:MiddleEastCountry, Y:IndoEuropeanLanguage.";

    fn oquery(src: &str, reference: &str) -> OQuery {
        let clause = parse_program(src).unwrap().remove(0);
        OQuery::new(clause, Concept::atomic(reference)).unwrap()
    }

    #[test]
    fn fact_resolution_yields_one_clean_derivation() {
        let kb = tiny_kb(&["a", "b"], "p(a).");
        let engine = Engine::new(&kb, Limits::default());
        let out = engine.resolve_all(&goal(vec![atom("p", vec![c("a")])], vec![]));
        assert_eq!(out.derivations.len(), 1);
        assert!(!out.truncated);
        let d = &out.derivations[0];
        assert!(d.constraints.is_empty());
        assert!(d.trace.last().unwrap().body.is_empty());
        assert!(engine
            .answer_ground_query(&goal(vec![atom("p", vec![c("a")])], vec![]))
            .unwrap());
    }

    #[test]
    fn unmatched_goal_fails() {
        let kb = tiny_kb(&["a", "b"], "p(a).");
        let engine = Engine::new(&kb, Limits::default());
        let out = engine.resolve_all(&goal(vec![atom("p", vec![c("b")])], vec![]));
        assert!(out.derivations.is_empty());
        assert!(!out.truncated);
        assert!(!engine
            .answer_ground_query(&goal(vec![atom("p", vec![c("b")])], vec![]))
            .unwrap());
    }

    #[test]
    fn rule_chain_collects_constraints() {
        let kb = mini_with(Q1);
        let engine = Engine::new(&kb, Limits::default());
        let out = engine.resolve_all(&goal(vec![atom("q", vec![c("IR")])], vec![]));
        assert!(!out.derivations.is_empty());
        // The speaks view contributes Country, the query contributes
        // MiddleEastCountry; both merge into one conjunction on 'IR'.
        let both = Concept::and(
            Concept::atomic("Country"),
            Concept::atomic("MiddleEastCountry"),
        );
        let lang = Concept::atomic("Language");
        assert!(out.derivations.iter().any(|d| {
            d.constraints.get("IR") == Some(&both) && d.constraints.get("Persian") == Some(&lang)
        }));
        assert!(engine
            .answer_ground_query(&goal(vec![atom("q", vec![c("IR")])], vec![]))
            .unwrap());
    }

    #[test]
    fn mini_answer_sets_and_support() {
        let kb = mini_kb();
        let engine = Engine::new(&kb, Limits::default());

        let q1 = oquery(Q1, "MiddleEastCountry");
        let ans = engine.answer_set(&q1).unwrap();
        let expect: BTreeSet<String> = ["ARM", "IR"].iter().map(|s| s.to_string()).collect();
        assert_eq!(ans, expect);

        let trivial = OQuery::trivial(Concept::atomic("MiddleEastCountry"));
        let all = engine.answer_set(&trivial).unwrap();
        let expect: BTreeSet<String> =
            ["ARM", "IR", "SA"].iter().map(|s| s.to_string()).collect();
        assert_eq!(all, expect);

        assert_eq!(engine.support(&q1).unwrap(), Ratio::new(2, 3));
        assert_eq!(engine.support(&trivial).unwrap(), Ratio::from_integer(1));
        assert_eq!(percent_text(Ratio::new(2, 3)), "66.6 %");
        assert_eq!(percent_text(Ratio::new(4, 15)), "26.6 %");
        assert_eq!(percent_text(Ratio::from_integer(1)), "100.0 %");
        assert_eq!(percent_text(Ratio::new(0, 5)), "0.0 %");
    }

    #[test]
    fn answer_set_respects_object_identity() {
        // Two distinct believes-atoms force two distinct religions; 'SA' has
        // no religion facts and 'IR' has two, so only 'IR' and 'ARM' answer
        // the two-atom query, and only 'IR' answers the Muslim variant.
        let kb = mini_kb();
        let engine = Engine::new(&kb, Limits::default());
        let two = oquery(
            "q(A) :- believes(A, B), believes(A, C) & A:MiddleEastCountry.",
            "MiddleEastCountry",
        );
        let ans = engine.answer_set(&two).unwrap();
        let expect: BTreeSet<String> = ["ARM", "IR"].iter().map(|s| s.to_string()).collect();
        assert_eq!(ans, expect);

        let muslim = oquery(
            "q(A) :- believes(A, B), believes(A, C) & A:MiddleEastCountry, B:MuslimReligion, C:MuslimReligion.",
            "MiddleEastCountry",
        );
        let ans = engine.answer_set(&muslim).unwrap();
        let expect: BTreeSet<String> = ["IR"].iter().map(|s| s.to_string()).collect();
        assert_eq!(ans, expect, "ARM has one Muslim religion, IR has two");
    }

    #[test]
    fn coverage_tests_agree_on_the_fixture_observations() {
        let kb = mini_kb();
        let q1 = oquery(Q1, "MiddleEastCountry");
        let q2 = oquery(Q2, "MiddleEastCountry");

        let a_ir = Observation::new(
            atom("q", vec![c("IR")]),
            vec![atom("language", vec![c("IR"), c("Persian"), c("58")])],
        );
        assert!(covers_interpretations(&q1, &kb, &a_ir, Limits::default()).unwrap());

        let a_sa = Observation::new(
            atom("q", vec![c("SA")]),
            vec![atom("language", vec![c("SA"), c("NajdiArabic"), c("90")])],
        );
        assert!(covers_interpretations(&q1, &kb, &a_sa, Limits::default()).unwrap());
        assert!(
            !covers_interpretations(&q2, &kb, &a_sa, Limits::default()).unwrap(),
            "NajdiArabic is not an IndoEuropeanLanguage"
        );

        for (h, o) in [(&q1, &a_ir), (&q1, &a_sa), (&q2, &a_sa)] {
            let clause = ConstrainedClause::rule(o.label.clone(), o.facts.clone(), vec![]);
            assert_eq!(
                covers_interpretations(h, &kb, o, Limits::default()).unwrap(),
                covers_entailment(h, &kb, &clause, Limits::default()).unwrap()
            );
        }
    }

    #[test]
    fn entailment_coverage_reads_constraints_as_assertions() {
        let kb = mini_kb();
        let q2 = oquery(Q2, "MiddleEastCountry");
        // The observation asserts the spoken language is IndoEuropean even
        // though the ontology does not type 'NajdiArabic' that way.
        let o = parse_program(
            "q('SA') :- language('SA', 'NajdiArabic', 90) & 'NajdiArabic':IndoEuropeanLanguage.",
        )
        .unwrap()
        .remove(0);
        assert!(covers_entailment(&q2, &kb, &o, Limits::default()).unwrap());

        let mismatched = parse_program("r('SA') :- language('SA', 'NajdiArabic', 90).")
            .unwrap()
            .remove(0);
        assert!(!covers_entailment(&q2, &kb, &mismatched, Limits::default()).unwrap());
    }

    #[test]
    fn disjunctive_ontology_needs_the_full_derivation_set() {
        let mut sigma = crate::syntax::Ontology::new();
        sigma
            .declare_concept("A")
            .declare_concept("B")
            .declare_individual("o");
        sigma.assert_concept("o", Concept::or(Concept::atomic("A"), Concept::atomic("B")));
        let pi = parse_program("p1(o). p2(o). g(X) :- p1(X) & X:A. g(X) :- p2(X) & X:B.").unwrap();
        let kb = KnowledgeBase::new(sigma, pi);
        let engine = Engine::new(&kb, Limits::default());

        let q = goal(vec![atom("g", vec![c("o")])], vec![]);
        let out = engine.resolve_all(&q);
        assert_eq!(out.derivations.len(), 2, "one derivation per case");
        assert!(
            engine.answer_ground_query(&q).unwrap(),
            "A-or-B split is covered by the two derivations together"
        );

        // Neither single constraint set is entailed on its own.
        for d in &out.derivations {
            let single = vec![constraint_pairs(&d.constraints)];
            assert!(!engine.reasoner().entails_ground_disjunction(&single).unwrap());
        }
    }

    #[test]
    fn unsatisfied_constraint_blocks_the_answer() {
        let mut sigma = crate::syntax::Ontology::new();
        sigma
            .declare_concept("A")
            .declare_concept("B")
            .declare_individual("a");
        sigma.add_axiom(Axiom::Subsumption(
            Concept::atomic("A"),
            Concept::not(Concept::atomic("B")),
        ));
        sigma.assert_concept("a", Concept::atomic("B"));
        let kb = KnowledgeBase::new(sigma, parse_program("p(a).").unwrap());
        let engine = Engine::new(&kb, Limits::default());

        let blocked = goal(
            vec![atom("p", vec![c("a")])],
            vec![Constraint::new(c("a"), Concept::atomic("A"))],
        );
        assert!(!engine.answer_ground_query(&blocked).unwrap());
        let fine = goal(
            vec![atom("p", vec![c("a")])],
            vec![Constraint::new(c("a"), Concept::atomic("B"))],
        );
        assert!(engine.answer_ground_query(&fine).unwrap());
    }

    #[test]
    fn constraints_on_one_constant_merge_into_a_conjunction() {
        let mut sigma = crate::syntax::Ontology::new();
        sigma
            .declare_concept("A")
            .declare_concept("B")
            .declare_individual("a");
        sigma.assert_concept("a", Concept::and(Concept::atomic("A"), Concept::atomic("B")));
        let kb = KnowledgeBase::new(sigma, parse_program("p(a).").unwrap());
        let engine = Engine::new(&kb, Limits::default());
        let q = goal(
            vec![atom("p", vec![c("a")])],
            vec![
                Constraint::new(c("a"), Concept::atomic("B")),
                Constraint::new(c("a"), Concept::atomic("A")),
            ],
        );
        let out = engine.resolve_all(&q);
        assert_eq!(out.derivations.len(), 1);
        assert_eq!(
            out.derivations[0].constraints.get("a"),
            Some(&Concept::and(Concept::atomic("A"), Concept::atomic("B"))),
            "duplicate-free merge in canonical order"
        );
        assert!(engine.answer_ground_query(&q).unwrap());
    }

    #[test]
    fn ground_cycles_fail_cleanly_without_truncation() {
        let kb = tiny_kb(&["a", "b"], "p(a) :- p(a). edge(a, b). edge(b, a). path(X, Z) :- edge(X, Z). path(X, Z) :- edge(X, Y), path(Y, Z).");
        let engine = Engine::new(&kb, Limits::default());

        let looping = engine.resolve_all(&goal(vec![atom("p", vec![c("a")])], vec![]));
        assert!(looping.derivations.is_empty());
        assert!(!looping.truncated, "cycle cut, not depth cap");

        assert!(engine
            .answer_ground_query(&goal(vec![atom("path", vec![c("a"), c("a")])], vec![]))
            .unwrap());
        assert!(engine
            .answer_ground_query(&goal(vec![atom("path", vec![c("b"), c("b")])], vec![]))
            .unwrap());
    }

    #[test]
    fn contextual_cycle_results_are_not_memoized() {
        // p(b)'s provability routes through p(a); proving p(a) first must
        // not poison the memo for p(b).
        let kb = tiny_kb(&["a", "b"], "p(a) :- p(b). p(b) :- p(a). p(a) :- q0(a). q0(a).");
        let engine = Engine::new(&kb, Limits::default());
        assert!(engine
            .answer_ground_query(&goal(vec![atom("p", vec![c("a")])], vec![]))
            .unwrap());
        assert!(engine
            .answer_ground_query(&goal(vec![atom("p", vec![c("b")])], vec![]))
            .unwrap());
    }

    #[test]
    fn nonground_recursion_hits_the_depth_cap() {
        let kb = tiny_kb(&["a"], "p(X, Y) :- p(Y, X).");
        let engine = Engine::new(&kb, Limits::default());
        let out = engine.resolve_all(&goal(vec![atom("p", vec![v("A"), v("B")])], vec![]));
        assert!(out.derivations.is_empty());
        assert!(out.truncated);
    }

    #[test]
    fn head_variables_missing_from_the_body_ground_existentially() {
        let kb = tiny_kb(&["a", "b"], "p(X, Y) :- q0(X). q0(a).");
        let engine = Engine::new(&kb, Limits::default());
        assert!(engine
            .answer_ground_query(&goal(vec![atom("p", vec![c("a"), c("b")])], vec![]))
            .unwrap());
        let free = engine.resolve_all(&goal(vec![atom("p", vec![c("a"), v("W")])], vec![]));
        let images: BTreeSet<Term> = free
            .derivations
            .iter()
            .map(|d| d.bindings.apply_term(&v("W")))
            .collect();
        assert_eq!(images, [c("a"), c("b")].into_iter().collect());
    }

    #[test]
    fn answers_reports_bindings_with_witness_constraints() {
        let kb = mini_with(Q1);
        let engine = Engine::new(&kb, Limits::default());
        let out = engine
            .answers(&goal(vec![atom("q", vec![v("X")])], vec![]))
            .unwrap();
        let bound: BTreeSet<Term> = out
            .iter()
            .map(|(s, _)| s.apply_term(&v("X")))
            .collect();
        assert_eq!(bound, [c("ARM"), c("IR")].into_iter().collect());
        assert!(out.iter().all(|(_, sets)| !sets.is_empty()));
    }

    #[test]
    fn derivable_instances_enumerate_ground_atoms() {
        let kb = mini_kb();
        let engine = Engine::new(&kb, Limits::default());
        let instances = engine.derivable_instances(&atom("speaks", vec![v("X"), v("Y")]));
        assert_eq!(instances.len(), 4);
        assert!(instances.contains(&atom("speaks", vec![c("IR"), c("Persian")])));
        assert!(instances.contains(&atom("speaks", vec![c("ARM"), c("CypriotArabic")])));
    }

    #[test]
    fn support_errors_on_an_instance_free_reference() {
        let kb = tiny_kb(&["a"], "p(a).");
        let engine = Engine::new(&kb, Limits::default());
        let q = OQuery::trivial(Concept::atomic("Ghost"));
        assert_eq!(engine.support(&q), Err(EngineError::EmptyReference));
    }
}
