//! Tableau-based satisfiability and entailment for the ontology layer.
//!
//! The calculus works on negation normal form. Axioms with an atomic
//! left-hand side are absorbed into deterministic propagation rules
//! (A in a label adds the right-hand side); axioms over Top apply to every
//! individual; the rest are internalized as one disjunction per individual.
//! An equivalence defining an atomic name exactly once and acyclically is
//! absorbed in both polarities (A adds the definition, not-A its negation),
//! which keeps definitional axioms from injecting a disjunction into every
//! individual; multiply defined or cyclic names fall back to
//! internalization. Disjunctions branch depth-first, left disjunct first.
//! Fresh individuals introduced for existential restrictions are subject to
//! subset blocking against older individuals, which keeps the procedure
//! terminating; the node limit is a hard backstop.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::limits::{Limits, ResourceError};
use crate::syntax::{Axiom, Concept, Ontology};

/// A finite interpretation extracted from a completed open branch. Blocked
/// individuals are dropped and edges into them are redirected to their
/// blockers, so the result is a genuine model of the checked ontology.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub domain: BTreeSet<String>,
    pub concept_ext: BTreeMap<String, BTreeSet<String>>,
    pub role_ext: BTreeMap<String, BTreeSet<(String, String)>>,
}

impl Model {
    pub fn satisfies_concept(&self, element: &str, concept: &Concept) -> bool {
        match concept {
            Concept::Top => true,
            Concept::Bottom => false,
            Concept::Atomic(n) => self
                .concept_ext
                .get(n)
                .is_some_and(|ext| ext.contains(element)),
            Concept::Not(c) => !self.satisfies_concept(element, c),
            Concept::And(a, b) => {
                self.satisfies_concept(element, a) && self.satisfies_concept(element, b)
            }
            Concept::Or(a, b) => {
                self.satisfies_concept(element, a) || self.satisfies_concept(element, b)
            }
            Concept::All(r, c) => self.successors(element, r).all(|y| self.satisfies_concept(y, c)),
            Concept::Some(r, c) => self.successors(element, r).any(|y| self.satisfies_concept(y, c)),
        }
    }

    fn successors<'m>(&'m self, element: &'m str, role: &str) -> impl Iterator<Item = &'m str> {
        self.role_ext
            .get(role)
            .into_iter()
            .flatten()
            .filter(move |(s, _)| s == element)
            .map(|(_, o)| o.as_str())
    }

    /// Model check against an ontology: every axiom holds at every domain
    /// element and every assertion holds outright.
    pub fn satisfies_ontology(&self, sigma: &Ontology) -> bool {
        for (sub, sup) in sigma.subsumption_view() {
            for d in &self.domain {
                if self.satisfies_concept(d, &sub) && !self.satisfies_concept(d, &sup) {
                    return false;
                }
            }
        }
        for (individual, concept) in sigma.concept_assertions() {
            if !self.domain.contains(individual) || !self.satisfies_concept(individual, concept) {
                return false;
            }
        }
        for (s, o, r) in sigma.role_assertions() {
            let present = self
                .role_ext
                .get(r)
                .is_some_and(|ext| ext.contains(&(s.to_string(), o.to_string())));
            if !present {
                return false;
            }
        }
        true
    }
}

/// Result of a satisfiability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Consistent(Box<Model>),
    Inconsistent,
}

impl SatOutcome {
    pub fn is_consistent(&self) -> bool {
        matches!(self, SatOutcome::Consistent(_))
    }
}

#[derive(Clone)]
struct Branch {
    labels: BTreeMap<String, BTreeSet<Concept>>,
    /// subject -> role -> objects
    edges: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>,
    /// Creation order; the first `named` entries are input individuals and
    /// are never blocked.
    order: Vec<String>,
    named: usize,
}

impl Branch {
    fn label(&self, ind: &str) -> &BTreeSet<Concept> {
        &self.labels[ind]
    }

    fn add_concept(&mut self, ind: &str, c: Concept) -> bool {
        self.labels.get_mut(ind).expect("registered individual").insert(c)
    }

    fn register(&mut self, ind: &str) {
        if !self.labels.contains_key(ind) {
            self.labels.insert(ind.to_string(), BTreeSet::new());
            self.order.push(ind.to_string());
        }
    }

    fn successors(&self, ind: &str, role: &str) -> impl Iterator<Item = &String> {
        self.edges
            .get(ind)
            .and_then(|m| m.get(role))
            .into_iter()
            .flatten()
    }

    fn add_edge(&mut self, from: &str, role: &str, to: &str) {
        self.edges
            .entry(from.to_string())
            .or_default()
            .entry(role.to_string())
            .or_default()
            .insert(to.to_string());
    }

    /// Index of the first older individual whose label includes this one's.
    fn blocker(&self, idx: usize) -> Option<usize> {
        if idx < self.named {
            return None;
        }
        let label = self.label(&self.order[idx]);
        (0..idx).find(|&j| label.is_subset(self.label(&self.order[j])))
    }
}

struct Search<'g> {
    absorbed: &'g BTreeMap<String, Vec<Concept>>,
    absorbed_neg: &'g BTreeMap<String, Vec<Concept>>,
    definitional: &'g BTreeMap<String, Concept>,
    top_rules: &'g [Concept],
    gcis: &'g [Concept],
    limits: Limits,
    created: usize,
    trace_on: bool,
    trace: Vec<String>,
}

impl Search<'_> {
    fn log(&mut self, rule: &str, ind: &str, concept: &Concept) {
        if self.trace_on {
            self.trace.push(format!("RULE {rule} {ind} : {concept}"));
        }
    }

    /// Runs the branch to completion. Returns a model for an open branch,
    /// None when every extension clashes.
    fn run(&mut self, branch: &mut Branch) -> Result<Option<Model>, ResourceError> {
        loop {
            while self.saturate(branch) {}

            if let Some((ind, witness)) = find_clash(branch) {
                self.log("clash", &ind, &witness);
                return Ok(None);
            }

            if let Some((ind, a, b)) = find_or(branch) {
                let disjunction = Concept::or(a.clone(), b.clone());
                self.log("or", &ind, &disjunction);
                let mut left = branch.clone();
                left.add_concept(&ind, a);
                if let Some(model) = self.run(&mut left)? {
                    return Ok(Some(model));
                }
                branch.add_concept(&ind, b);
                continue;
            }

            if let Some((ind, role, filler)) = find_some(branch) {
                self.created += 1;
                if self.created > self.limits.tableau_nodes {
                    return Err(ResourceError::TableauNodes(self.limits.tableau_nodes));
                }
                let existential = Concept::some(&role, filler.clone());
                self.log("some", &ind, &existential);
                let fresh = format!("_x{}", self.created);
                branch.register(&fresh);
                branch.add_concept(&fresh, filler);
                branch.add_edge(&ind, &role, &fresh);
                continue;
            }

            let mut model = extract_model(branch);
            repair_defined(&mut model, self.definitional);
            return Ok(Some(model));
        }
    }

    /// One pass of the deterministic rules; true when anything changed.
    fn saturate(&mut self, branch: &mut Branch) -> bool {
        let mut changed = false;
        let inds: Vec<String> = branch.order.clone();
        for ind in &inds {
            for g in self.top_rules.iter().chain(self.gcis) {
                if !branch.label(ind).contains(g) {
                    branch.add_concept(ind, g.clone());
                    self.log("gci", ind, g);
                    changed = true;
                }
            }
            let literals: Vec<(String, bool)> = branch
                .label(ind)
                .iter()
                .filter_map(|c| match c {
                    Concept::Atomic(n) => Some((n.clone(), true)),
                    Concept::Not(inner) => match inner.as_ref() {
                        Concept::Atomic(n) => Some((n.clone(), false)),
                        _ => None,
                    },
                    _ => None,
                })
                .collect();
            for (name, positive) in literals {
                let rules = if positive {
                    self.absorbed.get(&name)
                } else {
                    self.absorbed_neg.get(&name)
                };
                for g in rules.map_or(&[][..], Vec::as_slice) {
                    if !branch.label(ind).contains(g) {
                        branch.add_concept(ind, g.clone());
                        self.log("gci", ind, g);
                        changed = true;
                    }
                }
            }
            let snapshot: Vec<Concept> = branch.label(ind).iter().cloned().collect();
            for c in snapshot {
                match &c {
                    Concept::And(a, b) => {
                        let need_a = !branch.label(ind).contains(a);
                        let need_b = !branch.label(ind).contains(b);
                        if need_a || need_b {
                            self.log("and", ind, &c);
                            if need_a {
                                branch.add_concept(ind, (**a).clone());
                            }
                            if need_b {
                                branch.add_concept(ind, (**b).clone());
                            }
                            changed = true;
                        }
                    }
                    Concept::All(role, filler) => {
                        let targets: Vec<String> =
                            branch.successors(ind, role).cloned().collect();
                        let mut applied = false;
                        for y in targets {
                            if !branch.label(&y).contains(filler) {
                                branch.add_concept(&y, (**filler).clone());
                                applied = true;
                            }
                        }
                        if applied {
                            self.log("all", ind, &c);
                            changed = true;
                        }
                    }
                    _ => {}
                }
            }
        }
        changed
    }
}

fn find_clash(branch: &Branch) -> Option<(String, Concept)> {
    for ind in &branch.order {
        let label = branch.label(ind);
        if label.contains(&Concept::Bottom) {
            return Some((ind.clone(), Concept::Bottom));
        }
        for c in label {
            if let Concept::Not(inner) = c {
                if matches!(**inner, Concept::Atomic(_)) && label.contains(inner) {
                    return Some((ind.clone(), (**inner).clone()));
                }
            }
        }
    }
    None
}

fn find_or(branch: &Branch) -> Option<(String, Concept, Concept)> {
    for ind in &branch.order {
        let label = branch.label(ind);
        for c in label {
            if let Concept::Or(a, b) = c {
                if !label.contains(a) && !label.contains(b) {
                    return Some((ind.clone(), (**a).clone(), (**b).clone()));
                }
            }
        }
    }
    None
}

fn find_some(branch: &Branch) -> Option<(String, String, Concept)> {
    for (idx, ind) in branch.order.iter().enumerate() {
        if branch.blocker(idx).is_some() {
            continue;
        }
        for c in branch.label(ind) {
            if let Concept::Some(role, filler) = c {
                let witnessed = branch
                    .successors(ind, role)
                    .any(|y| branch.label(y).contains(filler));
                if !witnessed {
                    return Some((ind.clone(), role.clone(), (**filler).clone()));
                }
            }
        }
    }
    None
}

/// Lazy unfolding leaves a defined name out of labels that never mention it,
/// so the extension read off the labels can undershoot the definition. The
/// definitions are acyclic; re-evaluating each in dependency order restores
/// `name == definition` across the whole domain.
fn repair_defined(model: &mut Model, definitional: &BTreeMap<String, Concept>) {
    let mut pending: BTreeMap<&String, &Concept> = definitional.iter().collect();
    while !pending.is_empty() {
        let ready: Vec<String> = pending
            .iter()
            .filter(|(_, def)| {
                let mut names = BTreeSet::new();
                def.atomic_names(&mut names);
                names.iter().all(|n| !pending.contains_key(n))
            })
            .map(|(name, _)| (*name).clone())
            .collect();
        assert!(!ready.is_empty(), "definitional names are acyclic");
        for name in ready {
            let def = pending.remove(&name).expect("listed as pending");
            let ext: BTreeSet<String> = model
                .domain
                .iter()
                .filter(|e| model.satisfies_concept(e, def))
                .cloned()
                .collect();
            model.concept_ext.insert(name, ext);
        }
    }
}

fn extract_model(branch: &Branch) -> Model {
    let blocked: BTreeMap<&String, &String> = branch
        .order
        .iter()
        .enumerate()
        .filter_map(|(idx, ind)| branch.blocker(idx).map(|j| (ind, &branch.order[j])))
        .collect();
    let resolve = |ind: &String| -> String { (*blocked.get(ind).unwrap_or(&ind)).clone() };

    let mut model = Model::default();
    for ind in &branch.order {
        if blocked.contains_key(ind) {
            continue;
        }
        model.domain.insert(ind.clone());
        for c in branch.label(ind) {
            if let Concept::Atomic(n) = c {
                model
                    .concept_ext
                    .entry(n.clone())
                    .or_default()
                    .insert(ind.clone());
            }
        }
        if let Some(roles) = branch.edges.get(ind) {
            for (role, objects) in roles {
                let ext = model.role_ext.entry(role.clone()).or_default();
                for o in objects {
                    ext.insert((ind.clone(), resolve(o)));
                }
            }
        }
    }
    model
}

/// Satisfiability and entailment over one ontology, with memoized entailment
/// queries. Build a fresh reasoner per (possibly extended) ontology.
pub struct Reasoner<'a> {
    sigma: &'a Ontology,
    absorbed: BTreeMap<String, Vec<Concept>>,
    absorbed_neg: BTreeMap<String, Vec<Concept>>,
    definitional: BTreeMap<String, Concept>,
    top_rules: Vec<Concept>,
    gcis: Vec<Concept>,
    limits: Limits,
    assertion_cache: RefCell<BTreeMap<(String, Concept), bool>>,
    subsumption_cache: RefCell<BTreeMap<(Concept, Concept), bool>>,
    disjunction_cache: RefCell<BTreeMap<BTreeSet<BTreeSet<(String, Concept)>>, bool>>,
    consistent: RefCell<Option<bool>>,
}

/// Names eligible for definition absorption in both polarities: defined by
/// exactly one axiom, an equivalence with the name on one side, whose
/// definitions do not reach back to themselves through other definitions.
fn definitional_names(axioms: &[Axiom]) -> BTreeMap<String, Concept> {
    let mut defining_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut bump = |c: &Concept| {
        if let Concept::Atomic(n) = c {
            *defining_count.entry(n.clone()).or_default() += 1;
        }
    };
    for ax in axioms {
        match ax {
            Axiom::Subsumption(l, _) => bump(l),
            Axiom::Equivalence(l, r) => {
                if matches!(l, Concept::Atomic(_)) {
                    bump(l);
                } else {
                    bump(r);
                }
            }
        }
    }

    let mut candidates: BTreeMap<String, Concept> = BTreeMap::new();
    for ax in axioms {
        if let Axiom::Equivalence(l, r) = ax {
            let (name, rhs) = match (l, r) {
                (Concept::Atomic(n), rhs) => (n, rhs),
                (rhs, Concept::Atomic(n)) => (n, rhs),
                _ => continue,
            };
            if defining_count.get(name) == Some(&1) {
                candidates.insert(name.clone(), rhs.clone());
            }
        }
    }

    // The negated definition is only applied to names whose definitions are
    // acyclic among themselves; a cyclic definition falls back to
    // internalization, which is always correct.
    loop {
        let mut cyclic = None;
        'outer: for start in candidates.keys() {
            let mut frontier = vec![start.clone()];
            let mut seen = BTreeSet::new();
            while let Some(n) = frontier.pop() {
                let Some(def) = candidates.get(&n) else { continue };
                let mut names = BTreeSet::new();
                def.atomic_names(&mut names);
                if names.contains(start) {
                    cyclic = Some(start.clone());
                    break 'outer;
                }
                frontier.extend(names.into_iter().filter(|m| seen.insert(m.clone())));
            }
        }
        match cyclic {
            Some(name) => {
                candidates.remove(&name);
            }
            None => return candidates,
        }
    }
}

impl<'a> Reasoner<'a> {
    pub fn new(sigma: &'a Ontology, limits: Limits) -> Self {
        let definitional = definitional_names(&sigma.axioms);
        let mut absorbed: BTreeMap<String, Vec<Concept>> = BTreeMap::new();
        let mut absorbed_neg: BTreeMap<String, Vec<Concept>> = BTreeMap::new();
        let mut top_rules = Vec::new();
        let mut gcis = Vec::new();
        let mut seen = BTreeSet::new();
        fn route(
            sub: Concept,
            sup: Concept,
            seen: &mut BTreeSet<(Option<String>, Concept)>,
            absorbed: &mut BTreeMap<String, Vec<Concept>>,
            top_rules: &mut Vec<Concept>,
            gcis: &mut Vec<Concept>,
        ) {
            match sub {
                Concept::Atomic(name) => {
                    let g = sup.nnf();
                    if seen.insert((Some(name.clone()), g.clone())) {
                        absorbed.entry(name).or_default().push(g);
                    }
                }
                Concept::Top => {
                    let g = sup.nnf();
                    if seen.insert((None, g.clone())) {
                        top_rules.push(g);
                    }
                }
                _ => {
                    let g = Concept::or(Concept::not(sub), sup).nnf();
                    if seen.insert((None, g.clone())) {
                        gcis.push(g);
                    }
                }
            }
        }
        for ax in &sigma.axioms {
            match ax {
                Axiom::Subsumption(l, r) => route(
                    l.clone(),
                    r.clone(),
                    &mut seen,
                    &mut absorbed,
                    &mut top_rules,
                    &mut gcis,
                ),
                Axiom::Equivalence(l, r) => {
                    let oriented = match (l, r) {
                        (Concept::Atomic(n), _) | (_, Concept::Atomic(n)) => {
                            definitional.get(n).map(|def| (n.clone(), def.clone()))
                        }
                        _ => None,
                    };
                    match oriented {
                        Some((name, def)) => {
                            absorbed.entry(name.clone()).or_default().push(def.nnf());
                            absorbed_neg.entry(name).or_default().push(def.negated_nnf());
                        }
                        None => {
                            route(
                                l.clone(),
                                r.clone(),
                                &mut seen,
                                &mut absorbed,
                                &mut top_rules,
                                &mut gcis,
                            );
                            route(
                                r.clone(),
                                l.clone(),
                                &mut seen,
                                &mut absorbed,
                                &mut top_rules,
                                &mut gcis,
                            );
                        }
                    }
                }
            }
        }
        Reasoner {
            sigma,
            absorbed,
            absorbed_neg,
            definitional,
            top_rules,
            gcis,
            limits,
            assertion_cache: RefCell::new(BTreeMap::new()),
            subsumption_cache: RefCell::new(BTreeMap::new()),
            disjunction_cache: RefCell::new(BTreeMap::new()),
            consistent: RefCell::new(None),
        }
    }

    pub fn sigma(&self) -> &Ontology {
        self.sigma
    }

    /// Satisfiability of the ontology together with extra concept assertions
    /// (the individuals need not be declared).
    pub fn check_with(
        &self,
        extra: &[(String, Concept)],
    ) -> Result<SatOutcome, ResourceError> {
        Ok(self.check_inner(extra, false)?.0)
    }

    /// Like `check_with` on the bare ontology, also returning the rule trace.
    pub fn check_traced(&self) -> Result<(SatOutcome, Vec<String>), ResourceError> {
        self.check_inner(&[], true)
    }

    fn check_inner(
        &self,
        extra: &[(String, Concept)],
        trace_on: bool,
    ) -> Result<(SatOutcome, Vec<String>), ResourceError> {
        let mut branch = Branch {
            labels: BTreeMap::new(),
            edges: BTreeMap::new(),
            order: Vec::new(),
            named: 0,
        };
        for ind in &self.sigma.individuals {
            branch.register(ind);
        }
        for (ind, concept) in self.sigma.concept_assertions() {
            branch.register(ind);
            branch.add_concept(ind, concept.nnf());
        }
        for (s, o, r) in self.sigma.role_assertions() {
            branch.register(s);
            branch.register(o);
            branch.add_edge(s, r, o);
        }
        for (ind, concept) in extra {
            branch.register(ind);
            branch.add_concept(ind, concept.nnf());
        }
        if branch.order.is_empty() {
            // Interpretation domains are non-empty; witness that.
            branch.register("_d0");
        }
        branch.named = branch.order.len();

        let mut search = Search {
            absorbed: &self.absorbed,
            absorbed_neg: &self.absorbed_neg,
            definitional: &self.definitional,
            top_rules: &self.top_rules,
            gcis: &self.gcis,
            limits: self.limits,
            created: 0,
            trace_on,
            trace: Vec::new(),
        };
        let outcome = match search.run(&mut branch)? {
            Some(model) => SatOutcome::Consistent(Box::new(model)),
            None => SatOutcome::Inconsistent,
        };
        Ok((outcome, search.trace))
    }

    pub fn is_consistent(&self) -> Result<bool, ResourceError> {
        if let Some(v) = *self.consistent.borrow() {
            return Ok(v);
        }
        let v = self.check_with(&[])?.is_consistent();
        *self.consistent.borrow_mut() = Some(v);
        Ok(v)
    }

    /// Does the ontology entail `individual : concept`? Decided by refuting
    /// the negation.
    pub fn entails_assertion(
        &self,
        individual: &str,
        concept: &Concept,
    ) -> Result<bool, ResourceError> {
        let key = (individual.to_string(), concept.clone());
        if let Some(&v) = self.assertion_cache.borrow().get(&key) {
            return Ok(v);
        }
        let extra = [(individual.to_string(), concept.negated_nnf())];
        let v = !self.check_with(&extra)?.is_consistent();
        self.assertion_cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// Does the ontology entail `sub <= sup`? Decided by refuting a fresh
    /// member of `sub and not sup`.
    pub fn entails_subsumption(
        &self,
        sub: &Concept,
        sup: &Concept,
    ) -> Result<bool, ResourceError> {
        let key = (sub.clone(), sup.clone());
        if let Some(&v) = self.subsumption_cache.borrow().get(&key) {
            return Ok(v);
        }
        let witness = Concept::and(sub.clone(), Concept::not(sup.clone()));
        let extra = [("_s0".to_string(), witness.nnf())];
        let v = !self.check_with(&extra)?.is_consistent();
        self.subsumption_cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// Does the ontology entail a disjunction of conjunctions of ground
    /// membership assertions?
    ///
    /// The negation is a conjunction of disjunctions; it is satisfiable with
    /// the ontology iff some selection of one negated assertion per disjunct
    /// is, so each selection is refuted in turn.
    pub fn entails_ground_disjunction(
        &self,
        disjuncts: &[Vec<(String, Concept)>],
    ) -> Result<bool, ResourceError> {
        let mut normalized: BTreeSet<BTreeSet<(String, Concept)>> = disjuncts
            .iter()
            .map(|d| d.iter().cloned().collect())
            .collect();
        // A disjunct implying another is redundant; keep the weakest ones.
        let sets: Vec<BTreeSet<(String, Concept)>> = normalized.iter().cloned().collect();
        normalized.retain(|d| {
            !sets
                .iter()
                .any(|other| other != d && other.is_subset(d))
        });

        if normalized.iter().any(BTreeSet::is_empty) {
            return Ok(true);
        }
        if normalized.is_empty() {
            return Ok(!self.is_consistent()?);
        }
        let key: BTreeSet<BTreeSet<(String, Concept)>> = normalized.clone();
        if let Some(&v) = self.disjunction_cache.borrow().get(&key) {
            return Ok(v);
        }

        let v = self.decide_ground_disjunction(&normalized)?;
        self.disjunction_cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    fn decide_ground_disjunction(
        &self,
        normalized: &BTreeSet<BTreeSet<(String, Concept)>>,
    ) -> Result<bool, ResourceError> {
        // A disjunct whose conjuncts are each entailed settles it.
        for d in normalized {
            let mut all = true;
            for (ind, c) in d {
                if !self.entails_assertion(ind, c)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }

        let disjuncts: Vec<Vec<(String, Concept)>> = normalized
            .iter()
            .map(|d| d.iter().cloned().collect())
            .collect();
        let mut selections: usize = 1;
        for d in &disjuncts {
            selections = selections.saturating_mul(d.len());
            if selections > self.limits.selections {
                return Err(ResourceError::Selections(self.limits.selections));
            }
        }

        let mut choice = vec![0usize; disjuncts.len()];
        loop {
            let extra: Vec<(String, Concept)> = disjuncts
                .iter()
                .zip(&choice)
                .map(|(d, &i)| {
                    let (ind, c) = &d[i];
                    (ind.clone(), c.negated_nnf())
                })
                .collect();
            if self.check_with(&extra)?.is_consistent() {
                return Ok(false);
            }
            // Advance the odometer.
            let mut pos = 0;
            loop {
                if pos == disjuncts.len() {
                    return Ok(true);
                }
                choice[pos] += 1;
                if choice[pos] < disjuncts[pos].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Axiom;

    fn a(n: &str) -> Concept {
        Concept::atomic(n)
    }

    fn reasoner_fixture(build: impl FnOnce(&mut Ontology)) -> Ontology {
        let mut o = Ontology::new();
        build(&mut o);
        o
    }

    #[test]
    fn asserted_clash_is_inconsistent() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_individual("i");
            o.assert_concept("i", a("A"));
            o.assert_concept("i", Concept::not(a("A")));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(!r.is_consistent().unwrap());
    }

    #[test]
    fn subsumption_axiom_propagates_to_members() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_individual("i");
            o.add_axiom(Axiom::Subsumption(a("A"), a("B")));
            o.assert_concept("i", a("A"));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(r.is_consistent().unwrap());
        assert!(r.entails_assertion("i", &a("B")).unwrap());
        assert!(!r.entails_assertion("i", &Concept::not(a("B"))).unwrap());
    }

    #[test]
    fn equivalence_entails_both_directions() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_individual("i");
            o.add_axiom(Axiom::Equivalence(a("A"), a("B")));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(r.entails_subsumption(&a("A"), &a("B")).unwrap());
        assert!(r.entails_subsumption(&a("B"), &a("A")).unwrap());
        assert!(!r.entails_subsumption(&a("A"), &Concept::not(a("B"))).unwrap());
    }

    #[test]
    fn value_restriction_constrains_successors() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A")
                .declare_concept("B")
                .declare_role("R")
                .declare_individual("i");
            o.assert_concept("i", Concept::some("R", a("A")));
            o.assert_concept("i", Concept::all("R", a("B")));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(r.is_consistent().unwrap());
        assert!(r
            .entails_assertion("i", &Concept::some("R", Concept::and(a("A"), a("B"))))
            .unwrap());
    }

    #[test]
    fn contradictory_axioms_make_members_impossible() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_individual("i");
            o.add_axiom(Axiom::Subsumption(a("A"), a("B")));
            o.add_axiom(Axiom::Subsumption(a("A"), Concept::not(a("B"))));
            o.assert_concept("i", a("A"));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(!r.is_consistent().unwrap());
        // An inconsistent ontology entails everything.
        assert!(r.entails_assertion("i", &a("B")).unwrap());
    }

    #[test]
    fn cyclic_existential_axioms_terminate_by_blocking() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A")
                .declare_concept("B")
                .declare_role("R")
                .declare_individual("i");
            o.add_axiom(Axiom::Subsumption(a("A"), Concept::some("R", a("B"))));
            o.add_axiom(Axiom::Subsumption(a("B"), Concept::some("R", a("A"))));
            o.assert_concept("i", a("A"));
        });
        let r = Reasoner::new(&o, Limits::default());
        match r.check_with(&[]).unwrap() {
            SatOutcome::Consistent(model) => {
                assert!(model.satisfies_ontology(&o));
                assert!(model.domain.len() <= 3);
            }
            SatOutcome::Inconsistent => panic!("expected a model"),
        }
    }

    #[test]
    fn defined_name_absorbs_in_both_polarities() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A")
                .declare_concept("D")
                .declare_concept("G")
                .declare_role("R")
                .declare_individual("i")
                .declare_individual("g");
            o.add_axiom(Axiom::Equivalence(
                a("D"),
                Concept::and(a("A"), Concept::some("R", a("G"))),
            ));
            o.assert_concept("i", a("A"));
            o.assert_role("i", "g", "R");
            o.assert_concept("g", a("G"));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(r.entails_assertion("i", &a("D")).unwrap());
        assert!(!r.entails_assertion("g", &a("D")).unwrap());
        match r.check_with(&[]).unwrap() {
            SatOutcome::Consistent(model) => {
                assert!(
                    model.satisfies_ontology(&o),
                    "defined names must be repaired in the extracted model"
                );
                assert!(model.satisfies_concept("i", &a("D")));
            }
            SatOutcome::Inconsistent => panic!("expected a model"),
        }
    }

    #[test]
    fn cyclic_equivalence_falls_back_to_internalization() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("D").declare_role("R").declare_individual("i");
            o.add_axiom(Axiom::Equivalence(a("D"), Concept::some("R", a("D"))));
            o.assert_concept("i", a("D"));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(r.is_consistent().unwrap());
        assert!(r.entails_assertion("i", &Concept::some("R", a("D"))).unwrap());
    }

    #[test]
    fn multiply_defined_name_still_chains() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_concept("D");
            o.add_axiom(Axiom::Equivalence(a("D"), a("A")));
            o.add_axiom(Axiom::Subsumption(a("D"), a("B")));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(r.entails_subsumption(&a("A"), &a("B")).unwrap());
        assert!(!r.entails_subsumption(&a("B"), &a("A")).unwrap());
    }

    #[test]
    fn node_limit_aborts_instead_of_looping() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A")
                .declare_concept("B")
                .declare_role("R")
                .declare_individual("i");
            o.add_axiom(Axiom::Subsumption(a("A"), Concept::some("R", a("B"))));
            o.add_axiom(Axiom::Subsumption(a("B"), Concept::some("R", a("A"))));
            o.assert_concept("i", a("A"));
        });
        let limits = Limits {
            tableau_nodes: 1,
            ..Limits::default()
        };
        let r = Reasoner::new(&o, limits);
        assert_eq!(r.check_with(&[]), Err(ResourceError::TableauNodes(1)));
    }

    #[test]
    fn disjunction_branches_left_first_and_backtracks() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_individual("i");
            o.assert_concept("i", Concept::or(a("A"), a("B")));
            o.assert_concept("i", Concept::not(a("A")));
        });
        let r = Reasoner::new(&o, Limits::default());
        match r.check_with(&[]).unwrap() {
            SatOutcome::Consistent(model) => {
                assert!(model.satisfies_concept("i", &a("B")));
            }
            SatOutcome::Inconsistent => panic!("expected a model"),
        }
        assert!(r.entails_assertion("i", &a("B")).unwrap());
    }

    #[test]
    fn trace_records_rule_applications() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_individual("i");
            o.assert_concept("i", Concept::and(a("A"), a("B")));
        });
        let r = Reasoner::new(&o, Limits::default());
        let (outcome, trace) = r.check_traced().unwrap();
        assert!(outcome.is_consistent());
        assert_eq!(trace, vec!["RULE and i : A and B"]);
    }

    #[test]
    fn ground_disjunction_needs_no_single_entailed_disjunct() {
        // i is A or B, so "i:A or i:B" is entailed while neither side is.
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_concept("B").declare_individual("i");
            o.assert_concept("i", Concept::or(a("A"), a("B")));
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(!r.entails_assertion("i", &a("A")).unwrap());
        assert!(!r.entails_assertion("i", &a("B")).unwrap());
        let disjunction = vec![
            vec![("i".to_string(), a("A"))],
            vec![("i".to_string(), a("B"))],
        ];
        assert!(r.entails_ground_disjunction(&disjunction).unwrap());
        let conjunction = vec![vec![
            ("i".to_string(), a("A")),
            ("i".to_string(), a("B")),
        ]];
        assert!(!r.entails_ground_disjunction(&conjunction).unwrap());
    }

    #[test]
    fn empty_disjunction_is_entailed_only_by_inconsistency() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A").declare_individual("i");
        });
        let r = Reasoner::new(&o, Limits::default());
        assert!(!r.entails_ground_disjunction(&[]).unwrap());
        assert!(r.entails_ground_disjunction(&[vec![]]).unwrap());
    }

    #[test]
    fn extracted_model_satisfies_the_ontology() {
        let o = reasoner_fixture(|o| {
            o.declare_concept("A")
                .declare_concept("B")
                .declare_role("R")
                .declare_individual("i")
                .declare_individual("j");
            o.add_axiom(Axiom::Subsumption(a("A"), Concept::some("R", a("B"))));
            o.assert_concept("i", a("A"));
            o.assert_role("i", "j", "R");
        });
        let r = Reasoner::new(&o, Limits::default());
        match r.check_with(&[]).unwrap() {
            SatOutcome::Consistent(model) => assert!(model.satisfies_ontology(&o)),
            SatOutcome::Inconsistent => panic!("expected a model"),
        }
    }
}
