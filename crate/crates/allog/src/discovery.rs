//! Levelwise search for frequent query patterns over a granularity-layered
//! constraint language.
//!
//! Patterns are O-queries built from a declared predicate alphabet and
//! per-level concept alphabets. The search walks granularity levels
//! outermost; within a level it alternates evaluation and refinement until
//! no new candidate appears. A pattern is frequent when its support clears
//! the level's threshold and every granularity ancestor is frequent.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

use crate::bias::BiasSpec;
use crate::engine::{Engine, EngineError};
use crate::limits::{Limits, ResourceError};
use crate::syntax::{
    Concept, ConstrainedClause, Constraint, DatalogAtom, KnowledgeBase, OQuery, Substitution,
    Term,
};

/// Depth annotation of a pattern: 1 plus, per body atom, 1 plus the number
/// of its slots filled by a ground constant or by a constrained variable
/// other than the distinguished one. An atom whose fresh slot stays
/// unconstrained therefore contributes 1; a fully constrained binary atom
/// contributes 2.
pub fn pattern_depth(clause: &ConstrainedClause, distinguished: &str) -> usize {
    let constrained: BTreeSet<&str> = clause
        .constraints
        .iter()
        .filter_map(|c| match &c.term {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
        .collect();
    let mut depth = 1;
    for atom in &clause.body {
        depth += 1;
        for arg in &atom.args {
            match arg {
                Term::Const(_) => depth += 1,
                Term::Var(v) => {
                    if v != distinguished && constrained.contains(v.as_str()) {
                        depth += 1;
                    }
                }
            }
        }
    }
    depth
}

/// What candidate evaluation concluded about one pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Support was computed; `frequent` records the threshold comparison.
    Evaluated { support: Ratio<u64>, frequent: bool },
    /// Skipped: some granularity-raised form of the pattern is not
    /// frequent at the previous level, so no ancestor chain exists.
    AncestorPruned,
}

/// One candidate pattern with its place in the search.
#[derive(Clone, Debug)]
pub struct PatternEntry {
    /// Position in generation order; also the index into the run's list.
    pub id: usize,
    pub query: OQuery,
    /// Granularity level of the constraint concepts.
    pub level: usize,
    /// Depth annotation, see [`pattern_depth`].
    pub depth: usize,
    /// Ids of the frequent patterns this one was generated from.
    pub parents: Vec<usize>,
    pub canonical: String,
    pub outcome: Outcome,
}

impl PatternEntry {
    pub fn support(&self) -> Option<Ratio<u64>> {
        match &self.outcome {
            Outcome::Evaluated { support, .. } => Some(*support),
            Outcome::AncestorPruned => None,
        }
    }

    pub fn is_frequent(&self) -> bool {
        matches!(self.outcome, Outcome::Evaluated { frequent: true, .. })
    }
}

/// Per-level totals, reported as search progress.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageStats {
    pub level: usize,
    /// Canonically distinct patterns the operators produced.
    pub candidates: usize,
    /// Candidates whose support was computed.
    pub evaluated: usize,
    pub frequent: usize,
}

/// Result of one discovery run: every candidate in generation order plus
/// per-level progress.
#[derive(Clone, Debug)]
pub struct DiscoveryRun {
    pub patterns: Vec<PatternEntry>,
    pub stages: Vec<StageStats>,
}

impl DiscoveryRun {
    pub fn candidates(&self) -> usize {
        self.patterns.len()
    }

    pub fn evaluated(&self) -> usize {
        self.patterns
            .iter()
            .filter(|p| matches!(p.outcome, Outcome::Evaluated { .. }))
            .count()
    }

    pub fn frequent(&self) -> usize {
        self.patterns.iter().filter(|p| p.is_frequent()).count()
    }

    pub fn frequent_entries(&self) -> impl Iterator<Item = &PatternEntry> {
        self.patterns.iter().filter(|p| p.is_frequent())
    }
}

/// The discovery search over one knowledge base and bias.
pub struct Discoverer<'a> {
    engine: Engine<'a>,
    bias: &'a BiasSpec,
    /// Per declared predicate, the concept of each argument slot, read off
    /// the first defining rule in the program. Slots without a constraint
    /// stay open.
    slots: BTreeMap<(String, usize), Vec<Option<Concept>>>,
    /// Constants usable for instantiation: those occurring in extensional
    /// facts of the declared predicates.
    pool: BTreeSet<String>,
}

/// Candidate awaiting evaluation: clause plus provenance.
struct Candidate {
    clause: ConstrainedClause,
    depth: usize,
    parents: Vec<usize>,
}

impl<'a> Discoverer<'a> {
    pub fn new(kb: &'a KnowledgeBase, bias: &'a BiasSpec, limits: Limits) -> Self {
        let mut slots = BTreeMap::new();
        let mut pool = BTreeSet::new();
        for (name, arity) in &bias.predicates {
            let rule = kb.pi.iter().find(|c| {
                !c.body.is_empty()
                    && c.head
                        .as_ref()
                        .is_some_and(|h| h.predicate == *name && h.arity() == *arity)
            });
            let typed = match rule {
                Some(rule) => {
                    let head = rule.head.as_ref().expect("found by head");
                    head.args
                        .iter()
                        .map(|arg| match arg {
                            Term::Var(v) => rule
                                .constraints
                                .iter()
                                .find(|c| c.term == Term::Var(v.clone()))
                                .map(|c| c.concept.clone()),
                            Term::Const(_) => None,
                        })
                        .collect()
                }
                None => vec![None; *arity],
            };
            slots.insert((name.clone(), *arity), typed);

            for clause in &kb.pi {
                if clause.is_fact() {
                    let head = clause.head.as_ref().expect("facts have heads");
                    if head.predicate == *name && head.arity() == *arity {
                        for t in &head.args {
                            if let Term::Const(c) = t {
                                pool.insert(c.clone());
                            }
                        }
                    }
                }
            }
        }
        Discoverer {
            engine: Engine::new(kb, limits),
            bias,
            slots,
            pool,
        }
    }

    pub fn engine(&self) -> &Engine<'a> {
        &self.engine
    }

    /// The most general pattern: the reference constraint alone.
    pub fn trivial_query(&self) -> OQuery {
        OQuery::trivial(self.bias.reference_concept())
    }

    /// All downward refinements of a pattern at the given level: atom
    /// extensions, constant instantiations (at the last level), and
    /// granularity descents. Canonically deduplicated; each result carries
    /// its level.
    pub fn refine(
        &self,
        query: &OQuery,
        level: usize,
    ) -> Result<Vec<(OQuery, usize)>, ResourceError> {
        let clause = query.clause();
        let mut out: BTreeMap<String, (OQuery, usize)> = BTreeMap::new();
        let mut push = |clause: ConstrainedClause, level: usize| {
            let q = wrap(clause, &self.bias.reference_concept());
            out.entry(q.canonical_text()).or_insert((q, level));
        };
        for child in self.extend_children(clause, level)? {
            push(child, level);
        }
        if level == self.bias.max_level() {
            for child in self.instantiate_children(clause)? {
                push(child, level);
            }
        }
        if level < self.bias.max_level() {
            for child in self.descend_children(clause, level)? {
                push(child, level + 1);
            }
        }
        Ok(out.into_values().collect())
    }

    /// Runs the full levelwise search.
    pub fn run(&self) -> Result<DiscoveryRun, EngineError> {
        let c_ref = self.bias.reference_concept();
        let dist = self.trivial_query().distinguished().to_string();
        let max_level = self.bias.max_level();

        let mut patterns: Vec<PatternEntry> = Vec::new();
        let mut by_canon: BTreeMap<String, usize> = BTreeMap::new();
        let mut frequent_canon: Vec<BTreeSet<String>> = vec![BTreeSet::new(); max_level + 1];
        let mut stages = Vec::new();

        for level in 1..=max_level {
            let mut stage = StageStats {
                level,
                candidates: 0,
                evaluated: 0,
                frequent: 0,
            };

            let mut batch: Vec<Candidate> = if level == 1 {
                let clause = self.trivial_query().clause().clone();
                let depth = pattern_depth(&clause, &dist);
                vec![Candidate {
                    clause,
                    depth,
                    parents: Vec::new(),
                }]
            } else {
                let mut seeds: BTreeMap<String, Candidate> = BTreeMap::new();
                let sources: Vec<usize> = patterns
                    .iter()
                    .filter(|p| p.level == level - 1 && p.is_frequent())
                    .map(|p| p.id)
                    .collect();
                for id in sources {
                    let clause = patterns[id].query.clause().clone();
                    for child in self.descend_children(&clause, level - 1)? {
                        self.queue_child(child, id, &dist, &mut seeds, &mut patterns, &by_canon);
                    }
                }
                seeds.into_values().collect()
            };

            while !batch.is_empty() {
                batch.sort_by(|a, b| {
                    (a.depth, a.clause.canonical_text()).cmp(&(b.depth, b.clause.canonical_text()))
                });
                let mut newly_frequent: Vec<usize> = Vec::new();
                for cand in batch {
                    let id = patterns.len();
                    let canonical = cand.clause.canonical_text();
                    by_canon.insert(canonical.clone(), id);
                    stage.candidates += 1;

                    let ground_free = cand.clause.constants().is_empty();
                    let outcome = if level > 1
                        && ground_free
                        && !self.raise_is_frequent(&cand.clause, level, &frequent_canon[level - 1])?
                    {
                        Outcome::AncestorPruned
                    } else {
                        stage.evaluated += 1;
                        let query = wrap(cand.clause.clone(), &c_ref);
                        let support = self.engine.support(&query)?;
                        let frequent = support >= self.bias.minsup_for(level);
                        if frequent {
                            stage.frequent += 1;
                            frequent_canon[level].insert(canonical.clone());
                            newly_frequent.push(id);
                        }
                        Outcome::Evaluated { support, frequent }
                    };
                    patterns.push(PatternEntry {
                        id,
                        query: wrap(cand.clause, &c_ref),
                        level,
                        depth: cand.depth,
                        parents: cand.parents,
                        canonical,
                        outcome,
                    });
                }

                let mut next: BTreeMap<String, Candidate> = BTreeMap::new();
                for id in newly_frequent {
                    let clause = patterns[id].query.clause().clone();
                    let mut children = self.extend_children(&clause, level)?;
                    if level == max_level {
                        children.extend(self.instantiate_children(&clause)?);
                    }
                    for child in children {
                        self.queue_child(child, id, &dist, &mut next, &mut patterns, &by_canon);
                    }
                }
                batch = next.into_values().collect();
            }
            stages.push(stage);
        }

        Ok(DiscoveryRun { patterns, stages })
    }

    /// Files one generated child: records the parent on an already-known
    /// pattern, or queues the child for evaluation.
    fn queue_child(
        &self,
        clause: ConstrainedClause,
        parent: usize,
        dist: &str,
        queue: &mut BTreeMap<String, Candidate>,
        patterns: &mut [PatternEntry],
        by_canon: &BTreeMap<String, usize>,
    ) {
        let canonical = clause.canonical_text();
        if let Some(&existing) = by_canon.get(&canonical) {
            if !patterns[existing].parents.contains(&parent) {
                patterns[existing].parents.push(parent);
            }
            return;
        }
        let depth = pattern_depth(&clause, dist);
        queue
            .entry(canonical)
            .and_modify(|c| {
                if !c.parents.contains(&parent) {
                    c.parents.push(parent);
                }
            })
            .or_insert(Candidate {
                clause,
                depth,
                parents: vec![parent],
            });
    }

    /// Atom extension: appends one declared predicate joined to the
    /// distinguished variable, the fresh slot either unconstrained or
    /// constrained by a current-level concept compatible with the slot.
    fn extend_children(
        &self,
        clause: &ConstrainedClause,
        level: usize,
    ) -> Result<Vec<ConstrainedClause>, ResourceError> {
        let dist = distinguished_of(clause);
        let c_ref = self.bias.reference_concept();
        let mut out = Vec::new();
        for (name, arity) in &self.bias.predicates {
            let slots = &self.slots[&(name.clone(), *arity)];
            'fresh: for fresh_pos in 0..*arity {
                for (i, slot) in slots.iter().enumerate() {
                    if i != fresh_pos && !self.fits(&c_ref, slot)? {
                        continue 'fresh;
                    }
                }
                let mut gammas: Vec<Option<Concept>> = vec![None];
                for name in self.bias.level(level) {
                    let gamma = Concept::atomic(name);
                    if self.fits(&gamma, &slots[fresh_pos])? {
                        gammas.push(Some(gamma));
                    }
                }
                for gamma in gammas {
                    let fresh = fresh_var(clause);
                    let args: Vec<Term> = (0..*arity)
                        .map(|i| {
                            if i == fresh_pos {
                                Term::Var(fresh.clone())
                            } else {
                                Term::Var(dist.clone())
                            }
                        })
                        .collect();
                    let mut child = clause.clone();
                    child.body.push(DatalogAtom::new(name, args));
                    if let Some(gamma) = gamma {
                        child
                            .constraints
                            .push(Constraint::new(Term::Var(fresh.clone()), gamma));
                    }
                    if pattern_depth(&child, &dist) <= self.bias.max_depth {
                        out.push(child);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Constant instantiation: replaces a last-level-constrained variable
    /// by a pool constant of that concept, dropping the constraint. Depth
    /// and level are preserved.
    fn instantiate_children(
        &self,
        clause: &ConstrainedClause,
    ) -> Result<Vec<ConstrainedClause>, ResourceError> {
        let dist = distinguished_of(clause);
        let last = self.bias.level(self.bias.max_level());
        let present = clause.constants();
        let mut out = Vec::new();
        for constraint in &clause.constraints {
            let Term::Var(v) = &constraint.term else { continue };
            if *v == dist {
                continue;
            }
            let Concept::Atomic(concept_name) = &constraint.concept else { continue };
            if !last.contains(concept_name) {
                continue;
            }
            for constant in &self.pool {
                if present.contains(constant) {
                    continue;
                }
                if !self
                    .engine
                    .reasoner()
                    .entails_assertion(constant, &constraint.concept)?
                {
                    continue;
                }
                let mut s = Substitution::new();
                s.bind(v, Term::Const(constant.clone()));
                let mut child = clause.apply_substitution(&s);
                child
                    .constraints
                    .retain(|c| c.term != Term::Const(constant.clone()) || c.concept != constraint.concept);
                out.push(child);
            }
        }
        Ok(out)
    }

    /// Granularity descent: rewrites every constrained variable to a
    /// next-level subconcept, in every combination. A pattern without
    /// variable constraints has no descents.
    fn descend_children(
        &self,
        clause: &ConstrainedClause,
        level: usize,
    ) -> Result<Vec<ConstrainedClause>, ResourceError> {
        if level >= self.bias.max_level() {
            return Ok(Vec::new());
        }
        self.reconstrained(clause, self.bias.level(level + 1), |sub, sup| {
            self.subsumed(sub, sup)
        })
    }

    /// The ancestor condition: every way of raising the pattern's variable
    /// constraints to previous-level superconcepts must land on a frequent
    /// pattern.
    fn raise_is_frequent(
        &self,
        clause: &ConstrainedClause,
        level: usize,
        frequent: &BTreeSet<String>,
    ) -> Result<bool, ResourceError> {
        let raised = self.reconstrained(clause, self.bias.level(level - 1), |sub, sup| {
            self.subsumed(sup, sub)
        })?;
        if raised.is_empty() {
            return Ok(false);
        }
        Ok(raised
            .iter()
            .all(|r| frequent.contains(&r.canonical_text())))
    }

    /// Rewrites each non-distinguished variable constraint to every
    /// alphabet concept accepted by `related(candidate, current)`, in all
    /// combinations.
    fn reconstrained(
        &self,
        clause: &ConstrainedClause,
        alphabet: &[String],
        related: impl Fn(&Concept, &Concept) -> Result<bool, ResourceError>,
    ) -> Result<Vec<ConstrainedClause>, ResourceError> {
        let dist = distinguished_of(clause);
        let mut targets: Vec<usize> = Vec::new();
        let mut choices: Vec<Vec<Concept>> = Vec::new();
        for (i, constraint) in clause.constraints.iter().enumerate() {
            match &constraint.term {
                Term::Var(v) if *v != dist => {
                    let mut alts = Vec::new();
                    for name in alphabet {
                        let cand = Concept::atomic(name);
                        if related(&cand, &constraint.concept)? {
                            alts.push(cand);
                        }
                    }
                    if alts.is_empty() {
                        return Ok(Vec::new());
                    }
                    targets.push(i);
                    choices.push(alts);
                }
                _ => {}
            }
        }
        if targets.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut odometer = vec![0usize; choices.len()];
        loop {
            let mut child = clause.clone();
            for (slot, &ci) in targets.iter().enumerate() {
                child.constraints[ci] =
                    Constraint::new(child.constraints[ci].term.clone(), choices[slot][odometer[slot]].clone());
            }
            out.push(child);
            let mut i = 0;
            loop {
                if i == odometer.len() {
                    return Ok(out);
                }
                odometer[i] += 1;
                if odometer[i] < choices[i].len() {
                    break;
                }
                odometer[i] = 0;
                i += 1;
            }
        }
    }

    fn subsumed(&self, sub: &Concept, sup: &Concept) -> Result<bool, ResourceError> {
        self.engine.reasoner().entails_subsumption(sub, sup)
    }

    /// Slot compatibility: open slots accept anything; typed slots require
    /// the candidate concept to be subsumed by the slot concept.
    fn fits(&self, concept: &Concept, slot: &Option<Concept>) -> Result<bool, ResourceError> {
        match slot {
            None => Ok(true),
            Some(s) => self.subsumed(concept, s),
        }
    }
}

/// Runs discovery over the knowledge base under the given bias.
pub fn discover(
    kb: &KnowledgeBase,
    bias: &BiasSpec,
    limits: Limits,
) -> Result<DiscoveryRun, EngineError> {
    Discoverer::new(kb, bias, limits).run()
}

fn wrap(clause: ConstrainedClause, c_ref: &Concept) -> OQuery {
    OQuery::new(clause, c_ref.clone()).expect("generated patterns are well-formed")
}

/// The head variable; generated clauses always have a unary variable head.
fn distinguished_of(clause: &ConstrainedClause) -> String {
    match clause.head.as_ref().map(|h| h.args.as_slice()) {
        Some([Term::Var(v)]) => v.clone(),
        _ => unreachable!("patterns have a unary variable head"),
    }
}

/// A variable name not used in the clause, from a fixed alphabet.
fn fresh_var(clause: &ConstrainedClause) -> String {
    let used = clause.vars();
    for name in ["Y", "Z", "W", "V", "U", "T", "S"] {
        if !used.contains(name) {
            return name.to_string();
        }
    }
    let mut n = 1;
    loop {
        let name = format!("Y{n}");
        if !used.contains(&name) {
            return name;
        }
        n += 1;
    }
}
