//! Organizes frequent patterns into a concept taxonomy.
//!
//! Nodes are distinct answer sets: every pattern admitted by the language
//! bias is keyed by its extension, and patterns sharing an extension fold
//! into one node whose intension is their generality bound (most general
//! or most specific, per the bias). Edges follow strict extension
//! inclusion, transitively reduced. The root is the trivial query's node
//! and is inserted before any bias filtering applies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::bias::{BiasSpec, BoundKind};
use crate::discovery::DiscoveryRun;
use crate::engine::{Engine, EngineError};
use crate::generality::{mgd, msd, Intension};
use crate::limits::Limits;
use crate::syntax::{Concept, KnowledgeBase, OQuery, Term};

/// One taxonomy concept: an extension with the folded intension of every
/// pattern that produced it.
#[derive(Clone, Debug)]
pub struct TaxonomyNode {
    /// Insertion index; also the index into the dag's node list.
    pub id: usize,
    /// Display name, `C-<ordinal><level><depth>` of the first contributor.
    pub label: String,
    /// Granularity level of the first contributing pattern.
    pub level: usize,
    /// Depth annotation of the first contributing pattern.
    pub depth: usize,
    pub intension: Intension,
    pub extension: BTreeSet<String>,
    /// Pattern ids folded into this node, in fold order.
    pub contributors: Vec<usize>,
}

/// The finished taxonomy: nodes in insertion order, edges as
/// (parent, child) pairs forming the transitive reduction of strict
/// extension inclusion.
#[derive(Clone, Debug)]
pub struct TaxonomyDag {
    pub nodes: Vec<TaxonomyNode>,
    pub edges: BTreeSet<(usize, usize)>,
    pub root: usize,
}

impl TaxonomyDag {
    /// Children of a node under the reduced edge relation.
    pub fn children(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((id, 0)..(id + 1, 0))
            .map(|&(_, child)| child)
    }

    /// GraphViz rendering, deterministic across runs: nodes in id order,
    /// specific-to-general arrows.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph taxonomy {\n  rankdir = BT;\n  node [shape = box];\n");
        for node in &self.nodes {
            let ext: Vec<&str> = node.extension.iter().map(String::as_str).collect();
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\\n{{{}}}\"];",
                node.id,
                node.label,
                ext.join(", ")
            );
        }
        for (parent, child) in &self.edges {
            let _ = writeln!(out, "  n{child} -> n{parent};");
        }
        out.push_str("}\n");
        out
    }
}

/// Whether the query's constraints sit at admissible granularity: every
/// constraint other than the distinguished variable's reference constraint
/// must use a level-`minG`-or-deeper alphabet concept, and when the bias
/// demands it, every body variable must be constrained (constants are
/// exempt). The trivial query passes vacuously.
pub fn passes_language_bias(query: &OQuery, bias: &BiasSpec) -> bool {
    let clause = query.clause();
    let reference = Term::Var(query.distinguished().to_string());
    for constraint in &clause.constraints {
        if constraint.term == reference && constraint.concept == bias.reference_concept() {
            continue;
        }
        let Concept::Atomic(name) = &constraint.concept else {
            return false;
        };
        let deep_enough =
            (bias.min_level..=bias.max_level()).any(|l| bias.level(l).contains(name));
        if !deep_enough {
            return false;
        }
    }
    if bias.all_vars_constrained {
        let constrained: BTreeSet<&str> = clause
            .constraints
            .iter()
            .filter_map(|c| match &c.term {
                Term::Var(v) => Some(v.as_str()),
                Term::Const(_) => None,
            })
            .collect();
        for atom in &clause.body {
            for arg in &atom.args {
                if let Term::Var(v) = arg {
                    if !constrained.contains(v.as_str()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Incremental taxonomy construction: create with the root in place, insert
/// admitted patterns, then finish to compute edges.
pub struct TaxonomyBuilder<'a> {
    engine: Engine<'a>,
    kb: &'a KnowledgeBase,
    bias: &'a BiasSpec,
    limits: Limits,
    nodes: Vec<TaxonomyNode>,
    by_extension: BTreeMap<BTreeSet<String>, usize>,
}

impl<'a> TaxonomyBuilder<'a> {
    pub fn new(
        kb: &'a KnowledgeBase,
        bias: &'a BiasSpec,
        limits: Limits,
    ) -> Result<Self, EngineError> {
        let engine = Engine::new(kb, limits);
        let trivial = OQuery::trivial(bias.reference_concept());
        let extension = engine.answer_set(&trivial)?;
        let root = TaxonomyNode {
            id: 0,
            label: label(0, 1, 1),
            level: 1,
            depth: 1,
            intension: vec![trivial.clause().clone()],
            extension: extension.clone(),
            contributors: Vec::new(),
        };
        let mut by_extension = BTreeMap::new();
        by_extension.insert(extension, 0);
        Ok(TaxonomyBuilder {
            engine,
            kb,
            bias,
            limits,
            nodes: vec![root],
            by_extension,
        })
    }

    /// Inserts one pattern, keyed by its answer set: a new extension opens
    /// a node, a known one folds the clause into that node's intension
    /// under the bias's bound. Returns the node id. Language-bias
    /// filtering is the caller's concern.
    pub fn insert_concept(
        &mut self,
        query: &OQuery,
        level: usize,
        depth: usize,
        contributor: usize,
    ) -> Result<usize, EngineError> {
        let extension = self.engine.answer_set(query)?;
        let clause = query.clause().clone();
        match self.by_extension.get(&extension) {
            Some(&id) => {
                let node = &mut self.nodes[id];
                let pair = [node.intension.clone(), vec![clause]];
                node.intension = match self.bias.bound {
                    BoundKind::MostGeneral => mgd(&pair, self.kb, self.limits)?,
                    BoundKind::MostSpecific => msd(&pair, self.kb, self.limits)?,
                };
                node.contributors.push(contributor);
                Ok(id)
            }
            None => {
                let id = self.nodes.len();
                self.nodes.push(TaxonomyNode {
                    id,
                    label: label(id, level, depth),
                    level,
                    depth,
                    intension: vec![clause],
                    extension: extension.clone(),
                    contributors: vec![contributor],
                });
                self.by_extension.insert(extension, id);
                Ok(id)
            }
        }
    }

    /// Computes the reduced edge relation and yields the dag.
    pub fn finish(self) -> TaxonomyDag {
        let nodes = self.nodes;
        let mut edges = BTreeSet::new();
        for parent in 0..nodes.len() {
            for child in 0..nodes.len() {
                if !strict_subset(&nodes[child].extension, &nodes[parent].extension) {
                    continue;
                }
                let covered = (0..nodes.len()).any(|mid| {
                    strict_subset(&nodes[mid].extension, &nodes[parent].extension)
                        && strict_subset(&nodes[child].extension, &nodes[mid].extension)
                });
                if !covered {
                    edges.insert((parent, child));
                }
            }
        }
        TaxonomyDag {
            nodes,
            edges,
            root: 0,
        }
    }
}

/// Builds the taxonomy of a discovery run: admitted frequent patterns are
/// inserted in (level, depth, canonical text) order, so the result is
/// independent of generation order.
pub fn build_taxonomy(
    run: &DiscoveryRun,
    kb: &KnowledgeBase,
    bias: &BiasSpec,
    limits: Limits,
) -> Result<TaxonomyDag, EngineError> {
    let mut builder = TaxonomyBuilder::new(kb, bias, limits)?;
    let trivial = OQuery::trivial(bias.reference_concept()).canonical_text();
    let mut admitted: Vec<_> = run
        .frequent_entries()
        .filter(|p| p.canonical != trivial && passes_language_bias(&p.query, bias))
        .collect();
    admitted.sort_by(|a, b| {
        (a.level, a.depth, &a.canonical).cmp(&(b.level, b.depth, &b.canonical))
    });
    for entry in admitted {
        builder.insert_concept(&entry.query, entry.level, entry.depth, entry.id)?;
    }
    Ok(builder.finish())
}

fn label(id: usize, level: usize, depth: usize) -> String {
    format!("C-{}{}{}", id + 1, level, depth)
}

fn strict_subset(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    a.len() < b.len() && a.is_subset(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::discover;
    use crate::parse::{parse_bias, parse_ontology, parse_program};

    fn fixture(name: &str) -> String {
        let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
    }

    fn mini() -> (KnowledgeBase, BiasSpec) {
        let kb = KnowledgeBase::new(
            parse_ontology(&fixture("mini.onto")).unwrap(),
            parse_program(&fixture("mini.dlp")).unwrap(),
        );
        let bias = parse_bias(&fixture("mini.bias")).unwrap();
        (kb, bias)
    }

    fn query(src: &str, reference: &str) -> OQuery {
        let clause = parse_program(src).unwrap().remove(0);
        OQuery::new(clause, Concept::atomic(reference)).unwrap()
    }

    fn canon(src: &str) -> String {
        parse_program(src).unwrap().remove(0).canonical_text()
    }

    /// Four nested extensions: {a,b,c,d} ⊃ {a,b,c} ⊃ {a,b} ⊃ {a}.
    fn chain() -> (KnowledgeBase, BiasSpec) {
        let onto = parse_ontology(
            "concept C. concept E.
             individual a. individual b. individual c. individual d.
             individual x. individual y. individual z.
             a : C. b : C. c : C. d : C.",
        )
        .unwrap();
        let prog = parse_program(
            "p(a, x). p(b, x). p(c, x).
             r(a, y). r(b, y).
             s(a, z).",
        )
        .unwrap();
        let bias = parse_bias(
            "[language]
             reference = C; predicates = p/2, r/2, s/2
             level.1 = E
             maxD = 3; maxG = 1
             [thresholds]
             minsup.1 = 0.2",
        )
        .unwrap();
        (KnowledgeBase::new(onto, prog), bias)
    }

    #[test]
    fn bias_admits_only_deep_enough_constraints() {
        let bias = parse_bias(&fixture("cia.bias")).unwrap();
        let pass = [
            "q(X) :- & X:MiddleEastCountry.",
            "q(X) :- believes(X, Y) & X:MiddleEastCountry, Y:MuslimReligion.",
            "q(X) :- believes(X, 'Druze') & X:MiddleEastCountry.",
            "q(X) :- believes(X, Y), speaks(X, Z) \
             & X:MiddleEastCountry, Y:MonotheisticReligion, Z:ArabicLanguage.",
        ];
        for src in pass {
            assert!(passes_language_bias(&query(src, "MiddleEastCountry"), &bias), "{src}");
        }
        let fail = [
            "q(X) :- believes(X, Y) & X:MiddleEastCountry.",
            "q(X) :- believes(X, Y) & X:MiddleEastCountry, Y:Religion.",
            "q(X) :- believes(X, Y), speaks(X, Z) & X:MiddleEastCountry, Y:MuslimReligion.",
        ];
        for src in fail {
            assert!(!passes_language_bias(&query(src, "MiddleEastCountry"), &bias), "{src}");
        }

        // Without the all-variables rule, unconstrained variables pass.
        let loose = parse_bias(&fixture("mini.bias")).unwrap();
        assert!(passes_language_bias(
            &query("q(X) :- believes(X, Y) & X:MiddleEastCountry.", "MiddleEastCountry"),
            &loose
        ));
        assert!(passes_language_bias(
            &query(
                "q(X) :- believes(X, Y) & X:MiddleEastCountry, Y:Religion.",
                "MiddleEastCountry"
            ),
            &loose
        ));
    }

    #[test]
    fn shared_extensions_fold_into_one_node() {
        let (kb, bias) = mini();
        let run = discover(&kb, &bias, Limits::default()).unwrap();
        let dag = build_taxonomy(&run, &kb, &bias, Limits::default()).unwrap();

        assert_eq!(dag.nodes.len(), 2);
        let root = &dag.nodes[dag.root];
        let ext: Vec<&str> = root.extension.iter().map(String::as_str).collect();
        assert_eq!(ext, ["ARM", "IR", "SA"]);
        assert_eq!(root.label, "C-111");

        let child = &dag.nodes[1];
        let ext: Vec<&str> = child.extension.iter().map(String::as_str).collect();
        assert_eq!(ext, ["ARM", "IR"]);
        assert_eq!(child.contributors.len(), 10);
        assert_eq!(child.label, "C-212");

        // Every later pattern is below one of the two one-atom patterns,
        // so the fold keeps exactly those.
        let texts: Vec<String> = child
            .intension
            .iter()
            .map(|c| c.canonical_text())
            .collect();
        assert_eq!(
            texts,
            vec![
                canon("q(X) :- believes(X, Y) & X:MiddleEastCountry."),
                canon("q(X) :- speaks(X, Y) & X:MiddleEastCountry."),
            ]
        );

        assert_eq!(dag.edges, BTreeSet::from([(0, 1)]));
    }

    #[test]
    fn edges_are_the_reduction_of_strict_inclusion() {
        let (kb, bias) = chain();
        let run = discover(&kb, &bias, Limits::default()).unwrap();
        let dag = build_taxonomy(&run, &kb, &bias, Limits::default()).unwrap();

        let exts: Vec<String> = dag
            .nodes
            .iter()
            .map(|n| n.extension.iter().map(String::as_str).collect::<Vec<_>>().join(""))
            .collect();
        assert_eq!(exts, ["abcd", "abc", "ab", "a"]);
        assert_eq!(dag.edges, BTreeSet::from([(0, 1), (1, 2), (2, 3)]));

        // {a,b} collects both the r pattern and the p-r join; the bound
        // keeps the more general one.
        let two = &dag.nodes[2];
        assert_eq!(two.contributors.len(), 2);
        assert_eq!(two.intension.len(), 1);
        assert_eq!(
            two.intension[0].canonical_text(),
            canon("q(A) :- r(A, B) & A:C.")
        );
    }

    #[test]
    fn bound_choice_changes_intensions_never_structure() {
        let (kb, bias) = chain();
        let mut specific = bias.clone();
        specific.bound = BoundKind::MostSpecific;

        let run = discover(&kb, &bias, Limits::default()).unwrap();
        let general_dag = build_taxonomy(&run, &kb, &bias, Limits::default()).unwrap();
        let specific_dag = build_taxonomy(&run, &kb, &specific, Limits::default()).unwrap();

        assert_eq!(general_dag.edges, specific_dag.edges);
        for (g, s) in general_dag.nodes.iter().zip(&specific_dag.nodes) {
            assert_eq!(g.extension, s.extension);
            assert_eq!(g.contributors, s.contributors);
        }

        let two = &specific_dag.nodes[2];
        assert_eq!(
            two.intension.iter().map(|c| c.canonical_text()).collect::<Vec<_>>(),
            vec![canon("q(A) :- p(A, B), r(A, C) & A:C.")]
        );
        // {a} folds three incomparable patterns into one conjunction.
        let one = &specific_dag.nodes[3];
        assert_eq!(one.intension.len(), 1);
        assert_eq!(one.intension[0].body.len(), 4);
    }

    #[test]
    fn dot_output_is_stable_and_complete() {
        let (kb, bias) = mini();
        let run = discover(&kb, &bias, Limits::default()).unwrap();
        let dag = build_taxonomy(&run, &kb, &bias, Limits::default()).unwrap();
        let dot = dag.to_dot();
        assert_eq!(
            dot,
            "digraph taxonomy {\n  rankdir = BT;\n  node [shape = box];\n  \
             n0 [label=\"C-111\\n{ARM, IR, SA}\"];\n  \
             n1 [label=\"C-212\\n{ARM, IR}\"];\n  n1 -> n0;\n}\n"
        );
        let again = build_taxonomy(&run, &kb, &bias, Limits::default()).unwrap();
        assert_eq!(dot, again.to_dot());
    }
}
