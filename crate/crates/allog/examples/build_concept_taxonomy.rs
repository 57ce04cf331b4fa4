//! Discovers frequent patterns over the CIA fixture once, then arranges
//! them into concept taxonomies under each shipped bias setting: both
//! granularity cutoffs, each with both generality bounds. The node tables
//! show that the cutoff changes which nodes exist while the bound only
//! changes their intensions.

use allog::discovery::discover;
use allog::limits::Limits;
use allog::parse::{parse_bias, parse_ontology, parse_program};
use allog::syntax::KnowledgeBase;
use allog::taxonomy::build_taxonomy;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn main() {
    let kb = KnowledgeBase::new(
        parse_ontology(&fixture("cia.onto")).expect("ontology parses"),
        parse_program(&fixture("cia.dlp")).expect("program parses"),
    );
    let bias = parse_bias(&fixture("cia.bias")).expect("bias parses");
    let run = discover(&kb, &bias, Limits::default()).expect("search completes");
    println!("{} frequent patterns\n", run.frequent());

    for name in ["cia.bias", "cia-msd.bias", "cia-ming3.bias", "cia-ming3-msd.bias"] {
        let bias = parse_bias(&fixture(name)).expect("bias parses");
        let dag = build_taxonomy(&run, &kb, &bias, Limits::default()).expect("taxonomy builds");
        println!("== {name}: {} nodes", dag.nodes.len());
        for node in &dag.nodes {
            let ext: Vec<&str> = node.extension.iter().map(String::as_str).collect();
            println!("{:<7} (l{}, k{})  {{{}}}", node.label, node.level, node.depth, ext.join(", "));
            for clause in &node.intension {
                println!("        {clause}");
            }
        }
        let edges: Vec<String> = dag
            .edges
            .iter()
            .map(|(p, c)| format!("{}>{}", p, c))
            .collect();
        println!("edges: {}\n", edges.join(" "));
    }
}
