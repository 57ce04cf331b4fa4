//! Runs the levelwise pattern search over the CIA fixture and prints every
//! candidate with its support, flagging the frequent ones.

use allog::discovery::{discover, Outcome};
use allog::engine::percent_text;
use allog::limits::Limits;
use allog::parse::{parse_bias, parse_ontology, parse_program};
use allog::syntax::KnowledgeBase;

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

    for stage in &run.stages {
        println!(
            "level {}: {} candidates, {} evaluated, {} frequent",
            stage.level, stage.candidates, stage.evaluated, stage.frequent
        );
    }
    println!(
        "total: {} candidates, {} evaluated, {} frequent\n",
        run.candidates(),
        run.evaluated(),
        run.frequent()
    );

    for p in &run.patterns {
        let mark = match &p.outcome {
            Outcome::Evaluated { support, frequent } => {
                format!("{} {}", if *frequent { "+" } else { " " }, percent_text(*support))
            }
            Outcome::AncestorPruned => "  pruned".to_string(),
        };
        println!("[{:>3}] l{} k{} {} {}", p.id, p.level, p.depth, mark, p.canonical);
    }
}
