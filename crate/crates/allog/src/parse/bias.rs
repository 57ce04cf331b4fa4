use std::collections::BTreeMap;

use num_rational::Ratio;

use super::{lex, Diagnostic, Tok, TokenStream};
use crate::bias::{BiasSpec, BoundKind};

/// Parses a bias file: INI sections `[language]`, `[thresholds]`, and
/// `[search]`, with entries separated by newlines or semicolons and `#`
/// comments.
pub fn parse_bias(src: &str) -> Result<BiasSpec, Diagnostic> {
    let mut ts = TokenStream::new(lex(src, '#', true)?);

    let mut reference: Option<String> = None;
    let mut predicates: Option<Vec<(String, usize)>> = None;
    let mut levels: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut max_depth: Option<usize> = None;
    let mut max_level: Option<usize> = None;
    let mut minsup: BTreeMap<usize, Ratio<u64>> = BTreeMap::new();
    let mut min_level: Option<usize> = None;
    let mut all_vars_constrained: Option<bool> = None;
    let mut bound: Option<BoundKind> = None;

    let mut section: Option<String> = None;
    loop {
        skip_separators(&mut ts);
        if ts.at_eof() {
            break;
        }
        if ts.eat_sym("[") {
            let name = expect_word(&mut ts, "a section name")?;
            if !matches!(name.as_str(), "language" | "thresholds" | "search") {
                return Err(ts.error_here(format!("unknown section '{name}'")));
            }
            ts.expect_sym("]")?;
            section = Some(name);
            continue;
        }

        let key_pos = ts.pos();
        let key = expect_word(&mut ts, "a key")?;
        let index = if ts.eat_sym(".") {
            match ts.peek() {
                Tok::Number(n) if !n.contains('.') => {
                    let v: usize = n.parse().map_err(|_| ts.error_here("index too large"))?;
                    ts.bump();
                    Some(v)
                }
                _ => return Err(ts.error_here("expected a level index after '.'")),
            }
        } else {
            None
        };
        ts.expect_sym("=")?;

        let in_section = section.as_deref().ok_or_else(|| {
            Diagnostic::new(key_pos.0, key_pos.1, "entry before any [section]")
        })?;
        let expected_section = match key.as_str() {
            "reference" | "predicates" | "level" | "maxD" | "maxG" => "language",
            "minsup" => "thresholds",
            "minG" | "all_vars_constrained" | "bias" => "search",
            other => {
                return Err(Diagnostic::new(
                    key_pos.0,
                    key_pos.1,
                    format!("unknown key '{other}'"),
                ))
            }
        };
        if in_section != expected_section {
            return Err(Diagnostic::new(
                key_pos.0,
                key_pos.1,
                format!("key '{key}' belongs in [{expected_section}]"),
            ));
        }
        let dup = |name: &str| {
            Diagnostic::new(key_pos.0, key_pos.1, format!("duplicate key '{name}'"))
        };

        match (key.as_str(), index) {
            ("reference", None) => {
                if reference.is_some() {
                    return Err(dup("reference"));
                }
                reference = Some(ts.expect_cap_name("a concept name")?);
            }
            ("predicates", None) => {
                if predicates.is_some() {
                    return Err(dup("predicates"));
                }
                let mut list = Vec::new();
                loop {
                    let name = expect_word(&mut ts, "a predicate name")?;
                    ts.expect_sym("/")?;
                    let arity = expect_usize(&mut ts)?;
                    if arity == 0 {
                        return Err(ts.error_here("predicate arity must be positive"));
                    }
                    list.push((name, arity));
                    if !ts.eat_sym(",") {
                        break;
                    }
                }
                predicates = Some(list);
            }
            ("level", Some(n)) => {
                if n == 0 {
                    return Err(ts.error_here("level indices start at 1"));
                }
                if levels.contains_key(&n) {
                    return Err(dup(&format!("level.{n}")));
                }
                let mut list = vec![ts.expect_cap_name("a concept name")?];
                while ts.eat_sym(",") {
                    list.push(ts.expect_cap_name("a concept name")?);
                }
                levels.insert(n, list);
            }
            ("maxD", None) => {
                if max_depth.is_some() {
                    return Err(dup("maxD"));
                }
                max_depth = Some(expect_usize(&mut ts)?);
            }
            ("maxG", None) => {
                if max_level.is_some() {
                    return Err(dup("maxG"));
                }
                max_level = Some(expect_usize(&mut ts)?);
            }
            ("minsup", Some(n)) => {
                if minsup.contains_key(&n) {
                    return Err(dup(&format!("minsup.{n}")));
                }
                minsup.insert(n, expect_ratio(&mut ts)?);
            }
            ("minG", None) => {
                if min_level.is_some() {
                    return Err(dup("minG"));
                }
                min_level = Some(expect_usize(&mut ts)?);
            }
            ("all_vars_constrained", None) => {
                if all_vars_constrained.is_some() {
                    return Err(dup("all_vars_constrained"));
                }
                let w = expect_word(&mut ts, "true or false")?;
                all_vars_constrained = Some(match w.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(ts.error_here("expected true or false")),
                });
            }
            ("bias", None) => {
                if bound.is_some() {
                    return Err(dup("bias"));
                }
                let w = expect_word(&mut ts, "mgd or msd")?;
                bound = Some(match w.as_str() {
                    "mgd" => BoundKind::MostGeneral,
                    "msd" => BoundKind::MostSpecific,
                    _ => return Err(ts.error_here("expected mgd or msd")),
                });
            }
            ("minsup" | "level", None) => {
                return Err(Diagnostic::new(
                    key_pos.0,
                    key_pos.1,
                    format!("key '{key}' needs a level index, e.g. {key}.1"),
                ))
            }
            _ => {
                return Err(Diagnostic::new(
                    key_pos.0,
                    key_pos.1,
                    format!("key '{key}' does not take a level index"),
                ))
            }
        }

        if !(ts.at_eof() || ts.at_sym("[")) {
            expect_separator(&mut ts)?;
        }
    }

    let eof = ts.pos();
    let missing = |what: &str| Diagnostic::new(eof.0, eof.1, format!("missing {what}"));

    let reference = reference.ok_or_else(|| missing("reference"))?;
    let predicates = predicates.ok_or_else(|| missing("predicates"))?;
    let max_depth = max_depth.ok_or_else(|| missing("maxD"))?;
    let max_level = max_level.ok_or_else(|| missing("maxG"))?;
    if max_depth == 0 {
        return Err(missing("positive maxD"));
    }
    if max_level == 0 {
        return Err(missing("positive maxG"));
    }

    let mut level_list = Vec::new();
    for n in 1..=max_level {
        level_list.push(
            levels
                .remove(&n)
                .ok_or_else(|| missing(&format!("level.{n}")))?,
        );
    }
    if let Some((&n, _)) = levels.iter().next() {
        return Err(Diagnostic::new(
            eof.0,
            eof.1,
            format!("level.{n} exceeds maxG = {max_level}"),
        ));
    }
    let mut minsup_list = Vec::new();
    for n in 1..=max_level {
        minsup_list.push(
            minsup
                .remove(&n)
                .ok_or_else(|| missing(&format!("minsup.{n}")))?,
        );
    }
    if let Some((&n, _)) = minsup.iter().next() {
        return Err(Diagnostic::new(
            eof.0,
            eof.1,
            format!("minsup.{n} exceeds maxG = {max_level}"),
        ));
    }
    let min_level = min_level.unwrap_or(1);
    if min_level == 0 || min_level > max_level {
        return Err(Diagnostic::new(
            eof.0,
            eof.1,
            format!("minG must be between 1 and maxG = {max_level}"),
        ));
    }

    Ok(BiasSpec {
        reference,
        predicates,
        levels: level_list,
        max_depth,
        minsup: minsup_list,
        min_level,
        all_vars_constrained: all_vars_constrained.unwrap_or(false),
        bound: bound.unwrap_or(BoundKind::MostGeneral),
    })
}

fn skip_separators(ts: &mut TokenStream) {
    while matches!(ts.peek(), Tok::Newline) || ts.at_sym(";") {
        ts.bump();
    }
}

fn expect_separator(ts: &mut TokenStream) -> Result<(), Diagnostic> {
    if matches!(ts.peek(), Tok::Newline) || ts.at_sym(";") {
        ts.bump();
        Ok(())
    } else {
        Err(ts.error_here(format!(
            "expected end of entry, found {}",
            ts.peek().describe()
        )))
    }
}

fn expect_word(ts: &mut TokenStream, what: &str) -> Result<String, Diagnostic> {
    match ts.peek() {
        Tok::Ident(w) => {
            let w = w.clone();
            ts.bump();
            Ok(w)
        }
        other => Err(ts.error_here(format!("expected {what}, found {}", other.describe()))),
    }
}

fn expect_usize(ts: &mut TokenStream) -> Result<usize, Diagnostic> {
    match ts.peek() {
        Tok::Number(n) if !n.contains('.') => {
            let v = n
                .parse()
                .map_err(|_| ts.error_here("number too large"))?;
            ts.bump();
            Ok(v)
        }
        other => Err(ts.error_here(format!("expected an integer, found {}", other.describe()))),
    }
}

/// A decimal in [0, 1] as an exact rational: "0.20" becomes 1/5.
fn expect_ratio(ts: &mut TokenStream) -> Result<Ratio<u64>, Diagnostic> {
    match ts.peek() {
        Tok::Number(n) => {
            let (int_part, frac_part) = match n.split_once('.') {
                Some((i, f)) => (i, f),
                None => (n.as_str(), ""),
            };
            let scale = 10u64
                .checked_pow(frac_part.len() as u32)
                .ok_or_else(|| ts.error_here("too many decimal digits"))?;
            let int: u64 = int_part
                .parse()
                .map_err(|_| ts.error_here("number too large"))?;
            let frac: u64 = if frac_part.is_empty() {
                0
            } else {
                frac_part
                    .parse()
                    .map_err(|_| ts.error_here("number too large"))?
            };
            let value = Ratio::new(int * scale + frac, scale);
            if value > Ratio::from_integer(1) {
                return Err(ts.error_here("support thresholds lie in [0, 1]"));
            }
            ts.bump();
            Ok(value)
        }
        other => Err(ts.error_here(format!("expected a decimal, found {}", other.describe()))),
    }
}
