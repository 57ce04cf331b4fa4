use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A Datalog term: a variable or an individual constant.
///
/// Variables start with an uppercase letter. Constants are stored in their
/// unquoted canonical form; the surface syntax additionally allows single
/// quotes around a constant (`'IR'`), which the parser strips.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

/// True when `name` can be printed as a bare constant without being re-read
/// as a variable: it must not start with an uppercase letter.
fn const_prints_bare(name: &str) -> bool {
    let mut chars = name.chars();
    let first = match chars.next() {
        Some(c) => c,
        None => return false,
    };
    (first.is_ascii_lowercase() || first.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) => write!(f, "{n}"),
            Term::Const(n) => {
                if const_prints_bare(n) {
                    write!(f, "{n}")
                } else {
                    write!(f, "'{n}'")
                }
            }
        }
    }
}

/// A finite mapping from variable names to terms.
///
/// Application is single-pass: bindings are not chased through each other, so
/// applying a substitution twice can differ from applying it once only if the
/// range mentions variables in its own domain (which the builders here avoid).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, Term)>>(pairs: I) -> Self {
        Substitution {
            bindings: pairs.into_iter().collect(),
        }
    }

    pub fn bind(&mut self, var: &str, term: Term) {
        self.bindings.insert(var.to_string(), term);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn unbind(&mut self, var: &str) -> Option<Term> {
        self.bindings.remove(var)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}/{t}")?;
        }
        write!(f, "}}")
    }
}

/// Object-identity check: `s` maps no two distinct terms of `terms` to the
/// same image. Constants are their own image, so binding a variable to a
/// constant that already occurs in `terms` also violates object identity.
pub fn is_oi_substitution(s: &Substitution, terms: &BTreeSet<Term>) -> bool {
    let mut images = BTreeSet::new();
    for t in terms {
        if !images.insert(s.apply_term(t)) {
            return false;
        }
    }
    true
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

    #[test]
    fn display_quotes_uppercase_constants_only() {
        assert_eq!(v("CountryID").to_string(), "CountryID");
        assert_eq!(c("IR").to_string(), "'IR'");
        assert_eq!(c("anna").to_string(), "anna");
        assert_eq!(c("58").to_string(), "58");
    }

    #[test]
    fn injective_grounding_is_oi() {
        let s = Substitution::from_pairs([
            ("X".to_string(), c("IR")),
            ("Y".to_string(), c("Persian")),
        ]);
        let terms: BTreeSet<Term> = [v("X"), v("Y")].into_iter().collect();
        assert!(is_oi_substitution(&s, &terms));
    }

    #[test]
    fn identifying_two_variables_is_not_oi() {
        let s = Substitution::from_pairs([
            ("X".to_string(), c("a")),
            ("Y".to_string(), c("a")),
        ]);
        let terms: BTreeSet<Term> = [v("X"), v("Y")].into_iter().collect();
        assert!(!is_oi_substitution(&s, &terms));
    }

    #[test]
    fn binding_onto_an_existing_constant_is_not_oi() {
        // X would become indistinguishable from the constant 'IR'.
        let s = Substitution::from_pairs([("X".to_string(), c("IR"))]);
        let terms: BTreeSet<Term> = [v("X"), c("IR")].into_iter().collect();
        assert!(!is_oi_substitution(&s, &terms));
    }

    #[test]
    fn unbound_variables_map_to_themselves() {
        let s = Substitution::new();
        assert_eq!(s.apply_term(&v("Z")), v("Z"));
        assert_eq!(s.apply_term(&c("IR")), c("IR"));
    }
}
