use std::fmt;

/// An ALC concept expression.
///
/// Roles occur only inside the two restriction forms, so they are kept as
/// plain names here rather than a separate type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bottom,
    Atomic(String),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    /// Value restriction: all(R, C).
    All(String, Box<Concept>),
    /// Existential restriction: some(R, C).
    Some(String, Box<Concept>),
}

impl Concept {
    pub fn atomic(name: &str) -> Concept {
        Concept::Atomic(name.to_string())
    }

    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Concept {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Concept {
        Concept::Or(Box::new(a), Box::new(b))
    }

    pub fn all(role: &str, c: Concept) -> Concept {
        Concept::All(role.to_string(), Box::new(c))
    }

    pub fn some(role: &str, c: Concept) -> Concept {
        Concept::Some(role.to_string(), Box::new(c))
    }

    /// Folds a non-empty list of conjuncts into a right-nested conjunction.
    pub fn conjoin(mut parts: Vec<Concept>) -> Option<Concept> {
        let last = parts.pop()?;
        Some(parts.into_iter().rev().fold(last, |acc, c| Concept::and(c, acc)))
    }

    /// Negation normal form: negation occurs only directly on atomic
    /// concepts. Top and Bottom are dual, as are the two restrictions.
    pub fn nnf(&self) -> Concept {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => self.clone(),
            Concept::And(a, b) => Concept::and(a.nnf(), b.nnf()),
            Concept::Or(a, b) => Concept::or(a.nnf(), b.nnf()),
            Concept::All(r, c) => Concept::all(r, c.nnf()),
            Concept::Some(r, c) => Concept::some(r, c.nnf()),
            Concept::Not(inner) => match inner.as_ref() {
                Concept::Top => Concept::Bottom,
                Concept::Bottom => Concept::Top,
                Concept::Atomic(_) => self.clone(),
                Concept::Not(c) => c.nnf(),
                Concept::And(a, b) => {
                    Concept::or(Concept::not((**a).clone()).nnf(), Concept::not((**b).clone()).nnf())
                }
                Concept::Or(a, b) => {
                    Concept::and(Concept::not((**a).clone()).nnf(), Concept::not((**b).clone()).nnf())
                }
                Concept::All(r, c) => Concept::some(r, Concept::not((**c).clone()).nnf()),
                Concept::Some(r, c) => Concept::all(r, Concept::not((**c).clone()).nnf()),
            },
        }
    }

    /// Negation in negation normal form, used by the refutation entry points.
    pub fn negated_nnf(&self) -> Concept {
        Concept::not(self.clone()).nnf()
    }

    /// All atomic concept names occurring in the expression.
    pub fn atomic_names(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Concept::Top | Concept::Bottom => {}
            Concept::Atomic(n) => {
                out.insert(n.clone());
            }
            Concept::Not(c) => c.atomic_names(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.atomic_names(out);
                b.atomic_names(out);
            }
            Concept::All(_, c) | Concept::Some(_, c) => c.atomic_names(out),
        }
    }

    /// All role names occurring in the expression.
    pub fn role_names(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => {}
            Concept::Not(c) => c.role_names(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.role_names(out);
                b.role_names(out);
            }
            Concept::All(r, c) | Concept::Some(r, c) => {
                out.insert(r.clone());
                c.role_names(out);
            }
        }
    }

    /// Conjuncts of a (possibly nested) conjunction, left to right.
    pub fn conjuncts(&self) -> Vec<&Concept> {
        match self {
            Concept::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Concept::Or(_, _) => 0,
            Concept::And(_, _) => 1,
            _ => 2,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let needs_parens = prec < min;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Concept::Top => write!(f, "top")?,
            Concept::Bottom => write!(f, "bot")?,
            Concept::Atomic(n) => write!(f, "{n}")?,
            Concept::Not(c) => {
                write!(f, "not ")?;
                c.fmt_prec(f, 2)?;
            }
            Concept::And(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " and ")?;
                b.fmt_prec(f, 1)?;
            }
            Concept::Or(a, b) => {
                a.fmt_prec(f, 0)?;
                write!(f, " or ")?;
                b.fmt_prec(f, 0)?;
            }
            Concept::All(r, c) => {
                write!(f, "all({r}, ")?;
                c.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Concept::Some(r, c) => {
                write!(f, "some({r}, ")?;
                c.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Concept {
        Concept::atomic(n)
    }

    #[test]
    fn nnf_pushes_negation_through_conjunction() {
        let c = Concept::not(Concept::and(a("A"), a("B")));
        assert_eq!(c.nnf(), Concept::or(Concept::not(a("A")), Concept::not(a("B"))));
    }

    #[test]
    fn nnf_dualizes_restrictions() {
        let c = Concept::not(Concept::some("R", a("C")));
        assert_eq!(c.nnf(), Concept::all("R", Concept::not(a("C"))));
        let c = Concept::not(Concept::all("R", a("C")));
        assert_eq!(c.nnf(), Concept::some("R", Concept::not(a("C"))));
    }

    #[test]
    fn nnf_cancels_double_negation() {
        let c = Concept::not(Concept::not(Concept::and(a("A"), a("B"))));
        assert_eq!(c.nnf(), Concept::and(a("A"), a("B")));
    }

    #[test]
    fn nnf_dualizes_top_and_bottom() {
        assert_eq!(Concept::not(Concept::Top).nnf(), Concept::Bottom);
        assert_eq!(Concept::not(Concept::Bottom).nnf(), Concept::Top);
    }

    #[test]
    fn nnf_is_idempotent() {
        let c = Concept::not(Concept::and(
            Concept::some("R", Concept::not(a("A"))),
            Concept::or(a("B"), Concept::not(Concept::Top)),
        ));
        let once = c.nnf();
        assert_eq!(once.nnf(), once);
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let c = Concept::or(Concept::and(a("A"), a("B")), a("C"));
        assert_eq!(c.to_string(), "A and B or C");
        let c = Concept::and(Concept::or(a("A"), a("B")), a("C"));
        assert_eq!(c.to_string(), "(A or B) and C");
        let c = Concept::not(Concept::and(a("A"), a("B")));
        assert_eq!(c.to_string(), "not (A and B)");
        let c = Concept::all("R", Concept::or(a("A"), a("B")));
        assert_eq!(c.to_string(), "all(R, A or B)");
    }

    #[test]
    fn conjoin_nests_to_the_right() {
        let c = Concept::conjoin(vec![a("A"), a("B"), a("C")]).unwrap();
        assert_eq!(c, Concept::and(a("A"), Concept::and(a("B"), a("C"))));
        assert_eq!(c.conjuncts().len(), 3);
    }
}
