//! Parsers for the three on-disk formats: ontologies, constrained programs,
//! and bias files. Parsing is all-or-nothing; the first error aborts with a
//! position.

mod bias;
mod ontology;
mod program;

pub use bias::parse_bias;
pub use ontology::parse_ontology;
pub use program::parse_program;

use thiserror::Error;

use crate::syntax::Concept;

/// A parse or well-formedness error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Quoted(String),
    Number(String),
    Sym(&'static str),
    Newline,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Quoted(s) => format!("'{s}'"),
            Tok::Number(s) => format!("'{s}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Newline => "end of line".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 15] = [
    ":-", "?-", "==", "<=", "(", ")", ",", ".", ":", "&", "[", "]", "=", ";", "/",
];

/// Tokenizes `src`. `comment` starts a to-end-of-line comment; when
/// `keep_newlines` is set, line breaks become tokens (for line-oriented
/// formats).
pub(crate) fn lex(
    src: &str,
    comment: char,
    keep_newlines: bool,
) -> Result<Vec<Spanned>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            out.push(Spanned {
                tok: $tok,
                line: $line,
                col: $col,
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            if keep_newlines {
                push!(Tok::Newline, line, col);
            }
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == comment {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '\'' {
            let (sl, sc) = (line, col);
            i += 1;
            col += 1;
            let start = i;
            while i < chars.len() && chars[i] != '\'' && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            if i >= chars.len() || chars[i] != '\'' {
                return Err(Diagnostic::new(sl, sc, "unterminated quoted constant"));
            }
            let text: String = chars[start..i].iter().collect();
            if text.is_empty() {
                return Err(Diagnostic::new(sl, sc, "empty quoted constant"));
            }
            i += 1;
            col += 1;
            push!(Tok::Quoted(text), sl, sc);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let (sl, sc) = (line, col);
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            push!(Tok::Ident(chars[start..i].iter().collect()), sl, sc);
            continue;
        }
        if c.is_ascii_digit() {
            let (sl, sc) = (line, col);
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            // A dot joins the number only when digits follow, so clause
            // terminators after integers stay separate tokens.
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                col += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
            }
            push!(Tok::Number(chars[start..i].iter().collect()), sl, sc);
            continue;
        }
        let mut matched = false;
        for sym in SYMBOLS {
            let sym_chars: Vec<char> = sym.chars().collect();
            if chars[i..].starts_with(&sym_chars) {
                push!(Tok::Sym(sym), line, col);
                i += sym_chars.len();
                col += sym_chars.len();
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(Diagnostic::new(line, col, format!("unexpected character '{c}'")));
        }
    }
    push!(Tok::Eof, line, col);
    Ok(out)
}

pub(crate) struct TokenStream {
    toks: Vec<Spanned>,
    i: usize,
}

impl TokenStream {
    pub fn new(toks: Vec<Spanned>) -> Self {
        TokenStream { toks, i: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let j = (self.i + offset).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    pub fn pos(&self) -> (usize, usize) {
        (self.toks[self.i].line, self.toks[self.i].col)
    }

    pub fn bump(&mut self) -> Spanned {
        let s = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        s
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &'static str) -> Result<(), Diagnostic> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected '{s}', found {}", self.peek().describe())))
        }
    }

    pub fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    pub fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn error_here(&self, message: impl Into<String>) -> Diagnostic {
        let (line, col) = self.pos();
        Diagnostic::new(line, col, message)
    }

    /// An identifier starting with an uppercase letter, as required for
    /// concept and role names.
    pub fn expect_cap_name(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.peek() {
            Tok::Ident(w) if w.chars().next().is_some_and(|c| c.is_ascii_uppercase()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            other => Err(self.error_here(format!(
                "expected {what} (capitalized name), found {}",
                other.describe()
            ))),
        }
    }
}

/// Parses a concept expression. Precedence from loose to tight: `or`, `and`,
/// prefix `not`; restrictions and parentheses are self-delimiting.
pub(crate) fn parse_concept_expr(ts: &mut TokenStream) -> Result<Concept, Diagnostic> {
    let mut c = parse_and(ts)?;
    while ts.eat_ident("or") {
        c = Concept::or(c, parse_and(ts)?);
    }
    Ok(c)
}

fn parse_and(ts: &mut TokenStream) -> Result<Concept, Diagnostic> {
    let mut c = parse_unary(ts)?;
    while ts.eat_ident("and") {
        c = Concept::and(c, parse_unary(ts)?);
    }
    Ok(c)
}

fn parse_unary(ts: &mut TokenStream) -> Result<Concept, Diagnostic> {
    if ts.eat_ident("not") {
        return Ok(Concept::not(parse_unary(ts)?));
    }
    if ts.eat_ident("top") {
        return Ok(Concept::Top);
    }
    if ts.eat_ident("bot") {
        return Ok(Concept::Bottom);
    }
    if ts.at_ident("all") || ts.at_ident("some") {
        let existential = ts.at_ident("some");
        ts.bump();
        ts.expect_sym("(")?;
        let role = ts.expect_cap_name("a role name")?;
        ts.expect_sym(",")?;
        let filler = parse_concept_expr(ts)?;
        ts.expect_sym(")")?;
        return Ok(if existential {
            Concept::some(&role, filler)
        } else {
            Concept::all(&role, filler)
        });
    }
    if ts.eat_sym("(") {
        let c = parse_concept_expr(ts)?;
        ts.expect_sym(")")?;
        return Ok(c);
    }
    let name = ts.expect_cap_name("a concept")?;
    Ok(Concept::atomic(&name))
}
