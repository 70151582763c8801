//! Text format for quivers, ideals, automorphisms and cover projections.
//!
//! ```text
//! quiver exple1 { vertices: 1 2 3 4; arrow a: 1 -> 3; arrow b: 1 -> 2; arrow c: 2 -> 3; arrow d: 3 -> 4; }
//! ideal J over exple1(0) { rel d*a - d*c*b; }
//! automorphism phi over exple1(0) { a -> 2*a + c*b; }
//! projection cov -> exple1 { [w0] -> 1; a[w0] -> a; }
//! action cov { g0: [w0] -> [w1], [w1] -> [w0]; }
//! ```
//! Comments run from `#` or `//` to the end of the line.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::ideal::{Ideal, IdealError, Relation};
use crate::quiver::{Path, Quiver, QuiverError};
use crate::scalar::{Field, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: {source}")]
    Quiver { line: usize, column: usize, source: QuiverError },
    #[error("{line}:{column}: {source}")]
    Scalar { line: usize, column: usize, source: ScalarError },
    #[error("{line}:{column}: {source}")]
    Ideal { line: usize, column: usize, source: IdealError },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Number(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '[' | ']' | '.' | '\'' | '@')
}

fn lex(text: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let here = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Sym("->"), line: here.0, column: here.1 });
            advance(2, &mut i, &mut col);
            continue;
        }
        let sym = match c {
            '{' => Some("{"),
            '}' => Some("}"),
            ';' => Some(";"),
            ':' => Some(":"),
            '*' => Some("*"),
            '+' => Some("+"),
            '-' => Some("-"),
            '(' => Some("("),
            ')' => Some(")"),
            ',' => Some(","),
            _ => None,
        };
        if let Some(s) = sym {
            out.push(Token { tok: Tok::Sym(s), line: here.0, column: here.1 });
            advance(1, &mut i, &mut col);
            continue;
        }
        if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            // fractions: digits '/' digits
            if i < chars.len() && chars[i] == '/' && chars[start..i].iter().all(char::is_ascii_digit) {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > i + 1 {
                    i = j;
                }
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let is_number = {
                let (n, d) = word.split_once('/').unwrap_or((&word, "1"));
                !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()) && !d.is_empty() && d.chars().all(|c| c.is_ascii_digit())
            };
            let tok = if is_number { Tok::Number(word) } else { Tok::Word(word) };
            out.push(Token { tok, line: here.0, column: here.1 });
            continue;
        }
        return Err(DslError::Syntax { line: here.0, column: here.1, message: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

/// One signed term `[scalar *] a_n * ... * a_1` of a relation, arrows as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermExpr {
    pub negative: bool,
    pub scalar: Option<String>,
    pub arrows: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationExpr {
    pub terms: Vec<TermExpr>,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub struct IdealDecl {
    pub name: String,
    pub quiver: String,
    pub characteristic: u64,
    pub relations: Vec<RelationExpr>,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub struct AutomorphismDecl {
    pub name: String,
    pub quiver: String,
    pub characteristic: u64,
    pub images: Vec<(String, RelationExpr)>,
}

#[derive(Clone, Debug)]
pub struct ProjectionDecl {
    pub total: String,
    pub base: String,
    pub entries: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct ActionDecl {
    pub total: String,
    pub generators: Vec<(String, Vec<(String, String)>)>,
}

#[derive(Clone, Debug, Default)]
pub struct Document {
    pub quivers: Vec<Arc<Quiver>>,
    pub ideals: Vec<IdealDecl>,
    pub automorphisms: Vec<AutomorphismDecl>,
    pub projections: Vec<ProjectionDecl>,
    pub actions: Vec<ActionDecl>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.column))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        let (line, column) = self.here();
        Err(DslError::Syntax { line, column, message: message.into() })
    }

    fn sym(&mut self, s: &'static str) -> Result<(), DslError> {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn eat(&mut self, s: &'static str) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, k: &str) -> Result<(), DslError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == k => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{k}`")),
        }
    }

    /// An identifier; numbers are accepted where names may be numeric (vertices).
    fn name(&mut self, allow_number: bool) -> Result<String, DslError> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w)
            }
            Some(Tok::Number(n)) if allow_number && !n.contains('/') => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a name"),
        }
    }

    fn number(&mut self) -> Result<u64, DslError> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) if !n.contains('/') => {
                self.pos += 1;
                n.parse().or_else(|_| self.err("number out of range"))
            }
            _ => self.err("expected a characteristic"),
        }
    }

    fn relation(&mut self) -> Result<RelationExpr, DslError> {
        let (line, column) = self.here();
        let mut terms = Vec::new();
        let mut negative = self.eat("-");
        loop {
            let scalar = match self.peek().cloned() {
                Some(Tok::Number(n)) => {
                    self.pos += 1;
                    self.sym("*")?;
                    Some(n)
                }
                _ => None,
            };
            let mut arrows = vec![self.name(false)?];
            while self.eat("*") {
                arrows.push(self.name(false)?);
            }
            terms.push(TermExpr { negative, scalar, arrows });
            if self.eat("+") {
                negative = false;
            } else if self.eat("-") {
                negative = true;
            } else {
                break;
            }
        }
        Ok(RelationExpr { terms, line, column })
    }

    fn quiver(&mut self) -> Result<Quiver, DslError> {
        let (line, column) = self.here();
        let name = self.name(false)?;
        self.sym("{")?;
        let mut vertices = Vec::new();
        let mut arrows = Vec::new();
        while !self.eat("}") {
            match self.peek() {
                Some(Tok::Word(w)) if w == "vertices" => {
                    self.pos += 1;
                    self.sym(":")?;
                    while !self.eat(";") {
                        vertices.push(self.name(true)?);
                    }
                }
                Some(Tok::Word(w)) if w == "arrow" => {
                    self.pos += 1;
                    let a = self.name(false)?;
                    self.sym(":")?;
                    let s = self.name(true)?;
                    self.sym("->")?;
                    let t = self.name(true)?;
                    self.sym(";")?;
                    arrows.push((a, s, t));
                }
                _ => return self.err("expected `vertices`, `arrow` or `}`"),
            }
        }
        Quiver::new(&name, &vertices, &arrows).map_err(|source| DslError::Quiver { line, column, source })
    }

    fn over(&mut self) -> Result<(String, u64), DslError> {
        self.keyword("over")?;
        let q = self.name(false)?;
        self.sym("(")?;
        let c = self.number()?;
        self.sym(")")?;
        Ok((q, c))
    }

    fn document(&mut self) -> Result<Document, DslError> {
        let mut doc = Document::default();
        while let Some(tok) = self.peek().cloned() {
            let (line, column) = self.here();
            let Tok::Word(kw) = tok else { return self.err("expected a block keyword") };
            self.pos += 1;
            match kw.as_str() {
                "quiver" => {
                    let q = self.quiver()?;
                    if doc.quivers.iter().any(|o| o.name() == q.name()) {
                        return Err(DslError::Duplicate { kind: "quiver", name: q.name().to_string() });
                    }
                    doc.quivers.push(Arc::new(q));
                }
                "ideal" => {
                    let name = self.name(false)?;
                    let (quiver, characteristic) = self.over()?;
                    self.sym("{")?;
                    let mut relations = Vec::new();
                    while !self.eat("}") {
                        self.keyword("rel")?;
                        relations.push(self.relation()?);
                        self.sym(";")?;
                    }
                    doc.ideals.push(IdealDecl { name, quiver, characteristic, relations, line, column });
                }
                "automorphism" => {
                    let name = self.name(false)?;
                    let (quiver, characteristic) = self.over()?;
                    self.sym("{")?;
                    let mut images = Vec::new();
                    while !self.eat("}") {
                        let a = self.name(false)?;
                        self.sym("->")?;
                        images.push((a, self.relation()?));
                        self.sym(";")?;
                    }
                    doc.automorphisms.push(AutomorphismDecl { name, quiver, characteristic, images });
                }
                "projection" => {
                    let total = self.name(false)?;
                    self.sym("->")?;
                    let base = self.name(false)?;
                    self.sym("{")?;
                    let mut entries = Vec::new();
                    while !self.eat("}") {
                        let from = self.name(true)?;
                        self.sym("->")?;
                        let to = self.name(true)?;
                        self.sym(";")?;
                        entries.push((from, to));
                    }
                    doc.projections.push(ProjectionDecl { total, base, entries });
                }
                "action" => {
                    let total = self.name(false)?;
                    self.sym("{")?;
                    let mut generators = Vec::new();
                    while !self.eat("}") {
                        let g = self.name(true)?;
                        self.sym(":")?;
                        let mut map = Vec::new();
                        loop {
                            let from = self.name(true)?;
                            self.sym("->")?;
                            map.push((from, self.name(true)?));
                            if !self.eat(",") {
                                break;
                            }
                        }
                        self.sym(";")?;
                        generators.push((g, map));
                    }
                    doc.actions.push(ActionDecl { total, generators });
                }
                other => {
                    return Err(DslError::Syntax { line, column, message: format!("unknown block `{other}`") })
                }
            }
        }
        Ok(doc)
    }
}

pub fn parse_document(text: &str) -> Result<Document, DslError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let mut p = Parser { toks, pos: 0, end: (lines, 1) };
    p.document()
}

/// Parses a single quiver block.
pub fn parse_quiver(text: &str) -> Result<Quiver, DslError> {
    let doc = parse_document(text)?;
    match doc.quivers.into_iter().next() {
        Some(q) => Ok(Arc::try_unwrap(q).unwrap_or_else(|q| (*q).clone())),
        None => Err(DslError::Unknown { kind: "quiver", name: String::new() }),
    }
}

/// Turns a relation expression into a relation over `q`; terms must be parallel.
pub fn build_relation(q: &Quiver, field: Field, expr: &RelationExpr) -> Result<Relation, DslError> {
    let at = |source| DslError::Quiver { line: expr.line, column: expr.column, source };
    let mut parsed: Vec<(Path, crate::scalar::Scalar)> = Vec::new();
    for t in &expr.terms {
        let mut ids = Vec::new();
        for name in t.arrows.iter().rev() {
            ids.push(q.arrow_id(name).map_err(at)?);
        }
        let path = Path::from_arrows(q, ids).ok_or_else(|| at(QuiverError::NotComposable(t.arrows.join("*"))))?;
        let mut c = match &t.scalar {
            Some(s) => field
                .parse(s)
                .map_err(|source| DslError::Scalar { line: expr.line, column: expr.column, source })?,
            None => field.one(),
        };
        if t.negative {
            c = -c;
        }
        parsed.push((path, c));
    }
    let (s, tgt) = (parsed[0].0.source, parsed[0].0.target);
    Relation::from_terms(s, tgt, parsed).ok_or_else(|| DslError::Ideal {
        line: expr.line,
        column: expr.column,
        source: IdealError::NotParallel(format!("{:?}", expr.terms.iter().map(|t| t.arrows.join("*")).collect::<Vec<_>>())),
    })
}

impl Document {
    pub fn quiver(&self, name: &str) -> Result<Arc<Quiver>, DslError> {
        self.quivers
            .iter()
            .find(|q| q.name() == name)
            .cloned()
            .ok_or_else(|| DslError::Unknown { kind: "quiver", name: name.to_string() })
    }

    pub fn ideal_names(&self) -> Vec<String> {
        self.ideals.iter().map(|d| d.name.clone()).collect()
    }

    /// Resolves an ideal; `characteristic` overrides the declared one when given.
    pub fn ideal(&self, name: &str, characteristic: Option<u64>) -> Result<Ideal, DslError> {
        let decl = self
            .ideals
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| DslError::Unknown { kind: "ideal", name: name.to_string() })?;
        let q = self.quiver(&decl.quiver)?;
        let c = characteristic.unwrap_or(decl.characteristic);
        let field = Field::from_characteristic(c)
            .map_err(|source| DslError::Scalar { line: decl.line, column: decl.column, source })?;
        let mut gens = Vec::new();
        for r in &decl.relations {
            gens.push(build_relation(&q, field, r)?);
        }
        Ideal::new(q, field, gens).map_err(|source| DslError::Ideal { line: decl.line, column: decl.column, source })
    }

    /// Arrow images of a declared automorphism, keyed by arrow id.
    pub fn automorphism_images(
        &self,
        name: &str,
        characteristic: Option<u64>,
    ) -> Result<(Arc<Quiver>, Field, HashMap<usize, Relation>), DslError> {
        let decl = self
            .automorphisms
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| DslError::Unknown { kind: "automorphism", name: name.to_string() })?;
        let q = self.quiver(&decl.quiver)?;
        let field = Field::from_characteristic(characteristic.unwrap_or(decl.characteristic))
            .map_err(|source| DslError::Scalar { line: 0, column: 0, source })?;
        let mut images = HashMap::new();
        for (a, expr) in &decl.images {
            let id = q.arrow_id(a).map_err(|source| DslError::Quiver { line: expr.line, column: expr.column, source })?;
            images.insert(id, build_relation(&q, field, expr)?);
        }
        Ok((q, field, images))
    }
}

/// Renders a quiver block.
pub fn quiver_to_dsl(q: &Quiver) -> String {
    let mut s = format!("quiver {} {{\n  vertices: {};\n", q.name(), q.vertex_names().join(" "));
    for a in q.arrows() {
        s += &format!("  arrow {}: {} -> {};\n", a.name, q.vertex_name(a.source), q.vertex_name(a.target));
    }
    s += "}\n";
    s
}

/// Renders an ideal block listing its minimal relations.
pub fn ideal_to_dsl(name: &str, ideal: &Ideal) -> String {
    let q = ideal.quiver();
    let mut s = format!("ideal {} over {}({}) {{\n", name, q.name(), ideal.field().characteristic());
    for r in ideal.minimal_relations() {
        s += &format!("  rel {};\n", r.display(q));
    }
    s += "}\n";
    s
}
