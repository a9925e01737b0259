//! Problem files: a line-oriented format with s-expression bodies.
//!
//! ```text
//! # comments run to end of line
//! name rem8
//! dim 1
//! expr (exp1d 0 -1)
//! slater [-1]
//! point [0]
//! box -50..2
//! tau 0.5
//! ```
//!
//! Expressions: `(const c)`, `(affine [a..] b)`, `(norm)`, `(abs i)`,
//! `(exp1d i s)`, `(pospartsq i)`, `(max e..)`, `(sum w e w e ..)`,
//! `(compose [[row]..] [c..] e)`; the inner expression of `compose` lives in
//! dimension = number of rows.
//!
//! Families: `family finite [e, e, ..]`, where an item may carry a label
//! (`a: e`) and may drop its outer parentheses (`abs 0`), or
//! `family interval lo hi grid (template (atom C e).. (linear C..) (const C))`
//! with coefficients `C` either a number or `(coef (amp pow k) (amp cos w) (amp sin w) ..)`.

use std::fmt::{self, Write as _};

use errbound::expr::Node;
use errbound::family::{Basis, Coefficient, IndexSet, ParamTemplate};
use errbound::{BoxDomain, ConvexExpr, Error as CoreError, IndexedFamily};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Convexity,
    Dimension,
    InfeasibleSlater,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Function {
    Expr(ConvexExpr),
    Family(IndexedFamily),
}

impl Function {
    /// The function itself, or the sup function of a family.
    pub fn sup_expr(&self) -> errbound::Result<ConvexExpr> {
        match self {
            Function::Expr(e) => Ok(e.clone()),
            Function::Family(f) => f.materialize(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Function::Expr(e) => e.dim(),
            Function::Family(f) => f.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub name: String,
    pub dim: usize,
    pub function: Function,
    pub slater: Option<Vec<f64>>,
    pub point: Option<Vec<f64>>,
    pub domain: Option<BoxDomain>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Word(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = col0 + i;
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line, column });
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || "+-._".contains(c) {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || "+-._".contains(chars[i])) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                line,
                column,
            });
        } else {
            return Err(syntax(line, column, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax,
        message: message.into(),
    }
}

fn from_core(line: usize, column: usize, e: CoreError) -> ParseError {
    let kind = match &e {
        CoreError::DimensionMismatch { .. } => ParseErrorKind::Dimension,
        CoreError::InvalidExpr(msg) if msg.contains("negative") => ParseErrorKind::Convexity,
        _ => ParseErrorKind::Syntax,
    };
    ParseError {
        line,
        column,
        kind,
        message: e.to_string(),
    }
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    /// Position just past the last token, for end-of-line errors.
    end: (usize, usize),
}

impl Cursor {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syntax(self.end.0, self.end.1, "unexpected end of line"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next()?;
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(t.line, t.column, format!("expected {what}")))
        }
    }

    fn at(&self, want: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == want)
    }

    fn word(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) => Ok((w.clone(), t)),
            _ => Err(syntax(t.line, t.column, format!("expected {what}"))),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let (w, t) = self.word("a number")?;
        let v: f64 = w
            .parse()
            .map_err(|_| syntax(t.line, t.column, format!("'{w}' is not a number")))?;
        if !v.is_finite() {
            return Err(syntax(t.line, t.column, "numbers must be finite"));
        }
        Ok(v)
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        let (w, t) = self.word("an index")?;
        w.parse()
            .map_err(|_| syntax(t.line, t.column, format!("'{w}' is not a nonnegative integer")))
    }

    fn vector(&mut self) -> Result<Vec<f64>, ParseError> {
        self.expect(Tok::LBracket, "'['")?;
        let mut v = Vec::new();
        if self.at(&Tok::RBracket) {
            self.next()?;
            return Ok(v);
        }
        loop {
            v.push(self.number()?);
            let t = self.next()?;
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(v),
                _ => return Err(syntax(t.line, t.column, "expected ',' or ']'")),
            }
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<f64>>, ParseError> {
        self.expect(Tok::LBracket, "'['")?;
        let mut rows = Vec::new();
        loop {
            rows.push(self.vector()?);
            let t = self.next()?;
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(rows),
                _ => return Err(syntax(t.line, t.column, "expected ',' or ']'")),
            }
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(syntax(t.line, t.column, "unexpected trailing input")),
        }
    }
}

fn check_len(at: (usize, usize), what: &str, v: &[f64], dim: usize) -> Result<(), ParseError> {
    if v.len() == dim {
        Ok(())
    } else {
        Err(ParseError {
            line: at.0,
            column: at.1,
            kind: ParseErrorKind::Dimension,
            message: format!("{what} has {} entries, expected {dim}", v.len()),
        })
    }
}

/// `(head args..)`, or a bare `head args..` when `bare` is set.
fn parse_expr(c: &mut Cursor, dim: usize, bare: bool) -> Result<ConvexExpr, ParseError> {
    let paren = if bare && !c.at(&Tok::Open) {
        false
    } else {
        c.expect(Tok::Open, "'('")?;
        true
    };
    let (head, ht) = c.word("an expression keyword")?;
    let at = (ht.line, ht.column);
    let wrap = |r: errbound::Result<ConvexExpr>| r.map_err(|e| from_core(at.0, at.1, e));
    let ends = |c: &Cursor| match c.peek() {
        None => true,
        Some(t) => matches!(t.tok, Tok::Close | Tok::Comma | Tok::RBracket),
    };
    let e = match head.as_str() {
        "const" => wrap(ConvexExpr::constant(dim, c.number()?))?,
        "affine" => {
            let a = c.vector()?;
            check_len(at, "affine coefficient vector", &a, dim)?;
            wrap(ConvexExpr::affine(a, c.number()?))?
        }
        "norm" => wrap(ConvexExpr::norm(dim))?,
        "abs" => wrap(ConvexExpr::abs(dim, c.index()?))?,
        "exp1d" => {
            let i = c.index()?;
            wrap(ConvexExpr::exp1d(dim, i, c.number()?))?
        }
        "pospartsq" => wrap(ConvexExpr::pos_part_square(dim, c.index()?))?,
        "max" => {
            let mut children = Vec::new();
            while !ends(c) {
                children.push(parse_expr(c, dim, false)?);
            }
            wrap(ConvexExpr::max(children))?
        }
        "sum" => {
            let mut terms = Vec::new();
            while !ends(c) {
                let w = c.number()?;
                terms.push((w, parse_expr(c, dim, false)?));
            }
            wrap(ConvexExpr::sum(terms))?
        }
        "compose" => {
            let matrix = c.matrix()?;
            for row in &matrix {
                check_len(at, "matrix row", row, dim)?;
            }
            let offset = c.vector()?;
            check_len(at, "offset", &offset, matrix.len())?;
            let inner = parse_expr(c, matrix.len(), false)?;
            wrap(ConvexExpr::compose_affine(inner, matrix, offset))?
        }
        other => return Err(syntax(at.0, at.1, format!("unknown expression '{other}'"))),
    };
    if paren {
        c.expect(Tok::Close, "')'")?;
    }
    Ok(e)
}

fn parse_coefficient(c: &mut Cursor) -> Result<Coefficient, ParseError> {
    if !c.at(&Tok::Open) {
        return Ok(Coefficient::constant(c.number()?));
    }
    c.next()?;
    let (head, t) = c.word("'coef'")?;
    if head != "coef" {
        return Err(syntax(t.line, t.column, "expected 'coef'"));
    }
    let mut terms = Vec::new();
    while c.at(&Tok::Open) {
        c.next()?;
        let amp = c.number()?;
        let (kind, kt) = c.word("pow, cos or sin")?;
        let basis = match kind.as_str() {
            "pow" => Basis::Pow(
                c.index()?
                    .try_into()
                    .map_err(|_| syntax(kt.line, kt.column, "power too large"))?,
            ),
            "cos" => Basis::Cos(c.number()?),
            "sin" => Basis::Sin(c.number()?),
            _ => return Err(syntax(kt.line, kt.column, "expected pow, cos or sin")),
        };
        c.expect(Tok::Close, "')'")?;
        terms.push((amp, basis));
    }
    c.expect(Tok::Close, "')'")?;
    Ok(Coefficient { terms })
}

fn parse_template(c: &mut Cursor, dim: usize) -> Result<ParamTemplate, ParseError> {
    c.expect(Tok::Open, "'('")?;
    let (head, t) = c.word("'template'")?;
    if head != "template" {
        return Err(syntax(t.line, t.column, "expected 'template'"));
    }
    let at = (t.line, t.column);
    let mut atoms = Vec::new();
    let mut linear = None;
    let mut constant = None;
    while c.at(&Tok::Open) {
        c.next()?;
        let (part, pt) = c.word("atom, linear or const")?;
        match part.as_str() {
            "atom" => {
                let w = parse_coefficient(c)?;
                atoms.push((w, parse_expr(c, dim, false)?));
            }
            "linear" => {
                let mut v = Vec::new();
                while !c.at(&Tok::Close) {
                    v.push(parse_coefficient(c)?);
                }
                linear = Some(v);
            }
            "const" => constant = Some(parse_coefficient(c)?),
            _ => return Err(syntax(pt.line, pt.column, "expected atom, linear or const")),
        }
        c.expect(Tok::Close, "')'")?;
    }
    c.expect(Tok::Close, "')'")?;
    let linear = linear.unwrap_or_else(|| vec![Coefficient::default(); dim]);
    ParamTemplate::new(dim, atoms, linear, constant.unwrap_or_default()).map_err(|e| from_core(at.0, at.1, e))
}

fn parse_family(c: &mut Cursor, dim: usize) -> Result<IndexedFamily, ParseError> {
    let (kind, t) = c.word("finite or interval")?;
    let at = (t.line, t.column);
    match kind.as_str() {
        "finite" => {
            c.expect(Tok::LBracket, "'['")?;
            let mut members = Vec::new();
            let mut labels = Vec::new();
            loop {
                let labelled = matches!(
                    (c.toks.get(c.pos).map(|t| &t.tok), c.toks.get(c.pos + 1).map(|t| &t.tok)),
                    (Some(Tok::Word(_)), Some(Tok::Colon))
                );
                if labelled {
                    labels.push(c.word("a label")?.0);
                    c.next()?;
                } else {
                    labels.push((members.len() + 1).to_string());
                }
                members.push(parse_expr(c, dim, true)?);
                let t = c.next()?;
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RBracket => break,
                    _ => return Err(syntax(t.line, t.column, "expected ',' or ']'")),
                }
            }
            IndexedFamily::finite_labelled(members, labels).map_err(|e| from_core(at.0, at.1, e))
        }
        "interval" => {
            let lo = c.number()?;
            let hi = c.number()?;
            let grid = c.index()?;
            let template = parse_template(c, dim)?;
            IndexedFamily::interval(lo, hi, grid, template).map_err(|e| from_core(at.0, at.1, e))
        }
        other => Err(syntax(at.0, at.1, format!("unknown family kind '{other}'"))),
    }
}

fn parse_box(c: &mut Cursor, dim: usize, at: (usize, usize)) -> Result<BoxDomain, ParseError> {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    while let Some(t) = c.peek().cloned() {
        let (w, _) = c.word("an interval lo..hi")?;
        let (a, b) = w
            .split_once("..")
            .ok_or_else(|| syntax(t.line, t.column, format!("'{w}' is not of the form lo..hi")))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| syntax(t.line, t.column, format!("bad bound '{s}'")))
        };
        lo.push(parse(a)?);
        hi.push(parse(b)?);
    }
    check_len(at, "box", &lo, dim)?;
    BoxDomain::new(lo, hi).map_err(|e| syntax(at.0, at.1, e.to_string()))
}

/// Parses a problem file; diagnostics carry 1-based line and column.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let mut name = None;
    let mut dim: Option<usize> = None;
    let mut function = None;
    let (mut slater, mut point, mut domain, mut tau) = (None, None, None, None);
    let mut slater_at = (0, 0);
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokenize(body, line, 1)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            toks,
            pos: 0,
            end: (line, body.trim_end().chars().count() + 1),
        };
        let (key, kt) = c.word("a directive")?;
        let at = (kt.line, kt.column);
        let need_dim = |d: Option<usize>| d.ok_or_else(|| syntax(at.0, at.1, format!("'{key}' before 'dim'")));
        let dup = |set: bool| {
            if set {
                Err(syntax(at.0, at.1, format!("duplicate '{key}'")))
            } else {
                Ok(())
            }
        };
        match key.as_str() {
            "name" => {
                dup(name.is_some())?;
                name = Some(c.word("a name")?.0);
            }
            "dim" => {
                dup(dim.is_some())?;
                let d = c.index()?;
                if d == 0 {
                    return Err(syntax(at.0, at.1, "dimension must be positive"));
                }
                dim = Some(d);
            }
            "expr" => {
                dup(function.is_some())?;
                function = Some(Function::Expr(parse_expr(&mut c, need_dim(dim)?, false)?));
            }
            "family" => {
                dup(function.is_some())?;
                function = Some(Function::Family(parse_family(&mut c, need_dim(dim)?)?));
            }
            "slater" | "point" => {
                let d = need_dim(dim)?;
                let v = c.vector()?;
                check_len(at, &key, &v, d)?;
                if key == "slater" {
                    dup(slater.is_some())?;
                    slater = Some(v);
                    slater_at = at;
                } else {
                    dup(point.is_some())?;
                    point = Some(v);
                }
            }
            "box" => {
                dup(domain.is_some())?;
                domain = Some(parse_box(&mut c, need_dim(dim)?, at)?);
            }
            "tau" => {
                dup(tau.is_some())?;
                let t = c.number()?;
                if !(t > 0.0) {
                    return Err(syntax(at.0, at.1, "tau must be positive"));
                }
                tau = Some(t);
            }
            other => return Err(syntax(at.0, at.1, format!("unknown directive '{other}'"))),
        }
        c.finish()?;
    }
    let end = text.lines().count().max(1);
    let dim = dim.ok_or_else(|| syntax(end, 1, "missing 'dim'"))?;
    let function = function.ok_or_else(|| syntax(end, 1, "missing 'expr' or 'family'"))?;
    if let Some(s) = &slater {
        let v = match &function {
            Function::Expr(e) => e.eval(s),
            Function::Family(f) => f.sup_value(s),
        }
        .map_err(|e| from_core(slater_at.0, slater_at.1, e))?;
        if !(v < 0.0) {
            return Err(ParseError {
                line: slater_at.0,
                column: slater_at.1,
                kind: ParseErrorKind::InfeasibleSlater,
                message: format!("declared slater point has f = {v}, expected f < 0"),
            });
        }
    }
    Ok(ProblemFile {
        name: name.unwrap_or_else(|| "problem".into()),
        dim,
        function,
        slater,
        point,
        domain,
        tau,
    })
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn vec_text(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

/// Canonical text of an expression.
pub fn expr_text(e: &ConvexExpr) -> String {
    match e.node() {
        Node::Const(c) => format!("(const {})", num(*c)),
        Node::Affine { a, b } => format!("(affine {} {})", vec_text(a), num(*b)),
        Node::EuclidNorm => "(norm)".into(),
        Node::AbsCoord(i) => format!("(abs {i})"),
        Node::Exp1D { coord, shift } => format!("(exp1d {coord} {})", num(*shift)),
        Node::PosPartSquare(i) => format!("(pospartsq {i})"),
        Node::Max(children) => {
            let parts: Vec<String> = children.iter().map(expr_text).collect();
            format!("(max {})", parts.join(" "))
        }
        Node::Sum(terms) => {
            let parts: Vec<String> = terms.iter().map(|(w, t)| format!("{} {}", num(*w), expr_text(t))).collect();
            format!("(sum {})", parts.join(" "))
        }
        Node::ComposeAffine { inner, matrix, offset } => {
            let rows: Vec<String> = matrix.iter().map(|r| vec_text(r)).collect();
            format!("(compose [{}] {} {})", rows.join(", "), vec_text(offset), expr_text(inner))
        }
    }
}

fn coef_text(c: &Coefficient) -> String {
    if let [(amp, Basis::Pow(0))] = c.terms.as_slice() {
        return num(*amp);
    }
    let mut s = String::from("(coef");
    for (amp, b) in &c.terms {
        let _ = match b {
            Basis::Pow(k) => write!(s, " ({} pow {k})", num(*amp)),
            Basis::Cos(w) => write!(s, " ({} cos {})", num(*amp), num(*w)),
            Basis::Sin(w) => write!(s, " ({} sin {})", num(*amp), num(*w)),
        };
    }
    s.push(')');
    s
}

fn family_text(f: &IndexedFamily) -> String {
    match (f.index_set(), f.finite_members(), f.template()) {
        (IndexSet::Finite(labels), Some(members), _) => {
            let parts: Vec<String> = labels
                .iter()
                .zip(members)
                .enumerate()
                .map(|(k, (l, e))| {
                    if *l == (k + 1).to_string() {
                        expr_text(e)
                    } else {
                        format!("{l}: {}", expr_text(e))
                    }
                })
                .collect();
            format!("finite [{}]", parts.join(", "))
        }
        (IndexSet::Interval { lo, hi, grid_count }, _, Some(t)) => {
            let mut s = format!("interval {} {} {grid_count} (template", num(*lo), num(*hi));
            for (w, e) in t.atoms() {
                let _ = write!(s, " (atom {} {})", coef_text(w), expr_text(e));
            }
            let lin: Vec<String> = t.linear().iter().map(coef_text).collect();
            let _ = write!(s, " (linear {}) (const {}))", lin.join(" "), coef_text(t.constant()));
            s
        }
        _ => unreachable!("family members match their index set"),
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name {}", self.name)?;
        writeln!(f, "dim {}", self.dim)?;
        match &self.function {
            Function::Expr(e) => writeln!(f, "expr {}", expr_text(e))?,
            Function::Family(fam) => writeln!(f, "family {}", family_text(fam))?,
        }
        if let Some(s) = &self.slater {
            writeln!(f, "slater {}", vec_text(s))?;
        }
        if let Some(p) = &self.point {
            writeln!(f, "point {}", vec_text(p))?;
        }
        if let Some(b) = &self.domain {
            let parts: Vec<String> = b.lo.iter().zip(&b.hi).map(|(a, c)| format!("{}..{}", num(*a), num(*c))).collect();
            writeln!(f, "box {}", parts.join(" "))?;
        }
        if let Some(t) = self.tau {
            writeln!(f, "tau {}", num(t))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exponential() {
        let p = parse_problem("dim 1\nexpr (exp1d 0 -1)\n").unwrap();
        assert_eq!(p.function, Function::Expr(ConvexExpr::exp1d(1, 0, -1.0).unwrap()));
        assert_eq!(p.name, "problem");
    }

    #[test]
    fn parses_bare_family_items() {
        let p = parse_problem("dim 2\nfamily finite [abs 0, abs 1]\n").unwrap();
        let Function::Family(f) = &p.function else { panic!() };
        assert_eq!(f.finite_members().unwrap().len(), 2);
        assert_eq!(f.label(errbound::Index::Label(1)), "2");
    }

    #[test]
    fn negative_weight_is_a_convexity_error() {
        let e = parse_problem("dim 2\nexpr (sum 1 (affine [1,0] 0) -1 (abs 1))\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Convexity);
        assert_eq!((e.line, e.column), (2, 7));
    }

    #[test]
    fn reports_positions() {
        let e = parse_problem("dim 2\n\nexpr (max (abs 0) (abz 1))").unwrap_err();
        assert_eq!((e.line, e.column, e.kind), (3, 20, ParseErrorKind::Syntax));
        let e = parse_problem("dim 2\nexpr (affine [1] 0)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Dimension);
        let e = parse_problem("dim 1\nexpr (exp1d 0 -1)\nslater [1]").unwrap_err();
        assert_eq!((e.line, e.kind), (3, ParseErrorKind::InfeasibleSlater));
        let e = parse_problem("expr (norm)").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = parse_problem("dim 1\nexpr (abs 0").unwrap_err();
        assert_eq!((e.line, e.column), (2, 12));
    }

    #[test]
    fn round_trips() {
        let texts = [
            "name a\ndim 1\nexpr (exp1d 0 -1)\nslater [-1]\npoint [0]\nbox -50..2\ntau 0.5\n",
            "dim 2\nfamily finite [x: abs 0, (sum 0.5 (norm) 1e-3 (pospartsq 1))]\n",
            "dim 2\nexpr (compose [[1, 2], [0, 1], [3, 0.25]] [0, 1, -1] (max (norm) (const 2)))\n",
            "dim 2\nfamily interval 0 3.5 17 (template (atom (coef (1 pow 0) (0.5 cos 2)) (abs 0)) (linear (coef (1 sin 1)) 0) (const -1))\n",
        ];
        for t in texts {
            let p = parse_problem(t).unwrap();
            let again = parse_problem(&p.to_string()).unwrap();
            assert_eq!(p, again, "{t}");
        }
    }
}
