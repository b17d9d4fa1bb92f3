//! Operation signatures, variable sorts, terms and substitutions.
//!
//! Terms store operation and variable *indices*, so a term is only
//! meaningful together with the signature and sort it was built against.
//! Keeping indices instead of names makes evaluation inside point loops a
//! few array lookups per node.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// Equational class the algebra is declared to live in. The tag selects
/// which laws are verified when an algebra is constructed and which
/// specialized constructions (linear formulas, order formulas) apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Variety {
    Generic,
    Group,
    AbelianGroup,
    /// Abelian of prime exponent `p`: every element satisfies `x^p = e`.
    AbelianExponentP(u32),
}

impl core::fmt::Display for Variety {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Variety::Generic => write!(f, "generic"),
            Variety::Group => write!(f, "group"),
            Variety::AbelianGroup => write!(f, "abelian_group"),
            Variety::AbelianExponentP(p) => write!(f, "abelian_exponent_{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OpDecl {
    pub sym: String,
    pub arity: usize,
}

/// Infix symbols must come from this set; everything else collides with
/// grammar punctuation.
const INFIX_CHARS: &str = "*+/^~@%";

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An operation signature plus an optional variety tag.
///
/// At most one operation may be declared infix; it must be binary. All
/// other operations are written prefix. The variety tag describes algebras,
/// not the language: two signatures with equal operation lists are
/// compatible even if their tags differ.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Signature {
    pub name: String,
    pub ops: Vec<OpDecl>,
    /// Index into `ops` of the infix operation, if one is declared.
    pub infix: Option<usize>,
    pub variety: Variety,
}

/// Indices of the product, inverse and unit operations of a group-like
/// signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupOps {
    pub mul: usize,
    pub inv: usize,
    pub unit: usize,
}

impl Signature {
    pub fn new(
        name: &str,
        ops: &[(&str, usize)],
        infix: Option<&str>,
        variety: Variety,
    ) -> Result<Signature> {
        let mut decls = Vec::new();
        for (sym, arity) in ops {
            if decls.iter().any(|d: &OpDecl| d.sym == *sym) {
                return Err(Error::BadSignature { detail: format!("duplicate symbol `{sym}`") });
            }
            let is_infix_sym =
                sym.chars().count() == 1 && INFIX_CHARS.contains(sym.chars().next().unwrap());
            if !is_ident(sym) && !is_infix_sym {
                return Err(Error::BadSignature { detail: format!("bad symbol `{sym}`") });
            }
            decls.push(OpDecl { sym: sym.to_string(), arity: *arity });
        }
        let infix_idx = match infix {
            None => None,
            Some(sym) => {
                let idx = decls.iter().position(|d| d.sym == sym).ok_or_else(|| {
                    Error::BadSignature { detail: format!("infix `{sym}` is not a declared op") }
                })?;
                if decls[idx].arity != 2 {
                    return Err(Error::BadSignature {
                        detail: format!("infix `{sym}` must be binary"),
                    });
                }
                if !(sym.chars().count() == 1
                    && INFIX_CHARS.contains(sym.chars().next().unwrap()))
                {
                    return Err(Error::BadSignature {
                        detail: format!("infix symbol `{sym}` must be one of `{INFIX_CHARS}`"),
                    });
                }
                Some(idx)
            }
        };
        // Symbols that only make sense infix must actually be declared so.
        for (i, d) in decls.iter().enumerate() {
            if !is_ident(&d.sym) && infix_idx != Some(i) {
                return Err(Error::BadSignature {
                    detail: format!("punctuation symbol `{}` must be the infix op", d.sym),
                });
            }
        }
        let sig = Signature {
            name: name.to_string(),
            ops: decls,
            infix: infix_idx,
            variety,
        };
        if let Variety::Group | Variety::AbelianGroup | Variety::AbelianExponentP(_) =
            sig.variety
        {
            if sig.group_ops().is_none() {
                return Err(Error::BadSignature {
                    detail: "group-like variety needs exactly one op of arity 2, 1 and 0"
                        .to_string(),
                });
            }
        }
        Ok(sig)
    }

    /// The standard group language: infix `*`, unary `inv`, constant `e`.
    pub fn group(variety: Variety) -> Signature {
        Signature::new("group", &[("*", 2), ("inv", 1), ("e", 0)], Some("*"), variety)
            .expect("the group language is well formed")
    }

    pub fn op_index(&self, sym: &str) -> Option<usize> {
        self.ops.iter().position(|d| d.sym == sym)
    }

    /// Identifies product/inverse/unit by arity when each occurs exactly once.
    pub fn group_ops(&self) -> Option<GroupOps> {
        let unique = |arity: usize| {
            let mut found = None;
            for (i, d) in self.ops.iter().enumerate() {
                if d.arity == arity {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(i);
                }
            }
            found
        };
        if self.ops.len() != 3 {
            return None;
        }
        Some(GroupOps { mul: unique(2)?, inv: unique(1)?, unit: unique(0)? })
    }

    /// Same language: equal operation lists and infix choice. The name and
    /// the variety tag are metadata and do not matter here.
    pub fn compatible(&self, other: &Signature) -> bool {
        self.ops == other.ops && self.infix == other.infix
    }

    fn infix_char(&self) -> Option<char> {
        self.infix.map(|i| self.ops[i].sym.chars().next().unwrap())
    }
}

/// An ordered list of pairwise distinct variable names. The order is
/// load-bearing: it fixes the bit-level encoding of assignment tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VarSort {
    vars: Vec<String>,
}

impl VarSort {
    pub fn new(vars: &[&str]) -> Result<VarSort> {
        let mut list = Vec::new();
        for v in vars {
            if !is_ident(v) {
                return Err(Error::BadSort { detail: format!("`{v}` is not an identifier") });
            }
            if list.iter().any(|x: &String| x == v) {
                return Err(Error::BadSort { detail: format!("duplicate variable `{v}`") });
            }
            list.push(v.to_string());
        }
        Ok(VarSort { vars: list })
    }

    /// Parses a comma-separated variable list such as `x` or `x,y`.
    pub fn parse(text: &str) -> Result<VarSort> {
        let names: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        VarSort::new(&names)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.vars
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.vars[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Extends the sort by `count` fresh variables that collide neither
    /// with existing variables nor with operation symbols.
    pub fn extend_fresh(&self, count: usize, sig: &Signature) -> VarSort {
        let mut vars = self.vars.clone();
        let taken = |vars: &Vec<String>, cand: &str| {
            vars.iter().any(|v| v == cand) || sig.op_index(cand).is_some()
        };
        let preferred = ["y", "z", "w", "v", "u", "t", "s", "r"];
        let mut added = 0;
        for cand in preferred {
            if added == count {
                break;
            }
            if !taken(&vars, cand) {
                vars.push(cand.to_string());
                added += 1;
            }
        }
        let mut k = 0usize;
        while added < count {
            let cand = format!("y{k}");
            if !taken(&vars, &cand) {
                vars.push(cand);
                added += 1;
            }
            k += 1;
        }
        VarSort { vars }
    }
}

impl core::fmt::Display for VarSort {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.vars.join(","))
    }
}

/// A term over a signature and a sort, with indices into both.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(usize, Vec<Term>),
}

impl Term {
    pub fn var(idx: usize) -> Term {
        Term::Var(idx)
    }

    pub fn app(op: usize, args: Vec<Term>) -> Term {
        Term::App(op, args)
    }

    /// Leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Sorted, deduplicated variable indices occurring in the term.
    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Term::Var(i) => out.push(*i),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Largest variable index plus one, 0 for variable-free terms.
    pub fn max_var_excl(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, args) => args.iter().map(Term::max_var_excl).max().unwrap_or(0),
        }
    }

    /// Checks that all indices are valid for the given context.
    pub fn validate(&self, sig: &Signature, sort_len: usize) -> Result<()> {
        match self {
            Term::Var(i) => {
                if *i >= sort_len {
                    return Err(Error::SortMismatch {
                        context: format!("variable index {i} outside sort of size {sort_len}"),
                    });
                }
            }
            Term::App(op, args) => {
                let decl = sig.ops.get(*op).ok_or_else(|| Error::SortMismatch {
                    context: format!("op index {op} outside signature"),
                })?;
                if decl.arity != args.len() {
                    return Err(Error::ArityMismatch {
                        op: decl.sym.clone(),
                        expected: decl.arity,
                        found: args.len(),
                        pos: 0,
                    });
                }
                for a in args {
                    a.validate(sig, sort_len)?;
                }
            }
        }
        Ok(())
    }
}

/// Renders a term in the concrete grammar; the result parses back to the
/// same tree.
pub fn print_term(t: &Term, sig: &Signature, sort: &VarSort) -> String {
    let mut out = String::new();
    write_term(t, sig, sort, &mut out);
    out
}

fn write_term(t: &Term, sig: &Signature, sort: &VarSort, out: &mut String) {
    match t {
        Term::Var(i) => out.push_str(sort.name(*i)),
        Term::App(op, args) => {
            if Some(*op) == sig.infix && args.len() == 2 {
                write_term(&args[0], sig, sort, out);
                out.push(' ');
                out.push_str(&sig.ops[*op].sym);
                out.push(' ');
                // The infix chain is left-associative, so only a nested
                // right operand needs parentheses.
                let needs_parens = matches!(&args[1], Term::App(o, a) if Some(*o) == sig.infix && a.len() == 2);
                if needs_parens {
                    out.push('(');
                    write_term(&args[1], sig, sort, out);
                    out.push(')');
                } else {
                    write_term(&args[1], sig, sort, out);
                }
            } else {
                out.push_str(&sig.ops[*op].sym);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_term(a, sig, sort, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing, shared by the term and formula parsers.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Infix,
    LParen,
    RParen,
    Comma,
    Dot,
    EqEq,
    BangEq,
    Bang,
    Amp,
    Pipe,
    Arrow,
    LBracket,
    RBracket,
    Assign,
}

pub(crate) struct Lexed {
    pub toks: Vec<(Tok, usize)>,
    pub end: usize,
}

/// Tokenizes `text`. A `#` starts a comment running to the end of the
/// input. `infix` is the signature's infix character, if any.
pub(crate) fn lex(text: &str, infix: Option<char>) -> Result<Lexed> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '#' {
            break;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            toks.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        if Some(c) == infix {
            toks.push((Tok::Infix, i));
            i += 1;
            continue;
        }
        let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
        match two {
            "==" => {
                toks.push((Tok::EqEq, i));
                i += 2;
                continue;
            }
            "!=" => {
                toks.push((Tok::BangEq, i));
                i += 2;
                continue;
            }
            "->" => {
                toks.push((Tok::Arrow, i));
                i += 2;
                continue;
            }
            ":=" => {
                toks.push((Tok::Assign, i));
                i += 2;
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            _ => {
                return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") })
            }
        };
        toks.push((tok, i));
        i += 1;
    }
    Ok(Lexed { toks, end: text.len() })
}

pub(crate) struct Cursor<'a> {
    pub toks: &'a [(Tok, usize)],
    pub pos: usize,
    pub end: usize,
}

impl<'a> Cursor<'a> {
    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|(t, _)| t)
    }

    pub fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::Syntax { pos: self.here(), msg: format!("expected {what}") }),
        }
    }
}

/// Parses a term over `sig` and `sort`.
///
/// Identifiers resolve to operations first, then to sort variables; a bare
/// identifier that is neither is reported as a variable outside the sort.
pub fn parse_term(text: &str, sig: &Signature, sort: &VarSort) -> Result<Term> {
    let lexed = lex(text, sig.infix_char())?;
    let mut cur = Cursor { toks: &lexed.toks, pos: 0, end: lexed.end };
    let t = parse_term_at(&mut cur, sig, sort)?;
    if cur.peek().is_some() {
        return Err(Error::Syntax { pos: cur.here(), msg: "trailing input after term".into() });
    }
    Ok(t)
}

pub(crate) fn parse_term_at(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Term> {
    let mut acc = parse_atom(cur, sig, sort)?;
    while matches!(cur.peek(), Some(Tok::Infix)) {
        cur.bump();
        let rhs = parse_atom(cur, sig, sort)?;
        let op = sig.infix.expect("infix token implies an infix op");
        acc = Term::App(op, alloc::vec![acc, rhs]);
    }
    Ok(acc)
}

fn parse_atom(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Term> {
    let pos = cur.here();
    match cur.bump() {
        Some(Tok::LParen) => {
            let t = parse_term_at(cur, sig, sort)?;
            cur.expect(Tok::RParen, "`)`")?;
            Ok(t)
        }
        Some(Tok::Ident(name)) => {
            let name = name.clone();
            if matches!(cur.peek(), Some(Tok::LParen)) {
                let op = sig
                    .op_index(&name)
                    .ok_or_else(|| Error::UnknownSymbol { name: name.clone(), pos })?;
                cur.bump();
                let mut args = Vec::new();
                loop {
                    args.push(parse_term_at(cur, sig, sort)?);
                    match cur.bump() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RParen) => break,
                        _ => {
                            return Err(Error::Syntax {
                                pos: cur.here(),
                                msg: "expected `,` or `)` in argument list".into(),
                            })
                        }
                    }
                }
                let expected = sig.ops[op].arity;
                if expected != args.len() {
                    return Err(Error::ArityMismatch {
                        op: name,
                        expected,
                        found: args.len(),
                        pos,
                    });
                }
                Ok(Term::App(op, args))
            } else if let Some(op) = sig.op_index(&name) {
                let expected = sig.ops[op].arity;
                if expected != 0 {
                    return Err(Error::ArityMismatch { op: name, expected, found: 0, pos });
                }
                Ok(Term::App(op, Vec::new()))
            } else if let Some(idx) = sort.index_of(&name) {
                Ok(Term::Var(idx))
            } else {
                Err(Error::VarNotInSort { name, pos })
            }
        }
        _ => Err(Error::Syntax { pos, msg: "expected a term".into() }),
    }
}

/// A sort map `s: W(source) -> W(target)`: each source variable is sent to
/// a term over the target sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub source: VarSort,
    pub target: VarSort,
    map: Vec<Term>,
}

impl Substitution {
    pub fn new(source: VarSort, target: VarSort, map: Vec<Term>) -> Result<Substitution> {
        if map.len() != source.len() {
            return Err(Error::SortMismatch {
                context: format!(
                    "substitution maps {} variables, source sort has {}",
                    map.len(),
                    source.len()
                ),
            });
        }
        for t in &map {
            if t.max_var_excl() > target.len() {
                return Err(Error::SortMismatch {
                    context: "substitution image uses a variable outside the target sort"
                        .into(),
                });
            }
        }
        Ok(Substitution { source, target, map })
    }

    pub fn identity(sort: &VarSort) -> Substitution {
        let map = (0..sort.len()).map(Term::Var).collect();
        Substitution { source: sort.clone(), target: sort.clone(), map }
    }

    /// The one-variable rewrite `x := w` that fixes every other variable;
    /// source and target sorts coincide.
    pub fn single(sort: &VarSort, x: usize, w: Term) -> Result<Substitution> {
        if x >= sort.len() {
            return Err(Error::SortMismatch {
                context: format!("variable index {x} outside sort of size {}", sort.len()),
            });
        }
        if w.max_var_excl() > sort.len() {
            return Err(Error::SortMismatch {
                context: "replacement term uses a variable outside the sort".into(),
            });
        }
        let map = (0..sort.len())
            .map(|i| if i == x { w.clone() } else { Term::Var(i) })
            .collect();
        Ok(Substitution { source: sort.clone(), target: sort.clone(), map })
    }

    pub fn image(&self, x: usize) -> &Term {
        &self.map[x]
    }

    /// Applies the map to a term over the source sort.
    pub fn apply_term(&self, t: &Term) -> Result<Term> {
        match t {
            Term::Var(i) => {
                if *i >= self.map.len() {
                    return Err(Error::SortMismatch {
                        context: format!(
                            "term variable index {i} outside source sort of size {}",
                            self.map.len()
                        ),
                    });
                }
                Ok(self.map[*i].clone())
            }
            Term::App(op, args) => {
                let mut mapped = Vec::with_capacity(args.len());
                for a in args {
                    mapped.push(self.apply_term(a)?);
                }
                Ok(Term::App(*op, mapped))
            }
        }
    }

    /// Composition `other . self`: first this map, then `other`. The
    /// target of `self` must be the source of `other`.
    pub fn then(&self, other: &Substitution) -> Result<Substitution> {
        if self.target != other.source {
            return Err(Error::SortMismatch {
                context: "composition needs matching intermediate sorts".into(),
            });
        }
        let mut map = Vec::with_capacity(self.map.len());
        for t in &self.map {
            map.push(other.apply_term(t)?);
        }
        Ok(Substitution { source: self.source.clone(), target: other.target.clone(), map })
    }
}

/// Free-function form of [`Substitution::apply_term`].
pub fn apply_substitution_term(s: &Substitution, t: &Term) -> Result<Term> {
    s.apply_term(t)
}

/// Free-function form of [`Substitution::single`].
pub fn single_substitution(sort: &VarSort, x: usize, w: Term) -> Result<Substitution> {
    Substitution::single(sort, x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn group_sig() -> Signature {
        Signature::group(Variety::Group)
    }

    #[test]
    fn parses_infix_chain_left_associatively() {
        let sig = group_sig();
        let sort = VarSort::new(&["x1", "x2", "x3"]).unwrap();
        let t = parse_term("x1 * x2 * x3", &sig, &sort).unwrap();
        let mul = sig.op_index("*").unwrap();
        assert_eq!(
            t,
            Term::App(
                mul,
                vec![
                    Term::App(mul, vec![Term::Var(0), Term::Var(1)]),
                    Term::Var(2)
                ]
            )
        );
    }

    #[test]
    fn parses_prefix_application_and_constant() {
        let sig = group_sig();
        let sort = VarSort::new(&["x"]).unwrap();
        let t = parse_term("inv(x * e)", &sig, &sort).unwrap();
        assert_eq!(print_term(&t, &sig, &sort), "inv(x * e)");
    }

    #[test]
    fn rejects_variable_outside_sort() {
        let sig = group_sig();
        let sort = VarSort::new(&["x"]).unwrap();
        match parse_term("x * y", &sig, &sort) {
            Err(Error::VarNotInSort { name, .. }) => assert_eq!(name, "y"),
            other => panic!("expected VarNotInSort, got {other:?}"),
        }
    }

    #[test]
    fn rejects_arity_mismatch() {
        let sig = group_sig();
        let sort = VarSort::new(&["x"]).unwrap();
        match parse_term("inv(x, x)", &sig, &sort) {
            Err(Error::ArityMismatch { op, expected, found, .. }) => {
                assert_eq!((op.as_str(), expected, found), ("inv", 1, 2));
            }
            other => panic!("expected ArityMismatch, got {other:?}"),
        }
    }

    #[test]
    fn right_nested_product_keeps_parentheses() {
        let sig = group_sig();
        let sort = VarSort::new(&["x", "y", "z"]).unwrap();
        let t = parse_term("x * (y * z)", &sig, &sort).unwrap();
        let printed = print_term(&t, &sig, &sort);
        assert_eq!(printed, "x * (y * z)");
        assert_eq!(parse_term(&printed, &sig, &sort).unwrap(), t);
    }

    #[test]
    fn single_substitution_fixes_other_variables() {
        let sig = group_sig();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let w = parse_term("x * y", &sig, &sort).unwrap();
        let s = Substitution::single(&sort, 0, w).unwrap();
        let t = parse_term("x * inv(y)", &sig, &sort).unwrap();
        let mapped = s.apply_term(&t).unwrap();
        assert_eq!(print_term(&mapped, &sig, &sort), "x * y * inv(y)");
    }

    #[test]
    fn composition_applies_left_then_right() {
        let sig = group_sig();
        let xs = VarSort::new(&["x"]).unwrap();
        let ys = VarSort::new(&["y"]).unwrap();
        let s1 = Substitution::new(
            xs.clone(),
            ys.clone(),
            vec![parse_term("y * y", &sig, &ys).unwrap()],
        )
        .unwrap();
        let s2 = Substitution::new(
            ys.clone(),
            xs.clone(),
            vec![parse_term("inv(x)", &sig, &xs).unwrap()],
        )
        .unwrap();
        let c = s1.then(&s2).unwrap();
        let t = Term::Var(0);
        assert_eq!(print_term(&c.apply_term(&t).unwrap(), &sig, &xs), "inv(x) * inv(x)");
    }

    #[test]
    fn fresh_names_avoid_sort_and_ops() {
        let sig = group_sig();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let bigger = sort.extend_fresh(2, &sig);
        assert_eq!(bigger.names(), &["x", "y", "z", "w"]);
    }
}
