//! First-order formulas over a sort: Boolean connectives, per-variable
//! quantifiers, equality atoms and explicit sort-map nodes.
//!
//! A formula evaluates to a [`PointSet`] over its sort. A `Subst` node
//! wraps a formula over the map's source sort and evaluates to the
//! preimage of the inner value under the induced point map, so sort-map
//! nodes are how a formula over one sort is transported to another.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::FiniteAlgebra;
use crate::signature::{
    lex, parse_term_at, print_term, Cursor, Signature, Substitution, Term, Tok, VarSort,
};
use crate::space::{
    equality_value, eval_point, exists_var, forall_var, point_index, space_size, sstar_pointset,
    Point, PointSet,
};
use crate::{Error, Guards, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Equality(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Quantified variable, as an index into the node's sort.
    Exists(usize, Box<Formula>),
    Forall(usize, Box<Formula>),
    /// The inner formula lives over the map's source sort; the node lives
    /// over the map's target sort.
    Subst(Box<Substitution>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: usize, f: Formula) -> Formula {
        Formula::Exists(x, Box::new(f))
    }

    pub fn forall(x: usize, f: Formula) -> Formula {
        Formula::Forall(x, Box::new(f))
    }

    pub fn subst(s: Substitution, f: Formula) -> Formula {
        Formula::Subst(Box::new(s), Box::new(f))
    }

    /// Conjunction of a non-empty list.
    pub fn conjunction(mut parts: Vec<Formula>) -> Option<Formula> {
        let first = if parts.is_empty() { return None } else { parts.remove(0) };
        Some(parts.into_iter().fold(first, Formula::and))
    }

    /// True when the formula contains no sort-map node, i.e. it lies in
    /// the plain quantifier fragment over its own sort. The check is
    /// syntactic.
    pub fn substitution_free(&self) -> bool {
        match self {
            Formula::Equality(..) => true,
            Formula::Not(g) => g.substitution_free(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.substitution_free() && b.substitution_free()
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => g.substitution_free(),
            Formula::Subst(..) => false,
        }
    }

    /// Free variable indices relative to the node's sort, sorted.
    pub fn free_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_free(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_free(&self, out: &mut Vec<usize>) {
        match self {
            Formula::Equality(a, b) => {
                out.extend(a.vars());
                out.extend(b.vars());
            }
            Formula::Not(g) => g.collect_free(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(x, g) | Formula::Forall(x, g) => {
                let mut inner = Vec::new();
                g.collect_free(&mut inner);
                out.extend(inner.into_iter().filter(|i| i != x));
            }
            Formula::Subst(s, g) => {
                for i in g.free_vars() {
                    out.extend(s.image(i).vars());
                }
            }
        }
    }

    /// Checks every index against the context; `Subst` nodes must target
    /// the ambient sort and are checked against their own source.
    pub fn validate(&self, sig: &Signature, sort: &VarSort) -> Result<()> {
        match self {
            Formula::Equality(a, b) => {
                a.validate(sig, sort.len())?;
                b.validate(sig, sort.len())
            }
            Formula::Not(g) => g.validate(sig, sort),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.validate(sig, sort)?;
                b.validate(sig, sort)
            }
            Formula::Exists(x, g) | Formula::Forall(x, g) => {
                if *x >= sort.len() {
                    return Err(Error::SortMismatch {
                        context: format!("quantified index {x} outside sort {sort}"),
                    });
                }
                g.validate(sig, sort)
            }
            Formula::Subst(s, g) => {
                if s.target != *sort {
                    return Err(Error::SortMismatch {
                        context: format!(
                            "sort-map node targets `{}` inside a formula over `{sort}`",
                            s.target
                        ),
                    });
                }
                g.validate(sig, &s.source)
            }
        }
    }
}

/// The value of a formula: the set of assignments satisfying it.
pub fn value<'a>(
    f: &Formula,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<PointSet<'a>> {
    match f {
        Formula::Equality(w, w2) => equality_value(w, w2, sort, alg, guards),
        Formula::Not(g) => Ok(value(g, sort, alg, guards)?.complement()),
        Formula::And(a, b) => {
            value(a, sort, alg, guards)?.intersect(&value(b, sort, alg, guards)?)
        }
        Formula::Or(a, b) => value(a, sort, alg, guards)?.union(&value(b, sort, alg, guards)?),
        Formula::Exists(x, g) => exists_var(&value(g, sort, alg, guards)?, *x),
        Formula::Forall(x, g) => forall_var(&value(g, sort, alg, guards)?, *x),
        Formula::Subst(s, g) => {
            if s.target != *sort {
                return Err(Error::SortMismatch {
                    context: "sort-map node does not target the ambient sort".into(),
                });
            }
            let inner = value(g, &s.source, alg, guards)?;
            sstar_pointset(s, &inner, guards)
        }
    }
}

/// Pointwise evaluation by structural recursion, quantifiers looping over
/// the carrier. Deliberately takes a different route than [`value`], so
/// the two act as cross-checks.
pub fn eval_at_point(f: &Formula, values: &[u8], alg: &FiniteAlgebra) -> bool {
    match f {
        Formula::Equality(w, w2) => eval_point(w, values, alg) == eval_point(w2, values, alg),
        Formula::Not(g) => !eval_at_point(g, values, alg),
        Formula::And(a, b) => eval_at_point(a, values, alg) && eval_at_point(b, values, alg),
        Formula::Or(a, b) => eval_at_point(a, values, alg) || eval_at_point(b, values, alg),
        Formula::Exists(x, g) => {
            let mut buf = values.to_vec();
            (0..alg.carrier).any(|v| {
                buf[*x] = v as u8;
                eval_at_point(g, &buf, alg)
            })
        }
        Formula::Forall(x, g) => {
            let mut buf = values.to_vec();
            (0..alg.carrier).all(|v| {
                buf[*x] = v as u8;
                eval_at_point(g, &buf, alg)
            })
        }
        Formula::Subst(s, g) => {
            let composed: Vec<u8> =
                (0..s.source.len()).map(|i| eval_point(s.image(i), values, alg)).collect();
            eval_at_point(g, &composed, alg)
        }
    }
}

/// Membership of the point in the formula's value set.
pub fn lker_contains(
    mu: &Point,
    f: &Formula,
    sort: &VarSort,
    alg: &FiniteAlgebra,
    guards: &Guards,
) -> Result<bool> {
    if mu.values.len() != sort.len() {
        return Err(Error::SortMismatch {
            context: format!("point has {} coordinates, sort {sort} needs {}", mu.values.len(), sort.len()),
        });
    }
    let set = value(f, sort, alg, guards)?;
    Ok(set.contains(mu.index(alg.carrier)))
}

/// Truth of a closed formula in the algebra.
pub fn in_theory(
    f: &Formula,
    sort: &VarSort,
    alg: &FiniteAlgebra,
    guards: &Guards,
) -> Result<bool> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(Error::NotClosed {
            free: free.iter().map(|&i| sort.name(i).to_string()).collect(),
        });
    }
    Ok(value(f, sort, alg, guards)?.is_full())
}

// ---------------------------------------------------------------------------
// Parsing.

/// Parses a formula over the given signature and ambient sort.
///
/// Inside `subst[v := t, ...](...)` the bracket list is exhaustive: the
/// inner formula is parsed over exactly the listed variables, in listed
/// order, and the replacement terms are over the ambient sort. `subst` is
/// a reserved word.
pub fn parse_formula(text: &str, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    let infix = sig.infix.map(|i| sig.ops[i].sym.chars().next().unwrap());
    let lexed = lex(text, infix)?;
    let mut cur = Cursor { toks: &lexed.toks, pos: 0, end: lexed.end };
    let f = parse_formula_at(&mut cur, sig, sort)?;
    if cur.peek().is_some() {
        return Err(Error::Syntax { pos: cur.here(), msg: "trailing input after formula".into() });
    }
    Ok(f)
}

fn parse_formula_at(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    // Quantifier prefix: `E v.` or `A v.` binds the rest of the input.
    if let Some(Tok::Ident(q)) = cur.peek() {
        if (q == "E" || q == "A")
            && matches!(cur.peek_at(1), Some(Tok::Ident(_)))
            && matches!(cur.peek_at(2), Some(Tok::Dot))
        {
            let is_exists = q == "E";
            cur.bump();
            let pos = cur.here();
            let name = match cur.bump() {
                Some(Tok::Ident(n)) => n.clone(),
                _ => unreachable!("peeked an identifier"),
            };
            cur.bump();
            let idx = sort
                .index_of(&name)
                .ok_or(Error::VarNotInSort { name, pos })?;
            let body = parse_formula_at(cur, sig, sort)?;
            return Ok(if is_exists {
                Formula::exists(idx, body)
            } else {
                Formula::forall(idx, body)
            });
        }
    }
    parse_implication(cur, sig, sort)
}

fn parse_implication(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    let lhs = parse_disjunction(cur, sig, sort)?;
    if matches!(cur.peek(), Some(Tok::Arrow)) {
        cur.bump();
        let rhs = parse_formula_at(cur, sig, sort)?;
        // Material implication is sugar for `!lhs | rhs`.
        return Ok(Formula::or(Formula::not(lhs), rhs));
    }
    Ok(lhs)
}

fn parse_disjunction(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    let mut acc = parse_conjunction(cur, sig, sort)?;
    while matches!(cur.peek(), Some(Tok::Pipe)) {
        cur.bump();
        let rhs = parse_conjunction(cur, sig, sort)?;
        acc = Formula::or(acc, rhs);
    }
    Ok(acc)
}

fn parse_conjunction(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    let mut acc = parse_negation(cur, sig, sort)?;
    while matches!(cur.peek(), Some(Tok::Amp)) {
        cur.bump();
        let rhs = parse_negation(cur, sig, sort)?;
        acc = Formula::and(acc, rhs);
    }
    Ok(acc)
}

fn parse_negation(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    if matches!(cur.peek(), Some(Tok::Bang)) {
        cur.bump();
        let inner = parse_negation(cur, sig, sort)?;
        return Ok(Formula::not(inner));
    }
    parse_primary(cur, sig, sort)
}

fn parse_primary(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    if let Some(Tok::Ident(name)) = cur.peek() {
        if name == "subst" && matches!(cur.peek_at(1), Some(Tok::LBracket)) {
            return parse_subst(cur, sig, sort);
        }
    }
    if matches!(cur.peek(), Some(Tok::LParen)) {
        // A parenthesis can open a grouped formula or a grouped term;
        // try the formula reading and fall back on the atom.
        let save = cur.pos;
        cur.bump();
        if let Ok(inner) = parse_formula_at(cur, sig, sort) {
            if matches!(cur.peek(), Some(Tok::RParen))
                && !matches!(cur.peek_at(1), Some(Tok::EqEq | Tok::BangEq | Tok::Infix))
            {
                cur.bump();
                return Ok(inner);
            }
        }
        cur.pos = save;
    }
    parse_atom_formula(cur, sig, sort)
}

fn parse_subst(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    cur.bump();
    cur.expect(Tok::LBracket, "`[`")?;
    let mut names: Vec<String> = Vec::new();
    let mut images: Vec<Term> = Vec::new();
    loop {
        let pos = cur.here();
        let name = match cur.bump() {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return Err(Error::Syntax { pos, msg: "expected a variable name".into() }),
        };
        if names.contains(&name) {
            return Err(Error::SortMismatch {
                context: format!("variable `{name}` listed twice in subst brackets"),
            });
        }
        cur.expect(Tok::Assign, "`:=`")?;
        let image = parse_term_at(cur, sig, sort)?;
        names.push(name);
        images.push(image);
        match cur.bump() {
            Some(Tok::Comma) => continue,
            Some(Tok::RBracket) => break,
            _ => {
                return Err(Error::Syntax {
                    pos: cur.here(),
                    msg: "expected `,` or `]` in subst brackets".into(),
                })
            }
        }
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let source = VarSort::new(&name_refs)?;
    let s = Substitution::new(source.clone(), sort.clone(), images)?;
    cur.expect(Tok::LParen, "`(`")?;
    let inner = parse_formula_at(cur, sig, &source)?;
    cur.expect(Tok::RParen, "`)`")?;
    Ok(Formula::subst(s, inner))
}

fn parse_atom_formula(cur: &mut Cursor, sig: &Signature, sort: &VarSort) -> Result<Formula> {
    let lhs = parse_term_at(cur, sig, sort)?;
    match cur.bump() {
        Some(Tok::EqEq) => {
            let rhs = parse_term_at(cur, sig, sort)?;
            Ok(Formula::Equality(lhs, rhs))
        }
        Some(Tok::BangEq) => {
            let rhs = parse_term_at(cur, sig, sort)?;
            Ok(Formula::not(Formula::Equality(lhs, rhs)))
        }
        _ => Err(Error::Syntax { pos: cur.here(), msg: "expected `==` or `!=`".into() }),
    }
}

// ---------------------------------------------------------------------------
// Printing.

const PREC_QUANT: u8 = 0;
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;

/// Renders a formula in the concrete grammar; parsing the result yields
/// the same tree. Negated equalities print with `!=`.
pub fn print_formula(f: &Formula, sig: &Signature, sort: &VarSort) -> String {
    let mut out = String::new();
    write_formula(f, sig, sort, PREC_QUANT, &mut out);
    out
}

fn write_formula(f: &Formula, sig: &Signature, sort: &VarSort, prec: u8, out: &mut String) {
    match f {
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let parens = prec > PREC_QUANT;
            if parens {
                out.push('(');
            }
            out.push(if matches!(f, Formula::Exists(..)) { 'E' } else { 'A' });
            out.push(' ');
            out.push_str(sort.name(*x));
            out.push_str(". ");
            write_formula(g, sig, sort, PREC_QUANT, out);
            if parens {
                out.push(')');
            }
        }
        Formula::Or(a, b) => {
            let parens = prec > PREC_OR;
            if parens {
                out.push('(');
            }
            write_formula(a, sig, sort, PREC_OR, out);
            out.push_str(" | ");
            write_formula(b, sig, sort, PREC_OR + 1, out);
            if parens {
                out.push(')');
            }
        }
        Formula::And(a, b) => {
            let parens = prec > PREC_AND;
            if parens {
                out.push('(');
            }
            write_formula(a, sig, sort, PREC_AND, out);
            out.push_str(" & ");
            write_formula(b, sig, sort, PREC_AND + 1, out);
            if parens {
                out.push(')');
            }
        }
        Formula::Not(g) => match g.as_ref() {
            Formula::Equality(a, b) => {
                out.push_str(&print_term(a, sig, sort));
                out.push_str(" != ");
                out.push_str(&print_term(b, sig, sort));
            }
            _ => {
                out.push_str("!(");
                write_formula(g, sig, sort, PREC_QUANT, out);
                out.push(')');
            }
        },
        Formula::Equality(a, b) => {
            out.push_str(&print_term(a, sig, sort));
            out.push_str(" == ");
            out.push_str(&print_term(b, sig, sort));
        }
        Formula::Subst(s, g) => {
            out.push_str("subst[");
            for i in 0..s.source.len() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(s.source.name(i));
                out.push_str(" := ");
                out.push_str(&print_term(s.image(i), sig, sort));
            }
            out.push_str("](");
            write_formula(g, sig, &s.source, PREC_QUANT, out);
            out.push(')');
        }
    }
}

// ---------------------------------------------------------------------------
// Semantic term representatives and kernel windows.

/// Spaces larger than this are out of range for window enumeration.
const REPS_SPACE_CAP: u64 = 1 << 16;
/// At most this many semantic classes are enumerated.
const REPS_COUNT_CAP: usize = 4096;

/// Terms over a sort, deduplicated by their value vectors over one or
/// more algebras (with one shared signature). The first term reaching a
/// value vector in breadth-first order represents its class, so the list
/// order is canonical.
pub struct TermReps {
    pub terms: Vec<Term>,
    /// `vv[i]` concatenates the value vectors of term `i` over each
    /// algebra, in the order given at construction.
    pub vv: Vec<Vec<u8>>,
    /// Start offset of each algebra's block inside a value vector.
    pub offsets: Vec<usize>,
}

pub fn term_reps(
    sort: &VarSort,
    algs: &[&FiniteAlgebra],
    max_depth: usize,
    guards: &Guards,
) -> Result<TermReps> {
    let sig = &algs[0].signature;
    let mut offsets = Vec::with_capacity(algs.len());
    let mut total = 0usize;
    for alg in algs {
        if !alg.signature.compatible(sig) {
            return Err(Error::AlgebraMismatch {
                context: "term enumeration needs one shared signature".into(),
            });
        }
        let count = space_size(sort.len(), alg.carrier, guards)?;
        if count > REPS_SPACE_CAP {
            return Err(Error::PointsGuard { needed: count as u128, limit: REPS_SPACE_CAP });
        }
        offsets.push(total);
        total += count as usize;
    }
    let mut seen: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut terms: Vec<Term> = Vec::new();
    let mut vvs: Vec<Vec<u8>> = Vec::new();
    let mut depths: Vec<usize> = Vec::new();
    let push = |t: Term,
                    vv: Vec<u8>,
                    d: usize,
                    terms: &mut Vec<Term>,
                    vvs: &mut Vec<Vec<u8>>,
                    depths: &mut Vec<usize>,
                    seen: &mut BTreeMap<Vec<u8>, usize>| {
        if seen.contains_key(&vv) || terms.len() >= REPS_COUNT_CAP {
            return;
        }
        seen.insert(vv.clone(), terms.len());
        terms.push(t);
        vvs.push(vv);
        depths.push(d);
    };
    let value_vector = |t: &Term| -> Vec<u8> {
        let mut vv = Vec::with_capacity(total);
        for alg in algs {
            let count = (alg.carrier as u64).pow(sort.len() as u32);
            let mut tuple = vec![0u8; sort.len()];
            for _ in 0..count {
                vv.push(eval_point(t, &tuple, alg));
                crate::space::advance(&mut tuple, alg.carrier);
            }
        }
        vv
    };
    for i in 0..sort.len() {
        let t = Term::Var(i);
        let vv = value_vector(&t);
        push(t, vv, 1, &mut terms, &mut vvs, &mut depths, &mut seen);
    }
    for (op, decl) in sig.ops.iter().enumerate() {
        if decl.arity == 0 {
            let t = Term::App(op, Vec::new());
            let vv = value_vector(&t);
            push(t, vv, 1, &mut terms, &mut vvs, &mut depths, &mut seen);
        }
    }
    for depth in 2..=max_depth {
        let prev_len = terms.len();
        for (op, decl) in sig.ops.iter().enumerate() {
            if decl.arity == 0 {
                continue;
            }
            let k = decl.arity;
            let mut idx = vec![0usize; k];
            loop {
                // At least one argument must come from the previous level,
                // otherwise the candidate was already tried.
                if idx.iter().any(|&i| depths[i] == depth - 1) {
                    let args: Vec<Term> = idx.iter().map(|&i| terms[i].clone()).collect();
                    let mut vv = Vec::with_capacity(total);
                    for (ai, alg) in algs.iter().enumerate() {
                        let start = offsets[ai];
                        let count = (alg.carrier as u64).pow(sort.len() as u32) as usize;
                        for p in 0..count {
                            let mut scratch = [0u8; 8];
                            for (slot, &argi) in scratch.iter_mut().zip(idx.iter()) {
                                *slot = vvs[argi][start + p];
                            }
                            vv.push(alg.op_value(op, &scratch[..k]));
                        }
                    }
                    let t = Term::App(op, args);
                    push(t, vv, depth, &mut terms, &mut vvs, &mut depths, &mut seen);
                }
                if !advance_indices(&mut idx, prev_len) {
                    break;
                }
            }
        }
    }
    Ok(TermReps { terms, vv: vvs, offsets })
}

fn advance_indices(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut() {
        if *slot + 1 < base {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// The equalities from a point's kernel that fit in a depth window,
/// stated over canonical term representatives. `holds` lists index pairs
/// `(i, j)` with `i < j` whose representatives agree at the point; every
/// other representative pair disagrees there.
pub struct KernelWindow {
    pub reps: Vec<Term>,
    pub holds: Vec<(usize, usize)>,
}

impl KernelWindow {
    /// The satisfied equality atoms as term pairs.
    pub fn equalities(&self) -> Vec<(Term, Term)> {
        self.holds
            .iter()
            .map(|&(i, j)| (self.reps[i].clone(), self.reps[j].clone()))
            .collect()
    }
}

/// Restriction of the point's kernel to terms of depth at most `depth`,
/// up to semantic duplicates.
pub fn kernel_of_point_restricted(
    mu: &Point,
    sort: &VarSort,
    alg: &FiniteAlgebra,
    depth: usize,
    guards: &Guards,
) -> Result<KernelWindow> {
    if mu.values.len() != sort.len() {
        return Err(Error::SortMismatch {
            context: "point does not match the sort".into(),
        });
    }
    let reps = term_reps(sort, &[alg], depth, guards)?;
    let idx = point_index(&mu.values, alg.carrier) as usize;
    let mut holds = Vec::new();
    for j in 1..reps.terms.len() {
        for i in 0..j {
            if reps.vv[i][idx] == reps.vv[j][idx] {
                holds.push((i, j));
            }
        }
    }
    Ok(KernelWindow { reps: reps.terms, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn z4() -> FiniteAlgebra {
        FiniteAlgebra::cyclic(4).unwrap()
    }

    fn guards() -> Guards {
        Guards::default()
    }

    #[test]
    fn parses_quantifier_scope_to_the_end() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let f = parse_formula("E y. y*y == x & x != e", &alg.signature, &sort).unwrap();
        // The body of `E y.` is the whole rest: (y*y == x) & (x != e).
        match f {
            Formula::Exists(1, body) => assert!(matches!(*body, Formula::And(..))),
            other => panic!("expected Exists, got {other:?}"),
        }
    }

    #[test]
    fn parses_subst_brackets_exhaustively() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let f =
            parse_formula("subst[x := x*y](E x. x*x == e)", &alg.signature, &sort).unwrap();
        match &f {
            Formula::Subst(s, inner) => {
                assert_eq!(s.source.names(), &["x"]);
                assert_eq!(s.target.names(), &["x", "y"]);
                assert!(matches!(inner.as_ref(), Formula::Exists(0, _)));
            }
            other => panic!("expected Subst, got {other:?}"),
        }
        f.validate(&alg.signature, &sort).unwrap();
    }

    #[test]
    fn arrow_desugars_to_or_not() {
        let alg = z4();
        let sort = VarSort::new(&["x"]).unwrap();
        let f = parse_formula("x == e -> x*x == e", &alg.signature, &sort).unwrap();
        assert!(matches!(f, Formula::Or(..)));
        let g = parse_formula("!(x == e) | x*x == e", &alg.signature, &sort).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn print_parse_round_trip() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        for text in [
            "E y. y*y == x",
            "A x. E y. y*y == x | x != e",
            "(x == e | y == e) & x*y != e",
            "subst[x := x*y, y := inv(x)](x*y == e)",
            "!(x == e & y == e)",
        ] {
            let f = parse_formula(text, &alg.signature, &sort).unwrap();
            let printed = print_formula(&f, &alg.signature, &sort);
            let reparsed = parse_formula(&printed, &alg.signature, &sort).unwrap();
            assert_eq!(f, reparsed, "round trip failed for `{text}` -> `{printed}`");
        }
    }

    #[test]
    fn value_of_square_witness_is_a_cylinder() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let f = parse_formula("E y. y*y == x", &alg.signature, &sort).unwrap();
        let set = value(&f, &sort, &alg, &guards()).unwrap();
        // Squares in Z/4 are {0, 2}; the value is the cylinder over them.
        assert_eq!(set.len(), 8);
        for p in set.points() {
            assert!(p.values[0] == 0 || p.values[0] == 2);
        }
    }

    #[test]
    fn comments_are_ignored_by_the_lexer() {
        let alg = z4();
        let sort = VarSort::new(&["x"]).unwrap();
        let f = parse_formula("x*x == e  # torsion", &alg.signature, &sort).unwrap();
        assert!(matches!(f, Formula::Equality(..)));
    }

    #[test]
    fn lker_membership_of_the_involution() {
        let alg = z4();
        let sort = VarSort::new(&["x"]).unwrap();
        let f = parse_formula("x*x == e", &alg.signature, &sort).unwrap();
        let mu = Point::new(vec![2]);
        assert!(lker_contains(&mu, &f, &sort, &alg, &guards()).unwrap());
        let nu = Point::new(vec![1]);
        assert!(!lker_contains(&nu, &f, &sort, &alg, &guards()).unwrap());
    }

    #[test]
    fn exactly_one_of_u_and_not_u_is_in_each_kernel() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let texts = ["x*y == e", "E y. y*y == x", "x == y | y*y == e"];
        for text in texts {
            let f = parse_formula(text, &alg.signature, &sort).unwrap();
            let nf = Formula::not(f.clone());
            for idx in 0..16u64 {
                let mu = Point::from_index(idx, 2, 4);
                let a = lker_contains(&mu, &f, &sort, &alg, &guards()).unwrap();
                let b = lker_contains(&mu, &nf, &sort, &alg, &guards()).unwrap();
                assert!(a ^ b);
            }
        }
    }

    #[test]
    fn theory_membership_needs_closed_formulas() {
        let alg = z4();
        let sort = VarSort::new(&["x"]).unwrap();
        let f = parse_formula("x*x == e", &alg.signature, &sort).unwrap();
        match in_theory(&f, &sort, &alg, &guards()) {
            Err(Error::NotClosed { free }) => assert_eq!(free, vec!["x".to_string()]),
            other => panic!("expected NotClosed, got {other:?}"),
        }
        let g = parse_formula("A x. x*x*x*x == e", &alg.signature, &sort).unwrap();
        assert!(in_theory(&g, &sort, &alg, &guards()).unwrap());
    }

    #[test]
    fn bitset_and_pointwise_semantics_agree() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let texts = [
            "E y. y*y == x",
            "A y. x*y == y*x",
            "subst[x := x*y](E x. x*x == e)",
            "x != y -> E y. y*y == x",
        ];
        for text in texts {
            let f = parse_formula(text, &alg.signature, &sort).unwrap();
            let set = value(&f, &sort, &alg, &guards()).unwrap();
            for idx in 0..16u64 {
                let p = Point::from_index(idx, 2, 4);
                assert_eq!(
                    set.contains(idx),
                    eval_at_point(&f, &p.values, &alg),
                    "disagreement for `{text}` at {p:?}"
                );
            }
        }
    }

    #[test]
    fn kernel_window_catches_the_torsion_equality() {
        let alg = z4();
        let sort = VarSort::new(&["x"]).unwrap();
        let mu = Point::new(vec![2]);
        let window = kernel_of_point_restricted(&mu, &sort, &alg, 2, &guards()).unwrap();
        let sig = &alg.signature;
        let has = window.equalities().iter().any(|(a, b)| {
            let pa = print_term(a, sig, &sort);
            let pb = print_term(b, sig, &sort);
            (pa == "x * x" && pb == "e") || (pa == "e" && pb == "x * x")
        });
        assert!(has, "expected the window to contain x*x == e");
    }

    #[test]
    fn identical_points_have_identical_windows() {
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z4v = FiniteAlgebra::cyclic(4).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z4v).unwrap();
        let sort = VarSort::new(&["x"]).unwrap();
        // (1,0) is index 4, (0,2) is index 2: both of order 2, and their
        // windows agree at every tested depth.
        for depth in 1..=3 {
            let w1 =
                kernel_of_point_restricted(&Point::new(vec![4]), &sort, &p, depth, &guards())
                    .unwrap();
            let w2 =
                kernel_of_point_restricted(&Point::new(vec![2]), &sort, &p, depth, &guards())
                    .unwrap();
            assert_eq!(w1.holds, w2.holds);
        }
    }

    #[test]
    fn substitution_free_flag_is_syntactic() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let f = parse_formula("E y. y*y == x", &alg.signature, &sort).unwrap();
        assert!(f.substitution_free());
        let g = parse_formula("subst[x := x](x == e)", &alg.signature, &sort).unwrap();
        assert!(!g.substitution_free());
    }
}
