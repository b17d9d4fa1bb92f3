//! The two closure correspondences between syntax and point sets: term
//! equations against their solution sets, and formulas against their
//! value sets. Membership in a closure is decided pointwise against the
//! set, quasi-implications by solving the premises first, and
//! elementariness by comparing a set with the indistinguishability
//! classes it meets.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::algebra::FiniteAlgebra;
use crate::formula::{parse_formula, value, Formula};
use crate::signature::{Signature, Term, VarSort};
use crate::space::{equality_value, Point, PointSet};
use crate::typesys::{rho_partition, Partition};
use crate::{Error, Guards, Result};

/// A finite list of term equations over one sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    pub equations: Vec<(Term, Term)>,
}

impl EquationSystem {
    /// Parses one `w == w'` line per nonblank, noncomment line.
    pub fn parse(text: &str, sig: &Signature, sort: &VarSort) -> Result<EquationSystem> {
        let mut equations = Vec::new();
        for line in text.lines() {
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            let f = parse_formula(line, sig, sort)?;
            match f {
                Formula::Equality(a, b) => equations.push((a, b)),
                _ => {
                    return Err(Error::Syntax {
                        pos: 0,
                        msg: "equation systems take plain `w == w'` lines".to_string(),
                    })
                }
            }
        }
        Ok(EquationSystem { equations })
    }
}

/// A finite list of formulas over one sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaSystem {
    pub formulas: Vec<Formula>,
}

impl FormulaSystem {
    pub fn parse(text: &str, sig: &Signature, sort: &VarSort) -> Result<FormulaSystem> {
        let mut formulas = Vec::new();
        for line in text.lines() {
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            formulas.push(parse_formula(line, sig, sort)?);
        }
        Ok(FormulaSystem { formulas })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// The common solution set of the equations; the empty system solves to
/// the full space.
pub fn algebraic_set<'a>(
    sys: &EquationSystem,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<PointSet<'a>> {
    let mut acc = PointSet::full(sort, alg, guards)?;
    for (a, b) in &sys.equations {
        acc = acc.intersect(&equality_value(a, b, sort, alg, guards)?)?;
    }
    Ok(acc)
}

/// Whether the equation holds at every point of the set, i.e. lies in
/// the equational closure of whatever system cut the set out.
pub fn in_equational_closure(
    w: &Term,
    w2: &Term,
    set: &PointSet,
    guards: &Guards,
) -> Result<bool> {
    let eq = equality_value(w, w2, set.sort(), set.algebra(), guards)?;
    set.is_subset_of(&eq)
}

/// The common value set of the formulas; the empty system evaluates to
/// the full space.
pub fn elementary_set<'a>(
    sys: &FormulaSystem,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<PointSet<'a>> {
    let mut acc = PointSet::full(sort, alg, guards)?;
    for f in &sys.formulas {
        acc = acc.intersect(&value(f, sort, alg, guards)?)?;
    }
    Ok(acc)
}

/// Whether the formula holds at every point of the set.
pub fn in_logical_closure(f: &Formula, set: &PointSet, guards: &Guards) -> Result<bool> {
    let val = value(f, set.sort(), set.algebra(), guards)?;
    set.is_subset_of(&val)
}

/// Whether the conclusion holds wherever all the premises hold.
pub fn quasi_implies(
    premises: &EquationSystem,
    w: &Term,
    w2: &Term,
    sort: &VarSort,
    alg: &FiniteAlgebra,
    guards: &Guards,
) -> Result<bool> {
    let set = algebraic_set(premises, sort, alg, guards)?;
    in_equational_closure(w, w2, &set, guards)
}

/// How a point set sits against a partition of its space.
#[derive(Debug, Clone)]
pub struct ElementaryReport {
    pub elementary: bool,
    /// Classes fully inside the set, by least point index.
    pub inside_classes: Vec<u64>,
    /// A class with points on both sides, when not elementary.
    pub straddling: Option<u64>,
}

/// A set is a union of classes exactly when no class straddles its
/// boundary. With the logical indistinguishability partition this is the
/// elementariness test: such unions and only they are formula values.
pub fn is_elementary(set: &PointSet, partition: &Partition) -> Result<ElementaryReport> {
    if partition.len() as u64 != set.space_len() {
        return Err(Error::SortMismatch {
            context: "partition does not cover this point space".to_string(),
        });
    }
    let mut inside_classes = Vec::new();
    for class in partition.classes() {
        let first = set.contains(class[0]);
        if let Some(&odd) = class.iter().find(|&&p| set.contains(p) != first) {
            let least = class[0].min(odd);
            return Ok(ElementaryReport {
                elementary: false,
                inside_classes,
                straddling: Some(least),
            });
        }
        if first {
            inside_classes.push(class[0]);
        }
    }
    Ok(ElementaryReport { elementary: true, inside_classes, straddling: None })
}

/// The set of points satisfying every formula the point satisfies: its
/// class in the indistinguishability partition. The flag reports whether
/// the partition computation converged.
pub fn point_closure<'a>(
    mu: &Point,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<(PointSet<'a>, bool)> {
    if mu.values.len() != sort.len() {
        return Err(Error::SortMismatch {
            context: "point does not match the sort".to_string(),
        });
    }
    let rho = rho_partition(alg, sort, guards)?;
    let idx = mu.index(alg.carrier);
    let class = rho.partition.class_of(idx);
    Ok((rho.partition.class_set(class, sort, alg, guards)?, rho.converged))
}

/// The exact membership conditions a point imposes within a term window:
/// its satisfied window equalities asserted and the rest denied. The
/// value of the returned system contains the point's kernel class.
pub fn kernel_window_system(
    mu: &Point,
    sort: &VarSort,
    alg: &FiniteAlgebra,
    depth: usize,
    guards: &Guards,
) -> Result<FormulaSystem> {
    let window = crate::formula::kernel_of_point_restricted(mu, sort, alg, depth, guards)?;
    let mut formulas = Vec::new();
    let held: alloc::collections::BTreeSet<(usize, usize)> =
        window.holds.iter().copied().collect();
    for j in 1..window.reps.len() {
        for i in 0..j {
            let atom =
                Formula::Equality(window.reps[j].clone(), window.reps[i].clone());
            formulas.push(if held.contains(&(i, j)) { atom } else { Formula::not(atom) });
        }
    }
    Ok(FormulaSystem { formulas })
}
