//! The affine space of assignments `X -> H` and its bit-vector subsets.
//!
//! A point over the sort `x1,...,xn` is encoded as
//! `index = sum_i value(x_i) * |H|^(i-1)`: the first sort variable is the
//! least significant digit. This encoding is normative; reports and the
//! raw bit-vector output format depend on it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::FiniteAlgebra;
use crate::signature::{Substitution, Term, VarSort};
use crate::{Error, Guards, Result};

/// A single assignment, one carrier element per sort variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Point {
    pub values: Vec<u8>,
}

impl Point {
    pub fn new(values: Vec<u8>) -> Point {
        Point { values }
    }

    pub fn index(&self, carrier: usize) -> u64 {
        point_index(&self.values, carrier)
    }

    pub fn from_index(idx: u64, n_vars: usize, carrier: usize) -> Point {
        let mut values = vec![0u8; n_vars];
        decode_index(idx, carrier, &mut values);
        Point { values }
    }
}

pub fn point_index(values: &[u8], carrier: usize) -> u64 {
    let mut idx = 0u64;
    for &v in values.iter().rev() {
        idx = idx * carrier as u64 + v as u64;
    }
    idx
}

pub fn decode_index(idx: u64, carrier: usize, out: &mut [u8]) {
    let mut rest = idx;
    for slot in out.iter_mut() {
        *slot = (rest % carrier as u64) as u8;
        rest /= carrier as u64;
    }
}

/// Number of points of `H^n`, checked against the guard.
pub fn space_size(n_vars: usize, carrier: usize, guards: &Guards) -> Result<u64> {
    let needed = (carrier as u128).checked_pow(n_vars as u32).unwrap_or(u128::MAX);
    if needed > guards.max_points as u128 {
        return Err(Error::PointsGuard { needed, limit: guards.max_points });
    }
    Ok(needed as u64)
}

/// Evaluates a term at an assignment tuple.
pub fn eval_point(t: &Term, values: &[u8], alg: &FiniteAlgebra) -> u8 {
    match t {
        Term::Var(i) => values[*i],
        Term::App(op, args) => {
            let mut evaluated = [0u8; 8];
            if args.len() <= 8 {
                for (slot, a) in evaluated.iter_mut().zip(args) {
                    *slot = eval_point(a, values, alg);
                }
                alg.op_value(*op, &evaluated[..args.len()])
            } else {
                let vals: Vec<u8> = args.iter().map(|a| eval_point(a, values, alg)).collect();
                alg.op_value(*op, &vals)
            }
        }
    }
}

/// A subset of the assignment space `H^X`, stored as a bit vector. The
/// sort and the algebra are fixed for the set's lifetime; combining sets
/// from different spaces is an error.
#[derive(Debug, Clone)]
pub struct PointSet<'a> {
    sort: VarSort,
    alg: &'a FiniteAlgebra,
    count: u64,
    words: Vec<u64>,
}

impl<'a> PartialEq for PointSet<'a> {
    fn eq(&self, other: &Self) -> bool {
        self.sort == other.sort && same_algebra(self.alg, other.alg) && self.words == other.words
    }
}

impl<'a> Eq for PointSet<'a> {}

fn same_algebra(a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    core::ptr::eq(a, b) || a == b
}

impl<'a> PointSet<'a> {
    pub fn empty(sort: &VarSort, alg: &'a FiniteAlgebra, guards: &Guards) -> Result<Self> {
        let count = space_size(sort.len(), alg.carrier, guards)?;
        let words = vec![0u64; count.div_ceil(64) as usize];
        Ok(PointSet { sort: sort.clone(), alg, count, words })
    }

    pub fn full(sort: &VarSort, alg: &'a FiniteAlgebra, guards: &Guards) -> Result<Self> {
        let mut set = Self::empty(sort, alg, guards)?;
        for w in set.words.iter_mut() {
            *w = u64::MAX;
        }
        set.mask_tail();
        Ok(set)
    }

    /// Zeroes the bits beyond `count`; every constructor and operation
    /// maintains this so word-level comparisons are exact.
    fn mask_tail(&mut self) {
        let tail = (self.count % 64) as u32;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn sort(&self) -> &VarSort {
        &self.sort
    }

    pub fn algebra(&self) -> &'a FiniteAlgebra {
        self.alg
    }

    /// Size of the ambient space, not of the subset.
    pub fn space_len(&self) -> u64 {
        self.count
    }

    /// Number of points in the subset.
    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.count
    }

    pub fn contains(&self, idx: u64) -> bool {
        (self.words[(idx / 64) as usize] >> (idx % 64)) & 1 == 1
    }

    pub fn insert(&mut self, idx: u64) {
        self.words[(idx / 64) as usize] |= 1u64 << (idx % 64);
    }

    pub fn remove(&mut self, idx: u64) {
        self.words[(idx / 64) as usize] &= !(1u64 << (idx % 64));
    }

    /// Ascending indices of the member points.
    pub fn iter_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(wi as u64 * 64 + b as u64)
            })
        })
    }

    /// Member points decoded to tuples, ascending by index.
    pub fn points(&self) -> Vec<Point> {
        let n = self.sort.len();
        let c = self.alg.carrier;
        self.iter_indices().map(|i| Point::from_index(i, n, c)).collect()
    }

    fn check_same_space(&self, other: &Self, what: &str) -> Result<()> {
        if self.sort != other.sort {
            return Err(Error::SortMismatch { context: String::from(what) });
        }
        if !same_algebra(self.alg, other.alg) {
            return Err(Error::AlgebraMismatch { context: String::from(what) });
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "union of point sets")?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        Ok(out)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "intersection of point sets")?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
        Ok(out)
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.mask_tail();
        out
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "difference of point sets")?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
        Ok(out)
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        self.check_same_space(other, "subset test")?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    /// Raw little-endian words of the membership bit vector.
    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// The value of the atom `w == w'`: all points where both terms evaluate
/// to the same element.
pub fn equality_value<'a>(
    w: &Term,
    w2: &Term,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<PointSet<'a>> {
    w.validate(&alg.signature, sort.len())?;
    w2.validate(&alg.signature, sort.len())?;
    let mut set = PointSet::empty(sort, alg, guards)?;
    let mut tuple = vec![0u8; sort.len()];
    for idx in 0..set.count {
        if eval_point(w, &tuple, alg) == eval_point(w2, &tuple, alg) {
            set.insert(idx);
        }
        advance(&mut tuple, alg.carrier);
    }
    Ok(set)
}

/// Advances the little-endian odometer by one (first variable fastest).
pub(crate) fn advance(tuple: &mut [u8], carrier: usize) -> bool {
    for slot in tuple.iter_mut() {
        if (*slot as usize) + 1 < carrier {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// Projection along one coordinate: a point belongs to the result when
/// some reassignment of `var` lands in `a`. The result is a cylinder over
/// that coordinate.
pub fn exists_var<'a>(a: &PointSet<'a>, var: usize) -> Result<PointSet<'a>> {
    sweep_var(a, var, true)
}

/// Dual sweep: every reassignment of `var` must land in `a`.
pub fn forall_var<'a>(a: &PointSet<'a>, var: usize) -> Result<PointSet<'a>> {
    sweep_var(a, var, false)
}

fn sweep_var<'a>(a: &PointSet<'a>, var: usize, any: bool) -> Result<PointSet<'a>> {
    if var >= a.sort.len() {
        return Err(Error::SortMismatch {
            context: alloc::format!(
                "quantified variable index {var} outside sort of size {}",
                a.sort.len()
            ),
        });
    }
    let c = a.alg.carrier as u64;
    let stride = c.pow(var as u32);
    let mut out = a.clone();
    if stride % 64 == 0 {
        // Whole words share one coordinate line; combine word-wise.
        let wstride = (stride / 64) as usize;
        let wblock = wstride * c as usize;
        let total = out.words.len();
        let mut wb = 0usize;
        while wb < total {
            for wo in 0..wstride {
                let mut acc = if any { 0u64 } else { u64::MAX };
                for v in 0..c as usize {
                    let w = a.words[wb + wo + v * wstride];
                    if any {
                        acc |= w;
                    } else {
                        acc &= w;
                    }
                }
                for v in 0..c as usize {
                    out.words[wb + wo + v * wstride] = acc;
                }
            }
            wb += wblock;
        }
    } else {
        let block = stride * c;
        let mut base = 0u64;
        while base < a.count {
            for off in 0..stride {
                let mut acc = !any;
                for v in 0..c {
                    let bit = a.contains(base + off + v * stride);
                    if any {
                        acc |= bit;
                    } else {
                        acc &= bit;
                    }
                }
                for v in 0..c {
                    let idx = base + off + v * stride;
                    if acc {
                        out.insert(idx);
                    } else {
                        out.remove(idx);
                    }
                }
            }
            base += block;
        }
    }
    out.mask_tail();
    Ok(out)
}

/// Preimage of `a` under the point map induced by the sort map `s`: a
/// target-sort point belongs to the result when its composition with `s`
/// lies in `a`. `a` must live over the source sort of `s`.
pub fn sstar_pointset<'a>(
    s: &Substitution,
    a: &PointSet<'a>,
    guards: &Guards,
) -> Result<PointSet<'a>> {
    if a.sort != s.source {
        return Err(Error::SortMismatch {
            context: "point-set preimage needs a set over the map's source sort".into(),
        });
    }
    let alg = a.alg;
    let mut out = PointSet::empty(&s.target, alg, guards)?;
    let n_src = s.source.len();
    let mut tuple = vec![0u8; s.target.len()];
    let mut composed = vec![0u8; n_src];
    for idx in 0..out.count {
        for (slot, x) in composed.iter_mut().zip(0..n_src) {
            *slot = eval_point(s.image(x), &tuple, alg);
        }
        if a.contains(point_index(&composed, alg.carrier)) {
            out.insert(idx);
        }
        advance(&mut tuple, alg.carrier);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_term;
    use alloc::vec;

    fn z4() -> FiniteAlgebra {
        FiniteAlgebra::cyclic(4).unwrap()
    }

    #[test]
    fn term_evaluation_in_z4() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let t = parse_term("x * y * inv(y) * x", &alg.signature, &sort).unwrap();
        assert_eq!(eval_point(&t, &[3, 1], &alg), 2);
    }

    #[test]
    fn index_encoding_is_little_endian_in_sort_order() {
        // Sort x,y over Z/4: the point (x=1, y=2) has index 1 + 2*4 = 9.
        assert_eq!(point_index(&[1, 2], 4), 9);
        let p = Point::from_index(9, 2, 4);
        assert_eq!(p.values, vec![1, 2]);
    }

    #[test]
    fn squares_of_z4() {
        let alg = z4();
        let sort = VarSort::new(&["x"]).unwrap();
        let sig = &alg.signature;
        let lhs = parse_term("x * x", sig, &sort).unwrap();
        let rhs = parse_term("e", sig, &sort).unwrap();
        let set = equality_value(&lhs, &rhs, &sort, &alg, &Guards::default()).unwrap();
        let members: Vec<u64> = set.iter_indices().collect();
        assert_eq!(members, vec![0, 2]);
    }

    #[test]
    fn exists_projects_to_a_cylinder() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let guards = Guards::default();
        let mut a = PointSet::empty(&sort, &alg, &guards).unwrap();
        // Only the single point (x=2, y=3).
        a.insert(point_index(&[2, 3], 4));
        let ex_y = exists_var(&a, 1).unwrap();
        // The whole y-line through x=2.
        let members: Vec<u64> = ex_y.iter_indices().collect();
        assert_eq!(members, vec![2, 6, 10, 14]);
        let ex_xy = exists_var(&ex_y, 0).unwrap();
        assert!(ex_xy.is_full());
    }

    #[test]
    fn forall_is_the_dual_sweep() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let guards = Guards::default();
        let mut a = PointSet::full(&sort, &alg, &guards).unwrap();
        a.remove(point_index(&[0, 1], 4));
        let all_x = forall_var(&a, 0).unwrap();
        let expected = exists_var(&a.complement(), 0).unwrap().complement();
        assert_eq!(all_x, expected);
        assert!(!all_x.contains(point_index(&[3, 1], 4)));
        assert!(all_x.contains(point_index(&[3, 2], 4)));
    }

    #[test]
    fn preimage_under_a_sort_map() {
        let alg = z4();
        let xs = VarSort::new(&["x"]).unwrap();
        let ys = VarSort::new(&["y"]).unwrap();
        let guards = Guards::default();
        // A = {0, 2} over x; s maps x to y*y. Preimage over y is all of
        // Z/4 because every square lands in {0, 2}.
        let lhs = parse_term("x * x", &alg.signature, &xs).unwrap();
        let rhs = parse_term("e", &alg.signature, &xs).unwrap();
        let a = equality_value(&lhs, &rhs, &xs, &alg, &guards).unwrap();
        let s = Substitution::new(
            xs.clone(),
            ys.clone(),
            alloc::vec![parse_term("y * y", &alg.signature, &ys).unwrap()],
        )
        .unwrap();
        let pre = sstar_pointset(&s, &a, &guards).unwrap();
        assert!(pre.is_full());
    }

    #[test]
    fn mismatched_sorts_are_rejected() {
        let alg = z4();
        let guards = Guards::default();
        let a = PointSet::empty(&VarSort::new(&["x"]).unwrap(), &alg, &guards).unwrap();
        let b = PointSet::empty(&VarSort::new(&["y"]).unwrap(), &alg, &guards).unwrap();
        assert!(matches!(a.union(&b), Err(Error::SortMismatch { .. })));
    }

    #[test]
    fn guard_blocks_oversized_spaces() {
        let alg = z4();
        let sort = VarSort::new(&["x", "y", "z"]).unwrap();
        let guards = Guards { max_points: 63, ..Guards::default() };
        assert!(matches!(
            PointSet::empty(&sort, &alg, &guards),
            Err(Error::PointsGuard { needed: 64, .. })
        ));
    }
}
