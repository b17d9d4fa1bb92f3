//! Point partitions over finite algebras: kernel classes, bounded-width
//! refinements approximating logical indistinguishability, automorphism
//! orbits, and the classification reports built on them.
//!
//! The engine label-refines one or two point spaces jointly. Labels start
//! from canonical generated-subalgebra traces, so two points share a
//! label exactly when their kernels agree, even across algebras. The
//! labels are then refined by per-coordinate reachable-label sets to a
//! fixpoint, which captures formulas reusing the sort's own variables.
//! Widening the sort by fresh variables and projecting each base point to
//! the set of labels of its extensions captures formulas with that many
//! extra variables; the projections stabilize on the logical
//! indistinguishability partition. The stabilization width and a
//! convergence flag are part of every answer, and results that stop at
//! the width ceiling are returned flagged rather than rejected.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{automorphisms, kernel_signature, AutGroup, FiniteAlgebra};
use crate::formula::{term_reps, value, Formula, TermReps};
use crate::intern::Interner;
use crate::signature::{Term, VarSort};
use crate::space::{advance, point_index, space_size, Point, PointSet};
use crate::{Error, Guards, Result};

/// A partition of a point space (or of two spaces laid end to end) with
/// canonical class ids: classes are numbered by their least point index,
/// so equal partitions compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<u32>,
    num_classes: u32,
}

impl Partition {
    fn from_labels<T: Ord + Copy>(labels: &[T]) -> Partition {
        let mut ids: BTreeMap<T, u32> = BTreeMap::new();
        let mut class_of = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = ids.len() as u32;
            class_of.push(*ids.entry(l).or_insert(next));
        }
        Partition { class_of, num_classes: ids.len() as u32 }
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn class_of(&self, idx: u64) -> u32 {
        self.class_of[idx as usize]
    }

    pub fn class_points(&self, class: u32) -> Vec<u64> {
        self.class_of
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == class)
            .map(|(i, _)| i as u64)
            .collect()
    }

    pub fn classes(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.num_classes as usize];
        for (i, &c) in self.class_of.iter().enumerate() {
            out[c as usize].push(i as u64);
        }
        out
    }

    /// True when every class of `self` lies inside a class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.class_of.len() != coarser.class_of.len() {
            return false;
        }
        let mut image: Vec<Option<u32>> = vec![None; self.num_classes as usize];
        for (i, &c) in self.class_of.iter().enumerate() {
            match image[c as usize] {
                None => image[c as usize] = Some(coarser.class_of[i]),
                Some(t) => {
                    if t != coarser.class_of[i] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// One class as a point set over the given space.
    pub fn class_set<'a>(
        &self,
        class: u32,
        sort: &VarSort,
        alg: &'a FiniteAlgebra,
        guards: &Guards,
    ) -> Result<PointSet<'a>> {
        let mut set = PointSet::empty(sort, alg, guards)?;
        if set.space_len() != self.class_of.len() as u64 {
            return Err(Error::SortMismatch {
                context: "partition does not cover this point space".into(),
            });
        }
        for idx in self.class_points(class) {
            set.insert(idx);
        }
        Ok(set)
    }
}

// ---------------------------------------------------------------------------
// The joint refinement engine.

struct Blocks<'a> {
    algs: Vec<&'a FiniteAlgebra>,
    nvars: usize,
    counts: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

fn make_blocks<'a>(
    algs: &[&'a FiniteAlgebra],
    nvars: usize,
    guards: &Guards,
) -> Result<Blocks<'a>> {
    let sig = &algs[0].signature;
    let mut counts = Vec::with_capacity(algs.len());
    let mut offsets = Vec::with_capacity(algs.len());
    let mut total = 0u64;
    for alg in algs {
        if !alg.signature.compatible(sig) {
            return Err(Error::AlgebraMismatch {
                context: "joint refinement needs one shared signature".into(),
            });
        }
        let count = space_size(nvars, alg.carrier, guards)?;
        offsets.push(total as usize);
        total += count;
        if total > guards.max_points {
            return Err(Error::PointsGuard { needed: total as u128, limit: guards.max_points });
        }
        counts.push(count as usize);
    }
    Ok(Blocks { algs: algs.to_vec(), nvars, counts, offsets, total: total as usize })
}

/// Base labels: one per point, equal exactly when the points' kernels
/// agree, comparable across blocks.
fn kernel_labels(b: &Blocks) -> Vec<u32> {
    let mut interner: Interner<Vec<u16>> = Interner::new();
    let mut out = Vec::with_capacity(b.total);
    for (bi, alg) in b.algs.iter().enumerate() {
        let mut tuple = vec![0u8; b.nvars];
        for _ in 0..b.counts[bi] {
            out.push(interner.intern(kernel_signature(alg, &tuple)));
            advance(&mut tuple, alg.carrier);
        }
    }
    out
}

fn count_distinct(labels: &[u32]) -> usize {
    labels.iter().collect::<BTreeSet<_>>().len()
}

/// Refines labels by per-coordinate reachable-label sets until no class
/// splits. Each round keys a point on its old label plus, per coordinate,
/// the set of labels seen along that coordinate's line.
fn refine_to_fixpoint(b: &Blocks, start: Vec<u32>) -> Vec<u32> {
    let mut labels = start;
    let mut classes = count_distinct(&labels);
    loop {
        let mut interner: Interner<Vec<u32>> = Interner::new();
        let mut next = Vec::with_capacity(b.total);
        for (bi, alg) in b.algs.iter().enumerate() {
            let c = alg.carrier;
            let off = b.offsets[bi];
            let strides: Vec<usize> = (0..b.nvars).map(|i| c.pow(i as u32)).collect();
            let mut tuple = vec![0u8; b.nvars];
            let mut line = Vec::with_capacity(c);
            for local in 0..b.counts[bi] {
                let mut key = Vec::with_capacity(1 + b.nvars * (c + 1));
                key.push(labels[off + local]);
                for (i, &stride) in strides.iter().enumerate() {
                    let base = local - tuple[i] as usize * stride;
                    line.clear();
                    line.extend((0..c).map(|v| labels[off + base + v * stride]));
                    line.sort_unstable();
                    line.dedup();
                    key.push(line.len() as u32);
                    key.extend_from_slice(&line);
                }
                next.push(interner.intern(key));
                advance(&mut tuple, c);
            }
        }
        let refined = interner.len();
        labels = next;
        if refined == classes {
            return labels;
        }
        classes = refined;
    }
}

/// Projects enlarged-space labels back to the base space: each base point
/// is keyed on the set of labels of all its extensions.
fn project_labels(enl: &Blocks, base: &Blocks, ext_vars: usize, labels: &[u32]) -> Vec<u32> {
    let mut interner: Interner<Vec<u32>> = Interner::new();
    let mut out = Vec::with_capacity(base.total);
    for (bi, alg) in base.algs.iter().enumerate() {
        let c = alg.carrier;
        let stride = c.pow(base.nvars as u32);
        let ext = c.pow(ext_vars as u32);
        for local in 0..base.counts[bi] {
            let mut s: Vec<u32> =
                (0..ext).map(|q| labels[enl.offsets[bi] + local + q * stride]).collect();
            s.sort_unstable();
            s.dedup();
            out.push(interner.intern(s));
        }
    }
    out
}

/// The kernel partition: two points fall together exactly when every
/// pair of terms agreeing at one agrees at the other.
pub fn tau_partition(alg: &FiniteAlgebra, sort: &VarSort, guards: &Guards) -> Result<Partition> {
    let b = make_blocks(&[alg], sort.len(), guards)?;
    Ok(Partition::from_labels(&kernel_labels(&b)))
}

/// The partition induced by plain-fragment formulas whose variables all
/// come from a width-`k` pool containing the sort. `k` equal to the sort
/// size runs the fixpoint in place; larger `k` widens the sort and
/// projects back.
pub fn pebble_partition(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    k: usize,
    guards: &Guards,
) -> Result<Partition> {
    if k < sort.len() {
        return Err(Error::Precondition {
            detail: format!("width {k} is below the sort size {}", sort.len()),
        });
    }
    let base = make_blocks(&[alg], sort.len(), guards)?;
    if k == sort.len() {
        let labels = refine_to_fixpoint(&base, kernel_labels(&base));
        return Ok(Partition::from_labels(&labels));
    }
    let enl = make_blocks(&[alg], k, guards)?;
    let labels = refine_to_fixpoint(&enl, kernel_labels(&enl));
    Ok(Partition::from_labels(&project_labels(&enl, &base, k - sort.len(), &labels)))
}

/// Result of the widening escalation. `converged` is false when the
/// escalation hit the width ceiling or a space guard before two
/// consecutive projections agreed; the partition is then the last one
/// computed and may still be too coarse.
#[derive(Debug, Clone)]
pub struct RhoOutcome {
    pub partition: Partition,
    pub aux_vars_used: usize,
    pub converged: bool,
}

fn rho_joint(algs: &[&FiniteAlgebra], nvars: usize, guards: &Guards) -> Result<RhoOutcome> {
    let base = make_blocks(algs, nvars, guards)?;
    let mut prev = Partition::from_labels(&refine_to_fixpoint(&base, kernel_labels(&base)));
    let width_cap = algs.iter().map(|a| a.carrier).max().unwrap_or(1);
    for j in 1..=width_cap {
        let enl = match make_blocks(algs, nvars + j, guards) {
            Ok(e) => e,
            Err(Error::PointsGuard { .. }) => {
                return Ok(RhoOutcome { partition: prev, aux_vars_used: j - 1, converged: false })
            }
            Err(e) => return Err(e),
        };
        let labels = refine_to_fixpoint(&enl, kernel_labels(&enl));
        let proj = Partition::from_labels(&project_labels(&enl, &base, j, &labels));
        if proj == prev {
            return Ok(RhoOutcome { partition: proj, aux_vars_used: j, converged: true });
        }
        prev = proj;
    }
    Ok(RhoOutcome { partition: prev, aux_vars_used: width_cap, converged: false })
}

/// The logical indistinguishability partition: points satisfying the
/// same formulas, approximated by widening until stable.
pub fn rho_partition(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    guards: &Guards,
) -> Result<RhoOutcome> {
    rho_joint(&[alg], sort.len(), guards)
}

/// Orbits of the point space under the automorphism group acting
/// coordinatewise.
pub fn orbit_partition(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    aut: &AutGroup,
    guards: &Guards,
) -> Result<Partition> {
    let count = space_size(sort.len(), alg.carrier, guards)? as usize;
    let mut labels = Vec::with_capacity(count);
    let mut tuple = vec![0u8; sort.len()];
    let mut mapped = vec![0u8; sort.len()];
    for _ in 0..count {
        let mut best = u64::MAX;
        for perm in &aut.perms {
            for (m, &v) in mapped.iter_mut().zip(tuple.iter()) {
                *m = perm[v as usize];
            }
            best = best.min(point_index(&mapped, alg.carrier));
        }
        labels.push(best);
        advance(&mut tuple, alg.carrier);
    }
    Ok(Partition::from_labels(&labels))
}

/// All three partitions side by side, with the inclusion checks that
/// must hold between them.
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub orbit: Partition,
    pub rho: RhoOutcome,
    pub tau: Partition,
    pub orbit_refines_rho: bool,
    pub rho_refines_tau: bool,
}

pub fn chain_check(alg: &FiniteAlgebra, sort: &VarSort, guards: &Guards) -> Result<ChainReport> {
    let aut = automorphisms(alg, guards)?;
    let orbit = orbit_partition(alg, sort, &aut, guards)?;
    let rho = rho_partition(alg, sort, guards)?;
    let tau = tau_partition(alg, sort, guards)?;
    let orbit_refines_rho = orbit.refines(&rho.partition);
    let rho_refines_tau = rho.partition.refines(&tau);
    Ok(ChainReport { orbit, rho, tau, orbit_refines_rho, rho_refines_tau })
}

// ---------------------------------------------------------------------------
// Separating formulas.

/// An open formula telling two points of one space apart. The formula is
/// stated over `sort` (the point sort plus auxiliary quantified
/// variables); its free variables lie in the point sort.
#[derive(Debug, Clone)]
pub struct Separation {
    pub sort: VarSort,
    pub formula: Formula,
    pub holds_at: Point,
    pub fails_at: Point,
}

const SEARCH_AUX_CAP: usize = 2;
const SEARCH_DEPTH_CAP: usize = 3;

fn exists_chain(mut f: Formula, aux: core::ops::Range<usize>) -> Formula {
    for idx in aux.rev() {
        f = Formula::exists(idx, f);
    }
    f
}

fn forall_chain(mut f: Formula, aux: core::ops::Range<usize>) -> Formula {
    for idx in aux.rev() {
        f = Formula::forall(idx, f);
    }
    f
}

/// Exact window of a point: every representative pair, asserted or
/// denied as it holds there.
fn window_formula_at(reps: &TermReps, pidx: usize) -> Formula {
    let mut parts = Vec::new();
    for j in 1..reps.terms.len() {
        for i in 0..j {
            let atom = Formula::Equality(reps.terms[j].clone(), reps.terms[i].clone());
            parts.push(if reps.vv[i][pidx] == reps.vv[j][pidx] {
                atom
            } else {
                Formula::not(atom)
            });
        }
    }
    Formula::conjunction(parts)
        .unwrap_or(Formula::Equality(Term::Var(0), Term::Var(0)))
}

fn window_key(reps: &TermReps, pidx: usize) -> Vec<u32> {
    let mut key = Vec::new();
    for j in 1..reps.terms.len() {
        for i in 0..j {
            if reps.vv[i][pidx] == reps.vv[j][pidx] {
                key.push(((i as u32) << 16) | j as u32);
            }
        }
    }
    key
}

/// Searches for a formula separating two points of the same space,
/// trying single quantified atoms first and exact windows after. Returns
/// `None` when the bounded search is exhausted.
fn separating_formula(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    mu_idx: u64,
    nu_idx: u64,
    guards: &Guards,
) -> Result<Option<Separation>> {
    let n = sort.len();
    let c = alg.carrier;
    let stride = c.pow(n as u32);
    let mu = Point::from_index(mu_idx, n, c);
    let nu = Point::from_index(nu_idx, n, c);
    let oriented = |f: Formula, e_sort: &VarSort, at_mu: bool| Separation {
        sort: e_sort.clone(),
        formula: f,
        holds_at: if at_mu { mu.clone() } else { nu.clone() },
        fails_at: if at_mu { nu.clone() } else { mu.clone() },
    };
    for j in 1..=SEARCH_AUX_CAP {
        let e_sort = sort.extend_fresh(j, &alg.signature);
        let reps = match term_reps(&e_sort, &[alg], SEARCH_DEPTH_CAP, guards) {
            Ok(r) => r,
            Err(Error::PointsGuard { .. }) => break,
            Err(e) => return Err(e),
        };
        let ext = c.pow(j as u32) as usize;
        let agree =
            |i: usize, jr: usize, base: u64, q: usize| -> bool {
                let p = base as usize + q * stride as usize;
                reps.vv[i][p] == reps.vv[jr][p]
            };
        for jr in 1..reps.terms.len() {
            for i in 0..jr {
                let atom = Formula::Equality(reps.terms[jr].clone(), reps.terms[i].clone());
                let em = (0..ext).any(|q| agree(i, jr, mu_idx, q));
                let en = (0..ext).any(|q| agree(i, jr, nu_idx, q));
                if em != en {
                    let f = exists_chain(atom, n..n + j);
                    return Ok(Some(oriented(f, &e_sort, em)));
                }
                let am = (0..ext).all(|q| agree(i, jr, mu_idx, q));
                let an = (0..ext).all(|q| agree(i, jr, nu_idx, q));
                if am != an {
                    let f = forall_chain(atom, n..n + j);
                    return Ok(Some(oriented(f, &e_sort, am)));
                }
            }
        }
        // Fallback: some extension of one point realizes a window no
        // extension of the other does.
        let keys = |base: u64| -> BTreeSet<Vec<u32>> {
            (0..ext).map(|q| window_key(&reps, base as usize + q * stride as usize)).collect()
        };
        let mu_keys = keys(mu_idx);
        let nu_keys = keys(nu_idx);
        for (source, other_keys, at_mu) in
            [(mu_idx, &nu_keys, true), (nu_idx, &mu_keys, false)]
        {
            if let Some(q) = (0..ext).find(|&q| {
                !other_keys.contains(&window_key(&reps, source as usize + q * stride as usize))
            }) {
                let body = window_formula_at(&reps, source as usize + q * stride as usize);
                let f = exists_chain(body, n..n + j);
                return Ok(Some(oriented(f, &e_sort, at_mu)));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Classification reports.

#[derive(Debug, Clone)]
pub struct PerfectionReport {
    pub logically_perfect: bool,
    pub strictly_perfect: bool,
    pub rho_converged: bool,
    pub aux_vars_used: usize,
    pub orbit_classes: u32,
    pub rho_classes: u32,
    pub pebble_classes: u32,
}

/// Compares orbits with the logical partitions: logically perfect when
/// indistinguishability coincides with orbits, strictly perfect when the
/// width-bounded fragment already does.
pub fn perfection(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    guards: &Guards,
) -> Result<PerfectionReport> {
    let aut = automorphisms(alg, guards)?;
    let orbit = orbit_partition(alg, sort, &aut, guards)?;
    let rho = rho_partition(alg, sort, guards)?;
    let pebble = pebble_partition(alg, sort, sort.len(), guards)?;
    Ok(PerfectionReport {
        logically_perfect: rho.partition == orbit,
        strictly_perfect: pebble == orbit,
        rho_converged: rho.converged,
        aux_vars_used: rho.aux_vars_used,
        orbit_classes: orbit.num_classes(),
        rho_classes: rho.partition.num_classes(),
        pebble_classes: pebble.num_classes(),
    })
}

#[derive(Debug, Clone)]
pub struct HomogeneityReport {
    pub homogeneous: bool,
    pub tau_classes: u32,
    pub orbit_classes: u32,
    /// For a non-homogeneous algebra: a formula telling apart two
    /// kernel-equal points in different orbits, if the bounded search
    /// found one.
    pub separating: Option<Separation>,
}

/// An algebra is homogeneous over the sort when kernel equality already
/// implies orbit equality.
pub fn homogeneity(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    guards: &Guards,
) -> Result<HomogeneityReport> {
    let aut = automorphisms(alg, guards)?;
    let orbit = orbit_partition(alg, sort, &aut, guards)?;
    let tau = tau_partition(alg, sort, guards)?;
    if tau == orbit {
        return Ok(HomogeneityReport {
            homogeneous: true,
            tau_classes: tau.num_classes(),
            orbit_classes: orbit.num_classes(),
            separating: None,
        });
    }
    let mut separating = None;
    'outer: for class in tau.classes() {
        let first_orbit = orbit.class_of(class[0]);
        for &p in &class[1..] {
            if orbit.class_of(p) != first_orbit {
                separating = separating_formula(alg, sort, class[0], p, guards)?;
                break 'outer;
            }
        }
    }
    Ok(HomogeneityReport {
        homogeneous: false,
        tau_classes: tau.num_classes(),
        orbit_classes: orbit.num_classes(),
        separating,
    })
}

#[derive(Debug, Clone)]
pub struct TypeCensusRow {
    pub representative: Point,
    pub size: u64,
    /// Whether the class is exactly one automorphism orbit.
    pub matches_orbit: bool,
    /// A formula whose value is exactly this class, present when the
    /// class is already cut out by its kernel.
    pub defining: Option<Formula>,
}

#[derive(Debug, Clone)]
pub struct TypeCensus {
    pub rows: Vec<TypeCensusRow>,
    pub aux_vars_used: usize,
    pub converged: bool,
}

const CENSUS_WINDOW_DEPTH_CAP: usize = 8;

/// One row per indistinguishability class, with orbit comparison and a
/// defining formula where the kernel alone pins the class down.
pub fn type_census(alg: &FiniteAlgebra, sort: &VarSort, guards: &Guards) -> Result<TypeCensus> {
    let rho = rho_partition(alg, sort, guards)?;
    let tau = tau_partition(alg, sort, guards)?;
    let aut = automorphisms(alg, guards)?;
    let orbit = orbit_partition(alg, sort, &aut, guards)?;
    let mut rows = Vec::new();
    for class in rho.partition.classes() {
        let rep_idx = class[0];
        let representative = Point::from_index(rep_idx, sort.len(), alg.carrier);
        let matches_orbit = orbit.class_points(orbit.class_of(rep_idx)) == class;
        let tau_class = tau.class_points(tau.class_of(rep_idx));
        let defining = if tau_class == class {
            defining_window(alg, sort, rep_idx, &class, guards)?
        } else {
            None
        };
        rows.push(TypeCensusRow {
            representative,
            size: class.len() as u64,
            matches_orbit,
            defining,
        });
    }
    Ok(TypeCensus { rows, aux_vars_used: rho.aux_vars_used, converged: rho.converged })
}

/// Escalates the window depth until the exact-window formula's value
/// shrinks to the class. The value can only shrink with depth, so the
/// loop stops as soon as it stalls strictly above the class. The window
/// that pins the class is pruned before it is returned.
fn defining_window(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    rep_idx: u64,
    class: &[u64],
    guards: &Guards,
) -> Result<Option<Formula>> {
    let mut last_size = u64::MAX;
    for depth in 1..=CENSUS_WINDOW_DEPTH_CAP {
        let reps = match term_reps(sort, &[alg], depth, guards) {
            Ok(r) => r,
            Err(Error::PointsGuard { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let f = window_formula_at(&reps, rep_idx as usize);
        let val = value(&f, sort, alg, guards)?;
        if val.len() == class.len() as u64 && class.iter().all(|&p| val.contains(p)) {
            return pruned_window(&reps, rep_idx as usize, &val, sort, alg, guards).map(Some);
        }
        if val.len() == last_size {
            return Ok(None);
        }
        last_size = val.len();
    }
    Ok(None)
}

/// Drops window conjuncts whose removal leaves the pinned value intact,
/// so census rows show a short formula instead of the raw quadratic
/// window. One left-to-right pass against precomputed suffix
/// intersections decides every atom; a kept atom stays necessary because
/// later drops only enlarge the suffix, so the result is irredundant.
fn pruned_window<'a>(
    reps: &TermReps,
    pidx: usize,
    target: &PointSet<'a>,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<Formula> {
    let count = space_size(sort.len(), alg.carrier, guards)?;
    let mut atoms = Vec::new();
    for j in 1..reps.terms.len() {
        for i in 0..j {
            let held = reps.vv[i][pidx] == reps.vv[j][pidx];
            let mut set = PointSet::empty(sort, alg, guards)?;
            for p in 0..count {
                if (reps.vv[i][p as usize] == reps.vv[j][p as usize]) == held {
                    set.insert(p);
                }
            }
            let atom = Formula::Equality(reps.terms[j].clone(), reps.terms[i].clone());
            atoms.push((if held { atom } else { Formula::not(atom) }, set));
        }
    }
    // Deep pairs scan first so they are the first dropped; the survivors
    // lean on the shallowest terms that still pin the class.
    atoms.reverse();
    let mut suffix = vec![PointSet::full(sort, alg, guards)?];
    for (_, set) in atoms.iter().rev() {
        let next = suffix.last().unwrap().intersect(set)?;
        suffix.push(next);
    }
    suffix.reverse();
    let mut cur = PointSet::full(sort, alg, guards)?;
    let mut kept = Vec::new();
    for (k, (f, set)) in atoms.into_iter().enumerate() {
        if cur.intersect(&suffix[k + 1])? == *target {
            continue;
        }
        cur = cur.intersect(&set)?;
        kept.push(f);
    }
    kept.reverse();
    Ok(Formula::conjunction(kept).unwrap_or(Formula::Equality(Term::Var(0), Term::Var(0))))
}

// ---------------------------------------------------------------------------
// Cross-algebra type sharing.

/// A closed formula whose truth differs between the two algebras.
#[derive(Debug, Clone)]
pub struct ClosedWitness {
    pub sort: VarSort,
    pub formula: Formula,
    pub holds_in_first: bool,
}

#[derive(Debug, Clone)]
pub struct IsotypedReport {
    pub isotyped: bool,
    pub aux_vars_used: usize,
    pub converged: bool,
    pub witness: Option<ClosedWitness>,
}

fn numbered_sort(k: usize) -> VarSort {
    let names: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    VarSort::new(&refs).expect("generated names are valid and distinct")
}

/// Two algebras share their types over a sort of the given width when
/// the joint refinement leaves no class populated from one side only.
pub fn isotyped(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    nvars: usize,
    guards: &Guards,
) -> Result<IsotypedReport> {
    if !h1.signature.compatible(&h2.signature) {
        return Err(Error::AlgebraMismatch {
            context: "type comparison needs one shared signature".into(),
        });
    }
    if nvars == 0 {
        return Err(Error::Precondition { detail: "type comparison needs at least one variable".into() });
    }
    let out = rho_joint(&[h1, h2], nvars, guards)?;
    let split = space_size(nvars, h1.carrier, guards)? as usize;
    let classes = out.partition.num_classes() as usize;
    let mut meets_first = vec![false; classes];
    let mut meets_second = vec![false; classes];
    for i in 0..out.partition.len() {
        let c = out.partition.class_of(i as u64) as usize;
        if i < split {
            meets_first[c] = true;
        } else {
            meets_second[c] = true;
        }
    }
    let verdict = meets_first.iter().zip(&meets_second).all(|(a, b)| a == b);
    let witness = if verdict {
        None
    } else {
        match closed_atom_witness(h1, h2, guards)? {
            Some(w) => Some(w),
            None => closed_window_witness(h1, h2, guards)?,
        }
    };
    Ok(IsotypedReport {
        isotyped: verdict,
        aux_vars_used: out.aux_vars_used,
        converged: out.converged,
        witness,
    })
}

const WITNESS_VARS_CAP: usize = 3;

/// Closed sentences of the shape `E/A x1..xk. atom`, tried in canonical
/// representative order.
fn closed_atom_witness(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    guards: &Guards,
) -> Result<Option<ClosedWitness>> {
    for k in 1..=WITNESS_VARS_CAP {
        let sort = numbered_sort(k);
        let reps = match term_reps(&sort, &[h1, h2], SEARCH_DEPTH_CAP, guards) {
            Ok(r) => r,
            Err(Error::PointsGuard { .. }) => break,
            Err(e) => return Err(e),
        };
        let split = reps.offsets[1];
        let total = reps.vv.first().map_or(0, Vec::len);
        for jr in 1..reps.terms.len() {
            for i in 0..jr {
                let eq = |p: usize| reps.vv[i][p] == reps.vv[jr][p];
                let ex1 = (0..split).any(&eq);
                let ex2 = (split..total).any(&eq);
                let atom = Formula::Equality(reps.terms[jr].clone(), reps.terms[i].clone());
                if ex1 != ex2 {
                    let f = exists_chain(atom, 0..k);
                    return Ok(Some(ClosedWitness { sort, formula: f, holds_in_first: ex1 }));
                }
                let all1 = (0..split).all(&eq);
                let all2 = (split..total).all(&eq);
                if all1 != all2 {
                    let f = forall_chain(atom, 0..k);
                    return Ok(Some(ClosedWitness { sort, formula: f, holds_in_first: all1 }));
                }
            }
        }
    }
    Ok(None)
}

/// Closed sentences asserting that some tuple realizes an exact window
/// seen on one side only.
fn closed_window_witness(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    guards: &Guards,
) -> Result<Option<ClosedWitness>> {
    for k in 1..=WITNESS_VARS_CAP {
        let sort = numbered_sort(k);
        for depth in 2..=SEARCH_DEPTH_CAP + 1 {
            let reps = match term_reps(&sort, &[h1, h2], depth, guards) {
                Ok(r) => r,
                Err(Error::PointsGuard { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let split = reps.offsets[1];
            let total = reps.vv.first().map_or(0, Vec::len);
            let keys1: BTreeSet<Vec<u32>> = (0..split).map(|p| window_key(&reps, p)).collect();
            let keys2: BTreeSet<Vec<u32>> =
                (split..total).map(|p| window_key(&reps, p)).collect();
            if let Some(p) = (0..split).find(|&p| !keys2.contains(&window_key(&reps, p))) {
                let f = exists_chain(window_formula_at(&reps, p), 0..k);
                return Ok(Some(ClosedWitness { sort, formula: f, holds_in_first: true }));
            }
            if let Some(p) =
                (split..total).find(|&p| !keys1.contains(&window_key(&reps, p)))
            {
                let f = exists_chain(window_formula_at(&reps, p), 0..k);
                return Ok(Some(ClosedWitness { sort, formula: f, holds_in_first: false }));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Censuses.

#[derive(Debug, Clone)]
pub struct ExponentCensusRow {
    /// Elements of the coefficient subgroup, as little-endian coefficient
    /// vectors.
    pub subgroup: Vec<Vec<u8>>,
    pub formula: Formula,
    pub value_size: u64,
    /// Nonempty and exactly one orbit of the automorphism group.
    pub single_orbit: bool,
}

#[derive(Debug, Clone)]
pub struct ExponentCensus {
    pub algebra: FiniteAlgebra,
    pub sort: VarSort,
    pub rows: Vec<ExponentCensusRow>,
}

/// For each subgroup `T` of the coefficient space of width `n` over the
/// prime `p`, the formula asserting that exactly the combinations in `T`
/// vanish, evaluated over the elementary algebra of rank `m`.
pub fn exponent_p_census(
    p: u32,
    m: usize,
    n: usize,
    guards: &Guards,
) -> Result<ExponentCensus> {
    let alg = FiniteAlgebra::elementary_abelian(p, m)?;
    let sort = numbered_sort(n);
    let ops = alg.signature.group_ops().expect("elementary algebras are group-like");
    let coeff_count = (p as usize)
        .checked_pow(n as u32)
        .filter(|&c| c <= 4096)
        .ok_or(Error::Precondition { detail: "coefficient space too large".into() })?;
    let vectors: Vec<Vec<u8>> = (0..coeff_count)
        .map(|idx| {
            let mut v = vec![0u8; n];
            let mut rest = idx;
            for slot in v.iter_mut() {
                *slot = (rest % p as usize) as u8;
                rest /= p as usize;
            }
            v
        })
        .collect();
    let subgroups = coefficient_subgroups(p, &vectors);
    let aut = automorphisms(&alg, guards)?;
    let mut rows = Vec::new();
    for subgroup in subgroups {
        let mut parts = Vec::new();
        for (idx, vector) in vectors.iter().enumerate() {
            if vector.iter().all(|&c| c == 0) {
                continue;
            }
            let atom =
                Formula::Equality(linear_term(ops.mul, ops.unit, vector), Term::app(ops.unit, Vec::new()));
            parts.push(if subgroup.contains(&idx) { atom } else { Formula::not(atom) });
        }
        let formula = Formula::conjunction(parts).expect("a nonzero coefficient always exists");
        let val = value(&formula, &sort, &alg, guards)?;
        let single_orbit = match val.iter_indices().next() {
            None => false,
            Some(first) => {
                let orbit = point_orbit(&alg, &aut, first, sort.len());
                val.len() == orbit.len() as u64 && orbit.iter().all(|&i| val.contains(i))
            }
        };
        rows.push(ExponentCensusRow {
            subgroup: subgroup.iter().map(|&i| vectors[i].clone()).collect(),
            formula,
            value_size: val.len(),
            single_orbit,
        });
    }
    Ok(ExponentCensus { algebra: alg, sort, rows })
}

/// All subgroups of the coefficient space, each a sorted list of vector
/// indices, ordered by size then lexicographically.
fn coefficient_subgroups(p: u32, vectors: &[Vec<u8>]) -> Vec<Vec<usize>> {
    let n = vectors[0].len();
    let index_of = |v: &[u8]| -> usize {
        v.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize)
    };
    let add = |a: usize, b: usize| -> usize {
        let mut sum = vec![0u8; n];
        for (i, slot) in sum.iter_mut().enumerate() {
            *slot = ((vectors[a][i] as u32 + vectors[b][i] as u32) % p) as u8;
        }
        index_of(&sum)
    };
    let close = |seed: &BTreeSet<usize>| -> Vec<usize> {
        let mut set = seed.clone();
        set.insert(0);
        loop {
            let snapshot: Vec<usize> = set.iter().copied().collect();
            let before = set.len();
            for &a in &snapshot {
                for &b in &snapshot {
                    set.insert(add(a, b));
                }
            }
            if set.len() == before {
                return set.into_iter().collect();
            }
        }
    };
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut queue: Vec<Vec<usize>> = vec![close(&BTreeSet::new())];
    seen.insert(queue[0].clone());
    while let Some(subgroup) = queue.pop() {
        for w in 0..vectors.len() {
            if subgroup.binary_search(&w).is_err() {
                let mut seed: BTreeSet<usize> = subgroup.iter().copied().collect();
                seed.insert(w);
                let bigger = close(&seed);
                if seen.insert(bigger.clone()) {
                    queue.push(bigger);
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
    out.sort_by_key(|s| (s.len(), s.clone()));
    out
}

/// `x1^c1 * x2^c2 * ...` as a left-leaning product chain; the zero
/// vector yields the unit.
fn linear_term(mul: usize, unit: usize, coeffs: &[u8]) -> Term {
    let mut acc: Option<Term> = None;
    for (i, &c) in coeffs.iter().enumerate() {
        for _ in 0..c {
            acc = Some(match acc {
                None => Term::Var(i),
                Some(t) => Term::app(mul, vec![t, Term::Var(i)]),
            });
        }
    }
    acc.unwrap_or(Term::App(unit, Vec::new()))
}

fn point_orbit(alg: &FiniteAlgebra, aut: &AutGroup, idx: u64, nvars: usize) -> Vec<u64> {
    let point = Point::from_index(idx, nvars, alg.carrier);
    let mut mapped = vec![0u8; nvars];
    let mut orbit: BTreeSet<u64> = BTreeSet::new();
    for perm in &aut.perms {
        for (m, &v) in mapped.iter_mut().zip(point.values.iter()) {
            *m = perm[v as usize];
        }
        orbit.insert(point_index(&mapped, alg.carrier));
    }
    orbit.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct OrderCensusRow {
    pub orders: Vec<u32>,
    pub formula: Formula,
    pub value_size: u64,
    pub single_orbit: bool,
}

#[derive(Debug, Clone)]
pub struct OrderCensus {
    pub rows: Vec<OrderCensusRow>,
}

/// For each realized tuple of element orders, the formula pinning the
/// order of every variable, with a per-row check whether its value is a
/// single orbit. Requires a commutative group-like algebra whose
/// exponent is squarefree.
pub fn order_formula_census(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    guards: &Guards,
) -> Result<OrderCensus> {
    let ops = alg.signature.group_ops().ok_or(Error::Precondition {
        detail: "order census needs a group-like signature".into(),
    })?;
    for a in 0..alg.carrier as u8 {
        for b in 0..alg.carrier as u8 {
            if alg.op_value(ops.mul, &[a, b]) != alg.op_value(ops.mul, &[b, a]) {
                return Err(Error::Precondition {
                    detail: "order census needs a commutative product".into(),
                });
            }
        }
    }
    let unit = alg.op_value(ops.unit, &[]);
    let order_of = |g: u8| -> u32 {
        let mut acc = g;
        let mut k = 1u32;
        while acc != unit {
            acc = alg.op_value(ops.mul, &[acc, g]);
            k += 1;
        }
        k
    };
    let orders: Vec<u32> = (0..alg.carrier as u8).map(order_of).collect();
    let exponent = orders.iter().fold(1u64, |acc, &o| lcm(acc, o as u64));
    let mut d = 2u64;
    while d * d <= exponent {
        if exponent % (d * d) == 0 {
            return Err(Error::Precondition {
                detail: format!("exponent {exponent} is divisible by {}", d * d),
            });
        }
        d += 1;
    }
    let count = space_size(sort.len(), alg.carrier, guards)?;
    let mut by_tuple: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    let mut tuple = vec![0u8; sort.len()];
    for idx in 0..count {
        let key: Vec<u32> = tuple.iter().map(|&v| orders[v as usize]).collect();
        by_tuple.entry(key).or_default().push(idx);
        advance(&mut tuple, alg.carrier);
    }
    let aut = automorphisms(alg, guards)?;
    let mut rows = Vec::new();
    for (order_tuple, points) in by_tuple {
        let parts: Vec<Formula> = order_tuple
            .iter()
            .enumerate()
            .map(|(i, &m)| order_formula(ops.mul, ops.unit, i, m))
            .collect();
        let formula = Formula::conjunction(parts).expect("sorts are nonempty");
        let val = value(&formula, sort, alg, guards)?;
        let orbit = point_orbit(alg, &aut, points[0], sort.len());
        let single_orbit =
            val.len() == orbit.len() as u64 && orbit.iter().all(|&i| val.contains(i));
        rows.push(OrderCensusRow {
            orders: order_tuple,
            formula,
            value_size: val.len(),
            single_orbit,
        });
    }
    Ok(OrderCensus { rows })
}

/// `x^k` as a left-leaning product chain.
fn power_term(mul: usize, unit: usize, x: usize, k: u32) -> Term {
    if k == 0 {
        return Term::App(unit, Vec::new());
    }
    let mut acc = Term::Var(x);
    for _ in 1..k {
        acc = Term::app(mul, vec![acc, Term::Var(x)]);
    }
    acc
}

/// The formula stating that variable `x` has exact order `m`.
fn order_formula(mul: usize, unit: usize, x: usize, m: u32) -> Formula {
    let e = Term::App(unit, Vec::new());
    if m == 1 {
        return Formula::Equality(Term::Var(x), e);
    }
    let mut parts = vec![
        Formula::not(Formula::Equality(Term::Var(x), e.clone())),
        Formula::Equality(power_term(mul, unit, x, m), e.clone()),
    ];
    for d in 2..m {
        if m % d == 0 {
            parts.push(Formula::not(Formula::Equality(power_term(mul, unit, x, d), e.clone())));
        }
    }
    Formula::conjunction(parts).expect("at least two parts")
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval_at_point, in_theory, parse_formula, print_formula};

    fn guards() -> Guards {
        Guards::default()
    }

    fn sort_x() -> VarSort {
        VarSort::new(&["x"]).unwrap()
    }

    #[test]
    fn kernel_partition_of_the_cyclic_four_group() {
        let alg = FiniteAlgebra::cyclic(4).unwrap();
        let tau = tau_partition(&alg, &sort_x(), &guards()).unwrap();
        // Classes by element order: {0}, {2}, {1, 3}.
        assert_eq!(tau.num_classes(), 3);
        assert_eq!(tau.class_of(1), tau.class_of(3));
        assert_ne!(tau.class_of(1), tau.class_of(2));
    }

    #[test]
    fn widening_splits_the_square_from_the_non_squares() {
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z4).unwrap();
        let sort = sort_x();
        let pebble = pebble_partition(&p, &sort, 1, &guards()).unwrap();
        assert_eq!(pebble.num_classes(), 3);
        assert_eq!(pebble.class_of(2), pebble.class_of(4));
        let rho = rho_partition(&p, &sort, &guards()).unwrap();
        assert!(rho.converged);
        assert_eq!(rho.partition.num_classes(), 4);
        assert_ne!(rho.partition.class_of(2), rho.partition.class_of(4));
        assert_eq!(rho.partition.class_of(4), rho.partition.class_of(6));
        assert!(rho.partition.refines(&pebble));
    }

    #[test]
    fn chain_of_partitions_on_the_quaternions() {
        let q8 = FiniteAlgebra::quaternion8();
        let report = chain_check(&q8, &sort_x(), &guards()).unwrap();
        assert!(report.orbit_refines_rho);
        assert!(report.rho_refines_tau);
    }

    #[test]
    fn cyclic_groups_are_perfect_and_homogeneous() {
        let z6 = FiniteAlgebra::cyclic(6).unwrap();
        let p = perfection(&z6, &sort_x(), &guards()).unwrap();
        assert!(p.logically_perfect);
        assert!(p.strictly_perfect);
        let h = homogeneity(&z6, &sort_x(), &guards()).unwrap();
        assert!(h.homogeneous);
    }

    #[test]
    fn the_two_by_four_group_is_perfect_but_not_homogeneous() {
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z4).unwrap();
        let sort = sort_x();
        let perf = perfection(&p, &sort, &guards()).unwrap();
        assert!(perf.logically_perfect);
        assert!(!perf.strictly_perfect);
        let hom = homogeneity(&p, &sort, &guards()).unwrap();
        assert!(!hom.homogeneous);
        let sep = hom.separating.expect("a separating formula should be found");
        // The search lands on the squareness test.
        assert_eq!(
            print_formula(&sep.formula, &p.signature, &sep.sort),
            "E y. y * y == x"
        );
        assert!(eval_at_point(&sep.formula, &[sep.holds_at.values[0], 0], &p));
        assert!(!eval_at_point(&sep.formula, &[sep.fails_at.values[0], 0], &p));
    }

    #[test]
    fn type_census_of_the_cyclic_six_group() {
        let z6 = FiniteAlgebra::cyclic(6).unwrap();
        let census = type_census(&z6, &sort_x(), &guards()).unwrap();
        assert!(census.converged);
        // Orders 1, 2, 3, 6 give four classes of sizes 1, 1, 2, 2.
        assert_eq!(census.rows.len(), 4);
        let mut sizes: Vec<u64> = census.rows.iter().map(|r| r.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 2, 2]);
        for row in &census.rows {
            assert!(row.matches_orbit);
            let f = row.defining.as_ref().expect("cyclic classes are kernel-cut");
            let val = value(f, &sort_x(), &z6, &guards()).unwrap();
            assert_eq!(val.len(), row.size);
            assert!(val.contains(row.representative.index(6)));
        }
    }

    #[test]
    fn isomorphic_groups_are_isotyped() {
        let z6 = FiniteAlgebra::cyclic(6).unwrap();
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z3 = FiniteAlgebra::cyclic(3).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z3).unwrap();
        for nvars in 1..=2 {
            let report = isotyped(&z6, &p, nvars, &guards()).unwrap();
            assert!(report.isotyped, "width {nvars}");
            assert!(report.witness.is_none());
        }
    }

    #[test]
    fn the_two_groups_of_order_four_are_told_apart() {
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let v4 = FiniteAlgebra::direct_product(&z2, &z2).unwrap();
        let report = isotyped(&z4, &v4, 1, &guards()).unwrap();
        assert!(!report.isotyped);
        let w = report.witness.expect("witness expected");
        assert!(w.formula.free_vars().is_empty());
        let in_z4 = in_theory(&w.formula, &w.sort, &z4, &guards()).unwrap();
        let in_v4 = in_theory(&w.formula, &w.sort, &v4, &guards()).unwrap();
        assert_ne!(in_z4, in_v4);
        assert_eq!(in_z4, w.holds_in_first);
    }

    #[test]
    fn noncommutativity_separates_the_symmetric_group() {
        let z6 = FiniteAlgebra::cyclic(6).unwrap();
        let s3 = FiniteAlgebra::dihedral(3).unwrap();
        let report = isotyped(&z6, &s3, 1, &guards()).unwrap();
        assert!(!report.isotyped);
        let w = report.witness.expect("witness expected");
        let in_z6 = in_theory(&w.formula, &w.sort, &z6, &guards()).unwrap();
        let in_s3 = in_theory(&w.formula, &w.sort, &s3, &guards()).unwrap();
        assert_ne!(in_z6, in_s3);
    }

    #[test]
    fn exponent_census_of_the_one_variable_ternary_case() {
        let census = exponent_p_census(3, 2, 1, &guards()).unwrap();
        // The coefficient line over three elements has two subgroups.
        assert_eq!(census.rows.len(), 2);
        let sizes: Vec<u64> = census.rows.iter().map(|r| r.value_size).collect();
        assert_eq!(sizes, vec![8, 1]);
        assert!(census.rows.iter().all(|r| r.single_orbit));
    }

    #[test]
    fn exponent_census_formula_parses_back() {
        let census = exponent_p_census(2, 2, 2, &guards()).unwrap();
        assert_eq!(census.rows.len(), 5);
        for row in &census.rows {
            let printed = print_formula(&row.formula, &census.algebra.signature, &census.sort);
            let reparsed =
                parse_formula(&printed, &census.algebra.signature, &census.sort).unwrap();
            assert_eq!(row.formula, reparsed);
        }
    }

    #[test]
    fn order_census_of_the_cyclic_six_group() {
        let z6 = FiniteAlgebra::cyclic(6).unwrap();
        let census = order_formula_census(&z6, &sort_x(), &guards()).unwrap();
        let orders: Vec<Vec<u32>> = census.rows.iter().map(|r| r.orders.clone()).collect();
        assert_eq!(orders, vec![vec![1], vec![2], vec![3], vec![6]]);
        let sizes: Vec<u64> = census.rows.iter().map(|r| r.value_size).collect();
        assert_eq!(sizes, vec![1, 1, 2, 2]);
        assert!(census.rows.iter().all(|r| r.single_orbit));
    }

    #[test]
    fn order_census_rejects_non_squarefree_exponents() {
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        match order_formula_census(&z4, &sort_x(), &guards()) {
            Err(Error::Precondition { .. }) => {}
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }

    #[test]
    fn shared_prime_components_break_the_orbit_match() {
        // Over two variables the order tuple no longer pins the orbit:
        // (g, g) and (g, g^2) share orders but no automorphism links them.
        let z5 = FiniteAlgebra::cyclic(5).unwrap();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        let census = order_formula_census(&z5, &sort, &guards()).unwrap();
        let row = census.rows.iter().find(|r| r.orders == vec![5, 5]).unwrap();
        assert!(!row.single_orbit);
    }
}
