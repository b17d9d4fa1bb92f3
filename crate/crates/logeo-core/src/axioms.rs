//! Randomized checks of the laws the point-set semantics must satisfy:
//! quantifier behaviour on sets, equality laws, and the interaction of
//! sort maps with connectives, quantifiers and evaluation. Every law runs
//! a fixed number of seeded samples and reports violations instead of
//! panicking, so a broken law shows up as a counted failure with its
//! first counterexample attached.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::FiniteAlgebra;
use crate::formula::{eval_at_point, print_formula, value, Formula};
use crate::signature::{print_term, Signature, Substitution, Term, VarSort};
use crate::space::{
    decode_index, equality_value, eval_point, exists_var, forall_var, point_index, PointSet,
};
use crate::{Guards, Result};

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub name: String,
    pub samples: u32,
    pub violations: u32,
    pub first_failure: Option<String>,
}

/// Runs every law `samples` times against the algebra and sort, all
/// randomness drawn from one seeded stream.
pub fn run_axiom_suite(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    samples: u32,
    seed: u64,
    guards: &Guards,
) -> Result<Vec<AxiomReport>> {
    if sort.is_empty() {
        return Err(crate::Error::Precondition {
            detail: "the axiom suite needs at least one variable".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();
    let sig = &alg.signature;
    let n = sort.len();
    let count = PointSet::full(sort, alg, guards)?.space_len();

    run_law(&mut reports, "exists-of-empty-is-empty", samples, &mut rng, |rng| {
        let x = rng.gen_range(0..n);
        let out = exists_var(&PointSet::empty(sort, alg, guards)?, x)?;
        Ok((!out.is_empty()).then(|| format!("variable {}", sort.name(x))))
    })?;

    run_law(&mut reports, "exists-is-extensive", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        Ok((!a.is_subset_of(&exists_var(&a, x)?)?)
            .then(|| format!("a set of {} points, variable {}", a.len(), sort.name(x))))
    })?;

    run_law(&mut reports, "exists-respects-own-cylinders", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let b = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        let lhs = exists_var(&a.intersect(&exists_var(&b, x)?)?, x)?;
        let rhs = exists_var(&a, x)?.intersect(&exists_var(&b, x)?)?;
        Ok((lhs != rhs).then(|| format!("variable {}", sort.name(x))))
    })?;

    run_law(&mut reports, "forall-of-full-is-full", samples, &mut rng, |rng| {
        let x = rng.gen_range(0..n);
        let out = forall_var(&PointSet::full(sort, alg, guards)?, x)?;
        Ok((!out.is_full()).then(|| format!("variable {}", sort.name(x))))
    })?;

    run_law(&mut reports, "forall-is-contractive", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        Ok((!forall_var(&a, x)?.is_subset_of(&a)?)
            .then(|| format!("a set of {} points, variable {}", a.len(), sort.name(x))))
    })?;

    run_law(&mut reports, "forall-respects-own-cylinders", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let b = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        let lhs = forall_var(&a.union(&forall_var(&b, x)?)?, x)?;
        let rhs = forall_var(&a, x)?.union(&forall_var(&b, x)?)?;
        Ok((lhs != rhs).then(|| format!("variable {}", sort.name(x))))
    })?;

    run_law(&mut reports, "exists-quantifiers-commute", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        let lhs = exists_var(&exists_var(&a, x)?, y)?;
        let rhs = exists_var(&exists_var(&a, y)?, x)?;
        Ok((lhs != rhs).then(|| format!("variables {} and {}", sort.name(x), sort.name(y))))
    })?;

    run_law(&mut reports, "forall-quantifiers-commute", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        let lhs = forall_var(&forall_var(&a, x)?, y)?;
        let rhs = forall_var(&forall_var(&a, y)?, x)?;
        Ok((lhs != rhs).then(|| format!("variables {} and {}", sort.name(x), sort.name(y))))
    })?;

    run_law(&mut reports, "quantifier-duality", samples, &mut rng, |rng| {
        let a = random_set(rng, sort, alg, guards)?;
        let x = rng.gen_range(0..n);
        let lhs = exists_var(&a, x)?;
        let rhs = forall_var(&a.complement(), x)?.complement();
        Ok((lhs != rhs).then(|| format!("variable {}", sort.name(x))))
    })?;

    run_law(&mut reports, "equality-is-reflexive", samples, &mut rng, |rng| {
        let w = random_term(rng, sig, n, 3);
        let out = equality_value(&w, &w, sort, alg, guards)?;
        Ok((!out.is_full()).then(|| print_term(&w, sig, sort)))
    })?;

    run_law(&mut reports, "equality-is-a-congruence", samples, &mut rng, |rng| {
        let candidates: Vec<usize> =
            (0..sig.ops.len()).filter(|&op| sig.ops[op].arity >= 1).collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        let op = candidates[rng.gen_range(0..candidates.len())];
        let arity = sig.ops[op].arity;
        let mut premises = PointSet::full(sort, alg, guards)?;
        let mut lhs_args = Vec::with_capacity(arity);
        let mut rhs_args = Vec::with_capacity(arity);
        for _ in 0..arity {
            let w = random_term(rng, sig, n, 2);
            let w2 = random_term(rng, sig, n, 2);
            premises = premises.intersect(&equality_value(&w, &w2, sort, alg, guards)?)?;
            lhs_args.push(w);
            rhs_args.push(w2);
        }
        let conclusion = equality_value(
            &Term::App(op, lhs_args.clone()),
            &Term::App(op, rhs_args),
            sort,
            alg,
            guards,
        )?;
        Ok((!premises.is_subset_of(&conclusion)?)
            .then(|| format!("operation `{}`", sig.ops[op].sym)))
    })?;

    run_law(&mut reports, "sort-map-preimage-diagram", samples, &mut rng, |rng| {
        let (s, u) = random_subst_and_formula(rng, sig, sort)?;
        let outer = value(&Formula::subst(s.clone(), u.clone()), sort, alg, guards)?;
        let inner = value(&u, &s.source, alg, guards)?;
        let mut composed = Vec::with_capacity(s.source.len());
        let mut tuple = alloc::vec![0u8; n];
        for idx in sample_indices(rng, count) {
            decode_index(idx, alg.carrier, &mut tuple);
            composed.clear();
            composed.extend((0..s.source.len()).map(|i| eval_point(s.image(i), &tuple, alg)));
            let through = inner.contains(point_index(&composed, alg.carrier));
            if outer.contains(idx) != through {
                return Ok(Some(format!(
                    "point {tuple:?} under {}",
                    print_formula(&u, sig, &s.source)
                )));
            }
        }
        Ok(None)
    })?;

    run_law(&mut reports, "sort-maps-preserve-structure", samples, &mut rng, |rng| {
        let (s, u) = random_subst_and_formula(rng, sig, sort)?;
        let v = random_formula(rng, sig, s.source.len(), 2);
        let combined = Formula::and(u.clone(), Formula::not(v.clone()));
        let lhs = value(&Formula::subst(s.clone(), combined), sort, alg, guards)?;
        let rhs = value(&Formula::subst(s.clone(), u), sort, alg, guards)?
            .intersect(&value(&Formula::subst(s, v), sort, alg, guards)?.complement())?;
        Ok((lhs != rhs).then(|| "conjunction with a negation".into()))
    })?;

    run_law(&mut reports, "identity-sort-map-is-identity", samples, &mut rng, |rng| {
        let u = random_formula(rng, sig, n, 3);
        let wrapped =
            value(&Formula::subst(Substitution::identity(sort), u.clone()), sort, alg, guards)?;
        let plain = value(&u, sort, alg, guards)?;
        Ok((wrapped != plain).then(|| print_formula(&u, sig, sort)))
    })?;

    run_law(&mut reports, "sort-maps-compose", samples, &mut rng, |rng| {
        let source = small_sort(rng);
        let s = random_subst(rng, sig, &source, sort)?;
        let t = random_subst(rng, sig, sort, sort)?;
        let u = random_formula(rng, sig, source.len(), 2);
        let fused = value(&Formula::subst(s.then(&t)?, u.clone()), sort, alg, guards)?;
        let nested =
            value(&Formula::subst(t, Formula::subst(s, u)), sort, alg, guards)?;
        Ok((fused != nested).then(|| "two-step against fused composition".into()))
    })?;

    run_law(&mut reports, "renaming-commutes-with-exists", samples, &mut rng, |rng| {
        let target = sort.extend_fresh(1, sig);
        let fresh = target.len() - 1;
        let k = rng.gen_range(0..n);
        let map: Vec<Term> =
            (0..n).map(|i| if i == k { Term::Var(fresh) } else { Term::Var(i) }).collect();
        let s = Substitution::new(sort.clone(), target.clone(), map)?;
        let u = random_formula(rng, sig, n, 2);
        let lhs =
            value(&Formula::subst(s.clone(), Formula::exists(k, u.clone())), &target, alg, guards)?;
        let rhs = exists_var(&value(&Formula::subst(s, u), &target, alg, guards)?, fresh)?;
        Ok((lhs != rhs).then(|| format!("renaming {} away", sort.name(k))))
    })?;

    run_law(&mut reports, "bound-variable-images-are-ignored", samples, &mut rng, |rng| {
        let s1 = random_subst(rng, sig, sort, sort)?;
        let k = rng.gen_range(0..n);
        let mut map: Vec<Term> = (0..n).map(|i| s1.image(i).clone()).collect();
        map[k] = random_term(rng, sig, n, 2);
        let s2 = Substitution::new(sort.clone(), sort.clone(), map)?;
        let u = random_formula(rng, sig, n, 2);
        let lhs =
            value(&Formula::subst(s1, Formula::exists(k, u.clone())), sort, alg, guards)?;
        let rhs = value(&Formula::subst(s2, Formula::exists(k, u)), sort, alg, guards)?;
        Ok((lhs != rhs).then(|| format!("images of bound {}", sort.name(k))))
    })?;

    run_law(&mut reports, "membership-splits-negation", samples, &mut rng, |rng| {
        let u = random_formula(rng, sig, n, 3);
        let idx = rng.gen_range(0..count);
        let mut tuple = alloc::vec![0u8; n];
        decode_index(idx, alg.carrier, &mut tuple);
        let pos = eval_at_point(&u, &tuple, alg);
        let neg = eval_at_point(&Formula::not(u.clone()), &tuple, alg);
        Ok((pos == neg).then(|| format!("point {tuple:?}")))
    })?;

    Ok(reports)
}

fn run_law(
    reports: &mut Vec<AxiomReport>,
    name: &str,
    samples: u32,
    rng: &mut ChaCha8Rng,
    mut body: impl FnMut(&mut ChaCha8Rng) -> Result<Option<String>>,
) -> Result<()> {
    let mut violations = 0;
    let mut first_failure = None;
    for _ in 0..samples {
        if let Some(desc) = body(rng)? {
            violations += 1;
            if first_failure.is_none() {
                first_failure = Some(desc);
            }
        }
    }
    reports.push(AxiomReport { name: name.into(), samples, violations, first_failure });
    Ok(())
}

fn random_set<'a>(
    rng: &mut ChaCha8Rng,
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> Result<PointSet<'a>> {
    let mut set = PointSet::empty(sort, alg, guards)?;
    let count = set.space_len();
    // Mixed densities: sparse and dense sets stress different paths.
    let density = [0.05, 0.25, 0.5, 0.75, 0.95][rng.gen_range(0..5)];
    for idx in 0..count {
        if rng.gen_bool(density) {
            set.insert(idx);
        }
    }
    Ok(set)
}

fn random_term(rng: &mut ChaCha8Rng, sig: &Signature, n_vars: usize, depth: usize) -> Term {
    if depth <= 1 || rng.gen_bool(0.4) {
        let constants: Vec<usize> =
            (0..sig.ops.len()).filter(|&op| sig.ops[op].arity == 0).collect();
        if !constants.is_empty() && rng.gen_bool(0.25) {
            return Term::App(constants[rng.gen_range(0..constants.len())], Vec::new());
        }
        return Term::Var(rng.gen_range(0..n_vars));
    }
    let op = rng.gen_range(0..sig.ops.len());
    let args =
        (0..sig.ops[op].arity).map(|_| random_term(rng, sig, n_vars, depth - 1)).collect();
    Term::App(op, args)
}

fn random_formula(rng: &mut ChaCha8Rng, sig: &Signature, n_vars: usize, depth: usize) -> Formula {
    if depth <= 1 || rng.gen_bool(0.35) {
        return Formula::Equality(
            random_term(rng, sig, n_vars, 2),
            random_term(rng, sig, n_vars, 2),
        );
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(random_formula(rng, sig, n_vars, depth - 1)),
        1 => Formula::and(
            random_formula(rng, sig, n_vars, depth - 1),
            random_formula(rng, sig, n_vars, depth - 1),
        ),
        2 => Formula::or(
            random_formula(rng, sig, n_vars, depth - 1),
            random_formula(rng, sig, n_vars, depth - 1),
        ),
        3 => Formula::exists(
            rng.gen_range(0..n_vars),
            random_formula(rng, sig, n_vars, depth - 1),
        ),
        _ => Formula::forall(
            rng.gen_range(0..n_vars),
            random_formula(rng, sig, n_vars, depth - 1),
        ),
    }
}

fn small_sort(rng: &mut ChaCha8Rng) -> VarSort {
    if rng.gen_bool(0.5) {
        VarSort::new(&["u1"]).expect("fixed names are valid")
    } else {
        VarSort::new(&["u1", "u2"]).expect("fixed names are valid")
    }
}

fn random_subst(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    source: &VarSort,
    target: &VarSort,
) -> Result<Substitution> {
    let map =
        (0..source.len()).map(|_| random_term(rng, sig, target.len(), 2)).collect();
    Substitution::new(source.clone(), target.clone(), map)
}

fn random_subst_and_formula(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    target: &VarSort,
) -> Result<(Substitution, Formula)> {
    let source = small_sort(rng);
    let s = random_subst(rng, sig, &source, target)?;
    let u = random_formula(rng, sig, source.len(), 3);
    Ok((s, u))
}

fn sample_indices(rng: &mut ChaCha8Rng, count: u64) -> Vec<u64> {
    if count <= 256 {
        (0..count).collect()
    } else {
        (0..64).map(|_| rng.gen_range(0..count)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_clean_on_small_groups() {
        let guards = Guards::default();
        let sort = VarSort::new(&["x", "y"]).unwrap();
        for alg in [
            FiniteAlgebra::cyclic(4).unwrap(),
            FiniteAlgebra::dihedral(3).unwrap(),
        ] {
            let reports = run_axiom_suite(&alg, &sort, 40, 7, &guards).unwrap();
            assert!(reports.len() >= 15);
            for r in &reports {
                assert_eq!(r.samples, 40);
                assert_eq!(
                    r.violations, 0,
                    "{} violated on {}: {:?}",
                    r.name, alg.name, r.first_failure
                );
            }
        }
    }

    #[test]
    fn suite_is_deterministic_per_seed() {
        let guards = Guards::default();
        let sort = VarSort::new(&["x"]).unwrap();
        let alg = FiniteAlgebra::cyclic(6).unwrap();
        let a = run_axiom_suite(&alg, &sort, 20, 42, &guards).unwrap();
        let b = run_axiom_suite(&alg, &sort, 20, 42, &guards).unwrap();
        let names_a: Vec<_> = a.iter().map(|r| r.name.clone()).collect();
        let names_b: Vec<_> = b.iter().map(|r| r.name.clone()).collect();
        assert_eq!(names_a, names_b);
        assert!(a.iter().all(|r| r.violations == 0));
        assert!(b.iter().all(|r| r.violations == 0));
    }
}
