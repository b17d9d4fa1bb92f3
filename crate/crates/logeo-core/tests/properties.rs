//! Randomized law checks: printing inverts parsing, the bitset evaluator
//! agrees with a pointwise walk, set algebra and quantifier laws hold on
//! arbitrary sets, and the integer-line verdict matches its closed form.

use proptest::collection::vec;
use proptest::prelude::*;

use logeo_core::algebra::FiniteAlgebra;
use logeo_core::formula::{eval_at_point, parse_formula, print_formula, value, Formula};
use logeo_core::signature::{Signature, Substitution, Term, VarSort, Variety};
use logeo_core::space::{eval_point, exists_var, forall_var, Point, PointSet};
use logeo_core::typesys::chain_check;
use logeo_core::zline::{eval_line_formula, z_isotyped};
use logeo_core::Guards;

fn term_strategy(nvars: usize) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        3 => (0..nvars).prop_map(Term::Var),
        1 => Just(Term::app(2, vec![])),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(0, vec![a, b])),
            inner.prop_map(|a| Term::app(1, vec![a])),
        ]
    })
}

fn plain_formula_strategy(nvars: usize) -> impl Strategy<Value = Formula> {
    let atom = (term_strategy(nvars), term_strategy(nvars))
        .prop_map(|(a, b)| Formula::Equality(a, b));
    atom.prop_recursive(3, 16, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (0..nvars, inner.clone()).prop_map(|(x, g)| Formula::exists(x, g)),
            (0..nvars, inner).prop_map(|(x, g)| Formula::forall(x, g)),
        ]
    })
}

/// Formulas over `{x, y}`, with an occasional sort-map node whose source
/// sort is `{a, b}`.
fn formula_strategy() -> impl Strategy<Value = Formula> {
    prop_oneof![
        4 => plain_formula_strategy(2),
        1 => (plain_formula_strategy(2), term_strategy(2), term_strategy(2)).prop_map(
            |(inner, t1, t2)| {
                let source = VarSort::new(&["a", "b"]).unwrap();
                let target = VarSort::new(&["x", "y"]).unwrap();
                let s = Substitution::new(source, target, vec![t1, t2]).unwrap();
                Formula::subst(s, inner)
            }
        ),
    ]
}

fn z4() -> FiniteAlgebra {
    FiniteAlgebra::cyclic(4).unwrap()
}

fn xy() -> VarSort {
    VarSort::new(&["x", "y"]).unwrap()
}

fn set_from_bits<'a>(
    bits: &[bool],
    sort: &VarSort,
    alg: &'a FiniteAlgebra,
    guards: &Guards,
) -> PointSet<'a> {
    let mut s = PointSet::empty(sort, alg, guards).unwrap();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            s.insert(i as u64);
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_identity(f in formula_strategy()) {
        let sig = Signature::group(Variety::Group);
        let sort = xy();
        let text = print_formula(&f, &sig, &sort);
        let back = parse_formula(&text, &sig, &sort).unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bitset_value_agrees_with_pointwise_walk(f in formula_strategy()) {
        let alg = z4();
        let sort = xy();
        let guards = Guards::default();
        let set = value(&f, &sort, &alg, &guards).unwrap();
        for i in 0..set.space_len() {
            let p = Point::from_index(i, sort.len(), alg.carrier);
            prop_assert_eq!(set.contains(i), eval_at_point(&f, &p.values, &alg));
        }
    }

    #[test]
    fn sort_map_value_is_a_preimage(
        inner in plain_formula_strategy(2),
        t1 in term_strategy(2),
        t2 in term_strategy(2),
    ) {
        let alg = z4();
        let sort = xy();
        let guards = Guards::default();
        let s = Substitution::new(xy(), xy(), vec![t1, t2]).unwrap();
        let inner_val = value(&inner, &sort, &alg, &guards).unwrap();
        let outer_val =
            value(&Formula::subst(s.clone(), inner), &sort, &alg, &guards).unwrap();
        for i in 0..outer_val.space_len() {
            let p = Point::from_index(i, sort.len(), alg.carrier);
            let composed: Vec<u8> =
                (0..2).map(|k| eval_point(s.image(k), &p.values, &alg)).collect();
            let composed_idx = Point::new(composed).index(alg.carrier);
            prop_assert_eq!(outer_val.contains(i), inner_val.contains(composed_idx));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn set_algebra_and_quantifier_laws(
        abits in vec(any::<bool>(), 16),
        bbits in vec(any::<bool>(), 16),
    ) {
        let alg = z4();
        let sort = xy();
        let guards = Guards::default();
        let a = set_from_bits(&abits, &sort, &alg, &guards);
        let b = set_from_bits(&bbits, &sort, &alg, &guards);

        prop_assert_eq!(&a.complement().complement(), &a);
        prop_assert_eq!(
            a.union(&b).unwrap().complement(),
            a.complement().intersect(&b.complement()).unwrap()
        );
        prop_assert_eq!(
            a.intersect(&b).unwrap().complement(),
            a.complement().union(&b.complement()).unwrap()
        );
        prop_assert_eq!(
            a.minus(&b).unwrap(),
            a.intersect(&b.complement()).unwrap()
        );

        for x in 0..2 {
            let ex = exists_var(&a, x).unwrap();
            let all = forall_var(&a, x).unwrap();
            prop_assert!(a.is_subset_of(&ex).unwrap());
            prop_assert!(all.is_subset_of(&a).unwrap());
            prop_assert_eq!(&exists_var(&ex, x).unwrap(), &ex);
            prop_assert_eq!(
                &ex,
                &forall_var(&a.complement(), x).unwrap().complement()
            );
        }
    }
}

fn tuple_pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (1..=3usize).prop_flat_map(|n| (vec(-8..=8i64, n..=n), vec(-8..=8i64, n..=n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn integer_line_verdict_matches_sign_flip((a, b) in tuple_pair()) {
        let guards = Guards::default();
        let report = z_isotyped(&a, &b, &guards).unwrap();
        let flipped: Vec<i64> = a.iter().map(|&v| -v).collect();
        prop_assert_eq!(report.isotyped, a == b || flipped == b);
        match report.witness {
            None => prop_assert!(report.isotyped),
            Some(w) => {
                let at_a = eval_line_formula(&w.formula, &a, &guards).unwrap();
                let at_b = eval_line_formula(&w.formula, &b, &guards).unwrap();
                prop_assert_ne!(at_a, at_b);
                prop_assert_eq!(at_a, w.holds_at_first);
            }
        }
    }
}

#[test]
fn equivalence_chain_holds_on_every_menu_algebra() {
    let guards = Guards::default();
    let sort = VarSort::new(&["x"]).unwrap();
    for alg in FiniteAlgebra::menu() {
        let report = chain_check(&alg, &sort, &guards).unwrap();
        assert!(report.orbit_refines_rho, "{}", alg.name);
        assert!(report.rho_refines_tau, "{}", alg.name);
        assert!(report.rho.converged, "{}", alg.name);
    }
}
