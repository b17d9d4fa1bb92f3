//! Cross-checks of the search-based fast paths against brute-force
//! enumeration and closed-form counts computed along independent routes.

use logeo_core::algebra::{automorphisms, FiniteAlgebra};
use logeo_core::formula::{eval_at_point, parse_formula, value};
use logeo_core::signature::VarSort;
use logeo_core::space::Point;
use logeo_core::typesys::tau_partition;
use logeo_core::Guards;

fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![cur.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cur.swap(0, i);
            } else {
                cur.swap(c[i], i);
            }
            out.push(cur.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn preserves_tables(alg: &FiniteAlgebra, perm: &[u8]) -> bool {
    for (op, decl) in alg.signature.ops.iter().enumerate() {
        let mut args = vec![0u8; decl.arity];
        loop {
            let direct = perm[alg.op_value(op, &args) as usize];
            let mapped: Vec<u8> = args.iter().map(|&a| perm[a as usize]).collect();
            if direct != alg.op_value(op, &mapped) {
                return false;
            }
            let mut k = 0;
            loop {
                if k == decl.arity {
                    break;
                }
                args[k] += 1;
                if (args[k] as usize) < alg.carrier {
                    break;
                }
                args[k] = 0;
                k += 1;
            }
            if k == decl.arity {
                break;
            }
        }
    }
    true
}

#[test]
fn automorphism_search_matches_full_permutation_scan() {
    let guards = Guards::default();
    for alg in FiniteAlgebra::menu() {
        if alg.carrier > 8 {
            continue;
        }
        let mut brute: Vec<Vec<u8>> = all_permutations(alg.carrier)
            .into_iter()
            .filter(|p| preserves_tables(&alg, p))
            .collect();
        brute.sort_unstable();
        let fast = automorphisms(&alg, &guards).unwrap();
        assert_eq!(fast.perms, brute, "automorphism mismatch for {}", alg.name);
    }
}

fn totient(n: u64) -> u64 {
    (1..=n).filter(|k| gcd(*k, n) == 1).count() as u64
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn general_linear_order(p: u64, m: u32) -> u64 {
    let q = p.pow(m);
    (0..m).map(|i| q - p.pow(i)).product()
}

#[test]
fn automorphism_counts_match_closed_forms() {
    let guards = Guards::default();
    for n in [1u64, 2, 3, 4, 5, 6, 7, 8, 30] {
        let alg = FiniteAlgebra::cyclic(n as usize).unwrap();
        let aut = automorphisms(&alg, &guards).unwrap();
        assert_eq!(aut.order() as u64, totient(n), "cyclic of order {n}");
    }
    for (p, m) in [(2u64, 2u32), (2, 3), (2, 4), (3, 2)] {
        let alg = FiniteAlgebra::elementary_abelian(p as u32, m as usize).unwrap();
        let aut = automorphisms(&alg, &guards).unwrap();
        assert_eq!(aut.order() as u64, general_linear_order(p, m), "exponent-{p} rank {m}");
    }
    let fixed = [("z2xz4", 8), ("d4", 8), ("q8", 24), ("s3", 6)];
    for (name, want) in fixed {
        let alg = FiniteAlgebra::menu().into_iter().find(|a| a.name == name).unwrap();
        assert_eq!(automorphisms(&alg, &guards).unwrap().order(), want, "{name}");
    }
}

/// The transition `a_i -> b_i` extends to an isomorphism of generated
/// subalgebras exactly when the forced partial map closes without a
/// conflict. Grown here by a plain fixpoint, independent of the library's
/// pair-closure and trace machinery.
fn forced_map_extends(alg: &FiniteAlgebra, a: &[u8], b: &[u8]) -> bool {
    let mut fwd: Vec<Option<u8>> = vec![None; alg.carrier];
    let mut bwd: Vec<Option<u8>> = vec![None; alg.carrier];
    let bind = |fwd: &mut Vec<Option<u8>>, bwd: &mut Vec<Option<u8>>, x: u8, y: u8| {
        match (fwd[x as usize], bwd[y as usize]) {
            (Some(prev), _) if prev != y => false,
            (_, Some(prev)) if prev != x => false,
            _ => {
                fwd[x as usize] = Some(y);
                bwd[y as usize] = Some(x);
                true
            }
        }
    };
    for (&x, &y) in a.iter().zip(b) {
        if !bind(&mut fwd, &mut bwd, x, y) {
            return false;
        }
    }
    loop {
        let domain: Vec<u8> =
            (0..alg.carrier as u8).filter(|&x| fwd[x as usize].is_some()).collect();
        let mut grew = false;
        for (op, decl) in alg.signature.ops.iter().enumerate() {
            let mut idx = vec![0usize; decl.arity];
            loop {
                let args: Vec<u8> = idx.iter().map(|&i| domain[i]).collect();
                let mapped: Vec<u8> = args.iter().map(|&x| fwd[x as usize].unwrap()).collect();
                let x = alg.op_value(op, &args);
                let y = alg.op_value(op, &mapped);
                if fwd[x as usize].is_none() {
                    grew = true;
                }
                if !bind(&mut fwd, &mut bwd, x, y) {
                    return false;
                }
                let mut k = 0;
                loop {
                    if k == decl.arity || domain.is_empty() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < domain.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == decl.arity || domain.is_empty() {
                    break;
                }
            }
        }
        if !grew {
            return true;
        }
    }
}

#[test]
fn kernel_classes_match_forced_map_extension() {
    let guards = Guards::default();
    let names = ["z4", "z2xz2", "s3", "z2xz4"];
    for name in names {
        let alg = FiniteAlgebra::menu().into_iter().find(|a| a.name == name).unwrap();
        for sort in [VarSort::new(&["x"]).unwrap(), VarSort::new(&["x", "y"]).unwrap()] {
            let tau = tau_partition(&alg, &sort, &guards).unwrap();
            let count = (alg.carrier as u64).pow(sort.len() as u32);
            for i in 0..count {
                let mu = Point::from_index(i, sort.len(), alg.carrier);
                for j in 0..count {
                    let nu = Point::from_index(j, sort.len(), alg.carrier);
                    let brute = forced_map_extends(&alg, &mu.values, &nu.values);
                    let fast = tau.class_of(i) == tau.class_of(j);
                    assert_eq!(brute, fast, "{name} {:?} vs {:?}", mu.values, nu.values);
                }
            }
        }
    }
}

#[test]
fn bitset_evaluation_matches_pointwise_walk() {
    let guards = Guards::default();
    let sort = VarSort::new(&["x", "y"]).unwrap();
    let battery = [
        "x == y",
        "x != y & x*x == y*y",
        "E x. x*y == e",
        "A x. E y. x*y == e",
        "x == y -> y*x == e",
        "E y. y*y == x",
        "A y. (x*y == y*x)",
        "subst[x := y*y, y := x](E x. x*y == y)",
        "subst[x := inv(y), y := x*y](x == y)",
    ];
    for name in ["z4", "s3", "z2xz4"] {
        let alg = FiniteAlgebra::menu().into_iter().find(|a| a.name == name).unwrap();
        for text in battery {
            let f = parse_formula(text, &alg.signature, &sort).unwrap();
            let set = value(&f, &sort, &alg, &guards).unwrap();
            for i in 0..set.space_len() {
                let p = Point::from_index(i, sort.len(), alg.carrier);
                assert_eq!(
                    set.contains(i),
                    eval_at_point(&f, &p.values, &alg),
                    "{name}: `{text}` at {:?}",
                    p.values
                );
            }
        }
    }
}

#[test]
fn frozen_value_sets_for_small_cylinders() {
    let guards = Guards::default();
    let sort = VarSort::new(&["x", "y"]).unwrap();

    let z4 = FiniteAlgebra::cyclic(4).unwrap();
    let f = parse_formula("E y. y*y == x", &z4.signature, &sort).unwrap();
    let set = value(&f, &sort, &z4, &guards).unwrap();
    let got: Vec<u64> = set.iter_indices().collect();
    assert_eq!(got, vec![0, 2, 4, 6, 8, 10, 12, 14]);

    let z6 = FiniteAlgebra::cyclic(6).unwrap();
    let sort1 = VarSort::new(&["x"]).unwrap();
    let g = parse_formula("E x. x == x", &z6.signature, &sort1).unwrap();
    assert!(value(&g, &sort1, &z6, &guards).unwrap().is_full());
    let h = parse_formula("x*x*x == e & x != e", &z6.signature, &sort1).unwrap();
    let got: Vec<u64> = value(&h, &sort1, &z6, &guards).unwrap().iter_indices().collect();
    assert_eq!(got, vec![2, 4]);
}
