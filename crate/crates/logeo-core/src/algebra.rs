//! Finite algebras with totally defined operation tables.
//!
//! Carriers are `0..m-1` encoded as `u8`-indexed rows; the carrier cap is
//! 256 and the operation tables are stored flat in row-major order. All
//! structural searches (automorphisms, isomorphisms, generated
//! subalgebras) live here.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::signature::{Signature, Variety};
use crate::{Error, Guards, Result};

/// Hard cap on the carrier so elements fit in a byte.
pub const CARRIER_CAP: usize = 256;
/// Hard cap on the number of entries of one operation table.
const TABLE_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FiniteAlgebra {
    pub name: String,
    pub signature: Signature,
    pub carrier: usize,
    /// One flat table per operation, row-major over the argument tuple.
    tables: Vec<Vec<u8>>,
}

impl FiniteAlgebra {
    /// Builds an algebra and verifies the table shapes, the entry ranges
    /// and every law required by the signature's variety tag.
    pub fn new(
        name: &str,
        signature: Signature,
        carrier: usize,
        tables: Vec<Vec<u8>>,
    ) -> Result<FiniteAlgebra> {
        if carrier == 0 {
            return Err(Error::BadTable { op: String::new(), detail: "empty carrier".into() });
        }
        if carrier > CARRIER_CAP {
            return Err(Error::CarrierTooLarge { carrier });
        }
        if tables.len() != signature.ops.len() {
            return Err(Error::BadTable {
                op: String::new(),
                detail: format!(
                    "{} tables for {} operations",
                    tables.len(),
                    signature.ops.len()
                ),
            });
        }
        for (decl, table) in signature.ops.iter().zip(&tables) {
            let expected = (carrier as u128).pow(decl.arity as u32);
            if expected > TABLE_CAP {
                return Err(Error::BadTable {
                    op: decl.sym.clone(),
                    detail: format!("table would need {expected} entries"),
                });
            }
            if table.len() as u128 != expected {
                return Err(Error::BadTable {
                    op: decl.sym.clone(),
                    detail: format!("expected {expected} entries, found {}", table.len()),
                });
            }
            if let Some(bad) = table.iter().find(|&&v| v as usize >= carrier) {
                return Err(Error::BadTable {
                    op: decl.sym.clone(),
                    detail: format!("entry {bad} outside carrier 0..{carrier}"),
                });
            }
        }
        let alg = FiniteAlgebra { name: name.to_string(), signature, carrier, tables };
        alg.check_variety()?;
        Ok(alg)
    }

    fn check_variety(&self) -> Result<()> {
        let gops = match self.signature.variety {
            Variety::Generic => return Ok(()),
            _ => self.signature.group_ops().expect("validated at signature construction"),
        };
        let c = self.carrier as u8;
        let mul = |a: u8, b: u8| self.op_value(gops.mul, &[a, b]);
        let e = self.op_value(gops.unit, &[]);
        for a in 0..c {
            if mul(e, a) != a {
                return Err(Error::IdentityViolation {
                    law: "e * x == x".into(),
                    witness: vec![a],
                });
            }
            if mul(a, e) != a {
                return Err(Error::IdentityViolation {
                    law: "x * e == x".into(),
                    witness: vec![a],
                });
            }
            let ia = self.op_value(gops.inv, &[a]);
            if mul(a, ia) != e || mul(ia, a) != e {
                return Err(Error::IdentityViolation {
                    law: "x * inv(x) == e".into(),
                    witness: vec![a],
                });
            }
        }
        for a in 0..c {
            for b in 0..c {
                for d in 0..c {
                    if mul(mul(a, b), d) != mul(a, mul(b, d)) {
                        return Err(Error::IdentityViolation {
                            law: "(x * y) * z == x * (y * z)".into(),
                            witness: vec![a, b, d],
                        });
                    }
                }
            }
        }
        if matches!(
            self.signature.variety,
            Variety::AbelianGroup | Variety::AbelianExponentP(_)
        ) {
            for a in 0..c {
                for b in 0..c {
                    if mul(a, b) != mul(b, a) {
                        return Err(Error::IdentityViolation {
                            law: "x * y == y * x".into(),
                            witness: vec![a, b],
                        });
                    }
                }
            }
        }
        if let Variety::AbelianExponentP(p) = self.signature.variety {
            if !is_prime(p) {
                return Err(Error::NotPrime { p });
            }
            for a in 0..c {
                let mut acc = e;
                for _ in 0..p {
                    acc = mul(acc, a);
                }
                if acc != e {
                    return Err(Error::IdentityViolation {
                        law: format!("x^{p} == e"),
                        witness: vec![a],
                    });
                }
            }
        }
        Ok(())
    }

    pub fn op_value(&self, op: usize, args: &[u8]) -> u8 {
        let table = &self.tables[op];
        let mut idx = 0usize;
        for &a in args {
            idx = idx * self.carrier + a as usize;
        }
        table[idx]
    }

    pub fn table(&self, op: usize) -> &[u8] {
        &self.tables[op]
    }

    /// The cyclic group of order `n` under addition, named `z{n}`.
    pub fn cyclic(n: usize) -> Result<FiniteAlgebra> {
        if n == 0 {
            return Err(Error::BadTable { op: String::new(), detail: "empty carrier".into() });
        }
        if n > CARRIER_CAP {
            return Err(Error::CarrierTooLarge { carrier: n });
        }
        let sig = Signature::group(Variety::AbelianGroup);
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push(((a + b) % n) as u8);
            }
        }
        let inv = (0..n).map(|a| ((n - a) % n) as u8).collect();
        FiniteAlgebra::new(&format!("z{n}"), sig, n, vec![mul, inv, vec![0]])
    }

    /// Componentwise product; the pair `(a, b)` is encoded as
    /// `a * |H2| + b`.
    pub fn direct_product(h1: &FiniteAlgebra, h2: &FiniteAlgebra) -> Result<FiniteAlgebra> {
        if !h1.signature.compatible(&h2.signature) {
            return Err(Error::AlgebraMismatch {
                context: "direct product needs one shared signature".into(),
            });
        }
        let carrier = h1.carrier * h2.carrier;
        if carrier > CARRIER_CAP {
            return Err(Error::CarrierTooLarge { carrier });
        }
        let variety = match (h1.signature.variety, h2.signature.variety) {
            (Variety::AbelianExponentP(p), Variety::AbelianExponentP(q)) if p == q => {
                Variety::AbelianExponentP(p)
            }
            (a, b) if group_like(a) && group_like(b) => {
                if abelian_like(a) && abelian_like(b) {
                    Variety::AbelianGroup
                } else {
                    Variety::Group
                }
            }
            _ => Variety::Generic,
        };
        let mut sig = h1.signature.clone();
        sig.variety = variety;
        let m2 = h2.carrier;
        let mut tables = Vec::new();
        for (op, decl) in sig.ops.iter().enumerate() {
            let k = decl.arity;
            let mut table = Vec::with_capacity(carrier.pow(k as u32));
            let mut tuple = vec![0u8; k];
            loop {
                let firsts: Vec<u8> = tuple.iter().map(|&t| (t as usize / m2) as u8).collect();
                let seconds: Vec<u8> = tuple.iter().map(|&t| (t as usize % m2) as u8).collect();
                let v1 = h1.op_value(op, &firsts) as usize;
                let v2 = h2.op_value(op, &seconds) as usize;
                table.push((v1 * m2 + v2) as u8);
                if !next_tuple(&mut tuple, carrier) {
                    break;
                }
            }
            tables.push(table);
        }
        let name = format!("{}x{}", h1.name, h2.name);
        FiniteAlgebra::new(&name, sig, carrier, tables)
    }

    /// The vector group `(Z/p)^m`, named `e{p}_{m}`. Elements are base-`p`
    /// digit strings with digit `i` weighted by `p^i`.
    pub fn elementary_abelian(p: u32, m: usize) -> Result<FiniteAlgebra> {
        if !is_prime(p) {
            return Err(Error::NotPrime { p });
        }
        let carrier = (p as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        if carrier > CARRIER_CAP as u128 {
            return Err(Error::CarrierTooLarge { carrier: carrier.min(1 << 30) as usize });
        }
        let carrier = carrier as usize;
        let sig = Signature::group(Variety::AbelianExponentP(p));
        let p = p as usize;
        let add = |a: usize, b: usize| {
            let (mut a, mut b, mut out, mut w) = (a, b, 0usize, 1usize);
            for _ in 0..m {
                out += ((a % p + b % p) % p) * w;
                a /= p;
                b /= p;
                w *= p;
            }
            out
        };
        let neg = |a: usize| {
            let (mut a, mut out, mut w) = (a, 0usize, 1usize);
            for _ in 0..m {
                out += ((p - a % p) % p) * w;
                a /= p;
                w *= p;
            }
            out
        };
        let mut mul = Vec::with_capacity(carrier * carrier);
        for a in 0..carrier {
            for b in 0..carrier {
                mul.push(add(a, b) as u8);
            }
        }
        let inv = (0..carrier).map(|a| neg(a) as u8).collect();
        FiniteAlgebra::new(&format!("e{}_{m}", p), sig, carrier, vec![mul, inv, vec![0]])
    }

    /// Dihedral group of order `2n`: `n` rotations `0..n` followed by `n`
    /// reflections `n..2n`.
    pub fn dihedral(n: usize) -> Result<FiniteAlgebra> {
        if n == 0 || 2 * n > CARRIER_CAP {
            return Err(Error::CarrierTooLarge { carrier: 2 * n });
        }
        let carrier = 2 * n;
        let sig = Signature::group(Variety::Group);
        let split = |x: usize| (x % n, x / n);
        let join = |i: usize, j: usize| i + n * j;
        let mut mul = Vec::with_capacity(carrier * carrier);
        for a in 0..carrier {
            for b in 0..carrier {
                let (i, j) = split(a);
                let (k, l) = split(b);
                let rot = if j == 0 { (i + k) % n } else { (i + n - k) % n };
                mul.push(join(rot, (j + l) % 2) as u8);
            }
        }
        let inv = (0..carrier)
            .map(|a| {
                let (i, j) = split(a);
                if j == 0 { join((n - i) % n, 0) as u8 } else { a as u8 }
            })
            .collect();
        FiniteAlgebra::new(&format!("d{n}"), sig, carrier, vec![mul, inv, vec![0]])
    }

    /// The quaternion group of order 8: `{1, -1, i, -i, j, -j, k, -k}` in
    /// that element order.
    pub fn quaternion8() -> FiniteAlgebra {
        let sig = Signature::group(Variety::Group);
        // Axis products and result signs over the basis (1, i, j, k).
        const AXIS: [[u8; 4]; 4] =
            [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
        const SIGN: [[u8; 4]; 4] =
            [[0, 0, 0, 0], [0, 1, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1]];
        let mut mul = Vec::with_capacity(64);
        for a in 0..8u8 {
            for b in 0..8u8 {
                let (ax, sx) = (a / 2, a % 2);
                let (ay, sy) = (b / 2, b % 2);
                let axis = AXIS[ax as usize][ay as usize];
                let sign = (sx + sy + SIGN[ax as usize][ay as usize]) % 2;
                mul.push(axis * 2 + sign);
            }
        }
        let inv = (0..8u8)
            .map(|a| if a / 2 == 0 { a } else { a ^ 1 })
            .collect();
        FiniteAlgebra::new("q8", sig, 8, vec![mul, inv, vec![0]])
            .expect("the quaternion table satisfies the group laws")
    }

    /// The bundled menu of groups used by the front end and the test
    /// suites: all in the shared group language.
    pub fn menu() -> Vec<FiniteAlgebra> {
        let c = |n| FiniteAlgebra::cyclic(n).expect("small cyclic group");
        let mut out = vec![
            {
                let mut t = c(1);
                t.name = "triv".into();
                t
            },
            c(2),
            c(3),
            c(4),
            FiniteAlgebra::direct_product(&c(2), &c(2)).expect("small product"),
            c(5),
            c(6),
            FiniteAlgebra::direct_product(&c(2), &c(3)).expect("small product"),
            FiniteAlgebra::dihedral(3).expect("small dihedral"),
            c(7),
            c(8),
            FiniteAlgebra::direct_product(&c(2), &c(4)).expect("small product"),
            FiniteAlgebra::elementary_abelian(2, 3).expect("small vector group"),
            FiniteAlgebra::dihedral(4).expect("small dihedral"),
            FiniteAlgebra::quaternion8(),
            c(30),
        ];
        // The order-6 dihedral group is the symmetric group on 3 letters;
        // expose it under the familiar name.
        if let Some(s3) = out.iter_mut().find(|a| a.name == "d3") {
            s3.name = "s3".into();
        }
        out
    }

    /// Subuniverse generated by `gens` together with all constants.
    /// `depth` is the term depth that suffices to reach every element from
    /// the generators.
    pub fn subalgebra_generate(&self, gens: &[u8]) -> Result<SubalgebraClosure> {
        for &g in gens {
            if g as usize >= self.carrier {
                return Err(Error::BadTable {
                    op: String::new(),
                    detail: format!("generator {g} outside carrier 0..{}", self.carrier),
                });
            }
        }
        let mut member = vec![false; self.carrier];
        let mut list: Vec<u8> = Vec::new();
        let push = |member: &mut Vec<bool>, list: &mut Vec<u8>, v: u8| {
            if !member[v as usize] {
                member[v as usize] = true;
                list.push(v);
            }
        };
        for &g in gens {
            push(&mut member, &mut list, g);
        }
        for (op, decl) in self.signature.ops.iter().enumerate() {
            if decl.arity == 0 {
                push(&mut member, &mut list, self.op_value(op, &[]));
            }
        }
        let mut depth = 1usize;
        loop {
            let size = list.len();
            for (op, decl) in self.signature.ops.iter().enumerate() {
                if decl.arity == 0 {
                    continue;
                }
                let mut idx = vec![0usize; decl.arity];
                loop {
                    let args: Vec<u8> = idx.iter().map(|&i| list[i]).collect();
                    let v = self.op_value(op, &args);
                    push(&mut member, &mut list, v);
                    if !next_tuple_usize(&mut idx, size) {
                        break;
                    }
                }
            }
            if list.len() == size {
                break;
            }
            depth += 1;
        }
        let mut elements = list;
        elements.sort_unstable();
        Ok(SubalgebraClosure { elements, depth })
    }
}

/// Result of a generation closure: the sorted subuniverse and the term
/// depth at which generation stabilized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubalgebraClosure {
    pub elements: Vec<u8>,
    pub depth: usize,
}

fn group_like(v: Variety) -> bool {
    matches!(v, Variety::Group | Variety::AbelianGroup | Variety::AbelianExponentP(_))
}

fn abelian_like(v: Variety) -> bool {
    matches!(v, Variety::AbelianGroup | Variety::AbelianExponentP(_))
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Advances a `u8`-valued odometer; returns false after the last tuple.
fn next_tuple(tuple: &mut [u8], base: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        if (*slot as usize) + 1 < base {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

fn next_tuple_usize(tuple: &mut [usize], base: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        if *slot + 1 < base {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// Closes a seed set of cross-algebra pairs under componentwise
/// operations. Both algebras must share the signature of `h1`.
pub(crate) fn pair_closure(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    seed: &[(u8, u8)],
) -> Vec<(u8, u8)> {
    let mut member = vec![false; h1.carrier * h2.carrier];
    let mut list: Vec<(u8, u8)> = Vec::new();
    let key = |a: u8, b: u8| a as usize * h2.carrier + b as usize;
    let push = |member: &mut Vec<bool>, list: &mut Vec<(u8, u8)>, a: u8, b: u8| {
        if !member[key(a, b)] {
            member[key(a, b)] = true;
            list.push((a, b));
        }
    };
    for &(a, b) in seed {
        push(&mut member, &mut list, a, b);
    }
    for (op, decl) in h1.signature.ops.iter().enumerate() {
        if decl.arity == 0 {
            push(&mut member, &mut list, h1.op_value(op, &[]), h2.op_value(op, &[]));
        }
    }
    loop {
        let size = list.len();
        for (op, decl) in h1.signature.ops.iter().enumerate() {
            if decl.arity == 0 {
                continue;
            }
            let mut idx = vec![0usize; decl.arity];
            loop {
                let firsts: Vec<u8> = idx.iter().map(|&i| list[i].0).collect();
                let seconds: Vec<u8> = idx.iter().map(|&i| list[i].1).collect();
                let a = h1.op_value(op, &firsts);
                let b = h2.op_value(op, &seconds);
                push(&mut member, &mut list, a, b);
                if !next_tuple_usize(&mut idx, size) {
                    break;
                }
            }
        }
        if list.len() == size {
            return list;
        }
    }
}

/// Decides whether the transition `a_i -> b_i` extends to an isomorphism
/// of the generated subalgebras: the pair set is closed under
/// componentwise operations and the result is checked for being the graph
/// of a bijection.
pub fn graph_is_isomorphism(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    pairs: &[(u8, u8)],
) -> Result<bool> {
    if !h1.signature.compatible(&h2.signature) {
        return Err(Error::AlgebraMismatch {
            context: "pair-graph test needs one shared signature".into(),
        });
    }
    for &(a, b) in pairs {
        if a as usize >= h1.carrier || b as usize >= h2.carrier {
            return Err(Error::BadTable {
                op: String::new(),
                detail: "pair outside the carriers".into(),
            });
        }
    }
    let closure = pair_closure(h1, h2, pairs);
    let mut fwd: Vec<Option<u8>> = vec![None; h1.carrier];
    let mut bwd: Vec<Option<u8>> = vec![None; h2.carrier];
    for &(a, b) in &closure {
        match fwd[a as usize] {
            Some(prev) if prev != b => return Ok(false),
            _ => fwd[a as usize] = Some(b),
        }
        match bwd[b as usize] {
            Some(prev) if prev != a => return Ok(false),
            _ => bwd[b as usize] = Some(a),
        }
    }
    Ok(true)
}

/// Canonical trace of the generation closure of a labelled tuple.
///
/// Elements are renamed to discovery positions, so the trace is identical
/// for two tuples exactly when the transition between them extends to an
/// isomorphism of the generated subalgebras. Traces computed over
/// different algebras with one shared signature are comparable.
pub(crate) fn kernel_signature(alg: &FiniteAlgebra, tuple: &[u8]) -> Vec<u16> {
    let mut pos_of = vec![u16::MAX; alg.carrier];
    let mut list: Vec<u8> = Vec::new();
    let mut sig: Vec<u16> = Vec::new();
    let place = |pos_of: &mut Vec<u16>, list: &mut Vec<u8>, v: u8| -> u16 {
        if pos_of[v as usize] == u16::MAX {
            pos_of[v as usize] = list.len() as u16;
            list.push(v);
        }
        pos_of[v as usize]
    };
    for &g in tuple {
        let p = place(&mut pos_of, &mut list, g);
        sig.push(p);
    }
    for (op, decl) in alg.signature.ops.iter().enumerate() {
        if decl.arity == 0 {
            let p = place(&mut pos_of, &mut list, alg.op_value(op, &[]));
            sig.push(p);
        }
    }
    loop {
        let size = list.len();
        for (op, decl) in alg.signature.ops.iter().enumerate() {
            if decl.arity == 0 {
                continue;
            }
            let mut idx = vec![0usize; decl.arity];
            loop {
                let args: Vec<u8> = idx.iter().map(|&i| list[i]).collect();
                let v = alg.op_value(op, &args);
                let p = place(&mut pos_of, &mut list, v);
                sig.push(p);
                if !next_tuple_usize(&mut idx, size) {
                    break;
                }
            }
        }
        if list.len() == size {
            return sig;
        }
    }
}

/// The full automorphism group, one permutation of the carrier per entry,
/// sorted lexicographically (so the identity comes first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutGroup {
    pub perms: Vec<Vec<u8>>,
}

impl AutGroup {
    pub fn order(&self) -> usize {
        self.perms.len()
    }
}

/// Enumerates every automorphism by backtracking over images of a growing
/// generating set; between choices the partial map is completed by a pair
/// closure, which both prunes and forces the generated part.
pub fn automorphisms(alg: &FiniteAlgebra, guards: &Guards) -> Result<AutGroup> {
    if alg.carrier > guards.max_carrier {
        return Err(Error::CarrierGuard { carrier: alg.carrier, limit: guards.max_carrier });
    }
    let profiles: Vec<Vec<u16>> =
        (0..alg.carrier).map(|a| kernel_signature(alg, &[a as u8])).collect();
    let mut out: Vec<Vec<u8>> = Vec::new();
    let mut seed: Vec<(u8, u8)> = Vec::new();
    search_maps(alg, alg, &profiles, &profiles, &mut seed, &mut |perm| {
        out.push(perm.to_vec());
        true
    });
    out.sort_unstable();
    Ok(AutGroup { perms: out })
}

/// Finds one isomorphism `h1 -> h2` if any exists.
pub fn isomorphic(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    guards: &Guards,
) -> Result<Option<Vec<u8>>> {
    if !h1.signature.compatible(&h2.signature) {
        return Err(Error::AlgebraMismatch {
            context: "isomorphism search needs one shared signature".into(),
        });
    }
    if h1.carrier.max(h2.carrier) > guards.max_carrier {
        return Err(Error::CarrierGuard {
            carrier: h1.carrier.max(h2.carrier),
            limit: guards.max_carrier,
        });
    }
    if h1.carrier != h2.carrier {
        return Ok(None);
    }
    let prof1: Vec<Vec<u16>> =
        (0..h1.carrier).map(|a| kernel_signature(h1, &[a as u8])).collect();
    let prof2: Vec<Vec<u16>> =
        (0..h2.carrier).map(|a| kernel_signature(h2, &[a as u8])).collect();
    let mut found: Option<Vec<u8>> = None;
    let mut seed: Vec<(u8, u8)> = Vec::new();
    search_maps(h1, h2, &prof1, &prof2, &mut seed, &mut |perm| {
        found = Some(perm.to_vec());
        false
    });
    Ok(found)
}

/// Shared backtracking core. `on_found` returns false to stop the search.
fn search_maps(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    prof1: &[Vec<u16>],
    prof2: &[Vec<u16>],
    seed: &mut Vec<(u8, u8)>,
    on_found: &mut dyn FnMut(&[u8]) -> bool,
) -> bool {
    let closure = pair_closure(h1, h2, seed);
    let mut fwd: Vec<Option<u8>> = vec![None; h1.carrier];
    let mut bwd: Vec<Option<u8>> = vec![None; h2.carrier];
    for &(a, b) in &closure {
        match fwd[a as usize] {
            Some(prev) if prev != b => return true,
            _ => fwd[a as usize] = Some(b),
        }
        match bwd[b as usize] {
            Some(prev) if prev != a => return true,
            _ => bwd[b as usize] = Some(a),
        }
    }
    let next = (0..h1.carrier).find(|&a| fwd[a].is_none());
    let Some(a) = next else {
        if h1.carrier == h2.carrier {
            let perm: Vec<u8> = fwd.iter().map(|v| v.expect("total map")).collect();
            return on_found(&perm);
        }
        return true;
    };
    for b in 0..h2.carrier {
        if bwd[b].is_some() || prof1[a] != prof2[b] {
            continue;
        }
        seed.push((a as u8, b as u8));
        let keep_going = search_maps(h1, h2, prof1, prof2, seed, on_found);
        seed.pop();
        if !keep_going {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_tables_wrap() {
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let mul = z4.signature.op_index("*").unwrap();
        assert_eq!(z4.op_value(mul, &[3, 3]), 2);
        assert_eq!(z4.op_value(z4.signature.op_index("e").unwrap(), &[]), 0);
    }

    #[test]
    fn product_encoding_is_first_times_second_carrier_plus_second() {
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z4).unwrap();
        assert_eq!(p.carrier, 8);
        let mul = p.signature.op_index("*").unwrap();
        // (1,0) + (0,2) = (1,2): 4 + 2 = 6.
        assert_eq!(p.op_value(mul, &[4, 2]), 6);
        assert_eq!(p.name, "z2xz4");
    }

    #[test]
    fn bad_entry_is_rejected() {
        let sig = Signature::group(Variety::Group);
        let err = FiniteAlgebra::new("bad", sig, 2, vec![vec![0, 1, 1, 7], vec![0, 1], vec![0]]);
        match err {
            Err(Error::BadTable { op, .. }) => assert_eq!(op, "*"),
            other => panic!("expected BadTable, got {other:?}"),
        }
    }

    #[test]
    fn variety_violation_carries_a_witness() {
        // Z/4 is not of exponent 2: x = 1 violates x^2 = e.
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let sig = Signature::group(Variety::AbelianExponentP(2));
        let tables = vec![z4.table(0).to_vec(), z4.table(1).to_vec(), z4.table(2).to_vec()];
        match FiniteAlgebra::new("z4p2", sig, 4, tables) {
            Err(Error::IdentityViolation { witness, .. }) => assert_eq!(witness, vec![1]),
            other => panic!("expected IdentityViolation, got {other:?}"),
        }
    }

    #[test]
    fn subalgebra_of_z4_generated_by_two() {
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let s = z4.subalgebra_generate(&[2]).unwrap();
        assert_eq!(s.elements, vec![0, 2]);
    }

    #[test]
    fn empty_generators_close_over_constants() {
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let s = z4.subalgebra_generate(&[]).unwrap();
        assert_eq!(s.elements, vec![0]);
    }

    #[test]
    fn pair_graph_collision_in_z4() {
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        // Closure of (1,2) is {(1,2),(2,0),(3,2),(0,0)}: second coordinates
        // collide, so 1 -> 2 extends to no isomorphism.
        assert!(!graph_is_isomorphism(&z4, &z4, &[(1, 2)]).unwrap());
        let closure = pair_closure(&z4, &z4, &[(1, 2)]);
        let mut sorted = closure.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![(0, 0), (1, 2), (2, 0), (3, 2)]);
    }

    #[test]
    fn pair_graph_accepts_matching_involutions() {
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z4).unwrap();
        // (1,0) -> (0,2): both of order 2, generated subgroups match.
        assert!(graph_is_isomorphism(&p, &p, &[(4, 2)]).unwrap());
    }

    #[test]
    fn automorphism_counts_for_small_groups() {
        let g = Guards::default();
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        assert_eq!(automorphisms(&z4, &g).unwrap().order(), 2);
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z4).unwrap();
        assert_eq!(automorphisms(&p, &g).unwrap().order(), 8);
    }

    #[test]
    fn automorphisms_preserve_tables() {
        let g = Guards::default();
        let q8 = FiniteAlgebra::quaternion8();
        let aut = automorphisms(&q8, &g).unwrap();
        // Inner automorphisms give Q8/Z(Q8) = 4, the full group has 24.
        assert_eq!(aut.order(), 24);
        let mul = q8.signature.op_index("*").unwrap();
        for perm in &aut.perms {
            for a in 0..8u8 {
                for b in 0..8u8 {
                    let lhs = perm[q8.op_value(mul, &[a, b]) as usize];
                    let rhs =
                        q8.op_value(mul, &[perm[a as usize], perm[b as usize]]);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn cyclic_six_is_the_product_of_two_and_three() {
        let g = Guards::default();
        let z6 = FiniteAlgebra::cyclic(6).unwrap();
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let z3 = FiniteAlgebra::cyclic(3).unwrap();
        let p = FiniteAlgebra::direct_product(&z2, &z3).unwrap();
        let map = isomorphic(&z6, &p, &g).unwrap();
        assert!(map.is_some());
    }

    #[test]
    fn four_torsion_separates_the_two_order_four_groups() {
        let g = Guards::default();
        let z4 = FiniteAlgebra::cyclic(4).unwrap();
        let z2 = FiniteAlgebra::cyclic(2).unwrap();
        let v = FiniteAlgebra::direct_product(&z2, &z2).unwrap();
        assert!(isomorphic(&z4, &v, &g).unwrap().is_none());
    }

    #[test]
    fn menu_names_are_unique_and_orders_expected() {
        let menu = FiniteAlgebra::menu();
        let mut names: Vec<&str> = menu.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        let mut dedup = names.clone();
        dedup.dedup();
        assert_eq!(names, dedup);
        assert!(menu.iter().any(|a| a.name == "s3" && a.carrier == 6));
        assert!(menu.iter().any(|a| a.name == "q8" && a.carrier == 8));
        assert_eq!(menu.iter().filter(|a| a.carrier <= 8).count(), 15);
    }
}
