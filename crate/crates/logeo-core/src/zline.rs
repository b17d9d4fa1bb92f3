//! The infinite cyclic case, handled symbolically: integer tuples stand
//! for points, and the one-variable witness family `E y. x_i == y^{c_i}`
//! (repeated products standing in for integer multiples) decides when
//! two tuples satisfy the same formulas. All arithmetic is checked, and
//! tuple entries are bounded by the guards.

use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Guards, Result};

/// `E y. x1 == y^{c1} & ... & xn == y^{cn}` over the integers. A
/// coefficient of zero renders as the unit, so the zero formula accepts
/// exactly the zero tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineFormula {
    pub coeffs: Vec<i64>,
}

impl fmt::Display for LineFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E y. ")?;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "x{} == ", i + 1)?;
            if c == 0 {
                write!(f, "e")?;
            } else {
                if c < 0 {
                    write!(f, "inv(")?;
                }
                for k in 0..c.unsigned_abs() {
                    if k > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "y")?;
                }
                if c < 0 {
                    write!(f, ")")?;
                }
            }
        }
        Ok(())
    }
}

fn check_entries(a: &[i64], guards: &Guards) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Precondition { detail: "empty integer tuple".into() });
    }
    for &v in a {
        if v.checked_abs().map_or(true, |abs| abs > guards.z_entry_bound) {
            return Err(Error::ZEntryBound { value: v, bound: guards.z_entry_bound });
        }
    }
    Ok(())
}

/// Canonical direction of the line through the tuple: the tuple scaled
/// by the sign of its first nonzero entry. The zero tuple keeps its
/// zeros.
pub fn line_coefficients(a: &[i64]) -> Vec<i64> {
    let sign = match a.iter().find(|&&v| v != 0) {
        Some(&v) if v < 0 => -1,
        _ => 1,
    };
    a.iter().map(|&v| v * sign).collect()
}

/// The membership test for the line through `a`: accepted tuples are
/// exactly the integer multiples of `a`.
pub fn canonical_line_formula(a: &[i64], guards: &Guards) -> Result<LineFormula> {
    check_entries(a, guards)?;
    Ok(LineFormula { coeffs: line_coefficients(a) })
}

/// The membership test for `m` times the line through `a`: accepted
/// tuples are the multiples of `m * a`.
pub fn scaled_line_formula(m: i64, a: &[i64], guards: &Guards) -> Result<LineFormula> {
    if m < 1 {
        return Err(Error::Precondition { detail: "the scale must be positive".into() });
    }
    check_entries(a, guards)?;
    line_coefficients(a)
        .into_iter()
        .map(|c| c.checked_mul(m).ok_or(Error::ZOverflow))
        .collect::<Result<Vec<i64>>>()
        .map(|coeffs| LineFormula { coeffs })
}

/// Decides `E y. b_i == c_i * y for all i` with checked arithmetic.
pub fn eval_line_formula(f: &LineFormula, b: &[i64], guards: &Guards) -> Result<bool> {
    check_entries(b, guards)?;
    if b.len() != f.coeffs.len() {
        return Err(Error::Precondition {
            detail: "tuple length does not match the formula".into(),
        });
    }
    let pivot = f.coeffs.iter().position(|&c| c != 0);
    let y = match pivot {
        None => return Ok(b.iter().all(|&v| v == 0)),
        Some(i) => {
            let c = f.coeffs[i];
            if b[i] % c != 0 {
                return Ok(false);
            }
            b[i].checked_div(c).ok_or(Error::ZOverflow)?
        }
    };
    for (&c, &v) in f.coeffs.iter().zip(b.iter()) {
        if c.checked_mul(y).ok_or(Error::ZOverflow)? != v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every entry of `b` is the same integer multiple of the
/// matching entry of `a`.
pub fn divides_tuple(a: &[i64], b: &[i64], guards: &Guards) -> Result<bool> {
    let f = canonical_line_formula(a, guards)?;
    eval_line_formula(&f, b, guards)
}

/// A line formula accepted by one tuple and rejected by the other.
#[derive(Debug, Clone)]
pub struct ZWitness {
    pub formula: LineFormula,
    pub holds_at_first: bool,
}

#[derive(Debug, Clone)]
pub struct ZIsotypedReport {
    pub isotyped: bool,
    pub witness: Option<ZWitness>,
}

/// Two integer tuples satisfy the same formulas exactly when one is the
/// negative of the other (or they are equal). Otherwise one of the two
/// line formulas tells them apart: the first tuple's own line formula,
/// or, when the second tuple lies on that line, the second tuple's.
pub fn z_isotyped(a: &[i64], b: &[i64], guards: &Guards) -> Result<ZIsotypedReport> {
    check_entries(a, guards)?;
    check_entries(b, guards)?;
    if a.len() != b.len() {
        return Err(Error::Precondition { detail: "tuple lengths differ".into() });
    }
    let negated: Option<Vec<i64>> = a.iter().map(|&v| v.checked_neg()).collect();
    let negated = negated.ok_or(Error::ZOverflow)?;
    if a == b || negated == b {
        return Ok(ZIsotypedReport { isotyped: true, witness: None });
    }
    let f_a = canonical_line_formula(a, guards)?;
    if !eval_line_formula(&f_a, b, guards)? {
        return Ok(ZIsotypedReport {
            isotyped: false,
            witness: Some(ZWitness { formula: f_a, holds_at_first: true }),
        });
    }
    let f_b = canonical_line_formula(b, guards)?;
    debug_assert!(!eval_line_formula(&f_b, a, guards)?);
    Ok(ZIsotypedReport {
        isotyped: false,
        witness: Some(ZWitness { formula: f_b, holds_at_first: false }),
    })
}
