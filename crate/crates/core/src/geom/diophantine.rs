use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Solution family of `b*x + c*y = k`: every solution is
/// `base + m*step` for integer `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophantineSolution {
    pub base: (BigInt, BigInt),
    pub step: (BigInt, BigInt),
    pub solvable: bool,
}

impl DiophantineSolution {
    pub fn at(&self, m: &BigInt) -> (BigInt, BigInt) {
        (&self.base.0 + m * &self.step.0, &self.base.1 + m * &self.step.1)
    }

    /// The unique member whose first unknown lies in `0..|step.0|`.
    /// Returns `None` when unsolvable or when `c = 0` leaves `x` fixed.
    pub fn with_least_first(&self) -> Option<(BigInt, BigInt)> {
        if !self.solvable || self.step.0.is_zero() {
            return None;
        }
        let modulus = self.step.0.abs();
        let x = self.base.0.mod_floor(&modulus);
        // x = base.0 + m * step.0 for the m below; division is exact.
        let m = (&x - &self.base.0) / &self.step.0;
        Some(self.at(&m))
    }
}

/// Extended Euclid: `(g, s, t)` with `s*b + t*c = g = gcd(b, c) >= 0`.
fn extended_gcd(b: &BigInt, c: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (b.clone(), c.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Solves `b*x + c*y = k` over the integers. `(b, c)` must not both be
/// zero; for `(0, 0)` the result is reported unsolvable.
pub fn solve_linear_diophantine(b: &BigInt, c: &BigInt, k: &BigInt) -> DiophantineSolution {
    let unsolvable =
        DiophantineSolution { base: (BigInt::zero(), BigInt::zero()), step: (BigInt::zero(), BigInt::zero()), solvable: false };
    if b.is_zero() && c.is_zero() {
        return unsolvable;
    }
    let (d, s, t) = extended_gcd(b, c);
    if !k.is_multiple_of(&d) {
        return unsolvable;
    }
    let factor = k / &d;
    let step = (c / &d, -(b / &d));
    let raw = DiophantineSolution { base: (s * &factor, t * &factor), step, solvable: true };
    // Canonical base: least non-negative first unknown when that is free.
    let base = raw.with_least_first().unwrap_or(raw.base.clone());
    DiophantineSolution { base, ..raw }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn solve(b: i64, c: i64, k: i64) -> DiophantineSolution {
        solve_linear_diophantine(&big(b), &big(c), &big(k))
    }

    #[test]
    fn worked_examples() {
        assert_eq!(solve(7, 4, -4).base, (big(0), big(-1)));
        assert!(!solve(2, 4, 3).solvable);
        assert_eq!(solve(3, 5, 1).base, (big(2), big(-1)));
    }

    #[test]
    fn degenerate_coefficients() {
        let s = solve(0, 5, 10);
        assert!(s.solvable);
        assert_eq!(&s.base.1 * big(5), big(10));
        assert!(!solve(0, 5, 3).solvable);
        assert!(!solve(0, 0, 0).solvable);
        let s = solve(-6, 4, 2);
        assert_eq!(big(-6) * &s.base.0 + big(4) * &s.base.1, big(2));
    }

    proptest! {
        #[test]
        fn family_solves_equation(b in -60i64..60, c in -60i64..60, k in -500i64..500) {
            prop_assume!(b != 0 || c != 0);
            let s = solve(b, c, k);
            let d = big(b).gcd(&big(c));
            prop_assert_eq!(s.solvable, big(k).is_multiple_of(&d));
            if s.solvable {
                prop_assert_eq!(&s.step.0 * &d, big(c));
                prop_assert_eq!(&s.step.1 * &d, big(-b));
                for m in -5i64..=5 {
                    let (x, y) = s.at(&big(m));
                    prop_assert_eq!(big(b) * x + big(c) * y, big(k));
                }
                if c != 0 {
                    prop_assert!(!s.base.0.is_negative());
                    prop_assert!(s.base.0 < s.step.0.abs());
                }
            }
        }
    }
}
