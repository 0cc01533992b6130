//! Exact arithmetic over Q and quadratic extensions Q(theta).
//!
//! Every constant in the verification suites lives in Q, Q(w) with
//! w^2 + w + 1 = 0, or Q(i) with i^2 + 1 = 0, so only extensions of degree
//! at most two are supported. Elements are kept reduced modulo the minimal
//! polynomial, with rationals in lowest terms (num-rational guarantees the
//! latter).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Convenience: rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// A ground field: Q itself, or Q(theta) with theta^2 + p*theta + q = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: String,
    /// Generator name; empty for plain Q.
    pub gen: String,
    /// Minimal polynomial theta^2 + p*theta + q; `None` for plain Q.
    pub minpoly: Option<(Rat, Rat)>,
}

pub type Field = Arc<FieldSpec>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    DivisionByZero,
    FieldMismatch(String, String),
    ReducibleMinpoly,
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::DivisionByZero => write!(f, "division by zero"),
            ScalarError::FieldMismatch(a, b) => write!(f, "field mismatch: {a} vs {b}"),
            ScalarError::ReducibleMinpoly => {
                write!(f, "minimal polynomial is not irreducible over Q")
            }
        }
    }
}

impl std::error::Error for ScalarError {}

impl FieldSpec {
    pub fn rational() -> Field {
        Arc::new(FieldSpec {
            name: "Q".to_string(),
            gen: String::new(),
            minpoly: None,
        })
    }

    /// Q(gen) with gen^2 + p*gen + q = 0. Fails if the polynomial has a
    /// rational root (discriminant a rational square).
    pub fn quadratic(name: &str, gen: &str, p: Rat, q: Rat) -> Result<Field, ScalarError> {
        let disc = &p * &p - rat_int(4) * &q;
        if rational_sqrt(&disc).is_some() {
            return Err(ScalarError::ReducibleMinpoly);
        }
        Ok(Arc::new(FieldSpec {
            name: name.to_string(),
            gen: gen.to_string(),
            minpoly: Some((p, q)),
        }))
    }

    /// Q(w), w^2 + w + 1 = 0 (primitive cubic root of unity).
    pub fn cyclotomic3() -> Field {
        FieldSpec::quadratic("Q(w)", "w", rat_int(1), rat_int(1)).unwrap()
    }

    /// Q(i), i^2 + 1 = 0.
    pub fn gaussian() -> Field {
        FieldSpec::quadratic("Q(i)", "i", rat_int(0), rat_int(1)).unwrap()
    }

    pub fn is_rational(&self) -> bool {
        self.minpoly.is_none()
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// An element a0 + a1*theta of a ground field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar {
    pub a0: Rat,
    pub a1: Rat,
    pub field: Field,
}

impl Scalar {
    pub fn from_rat(r: Rat, field: &Field) -> Scalar {
        Scalar {
            a0: r,
            a1: Rat::zero(),
            field: field.clone(),
        }
    }

    pub fn from_int(n: i64, field: &Field) -> Scalar {
        Scalar::from_rat(rat_int(n), field)
    }

    pub fn zero(field: &Field) -> Scalar {
        Scalar::from_int(0, field)
    }

    pub fn one(field: &Field) -> Scalar {
        Scalar::from_int(1, field)
    }

    /// The generator theta of a quadratic field.
    pub fn gen(field: &Field) -> Scalar {
        assert!(field.minpoly.is_some(), "plain Q has no generator");
        Scalar {
            a0: Rat::zero(),
            a1: Rat::one(),
            field: field.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a0.is_zero() && self.a1.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a0.is_one() && self.a1.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.a1.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        if self.a1.is_zero() {
            Some(&self.a0)
        } else {
            None
        }
    }

    /// Common field of two operands. A purely rational value embeds into any
    /// extension; two genuinely different extensions are an error.
    fn join_field(&self, other: &Scalar) -> Result<Field, ScalarError> {
        if self.field == other.field {
            return Ok(self.field.clone());
        }
        if self.field.is_rational() && self.a1.is_zero() {
            return Ok(other.field.clone());
        }
        if other.field.is_rational() && other.a1.is_zero() {
            return Ok(self.field.clone());
        }
        Err(ScalarError::FieldMismatch(
            self.field.name.clone(),
            other.field.name.clone(),
        ))
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let field = self.join_field(other)?;
        Ok(Scalar {
            a0: &self.a0 + &other.a0,
            a1: &self.a1 + &other.a1,
            field,
        })
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let field = self.join_field(other)?;
        Ok(Scalar {
            a0: &self.a0 - &other.a0,
            a1: &self.a1 - &other.a1,
            field,
        })
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            a0: -&self.a0,
            a1: -&self.a1,
            field: self.field.clone(),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let field = self.join_field(other)?;
        // (a0 + a1 t)(b0 + b1 t) with t^2 = -p t - q.
        let c0 = &self.a0 * &other.a0;
        let c1 = &self.a0 * &other.a1 + &self.a1 * &other.a0;
        let c2 = &self.a1 * &other.a1;
        if c2.is_zero() {
            return Ok(Scalar { a0: c0, a1: c1, field });
        }
        let (p, q) = field
            .minpoly
            .as_ref()
            .expect("nonzero theta^2 coefficient in plain Q")
            .clone();
        Ok(Scalar {
            a0: c0 - &c2 * q,
            a1: c1 - &c2 * p,
            field,
        })
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        match &self.field.minpoly {
            None => Ok(Scalar::from_rat(self.a0.recip(), &self.field)),
            Some((p, q)) => {
                // Conjugate of a + b t is (a - b p) - b t; the norm is rational.
                let conj = Scalar {
                    a0: &self.a0 - &self.a1 * p,
                    a1: -&self.a1,
                    field: self.field.clone(),
                };
                let norm = &self.a0 * &self.a0 - &self.a0 * &self.a1 * p
                    + &self.a1 * &self.a1 * q;
                debug_assert!(!norm.is_zero());
                let ninv = norm.recip();
                Ok(Scalar {
                    a0: &conj.a0 * &ninv,
                    a1: &conj.a1 * &ninv,
                    field: self.field.clone(),
                })
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one(&self.field);
        for _ in 0..n {
            acc = acc.mul(self).unwrap();
        }
        acc
    }

    /// A square root of `self` inside its own field, if one exists.
    ///
    /// The sign is pinned: the first nonzero coordinate of the result has a
    /// positive numerator.
    pub fn sqrt_in_field(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let candidates = match &self.field.minpoly {
            None => rational_sqrt(&self.a0)
                .map(|r| vec![(r, Rat::zero())])
                .unwrap_or_default(),
            Some((p, q)) => self.sqrt_quadratic(p, q),
        };
        for (a, b) in candidates {
            let r = Scalar {
                a0: a,
                a1: b,
                field: self.field.clone(),
            };
            debug_assert_eq!(r.mul(&r).unwrap(), *self);
            return Some(canonical_sign(r));
        }
        None
    }

    /// Solve (a + b t)^2 = s0 + s1 t over Q(t), t^2 + p t + q = 0.
    fn sqrt_quadratic(&self, p: &Rat, q: &Rat) -> Vec<(Rat, Rat)> {
        let s0 = &self.a0;
        let s1 = &self.a1;
        let mut out = Vec::new();
        // b = 0: plain rational square root of s0.
        if s1.is_zero() {
            if let Some(a) = rational_sqrt(s0) {
                out.push((a, Rat::zero()));
            }
        }
        // b != 0: a = (s1 + b^2 p) / (2 b), and with u = b^2,
        // (p^2 - 4q) u^2 + (2 p s1 - 4 s0) u + s1^2 = 0.
        let ca = p * p - rat_int(4) * q;
        let cb = rat_int(2) * p * s1 - rat_int(4) * s0;
        let cc = s1 * s1;
        for u in rational_quadratic_roots(&ca, &cb, &cc) {
            if u.is_zero() || u.is_negative() {
                continue;
            }
            if let Some(b) = rational_sqrt(&u) {
                for b in [b.clone(), -b] {
                    let a = (s1 + &u * p) / (rat_int(2) * &b);
                    // Keep only genuine solutions of the original system.
                    if &(&a * &a) - &u * q == *s0 {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }
}

/// Rational roots of ca*u^2 + cb*u + cc = 0 (ca may be zero).
fn rational_quadratic_roots(ca: &Rat, cb: &Rat, cc: &Rat) -> Vec<Rat> {
    if ca.is_zero() {
        if cb.is_zero() {
            return Vec::new();
        }
        return vec![-cc / cb];
    }
    let disc = cb * cb - rat_int(4) * ca * cc;
    match rational_sqrt(&disc) {
        None => Vec::new(),
        Some(s) => {
            let two_a = rat_int(2) * ca;
            vec![(-cb + &s) / &two_a, (-cb - &s) / &two_a]
        }
    }
}

fn canonical_sign(r: Scalar) -> Scalar {
    let lead = if !r.a0.is_zero() { &r.a0 } else { &r.a1 };
    if lead.numer().is_negative() {
        r.neg()
    } else {
        r
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gen = if self.field.gen.is_empty() {
            "t"
        } else {
            &self.field.gen
        };
        if self.a1.is_zero() {
            return write!(f, "{}", self.a0);
        }
        let theta = if self.a1.is_one() {
            gen.to_string()
        } else if self.a1 == -rat_int(1) {
            format!("-{gen}")
        } else {
            format!("{}*{}", self.a1, gen)
        };
        if self.a0.is_zero() {
            write!(f, "{theta}")
        } else if self.a1.is_negative() {
            write!(f, "{}{}", self.a0, theta)
        } else {
            write!(f, "{}+{}", self.a0, theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega() -> (Field, Scalar) {
        let k = FieldSpec::cyclotomic3();
        let w = Scalar::gen(&k);
        (k, w)
    }

    #[test]
    fn omega_square_reduces() {
        let (k, w) = omega();
        let w2 = w.mul(&w).unwrap();
        // w^2 = -1 - w
        assert_eq!(w2.a0, rat_int(-1));
        assert_eq!(w2.a1, rat_int(-1));
        assert_eq!(w2.field, k);
    }

    #[test]
    fn i_square_is_minus_one() {
        let k = FieldSpec::gaussian();
        let i = Scalar::gen(&k);
        let m = i.mul(&i).unwrap();
        assert_eq!(m, Scalar::from_int(-1, &k));
    }

    #[test]
    fn inverse_of_one_plus_omega() {
        let (k, w) = omega();
        let x = Scalar::one(&k).add(&w).unwrap();
        let inv = x.inv().unwrap();
        // (1+w)^{-1} = -w
        assert_eq!(inv, w.neg());
        assert!(x.mul(&inv).unwrap().is_one());
    }

    #[test]
    fn minpoly_vanishes_at_generator() {
        for k in [FieldSpec::cyclotomic3(), FieldSpec::gaussian()] {
            let t = Scalar::gen(&k);
            let (p, q) = k.minpoly.clone().unwrap();
            let val = t
                .mul(&t)
                .unwrap()
                .add(&t.mul(&Scalar::from_rat(p, &k)).unwrap())
                .unwrap()
                .add(&Scalar::from_rat(q, &k))
                .unwrap();
            assert!(val.is_zero());
        }
    }

    #[test]
    fn sqrt_examples() {
        let q = FieldSpec::rational();
        assert_eq!(
            Scalar::from_int(4, &q).sqrt_in_field(),
            Some(Scalar::from_int(2, &q))
        );
        assert_eq!(Scalar::from_int(2, &q).sqrt_in_field(), None);

        // -3 in Q(w): (1+2w)^2 = -3.
        let (k, w) = omega();
        let r = Scalar::from_int(-3, &k).sqrt_in_field().unwrap();
        let expected = Scalar::one(&k)
            .add(&w.mul(&Scalar::from_int(2, &k)).unwrap())
            .unwrap();
        assert_eq!(r, expected);
        assert_eq!(r.mul(&r).unwrap(), Scalar::from_int(-3, &k));
    }

    #[test]
    fn sqrt_of_square_is_canonical() {
        let (k, w) = omega();
        let vals = [
            Scalar::from_int(5, &k),
            w.clone(),
            Scalar::from_int(-2, &k).add(&w).unwrap(),
            Scalar::from_rat(rat(3, 7), &k),
        ];
        for v in vals {
            let sq = v.mul(&v).unwrap();
            let r = sq.sqrt_in_field().unwrap();
            assert!(r == v || r == v.neg(), "sqrt({sq}) gave {r}, wanted +-{v}");
        }
    }

    #[test]
    fn rational_embeds_into_extension() {
        let q = FieldSpec::rational();
        let (k, w) = omega();
        let two = Scalar::from_int(2, &q);
        let s = two.add(&w).unwrap();
        assert_eq!(s.field, k);
    }

    #[test]
    fn field_mismatch_rejected() {
        let (_, w) = omega();
        let i = Scalar::gen(&FieldSpec::gaussian());
        assert!(matches!(w.add(&i), Err(ScalarError::FieldMismatch(_, _))));
    }

    #[test]
    fn reducible_minpoly_rejected() {
        // t^2 - 1 splits over Q.
        assert!(FieldSpec::quadratic("bad", "t", rat_int(0), rat_int(-1)).is_err());
    }

    #[test]
    fn division_by_zero() {
        let q = FieldSpec::rational();
        let one = Scalar::one(&q);
        assert!(matches!(
            one.div(&Scalar::zero(&q)),
            Err(ScalarError::DivisionByZero)
        ));
    }
}
