//! Differential algebra for the reduced third-order equations
//! x''' = P(x, x', x''): derivations on rational function fields, first
//! integrals, invariant surfaces, and verification that rational
//! substitutions carry solutions to solutions.
//!
//! ODE variables (x, x', x'') are identified with the ring variables
//! (x, y, z) throughout.

use crate::poly::{varset, Poly, PolyError, RationalFn, VarSet};
use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChazyVariant {
    IV,
    V,
    VI,
}

impl ChazyVariant {
    /// The right-hand side P with x''' = P(x, x', x''), in variables (x,y,z).
    pub fn rhs(self, vars: &VarSet, field: &Field) -> Poly {
        let (a, b, c): (i64, i64, i64) = match self {
            // a*x*z + b*y^2 + c*x^2*y
            ChazyVariant::IV => (3, 3, -3),
            ChazyVariant::V => (2, 4, -2),
            ChazyVariant::VI => (1, 5, -1),
        };
        crate::poly::poly_from_terms(
            &[(a, &[1, 0, 1]), (b, &[0, 2, 0]), (c, &[2, 1, 0])],
            vars,
            field,
        )
    }

    /// The quasihomogeneous polynomial first integral of the associated
    /// derivation (of weighted degree 3, 4 and 6, respectively).
    pub fn first_integral(self, vars: &VarSet, field: &Field) -> Poly {
        let terms: &[(i64, &[u32])] = match self {
            ChazyVariant::IV => &[(1, &[3, 0, 0]), (-3, &[1, 1, 0]), (1, &[0, 0, 1])],
            ChazyVariant::V => &[
                (1, &[4, 0, 0]),
                (-4, &[2, 1, 0]),
                (2, &[1, 0, 1]),
                (-1, &[0, 2, 0]),
            ],
            ChazyVariant::VI => &[
                (1, &[6, 0, 0]),
                (-6, &[4, 1, 0]),
                (6, &[3, 0, 1]),
                (-15, &[2, 2, 0]),
                (6, &[1, 1, 1]),
                (8, &[0, 3, 0]),
                (-3, &[0, 0, 2]),
            ],
        };
        crate::poly::poly_from_terms(terms, vars, field)
    }
}

/// A K-linear derivation of K(x_1,...,x_n) given by generator images.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub vars: VarSet,
    pub field: Field,
    pub images: Vec<RationalFn>,
}

impl Derivation {
    pub fn new(vars: VarSet, field: Field, images: Vec<RationalFn>) -> Derivation {
        assert_eq!(vars.len(), images.len());
        Derivation {
            vars,
            field,
            images,
        }
    }

    /// The Chazy-type derivation W = y ∂x + z ∂y + P ∂z.
    pub fn chazy(variant: ChazyVariant, field: &Field) -> Derivation {
        let vars = varset(&["x", "y", "z"]);
        let images = vec![
            RationalFn::from_poly(Poly::var(1, &vars, field)),
            RationalFn::from_poly(Poly::var(2, &vars, field)),
            RationalFn::from_poly(variant.rhs(&vars, field)),
        ];
        Derivation::new(vars, field.clone(), images)
    }

    pub fn apply_poly(&self, p: &Poly) -> Result<RationalFn, PolyError> {
        let mut acc = RationalFn::from_poly(Poly::zero(&self.vars, &self.field));
        for (i, img) in self.images.iter().enumerate() {
            let d = RationalFn::from_poly(p.derivative(i));
            acc = acc.add(&d.mul(img)?)?;
        }
        Ok(acc)
    }

    /// Quotient rule: D(n/d) = (D(n) d - n D(d)) / d^2.
    pub fn apply(&self, u: &RationalFn) -> Result<RationalFn, PolyError> {
        let dn = self.apply_poly(&u.num)?;
        let dd = self.apply_poly(&u.den)?;
        let num = dn
            .mul(&RationalFn::from_poly(u.den.clone()))?
            .sub(&RationalFn::from_poly(u.num.clone()).mul(&dd)?)?;
        num.div(&RationalFn::from_poly(u.den.mul(&u.den)?))
    }

    /// The lift (u, D u, D^2 u) of a substitution.
    pub fn lift(&self, u: &RationalFn) -> Result<[RationalFn; 3], PolyError> {
        let u1 = self.apply(u)?;
        let u2 = self.apply(&u1)?;
        Ok([u.clone(), u1, u2])
    }
}

/// Residual u_3 - P(u_0, u_1, u_2) with u_i the D-iterates of u: zero
/// exactly when u transports solutions of D's flow to solutions of the
/// target equation.
pub fn solution_residual(
    d: &Derivation,
    u: &RationalFn,
    target: ChazyVariant,
) -> Result<RationalFn, PolyError> {
    let [u0, u1, u2] = d.lift(u)?;
    let u3 = d.apply(&u2)?;
    let tvars = varset(&["x", "y", "z"]);
    let p = target.rhs(&tvars, &d.field);
    let pval = p.substitute(&[u0, u1, u2])?;
    u3.sub(&pval)
}

/// A substitution u of the same equation: u_3 = P(u_0, u_1, u_2).
pub fn verify_ode_symmetry(
    d: &Derivation,
    u: &RationalFn,
    variant: ChazyVariant,
) -> Result<(bool, RationalFn), PolyError> {
    let r = solution_residual(d, u, variant)?;
    Ok((r.is_zero(), r))
}

pub fn verify_first_integral(d: &Derivation, b: &Poly) -> Result<bool, PolyError> {
    Ok(d.apply_poly(b)?.is_zero())
}

/// The cofactor k with D(C) = k C, when C is invariant.
pub fn verify_invariant_surface(d: &Derivation, c: &Poly) -> Result<Option<Poly>, PolyError> {
    let dc = d.apply_poly(c)?;
    if !dc.is_poly() {
        return Ok(None);
    }
    match dc.num.exact_div(c) {
        Ok(k) => Ok(Some(k)),
        Err(PolyError::NotDivisible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A rational self-map of the (x,y,z)-space, acting by substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transform {
    pub components: [RationalFn; 3],
}

impl Transform {
    pub fn identity(vars: &VarSet, field: &Field) -> Transform {
        Transform {
            components: [
                RationalFn::from_poly(Poly::var(0, vars, field)),
                RationalFn::from_poly(Poly::var(1, vars, field)),
                RationalFn::from_poly(Poly::var(2, vars, field)),
            ],
        }
    }

    /// Extend a substitution u to the full lift (u, D u, D^2 u).
    pub fn from_lift(d: &Derivation, u: &RationalFn) -> Result<Transform, PolyError> {
        Ok(Transform {
            components: d.lift(u)?,
        })
    }

    /// self after other.
    pub fn compose(&self, other: &Transform) -> Result<Transform, PolyError> {
        let mut out = Vec::with_capacity(3);
        for c in &self.components {
            out.push(c.substitute(&other.components)?);
        }
        Ok(Transform {
            components: out.try_into().expect("three components"),
        })
    }

    pub fn pow(&self, n: u32) -> Result<Transform, PolyError> {
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }
}

/// Report on the S_3 relations of a pair of lifted substitutions.
#[derive(Debug, Clone)]
pub struct GroupRelations {
    pub flop_is_involution: bool,
    pub tri_has_order_three: bool,
    pub braid_relation: bool,
}

/// flop^2 = id, tri^3 = id, flop o tri o flop = tri^2.
pub fn group_relations(flop: &Transform, tri: &Transform) -> Result<GroupRelations, PolyError> {
    let vars = &flop.components[0].num.vars;
    let field = &flop.components[0].num.field;
    let id = Transform::identity(vars, field);
    let tri2 = tri.pow(2)?;
    Ok(GroupRelations {
        flop_is_involution: flop.pow(2)? == id,
        tri_has_order_three: tri.compose(&tri2)? == id,
        braid_relation: flop.compose(tri)?.compose(flop)? == tri2,
    })
}

/// P(l x, l^2 y, l^3 z) = l^4 P(x, y, z), verified with a genuine extra
/// variable l.
pub fn quasihomogeneous_rhs(variant: ChazyVariant, field: &Field) -> Result<bool, PolyError> {
    let ext = varset(&["x", "y", "z", "l"]);
    let p = variant.rhs(&ext, field);
    let l = Poly::var(3, &ext, field);
    let assign = vec![
        Poly::var(0, &ext, field).mul(&l)?,
        Poly::var(1, &ext, field).mul(&l.pow(2))?,
        Poly::var(2, &ext, field).mul(&l.pow(3))?,
        l.clone(),
    ];
    let scaled = p.substitute_poly(&assign)?;
    Ok(scaled == p.mul(&l.pow(4))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::poly_from_terms;
    use crate::scalar::{FieldSpec, Scalar};

    fn w_iv() -> Derivation {
        Derivation::chazy(ChazyVariant::IV, &FieldSpec::rational())
    }

    fn p3(terms: &[(i64, [u32; 3])], d: &Derivation) -> Poly {
        let ts: Vec<(i64, &[u32])> = terms.iter().map(|(c, e)| (*c, &e[..])).collect();
        poly_from_terms(&ts, &d.vars, &d.field)
    }

    #[test]
    fn derivation_moves_generators() {
        let d = w_iv();
        let x = RationalFn::from_poly(Poly::var(0, &d.vars, &d.field));
        assert_eq!(d.apply(&x).unwrap().num, Poly::var(1, &d.vars, &d.field));
    }

    #[test]
    fn first_integrals() {
        // degree-3, -4, -6 first integrals of the three equations
        let d4 = w_iv();
        let b4 = p3(&[(1, [3, 0, 0]), (-3, [1, 1, 0]), (1, [0, 0, 1])], &d4);
        assert!(verify_first_integral(&d4, &b4).unwrap());

        let d5 = Derivation::chazy(ChazyVariant::V, &FieldSpec::rational());
        let b5 = p3(
            &[(1, [4, 0, 0]), (-4, [2, 1, 0]), (2, [1, 0, 1]), (-1, [0, 2, 0])],
            &d5,
        );
        assert!(verify_first_integral(&d5, &b5).unwrap());

        let d6 = Derivation::chazy(ChazyVariant::VI, &FieldSpec::rational());
        let b6 = p3(
            &[
                (1, [6, 0, 0]),
                (-6, [4, 1, 0]),
                (6, [3, 0, 1]),
                (-15, [2, 2, 0]),
                (6, [1, 1, 1]),
                (8, [0, 3, 0]),
                (-3, [0, 0, 2]),
            ],
            &d6,
        );
        assert!(verify_first_integral(&d6, &b6).unwrap());

        for (v, b, d) in [
            (ChazyVariant::IV, &b4, &d4),
            (ChazyVariant::V, &b5, &d5),
            (ChazyVariant::VI, &b6, &d6),
        ] {
            assert_eq!(v.first_integral(&d.vars, &d.field), *b);
        }

        // x is not a first integral
        assert!(!verify_first_integral(&d4, &Poly::var(0, &d4.vars, &d4.field)).unwrap());
    }

    #[test]
    fn invariant_surfaces() {
        let d4 = w_iv();
        let c4 = p3(
            &[(3, [2, 2, 0]), (-1, [0, 3, 0]), (-3, [1, 1, 1]), (1, [0, 0, 2])],
            &d4,
        );
        let k = verify_invariant_surface(&d4, &c4).unwrap();
        assert!(k.is_some());
        // re-expand D(C) = k C
        let dc = d4.apply_poly(&c4).unwrap();
        assert_eq!(dc.num, k.unwrap().mul(&c4).unwrap());

        let d5 = Derivation::chazy(ChazyVariant::V, &FieldSpec::rational());
        let c5 = p3(
            &[(2, [2, 2, 0]), (-2, [1, 1, 1]), (1, [0, 0, 2]), (-2, [0, 3, 0])],
            &d5,
        );
        assert!(verify_invariant_surface(&d5, &c5).unwrap().is_some());

        let d6 = Derivation::chazy(ChazyVariant::VI, &FieldSpec::rational());
        let c6 = p3(
            &[(1, [2, 2, 0]), (-1, [1, 1, 1]), (1, [0, 0, 2]), (-3, [0, 3, 0])],
            &d6,
        );
        assert!(verify_invariant_surface(&d6, &c6).unwrap().is_some());

        assert!(verify_invariant_surface(&d4, &Poly::var(0, &d4.vars, &d4.field))
            .unwrap()
            .is_none());
    }

    #[test]
    fn flop_substitution_is_a_symmetry() {
        let d = w_iv();
        // (2 x x' - x'') / x'
        let num = p3(&[(2, [1, 1, 0]), (-1, [0, 0, 1])], &d);
        let den = Poly::var(1, &d.vars, &d.field);
        let u = RationalFn::new(num, den).unwrap();
        let (ok, residual) = verify_ode_symmetry(&d, &u, ChazyVariant::IV).unwrap();
        assert!(ok, "residual {residual}");

        // 2x is not
        let bad = RationalFn::from_poly(p3(&[(2, [1, 0, 0])], &d));
        let (ok, residual) = verify_ode_symmetry(&d, &bad, ChazyVariant::IV).unwrap();
        assert!(!ok);
        assert!(!residual.is_zero());
    }

    #[test]
    fn chazy_v_involution() {
        let d = Derivation::chazy(ChazyVariant::V, &FieldSpec::rational());
        // (x^3 - 3 x x' + x'') / (x^2 - x')
        let num = p3(&[(1, [3, 0, 0]), (-3, [1, 1, 0]), (1, [0, 0, 1])], &d);
        let den = p3(&[(1, [2, 0, 0]), (-1, [0, 1, 0])], &d);
        let u = RationalFn::new(num, den).unwrap();
        let (ok, residual) = verify_ode_symmetry(&d, &u, ChazyVariant::V).unwrap();
        assert!(ok, "residual {residual}");
        // involutive as a lifted transform
        let t = Transform::from_lift(&d, &u).unwrap();
        let id = Transform::identity(&d.vars, &d.field);
        assert_eq!(t.pow(2).unwrap(), id);
    }

    #[test]
    fn transport_iv_to_vi() {
        let d = w_iv();
        // (x x'' - 2 (x')^2) / (x'' - x x')
        let num = p3(&[(1, [1, 0, 1]), (-2, [0, 2, 0])], &d);
        let den = p3(&[(1, [0, 0, 1]), (-1, [1, 1, 0])], &d);
        let u = RationalFn::new(num, den).unwrap();
        let r = solution_residual(&d, &u, ChazyVariant::VI).unwrap();
        assert!(r.is_zero(), "residual {r}");
        // identity transports IV to IV but not to VI
        let x = RationalFn::from_poly(Poly::var(0, &d.vars, &d.field));
        assert!(solution_residual(&d, &x, ChazyVariant::IV).unwrap().is_zero());
        assert!(!solution_residual(&d, &x, ChazyVariant::VI).unwrap().is_zero());
    }

    #[test]
    fn s3_relations_of_the_iv_substitutions() {
        let d = w_iv();
        let flop_u = RationalFn::new(
            p3(&[(2, [1, 1, 0]), (-1, [0, 0, 1])], &d),
            Poly::var(1, &d.vars, &d.field),
        )
        .unwrap();
        // (x^2 - x') / x
        let tri_u = RationalFn::new(
            p3(&[(1, [2, 0, 0]), (-1, [0, 1, 0])], &d),
            Poly::var(0, &d.vars, &d.field),
        )
        .unwrap();
        let flop = Transform::from_lift(&d, &flop_u).unwrap();
        let tri = Transform::from_lift(&d, &tri_u).unwrap();
        let rel = group_relations(&flop, &tri).unwrap();
        assert!(rel.flop_is_involution);
        assert!(rel.tri_has_order_three);
        assert!(rel.braid_relation);

        // the composite substitutions are among the remaining listed ones:
        // (x^3 - 3 x x' + x'')/(x^2 - x') appears as (tri o flop)'s first
        // component or one of its companions
        let others = [
            RationalFn::new(
                p3(&[(1, [3, 0, 0]), (-3, [1, 1, 0]), (1, [0, 0, 1])], &d),
                p3(&[(1, [2, 0, 0]), (-1, [0, 1, 0])], &d),
            )
            .unwrap(),
            RationalFn::new(
                p3(&[(-1, [3, 1, 0]), (3, [1, 2, 0]), (-1, [0, 1, 1])], &d),
                p3(&[(1, [2, 1, 0]), (1, [0, 2, 0]), (-1, [1, 0, 1])], &d),
            )
            .unwrap(),
            RationalFn::new(
                p3(&[(1, [2, 1, 0]), (-1, [1, 0, 1]), (1, [0, 2, 0])], &d),
                p3(&[(2, [1, 1, 0]), (-1, [0, 0, 1])], &d),
            )
            .unwrap(),
        ];
        let composites = [
            flop.compose(&tri).unwrap(),
            tri.compose(&flop).unwrap(),
            flop.compose(&tri).unwrap().compose(&tri).unwrap(),
        ];
        for t in &composites {
            assert!(
                others.iter().any(|o| *o == t.components[0]),
                "unexpected composite substitution {}",
                t.components[0]
            );
        }
    }

    #[test]
    fn rhs_is_quasihomogeneous() {
        for v in [ChazyVariant::IV, ChazyVariant::V, ChazyVariant::VI] {
            assert!(quasihomogeneous_rhs(v, &FieldSpec::rational()).unwrap());
        }
    }

    #[test]
    fn planar_derivation_solves_iv() {
        // D = (w-1)(X ∂X - w Y ∂Y) on Q(w)(X, Y), applied to
        // f = -(w+1)(w^2 Y + w X + 1)/(w^2 Y + X + w): a solution of the
        // reduced Chazy IV equation.
        let k = FieldSpec::cyclotomic3();
        let vars = varset(&["X", "Y"]);
        let w = Scalar::gen(&k);
        let one = Scalar::one(&k);
        let wm1 = w.sub(&one).unwrap();
        let images = vec![
            RationalFn::from_poly(Poly::var(0, &vars, &k).scale(&wm1)),
            RationalFn::from_poly(
                Poly::var(1, &vars, &k).scale(&wm1.mul(&w).unwrap().neg()),
            ),
        ];
        let d = Derivation::new(vars.clone(), k.clone(), images);
        let w2 = w.mul(&w).unwrap();
        let x = Poly::var(0, &vars, &k);
        let y = Poly::var(1, &vars, &k);
        let num = y
            .scale(&w2)
            .add(&x.scale(&w))
            .unwrap()
            .add(&Poly::one(&vars, &k))
            .unwrap()
            .scale(&w.add(&one).unwrap().neg());
        let den = y
            .scale(&w2)
            .add(&x)
            .unwrap()
            .add(&Poly::constant(w.clone(), &vars))
            .unwrap();
        let f = RationalFn::new(num, den).unwrap();
        let r = solution_residual(&d, &f, ChazyVariant::IV).unwrap();
        assert!(r.is_zero(), "residual {r}");

        // the zero function is trivially a solution
        let zero = RationalFn::from_poly(Poly::zero(&vars, &k));
        assert!(solution_residual(&d, &zero, ChazyVariant::IV)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn gaussian_derivation_solves_v() {
        // D = (i-1)(i X ∂X + Y ∂Y), f = (X-1)(Y-1)/(XY + iX - iY - 1)
        let k = FieldSpec::gaussian();
        let vars = varset(&["X", "Y"]);
        let i = Scalar::gen(&k);
        let one = Scalar::one(&k);
        let im1 = i.sub(&one).unwrap();
        let images = vec![
            RationalFn::from_poly(Poly::var(0, &vars, &k).scale(&im1.mul(&i).unwrap())),
            RationalFn::from_poly(Poly::var(1, &vars, &k).scale(&im1)),
        ];
        let d = Derivation::new(vars.clone(), k.clone(), images);
        let x = Poly::var(0, &vars, &k);
        let y = Poly::var(1, &vars, &k);
        let num = x
            .sub(&Poly::one(&vars, &k))
            .unwrap()
            .mul(&y.sub(&Poly::one(&vars, &k)).unwrap())
            .unwrap();
        let den = x
            .mul(&y)
            .unwrap()
            .add(&x.scale(&i))
            .unwrap()
            .sub(&y.scale(&i))
            .unwrap()
            .sub(&Poly::one(&vars, &k))
            .unwrap();
        let f = RationalFn::new(num, den).unwrap();
        let r = solution_residual(&d, &f, ChazyVariant::V).unwrap();
        assert!(r.is_zero(), "residual {r}");
    }
}
