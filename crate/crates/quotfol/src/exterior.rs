//! Polynomial 1-/2-forms and vector fields on C^3 (plain or weighted),
//! the Euler contraction, invariant-curve cofactors, and linear systems of
//! foliation forms tangent to prescribed curves.

use crate::matrix::Matrix;
use crate::poly::{Mono, Poly, PolyError, VarSet};
use crate::scalar::{Field, Scalar};

pub type Weights = Vec<u32>;

/// A 1-form A dx + B dy + C dz, saturated on construction (the gcd of the
/// components is divided out and retained in `extracted`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneForm {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
    pub weights: Weights,
    /// Monic common factor removed at construction; 1 when already saturated.
    pub extracted: Poly,
}

/// A 2-form P dy∧dz + Q dz∧dx + R dx∧dy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForm {
    pub p: Poly,
    pub q: Poly,
    pub r: Poly,
}

/// A polynomial vector field U ∂x + V ∂y + W ∂z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub u: Poly,
    pub v: Poly,
    pub w: Poly,
}

impl VectorField {
    pub fn new(u: Poly, v: Poly, w: Poly) -> VectorField {
        VectorField { u, v, w }
    }

    /// The (weighted) Euler field sum w_i x_i ∂_i.
    pub fn euler(weights: &Weights, vars: &VarSet, field: &Field) -> VectorField {
        VectorField {
            u: Poly::var(0, vars, field).scale(&Scalar::from_int(weights[0] as i64, field)),
            v: Poly::var(1, vars, field).scale(&Scalar::from_int(weights[1] as i64, field)),
            w: Poly::var(2, vars, field).scale(&Scalar::from_int(weights[2] as i64, field)),
        }
    }

    /// Apply the derivation to a polynomial: U p_x + V p_y + W p_z.
    pub fn apply(&self, p: &Poly) -> Result<Poly, PolyError> {
        self.u
            .mul(&p.derivative(0))?
            .add(&self.v.mul(&p.derivative(1))?)?
            .add(&self.w.mul(&p.derivative(2))?)
    }
}

impl OneForm {
    /// Build and saturate: divide out the monic gcd of the components.
    pub fn new(a: Poly, b: Poly, c: Poly, weights: Weights) -> Result<OneForm, PolyError> {
        if a.is_zero() && b.is_zero() && c.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let g = a.gcd(&b)?.gcd(&c)?;
        let (a, b, c) = if g.is_constant() {
            (a, b, c)
        } else {
            (a.exact_div(&g)?, b.exact_div(&g)?, c.exact_div(&g)?)
        };
        Ok(OneForm {
            a,
            b,
            c,
            weights,
            extracted: g,
        })
    }

    /// Build without saturating (for raw pullback results and the like).
    pub fn raw(a: Poly, b: Poly, c: Poly, weights: Weights) -> OneForm {
        let one = Poly::one(&a.vars, &a.field);
        OneForm {
            a,
            b,
            c,
            weights,
            extracted: one,
        }
    }

    pub fn vars(&self) -> &VarSet {
        &self.a.vars
    }

    pub fn field(&self) -> &Field {
        &self.a.field
    }

    pub fn components(&self) -> [&Poly; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn scale(&self, s: &Scalar) -> OneForm {
        OneForm {
            a: self.a.scale(s),
            b: self.b.scale(s),
            c: self.c.scale(s),
            weights: self.weights.clone(),
            extracted: self.extracted.clone(),
        }
    }

    /// Equality up to a nonzero scalar of the field (both sides saturated).
    pub fn proportional_to(&self, other: &OneForm) -> bool {
        match self.leading_component_pair(other) {
            None => false,
            Some((s, o)) => {
                let Some(f) = crate::poly::proportionality_factor(o, s) else {
                    return false;
                };
                self.a.scale(&f) == other.a
                    && self.b.scale(&f) == other.b
                    && self.c.scale(&f) == other.c
            }
        }
    }

    /// The scalar c with other = c * self, if proportional.
    pub fn proportionality_factor(&self, other: &OneForm) -> Option<Scalar> {
        if !self.proportional_to(other) {
            return None;
        }
        let (s, o) = self.leading_component_pair(other)?;
        crate::poly::proportionality_factor(o, s)
    }

    fn leading_component_pair<'a>(&'a self, other: &'a OneForm) -> Option<(&'a Poly, &'a Poly)> {
        for (s, o) in self.components().into_iter().zip(other.components()) {
            if !s.is_zero() || !o.is_zero() {
                return Some((s, o));
            }
        }
        None
    }

    /// Common (weighted-)homogeneous degree of the nonzero components, where
    /// the dx_i component is counted with its natural shift +w_i (so all
    /// three agree for a quasihomogeneous form).
    pub fn form_degree(&self) -> Result<u64, PolyError> {
        let mut common: Option<u64> = None;
        for (i, p) in self.components().into_iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let Some(d) = p.weighted_degree(&self.weights)? else {
                return Err(PolyError::ZeroPolynomial);
            };
            let total = d + self.weights[i] as u64;
            match common {
                None => common = Some(total),
                Some(c) if c == total => {}
                Some(_) => return Err(PolyError::ZeroPolynomial),
            }
        }
        common.ok_or(PolyError::ZeroPolynomial)
    }
}

#[derive(Debug, Clone)]
pub enum ExteriorError {
    Poly(PolyError),
    Inhomogeneous,
    ZeroForm,
    NotProjective,
}

impl From<PolyError> for ExteriorError {
    fn from(e: PolyError) -> Self {
        ExteriorError::Poly(e)
    }
}

impl std::fmt::Display for ExteriorError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExteriorError::Poly(e) => write!(f, "{e}"),
            ExteriorError::Inhomogeneous => write!(f, "components are not homogeneous"),
            ExteriorError::ZeroForm => write!(f, "contraction yields the zero form"),
            ExteriorError::NotProjective => {
                write!(f, "operation requires unit weights and the Euler condition")
            }
        }
    }
}

impl std::error::Error for ExteriorError {}

/// The (weighted) Euler contraction Σ w_i x_i A_i = 0 test.
pub fn euler_check(form: &OneForm) -> Result<bool, ExteriorError> {
    for p in form.components() {
        if !p.is_zero() && p.weighted_degree(&form.weights)?.is_none() {
            return Err(ExteriorError::Inhomogeneous);
        }
    }
    let vars = form.vars();
    let field = form.field();
    let mut acc = Poly::zero(vars, field);
    for (i, p) in form.components().into_iter().enumerate() {
        let wi = Scalar::from_int(form.weights[i] as i64, field);
        let t = Poly::var(i, vars, field).scale(&wi).mul(p)?;
        acc = acc.add(&t)?;
    }
    Ok(acc.is_zero())
}

/// Degree of the projective foliation: common component degree minus one.
pub fn foliation_degree(form: &OneForm) -> Result<i64, ExteriorError> {
    if form.weights != vec![1, 1, 1] || !euler_check(form)? {
        return Err(ExteriorError::NotProjective);
    }
    let d = form.form_degree()? as i64;
    Ok(d - 1 - 1) // form_degree counts the +1 shift of dx_i
}

/// i_W i_L (dx∧dy∧dz): the cross-product contraction, saturated.
pub fn form_from_vfield(
    w: &VectorField,
    l: &VectorField,
    weights: Weights,
) -> Result<OneForm, ExteriorError> {
    let a = l.v.mul(&w.w)?.sub(&l.w.mul(&w.v)?)?;
    let b = l.w.mul(&w.u)?.sub(&l.u.mul(&w.w)?)?;
    let c = l.u.mul(&w.v)?.sub(&l.v.mul(&w.u)?)?;
    if a.is_zero() && b.is_zero() && c.is_zero() {
        return Err(ExteriorError::ZeroForm);
    }
    Ok(OneForm::new(a, b, c, weights)?)
}

/// The three components of dg ∧ ω, in the fixed (dy∧dz, dz∧dx, dx∧dy) order.
pub fn dg_wedge(g: &Poly, form: &OneForm) -> Result<TwoForm, PolyError> {
    let gx = g.derivative(0);
    let gy = g.derivative(1);
    let gz = g.derivative(2);
    Ok(TwoForm {
        p: gy.mul(&form.c)?.sub(&gz.mul(&form.b)?)?,
        q: gz.mul(&form.a)?.sub(&gx.mul(&form.c)?)?,
        r: gx.mul(&form.b)?.sub(&gy.mul(&form.a)?)?,
    })
}

/// Invariance certificate: the cofactor Θ with dg∧ω = g·Θ, when it exists.
pub fn invariant_curve(form: &OneForm, g: &Poly) -> Result<Option<TwoForm>, PolyError> {
    let w = dg_wedge(g, form)?;
    let p = match w.p.exact_div(g) {
        Ok(p) => p,
        Err(PolyError::NotDivisible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let q = match w.q.exact_div(g) {
        Ok(q) => q,
        Err(PolyError::NotDivisible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let r = match w.r.exact_div(g) {
        Ok(r) => r,
        Err(PolyError::NotDivisible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(TwoForm { p, q, r }))
}

/// All exponent vectors of total degree d in three variables, in a fixed
/// deterministic order.
pub fn monomials_of_degree(d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push(Mono(vec![i, j, d - i - j]));
        }
    }
    out
}

/// Basis of the space of degree-(d+1) forms satisfying the Euler condition
/// and leaving every curve invariant, via exact kernel computation on the
/// coefficient space.
pub fn tangent_foliation_space(
    curves: &[Poly],
    d: u32,
    vars: &VarSet,
    field: &Field,
) -> Result<Vec<OneForm>, ExteriorError> {
    let comp_deg = d + 1;
    let monos = monomials_of_degree(comp_deg);
    let n = monos.len();
    let unknowns = 3 * n;

    // One basis 1-form per (component, monomial) pair.
    let basis_form = |k: usize| -> OneForm {
        let (slot, mi) = (k / n, k % n);
        let mut parts = [
            Poly::zero(vars, field),
            Poly::zero(vars, field),
            Poly::zero(vars, field),
        ];
        parts[slot]
            .terms
            .insert(monos[mi].clone(), Scalar::one(field));
        let [a, b, c] = parts;
        OneForm::raw(a, b, c, vec![1, 1, 1])
    };

    // Condition vector for a form: coefficients of the Euler contraction,
    // then coefficients of the remainder of each dg∧ω component mod g.
    let euler_monos = monomials_of_degree(comp_deg + 1);
    let curve_monos: Vec<Vec<Mono>> = curves
        .iter()
        .map(|g| monomials_of_degree(comp_deg + g.total_degree() as u32 - 1))
        .collect();
    let cond_len = euler_monos.len()
        + curve_monos.iter().map(|m| 3 * m.len()).sum::<usize>();

    let coeffs_at = |p: &Poly, monos: &[Mono], out: &mut Vec<Scalar>| {
        for m in monos {
            out.push(p.terms.get(m).cloned().unwrap_or_else(|| Scalar::zero(field)));
        }
    };

    let mut columns: Vec<Vec<Scalar>> = Vec::with_capacity(unknowns);
    for k in 0..unknowns {
        let form = basis_form(k);
        let mut cond = Vec::with_capacity(cond_len);
        let mut euler = Poly::zero(vars, field);
        for (i, p) in form.components().into_iter().enumerate() {
            euler = euler.add(&Poly::var(i, vars, field).mul(p)?)?;
        }
        coeffs_at(&euler, &euler_monos, &mut cond);
        for (g, gm) in curves.iter().zip(&curve_monos) {
            let w = dg_wedge(g, &form)?;
            for comp in [&w.p, &w.q, &w.r] {
                let (_, rem) = comp.div_rem(g)?;
                coeffs_at(&rem, gm, &mut cond);
            }
        }
        columns.push(cond);
    }

    // Rows are conditions, columns are unknowns.
    let mut rows = vec![Vec::with_capacity(unknowns); cond_len];
    for col in &columns {
        for (r, v) in col.iter().enumerate() {
            rows[r].push(v.clone());
        }
    }
    let mat = Matrix::new(rows, unknowns, field);
    let mut out = Vec::new();
    for v in mat.kernel_basis() {
        let mut parts = [
            Poly::zero(vars, field),
            Poly::zero(vars, field),
            Poly::zero(vars, field),
        ];
        for (k, c) in v.into_iter().enumerate() {
            if !c.is_zero() {
                parts[k / n].terms.insert(monos[k % n].clone(), c);
            }
        }
        let [a, b, c] = parts;
        // Kernel vectors are nonzero; saturation keeps the span honest for
        // dimension counts only when no common factor sneaks in, so keep raw.
        out.push(OneForm::raw(a, b, c, vec![1, 1, 1]));
    }
    Ok(out)
}
