//! Rational maps between (weighted) projective planes: saturated
//! composition, pullbacks of 1-forms, Jacobians, order and fixed-locus
//! checks, pencil preservation, and monomial maps.

use crate::exterior::{OneForm, Weights};
use crate::matrix::Matrix;
use crate::poly::{kth_root_part, Poly, PolyError, RationalFn, VarSet};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone)]
pub enum BirmapError {
    Poly(PolyError),
    WeightMismatch,
    ZeroMap,
    NotSquare,
    NotUnimodular,
    NotEuler,
    DegreeMismatch,
}

impl From<PolyError> for BirmapError {
    fn from(e: PolyError) -> Self {
        BirmapError::Poly(e)
    }
}

impl std::fmt::Display for BirmapError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BirmapError::Poly(e) => write!(f, "{e}"),
            BirmapError::WeightMismatch => write!(f, "source/destination weights do not match"),
            BirmapError::ZeroMap => write!(f, "all components vanish identically"),
            BirmapError::NotSquare => write!(f, "Jacobian needs as many components as variables"),
            BirmapError::NotUnimodular => write!(f, "matrix determinant must be +-1"),
            BirmapError::NotEuler => write!(f, "form does not satisfy the Euler condition"),
            BirmapError::DegreeMismatch => {
                write!(f, "components are not weighted-homogeneous of compatible degrees")
            }
        }
    }
}

impl std::error::Error for BirmapError {}

/// A rational map given by a saturated tuple of weighted-homogeneous
/// polynomial components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMap {
    pub components: Vec<Poly>,
    pub src_weights: Weights,
    pub dst_weights: Weights,
    /// Monic factor h divided out at construction (h^{w_i} from component i).
    pub extracted: Poly,
}

impl RationalMap {
    /// Build and saturate. For unit destination weights this divides out the
    /// plain gcd; in the weighted case the largest h with h^{w_i} dividing
    /// component i.
    pub fn new(
        components: Vec<Poly>,
        src_weights: Weights,
        dst_weights: Weights,
    ) -> Result<RationalMap, BirmapError> {
        if components.is_empty() || components.iter().all(|c| c.is_zero()) {
            return Err(BirmapError::ZeroMap);
        }
        let (vars, field) = (components[0].vars.clone(), components[0].field.clone());
        let mut h = Poly::zero(&vars, &field);
        for (c, w) in components.iter().zip(&dst_weights) {
            if c.is_zero() {
                continue;
            }
            let part = kth_root_part(c, *w);
            h = h.gcd(&part)?;
            if h.is_constant() {
                break;
            }
        }
        let h = h.monic();
        let components = if h.is_constant() {
            components
        } else {
            components
                .iter()
                .zip(&dst_weights)
                .map(|(c, w)| {
                    if c.is_zero() {
                        Ok(c.clone())
                    } else {
                        c.exact_div(&h.pow(*w))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(RationalMap {
            components,
            src_weights,
            dst_weights,
            extracted: h,
        })
    }

    pub fn plane(components: Vec<Poly>) -> Result<RationalMap, BirmapError> {
        RationalMap::new(components, vec![1, 1, 1], vec![1, 1, 1])
    }

    pub fn identity(vars: &VarSet, weights: &Weights, field: &Field) -> RationalMap {
        let components = (0..weights.len()).map(|i| Poly::var(i, vars, field)).collect();
        RationalMap {
            components,
            src_weights: weights.clone(),
            dst_weights: weights.clone(),
            extracted: Poly::one(vars, field),
        }
    }

    pub fn vars(&self) -> &VarSet {
        &self.components[0].vars
    }

    pub fn field(&self) -> &Field {
        &self.components[0].field
    }

    /// The common integer d with component i weighted-homogeneous of degree
    /// w_i * d.
    pub fn degree(&self) -> Result<u64, BirmapError> {
        let mut d: Option<u64> = None;
        for (c, w) in self.components.iter().zip(&self.dst_weights) {
            if c.is_zero() {
                continue;
            }
            let Some(wd) = c.weighted_degree(&self.src_weights)? else {
                return Err(BirmapError::DegreeMismatch);
            };
            if wd % *w as u64 != 0 {
                return Err(BirmapError::DegreeMismatch);
            }
            let this = wd / *w as u64;
            match d {
                None => d = Some(this),
                Some(v) if v == this => {}
                Some(_) => return Err(BirmapError::DegreeMismatch),
            }
        }
        d.ok_or(BirmapError::ZeroMap)
    }

    /// self after other: substitute the components of `other` into `self`.
    pub fn compose(&self, other: &RationalMap) -> Result<RationalMap, BirmapError> {
        if self.src_weights != other.dst_weights {
            return Err(BirmapError::WeightMismatch);
        }
        let comps = self
            .components
            .iter()
            .map(|c| c.substitute_poly(&other.components))
            .collect::<Result<Vec<_>, _>>()?;
        RationalMap::new(comps, other.src_weights.clone(), self.dst_weights.clone())
    }

    pub fn apply_point(&self, p: &[Scalar]) -> Option<Vec<Scalar>> {
        let image: Vec<Scalar> = self.components.iter().map(|c| c.eval(p)).collect();
        if image.iter().all(|s| s.is_zero()) {
            None // p is a point of indeterminacy
        } else {
            Some(image)
        }
    }

    /// Least n <= nmax with the n-fold composition equal to the identity up
    /// to a scalar, if any.
    pub fn order_up_to_scale(&self, nmax: u32) -> Result<Option<u32>, BirmapError> {
        if self.src_weights != self.dst_weights {
            return Err(BirmapError::WeightMismatch);
        }
        let id = RationalMap::identity(self.vars(), &self.src_weights, self.field());
        let mut acc = self.clone();
        for n in 1..=nmax {
            if maps_equal_up_to_scale(&acc, &id)? {
                return Ok(Some(n));
            }
            acc = self.compose(&acc)?;
        }
        Ok(None)
    }

    /// True iff every 2x2 minor f_i x_j - f_j x_i is divisible by g, i.e. g
    /// lies in the fixed locus.
    pub fn fixed_locus_contains(&self, g: &Poly) -> Result<bool, BirmapError> {
        let id = RationalMap::identity(self.vars(), &self.src_weights, self.field());
        for i in 0..self.components.len() {
            for j in (i + 1)..self.components.len() {
                let minor = self.components[i]
                    .mul(&id.components[j])?
                    .sub(&self.components[j].mul(&id.components[i])?)?;
                if !minor.is_zero() {
                    let (_, rem) = minor.div_rem(g)?;
                    if !rem.is_zero() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// True iff g vanishes identically on the image.
    pub fn image_satisfies(&self, g: &Poly) -> Result<bool, BirmapError> {
        Ok(g.substitute_poly(&self.components)?.is_zero())
    }

    /// Determinant of the matrix of partial derivatives of the lift.
    pub fn jacobian_det(&self) -> Result<Poly, BirmapError> {
        let n = self.components.len();
        if n != self.vars().len() {
            return Err(BirmapError::NotSquare);
        }
        let rows: Vec<Vec<Poly>> = self
            .components
            .iter()
            .map(|c| (0..n).map(|v| c.derivative(v)).collect())
            .collect();
        Ok(poly_det(&rows)?)
    }

    /// Pullback of a 1-form on the destination: sum_i (A_i o f) df_i,
    /// saturated; the extracted polynomial factor is returned alongside.
    pub fn pullback_form(&self, form: &OneForm) -> Result<(OneForm, Poly), BirmapError> {
        if form.weights != self.dst_weights {
            return Err(BirmapError::WeightMismatch);
        }
        let vars = self.vars();
        let field = self.field();
        let nv = vars.len();
        let mut comps = vec![Poly::zero(vars, field); nv];
        for (coeff, f) in form.components().into_iter().zip(&self.components) {
            let pulled = coeff.substitute_poly(&self.components)?;
            for (v, slot) in comps.iter_mut().enumerate() {
                *slot = slot.add(&pulled.mul(&f.derivative(v))?)?;
            }
        }
        if comps.iter().all(|c| c.is_zero()) {
            return Err(BirmapError::ZeroMap);
        }
        let [a, b, c]: [Poly; 3] = comps.try_into().map_err(|_| BirmapError::NotSquare)?;
        let out = OneForm::new(a, b, c, self.src_weights.clone())?;
        let factor = out.extracted.clone();
        Ok((out, factor))
    }

    /// As `pullback_form`, but the destination form must satisfy its
    /// (weighted) Euler condition; intended for the quasihomogeneous bridge.
    pub fn weighted_pullback(&self, form: &OneForm) -> Result<(OneForm, Poly), BirmapError> {
        match crate::exterior::euler_check(form) {
            Ok(true) => {}
            Ok(false) => return Err(BirmapError::NotEuler),
            Err(e) => {
                return Err(match e {
                    crate::exterior::ExteriorError::Poly(p) => BirmapError::Poly(p),
                    _ => BirmapError::DegreeMismatch,
                })
            }
        }
        self.pullback_form(form)
    }
}

/// Determinant by cofactor expansion (matrices here are at most 4x4).
pub fn poly_det(rows: &[Vec<Poly>]) -> Result<Poly, PolyError> {
    let n = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    if n == 1 {
        return Ok(rows[0][0].clone());
    }
    let (vars, field) = (&rows[0][0].vars, &rows[0][0].field);
    let mut acc = Poly::zero(vars, field);
    for j in 0..n {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = rows[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = rows[0][j].mul(&poly_det(&minor)?)?;
        acc = if j % 2 == 0 {
            acc.add(&term)?
        } else {
            acc.sub(&term)?
        };
    }
    Ok(acc)
}

/// Equality of saturated maps up to one scalar: cross products of the
/// weighted powers agree pairwise. Both maps must be saturated; then the
/// only possible proportionality factor is a constant.
pub fn maps_equal_up_to_scale(f: &RationalMap, g: &RationalMap) -> Result<bool, BirmapError> {
    if f.dst_weights != g.dst_weights || f.components.len() != g.components.len() {
        return Ok(false);
    }
    let w = &f.dst_weights;
    for i in 0..f.components.len() {
        for j in (i + 1)..f.components.len() {
            // f_i^{w_j} g_j^{w_i} == f_j^{w_i} g_i^{w_j}
            let lhs = f.components[i]
                .pow(w[j])
                .mul(&g.components[j].pow(w[i]))?;
            let rhs = f.components[j]
                .pow(w[i])
                .mul(&g.components[i].pow(w[j]))?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        // matching vanishing pattern
        if f.components[i].is_zero() != g.components[i].is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Equality of points in weighted projective space: same support, and all
/// weighted cross relations p_i^{L/w_i} q_j^{L/w_j} = q_i^{L/w_i} p_j^{L/w_j}
/// with L = lcm of the weights.
pub fn points_equal(p: &[Scalar], q: &[Scalar], weights: &Weights) -> bool {
    if p.len() != q.len() {
        return false;
    }
    let lcm = weights.iter().fold(1u32, |a, &b| a / gcd_u32(a, b) * b);
    for i in 0..p.len() {
        if p[i].is_zero() != q[i].is_zero() {
            return false;
        }
        for j in (i + 1)..p.len() {
            let (ei, ej) = (lcm / weights[i], lcm / weights[j]);
            let lhs = p[i].pow(ei).mul(&q[j].pow(ej)).unwrap();
            let rhs = q[i].pow(ei).mul(&p[j].pow(ej)).unwrap();
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

/// A pencil of lines spanned by two independent linear forms.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub l1: Poly,
    pub l2: Poly,
}

/// When the map carries the pencil to itself uniformly — a single common
/// cofactor C and a constant matrix M with (l1 o f, l2 o f) = C * M (l1, l2)
/// — return them.
pub fn preserves_pencil(
    f: &RationalMap,
    pencil: &Pencil,
) -> Result<Option<([[Scalar; 2]; 2], Poly)>, BirmapError> {
    let p1 = pencil.l1.substitute_poly(&f.components)?;
    let p2 = pencil.l2.substitute_poly(&f.components)?;
    let c = p1.gcd(&p2)?;
    let q1 = p1.exact_div(&c)?;
    let q2 = p2.exact_div(&c)?;
    if q1.total_degree() != 1 || q2.total_degree() != 1 {
        return Ok(None);
    }
    // Express q1, q2 in the span of l1, l2 by matching coefficients on the
    // three linear monomials.
    let field = f.field();
    let nv = f.vars().len();
    let coeff = |p: &Poly, v: usize| -> Scalar {
        let mut e = vec![0u32; nv];
        e[v] = 1;
        p.terms
            .get(&crate::poly::Mono(e))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(field))
    };
    let mat = Matrix::new(
        (0..nv)
            .map(|v| vec![coeff(&pencil.l1, v), coeff(&pencil.l2, v)])
            .collect(),
        2,
        field,
    );
    let row = |q: &Poly| -> Option<[Scalar; 2]> {
        let b: Vec<Scalar> = (0..nv).map(|v| coeff(q, v)).collect();
        mat.solve(&b).map(|x| [x[0].clone(), x[1].clone()])
    };
    let (Some(r1), Some(r2)) = (row(&q1), row(&q2)) else {
        return Ok(None);
    };
    Ok(Some(([r1, r2], c)))
}

/// The plane monomial map induced by a unimodular 2x2 integer matrix via
/// (x, y) -> (x^a y^b, x^c y^d) in the affine chart z = 1, projectivized
/// with minimal nonnegative exponents.
pub fn monomial_map(
    m: [[i64; 2]; 2],
    vars: &VarSet,
    field: &Field,
) -> Result<RationalMap, BirmapError> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 && det != -1 {
        return Err(BirmapError::NotUnimodular);
    }
    // Exponent vectors of the three components in (x, y, z).
    let mut exps = [
        [m[0][0], m[0][1], -m[0][0] - m[0][1]],
        [m[1][0], m[1][1], -m[1][0] - m[1][1]],
        [0, 0, 0],
    ];
    for v in 0..3 {
        let min = exps.iter().map(|e| e[v]).min().unwrap();
        for e in exps.iter_mut() {
            e[v] -= min;
        }
    }
    let comps = exps
        .iter()
        .map(|e| {
            let mut p = Poly::one(vars, field);
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    p = p.mul(&Poly::var(v, vars, field).pow(k as u32)).unwrap();
                }
            }
            p
        })
        .collect();
    RationalMap::plane(comps)
}

/// Clear denominators of a weighted tuple of rational functions into a map:
/// component i becomes r_i * t^{w_i} for t = product of the denominators,
/// then saturates.
pub fn weighted_map_from_ratfns(
    rfs: &[RationalFn],
    src_weights: Weights,
    dst_weights: Weights,
) -> Result<RationalMap, BirmapError> {
    let vars = &rfs[0].num.vars;
    let field = &rfs[0].num.field;
    let mut t = Poly::one(vars, field);
    for r in rfs {
        t = t.mul(&r.den)?;
    }
    let comps = rfs
        .iter()
        .zip(&dst_weights)
        .map(|(r, w)| {
            let scaled = r.num.mul(&t.pow(*w))?;
            scaled.exact_div(&r.den)
        })
        .collect::<Result<Vec<_>, _>>()?;
    RationalMap::new(comps, src_weights, dst_weights)
}

/// Inverse of a linear plane map via exact matrix inversion.
pub fn linear_inverse(f: &RationalMap) -> Result<RationalMap, BirmapError> {
    let n = f.components.len();
    if f.components.iter().any(|c| !c.is_zero() && c.total_degree() != 1) || n != f.vars().len() {
        return Err(BirmapError::NotSquare);
    }
    let field = f.field();
    let vars = f.vars();
    let coeff = |p: &Poly, v: usize| -> Scalar {
        let mut e = vec![0u32; n];
        e[v] = 1;
        p.terms
            .get(&crate::poly::Mono(e))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(field))
    };
    let mat = Matrix::new(
        f.components
            .iter()
            .map(|c| (0..n).map(|v| coeff(c, v)).collect())
            .collect(),
        n,
        field,
    );
    let mut inv_cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Scalar::zero(field); n];
        e[j] = Scalar::one(field);
        let col = mat.solve(&e).ok_or(BirmapError::ZeroMap)?;
        inv_cols.push(col);
    }
    let comps = (0..n)
        .map(|i| {
            let mut p = Poly::zero(vars, field);
            for (j, col) in inv_cols.iter().enumerate() {
                let t = Poly::var(j, vars, field).scale(&col[i]);
                p = p.add(&t).unwrap();
            }
            p
        })
        .collect();
    RationalMap::new(comps, f.src_weights.clone(), f.dst_weights.clone())
}
