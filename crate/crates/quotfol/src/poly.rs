//! Sparse multivariate polynomials over a [`Scalar`](crate::scalar::Scalar)
//! field, with exact division, gcd, substitution and weighted-homogeneity
//! predicates.
//!
//! Terms are kept in a `BTreeMap` under graded lexicographic order, so
//! equality and display are canonical. The gcd is a recursive
//! content/primitive-part reduction to a univariate primitive pseudo-remainder
//! sequence; at the degrees appearing in the suites (<= ~30, <= 4 variables)
//! this is entirely adequate.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::scalar::{rat_int, Field, FieldSpec, Scalar, ScalarError};

pub type VarSet = Arc<Vec<String>>;

pub fn varset(names: &[&str]) -> VarSet {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

/// Exponent vector, ordered by graded lex (total degree first, then lex).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(e, w)| *e as u64 * *w as u64)
            .sum()
    }

    fn mul(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub enum PolyError {
    Scalar(ScalarError),
    VarMismatch,
    NotDivisible { remainder: Box<Poly> },
    ZeroDenominator,
    ZeroPolynomial,
    MissingAssignment(String),
}

impl From<ScalarError> for PolyError {
    fn from(e: ScalarError) -> Self {
        PolyError::Scalar(e)
    }
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::Scalar(e) => write!(f, "{e}"),
            PolyError::VarMismatch => write!(f, "variable sets differ"),
            PolyError::NotDivisible { remainder } => {
                write!(f, "not divisible, remainder {remainder}")
            }
            PolyError::ZeroDenominator => write!(f, "denominator is identically zero"),
            PolyError::ZeroPolynomial => write!(f, "zero polynomial not allowed here"),
            PolyError::MissingAssignment(v) => write!(f, "no assignment for variable {v}"),
        }
    }
}

impl std::error::Error for PolyError {}

/// Sparse multivariate polynomial in canonical form: no zero coefficients,
/// terms keyed by exponent vector under graded lex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub terms: BTreeMap<Mono, Scalar>,
    pub vars: VarSet,
    pub field: Field,
}

impl Poly {
    pub fn zero(vars: &VarSet, field: &Field) -> Poly {
        Poly {
            terms: BTreeMap::new(),
            vars: vars.clone(),
            field: field.clone(),
        }
    }

    pub fn constant(c: Scalar, vars: &VarSet) -> Poly {
        let field = c.field.clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(vec![0; vars.len()]), c);
        }
        Poly {
            terms,
            vars: vars.clone(),
            field,
        }
    }

    pub fn one(vars: &VarSet, field: &Field) -> Poly {
        Poly::constant(Scalar::one(field), vars)
    }

    pub fn int(n: i64, vars: &VarSet, field: &Field) -> Poly {
        Poly::constant(Scalar::from_int(n, field), vars)
    }

    pub fn var(idx: usize, vars: &VarSet, field: &Field) -> Poly {
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(Mono(e), Scalar::one(field));
        Poly {
            terms,
            vars: vars.clone(),
            field: field.clone(),
        }
    }

    pub fn var_named(name: &str, vars: &VarSet, field: &Field) -> Option<Poly> {
        vars.iter()
            .position(|v| v == name)
            .map(|i| Poly::var(i, vars, field))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero(&self.field));
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn total_degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn degree_in(&self, var: usize) -> i64 {
        self.terms
            .keys()
            .map(|m| m.0[var] as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Leading term under graded lex.
    pub fn leading(&self) -> Option<(&Mono, &Scalar)> {
        self.terms.iter().next_back()
    }

    fn check_compat(&self, other: &Poly) -> Result<(VarSet, Field), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::VarMismatch);
        }
        let field = if self.field == other.field {
            self.field.clone()
        } else if self.field.is_rational() {
            other.field.clone()
        } else if other.field.is_rational() {
            self.field.clone()
        } else {
            return Err(ScalarError::FieldMismatch(
                self.field.name.clone(),
                other.field.name.clone(),
            )
            .into());
        };
        Ok((self.vars.clone(), field))
    }

    fn insert_term(terms: &mut BTreeMap<Mono, Scalar>, m: Mono, c: Scalar) {
        use std::collections::btree_map::Entry;
        match terms.entry(m) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&c).expect("field join checked upstream");
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        let (vars, field) = self.check_compat(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::insert_term(&mut terms, m.clone(), c.clone());
        }
        Ok(Poly { terms, vars, field })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
            vars: self.vars.clone(),
            field: self.field.clone(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        let (vars, field) = self.check_compat(other)?;
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let c = c1.mul(c2)?;
                Self::insert_term(&mut terms, m1.mul(m2), c);
            }
        }
        Ok(Poly { terms, vars, field })
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars, &self.field);
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.mul(c).expect("field join")))
                .collect(),
            vars: self.vars.clone(),
            field: if self.field.is_rational() {
                c.field.clone()
            } else {
                self.field.clone()
            },
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.vars, &self.field);
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base).unwrap();
            }
        }
        acc
    }

    /// Division with remainder by a single divisor under graded lex. Since
    /// {d} is a Groebner basis of the principal ideal it generates, the
    /// remainder is zero exactly when d divides self, and the remainder map
    /// is linear in self for fixed d.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly), PolyError> {
        if d.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let (vars, field) = self.check_compat(d)?;
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let dc_inv = dc.inv()?;
        let mut work = self.clone();
        let mut quo = Poly::zero(&vars, &field);
        let mut rem = Poly::zero(&vars, &field);
        while let Some((rm, rc)) = work.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !dm.divides(&rm) {
                work.terms.remove(&rm);
                Self::insert_term(&mut rem.terms, rm, rc);
                continue;
            }
            let qm = rm.div(&dm);
            let qc = rc.mul(&dc_inv)?;
            let mut t = BTreeMap::new();
            t.insert(qm, qc);
            let term = Poly {
                terms: t,
                vars: vars.clone(),
                field: field.clone(),
            };
            work = work.sub(&term.mul(d)?)?;
            quo = quo.add(&term)?;
        }
        Ok((quo, rem))
    }

    /// Exact division; the error carries the nonzero remainder as a witness.
    pub fn exact_div(&self, d: &Poly) -> Result<Poly, PolyError> {
        let (quo, rem) = self.div_rem(d)?;
        if rem.is_zero() {
            Ok(quo)
        } else {
            Err(PolyError::NotDivisible {
                remainder: Box::new(rem),
            })
        }
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.exact_div(self).is_ok()
    }

    /// Partial derivative.
    pub fn derivative(&self, var: usize) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut em = m.0.clone();
            em[var] -= 1;
            let coeff = c
                .mul(&Scalar::from_int(e as i64, &c.field))
                .expect("same field");
            Self::insert_term(&mut terms, Mono(em), coeff);
        }
        Poly {
            terms,
            vars: self.vars.clone(),
            field: self.field.clone(),
        }
    }

    /// Leading coefficient normalized to one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = c.inv().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
        }
    }

    /// Common weighted degree of all terms, if they agree.
    pub fn weighted_degree(&self, weights: &[u32]) -> Result<Option<u64>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut it = self.terms.keys();
        let d = it.next().unwrap().weighted_degree(weights);
        for m in it {
            if m.weighted_degree(weights) != d {
                return Ok(None);
            }
        }
        Ok(Some(d))
    }

    pub fn is_homogeneous(&self) -> bool {
        let w = vec![1u32; self.vars.len()];
        !self.is_zero() && self.weighted_degree(&w).unwrap().is_some()
    }

    /// Evaluate at scalar values, one per variable.
    pub fn eval(&self, vals: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero(&self.field);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    t = t.mul(&vals[i].pow(*e)).expect("field join");
                }
            }
            acc = acc.add(&t).expect("field join");
        }
        acc
    }

    /// Substitute a polynomial for every variable.
    pub fn substitute_poly(&self, assign: &[Poly]) -> Result<Poly, PolyError> {
        assert_eq!(assign.len(), self.vars.len());
        if self.is_zero() {
            let (v, f) = assign
                .first()
                .map(|p| (p.vars.clone(), p.field.clone()))
                .unwrap_or((self.vars.clone(), self.field.clone()));
            return Ok(Poly::zero(&v, &f));
        }
        let tvars = assign[0].vars.clone();
        // Power tables per variable.
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(assign.len());
        for (i, p) in assign.iter().enumerate() {
            let maxe = self.degree_in(i).max(0) as usize;
            let mut tab = Vec::with_capacity(maxe + 1);
            tab.push(Poly::one(&tvars, &p.field));
            for k in 1..=maxe {
                let next = tab[k - 1].mul(p)?;
                tab.push(next);
            }
            powers.push(tab);
        }
        let mut acc = Poly::zero(&tvars, &self.field);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone(), &tvars);
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    t = t.mul(&powers[i][*e as usize])?;
                }
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }

    /// Substitute a rational function for every variable.
    ///
    /// Works over the single common denominator prod den_i^(E_i), with E_i
    /// the largest exponent of variable i, so the whole substitution is
    /// polynomial arithmetic plus one final division.
    pub fn substitute(&self, assign: &[RationalFn]) -> Result<RationalFn, PolyError> {
        assert_eq!(assign.len(), self.vars.len());
        let (tvars, field) = match assign.first() {
            Some(r) => (r.num.vars.clone(), r.num.field.clone()),
            None => (self.vars.clone(), self.field.clone()),
        };
        let n = assign.len();
        let mut maxe = vec![0usize; n];
        for m in self.terms.keys() {
            for (i, e) in m.0.iter().enumerate() {
                maxe[i] = maxe[i].max(*e as usize);
            }
        }
        // Power tables for numerators and denominators.
        let mut npow: Vec<Vec<Poly>> = Vec::with_capacity(n);
        let mut dpow: Vec<Vec<Poly>> = Vec::with_capacity(n);
        for (i, r) in assign.iter().enumerate() {
            let mut nt = vec![Poly::one(&tvars, &field)];
            let mut dt = vec![Poly::one(&tvars, &field)];
            for k in 1..=maxe[i] {
                nt.push(nt[k - 1].mul(&r.num)?);
                dt.push(dt[k - 1].mul(&r.den)?);
            }
            npow.push(nt);
            dpow.push(dt);
        }
        let mut acc = Poly::zero(&tvars, &field);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone(), &tvars);
            for i in 0..n {
                let e = m.0[i] as usize;
                t = t.mul(&npow[i][e])?.mul(&dpow[i][maxe[i] - e])?;
            }
            acc = acc.add(&t)?;
        }
        let mut den = Poly::one(&tvars, &field);
        for i in 0..n {
            den = den.mul(&dpow[i][maxe[i]])?;
        }
        let inv = RationalFn {
            num: den,
            den: Poly::one(&tvars, &field),
        };
        RationalFn::from_poly(acc).div(&inv)
    }

    /// View as a univariate polynomial in `var`, coefficients not involving it.
    fn to_univariate(&self, var: usize) -> Vec<Poly> {
        let d = self.degree_in(var);
        if d < 0 {
            return Vec::new();
        }
        let mut coeffs = vec![Poly::zero(&self.vars, &self.field); d as usize + 1];
        for (m, c) in &self.terms {
            let e = m.0[var] as usize;
            let mut em = m.0.clone();
            em[var] = 0;
            Self::insert_term(&mut coeffs[e].terms, Mono(em), c.clone());
        }
        coeffs
    }

    fn from_univariate(coeffs: &[Poly], var: usize, vars: &VarSet, field: &Field) -> Poly {
        let mut acc = Poly::zero(vars, field);
        let x = Poly::var(var, vars, field);
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&c.mul(&x.pow(e as u32)).unwrap()).unwrap();
            }
        }
        acc
    }

    /// Greatest common divisor, normalized monic; gcd(p, 0) = monic p.
    pub fn gcd(&self, other: &Poly) -> Result<Poly, PolyError> {
        let (_, field) = self.check_compat(other)?;
        Ok(gcd_inner(self, other, &field).monic())
    }

    /// Content with respect to all variables: gcd of the univariate
    /// coefficient polynomials in `var`.
    fn content_in(&self, var: usize) -> Poly {
        let coeffs = self.to_univariate(var);
        let mut g = Poly::zero(&self.vars, &self.field);
        for c in &coeffs {
            if c.is_zero() {
                continue;
            }
            g = gcd_inner(&g, c, &self.field);
            if g.is_constant() && !g.is_zero() {
                break;
            }
        }
        g.monic()
    }

    /// Rescale by the rational content of the coefficients so they become
    /// integral with no common factor. Applied to pseudo-remainders, this
    /// keeps the coefficient size of gcd intermediates under control.
    fn scalar_primitive(&self) -> Poly {
        use num_bigint::BigInt;
        use num_integer::Integer;
        let mut num = BigInt::zero();
        let mut den = BigInt::from(1);
        for c in self.terms.values() {
            for r in [&c.a0, &c.a1] {
                if !r.is_zero() {
                    num = num.gcd(r.numer());
                    den = den.lcm(r.denom());
                }
            }
        }
        if num.is_zero() || (num.is_one() && den.is_one()) {
            return self.clone();
        }
        let scale = crate::scalar::Rat::new(den, num);
        self.map_coeffs(|c| Scalar {
            a0: &c.a0 * &scale,
            a1: &c.a1 * &scale,
            field: c.field.clone(),
        })
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Poly {
            terms,
            vars: self.vars.clone(),
            field: self.field.clone(),
        }
    }
}

fn univ_degree(u: &[Poly]) -> i64 {
    for i in (0..u.len()).rev() {
        if !u[i].is_zero() {
            return i as i64;
        }
    }
    -1
}

/// Pseudo-remainder of univariate views (coefficients are polynomials).
fn pseudo_rem(u: &[Poly], v: &[Poly]) -> Vec<Poly> {
    let dv = univ_degree(v);
    assert!(dv >= 0);
    let lcv = v[dv as usize].clone();
    let mut r: Vec<Poly> = u.to_vec();
    loop {
        let dr = univ_degree(&r);
        if dr < dv {
            break;
        }
        let lr = r[dr as usize].clone();
        for c in r.iter_mut() {
            *c = c.mul(&lcv).unwrap();
        }
        let off = (dr - dv) as usize;
        for j in 0..=dv as usize {
            r[off + j] = r[off + j].sub(&lr.mul(&v[j]).unwrap()).unwrap();
        }
        debug_assert!(r[dr as usize].is_zero());
    }
    r
}

fn gcd_inner(a: &Poly, b: &Poly, field: &Field) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(&a.vars, field);
    }
    if a.terms.len() == 1 || b.terms.len() == 1 {
        // gcd with a monomial: the componentwise minimum exponent vector.
        let mut e = vec![u32::MAX; a.vars.len()];
        for p in [a, b] {
            for m in p.terms.keys() {
                for (ei, mi) in e.iter_mut().zip(&m.0) {
                    *ei = (*ei).min(*mi);
                }
            }
        }
        let mut terms = BTreeMap::new();
        terms.insert(Mono(e), Scalar::one(field));
        return Poly {
            terms,
            vars: a.vars.clone(),
            field: field.clone(),
        };
    }
    if let Some(weights) = common_grading(a, b) {
        if let Some(g) = gcd_graded(a, b, &weights, field) {
            return g;
        }
    }
    // Main variable: first one occurring in either operand.
    let var = (0..a.vars.len())
        .find(|i| a.degree_in(*i) > 0 || b.degree_in(*i) > 0)
        .expect("nonconstant polynomial has a variable");
    if a.degree_in(var) == 0 || b.degree_in(var) == 0 {
        // One operand does not involve the main variable: the gcd divides the
        // content of the other.
        let (flat, tall) = if a.degree_in(var) == 0 { (a, b) } else { (b, a) };
        let cont = tall.content_in(var);
        return gcd_inner(flat, &cont, field);
    }
    let cont_a = a.content_in(var);
    let cont_b = b.content_in(var);
    let pp_a = a.exact_div(&cont_a).unwrap().scalar_primitive();
    let pp_b = b.exact_div(&cont_b).unwrap().scalar_primitive();
    let g_cont = gcd_inner(&cont_a, &cont_b, field);

    let mut u = pp_a.to_univariate(var);
    let mut v = pp_b.to_univariate(var);
    if univ_degree(&u) < univ_degree(&v) {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let r = pseudo_rem(&u, &v);
        if univ_degree(&r) < 0 {
            break;
        }
        u = v;
        let rp = Poly::from_univariate(&r, var, &a.vars, field);
        let rcont = rp.content_in(var);
        v = rp
            .exact_div(&rcont)
            .unwrap()
            .scalar_primitive()
            .to_univariate(var);
    }
    let vp = Poly::from_univariate(&v, var, &a.vars, field);
    let vcont = vp.content_in(var);
    let g_pp = vp.exact_div(&vcont).unwrap();
    g_cont.mul(&g_pp).unwrap()
}

/// A strictly positive integer grading under which both operands are
/// homogeneous, if one exists and is unique up to scale. Entries for
/// variables absent from both operands are zero.
fn common_grading(a: &Poly, b: &Poly) -> Option<Vec<u32>> {
    let n = a.vars.len();
    let appearing: Vec<usize> = (0..n)
        .filter(|&i| a.degree_in(i) > 0 || b.degree_in(i) > 0)
        .collect();
    let k = appearing.len();
    if k < 3 {
        return None;
    }
    // Within each operand, exponent differences must be orthogonal to the
    // weight vector; the grading spans the nullspace of the difference matrix.
    let mut mat: Vec<Vec<i128>> = Vec::new();
    for p in [a, b] {
        let mut it = p.terms.keys();
        let e0 = it.next().unwrap();
        for m in it {
            mat.push(
                appearing
                    .iter()
                    .map(|&i| m.0[i] as i128 - e0.0[i] as i128)
                    .collect(),
            );
        }
    }
    // Fraction-free reduced elimination over the integers.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0;
    for col in 0..k {
        let Some(pr) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, pr);
        for r in 0..mat.len() {
            if r != rank && mat[r][col] != 0 {
                let (p, q) = (mat[rank][col], mat[r][col]);
                for c in 0..k {
                    mat[r][c] = mat[r][c] * p - mat[rank][c] * q;
                }
                let g = mat[r].iter().fold(0i128, |acc, x| int_gcd(acc, *x));
                if g > 1 {
                    for c in 0..k {
                        mat[r][c] /= g;
                    }
                }
            }
        }
        pivots.push((rank, col));
        rank += 1;
        if rank == k {
            return None;
        }
    }
    if rank + 1 != k {
        return None;
    }
    let free = (0..k).find(|c| pivots.iter().all(|&(_, pc)| pc != *c))?;
    let scale = pivots
        .iter()
        .fold(1i128, |acc, &(r, c)| acc / int_gcd(acc, mat[r][c]) * mat[r][c].abs());
    let mut w = vec![0i128; k];
    w[free] = scale;
    for &(r, c) in &pivots {
        w[c] = -mat[r][free] * (scale / mat[r][c]);
    }
    let g = w.iter().fold(0i128, |acc, x| int_gcd(acc, *x));
    if g > 1 {
        for x in w.iter_mut() {
            *x /= g;
        }
    }
    if w.iter().all(|&x| x < 0) {
        for x in w.iter_mut() {
            *x = -*x;
        }
    }
    if w.iter().any(|&x| x <= 0 || x > u32::MAX as i128) {
        return None;
    }
    let mut full = vec![0u32; n];
    for (&i, &x) in appearing.iter().zip(&w) {
        full[i] = x as u32;
    }
    Some(full)
}

fn int_gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Gcd of two polynomials homogeneous under a common positive grading.
/// Setting a minimal-weight variable to 1 is injective on the monomials of
/// any homogeneous polynomial (the dropped exponent is recoverable from the
/// degree), so the gcd reduces to one in fewer variables and is regraded
/// afterwards to the least degree admitting nonnegative exponents.
fn gcd_graded(a: &Poly, b: &Poly, weights: &[u32], field: &Field) -> Option<Poly> {
    let v = (0..weights.len())
        .filter(|&i| weights[i] > 0)
        .min_by_key(|&i| weights[i])?;
    let wv = weights[v] as u64;
    let dehom = |p: &Poly| {
        let mut terms = BTreeMap::new();
        for (m, c) in &p.terms {
            let mut e = m.0.clone();
            e[v] = 0;
            terms.insert(Mono(e), c.clone());
        }
        Poly {
            terms,
            vars: p.vars.clone(),
            field: p.field.clone(),
        }
    };
    let g = gcd_inner(&dehom(a), &dehom(b), field);
    let degs: Vec<u64> = g
        .terms
        .keys()
        .map(|m| m.weighted_degree(weights))
        .collect();
    let r = degs[0] % wv;
    if degs.iter().any(|s| s % wv != r) {
        return None;
    }
    let smax = *degs.iter().max().unwrap();
    let target = smax + (r + wv - smax % wv) % wv;
    let ord = |p: &Poly| p.terms.keys().map(|m| m.0[v]).min().unwrap();
    let lift = ord(a).min(ord(b));
    let mut terms = BTreeMap::new();
    for ((m, c), s) in g.terms.iter().zip(&degs) {
        let mut e = m.0.clone();
        e[v] = ((target - s) / wv) as u32 + lift;
        terms.insert(Mono(e), c.clone());
    }
    Some(Poly {
        terms,
        vars: a.vars.clone(),
        field: field.clone(),
    })
}

/// Largest h (monic) such that h^k divides p, via squarefree decomposition.
pub fn kth_root_part(p: &Poly, k: u32) -> Poly {
    if k == 1 {
        return p.monic();
    }
    let mut result = Poly::one(&p.vars, &p.field);
    // p = prod a_i^i with a_i squarefree and pairwise coprime;
    // the answer is prod a_i^{floor(i/k)}.
    for (i, a) in squarefree_decomposition(p) {
        let e = i / k;
        if e > 0 {
            result = result.mul(&a.pow(e)).unwrap();
        }
    }
    result.monic()
}

/// Multiplicity-indexed squarefree factors. Returns pairs
/// (multiplicity, factor), factors monic and pairwise coprime.
///
/// Uses the chain p_0 = p, p_{j+1} = gcd(p_j, all partials of p_j); in
/// characteristic zero p_j = prod a_i^{i-j}, so consecutive quotients
/// d_j = p_{j-1}/p_j satisfy a_j = d_j/d_{j+1}.
pub fn squarefree_decomposition(p: &Poly) -> Vec<(u32, Poly)> {
    let mut chain = vec![p.monic()];
    while !chain.last().unwrap().is_constant() && chain.len() <= 64 {
        let cur = chain.last().unwrap();
        let mut g = cur.clone();
        for v in 0..cur.vars.len() {
            g = gcd_inner(&g, &cur.derivative(v), &cur.field);
        }
        chain.push(g.monic());
    }
    let mut d: Vec<Poly> = Vec::new();
    for j in 1..chain.len() {
        d.push(chain[j - 1].exact_div(&chain[j]).unwrap().monic());
    }
    let mut out = Vec::new();
    for j in 0..d.len() {
        let a = if j + 1 < d.len() {
            d[j].exact_div(&d[j + 1]).unwrap().monic()
        } else {
            d[j].clone()
        };
        if !a.is_constant() {
            out.push((j as u32 + 1, a));
        }
    }
    out
}

/// A rational function num/den with monic denominator.
///
/// `new` cancels the gcd; the arithmetic operators deliberately do not
/// (multivariate gcd is the single most expensive primitive here) and
/// instead cancel only via cheap exact-division checks, which covers the
/// common case of denominators that are powers of a fixed polynomial.
/// Equality compares cross products, so unreduced results still compare
/// equal to reduced ones; call `reduce` to get the canonical form.
#[derive(Debug, Clone, Eq)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl PartialEq for RationalFn {
    fn eq(&self, other: &RationalFn) -> bool {
        match (self.num.mul(&other.den), other.num.mul(&self.den)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

impl RationalFn {
    pub fn from_poly(p: Poly) -> RationalFn {
        let den = Poly::one(&p.vars, &p.field);
        RationalFn { num: p, den }
    }

    pub fn new(num: Poly, den: Poly) -> Result<RationalFn, PolyError> {
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        let g = num.gcd(&den)?;
        let num = num.exact_div(&g)?;
        let den = den.exact_div(&g)?;
        Ok(Self::raw(num, den))
    }

    /// No gcd; only makes the denominator monic.
    fn raw(num: Poly, den: Poly) -> RationalFn {
        debug_assert!(!den.is_zero());
        let lc = den.leading().unwrap().1.inv().expect("nonzero leading");
        RationalFn {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    /// Cancel the gcd of numerator and denominator.
    pub fn reduce(&self) -> Result<RationalFn, PolyError> {
        RationalFn::new(self.num.clone(), self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.as_constant().map(|c| c.is_one()).unwrap_or(false)
            || self.den.divides(&self.num)
    }

    pub fn add(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        if self.den == other.den {
            return Ok(Self::raw(self.num.add(&other.num)?, self.den.clone()));
        }
        // Cheap lcm when one denominator divides the other.
        if let Ok(q) = other.den.exact_div(&self.den) {
            let num = self.num.mul(&q)?.add(&other.num)?;
            return Ok(Self::raw(num, other.den.clone()));
        }
        if let Ok(q) = self.den.exact_div(&other.den) {
            let num = self.num.add(&other.num.mul(&q)?)?;
            return Ok(Self::raw(num, self.den.clone()));
        }
        let num = self
            .num
            .mul(&other.den)?
            .add(&other.num.mul(&self.den)?)?;
        Ok(Self::raw(num, self.den.mul(&other.den)?))
    }

    pub fn sub(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RationalFn {
        RationalFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        // Cross-cancel whole denominators when possible before multiplying.
        let (mut n1, mut d1) = (self.num.clone(), self.den.clone());
        let (mut n2, mut d2) = (other.num.clone(), other.den.clone());
        if !d2.is_constant() {
            if let Ok(q) = n1.exact_div(&d2) {
                n1 = q;
                d2 = Poly::one(&d2.vars, &d2.field);
            }
        }
        if !d1.is_constant() {
            if let Ok(q) = n2.exact_div(&d1) {
                n2 = q;
                d1 = Poly::one(&d1.vars, &d1.field);
            }
        }
        Ok(Self::raw(n1.mul(&n2)?, d1.mul(&d2)?))
    }

    pub fn div(&self, other: &RationalFn) -> Result<RationalFn, PolyError> {
        if other.num.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        let inv = RationalFn {
            num: other.den.clone(),
            den: other.num.clone(),
        };
        self.mul(&inv)
    }

    /// Substitute rational functions for the variables.
    pub fn substitute(&self, assign: &[RationalFn]) -> Result<RationalFn, PolyError> {
        let n = self.num.substitute(assign)?;
        let d = self.den.substitute(assign)?;
        n.div(&d)
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{}", self.num)
        } else if let Ok(q) = self.num.exact_div(&self.den) {
            write!(f, "{q}")
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// Display in descending graded lex, matching the scenario grammar so that
// printing and re-parsing round-trips.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let (sign, mag) = display_coeff(c);
            if first {
                if sign {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = display_mono(m, &self.vars);
            match (mag, mono) {
                (Some(mc), Some(ms)) => write!(f, "{mc}*{ms}")?,
                (Some(mc), None) => write!(f, "{mc}")?,
                (None, Some(ms)) => write!(f, "{ms}")?,
                (None, None) => write!(f, "1")?,
            }
        }
        Ok(())
    }
}

/// (is_negative, magnitude-string-or-None-if-one)
fn display_coeff(c: &Scalar) -> (bool, Option<String>) {
    if c.is_rational() {
        let neg = c.a0.is_negative();
        let mag = c.a0.abs();
        if mag.is_one() {
            (neg, None)
        } else {
            (neg, Some(format!("{mag}")))
        }
    } else if c.a0.is_zero() && c.a1.is_one() {
        (false, Some(c.field.gen.clone()))
    } else if c.a0.is_zero() && c.a1 == -rat_int(1) {
        (true, Some(c.field.gen.clone()))
    } else {
        (false, Some(format!("({c})")))
    }
}

fn display_mono(m: &Mono, vars: &VarSet) -> Option<String> {
    let mut parts = Vec::new();
    for (i, e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(vars[i].clone()),
            _ => parts.push(format!("{}^{}", vars[i], e)),
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("*"))
    }
}

/// Build a polynomial from integer-coefficient terms: (coeff, exponents).
pub fn poly_from_terms(terms: &[(i64, &[u32])], vars: &VarSet, field: &Field) -> Poly {
    let mut p = Poly::zero(vars, field);
    for (c, es) in terms {
        let mut t = Poly::int(*c, vars, field);
        for (i, e) in es.iter().enumerate() {
            if *e > 0 {
                t = t.mul(&Poly::var(i, vars, field).pow(*e)).unwrap();
            }
        }
        p = p.add(&t).unwrap();
    }
    p
}

/// True when p and q agree up to a nonzero scalar of the field.
pub fn proportional(p: &Poly, q: &Poly) -> bool {
    if p.is_zero() || q.is_zero() {
        return p.is_zero() && q.is_zero();
    }
    p.monic() == q.monic()
}

/// The scalar c with p = c * q, if proportional.
pub fn proportionality_factor(p: &Poly, q: &Poly) -> Option<Scalar> {
    if !proportional(p, q) {
        return None;
    }
    if p.is_zero() {
        return Some(Scalar::one(&p.field));
    }
    let (mp, cp) = p.leading().unwrap();
    let (mq, cq) = q.leading().unwrap();
    debug_assert_eq!(mp, mq);
    cp.div(cq).ok()
}

pub fn rational_field() -> Field {
    FieldSpec::rational()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldSpec;

    fn xyz() -> (VarSet, Field) {
        (varset(&["x", "y", "z"]), FieldSpec::rational())
    }

    fn parse3(terms: &[(i64, [u32; 3])], vars: &VarSet, field: &Field) -> Poly {
        let ts: Vec<(i64, &[u32])> = terms.iter().map(|(c, e)| (*c, &e[..])).collect();
        poly_from_terms(&ts, vars, field)
    }

    #[test]
    fn product_difference_of_squares() {
        let (v, f) = xyz();
        let x = Poly::var(0, &v, &f);
        let y = Poly::var(1, &v, &f);
        let s = x.add(&y).unwrap();
        let d = x.sub(&y).unwrap();
        let p = s.mul(&d).unwrap();
        let expect = parse3(&[(1, [2, 0, 0]), (-1, [0, 2, 0])], &v, &f);
        assert_eq!(p, expect);
    }

    #[test]
    fn exact_divide_examples() {
        let (v, f) = xyz();
        // (x^3 y - x y^3) / (x y) = x^2 - y^2
        let num = parse3(&[(1, [3, 1, 0]), (-1, [1, 3, 0])], &v, &f);
        let den = parse3(&[(1, [1, 1, 0])], &v, &f);
        let q = num.exact_div(&den).unwrap();
        assert_eq!(q, parse3(&[(1, [2, 0, 0]), (-1, [0, 2, 0])], &v, &f));

        // non-divisible reports a remainder witness
        let bad = parse3(&[(1, [2, 0, 0]), (1, [0, 0, 0])], &v, &f);
        match bad.exact_div(&parse3(&[(1, [0, 1, 0])], &v, &f)) {
            Err(PolyError::NotDivisible { remainder }) => assert!(!remainder.is_zero()),
            other => panic!("expected NotDivisible, got {other:?}"),
        }
    }

    #[test]
    fn exact_divide_over_gaussian() {
        // (x^2 + 1) / (x + i) = x - i
        let k = FieldSpec::gaussian();
        let v = varset(&["x"]);
        let x = Poly::var(0, &v, &k);
        let i = Poly::constant(Scalar::gen(&k), &v);
        let num = x.mul(&x).unwrap().add(&Poly::one(&v, &k)).unwrap();
        let den = x.add(&i).unwrap();
        let q = num.exact_div(&den).unwrap();
        assert_eq!(q, x.sub(&i).unwrap());
    }

    #[test]
    fn gcd_examples() {
        let (v, f) = xyz();
        // gcd(x^2 - y^2, x^2 + 2xy + y^2) = x + y (hand-factored oracle:
        // (x-y)(x+y) and (x+y)^2).
        let a = parse3(&[(1, [2, 0, 0]), (-1, [0, 2, 0])], &v, &f);
        let b = parse3(&[(1, [2, 0, 0]), (2, [1, 1, 0]), (1, [0, 2, 0])], &v, &f);
        let g = a.gcd(&b).unwrap();
        assert_eq!(g, parse3(&[(1, [1, 0, 0]), (1, [0, 1, 0])], &v, &f));

        // gcd(p, 0) = monic p
        let p = parse3(&[(3, [1, 0, 0])], &v, &f);
        assert_eq!(
            p.gcd(&Poly::zero(&v, &f)).unwrap(),
            parse3(&[(1, [1, 0, 0])], &v, &f)
        );
    }

    #[test]
    fn gcd_of_cremona_squared_components() {
        // Q = (YZ : ZX : XY); Q o Q has components X^2 YZ, X Y^2 Z, X Y Z^2
        // whose gcd is XYZ, so saturation yields the identity.
        let (v, f) = xyz();
        let comps = [
            parse3(&[(1, [2, 1, 1])], &v, &f),
            parse3(&[(1, [1, 2, 1])], &v, &f),
            parse3(&[(1, [1, 1, 2])], &v, &f),
        ];
        let g = comps[0]
            .gcd(&comps[1])
            .unwrap()
            .gcd(&comps[2])
            .unwrap();
        assert_eq!(g, parse3(&[(1, [1, 1, 1])], &v, &f));
    }

    #[test]
    fn substitution_examples() {
        let (v, f) = xyz();
        let tv = varset(&["t"]);
        let t = RationalFn::from_poly(Poly::var(0, &tv, &f));
        // x^2 + y at x = t, y = t, z = t
        let p = parse3(&[(1, [2, 0, 0]), (1, [0, 1, 0])], &v, &f);
        let r = p.substitute(&[t.clone(), t.clone(), t.clone()]).unwrap();
        assert!(r.is_poly());
        assert_eq!(
            r.num,
            poly_from_terms(&[(1, &[2]), (1, &[1])], &tv, &f)
        );

        // (x * q) with denominator x reduces to q
        let q = parse3(&[(1, [0, 1, 0]), (2, [0, 0, 1])], &v, &f);
        let x = parse3(&[(1, [1, 0, 0])], &v, &f);
        let r = RationalFn::new(x.mul(&q).unwrap(), x).unwrap();
        assert_eq!(r.num, q);
        assert!(r.is_poly());
    }

    #[test]
    fn weighted_homogeneity() {
        let (v, f) = xyz();
        // P_IV = 3xz + 3y^2 - 3x^2 y has weighted degree 4 under (1,2,3)
        let p = parse3(&[(3, [1, 0, 1]), (3, [0, 2, 0]), (-3, [2, 1, 0])], &v, &f);
        assert_eq!(p.weighted_degree(&[1, 2, 3]).unwrap(), Some(4));
        // C_IV = 3x^2 y^2 - y^3 - 3xyz + z^2 has weighted degree 6
        let c = parse3(
            &[(3, [2, 2, 0]), (-1, [0, 3, 0]), (-3, [1, 1, 1]), (1, [0, 0, 2])],
            &v,
            &f,
        );
        assert_eq!(c.weighted_degree(&[1, 2, 3]).unwrap(), Some(6));
        // x + y^2 is not homogeneous for weights (1,1)
        let m = parse3(&[(1, [1, 0, 0]), (1, [0, 2, 0])], &v, &f);
        assert_eq!(m.weighted_degree(&[1, 1, 1]).unwrap(), None);
    }

    #[test]
    fn kth_root_part_extracts_powers() {
        let (v, f) = xyz();
        let x = Poly::var(0, &v, &f);
        let y = Poly::var(1, &v, &f);
        let xpy = x.add(&y).unwrap();
        // p = x^4 (x+y)^2 y: root part for k=2 is x^2 (x+y)
        let p = x.pow(4).mul(&xpy.pow(2)).unwrap().mul(&y).unwrap();
        let r = kth_root_part(&p, 2);
        assert_eq!(r, x.pow(2).mul(&xpy).unwrap().monic());
        assert_eq!(kth_root_part(&p, 3), x.monic());
    }

    #[test]
    fn display_roundtrip_shape() {
        let (v, f) = xyz();
        let p = parse3(&[(3, [2, 2, 0]), (-1, [0, 3, 0]), (1, [0, 0, 2])], &v, &f);
        assert_eq!(format!("{p}"), "3*x^2*y^2 - y^3 + z^2");
    }
}
