//! Scenario parser: builds a fully resolved `Scenario` (all definitions
//! evaluated, all assertion references checked) so that running one is a
//! pure computation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::birmap::{linear_inverse, RationalMap};
use crate::chazy::{ChazyVariant, Derivation};
use crate::exterior::{OneForm, VectorField, Weights};
use crate::frontend::lexer::{tokenize, TokKind, Token};
use crate::poly::{varset, Poly, RationalFn, VarSet};
use crate::scalar::{Field, FieldSpec, Scalar};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone)]
pub enum Value {
    Poly(Poly),
    RatFn(RationalFn),
    Form(OneForm),
    Map(RationalMap),
    Point(Vec<Scalar>),
    Derivation(Derivation),
    VField(VectorField),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Poly(_) => "poly",
            Value::RatFn(_) => "ratfn",
            Value::Form(_) => "form",
            Value::Map(_) => "map",
            Value::Point(_) => "point",
            Value::Derivation(_) => "derivation",
            Value::VField(_) => "vfield",
        }
    }
}

/// A fully resolved assertion; `negated` flips the expected outcome.
#[derive(Debug, Clone)]
pub struct Assertion {
    pub line: usize,
    pub negated: bool,
    pub text: String,
    pub op: Op,
}

#[derive(Debug, Clone)]
pub enum Op {
    Euler(OneForm),
    Degree(OneForm, i64),
    WeightedDegree(Poly, Weights, u64),
    ProportionalForms(OneForm, OneForm),
    ProportionalPolys(Poly, Poly),
    Invariant(OneForm, Poly),
    TangentSpace {
        curves: Vec<Poly>,
        degree: u32,
        dim: usize,
    },
    TangentBasis {
        curves: Vec<Poly>,
        degree: u32,
        form: OneForm,
    },
    Pullback {
        map: RationalMap,
        form: OneForm,
        expect: OneForm,
    },
    PullbackFactor {
        map: RationalMap,
        form: OneForm,
        factor: Poly,
    },
    Order(RationalMap, u32),
    EqualMaps(RationalMap, RationalMap),
    ImageOn(RationalMap, Poly),
    Jacobian(RationalMap, Poly),
    FixedCurve(RationalMap, Poly),
    PreservesPencil(RationalMap, Poly, Poly),
    Singular {
        form: OneForm,
        point: Vec<Scalar>,
        ratio: Option<(Scalar, Scalar)>,
        mu: Option<u64>,
        l: Option<u32>,
        class: Option<String>,
        dicritical: Option<bool>,
    },
    RegularAt(OneForm, Vec<Scalar>),
    Darboux(OneForm, Vec<Vec<Scalar>>),
    Balance(OneForm, Vec<Scalar>),
    Solves {
        derivation: Derivation,
        u: RationalFn,
        target: ChazyVariant,
    },
    Integral(Derivation, Poly),
    Surface(Derivation, Poly),
    Relations {
        derivation: Derivation,
        flop: RationalFn,
        tri: RationalFn,
    },
    InvolutionLift(Derivation, RationalFn),
    Coincide {
        derivation: Derivation,
        g: RationalFn,
        u: RationalFn,
    },
    Level {
        derivation: Derivation,
        u: RationalFn,
        target: ChazyVariant,
        value: Scalar,
    },
    Quasihomogeneous(ChazyVariant),
    Predict {
        deg: i64,
        l: [i64; 3],
        expect_deg: i64,
        expect_l: [i64; 3],
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Euler(..) => "euler",
            Op::Degree(..) => "degree",
            Op::WeightedDegree(..) => "weighted_degree",
            Op::ProportionalForms(..) | Op::ProportionalPolys(..) => "proportional",
            Op::Invariant(..) => "invariant",
            Op::TangentSpace { .. } => "tangent_space",
            Op::TangentBasis { .. } => "tangent_basis",
            Op::Pullback { .. } => "pullback",
            Op::PullbackFactor { .. } => "pullback_factor",
            Op::Order(..) => "order",
            Op::EqualMaps(..) => "equal_maps",
            Op::ImageOn(..) => "image_on",
            Op::Jacobian(..) => "jacobian",
            Op::FixedCurve(..) => "fixed_curve",
            Op::PreservesPencil(..) => "preserves_pencil",
            Op::Singular { .. } => "singular",
            Op::RegularAt(..) => "regular_at",
            Op::Darboux(..) => "darboux",
            Op::Balance(..) => "balance",
            Op::Solves { .. } => "solves",
            Op::Integral(..) => "integral",
            Op::Surface(..) => "surface",
            Op::Relations { .. } => "relations",
            Op::InvolutionLift(..) => "involution_lift",
            Op::Coincide { .. } => "coincide",
            Op::Level { .. } => "level",
            Op::Quasihomogeneous(..) => "quasihomogeneous",
            Op::Predict { .. } => "predict",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub field: Field,
    pub vars: Option<VarSet>,
    pub defs: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
}

pub fn parse_scenario(name: &str, text: &str) -> Result<Scenario, ParseError> {
    let toks = tokenize(text).map_err(|e| ParseError {
        message: e.message,
        line: e.line,
        col: e.col,
    })?;
    Parser {
        toks,
        pos: 0,
        field: FieldSpec::rational(),
        vars: None,
        weights: Vec::new(),
        defs: BTreeMap::new(),
        assertions: Vec::new(),
    }
    .run(name)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    field: Field,
    vars: Option<VarSet>,
    weights: Weights,
    defs: BTreeMap<String, Value>,
    assertions: Vec<Assertion>,
}

impl Parser {
    fn run(mut self, name: &str) -> Result<Scenario, ParseError> {
        loop {
            self.skip_terminators();
            if matches!(self.peek().kind, TokKind::Eof) {
                break;
            }
            self.statement()?;
        }
        Ok(Scenario {
            name: name.to_string(),
            field: self.field,
            vars: self.vars,
            defs: self.defs,
            assertions: self.assertions,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, at: &Token, message: String) -> Result<T, ParseError> {
        Err(ParseError {
            message,
            line: at.line,
            col: at.col,
        })
    }

    fn err_here<T>(&self, message: String) -> Result<T, ParseError> {
        let t = self.peek().clone();
        self.err(&t, message)
    }

    fn expect(&mut self, kind: TokKind) -> Result<Token, ParseError> {
        if self.peek().kind == kind {
            Ok(self.next())
        } else {
            let t = self.peek().clone();
            self.err(&t, format!("expected {kind}, found {}", t.kind))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next();
        match &t.kind {
            TokKind::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.err(&t, format!("expected identifier, found {other}")),
        }
    }

    fn skip_terminators(&mut self) {
        while matches!(self.peek().kind, TokKind::Newline | TokKind::Semi) {
            self.next();
        }
    }

    fn end_statement(&mut self) -> Result<(), ParseError> {
        match self.peek().kind {
            TokKind::Newline | TokKind::Semi | TokKind::Eof => {
                self.skip_terminators();
                Ok(())
            }
            _ => {
                let t = self.peek().clone();
                self.err(&t, format!("expected end of statement, found {}", t.kind))
            }
        }
    }

    fn require_vars(&self) -> Result<VarSet, ParseError> {
        match &self.vars {
            Some(v) => Ok(v.clone()),
            None => self.err_here("no `vars` declaration in scope".to_string()),
        }
    }

    fn define(&mut self, name: &str, at: &Token, value: Value) -> Result<(), ParseError> {
        if self.defs.contains_key(name) {
            return self.err(at, format!("`{name}` is defined twice"));
        }
        self.defs.insert(name.to_string(), value);
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (kw, at) = self.expect_ident()?;
        match kw.as_str() {
            "field" => self.field_stmt(),
            "vars" => self.vars_stmt(),
            "weights" => {
                self.weights = self.weights_tuple()?;
                self.end_statement()
            }
            "poly" => self.poly_stmt(),
            "ratfn" => self.ratfn_stmt(),
            "form" => self.form_stmt(),
            "vfield" => self.vfield_stmt(),
            "map" => self.map_stmt(),
            "point" => self.point_stmt(),
            "derivation" => self.derivation_stmt(),
            "assert" => self.assert_stmt(false),
            "refute" => self.assert_stmt(true),
            other => self.err(&at, format!("unknown statement `{other}`")),
        }
    }

    fn field_stmt(&mut self) -> Result<(), ParseError> {
        // field K = Q(w) minpoly w^2 + w + 1
        let (_, _) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let (q, qt) = self.expect_ident()?;
        if q != "Q" {
            return self.err(&qt, format!("expected base field `Q`, found `{q}`"));
        }
        if self.peek().kind != TokKind::LParen {
            self.field = FieldSpec::rational();
            return self.end_statement();
        }
        self.expect(TokKind::LParen)?;
        let (gen, gent) = self.expect_ident()?;
        self.expect(TokKind::RParen)?;
        let (kw, kwt) = self.expect_ident()?;
        if kw != "minpoly" {
            return self.err(&kwt, format!("expected `minpoly`, found `{kw}`"));
        }
        // Parse the minimal polynomial in a one-variable ring over Q.
        let mvars = varset(&[&gen]);
        let rf = self.expr(&mvars, &FieldSpec::rational(), false)?;
        let p = self.as_poly(&rf, &kwt)?;
        if p.degree_in(0) != 2 {
            return self.err(&kwt, "minimal polynomial must be quadratic".to_string());
        }
        let c2 = coeff_of(&p, 2);
        let c1 = coeff_of(&p, 1);
        let c0 = coeff_of(&p, 0);
        let (Some(c2), Some(c1), Some(c0)) = (
            c2.as_rational().cloned(),
            c1.as_rational().cloned(),
            c0.as_rational().cloned(),
        ) else {
            return self.err(&kwt, "minimal polynomial must have rational coefficients".to_string());
        };
        if !c2.eq(&BigRational::from_integer(BigInt::from(1))) {
            return self.err(&kwt, "minimal polynomial must be monic".to_string());
        }
        let field = FieldSpec::quadratic(&format!("Q({gen})"), &gen, c1, c0)
            .map_err(|e| ParseError {
                message: format!("invalid minimal polynomial: {e:?}"),
                line: gent.line,
                col: gent.col,
            })?;
        self.field = field;
        self.end_statement()
    }

    fn vars_stmt(&mut self) -> Result<(), ParseError> {
        let mut names = Vec::new();
        loop {
            let (n, _) = self.expect_ident()?;
            names.push(n);
            if self.peek().kind == TokKind::Comma {
                self.next();
            } else {
                break;
            }
        }
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        self.vars = Some(varset(&refs));
        self.weights = vec![1; names.len()];
        self.end_statement()
    }

    fn weights_tuple(&mut self) -> Result<Weights, ParseError> {
        self.expect(TokKind::LParen)?;
        let mut ws = Vec::new();
        loop {
            let n = self.int_literal()?;
            if n <= 0 {
                return self.err_here("weights must be positive".to_string());
            }
            ws.push(n as u32);
            if self.peek().kind == TokKind::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(TokKind::RParen)?;
        Ok(ws)
    }

    fn int_literal(&mut self) -> Result<i64, ParseError> {
        let neg = if self.peek().kind == TokKind::Minus {
            self.next();
            true
        } else {
            false
        };
        let t = self.next();
        match &t.kind {
            TokKind::Int(s) => {
                let v: i64 = s.parse().map_err(|_| ParseError {
                    message: format!("integer `{s}` out of range"),
                    line: t.line,
                    col: t.col,
                })?;
                Ok(if neg { -v } else { v })
            }
            other => self.err(&t, format!("expected integer, found {other}")),
        }
    }

    fn poly_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let vars = self.require_vars()?;
        let field = self.field.clone();
        let rf = self.expr(&vars, &field, true)?;
        let p = self.as_poly(&rf, &at)?;
        self.define(&name, &at, Value::Poly(p))?;
        self.end_statement()
    }

    fn ratfn_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let vars = self.require_vars()?;
        let field = self.field.clone();
        let rf = self.expr(&vars, &field, true)?;
        let rf = rf.reduce().map_err(|e| ParseError {
            message: format!("{e:?}"),
            line: at.line,
            col: at.col,
        })?;
        self.define(&name, &at, Value::RatFn(rf))?;
        self.end_statement()
    }

    fn form_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let vars = self.require_vars()?;
        if vars.len() != 3 {
            return self.err(&at, "forms need exactly three variables".to_string());
        }
        // Special constructor: the 1-form dual to a vector field under the
        // ambient weights, `form G = dual(W)`.
        if let TokKind::Ident(id) = &self.peek().kind {
            if id == "dual" {
                self.next();
                self.expect(TokKind::LParen)?;
                let (wname, wt) = self.expect_ident()?;
                self.expect(TokKind::RParen)?;
                let vf = match self.defs.get(&wname) {
                    Some(Value::VField(v)) => v.clone(),
                    Some(v) => {
                        return self.err(&wt, format!("`{wname}` is a {}, not a vfield", v.kind()))
                    }
                    None => return self.err(&wt, format!("unknown identifier `{wname}`")),
                };
                let l = VectorField::euler(&self.weights, &vars, &self.field);
                let form = crate::exterior::form_from_vfield(&vf, &l, self.weights.clone())
                    .map_err(|e| ParseError {
                        message: format!("{e:?}"),
                        line: at.line,
                        col: at.col,
                    })?;
                self.define(&name, &at, Value::Form(form))?;
                return self.end_statement();
            }
        }
        // Parse in the ring extended by the differential symbols.
        let mut names: Vec<String> = vars.iter().cloned().collect();
        let dnames: Vec<String> = vars.iter().map(|v| format!("d{v}")).collect();
        names.extend(dnames.iter().cloned());
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let evars = varset(&refs);
        let field = self.field.clone();
        let rf = self.expr(&evars, &field, true)?;
        let p = self.as_poly(&rf, &at)?;
        let n = vars.len();
        let mut comps = vec![Poly::zero(&vars, &field); 3];
        for (m, c) in &p.terms {
            let dpart: u32 = m.0[n..].iter().sum();
            if dpart != 1 {
                return self.err(
                    &at,
                    "every term of a form must contain exactly one differential".to_string(),
                );
            }
            let slot = m.0[n..].iter().position(|e| *e == 1).unwrap();
            let mono = crate::poly::Mono(m.0[..n].to_vec());
            comps[slot]
                .terms
                .insert(mono, c.clone());
        }
        let [a, b, c] = [comps[0].clone(), comps[1].clone(), comps[2].clone()];
        let form = OneForm::new(a, b, c, self.weights.clone()).map_err(|e| ParseError {
            message: format!("{e:?}"),
            line: at.line,
            col: at.col,
        })?;
        self.define(&name, &at, Value::Form(form))?;
        self.end_statement()
    }

    fn vfield_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let vars = self.require_vars()?;
        let field = self.field.clone();
        self.expect(TokKind::LParen)?;
        let mut comps = Vec::new();
        loop {
            let rf = self.expr(&vars, &field, true)?;
            comps.push(self.as_poly(&rf, &at)?);
            if self.peek().kind == TokKind::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(TokKind::RParen)?;
        if comps.len() != 3 {
            return self.err(&at, "vector fields need three components".to_string());
        }
        let vf = VectorField::new(comps[0].clone(), comps[1].clone(), comps[2].clone());
        self.define(&name, &at, Value::VField(vf))?;
        self.end_statement()
    }

    fn map_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let mut map = self.map_primary(&at)?;
        while self.peek().kind == TokKind::Star {
            self.next();
            let rhs = self.map_primary(&at)?;
            map = map.compose(&rhs).map_err(|e| ParseError {
                message: format!("{e:?}"),
                line: at.line,
                col: at.col,
            })?;
        }
        self.define(&name, &at, Value::Map(map))?;
        self.end_statement()
    }

    fn map_primary(&mut self, at: &Token) -> Result<RationalMap, ParseError> {
        match self.peek().kind.clone() {
            TokKind::Ident(id) if id == "inverse" => {
                self.next();
                self.expect(TokKind::LParen)?;
                let inner = self.map_primary(at)?;
                self.expect(TokKind::RParen)?;
                linear_inverse(&inner).map_err(|e| ParseError {
                    message: format!("not linearly invertible: {e:?}"),
                    line: at.line,
                    col: at.col,
                })
            }
            TokKind::Ident(id) => {
                self.next();
                match self.defs.get(&id) {
                    Some(Value::Map(m)) => Ok(m.clone()),
                    Some(v) => self.err(at, format!("`{id}` is a {}, not a map", v.kind())),
                    None => self.err(at, format!("unknown identifier `{id}`")),
                }
            }
            TokKind::LParen => {
                self.next();
                let vars = self.require_vars()?;
                let field = self.field.clone();
                let mut comps = Vec::new();
                loop {
                    let rf = self.expr(&vars, &field, true)?;
                    comps.push(self.as_poly(&rf, at)?);
                    if self.peek().kind == TokKind::Colon {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect(TokKind::RParen)?;
                let (src_w, dst_w) = if let TokKind::Ident(id) = &self.peek().kind {
                    if id == "weights" {
                        self.next();
                        let s = self.weights_tuple()?;
                        self.expect(TokKind::Arrow)?;
                        let d = self.weights_tuple()?;
                        (s, d)
                    } else {
                        (self.weights.clone(), self.weights.clone())
                    }
                } else {
                    (self.weights.clone(), self.weights.clone())
                };
                RationalMap::new(comps, src_w, dst_w).map_err(|e| ParseError {
                    message: format!("{e:?}"),
                    line: at.line,
                    col: at.col,
                })
            }
            other => self.err_here(format!("expected a map, found {other}")),
        }
    }

    fn point_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        let p = self.point_literal()?;
        self.define(&name, &at, Value::Point(p))?;
        self.end_statement()
    }

    fn point_literal(&mut self) -> Result<Vec<Scalar>, ParseError> {
        let at = self.peek().clone();
        self.expect(TokKind::LParen)?;
        let vars = self.require_vars()?;
        let field = self.field.clone();
        let mut coords = Vec::new();
        loop {
            let rf = self.expr(&vars, &field, true)?;
            coords.push(self.as_scalar(&rf, &at)?);
            if self.peek().kind == TokKind::Colon {
                self.next();
            } else {
                break;
            }
        }
        self.expect(TokKind::RParen)?;
        Ok(coords)
    }

    fn derivation_stmt(&mut self) -> Result<(), ParseError> {
        let (name, at) = self.expect_ident()?;
        self.expect(TokKind::Equals)?;
        match self.peek().kind.clone() {
            TokKind::Ident(id) if id == "chazy" => {
                self.next();
                self.expect(TokKind::LParen)?;
                let variant = self.variant_arg()?;
                self.expect(TokKind::RParen)?;
                let d = Derivation::chazy(variant, &self.field);
                self.define(&name, &at, Value::Derivation(d))?;
            }
            TokKind::LParen => {
                self.next();
                let vars = self.require_vars()?;
                let field = self.field.clone();
                let mut images = Vec::new();
                loop {
                    let rf = self.expr(&vars, &field, true)?;
                    images.push(rf.reduce().map_err(|e| ParseError {
                        message: format!("{e:?}"),
                        line: at.line,
                        col: at.col,
                    })?);
                    if self.peek().kind == TokKind::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect(TokKind::RParen)?;
                if images.len() != vars.len() {
                    return self.err(&at, "derivation needs one image per variable".to_string());
                }
                let d = Derivation::new(vars, field, images);
                self.define(&name, &at, Value::Derivation(d))?;
            }
            other => return self.err_here(format!("expected derivation images, found {other}")),
        }
        self.end_statement()
    }

    fn variant_arg(&mut self) -> Result<ChazyVariant, ParseError> {
        let (v, vt) = self.expect_ident()?;
        match v.as_str() {
            "IV" => Ok(ChazyVariant::IV),
            "V" => Ok(ChazyVariant::V),
            "VI" => Ok(ChazyVariant::VI),
            other => self.err(&vt, format!("unknown equation variant `{other}`")),
        }
    }

    // ---- assertion parsing ------------------------------------------------

    fn assert_stmt(&mut self, negated: bool) -> Result<(), ParseError> {
        let start = self.pos;
        let (opname, at) = self.expect_ident()?;
        self.expect(TokKind::LParen)?;
        let op = self.op_args(&opname, &at)?;
        self.expect(TokKind::RParen)?;
        let text = self.statement_text(start);
        self.assertions.push(Assertion {
            line: at.line,
            negated,
            text,
            op,
        });
        self.end_statement()
    }

    fn statement_text(&self, start: usize) -> String {
        let mut out = String::new();
        for t in &self.toks[start..self.pos] {
            let s = match &t.kind {
                TokKind::Ident(s) => s.clone(),
                TokKind::Int(s) => s.clone(),
                TokKind::Plus => "+".into(),
                TokKind::Minus => "-".into(),
                TokKind::Star => "*".into(),
                TokKind::Slash => "/".into(),
                TokKind::Caret => "^".into(),
                TokKind::LParen => "(".into(),
                TokKind::RParen => ")".into(),
                TokKind::LBracket => "[".into(),
                TokKind::RBracket => "]".into(),
                TokKind::Comma => ", ".into(),
                TokKind::Colon => ":".into(),
                TokKind::Semi => ";".into(),
                TokKind::Equals => "=".into(),
                TokKind::Arrow => "->".into(),
                _ => String::new(),
            };
            out.push_str(&s);
        }
        out
    }

    fn comma(&mut self) -> Result<(), ParseError> {
        self.expect(TokKind::Comma).map(|_| ())
    }

    fn form_arg(&mut self) -> Result<OneForm, ParseError> {
        let (id, at) = self.expect_ident()?;
        match self.defs.get(&id) {
            Some(Value::Form(f)) => Ok(f.clone()),
            Some(v) => self.err(&at, format!("`{id}` is a {}, not a form", v.kind())),
            None => self.err(&at, format!("unknown identifier `{id}`")),
        }
    }

    fn map_arg(&mut self) -> Result<RationalMap, ParseError> {
        let (id, at) = self.expect_ident()?;
        match self.defs.get(&id) {
            Some(Value::Map(m)) => Ok(m.clone()),
            Some(v) => self.err(&at, format!("`{id}` is a {}, not a map", v.kind())),
            None => self.err(&at, format!("unknown identifier `{id}`")),
        }
    }

    fn derivation_arg(&mut self) -> Result<Derivation, ParseError> {
        let (id, at) = self.expect_ident()?;
        match self.defs.get(&id) {
            Some(Value::Derivation(d)) => Ok(d.clone()),
            Some(v) => self.err(&at, format!("`{id}` is a {}, not a derivation", v.kind())),
            None => self.err(&at, format!("unknown identifier `{id}`")),
        }
    }

    fn poly_arg(&mut self) -> Result<Poly, ParseError> {
        let at = self.peek().clone();
        let vars = self.require_vars()?;
        let field = self.field.clone();
        let rf = self.expr(&vars, &field, true)?;
        self.as_poly(&rf, &at)
    }

    fn ratfn_arg(&mut self) -> Result<RationalFn, ParseError> {
        let at = self.peek().clone();
        let vars = self.require_vars()?;
        let field = self.field.clone();
        let rf = self.expr(&vars, &field, true)?;
        rf.reduce().map_err(|e| ParseError {
            message: format!("{e:?}"),
            line: at.line,
            col: at.col,
        })
    }

    fn point_arg(&mut self) -> Result<Vec<Scalar>, ParseError> {
        if let TokKind::Ident(id) = self.peek().kind.clone() {
            let at = self.peek().clone();
            self.next();
            return match self.defs.get(&id) {
                Some(Value::Point(p)) => Ok(p.clone()),
                Some(v) => self.err(&at, format!("`{id}` is a {}, not a point", v.kind())),
                None => self.err(&at, format!("unknown identifier `{id}`")),
            };
        }
        self.point_literal()
    }

    fn uint_arg(&mut self) -> Result<u64, ParseError> {
        let at = self.peek().clone();
        let v = self.int_literal()?;
        if v < 0 {
            return self.err(&at, "expected a nonnegative integer".to_string());
        }
        Ok(v as u64)
    }

    fn poly_list_arg(&mut self) -> Result<Vec<Poly>, ParseError> {
        self.expect(TokKind::LBracket)?;
        let mut out = Vec::new();
        loop {
            out.push(self.poly_arg()?);
            if self.peek().kind == TokKind::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(TokKind::RBracket)?;
        Ok(out)
    }

    fn point_list_arg(&mut self) -> Result<Vec<Vec<Scalar>>, ParseError> {
        self.expect(TokKind::LBracket)?;
        let mut out = Vec::new();
        loop {
            out.push(self.point_arg()?);
            if self.peek().kind == TokKind::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(TokKind::RBracket)?;
        Ok(out)
    }

    fn int_triple(&mut self) -> Result<[i64; 3], ParseError> {
        self.expect(TokKind::LParen)?;
        let a = self.int_literal()?;
        self.expect(TokKind::Comma)?;
        let b = self.int_literal()?;
        self.expect(TokKind::Comma)?;
        let c = self.int_literal()?;
        self.expect(TokKind::RParen)?;
        Ok([a, b, c])
    }

    fn op_args(&mut self, opname: &str, at: &Token) -> Result<Op, ParseError> {
        match opname {
            "euler" => Ok(Op::Euler(self.form_arg()?)),
            "degree" => {
                let f = self.form_arg()?;
                self.comma()?;
                Ok(Op::Degree(f, self.int_literal()?))
            }
            "weighted_degree" => {
                let p = self.poly_arg()?;
                self.comma()?;
                let d = self.uint_arg()?;
                Ok(Op::WeightedDegree(p, self.weights.clone(), d))
            }
            "proportional" => {
                // Two forms, or two polynomial expressions.
                if let TokKind::Ident(id) = self.peek().kind.clone() {
                    if matches!(self.defs.get(&id), Some(Value::Form(_))) {
                        let a = self.form_arg()?;
                        self.comma()?;
                        let b = self.form_arg()?;
                        return Ok(Op::ProportionalForms(a, b));
                    }
                }
                let a = self.poly_arg()?;
                self.comma()?;
                let b = self.poly_arg()?;
                Ok(Op::ProportionalPolys(a, b))
            }
            "invariant" => {
                let f = self.form_arg()?;
                self.comma()?;
                Ok(Op::Invariant(f, self.poly_arg()?))
            }
            "tangent_space" => {
                let curves = self.poly_list_arg()?;
                self.comma()?;
                let degree = self.uint_arg()? as u32;
                self.comma()?;
                let dim = self.uint_arg()? as usize;
                Ok(Op::TangentSpace { curves, degree, dim })
            }
            "tangent_basis" => {
                let curves = self.poly_list_arg()?;
                self.comma()?;
                let degree = self.uint_arg()? as u32;
                self.comma()?;
                let form = self.form_arg()?;
                Ok(Op::TangentBasis { curves, degree, form })
            }
            "pullback" => {
                let map = self.map_arg()?;
                self.comma()?;
                let form = self.form_arg()?;
                self.comma()?;
                let expect = self.form_arg()?;
                Ok(Op::Pullback { map, form, expect })
            }
            "pullback_factor" => {
                let map = self.map_arg()?;
                self.comma()?;
                let form = self.form_arg()?;
                self.comma()?;
                let factor = self.poly_arg()?;
                Ok(Op::PullbackFactor { map, form, factor })
            }
            "order" => {
                let m = self.map_arg()?;
                self.comma()?;
                Ok(Op::Order(m, self.uint_arg()? as u32))
            }
            "equal_maps" => {
                let a = self.map_arg()?;
                self.comma()?;
                let b = self.map_arg()?;
                Ok(Op::EqualMaps(a, b))
            }
            "image_on" => {
                let m = self.map_arg()?;
                self.comma()?;
                Ok(Op::ImageOn(m, self.poly_arg()?))
            }
            "jacobian" => {
                let m = self.map_arg()?;
                self.comma()?;
                Ok(Op::Jacobian(m, self.poly_arg()?))
            }
            "fixed_curve" => {
                let m = self.map_arg()?;
                self.comma()?;
                Ok(Op::FixedCurve(m, self.poly_arg()?))
            }
            "preserves_pencil" => {
                let m = self.map_arg()?;
                self.comma()?;
                let l1 = self.poly_arg()?;
                self.comma()?;
                let l2 = self.poly_arg()?;
                Ok(Op::PreservesPencil(m, l1, l2))
            }
            "singular" => self.singular_args(at),
            "regular_at" => {
                let f = self.form_arg()?;
                self.comma()?;
                Ok(Op::RegularAt(f, self.point_arg()?))
            }
            "darboux" => {
                let f = self.form_arg()?;
                self.comma()?;
                Ok(Op::Darboux(f, self.point_list_arg()?))
            }
            "balance" => {
                let f = self.form_arg()?;
                self.comma()?;
                Ok(Op::Balance(f, self.point_arg()?))
            }
            "solves" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                let u = self.ratfn_arg()?;
                self.comma()?;
                let target = self.variant_arg()?;
                Ok(Op::Solves { derivation: d, u, target })
            }
            "integral" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                Ok(Op::Integral(d, self.poly_arg()?))
            }
            "surface" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                Ok(Op::Surface(d, self.poly_arg()?))
            }
            "relations" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                let flop = self.ratfn_arg()?;
                self.comma()?;
                let tri = self.ratfn_arg()?;
                Ok(Op::Relations { derivation: d, flop, tri })
            }
            "involution_lift" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                Ok(Op::InvolutionLift(d, self.ratfn_arg()?))
            }
            "coincide" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                let g = self.ratfn_arg()?;
                self.comma()?;
                let u = self.ratfn_arg()?;
                Ok(Op::Coincide { derivation: d, g, u })
            }
            "level" => {
                let d = self.derivation_arg()?;
                self.comma()?;
                let u = self.ratfn_arg()?;
                self.comma()?;
                let target = self.variant_arg()?;
                self.comma()?;
                let at2 = self.peek().clone();
                let vars = self.require_vars()?;
                let field = self.field.clone();
                let rf = self.expr(&vars, &field, true)?;
                let value = self.as_scalar(&rf, &at2)?;
                Ok(Op::Level {
                    derivation: d,
                    u,
                    target,
                    value,
                })
            }
            "quasihomogeneous" => Ok(Op::Quasihomogeneous(self.variant_arg()?)),
            "predict" => {
                let deg = self.int_literal()?;
                self.comma()?;
                let l = self.int_triple()?;
                self.comma()?;
                let expect_deg = self.int_literal()?;
                self.comma()?;
                let expect_l = self.int_triple()?;
                Ok(Op::Predict { deg, l, expect_deg, expect_l })
            }
            other => self.err(at, format!("unknown operation `{other}`")),
        }
    }

    fn singular_args(&mut self, at: &Token) -> Result<Op, ParseError> {
        let form = self.form_arg()?;
        self.comma()?;
        let point = self.point_arg()?;
        let mut ratio = None;
        let mut mu = None;
        let mut l = None;
        let mut class = None;
        let mut dicritical = None;
        while self.peek().kind == TokKind::Comma {
            self.next();
            let (key, kt) = self.expect_ident()?;
            self.expect(TokKind::Equals)?;
            match key.as_str() {
                "ratio" => {
                    let pair = self.point_literal()?;
                    if pair.len() != 2 {
                        return self.err(&kt, "eigenvalue ratio needs two entries".to_string());
                    }
                    ratio = Some((pair[0].clone(), pair[1].clone()));
                }
                "mu" => mu = Some(self.uint_arg()?),
                "l" => l = Some(self.uint_arg()? as u32),
                "class" => {
                    let (c, _) = self.expect_ident()?;
                    class = Some(c);
                }
                "dicritical" => {
                    let (v, vt) = self.expect_ident()?;
                    dicritical = Some(match v.as_str() {
                        "yes" => true,
                        "no" => false,
                        other => {
                            return self.err(&vt, format!("expected yes/no, found `{other}`"))
                        }
                    });
                }
                other => return self.err(&kt, format!("unknown option `{other}`")),
            }
        }
        let _ = at;
        Ok(Op::Singular {
            form,
            point,
            ratio,
            mu,
            l,
            class,
            dicritical,
        })
    }

    // ---- expression parsing ----------------------------------------------

    fn expr(
        &mut self,
        vars: &VarSet,
        field: &Field,
        use_defs: bool,
    ) -> Result<RationalFn, ParseError> {
        let mut acc = self.term(vars, field, use_defs)?;
        loop {
            match self.peek().kind {
                TokKind::Plus => {
                    self.next();
                    let rhs = self.term(vars, field, use_defs)?;
                    acc = self.rf(acc.add(&rhs))?;
                }
                TokKind::Minus => {
                    self.next();
                    let rhs = self.term(vars, field, use_defs)?;
                    acc = self.rf(acc.sub(&rhs))?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(
        &mut self,
        vars: &VarSet,
        field: &Field,
        use_defs: bool,
    ) -> Result<RationalFn, ParseError> {
        let mut acc = self.factor(vars, field, use_defs)?;
        loop {
            match self.peek().kind {
                TokKind::Star => {
                    self.next();
                    let rhs = self.factor(vars, field, use_defs)?;
                    acc = self.rf(acc.mul(&rhs))?;
                }
                TokKind::Slash => {
                    self.next();
                    let rhs = self.factor(vars, field, use_defs)?;
                    acc = self.rf(acc.div(&rhs))?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(
        &mut self,
        vars: &VarSet,
        field: &Field,
        use_defs: bool,
    ) -> Result<RationalFn, ParseError> {
        if self.peek().kind == TokKind::Minus {
            self.next();
            let inner = self.factor(vars, field, use_defs)?;
            return Ok(inner.neg());
        }
        let mut base = self.primary(vars, field, use_defs)?;
        while self.peek().kind == TokKind::Caret {
            self.next();
            let at = self.peek().clone();
            let e = self.int_literal()?;
            if !(0..=u32::MAX as i64).contains(&e) {
                return self.err(&at, "exponent out of range".to_string());
            }
            let num = base.num.pow(e as u32);
            let den = base.den.pow(e as u32);
            base = self.rf(RationalFn::new(num, den))?;
        }
        Ok(base)
    }

    fn primary(
        &mut self,
        vars: &VarSet,
        field: &Field,
        use_defs: bool,
    ) -> Result<RationalFn, ParseError> {
        let t = self.next();
        match &t.kind {
            TokKind::Int(s) => {
                let n: BigInt = s.parse().expect("lexer produced digits");
                let r = BigRational::from_integer(n);
                Ok(RationalFn::from_poly(Poly::constant(
                    Scalar::from_rat(r, field),
                    vars,
                )))
            }
            TokKind::Ident(id) => {
                if let Some(i) = vars.iter().position(|v| v == id) {
                    return Ok(RationalFn::from_poly(Poly::var(i, vars, field)));
                }
                if field.minpoly.is_some() && *id == field.gen {
                    return Ok(RationalFn::from_poly(Poly::constant(
                        Scalar::gen(field),
                        vars,
                    )));
                }
                if use_defs {
                    match self.defs.get(id) {
                        Some(Value::Poly(p)) => {
                            let p = lift_poly(p, vars, field).ok_or_else(|| ParseError {
                                message: format!("`{id}` uses different variables"),
                                line: t.line,
                                col: t.col,
                            })?;
                            return Ok(RationalFn::from_poly(p));
                        }
                        Some(Value::RatFn(r)) => {
                            let num = lift_poly(&r.num, vars, field);
                            let den = lift_poly(&r.den, vars, field);
                            if let (Some(num), Some(den)) = (num, den) {
                                return Ok(RationalFn { num, den });
                            }
                            return self.err(&t, format!("`{id}` uses different variables"));
                        }
                        Some(v) => {
                            return self.err(
                                &t,
                                format!("`{id}` is a {}, not usable in an expression", v.kind()),
                            )
                        }
                        None => {}
                    }
                }
                self.err(&t, format!("unknown identifier `{id}`"))
            }
            TokKind::LParen => {
                let inner = self.expr(vars, field, use_defs)?;
                self.expect(TokKind::RParen)?;
                Ok(inner)
            }
            other => self.err(&t, format!("expected an expression, found {other}")),
        }
    }

    fn rf(
        &self,
        r: Result<RationalFn, crate::poly::PolyError>,
    ) -> Result<RationalFn, ParseError> {
        r.map_err(|e| {
            let t = self.peek();
            ParseError {
                message: format!("{e:?}"),
                line: t.line,
                col: t.col,
            }
        })
    }

    fn as_poly(&self, rf: &RationalFn, at: &Token) -> Result<Poly, ParseError> {
        if rf.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            return Ok(rf.num.clone());
        }
        match rf.num.exact_div(&rf.den) {
            Ok(q) => Ok(q),
            Err(_) => self.err(at, "expected a polynomial, found a proper fraction".to_string()),
        }
    }

    fn as_scalar(&self, rf: &RationalFn, at: &Token) -> Result<Scalar, ParseError> {
        let p = self.as_poly(rf, at)?;
        match p.as_constant() {
            Some(c) => Ok(c),
            None => self.err(at, "expected a constant".to_string()),
        }
    }
}

fn coeff_of(p: &Poly, e: u32) -> Scalar {
    p.terms
        .iter()
        .find(|(m, _)| m.0[0] == e)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(|| Scalar::zero(&p.field))
}

/// Re-embed a polynomial into a ring whose variable list starts with the
/// original one (used to reference plain definitions inside the extended
/// differential ring).
fn lift_poly(p: &Poly, vars: &VarSet, field: &Field) -> Option<Poly> {
    if p.vars == *vars {
        return Some(p.clone());
    }
    if p.vars.len() > vars.len() || p.vars[..] != vars[..p.vars.len()] {
        return None;
    }
    let mut out = Poly::zero(vars, field);
    for (m, c) in &p.terms {
        let mut exps = m.0.clone();
        exps.resize(vars.len(), 0);
        out.terms.insert(crate::poly::Mono(exps), c.clone());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::poly_from_terms;

    #[test]
    fn poly_with_three_terms() {
        let s = parse_scenario("t", "vars x, y, z\npoly B = x^3 - 3*x*y + z\n").unwrap();
        match &s.defs["B"] {
            Value::Poly(p) => assert_eq!(p.terms.len(), 3),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn generator_coefficients_reduce() {
        let s = parse_scenario(
            "t",
            "field K = Q(w) minpoly w^2 + w + 1\nvars Y, Z\npoly p = w^2*Y*Z\n",
        )
        .unwrap();
        match &s.defs["p"] {
            Value::Poly(p) => {
                // w^2 = -1 - w
                let c = p.terms.values().next().unwrap();
                assert_eq!(format!("{c}"), "-1-w");
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn form_splits_components() {
        let s = parse_scenario(
            "t",
            "vars x, y, z\nform f = y*z*dx + x*z*dy + x*y*dz\nassert euler(f)\n",
        )
        .unwrap();
        match &s.defs["f"] {
            Value::Form(f) => {
                let vars = f.vars().clone();
                let field = f.field().clone();
                assert_eq!(
                    *f.components()[0],
                    poly_from_terms(&[(1, &[0, 1, 1])], &vars, &field)
                );
            }
            v => panic!("unexpected {v:?}"),
        }
        assert_eq!(s.assertions.len(), 1);
    }

    #[test]
    fn error_has_position() {
        let err = parse_scenario("t", "vars x, y\npoly p = x + q\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("unknown identifier"));
    }

    #[test]
    fn duplicate_definition_rejected() {
        let err = parse_scenario("t", "vars x, y\npoly p = x\npoly p = y\n").unwrap_err();
        assert!(err.message.contains("defined twice"));
    }

    #[test]
    fn map_with_weights_clause() {
        let s = parse_scenario(
            "t",
            "vars x, y, z\nmap j = (x^3 : x*y : z) weights (1,2,3) -> (1,1,1)\n",
        )
        .unwrap();
        match &s.defs["j"] {
            Value::Map(m) => assert_eq!(m.src_weights, vec![1, 2, 3]),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn assertion_references_must_resolve() {
        let err = parse_scenario("t", "vars x, y, z\nassert euler(nope)\n").unwrap_err();
        assert!(err.message.contains("unknown identifier"));
    }
}
