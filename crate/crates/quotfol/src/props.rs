//! Seeded randomized self-checks: algebraic laws that must hold for every
//! input, exercised on pseudo-random data. Used by the `properties` CLI
//! subcommand and by the integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chazy::{ChazyVariant, Derivation};
use crate::exterior::OneForm;
use crate::localfol::{milnor_fulton, milnor_macaulay, LocalFoliation};
use crate::poly::{varset, Poly, RationalFn, VarSet};
use crate::scalar::{rat, Field, FieldSpec, Scalar};

#[derive(Debug, Clone)]
pub struct PropReport {
    pub name: &'static str,
    pub cases: u32,
    pub failures: u32,
}

impl PropReport {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }
}

fn rand_scalar(rng: &mut ChaCha8Rng, field: &Field) -> Scalar {
    let a0 = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
    let s0 = Scalar::from_rat(a0, field);
    if field.minpoly.is_none() || rng.gen_bool(0.5) {
        return s0;
    }
    let a1 = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
    s0.add(&Scalar::gen(field).mul(&Scalar::from_rat(a1, field)).unwrap())
        .unwrap()
}

fn rand_poly(
    rng: &mut ChaCha8Rng,
    vars: &VarSet,
    field: &Field,
    max_deg: u32,
    terms: u32,
) -> Poly {
    let mut p = Poly::zero(vars, field);
    for _ in 0..terms {
        let mut mono = Poly::constant(rand_scalar(rng, field), vars);
        for i in 0..vars.len() {
            let e = rng.gen_range(0..=max_deg);
            mono = mono.mul(&Poly::var(i, vars, field).pow(e)).unwrap();
        }
        p = p.add(&mono).unwrap();
    }
    p
}

fn rand_nonzero_poly(
    rng: &mut ChaCha8Rng,
    vars: &VarSet,
    field: &Field,
    max_deg: u32,
    terms: u32,
) -> Poly {
    loop {
        let p = rand_poly(rng, vars, field, max_deg, terms);
        if !p.is_zero() {
            return p;
        }
    }
}

fn fields() -> Vec<Field> {
    vec![
        FieldSpec::rational(),
        FieldSpec::cyclotomic3(),
        FieldSpec::gaussian(),
    ]
}

/// Field axioms: associativity, commutativity, distributivity, and
/// multiplicative inverses in Q, Q(w) and Q(i).
pub fn prop_field_axioms(seed: u64, cases: u32) -> PropReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..cases {
        for field in fields() {
            let (a, b, c) = (
                rand_scalar(&mut rng, &field),
                rand_scalar(&mut rng, &field),
                rand_scalar(&mut rng, &field),
            );
            let assoc = a.add(&b).unwrap().add(&c).unwrap() == a.add(&b.add(&c).unwrap()).unwrap();
            let comm = a.mul(&b).unwrap() == b.mul(&a).unwrap();
            let distr = a.mul(&b.add(&c).unwrap()).unwrap()
                == a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            let inv = a.is_zero() || {
                let ai = a.inv().unwrap();
                a.mul(&ai).unwrap().is_one()
            };
            if !(assoc && comm && distr && inv) {
                failures += 1;
            }
        }
    }
    PropReport {
        name: "field-axioms",
        cases,
        failures,
    }
}

/// gcd divides both arguments, and (p*q)/q recovers p exactly.
pub fn prop_gcd_and_division(seed: u64, cases: u32) -> PropReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = varset(&["x", "y"]);
    let mut failures = 0;
    for _ in 0..cases {
        for field in fields() {
            let p = rand_poly(&mut rng, &vars, &field, 2, 3);
            let q = rand_nonzero_poly(&mut rng, &vars, &field, 2, 2);
            let c = rand_nonzero_poly(&mut rng, &vars, &field, 1, 2);
            let round_trip = p.mul(&q).unwrap().exact_div(&q).unwrap() == p;
            let g = p.mul(&c).unwrap().gcd(&q.mul(&c).unwrap()).unwrap();
            let common = (p.is_zero() && q.is_zero())
                || (g.divides(&p.mul(&c).unwrap()) && g.divides(&q.mul(&c).unwrap()) && c.divides(&g));
            if !(round_trip && common) {
                failures += 1;
            }
        }
    }
    PropReport {
        name: "gcd-and-division",
        cases,
        failures,
    }
}

/// The Leibniz rule D(uv) = D(u) v + u D(v) for the three equation-derived
/// derivations, on random rational functions.
pub fn prop_leibniz(seed: u64, cases: u32) -> PropReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = FieldSpec::rational();
    let mut failures = 0;
    for i in 0..cases {
        let variant = match i % 3 {
            0 => ChazyVariant::IV,
            1 => ChazyVariant::V,
            _ => ChazyVariant::VI,
        };
        let d = Derivation::chazy(variant, &field);
        let vars = d.vars.clone();
        let u = RationalFn::new(
            rand_poly(&mut rng, &vars, &field, 1, 2),
            rand_nonzero_poly(&mut rng, &vars, &field, 1, 1),
        )
        .unwrap();
        let v = RationalFn::from_poly(rand_poly(&mut rng, &vars, &field, 1, 2));
        let lhs = d.apply(&u.mul(&v).unwrap()).unwrap();
        let rhs = d
            .apply(&u)
            .unwrap()
            .mul(&v)
            .unwrap()
            .add(&u.mul(&d.apply(&v).unwrap()).unwrap())
            .unwrap();
        if lhs != rhs {
            failures += 1;
        }
    }
    PropReport {
        name: "leibniz-rule",
        cases,
        failures,
    }
}

/// Pullback is contravariantly functorial: (f o g)* W equals g*(f* W) up to
/// the extracted scalar factors, for random monomial-free linear maps.
pub fn prop_pullback_functorial(seed: u64, cases: u32) -> PropReport {
    use crate::birmap::RationalMap;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = FieldSpec::rational();
    let vars = varset(&["x", "y", "z"]);
    let weights = vec![1u32, 1, 1];
    let mut failures = 0;
    let mut done = 0;
    while done < cases {
        let lin = |rng: &mut ChaCha8Rng| -> Option<RationalMap> {
            let comps: Vec<Poly> = (0..3)
                .map(|_| rand_poly(rng, &vars, &field, 1, 2))
                .map(|p| {
                    // keep only the linear part
                    let mut q = Poly::zero(&vars, &field);
                    for (m, c) in &p.terms {
                        if m.degree() == 1 {
                            q.terms.insert(m.clone(), c.clone());
                        }
                    }
                    q
                })
                .collect();
            RationalMap::new(comps, weights.clone(), weights.clone()).ok()
        };
        let (Some(f), Some(g)) = (lin(&mut rng), lin(&mut rng)) else {
            continue;
        };
        let Ok(fg) = f.compose(&g) else { continue };
        // a projective 1-form: i_R i_V (volume) for a random linear field V
        let (a, b) = (
            rand_poly(&mut rng, &vars, &field, 1, 2),
            rand_poly(&mut rng, &vars, &field, 1, 2),
        );
        let x = Poly::var(0, &vars, &field);
        let y = Poly::var(1, &vars, &field);
        let z = Poly::var(2, &vars, &field);
        let fa = a.mul(&z).unwrap();
        let fb = b.mul(&z).unwrap();
        let fc = a.mul(&x).unwrap().add(&b.mul(&y).unwrap()).unwrap().neg();
        let Ok(form) = OneForm::new(fa, fb, fc, weights.clone()) else {
            continue;
        };
        let direct = fg.pullback_form(&form);
        let staged = f
            .pullback_form(&form)
            .and_then(|(w1, _)| g.pullback_form(&w1));
        match (direct, staged) {
            (Ok((w1, _)), Ok((w2, _))) => {
                if !w1.proportional_to(&w2) {
                    failures += 1;
                }
                done += 1;
            }
            _ => continue,
        }
    }
    PropReport {
        name: "pullback-functorial",
        cases,
        failures,
    }
}

/// The intersection-number and staircase computations of the local Milnor
/// number agree on random local pairs of bounded degree.
pub fn prop_milnor_agreement(seed: u64, cases: u32) -> PropReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = FieldSpec::rational();
    let vars = crate::localfol::local_vars();
    let mut failures = 0;
    let mut done = 0;
    while done < cases {
        let a = rand_poly(&mut rng, &vars, &field, 2, 3);
        let b = rand_poly(&mut rng, &vars, &field, 2, 3);
        let Ok(lf) = LocalFoliation::new(a, b) else {
            continue;
        };
        let mf = milnor_fulton(&lf.a, &lf.b);
        let mm = milnor_macaulay(&lf.a, &lf.b, 24);
        if mf != mm {
            failures += 1;
        }
        done += 1;
    }
    PropReport {
        name: "milnor-agreement",
        cases,
        failures,
    }
}

/// Runs every property with the given per-property case count.
pub fn run_all(seed: u64, cases: u32) -> Vec<PropReport> {
    vec![
        prop_field_axioms(seed, cases),
        prop_gcd_and_division(seed.wrapping_add(1), cases),
        prop_leibniz(seed.wrapping_add(2), cases),
        prop_pullback_functorial(seed.wrapping_add(3), cases),
        prop_milnor_agreement(seed.wrapping_add(4), cases),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_all_properties() {
        for r in run_all(7, 10) {
            assert!(r.ok(), "{} failed {} of {}", r.name, r.failures, r.cases);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = prop_gcd_and_division(42, 5);
        let b = prop_gcd_and_division(42, 5);
        assert_eq!(a.failures, b.failures);
    }
}
