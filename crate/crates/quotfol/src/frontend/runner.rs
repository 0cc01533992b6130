//! Executes a parsed scenario and produces a deterministic report.
//!
//! Assertions never abort the run: a failed check is recorded and execution
//! continues, so one report covers the whole file. `run_many` fans scenarios
//! out over a thread pool when the `parallel` feature is enabled.

use serde::Serialize;
use std::fmt::Write as _;

use crate::birmap::{maps_equal_up_to_scale, preserves_pencil, Pencil};
use crate::chazy::{
    group_relations, quasihomogeneous_rhs, solution_residual, verify_first_integral,
    verify_invariant_surface, Transform,
};
use crate::exterior::{euler_check, foliation_degree, invariant_curve, tangent_foliation_space};
use crate::frontend::parser::{Op, Scenario};
use crate::localfol::{
    analyze, cremona_predict, darboux_check, equation7_check, localize, EigenRatio,
};
use crate::poly::proportional;
use crate::scalar::{FieldSpec, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssertionReport {
    pub index: usize,
    pub line: usize,
    pub text: String,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub assertions: Vec<AssertionReport>,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u128>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.errors == 0
    }

    pub fn render_text(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "scenario {}: {} passed, {} failed, {} errors{}",
            self.scenario,
            self.passed,
            self.failed,
            self.errors,
            match self.millis {
                Some(ms) => format!(" ({ms} ms)"),
                None => String::new(),
            }
        );
        for a in &self.assertions {
            let tag = match a.status {
                Status::Pass => "pass ",
                Status::Fail => "FAIL ",
                Status::Error => "ERROR",
            };
            let _ = write!(out, "  [{tag}] line {:>3}: {}", a.line, a.text);
            if !a.detail.is_empty() {
                let _ = write!(out, " -- {}", a.detail);
            }
            let _ = writeln!(out);
        }
    }
}

pub fn run_scenario(s: &Scenario) -> Report {
    run_scenario_with(s, false)
}

pub fn run_scenario_with(s: &Scenario, timing: bool) -> Report {
    let start = std::time::Instant::now();
    let mut assertions = Vec::with_capacity(s.assertions.len());
    let (mut passed, mut failed, mut errors) = (0, 0, 0);
    for (index, a) in s.assertions.iter().enumerate() {
        let (status, detail) = match execute(&a.op) {
            Ok((holds, detail)) => {
                let ok = holds != a.negated;
                if ok {
                    passed += 1;
                    (Status::Pass, detail)
                } else {
                    failed += 1;
                    let d = if a.negated && holds {
                        if detail.is_empty() {
                            "held, but was refuted".to_string()
                        } else {
                            format!("held, but was refuted; {detail}")
                        }
                    } else {
                        detail
                    };
                    (Status::Fail, d)
                }
            }
            Err(msg) => {
                errors += 1;
                (Status::Error, msg)
            }
        };
        let text = if a.negated {
            format!("refute {}", a.text)
        } else {
            format!("assert {}", a.text)
        };
        assertions.push(AssertionReport {
            index,
            line: a.line,
            text,
            status,
            detail,
        });
    }
    Report {
        scenario: s.name.clone(),
        assertions,
        passed,
        failed,
        errors,
        millis: timing.then(|| start.elapsed().as_millis()),
    }
}

#[cfg(feature = "parallel")]
pub fn run_many(scenarios: &[Scenario], timing: bool) -> Vec<Report> {
    use rayon::prelude::*;
    scenarios
        .par_iter()
        .map(|s| run_scenario_with(s, timing))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_many(scenarios: &[Scenario], timing: bool) -> Vec<Report> {
    scenarios
        .iter()
        .map(|s| run_scenario_with(s, timing))
        .collect()
}

type Outcome = Result<(bool, String), String>;

fn ok(holds: bool) -> Outcome {
    Ok((holds, String::new()))
}

fn point3(p: &[Scalar]) -> Result<[Scalar; 3], String> {
    <[Scalar; 3]>::try_from(p.to_vec()).map_err(|_| "point must have three coordinates".into())
}

fn execute(op: &Op) -> Outcome {
    match op {
        Op::Euler(f) => ok(euler_check(f).map_err(|e| format!("{e:?}"))?),
        Op::Degree(f, n) => {
            let d = foliation_degree(f).map_err(|e| format!("{e:?}"))?;
            Ok((d == *n, format!("degree {d}")))
        }
        Op::WeightedDegree(p, w, d) => {
            let got = p.weighted_degree(w).map_err(|e| format!("{e:?}"))?;
            Ok((
                got == Some(*d),
                match got {
                    Some(g) => format!("weighted degree {g}"),
                    None => "not weighted-homogeneous".to_string(),
                },
            ))
        }
        Op::ProportionalForms(a, b) => ok(a.proportional_to(b)),
        Op::ProportionalPolys(a, b) => ok(proportional(a, b)),
        Op::Invariant(f, g) => {
            let cof = invariant_curve(f, g).map_err(|e| format!("{e:?}"))?;
            match cof {
                Some(t) => Ok((
                    true,
                    format!("cofactor [{}; {}; {}]", t.p, t.q, t.r),
                )),
                None => Ok((false, "no polynomial cofactor".to_string())),
            }
        }
        Op::TangentSpace { curves, degree, dim } => {
            let vars = curves[0].vars.clone();
            let field = curves[0].field.clone();
            let basis = tangent_foliation_space(curves, *degree, &vars, &field)
                .map_err(|e| format!("{e:?}"))?;
            Ok((basis.len() == *dim, format!("dimension {}", basis.len())))
        }
        Op::TangentBasis { curves, degree, form } => {
            let vars = curves[0].vars.clone();
            let field = curves[0].field.clone();
            let basis = tangent_foliation_space(curves, *degree, &vars, &field)
                .map_err(|e| format!("{e:?}"))?;
            if basis.len() != 1 {
                return Ok((false, format!("dimension {}", basis.len())));
            }
            Ok((
                basis[0].proportional_to(form),
                "unique up to scale".to_string(),
            ))
        }
        Op::Pullback { map, form, expect } => {
            let (pf, _) = map.weighted_pullback(form).map_err(|e| format!("{e:?}"))?;
            ok(pf.proportional_to(expect))
        }
        Op::PullbackFactor { map, form, factor } => {
            let (_, extracted) = map.weighted_pullback(form).map_err(|e| format!("{e:?}"))?;
            Ok((
                proportional(&extracted, factor),
                format!("extracted factor of degree {}", extracted.total_degree()),
            ))
        }
        Op::Order(m, n) => {
            let got = m.order_up_to_scale(*n).map_err(|e| format!("{e:?}"))?;
            Ok((
                got == Some(*n),
                match got {
                    Some(k) => format!("order {k}"),
                    None => format!("order exceeds {n}"),
                },
            ))
        }
        Op::EqualMaps(a, b) => ok(maps_equal_up_to_scale(a, b).map_err(|e| format!("{e:?}"))?),
        Op::ImageOn(m, g) => ok(m.image_satisfies(g).map_err(|e| format!("{e:?}"))?),
        Op::Jacobian(m, g) => {
            let j = m.jacobian_det().map_err(|e| format!("{e:?}"))?;
            ok(proportional(&j, g))
        }
        Op::FixedCurve(m, g) => ok(m.fixed_locus_contains(g).map_err(|e| format!("{e:?}"))?),
        Op::PreservesPencil(m, l1, l2) => {
            let pencil = Pencil {
                l1: l1.clone(),
                l2: l2.clone(),
            };
            match preserves_pencil(m, &pencil).map_err(|e| format!("{e:?}"))? {
                Some((mat, common)) => Ok((
                    true,
                    format!(
                        "matrix [[{}, {}], [{}, {}]], common factor of degree {}",
                        mat[0][0],
                        mat[0][1],
                        mat[1][0],
                        mat[1][1],
                        common.total_degree()
                    ),
                )),
                None => Ok((false, "pencil not preserved".to_string())),
            }
        }
        Op::Singular {
            form,
            point,
            ratio,
            mu,
            l,
            class,
            dicritical,
        } => {
            let p = point3(point)?;
            let lf = localize(form, &p).map_err(|e| format!("{e:?}"))?;
            let r = analyze(&lf);
            let mut holds = r.is_singular;
            let mut detail = format!("nu={} class={}", r.nu, r.classification);
            if let Some(er) = &r.eigen_ratio {
                let _ = write!(detail, " ratio={er}");
            }
            if let Some(m) = r.milnor.finite() {
                let _ = write!(detail, " mu={m}");
            }
            if let Some((a, b)) = ratio {
                let want = EigenRatio::Pair(a.clone(), b.clone());
                holds &= r
                    .eigen_ratio
                    .as_ref()
                    .map(|er| er.equivalent(&want))
                    .unwrap_or(false);
            }
            if let Some(m) = mu {
                holds &= r.milnor.finite() == Some(*m);
            }
            if let Some(want) = l {
                holds &= r.l == *want;
                let _ = write!(detail, " l={}", r.l);
            }
            if let Some(c) = class {
                holds &= r.classification.to_string() == *c;
            }
            if let Some(d) = dicritical {
                holds &= r.dicritical == *d;
            }
            Ok((holds, detail))
        }
        Op::RegularAt(form, point) => {
            let p = point3(point)?;
            let lf = localize(form, &p).map_err(|e| format!("{e:?}"))?;
            ok(!analyze(&lf).is_singular)
        }
        Op::Darboux(form, points) => {
            let pts: Vec<[Scalar; 3]> = points
                .iter()
                .map(|p| point3(p))
                .collect::<Result<_, _>>()?;
            let r = darboux_check(form, &pts).map_err(|e| format!("{e:?}"))?;
            Ok((
                r.complete,
                format!(
                    "degree {}: total Milnor number {} of expected {}",
                    r.degree, r.total, r.expected
                ),
            ))
        }
        Op::Balance(form, point) => {
            let p = point3(point)?;
            let lf = localize(form, &p).map_err(|e| format!("{e:?}"))?;
            let (mu, l, sum, holds) = equation7_check(&lf).map_err(|e| format!("{e:?}"))?;
            Ok((holds, format!("mu={mu} l={l} exceptional sum={sum}")))
        }
        Op::Solves { derivation, u, target } => {
            let r = solution_residual(derivation, u, *target).map_err(|e| format!("{e:?}"))?;
            ok(r.is_zero())
        }
        Op::Integral(d, b) => ok(verify_first_integral(d, b).map_err(|e| format!("{e:?}"))?),
        Op::Surface(d, c) => {
            match verify_invariant_surface(d, c).map_err(|e| format!("{e:?}"))? {
                Some(k) => Ok((true, format!("cofactor {k}"))),
                None => Ok((false, "no polynomial cofactor".to_string())),
            }
        }
        Op::Relations { derivation, flop, tri } => {
            let tf = Transform::from_lift(derivation, flop).map_err(|e| format!("{e:?}"))?;
            let tt = Transform::from_lift(derivation, tri).map_err(|e| format!("{e:?}"))?;
            let r = group_relations(&tf, &tt).map_err(|e| format!("{e:?}"))?;
            Ok((
                r.flop_is_involution && r.tri_has_order_three && r.braid_relation,
                format!(
                    "involution={} order-three={} braid={}",
                    r.flop_is_involution, r.tri_has_order_three, r.braid_relation
                ),
            ))
        }
        Op::InvolutionLift(d, u) => {
            let t = Transform::from_lift(d, u).map_err(|e| format!("{e:?}"))?;
            let id = Transform::identity(&d.vars, &d.field);
            ok(t.pow(2).map_err(|e| format!("{e:?}"))? == id)
        }
        Op::Coincide { derivation, g, u } => {
            let lift = derivation.lift(u).map_err(|e| format!("{e:?}"))?;
            let moved = g.substitute(&lift).map_err(|e| format!("{e:?}"))?;
            ok(moved == *g)
        }
        Op::Level {
            derivation,
            u,
            target,
            value,
        } => {
            let lift = derivation.lift(u).map_err(|e| format!("{e:?}"))?;
            let b = target.first_integral(
                &crate::poly::varset(&["x", "y", "z"]),
                &derivation.field,
            );
            let got = b
                .substitute(&lift)
                .and_then(|r| r.reduce())
                .map_err(|e| format!("{e:?}"))?;
            let num = got.num.as_constant();
            let den = got.den.as_constant();
            match num.zip(den) {
                Some((n, d)) => {
                    let level = n.div(&d).map_err(|e| format!("{e:?}"))?;
                    Ok((level == *value, format!("level {level}")))
                }
                None => Ok((false, "level is not constant".to_string())),
            }
        }
        Op::Quasihomogeneous(v) => ok(
            quasihomogeneous_rhs(*v, &FieldSpec::rational()).map_err(|e| format!("{e:?}"))?,
        ),
        Op::Predict {
            deg,
            l,
            expect_deg,
            expect_l,
        } => {
            let (d2, l2) = cremona_predict(*deg, *l);
            Ok((
                d2 == *expect_deg && l2 == *expect_l,
                format!("predicted degree {d2}, multiplicities ({}, {}, {})", l2[0], l2[1], l2[2]),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_scenario;

    fn run(text: &str) -> Report {
        run_scenario(&parse_scenario("test", text).unwrap())
    }

    #[test]
    fn euler_pass_and_fail() {
        let r = run(
            "vars x, y, z\n\
             form f = y*z*(x + y - 2*z)*dx + x*z*(y + z - 2*x)*dy + x*y*(z + x - 2*y)*dz\n\
             assert euler(f)\n\
             assert degree(f, 2)\n\
             refute degree(f, 3)\n",
        );
        assert!(r.ok(), "{:#?}", r.assertions);
        assert_eq!(r.passed, 3);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let r = run(
            "vars x, y, z\n\
             form f = y*z*(x + y - 2*z)*dx + x*z*(y + z - 2*x)*dy + x*y*(z + x - 2*y)*dz\n\
             assert degree(f, 5)\n\
             assert euler(f)\n",
        );
        assert_eq!(r.failed, 1);
        assert_eq!(r.passed, 1);
        assert_eq!(r.assertions[0].status, Status::Fail);
        assert_eq!(r.assertions[1].status, Status::Pass);
    }

    #[test]
    fn invariant_reports_cofactor() {
        let r = run(
            "vars x, y, z\n\
             form f = y*z*(x + y - 2*z)*dx + x*z*(y + z - 2*x)*dy + x*y*(z + x - 2*y)*dz\n\
             assert invariant(f, x)\n",
        );
        assert!(r.ok());
        assert!(r.assertions[0].detail.contains("cofactor"));
    }

    #[test]
    fn refuted_truth_fails_with_note() {
        let r = run(
            "vars x, y, z\n\
             form f = y*z*(x + y - 2*z)*dx + x*z*(y + z - 2*x)*dy + x*y*(z + x - 2*y)*dz\n\
             refute euler(f)\n",
        );
        assert_eq!(r.failed, 1);
        assert!(r.assertions[0].detail.contains("refuted"));
    }

    #[test]
    fn chazy_ops_run_end_to_end() {
        let r = run(
            "vars x, y, z\n\
             derivation D = chazy(IV)\n\
             poly B = x^3 - 3*x*y + z\n\
             assert integral(D, B)\n\
             assert solves(D, (2*x*y - z)/y, IV)\n\
             assert quasihomogeneous(IV)\n",
        );
        assert!(r.ok(), "{:?}", r.assertions);
    }

    #[test]
    fn json_serialization_is_stable() {
        let r = run("vars x, y, z\nform f = y*z*(x + y - 2*z)*dx + x*z*(y + z - 2*x)*dy + x*y*(z + x - 2*y)*dz\nassert euler(f)\n");
        let j = serde_json::to_string(&r).unwrap();
        assert!(j.contains("\"status\":\"pass\""));
        assert!(!j.contains("millis"));
    }
}
