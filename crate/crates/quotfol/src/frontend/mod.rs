//! Scenario frontend: a small declarative language for batch verification.
//!
//! A scenario file declares a coefficient field, a variable list, named
//! objects (polynomials, 1-forms, rational maps, derivations, points), and a
//! sequence of `assert`/`refute` statements. Parsing resolves every
//! definition eagerly; running a parsed scenario is a pure computation that
//! produces a [`runner::Report`].

pub mod lexer;
pub mod parser;
pub mod runner;
pub mod suites;

pub use parser::{parse_scenario, ParseError, Scenario};
pub use runner::{run_scenario, AssertionReport, Report, Status};
