//! Bundled verification suites, compiled into the binary.

pub struct Suite {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! suite {
    ($name:literal) => {
        Suite {
            name: $name,
            text: include_str!(concat!("suites/", $name, ".scn")),
        }
    };
}

pub const SUITES: &[Suite] = &[
    suite!("plane_model_a"),
    suite!("plane_model_b"),
    suite!("plane_model_c"),
    suite!("nodal_model"),
    suite!("ode_iv_symmetries"),
    suite!("ode_v_involution"),
    suite!("ode_iv_to_vi"),
    suite!("planar_solution_iv"),
    suite!("planar_solution_v"),
    suite!("weighted_model_iv"),
    suite!("weighted_model_v"),
    suite!("weighted_model_vi"),
    suite!("weighted_bridge"),
    suite!("weighted_symmetries"),
    suite!("plane_symmetries"),
    suite!("factorization_chain"),
    suite!("pencil_bridge"),
    suite!("quotient_family"),
    suite!("cayley_image"),
    suite!("linear_model"),
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_scenario;

    #[test]
    fn names_are_unique_and_sorted_for_lookup() {
        let mut names: Vec<_> = SUITES.iter().map(|s| s.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SUITES.len());
    }

    #[test]
    fn every_bundled_suite_parses() {
        for s in SUITES {
            if let Err(e) = parse_scenario(s.name, s.text) {
                panic!("suite {} fails to parse: {e}", s.name);
            }
        }
    }
}
