//! Numbered acceptance checks with their references and fitted constants.

pub mod calibrate;
mod criteria;
pub mod envs;
pub mod oracle;

use crate::error::{domain, Error, Result};
use crate::par::Execution;
use serde::Serialize;
use std::fmt;
use std::time::Instant;

/// Environment variable that switches the excursion-count diagnostic to full scale.
pub const FULL_DIAGNOSTICS_VAR: &str = "OBSTACLE_WALK_FULL_DIAGNOSTICS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub scale: Scale,
    pub exec: Execution,
}

impl VerifyOptions {
    /// Reduced scale unless the environment variable is set to `1`.
    pub fn from_env() -> Self {
        let full = std::env::var(FULL_DIAGNOSTICS_VAR).is_ok_and(|v| v == "1");
        VerifyOptions {
            scale: if full { Scale::Full } else { Scale::Reduced },
            exec: Execution::Parallel,
        }
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            scale: Scale::Reduced,
            exec: Execution::Parallel,
        }
    }
}

type Check = fn(&VerifyOptions) -> Result<criteria::Outcome>;

struct Criterion {
    id: u8,
    name: &'static str,
    diagnostic: bool,
    /// Wall-clock budget in seconds, part of the verdict.
    budget: Option<f64>,
    check: Check,
}

const CRITERIA: [Criterion; 13] = [
    Criterion {
        id: 1,
        name: "ruin exactness",
        diagnostic: false,
        budget: Some(1.0),
        check: criteria::ruin_exactness,
    },
    Criterion {
        id: 2,
        name: "generating functions",
        diagnostic: false,
        budget: Some(1.0),
        check: criteria::generating_functions,
    },
    Criterion {
        id: 3,
        name: "homogeneous rate",
        diagnostic: false,
        budget: Some(10.0),
        check: criteria::homogeneous,
    },
    Criterion {
        id: 4,
        name: "hitting probabilities",
        diagnostic: false,
        budget: Some(30.0),
        check: criteria::hitting,
    },
    Criterion {
        id: 5,
        name: "free-energy sandwich",
        diagnostic: false,
        budget: Some(120.0),
        check: criteria::sandwich,
    },
    Criterion {
        id: 6,
        name: "second-order bracket",
        diagnostic: false,
        budget: None,
        check: criteria::second_order,
    },
    Criterion {
        id: 7,
        name: "renewal identity",
        diagnostic: false,
        budget: None,
        check: criteria::renewal_identity,
    },
    Criterion {
        id: 8,
        name: "mass-renewal bounds",
        diagnostic: false,
        budget: Some(300.0),
        check: criteria::mass_renewal_bounds,
    },
    Criterion {
        id: 9,
        name: "theta bound",
        diagnostic: false,
        budget: None,
        check: criteria::theta_bound,
    },
    Criterion {
        id: 10,
        name: "sampler exactness",
        diagnostic: false,
        budget: None,
        check: criteria::sampler_exactness,
    },
    Criterion {
        id: 11,
        name: "excursion counts",
        diagnostic: true,
        budget: Some(1800.0),
        check: criteria::theorem_counts,
    },
    Criterion {
        id: 12,
        name: "confinement",
        diagnostic: true,
        budget: None,
        check: criteria::theorem_confinement,
    },
    Criterion {
        id: 13,
        name: "transition floor",
        diagnostic: false,
        budget: None,
        check: criteria::transition_floor,
    },
];

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub id: u8,
    pub name: String,
    pub diagnostic: bool,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
    pub seconds: f64,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let tag = if self.diagnostic { " (D)" } else { "" };
        write!(
            f,
            "[{verdict}] {:>2}{tag} {}: {} | expected {} | {:.2}s",
            self.id, self.name, self.measured, self.expected, self.seconds
        )
    }
}

/// Runs one criterion. Errors inside the check become a failed report.
pub fn run_criterion(id: u8, opt: &VerifyOptions) -> Result<Report> {
    let c = CRITERIA
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| domain!("no criterion {id}"))?;
    let start = Instant::now();
    let res = (c.check)(opt);
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut measured, expected) = match res {
        Ok(o) => (o.passed, o.measured, o.expected),
        Err(e) => (false, format!("error: {e}"), "no error".into()),
    };
    if let Some(b) = c.budget {
        if seconds > b {
            passed = false;
            measured = format!("{measured}; over the {b}s budget");
        }
    }
    Ok(Report {
        id,
        name: c.name.into(),
        diagnostic: c.diagnostic,
        passed,
        measured,
        expected,
        seconds,
    })
}

/// Criterion ids of a named suite.
pub fn suite(name: &str) -> Result<Vec<u8>> {
    Ok(match name {
        "ruin" => vec![1, 2],
        "survival" => vec![3, 4],
        "mrp" => vec![5, 6, 7, 8, 9, 13],
        "mc" => vec![10, 11, 12],
        "all" => (1..=13).collect(),
        _ => {
            return Err(Error::Domain(format!(
                "unknown suite {name:?} (ruin, survival, mrp, mc, all)"
            )))
        }
    })
}

/// Runs a suite in order, calling `each` after every criterion.
pub fn run_suite<F: FnMut(&Report)>(
    name: &str,
    opt: &VerifyOptions,
    mut each: F,
) -> Result<Vec<Report>> {
    let mut out = Vec::new();
    for id in suite(name)? {
        let r = run_criterion(id, opt)?;
        each(&r);
        out.push(r);
    }
    Ok(out)
}
