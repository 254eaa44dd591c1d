//! Regularity events of an environment around its optimal gap.

use super::Environment;
use crate::error::{domain, Error, Result};
use crate::gapsel::GapSelection;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodParams {
    pub eps0: f64,
    pub eta: f64,
    pub rho: f64,
    pub j: usize,
    /// Threshold fraction for the bad-edge set.
    pub alpha: f64,
    /// Constant inside the argument of `f_k`; the source leaves it unspecified.
    pub c_fk: f64,
}

impl Default for GoodParams {
    fn default() -> Self {
        GoodParams {
            eps0: 0.01,
            eta: 0.001,
            rho: 0.1,
            j: 10,
            alpha: 0.5,
            c_fk: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvDiagnostics {
    pub b1: bool,
    pub b2: bool,
    pub b3: bool,
    pub b4: bool,
    /// Always `None`: the fifth event needs a function defined elsewhere.
    pub b5: Option<bool>,
    /// `{j < i(k0) : T_j > alpha T*_{k0}}`.
    pub bad_edges: Vec<usize>,
    pub bad_edge_count: usize,
    /// `f_k` for record ranks `k = 2..=K`; `None` when the argument leaves `(0, pi)`.
    pub f_k: Vec<Option<f64>>,
}

impl EnvDiagnostics {
    pub fn all_good(&self) -> bool {
        self.b1 && self.b2 && self.b3 && self.b4
    }
}

/// `z / sin z` on `(0, pi)`.
pub fn f_sinc(z: f64) -> Option<f64> {
    (z > 0.0 && z < PI).then(|| z / z.sin())
}

/// Largest-gap bound on both sides of `ell0` for every window length `>= j`.
fn b4(env: &Environment, ell0: usize, j: usize) -> bool {
    let e = (4.0 + env.gamma()) / (4.0 * env.gamma());
    let ok = |ell: usize, m: u64| (m as f64) <= (ell as f64).powf(e);
    let mut run = 0u64;
    for ell in 1..=env.len().saturating_sub(ell0) {
        run = run.max(env.gap(ell0 + ell).unwrap());
        if ell >= j && !ok(ell, run) {
            return false;
        }
    }
    run = 0;
    for ell in 1..ell0 {
        run = run.max(env.gap(ell0 - ell).unwrap());
        if ell >= j && !ok(ell, run) {
            return false;
        }
    }
    true
}

/// Evaluates the first four regularity events at horizon `n`.
///
/// Quantifiers over all window lengths run over the stored gaps only.
pub fn good_events(
    env: &Environment,
    n: u64,
    p: &GoodParams,
    sel: Option<&GapSelection>,
) -> Result<EnvDiagnostics> {
    let sel = sel.ok_or_else(|| Error::Dependency("gap selection outputs are required".into()))?;
    if !(p.eps0 > 0.0 && p.eps0 < 1.0)
        || !(p.eta > 0.0)
        || !(p.rho > 0.0 && p.rho < 0.5)
        || p.j == 0
    {
        return Err(domain!("parameters out of range: {p:?}"));
    }
    let big_n = (n as f64).powf(env.gamma() / (env.gamma() + 2.0));
    let t1 = sel.t1 as f64;
    let ell0 = sel.ell0 as f64;
    let scale = big_n.powf(1.0 / env.gamma());
    let b1 = sel.unique
        && sel.agree
        && p.eps0 * big_n <= ell0
        && ell0 <= big_n / p.eps0
        && p.eps0 * scale <= t1
        && t1 <= scale / p.eps0;
    let g0 = sel.g_values[sel.ell0 - 1];
    let second = sel
        .g_values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i + 1 != sel.ell0)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let b2 = second - g0 >= 2.0 * p.eta;
    let b3 = match sel.t2 {
        Some(t2) => p.rho * t1 < t2 as f64 && (t2 as f64) < (1.0 - p.rho) * t1,
        None => false,
    };
    let b4 = b4(env, sel.ell0, p.j);
    let rec = env.records();
    let bad_edges: Vec<usize> = (1..sel.ell0)
        .filter(|&j| (env.gap(j).unwrap() as f64) > p.alpha * t1)
        .collect();
    let f_k = (1..rec.len())
        .map(|k| {
            let (prev, cur) = (rec.gaps[k - 1] as f64, rec.gaps[k] as f64);
            f_sinc(PI * prev / cur * (1.0 + p.c_fk / (cur * cur))).map(|v| 2.0 * v)
        })
        .collect();
    Ok(EnvDiagnostics {
        b1,
        b2,
        b3,
        b4,
        b5: None,
        bad_edge_count: bad_edges.len(),
        bad_edges,
        f_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapsel::select;
    use proptest::prelude::*;

    #[test]
    fn third_event_by_hand() {
        // Gaps 60 and 100 followed by a larger record; the optimal gap is 100 at large n.
        let env = Environment::from_gaps(1.5, vec![60, 100, 1000])
            .unwrap()
            .truncate(2)
            .unwrap();
        let sel = select(&env, 10_000_000, 1.0).unwrap();
        assert_eq!((sel.t1, sel.t2), (100, Some(60)));
        let p = GoodParams {
            rho: 0.3,
            ..GoodParams::default()
        };
        assert!(good_events(&env, 10_000_000, &p, Some(&sel)).unwrap().b3);
        let p = GoodParams {
            rho: 0.45,
            ..GoodParams::default()
        };
        assert!(!good_events(&env, 10_000_000, &p, Some(&sel)).unwrap().b3);
    }

    #[test]
    fn fourth_event_on_unit_gaps() {
        let env = Environment::from_gaps(1.5, vec![1; 200]).unwrap();
        for j in [1, 5, 50] {
            assert!(b4(&env, 100, j));
        }
    }

    #[test]
    fn second_event_boundary() {
        let env = Environment::from_gaps(1.5, vec![5, 9, 1, 1, 30])
            .unwrap()
            .with_tail(crate::env::Tail::Unit);
        let mut sel = select(&env, 1000, 1.0).unwrap();
        sel.g_values = vec![1.0, 1.5, 2.0, 2.0, 3.0];
        sel.ell0 = 1;
        let eta = 0.25;
        let p = GoodParams {
            eta,
            ..GoodParams::default()
        };
        assert!(
            !good_events(&env, 1000, &GoodParams { eta: 0.250001, ..p }, Some(&sel))
                .unwrap()
                .b2
        );
        assert!(good_events(&env, 1000, &p, Some(&sel)).unwrap().b2);
        assert!(matches!(
            good_events(&env, 1000, &p, None),
            Err(Error::Dependency(_))
        ));
    }

    #[test]
    fn fifth_event_not_evaluated() {
        let env = Environment::sample(1.5, 2000, 3).unwrap();
        let sel = select(&env, 100_000, 1.0).unwrap();
        let d = good_events(&env, 100_000, &GoodParams::default(), Some(&sel)).unwrap();
        assert_eq!(d.b5, None);
        assert_eq!(d.bad_edge_count, d.bad_edges.len());
    }

    proptest! {
        #[test]
        fn sinc_bounds(z in 1e-6f64..(PI - 1e-6)) {
            prop_assert!(f_sinc(z).unwrap() >= 1.0);
        }

        #[test]
        fn fk_at_least_two(gaps in proptest::collection::vec(1u64..500, 2..60), c in 0.0f64..5.0) {
            let env = Environment::from_gaps(1.5, gaps).unwrap().with_tail(crate::env::Tail::Unit);
            let sel = select(&env, 1000, 1.0);
            if let Ok(sel) = sel {
                let p = GoodParams { c_fk: c, ..GoodParams::default() };
                let d = good_events(&env, 1000, &p, Some(&sel)).unwrap();
                for v in d.f_k.into_iter().flatten() {
                    prop_assert!(v >= 2.0);
                }
            }
        }
    }
}
