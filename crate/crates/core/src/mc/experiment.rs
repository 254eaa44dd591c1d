//! Replicated localisation experiment: fresh environment, gap selection,
//! one conditioned path and its counters per replica.

use super::conditioned::ConditionedSampler;
use super::stats::{exits_after, path_stats, PathStats};
use crate::env::{Environment, Tail};
use crate::error::{domain, Result};
use crate::fmt::f17;
use crate::gapsel::select_growing;
use crate::par::{map_indexed, Execution};
use crate::survival::KillMode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;

pub const CSV_HEADER: &str = "replica,gamma,beta,n,T1,T2,ell0,H_hit,N_in_00,N_in_01,N_in_10,N_in_11,N_out_0,N_out_1,T_out,confined_after,survived_weight_log";

/// Environment seed of replica `r`: a splitmix64 step of `seed + r`.
pub fn replica_seed(seed: u64, r: usize) -> u64 {
    let mut z = seed
        .wrapping_add(r as u64)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Path RNG of replica `r`: stream `r` of the generator keyed by `seed`.
pub fn replica_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentOptions {
    pub mode: KillMode,
    pub exec: Execution,
    /// Gaps drawn before the selection grows the environment.
    pub initial_gaps: usize,
    /// Constant of the excursion-count event.
    pub count_c: f64,
    /// Delay after `H_hit` for the confinement statistics.
    pub confine_c: u64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            mode: KillMode::Bold,
            exec: Execution::Parallel,
            initial_gaps: 64,
            count_c: 50.0,
            confine_c: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicaRow {
    pub replica: usize,
    pub t1: Option<u64>,
    pub t2: Option<u64>,
    pub ell0: Option<usize>,
    pub stats: Option<PathStats>,
    /// `log Z_n` of the replica's environment.
    pub log_z: Option<f64>,
    /// Exits from the gap after `H_hit + confine_c`.
    pub late_exits: Option<u64>,
    pub error: Option<String>,
}

fn run_replica(
    gamma: f64,
    beta: f64,
    n: u64,
    seed: u64,
    r: usize,
    opt: &ExperimentOptions,
) -> ReplicaRow {
    let mut row = ReplicaRow {
        replica: r,
        t1: None,
        t2: None,
        ell0: None,
        stats: None,
        log_z: None,
        late_exits: None,
        error: None,
    };
    let res = (|| -> Result<()> {
        let env = Environment::sample(gamma, opt.initial_gaps.max(2), replica_seed(seed, r))?;
        let (mut env, sel) = select_growing(&env, n, beta, 0)?;
        row.t1 = Some(sel.t1);
        row.t2 = sel.t2;
        row.ell0 = Some(sel.ell0);
        let sampler = loop {
            let s = ConditionedSampler::new(&env, n, beta, opt.mode, 0)?;
            if env.tail() == Tail::Open && s.hi() as u64 > env.extent() {
                env = env.regrow(2 * env.len())?;
                continue;
            }
            break s;
        };
        row.log_z = Some(sampler.log_z());
        let path = sampler.sample(&mut replica_rng(seed, r))?;
        row.late_exits = Some(exits_after(&path, &sel, opt.confine_c));
        row.stats = Some(path_stats(&path, &sel));
        Ok(())
    })();
    if let Err(e) = res {
        row.error = Some(e.to_string());
    }
    row
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantiles {
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

fn quantiles(mut xs: Vec<f64>) -> Option<Quantiles> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    // nearest rank
    let at = |p: f64| xs[((p * xs.len() as f64).ceil() as usize).clamp(1, xs.len()) - 1];
    Some(Quantiles {
        q10: at(0.1),
        q50: at(0.5),
        q90: at(0.9),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub gamma: f64,
    pub beta: f64,
    pub n: u64,
    pub reps: usize,
    pub seed: u64,
    pub confine_c: u64,
    pub count_c: f64,
    pub failures: Vec<(usize, String)>,
    pub frac_h_hit_half: f64,
    pub frac_count_event: f64,
    pub frac_confined: f64,
    pub mean_late_exits: f64,
    pub h_hit_over_n: Option<Quantiles>,
    pub n_in_scaled: Option<Quantiles>,
    pub n_out_scaled: Option<Quantiles>,
    pub t_out_scaled: Option<Quantiles>,
    pub confined_after: Option<Quantiles>,
    #[serde(skip)]
    pub rows: Vec<ReplicaRow>,
}

impl Summary {
    fn build(
        gamma: f64,
        beta: f64,
        n: u64,
        seed: u64,
        opt: &ExperimentOptions,
        rows: Vec<ReplicaRow>,
    ) -> Self {
        let ok: Vec<(&PathStats, u64, u64)> = rows
            .iter()
            .filter_map(|r| Some((r.stats.as_ref()?, r.t1?, r.late_exits?)))
            .collect();
        let m = ok.len().max(1) as f64;
        let nf = n as f64;
        let frac = |f: &dyn Fn(&PathStats, u64) -> bool| {
            ok.iter().filter(|(s, t, _)| f(s, *t)).count() as f64 / m
        };
        let scaled = |t: u64, x: u64| (x as f64) * (t as f64).powi(3) / nf;
        let count_event = |s: &PathStats, t: u64| {
            let lo = nf / (opt.count_c * (t as f64).powi(3));
            let hi = opt.count_c * nf / (t as f64).powi(3);
            let ok = |x: u64| (lo..=hi).contains(&(x as f64));
            s.h_hit.is_some_and(|h| h as f64 <= 0.5 * nf)
                && s.n_in.iter().flatten().all(|&x| ok(x))
                && s.n_out.iter().all(|&x| ok(x))
                && ok(s.t_out)
        };
        Summary {
            gamma,
            beta,
            n,
            reps: rows.len(),
            seed,
            confine_c: opt.confine_c,
            count_c: opt.count_c,
            failures: rows
                .iter()
                .filter_map(|r| Some((r.replica, r.error.clone()?)))
                .collect(),
            frac_h_hit_half: frac(&|s, _| s.h_hit.is_some_and(|h| h as f64 <= 0.5 * nf)),
            frac_count_event: frac(&count_event),
            frac_confined: frac(&|s, _| s.confined_after.is_some_and(|c| c <= opt.confine_c)),
            mean_late_exits: ok.iter().map(|e| e.2 as f64).sum::<f64>() / m,
            h_hit_over_n: quantiles(
                ok.iter()
                    .filter_map(|(s, _, _)| Some(s.h_hit? as f64 / nf))
                    .collect(),
            ),
            n_in_scaled: quantiles(
                ok.iter()
                    .map(|(s, t, _)| scaled(*t, s.total_in()))
                    .collect(),
            ),
            n_out_scaled: quantiles(
                ok.iter()
                    .map(|(s, t, _)| scaled(*t, s.total_out()))
                    .collect(),
            ),
            t_out_scaled: quantiles(ok.iter().map(|(s, t, _)| scaled(*t, s.t_out)).collect()),
            confined_after: quantiles(
                ok.iter()
                    .filter_map(|(s, _, _)| Some(s.confined_after? as f64))
                    .collect(),
            ),
            rows,
        }
    }

    /// One line per replica under [`CSV_HEADER`]; failed fields stay empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        let opt = |x: Option<u64>| x.map_or(String::new(), |v| v.to_string());
        for r in &self.rows {
            let s = r.stats.as_ref();
            let counts: Vec<String> = match s {
                Some(s) => {
                    let mut v: Vec<String> =
                        s.n_in.iter().flatten().map(|x| x.to_string()).collect();
                    v.extend(s.n_out.iter().map(|x| x.to_string()));
                    v.push(s.t_out.to_string());
                    v
                }
                None => vec![String::new(); 7],
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.replica,
                f17(self.gamma),
                f17(self.beta),
                self.n,
                opt(r.t1),
                opt(r.t2),
                r.ell0.map_or(String::new(), |v| v.to_string()),
                opt(s.and_then(|s| s.h_hit)),
                counts.join(","),
                opt(s.and_then(|s| s.confined_after)),
                r.log_z.map_or(String::new(), f17),
            )?;
        }
        Ok(())
    }
}

/// Runs `reps` independent replicas. Failing replicas are kept as rows with
/// an error message.
pub fn localization_experiment(
    gamma: f64,
    beta: f64,
    n: u64,
    reps: usize,
    seed: u64,
    opt: &ExperimentOptions,
) -> Result<Summary> {
    if reps == 0 {
        return Err(domain!("reps must be at least 1"));
    }
    if n == 0 {
        return Err(domain!("n must be at least 1"));
    }
    let rows = map_indexed(reps, opt.exec, |r| {
        run_replica(gamma, beta, n, seed, r, opt)
    });
    Ok(Summary::build(gamma, beta, n, seed, opt, rows))
}
