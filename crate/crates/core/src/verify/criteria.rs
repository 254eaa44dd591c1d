use super::calibrate::{
    mass_spans_over, theta_maxima, CHECK_SEEDS, MASS_RENEWAL_C, THETA_C, THETA_N, UNPINNED_C,
};
use super::envs::{good_envs, planted_random, planted_scaled};
use super::oracle::{path_weights, ruin_transfer};
use super::{Scale, VerifyOptions};
use crate::env::{Environment, GoodParams};
use crate::error::Result;
use crate::mc::{localization_experiment, sample_direct, ConditionedSampler, ExperimentOptions};
use crate::mrp::{free_energy, mass_renewal, partition_functions, plant, MrKernel};
use crate::ruin::{q, q0, q1, qhat0_inf, Part, RuinKernel};
use crate::survival::{hit_before_death, lyapunov, phi_hom, survive_exact, KillMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;

pub(super) struct Outcome {
    pub passed: bool,
    pub measured: String,
    pub expected: String,
}

fn fmt_e(x: f64) -> String {
    format!("{x:.3e}")
}

pub(super) fn ruin_exactness(_: &VerifyOptions) -> Result<Outcome> {
    let mut err: f64 = 0.0;
    for &t in &[3u64, 4, 5, 6, 8] {
        let k = RuinKernel::new(t)?;
        for (n, &(o0, o1)) in ruin_transfer(t, 60).iter().enumerate().skip(1) {
            let n = n as u64;
            err = err
                .max((k.q0(n) - o0).abs())
                .max((k.q1(n) - o1).abs())
                .max((k.q(n) - o0 - 2.0 * o1).abs());
        }
    }
    let spots = [(q0(3, 2)?, 0.5), (q1(3, 3)?, 0.125), (q(3, 4)?, 0.125)];
    let spot_err = spots.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Outcome {
        passed: err <= 1e-12 && spot_err <= 1e-15,
        measured: format!(
            "max oracle deviation {}, spot deviation {}",
            fmt_e(err),
            fmt_e(spot_err)
        ),
        expected: "<= 1e-12; q0(3,2)=1/2, q1(3,3)=1/8, q(3,4)=1/8".into(),
    })
}

fn asymptotic_ratios(t: u64) -> Result<f64> {
    let k = RuinKernel::new(t)?;
    let tf = t as f64;
    let e = tf.powf(-0.5);
    let f = PI * PI * (1.0 - e) / (2.0 * tf * tf);
    let ratios = [
        (k.qhat(f, Part::Total)? - 1.0) * tf * e / 4.0,
        (k.qhat(f, Part::Same)? - 1.0) * tf * e / 2.0,
        k.qhat(f, Part::Cross)? * tf * e,
        k.qhat_d1(f, Part::Total)? * PI * PI * e * e / (8.0 * tf),
        k.qhat_d1(f, Part::Same)? * PI * PI * e * e / (4.0 * tf),
        k.qhat_d1(f, Part::Cross)? * PI * PI * e * e / (2.0 * tf),
        k.qhat_d2(f, Part::Total)? * PI.powi(4) * e.powi(3) / (32.0 * tf.powi(3)),
        k.qhat_d2(f, Part::Same)? * PI.powi(4) * e.powi(3) / (16.0 * tf.powi(3)),
        k.qhat_d2(f, Part::Cross)? * PI.powi(4) * e.powi(3) / (8.0 * tf.powi(3)),
    ];
    Ok(ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max))
}

pub(super) fn generating_functions(_: &VerifyOptions) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = rng.random_range(3..300u64);
        let k = RuinKernel::new(t)?;
        let f = rng.random_range(0.05..0.95) * k.g();
        let h = 1e-5 * f.min(k.g() - f);
        for part in [Part::Same, Part::Cross, Part::Total] {
            let fd1 = (k.qhat(f + h, part)? - k.qhat(f - h, part)?) / (2.0 * h);
            let fd2 = (k.qhat_d1(f + h, part)? - k.qhat_d1(f - h, part)?) / (2.0 * h);
            let a1 = k.qhat_d1(f, part)?;
            let a2 = k.qhat_d2(f, part)?;
            worst = worst
                .max(((a1 - fd1) / a1).abs())
                .max(((a2 - fd2) / a2).abs());
        }
    }
    let at_zero = qhat0_inf(0.0)?;
    let r100 = asymptotic_ratios(100)?;
    let r400 = asymptotic_ratios(400)?;
    Ok(Outcome {
        passed: worst <= 1e-6 && at_zero == 1.0 && r100 <= 0.10 && r400 <= 0.05,
        measured: format!(
            "max rel. derivative error {}, qhat0_inf(0) = {at_zero}, max |ratio - 1| {:.4} (t=100), {:.4} (t=400)",
            fmt_e(worst),
            r100,
            r400
        ),
        expected: "<= 1e-6; 1; <= 0.10 at t=100, <= 0.05 at t=400".into(),
    })
}

pub(super) fn homogeneous(_: &VerifyOptions) -> Result<Outcome> {
    let e = 1f64.exp();
    let phi25 = phi_hom(1.0, 25)?;
    let resid = (RuinKernel::new(25)?.qhat(phi25, Part::Total)? - e).abs() / e;
    let t = 200.0;
    let phi200 = phi_hom(1.0, 200)?;
    let factor = t * (1.0 - 2.0 * t * t * phi200 / (PI * PI)) * (e - 1.0) / 4.0;
    let n = 10_000u64;
    let env = Environment::periodic(5, (n / 5) as usize + 4)?;
    let rate = -survive_exact(&env, n, 1.0, KillMode::Soft)? / n as f64;
    let phi5 = phi_hom(1.0, 5)?;
    let rel = (rate - phi5).abs() / phi5;
    Ok(Outcome {
        passed: resid <= 1e-10 && (factor - 1.0).abs() <= 0.10 && rel <= 0.02,
        measured: format!(
            "residual/e^beta {}, expansion factor {factor:.4}, DP rate rel. diff {}",
            fmt_e(resid),
            fmt_e(rel)
        ),
        expected: "<= 1e-10; within 10% of 1; <= 2%".into(),
    })
}

pub(super) fn hitting(_: &VerifyOptions) -> Result<Outcome> {
    let env = Environment::from_gaps(1.0, vec![1; 10])?;
    let mut err: f64 = 0.0;
    for &beta in &[0.5, 1.0, 2.0] {
        let want = beta + 2f64.ln();
        err = err
            .max((lyapunov(&env, beta, 1)? - want).abs())
            .max((lyapunov(&env, beta, 2)? - want).abs());
        let kb = (-beta).exp();
        let closed = kb.powi(3) / (2.0 * (4.0 - kb * kb));
        err = err.max((hit_before_death(&env, beta, 3)? - closed).abs() / closed);
    }
    let beta = 0.5f64;
    let kb = (-beta).exp();
    let p = kb.powi(3) / (2.0 * (4.0 - kb * kb));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 1_000_000u64;
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut x = 0i64;
        loop {
            x += if rng.random::<bool>() { 1 } else { -1 };
            if x <= 0 || rng.random::<f64>() >= kb {
                break;
            }
            if x == 3 {
                hits += 1;
                break;
            }
        }
    }
    let f = hits as f64 / trials as f64;
    let z = (f - p) / (p * (1.0 - p) / trials as f64).sqrt();
    Ok(Outcome {
        passed: err <= 1e-12 && z.abs() <= 3.0,
        measured: format!(
            "max deviation {}, Monte Carlo {f:.5} vs {p:.5} (z = {z:.2})",
            fmt_e(err)
        ),
        expected: "<= 1e-12; |z| <= 3".into(),
    })
}

/// Differences below this fraction of `g(T1)` are beyond the root finder.
const TIE: f64 = 1e-13;

pub(super) fn sandwich(_: &VerifyOptions) -> Result<Outcome> {
    let params = GoodParams::default();
    let mut count = 0;
    let mut reversed = 0;
    let mut tied = 0;
    let mut margin = f64::INFINITY;
    let (mut hlo, mut hhi) = (f64::INFINITY, 0.0f64);
    for &gamma in &[0.5, 1.5] {
        for g in good_envs(gamma, 100_000, 1.0, 50, 5_000, &params)? {
            let fe = free_energy(&g.env_bar, 1.0)?;
            count += 1;
            let gaps = [
                fe.phi - fe.phi_hom_t1,
                fe.phi_unitgaps - fe.phi,
                fe.g_t1 - fe.phi_unitgaps,
            ];
            let rel: Vec<f64> = gaps.iter().map(|d| d / fe.g_t1).collect();
            if rel.iter().any(|&r| r < -TIE) {
                reversed += 1;
            } else if rel.iter().any(|&r| r <= 0.0) {
                tied += 1;
            }
            margin = margin.min(
                rel.iter()
                    .copied()
                    .filter(|&r| r > 0.0)
                    .fold(f64::INFINITY, f64::min),
            );
            hlo = hlo.min(fe.h_ratio);
            hhi = hhi.max(fe.h_ratio);
        }
    }
    Ok(Outcome {
        passed: reversed == 0,
        measured: format!(
            "{reversed} reversals, {tied} ties within {TIE:e} g(T1) on {count} envs, min resolved margin {}, h ratio in [{hlo:.3}, {hhi:.3}]",
            fmt_e(margin)
        ),
        expected: "phi(T1) < phi < phi(unit, T1, unit) < g(T1) on all, up to root-finder resolution".into(),
    })
}

pub(super) fn second_order(_: &VerifyOptions) -> Result<Outcome> {
    let beta = 1.0f64;
    let e = beta.exp();
    let lo = 4.0 / (e * (1.0 + (1.0 - (-2.0 * beta).exp()).sqrt()) - 1.0);
    let hi = 4.0 / (e - 1.0);
    let (wlo, whi) = (0.9 * lo, 1.1 * hi);
    let mut vals = Vec::new();
    for &t1 in &[100u64, 200] {
        let base = plant(1.5, &[1, 1], t1, &[1])?;
        let unit = MrKernel::new(&base, beta)?.unit_reference()?;
        vals.push(t1 as f64 * unit.eps_coeff());
        for seed in 0..5 {
            let k = MrKernel::new(&planted_random(1.5, t1, 12, 8, 0.1, 300 + seed)?, beta)?;
            vals.push(t1 as f64 * k.eps_coeff());
        }
    }
    let (mn, mx) = vals
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(Outcome {
        passed: mn >= wlo && mx <= whi,
        measured: format!("T1 eps in [{mn:.4}, {mx:.4}] over {} envs", vals.len()),
        expected: format!("within [{wlo:.4}, {whi:.4}] (bracket [{lo:.4}, {hi:.4}] widened 10%)"),
    })
}

pub(super) fn renewal_identity(_: &VerifyOptions) -> Result<Outcome> {
    let m_max = 5_000u64;
    let mut worst: f64 = 0.0;
    let mut zero_mismatch = 0;
    for (i, &t1) in [5u64, 7, 8, 9, 11].iter().enumerate() {
        let env = planted_random(1.5, t1, 6, 4, 0.1, 400 + i as u64)?;
        let k = MrKernel::new(&env, 1.0)?;
        let (_, pinned) = partition_functions(&k, m_max)?;
        let r = mass_renewal(&k, m_max)?;
        let inv_h = 1.0 / k.h_ratio();
        for m in 1..=m_max as usize {
            let rhs = r.by_end[0][m] + inv_h * r.by_end[1][m];
            let lhs = (pinned[m] + k.phi() * m as f64).exp();
            if rhs == 0.0 || lhs == 0.0 {
                if rhs != lhs {
                    zero_mismatch += 1;
                }
            } else {
                worst = worst.max((lhs / rhs - 1.0).abs());
            }
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-6 && zero_mismatch == 0,
        measured: format!(
            "max relative deviation {} over m <= {m_max}, {zero_mismatch} support mismatches",
            fmt_e(worst)
        ),
        expected: "<= 1e-6".into(),
    })
}

pub(super) fn mass_renewal_bounds(_: &VerifyOptions) -> Result<Outcome> {
    let (pinned, free) = mass_spans_over(CHECK_SEEDS, 1.0)?;
    Ok(Outcome {
        passed: pinned.constant() <= MASS_RENEWAL_C && free.constant() <= UNPINNED_C,
        measured: format!(
            "P(k in theta) T1^3 in [{:.4}, {:.4}], Z_k e^(phi k) T1 in [{:.4}, {:.4}]",
            pinned.min, pinned.max, free.min, free.max
        ),
        expected: format!("inside [1/C, C] with C = {MASS_RENEWAL_C} and {UNPINNED_C}"),
    })
}

pub(super) fn theta_bound(_: &VerifyOptions) -> Result<Outcome> {
    let maxima = theta_maxima(7_000, 10, THETA_N, 1.0)?;
    let worst = maxima.iter().map(|m| m.2).fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= THETA_C,
        measured: format!(
            "max Theta {worst:.4} over {} envs (n = {THETA_N})",
            maxima.len()
        ),
        expected: format!("<= C(rho) = {THETA_C}"),
    })
}

pub(super) fn sampler_exactness(_: &VerifyOptions) -> Result<Outcome> {
    let env = Environment::from_gaps(1.0, vec![2, 1, 3, 2, 5])?;
    let beta = 0.7;
    let n = 8u32;
    let reps = 1_000_000usize;
    let mut worst_z: f64 = 0.0;
    for mode in [KillMode::Bold, KillMode::Soft] {
        let s = ConditionedSampler::new(&env, n as u64, beta, mode, 0)?;
        let weights = path_weights(&env, n, beta, mode);
        let z: f64 = weights.iter().map(|w| w.1).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
        for _ in 0..reps {
            *counts.entry(s.sample(&mut rng)?).or_default() += 1;
        }
        for (p, w) in &weights {
            let q = w / z;
            let f = *counts.get(p).unwrap_or(&0) as f64 / reps as f64;
            if q == 0.0 {
                worst_z = worst_z.max(if f == 0.0 { 0.0 } else { f64::INFINITY });
                continue;
            }
            worst_z = worst_z.max((f - q).abs() / (q * (1.0 - q) / reps as f64).sqrt());
        }
    }
    let mut worst_dp: f64 = 0.0;
    let runs = 100_000;
    for seed in 0..5u64 {
        let env = Environment::sample(1.5, 200, 900 + seed)?;
        for mode in [KillMode::Bold, KillMode::Soft] {
            let p = survive_exact(&env, 200, 0.5, mode)?.exp();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hits = (0..runs)
                .filter(|_| sample_direct(&env, 200, 0.5, &mut rng, mode).1)
                .count();
            let f = hits as f64 / runs as f64;
            worst_dp = worst_dp.max((f - p).abs() / (p * (1.0 - p) / runs as f64).sqrt());
        }
    }
    Ok(Outcome {
        passed: worst_z <= 4.0 && worst_dp <= 4.0,
        measured: format!("max path |z| {worst_z:.2} (n = 8, 1e6 samples per mode), max direct-vs-DP |z| {worst_dp:.2}"),
        expected: "<= 4 sigma; <= 4 sigma".into(),
    })
}

fn experiment_scale(o: &VerifyOptions, full: (u64, usize), reduced: (u64, usize)) -> (u64, usize) {
    match o.scale {
        Scale::Full => full,
        Scale::Reduced => reduced,
    }
}

pub(super) fn theorem_counts(o: &VerifyOptions) -> Result<Outcome> {
    let (n, reps) = experiment_scale(o, (1_000_000, 200), (100_000, 40));
    let opt = ExperimentOptions {
        exec: o.exec,
        ..ExperimentOptions::default()
    };
    let s = localization_experiment(1.5, 1.0, n, reps, 7, &opt)?;
    let q = |x: &Option<crate::mc::Quantiles>| {
        x.as_ref().map_or("-".into(), |q| format!("{:.3}", q.q50))
    };
    Ok(Outcome {
        passed: s.frac_count_event >= 0.8,
        measured: format!(
            "event frequency {:.3} (H_hit <= n/2: {:.3}; medians N_in {}, N_out {}, T_out {} in units n/T1^3), n = {n}, reps = {reps}, {} failures",
            s.frac_count_event,
            s.frac_h_hit_half,
            q(&s.n_in_scaled),
            q(&s.n_out_scaled),
            q(&s.t_out_scaled),
            s.failures.len()
        ),
        expected: ">= 0.8".into(),
    })
}

pub(super) fn theorem_confinement(o: &VerifyOptions) -> Result<Outcome> {
    let (n, reps) = (100_000, 200);
    let opt = ExperimentOptions {
        exec: o.exec,
        ..ExperimentOptions::default()
    };
    let s = localization_experiment(0.5, 1.0, n, reps, 7, &opt)?;
    Ok(Outcome {
        passed: s.frac_confined >= 0.8 && s.mean_late_exits <= 0.5,
        measured: format!(
            "confined fraction {:.3}, mean exits after H_hit + 200 {:.3}, n = {n}, reps = {reps}, {} failures",
            s.frac_confined,
            s.mean_late_exits,
            s.failures.len()
        ),
        expected: ">= 0.8; mean exits <= 0.5".into(),
    })
}

pub(super) fn transition_floor(_: &VerifyOptions) -> Result<Outcome> {
    let mut deltas = Vec::new();
    for &t1 in &[50u64, 100, 200] {
        let k = MrKernel::new(&planted_scaled(t1)?, 1.0)?;
        let d = (0..2)
            .map(|a| k.cells(a).min())
            .fold(f64::INFINITY, f64::min);
        deltas.push((t1, d));
    }
    let mut sorted: Vec<f64> = deltas.iter().map(|d| d.1).collect();
    sorted.sort_by(f64::total_cmp);
    let med = sorted[1];
    let spread = sorted
        .iter()
        .map(|d| (d / med - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed: sorted[0] > 0.0 && spread <= 0.2,
        measured: deltas
            .iter()
            .map(|(t, d)| format!("delta0(T1={t}) = {d:.4}"))
            .collect::<Vec<_>>()
            .join(", "),
        expected: "> 0 and within 20% of the median".into(),
    })
}
