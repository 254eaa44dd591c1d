//! Brute-force references that share no code with the fast paths.

use crate::env::Environment;
use crate::survival::KillMode;

/// `(q0(n), q1(n))` for `n = 0..=n_max` by evolving the walk on `-t..=t`
/// from 0 with absorption at `-t`, `0` and `t`.
pub fn ruin_transfer(t: u64, n_max: u64) -> Vec<(f64, f64)> {
    let w = 2 * t as usize + 1;
    let mid = t as usize;
    let mut mass = vec![0.0; w];
    mass[mid] = 1.0;
    let mut out = vec![(0.0, 0.0)];
    for _ in 0..n_max {
        let mut next = vec![0.0; w];
        for (i, &m) in mass.iter().enumerate() {
            if m == 0.0 || i == 0 || i == w - 1 {
                continue;
            }
            next[i - 1] += 0.5 * m;
            next[i + 1] += 0.5 * m;
        }
        let same = next[mid];
        let cross = next[w - 1];
        next[mid] = 0.0;
        next[0] = 0.0;
        next[w - 1] = 0.0;
        out.push((same, cross));
        mass = next;
    }
    out
}

/// Raw weight of every `n`-step path from 0, in the order of the step bits
/// (bit `i` set means step `i` goes up).
pub fn path_weights(env: &Environment, n: u32, beta: f64, mode: KillMode) -> Vec<(Vec<i64>, f64)> {
    let kb = (-beta).exp();
    (0..1u64 << n)
        .map(|bits| {
            let mut p = vec![0i64];
            let mut w = 1.0;
            for i in 0..n {
                let x = p.last().unwrap() + if bits >> i & 1 == 1 { 1 } else { -1 };
                p.push(x);
                w *= 0.5;
                if mode == KillMode::Bold && x <= 0 {
                    w = 0.0;
                } else if env.is_obstacle(x.unsigned_abs()) {
                    w *= kb;
                }
            }
            (p, w)
        })
        .collect()
}
