//! Zipf gap law `P(T = m) = m^{-s} / zeta(s)` with `s = 1 + gamma`.

use crate::error::{domain, Result};
use rand::Rng;

const TABLE_LEN: usize = 1 << 14;

/// `sum_{j >= m} j^{-s}` for `m >= 1`, `s > 1`.
///
/// Direct summation below 16, Euler-Maclaurin beyond.
pub fn hurwitz_tail(m: u64, s: f64) -> f64 {
    const CUT: u64 = 16;
    if m < CUT {
        let head: f64 = (m..CUT).map(|j| (j as f64).powf(-s)).sum();
        return head + hurwitz_tail(CUT, s);
    }
    // Bernoulli numbers B_2..B_14 over (2k)!.
    const B: [f64; 7] = [
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
        -691.0 / 2730.0 / 479001600.0,
        7.0 / 6.0 / 87178291200.0,
    ];
    let x = m as f64;
    let mut sum = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) times x^{-s-2k+1}
    let mut rising = s;
    let mut pw = x.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        if k > 0 {
            rising *= (s + 2.0 * k as f64 - 1.0) * (s + 2.0 * k as f64);
            pw /= x * x;
        }
        sum += b * rising * pw;
    }
    sum
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_tail(1, s)
}

/// Inverse-CDF sampler for the Zipf gap law.
#[derive(Debug, Clone)]
pub struct ZipfLaw {
    s: f64,
    zeta: f64,
    /// `tail[m-1] = P(T >= m) * zeta` for `m = 1..=TABLE_LEN + 1`.
    tail: Vec<f64>,
}

impl ZipfLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain!("tail exponent must be positive, got {gamma}"));
        }
        let s = 1.0 + gamma;
        let mut tail = vec![0.0; TABLE_LEN + 1];
        tail[TABLE_LEN] = hurwitz_tail(TABLE_LEN as u64 + 1, s);
        for m in (1..=TABLE_LEN).rev() {
            tail[m - 1] = tail[m] + (m as f64).powf(-s);
        }
        Ok(ZipfLaw {
            s,
            zeta: tail[0],
            tail,
        })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `c_tau = 1 / zeta(1 + gamma)`.
    pub fn norm_const(&self) -> f64 {
        1.0 / self.zeta
    }

    pub fn pmf(&self, m: u64) -> f64 {
        if m == 0 {
            0.0
        } else {
            (m as f64).powf(-self.s) / self.zeta
        }
    }

    /// Unnormalised `sum_{j >= m} j^{-s}`.
    fn tail_sum(&self, m: u64) -> f64 {
        if m as usize <= TABLE_LEN + 1 {
            self.tail[m as usize - 1]
        } else {
            hurwitz_tail(m, self.s)
        }
    }

    /// `P(T >= m)`.
    pub fn survival(&self, m: u64) -> f64 {
        if m <= 1 {
            1.0
        } else {
            self.tail_sum(m) / self.zeta
        }
    }

    /// Draws one gap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // v in (0, 1]; T = m iff tail(m+1) < v zeta <= tail(m).
        let v = 1.0 - rng.random::<f64>();
        self.invert(v * self.zeta)
    }

    fn invert(&self, target: f64) -> u64 {
        if target > self.tail[TABLE_LEN] {
            // Largest m (1-based) with tail[m-1] >= target.
            let idx = self.tail.partition_point(|&x| x >= target);
            return idx as u64;
        }
        let guess = ((self.s - 1.0) * target).powf(-1.0 / (self.s - 1.0));
        let mut m = if guess.is_finite() && guess < 4.0e18 {
            guess as u64
        } else {
            4_000_000_000_000_000_000
        };
        m = m.max(TABLE_LEN as u64 + 1);
        for _ in 0..64 {
            if self.tail_sum(m) < target && m > TABLE_LEN as u64 + 1 {
                m -= 1;
            } else if self.tail_sum(m + 1) >= target {
                m += 1;
            } else {
                break;
            }
        }
        m
    }
}
