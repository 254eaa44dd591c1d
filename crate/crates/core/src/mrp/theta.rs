//! Free and pinned partition functions from the optimal gap, and the ratio
//! between the free polymer and the renewal process near the endpoint.

use super::renewal::ReturnTail;
use super::MrKernel;
use crate::error::{Error, Result};
use crate::survival::{KillMode, Layer, SurvivalLattice};

/// Sites kept past the last stored gap scale with `1 / beta`.
const TAIL_SITES_PER_BETA: f64 = 40.0;

fn lattice(kern: &MrKernel, n: u64) -> Result<SurvivalLattice> {
    let (p0, _) = kern.boundary();
    let reach = p0 + n + 1;
    let deep = kern.env().extent() + (TAIL_SITES_PER_BETA / kern.beta()).ceil() as u64 + 1;
    SurvivalLattice::new(
        kern.env(),
        kern.beta(),
        KillMode::Bold,
        reach.min(deep) as i64,
    )
}

fn log_at(lat: &SurvivalLattice, layer: &Layer, site: u64) -> f64 {
    match lat.slot(site as i64) {
        Some((c, k)) if c == layer.class => layer.v[k].ln() + layer.log_scale,
        _ => f64::NEG_INFINITY,
    }
}

/// `log Z_k` and `log Z_k^pin` for `k = 0..=n`, started at `p0`.
pub fn partition_functions(kern: &MrKernel, n: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let lat = lattice(kern, n)?;
    let (p0, p1) = kern.boundary();
    let mut free = vec![0.0];
    let mut pinned = vec![0.0];
    lat.run_forward(p0 as i64, n, |_, layer| {
        free.push(layer.log_total());
        let a = log_at(&lat, layer, p0);
        let b = log_at(&lat, layer, p1);
        let m = a.max(b);
        pinned.push(if m == f64::NEG_INFINITY {
            m
        } else {
            m + ((a - m).exp() + (b - m).exp()).ln()
        });
    });
    Ok((free, pinned))
}

/// `Theta(n, k)` for every `k` in `[2 T1^2, n]`.
#[derive(Debug, Clone)]
pub struct ThetaTable {
    pub n: u64,
    /// `2 T1^2`.
    pub m: u64,
    /// `log Theta(n, k)` at index `k - m`.
    pub log_theta: Vec<f64>,
    /// `log Z_k(theta_1 > k - m)` at index `k - m`.
    pub log_z_late: Vec<f64>,
    pub log_zn: f64,
}

impl ThetaTable {
    pub fn new(kern: &MrKernel, n: u64) -> Result<Self> {
        let t1 = kern.t1();
        let m = 2 * t1 * t1;
        if n < m {
            return Err(Error::Range(format!("n = {n} is below 2 T1^2 = {m}")));
        }
        let lat = lattice(kern, n)?;
        let (p0, p1) = kern.boundary();
        let mut log_zn = 0.0;
        lat.run_forward(p0 as i64, n, |k, layer| {
            if k == n {
                log_zn = layer.log_total();
            }
        });
        // u_m on both parity classes, full weights
        let v: Vec<Layer> = (0..2).map(|c| lat.run_backward(c, m, |_, _| {})).collect();
        let mut nc = lat.clone();
        nc.kill_sites(&[p0 as i64, p1 as i64]);
        let dot = |mu: &Layer| -> f64 {
            let w = &v[mu.class];
            let s: f64 = mu.v.iter().zip(&w.v).map(|(a, b)| a * b).sum();
            s.ln() + mu.log_scale + w.log_scale
        };
        let mut log_z_late = Vec::with_capacity((n - m + 1) as usize);
        log_z_late.push(dot(&nc.point_mass(p0 as i64)));
        nc.run_forward(p0 as i64, n - m, |_, mu| log_z_late.push(dot(mu)));
        let phi = kern.phi();
        let tails = ReturnTail::new(kern, 0)?;
        let mut log_theta = Vec::with_capacity(log_z_late.len());
        for (i, &lz) in log_z_late.iter().enumerate() {
            let k = m + i as u64;
            let tail = tails.at(k - m);
            log_theta.push(-phi * (n - k) as f64 + lz - tail.ln() - log_zn);
        }
        Ok(ThetaTable {
            n,
            m,
            log_theta,
            log_z_late,
            log_zn,
        })
    }

    pub fn theta(&self, k: u64) -> Option<f64> {
        if k < self.m || k > self.n {
            return None;
        }
        Some(self.log_theta[(k - self.m) as usize].exp())
    }

    pub fn max(&self) -> f64 {
        self.log_theta
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            .exp()
    }
}
