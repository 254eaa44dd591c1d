//! The two-state Markov renewal process of boundary contacts of the optimal gap.
//!
//! The walk starts on `p0 = tau_{ell0 - 1}` in a truncated environment. Each
//! excursion between consecutive visits to `{p0, p1}` either stays inside the
//! gap (same side or crossing) or stays outside on the side it started from.
//! Excursion weights include the survival trial at the arrival.

mod modes;
mod renewal;
mod side;
mod theta;

pub use modes::ModeSum;
pub use renewal::{
    first_return_tail, mass_renewal, sample_mrp, Kind, MrpSampler, MrpTrajectory, RenewalMass,
    ReturnTail,
};
pub use side::{unit_depth, OutGf, SideChain};
pub use theta::{partition_functions, ThetaTable};

use crate::env::{Environment, Split, Tail};
use crate::error::{domain, Error, Result};
use crate::root::bisect;
use crate::ruin::{Part, RuinKernel};
use crate::survival::phi_hom;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Relative tail mass left out of tabulated out-kernels.
const OUT_TABLE_REL: f64 = 1e-13;

/// `K_in(a, b, ell)` for a gap of width `t1`.
pub fn kernel_in(a: usize, b: usize, ell: u64, t1: u64, beta: f64) -> Result<f64> {
    if a > 1 || b > 1 || ell == 0 {
        return Err(domain!("need a, b in {{0, 1}} and ell >= 1"));
    }
    let k = RuinKernel::new(t1)?;
    let kb = (-beta).exp();
    Ok(if a == b {
        0.5 * kb * k.q0(ell)
    } else {
        kb * k.q1(ell)
    })
}

/// Perron root and eigenvector ratio `v_2 / v_1` of a positive 2x2 matrix.
pub fn perron(m: [[f64; 2]; 2]) -> Result<(f64, f64)> {
    let [[a, b], [c, d]] = m;
    if !(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0) {
        return Err(domain!("perron needs positive entries, got {m:?}"));
    }
    let half = 0.5 * (a - d);
    let lam = 0.5 * (a + d) + (half * half + b * c).sqrt();
    // (lam - a)(lam - d) = b c; take the factor free of cancellation
    let ratio = if a >= d { c / (lam - d) } else { (lam - a) / b };
    Ok((lam, ratio))
}

/// Builds a truncated environment `(left, t1, right)` followed by unit gaps.
///
/// Every gap in `left` and `right` must be smaller than `t1`.
pub fn plant(gamma: f64, left: &[u64], t1: u64, right: &[u64]) -> Result<Environment> {
    if left.iter().chain(right).any(|&t| t >= t1) {
        return Err(domain!("planted side gaps must be smaller than t1 = {t1}"));
    }
    let gaps: Vec<u64> = left
        .iter()
        .copied()
        .chain([t1])
        .chain(right.iter().copied())
        .collect();
    let env = Environment::from_gaps(gamma, gaps)?.with_tail(Tail::Unit);
    let k0 = env.records().len();
    env.truncate(k0)
}

/// Cell probabilities out of one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cells {
    pub same: f64,
    pub cross: f64,
    pub out: f64,
}

impl Cells {
    pub fn sum(&self) -> f64 {
        self.same + self.cross + self.out
    }

    pub fn min(&self) -> f64 {
        self.same.min(self.cross).min(self.out)
    }
}

/// Solved kernel of one truncated environment.
#[derive(Debug)]
pub struct MrKernel {
    env: Environment,
    split: Split,
    beta: f64,
    ruin: RuinKernel,
    p0: u64,
    p1: u64,
    sides: [SideChain; 2],
    phi: f64,
    h_ratio: f64,
    eps_coeff: f64,
    out_tables: [OnceLock<Vec<f64>>; 2],
}

impl MrKernel {
    /// Solves the free energy of a truncated environment (see [`Environment::truncate`]).
    pub fn new(env_bar: &Environment, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain!("beta must be positive, got {beta}"));
        }
        let split = *env_bar
            .split()
            .ok_or_else(|| Error::Dependency("the kernel needs a truncated environment".into()))?;
        if split.ell0 < 2 {
            return Err(Error::Infeasible(
                "optimal gap starts at the origin, which kills every return".into(),
            ));
        }
        let ruin = RuinKernel::new(split.t1)?;
        let p0 = env_bar.positions()[split.ell0 - 1];
        let p1 = p0 + split.t1;
        let sides = [
            SideChain::left(env_bar, beta, p0),
            SideChain::right(env_bar, beta, p1),
        ];
        let mut k = MrKernel {
            env: env_bar.clone(),
            split,
            beta,
            ruin,
            p0,
            p1,
            sides,
            phi: f64::NAN,
            h_ratio: f64::NAN,
            eps_coeff: f64::NAN,
            out_tables: [OnceLock::new(), OnceLock::new()],
        };
        k.solve()?;
        Ok(k)
    }

    /// The reference with unit gaps on both sides of the same optimal gap.
    pub fn unit_reference(&self) -> Result<MrKernel> {
        let env = plant(
            self.env.gamma(),
            &vec![1; self.p0 as usize],
            self.split.t1,
            &[],
        )?;
        MrKernel::new(&env, self.beta)
    }

    fn solve(&mut self) -> Result<()> {
        let g = self.ruin.g();
        let lo = g * 1e-12;
        match self.lambda(lo) {
            Some(l) if l < 1.0 => {}
            other => {
                return Err(Error::Invariant(format!(
                    "Lambda(0+) = {other:?} is not below 1"
                )));
            }
        }
        let (a, b) = bisect(lo, g * (1.0 - 1e-15), 1e-15, |f| {
            self.lambda(f).is_none_or(|l| l >= 1.0)
        });
        let phi = 0.5 * (a + b);
        let m = self
            .matrix(phi)
            .ok_or_else(|| Error::Numeric(format!("out-series diverges at the root {phi}")))?;
        let (_, ratio) = perron(m)?;
        self.phi = phi;
        self.h_ratio = ratio;
        let t = self.split.t1 as f64;
        self.eps_coeff = 1.0 - 2.0 * t * t * phi / (PI * PI);
        let tol = 1e-8;
        for a in 0..2 {
            let c = self.cells(a);
            if (c.sum() - 1.0).abs() > tol {
                return Err(Error::KernelConsistency(format!(
                    "side {a} cells sum to {}",
                    c.sum()
                )));
            }
        }
        Ok(())
    }

    fn khat_in(&self, f: f64) -> Option<(f64, f64)> {
        let kb = (-self.beta).exp();
        let same = self.ruin.qhat(f, Part::Same).ok()?;
        let cross = self.ruin.qhat(f, Part::Cross).ok()?;
        Some((0.5 * kb * same, kb * cross))
    }

    /// `K_out` generating function of side `a` at `f`, `None` when divergent.
    pub fn khat_out(&self, a: usize, f: f64) -> Option<OutGf> {
        self.sides[a].gf(f)
    }

    /// The matrix `K^(f)`; `None` outside the domain of convergence.
    pub fn matrix(&self, f: f64) -> Option<[[f64; 2]; 2]> {
        let (same, cross) = self.khat_in(f)?;
        let o0 = self.sides[0].gf(f)?.value;
        let o1 = self.sides[1].gf(f)?.value;
        Some([[same + o0, cross], [cross, same + o1]])
    }

    /// `Lambda(f)`; `None` when an entry diverges.
    pub fn lambda(&self, f: f64) -> Option<f64> {
        perron(self.matrix(f)?).ok().map(|p| p.0)
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn split(&self) -> &Split {
        &self.split
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t1(&self) -> u64 {
        self.split.t1
    }

    pub fn ruin(&self) -> &RuinKernel {
        &self.ruin
    }

    /// `(p0, p1) = (tau_{ell0 - 1}, tau_{ell0})`.
    pub fn boundary(&self) -> (u64, u64) {
        (self.p0, self.p1)
    }

    pub fn side(&self, a: usize) -> &SideChain {
        &self.sides[a]
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `h(1) / h(0)`.
    pub fn h_ratio(&self) -> f64 {
        self.h_ratio
    }

    /// `eps` in `phi = pi^2 / (2 T1^2) (1 - eps)`.
    pub fn eps_coeff(&self) -> f64 {
        self.eps_coeff
    }

    /// `h(b) / h(a)`.
    pub fn h_factor(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 1) => self.h_ratio,
            (1, 0) => 1.0 / self.h_ratio,
            _ => 1.0,
        }
    }

    /// Transition probabilities out of side `a`.
    pub fn cells(&self, a: usize) -> Cells {
        let (same, cross) = self.khat_in(self.phi).expect("phi lies in the domain");
        let out = self.sides[a]
            .gf(self.phi)
            .expect("phi lies in the domain")
            .value;
        Cells {
            same,
            cross: cross * self.h_factor(a, 1 - a),
            out,
        }
    }

    /// Tilted same-side in-excursion law at `phi`.
    pub fn same_law(&self) -> ModeSum {
        ModeSum::same(&self.ruin, self.beta, self.phi)
    }

    /// Tilted crossing law at `phi`.
    pub fn cross_law(&self) -> ModeSum {
        ModeSum::cross(&self.ruin, self.beta, self.phi)
    }

    /// `K_out(a, l) e^{phi l}` for `l = 0..`, computed on first use.
    pub fn out_table(&self, a: usize) -> Result<&[f64]> {
        if let Some(t) = self.out_tables[a].get() {
            return Ok(t);
        }
        let total = self.sides[a].gf(self.phi).map_or(0.0, |g| g.value);
        let table = self.sides[a].tilted_weights(self.phi, total, OUT_TABLE_REL, 0)?;
        Ok(self.out_tables[a].get_or_init(|| table))
    }

    /// `K_out(a, ell)`, untilted.
    pub fn kernel_out(&self, a: usize, ell: u64) -> Result<f64> {
        let t = self.out_table(a)?;
        Ok(t.get(ell as usize)
            .map_or(0.0, |&x| x * (-self.phi * ell as f64).exp()))
    }

    /// Mean length of an excursion of each kind out of side `a` under the
    /// tilted law: `(same, cross, out)`.
    pub fn mean_lengths(&self, a: usize) -> Result<(f64, f64, f64)> {
        let f = self.phi;
        let same = self.ruin.qhat_d1(f, Part::Same)? / self.ruin.qhat(f, Part::Same)?;
        let cross = self.ruin.qhat_d1(f, Part::Cross)? / self.ruin.qhat(f, Part::Cross)?;
        let o = self.sides[a].gf(f).expect("phi lies in the domain");
        let out = if o.value > 0.0 { o.d1 / o.value } else { 0.0 };
        Ok((same, cross, out))
    }

    /// Second moments of the excursion lengths, `(same, cross, out)`.
    pub fn second_moments(&self, a: usize) -> Result<(f64, f64, f64)> {
        let f = self.phi;
        let same = self.ruin.qhat_d2(f, Part::Same)? / self.ruin.qhat(f, Part::Same)?;
        let cross = self.ruin.qhat_d2(f, Part::Cross)? / self.ruin.qhat(f, Part::Cross)?;
        let o = self.sides[a].gf(f).expect("phi lies in the domain");
        let out = if o.value > 0.0 { o.d2 / o.value } else { 0.0 };
        Ok((same, cross, out))
    }
}

/// Free-energy summary of one truncated environment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergy {
    #[serde(rename = "T1")]
    pub t1: u64,
    #[serde(rename = "T2")]
    pub t2: u64,
    pub phi: f64,
    #[serde(rename = "g_T1")]
    pub g_t1: f64,
    #[serde(rename = "phi_hom_T1")]
    pub phi_hom_t1: f64,
    pub phi_unitgaps: f64,
    pub h_ratio: f64,
    pub eps_coeff: f64,
}

/// `(phi, h(1)/h(0), eps)` with the comparison values around it.
pub fn free_energy(env_bar: &Environment, beta: f64) -> Result<FreeEnergy> {
    let k = MrKernel::new(env_bar, beta)?;
    let unit = k.unit_reference()?;
    Ok(FreeEnergy {
        t1: k.t1(),
        t2: k.split.t2,
        phi: k.phi,
        g_t1: k.ruin.g(),
        phi_hom_t1: phi_hom(beta, k.t1())?,
        phi_unitgaps: unit.phi,
        h_ratio: k.h_ratio,
        eps_coeff: k.eps_coeff,
    })
}
