//! Obstacle environments: gap sequences, records, truncation, point measures
//! and regularity diagnostics.
//!
//! Obstacles sit at `tau_0 = 0 < tau_1 < ...` with gaps `T_i = tau_i - tau_{i-1}`.
//! Indices are 1-based throughout, as in the gap notation.

mod good;
mod points;
mod zipf;

pub use good::{good_events, EnvDiagnostics, GoodParams};
pub use points::{psi, psi_extremals, ExtremalPoints, PointMeasure};
pub use zipf::{hurwitz_tail, zeta, ZipfLaw};

use crate::error::{domain, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::{BufRead, Write};

/// What lies beyond the last stored gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tail {
    /// No further obstacles. Callers size the environment so this is never reached.
    Open,
    /// An obstacle at every site (the unit-gap extension of a truncated environment).
    Unit,
}

/// The `(tau^-, T1, tau^+)` split of a truncated environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Split {
    /// Record rank of the optimal gap.
    pub k0: usize,
    /// Index of the optimal gap, `i(k0)`.
    pub ell0: usize,
    /// `T_{ell0}`.
    pub t1: u64,
    /// Largest other gap below `i(k0 + 1)`; 0 when there is none.
    pub t2: u64,
    /// `i(k0 + 1)`: first index replaced by a unit gap.
    pub boundary: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    gamma: f64,
    seed: u64,
    norm_const: f64,
    gaps: Vec<u64>,
    positions: Vec<u64>,
    tail: Tail,
    split: Option<Split>,
}

/// Gap records: `i(1) = 1` and `i(k+1)` is the next index with a strictly larger gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Records {
    pub indices: Vec<usize>,
    pub gaps: Vec<u64>,
    /// `tau*_k = tau_{i(k) - 1}`.
    pub bases: Vec<u64>,
}

impl Records {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Rank `k` (1-based) of the record at gap index `ell`, if it is one.
    pub fn rank_of(&self, ell: usize) -> Option<usize> {
        self.indices.binary_search(&ell).ok().map(|k| k + 1)
    }
}

fn cumulative(gaps: &[u64]) -> Result<Vec<u64>> {
    let mut positions = Vec::with_capacity(gaps.len() + 1);
    positions.push(0u64);
    let mut acc = 0u64;
    for &g in gaps {
        if g == 0 {
            return Err(domain!("gaps must be >= 1"));
        }
        acc = acc
            .checked_add(g)
            .ok_or_else(|| Error::Numeric("obstacle position overflows u64".into()))?;
        positions.push(acc);
    }
    Ok(positions)
}

fn sampled_gaps(law: &ZipfLaw, count: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| law.sample(&mut rng)).collect()
}

impl Environment {
    /// I.i.d. Zipf gaps; the same seed always gives the same sequence, and a
    /// longer sample extends a shorter one.
    pub fn sample(gamma: f64, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(domain!("count must be >= 1"));
        }
        let law = ZipfLaw::new(gamma)?;
        let gaps = sampled_gaps(&law, count, seed);
        let positions = cumulative(&gaps)?;
        Ok(Environment {
            gamma,
            seed,
            norm_const: law.norm_const(),
            gaps,
            positions,
            tail: Tail::Open,
            split: None,
        })
    }

    /// An explicit gap sequence. `gamma` only enters the scalings that use it.
    pub fn from_gaps(gamma: f64, gaps: Vec<u64>) -> Result<Self> {
        Self::from_parts(gamma, 0, gaps)
    }

    fn from_parts(gamma: f64, seed: u64, gaps: Vec<u64>) -> Result<Self> {
        let law = ZipfLaw::new(gamma)?;
        let positions = cumulative(&gaps)?;
        Ok(Environment {
            gamma,
            seed,
            norm_const: law.norm_const(),
            gaps,
            positions,
            tail: Tail::Open,
            split: None,
        })
    }

    /// `count` gaps of width `t`, i.e. obstacles on `t N`.
    pub fn periodic(t: u64, count: usize) -> Result<Self> {
        Self::from_gaps(1.0, vec![t; count])
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Number of stored gaps.
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    /// `tau_0..=tau_L`.
    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn split(&self) -> Option<&Split> {
        self.split.as_ref()
    }

    /// `T_i` for `i >= 1`, following the tail beyond the stored gaps.
    pub fn gap(&self, i: usize) -> Option<u64> {
        if i == 0 {
            None
        } else if i <= self.gaps.len() {
            Some(self.gaps[i - 1])
        } else {
            match self.tail {
                Tail::Unit => Some(1),
                Tail::Open => None,
            }
        }
    }

    /// `tau_i`, following the tail beyond the stored gaps.
    pub fn position(&self, i: usize) -> Option<u64> {
        let last = self.gaps.len();
        if i <= last {
            Some(self.positions[i])
        } else {
            match self.tail {
                Tail::Unit => Some(self.positions[last] + (i - last) as u64),
                Tail::Open => None,
            }
        }
    }

    /// Position of the last stored obstacle.
    pub fn extent(&self) -> u64 {
        *self.positions.last().unwrap()
    }

    /// Whether site `x >= 0` carries an obstacle.
    pub fn is_obstacle(&self, x: u64) -> bool {
        if x > self.extent() {
            return self.tail == Tail::Unit;
        }
        self.positions.binary_search(&x).is_ok()
    }

    /// Number of obstacles in `1..=x`.
    pub fn obstacles_up_to(&self, x: u64) -> usize {
        let stored = self.positions.partition_point(|&p| p <= x) - 1;
        if x > self.extent() && self.tail == Tail::Unit {
            stored + (x - self.extent()) as usize
        } else {
            stored
        }
    }

    /// Same seed, `count` gaps. Only meaningful for sampled environments; an
    /// environment whose stored gaps are not a prefix of the seeded stream is
    /// rejected.
    pub fn regrow(&self, count: usize) -> Result<Self> {
        if count <= self.len() {
            return Ok(self.clone());
        }
        let law = ZipfLaw::new(self.gamma)?;
        let gaps = sampled_gaps(&law, count, self.seed);
        if gaps[..self.len()] != self.gaps[..] {
            return Err(Error::Range(format!(
                "environment with {} gaps cannot be regrown: it is not the seed-{} stream",
                self.len(),
                self.seed
            )));
        }
        let mut out = Self::from_parts(self.gamma, self.seed, gaps)?;
        out.tail = self.tail;
        Ok(out)
    }

    pub fn records(&self) -> Records {
        let mut indices = Vec::new();
        let mut gaps = Vec::new();
        let mut bases = Vec::new();
        let mut best = 0u64;
        for (k, &t) in self.gaps.iter().enumerate() {
            if t > best {
                best = t;
                indices.push(k + 1);
                gaps.push(t);
                bases.push(self.positions[k]);
            }
        }
        Records {
            indices,
            gaps,
            bases,
        }
    }

    /// Replaces every gap from `i(k0 + 1)` on by 1.
    ///
    /// On an environment that is already truncated, the first unit-tail index
    /// plays the role of `i(k0 + 1)` for the last stored record, so truncation
    /// is idempotent.
    pub fn truncate(&self, k0: usize) -> Result<Self> {
        let rec = self.records();
        if k0 == 0 || k0 > rec.len() {
            return Err(Error::Range(format!(
                "record rank {k0} not in 1..={}",
                rec.len()
            )));
        }
        let boundary = if k0 < rec.len() {
            rec.indices[k0]
        } else if self.tail == Tail::Unit {
            self.len() + 1
        } else {
            return Err(Error::Range(format!(
                "record rank {k0} has no successor record"
            )));
        };
        let ell0 = rec.indices[k0 - 1];
        let t1 = rec.gaps[k0 - 1];
        let t2 = self.gaps[..boundary - 1]
            .iter()
            .enumerate()
            .filter(|&(i, _)| i + 1 != ell0)
            .map(|(_, &t)| t)
            .max()
            .unwrap_or(0);
        let gaps = self.gaps[..boundary - 1].to_vec();
        let positions = self.positions[..boundary].to_vec();
        Ok(Environment {
            gamma: self.gamma,
            seed: self.seed,
            norm_const: self.norm_const,
            gaps,
            positions,
            tail: Tail::Unit,
            split: Some(Split {
                k0,
                ell0,
                t1,
                t2,
                boundary,
            }),
        })
    }

    /// Points `((i - 1)/n, T_i / n^{1/gamma})`.
    pub fn point_measure(&self, n: u64) -> PointMeasure {
        PointMeasure::from_env(self, n)
    }

    /// Header `gamma,seed,count`, then one gap per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{},{},{}",
            crate::fmt::f17(self.gamma),
            self.seed,
            self.len()
        )?;
        for g in &self.gaps {
            writeln!(w, "{g}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty environment file".into()))??;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let gamma = crate::fmt::parse_f64(fields[0])
            .ok_or_else(|| Error::Parse(format!("bad gamma {:?}", fields[0])))?;
        let seed: u64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad seed {:?}", fields[1])))?;
        let count: usize = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad count {:?}", fields[2])))?;
        let mut gaps = Vec::with_capacity(count);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            gaps.push(
                t.parse()
                    .map_err(|_| Error::Parse(format!("bad gap {t:?}")))?,
            );
        }
        if gaps.len() != count {
            return Err(Error::Parse(format!(
                "header announces {count} gaps, found {}",
                gaps.len()
            )));
        }
        Self::from_parts(gamma, seed, gaps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sampling_basics() {
        let e = Environment::sample(1.5, 5, 1).unwrap();
        assert_eq!(e.len(), 5);
        assert!(e.gaps().iter().all(|&g| g >= 1));
        for i in 1..=5 {
            assert_eq!(e.positions()[i] - e.positions()[i - 1], e.gaps()[i - 1]);
        }
        assert_eq!(e, Environment::sample(1.5, 5, 1).unwrap());
        assert!(Environment::sample(0.0, 5, 1).is_err());
        let long = Environment::sample(1.5, 50, 1).unwrap();
        assert_eq!(&long.gaps()[..5], e.gaps());
        assert_eq!(e.regrow(50).unwrap(), long);
    }

    #[test]
    fn regrow_rejects_foreign_gaps() {
        let e = Environment::from_gaps(1.5, vec![1000, 1000]).unwrap();
        assert!(e.regrow(10).is_err());
    }

    #[test]
    fn records_by_hand() {
        let e = Environment::from_gaps(1.0, vec![3, 1, 5, 2, 5]).unwrap();
        let r = e.records();
        assert_eq!(r.indices, vec![1, 3]);
        assert_eq!(r.gaps, vec![3, 5]);
        assert_eq!(r.bases, vec![0, 4]);
        assert_eq!(
            Environment::from_gaps(1.0, vec![1])
                .unwrap()
                .records()
                .indices,
            vec![1]
        );
        assert_eq!(
            Environment::from_gaps(1.0, vec![1, 2, 3])
                .unwrap()
                .records()
                .indices,
            vec![1, 2, 3]
        );
    }

    #[test]
    fn truncation_by_hand() {
        let e = Environment::from_gaps(1.0, vec![3, 1, 5, 2, 5, 9]).unwrap();
        let t = e.truncate(2).unwrap();
        assert_eq!(t.gaps(), &[3, 1, 5, 2, 5]);
        assert_eq!(t.gap(6), Some(1));
        assert_eq!(t.gap(100), Some(1));
        assert_eq!(t.position(7), Some(18));
        let s = t.split().unwrap();
        assert_eq!((s.ell0, s.t1, s.t2, s.boundary), (3, 5, 5, 6));
        assert!(matches!(e.truncate(3), Err(Error::Range(_))));
        assert_eq!(t.truncate(2).unwrap(), t);
        assert!(t.is_obstacle(16) && t.is_obstacle(17) && !t.is_obstacle(15));
        assert_eq!(t.obstacles_up_to(17), 6);
    }

    #[test]
    fn serialization_round_trip() {
        let e = Environment::sample(0.7, 40, 99).unwrap();
        let mut buf = Vec::new();
        e.write_to(&mut buf).unwrap();
        let back = Environment::read_from(&buf[..]).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.gamma().to_bits(), e.gamma().to_bits());
        assert!(Environment::read_from(&b"1.0,0,3\n1\n2\n"[..]).is_err());
    }

    proptest! {
        #[test]
        fn record_reconstruction(gaps in proptest::collection::vec(1u64..50, 1..200)) {
            let e = Environment::from_gaps(1.0, gaps.clone()).unwrap();
            let r = e.records();
            prop_assert_eq!(r.indices[0], 1);
            for (k, &i) in r.indices.iter().enumerate() {
                prop_assert_eq!(*gaps[..i].iter().max().unwrap(), r.gaps[k]);
                prop_assert_eq!(r.bases[k], e.positions()[i - 1]);
                if k > 0 { prop_assert!(r.gaps[k] > r.gaps[k - 1]); }
            }
        }

        #[test]
        fn truncation_is_idempotent(gaps in proptest::collection::vec(1u64..50, 2..100)) {
            let e = Environment::from_gaps(1.0, gaps).unwrap();
            let r = e.records();
            for k in 1..r.len() {
                let t = e.truncate(k).unwrap();
                prop_assert_eq!(t.truncate(k).unwrap(), t.clone());
                prop_assert_eq!(t.len(), r.indices[k] - 1);
            }
        }
    }
}
