use super::Environment;
use serde::Serialize;
use std::f64::consts::PI;

/// Rescaled gaps `((i - 1)/n, T_i / n^{1/gamma})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointMeasure {
    pub points: Vec<(f64, f64)>,
    pub n: u64,
}

impl PointMeasure {
    pub fn from_env(env: &Environment, n: u64) -> Self {
        let nf = n as f64;
        let scale = nf.powf(1.0 / env.gamma());
        let points = env
            .gaps()
            .iter()
            .enumerate()
            .map(|(i, &t)| (i as f64 / nf, t as f64 / scale))
            .collect();
        PointMeasure { points, n }
    }
}

/// `lambda x + pi^2 / (2 y^2)`.
pub fn psi(lambda: f64, (x, y): (f64, f64)) -> f64 {
    lambda * x + PI * PI / (2.0 * y * y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalPoints {
    pub z_star: Option<(f64, f64)>,
    pub z_bar: Option<(f64, f64)>,
    pub z_under: Option<(f64, f64)>,
    pub z_starstar: Option<(f64, f64)>,
    pub lambda: f64,
    /// Infimum of psi over the measure; `+inf` when empty.
    pub psi_min: f64,
}

/// Index of the psi-minimiser among `candidates`; ties go to smallest x, then largest y.
fn argmin_psi(points: &[(f64, f64)], lambda: f64, skip: Option<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in points.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let v = psi(lambda, p);
        best = match best {
            None => Some((i, v)),
            Some((j, w)) => {
                let q = points[j];
                let better = v < w || (v == w && (p.0 < q.0 || (p.0 == q.0 && p.1 > q.1)));
                if better {
                    Some((i, v))
                } else {
                    Some((j, w))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

/// The four extremal points of the functional `psi^lambda`.
///
/// `z_under` needs `z_bar` to define its strip and is absent without it.
pub fn psi_extremals(pm: &PointMeasure, lambda: f64) -> ExtremalPoints {
    let pts = &pm.points;
    let Some(i_star) = argmin_psi(pts, lambda, None) else {
        return ExtremalPoints {
            z_star: None,
            z_bar: None,
            z_under: None,
            z_starstar: None,
            lambda,
            psi_min: f64::INFINITY,
        };
    };
    let star = pts[i_star];
    let z_starstar = argmin_psi(pts, lambda, Some(i_star)).map(|i| pts[i]);
    let z_bar = pts
        .iter()
        .copied()
        .filter(|&(x, y)| x > star.0 && y > star.1)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let z_under = z_bar.and_then(|bar| {
        pts.iter()
            .enumerate()
            .filter(|&(i, &(x, _))| i != i_star && x < bar.0)
            .map(|(_, &p)| p)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
    });
    ExtremalPoints {
        z_star: Some(star),
        z_bar,
        z_under,
        z_starstar,
        lambda,
        psi_min: psi(lambda, star),
    }
}
