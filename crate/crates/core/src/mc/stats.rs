//! Excursion counters of a path relative to the optimal gap.
//!
//! Contacts are the visits to `{p0, p1}`, the two obstacles bounding the
//! gap, starting from the first visit to `p0`. Only excursions completed by
//! time `n` are counted, so the counters add up to the number of contacts
//! minus one.

use crate::gapsel::GapSelection;
use serde::Serialize;

/// One excursion between consecutive contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Excursion {
    pub start: u64,
    pub len: u64,
    /// Side (0 for `p0`, 1 for `p1`) at the start and at the end.
    pub from: usize,
    pub to: usize,
    /// Stays strictly inside the gap between the contacts.
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathStats {
    pub h_hit: Option<u64>,
    /// Contact times `theta_0 < theta_1 < ... <= n`.
    pub contacts: Vec<u64>,
    pub excursions: Vec<Excursion>,
    pub n_in: [[u64; 2]; 2],
    pub n_out: [u64; 2],
    /// Times `k` in `[H_hit, n]` with `S_k` outside the open gap.
    pub t_out: u64,
    /// Smallest `c` with `S_k` in the closed gap for all `k` in `[H_hit + c, n]`.
    pub confined_after: Option<u64>,
}

impl PathStats {
    /// `N(n)`: completed excursions.
    pub fn big_n(&self) -> u64 {
        self.contacts.len().saturating_sub(1) as u64
    }

    pub fn total_in(&self) -> u64 {
        self.n_in.iter().flatten().sum()
    }

    pub fn total_out(&self) -> u64 {
        self.n_out.iter().sum()
    }
}

/// Counters of `path` (with `path[k] = S_k`) for the gap of `sel`.
pub fn path_stats(path: &[i64], sel: &GapSelection) -> PathStats {
    let (p0, p1) = (sel.iloc_lo as i64, sel.iloc_hi as i64);
    let mut st = PathStats {
        h_hit: None,
        contacts: Vec::new(),
        excursions: Vec::new(),
        n_in: [[0; 2]; 2],
        n_out: [0; 2],
        t_out: 0,
        confined_after: None,
    };
    let Some(h) = path.iter().position(|&x| x == p0) else {
        return st;
    };
    st.h_hit = Some(h as u64);
    let side = |x: i64| usize::from(x == p1);
    let mut last = h;
    let mut inside = true;
    st.contacts.push(h as u64);
    let mut last_outside = None;
    for (k, &x) in path.iter().enumerate().skip(h) {
        if x <= p0 || x >= p1 {
            st.t_out += 1;
        }
        if x < p0 || x > p1 {
            last_outside = Some(k);
        }
        if k == h {
            continue;
        }
        if x == p0 || x == p1 {
            let (a, b) = (side(path[last]), side(x));
            if inside {
                st.n_in[a][b] += 1;
            } else {
                st.n_out[a] += 1;
            }
            st.excursions.push(Excursion {
                start: last as u64,
                len: (k - last) as u64,
                from: a,
                to: b,
                inside,
            });
            st.contacts.push(k as u64);
            last = k;
            inside = true;
        } else if x < p0 || x > p1 {
            inside = false;
        }
    }
    let end = *path.last().unwrap();
    if (p0..=p1).contains(&end) {
        st.confined_after = Some(last_outside.map_or(0, |t| (t + 1 - h) as u64));
    }
    st
}

/// Exits from the closed gap at times `k > H_hit + c`: steps from `p0` or
/// `p1` to a site outside `[p0, p1]`.
pub fn exits_after(path: &[i64], sel: &GapSelection, c: u64) -> u64 {
    let (p0, p1) = (sel.iloc_lo as i64, sel.iloc_hi as i64);
    let Some(h) = path.iter().position(|&x| x == p0) else {
        return 0;
    };
    let from = h as u64 + c + 1;
    (from.max(1) as usize..path.len())
        .filter(|&k| {
            let (u, v) = (path[k - 1], path[k]);
            (u == p0 && v < p0) || (u == p1 && v > p1)
        })
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(p0: u64, p1: u64) -> GapSelection {
        GapSelection {
            n: 0,
            beta: 1.0,
            big_n: 1.0,
            ell0: 1,
            ell0_tilde: 1,
            k0: 0,
            t1: p1 - p0,
            t2: None,
            next_record: None,
            iloc_lo: p0,
            iloc_hi: p1,
            window: 1,
            g_values: vec![],
            gtilde_values: vec![],
            lambda_est: 0.0,
            agree: true,
            unique: true,
        }
    }

    fn walk(steps: &str) -> Vec<i64> {
        let mut p = vec![0];
        for c in steps.chars() {
            let x = *p.last().unwrap();
            p.push(if c == 'u' { x + 1 } else { x - 1 });
        }
        p
    }

    #[test]
    fn never_reaching_the_gap() {
        let s = path_stats(&walk("ududuu"), &sel(5, 9));
        assert_eq!(s.h_hit, None);
        assert_eq!(s.big_n(), 0);
        assert_eq!(s.total_in() + s.total_out() + s.t_out, 0);
        assert_eq!(s.confined_after, None);
    }

    #[test]
    fn crossing_the_gap_once() {
        // 0 1 2 3 4 5 4 5 6 7 6 7 8: p0 = 2 at time 2, p1 = 6 at time 8
        let path = walk("uuuuuduuuduu");
        assert_eq!(path.len(), 13);
        let s = path_stats(&path, &sel(2, 6));
        assert_eq!(s.h_hit, Some(2));
        assert_eq!(s.contacts, vec![2, 8, 10]);
        assert_eq!(s.n_in, [[0, 1], [0, 0]]);
        // 6 7 6 leaves the gap on the right
        assert_eq!(s.n_out, [0, 1]);
        // times 2, 8, 9, 10, 11, 12 are outside (2, 6)
        assert_eq!(s.t_out, 6);
        assert_eq!(s.confined_after, None);
        assert_eq!(s.big_n(), s.total_in() + s.total_out());
    }

    #[test]
    fn bounce_outside_and_back() {
        // 0 1 2 3 2 1 0 1 2: p0 = 2, p1 = 5
        let path = walk("uuuddduu");
        let s = path_stats(&path, &sel(2, 5));
        assert_eq!(s.h_hit, Some(2));
        assert_eq!(s.contacts, vec![2, 4, 8]);
        assert_eq!(s.n_in, [[1, 0], [0, 0]]);
        assert_eq!(s.n_out, [1, 0]);
        assert!(s.t_out >= 1);
        assert_eq!(s.t_out, 6);
        // last time outside [2, 5] is 7, so c = 7 + 1 - 2
        assert_eq!(s.confined_after, Some(6));
        assert_eq!(exits_after(&path, &sel(2, 5), 0), 1);
        assert_eq!(exits_after(&path, &sel(2, 5), 3), 0);
    }

    #[test]
    fn incomplete_excursion_is_not_counted() {
        let path = walk("uuuu");
        let s = path_stats(&path, &sel(2, 9));
        assert_eq!(s.contacts, vec![2]);
        assert_eq!(s.big_n(), 0);
        assert_eq!(s.total_in(), 0);
        assert_eq!(s.confined_after, Some(0));
    }

    #[test]
    fn direct_crossing_of_a_unit_gap() {
        let s = path_stats(&walk("uuud"), &sel(2, 3));
        assert_eq!(s.n_in, [[0, 1], [1, 0]]);
        assert_eq!(s.t_out, 3);
    }
}
