//! The Birkhoff weight `f` and its extreme cycle means.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::Result;
use crate::symbolic::{BandType, BlockLetter, BlockShift};

/// `f(b) = -k + sum_j (2 - a_j) [t(b_j) = 2]`.
pub fn birkhoff_weight(a: &[u32], b: &BlockLetter) -> i64 {
    let k = a.len() as i64;
    -k + b
        .letters()
        .iter()
        .zip(a)
        .filter(|(e, _)| e.btype == BandType::Two)
        .map(|(_, &aj)| 2 - aj as i64)
        .sum::<i64>()
}

/// Extreme mean values of `f` over cycles, with witnesses as block indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeanCycleResult {
    #[serde(serialize_with = "ser_ratio")]
    pub f_lower: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub f_upper: Rational64,
    pub lower_witness: Vec<usize>,
    pub upper_witness: Vec<usize>,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Minimum cycle mean of a vertex-weighted digraph (weights lifted to edges
/// `w(u -> v) = weight(v)`) by Karp's theorem, in exact integers.
fn karp_min(succ: &[Vec<usize>], weight: &[i64]) -> Rational64 {
    let n = succ.len();
    const INF: i64 = i64::MAX / 4;
    // d[k][v]: least weight of a k-edge walk ending at v, from any start
    let mut d = vec![vec![INF; n]; n + 1];
    d[0].fill(0);
    for k in 0..n {
        let (cur, next) = d.split_at_mut(k + 1);
        let (cur, next) = (&cur[k], &mut next[0]);
        for u in 0..n {
            if cur[u] == INF {
                continue;
            }
            for &v in &succ[u] {
                let c = cur[u] + weight[v];
                if c < next[v] {
                    next[v] = c;
                }
            }
        }
    }
    let mut best: Option<Rational64> = None;
    for v in 0..n {
        if d[n][v] == INF {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| d[k][v] < INF)
            .map(|k| Rational64::new(d[n][v] - d[k][v], (n - k) as i64))
            .max()
            .expect("k = 0 is always finite");
        if best.map_or(true, |b| worst < b) {
            best = Some(worst);
        }
    }
    best.expect("graph has a cycle")
}

/// A cycle attaining mean `mu`: after reweighting by `q*w - p` there are no
/// negative cycles, and any cycle of tight edges under Bellman-Ford
/// potentials has weight zero.
fn witness(succ: &[Vec<usize>], weight: &[i64], mu: Rational64) -> Vec<usize> {
    let n = succ.len();
    let (p, q) = (*mu.numer(), *mu.denom());
    let w = |v: usize| q * weight[v] - p;
    let mut pi = vec![0i64; n];
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &v in &succ[u] {
                if pi[u] + w(v) < pi[v] {
                    pi[v] = pi[u] + w(v);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|u| succ[u].iter().copied().filter(|&v| pi[u] + w(v) == pi[v]).collect())
        .collect();
    // every zero-weight cycle is tight, so depth-first search finds one
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&v) = tight[u].get(*next) {
                *next += 1;
                match state[v] {
                    0 => {
                        state[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => {
                        let at = stack.iter().position(|&(x, _)| x == v).unwrap();
                        let mut cyc: Vec<usize> = stack[at..].iter().map(|&(x, _)| x).collect();
                        let m = cyc.iter().enumerate().min_by_key(|(_, &x)| x).unwrap().0;
                        cyc.rotate_left(m);
                        return cyc;
                    }
                    _ => {}
                }
            } else {
                state[u] = 2;
                stack.pop();
            }
        }
    }
    unreachable!("the critical subgraph always contains a cycle")
}

/// `F_lower` and `F_upper` of `f` on the block shift of `a`, exactly.
pub fn mean_cycles(a: &[u32]) -> Result<MeanCycleResult> {
    let shift = BlockShift::new(a)?;
    Ok(mean_cycles_of(&shift))
}

pub(crate) fn mean_cycles_of(shift: &BlockShift) -> MeanCycleResult {
    let a = shift.period();
    let succ: Vec<Vec<usize>> = (0..shift.len()).map(|i| shift.successors(i).to_vec()).collect();
    let weight: Vec<i64> = shift.blocks().iter().map(|b| birkhoff_weight(a, b)).collect();
    let neg: Vec<i64> = weight.iter().map(|w| -w).collect();
    let lo = karp_min(&succ, &weight);
    let hi = -karp_min(&succ, &neg);
    MeanCycleResult {
        f_lower: lo,
        f_upper: hi,
        lower_witness: witness(&succ, &weight, lo),
        upper_witness: witness(&succ, &neg, -hi),
    }
}

/// Exact mean of `f` along a cycle of block indices.
pub fn cycle_mean(shift: &BlockShift, cycle: &[usize]) -> Rational64 {
    let a = shift.period();
    let s: i64 = cycle.iter().map(|&b| birkhoff_weight(a, shift.block(b))).sum();
    Rational64::new(s, cycle.len() as i64)
}

/// Extreme means over all simple cycles, by exhaustive enumeration.
pub fn brute_force_mean_cycles(shift: &BlockShift) -> (Rational64, Rational64) {
    let n = shift.len();
    let mut lo: Option<Rational64> = None;
    let mut hi: Option<Rational64> = None;
    // cycles whose least vertex is `start`
    fn dfs(
        shift: &BlockShift,
        start: usize,
        u: usize,
        on_path: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut dyn FnMut(&[usize]),
    ) {
        for &v in shift.successors(u) {
            if v == start {
                out(path);
            } else if v > start && !on_path[v] {
                on_path[v] = true;
                path.push(v);
                dfs(shift, start, v, on_path, path, out);
                path.pop();
                on_path[v] = false;
            }
        }
    }
    for start in 0..n {
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut path = vec![start];
        dfs(shift, start, start, &mut on_path, &mut path, &mut |c| {
            let m = cycle_mean(shift, c);
            lo = Some(lo.map_or(m, |x| x.min(m)));
            hi = Some(hi.map_or(m, |x| x.max(m)));
        });
    }
    (lo.unwrap(), hi.unwrap())
}

/// Extreme means over closed walks of length at most `#blocks`, by dynamic
/// programming from every start; every cycle mean is attained by a simple
/// cycle of that length or less.
pub fn closed_walk_mean_cycles(shift: &BlockShift) -> (Rational64, Rational64) {
    let n = shift.len();
    let a = shift.period();
    let w: Vec<i64> = shift.blocks().iter().map(|b| birkhoff_weight(a, b)).collect();
    let mut lo: Option<Rational64> = None;
    let mut hi: Option<Rational64> = None;
    for start in 0..n {
        // (least, greatest) weight of walks of the current length from `start`
        let mut cur: Vec<Option<(i64, i64)>> = vec![None; n];
        cur[start] = Some((0, 0));
        for len in 1..=n {
            let mut next: Vec<Option<(i64, i64)>> = vec![None; n];
            for (u, c) in cur.iter().enumerate() {
                let Some((cl, ch)) = *c else { continue };
                for &v in shift.successors(u) {
                    let e = next[v].get_or_insert((i64::MAX, i64::MIN));
                    *e = (e.0.min(cl + w[v]), e.1.max(ch + w[v]));
                }
            }
            if let Some((l, h)) = next[start] {
                let (l, h) = (Rational64::new(l, len as i64), Rational64::new(h, len as i64));
                lo = Some(lo.map_or(l, |x| x.min(l)));
                hi = Some(hi.map_or(h, |x| x.max(h)));
            }
            cur = next;
        }
    }
    (lo.expect("the shift has a cycle"), hi.expect("the shift has a cycle"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::BlockLetter;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn weights() {
        assert_eq!(birkhoff_weight(&[1], &BlockLetter::parse("2:1@1").unwrap()), 0);
        assert_eq!(birkhoff_weight(&[1], &BlockLetter::parse("1:1@1").unwrap()), -1);
        let shift = BlockShift::new(&[2, 3]).unwrap();
        for b in shift.blocks() {
            if b.letters().iter().all(|e| e.btype != BandType::Two) {
                assert_eq!(birkhoff_weight(&[2, 3], b), -2);
            }
        }
    }

    #[test]
    fn table_values() {
        let cases = [
            (vec![1], r(-2, 3), r(-1, 2)),
            (vec![1, 1], r(-4, 3), r(-1, 1)),
            (vec![2, 3], r(-3, 1), r(-2, 1)),
            (vec![2, 2], r(-2, 1), r(-2, 1)),
        ];
        for (a, lo, hi) in cases {
            let m = mean_cycles(&a).unwrap();
            assert_eq!((m.f_lower, m.f_upper), (lo, hi), "{a:?}");
        }
    }

    #[test]
    fn witnesses_attain_the_means() {
        for a in [vec![1], vec![1, 1], vec![1, 2], vec![2, 3], vec![3, 1, 2], vec![4, 4, 4]] {
            let s = BlockShift::new(&a).unwrap();
            let m = mean_cycles_of(&s);
            for (w, target) in [(&m.lower_witness, m.f_lower), (&m.upper_witness, m.f_upper)] {
                assert!(!w.is_empty());
                let mut closed = w.clone();
                closed.push(w[0]);
                assert!(s.is_admissible(&closed), "{a:?} {w:?}");
                assert_eq!(cycle_mean(&s, w), target);
            }
        }
    }

    #[test]
    fn karp_matches_enumeration() {
        for a in [vec![1], vec![2], vec![1, 1], vec![1, 2], vec![2, 1], vec![3]] {
            let s = BlockShift::new(&a).unwrap();
            if s.len() > 12 {
                continue;
            }
            let m = mean_cycles_of(&s);
            assert_eq!(brute_force_mean_cycles(&s), (m.f_lower, m.f_upper), "{a:?}");
            assert_eq!(closed_walk_mean_cycles(&s), (m.f_lower, m.f_upper), "{a:?}");
        }
        for a in [vec![2, 3], vec![3, 1, 2], vec![4, 4]] {
            let s = BlockShift::new(&a).unwrap();
            let m = mean_cycles_of(&s);
            assert_eq!(closed_walk_mean_cycles(&s), (m.f_lower, m.f_upper), "{a:?}");
        }
    }

    #[test]
    fn karp_on_a_plain_graph() {
        // 0 -> 1 -> 0 (mean 1), 1 -> 2 -> 2 (loop of mean 5), 2 -> 0
        let succ = vec![vec![1], vec![0, 2], vec![2, 0]];
        let w = vec![0, 2, 5];
        assert_eq!(karp_min(&succ, &w), r(1, 1));
        assert_eq!(-karp_min(&succ, &[0, -2, -5]), r(5, 1));
    }
}
