//! Transfer matrix of the increment potential on words of a fixed length.
//!
//! States are the words of length `m - 1`; each word `u` of length `m` is an
//! edge from its prefix to its suffix, weighted by `exp(s φ(u))` with
//! `φ(u) = ψ_m(u) − ψ_{m−1}(u_1..u_{m−1})`. Entries are log-convex in `s`, so
//! the log spectral radius is convex, and at `s = 0` it is the topological
//! entropy exactly.

use std::collections::HashMap;

const TOL: f64 = 1e-14;
const MAX_ITER: usize = 200_000;

#[derive(Clone, Debug)]
pub struct Operator {
    states: usize,
    /// `(prefix, suffix, φ)`, sorted by suffix.
    edges: Vec<(u32, u32, f64)>,
}

/// Spectral data at one `s`.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub log_radius: f64,
    /// `d/ds log ρ`, the equilibrium average of `φ`.
    pub slope: f64,
}

impl Operator {
    pub fn new(states: usize, mut edges: Vec<(u32, u32, f64)>) -> Self {
        edges.sort_by_key(|e| (e.1, e.0));
        Self { states, edges }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    /// Perron vector of `T` (`transpose = false`: `x ↦ T x` over edges
    /// `prefix → suffix` read as `(T x)_p = Σ w x_s`) and the log radius.
    fn perron(&self, weights: &[f64], transpose: bool) -> (f64, Vec<f64>) {
        let n = self.states;
        let mut x = vec![1.0; n];
        let mut y = vec![0.0; n];
        let mut log_scale = 0.0;
        // shifting by the running radius estimate keeps the iteration
        // aperiodic without changing the eigenvectors
        let mut shift = 0.0;
        for _ in 0..MAX_ITER {
            y.fill(0.0);
            for (&(p, s, _), &w) in self.edges.iter().zip(weights) {
                let (from, to) = if transpose { (p, s) } else { (s, p) };
                y[to as usize] += w * x[from as usize];
            }
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += shift * xi;
            }
            let (lo, hi) = y
                .iter()
                .zip(&x)
                .map(|(a, b)| a / b)
                .fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r), h.max(r)));
            let m = y.iter().copied().fold(0.0f64, f64::max);
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / m;
            }
            let (lo, hi) = (lo - shift, hi - shift);
            log_scale = ((lo + hi) / 2.0).ln();
            shift = ((lo + hi) / 2.0).max(0.0);
            if hi - lo <= TOL * hi {
                break;
            }
        }
        (log_scale, x)
    }

    /// `log ρ(T_s)` and its derivative.
    pub fn spectral(&self, s: f64) -> Spectral {
        let phi_max = self.edges.iter().map(|e| s * e.2).fold(f64::NEG_INFINITY, f64::max);
        // scale so the largest entry is 1; shifts log ρ by `phi_max`
        let weights: Vec<f64> = self.edges.iter().map(|e| (s * e.2 - phi_max).exp()).collect();
        let (lr, right) = self.perron(&weights, false);
        let (_, left) = self.perron(&weights, true);
        let mut num = 0.0;
        let mut den = 0.0;
        for (&(p, q, phi), &w) in self.edges.iter().zip(&weights) {
            let flow = left[p as usize] * w * right[q as usize];
            num += flow * phi;
            den += flow;
        }
        Spectral {
            log_radius: lr + phi_max,
            slope: num / den,
        }
    }
}

impl Operator {
    /// Largest mean of `φ` over cycles of the state graph, with the cycle as
    /// edge indices, by Howard's policy iteration.
    pub fn max_cycle_mean(&self) -> (f64, Vec<usize>) {
        self.extreme_cycle_mean(1.0)
    }

    /// Smallest mean of `φ` over cycles.
    pub fn min_cycle_mean(&self) -> (f64, Vec<usize>) {
        self.extreme_cycle_mean(-1.0)
    }

    /// Maximizes `sign · φ`; the returned mean is of `φ` itself.
    fn extreme_cycle_mean(&self, sign: f64) -> (f64, Vec<usize>) {
        let n = self.states;
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.0 as usize].push(i);
        }
        let w = |i: usize| sign * self.edges[i].2;
        let head = |i: usize| self.edges[i].1 as usize;
        let mut policy: Vec<usize> = out
            .iter()
            .map(|es| *es.iter().max_by(|&&x, &&y| w(x).total_cmp(&w(y))).unwrap())
            .collect();
        let eps = 1e-12;
        loop {
            // value determination: each policy component has one cycle
            let mut eta = vec![f64::NAN; n];
            let mut bias = vec![0.0; n];
            let mut done = vec![false; n];
            for start in 0..n {
                if done[start] {
                    continue;
                }
                let mut path = Vec::new();
                let mut v = start;
                let mut on = HashMap::new();
                while !done[v] && !on.contains_key(&v) {
                    on.insert(v, path.len());
                    path.push(v);
                    v = head(policy[v]);
                }
                if !done[v] {
                    // new cycle from `v`
                    let at = on[&v];
                    let cyc = &path[at..];
                    let mean = cyc.iter().map(|&u| w(policy[u])).sum::<f64>() / cyc.len() as f64;
                    eta[v] = mean;
                    bias[v] = 0.0;
                    done[v] = true;
                    for &u in cyc.iter().skip(1).rev() {
                        let t = head(policy[u]);
                        eta[u] = mean;
                        bias[u] = w(policy[u]) - mean + bias[t];
                        done[u] = true;
                    }
                    path.truncate(at);
                }
                for &u in path.iter().rev() {
                    let t = head(policy[u]);
                    eta[u] = eta[t];
                    bias[u] = w(policy[u]) - eta[t] + bias[t];
                    done[u] = true;
                }
            }
            // policy improvement
            let mut changed = false;
            for v in 0..n {
                let best = out[v]
                    .iter()
                    .copied()
                    .max_by(|&x, &y| eta[head(x)].total_cmp(&eta[head(y)]))
                    .unwrap();
                if eta[head(best)] > eta[v] + eps {
                    policy[v] = best;
                    changed = true;
                }
            }
            if !changed {
                for v in 0..n {
                    let score = |e: usize| w(e) - eta[v] + bias[head(e)];
                    let best = out[v]
                        .iter()
                        .copied()
                        .filter(|&e| (eta[head(e)] - eta[v]).abs() <= eps)
                        .max_by(|&x, &y| score(x).total_cmp(&score(y)))
                        .unwrap_or(policy[v]);
                    if score(best) > bias[v] + eps * (1.0 + bias[v].abs()) {
                        policy[v] = best;
                        changed = true;
                    }
                }
            }
            if !changed {
                let v = (0..n).max_by(|&x, &y| eta[x].total_cmp(&eta[y])).unwrap();
                // walk to the cycle reached from `v`
                let mut seen = vec![false; n];
                let mut u = v;
                while !seen[u] {
                    seen[u] = true;
                    u = head(policy[u]);
                }
                let mut cyc = vec![policy[u]];
                let mut t = head(policy[u]);
                while t != u {
                    cyc.push(policy[t]);
                    t = head(policy[t]);
                }
                let mean = cyc.iter().map(|&e| self.edges[e].2).sum::<f64>() / cyc.len() as f64;
                return (mean, cyc);
            }
        }
    }
}
