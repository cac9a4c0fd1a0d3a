//! Exact discrete optimal transport by the transportation simplex method.
//!
//! Starts from the northwest-corner basis, prices with MODI potentials and
//! pivots along the unique cycle of the basis tree. Bland's rule (first
//! improving cell, lowest-index leaving cell) guarantees termination.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg;
use crate::measure::DiscreteMeasure;

use super::Coupling;

pub const DEFAULT_PIVOT_CAP: usize = 1_000_000;

/// Exact 2-Wasserstein distance and an optimal plan.
pub fn w2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, Coupling)> {
    w2_with_cap(mu, nu, DEFAULT_PIVOT_CAP)
}

pub fn w2_with_cap(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    pivot_cap: usize,
) -> Result<(f64, Coupling)> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    let m = mu.len();
    let n = nu.len();
    let cost: Vec<f64> = mu
        .points()
        .iter()
        .flat_map(|x| nu.points().iter().map(move |y| linalg::dist_sq(x, y)))
        .collect();

    let mut tableau = Transportation::northwest_corner(m, n, mu.masses(), nu.masses());
    tableau.solve(&cost, pivot_cap)?;

    let mut entries = Vec::new();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let f = tableau.flow[i * n + j];
            if tableau.basic[i * n + j] && f > 0.0 {
                entries.push((i, j, f));
                total += f * cost[i * n + j];
            }
        }
    }
    let plan = Coupling::new(mu.clone(), nu.clone(), entries)?;
    Ok((total.max(0.0).sqrt(), plan))
}

struct Transportation {
    m: usize,
    n: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
    // Basis tree adjacency: row i -> basic columns, column j -> basic rows.
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Row(usize),
    Col(usize),
}

impl Transportation {
    fn northwest_corner(m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Self {
        let mut t = Self {
            m,
            n,
            flow: vec![0.0; m * n],
            basic: vec![false; m * n],
            row_adj: vec![Vec::new(); m],
            col_adj: vec![Vec::new(); n],
        };
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let q = s[i].min(d[j]).max(0.0);
            t.add_basic(i, j, q);
            s[i] -= q;
            d[j] -= q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || s[i] < d[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        t
    }

    fn add_basic(&mut self, i: usize, j: usize, f: f64) {
        self.flow[i * self.n + j] = f;
        self.basic[i * self.n + j] = true;
        self.row_adj[i].push(j);
        self.col_adj[j].push(i);
    }

    fn remove_basic(&mut self, i: usize, j: usize) {
        self.flow[i * self.n + j] = 0.0;
        self.basic[i * self.n + j] = false;
        self.row_adj[i].retain(|&c| c != j);
        self.col_adj[j].retain(|&r| r != i);
    }

    fn potentials(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut u = vec![f64::NAN; self.m];
        let mut v = vec![f64::NAN; self.n];
        u[0] = 0.0;
        let mut queue = VecDeque::from([Node::Row(0)]);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Row(i) => {
                    for &j in &self.row_adj[i] {
                        if v[j].is_nan() {
                            v[j] = cost[i * self.n + j] - u[i];
                            queue.push_back(Node::Col(j));
                        }
                    }
                }
                Node::Col(j) => {
                    for &i in &self.col_adj[j] {
                        if u[i].is_nan() {
                            u[i] = cost[i * self.n + j] - v[j];
                            queue.push_back(Node::Row(i));
                        }
                    }
                }
            }
        }
        (u, v)
    }

    /// Path in the basis tree from row `i` to column `j`, as the list of
    /// basic cells along it (starting at the cell touching row `i`).
    fn tree_path(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut row_parent: Vec<Option<usize>> = vec![None; self.m];
        let mut col_parent: Vec<Option<usize>> = vec![None; self.n];
        let mut row_seen = vec![false; self.m];
        let mut col_seen = vec![false; self.n];
        row_seen[i] = true;
        let mut queue = VecDeque::from([Node::Row(i)]);
        while let Some(node) = queue.pop_front() {
            match node {
                Node::Row(r) => {
                    for &c in &self.row_adj[r] {
                        if !col_seen[c] {
                            col_seen[c] = true;
                            col_parent[c] = Some(r);
                            if c == j {
                                queue.clear();
                                break;
                            }
                            queue.push_back(Node::Col(c));
                        }
                    }
                }
                Node::Col(c) => {
                    for &r in &self.col_adj[c] {
                        if !row_seen[r] {
                            row_seen[r] = true;
                            row_parent[r] = Some(c);
                            queue.push_back(Node::Row(r));
                        }
                    }
                }
            }
        }
        // Walk back from column j to row i.
        let mut cells = Vec::new();
        let mut col = j;
        loop {
            let r = col_parent[col].expect("basis is a spanning tree");
            cells.push((r, col));
            if r == i {
                break;
            }
            let c = row_parent[r].expect("basis is a spanning tree");
            cells.push((r, c));
            col = c;
        }
        cells.reverse();
        cells
    }

    fn solve(&mut self, cost: &[f64], pivot_cap: usize) -> Result<()> {
        let cmax = cost.iter().copied().fold(0.0, f64::max);
        let eps = 1e-13 * cmax;
        let mut pivots = 0;
        loop {
            let (u, v) = self.potentials(cost);
            let mut entering = None;
            let mut best = 0.0;
            'price: for i in 0..self.m {
                for j in 0..self.n {
                    let k = i * self.n + j;
                    if self.basic[k] {
                        continue;
                    }
                    let r = cost[k] - u[i] - v[j];
                    if r < -eps {
                        entering = Some((i, j));
                        best = r;
                        break 'price;
                    }
                }
            }
            let Some((ei, ej)) = entering else {
                return Ok(());
            };
            if pivots == pivot_cap {
                return Err(Error::NoConvergence {
                    what: "transportation simplex",
                    iterations: pivots,
                    residual: best,
                });
            }

            // Cycle: entering cell (+), then the path from column ej back to
            // row ei with alternating signs starting with (-).
            let path = self.tree_path(ei, ej);
            let minus: Vec<(usize, usize)> = path.iter().rev().step_by(2).copied().collect();
            let plus: Vec<(usize, usize)> = path.iter().rev().skip(1).step_by(2).copied().collect();

            let mut leaving = minus[0];
            let mut theta = self.flow[leaving.0 * self.n + leaving.1];
            for &(r, c) in &minus[1..] {
                let f = self.flow[r * self.n + c];
                let better =
                    f < theta || (f == theta && r * self.n + c < leaving.0 * self.n + leaving.1);
                if better {
                    theta = f;
                    leaving = (r, c);
                }
            }

            for &(r, c) in &minus {
                self.flow[r * self.n + c] -= theta;
            }
            for &(r, c) in &plus {
                self.flow[r * self.n + c] += theta;
            }
            self.remove_basic(leaving.0, leaving.1);
            self.add_basic(ei, ej, theta);
            pivots += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::quadratic_cost;
    use proptest::prelude::*;

    fn line(points: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(points.iter().map(|&p| vec![p]).collect()).unwrap()
    }

    /// Minimum cost over all permutation plans (vertices of the Birkhoff polytope).
    fn brute_force(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        fn permute(
            k: usize,
            perm: &mut Vec<usize>,
            used: &mut Vec<bool>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if perm.len() == k {
                f(perm);
                return;
            }
            for c in 0..k {
                if !used[c] {
                    used[c] = true;
                    perm.push(c);
                    permute(k, perm, used, f);
                    perm.pop();
                    used[c] = false;
                }
            }
        }
        let k = mu.len();
        let mut best = f64::INFINITY;
        permute(k, &mut Vec::new(), &mut vec![false; k], &mut |p| {
            let c: f64 = (0..k)
                .map(|i| linalg::dist_sq(mu.point(i), nu.point(p[i])))
                .sum::<f64>()
                / k as f64;
            best = best.min(c);
        });
        best
    }

    #[test]
    fn diracs() {
        let a = DiscreteMeasure::dirac(vec![1.0, 2.0]).unwrap();
        let b = DiscreteMeasure::dirac(vec![4.0, 6.0]).unwrap();
        let (d, plan) = w2(&a, &b).unwrap();
        assert!((d - 5.0).abs() < 1e-15);
        assert_eq!(plan.entries(), &[(0, 0, 1.0)]);
    }

    #[test]
    fn self_distance_is_zero_with_diagonal_plan() {
        let mu = line(&[3.0, -1.0, 0.5, 2.0]);
        let (d, plan) = w2(&mu, &mu).unwrap();
        assert_eq!(d, 0.0);
        assert!(plan.entries().iter().all(|&(i, j, _)| i == j));
    }

    #[test]
    fn two_point_line_example() {
        // plans: identity costs (0 + 1)/2, swap costs (4 + 1)/2
        let (d, plan) = w2(&line(&[0.0, 1.0]), &line(&[0.0, 2.0])).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((quadratic_cost(&plan) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unequal_supports() {
        let mu = DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.25, 0.75]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.5, 0.25, 0.25])
            .unwrap();
        let (d, plan) = w2(&mu, &nu).unwrap();
        // Monotone plan on the line is optimal: 0->0 (.25), 1->0 (.25), 1->1 (.25), 1->2 (.25)
        assert!((d * d - 0.5).abs() < 1e-14);
        assert!((quadratic_cost(&plan) - d * d).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let a = DiscreteMeasure::dirac(vec![1.0]).unwrap();
        let b = DiscreteMeasure::dirac(vec![1.0, 2.0]).unwrap();
        assert!(matches!(w2(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pivot_cap_reported() {
        let mu = line(&[0.0, 1.0, 2.0]);
        let nu = line(&[2.0, 1.0, 0.0]);
        assert!(matches!(
            w2_with_cap(&mu, &nu, 0),
            Err(Error::NoConvergence { .. })
        ));
    }

    fn uniform_pair() -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
        (1usize..4, 1usize..=6).prop_flat_map(|(n, k)| {
            let pts = prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n), k);
            (pts.clone(), pts).prop_map(|(a, b)| {
                (
                    DiscreteMeasure::uniform(a).unwrap(),
                    DiscreteMeasure::uniform(b).unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn matches_permutation_brute_force((mu, nu) in uniform_pair()) {
            let (d, plan) = w2(&mu, &nu).unwrap();
            let oracle = brute_force(&mu, &nu);
            prop_assert!((d * d - oracle).abs() <= 1e-9);
            prop_assert!((quadratic_cost(&plan) - d * d).abs() <= 1e-9);
        }

        #[test]
        fn symmetric((mu, nu) in uniform_pair()) {
            let (a, _) = w2(&mu, &nu).unwrap();
            let (b, _) = w2(&nu, &mu).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
