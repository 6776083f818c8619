//! Balanced assignment of users to cross-validation folds.
//!
//! Each user carries `P_u` windows and must land in exactly one of `K`
//! folds; the goal is to minimise `sum_k |x_k - mean|` where `x_k` is the
//! window count of fold `k` and `mean = sum(P) / K`. Because the mean is a
//! constant of the instance the model is a balanced number-partitioning
//! problem and is solved without a MIP solver.
//!
//! All comparisons are done on the integer `sum_k |K * x_k - S|`, which is
//! `K` times the objective.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldProblem {
    /// Window count per user.
    pub windows: Vec<u64>,
    pub k: usize,
}

impl FoldProblem {
    pub fn new(windows: Vec<u64>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("fold count must be >= 1".into()));
        }
        if let Some(u) = windows.iter().position(|&p| p == 0) {
            return Err(Error::InvalidParameter(format!(
                "user {u} has no windows; every P_u must be > 0"
            )));
        }
        Ok(Self { windows, k })
    }

    pub fn users(&self) -> usize {
        self.windows.len()
    }

    pub fn total(&self) -> u64 {
        self.windows.iter().sum()
    }

    pub fn mean_load(&self) -> f64 {
        self.total() as f64 / self.k as f64
    }

    fn loads(&self, folds: &[usize]) -> Vec<u64> {
        let mut loads = vec![0u64; self.k];
        for (u, &f) in folds.iter().enumerate() {
            loads[f] += self.windows[u];
        }
        loads
    }

    /// `K` times the objective, exact.
    fn scaled_objective(&self, loads: &[u64]) -> u128 {
        let s = self.total() as i128;
        let k = self.k as i128;
        loads
            .iter()
            .map(|&x| (k * x as i128 - s).unsigned_abs())
            .sum()
    }

    pub fn evaluate(&self, folds: Vec<usize>) -> Result<FoldAssignment> {
        if folds.len() != self.users() {
            return Err(Error::ShapeMismatch(format!(
                "{} fold ids for {} users",
                folds.len(),
                self.users()
            )));
        }
        if let Some(&f) = folds.iter().find(|&&f| f >= self.k) {
            return Err(Error::InvalidParameter(format!("fold id {f} >= K={}", self.k)));
        }
        let loads = self.loads(&folds);
        let scaled = self.scaled_objective(&loads);
        Ok(FoldAssignment {
            mean: self.mean_load(),
            objective: scaled as f64 / self.k as f64,
            folds,
            loads,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// 0-based fold per user.
    pub folds: Vec<usize>,
    pub loads: Vec<u64>,
    pub mean: f64,
    pub objective: f64,
}

impl FoldAssignment {
    pub fn users_in(&self, fold: usize) -> impl Iterator<Item = usize> + '_ {
        self.folds
            .iter()
            .enumerate()
            .filter(move |(_, &f)| f == fold)
            .map(|(u, _)| u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldMode {
    Exact,
    #[default]
    Heuristic,
}

/// Objective of the linearised model: with the assignment fixed, the smallest
/// feasible `U_k` under `U_k >= x_k - mean` and `U_k >= -(x_k - mean)` is
/// `|x_k - mean|`, so the optimum of the relaxed problem is its sum.
pub fn linearized_objective(loads: &[u64], mean: f64) -> f64 {
    loads
        .iter()
        .map(|&x| {
            let d = x as f64 - mean;
            d.max(-d)
        })
        .sum()
}

pub fn assign_folds(problem: &FoldProblem, mode: FoldMode) -> Result<FoldAssignment> {
    if problem.k == 0 {
        return Err(Error::InvalidParameter("fold count must be >= 1".into()));
    }
    match mode {
        FoldMode::Exact => problem.evaluate(exact(problem)),
        FoldMode::Heuristic => {
            let mut folds = greedy(problem);
            local_search(problem, &mut folds);
            problem.evaluate(folds)
        }
    }
}

/// Longest-processing-time greedy: heaviest user first, into the lightest fold.
pub fn greedy_assignment(problem: &FoldProblem) -> Result<FoldAssignment> {
    problem.evaluate(greedy(problem))
}

fn greedy(problem: &FoldProblem) -> Vec<usize> {
    let mut order: Vec<usize> = (0..problem.users()).collect();
    order.sort_by_key(|&u| std::cmp::Reverse(problem.windows[u]));
    let mut loads = vec![0u64; problem.k];
    let mut folds = vec![0usize; problem.users()];
    for u in order {
        let f = (0..problem.k).min_by_key(|&f| (loads[f], f)).unwrap();
        folds[u] = f;
        loads[f] += problem.windows[u];
    }
    folds
}

/// Best-improvement descent over single moves and pairwise swaps.
fn local_search(problem: &FoldProblem, folds: &mut [usize]) {
    let k = problem.k as i128;
    let s = problem.total() as i128;
    let p: Vec<i128> = problem.windows.iter().map(|&w| w as i128).collect();
    let mut loads: Vec<i128> = problem.loads(folds).into_iter().map(|x| x as i128).collect();
    let dev = |x: i128| (k * x - s).abs();
    loop {
        // (gain, user, target fold, swap partner)
        let mut best: Option<(i128, usize, usize, Option<usize>)> = None;
        let mut consider = |gain: i128, cand: (usize, usize, Option<usize>)| {
            if gain > 0 && best.map_or(true, |b| gain > b.0) {
                best = Some((gain, cand.0, cand.1, cand.2));
            }
        };
        for u in 0..folds.len() {
            let a = folds[u];
            for b in 0..problem.k {
                if b == a {
                    continue;
                }
                let before = dev(loads[a]) + dev(loads[b]);
                let after = dev(loads[a] - p[u]) + dev(loads[b] + p[u]);
                consider(before - after, (u, b, None));
            }
            for v in u + 1..folds.len() {
                let b = folds[v];
                if a == b || p[u] == p[v] {
                    continue;
                }
                let d = p[v] - p[u];
                let before = dev(loads[a]) + dev(loads[b]);
                let after = dev(loads[a] + d) + dev(loads[b] - d);
                consider(before - after, (u, b, Some(v)));
            }
        }
        let Some((_, u, b, swap)) = best else { break };
        let a = folds[u];
        match swap {
            None => {
                loads[a] -= p[u];
                loads[b] += p[u];
                folds[u] = b;
            }
            Some(v) => {
                let d = p[v] - p[u];
                loads[a] += d;
                loads[b] -= d;
                folds[u] = b;
                folds[v] = a;
            }
        }
    }
}

struct Search<'a> {
    problem: &'a FoldProblem,
    order: Vec<usize>,
    loads: Vec<i128>,
    folds: Vec<usize>,
    s: i128,
    k: i128,
    best: u128,
    best_folds: Option<Vec<usize>>,
    /// Stop at the first assignment reaching `best` (second pass).
    first_match: bool,
}

impl Search<'_> {
    fn excess(&self) -> u128 {
        self.loads
            .iter()
            .map(|&x| (self.k * x - self.s).max(0) as u128)
            .sum()
    }

    fn dfs(&mut self, depth: usize, used: usize) -> bool {
        // sum_k (K x_k - S) = 0 at the leaves, so the objective is twice the
        // excess above the mean; excess never decreases as users are added.
        let lower = 2 * self.excess();
        if self.first_match {
            if lower > self.best {
                return false;
            }
        } else if lower >= self.best {
            return false;
        }
        if depth == self.order.len() {
            let obj = lower;
            if self.first_match || obj < self.best {
                self.best = obj;
                self.best_folds = Some(self.folds.clone());
            }
            return self.first_match;
        }
        let u = self.order[depth];
        let p = self.problem.windows[u] as i128;
        let limit = (used + 1).min(self.problem.k);
        for f in 0..limit {
            self.loads[f] += p;
            self.folds[u] = f;
            let stop = self.dfs(depth + 1, used.max(f + 1));
            self.loads[f] -= p;
            if stop {
                return true;
            }
            if !self.first_match && self.best == 0 {
                return true;
            }
        }
        false
    }
}

fn exact(problem: &FoldProblem) -> Vec<usize> {
    let n = problem.users();
    let incumbent = greedy(problem);
    let incumbent_obj = problem.scaled_objective(&problem.loads(&incumbent));

    let mut by_weight: Vec<usize> = (0..n).collect();
    by_weight.sort_by_key(|&u| (std::cmp::Reverse(problem.windows[u]), u));
    let mut search = Search {
        problem,
        order: by_weight,
        loads: vec![0; problem.k],
        folds: vec![0; n],
        s: problem.total() as i128,
        k: problem.k as i128,
        best: incumbent_obj,
        best_folds: None,
        first_match: false,
    };
    search.dfs(0, 0);
    let optimum = search.best;

    // Second pass in user order returns the lexicographically smallest
    // optimal fold vector.
    search.order = (0..n).collect();
    search.loads = vec![0; problem.k];
    search.best = optimum;
    search.best_folds = None;
    search.first_match = true;
    search.dfs(0, 0);
    search.best_folds.unwrap_or(incumbent)
}

/// Exhaustive check over all `K^N` assignments.
pub fn verify_optimal(problem: &FoldProblem, assignment: &FoldAssignment) -> Result<bool> {
    let n = problem.users();
    if n > 14 || problem.k > 4 {
        return Err(Error::OracleLimit(format!(
            "brute force limited to N <= 14 and K <= 4, got N={n}, K={}",
            problem.k
        )));
    }
    Ok(brute_force_minimum(problem) == problem.scaled_objective(&problem.loads(&assignment.folds)))
}

fn brute_force_minimum(problem: &FoldProblem) -> u128 {
    let n = problem.users();
    let mut folds = vec![0usize; n];
    let mut best = u128::MAX;
    loop {
        best = best.min(problem.scaled_objective(&problem.loads(&folds)));
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            folds[i] += 1;
            if folds[i] < problem.k {
                break;
            }
            folds[i] = 0;
            i += 1;
        }
    }
}

/// Writes `user_id,fold` with 1-based fold ids.
pub fn write_assignment_csv<W: Write>(
    out: W,
    user_ids: &[String],
    assignment: &FoldAssignment,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "fold"])?;
    for (id, f) in user_ids.iter().zip(&assignment.folds) {
        w.write_record([id.as_str(), &(f + 1).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(p: &[u64], k: usize) -> FoldProblem {
        FoldProblem::new(p.to_vec(), k).unwrap()
    }

    #[test]
    fn balanced_split() {
        let a = assign_folds(&problem(&[10, 10, 10, 10], 2), FoldMode::Exact).unwrap();
        assert_eq!(a.objective, 0.0);
        assert_eq!(a.loads, vec![20, 20]);
    }

    #[test]
    fn five_six_seven() {
        // Brute force over 2^3 assignments: {7} vs {5, 6} gives |7-9|+|11-9| = 4.
        let p = problem(&[5, 6, 7], 2);
        let a = assign_folds(&p, FoldMode::Exact).unwrap();
        assert_eq!(a.objective, 4.0);
        assert_eq!(a.mean, 9.0);
        let mut loads = a.loads.clone();
        loads.sort();
        assert_eq!(loads, vec![7, 11]);
        assert_eq!(a.folds[0], a.folds[1]);
        assert_ne!(a.folds[0], a.folds[2]);
        // Lexicographically smallest among the optima.
        assert_eq!(a.folds, vec![0, 0, 1]);
        assert!(verify_optimal(&p, &a).unwrap());
    }

    #[test]
    fn single_fold_is_always_optimal() {
        let p = problem(&[3, 9, 1, 4], 1);
        for mode in [FoldMode::Exact, FoldMode::Heuristic] {
            let a = assign_folds(&p, mode).unwrap();
            assert_eq!(a.objective, 0.0);
            assert!(verify_optimal(&p, &a).unwrap());
        }
        assert!(verify_optimal(&p, &p.evaluate(vec![0; 4]).unwrap()).unwrap());
    }

    #[test]
    fn more_folds_than_users() {
        let p = problem(&[4, 2], 3);
        let a = assign_folds(&p, FoldMode::Exact).unwrap();
        assert!(verify_optimal(&p, &a).unwrap());
        assert!(a.loads.contains(&0));
    }

    #[test]
    fn greedy_can_be_suboptimal() {
        // LPT on {3,3,2,2,2} with K=2 gives {3,2,2} / {3,2} = 7/5, while
        // {3,3} / {2,2,2} is perfectly balanced. Found by enumeration.
        let p = problem(&[3, 3, 2, 2, 2], 2);
        let g = greedy_assignment(&p).unwrap();
        assert_eq!(g.objective, 2.0);
        assert!(!verify_optimal(&p, &g).unwrap());
        let e = assign_folds(&p, FoldMode::Exact).unwrap();
        assert_eq!(e.objective, 0.0);
        assert!(verify_optimal(&p, &e).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(FoldProblem::new(vec![1, 2], 0), Err(Error::InvalidParameter(_))));
        assert!(FoldProblem::new(vec![1, 0], 2).is_err());
        let big = problem(&[1; 15], 2);
        let a = assign_folds(&big, FoldMode::Heuristic).unwrap();
        assert!(matches!(verify_optimal(&big, &a), Err(Error::OracleLimit(_))));
    }

    #[test]
    fn exact_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..=10);
            let k = rng.gen_range(1..=3);
            let p: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=40)).collect();
            let prob = problem(&p, k);
            let a = assign_folds(&prob, FoldMode::Exact).unwrap();
            assert!(verify_optimal(&prob, &a).unwrap(), "{p:?} K={k}");
            let h = assign_folds(&prob, FoldMode::Heuristic).unwrap();
            assert!(h.objective <= greedy_assignment(&prob).unwrap().objective);
        }
    }

    #[test]
    fn assignment_invariants() {
        let prob = problem(&[12, 7, 30, 5, 5, 9, 14], 3);
        for mode in [FoldMode::Exact, FoldMode::Heuristic] {
            let a = assign_folds(&prob, mode).unwrap();
            assert_eq!(a.folds.len(), 7);
            assert_eq!(a.loads.iter().sum::<u64>(), prob.total());
            assert_eq!(a.mean, prob.total() as f64 / 3.0);
            assert!((linearized_objective(&a.loads, a.mean) - a.objective).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_export() {
        let prob = problem(&[5, 6, 7], 2);
        let a = assign_folds(&prob, FoldMode::Exact).unwrap();
        let mut out = Vec::new();
        write_assignment_csv(&mut out, &["a".into(), "b".into(), "c".into()], &a).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "user_id,fold\na,1\nb,1\nc,2\n");
    }
}
