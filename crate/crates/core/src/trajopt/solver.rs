/*
Copyright 2026 The segman-rs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! Augmented-Lagrangian Gauss-Newton over the banded normal equations.

use super::problem::{
    eval_cost_rows, eval_rows, residuals_packed, Category, ProblemError, Row, TrajState,
    TrajectoryProblem,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    pub mu_init: f64,
    pub mu_growth: f64,
    pub mu_max: f64,
    /// Feasibility tolerance on equality residuals and inequality violations.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_outer: 20,
            max_inner: 50,
            mu_init: 1.0,
            mu_growth: 5.0,
            mu_max: 1e8,
            tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub trajectory: Vec<TrajState>,
    pub converged: bool,
    pub max_eq_residual: f64,
    pub max_ineq_violation: f64,
    /// Total Gauss-Newton iterations.
    pub iterations: usize,
    pub cost: f64,
}

/// Symmetric positive-definite band matrix, upper band stored row-wise.
pub(crate) struct Band {
    n: usize,
    bw: usize,
    a: Vec<f64>,
}

impl Band {
    pub(crate) fn new(n: usize, bw: usize) -> Self {
        Band {
            n,
            bw,
            a: vec![0.0; n * (bw + 1)],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j - i <= self.bw);
        i * (self.bw + 1) + (j - i)
    }

    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[self.idx(i, j)]
    }

    /// In-place `A = U^T U`; false when not positive definite.
    pub(crate) fn cholesky(&mut self) -> bool {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = self.get(i, i);
            for k in lo..i {
                let u = self.get(k, i);
                s -= u * u;
            }
            if !(s > 0.0) || !s.is_finite() {
                return false;
            }
            let d = s.sqrt();
            let k = self.idx(i, i);
            self.a[k] = d;
            for j in i + 1..(i + bw + 1).min(n) {
                let mut s = self.get(i, j);
                for k in j.saturating_sub(bw)..i {
                    s -= self.get(k, i) * self.get(k, j);
                }
                let k = self.idx(i, j);
                self.a[k] = s / d;
            }
        }
        true
    }

    pub(crate) fn solve(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.get(k, i) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..(i + bw + 1).min(n) {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

/// One row of the augmented objective with its multiplier slot.
struct Term {
    residual: usize,
    t: usize,
    category: Category,
}

struct Augmented<'a> {
    problem: &'a TrajectoryProblem,
    terms: Vec<Term>,
    /// One multiplier per constraint row, in evaluation order.
    lambda: Vec<f64>,
    mu: f64,
    scratch: Vec<Row>,
}

impl<'a> Augmented<'a> {
    fn new(problem: &'a TrajectoryProblem) -> Self {
        let mut terms = Vec::new();
        let mut n_con = 0;
        for (ri, r) in problem.residuals.iter().enumerate() {
            let category = r.category();
            for &t in &r.timesteps {
                terms.push(Term {
                    residual: ri,
                    t,
                    category,
                });
                if category != Category::Cost {
                    n_con += r.rows_per_step();
                }
            }
        }
        Augmented {
            problem,
            terms,
            lambda: vec![0.0; n_con],
            mu: 1.0,
            scratch: Vec::new(),
        }
    }

    /// Least-squares rows of the augmented Lagrangian `0.5 |r|^2` at `z`.
    /// `visit` receives each active row.
    fn rows(&mut self, z: &[f64], mut visit: impl FnMut(&Row)) {
        let mut li = 0;
        let sqrt_mu = self.mu.sqrt();
        for term in &self.terms {
            let r = &self.problem.residuals[term.residual];
            self.scratch.clear();
            match term.category {
                Category::Cost => {
                    eval_cost_rows(self.problem, r, z, term.t, &mut self.scratch);
                    for row in &self.scratch {
                        // cost rows are already sqrt-weighted; objective is sum of squares
                        visit(&scaled(row, std::f64::consts::SQRT_2, 0.0));
                    }
                }
                Category::Equality => {
                    eval_rows(self.problem, r, z, term.t, &mut self.scratch);
                    for row in &self.scratch {
                        let shift = self.lambda[li] / self.mu;
                        li += 1;
                        visit(&scaled(row, sqrt_mu, shift));
                    }
                }
                Category::Inequality => {
                    eval_rows(self.problem, r, z, term.t, &mut self.scratch);
                    for row in &self.scratch {
                        let shift = self.lambda[li] / self.mu;
                        li += 1;
                        if row.value + shift > 0.0 {
                            visit(&scaled(row, sqrt_mu, shift));
                        }
                    }
                }
            }
        }
    }

    fn merit(&mut self, z: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.rows(z, |row| acc += 0.5 * row.value * row.value);
        acc
    }

    fn update_multipliers(&mut self, z: &[f64]) {
        let mut li = 0;
        for term in &self.terms {
            if term.category == Category::Cost {
                continue;
            }
            let r = &self.problem.residuals[term.residual];
            self.scratch.clear();
            eval_rows(self.problem, r, z, term.t, &mut self.scratch);
            for row in &self.scratch {
                let l = &mut self.lambda[li];
                *l += self.mu * row.value;
                if term.category == Category::Inequality {
                    *l = l.max(0.0);
                }
                li += 1;
            }
        }
    }
}

/// `s * (row + shift)`.
fn scaled(row: &Row, s: f64, shift: f64) -> Row {
    let mut out = row.clone();
    out.value = s * (row.value + shift);
    for e in &mut out.grad[..out.len] {
        e.1 *= s;
    }
    out
}

fn bandwidth(problem: &TrajectoryProblem) -> usize {
    let d = problem.state_dim();
    // smoothness spans three consecutive states; lagged differences two
    (problem.order + 1) * d - 1
}

/// Levenberg-Marquardt on the current augmented objective. Returns the
/// number of iterations taken.
fn inner_solve(aug: &mut Augmented, z: &mut [f64], max_inner: usize) -> usize {
    let n = z.len();
    let bw = bandwidth(aug.problem).min(n.saturating_sub(1));
    let mut damping = 1e-6;
    let mut merit = aug.merit(z);
    let mut iters = 0;
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    while iters < max_inner {
        iters += 1;
        let mut h = Band::new(n, bw);
        grad.iter_mut().for_each(|g| *g = 0.0);
        aug.rows(z, |row| {
            let e = row.entries();
            for (a, &(i, gi)) in e.iter().enumerate() {
                grad[i] += gi * row.value;
                for &(j, gj) in &e[a..] {
                    h.add(i, j, gi * gj);
                }
            }
        });
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < 1e-12 {
            break;
        }
        let mut accepted = false;
        for _ in 0..12 {
            let mut hd = Band {
                n: h.n,
                bw: h.bw,
                a: h.a.clone(),
            };
            for i in 0..n {
                hd.add(i, i, damping * (1.0 + hd.get(i, i)));
            }
            if !hd.cholesky() {
                damping *= 10.0;
                continue;
            }
            let mut step: Vec<f64> = grad.iter().map(|g| -g).collect();
            hd.solve(&mut step);
            for i in 0..n {
                trial[i] = z[i] + step[i];
            }
            let m = aug.merit(&trial);
            if m < merit {
                let dec = merit - m;
                z.copy_from_slice(&trial);
                merit = m;
                damping = (damping * 0.3).max(1e-12);
                accepted = true;
                let smax = step.iter().fold(0.0f64, |a, s| a.max(s.abs()));
                if smax < 1e-10 || dec < 1e-14 * (1.0 + merit) {
                    return iters;
                }
                break;
            }
            damping *= 8.0;
        }
        if !accepted {
            break;
        }
    }
    iters
}

/// Minimizes the problem's costs subject to its hard constraints starting
/// from `init` (`horizon + 1` states).
///
/// Never aborts on non-convergence: `converged` is false instead.
pub fn solve(problem: &TrajectoryProblem, init: &[TrajState]) -> Result<SolveResult, ProblemError> {
    solve_with(problem, init, &SolverOptions::default())
}

pub fn solve_with(
    problem: &TrajectoryProblem,
    init: &[TrajState],
    opts: &SolverOptions,
) -> Result<SolveResult, ProblemError> {
    problem.check()?;
    if init.len() != problem.horizon + 1 {
        return Err(ProblemError::InitLength {
            expected: problem.horizon + 1,
            found: init.len(),
        });
    }
    let mut z = problem.pack(init);
    let mut aug = Augmented::new(problem);
    aug.mu = opts.mu_init;
    let mut iterations = 0;
    let mut report = residuals_packed(problem, &z);
    let mut prev_violation = f64::INFINITY;
    let mut best_violation = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..opts.max_outer {
        iterations += inner_solve(&mut aug, &mut z, opts.max_inner);
        report = residuals_packed(problem, &z);
        let violation = report.max_eq_residual.max(report.max_ineq_violation);
        if violation <= opts.tol {
            break;
        }
        if violation < 0.9 * best_violation {
            best_violation = violation;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 4 {
                break;
            }
        }
        aug.update_multipliers(&z);
        if violation > 0.25 * prev_violation {
            aug.mu = (aug.mu * opts.mu_growth).min(opts.mu_max);
        }
        prev_violation = violation;
    }
    let converged = report.max_eq_residual <= opts.tol && report.max_ineq_violation <= opts.tol;
    Ok(SolveResult {
        trajectory: problem.unpack(&z),
        converged,
        max_eq_residual: report.max_eq_residual,
        max_ineq_violation: report.max_ineq_violation,
        iterations,
        cost: report.cost,
    })
}
