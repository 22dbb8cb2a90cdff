//! Optimization over density matrices.
//!
//! States are parameterized as `ρ = G G† / Tr(G G†)` with an unconstrained
//! complex `d × d` matrix `G`, flattened into `2d²` reals. Objectives receive
//! `G` normalized to `Tr(G G†) = 1`; since the chart is scale invariant the
//! optimizer renormalizes after every step.
//!
//! Local search is BFGS with Armijo backtracking and central finite
//! differences. Global claims come from multi-start and, for qubits, an
//! exhaustive Bloch-ball grid whose best point seeds one extra descent.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::qmat::linalg::{self, ComplexMatrix};
use crate::qmat::random::{ginibre_with, rng_from_seed};
use crate::qmat::DensityOperator;

/// Stopping rules for [`bfgs_minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-6, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Something BFGS can minimize.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Central finite differences unless overridden.
    fn gradient(&mut self, x: &[f64], h: f64) -> Vec<f64> {
        let mut xp = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            let xi = x[i];
            xp[i] = xi + h;
            let fp = self.value(&xp);
            xp[i] = xi - h;
            let fm = self.value(&xp);
            xp[i] = xi;
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }
}

/// Adapts a closure to [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Quasi-Newton minimization. With `unit_sphere` the iterate is rescaled to
/// unit Euclidean norm after every step (for scale-invariant objectives).
pub fn bfgs_minimize<O: Objective>(obj: &mut O, x0: &[f64], opts: &BfgsOptions, unit_sphere: bool) -> BfgsResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    if unit_sphere {
        normalize(&mut x);
    }
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x, opts.fd_step);
    let mut h = identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        if !f.is_finite() {
            break;
        }
        let gn = norm(&g);
        if gn <= opts.grad_tol {
            converged = true;
            break;
        }
        let mut p = mat_vec(&h, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 || !slope.is_finite() {
            h = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
        }
        // keep the first trial step on the scale of the iterate
        let pn = norm(&p);
        let mut step = if fresh && pn > 0.0 { (0.1 / pn).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..50 {
            let mut xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + step * b).collect();
            if unit_sphere {
                normalize(&mut xn);
            }
            let fnew = obj.value(&xn);
            if fnew.is_finite() && fnew <= f + 1e-4 * step * slope {
                accepted = Some((xn, fnew));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((xn, fnew)) = accepted else {
            if fresh {
                // no descent along the gradient: stationary up to difference noise
                converged = gn <= opts.grad_tol * 1e3;
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        let gnew = obj.gradient(&xn, opts.fd_step);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) && sy > 0.0 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = identity(n).into_iter().map(|v| v * scale).collect();
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        let progress = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        if progress.abs() <= 1e-16 * f.abs().max(1.0) && norm(&g) <= opts.grad_tol * 1e2 {
            converged = true;
            break;
        }
    }
    let grad_norm = norm(&g);
    BfgsResult { x, value: f, iterations, grad_norm, converged: converged || grad_norm <= opts.grad_tol }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&h[i * n..(i + 1) * n], v)).collect()
}

/// Inverse-Hessian BFGS update `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x*, f(x*))` among the probed interior points.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Direction of an optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        }
    }

    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sense::Maximize => Sense::Minimize,
            Sense::Minimize => Sense::Maximize,
        }
    }
}

/// `G` from its flattened real parameters, normalized to `Tr(G G†) = 1`.
pub fn g_from_params(d: usize, x: &[f64]) -> ComplexMatrix {
    let mut g = ComplexMatrix::from_fn(d, d, |i, j| Complex64::new(x[2 * (i * d + j)], x[2 * (i * d + j) + 1]));
    let n = g.norm();
    if n > 0.0 {
        g.unscale_mut(n);
    }
    g
}

pub fn params_from_g(g: &ComplexMatrix) -> Vec<f64> {
    let d = g.nrows();
    let mut x = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for j in 0..d {
            x.push(g[(i, j)].re);
            x.push(g[(i, j)].im);
        }
    }
    normalize(&mut x);
    x
}

/// `ρ = G G† / Tr(G G†)`.
pub fn density_from_g(g: &ComplexMatrix) -> DensityOperator {
    let m = g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityOperator::from_raw(linalg::hermitian_part(&m.unscale(tr)), vec![g.nrows()])
}

/// A chart point for `ρ`: `G = ρ^{1/2}`.
pub fn g_from_density(rho: &DensityOperator) -> ComplexMatrix {
    let s = rho.support_power(0.5).expect("density operators are PSD");
    let mut g = s.into_matrix();
    let n = g.norm();
    g.unscale_mut(n);
    g
}

/// Qubit state with Bloch vector `r`, `|r| ≤ 1`.
pub fn bloch_state(r: [f64; 3]) -> DensityOperator {
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + r[2]), 0.0),
            Complex64::new(0.5 * r[0], -0.5 * r[1]),
            Complex64::new(0.5 * r[0], 0.5 * r[1]),
            Complex64::new(0.5 * (1.0 - r[2]), 0.0),
        ],
    );
    DensityOperator::from_raw(m, vec![2])
}

/// Grid points of `[-1, 1]³` inside the closed unit ball, `n` per axis.
pub fn bloch_grid(n: usize) -> Vec<[f64; 3]> {
    let step = if n > 1 { 2.0 / (n - 1) as f64 } else { 0.0 };
    let coord = |i: usize| if n > 1 { -1.0 + step * i as f64 } else { 0.0 };
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r = [coord(i), coord(j), coord(k)];
                let len2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
                if len2 <= 1.0 + 1e-12 {
                    let s = if len2 > 1.0 { 1.0 / len2.sqrt() } else { 1.0 };
                    pts.push([r[0] * s, r[1] * s, r[2] * s]);
                }
            }
        }
    }
    pts
}

/// Configuration of a multi-start search over density matrices.
#[derive(Debug, Clone)]
pub struct StateSearch {
    /// Number of deterministic starts: the maximally mixed state, then Ginibre draws.
    pub starts: usize,
    pub seed: u64,
    pub bfgs: BfgsOptions,
    /// Bloch-grid resolution per axis; only used for qubits.
    pub grid: Option<usize>,
    /// Additional starting points tried before the generated ones.
    pub warm_starts: Vec<ComplexMatrix>,
}

impl Default for StateSearch {
    fn default() -> Self {
        Self { starts: 8, seed: 0, bfgs: BfgsOptions::default(), grid: None, warm_starts: Vec::new() }
    }
}

impl StateSearch {
    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid = Some(n);
        self
    }

    pub fn with_starts(mut self, n: usize) -> Self {
        self.starts = n;
        self
    }

    pub fn warm(mut self, g: ComplexMatrix) -> Self {
        self.warm_starts.push(g);
        self
    }

    fn start_points(&self, d: usize) -> Vec<ComplexMatrix> {
        let mut pts = self.warm_starts.clone();
        for k in 0..self.starts {
            if k == 0 {
                pts.push(ComplexMatrix::identity(d, d).unscale((d as f64).sqrt()));
            } else {
                let mut rng = rng_from_seed(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64));
                let mut g = ginibre_with(d, d, &mut rng);
                let n = g.norm();
                g.unscale_mut(n);
                pts.push(g);
            }
        }
        pts
    }
}

/// Result of a search over density matrices.
#[derive(Debug, Clone)]
pub struct StateOptimum {
    pub g: ComplexMatrix,
    pub value: f64,
    pub iterations: usize,
    /// Index of the winning start (warm starts first, then generated ones; the grid start is last).
    pub winning_start: usize,
    /// Best grid value, when a grid was evaluated.
    pub grid_best: Option<f64>,
    /// How much the grid beat plain multi-start descent (0 when it did not).
    pub grid_gap: f64,
    pub converged: bool,
}

impl StateOptimum {
    pub fn state(&self) -> DensityOperator {
        density_from_g(&self.g)
    }
}

/// Optimize `f(G)` over `d × d` density matrices `ρ = G G†`.
pub fn optimize_state<F>(d: usize, sense: Sense, f: F, search: &StateSearch) -> StateOptimum
where
    F: Fn(&ComplexMatrix) -> f64 + Sync,
{
    let sign = sense.sign();
    let run = |g0: &ComplexMatrix| -> BfgsResult {
        let mut obj = FnObjective(|x: &[f64]| sign * f(&g_from_params(d, x)));
        bfgs_minimize(&mut obj, &params_from_g(g0), &search.bfgs, true)
    };
    let starts = search.start_points(d);
    let results: Vec<BfgsResult> = starts.par_iter().map(run).collect();
    let (mut best_idx, mut best) = pick_best(&results);
    let descent_best = sign * best.value;
    let mut iterations: usize = results.iter().map(|r| r.iterations).sum();

    let mut grid_best = None;
    let mut grid_gap = 0.0;
    if let (Some(n), 2) = (search.grid, d) {
        let pts = bloch_grid(n);
        let values: Vec<f64> = pts.par_iter().map(|&r| f(&g_from_density(&bloch_state(r)))).collect();
        let mut gi = 0;
        for (i, &v) in values.iter().enumerate() {
            if sense.better(v, values[gi]) || !values[gi].is_finite() {
                gi = i;
            }
        }
        let gv = values[gi];
        grid_best = Some(gv);
        grid_gap = match sense {
            Sense::Maximize => (gv - descent_best).max(0.0),
            Sense::Minimize => (descent_best - gv).max(0.0),
        };
        let polished = run(&g_from_density(&bloch_state(pts[gi])));
        iterations += polished.iterations;
        if polished.value < best.value {
            best = polished;
            best_idx = starts.len();
        }
    }
    StateOptimum {
        g: g_from_params(d, &best.x),
        value: sign * best.value,
        iterations,
        winning_start: best_idx,
        grid_best,
        grid_gap,
        converged: best.converged,
    }
}

fn pick_best(results: &[BfgsResult]) -> (usize, BfgsResult) {
    let mut idx = 0;
    for (i, r) in results.iter().enumerate() {
        let cur = results[idx].value;
        if r.value < cur || (!cur.is_finite() && r.value.is_finite()) {
            idx = i;
        }
    }
    (idx, results[idx].clone())
}

/// Settings of the inner problem in a nested optimization.
#[derive(Debug, Clone)]
pub struct InnerOptions {
    pub bfgs: BfgsOptions,
    /// Starting point of the first inner solve (the maximally mixed state if absent).
    pub warm: Option<ComplexMatrix>,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { bfgs: BfgsOptions { max_iter: 300, grad_tol: 1e-8, fd_step: 1e-6 }, warm: None }
    }
}

/// Result of [`nested_optimize`].
#[derive(Debug, Clone)]
pub struct NestedOptimum {
    pub outer: StateOptimum,
    /// Inner optimizer at the outer optimum.
    pub inner_g: ComplexMatrix,
}

/// Outer objective `F(x) = opt_y f(x, y)` with warm-started inner solves
/// and envelope-theorem gradients: `∇F(x) = ∂_x f(x, y*(x))`.
struct EnvelopeObjective<'a, F> {
    d_outer: usize,
    d_inner: usize,
    f: &'a F,
    outer_sign: f64,
    inner_sense: Sense,
    inner: &'a InnerOptions,
    /// Warm start and the most recent inner solution with the outer point it belongs to.
    y: Vec<f64>,
    cached_x: Vec<f64>,
    inner_iterations: usize,
}

impl<'a, F: Fn(&ComplexMatrix, &ComplexMatrix) -> f64> EnvelopeObjective<'a, F> {
    fn new(d_outer: usize, d_inner: usize, f: &'a F, outer_sense: Sense, inner: &'a InnerOptions) -> Self {
        let y0 = match &inner.warm {
            Some(g) => params_from_g(g),
            None => params_from_g(&ComplexMatrix::identity(d_inner, d_inner)),
        };
        Self {
            d_outer,
            d_inner,
            f,
            outer_sign: outer_sense.sign(),
            inner_sense: outer_sense.flip(),
            inner,
            y: y0,
            cached_x: Vec::new(),
            inner_iterations: 0,
        }
    }

    fn solve_inner(&mut self, x: &[f64]) -> f64 {
        let gx = g_from_params(self.d_outer, x);
        let sign = self.inner_sense.sign();
        let (f, d_inner) = (self.f, self.d_inner);
        let mut obj = FnObjective(|y: &[f64]| sign * f(&gx, &g_from_params(d_inner, y)));
        let r = bfgs_minimize(&mut obj, &self.y, &self.inner.bfgs, true);
        self.inner_iterations += r.iterations;
        self.y = r.x;
        self.cached_x = x.to_vec();
        sign * r.value
    }
}

impl<F: Fn(&ComplexMatrix, &ComplexMatrix) -> f64> Objective for EnvelopeObjective<'_, F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.outer_sign * self.solve_inner(x)
    }

    fn gradient(&mut self, x: &[f64], h: f64) -> Vec<f64> {
        if self.cached_x.as_slice() != x {
            self.solve_inner(x);
        }
        let gy = g_from_params(self.d_inner, &self.y);
        let (f, d_outer, sign) = (self.f, self.d_outer, self.outer_sign);
        let mut partial = FnObjective(|x: &[f64]| sign * f(&g_from_params(d_outer, x), &gy));
        partial.gradient(x, h)
    }
}

/// `opt_x opt'_y f(G_x, G_y)` over density matrices, where `opt'` is the
/// opposite of `outer_sense` (e.g. `sup_ρ inf_σ`).
///
/// The inner problem is assumed well-posed enough for a warm-started local
/// solve (convex or concave in `y`); the outer problem uses multi-start and,
/// for a qubit outer variable, the Bloch grid of `outer`.
pub fn nested_optimize<F>(
    d_outer: usize,
    d_inner: usize,
    outer_sense: Sense,
    f: F,
    outer: &StateSearch,
    inner: &InnerOptions,
) -> NestedOptimum
where
    F: Fn(&ComplexMatrix, &ComplexMatrix) -> f64 + Sync,
{
    let sign = outer_sense.sign();
    let run = |g0: &ComplexMatrix| -> (BfgsResult, Vec<f64>, usize) {
        let mut obj = EnvelopeObjective::new(d_outer, d_inner, &f, outer_sense, inner);
        let r = bfgs_minimize(&mut obj, &params_from_g(g0), &outer.bfgs, true);
        // re-solve at the final point so the inner witness matches the value
        let v = obj.value(&r.x);
        let r = BfgsResult { value: v, ..r };
        (r, obj.y.clone(), obj.inner_iterations)
    };
    let starts = outer.start_points(d_outer);
    let mut results: Vec<(BfgsResult, Vec<f64>, usize)> = starts.par_iter().map(run).collect();
    let plain: Vec<BfgsResult> = results.iter().map(|r| r.0.clone()).collect();
    let (mut idx, mut best) = pick_best(&plain);
    let descent_best = sign * best.value;
    let mut iterations: usize = results.iter().map(|r| r.0.iterations + r.2).sum();

    let mut grid_best = None;
    let mut grid_gap = 0.0;
    if let (Some(n), 2) = (outer.grid, d_outer) {
        let pts = bloch_grid(n);
        let values: Vec<f64> = pts
            .par_iter()
            .map(|&r| {
                let mut obj = EnvelopeObjective::new(d_outer, d_inner, &f, outer_sense, inner);
                sign * obj.value(&params_from_g(&g_from_density(&bloch_state(r))))
            })
            .collect();
        let mut gi = 0;
        for (i, &v) in values.iter().enumerate() {
            if outer_sense.better(v, values[gi]) || !values[gi].is_finite() {
                gi = i;
            }
        }
        let gv = values[gi];
        grid_best = Some(gv);
        grid_gap = match outer_sense {
            Sense::Maximize => (gv - descent_best).max(0.0),
            Sense::Minimize => (descent_best - gv).max(0.0),
        };
        let polished = run(&g_from_density(&bloch_state(pts[gi])));
        iterations += polished.0.iterations + polished.2;
        if polished.0.value < best.value {
            best = polished.0.clone();
            idx = results.len();
        }
        results.push(polished);
    }
    NestedOptimum {
        outer: StateOptimum {
            g: g_from_params(d_outer, &best.x),
            value: sign * best.value,
            iterations,
            winning_start: idx,
            grid_best,
            grid_gap,
            converged: best.converged,
        },
        inner_g: g_from_params(d_inner, &results[idx].1),
    }
}
