//! Derivative-free minimisation by linear approximation (COBYLA), unconstrained form.
//!
//! Keeps a simplex of `m + 1` evaluated points, interpolates a linear model of the
//! objective through them, and takes steps of length `rho` along the model's
//! steepest descent. `rho` shrinks from the initial to the final trust radius
//! once steps stop paying off and the simplex geometry is acceptable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[default]
    #[serde(rename = "COBYLA")]
    Cobyla,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        "COBYLA"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(default)]
    pub kind: OptimizerKind,
    /// Budget of objective evaluations.
    pub max_iters: usize,
    pub initial_trust_radius: f64,
    pub final_trust_radius: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Cobyla,
            max_iters: 500,
            initial_trust_radius: 1.0,
            final_trust_radius: 1e-4,
            seed: 42,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.final_trust_radius > 0.0 && self.final_trust_radius < self.initial_trust_radius) {
            return Err(Error::Config(format!(
                "trust radii must satisfy 0 < final ({}) < initial ({})",
                self.final_trust_radius, self.initial_trust_radius
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("optimizer needs a positive evaluation budget".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult<T> {
    pub x: Vec<T>,
    pub fun: T,
    /// Best objective value seen after each evaluation; non-increasing.
    pub trace: Vec<T>,
    pub evaluations: usize,
    /// The evaluation budget ran out before the final trust radius was reached.
    pub budget_exhausted: bool,
}

// Simplex acceptability and step constants from Powell's method.
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

/// Inverse of a square matrix by Gauss–Jordan elimination with partial pivoting.
fn invert<T: Real>(m: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col]
                .abs()
                .partial_cmp(&a[s][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[pivot][col].abs() > T::epsilon() * T::lit(16.0)) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                if factor != T::zero() {
                    for j in 0..n {
                        let (ac, ic) = (a[col][j], inv[col][j]);
                        a[r][j] -= factor * ac;
                        inv[r][j] -= factor * ic;
                    }
                }
            }
        }
    }
    Some(inv)
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

struct Evaluator<'a, T, F> {
    objective: &'a mut F,
    budget: usize,
    count: usize,
    best: T,
    trace: Vec<T>,
}

impl<T: Real, F: FnMut(&[T]) -> T> Evaluator<'_, T, F> {
    fn exhausted(&self) -> bool {
        self.count >= self.budget
    }

    fn eval(&mut self, x: &[T]) -> T {
        let mut f = (self.objective)(x);
        if f.is_nan() {
            f = T::infinity();
        }
        self.count += 1;
        if f < self.best {
            self.best = f;
        }
        self.trace.push(self.best);
        f
    }
}

/// Simplex vertices in absolute coordinates plus the index of the best one (the pole).
struct Simplex<T> {
    points: Vec<Vec<T>>,
    values: Vec<T>,
    pole: usize,
}

struct Geometry<T> {
    /// Non-pole vertex indices, aligned with the rows below.
    others: Vec<usize>,
    /// `points[others[k]] − points[pole]`.
    edges: Vec<Vec<T>>,
    /// Inverse of the edge matrix; row `k` is dual to edge `k`.
    inverse: Option<Vec<Vec<T>>>,
    /// Distance of each vertex from the face opposite it.
    sigma: Vec<T>,
    /// Edge lengths.
    eta: Vec<T>,
}

impl<T: Real> Simplex<T> {
    fn update_pole(&mut self) {
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[self.pole] {
                self.pole = i;
            }
        }
    }

    fn geometry(&self) -> Geometry<T> {
        let others: Vec<usize> = (0..self.points.len()).filter(|&i| i != self.pole).collect();
        let pole = &self.points[self.pole];
        let edges: Vec<Vec<T>> = others
            .iter()
            .map(|&i| self.points[i].iter().zip(pole).map(|(a, b)| *a - *b).collect())
            .collect();
        let inverse = invert(&edges).map(|inv| {
            // Rows of the inverse of the edge matrix are the columns of inv.
            let m = inv.len();
            (0..m).map(|k| (0..m).map(|j| inv[j][k]).collect()).collect::<Vec<Vec<T>>>()
        });
        let sigma = match &inverse {
            Some(rows) => rows.iter().map(|r| T::one() / norm(r)).collect(),
            None => vec![T::zero(); others.len()],
        };
        let eta = edges.iter().map(|e| norm(e)).collect();
        Geometry {
            others,
            edges,
            inverse,
            sigma,
            eta,
        }
    }
}

/// Minimises `objective` from `x0`.
pub fn cobyla_minimize<T: Real, F: FnMut(&[T]) -> T>(
    mut objective: F,
    x0: &[T],
    config: &OptimizerConfig,
) -> Result<OptimizeResult<T>> {
    config.validate()?;
    let m = x0.len();
    if m == 0 {
        return Err(Error::Input("cannot optimise over zero variables".into()));
    }
    let rho_end = T::lit(config.final_trust_radius);
    let mut rho = T::lit(config.initial_trust_radius);
    let mut ev = Evaluator {
        objective: &mut objective,
        budget: config.max_iters,
        count: 0,
        best: T::infinity(),
        trace: Vec::new(),
    };

    let f0 = ev.eval(x0);
    if !f0.is_finite() {
        return Err(Error::Input(format!("objective is not finite at x0 ({f0})")));
    }
    let mut simplex = Simplex {
        points: vec![x0.to_vec()],
        values: vec![f0],
        pole: 0,
    };
    // Initial simplex: step rho along each axis from the current best point.
    for j in 0..m {
        if ev.exhausted() {
            break;
        }
        let mut x = simplex.points[simplex.pole].clone();
        x[j] += rho;
        let f = ev.eval(&x);
        simplex.points.push(x);
        simplex.values.push(f);
        if f < simplex.values[simplex.pole] {
            simplex.pole = simplex.points.len() - 1;
        }
    }

    let (alpha, beta, gamma, delta) = (T::lit(ALPHA), T::lit(BETA), T::lit(GAMMA), T::lit(DELTA));
    let mut trust_phase = true;
    let mut converged = false;
    while simplex.points.len() == m + 1 && !ev.exhausted() {
        simplex.update_pole();
        let geo = simplex.geometry();
        let (par_sigma, par_eta) = (alpha * rho, beta * rho);
        let acceptable = geo.inverse.is_some()
            && geo.sigma.iter().all(|s| *s >= par_sigma)
            && geo.eta.iter().all(|e| *e <= par_eta);
        let f_pole = simplex.values[simplex.pole];
        let pole = simplex.points[simplex.pole].clone();
        let diffs: Vec<T> = geo.others.iter().map(|&i| simplex.values[i] - f_pole).collect();

        if !trust_phase && !acceptable {
            // Replace the vertex that spoils the geometry most: longest edge first,
            // otherwise the one closest to its opposite face.
            let mut drop = None;
            let mut worst = par_eta;
            for (k, e) in geo.eta.iter().enumerate() {
                if *e > worst {
                    worst = *e;
                    drop = Some(k);
                }
            }
            if drop.is_none() {
                let mut worst = par_sigma;
                for (k, s) in geo.sigma.iter().enumerate() {
                    if *s < worst {
                        worst = *s;
                        drop = Some(k);
                    }
                }
            }
            let k = drop.unwrap_or(0);
            let mut step: Vec<T> = match &geo.inverse {
                Some(rows) => rows[k].iter().map(|v| gamma * rho * geo.sigma[k] * *v).collect(),
                // Degenerate simplex: move the vertex back onto an axis around the pole.
                None => {
                    let mut s = vec![T::zero(); m];
                    s[k] = gamma * rho;
                    s
                }
            };
            if let Some(rows) = &geo.inverse {
                let gradient: Vec<T> = (0..m)
                    .map(|i| rows.iter().zip(&diffs).map(|(r, d)| r[i] * *d).sum())
                    .collect();
                if dot(&gradient, &step) > T::zero() {
                    step.iter_mut().for_each(|s| *s = -*s);
                }
            }
            let x: Vec<T> = pole.iter().zip(&step).map(|(a, b)| *a + *b).collect();
            let f = ev.eval(&x);
            let idx = geo.others[k];
            simplex.points[idx] = x;
            simplex.values[idx] = f;
            continue;
        }

        trust_phase = true;
        let mut improved = false;
        if let Some(rows) = &geo.inverse {
            // Linear model gradient g solves edges · g = diffs.
            let gradient: Vec<T> = (0..m)
                .map(|i| rows.iter().zip(&diffs).map(|(r, d)| r[i] * *d).sum())
                .collect();
            let gnorm = norm(&gradient);
            if gnorm > T::zero() && gnorm.is_finite() {
                let step: Vec<T> = gradient.iter().map(|g| -rho * *g / gnorm).collect();
                let predicted = rho * gnorm;
                let x: Vec<T> = pole.iter().zip(&step).map(|(a, b)| *a + *b).collect();
                let f = ev.eval(&x);
                let reduction = f_pole - f;

                // Choose the vertex the new point replaces.
                let mut drop = None;
                let mut best_coord = if reduction > T::zero() { T::zero() } else { T::one() };
                let mut sigbar = Vec::with_capacity(m);
                for (k, row) in rows.iter().enumerate() {
                    let coord = dot(row, &step).abs();
                    if coord > best_coord {
                        best_coord = coord;
                        drop = Some(k);
                    }
                    sigbar.push(coord * geo.sigma[k]);
                }
                let mut edge_max = delta * rho;
                let mut far = None;
                for k in 0..m {
                    if sigbar[k] >= par_sigma || sigbar[k] >= geo.sigma[k] {
                        let dist = if reduction > T::zero() {
                            norm(
                                &step
                                    .iter()
                                    .zip(&geo.edges[k])
                                    .map(|(s, e)| *s - *e)
                                    .collect::<Vec<T>>(),
                            )
                        } else {
                            geo.eta[k]
                        };
                        if dist > edge_max {
                            edge_max = dist;
                            far = Some(k);
                        }
                    }
                }
                if far.is_some() {
                    drop = far;
                }
                if let Some(k) = drop {
                    let idx = geo.others[k];
                    simplex.points[idx] = x;
                    simplex.values[idx] = f;
                }
                improved = reduction > T::zero() && reduction >= T::lit(0.1) * predicted;
            }
        }
        if improved {
            continue;
        }
        if !acceptable {
            trust_phase = false;
            continue;
        }
        if rho > rho_end {
            rho *= T::lit(0.5);
            if rho <= T::lit(1.5) * rho_end {
                rho = rho_end;
            }
            continue;
        }
        converged = true;
        break;
    }

    simplex.update_pole();
    Ok(OptimizeResult {
        x: simplex.points[simplex.pole].clone(),
        fun: simplex.values[simplex.pole],
        evaluations: ev.count,
        trace: ev.trace,
        budget_exhausted: !converged,
    })
}
