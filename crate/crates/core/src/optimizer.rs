//! Budgeted Nelder-Mead minimization with dimension-adaptive coefficients.
//!
//! Coefficients follow Gao & Han, "Implementing the Nelder-Mead simplex
//! algorithm with adaptive parameters" (2012). The search never returns a
//! point worse than its start: the result is the best point ever evaluated,
//! not the best vertex of the final simplex.

use crate::error::{OdroError, Result};

/// Something Nelder-Mead can minimize. Implementations count every call to
/// `evaluate` and remember the best point seen.
pub trait CostFunction {
    fn evaluate(&mut self, x: &[f64]) -> f64;

    fn eval_count(&self) -> usize;

    fn best_seen(&self) -> Option<(&[f64], f64)>;
}

/// Evaluation counter plus running minimum, shared by cost function impls.
#[derive(Debug, Clone, Default)]
pub struct EvalTracker {
    count: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl EvalTracker {
    pub fn record(&mut self, x: &[f64], f: f64) {
        self.count += 1;
        let f = sanitize(f);
        match &mut self.best {
            Some((bx, bf)) if f < *bf => {
                bx.clear();
                bx.extend_from_slice(x);
                *bf = f;
            }
            Some(_) => {}
            None => self.best = Some((x.to_vec(), f)),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn best(&self) -> Option<(&[f64], f64)> {
        self.best.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }
}

/// Wraps a closure as a [`CostFunction`].
pub struct FnObjective<F> {
    f: F,
    tracker: EvalTracker,
}

impl<F: FnMut(&[f64]) -> f64> FnObjective<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            tracker: EvalTracker::default(),
        }
    }
}

impl<F: FnMut(&[f64]) -> f64> CostFunction for FnObjective<F> {
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        let v = sanitize((self.f)(x));
        self.tracker.record(x, v);
        v
    }

    fn eval_count(&self) -> usize {
        self.tracker.count()
    }

    fn best_seen(&self) -> Option<(&[f64], f64)> {
        self.tracker.best()
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Reflection, expansion, contraction and shrink coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmParams {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

/// `(1, 1 + 2/n, 3/4 − 1/(2n), 1 − 1/n)`, with the shrink factor clamped to
/// 1/2 in one dimension.
pub fn adaptive_params(dim: usize) -> NmParams {
    let n = dim.max(1) as f64;
    let shrink = if dim <= 1 { 0.5 } else { 1.0 - 1.0 / n };
    NmParams {
        reflection: 1.0,
        expansion: 1.0 + 2.0 / n,
        contraction: 0.75 - 1.0 / (2.0 * n),
        shrink,
    }
}

/// Vertices of the starting simplex.
///
/// Vertex 0 is `xi0`; vertex `i + 1` moves coordinate `i` away from zero by
/// `relative_step · max(|xi0ᵢ|, guards[i], floor)` (upward when `xi0ᵢ = 0`).
pub fn initial_simplex(
    xi0: &[f64],
    guards: &[f64],
    relative_step: f64,
    floor: f64,
) -> Vec<Vec<f64>> {
    let mut vertices = Vec::with_capacity(xi0.len() + 1);
    vertices.push(xi0.to_vec());
    for i in 0..xi0.len() {
        let guard = guards.get(i).copied().unwrap_or(0.0);
        let h = relative_step * xi0[i].abs().max(guard).max(floor);
        let mut v = xi0.to_vec();
        v[i] += if xi0[i] < 0.0 { -h } else { h };
        vertices.push(v);
    }
    vertices
}

/// `dim + 1` vertices with their objective values, kept sorted ascending.
#[derive(Debug, Clone)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>, values: Vec<f64>) -> Self {
        debug_assert_eq!(vertices.len(), values.len());
        let mut s = Self { vertices, values };
        s.sort();
        s
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stable sort by value; ties keep their previous order.
    pub fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    fn spread(&self) -> f64 {
        self.values[self.dim()] - self.values[0]
    }

    fn diameter(&self) -> f64 {
        let best = &self.vertices[0];
        self.vertices[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Centroid of every vertex except the worst.
    fn centroid(&self) -> Vec<f64> {
        let d = self.dim();
        let mut c = vec![0.0; d];
        for v in &self.vertices[..d] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        c.iter_mut().for_each(|ci| *ci /= d as f64);
        c
    }

    fn replace_worst(&mut self, x: Vec<f64>, f: f64) {
        let d = self.dim();
        self.vertices[d] = x;
        self.values[d] = f;
    }
}

/// Along-ray point `from + t·(to − from)`.
fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    BudgetExhausted,
    ValueSpread,
    SimplexDiameter,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub xi: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub termination: Termination,
}

/// Initial simplex shape used by [`minimize`].
#[derive(Debug, Clone)]
pub struct SimplexScale {
    pub relative_step: f64,
    pub guards: Vec<f64>,
    pub floor: f64,
}

impl Default for SimplexScale {
    fn default() -> Self {
        Self {
            relative_step: 0.2,
            guards: Vec::new(),
            floor: 1e-8,
        }
    }
}

const SPREAD_TOL: f64 = 1e-15;
const DIAMETER_TOL: f64 = 1e-14;

/// Minimizes `obj` from `xi0` using at most `budget` evaluations.
///
/// Stops on budget exhaustion, a value spread below `1e-15·(1 + |f_best|)`,
/// or a simplex diameter below `1e-14·(1 + ‖x_best‖)`. Returns the best point
/// evaluated during this call, so `value ≤ f(xi0)` always holds.
pub fn minimize<C: CostFunction + ?Sized>(
    obj: &mut C,
    xi0: &[f64],
    budget: usize,
    scale: &SimplexScale,
) -> Result<Minimum> {
    let dim = xi0.len();
    if dim == 0 {
        return Err(OdroError::Config(
            "cannot minimize over zero coefficients".into(),
        ));
    }
    if budget < dim + 2 {
        return Err(OdroError::Config(format!(
            "evaluation budget {budget} is below dim + 2 = {}",
            dim + 2
        )));
    }
    let params = adaptive_params(dim);
    let start = obj.eval_count();
    let used = |obj: &C| obj.eval_count() - start;

    // local best, independent of anything the objective saw before this call
    let mut best: (Vec<f64>, f64) = (xi0.to_vec(), f64::INFINITY);
    let eval = |obj: &mut C, x: &[f64], best: &mut (Vec<f64>, f64)| {
        let f = sanitize(obj.evaluate(x));
        if f < best.1 {
            best.0.clear();
            best.0.extend_from_slice(x);
            best.1 = f;
        }
        f
    };

    let vertices = initial_simplex(xi0, &scale.guards, scale.relative_step, scale.floor);
    let values: Vec<f64> = vertices.iter().map(|v| eval(obj, v, &mut best)).collect();
    let mut simplex = Simplex::new(vertices, values);

    let termination = loop {
        simplex.sort();
        if used(obj) >= budget {
            break Termination::BudgetExhausted;
        }
        let f_best = simplex.values[0];
        if simplex.spread() < SPREAD_TOL * (1.0 + f_best.abs()) {
            break Termination::ValueSpread;
        }
        let x_norm = simplex.vertices[0]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        if simplex.diameter() < DIAMETER_TOL * (1.0 + x_norm) {
            break Termination::SimplexDiameter;
        }

        let d = simplex.dim();
        let centroid = simplex.centroid();
        let worst = simplex.vertices[d].clone();
        let f_worst = simplex.values[d];
        let f_second = simplex.values[d - 1];

        let xr = lerp(&centroid, &worst, -params.reflection);
        let fr = eval(obj, &xr, &mut best);

        if fr < f_best {
            if used(obj) >= budget {
                simplex.replace_worst(xr, fr);
                continue;
            }
            let xe = lerp(&centroid, &xr, params.expansion);
            let fe = eval(obj, &xe, &mut best);
            if fe < fr {
                simplex.replace_worst(xe, fe);
            } else {
                simplex.replace_worst(xr, fr);
            }
            continue;
        }
        if fr < f_second {
            simplex.replace_worst(xr, fr);
            continue;
        }
        if used(obj) >= budget {
            continue;
        }
        if fr < f_worst {
            let xc = lerp(&centroid, &xr, params.contraction);
            let fc = eval(obj, &xc, &mut best);
            if fc <= fr {
                simplex.replace_worst(xc, fc);
                continue;
            }
        } else {
            let xc = lerp(&centroid, &worst, params.contraction);
            let fc = eval(obj, &xc, &mut best);
            if fc < f_worst {
                simplex.replace_worst(xc, fc);
                continue;
            }
        }

        // shrink toward the best vertex; vertices are only moved once evaluated
        let anchor = simplex.vertices[0].clone();
        for i in 1..=d {
            if used(obj) >= budget {
                break;
            }
            let x = lerp(&anchor, &simplex.vertices[i], params.shrink);
            let f = eval(obj, &x, &mut best);
            simplex.vertices[i] = x;
            simplex.values[i] = f;
        }
    };

    Ok(Minimum {
        xi: best.0,
        value: best.1,
        evaluations: used(obj),
        termination,
    })
}
