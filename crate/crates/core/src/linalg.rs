//! Small sparse nonnegative-matrix kernels shared by `transfer`, `survival`
//! and `thermo`.

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

/// Row-major sparse matrix. Row `i` lists `(column, value)` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(rows.len(), dim);
        Self { dim, rows }
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Self::new(dense.len(), rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .filter(|(c, _)| *c == j)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|(_, v)| *v == 0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[i][j] += v;
            }
        }
        out
    }

    /// `A x`
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `Aᵀ x`
    pub fn mul_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for &(j, v) in row {
                out[j] += v * xi;
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v));
            }
        }
        SparseMatrix::new(self.dim, rows)
    }
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Outcome of a power iteration on a nonnegative operator.
#[derive(Clone, Debug)]
pub struct PowerResult {
    pub eigenvalue: f64,
    /// Sup-norm normalized eigenvector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PowerFailure {
    /// The iterate collapsed to the zero vector (nilpotent on the start vector).
    Vanished,
    NotConverged { residual: f64, iterations: usize },
}

/// Power iteration `v ← Av / ‖Av‖∞` started from the all-ones vector.
///
/// Convergence needs the Cauchy difference of the eigenvalue estimate and the
/// residual `‖Av − λv‖∞` both below `tol·max(λ, 1e-300)`.
pub fn power_iteration<F>(
    apply: F,
    dim: usize,
    shift: f64,
    tol: f64,
    maxit: usize,
) -> Result<PowerResult, PowerFailure>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut v = vec![1.0; dim];
    let mut lambda_prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=maxit {
        let mut w = apply(&v);
        if shift != 0.0 {
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi += shift * vi;
            }
        }
        let norm = sup_norm(&w);
        if norm == 0.0 || !norm.is_finite() {
            return Err(PowerFailure::Vanished);
        }
        let lambda = norm;
        residual = w
            .iter()
            .zip(&v)
            .fold(0.0f64, |m, (wi, vi)| m.max((wi - lambda * vi).abs()));
        for wi in w.iter_mut() {
            *wi /= norm;
        }
        let scale = lambda.max(1e-300);
        let cauchy = (lambda - lambda_prev).abs();
        v = w;
        if cauchy <= tol * scale && residual <= tol * scale {
            return Ok(PowerResult {
                eigenvalue: lambda - shift,
                vector: v,
                iterations: it,
                residual,
            });
        }
        lambda_prev = lambda;
    }
    Err(PowerFailure::NotConverged {
        residual,
        iterations: maxit,
    })
}

/// Spectral radius of a nonnegative matrix: the largest Perron root over its
/// strongly connected components. Each component is iterated as `B + I`,
/// which is primitive, so the power iteration converges geometrically even
/// for periodic or reducible input.
pub fn spectral_radius(a: &SparseMatrix, tol: f64, maxit: usize) -> f64 {
    if a.dim() == 0 || a.is_zero() {
        return 0.0;
    }
    strongly_connected_components(a)
        .into_iter()
        .map(|comp| component_radius(a, &comp, tol, maxit))
        .fold(0.0, f64::max)
}

fn component_radius(a: &SparseMatrix, comp: &[usize], tol: f64, maxit: usize) -> f64 {
    let mut local = vec![usize::MAX; a.dim()];
    for (k, &i) in comp.iter().enumerate() {
        local[i] = k;
    }
    let rows: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&i| {
            a.row(i)
                .iter()
                .filter(|(j, v)| local[*j] != usize::MAX && *v != 0.0)
                .map(|&(j, v)| (local[j], v))
                .collect()
        })
        .collect();
    if rows.iter().all(Vec::is_empty) {
        return 0.0;
    }
    let b = SparseMatrix::new(comp.len(), rows);
    match power_iteration(|x| b.mul(x), b.dim(), 1.0, tol, maxit) {
        Ok(r) => r.eigenvalue.max(0.0),
        Err(_) => power_iteration(|x| b.mul(x), b.dim(), 1.0, tol.max(1e-9), maxit)
            .map(|r| r.eigenvalue.max(0.0))
            .unwrap_or_else(|_| growth_rate(&b, maxit.min(20_000))),
    }
}

/// Strongly connected components of the nonzero pattern.
pub fn strongly_connected_components(a: &SparseMatrix) -> Vec<Vec<usize>> {
    let edges = a
        .rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().filter(|e| e.1 != 0.0).map(move |&(j, _)| (i as u32, j as u32)));
    let mut g = DiGraphMap::<u32, ()>::from_edges(edges);
    for i in 0..a.dim() as u32 {
        g.add_node(i);
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|v| v as usize).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

/// Gelfand-type estimate `(‖Aᵏ⁺ᵐx‖ / ‖Aᵐx‖)^{1/k}`, a last resort when the
/// power iteration stalls.
fn growth_rate(a: &SparseMatrix, steps: usize) -> f64 {
    let n = a.dim();
    let mut x = vec![1.0; n];
    let half = steps / 2;
    let mut log_norm = 0.0;
    let mut at_half = 0.0;
    for k in 0..steps {
        x = a.mul(&x);
        let s = sup_norm(&x);
        if s == 0.0 {
            return 0.0;
        }
        log_norm += s.ln();
        x.iter_mut().for_each(|v| *v /= s);
        if k + 1 == half {
            at_half = log_norm;
        }
    }
    ((log_norm - at_half) / (steps - half) as f64).exp()
}

/// Modulus of the subdominant eigenvalue, estimated by power iteration on the
/// Wielandt-deflated matrix `A − λ v uᵀ / (uᵀ v)` where `Av = λv`, `uᵀA = λuᵀ`.
pub fn subdominant_modulus(
    a: &SparseMatrix,
    lambda: f64,
    right: &[f64],
    left: &[f64],
    steps: usize,
) -> f64 {
    let n = a.dim();
    let uv: f64 = left.iter().zip(right).map(|(u, v)| u * v).sum();
    if n <= 1 || uv <= 0.0 {
        return 0.0;
    }
    let deflate = |x: &[f64]| {
        let mut y = a.mul(x);
        let c = lambda * left.iter().zip(x).map(|(u, xi)| u * xi).sum::<f64>() / uv;
        for (yi, vi) in y.iter_mut().zip(right) {
            *yi -= c * vi;
        }
        y
    };
    // deterministic, generic start vector
    let mut x: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 1.0) * 0.754_877_666).fract() - 0.5)
        .collect();
    let n0 = sup_norm(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let mut logs = Vec::with_capacity(steps);
    for _ in 0..steps {
        let y = deflate(&x);
        let norm = sup_norm(&y);
        if norm <= 1e-13 * lambda.max(1e-300) {
            return 0.0;
        }
        logs.push(norm.ln());
        x = y.into_iter().map(|v| v / norm).collect();
    }
    let tail = &logs[logs.len() / 2..];
    (tail.iter().sum::<f64>() / tail.len() as f64).exp()
}
