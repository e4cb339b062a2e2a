//! Gauss–Legendre rules computed by Newton iteration on `P_n`.

use rayon::prelude::*;

use crate::energy::KahanSum;

/// Nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule of order `n` on `[u0, u1] x [v0, v1]`. Rows are
/// evaluated in parallel and reduced in order.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64 + Sync,
    (u0, u1): (f64, f64),
    (v0, v1): (f64, f64),
    n: usize,
) -> f64 {
    let (x, w) = gauss_legendre(n);
    let (hu, cu) = (0.5 * (u1 - u0), 0.5 * (u1 + u0));
    let (hv, cv) = (0.5 * (v1 - v0), 0.5 * (v1 + v0));
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = cu + hu * x[i];
            (0..n)
                .map(|j| w[j] * f(u, cv + hv * x[j]))
                .collect::<KahanSum>()
                .total()
                * w[i]
        })
        .collect();
    rows.into_iter().collect::<KahanSum>().total() * hu * hv
}

/// One-dimensional rule of order `n` on `[a, b]`.
pub fn integrate_1d(f: impl Fn(f64) -> f64, (a, b): (f64, f64), n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| wi * f(c + h * xi))
        .collect::<KahanSum>()
        .total()
        * h
}
