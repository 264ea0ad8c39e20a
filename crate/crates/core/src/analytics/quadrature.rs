//! Small deterministic quadrature kit used by the exact formulas: adaptive
//! Simpson for possibly kinked 1-D integrands and Gauss–Legendre rules with
//! cached nodes for smooth ones.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance
/// `tol`, with a recursion depth cap. Robust for piecewise-smooth integrands
/// (covariograms have kinks at support boundaries).
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, cached per order.
pub fn gauss_legendre_unit(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(order)
        .or_insert_with(|| Arc::new(compute_gauss_legendre(order)))
        .clone()
}

/// Gauss–Legendre nodes and weights transformed to `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let unit = gauss_legendre_unit(order);
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = unit.0.iter().map(|x| mid + c * x).collect();
    let weights = unit.1.iter().map(|w| w * c).collect();
    (nodes, weights)
}

/// Integrate a smooth function on `[a, b]` with a fixed-order Gauss rule.
pub fn gauss_integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let unit = gauss_legendre_unit(order);
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    unit.0
        .iter()
        .zip(&unit.1)
        .map(|(x, w)| w * c * f(mid + c * x))
        .sum()
}

/// Newton iteration on the Legendre polynomial `P_n`, seeded by the Chebyshev
/// angle approximation of the roots.
fn compute_gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
        if n % 2 == 1 && i == n / 2 {
            nodes[i] = 0.0;
        }
    }
    (nodes, weights)
}

/// Iterated adaptive Simpson over an axis-aligned box in one to three
/// dimensions. Inner integrals run at a tighter tolerance so the outer
/// integrand stays smooth enough to resolve; like the 1-D rule this is
/// robust for piecewise-smooth integrands with kinks or jumps off any grid.
pub fn box_integral(
    f: &impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    max_depth: u32,
) -> f64 {
    let dim = lo.len();
    assert_eq!(dim, hi.len());
    assert!((1..=3).contains(&dim), "box rule supports 1-3 dimensions");
    match dim {
        1 => adaptive_simpson(&|x| f(&[x]), lo[0], hi[0], tol, max_depth),
        2 => adaptive_simpson(
            &|x| adaptive_simpson(&|y| f(&[x, y]), lo[1], hi[1], tol * 1e-2, max_depth),
            lo[0],
            hi[0],
            tol,
            max_depth,
        ),
        _ => adaptive_simpson(
            &|x| {
                adaptive_simpson(
                    &|y| adaptive_simpson(&|z| f(&[x, y, z]), lo[2], hi[2], tol * 1e-4, max_depth),
                    lo[1],
                    hi[1],
                    tol * 1e-2,
                    max_depth,
                )
            },
            lo[0],
            hi[0],
            tol,
            max_depth,
        ),
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
