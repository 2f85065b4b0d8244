//! Deterministic low-discrepancy point sets on spheres, projective spaces
//! and balls.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;

use crate::subspace::canonical_ray;

/// Additive recurrence `frac(0.5 + (i + 1)·α_j)` with the generalized golden
/// ratios `α_j = φ_k^{−(j+1)}`, `φ_k` the positive root of `x^{k+1} = x + 1`.
pub fn kronecker(k: usize, n: usize) -> Vec<Vec<f64>> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (k as f64 + 1.0));
    }
    let alpha: Vec<f64> = (0..k).map(|j| phi.powi(-(j as i32 + 1))).collect();
    (0..n).map(|i| alpha.iter().map(|a| (0.5 + (i as f64 + 1.0) * a).fract()).collect()).collect()
}

/// `n` Fibonacci-lattice points on `S²`.
pub fn fibonacci_sphere(n: usize) -> Vec<DVector<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            DVector::from_vec(vec![r * t.cos(), r * t.sin(), z])
        })
        .collect()
}

/// `n` well-spread unit vectors in `R^d`: equally spaced on the circle for
/// `d = 2`, the Fibonacci lattice for `d = 3`, and Box–Muller images of a
/// Kronecker sequence otherwise.
pub fn sphere_points(d: usize, n: usize) -> Vec<DVector<f64>> {
    match d {
        0 => Vec::new(),
        1 => (0..n).map(|i| DVector::from_element(1, if i % 2 == 0 { 1.0 } else { -1.0 })).collect(),
        2 => (0..n)
            .map(|i| {
                let t = TAU * (i as f64 + 0.5) / n as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 => fibonacci_sphere(n),
        _ => {
            let pairs = d.div_ceil(2);
            kronecker(2 * pairs, n)
                .into_iter()
                .map(|u| {
                    let mut g = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let r = (-2.0 * (1.0 - u[2 * p]).ln()).sqrt();
                        let t = TAU * u[2 * p + 1];
                        g.push(r * t.cos());
                        g.push(r * t.sin());
                    }
                    g.truncate(d);
                    let v = DVector::from_vec(g);
                    let norm = v.norm();
                    v / norm
                })
                .collect()
        }
    }
}

/// About `n` points of `P^{d−1}`, as canonical unit representatives.
///
/// For `d = 3` this is the upper half of a `2n`-point Fibonacci lattice, so
/// every antipodal pair is represented once.
pub fn projective_grid(d: usize, n: usize) -> Vec<DVector<f64>> {
    match d {
        2 => (0..n)
            .map(|i| {
                let t = PI * (i as f64 + 0.5) / n as f64;
                canonical_ray(&DVector::from_vec(vec![t.cos(), t.sin()]))
            })
            .collect(),
        3 => fibonacci_sphere(2 * n).into_iter().filter(|p| p[2] > 0.0).map(|p| canonical_ray(&p)).collect(),
        _ => sphere_points(d, n).iter().map(canonical_ray).collect(),
    }
}

/// `n` points of the closed unit ball of `R^k` (Kronecker points of the
/// cube kept when inside the ball).
pub fn ball_points(k: usize, n: usize) -> Vec<Vec<f64>> {
    if k == 0 {
        return vec![Vec::new(); n.min(1)];
    }
    let mut out = Vec::with_capacity(n);
    let mut batch = n.max(8);
    while out.len() < n {
        out.clear();
        for u in kronecker(k, batch) {
            let p: Vec<f64> = u.iter().map(|x| 2.0 * x - 1.0).collect();
            if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                out.push(p);
                if out.len() == n {
                    break;
                }
            }
        }
        batch *= 2;
    }
    out
}
