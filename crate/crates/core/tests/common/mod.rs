//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use reef_sonify::clustering::ClusterLabels;

/// Connected components of the graph with an edge wherever two points are
/// within `eps` of each other. Singletons come back as `None`.
pub fn union_find_labels(points: &[(f64, f64)], eps: f64) -> Vec<Option<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1);
            if d <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut size = HashMap::new();
    for &r in &roots {
        *size.entry(r).or_insert(0usize) += 1;
    }
    roots.iter().map(|r| (size[r] > 1).then_some(*r)).collect()
}

/// Relabels by first appearance so two labelings of the same partition compare equal.
pub fn canonical(labels: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            l.map(|l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
        })
        .collect()
}

pub fn same_partition(a: &ClusterLabels, oracle: &[Option<usize>]) -> bool {
    canonical(&a.labels) == canonical(oracle)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `(azimuth, elevation, weight)` with weights summing to 4π.
pub fn sphere_quadrature(n_lat: usize, n_az: usize) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(n_lat * n_az);
    for (z, w) in gauss_legendre(n_lat) {
        let el = z.asin();
        for k in 0..n_az {
            let az = -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / n_az as f64;
            out.push((az, el, w * std::f64::consts::TAU / n_az as f64));
        }
    }
    out
}

/// Magnitude spectrum of a Hann-windowed real signal.
pub fn magnitude_spectrum(x: &[f32]) -> Vec<f64> {
    use rustfft::{num_complex::Complex, FftPlanner};
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos();
            Complex::new(v as f64 * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm()).collect()
}
