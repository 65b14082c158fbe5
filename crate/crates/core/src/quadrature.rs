//! Gauss rules on the unit interval and collapsed (Duffy) rules on triangles.

use std::f64::consts::PI;

/// Gauss-Legendre points and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "need at least one Gauss point");
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        rule.push((0.5 * (1.0 - t), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

// P_n(t) and P_n'(t) by the three-term recurrence
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Quadrature points `(x, y, weight)` covering triangle `abc`.
///
/// The triangle is split into `4^subdivisions` congruent pieces, each
/// integrated with an `order × order` collapsed Gauss rule.
pub fn triangle_rule(
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    order: usize,
    subdivisions: u32,
) -> Vec<[f64; 3]> {
    let line = gauss_legendre(order);
    let mut out = Vec::new();
    let mut stack = vec![(a, b, c, subdivisions)];
    while let Some((a, b, c, level)) = stack.pop() {
        if level > 0 {
            let ab = midpoint(a, b);
            let bc = midpoint(b, c);
            let ca = midpoint(c, a);
            stack.push((a, ab, ca, level - 1));
            stack.push((ab, b, bc, level - 1));
            stack.push((ca, bc, c, level - 1));
            stack.push((ab, bc, ca, level - 1));
            continue;
        }
        let area2 = ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
        for &(s, ws) in &line {
            for &(t, wt) in &line {
                // x = a + s (b - a) + s t (c - b), |J| = 2·area·s
                let x = a[0] + s * (b[0] - a[0]) + s * t * (c[0] - b[0]);
                let y = a[1] + s * (b[1] - a[1]) + s * t * (c[1] - b[1]);
                out.push([x, y, ws * wt * area2 * s]);
            }
        }
    }
    out
}

fn midpoint(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}
