//! Gauss-Legendre panels along the line `Im ν = η`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub(crate) struct GaussLegendre {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GaussLegendre {
    pub(crate) fn new(order: usize) -> Self {
        let mut x = vec![0.0; order];
        let mut w = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut t = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, t);
                dp = d;
                let step = p / d;
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, t);
            if d != 0.0 {
                dp = d;
            }
            let wi = 2.0 / ((1.0 - t * t) * dp * dp);
            x[i] = -t;
            x[order - 1 - i] = t;
            w[i] = wi;
            w[order - 1 - i] = wi;
        }
        Self { x, w }
    }
}

/// `(P_n(t), P_n'(t))` by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (t * p1 - p0) / (t * t - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
}

/// Splits `[a, b]` into panels no wider than `width(x)` at their left end.
pub(crate) fn graded(a: f64, b: f64, width: impl Fn(f64) -> f64) -> Vec<Panel> {
    let mut out = Vec::new();
    let mut x = a;
    while x < b {
        let h = width(x);
        let mut next = x + h;
        // absorb a sliver rather than leave a tiny last panel
        if next > b - 0.25 * h {
            next = b;
        }
        out.push(Panel { a: x, b: next });
        x = next;
    }
    out
}

/// Halves any panel wider than twice its distance to one of `poles`.
pub(crate) fn refine_near_poles(panels: Vec<Panel>, poles: &[(f64, f64)]) -> Vec<Panel> {
    let mut out = Vec::with_capacity(panels.len());
    let mut stack: Vec<(Panel, u32)> = panels.into_iter().rev().map(|p| (p, 0)).collect();
    while let Some((p, depth)) = stack.pop() {
        let dist = poles
            .iter()
            .map(|&(re, dy)| {
                let dx = (p.a - re).max(re - p.b).max(0.0);
                dx.hypot(dy)
            })
            .fold(f64::INFINITY, f64::min);
        if p.b - p.a > 2.0 * dist && depth < 48 {
            let mid = 0.5 * (p.a + p.b);
            stack.push((Panel { a: mid, b: p.b }, depth + 1));
            stack.push((Panel { a: p.a, b: mid }, depth + 1));
        } else {
            out.push(p);
        }
    }
    out
}
