//! Gauss–Legendre rules and barycentric Lagrange interpolation on them.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes per boundary panel.
pub const PANEL_ORDER: usize = 16;

/// A Gauss–Legendre rule on [−1, 1] together with barycentric weights for
/// interpolating through its nodes.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub bary: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let bary = barycentric_weights(&nodes);
        GaussRule { nodes, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values of all Lagrange basis polynomials at `t` ∈ [−1, 1].
    pub fn lagrange(&self, t: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        let mut denom = 0.0;
        for j in 0..n {
            let d = t - self.nodes[j];
            if d == 0.0 {
                out[..n].iter_mut().for_each(|o| *o = 0.0);
                out[j] = 1.0;
                return;
            }
            out[j] = self.bary[j] / d;
            denom += out[j];
        }
        for o in out[..n].iter_mut() {
            *o /= denom;
        }
    }
}

/// The shared 16-point rule used for panels.
pub fn panel_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(PANEL_ORDER))
}

/// Gauss–Legendre nodes (ascending) and weights on [−1, 1], by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut b = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                b[j] /= x[j] - x[k];
            }
        }
    }
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    b.iter().map(|v| v / scale).collect()
}

/// Composite Gauss–Legendre rule over [a, b] with `panels` equal pieces.
pub fn composite(a: f64, b: f64, panels: usize, rule: &GaussRule) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / panels as f64;
    let mut t = Vec::with_capacity(panels * rule.len());
    let mut w = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            t.push(lo + 0.5 * h * (x + 1.0));
            w.push(0.5 * h * wt);
        }
    }
    (t, w)
}
