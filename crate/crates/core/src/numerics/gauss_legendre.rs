//! Gauss-Legendre rules on [0, 1], computed by Newton iteration on the
//! Legendre recurrence.

use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map from [-1, 1] to [0, 1].
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(P_n(x), P_n'(x))`
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rules for the sizes used by the tensor-product averages.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static GL64: OnceLock<GaussLegendre> = OnceLock::new();
    static GL128: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        64 => GL64.get_or_init(|| GaussLegendre::new(64)),
        128 => GL128.get_or_init(|| GaussLegendre::new(128)),
        _ => Box::leak(Box::new(GaussLegendre::new(n))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_nodes_are_ordered() {
        for n in [1, 2, 7, 64, 128] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "n={n}: {s}");
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(gl.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let gl = GaussLegendre::new(10);
        let approx: f64 = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(x, w)| w * x.powi(19))
            .sum();
        assert!((approx - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrand_converges() {
        let gl = gauss_legendre(64);
        let approx: f64 = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(x, w)| w * (3.0 * x).exp())
            .sum();
        let exact = ((3.0f64).exp() - 1.0) / 3.0;
        assert!((approx - exact).abs() < 1e-13);
    }
}
