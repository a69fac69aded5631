//! Gauss-Legendre rules mapped to `[0, 1]`, the unit square and the 2-simplex.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Nodes and weights on `[0, 1]`; nodes ascending, weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitRule {
    pub fn gauss_legendre(q: usize) -> Self {
        let q = NonZeroUsize::new(q.max(1)).expect("nonzero");
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(q)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// `panels` equal sub-intervals, each carrying a `q`-point rule.
    pub fn composite(q: usize, panels: usize) -> Self {
        let base = Self::gauss_legendre(q);
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(q * panels);
        let mut weights = Vec::with_capacity(q * panels);
        for p in 0..panels {
            for (x, w) in base.iter() {
                nodes.push((p as f64 + x) * h);
                weights.push(w * h);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Points `(s1, s2)` of the simplex `{s1, s2 >= 0, s1 + s2 <= 1}` with
/// weights summing to 1 (the uniform probability measure), built from the
/// Duffy map `s1 = u (1 - v)`, `s2 = u v` with Jacobian `u`.
pub fn simplex_rule(q: usize) -> Vec<([f64; 2], f64)> {
    let r = UnitRule::gauss_legendre(q);
    let mut out = Vec::with_capacity(q * q);
    for (u, wu) in r.iter() {
        for (v, wv) in r.iter() {
            out.push(([u * (1.0 - v), u * v], 2.0 * u * wu * wv));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let r = UnitRule::gauss_legendre(8);
        let s: f64 = r.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-15);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn composite_matches_integral() {
        let r = UnitRule::composite(6, 5);
        let s: f64 = r.iter().map(|(x, w)| w * (3.0 * x).exp()).sum();
        assert!((s - (3f64.exp() - 1.0) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_moments() {
        let rule = simplex_rule(10);
        let total: f64 = rule.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // E[s1^2 s2] on the uniform simplex = 2 * 2! 1! / 5! = 1/30.
        let m: f64 = rule.iter().map(|(p, w)| w * p[0] * p[0] * p[1]).sum();
        assert!((m - 1.0 / 30.0).abs() < 1e-14);
    }
}
