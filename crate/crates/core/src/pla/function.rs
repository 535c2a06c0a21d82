use serde::{Deserialize, Serialize};

/// `h(x - η) = max(x - η, 0)`
#[inline]
pub fn hinge(x: f64, threshold: f64) -> f64 {
    (x - threshold).max(0.0)
}

/// `h^r(x - η) = -min(x - η, 0) = max(η - x, 0)`
#[inline]
pub fn reverse_hinge(x: f64, threshold: f64) -> f64 {
    (threshold - x).max(0.0)
}

/// One boosting increment: a constant plus weighted hinge and reverse-hinge
/// terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PiecewiseLinearFn {
    pub intercept: f64,
    /// `(threshold, weight)` pairs for `max(x - η, 0)`.
    pub hinge_terms: Vec<(f64, f64)>,
    /// `(threshold, weight)` pairs for `max(η - x, 0)`.
    pub rhinge_terms: Vec<(f64, f64)>,
}

impl PiecewiseLinearFn {
    pub fn constant(c: f64) -> Self {
        Self {
            intercept: c,
            ..Default::default()
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let mut y = self.intercept;
        for &(eta, phi) in &self.hinge_terms {
            y += phi * hinge(x, eta);
        }
        for &(eta, phi) in &self.rhinge_terms {
            y += phi * reverse_hinge(x, eta);
        }
        y
    }

    pub fn term_count(&self) -> usize {
        self.hinge_terms.len() + self.rhinge_terms.len()
    }

    /// Knot locations, sorted and deduplicated.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self
            .hinge_terms
            .iter()
            .chain(&self.rhinge_terms)
            .map(|t| t.0)
            .collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    pub fn is_zero(&self) -> bool {
        self.intercept == 0.0
            && self
                .hinge_terms
                .iter()
                .chain(&self.rhinge_terms)
                .all(|t| t.1 == 0.0)
    }
}

pub fn evaluate_pla(g: &PiecewiseLinearFn, x: f64) -> f64 {
    g.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_definition() {
        let g = PiecewiseLinearFn {
            intercept: 0.0,
            hinge_terms: vec![(0.0, 1.0)],
            rhinge_terms: vec![],
        };
        assert_eq!(g.evaluate(2.0), 2.0);
        assert_eq!(g.evaluate(-1.0), 0.0);
    }

    #[test]
    fn reverse_hinge_definition() {
        let g = PiecewiseLinearFn {
            intercept: 0.0,
            hinge_terms: vec![],
            rhinge_terms: vec![(0.0, 1.0)],
        };
        assert_eq!(g.evaluate(-3.0), 3.0);
        assert_eq!(g.evaluate(3.0), 0.0);
    }

    #[test]
    fn constant_only() {
        let g = PiecewiseLinearFn::constant(1.0);
        for x in [-1e6, -1.0, 0.0, 3.5, 1e9] {
            assert_eq!(g.evaluate(x), 1.0);
        }
    }

    #[test]
    fn linear_between_knots() {
        let g = PiecewiseLinearFn {
            intercept: 0.3,
            hinge_terms: vec![(-0.5, 1.5), (0.7, -2.0)],
            rhinge_terms: vec![(0.1, 0.25)],
        };
        let knots = g.knots();
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ya, yb) = (g.evaluate(a), g.evaluate(b));
            for t in [0.1, 0.37, 0.5, 0.93] {
                let x = a + t * (b - a);
                let line = ya + (yb - ya) * (x - a) / (b - a);
                assert!((g.evaluate(x) - line).abs() < 1e-12);
            }
        }
    }
}
