//! Linear-time weighted norms and correlations of the implicit hinge design
//! matrix.
//!
//! For data sorted by `x` and a threshold `η`, the hinge column is nonzero on
//! the suffix starting at the breakpoint `l'` (first index with `x >= η`) and
//! the reverse-hinge column on the prefix before it. Both quantities are
//! therefore sums over a suffix or prefix, and one sweep over the data with a
//! pointer into the sorted thresholds yields all `L` values.
//!
//! The sums are accumulated relative to the moving boundary point rather than
//! as raw power sums `Σw x²`, `Σw x`, `Σw` so that no step subtracts two large
//! nearly-equal quantities. For the norms every accumulated term is
//! nonnegative, which keeps the result accurate to a few ulps even when `η`
//! sits just below the largest `x`.

use super::grid::ThresholdGrid;

/// Leftmost position `l'` with `x[l'] >= η` for each threshold (`x.len()` when
/// the threshold exceeds every sample).
pub fn breakpoints(x_sorted: &[f64], grid: &ThresholdGrid) -> Vec<usize> {
    debug_assert!(is_sorted(x_sorted), "kernel input must be sorted by x");
    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0;
    for &eta in grid.thresholds() {
        while j < x_sorted.len() && x_sorted[j] < eta {
            j += 1;
        }
        out.push(j);
    }
    out
}

fn is_sorted(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] <= w[1])
}

/// Per-threshold values for the hinge (`a^h_l`) and reverse-hinge (`a^r_l`)
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPair {
    pub hinge: Vec<f64>,
    pub rhinge: Vec<f64>,
}

/// `(a^h_l)ᵀ W a^h_l` and `(a^r_l)ᵀ W a^r_l` for every threshold in `O(N + L)`.
pub fn weighted_norms(x_sorted: &[f64], w: &[f64], grid: &ThresholdGrid) -> ColumnPair {
    let bp = breakpoints(x_sorted, grid);
    weighted_norms_at(x_sorted, w, grid.thresholds(), &bp)
}

pub(crate) fn weighted_norms_at(
    x: &[f64],
    w: &[f64],
    thresholds: &[f64],
    bp: &[usize],
) -> ColumnPair {
    assert_eq!(x.len(), w.len());
    let n = x.len();
    let l = thresholds.len();
    let mut hinge = vec![0.0; l];
    let mut rhinge = vec![0.0; l];

    // Suffix sweep. (sw, sp, sq) = Σ_{i>=j} w, Σ w (x_i - x_j), Σ w (x_i - x_j)².
    let (mut sw, mut sp, mut sq) = (0.0, 0.0, 0.0);
    let mut t = l;
    for j in (0..n).rev() {
        if j + 1 < n {
            let d = x[j + 1] - x[j];
            sq += d * (2.0 * sp + d * sw);
            sp += d * sw;
        }
        sw += w[j];
        while t > 0 && bp[t - 1] >= j {
            if bp[t - 1] == j {
                let delta = x[j] - thresholds[t - 1];
                hinge[t - 1] = sq + delta * (2.0 * sp + delta * sw);
            }
            t -= 1;
        }
    }

    // Prefix sweep. Same quantities measured leftwards from x_j.
    let (mut sw, mut sp, mut sq) = (0.0, 0.0, 0.0);
    let mut t = 0;
    for j in 0..n {
        if j > 0 {
            let d = x[j] - x[j - 1];
            sq += d * (2.0 * sp + d * sw);
            sp += d * sw;
        }
        sw += w[j];
        // thresholds whose reverse-hinge support ends at j, i.e. l' = j + 1
        while t < l && bp[t] <= j + 1 {
            if bp[t] == j + 1 {
                let delta = thresholds[t] - x[j];
                rhinge[t] = sq + delta * (2.0 * sp + delta * sw);
            }
            t += 1;
        }
    }
    ColumnPair { hinge, rhinge }
}

/// `bᵀ W a^h_l` and `bᵀ W a^r_l` for every threshold in `O(N + L)`.
pub fn weighted_correlations(
    x_sorted: &[f64],
    b: &[f64],
    w: &[f64],
    grid: &ThresholdGrid,
) -> ColumnPair {
    let bp = breakpoints(x_sorted, grid);
    weighted_correlations_at(x_sorted, b, w, grid.thresholds(), &bp)
}

pub(crate) fn weighted_correlations_at(
    x: &[f64],
    b: &[f64],
    w: &[f64],
    thresholds: &[f64],
    bp: &[usize],
) -> ColumnPair {
    assert_eq!(x.len(), b.len());
    assert_eq!(x.len(), w.len());
    let n = x.len();
    let l = thresholds.len();
    let mut hinge = vec![0.0; l];
    let mut rhinge = vec![0.0; l];

    // (sb, sc) = Σ_{i>=j} w b, Σ_{i>=j} w b (x_i - x_j)
    let (mut sb, mut sc) = (0.0, 0.0);
    let mut t = l;
    for j in (0..n).rev() {
        if j + 1 < n {
            sc += (x[j + 1] - x[j]) * sb;
        }
        sb += w[j] * b[j];
        while t > 0 && bp[t - 1] >= j {
            if bp[t - 1] == j {
                hinge[t - 1] = sc + (x[j] - thresholds[t - 1]) * sb;
            }
            t -= 1;
        }
    }

    let (mut sb, mut sc) = (0.0, 0.0);
    let mut t = 0;
    for j in 0..n {
        if j > 0 {
            sc += (x[j] - x[j - 1]) * sb;
        }
        sb += w[j] * b[j];
        while t < l && bp[t] <= j + 1 {
            if bp[t] == j + 1 {
                rhinge[t] = sc + (thresholds[t] - x[j]) * sb;
            }
            t += 1;
        }
    }
    ColumnPair { hinge, rhinge }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_norm_example() {
        let g = ThresholdGrid::new(vec![1.5]).unwrap();
        let n = weighted_norms(&[1.0, 2.0, 3.0], &[1.0; 3], &g);
        assert!((n.hinge[0] - 2.5).abs() < 1e-15);
        assert!((n.rhinge[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn threshold_beyond_data() {
        let g = ThresholdGrid::new(vec![-1.0, 10.0]).unwrap();
        let n = weighted_norms(&[1.0, 2.0, 3.0], &[1.0; 3], &g);
        assert_eq!(n.hinge[1], 0.0);
        assert_eq!(n.rhinge[0], 0.0);
        // -1 → every x contributes (x + 1)²
        assert!((n.hinge[0] - (4.0 + 9.0 + 16.0)).abs() < 1e-12);
    }

    #[test]
    fn doubling_weights_doubles_norms() {
        let x = [0.1, 0.2, 0.2, 0.5, 0.9];
        let g = ThresholdGrid::new(vec![0.15, 0.2, 0.6]).unwrap();
        let a = weighted_norms(&x, &[1.0, 0.5, 2.0, 1.5, 0.25], &g);
        let b = weighted_norms(&x, &[2.0, 1.0, 4.0, 3.0, 0.5], &g);
        for i in 0..3 {
            assert_eq!(b.hinge[i], 2.0 * a.hinge[i]);
            assert_eq!(b.rhinge[i], 2.0 * a.rhinge[i]);
        }
    }

    #[test]
    fn small_correlation_example() {
        let g = ThresholdGrid::new(vec![1.5]).unwrap();
        let c = weighted_correlations(&[1.0, 2.0, 3.0], &[1.0; 3], &[1.0; 3], &g);
        assert!((c.hinge[0] - 2.0).abs() < 1e-15);
        assert!((c.rhinge[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_residual_zero_correlation() {
        let g = ThresholdGrid::new(vec![0.3, 0.6]).unwrap();
        let c = weighted_correlations(&[0.0, 0.5, 1.0], &[0.0; 3], &[1.0, 2.0, 3.0], &g);
        assert!(c.hinge.iter().chain(&c.rhinge).all(|&v| v == 0.0));
    }

    #[test]
    fn orthogonal_residual() {
        // hinge at 0.5 on x = [0, 1, 2] is [0, 0.5, 1.5]; b = [7, 3, -1] is orthogonal
        let g = ThresholdGrid::new(vec![0.5]).unwrap();
        let c = weighted_correlations(&[0.0, 1.0, 2.0], &[7.0, 3.0, -1.0], &[1.0; 3], &g);
        assert!(c.hinge[0].abs() < 1e-12);
    }

    #[test]
    fn breakpoint_is_leftmost_on_ties() {
        let g = ThresholdGrid::new(vec![1.0, 1.5]).unwrap();
        assert_eq!(breakpoints(&[0.0, 1.0, 1.0, 1.0, 2.0], &g), vec![1, 4]);
    }
}
