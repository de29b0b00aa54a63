//! Small statistical helpers used to check samplers against their densities.

use crate::analysis::{integrate, QuadratureSpec};

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`. Sorts `samples`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Piecewise-linear CDF tabulated by integrating a density cell by cell.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    grid: Vec<f64>,
    cum: Vec<f64>,
}

impl TabulatedCdf {
    /// Integrates `pdf` over `cells` equal cells of `[lo, hi]`. The table is
    /// not renormalized, so a density that does not integrate to one shows up
    /// as a KS discrepancy.
    pub fn from_pdf<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64, cells: usize) -> Self {
        let spec = QuadratureSpec {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            ..QuadratureSpec::default()
        };
        let h = (hi - lo) / cells as f64;
        let mut grid = Vec::with_capacity(cells + 1);
        let mut cum = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        grid.push(lo);
        cum.push(0.0);
        for i in 0..cells {
            let a = lo + i as f64 * h;
            let b = if i + 1 == cells { hi } else { a + h };
            acc += match integrate(&pdf, a, b, &[], &spec) {
                Ok(q) => q.value,
                Err(crate::analysis::AnalysisError::Quadrature { value, .. }) => value,
                Err(_) => f64::NAN,
            };
            grid.push(b);
            cum.push(acc);
        }
        Self { grid, cum }
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.total();
        }
        let i = self.grid.partition_point(|g| *g <= x) - 1;
        let t = (x - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        self.cum[i] + t * (self.cum[i + 1] - self.cum[i])
    }
}

/// Hill estimator of the tail index from the `k` largest absolute values.
pub fn hill_estimator(samples: &[f64], k: usize) -> f64 {
    let mut a: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let k = k.min(a.len().saturating_sub(1)).max(1);
    let xk = a[k];
    let s: f64 = a[..k].iter().map(|x| (x / xk).ln()).sum();
    k as f64 / s
}

/// Pearson χ² statistic of observed counts against expected probabilities.
pub fn chi_square(observed: &[u64], expected_prob: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected_prob)
        .filter(|(_, p)| **p > 0.0)
        .map(|(o, p)| {
            let e = *p * n as f64;
            (*o as f64 - e).powi(2) / e
        })
        .sum()
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Lag-1 autocorrelation pooled over several series, each centered on the
/// pooled mean.
pub fn pooled_lag1_autocorrelation(series: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = series.iter().flatten().copied().collect();
    let m = all.iter().sum::<f64>() / all.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for s in series {
        for w in s.windows(2) {
            num += (w[0] - m) * (w[1] - m);
            den += 0.5 * ((w[0] - m).powi(2) + (w[1] - m).powi(2));
        }
    }
    if den == 0.0 {
        return 1.0;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_uniform_grid_is_small() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&mut xs, |x| x) <= 0.0005 + 1e-12);
    }

    #[test]
    fn tabulated_cdf_of_exponential() {
        let t = TabulatedCdf::from_pdf(|x: f64| (-x).exp(), 0.0, 40.0, 400);
        for x in [0.1, 1.0, 3.3] {
            assert!((t.cdf(x) - (1.0 - (-x).exp())).abs() < 1e-3);
        }
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hill_on_pareto() {
        // Quantiles of Pareto(α = 1.5).
        let n = 100_000;
        let xs: Vec<f64> = (1..n).map(|i| (1.0 - i as f64 / n as f64).powf(-1.0 / 1.5)).collect();
        let a = hill_estimator(&xs, 1000);
        assert!((a - 1.5).abs() < 0.05, "{a}");
    }

    #[test]
    fn autocorrelation_extremes() {
        assert_eq!(pooled_lag1_autocorrelation(&[vec![1.0, 1.0], vec![2.0, 2.0]]), 1.0);
        let alt = vec![vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0]];
        assert!(pooled_lag1_autocorrelation(&alt) < -0.9);
    }
}
