//! Lagged correlation estimates and the correlation-fit objective.
//!
//! For processes `i`, `j` and lag `t` the estimate is
//!
//! ```text
//! c_ij(t) = [ (1/(S-t)) Σ_{s<S-t} l_i(s) l_j(s+t) - <l_i><l_j> ] / cov(l_i, l_j)
//! ```
//!
//! with `cov` the same-time cross-covariance, so `c_ij(0) = 1` whenever the
//! normalizer is nonzero. The imposed target is `C_ij(t) = exp(-t / tau_ij)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loss::LossMatrix;

/// Values below this are treated as the extinguished tail by [`fit_decay_time`].
pub const DECAY_FIT_FLOOR: f64 = 0.05;

/// Relative size below which a cross-covariance counts as zero.
const COV_EPS: f64 = 1e-12;

/// Imposed correlation functions `C_ij(t) = exp(-t / tau_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTarget {
    tau: Vec<f64>,
    n: usize,
    max_lag: usize,
}

impl CorrelationTarget {
    /// `tau` is row-major `n × n`; it must be symmetric with positive entries.
    pub fn new(n: usize, tau: Vec<f64>, max_lag: usize) -> Result<Self> {
        if n == 0 || tau.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "decay matrix needs {} entries for {n} processes, got {}",
                n * n,
                tau.len()
            )));
        }
        if max_lag == 0 {
            return Err(Error::InvalidInput("max_lag must be positive".into()));
        }
        if let Some(bad) = tau.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidInput(format!("decay time {bad} is not positive")));
        }
        for i in 0..n {
            for j in 0..i {
                if tau[i * n + j] != tau[j * n + i] {
                    return Err(Error::InvalidInput(format!(
                        "decay matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { tau, n, max_lag })
    }

    /// Same decay time for every pair.
    pub fn homogeneous(n: usize, tau: f64, max_lag: usize) -> Result<Self> {
        Self::new(n, vec![tau; n * n], max_lag)
    }

    pub fn n_processes(&self) -> usize {
        self.n
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn with_max_lag(&self, max_lag: usize) -> Result<Self> {
        Self::new(self.n, self.tau.clone(), max_lag)
    }

    pub fn tau(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    pub fn max_tau(&self) -> f64 {
        self.tau.iter().copied().fold(0.0, f64::max)
    }

    /// `C_ij(t)`; equals 1 at `t = 0`.
    pub fn value(&self, i: usize, j: usize, lag: usize) -> f64 {
        libm::exp(-(lag as f64) / self.tau(i, j))
    }

    /// Target with every decay time divided by `window`, the decay expected
    /// after summing over windows of that many steps.
    pub fn rescaled(&self, window: usize, max_lag: usize) -> Result<Self> {
        let w = window as f64;
        Self::new(self.n, self.tau.iter().map(|t| t / w).collect(), max_lag)
    }
}

/// Default number of lags in the objective: `min(S - 2, ceil(5 · max tau))`.
pub fn default_max_lag(n_steps: usize, max_tau: f64) -> usize {
    let five_tau = libm::ceil(5.0 * max_tau).max(1.0) as usize;
    five_tau.min(n_steps.saturating_sub(2)).max(1)
}

/// `c_ij(t)` for all pairs and lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    n: usize,
    max_lag: usize,
    /// `[(i * n + j) * (max_lag + 1) + t]`, NaN where the pair is undefined.
    c: Vec<f64>,
    defined: Vec<bool>,
}

impl CorrelationEstimate {
    pub fn n_processes(&self) -> usize {
        self.n
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// `None` when the same-time cross-covariance of `(i, j)` vanishes.
    pub fn slice(&self, i: usize, j: usize) -> Option<&[f64]> {
        let pair = i * self.n + j;
        if !self.defined[pair] {
            return None;
        }
        let width = self.max_lag + 1;
        Some(&self.c[pair * width..(pair + 1) * width])
    }

    pub fn get(&self, i: usize, j: usize, lag: usize) -> Option<f64> {
        self.slice(i, j).map(|s| s[lag])
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.defined[i * self.n + j]
    }
}

/// Estimates `c_ij(t)` for every ordered pair and `t = 0..=max_lag`.
///
/// Requires `max_lag <= S - 2` and non-constant rows.
pub fn empirical_correlation(series: &LossMatrix, max_lag: usize) -> Result<CorrelationEstimate> {
    let n = series.n_processes();
    let len = series.n_steps();
    if max_lag == 0 || max_lag + 2 > len {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} outside 1..={} for {len} steps",
            len - 2
        )));
    }
    let means: Vec<f64> = series.rows().map(|r| r.iter().sum::<f64>() / len as f64).collect();
    let devs: Vec<Vec<f64>> = series
        .rows()
        .zip(&means)
        .map(|(r, m)| r.iter().map(|v| v - m).collect())
        .collect();
    let vars: Vec<f64> = devs
        .iter()
        .map(|d| d.iter().map(|x| x * x).sum::<f64>() / len as f64)
        .collect();
    if let Some(process) = vars.iter().position(|v| *v <= 0.0) {
        return Err(Error::ConstantSeries { process });
    }

    let width = max_lag + 1;
    let mut c = vec![f64::NAN; n * n * width];
    let mut defined = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let (di, dj) = (&devs[i], &devs[j]);
            let cov = di.iter().zip(dj).map(|(a, b)| a * b).sum::<f64>() / len as f64;
            if libm::fabs(cov) <= COV_EPS * libm::sqrt(vars[i] * vars[j]) {
                continue;
            }
            let pair = i * n + j;
            defined[pair] = true;
            // Raw lagged mean minus the product of full-series means, expanded in
            // deviations: the partial sums of d_i and d_j do not vanish for t > 0.
            let mut head_i: f64 = di.iter().sum();
            let mut tail_j: f64 = dj.iter().sum();
            for t in 0..=max_lag {
                if t > 0 {
                    head_i -= di[len - t];
                    tail_j -= dj[t - 1];
                }
                let cross: f64 = di[..len - t].iter().zip(&dj[t..]).map(|(a, b)| a * b).sum();
                let lagged = (cross + means[j] * head_i + means[i] * tail_j) / (len - t) as f64;
                c[pair * width + t] = if t == 0 { 1.0 } else { lagged / cov };
            }
        }
    }
    Ok(CorrelationEstimate { n, max_lag, c, defined })
}

/// Squared deviation of an estimate from the target over lags `1..=max_lag`.
///
/// Fails if any pair of the estimate is undefined.
pub fn deviation(estimate: &CorrelationEstimate, target: &CorrelationTarget) -> Result<f64> {
    let n = estimate.n_processes();
    if target.n_processes() != n {
        return Err(Error::InvalidInput(format!(
            "target has {} processes, estimate {n}",
            target.n_processes()
        )));
    }
    let max_lag = target.max_lag().min(estimate.max_lag());
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let slice = estimate.slice(i, j).ok_or_else(|| {
                Error::InvalidInput(format!("zero same-time covariance between {i} and {j}"))
            })?;
            for (t, c) in slice.iter().enumerate().take(max_lag + 1).skip(1) {
                let d = c - target.value(i, j, t);
                total += d * d;
            }
        }
    }
    Ok(total)
}

/// `Σ_{i,j} Σ_{t=1..max_lag} (c_ij(t) - C_ij(t))²` with `max_lag` taken from the target.
pub fn objective(series: &LossMatrix, target: &CorrelationTarget) -> Result<f64> {
    if target.n_processes() != series.n_processes() {
        return Err(Error::InvalidInput(format!(
            "target has {} processes, series {}",
            target.n_processes(),
            series.n_processes()
        )));
    }
    let estimate = empirical_correlation(series, target.max_lag())?;
    deviation(&estimate, target)
}

/// Decay time from a least-squares line through `ln c(t)` against `t`.
///
/// Uses the leading run of lags (from lag 0) whose values exceed
/// [`DECAY_FIT_FLOOR`]; at least three are required.
pub fn fit_decay_time(c: &[f64]) -> Result<f64> {
    let usable = c.iter().take_while(|v| **v > DECAY_FIT_FLOOR).count();
    if usable < 3 {
        return Err(Error::InsufficientDecayRange);
    }
    let n = usable as f64;
    let t_mean = (usable - 1) as f64 / 2.0;
    let y_mean = c[..usable].iter().map(|v| libm::log(*v)).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in c[..usable].iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (libm::log(*v) - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::InsufficientDecayRange);
    }
    Ok(-1.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn matrix(rows: Vec<Vec<f64>>) -> LossMatrix {
        LossMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn same_time_normalization() {
        let m = matrix(vec![vec![1.0, 2.0, 3.0, 4.0], vec![4.0, 3.0, 2.0, 1.0]]);
        let est = empirical_correlation(&m, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(est.get(i, j, 0), Some(1.0));
            }
        }
    }

    #[test]
    fn constant_row_is_named() {
        let m = matrix(vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4]]);
        assert_eq!(empirical_correlation(&m, 1), Err(Error::ConstantSeries { process: 1 }));
    }

    #[test]
    fn zero_cross_covariance_is_flagged() {
        // Orthogonal deviations: (-1, 1, -1, 1) and (-1, -1, 1, 1).
        let m = matrix(vec![vec![0.0, 2.0, 0.0, 2.0], vec![0.0, 0.0, 2.0, 2.0]]);
        let est = empirical_correlation(&m, 1).unwrap();
        assert!(est.is_defined(0, 0));
        assert!(!est.is_defined(0, 1));
        assert_eq!(est.get(1, 0, 1), None);
        let target = CorrelationTarget::homogeneous(2, 1.0, 1).unwrap();
        assert!(objective(&m, &target).is_err());
    }

    #[test]
    fn max_lag_bounds() {
        let m = matrix(vec![vec![1.0, 2.0, 3.0, 5.0]]);
        assert!(empirical_correlation(&m, 3).is_err());
        assert!(empirical_correlation(&m, 0).is_err());
        assert!(empirical_correlation(&m, 2).is_ok());
    }

    #[test]
    fn target_validation() {
        assert!(CorrelationTarget::new(2, vec![1.0, 2.0, 3.0, 1.0], 5).is_err());
        assert!(CorrelationTarget::new(2, vec![1.0, 0.0, 0.0, 1.0], 5).is_err());
        assert!(CorrelationTarget::homogeneous(2, 5.0, 0).is_err());
        let t = CorrelationTarget::new(2, vec![1.0, 2.0, 2.0, 4.0], 5).unwrap();
        assert_eq!(t.value(0, 1, 0), 1.0);
        assert!((t.value(0, 1, 2) - libm::exp(-1.0)).abs() < 1e-15);
        assert_eq!(t.max_tau(), 4.0);
        assert_eq!(t.rescaled(2, 3).unwrap().tau(1, 1), 2.0);
    }

    #[test]
    fn default_lag_cap() {
        assert_eq!(default_max_lag(5000, 25.0), 125);
        assert_eq!(default_max_lag(64, 8.0), 40);
        assert_eq!(default_max_lag(20, 25.0), 18);
        assert_eq!(default_max_lag(100, 0.3), 2);
    }

    #[test]
    fn decay_fit_exact_exponentials() {
        let c: Vec<f64> = (0..=100).map(|t| libm::exp(-(t as f64) / 25.0)).collect();
        assert!((fit_decay_time(&c).unwrap() - 25.0).abs() < 0.01);
        let c: Vec<f64> = (0..=10).map(|t| libm::exp(-(t as f64))).collect();
        assert!((fit_decay_time(&c).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn decay_fit_needs_three_lags() {
        assert_eq!(fit_decay_time(&[1.0, 0.5, 0.01, 0.3]), Err(Error::InsufficientDecayRange));
        assert_eq!(fit_decay_time(&[1.0, 1.0, 1.0]), Err(Error::InsufficientDecayRange));
    }
}
