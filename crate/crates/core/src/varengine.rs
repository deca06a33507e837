//! Loss distributions over a horizon and their 99.9-percentile VaR.
//!
//! A window-level distribution with `n` bins is convolved with itself
//! `m = round(H / T)` times to reach horizon `H`. Base bin `j` (1-based)
//! stands for its midpoint `(j - 1/2)·Δ`, so index `k` of an `m`-fold
//! convolution is worth `(k + m/2 - 1)·Δ`. The support keeps all
//! `m·(n - 1) + 1` bins.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

pub const MASS_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SAMPLES_PER_REP: usize = 1000;
pub const DEFAULT_REPETITIONS: usize = 100;

/// Probability mass over consecutive loss bins of width `bin_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedPdf {
    mass: Vec<f64>,
    bin_width: f64,
    order: usize,
}

impl BinnedPdf {
    pub fn new(mass: Vec<f64>, bin_width: f64, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("convolution order must be positive".into()));
        }
        if mass.len() < 2 || !(mass.len() - 1).is_multiple_of(order) {
            return Err(Error::InvalidInput(format!(
                "{} bins is not order·(n-1)+1 for order {order}",
                mass.len()
            )));
        }
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::InvalidInput(format!("bin width {bin_width} is not positive")));
        }
        if mass.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidInput("masses must be finite and non-negative".into()));
        }
        let total: f64 = mass.iter().sum();
        if libm::fabs(total - 1.0) > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!("masses sum to {total}")));
        }
        Ok(Self { mass, bin_width, order })
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Bin count of the order-1 distribution this one was built from.
    pub fn base_bins(&self) -> usize {
        (self.mass.len() - 1) / self.order + 1
    }

    /// Monetary value of 0-based bin `index`: `(index + order/2)·Δ`.
    pub fn value(&self, index: usize) -> f64 {
        (index as f64 + self.order as f64 / 2.0) * self.bin_width
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(k, p)| p * self.value(k)).sum()
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.mass
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Discrete convolution `R(k) = Σ_m p(m)·q(k - m + 1)` over all valid `m`.
pub fn convolve(p: &BinnedPdf, q: &BinnedPdf) -> Result<BinnedPdf> {
    if p.bin_width != q.bin_width {
        return Err(Error::BinWidthMismatch { left: p.bin_width, right: q.bin_width });
    }
    if p.base_bins() != q.base_bins() {
        return Err(Error::InvalidInput(format!(
            "base bin counts differ ({} vs {})",
            p.base_bins(),
            q.base_bins()
        )));
    }
    let (lp, lq) = (p.len(), q.len());
    let mut out = alloc::vec![0.0; lp + lq - 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let lo = (k + 1).saturating_sub(lq);
        let hi = k.min(lp - 1);
        *slot = (lo..=hi).map(|m| p.mass[m] * q.mass[k - m]).sum();
    }
    Ok(BinnedPdf { mass: out, bin_width: p.bin_width, order: p.order + q.order })
}

/// `round(horizon / window)` with halves rounded up, at least 1.
pub fn convolution_order(window: usize, horizon: usize) -> usize {
    ((2 * horizon + window) / (2 * window)).max(1)
}

/// `m`-fold self-convolution of an order-1 distribution with
/// `m = round(horizon / window)`.
pub fn convolve_to_horizon(p: &BinnedPdf, window: usize, horizon: usize) -> Result<BinnedPdf> {
    if p.order != 1 {
        return Err(Error::InvalidInput(format!("expected an order-1 distribution, got order {}", p.order)));
    }
    if window == 0 {
        return Err(Error::InvalidInput("window must be positive".into()));
    }
    if horizon < window {
        return Err(Error::HorizonBelowWindow { horizon, window });
    }
    let m = convolution_order(window, horizon);
    let mut acc = p.clone();
    for _ in 1..m {
        acc = convolve(&acc, p)?;
    }
    Ok(acc)
}

/// Draws bin indices by inverse-CDF lookup.
struct IndexSampler {
    cdf: Vec<f64>,
}

impl IndexSampler {
    fn new(p: &BinnedPdf) -> Self {
        Self { cdf: p.cdf() }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("non-empty");
        let u = rng.gen::<f64>() * total;
        self.cdf.partition_point(|c| *c <= u).min(self.cdf.len() - 1)
    }
}

/// Sampled 99.9 percentile: each repetition draws `samples_per_rep` bin
/// indices, sorts them and keeps the second largest (the 99.9 percentile
/// for 1000 samples). Returns the mean monetary value over repetitions and
/// the sample standard deviation (0 for a single repetition).
pub fn percentile_999<R: Rng + ?Sized>(
    p: &BinnedPdf,
    repetitions: usize,
    samples_per_rep: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if repetitions == 0 || samples_per_rep < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least one repetition and two samples, got {repetitions} × {samples_per_rep}"
        )));
    }
    let sampler = IndexSampler::new(p);
    let mut draws = Vec::with_capacity(samples_per_rep);
    let values: Vec<f64> = (0..repetitions)
        .map(|_| {
            draws.clear();
            draws.extend((0..samples_per_rep).map(|_| sampler.draw(rng)));
            draws.sort_unstable();
            p.value(draws[samples_per_rep - 2])
        })
        .collect();
    Ok(mean_std(&values))
}

/// Mean and sample standard deviation; the deviation is 0 below two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarReport {
    pub per_process_var: Vec<f64>,
    pub per_process_std: Vec<f64>,
    /// Sum of the per-process values.
    pub total_var: f64,
    pub horizon: usize,
    pub window: usize,
    pub repetitions: usize,
}

/// Per-process VaR at `horizon` and their sum. Process `i` samples from the
/// stream `seed::derive(seed, &[i])`.
pub fn var_report(
    marginals: &[BinnedPdf],
    window: usize,
    horizon: usize,
    repetitions: usize,
    seed: u64,
) -> Result<VarReport> {
    if marginals.is_empty() {
        return Err(Error::InvalidInput("no marginals given".into()));
    }
    let mut per_process_var = Vec::with_capacity(marginals.len());
    let mut per_process_std = Vec::with_capacity(marginals.len());
    for (i, p) in marginals.iter().enumerate() {
        let horizon_pdf = convolve_to_horizon(p, window, horizon)?;
        let mut rng = seed::rng(seed::derive(seed, &[i as u64]));
        let (var, std) = percentile_999(&horizon_pdf, repetitions, DEFAULT_SAMPLES_PER_REP, &mut rng)?;
        per_process_var.push(var);
        per_process_std.push(std);
    }
    Ok(VarReport {
        total_var: per_process_var.iter().sum(),
        per_process_var,
        per_process_std,
        horizon,
        window,
        repetitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pdf(mass: &[f64]) -> BinnedPdf {
        BinnedPdf::new(mass.to_vec(), 1.0, 1).unwrap()
    }

    #[test]
    fn delta_is_identity() {
        let p = pdf(&[0.1, 0.2, 0.3, 0.25, 0.15]);
        let r = convolve(&pdf(&[1.0, 0.0, 0.0, 0.0, 0.0]), &p).unwrap();
        assert_eq!(&r.mass()[..5], p.mass());
        assert!(r.mass()[5..].iter().all(|m| *m == 0.0));
        assert_eq!(r.order(), 2);
    }

    #[test]
    fn uniform_square_is_triangular() {
        let u = pdf(&[0.2; 5]);
        let r = convolve(&u, &u).unwrap();
        let expected = [0.04, 0.08, 0.12, 0.16, 0.20, 0.16, 0.12, 0.08, 0.04];
        assert_eq!(r.len(), 9);
        for (a, b) in r.mass().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn width_mismatch() {
        let a = BinnedPdf::new(vec![0.5, 0.5], 1.0, 1).unwrap();
        let b = BinnedPdf::new(vec![0.5, 0.5], 2.0, 1).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::BinWidthMismatch { .. })));
    }

    #[test]
    fn order_rounding() {
        assert_eq!(convolution_order(90, 365), 4);
        assert_eq!(convolution_order(240, 5000), 21);
        assert_eq!(convolution_order(2, 5), 3);
        assert_eq!(convolution_order(5, 5), 1);
        assert_eq!(convolution_order(1, 5000), 5000);
    }

    #[test]
    fn horizon_below_window() {
        let p = pdf(&[0.5, 0.5]);
        assert_eq!(
            convolve_to_horizon(&p, 10, 5),
            Err(Error::HorizonBelowWindow { horizon: 5, window: 10 })
        );
        assert_eq!(convolve_to_horizon(&p, 10, 10).unwrap(), p);
    }

    #[test]
    fn midpoint_values() {
        let p = BinnedPdf::new(vec![0.2; 5], 10.0, 1).unwrap();
        assert_eq!(p.value(0), 5.0);
        assert_eq!(p.value(4), 45.0);
        let q = convolve(&p, &p).unwrap();
        assert_eq!(q.value(0), 10.0);
        assert_eq!(q.value(8), 90.0);
    }

    #[test]
    fn degenerate_percentile() {
        let p = BinnedPdf::new(vec![0.0, 0.0, 1.0, 0.0, 0.0], 4.0, 1).unwrap();
        let mut rng = seed::rng(3);
        assert_eq!(percentile_999(&p, 10, 1000, &mut rng).unwrap(), (10.0, 0.0));
    }

    #[test]
    fn invalid_pdfs() {
        assert!(BinnedPdf::new(vec![0.5, 0.4], 1.0, 1).is_err());
        assert!(BinnedPdf::new(vec![0.5, 0.5], 0.0, 1).is_err());
        assert!(BinnedPdf::new(vec![0.5, 0.25, 0.25], 1.0, 2).is_ok());
        assert!(BinnedPdf::new(vec![0.5, 0.25, 0.25, 0.0], 1.0, 2).is_err());
    }
}
