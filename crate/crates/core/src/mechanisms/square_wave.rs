use rand::Rng;

use crate::domain::PiDistribution;
use crate::error::{check_epsilon, invalid, Error, Result};

/// Square Wave mechanism for values in `[0, 1]`, with reconstruction of the
/// input distribution on a grid of `buckets` points by EM with smoothing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwConfig {
    pub epsilon: f64,
    /// Number of reconstruction grid points `0, 1/(B-1), ..., 1`.
    pub buckets: usize,
    pub ems_iterations: usize,
    /// Stop once an iteration raises the log-likelihood of the observed
    /// counts by less than this.
    pub ems_tolerance: f64,
    /// Weight of the binomial `[1, 2, 1] / 4` smoothing step; `0` is plain EM.
    pub ems_smoothing: f64,
}

/// Grid size used for count distributions over `0..=d`.
pub const MAX_BUCKETS: usize = 1024;

impl SwConfig {
    pub fn new(epsilon: f64, buckets: usize) -> Result<Self> {
        let cfg = Self {
            epsilon,
            buckets,
            ems_iterations: 1000,
            ems_tolerance: 1e-3,
            ems_smoothing: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grid matching counts `t ∈ 0..=d`: one point per count up to
    /// [`MAX_BUCKETS`], proportional mapping beyond.
    pub fn for_counts(epsilon: f64, d: usize) -> Result<Self> {
        Self::new(epsilon, (d + 1).min(MAX_BUCKETS))
    }

    pub fn with_smoothing(mut self, weight: f64) -> Self {
        self.ems_smoothing = weight;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.ems_iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if self.buckets < 2 {
            return Err(invalid("square wave needs at least two buckets"));
        }
        if !(0.0..=1.0).contains(&self.ems_smoothing) {
            return Err(invalid("smoothing weight must lie in [0, 1]"));
        }
        if self.ems_iterations == 0 {
            return Err(invalid("EMS needs at least one iteration"));
        }
        Ok(())
    }

    /// Half-width `b` of the high-probability band,
    /// `(ε e^ε - e^ε + 1) / (2 e^ε (e^ε - 1 - ε))`, rearranged to stay finite
    /// for large `ε`.
    pub fn half_width(&self) -> f64 {
        let eps = self.epsilon;
        if eps.is_infinite() {
            return 0.0;
        }
        let em = (-eps).exp();
        let num = (eps + (-eps).exp_m1()) * em;
        let den = 2.0 * (-(-eps).exp_m1() - eps * em);
        num / den
    }

    /// Probability that the report falls in the band `[v - b, v + b]`,
    /// `2b e^ε / (2b e^ε + 1)`.
    pub fn band_mass(&self) -> f64 {
        let b = self.half_width();
        if self.epsilon.is_infinite() {
            return 1.0;
        }
        let t = ((2.0 * b).ln() + self.epsilon).exp();
        t / (t + 1.0)
    }

    /// Perturbs one value. Use [`SwConfig::sampler`] in loops.
    pub fn perturb<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> f64 {
        self.sampler().perturb(v, rng)
    }

    pub fn sampler(&self) -> SwSampler {
        SwSampler {
            b: self.half_width(),
            band: self.band_mass(),
        }
    }

    /// Grid point index for a value in `[0, 1]`.
    pub fn bucket_of(&self, v: f64) -> usize {
        ((v * (self.buckets - 1) as f64).round() as usize).min(self.buckets - 1)
    }
}

/// Client-side sampler with the band geometry precomputed.
#[derive(Clone, Copy, Debug)]
pub struct SwSampler {
    b: f64,
    band: f64,
}

impl SwSampler {
    #[inline]
    pub fn perturb<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> f64 {
        let b = self.b;
        if rng.gen::<f64>() < self.band {
            v - b + 2.0 * b * rng.gen::<f64>()
        } else {
            // Uniform over [-b, 1 + b] minus the band, which has length 1.
            let u: f64 = rng.gen();
            if u < v {
                -b + u
            } else {
                v + b + (u - v)
            }
        }
    }
}

pub fn sw_report<R: Rng + ?Sized>(value: f64, cfg: &SwConfig, rng: &mut R) -> Result<f64> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            what: "square wave input",
            value,
        });
    }
    Ok(cfg.perturb(value, rng))
}

/// Precomputed transition matrix for one [`SwConfig`].
#[derive(Clone, Debug)]
pub struct SwReconstructor {
    cfg: SwConfig,
    width: f64,
    /// Output bins below 0 (and above 1).
    pad: usize,
    out_bins: usize,
    /// Row-major `out_bins × buckets`: `Pr[output bin k | input point i]`.
    matrix: Vec<f64>,
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

impl SwReconstructor {
    pub fn new(cfg: SwConfig) -> Result<Self> {
        cfg.validate()?;
        let buckets = cfg.buckets;
        let width = 1.0 / (buckets - 1) as f64;
        let b = cfg.half_width();
        let band = cfg.band_mass();
        let uniform = 1.0 - band; // density on the unit-length off-band region
        let pad = (b / width - 0.5).max(0.0).ceil() as usize;
        let out_bins = buckets + 2 * pad;
        let mut matrix = vec![0.0; out_bins * buckets];
        for i in 0..buckets {
            let v = i as f64 * width;
            let mut col_sum = 0.0;
            for k in 0..out_bins {
                let center = (k as f64 - pad as f64) * width;
                let (lo, hi) = (center - width / 2.0, center + width / 2.0);
                let support = overlap(lo, hi, -b, 1.0 + b);
                let p = if b < width / 2.0 {
                    // The band sits inside the input's own bin; avoid
                    // subtracting lengths far below float resolution of v.
                    let in_band = if k == i + pad { 2.0 * b } else { 0.0 };
                    uniform * (support - in_band) + band * if k == i + pad { 1.0 } else { 0.0 }
                } else {
                    let in_band = overlap(lo, hi, v - b, v + b);
                    uniform * (support - in_band) + band * in_band / (2.0 * b)
                };
                let p = p.max(0.0);
                matrix[k * buckets + i] = p;
                col_sum += p;
            }
            for k in 0..out_bins {
                matrix[k * buckets + i] /= col_sum;
            }
        }
        Ok(Self {
            cfg,
            width,
            pad,
            out_bins,
            matrix,
        })
    }

    pub fn config(&self) -> &SwConfig {
        &self.cfg
    }

    pub fn output_bin(&self, report: f64) -> usize {
        let k = (report / self.width).round() + self.pad as f64;
        k.clamp(0.0, (self.out_bins - 1) as f64) as usize
    }

    /// Histogram of reports over output bins.
    pub fn bin_counts(&self, reports: &[f64]) -> Vec<f64> {
        let mut counts = vec![0.0; self.out_bins];
        for &y in reports {
            counts[self.output_bin(y)] += 1.0;
        }
        counts
    }

    pub fn reconstruct(&self, reports: &[f64]) -> Result<PiDistribution> {
        if reports.is_empty() {
            return Err(Error::Empty("square wave reports"));
        }
        self.reconstruct_counts(&self.bin_counts(reports))
    }

    /// EM with smoothing over output-bin counts.
    pub fn reconstruct_counts(&self, counts: &[f64]) -> Result<PiDistribution> {
        let total: f64 = counts.iter().sum();
        if counts.len() != self.out_bins || total <= 0.0 {
            return Err(Error::Empty("square wave reports"));
        }
        let buckets = self.cfg.buckets;
        let observed: Vec<(usize, f64)> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(k, &c)| (k, c / total))
            .collect();
        let lambda = self.cfg.ems_smoothing;
        let mut x = vec![1.0 / buckets as f64; buckets];
        let mut next = vec![0.0; buckets];
        let mut smooth = vec![0.0; buckets];
        let mut last = f64::NEG_INFINITY;
        for _ in 0..self.cfg.ems_iterations {
            next.iter_mut().for_each(|v| *v = 0.0);
            let mut loglik = 0.0;
            for &(k, freq) in &observed {
                let row = &self.matrix[k * buckets..(k + 1) * buckets];
                let denom: f64 = row.iter().zip(&x).map(|(m, xi)| m * xi).sum();
                if denom <= 0.0 {
                    continue;
                }
                loglik += freq * denom.ln();
                let r = freq / denom;
                for (acc, m) in next.iter_mut().zip(row) {
                    *acc += r * m;
                }
            }
            for (acc, xi) in next.iter_mut().zip(&x) {
                *acc *= xi;
            }
            if lambda > 0.0 {
                binomial_smooth(&next, &mut smooth);
                for (v, s) in next.iter_mut().zip(&smooth) {
                    *v = (1.0 - lambda) * *v + lambda * s;
                }
            }
            let sum: f64 = next.iter().sum();
            next.iter_mut().for_each(|v| *v /= sum);
            let loglik = loglik * total;
            if (loglik - last).abs() < self.cfg.ems_tolerance {
                break;
            }
            last = loglik;
            std::mem::swap(&mut x, &mut next);
        }
        PiDistribution::from_weights(x)
    }
}

fn binomial_smooth(x: &[f64], out: &mut [f64]) {
    let n = x.len();
    out[0] = (2.0 * x[0] + x[1]) / 3.0;
    out[n - 1] = (x[n - 2] + 2.0 * x[n - 1]) / 3.0;
    for i in 1..n - 1 {
        out[i] = (x[i - 1] + 2.0 * x[i] + x[i + 1]) / 4.0;
    }
}

pub fn sw_reconstruct(reports: &[f64], cfg: &SwConfig) -> Result<PiDistribution> {
    if reports.is_empty() {
        return Err(Error::Empty("square wave reports"));
    }
    SwReconstructor::new(*cfg)?.reconstruct(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn half_width_matches_direct_formula() {
        for eps in [0.2, 1.0, 3.0, 8.0] {
            let cfg = SwConfig::new(eps, 10).unwrap();
            let e: f64 = eps.exp();
            let direct = (eps * e - e + 1.0) / (2.0 * e * (e - 1.0 - eps));
            assert!((cfg.half_width() - direct).abs() < 1e-12 * direct.max(1.0), "eps {eps}");
            let band = 2.0 * cfg.half_width() * e / (2.0 * cfg.half_width() * e + 1.0);
            assert!((cfg.band_mass() - band).abs() < 1e-12);
        }
        assert!(SwConfig::new(800.0, 10).unwrap().half_width() >= 0.0);
    }

    #[test]
    fn reports_stay_in_support() {
        let cfg = SwConfig::new(0.8, 10).unwrap();
        let b = cfg.half_width();
        let mut rng = RngStream::new(1, 0, 0).rng(0);
        for i in 0..100_000 {
            let v = (i % 101) as f64 / 100.0;
            let y = sw_report(v, &cfg, &mut rng).unwrap();
            assert!(y >= -b - 1e-12 && y <= 1.0 + b + 1e-12);
        }
        assert!(sw_report(1.5, &cfg, &mut rng).is_err());
    }

    #[test]
    fn transition_columns_are_distributions() {
        for eps in [0.1, 1.0, 50.0] {
            let r = SwReconstructor::new(SwConfig::new(eps, 21).unwrap()).unwrap();
            for i in 0..21 {
                let s: f64 = (0..r.out_bins).map(|k| r.matrix[k * 21 + i]).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    fn reports_from<F: Fn(usize) -> f64>(cfg: &SwConfig, n: usize, value: F) -> Vec<f64> {
        let mut rng = RngStream::new(9, 0, 0).rng(0);
        let s = cfg.sampler();
        (0..n).map(|i| s.perturb(value(i), &mut rng)).collect()
    }

    #[test]
    fn point_mass_has_modal_bucket_at_value() {
        let cfg = SwConfig::new(1.0, 11).unwrap();
        let reports = reports_from(&cfg, 100_000, |_| 0.5);
        let est = sw_reconstruct(&reports, &cfg).unwrap();
        let mode = est
            .probs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(mode, 5);
        assert!((est.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_input_reconstructs_flat() {
        let cfg = SwConfig::new(1.0, 11).unwrap();
        let mut rng = RngStream::new(10, 0, 0).rng(0);
        let reports: Vec<f64> = (0..100_000)
            .map(|_| {
                let v = rng.gen::<f64>();
                cfg.perturb(v, &mut rng)
            })
            .collect();
        let est = sw_reconstruct(&reports, &cfg).unwrap();
        let max = est.probs().iter().cloned().fold(f64::MIN, f64::max);
        let min = est.probs().iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 1.5, "{:?}", est.probs());
    }

    #[test]
    fn noiseless_plain_em_recovers_histogram() {
        for (eps, tol) in [(f64::INFINITY, 1e-9), (60.0, 0.01)] {
            check_plain_em(eps, tol);
        }
    }

    fn check_plain_em(eps: f64, tol: f64) {
        let cfg = SwConfig::new(eps, 6).unwrap().with_smoothing(0.0);
        let truth = [0.5, 0.2, 0.0, 0.1, 0.0, 0.2];
        let n = 10_000;
        let mut values = Vec::new();
        for (i, p) in truth.iter().enumerate() {
            values.extend(std::iter::repeat(i as f64 / 5.0).take((p * n as f64) as usize));
        }
        let reports = reports_from(&cfg, values.len(), |i| values[i]);
        let est = sw_reconstruct(&reports, &cfg).unwrap();
        let l1: f64 = est.probs().iter().zip(truth).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 < tol, "eps {eps}: {:?}", est.probs());
    }

    #[test]
    fn empty_reports_error() {
        let cfg = SwConfig::new(1.0, 11).unwrap();
        assert!(matches!(sw_reconstruct(&[], &cfg), Err(Error::Empty(_))));
    }
}
