//! Post-processing of entropy time series: oscillation periods, revival
//! times and finite-size scaling.
//!
//! An entropy curve is a smooth function of the squared scale factors
//! `b_j^2(t)`, each periodic with angular frequency `2 sqrt(lambda_j)`, so its
//! spectrum consists of those fundamentals plus harmonics and intermodulation
//! products. Period extraction therefore looks for the smallest set of
//! spectral lines that generates every significant peak as a low-order
//! integer combination.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::entanglement::EntropySeries;
use crate::error::{Error, Result};

/// Peaks below this fraction of the strongest one are ignored.
const PEAK_FLOOR: f64 = 0.01;
const MAX_PEAKS: usize = 24;
const MAX_GENERATORS: usize = 5;
/// Largest `sum |c_i|` for mixed combinations.
const MIX_ORDER: i32 = 4;
const HARMONIC_ORDER: i32 = 400;
const MATCH_BASE: f64 = 0.25;
const MATCH_PER_ORDER: f64 = 0.005;
const ZERO_PAD: usize = 8;
const SWAP_WEIGHT_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    /// Cycles per unit time.
    pub frequency: f64,
    /// Magnitude relative to the strongest peak.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEstimate {
    /// Fundamental periods, by descending weight.
    pub periods: Vec<f64>,
    pub weights: Vec<f64>,
    /// Every significant peak, strongest first.
    pub peaks: Vec<SpectralPeak>,
}

impl PeriodEstimate {
    /// Number of distinct fundamental time scales.
    pub fn clusters(&self) -> usize {
        period_clusters(&self.periods, 0.02).len()
    }

    pub fn longest(&self) -> Option<f64> {
        self.periods.iter().cloned().reduce(f64::max)
    }
}

/// Groups periods whose relative difference is within `rel_tol`.
pub fn period_clusters(periods: &[f64], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut sorted = periods.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in sorted {
        match out.last_mut() {
            Some(c) if (p - c[0]).abs() <= rel_tol * c[0] => c.push(p),
            _ => out.push(vec![p]),
        }
    }
    out
}

pub fn extract_periods(series: &EntropySeries, count: usize) -> Result<PeriodEstimate> {
    let s1 = series
        .s1()
        .ok_or_else(|| Error::InsufficientSampling("series has no von Neumann column".into()))?;
    extract_periods_from(&series.times, s1, count)
}

/// Dominant fundamental periods of a uniformly sampled signal.
pub fn extract_periods_from(times: &[f64], values: &[f64], count: usize) -> Result<PeriodEstimate> {
    let dt = uniform_step(times, values)?;
    if count == 0 {
        return Err(Error::InsufficientSampling("requested zero periods".into()));
    }
    if values.len() < 8 * count {
        return Err(Error::InsufficientSampling(format!(
            "{} samples cannot resolve {count} periods",
            values.len()
        )));
    }
    let span = dt * values.len() as f64;
    let peaks = spectral_peaks(values, dt)?;
    let resolution = 1.0 / span;
    let generators = generator_set(&peaks, resolution);
    let nyquist = 0.5 / dt;
    if let Some(f) = generators.iter().map(|g| g.frequency).reduce(f64::max) {
        if f > 0.5 * nyquist {
            return Err(Error::InsufficientSampling(format!(
                "period {:.4} has fewer than 4 samples at dt = {dt}",
                1.0 / f
            )));
        }
    }
    let mut gens = generators;
    gens.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    gens.truncate(count);
    Ok(PeriodEstimate {
        periods: gens.iter().map(|g| 1.0 / g.frequency).collect(),
        weights: gens.iter().map(|g| g.weight).collect(),
        peaks,
    })
}

/// Period of the slowest fundamental, i.e. the revival envelope.
pub fn revival_period(series: &EntropySeries) -> Result<f64> {
    let s1 = series
        .s1()
        .ok_or_else(|| Error::NoRevival("series has no von Neumann column".into()))?;
    let dt = uniform_step(&series.times, s1)?;
    let span = dt * (s1.len() - 1) as f64;
    let est = extract_periods_from(&series.times, s1, MAX_GENERATORS)
        .map_err(|e| Error::NoRevival(e.to_string()))?;
    let longest = est
        .longest()
        .ok_or_else(|| Error::NoRevival("no oscillation found".into()))?;
    if 2.0 * longest > span {
        return Err(Error::NoRevival(format!(
            "revival period {longest:.3} needs a window of at least {:.3}; increase t_max",
            2.0 * longest
        )));
    }
    Ok(longest)
}

fn uniform_step(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::InconsistentSeries(
            "time and value lengths differ".into(),
        ));
    }
    if times.len() < 4 {
        return Err(Error::InsufficientSampling(
            "need at least 4 samples".into(),
        ));
    }
    let dt = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
    if !(dt > 0.0) || !uniform {
        return Err(Error::InsufficientSampling(
            "time grid must be uniform".into(),
        ));
    }
    Ok(dt)
}

/// Hann-windowed, zero-padded magnitude spectrum; local maxima refined by
/// parabolic interpolation, strongest first. Peaks closer than three
/// resolution widths to a stronger one are treated as window leakage.
pub fn spectral_peaks(values: &[f64], dt: f64) -> Result<Vec<SpectralPeak>> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let scale = values.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
    if !(scale > 1e-10 * (1.0 + mean.abs())) {
        return Err(Error::NoRevival("signal is constant".into()));
    }
    let len = (ZERO_PAD * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2 + 1].iter().map(|c| c.norm()).collect();
    let bin = 1.0 / (len as f64 * dt);

    let mut raw = Vec::new();
    for i in 1..mag.len() - 1 {
        let (a, b, c) = (mag[i - 1], mag[i], mag[i + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let d = if denom != 0.0 {
                0.5 * (a - c) / denom
            } else {
                0.0
            };
            raw.push(((i as f64 + d) * bin, b - 0.25 * (a - c) * d));
        }
    }
    raw.sort_by(|x, y| y.1.total_cmp(&x.1));
    let top = raw.first().map(|p| p.1).unwrap_or(0.0);
    let guard = 3.0 / (n as f64 * dt);
    let mut peaks: Vec<SpectralPeak> = Vec::new();
    for (f, m) in raw {
        if m < PEAK_FLOOR * top || peaks.len() == MAX_PEAKS {
            break;
        }
        if peaks.iter().any(|p| (p.frequency - f).abs() < guard) {
            continue;
        }
        peaks.push(SpectralPeak {
            frequency: f,
            weight: m / top,
        });
    }
    Ok(peaks)
}

/// Integer vectors with `sum |c_i| <= MIX_ORDER`, zero vector included, one
/// representative per sign pair.
fn mixed_vectors(r: usize) -> Vec<Vec<i32>> {
    let mut out = vec![vec![0; r]];
    let mut c = vec![-MIX_ORDER; r];
    if r == 0 {
        return out;
    }
    loop {
        let order: i32 = c.iter().map(|x| x.abs()).sum();
        let first = c.iter().find(|&&x| x != 0).copied().unwrap_or(0);
        if order > 0 && order <= MIX_ORDER && first > 0 {
            out.push(c.clone());
        }
        let mut i = 0;
        loop {
            if i == r {
                return out;
            }
            c[i] += 1;
            if c[i] > MIX_ORDER {
                c[i] = -MIX_ORDER;
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Frequency-matching window for a combination of total order `order`.
fn window(resolution: f64, order: i32) -> f64 {
    resolution * (MATCH_BASE + MATCH_PER_ORDER * order as f64)
}

/// Lowest total order of `|sum c_i g_i + h g_j| ~ f` with
/// `sum |c_i| <= MIX_ORDER` and `|h| <= HARMONIC_ORDER`, if any.
fn explain(f: f64, gens: &[f64], mixed: &[Vec<i32>], resolution: f64) -> Option<i32> {
    let mut best: Option<i32> = None;
    for c in mixed {
        let base: f64 = c.iter().zip(gens).map(|(&k, g)| k as f64 * g).sum();
        let base_order: i32 = c.iter().map(|x| x.abs()).sum();
        for target in [f, -f] {
            for &g in gens {
                let h = ((target - base) / g).round();
                if h.abs() > HARMONIC_ORDER as f64 {
                    continue;
                }
                let order = base_order + h.abs() as i32;
                if order == 0 || best.is_some_and(|b| b <= order) {
                    continue;
                }
                if (base + h * g - target).abs() <= window(resolution, order) {
                    best = Some(order);
                }
            }
        }
    }
    best
}

/// Generating set for `peaks`.
///
/// Generators are first picked greedily: the strongest peak not reproduced by
/// the current set joins it. Any basis of the resulting frequency lattice
/// explains the spectrum equally well, and a strong difference tone can be
/// picked before a weak fundamental. The basis is therefore refined by
/// unimodular swaps `g_a -> |g_a +- g_b|` that increase the total
/// derivative-spectrum weight `sum f w` of the generators, restricted to
/// replacement lines of comparable strength.
fn generator_set(peaks: &[SpectralPeak], resolution: f64) -> Vec<SpectralPeak> {
    let mut gens: Vec<SpectralPeak> = Vec::new();
    loop {
        let freqs: Vec<f64> = gens.iter().map(|g| g.frequency).collect();
        let mixed = mixed_vectors(freqs.len());
        let next = peaks.iter().find(|p| {
            freqs.is_empty() || explain(p.frequency, &freqs, &mixed, resolution).is_none()
        });
        match next {
            Some(p) if gens.len() < MAX_GENERATORS => gens.push(*p),
            _ => break,
        }
    }
    let score = |set: &[SpectralPeak]| set.iter().map(|g| g.frequency * g.weight).sum::<f64>();
    let tol = window(resolution, 2);
    loop {
        let current = score(&gens);
        let mut best: Option<(f64, usize, SpectralPeak)> = None;
        for p in peaks {
            if gens.iter().any(|g| g.frequency == p.frequency) {
                continue;
            }
            for a in 0..gens.len() {
                for b in 0..gens.len() {
                    let (ga, gb) = (gens[a].frequency, gens[b].frequency);
                    let linked = a != b
                        && ((ga + gb - p.frequency).abs() <= tol
                            || ((ga - gb).abs() - p.frequency).abs() <= tol);
                    if !linked || p.weight < SWAP_WEIGHT_RATIO * gens[a].weight {
                        continue;
                    }
                    let mut trial = gens.clone();
                    trial[a] = *p;
                    let s = score(&trial);
                    if s > current * (1.0 + 1e-9) && best.as_ref().is_none_or(|(bs, _, _)| s > *bs)
                    {
                        best = Some((s, a, *p));
                    }
                }
            }
        }
        match best {
            Some((_, a, p)) => gens[a] = p,
            None => return gens,
        }
    }
}

/// Least-squares fit `S_1(t, N) = c(t) ln N + d(t)` over a set of sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub sizes: Vec<usize>,
    pub times: Vec<f64>,
    pub slope: Vec<f64>,
    pub intercept: Vec<f64>,
    /// Euclidean norm of the fit residuals per time.
    pub residual: Vec<f64>,
    /// `max_N |S_1/ln N - mean_N(S_1/ln N)|` per time.
    pub spread: Vec<f64>,
    /// `spread` divided by the mean ratio.
    pub relative_spread: Vec<f64>,
}

pub fn fit_scaling(sizes: &[usize], series: &[&EntropySeries]) -> Result<ScalingFit> {
    if sizes.len() != series.len() {
        return Err(Error::InconsistentSeries(
            "one series per size required".into(),
        ));
    }
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::TooFewSizes(distinct.len()));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::InconsistentSeries(format!("size {n} has ln N <= 0")));
    }
    let columns: Vec<&[f64]> = series
        .iter()
        .map(|s| {
            s.s1()
                .ok_or_else(|| Error::InconsistentSeries("missing von Neumann column".into()))
        })
        .collect::<Result<_>>()?;
    let times = series[0].times.clone();
    for s in series {
        if s.times.len() != times.len()
            || s.times
                .iter()
                .zip(&times)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::InconsistentSeries("time grids differ".into()));
        }
    }
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let m = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    let mut fit = ScalingFit {
        sizes: sizes.to_vec(),
        times: times.clone(),
        slope: Vec::with_capacity(times.len()),
        intercept: Vec::with_capacity(times.len()),
        residual: Vec::with_capacity(times.len()),
        spread: Vec::with_capacity(times.len()),
        relative_spread: Vec::with_capacity(times.len()),
    };
    for k in 0..times.len() {
        let y: Vec<f64> = columns.iter().map(|c| c[k]).collect();
        let ybar = y.iter().sum::<f64>() / m;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xbar) * (b - ybar)).sum();
        let c = sxy / sxx;
        let d = ybar - c * xbar;
        let res = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - c * a - d).powi(2))
            .sum::<f64>()
            .sqrt();
        let ratio: Vec<f64> = y.iter().zip(&x).map(|(s, l)| s / l).collect();
        let mean = ratio.iter().sum::<f64>() / m;
        let spread = ratio.iter().fold(0.0_f64, |a, r| a.max((r - mean).abs()));
        fit.slope.push(c);
        fit.intercept.push(d);
        fit.residual.push(res);
        fit.spread.push(spread);
        fit.relative_spread.push(if mean != 0.0 {
            spread / mean.abs()
        } else {
            f64::INFINITY
        });
    }
    Ok(fit)
}
