//! Run summaries and Welch's unequal-variance t-test.
//!
//! The Student t tail is evaluated through the regularized incomplete beta
//! function,
//!
//! ```text
//! P(|T| > t) = I_x(df/2, 1/2),   x = df / (df + t^2)
//! ```
//!
//! with `I_x` computed by the modified Lentz continued fraction and
//! `ln Γ` by a Lanczos approximation.

use crate::error::{Error, Result};
use crate::sim::MetricSeries;

/// Per-run final cooperation values of one experimental condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSample {
    pub values: Vec<f64>,
}

impl ConditionSample {
    pub fn new(values: Vec<f64>) -> Self {
        ConditionSample { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std(&self) -> f64 {
        sample_variance(&self.values).sqrt()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean cooperation at factor `f` over the last `last_k` epochs of every run.
pub fn final_values(series: &MetricSeries, f: f64, last_k: usize) -> Result<ConditionSample> {
    let fi = series.f_index(f)?;
    if last_k == 0 || last_k > series.num_epochs() {
        return Err(Error::InvalidArgument(format!(
            "last_k must be in 1..={}, got {last_k}",
            series.num_epochs()
        )));
    }
    let values = series
        .runs
        .iter()
        .map(|run| {
            let tail = &run[run.len() - last_k..];
            tail.iter().map(|r| r.eval[fi]).sum::<f64>() / last_k as f64
        })
        .collect();
    Ok(ConditionSample::new(values))
}

/// Cross-run mean and sample standard deviation of the final cooperation.
pub fn summarize(series: &MetricSeries, f: f64, last_k: usize) -> Result<(f64, f64)> {
    let s = final_values(series, f, last_k)?;
    Ok((s.mean(), s.std()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

pub fn welch_t_test(xs: &ConditionSample, ys: &ConditionSample) -> Result<WelchResult> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::InvalidArgument(
            "Welch's test needs at least two values per sample".into(),
        ));
    }
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (vx, vy) = (sample_variance(&xs.values) / nx, sample_variance(&ys.values) / ny);
    if vx == 0.0 && vy == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let t = (xs.mean() - ys.mean()) / (vx + vy).sqrt();
    let df = (vx + vy).powi(2) / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    Ok(WelchResult {
        t,
        df,
        p: student_t_two_sided(t, df),
    })
}

/// `P(|T| > |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// Student t cumulative distribution function.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * student_t_two_sided(t, df);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
