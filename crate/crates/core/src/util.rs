//! Small numeric helpers shared across modules.

/// Neumaier compensated summation. Used for the long reductions so that
/// results do not depend on chunking or worker count.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    kahan_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    kahan_sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64
}

pub fn std_dev(values: &[f64]) -> f64 {
    variance(values).sqrt()
}

/// Standard error of the sample mean.
#[cfg_attr(not(test), allow(dead_code))]
pub fn stderr_mean(values: &[f64]) -> f64 {
    std_dev(values) / (values.len() as f64).sqrt()
}

/// Median of an unsorted slice (averages the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `floor(n*s)` guarded against representation error when `s` is a grid
/// point `k/n`.
pub fn floor_ns(n: usize, s: f64) -> usize {
    let x = n as f64 * s;
    let k = (x + 1e-9).floor();
    if k < 0.0 {
        0
    } else {
        k as usize
    }
}

/// Sample autocovariance at the given lag, normalized by `1/n`.
#[cfg_attr(not(test), allow(dead_code))]
pub fn autocovariance(values: &[f64], lag: usize) -> f64 {
    let n = values.len();
    if lag >= n {
        return f64::NAN;
    }
    let m = mean(values);
    kahan_sum((0..n - lag).map(|t| (values[t] - m) * (values[t + lag] - m))) / n as f64
}
