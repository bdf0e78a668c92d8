use serde::Serialize;

/// 95% Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let phat = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn median(values: &[u64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub successes: u64,
    pub errors: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_queries: f64,
    pub median_queries: Option<f64>,
}

impl Summary {
    pub fn new(successes: u64, errors: u64, queries: &[u64]) -> Self {
        let trials = queries.len() as u64;
        let (ci_low, ci_high) = wilson_interval(successes, trials);
        let mean_queries = if trials == 0 {
            0.0
        } else {
            queries.iter().sum::<u64>() as f64 / trials as f64
        };
        Summary {
            trials,
            successes,
            errors,
            success_rate: if trials == 0 {
                0.0
            } else {
                successes as f64 / trials as f64
            },
            ci_low,
            ci_high,
            mean_queries,
            median_queries: median(queries),
        }
    }
}
