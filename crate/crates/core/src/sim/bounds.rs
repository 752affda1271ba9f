use serde::{Deserialize, Serialize};

/// Tolerance trade-off between stragglers and adversaries for `N` nodes,
/// `K` shards and shards of `M = 2^log2_m` entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityBounds {
    pub nodes: u64,
    pub shards: u64,
    pub log2_m: f64,
    pub gamma: f64,
    /// `((log2 M + 1)(K - 1) + 1) / N`: the smallest admissible `gamma - 2 beta`.
    pub threshold_exact: f64,
    /// `(K / N) log2 M`, the large-parameter approximation.
    pub threshold_approx: f64,
    pub beta_max_exact: f64,
    pub beta_max_approx: f64,
    pub malicious_exact: u64,
    pub malicious_approx: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaMin {
    pub beta: f64,
    pub gamma_min_exact: f64,
    pub gamma_min_approx: f64,
    /// Responses to wait for: `ceil(gamma_min N)`.
    pub awaited_exact: u64,
    pub awaited_approx: u64,
}

// Absorbs float noise in products like 0.7954 * 10000 before rounding.
const EPS: f64 = 1e-9;

pub fn threshold_exact(nodes: u64, shards: u64, log2_m: f64) -> f64 {
    ((log2_m + 1.0) * (shards as f64 - 1.0) + 1.0) / nodes as f64
}

pub fn threshold_approx(nodes: u64, shards: u64, log2_m: f64) -> f64 {
    shards as f64 / nodes as f64 * log2_m
}

/// Largest count of malicious nodes with `2 A / N <= gamma - threshold`.
pub fn tolerable_malicious(nodes: u64, threshold: f64, gamma: f64) -> u64 {
    let v = nodes as f64 * (gamma - threshold) / 2.0;
    if v <= 0.0 {
        0
    } else {
        (v + EPS).floor() as u64
    }
}

pub fn security_bounds(nodes: u64, shards: u64, log2_m: f64, gamma: f64) -> SecurityBounds {
    let te = threshold_exact(nodes, shards, log2_m);
    let ta = threshold_approx(nodes, shards, log2_m);
    SecurityBounds {
        nodes,
        shards,
        log2_m,
        gamma,
        threshold_exact: te,
        threshold_approx: ta,
        beta_max_exact: (gamma - te) / 2.0,
        beta_max_approx: (gamma - ta) / 2.0,
        malicious_exact: tolerable_malicious(nodes, te, gamma),
        malicious_approx: tolerable_malicious(nodes, ta, gamma),
    }
}

pub fn gamma_min(nodes: u64, shards: u64, log2_m: f64, beta: f64) -> GammaMin {
    let ge = 2.0 * beta + threshold_exact(nodes, shards, log2_m);
    let ga = 2.0 * beta + threshold_approx(nodes, shards, log2_m);
    let awaited = |g: f64| (g * nodes as f64 - EPS).ceil().max(0.0) as u64;
    GammaMin {
        beta,
        gamma_min_exact: ge,
        gamma_min_approx: ga,
        awaited_exact: awaited(ge),
        awaited_approx: awaited(ga),
    }
}

/// Parses a shard size given as an integer or as `2^e`, returning `log2`.
pub fn parse_log2(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some(exp) = text.strip_prefix("2^") {
        let e: f64 = exp.trim().parse().ok()?;
        return (e >= 0.0).then_some(e);
    }
    let m: f64 = text.parse().ok()?;
    (m >= 1.0).then(|| m.log2())
}
