//! Exact hypergeometric probabilities, one-tailed mid-p-values and
//! Benjamini–Hochberg adjustment.
//!
//! The pmf uses Loader's saddle-point decomposition (Stirling error plus a
//! deviance term) evaluated in log space. Unlike raw differences of
//! log-gamma values it keeps relative accuracy near machine precision even
//! when the population runs into the millions.

use serde::Serialize;

use crate::error::{Error, Result};

/// Hypergeometric law: `draws` items taken without replacement from a
/// population of `population`, of which `successes` are marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HypergeomParams {
    pub population: u64,
    pub successes: u64,
    pub draws: u64,
}

impl HypergeomParams {
    pub fn new(population: u64, successes: u64, draws: u64) -> Result<Self> {
        if successes > population || draws > population {
            return Err(Error::InvalidParameter(format!(
                "hypergeometric parameters out of range: N={population}, K={successes}, n={draws}"
            )));
        }
        Ok(HypergeomParams {
            population,
            successes,
            draws,
        })
    }

    /// `n K / N`, zero for an empty population.
    pub fn mean(&self) -> f64 {
        if self.population == 0 {
            0.0
        } else {
            self.draws as f64 * self.successes as f64 / self.population as f64
        }
    }

    /// Inclusive support bounds `(max(0, n+K-N), min(n, K))`.
    pub fn support(&self) -> (u64, u64) {
        let lo = (self.draws + self.successes).saturating_sub(self.population);
        (lo, self.draws.min(self.successes))
    }

    fn mode(&self) -> u64 {
        let (lo, hi) = self.support();
        let m = (self.draws as u128 + 1) * (self.successes as u128 + 1) / (self.population as u128 + 2);
        (m as u64).clamp(lo, hi)
    }
}

/// `ln C(n, k)`; `-inf` outside `0 <= k <= n`.
pub fn log_choose(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

// ln(n!) - (n + 1/2) ln n + n - ln sqrt(2 pi) for n = 0..=15 (entry 0 unused).
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_3,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_87,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return STIRLERR_SMALL[n as usize];
    }
    let n = n as f64;
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np - x` without cancellation near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}

/// Log binomial probability `ln P(Bin(n, p) = x)` with `q = 1 - p` supplied
/// separately to keep precision.
fn log_dbinom_raw(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if x > n {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if x == 0 {
        if n == 0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = x as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln P(X = x)`.
pub fn hypergeom_log_pmf(x: u64, params: &HypergeomParams) -> f64 {
    let (lo, hi) = params.support();
    if x < lo || x > hi {
        return f64::NEG_INFINITY;
    }
    let HypergeomParams {
        population,
        successes,
        draws,
    } = *params;
    if draws == 0 || draws == population {
        return 0.0;
    }
    let failures = population - successes;
    let p = draws as f64 / population as f64;
    let q = (population - draws) as f64 / population as f64;
    log_dbinom_raw(x, successes, p, q) + log_dbinom_raw(draws - x, failures, p, q)
        - log_dbinom_raw(draws, population, p, q)
}

pub fn hypergeom_pmf(x: u64, params: &HypergeomParams) -> f64 {
    hypergeom_log_pmf(x, params).exp()
}

/// `(P(X < x), P(X = x), P(X > x))`.
///
/// The side of `x` that excludes the mode is summed term by term (terms
/// shrink monotonically away from the mode, so the sum stops once they no
/// longer register); the other side is its complement.
fn split_mass(x: u64, params: &HypergeomParams) -> (f64, f64, f64) {
    let (lo, hi) = params.support();
    if x < lo {
        return (0.0, 0.0, 1.0);
    }
    if x > hi {
        return (1.0, 0.0, 0.0);
    }
    let at = hypergeom_pmf(x, params);
    let accumulate = |terms: &mut dyn Iterator<Item = u64>| {
        let mut acc = 0.0;
        for y in terms {
            let t = hypergeom_pmf(y, params);
            if t == 0.0 || t < acc * 1e-17 {
                break;
            }
            acc += t;
        }
        acc
    };
    if x >= params.mode() {
        let above = accumulate(&mut (x + 1..=hi));
        let below = (1.0 - at - above).clamp(0.0, 1.0);
        (below, at, above)
    } else {
        let below = accumulate(&mut (lo..x).rev());
        let above = (1.0 - at - below).clamp(0.0, 1.0);
        (below, at, above)
    }
}

/// Over-enrichment mid-p-value `½ P(X = x) + P(X > x)`.
pub fn upper_mid_p(x: u64, params: &HypergeomParams) -> f64 {
    let (_, at, above) = split_mass(x, params);
    (0.5 * at + above).clamp(0.0, 1.0)
}

/// Under-enrichment mid-p-value `½ P(X = x) + P(X < x)`.
pub fn lower_mid_p(x: u64, params: &HypergeomParams) -> f64 {
    let (below, at, _) = split_mass(x, params);
    (0.5 * at + below).clamp(0.0, 1.0)
}

/// Benjamini–Hochberg step-up adjustment, returned in input order and
/// capped at 1.
pub fn bh_adjust(pvalues: &[f64]) -> Vec<f64> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &idx) in order.iter().enumerate().rev() {
        let rank = pos + 1;
        running = running.min((m as f64 * pvalues[idx] / rank as f64).min(1.0));
        adjusted[idx] = running;
    }
    adjusted
}
