//! Scalar statistics shared by the policies and the bounds.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::{Error, Result};

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Self(value))
    }

    /// Validates `value`, naming `field` in the error.
    pub fn checked(field: impl Into<String>, value: f64) -> Result<Self> {
        Self::new(value).ok_or_else(|| Error::ProbabilityOutOfRange {
            field: field.into(),
            value,
        })
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Binary relative entropy `kl(x, y)` between Bernoulli(x) and Bernoulli(y).
///
/// Uses `0 ln 0 = 0`; the result is `+inf` when `y` is 0 or 1 and `x != y`.
pub fn kl_bernoulli(x: f64, y: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
    if x == y {
        return 0.0;
    }
    if y <= 0.0 || y >= 1.0 {
        return f64::INFINITY;
    }
    let mut d = 0.0;
    if x > 0.0 {
        d += x * (x / y).ln();
    }
    if x < 1.0 {
        d += (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln();
    }
    d.max(0.0)
}

const KLUCB_ITERATIONS: usize = 64;

/// Largest `q` in `[mu_hat, 1]` with `n * kl(mu_hat, q) <= budget`.
///
/// Bisection with a fixed number of halvings, so the cost does not depend on
/// the inputs.
pub fn klucb_index(mu_hat: f64, n: u64, budget: f64) -> f64 {
    debug_assert!(n >= 1);
    if budget <= 0.0 {
        return mu_hat;
    }
    let n = n as f64;
    if n * kl_bernoulli(mu_hat, 1.0) <= budget {
        return 1.0;
    }
    let mut lo = mu_hat;
    let mut hi = 1.0;
    for _ in 0..KLUCB_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if n * kl_bernoulli(mu_hat, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// ln(n!) - ln(sqrt(2 pi n) (n/e)^n) for n = 0..=15; entry 0 is unused.
const STIRLING_ERR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_26,
    0.041_340_695_955_409_294_093_822_08,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_57,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_319,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_153,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_69,
];

fn stirling_err(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return STIRLING_ERR[n as usize];
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

// Deviance term x ln(x/np) + np - x, evaluated without cancellation near x = np.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `P(Bin(n, p) = k)` with near machine relative precision (saddle-point form).
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    let q = 1.0 - p;
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if k == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 {
            -deviance(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
        return lc.exp();
    }
    if k == n {
        let lc = if q < 0.1 {
            -deviance(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
        return lc.exp();
    }
    let kf = k as f64;
    let rest = nf - kf;
    let lc = stirling_err(n)
        - stirling_err(k)
        - stirling_err(n - k)
        - deviance(kf, nf * p)
        - deviance(rest, nf * q);
    let lf = (2.0 * std::f64::consts::PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

// Sums pmf terms starting at `from`, stepping by `step` until negligible or out of range.
fn tail_sum(n: u64, p: f64, from: i64, step: i64) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut k = from;
    while (0..=n as i64).contains(&k) {
        let term = binomial_pmf(n, p, k as u64);
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term <= (sum + comp) * 1e-18 {
            break;
        }
        k += step;
    }
    sum + comp
}

/// `P(Bin(n, p) <= k)`.
///
/// Sums whichever tail lies away from the mode, so the terms decrease
/// monotonically along the summation.
pub fn binomial_cdf(n: u64, p: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if k as u64 >= n {
        return 1.0;
    }
    let mode = ((n as f64 + 1.0) * p).floor() as i64;
    if k < mode {
        tail_sum(n, p, k, -1).min(1.0)
    } else {
        (1.0 - tail_sum(n, p, k + 1, 1)).max(0.0)
    }
}

/// CDF of Beta(alpha, beta) at `y` for integer shapes, through
/// `F_Beta(y) = 1 - F_Bin(alpha + beta - 1, y)(alpha - 1)`.
pub fn beta_cdf_via_binomial(alpha: u64, beta: u64, y: f64) -> f64 {
    debug_assert!(alpha >= 1 && beta >= 1);
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let n = alpha + beta - 1;
    let m = (alpha - 1) as i64;
    // Pick the tail that avoids cancellation in `1 - F`.
    let mode = ((n as f64 + 1.0) * y).floor() as i64;
    if m < mode {
        1.0 - tail_sum(n, y, m, -1)
    } else {
        tail_sum(n, y, m + 1, 1)
    }
    .clamp(0.0, 1.0)
}

/// One draw from Beta(alpha, beta) with integer shapes.
pub fn sample_beta<R: Rng + ?Sized>(alpha: u64, beta: u64, rng: &mut R) -> f64 {
    debug_assert!(alpha >= 1 && beta >= 1);
    Beta::new(alpha as f64, beta as f64)
        .expect("integer shapes are positive")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.5, 0.5), 0.0);
        assert!((kl_bernoulli(0.25, 0.5) - 0.130_812_035_941_136_96).abs() < 1e-12);
        assert!((kl_bernoulli(0.1875, 0.5625) - 0.296_979_552_704_785_97).abs() < 1e-12);
        assert_eq!(kl_bernoulli(0.3, 1.0), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.3, 0.0), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.0, 0.0), 0.0);
        assert_eq!(kl_bernoulli(1.0, 1.0), 0.0);
        assert!((kl_bernoulli(0.0, 0.5) - 2f64.ln()).abs() < 1e-15);
        assert!(kl_bernoulli(1.0, 0.5).is_finite());
    }

    #[test]
    fn kl_symmetry_and_pinsker() {
        for i in 1..100 {
            for j in 1..100 {
                let x = 0.01 + 0.98 * (i as f64 - 1.0) / 98.0;
                let y = 0.01 + 0.98 * (j as f64 - 1.0) / 98.0;
                let d = kl_bernoulli(x, y);
                assert!((d - kl_bernoulli(1.0 - x, 1.0 - y)).abs() < 1e-12);
                assert!(d >= 2.0 * (x - y).powi(2) - 1e-12, "pinsker at ({x},{y})");
            }
        }
    }

    #[test]
    fn klucb_examples() {
        assert_eq!(klucb_index(0.5, 10, 0.0), 0.5);
        assert!((klucb_index(0.0, 1, 2f64.ln()) - 0.5).abs() < 1e-12);
        let q = klucb_index(0.2, 5, 1.0);
        assert!((q - 0.505_986_024_698_577_34).abs() < 1e-12);
        assert!((5.0 * kl_bernoulli(0.2, q) - 1.0).abs() < 1e-9);
        assert_eq!(klucb_index(1.0, 3, 0.5), 1.0);
        assert_eq!(klucb_index(0.4, 1, f64::INFINITY), 1.0);
    }

    #[test]
    fn klucb_monotone() {
        let mut prev = 0.0;
        for b in 0..50 {
            let q = klucb_index(0.3, 7, b as f64 * 0.1);
            assert!(q >= prev);
            prev = q;
        }
        let mut prev = 1.0;
        for n in 1..50 {
            let q = klucb_index(0.3, n, 1.5);
            assert!(q <= prev);
            prev = q;
        }
    }

    #[test]
    fn binomial_examples() {
        assert!((binomial_cdf(2, 0.5, 1) - 0.75).abs() < 1e-15);
        assert_eq!(binomial_cdf(7, 0.3, 7), 1.0);
        assert_eq!(binomial_cdf(7, 0.3, -1), 0.0);
        assert!((binomial_cdf(3, 0.2, 1) - 0.896).abs() < 1e-12);
        assert_eq!(binomial_cdf(0, 0.3, 0), 1.0);
        assert_eq!(binomial_cdf(5, 0.0, 0), 1.0);
        assert_eq!(binomial_cdf(5, 1.0, 4), 0.0);
    }

    // Frozen from a 40-digit evaluation of the defining sum.
    #[test]
    fn binomial_relative_precision() {
        let cases: [(u64, f64, i64, f64); 8] = [
            (100, 0.3, 20, 0.016_462_853_241_869_484_799),
            (100, 0.3, 45, 0.999_462_985_250_852_170_45),
            (1000, 0.5, 450, 0.000_865_268_042_488_158_804_12),
            (1000, 0.01, 3, 0.010_072_654_772_014_378_802),
            (10000, 0.25, 2400, 0.010_547_467_527_717_390_159),
            (10000, 0.25, 2600, 0.989_630_256_878_692_270_73),
            (10000, 0.9, 8950, 0.050_237_834_833_902_344_034),
            (50, 0.999, 45, 2.040_786_149_341_115_343_8e-9),
        ];
        for (n, p, k, want) in cases {
            let got = binomial_cdf(n, p, k);
            assert!(((got - want) / want).abs() <= 1e-12, "({n},{p},{k}): {got} vs {want}");
        }
    }

    #[test]
    fn beta_via_binomial_examples() {
        assert!((beta_cdf_via_binomial(1, 1, 0.3) - 0.3).abs() < 1e-15);
        assert!((beta_cdf_via_binomial(2, 1, 0.5) - 0.25).abs() < 1e-15);
        assert!((beta_cdf_via_binomial(1, 2, 0.5) - 0.75).abs() < 1e-15);
        assert_eq!(beta_cdf_via_binomial(3, 4, 0.0), 0.0);
        assert_eq!(beta_cdf_via_binomial(3, 4, 1.0), 1.0);
    }

    #[test]
    fn beta_sampling_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            assert_eq!(sample_beta(3, 5, &mut a), sample_beta(3, 5, &mut b));
        }
    }

    #[test]
    fn uniform_beta_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_beta(1, 1, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(1.3).is_none());
        assert!(Probability::new(-0.1).is_none());
        assert_eq!(Probability::new(0.4).map(f64::from), Some(0.4));
        let err = Probability::checked("instance.u[0]", 1.3).unwrap_err();
        assert!(err.to_string().contains("probability out of range"));
        assert!(err.to_string().contains("instance.u[0]"));
    }
}
