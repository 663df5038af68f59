//! Enumeration constants of Boltzmann triangulations and the exact peeling
//! transition probabilities built from them.
//!
//! Everything here is exact rational arithmetic unless the function name
//! ends in `_f64`. The boundary weights `C_m` of the disc UIPT carry a factor
//! `3^{7/2} sqrt(pi)`, so only their (rational) ratios are exposed exactly.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

/// Exponential growth rate of triangulation counts.
pub fn alpha() -> ExactRational {
    ratio(27, 2)
}

/// `gamma'` in `Z_n ~ gamma' 9^n n^{-5/2}`.
pub fn gamma_prime() -> f64 {
    1.0 / (36.0 * std::f64::consts::PI.sqrt())
}

pub(crate) fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Renders a rational as `num/den`, including integers (`1/1`).
pub fn render_rational(q: &ExactRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Converts to the nearest `f64` without overflowing on huge numerators and
/// denominators.
pub fn rational_to_f64(q: &ExactRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let num = q.numer().abs();
    let den = q.denom().clone();
    if num.is_zero() {
        return 0.0;
    }
    // Shift so the integer quotient carries 64 significant bits.
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let quotient = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let value = quotient.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if q.is_negative() {
        -value
    } else {
        value
    }
}

/// Partition function `Z_m = 4 (2m-4)! / (9 m! (m-2)!) (9/4)^m` of
/// triangulations of an m-gon.
pub fn partition_function(m: u64) -> Result<ExactRational> {
    if m < 2 {
        return domain(format!("partition function needs m >= 2, got {m}"));
    }
    let num = BigInt::from(4) * factorial(2 * m - 4) * BigInt::from(9).pow(m as u32);
    let den = BigInt::from(9)
        * factorial(m)
        * factorial(m - 2)
        * BigInt::from(4).pow(m as u32);
    Ok(BigRational::new(num, den))
}

/// Half-plane peel probability `p_k = (2k-2)! / (4^k (k-1)! (k+1)!)`: the
/// chance that the revealed triangle reaches the boundary vertex at distance
/// `k` on one given side.
pub fn halfplane_pk(k: u64) -> Result<ExactRational> {
    if k < 1 {
        return domain(format!("p_k needs k >= 1, got {k}"));
    }
    let num = factorial(2 * k - 2);
    let den = BigInt::from(4).pow(k as u32) * factorial(k - 1) * factorial(k + 1);
    Ok(BigRational::new(num, den))
}

/// `9^{-k} Z_{k+1}`, the second closed form of `p_k`.
pub fn halfplane_pk_via_partition(k: u64) -> Result<ExactRational> {
    if k < 1 {
        return domain(format!("p_k needs k >= 1, got {k}"));
    }
    let z = partition_function(k + 1)?;
    Ok(z / BigRational::from_integer(BigInt::from(9).pow(k as u32)))
}

/// Exact `sum_{k > K} p_k`.
///
/// Uses the telescoping identity `sum_{j > k} p_j = (2k-1) p_k / 3` for
/// `k >= 1`; at `K = 0` the tail is the whole one-sided jump mass `1/6`.
pub fn tail_mass(big_k: u64) -> ExactRational {
    if big_k == 0 {
        return ratio(1, 6);
    }
    let pk = halfplane_pk(big_k).expect("k >= 1");
    pk * ratio(2 * big_k as i64 - 1, 3)
}

/// Probability that peeling a free triangulation of an m-gon reveals an
/// internal vertex: `Z_{m+1} / (alpha Z_m) = (2m-3)/(3m+3)`.
pub fn peel_internal_free(m: u64) -> Result<ExactRational> {
    if m < 2 {
        return domain(format!("free peel needs m >= 2, got {m}"));
    }
    Ok(ratio(2 * m as i64 - 3, 3 * m as i64 + 3))
}

/// Probability that peeling a disc UIPT of an m-gon reveals an internal
/// vertex: `C_{m+1} / (alpha C_m) = (2m-1)/(3m-3)`. Rejects the degenerate
/// `m = 2`, where the formula gives 1.
pub fn peel_internal_uipt(m: u64) -> Result<ExactRational> {
    if m < 3 {
        return domain(format!("UIPT peel needs m >= 3, got {m}"));
    }
    Ok(ratio(2 * m as i64 - 1, 3 * m as i64 - 3))
}

/// Exact `C_to / C_from` for the disc UIPT boundary weights, via the step
/// ratio `C_{j+1}/C_j = 9(2j-1) / (2(j-1))`.
pub fn uipt_weight_ratio(from: u64, to: u64) -> Result<ExactRational> {
    if from < 2 || to < 2 {
        return domain(format!("C_m needs m >= 2, got C_{to}/C_{from}"));
    }
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    let mut acc = BigRational::one();
    for j in lo..hi {
        acc *= ratio(9 * (2 * j as i64 - 1), 2 * (j as i64 - 1));
    }
    Ok(if from <= to { acc } else { acc.recip() })
}

/// Floating-point `C_m = 4(2m-3)! / (3^{7/2} sqrt(pi) (m-2)!^2) (9/4)^m`.
/// Diagnostic only; overflows to infinity for large m.
pub fn uipt_weight_approx(m: u64) -> f64 {
    assert!(m >= 2, "C_m needs m >= 2");
    let mut log = 4f64.ln() + (m as f64) * (9f64 / 4.0).ln()
        - 3.5 * 3f64.ln()
        - 0.5 * std::f64::consts::PI.ln();
    for i in 2..=(2 * m - 3) {
        log += (i as f64).ln();
    }
    for i in 2..=(m - 2) {
        log -= 2.0 * (i as f64).ln();
    }
    log.exp()
}

/// One-sided split probability in a free m-gon: the revealed triangle reaches
/// the vertex at distance `k`, leaving free triangulations of a (k+1)-gon and
/// an (m-k)-gon: `Z_{k+1} Z_{m-k} / Z_m`.
pub fn peel_split_free(m: u64, k: u64) -> Result<ExactRational> {
    if m < 3 || k < 1 || k > m - 2 {
        return domain(format!("free split needs m >= 3 and 1 <= k <= m-2, got m={m}, k={k}"));
    }
    Ok(partition_function(k + 1)? * partition_function(m - k)? / partition_function(m)?)
}

/// One-sided split probability in a disc UIPT of an m-gon: a free (k+1)-gon
/// is cut off and a UIPT remains in the (m-k)-gon: `Z_{k+1} C_{m-k} / C_m`.
pub fn peel_split_uipt(m: u64, k: u64) -> Result<ExactRational> {
    if m < 4 || k < 1 || k > m - 2 {
        return domain(format!("UIPT split needs m >= 4 and 1 <= k <= m-2, got m={m}, k={k}"));
    }
    Ok(partition_function(k + 1)? * uipt_weight_ratio(m, m - k)?)
}

const PK_TABLE_LEN: usize = 1 << 16;

fn pk_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; PK_TABLE_LEN + 1];
        t[1] = 0.125;
        for k in 1..PK_TABLE_LEN {
            let kf = k as f64;
            t[k + 1] = t[k] * (2.0 * kf - 1.0) / (2.0 * (kf + 2.0));
        }
        t
    })
}

/// `C(2n,n) / 4^n` from its asymptotic series; accurate to double precision
/// for `n >= 2^16`.
fn central_binomial_scaled_asymptotic(n: f64) -> f64 {
    let x = 1.0 / n;
    let series = 1.0 - x / 8.0 + x * x / 128.0 + 5.0 * x.powi(3) / 1024.0
        - 21.0 * x.powi(4) / 32768.0;
    series / (std::f64::consts::PI * n).sqrt()
}

/// `p_k` in double precision, for any `k >= 1`.
pub fn pk_f64(k: u64) -> f64 {
    assert!(k >= 1, "p_k needs k >= 1");
    if (k as usize) <= PK_TABLE_LEN {
        return pk_table()[k as usize];
    }
    let kf = k as f64;
    central_binomial_scaled_asymptotic(kf - 1.0) / (4.0 * kf * (kf + 1.0))
}

/// `sum_{j > k} p_j` in double precision.
pub fn tail_mass_f64(k: u64) -> f64 {
    if k == 0 {
        return 1.0 / 6.0;
    }
    (2.0 * k as f64 - 1.0) / 3.0 * pk_f64(k)
}

/// Exact `sum_{j >= J} sum_{i > j} p_i`, the summed tail masses.
///
/// Telescopes to `2 (2J-1)(J+1) p_J / 3` for `J >= 1`; the value at `J = 0`
/// is `1/3`.
pub fn cumulative_tail(j: u64) -> ExactRational {
    if j == 0 {
        return ratio(1, 3);
    }
    let jj = j as i64;
    halfplane_pk(j).expect("j >= 1") * ratio(2 * (2 * jj - 1) * (jj + 1), 3)
}

pub fn cumulative_tail_f64(j: u64) -> f64 {
    if j == 0 {
        return 1.0 / 3.0;
    }
    let jf = j as f64;
    2.0 * (2.0 * jf - 1.0) * (jf + 1.0) / 3.0 * pk_f64(j)
}

/// Scale function of the non-lazy boundary walk,
/// `W(n) = (2n+1) C(2n, n) / 4^n`: the solution of
/// `W(n) = (2/3) W(n+1) + sum_k 2 p_k W(n-k)` with `W(0) = 1`, `W(<0) = 0`.
/// Starting from `x`, the walk reaches `N+1` before `Z^-` with probability
/// `W(x-1) / W(N)`.
pub fn scale_function(n: u64) -> ExactRational {
    (1..=n).fold(BigRational::one(), |acc, j| acc * ratio(2 * j as i64 + 1, 2 * j as i64))
}

pub fn scale_function_f64(n: u64) -> f64 {
    // C(2n,n)/4^n = 4 (n+1)(n+2) p_{n+1}
    let nf = n as f64;
    4.0 * (2.0 * nf + 1.0) * (nf + 1.0) * (nf + 2.0) * pk_f64(n + 1)
}

/// Memoized `Z_m` and `p_k` up to a fixed index. Lookups beyond the bound
/// are extended on demand with the exact ratio recurrences
/// `Z_{m+1}/Z_m = 9(2m-3)/(2(m+1))` and `p_{k+1}/p_k = (2k-1)/(2(k+2))`.
///
/// Immutable after construction, so it can be shared across threads.
#[derive(Debug, Clone)]
pub struct EnumerationTable {
    zcache: Vec<ExactRational>,
    pkcache: Vec<ExactRational>,
    max_index: u64,
}

impl Default for EnumerationTable {
    fn default() -> Self {
        Self::new(Self::DEFAULT_MAX_INDEX)
    }
}

impl EnumerationTable {
    pub const DEFAULT_MAX_INDEX: u64 = 512;

    pub fn new(max_index: u64) -> Self {
        let max_index = max_index.max(2);
        let mut zcache = Vec::with_capacity(max_index as usize - 1);
        zcache.push(ratio(9, 8));
        for m in 2..max_index {
            let next = zcache.last().unwrap() * z_step(m);
            zcache.push(next);
        }
        let mut pkcache = Vec::with_capacity(max_index as usize);
        pkcache.push(ratio(1, 8));
        for k in 1..max_index {
            let next = pkcache.last().unwrap() * pk_step(k);
            pkcache.push(next);
        }
        EnumerationTable { zcache, pkcache, max_index }
    }

    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    /// `Z_m`, `m >= 2`.
    pub fn z(&self, m: u64) -> Result<ExactRational> {
        if m < 2 {
            return domain(format!("partition function needs m >= 2, got {m}"));
        }
        if m <= self.max_index {
            return Ok(self.zcache[(m - 2) as usize].clone());
        }
        let mut acc = self.zcache.last().unwrap().clone();
        for j in self.max_index..m {
            acc *= z_step(j);
        }
        Ok(acc)
    }

    /// `p_k`, `k >= 1`.
    pub fn p(&self, k: u64) -> Result<ExactRational> {
        if k < 1 {
            return domain(format!("p_k needs k >= 1, got {k}"));
        }
        if k <= self.max_index {
            return Ok(self.pkcache[(k - 1) as usize].clone());
        }
        let mut acc = self.pkcache.last().unwrap().clone();
        for j in self.max_index..k {
            acc *= pk_step(j);
        }
        Ok(acc)
    }
}

fn z_step(m: u64) -> ExactRational {
    ratio(9 * (2 * m as i64 - 3), 2 * (m as i64 + 1))
}

fn pk_step(k: u64) -> ExactRational {
    ratio(2 * k as i64 - 1, 2 * (k as i64 + 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ratio(n, d)
    }

    #[test]
    fn cumulative_tail_telescopes() {
        let mut partial = BigRational::zero();
        for j in 0..60u64 {
            assert_eq!(cumulative_tail(j) + &partial, q(1, 3), "j={j}");
            partial += tail_mass(j);
            let rel = (cumulative_tail_f64(j) - rational_to_f64(&cumulative_tail(j))).abs()
                / rational_to_f64(&cumulative_tail(j));
            assert!(rel < 1e-13);
        }
    }

    #[test]
    fn scale_function_solves_the_harmonic_recursion() {
        let w: Vec<ExactRational> = (0..=40).map(scale_function).collect();
        assert_eq!(w[1], q(3, 2));
        for n in 0..40usize {
            let mut rhs = q(2, 3) * &w[n + 1];
            for k in 1..=n {
                rhs += q(2, 1) * halfplane_pk(k as u64).unwrap() * &w[n - k];
            }
            assert_eq!(rhs, w[n], "n={n}");
        }
        for n in [0u64, 1, 7, 500, 70_000, 10_000_000] {
            let exact = if n <= 500 { rational_to_f64(&scale_function(n)) } else {
                // Asymptotic 2 sqrt(n/pi) (1 + 3/(8n)) is accurate to O(n^{-2}).
                2.0 * (n as f64 / std::f64::consts::PI).sqrt() * (1.0 + 3.0 / (8.0 * n as f64))
            };
            let rel = (scale_function_f64(n) - exact).abs() / exact;
            assert!(rel < 1e-9, "n={n}: {rel}");
        }
    }

    #[test]
    fn partition_function_small_values() {
        assert_eq!(partition_function(2).unwrap(), q(9, 8));
        assert_eq!(partition_function(3).unwrap(), q(27, 16));
        assert_eq!(partition_function(4).unwrap(), q(729, 128));
        assert!(partition_function(1).is_err());
    }

    #[test]
    fn partition_function_ratio_recurrence() {
        for m in 2..=200u64 {
            let r = partition_function(m + 1).unwrap() / partition_function(m).unwrap();
            assert_eq!(r, q(9 * (2 * m as i64 - 3), 2 * (m as i64 + 1)), "m={m}");
        }
    }

    #[test]
    fn pk_two_closed_forms_agree() {
        assert_eq!(halfplane_pk(1).unwrap(), q(1, 8));
        assert_eq!(halfplane_pk(2).unwrap(), q(1, 48));
        assert_eq!(halfplane_pk(3).unwrap(), q(1, 128));
        for k in 1..=60 {
            assert_eq!(halfplane_pk(k).unwrap(), halfplane_pk_via_partition(k).unwrap());
        }
        assert!(halfplane_pk(0).is_err());
    }

    #[test]
    fn tail_mass_matches_partial_sums() {
        assert_eq!(tail_mass(0), q(1, 6));
        assert_eq!(tail_mass(1), q(1, 24));
        assert_eq!(tail_mass(3), q(1, 6) - q(1, 8) - q(1, 48) - q(1, 128));
        let mut partial = BigRational::zero();
        for k in 1..=200u64 {
            partial += halfplane_pk(k).unwrap();
            assert_eq!(tail_mass(k), q(1, 6) - &partial, "K={k}");
            assert!(tail_mass(k) < tail_mass(k - 1));
        }
    }

    #[test]
    fn internal_probabilities() {
        assert_eq!(peel_internal_free(3).unwrap(), q(1, 4));
        assert_eq!(peel_internal_free(6).unwrap(), q(3, 7));
        assert_eq!(peel_internal_free(2).unwrap(), q(1, 9));
        for m in 2..=40 {
            let via_z = partition_function(m + 1).unwrap() / (alpha() * partition_function(m).unwrap());
            assert_eq!(peel_internal_free(m).unwrap(), via_z);
        }
        assert_eq!(peel_internal_uipt(3).unwrap(), q(5, 6));
        assert_eq!(peel_internal_uipt(4).unwrap(), q(7, 9));
        assert_eq!(peel_internal_uipt(10).unwrap(), q(19, 27));
        assert!(peel_internal_uipt(2).is_err());
    }

    /// `C_m * 3^{7/2} sqrt(pi)`, rational.
    fn uipt_weight_rational_part(m: u64) -> ExactRational {
        let num = BigInt::from(4) * factorial(2 * m - 3) * BigInt::from(9).pow(m as u32);
        let f = factorial(m - 2);
        BigRational::new(num, &f * &f * BigInt::from(4).pow(m as u32))
    }

    #[test]
    fn uipt_ratio_consistent_with_closed_form() {
        for m in 2..=40u64 {
            let direct = uipt_weight_rational_part(m + 1) / uipt_weight_rational_part(m);
            assert_eq!(uipt_weight_ratio(m, m + 1).unwrap(), direct);
            let internal = direct / alpha();
            if m >= 3 {
                assert_eq!(internal, peel_internal_uipt(m).unwrap());
            }
        }
        assert_eq!(
            uipt_weight_ratio(7, 3).unwrap(),
            uipt_weight_rational_part(3) / uipt_weight_rational_part(7)
        );
        let approx = uipt_weight_approx(6) / uipt_weight_approx(5);
        assert!((approx - rational_to_f64(&uipt_weight_ratio(5, 6).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn free_split_values_and_normalization() {
        assert_eq!(peel_split_free(4, 1).unwrap(), q(1, 3));
        for m in 3..=30 {
            let z = |i| partition_function(i).unwrap();
            assert_eq!(peel_split_free(m, m - 2).unwrap(), z(m - 1) * z(2) / z(m));
        }
        let z = |i| partition_function(i).unwrap();
        assert_eq!(peel_split_free(6, 2).unwrap(), z(3) * z(4) / z(6));
        assert!(peel_split_free(6, 5).is_err());
        assert!(peel_split_free(6, 0).is_err());
        // Every other boundary vertex is reached at exactly one one-sided
        // distance, so the one-sided sum closes the law.
        for m in 3..=100u64 {
            let mut total = peel_internal_free(m).unwrap();
            for k in 1..=m - 2 {
                total += peel_split_free(m, k).unwrap();
            }
            assert_eq!(total, BigRational::one(), "m={m}");
        }
        // The 2-gon closes up on its own with probability 1/Z_2.
        assert_eq!(peel_internal_free(2).unwrap() + partition_function(2).unwrap().recip(), BigRational::one());
    }

    #[test]
    fn uipt_split_values() {
        let z = |i| partition_function(i).unwrap();
        let expect = z(2) * uipt_weight_rational_part(4) / uipt_weight_rational_part(5);
        assert_eq!(peel_split_uipt(5, 1).unwrap(), expect);
        let expect = z(4) * uipt_weight_rational_part(2) / uipt_weight_rational_part(5);
        assert_eq!(peel_split_uipt(5, 3).unwrap(), expect);
        let far = rational_to_f64(&peel_split_uipt(1000, 1).unwrap());
        assert!((far - 0.125).abs() < 1e-3);
        assert!(peel_split_uipt(3, 1).is_err());
    }

    #[test]
    fn table_matches_closed_forms_and_extends() {
        let t = EnumerationTable::new(40);
        for m in 2..=60 {
            assert_eq!(t.z(m).unwrap(), partition_function(m).unwrap());
        }
        for k in 1..=60 {
            assert_eq!(t.p(k).unwrap(), halfplane_pk(k).unwrap());
            let nine = BigRational::from_integer(BigInt::from(9).pow(k as u32));
            assert_eq!(t.p(k).unwrap(), t.z(k + 1).unwrap() / nine);
        }
        assert!(t.z(1).is_err());
        assert!(t.p(0).is_err());
    }

    #[test]
    fn pk_ratio_recurrence_to_ten_thousand() {
        let t = EnumerationTable::new(64);
        let mut prev = t.p(1).unwrap();
        for k in 1..=10_000u64 {
            let next = &prev * pk_step(k);
            assert_eq!(&next / &prev, q(2 * k as i64 - 1, 2 * (k as i64 + 2)));
            prev = next;
        }
        assert_eq!(prev, t.p(10_001).unwrap());
    }

    #[test]
    fn f64_probabilities_track_exact_values() {
        for k in [1u64, 2, 3, 10, 100, 1000, 5000] {
            let exact = rational_to_f64(&halfplane_pk(k).unwrap());
            assert!((pk_f64(k) / exact - 1.0).abs() < 1e-12, "k={k}");
            let tail = rational_to_f64(&tail_mass(k));
            assert!((tail_mass_f64(k) / tail - 1.0).abs() < 1e-12, "k={k}");
        }
        // Table and asymptotic series meet smoothly.
        let n = PK_TABLE_LEN as u64;
        let from_table = pk_f64(n) * (2.0 * n as f64 - 1.0) / (2.0 * (n as f64 + 2.0));
        assert!((pk_f64(n + 1) / from_table - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pk_stirling_constant() {
        let c = 9.0 * gamma_prime();
        let at = |k: u64| pk_f64(k) * (k as f64).powf(2.5);
        let drift = ((at(10_000) - c) / c).abs();
        assert!(drift < 0.01, "drift {drift}");
        assert!(((at(1000) - c) / c).abs() < 0.01);
    }

    #[test]
    fn rational_to_f64_on_huge_values() {
        // Numerator and denominator of p_3000 both overflow f64 on their own.
        let p = halfplane_pk(3000).unwrap();
        assert!(p.numer().to_f64().map_or(true, |v| v.is_infinite()));
        assert!((rational_to_f64(&p) / pk_f64(3000) - 1.0).abs() < 1e-12);
        assert!((rational_to_f64(&q(-1, 3)) + 1.0 / 3.0).abs() < 1e-16);
    }
}
