//! Haar moments `∫ |tr X|^{2t} dX` over `U_d`.
//!
//! The exact value counts permutations of `t` letters whose longest
//! increasing subsequence is at most `d`; by RSK this is the sum of squared
//! standard-tableau counts over partitions of `t` with at most `d` rows.
//! Two independent checks live here as well: a tensor-power recursion for
//! `d = 2` and a seeded Monte-Carlo estimator.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// A weakly decreasing list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Sorts the parts and drops zeros.
    pub fn new(mut parts: Vec<usize>) -> Partition {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.0.len()
    }

    /// Conjugate partition (column lengths).
    pub fn conjugate(&self) -> Partition {
        let width = self.0.first().copied().unwrap_or(0);
        Partition((0..width).map(|j| self.0.iter().filter(|&&r| r > j).count()).collect())
    }

    /// All partitions of `t`, in reverse lexicographic order.
    pub fn all(t: usize) -> Vec<Partition> {
        fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for p in (1..=rest.min(max)).rev() {
                cur.push(p);
                go(rest - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(t, t, &mut Vec::new(), &mut out);
        out
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Number of standard Young tableaux of shape `λ`, by the hook-length formula.
pub fn hook_dimension(shape: &Partition) -> BigUint {
    let cols = shape.conjugate();
    let mut hooks = BigUint::one();
    for (i, &row) in shape.parts().iter().enumerate() {
        for j in 0..row {
            let arm = row - j - 1;
            let leg = cols.parts()[j] - i - 1;
            hooks *= arm + leg + 1;
        }
    }
    factorial(shape.weight()) / hooks
}

/// Exact `M_{2t}(U_d)`.
pub fn haar_moment(d: usize, t: usize) -> BigUint {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), BigUint>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(d, t)) {
        return v.clone();
    }
    let value = if d >= t {
        factorial(t)
    } else {
        Partition::all(t)
            .iter()
            .filter(|p| p.rows() <= d)
            .map(|p| {
                let f = hook_dimension(p);
                &f * &f
            })
            .sum()
    };
    cache.lock().unwrap().insert((d, t), value.clone());
    value
}

/// `M_{2t}(U_2)` from the decomposition of `V^{⊗t}` into symmetric powers,
/// using `Sym^a ⊗ V = Sym^{a+1} ⊕ Sym^{a-1}`.
pub fn haar_moment_dim2_oracle(t: usize) -> BigUint {
    assert!((1..=12).contains(&t), "dimension-2 oracle supports 1 <= t <= 12");
    // mult[a] = multiplicity of Sym^a(V) in V^{⊗k}
    let mut mult = vec![BigUint::zero(); t + 2];
    mult[1] = BigUint::one();
    for _ in 1..t {
        let mut next = vec![BigUint::zero(); t + 2];
        for a in 0..=t {
            if mult[a].is_zero() {
                continue;
            }
            next[a + 1] += &mult[a];
            if a > 0 {
                next[a - 1] += &mult[a];
            }
        }
        mult = next;
    }
    mult.iter().map(|m| m * m).sum()
}

/// Monte-Carlo estimate of a Haar moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

const SHARD: u64 = 1 << 14;

/// Draws a Haar-random unitary: Gram-Schmidt on a complex Gaussian matrix,
/// each column rescaled so that the implied `R` has a positive diagonal.
/// Without that phase choice the distribution is not Haar.
pub fn sample_haar_unitary<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    for j in 0..d {
        for k in 0..j {
            let proj: Complex64 = (0..d).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..d {
                let v = cols[k][i] * proj;
                cols[j][i] -= v;
            }
        }
        // modified Gram-Schmidt yields r_jj = ‖q_j‖ > 0, which fixes the phase
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    // column-major q → row-major matrix
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[i * d + j] = *z;
        }
    }
    m
}

fn shard_seed(seed: u64, shard: u64) -> u64 {
    // splitmix64 of the pair
    let mut z = seed ^ shard.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimates `M_{2t}(U_d)` for every `t` in `ts` from the same `samples` draws.
///
/// Samples are split into fixed-size shards, each with its own sub-seed, and
/// shard sums are combined in shard order, so the result depends only on
/// `(d, ts, samples, seed)` and not on the thread count.
pub fn mc_haar_estimates(d: usize, ts: &[usize], samples: u64, seed: u64) -> Vec<McEstimate> {
    assert!(d >= 1, "dimension must be positive");
    let shards = samples.div_ceil(SHARD);
    let partial: Vec<Vec<(f64, f64)>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD.min(samples - s * SHARD);
            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(seed, s));
            let mut acc = vec![(0.0f64, 0.0f64); ts.len()];
            for _ in 0..count {
                let u = sample_haar_unitary(d, &mut rng);
                let tr: Complex64 = (0..d).map(|i| u[i * d + i]).sum();
                let x = tr.norm_sqr();
                for (slot, &t) in acc.iter_mut().zip(ts) {
                    let v = x.powi(t as i32);
                    slot.0 += v;
                    slot.1 += v * v;
                }
            }
            acc
        })
        .collect();
    let n = samples as f64;
    ts.iter()
        .enumerate()
        .map(|(k, _)| {
            let (sum, sq) = partial
                .iter()
                .fold((0.0, 0.0), |(a, b), p| (a + p[k].0, b + p[k].1));
            let mean = sum / n;
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            McEstimate {
                mean,
                stderr: (var / n).sqrt(),
                samples,
            }
        })
        .collect()
}

/// Single-moment convenience wrapper; `t = 0` is exactly 1.
pub fn mc_haar_estimate(d: usize, t: usize, samples: u64, seed: u64) -> McEstimate {
    assert!(samples >= 100, "at least 100 samples are required");
    if t == 0 {
        return McEstimate {
            mean: 1.0,
            stderr: 0.0,
            samples,
        };
    }
    mc_haar_estimates(d, &[t], samples, seed)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force count of permutations of `t` letters with LIS at most `d`.
    fn lis_count(d: usize, t: usize) -> u64 {
        fn lis(p: &[usize]) -> usize {
            let mut tails: Vec<usize> = Vec::new();
            for &x in p {
                match tails.binary_search(&x) {
                    Ok(_) => {}
                    Err(i) if i == tails.len() => tails.push(x),
                    Err(i) => tails[i] = x,
                }
            }
            tails.len()
        }
        fn perms(cur: &mut Vec<usize>, used: &mut Vec<bool>, d: usize, count: &mut u64) {
            if cur.len() == used.len() {
                if lis(cur) <= d {
                    *count += 1;
                }
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    perms(cur, used, d, count);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut count = 0;
        perms(&mut Vec::new(), &mut vec![false; t], d, &mut count);
        count
    }

    /// Counts standard tableaux by removing corner cells recursively.
    fn syt_count(shape: &[usize]) -> u64 {
        if shape.iter().all(|&r| r == 0) {
            return 1;
        }
        let mut total = 0;
        for i in 0..shape.len() {
            let last_in_col = i + 1 == shape.len() || shape[i + 1] < shape[i];
            if shape[i] > 0 && last_in_col {
                let mut s = shape.to_vec();
                s[i] -= 1;
                total += syt_count(&s);
            }
        }
        total
    }

    #[test]
    fn hook_dimension_examples() {
        assert_eq!(hook_dimension(&Partition::new(vec![5])), BigUint::one());
        assert_eq!(hook_dimension(&Partition::new(vec![2, 1])), BigUint::from(2u32));
        assert_eq!(hook_dimension(&Partition::new(vec![2, 2])), BigUint::from(2u32));
        for t in 1..=8 {
            for p in Partition::all(t) {
                assert_eq!(hook_dimension(&p), BigUint::from(syt_count(p.parts())));
            }
        }
    }

    #[test]
    fn rsk_identity() {
        for t in 1..=12 {
            let total: BigUint = Partition::all(t)
                .iter()
                .map(|p| {
                    let f = hook_dimension(p);
                    &f * &f
                })
                .sum();
            assert_eq!(total, factorial(t), "t = {t}");
        }
    }

    #[test]
    fn moment_matches_lis_enumeration() {
        for t in 1..=7 {
            for d in 1..=4 {
                assert_eq!(haar_moment(d, t), BigUint::from(lis_count(d, t)), "d={d} t={t}");
            }
        }
    }

    #[test]
    fn anchor_values() {
        assert_eq!(haar_moment(4, 4), BigUint::from(24u32));
        assert_eq!(haar_moment(7, 4), BigUint::from(24u32));
        assert_eq!(haar_moment(2, 3), BigUint::from(5u32));
        assert_eq!(haar_moment(2, 4), BigUint::from(14u32));
        assert_eq!(haar_moment(2, 5), BigUint::from(42u32));
        assert_eq!(haar_moment(3, 1), BigUint::one());
        assert_eq!(haar_moment(3, 4), BigUint::from(23u32));
    }

    #[test]
    fn dimension_two_oracle() {
        assert_eq!(haar_moment_dim2_oracle(1), BigUint::one());
        assert_eq!(haar_moment_dim2_oracle(3), BigUint::from(5u32));
        assert_eq!(haar_moment_dim2_oracle(4), BigUint::from(14u32));
        let catalan = [1u32, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];
        for t in 1..=10 {
            assert_eq!(haar_moment(2, t), BigUint::from(catalan[t - 1]));
        }
        for t in 1..=12 {
            assert_eq!(haar_moment_dim2_oracle(t), haar_moment(2, t));
        }
    }

    #[test]
    fn monotone_in_dimension() {
        for t in 1..=9 {
            for d in 1..=9 {
                assert!(haar_moment(d, t) <= haar_moment(d + 1, t));
                assert!(haar_moment(d + 1, t) <= factorial(t));
            }
        }
    }

    #[test]
    fn sampled_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 4;
        let u = sample_haar_unitary(d, &mut rng);
        for i in 0..d {
            for j in 0..d {
                let dot: Complex64 = (0..d).map(|k| u[k * d + i].conj() * u[k * d + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mc_is_reproducible_and_close() {
        let a = mc_haar_estimates(2, &[1, 2, 3], 40_000, 11);
        let b = mc_haar_estimates(2, &[1, 2, 3], 40_000, 11);
        assert_eq!(a, b);
        for (est, exact) in a.iter().zip([1.0, 2.0, 5.0]) {
            assert!((est.mean - exact).abs() < 4.0 * est.stderr, "{est:?} vs {exact}");
        }
        assert_eq!(mc_haar_estimate(3, 0, 100, 1).mean, 1.0);
    }
}
