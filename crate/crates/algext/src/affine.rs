//! The affine extractor for large prime fields: coprime degree selection,
//! the Vandermonde output matrix, the echelon-form affine-subspace sampler,
//! exact bias measurement, and exponential-sum checks.
//!
//! `E(x_1, ..., x_n) = A (x_1^{d_1}, ..., x_n^{d_n})^T` with every m
//! columns of A independent and every d_i coprime to q - 1 (so each power
//! map is a bijection and uniform input yields exactly uniform output).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gcd_u64, is_prime_u64, make_field, FieldCtx};
use crate::rank::{build_regular_matrix, MatrixTag, RegularMatrix};

// ---------------------------------------------------------------------------
// Degree selection.
// ---------------------------------------------------------------------------

/// Degrees `d_1 < ... < d_n`, all dividing `D = p_1 ... p_r` with
/// `r = ceil(log2 n)` and each prime coprime to `q - 1`. `lcm_ok` records
/// whether `D <= q^epsilon`; at desk-scale field sizes it rarely holds, and
/// `relax` lets the construction proceed with the flag on record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodDegrees {
    pub n: usize,
    pub q: u64,
    pub epsilon: f64,
    pub primes: Vec<u64>,
    pub degrees: Vec<u64>,
    pub big_d: u64,
    pub lcm_ok: bool,
}

/// The degree-selection algorithm: take the least `ceil(log2 n)` primes
/// coprime to q - 1, let D be their product, and use the n smallest
/// divisors of D (all coprime to q - 1 automatically).
pub fn good_degrees(n: usize, q: u64, epsilon: f64, relax: bool) -> Result<GoodDegrees> {
    if !is_prime_u64(q) {
        return Err(Error::NonPrime(q));
    }
    assert!(n >= 1);
    let r = if n == 1 { 0 } else { (n as f64).log2().ceil() as usize };
    let mut primes = Vec::with_capacity(r);
    let mut cand = 2u64;
    while primes.len() < r {
        if is_prime_u64(cand) && !(q - 1).is_multiple_of(cand) {
            primes.push(cand);
        }
        cand += 1;
    }
    let big_d: u64 = primes.iter().product();
    // all 2^r divisors of the squarefree D, n smallest
    let mut divisors = vec![1u64];
    for &p in &primes {
        let more: Vec<u64> = divisors.iter().map(|&d| d * p).collect();
        divisors.extend(more);
    }
    divisors.sort_unstable();
    debug_assert!(divisors.len() >= n);
    let degrees = divisors[..n].to_vec();
    let lcm_ok = (big_d as f64) <= (q as f64).powf(epsilon);
    if !lcm_ok && !relax {
        return Err(Error::LcmTooLarge);
    }
    Ok(GoodDegrees { n, q, epsilon, primes, degrees, big_d, lcm_ok })
}

// ---------------------------------------------------------------------------
// The extractor.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AffineExtractor {
    pub ctx: FieldCtx,
    pub n: usize,
    pub m: usize,
    pub matrix: RegularMatrix,
    pub degrees: GoodDegrees,
}

/// Build the extractor with `A` the Vandermonde matrix on nodes 1..n.
pub fn build_affine_ext(
    n: usize,
    m: usize,
    q: u64,
    degrees: GoodDegrees,
) -> Result<AffineExtractor> {
    let ctx = make_field(q, 1, None)?;
    if (q as usize) < n {
        return Err(Error::FieldTooSmall(format!("vandermonde needs q >= n = {n}")));
    }
    if m > n {
        return Err(Error::ShapeMismatch(format!("m = {m} > n = {n}")));
    }
    let matrix = build_regular_matrix(m, n, m, &ctx, MatrixTag::Vandermonde)?;
    Ok(AffineExtractor { ctx, n, m, matrix, degrees })
}

impl AffineExtractor {
    /// Evaluate on residues.
    pub fn extract(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch(format!("expected {} coordinates", self.n)));
        }
        let p = self.ctx.p();
        let powered: Vec<u64> =
            x.iter().zip(&self.degrees.degrees).map(|(&xi, &di)| powmod(xi, di, p)).collect();
        let mut out = Vec::with_capacity(self.m);
        for r in 0..self.m {
            let mut acc: u128 = 0;
            for (j, &pw) in powered.iter().enumerate() {
                acc += self.matrix.matrix.at(r, j).coeffs[0] as u128 * pw as u128;
            }
            out.push((acc % p as u128) as u64);
        }
        Ok(out)
    }
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Echelon-form affine subspaces.
// ---------------------------------------------------------------------------

/// One coordinate map of the parametrization: an affine form
/// `constant + sum_i coeffs[i] t_i` in the free parameters seen so far.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineForm {
    pub constant: u64,
    pub coeffs: Vec<u64>,
}

/// An affine subspace of `F_q^n` of dimension k in echelon form: pivot
/// coordinate `j_i` carries `t_i` verbatim, and every coordinate left of a
/// pivot depends only on the earlier parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineSubspace {
    pub n: usize,
    pub k: usize,
    pub pivots: Vec<usize>,
    pub forms: Vec<AffineForm>,
}

/// Sample a subspace: pivots uniform among k-subsets, free coefficients
/// uniform in F_q, deterministic given the seed.
pub fn sample_subspace(n: usize, k: usize, q: u64, rng_seed: u64) -> Result<AffineSubspace> {
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let mut pivots: Vec<usize> = Vec::with_capacity(k);
    while pivots.len() < k {
        let c = rng.gen_range(0..n);
        if !pivots.contains(&c) {
            pivots.push(c);
        }
    }
    pivots.sort_unstable();
    let mut forms = Vec::with_capacity(n);
    for j in 0..n {
        if let Some(i) = pivots.iter().position(|&pj| pj == j) {
            let mut coeffs = vec![0u64; k];
            coeffs[i] = 1;
            forms.push(AffineForm { constant: 0, coeffs });
        } else {
            // number of pivots strictly left of j
            let deps = pivots.iter().filter(|&&pj| pj < j).count();
            let mut coeffs = vec![0u64; k];
            for c in coeffs.iter_mut().take(deps) {
                *c = rng.gen_range(0..q);
            }
            forms.push(AffineForm { constant: rng.gen_range(0..q), coeffs });
        }
    }
    Ok(AffineSubspace { n, k, pivots, forms })
}

impl AffineSubspace {
    /// The identity parametrization of the full space.
    pub fn full_space(n: usize) -> AffineSubspace {
        let forms = (0..n)
            .map(|j| {
                let mut coeffs = vec![0u64; n];
                coeffs[j] = 1;
                AffineForm { constant: 0, coeffs }
            })
            .collect();
        AffineSubspace { n, k: n, pivots: (0..n).collect(), forms }
    }

    pub fn eval_form(&self, j: usize, t: &[u64], q: u64) -> u64 {
        let f = &self.forms[j];
        let mut acc = f.constant as u128;
        for (c, ti) in f.coeffs.iter().zip(t) {
            acc += *c as u128 * *ti as u128;
        }
        (acc % q as u128) as u64
    }

    pub fn point(&self, t: &[u64], q: u64) -> Vec<u64> {
        (0..self.n).map(|j| self.eval_form(j, t, q)).collect()
    }
}

// ---------------------------------------------------------------------------
// Bias measurement.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharSelection {
    All,
    Sample { count: usize, rng_seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharBiasRow {
    /// Index of the output character c (canonical index in F_q^m).
    pub c_index: u128,
    pub abs_bias: f64,
    /// Number of nonzero pivot coefficients of b = c^T A on this subspace.
    pub nonzero_pivots: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineBiasReport {
    pub rows: Vec<CharBiasRow>,
    pub max_abs_bias: f64,
}

/// Exact `|E[chi_c(E(X_V))]|` over the subspace parametrization for the
/// selected nonzero characters c: the sum
/// `q^{-k} sum_t chi_1(b_1 l_1(t)^{d_1} + ... + b_n l_n(t)^{d_n})` with
/// `b = c^T A`, accumulated through a value histogram per character.
pub fn measure_affine_bias(
    ext: &AffineExtractor,
    sub: &AffineSubspace,
    chars: CharSelection,
    budget: u64,
) -> Result<AffineBiasReport> {
    let q = ext.ctx.p();
    let k = sub.k;
    let total = (q as u128).checked_pow(k as u32).filter(|&t| t <= budget as u128);
    let Some(total) = total else {
        return Err(Error::BudgetExceeded(format!("q^k = {q}^{k} exceeds budget {budget}")));
    };
    // choose characters: nonzero c in F_q^m
    let card_out = (q as u128).pow(ext.m as u32);
    let c_indices: Vec<u128> = match chars {
        CharSelection::All => (1..card_out).collect(),
        CharSelection::Sample { count, rng_seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let c = rng.gen_range(1..card_out);
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out
        }
    };
    // b-vectors: b = c^T A per character
    let b_vecs: Vec<Vec<u64>> = c_indices
        .iter()
        .map(|&ci| {
            let mut c = Vec::with_capacity(ext.m);
            let mut v = ci;
            for _ in 0..ext.m {
                c.push((v % q as u128) as u64);
                v /= q as u128;
            }
            (0..ext.n)
                .map(|j| {
                    let mut acc: u128 = 0;
                    for (r, &cr) in c.iter().enumerate() {
                        acc += cr as u128 * ext.matrix.matrix.at(r, j).coeffs[0] as u128;
                    }
                    (acc % q as u128) as u64
                })
                .collect()
        })
        .collect();

    // per-character histogram of the exponent value, filled in one pass
    // over the parameter space
    let nchars = b_vecs.len();
    let mut hists: Vec<Vec<u32>> = vec![vec![0u32; q as usize]; nchars];
    let mut t = vec![0u64; k.max(1)];
    let mut powered = vec![0u64; ext.n];
    let mut count = 0u128;
    loop {
        if count == total {
            break;
        }
        #[allow(clippy::needless_range_loop)]
        for j in 0..ext.n {
            let lj = sub.eval_form(j, &t[..k], q);
            powered[j] = powmod(lj, ext.degrees.degrees[j], q);
        }
        for (hist, b) in hists.iter_mut().zip(&b_vecs) {
            let mut acc: u128 = 0;
            for (bj, pj) in b.iter().zip(&powered) {
                acc += *bj as u128 * *pj as u128;
            }
            hist[(acc % q as u128) as usize] += 1;
        }
        count += 1;
        if k == 0 {
            break;
        }
        let mut j = 0;
        loop {
            t[j] += 1;
            if t[j] < q {
                break;
            }
            t[j] = 0;
            j += 1;
            if j == k {
                break;
            }
        }
        if j == k {
            break;
        }
    }

    // finish each character with a q-term root-of-unity sum
    let rows: Vec<CharBiasRow> = hists
        .par_iter()
        .zip(&b_vecs)
        .zip(&c_indices)
        .map(|((hist, b), &ci)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (v, &cnt) in hist.iter().enumerate() {
                if cnt != 0 {
                    acc += ext.ctx.root_of_unity(v as u64) * cnt as f64;
                }
            }
            let bias = acc.norm() / total as f64;
            let nonzero_pivots = sub.pivots.iter().filter(|&&j| b[j] != 0).count();
            CharBiasRow { c_index: ci, abs_bias: bias, nonzero_pivots }
        })
        .collect();
    let max = rows.iter().map(|r| r.abs_bias).fold(0.0, f64::max);
    Ok(AffineBiasReport { rows, max_abs_bias: max })
}

/// Uniform-input exactness, decided analytically per output character by
/// the product structure: each factor `sum_x chi(b_j x^{d_j})` vanishes
/// whenever `b_j != 0` and `gcd(d_j, q-1) = 1`. Returns the maximum |bias|
/// over the spot-checked characters (0 unless a hypothesis fails).
pub fn uniform_input_bias(ext: &AffineExtractor) -> Result<f64> {
    let q = ext.ctx.p();
    for &d in &ext.degrees.degrees {
        if gcd_u64(d, q - 1) != 1 {
            return Err(Error::BoundViolation(format!("degree {d} shares a factor with q-1")));
        }
    }
    // every m columns independent means b = c^T A has at most m-1 zeros;
    // with all d_j bijections every nonzero c gives bias exactly 0
    let mut max_bias = 0.0f64;
    for ci in [1u128, (q as u128).pow(ext.m as u32) - 1] {
        let mut c = Vec::with_capacity(ext.m);
        let mut v = ci;
        for _ in 0..ext.m {
            c.push((v % q as u128) as u64);
            v /= q as u128;
        }
        let mut prod = 1.0f64;
        for j in 0..ext.n {
            let mut b: u128 = 0;
            for (r, &cr) in c.iter().enumerate() {
                b += cr as u128 * ext.matrix.matrix.at(r, j).coeffs[0] as u128;
            }
            let b = (b % q as u128) as u64;
            if b == 0 {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..q {
                let e = ((b as u128 * powmod(x, ext.degrees.degrees[j], q) as u128) % q as u128)
                    as u64;
                acc += ext.ctx.root_of_unity(e);
            }
            prod *= acc.norm() / q as f64;
        }
        max_bias = max_bias.max(prod);
    }
    Ok(max_bias)
}

// ---------------------------------------------------------------------------
// Exponential-sum checks.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeilTrialRow {
    pub coeffs: Vec<u64>,
    pub abs_sum: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeilCheck {
    pub rows: Vec<WeilTrialRow>,
    pub all_pass: bool,
}

/// Univariate Weil/Deligne bound check: for random smooth polynomials of
/// degree d (nonzero leading coefficient, d coprime to p),
/// `|sum_x chi(f(x))| <= (d-1) sqrt(q)`, tolerance `1e-6 sqrt(q)`.
pub fn weil_sum_check(q: u64, d: u64, trials: usize, rng_seed: u64) -> Result<WeilCheck> {
    if !is_prime_u64(q) {
        return Err(Error::NonPrime(q));
    }
    let ctx = make_field(q, 1, None)?;
    if d.is_multiple_of(q) {
        return Err(Error::BoundViolation("degree divisible by the characteristic".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let polys: Vec<Vec<u64>> = (0..trials)
        .map(|_| {
            let mut coeffs: Vec<u64> = (0..=d).map(|_| rng.gen_range(0..q)).collect();
            if coeffs[d as usize] == 0 {
                coeffs[d as usize] = 1 + rng.gen_range(0..q - 1);
            }
            coeffs
        })
        .collect();
    let bound = (d as f64 - 1.0) * (q as f64).sqrt();
    let tol = 1e-6 * (q as f64).sqrt();
    let rows: Vec<WeilTrialRow> = polys
        .par_iter()
        .map(|coeffs| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..q {
                // Horner
                let mut v: u64 = 0;
                for &c in coeffs.iter().rev() {
                    v = (((v as u128 * x as u128) + c as u128) % q as u128) as u64;
                }
                acc += ctx.root_of_unity(v);
            }
            let abs = acc.norm();
            WeilTrialRow { coeffs: coeffs.clone(), abs_sum: abs, bound, pass: abs <= bound + tol }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(WeilCheck { rows, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: u64 = 1 << 30;

    #[test]
    fn good_degrees_examples() {
        // n = 4, q = 11 (q-1 = 10): primes (3, 7), D = 21, degrees 1,3,7,21
        let g = good_degrees(4, 11, 0.5, true).unwrap();
        assert_eq!(g.primes, vec![3, 7]);
        assert_eq!(g.big_d, 21);
        assert_eq!(g.degrees, vec![1, 3, 7, 21]);
        // n = 1: r = 0, empty product, degrees (1)
        let g = good_degrees(1, 11, 0.5, true).unwrap();
        assert_eq!(g.big_d, 1);
        assert_eq!(g.degrees, vec![1]);
        // n = 4, q = 13 (q-1 = 12 = 2^2*3): primes (5, 7), D = 35
        let g = good_degrees(4, 13, 0.5, true).unwrap();
        assert_eq!(g.primes, vec![5, 7]);
        assert_eq!(g.degrees, vec![1, 5, 7, 35]);
        // relax = false errors when D > q^eps
        assert!(matches!(good_degrees(4, 11, 0.5, false), Err(Error::LcmTooLarge)));
        assert!(matches!(good_degrees(4, 12, 0.5, true), Err(Error::NonPrime(12))));
    }

    #[test]
    fn good_degrees_coprimality_grid() {
        // all degrees coprime to q-1 over a grid of (n, q)
        for q in [11u64, 13, 101, 1009, 10007] {
            for n in 1..=8usize {
                let g = good_degrees(n, q, 0.25, true).unwrap();
                assert_eq!(g.degrees.len(), n);
                for &d in &g.degrees {
                    assert_eq!(gcd_u64(d, q - 1), 1, "q={q} n={n} d={d}");
                }
                // sorted strictly increasing
                assert!(g.degrees.windows(2).all(|w| w[0] < w[1]));
                // the divisor count always suffices: 2^r >= n
                assert!(1usize << g.primes.len() >= n);
            }
        }
    }

    #[test]
    fn build_affine_examples() {
        // n = m = 1, degrees (1): E = identity
        let g = good_degrees(1, 11, 0.5, true).unwrap();
        let ext = build_affine_ext(1, 1, 11, g).unwrap();
        for x in 0..11u64 {
            assert_eq!(ext.extract(&[x]).unwrap(), vec![x]);
        }
        // n = 2, m = 1: E(x) = x1 + x2^d2 with Vandermonde row (1, 1)
        let g = good_degrees(2, 11, 0.5, true).unwrap();
        let d2 = g.degrees[1];
        let ext = build_affine_ext(2, 1, 11, g).unwrap();
        for (x1, x2) in [(0u64, 0u64), (3, 7), (10, 2)] {
            let want = (x1 + powmod(x2, d2, 11)) % 11;
            assert_eq!(ext.extract(&[x1, x2]).unwrap(), vec![want]);
        }
    }

    #[test]
    fn uniform_input_exactly_uniform_small() {
        // exact counting over all of F_11^2: output histogram flat
        let g = good_degrees(2, 11, 0.5, true).unwrap();
        let ext = build_affine_ext(2, 1, 11, g).unwrap();
        let mut hist = [0u32; 11];
        for x1 in 0..11u64 {
            for x2 in 0..11u64 {
                hist[ext.extract(&[x1, x2]).unwrap()[0] as usize] += 1;
            }
        }
        assert!(hist.iter().all(|&c| c == 11));
        // and the analytic factor check agrees
        assert!(uniform_input_bias(&ext).unwrap() < 1e-9);
    }

    #[test]
    fn sample_subspace_examples() {
        // k = n: identity parametrization reaches every point
        let sub = AffineSubspace::full_space(3);
        assert_eq!(sub.point(&[4, 5, 6], 11), vec![4, 5, 6]);
        // k = 0: a single constant point
        let sub = sample_subspace(3, 0, 11, 7).unwrap();
        assert_eq!(sub.k, 0);
        let pt = sub.point(&[], 11);
        assert_eq!(pt.len(), 3);
        // seed replay gives the identical subspace
        let a = sample_subspace(5, 2, 101, 42).unwrap();
        let b = sample_subspace(5, 2, 101, 42).unwrap();
        assert_eq!(a.pivots, b.pivots);
        for (fa, fb) in a.forms.iter().zip(&b.forms) {
            assert_eq!(fa.constant, fb.constant);
            assert_eq!(fa.coeffs, fb.coeffs);
        }
        // echelon invariants
        let s = sample_subspace(6, 3, 101, 9).unwrap();
        for (i, &j) in s.pivots.iter().enumerate() {
            let f = &s.forms[j];
            assert_eq!(f.constant, 0);
            for (idx, &c) in f.coeffs.iter().enumerate() {
                assert_eq!(c, if idx == i { 1 } else { 0 });
            }
        }
        // k too large
        assert!(matches!(sample_subspace(3, 4, 11, 0), Err(Error::KTooLarge { .. })));
    }

    #[test]
    fn measure_bias_full_space_is_zero() {
        let g = good_degrees(3, 101, 0.25, true).unwrap();
        let ext = build_affine_ext(3, 1, 101, g).unwrap();
        let sub = AffineSubspace::full_space(3);
        let rep = measure_affine_bias(&ext, &sub, CharSelection::All, B).unwrap();
        assert!(rep.max_abs_bias <= 1e-9, "full-space bias {}", rep.max_abs_bias);
    }

    #[test]
    fn measure_bias_line_cases() {
        // k = 1 line with constant coordinates: characters that only touch
        // the constants see |bias| = 1; characters with b at the pivot are
        // Weil-bounded
        let q = 101u64;
        let g = good_degrees(2, q, 0.25, true).unwrap();
        let big_d = g.big_d;
        let ext = build_affine_ext(2, 2, q, g).unwrap();
        // line x = (t, 5): pivot at 0
        let sub = AffineSubspace {
            n: 2,
            k: 1,
            pivots: vec![0],
            forms: vec![
                AffineForm { constant: 0, coeffs: vec![1] },
                AffineForm { constant: 5, coeffs: vec![0] },
            ],
        };
        let rep = measure_affine_bias(&ext, &sub, CharSelection::All, B).unwrap();
        for row in &rep.rows {
            if row.nonzero_pivots == 0 {
                assert!((row.abs_bias - 1.0).abs() < 1e-9);
            } else {
                // Deligne at n=1: (D-1) sqrt(q) / q
                let bound = (big_d as f64 - 1.0) / (q as f64).sqrt();
                assert!(row.abs_bias <= bound + 1e-9);
            }
        }
        // replay stability
        let rep2 = measure_affine_bias(&ext, &sub, CharSelection::All, B).unwrap();
        for (a, b) in rep.rows.iter().zip(&rep2.rows) {
            assert_eq!(a.abs_bias, b.abs_bias);
        }
    }

    #[test]
    fn weil_examples() {
        // q = 7, f = x^3: |sum| <= 2 sqrt(7)
        let ctx = make_field(7, 1, None).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..7u64 {
            acc += ctx.root_of_unity(x * x % 7 * x % 7);
        }
        assert!(acc.norm() <= 2.0 * 7f64.sqrt() + 1e-9);
        // degree 1: exact orthogonality
        let chk = weil_sum_check(101, 1, 10, 3).unwrap();
        for row in &chk.rows {
            assert!(row.abs_sum < 1e-9);
        }
        assert!(chk.all_pass);
        // d coprime to q-1: x^d is a bijection, sum 0
        let q = 11u64;
        let ctxq = make_field(q, 1, None).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..q {
            acc += ctxq.root_of_unity(powmod(x, 3, q)); // gcd(3, 10) = 1
        }
        assert!(acc.norm() < 1e-9);
    }

    #[test]
    fn weil_random_grid_small() {
        for q in [101u64, 1009] {
            for d in [2u64, 3, 5] {
                let chk = weil_sum_check(q, d, 25, 17).unwrap();
                assert!(chk.all_pass, "weil failed at q={q} d={d}");
            }
        }
    }
}
