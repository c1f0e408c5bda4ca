//! Deterministic rank extractors/condensers for varieties and the linear
//! seeded rank extractor family, with empirical rank-preservation and
//! fiber-finiteness checks.
//!
//! The deterministic construction powers coordinates by pairwise coprime
//! degrees and mixes them through a k-regular matrix; its fibers over any
//! low-degree variety are finite, which is what the surveys verify point
//! by point.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::constants::{PRIME_SIEVE_LIMIT, REGULARITY_EXHAUSTIVE_CAP, REGULARITY_SAMPLES};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::variety::{for_each_point, for_each_point_prime, MultiPoly, PolynomialMap, VarietySpec};

// ---------------------------------------------------------------------------
// Dense matrices over a field, with Gaussian elimination.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixF {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FieldElement>,
}

impl MatrixF {
    pub fn new(rows: usize, cols: usize, data: Vec<FieldElement>) -> Self {
        assert_eq!(data.len(), rows * cols);
        MatrixF { rows, cols, data }
    }

    pub fn zero(ctx: &FieldCtx, rows: usize, cols: usize) -> Self {
        MatrixF { rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn at(&self, r: usize, c: usize) -> &FieldElement {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    #[allow(clippy::needless_range_loop)]
    pub fn rank(&self, ctx: &FieldCtx) -> usize {
        let mut m: Vec<Vec<FieldElement>> = (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect();
        let mut rank = 0;
        for col in 0..self.cols {
            let pivot = (rank..self.rows).find(|&r| !m[r][col].is_zero());
            let Some(pr) = pivot else { continue };
            m.swap(rank, pr);
            let inv = ctx.inv(&m[rank][col]).expect("pivot nonzero");
            for c in col..self.cols {
                m[rank][c] = ctx.mul(&m[rank][c], &inv);
            }
            for r in 0..self.rows {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in col..self.cols {
                        let sub = ctx.mul(&f, &m[rank][c]);
                        m[r][c] = ctx.sub(&m[r][c], &sub);
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, ctx: &FieldCtx, rhs: &MatrixF) -> MatrixF {
        assert_eq!(self.cols, rhs.rows);
        let mut out = MatrixF::zero(ctx, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let add = ctx.mul(a, rhs.at(k, c));
                    let cur = out.at(r, c).clone();
                    out.set(r, c, ctx.add(&cur, &add));
                }
            }
        }
        out
    }

    #[allow(clippy::needless_range_loop)]
    pub fn apply(&self, ctx: &FieldCtx, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = ctx.zero();
                for c in 0..self.cols {
                    acc = ctx.add(&acc, &ctx.mul(self.at(r, c), &v[c]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self, ctx: &FieldCtx) -> MatrixF {
        let mut out = MatrixF::zero(ctx, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c).clone());
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Primes and coprime degree selection.
// ---------------------------------------------------------------------------

/// All primes up to the configured sieve limit, computed once;
/// configurations needing larger primes are rejected.
pub fn primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = PRIME_SIEVE_LIMIT as usize;
        let mut sieve = vec![true; limit + 1];
        let mut out = Vec::new();
        for n in 2..=limit {
            if sieve[n] {
                out.push(n as u64);
                let mut k = n * n;
                while k <= limit {
                    sieve[k] = false;
                    k += n;
                }
            }
        }
        out
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeStrategy {
    DistinctPrimes,
    PrimePowers,
}

/// Pairwise coprime degrees, all exceeding `d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoprimeDegrees {
    pub n: usize,
    pub d: u64,
    pub degrees: Vec<u64>,
    pub strategy: DegreeStrategy,
}

/// Deterministic degree selection. `DistinctPrimes` takes the n smallest
/// primes greater than d; `PrimePowers` takes, for the n smallest primes
/// p_i, the least power of p_i exceeding d.
pub fn choose_degrees(n: usize, d: u64, strategy: DegreeStrategy) -> Result<CoprimeDegrees> {
    let primes = primes();
    let degrees: Vec<u64> = match strategy {
        DegreeStrategy::DistinctPrimes => {
            let start = primes.partition_point(|&p| p <= d);
            if start + n > primes.len() {
                return Err(Error::BoundViolation("prime sieve exhausted".into()));
            }
            primes[start..start + n].to_vec()
        }
        DegreeStrategy::PrimePowers => {
            if n > primes.len() {
                return Err(Error::BoundViolation("prime sieve exhausted".into()));
            }
            primes[..n]
                .iter()
                .map(|&p| {
                    let mut pw = p;
                    while pw <= d {
                        pw = pw
                            .checked_mul(p)
                            .ok_or_else(|| Error::BoundViolation("degree overflow".into()))?;
                    }
                    Ok(pw)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(CoprimeDegrees { n, d, degrees, strategy })
}

// ---------------------------------------------------------------------------
// k-regular matrices.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixTag {
    Vandermonde,
    Identity,
    AllOnes,
    DropOne,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    Exhaustive,
    Sampled,
}

/// A matrix certified to be k-regular: any `certified_k` distinct columns
/// are linearly independent.
#[derive(Clone, Debug)]
pub struct RegularMatrix {
    pub matrix: MatrixF,
    pub certified_k: usize,
    pub tag: MatrixTag,
    pub certificate: Certificate,
}

/// Build one of the named constructions and certify its regularity. The
/// Vandermonde nodes are the first `n` field elements in enumeration order
/// with zero moved to the back, so for prime fields they read 1, 2, ..., n.
pub fn build_regular_matrix(
    m: usize,
    n: usize,
    k: usize,
    ctx: &FieldCtx,
    tag: MatrixTag,
) -> Result<RegularMatrix> {
    let matrix = match tag {
        MatrixTag::Vandermonde => {
            if ctx.q() < n as u128 {
                return Err(Error::FieldTooSmall(format!(
                    "vandermonde needs q >= {n} distinct nodes"
                )));
            }
            let nodes: Vec<FieldElement> = ctx
                .elements()
                .skip(1)
                .take(n)
                .chain(std::iter::once(ctx.zero()))
                .take(n)
                .collect();
            let mut data = Vec::with_capacity(m * n);
            for r in 0..m {
                for node in nodes.iter() {
                    data.push(ctx.pow(node, r as u128));
                }
            }
            MatrixF::new(m, n, data)
        }
        MatrixTag::Identity => {
            if m != n {
                return Err(Error::ShapeMismatch("identity requires m = n".into()));
            }
            let mut mx = MatrixF::zero(ctx, m, n);
            for i in 0..m {
                mx.set(i, i, ctx.one());
            }
            mx
        }
        MatrixTag::AllOnes => {
            if m != 1 {
                return Err(Error::ShapeMismatch("all-ones requires m = 1".into()));
            }
            MatrixF::new(1, n, vec![ctx.one(); n])
        }
        MatrixTag::DropOne => {
            if m != n - 1 {
                return Err(Error::ShapeMismatch("drop-one requires m = n - 1".into()));
            }
            let mut mx = MatrixF::zero(ctx, m, n);
            for i in 0..m {
                mx.set(i, i, ctx.one());
                mx.set(i, n - 1, ctx.from_i64(-1));
            }
            mx
        }
        MatrixTag::Custom => {
            return Err(Error::ShapeMismatch("custom matrices go through certify_regular".into()))
        }
    };
    certify_regular(matrix, k, ctx, tag)
}

/// Verify k-regularity by rank computation over column subsets, exhaustively
/// when `C(n, k)` is small enough, by random subsets otherwise (the
/// certificate is downgraded to `Sampled`).
pub fn certify_regular(
    matrix: MatrixF,
    k: usize,
    ctx: &FieldCtx,
    tag: MatrixTag,
) -> Result<RegularMatrix> {
    let n = matrix.cols;
    if k > matrix.rows.min(n) {
        return Err(Error::ShapeMismatch(format!(
            "k = {k} exceeds min(m, n) = {}",
            matrix.rows.min(n)
        )));
    }
    let subsets = binomial(n as u64, k as u64);
    let check = |cols: &[usize]| -> bool {
        let mut data: Vec<FieldElement> = Vec::with_capacity(matrix.rows * cols.len());
        for r in 0..matrix.rows {
            for &c in cols {
                data.push(matrix.at(r, c).clone());
            }
        }
        MatrixF::new(matrix.rows, cols.len(), data).rank(ctx) == k
    };
    let certificate = if subsets <= REGULARITY_EXHAUSTIVE_CAP {
        let mut cols: Vec<usize> = (0..k).collect();
        loop {
            if !check(&cols) {
                return Err(Error::BoundViolation(format!(
                    "columns {cols:?} are dependent; matrix is not {k}-regular"
                )));
            }
            if !next_combination(&mut cols, n) {
                break;
            }
        }
        Certificate::Exhaustive
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x7265_6775);
        for _ in 0..REGULARITY_SAMPLES {
            let mut cols: Vec<usize> = Vec::with_capacity(k);
            while cols.len() < k {
                let c = rng.gen_range(0..n);
                if !cols.contains(&c) {
                    cols.push(c);
                }
            }
            cols.sort_unstable();
            if !check(&cols) {
                return Err(Error::BoundViolation(format!(
                    "columns {cols:?} are dependent; matrix is not {k}-regular"
                )));
            }
        }
        Certificate::Sampled
    };
    Ok(RegularMatrix { matrix, certified_k: k, tag, certificate })
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn next_combination(cols: &mut [usize], n: usize) -> bool {
    let k = cols.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if cols[i] < n - (k - i) {
            cols[i] += 1;
            for j in i + 1..k {
                cols[j] = cols[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// The deterministic rank extractor.
// ---------------------------------------------------------------------------

/// The diagonal-power rank condenser: component `i` of the induced map is
/// `sum_j c_{i,j} X_j^{d_j}`.
#[derive(Clone, Debug)]
pub struct DiagonalPowerCondenser {
    pub degrees: CoprimeDegrees,
    pub matrix: RegularMatrix,
    pub map: PolynomialMap,
}

pub fn diagonal_power_map(
    ctx: &FieldCtx,
    degrees: CoprimeDegrees,
    matrix: RegularMatrix,
) -> Result<DiagonalPowerCondenser> {
    let n = degrees.degrees.len();
    if matrix.matrix.cols != n {
        return Err(Error::DegreeCountMismatch);
    }
    let m = matrix.matrix.rows;
    let mut comps = Vec::with_capacity(m);
    for r in 0..m {
        let mut raw = Vec::new();
        for (j, &dj) in degrees.degrees.iter().enumerate() {
            let c = matrix.matrix.at(r, j).clone();
            if c.is_zero() {
                continue;
            }
            let mut exps = vec![0u32; n];
            exps[j] = dj as u32;
            raw.push((c, exps));
        }
        comps.push(MultiPoly::new(ctx, n, raw)?);
    }
    let map = PolynomialMap::new(ctx, comps)?;
    Ok(DiagonalPowerCondenser { degrees, matrix, map })
}

impl DiagonalPowerCondenser {
    /// Per-row maximal diagonal degree (over nonzero entries).
    pub fn row_degrees(&self) -> Vec<u64> {
        (0..self.matrix.matrix.rows)
            .map(|r| {
                self.degrees
                    .degrees
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| !self.matrix.matrix.at(r, *j).is_zero())
                    .map(|(_, &d)| d)
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        serde_json::json!({
            "field": ctx.token(),
            "degrees": self.degrees,
            "matrix_tag": format!("{:?}", self.matrix.tag),
            "matrix": (0..self.matrix.matrix.rows).map(|r| {
                (0..self.matrix.matrix.cols)
                    .map(|c| ctx.to_index(self.matrix.matrix.at(r, c)).to_string())
                    .collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberCheck {
    pub max_fiber_size: u64,
    pub bezout_cap: u64,
    pub fibers_inspected: u64,
    pub pass: bool,
}

/// Enumerate all fibers of the condenser over a variety and verify every
/// size against the Bezout cap `deg_bound(V) * prod_i max_row_degree_i`.
pub fn fiber_finiteness_check(
    ext: &DiagonalPowerCondenser,
    v: &VarietySpec,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<FiberCheck> {
    let cap: u64 = v.deg_bound() * ext.row_degrees().iter().product::<u64>().max(1);
    let mut fibers: HashMap<u128, u64> = HashMap::new();
    if ctx.is_prime_field() {
        let p = ctx.p();
        let mut img = Vec::new();
        for_each_point_prime(v, ctx, budget, |pt| {
            ext.map.eval_u64_prime(p, pt, &mut img);
            let mut idx: u128 = 0;
            for &c in img.iter().rev() {
                idx = idx * p as u128 + c as u128;
            }
            *fibers.entry(idx).or_insert(0) += 1;
        })?;
    } else {
        let mut err = None;
        for_each_point(v, ctx, budget, |pt| {
            if err.is_some() {
                return;
            }
            match ext.map.eval(ctx, pt) {
                Ok(img) => {
                    let mut idx: u128 = 0;
                    for x in img.iter().rev() {
                        idx = idx * ctx.q() + ctx.to_index(x);
                    }
                    *fibers.entry(idx).or_insert(0) += 1;
                }
                Err(e) => err = Some(e),
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
    }
    let max = fibers.values().copied().max().unwrap_or(0);
    Ok(FiberCheck {
        max_fiber_size: max,
        bezout_cap: cap,
        fibers_inspected: fibers.len() as u64,
        pass: max <= cap,
    })
}

// ---------------------------------------------------------------------------
// Linear seeded rank extractor family.
// ---------------------------------------------------------------------------

/// The family `phi_i` with per-seed matrix `((omega^{j'-1} s_i)^{j-1})`:
/// `omega` has multiplicative order at least n and the seeds are distinct
/// nonzero elements. Selection is by enumeration order, so the family is a
/// pure function of `(n, m, ctx, l)`.
#[derive(Clone, Debug)]
pub struct SeededRankFamily {
    pub n: usize,
    pub m: usize,
    pub omega: FieldElement,
    pub seeds: Vec<FieldElement>,
}

pub fn build_seeded_family(
    n: usize,
    m: usize,
    ctx: &FieldCtx,
    l: usize,
) -> Result<SeededRankFamily> {
    assert!(m >= 1 && m <= n);
    if (ctx.q() - 1) < n.max(l) as u128 {
        return Err(Error::FieldTooSmall(format!(
            "q - 1 = {} < max(n, l) = {}",
            ctx.q() - 1,
            n.max(l)
        )));
    }
    let omega = ctx
        .elements()
        .skip(1)
        .find(|w| ctx.multiplicative_order(w).map(|o| o >= n as u128).unwrap_or(false))
        .ok_or_else(|| Error::FieldTooSmall("no element of order >= n".into()))?;
    let seeds: Vec<FieldElement> = ctx.elements().skip(1).take(l).collect();
    Ok(SeededRankFamily { n, m, omega, seeds })
}

impl SeededRankFamily {
    /// The m x n matrix of the i-th map.
    pub fn seed_matrix(&self, ctx: &FieldCtx, i: usize) -> MatrixF {
        let s = &self.seeds[i];
        let mut data = Vec::with_capacity(self.m * self.n);
        for jp in 0..self.m {
            let wj = ctx.pow(&self.omega, jp as u128);
            let base = ctx.mul(&wj, s);
            for j in 0..self.n {
                data.push(ctx.pow(&base, j as u128));
            }
        }
        MatrixF::new(self.m, self.n, data)
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn failure_bound(&self) -> f64 {
        (self.m * (self.n - self.m)) as f64 / self.seeds.len() as f64
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        serde_json::json!({
            "field": ctx.token(),
            "n": self.n,
            "m": self.m,
            "omega": ctx.to_index(&self.omega).to_string(),
            "seeds": self.seeds.iter().map(|s| ctx.to_index(s).to_string()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankSurvey {
    pub failing_seeds: u64,
    pub fail_fraction: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Count the seeds whose map drops rank on the given subspace. The basis is
/// a k x n matrix of row vectors and must have full rank k >= m.
pub fn subspace_rank_survey(
    fam: &SeededRankFamily,
    ctx: &FieldCtx,
    basis: &MatrixF,
) -> Result<RankSurvey> {
    let k = basis.rows;
    if basis.cols != fam.n || k < fam.m {
        return Err(Error::ShapeMismatch(format!(
            "basis is {}x{}, family needs k >= m = {} over n = {}",
            basis.rows, basis.cols, fam.m, fam.n
        )));
    }
    if basis.rank(ctx) != k {
        return Err(Error::RankDeficientInput);
    }
    // phi_i restricted to the subspace: A_i * B^T, an m x k matrix.
    let bt = basis.transpose(ctx);
    let mut failing = 0u64;
    for i in 0..fam.len() {
        let a = fam.seed_matrix(ctx, i);
        if a.matmul(ctx, &bt).rank(ctx) < fam.m {
            failing += 1;
        }
    }
    let frac = failing as f64 / fam.len() as f64;
    let bound = fam.failure_bound();
    Ok(RankSurvey {
        failing_seeds: failing,
        fail_fraction: frac,
        bound,
        pass: frac <= bound + 1e-12,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarietyRankSurvey {
    pub per_seed_dim: Vec<u32>,
    pub fail_fraction: f64,
    pub bound: f64,
    pub pass: bool,
    /// Image dimensions come from the point-count slope estimator.
    pub heuristic: bool,
}

/// Survey the family on a variety of declared dimension >= m: estimate the
/// image dimension of each seed map across field extensions and compare the
/// failure fraction to `m (n - m) / l`. HEURISTIC: image dimensions are
/// slope estimates, not certificates.
pub fn variety_rank_survey(
    fam: &SeededRankFamily,
    v: &VarietySpec,
    ctx: &FieldCtx,
    max_ext: u32,
    budget: u64,
) -> Result<VarietyRankSurvey> {
    let mut per_seed = Vec::with_capacity(fam.len());
    for i in 0..fam.len() {
        let mut counts = Vec::new();
        for e in 1..=max_ext {
            let ext = crate::field::make_field(ctx.p(), ctx.m() * e as usize, None)?;
            let emb = ctx.embedding_into(&ext)?;
            let gens: Vec<MultiPoly> = v.generators.iter().map(|g| g.embed(&ext, &emb)).collect();
            let vext = VarietySpec { arity: v.arity, generators: gens, ..v.clone() };
            let a = fam.seed_matrix(ctx, i);
            let adata: Vec<FieldElement> = a.data.iter().map(|x| emb.apply(&ext, x)).collect();
            let aext = MatrixF::new(a.rows, a.cols, adata);
            let mut image: std::collections::BTreeSet<Vec<u64>> = Default::default();
            for_each_point(&vext, &ext, budget, |pt| {
                let img = aext.apply(&ext, pt);
                image.insert(img.iter().map(|x| ext.to_index(x) as u64).collect());
            })?;
            counts.push((e, image.len() as u64));
        }
        let pts: Vec<(f64, f64)> = counts
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|&(i, n)| ((i as f64) * (ctx.q() as f64).ln(), (n as f64).ln()))
            .collect();
        if pts.is_empty() {
            return Err(Error::AllCountsZero);
        }
        let slope = if pts.len() == 1 {
            pts[0].1 / pts[0].0
        } else {
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            (n * sxy - sx * sy) / (n * sxx - sx * sx)
        };
        per_seed.push(slope.round().max(0.0) as u32);
    }
    let failing = per_seed.iter().filter(|&&d| (d as usize) < fam.m).count();
    let frac = failing as f64 / fam.len() as f64;
    let bound = fam.failure_bound();
    Ok(VarietyRankSurvey {
        per_seed_dim: per_seed,
        fail_fraction: frac,
        bound,
        pass: frac <= bound + 1e-12,
        heuristic: true,
    })
}
