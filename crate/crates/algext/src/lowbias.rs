//! Extractors for (eps, e)-biased and strongly (eps, e)-biased sources:
//! Gabidulin rank-metric matrices, the bilinear extractor built from them,
//! the mod-M extractor for large characteristic, and the parameterized
//! builders, with exact Fourier-norm verification.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{LOG_SATURATION, RANK_SURVEY_EXHAUSTIVE_CAP, RANK_SURVEY_SAMPLES};
use crate::error::{Error, Result};
use crate::field::{make_field, FieldCtx, FieldElement};
use crate::fourier::{Carrier, FiniteDistribution, Rational};
use crate::rank::MatrixF;

// ---------------------------------------------------------------------------
// Gabidulin codes.
// ---------------------------------------------------------------------------

/// Parameters of a Gabidulin rank-metric code: evaluation points
/// `g_1, ..., g_r` in `F_{p^s}` linearly independent over `F_p`, with the
/// coordinate map of the polynomial basis as the vector-space isomorphism
/// `tau`. The default basis is the monomials `1, X, ..., X^{r-1}`.
#[derive(Clone, Debug)]
pub struct GabidulinParams {
    pub p: u64,
    pub k: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub ext: FieldCtx,
    pub basis: Vec<FieldElement>,
}

impl GabidulinParams {
    pub fn new(p: u64, k: usize, r: usize, s: usize, t: usize) -> Result<Self> {
        let ext = make_field(p, s, None)?;
        let basis = (0..r)
            .map(|j| {
                let mut c = vec![0u64; s];
                c[j] = 1;
                FieldElement { coeffs: c }
            })
            .collect();
        Self::with_basis(p, k, r, s, t, ext, basis)
    }

    pub fn with_basis(
        p: u64,
        k: usize,
        r: usize,
        s: usize,
        t: usize,
        ext: FieldCtx,
        basis: Vec<FieldElement>,
    ) -> Result<Self> {
        if !(1 <= k && k <= r && r <= s) {
            return Err(Error::BoundViolation(format!("need 1 <= k <= r <= s, got {k} {r} {s}")));
        }
        if t > k * s {
            return Err(Error::BoundViolation(format!("t = {t} exceeds ks = {}", k * s)));
        }
        if basis.len() != r {
            return Err(Error::BasisDependent);
        }
        // independence over F_p via the coordinate matrix rank
        let fp = make_field(p, 1, None)?;
        let data: Vec<FieldElement> = (0..s)
            .flat_map(|row| basis.iter().map(move |g| (row, g)))
            .map(|(row, g)| fp.from_u64(g.coeffs[row]))
            .collect();
        let coord = MatrixF::new(s, r, data);
        if coord.rank(&fp) != r {
            return Err(Error::BasisDependent);
        }
        Ok(GabidulinParams { p, k, r, s, t, ext, basis })
    }
}

/// The explicit matrices `M_1, ..., M_t` in `F_p^{s x r}`: matrix number
/// `i*s + j` comes from the linearized polynomial `X^j * Y^{p^i}` (the
/// standard basis of `F_{p^s}^k` in slot-major order, truncated to t).
/// Column j' of `M_u` is `tau(f_u(g_{j'}))`.
pub fn gabidulin_matrices(params: &GabidulinParams) -> Result<Vec<MatrixF>> {
    let fp = make_field(params.p, 1, None)?;
    let ext = &params.ext;
    let mut out = Vec::with_capacity(params.t);
    for idx in 0..params.t {
        let slot = idx / params.s; // Frobenius power p^slot
        let mono = idx % params.s; // multiplier X^mono
        let mut xm = vec![0u64; params.s];
        xm[mono] = 1;
        let mult = FieldElement { coeffs: xm };
        let mut data = vec![fp.zero(); params.s * params.r];
        for (jp, g) in params.basis.iter().enumerate() {
            let frob = ext.pow(g, (params.p as u128).pow(slot as u32));
            let val = ext.mul(&mult, &frob);
            for row in 0..params.s {
                data[row * params.r + jp] = fp.from_u64(val.coeffs[row]);
            }
        }
        out.push(MatrixF::new(params.s, params.r, data));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinRankSurvey {
    pub min_rank: usize,
    pub bound: usize,
    pub combinations_checked: u64,
    pub exhaustive: bool,
    pub pass: bool,
}

/// Minimum rank over nonzero F_p-combinations of the matrices: exhaustive
/// when `p^t` is small, sampled otherwise (mode recorded).
pub fn min_rank_survey(
    p: u64,
    r: usize,
    k: usize,
    matrices: &[MatrixF],
) -> Result<MinRankSurvey> {
    let fp = make_field(p, 1, None)?;
    let t = matrices.len();
    let bound = r - k + 1;
    let total = (p as u128).pow(t as u32);
    let combine = |coeffs: &[u64]| -> MatrixF {
        let (s, r) = (matrices[0].rows, matrices[0].cols);
        let mut acc = MatrixF::zero(&fp, s, r);
        for (c, m) in coeffs.iter().zip(matrices) {
            if *c == 0 {
                continue;
            }
            let ce = fp.from_u64(*c);
            for i in 0..s * r {
                acc.data[i] = fp.add(&acc.data[i], &fp.mul(&ce, &m.data[i]));
            }
        }
        acc
    };
    let mut min_rank = usize::MAX;
    let mut checked = 0u64;
    let exhaustive = total <= RANK_SURVEY_EXHAUSTIVE_CAP as u128;
    if exhaustive {
        let mut coeffs = vec![0u64; t];
        'outer: loop {
            // odometer over F_p^t, skipping zero
            let mut j = 0;
            loop {
                coeffs[j] += 1;
                if coeffs[j] < p {
                    break;
                }
                coeffs[j] = 0;
                j += 1;
                if j == t {
                    break 'outer;
                }
            }
            min_rank = min_rank.min(combine(&coeffs).rank(&fp));
            checked += 1;
        }
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x6761_6269);
        for _ in 0..RANK_SURVEY_SAMPLES {
            let mut coeffs: Vec<u64> = (0..t).map(|_| rng.gen_range(0..p)).collect();
            if coeffs.iter().all(|&c| c == 0) {
                coeffs[0] = 1;
            }
            min_rank = min_rank.min(combine(&coeffs).rank(&fp));
            checked += 1;
        }
    }
    if min_rank == usize::MAX {
        min_rank = matrices.first().map(|m| m.rows.min(m.cols)).unwrap_or(0);
    }
    Ok(MinRankSurvey { min_rank, bound, combinations_checked: checked, exhaustive, pass: min_rank >= bound })
}

// ---------------------------------------------------------------------------
// The bilinear extractor.
// ---------------------------------------------------------------------------

/// `f = (f_1, ..., f_t): F_p^n -> F_p^t` with `f_i(x, y) = x^T M_i y`,
/// where the input splits as `(x, y) in F_p^s x F_p^r` (s-block first).
#[derive(Clone, Debug)]
pub struct BilinearExtractor {
    pub params: GabidulinParams,
    /// Matrix entries as residues, row-major s x r each.
    pub matrices: Vec<Vec<u64>>,
}

impl BilinearExtractor {
    pub fn build(params: GabidulinParams) -> Result<Self> {
        let mats = gabidulin_matrices(&params)?;
        let matrices = mats
            .iter()
            .map(|m| m.data.iter().map(|e| e.coeffs[0]).collect())
            .collect();
        Ok(BilinearExtractor { params, matrices })
    }

    pub fn n(&self) -> usize {
        self.params.r + self.params.s
    }

    pub fn t(&self) -> usize {
        self.params.t
    }

    /// Evaluate on residues; the first s coordinates are the x-block.
    pub fn extract(&self, input: &[u64]) -> Result<Vec<u64>> {
        let (p, s, r) = (self.params.p, self.params.s, self.params.r);
        if input.len() != s + r {
            return Err(Error::LengthMismatch(format!(
                "expected {} coordinates, got {}",
                s + r,
                input.len()
            )));
        }
        let (x, y) = input.split_at(s);
        let mut out = Vec::with_capacity(self.params.t);
        for m in &self.matrices {
            let mut acc: u128 = 0;
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0 {
                    continue;
                }
                let mut row: u128 = 0;
                for (j, &yj) in y.iter().enumerate() {
                    row += (m[i * r + j] as u128) * (yj as u128);
                }
                acc += (xi as u128) * (row % p as u128);
            }
            out.push((acc % p as u128) as u64);
        }
        Ok(out)
    }

    /// Output packed as a base-p integer (little-endian digits).
    pub fn extract_index(&self, input: &[u64]) -> Result<u64> {
        let digits = self.extract(input)?;
        let mut acc: u64 = 0;
        for &d in digits.iter().rev() {
            acc = acc * self.params.p + d;
        }
        Ok(acc)
    }

    /// Push an exact distribution over `F_p^n` through the extractor.
    pub fn apply_to_distribution(&self, d: &FiniteDistribution) -> Result<FiniteDistribution> {
        let p = self.params.p;
        let n = self.n();
        match &d.carrier {
            Carrier::FieldPower { ctx, n: cn } if ctx.q() == p as u128 && *cn == n => {}
            Carrier::Residues { moduli } if moduli.len() == n && moduli.iter().all(|&m| m == p) => {
            }
            _ => return Err(Error::CarrierMismatch),
        }
        let target = Carrier::residue_power(p, self.params.t);
        let mut scratch = vec![0u64; n];
        d.map_indices(target, |mut idx| {
            for s in scratch.iter_mut() {
                *s = (idx % p as u128) as u64;
                idx /= p as u128;
            }
            let digits = self.extract(&scratch).expect("arity checked");
            let mut acc: u128 = 0;
            for &dg in digits.iter().rev() {
                acc = acc * p as u128 + dg as u128;
            }
            acc
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.params.p,
            "s": self.params.s,
            "r": self.params.r,
            "k": self.params.k,
            "t": self.params.t,
            "ext_field": self.params.ext.token(),
            "matrices": self.matrices,
        })
    }
}

// ---------------------------------------------------------------------------
// Exact Fourier norms of psi o f.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourierNormCheck {
    pub max_l1: f64,
    pub max_linf: f64,
    pub l1_bound: f64,
    pub linf_bound: f64,
    pub characters_checked: u64,
    pub pass: bool,
}

/// Exact DFT of `psi o f` over `F_p^n` for every nontrivial character psi
/// of `F_p^t`: L1 of the transform must be at most `p^r` and L-infinity at
/// most `p^{-(r-k+1)}`.
pub fn fourier_norm_check(ext: &BilinearExtractor, dft_budget: u64) -> Result<FourierNormCheck> {
    let p = ext.params.p;
    let n = ext.n();
    let t = ext.params.t;
    let domain = (p as u128).pow(n as u32);
    let range = (p as u128).pow(t as u32);
    if domain.saturating_mul(range) > dft_budget as u128 {
        return Err(Error::BudgetExceeded(format!(
            "fourier norm check needs p^(n+t) = {} pairs, budget {dft_budget}",
            domain * range
        )));
    }
    // Precompute f(x) for every x once.
    let mut fvals: Vec<u64> = Vec::with_capacity(domain as usize);
    let mut coords = vec![0u64; n];
    for idx in 0..domain {
        let mut v = idx;
        for c in coords.iter_mut() {
            *c = (v % p as u128) as u64;
            v /= p as u128;
        }
        fvals.push(ext.extract_index(&coords)?);
    }
    let l1_bound = (p as f64).powi(ext.params.r as i32);
    let linf_bound = (p as f64).powi(-((ext.params.r - ext.params.k + 1) as i32));

    let results: Vec<(f64, f64)> = (1..range as u64)
        .into_par_iter()
        .map(|psi| {
            if p == 2 {
                fourier_norms_p2(&fvals, psi, n as u32)
            } else {
                fourier_norms_generic(p, &fvals, psi, n as u32, t as u32)
            }
        })
        .collect();
    let max_l1 = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_linf = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(FourierNormCheck {
        max_l1,
        max_linf,
        l1_bound,
        linf_bound,
        characters_checked: range as u64 - 1,
        pass: max_l1 <= l1_bound + 1e-7 && max_linf <= linf_bound + 1e-7,
    })
}

/// p = 2 path: signs and parities via bit tricks.
fn fourier_norms_p2(fvals: &[u64], psi: u64, n: u32) -> (f64, f64) {
    let domain = 1usize << n;
    let g: Vec<i64> = fvals
        .iter()
        .map(|&fv| if ((fv & psi).count_ones() & 1) == 0 { 1 } else { -1 })
        .collect();
    let mut l1 = 0.0f64;
    let mut linf = 0.0f64;
    for w in 0..domain {
        let mut acc: i64 = 0;
        for (x, &gx) in g.iter().enumerate() {
            let sign = ((w & x).count_ones() & 1) == 0;
            acc += if sign { gx } else { -gx };
        }
        let coeff = (acc as f64 / domain as f64).abs();
        l1 += coeff;
        linf = linf.max(coeff);
    }
    (l1, linf)
}

fn fourier_norms_generic(p: u64, fvals: &[u64], psi: u64, n: u32, t: u32) -> (f64, f64) {
    let domain = (p as u128).pow(n) as usize;
    let fp_root = |r: u64| -> Complex64 {
        let ang = 2.0 * std::f64::consts::PI * (r % p) as f64 / p as f64;
        Complex64::new(ang.cos(), ang.sin())
    };
    // g(x) = psi(f(x)) with psi = sum_i v_i z_i
    let mut v = vec![0u64; t as usize];
    let mut pv = psi;
    for vi in v.iter_mut() {
        *vi = pv % p;
        pv /= p;
    }
    let g: Vec<Complex64> = fvals
        .iter()
        .map(|&fv| {
            let mut acc = 0u64;
            let mut f = fv;
            for &vi in &v {
                acc = (acc + vi * (f % p)) % p;
                f /= p;
            }
            fp_root(acc)
        })
        .collect();
    let mut l1 = 0.0f64;
    let mut linf = 0.0f64;
    let mut wd = vec![0u64; n as usize];
    for w in 0..domain {
        let mut wv = w as u128;
        for d in wd.iter_mut() {
            *d = (wv % p as u128) as u64;
            wv /= p as u128;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, gx) in g.iter().enumerate() {
            let mut dot = 0u64;
            let mut xv = x as u128;
            for &d in &wd {
                dot = (dot + d * (xv % p as u128) as u64) % p;
                xv /= p as u128;
            }
            acc += gx * fp_root((p - dot % p) % p);
        }
        let coeff = (acc / domain as f64).norm();
        l1 += coeff;
        linf = linf.max(coeff);
    }
    (l1, linf)
}

// ---------------------------------------------------------------------------
// The mod-M extractor.
// ---------------------------------------------------------------------------

/// `(a_1, ..., a_{t-1}, a) -> (a_1, ..., a_{t-1}, a mod M)` on `Z_N^t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModMExtractor {
    pub n_modulus: u64,
    pub t: usize,
    pub m_modulus: u64,
}

impl ModMExtractor {
    pub fn new(n_modulus: u64, t: usize, m_modulus: u64) -> Result<Self> {
        if m_modulus == 0 || m_modulus > n_modulus || t == 0 {
            return Err(Error::BoundViolation(format!(
                "need 1 <= M <= N and t >= 1, got M={m_modulus} N={n_modulus} t={t}"
            )));
        }
        Ok(ModMExtractor { n_modulus, t, m_modulus })
    }

    pub fn source_carrier(&self) -> Carrier {
        Carrier::residue_power(self.n_modulus, self.t)
    }

    pub fn target_carrier(&self) -> Carrier {
        let mut moduli = vec![self.n_modulus; self.t - 1];
        moduli.push(self.m_modulus);
        Carrier::Residues { moduli }
    }

    pub fn extract(&self, a: &[u64]) -> Result<Vec<u64>> {
        if a.len() != self.t || a.iter().any(|&x| x >= self.n_modulus) {
            return Err(Error::OutOfRange);
        }
        let mut out = a.to_vec();
        out[self.t - 1] %= self.m_modulus;
        Ok(out)
    }

    pub fn apply_to_distribution(&self, d: &FiniteDistribution) -> Result<FiniteDistribution> {
        if d.carrier != self.source_carrier() {
            return Err(Error::CarrierMismatch);
        }
        let src = self.source_carrier();
        let tgt = self.target_carrier();
        d.map_indices(tgt.clone(), |idx| {
            let mut res = src.residues_of_index(idx);
            res[self.t - 1] %= self.m_modulus;
            tgt.index_of_residues(&res).expect("in range")
        })
    }

    /// Closed form of `Delta(f(U), U_target)`: with `rem = N mod M`, the
    /// distance is `rem (M - rem) / (M N)`, which is at most `M / N`.
    pub fn uniform_floor(&self) -> Rational {
        let (n, m) = (self.n_modulus as u128, self.m_modulus as u128);
        let rem = n % m;
        Rational::new(rem * (m - rem), m * n)
    }
}

// ---------------------------------------------------------------------------
// Parameterized extractor builders.
// ---------------------------------------------------------------------------

fn log_p(p: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return -LOG_SATURATION;
    }
    x.ln() / (p as f64).ln()
}

/// The dense-affine extractor shape: `r = floor(n/2)`, `s = n - r`, `k = 2`.
/// Extracts from (0, e)-biased sources (in particular affine sources of
/// codimension `log_p e`) with error `p^{-(r-k+1)} * e * p^{t/2}`.
pub fn build_dense_affine_extractor(n: usize, p: u64, t: usize) -> Result<BilinearExtractor> {
    if n < 4 {
        return Err(Error::ParamsInfeasible(format!("dense affine extractor needs n >= 4, got {n}")));
    }
    let r = n / 2;
    let s = n - r;
    let k = 2usize;
    if t < 1 || t > k * s {
        return Err(Error::BoundViolation(format!("t = {t} outside 1..={}", k * s)));
    }
    BilinearExtractor::build(GabidulinParams::new(p, k, r, s, t)?)
}

/// Error bound of the dense-affine extractor on a (0, e)-biased source.
pub fn dense_affine_error(ext: &BilinearExtractor, e: f64) -> f64 {
    let p = ext.params.p as f64;
    p.powi(-((ext.params.r - ext.params.k + 1) as i32)) * e * p.powf(ext.params.t as f64 / 2.0)
}

#[derive(Clone, Debug)]
pub struct StronglyBiasedExtractor {
    /// Ambient dimension of the source.
    pub n: usize,
    /// Projection width: the extractor acts on the first n' coordinates.
    pub n_prime: usize,
    pub inner: BilinearExtractor,
    /// True when a log(1/0) saturated to the sentinel while computing n'.
    pub saturated: bool,
    pub t_formula: f64,
}

/// Extractor for strongly (eps, e)-biased sources:
/// `n' = min(floor(2 log_p(1/eps) - 2 log_p(16 e / eps'^2)), n)`,
/// `t <= n' - 3 - 2 log_p(2 e / eps')`, composed as the dense-affine
/// extractor after coordinate projection onto the first n' coordinates.
pub fn build_strongly_biased_extractor(
    n: usize,
    p: u64,
    epsilon: f64,
    e: f64,
    eps_prime: f64,
) -> Result<StronglyBiasedExtractor> {
    let (n_prime, t_formula, saturated) = strongly_biased_params(n, p, epsilon, e, eps_prime);
    let t = t_formula.floor();
    if t < 1.0 || n_prime < 4 {
        return Err(Error::ParamsInfeasible(format!(
            "strongly-biased params give n' = {n_prime}, t = {t_formula:.2}"
        )));
    }
    let inner = build_dense_affine_extractor(n_prime, p, t as usize)?;
    Ok(StronglyBiasedExtractor { n, n_prime, inner, saturated, t_formula })
}

/// The raw parameter formulas, usable even when infeasible: returns
/// `(n', t, saturated)`.
pub fn strongly_biased_params(
    n: usize,
    p: u64,
    epsilon: f64,
    e: f64,
    eps_prime: f64,
) -> (usize, f64, bool) {
    let saturated = epsilon <= 0.0;
    let log_inv_eps = if saturated { LOG_SATURATION } else { log_p(p, 1.0 / epsilon) };
    let raw = 2.0 * log_inv_eps - 2.0 * log_p(p, 16.0 * e / (eps_prime * eps_prime));
    let n_prime = if raw >= n as f64 { n } else { raw.floor().max(0.0) as usize };
    let t = n_prime as f64 - 3.0 - 2.0 * log_p(p, 2.0 * e / eps_prime);
    (n_prime, t, saturated)
}

impl StronglyBiasedExtractor {
    /// Project onto the first n' coordinates, then apply the bilinear map.
    pub fn extract(&self, input: &[u64]) -> Result<Vec<u64>> {
        if input.len() != self.n {
            return Err(Error::LengthMismatch(format!(
                "expected {} coordinates, got {}",
                self.n,
                input.len()
            )));
        }
        self.inner.extract(&input[..self.n_prime])
    }

    pub fn t(&self) -> usize {
        self.inner.params.t
    }
}

#[derive(Clone, Debug)]
pub struct ConstantFractionExtractor {
    pub inner: BilinearExtractor,
    pub t_formula: f64,
    /// Whether the two proof inequalities hold at the chosen parameters;
    /// desk-scale configurations usually run in measured mode instead.
    pub headroom_ok: bool,
    pub epsilon: f64,
}

/// Constant-fraction extractor shape: `r = floor(n/4)`, `s = n - r`,
/// `k = max(1, floor(r/2))`, for (eps, e)-biased sources with
/// `eps = d p^{-n/2}`. The output length formula uses the pinned headroom
/// constant; when it yields t < 1 the instance is emitted with t = 1 and
/// `headroom_ok = false`.
pub fn build_constant_fraction_extractor(
    n: usize,
    p: u64,
    d: f64,
    e: f64,
    eps_prime: f64,
) -> Result<ConstantFractionExtractor> {
    if n < 8 {
        return Err(Error::ParamsInfeasible(format!(
            "constant-fraction extractor needs n >= 8, got {n}"
        )));
    }
    let r = n / 4;
    let s = n - r;
    let k = (r / 2).max(1);
    let t_formula =
        n as f64 / crate::constants::CF_HEADROOM_C - 2.0 * log_p(p, d * e / eps_prime);
    let t = (t_formula.floor().max(1.0)) as usize;
    let inner = BilinearExtractor::build(GabidulinParams::new(p, k, r, s, t)?)?;
    let epsilon = d * (p as f64).powf(-(n as f64) / 2.0);
    let pf = p as f64;
    let ineq1 = pf.powi(r as i32) * epsilon * pf.powf(t as f64 / 2.0) <= eps_prime / 2.0;
    let ineq2 =
        pf.powi(-((r - k + 1) as i32)) * e * pf.powf(t as f64 / 2.0) <= eps_prime / 2.0;
    Ok(ConstantFractionExtractor { inner, t_formula, headroom_ok: ineq1 && ineq2, epsilon })
}
