//! Exact distributions over finite abelian carriers and their Fourier
//! analysis: statistical distance, min-entropy, full bias spectra, and
//! (eps, e)-bias classification.
//!
//! Two weight representations exist: exact counts over a shared
//! denominator for enumerable sources, and empirical counts for
//! Monte-Carlo mode. Every report downstream labels which was used.
//! Distances and entropies on count-based distributions are exact
//! rationals; floats appear only at the reporting boundary.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{DEFAULT_DFT_BUDGET, WITNESS_CLOSURE_CAP};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};

/// A finite abelian carrier with a total deterministic element order.
///
/// `Residues` generalizes the homogeneous power `Z_N^t` to a mixed-radix
/// product `Z_{m_1} x ... x Z_{m_t}`; the mod-M extractor needs the mixed
/// form for its image group `Z_N^{t-1} x Z_M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    FieldPower { ctx: FieldCtx, n: usize },
    Residues { moduli: Vec<u64> },
}

impl Carrier {
    pub fn field(ctx: FieldCtx) -> Self {
        Carrier::FieldPower { ctx, n: 1 }
    }

    pub fn residue_power(n_modulus: u64, t: usize) -> Self {
        Carrier::Residues { moduli: vec![n_modulus; t] }
    }

    /// Bit strings of length `bits`, as `Z_2^bits`.
    pub fn bits(bits: usize) -> Self {
        Carrier::Residues { moduli: vec![2; bits] }
    }

    pub fn cardinality(&self) -> u128 {
        match self {
            Carrier::FieldPower { ctx, n } => {
                let mut acc: u128 = 1;
                for _ in 0..*n {
                    acc *= ctx.q();
                }
                acc
            }
            Carrier::Residues { moduli } => moduli.iter().map(|&m| m as u128).product(),
        }
    }

    pub fn index_of_field_tuple(&self, xs: &[FieldElement]) -> u128 {
        match self {
            Carrier::FieldPower { ctx, n } => {
                assert_eq!(xs.len(), *n);
                let mut acc: u128 = 0;
                for x in xs.iter().rev() {
                    acc = acc * ctx.q() + ctx.to_index(x);
                }
                acc
            }
            Carrier::Residues { .. } => panic!("not a field carrier"),
        }
    }

    pub fn index_of_residues(&self, xs: &[u64]) -> Result<u128> {
        match self {
            Carrier::Residues { moduli } => {
                if xs.len() != moduli.len() || xs.iter().zip(moduli).any(|(&x, &m)| x >= m) {
                    return Err(Error::OutOfRange);
                }
                let mut acc: u128 = 0;
                for (x, m) in xs.iter().zip(moduli).rev() {
                    acc = acc * *m as u128 + *x as u128;
                }
                Ok(acc)
            }
            Carrier::FieldPower { .. } => Err(Error::CarrierMismatch),
        }
    }

    pub fn residues_of_index(&self, mut idx: u128) -> Vec<u64> {
        match self {
            Carrier::Residues { moduli } => {
                let mut out = Vec::with_capacity(moduli.len());
                for &m in moduli {
                    out.push((idx % m as u128) as u64);
                    idx /= m as u128;
                }
                out
            }
            Carrier::FieldPower { .. } => panic!("not a residue carrier"),
        }
    }

    pub fn field_tuple_of_index(&self, mut idx: u128) -> Vec<FieldElement> {
        match self {
            Carrier::FieldPower { ctx, n } => {
                let mut out = Vec::with_capacity(*n);
                for _ in 0..*n {
                    out.push(ctx.from_index(idx % ctx.q()));
                    idx /= ctx.q();
                }
                out
            }
            Carrier::Residues { .. } => panic!("not a field carrier"),
        }
    }

    /// Characters are indexed by the same index space as elements. The value
    /// of character `a` at element `x` is `prod_j chi_{a_j}(x_j)` for field
    /// powers and `e^{2 pi i sum_j a_j x_j / m_j}` for residue carriers.
    pub fn character_value(&self, char_idx: u128, elem_idx: u128) -> Complex64 {
        match self {
            Carrier::FieldPower { ctx, n } => {
                let mut a = char_idx;
                let mut x = elem_idx;
                let mut tr_acc: u64 = 0;
                for _ in 0..*n {
                    let ai = ctx.from_index(a % ctx.q());
                    let xi = ctx.from_index(x % ctx.q());
                    tr_acc = (tr_acc + ctx.trace(&ctx.mul(&ai, &xi))) % ctx.p();
                    a /= ctx.q();
                    x /= ctx.q();
                }
                ctx.root_of_unity(tr_acc)
            }
            Carrier::Residues { moduli } => {
                let mut a = char_idx;
                let mut x = elem_idx;
                let mut angle = 0.0f64;
                for &m in moduli {
                    let ai = (a % m as u128) as f64;
                    let xi = (x % m as u128) as f64;
                    angle += ai * xi / m as f64;
                    a /= m as u128;
                    x /= m as u128;
                }
                let ang = 2.0 * std::f64::consts::PI * angle.fract();
                Complex64::new(ang.cos(), ang.sin())
            }
        }
    }

    /// Dual-group addition on character indices (the dual of a finite
    /// abelian group is isomorphic to the group itself under our indexing).
    pub fn dual_add(&self, a: u128, b: u128) -> u128 {
        match self {
            Carrier::FieldPower { ctx, n } => {
                let (mut a, mut b) = (a, b);
                let mut out: u128 = 0;
                let mut place: u128 = 1;
                for _ in 0..*n {
                    let ai = ctx.from_index(a % ctx.q());
                    let bi = ctx.from_index(b % ctx.q());
                    out += ctx.to_index(&ctx.add(&ai, &bi)) * place;
                    place *= ctx.q();
                    a /= ctx.q();
                    b /= ctx.q();
                }
                out
            }
            Carrier::Residues { moduli } => {
                let (mut a, mut b) = (a, b);
                let mut out: u128 = 0;
                let mut place: u128 = 1;
                for &m in moduli {
                    let s = (a % m as u128 + b % m as u128) % m as u128;
                    out += s * place;
                    place *= m as u128;
                    a /= m as u128;
                    b /= m as u128;
                }
                out
            }
        }
    }
}

/// Exact reduced rational; the reporting boundary calls `to_f64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: u128,
    pub den: u128,
}

impl Rational {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0);
        let g = gcd_u128(num, den);
        Rational { num: num / g, den: den / g }
    }
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b.max(1);
    }
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    Exact,
    Sampled,
}

/// An exact probability map over a finite carrier, stored as integer counts
/// over a common denominator.
#[derive(Clone, Debug)]
pub struct FiniteDistribution {
    pub carrier: Carrier,
    pub counts: BTreeMap<u128, u64>,
    pub total: u128,
    pub kind: WeightKind,
}

impl FiniteDistribution {
    pub fn from_counts(carrier: Carrier, counts: BTreeMap<u128, u64>) -> Result<Self> {
        let card = carrier.cardinality();
        if counts.keys().any(|&k| k >= card) {
            return Err(Error::OutOfRange);
        }
        let total: u128 = counts.values().map(|&c| c as u128).sum();
        if total == 0 {
            return Err(Error::EmptySupport);
        }
        Ok(FiniteDistribution { carrier, counts, total, kind: WeightKind::Exact })
    }

    pub fn from_samples(carrier: Carrier, samples: impl IntoIterator<Item = u128>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for s in samples {
            *counts.entry(s).or_insert(0u64) += 1;
        }
        let mut d = Self::from_counts(carrier, counts)?;
        d.kind = WeightKind::Sampled;
        Ok(d)
    }

    pub fn uniform(carrier: Carrier) -> Self {
        let card = carrier.cardinality();
        assert!(card <= 1 << 26, "uniform materialization too large");
        let counts = (0..card).map(|i| (i, 1u64)).collect();
        FiniteDistribution { carrier, counts, total: card, kind: WeightKind::Exact }
    }

    pub fn point_mass(carrier: Carrier, idx: u128) -> Self {
        let mut counts = BTreeMap::new();
        counts.insert(idx, 1u64);
        FiniteDistribution { carrier, counts, total: 1, kind: WeightKind::Exact }
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// Push the distribution through a map on element indices.
    pub fn map_indices(&self, target: Carrier, mut f: impl FnMut(u128) -> u128) -> Result<Self> {
        let card = target.cardinality();
        let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
        for (&x, &c) in &self.counts {
            let y = f(x);
            if y >= card {
                return Err(Error::OutOfRange);
            }
            *counts.entry(y).or_insert(0) += c;
        }
        Ok(FiniteDistribution { carrier: target, counts, total: self.total, kind: self.kind })
    }

    /// JSON round-trip document: `{carrier, mode, counts}`.
    pub fn to_json(&self) -> serde_json::Value {
        let carrier = match &self.carrier {
            Carrier::FieldPower { ctx, n } => serde_json::json!({
                "kind": "field_power", "field": ctx.token(), "n": n,
            }),
            Carrier::Residues { moduli } => serde_json::json!({
                "kind": "residues", "moduli": moduli,
            }),
        };
        let counts: Vec<(String, u64)> =
            self.counts.iter().map(|(&k, &v)| (k.to_string(), v)).collect();
        serde_json::json!({
            "carrier": carrier,
            "mode": match self.kind { WeightKind::Exact => "exact", WeightKind::Sampled => "sampled" },
            "counts": counts,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::ConfigError(format!("distribution json: {m}"));
        let cj = v.get("carrier").ok_or_else(|| bad("missing carrier"))?;
        let carrier = match cj.get("kind").and_then(|k| k.as_str()) {
            Some("field_power") => {
                let tok = cj.get("field").and_then(|f| f.as_str()).ok_or_else(|| bad("field"))?;
                let n = cj.get("n").and_then(|n| n.as_u64()).ok_or_else(|| bad("n"))? as usize;
                Carrier::FieldPower { ctx: FieldCtx::parse_token(tok)?, n }
            }
            Some("residues") => {
                let moduli = cj
                    .get("moduli")
                    .and_then(|m| m.as_array())
                    .ok_or_else(|| bad("moduli"))?
                    .iter()
                    .map(|x| x.as_u64().ok_or_else(|| bad("modulus")))
                    .collect::<Result<Vec<_>>>()?;
                Carrier::Residues { moduli }
            }
            _ => return Err(bad("kind")),
        };
        let mut counts = BTreeMap::new();
        for pair in v.get("counts").and_then(|c| c.as_array()).ok_or_else(|| bad("counts"))? {
            let idx: u128 = pair[0]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("count index"))?;
            let c = pair[1].as_u64().ok_or_else(|| bad("count value"))?;
            counts.insert(idx, c);
        }
        let mut d = Self::from_counts(carrier, counts)?;
        if v.get("mode").and_then(|m| m.as_str()) == Some("sampled") {
            d.kind = WeightKind::Sampled;
        }
        Ok(d)
    }
}

// ---------------------------------------------------------------------------
// Statistical distance and entropy.
// ---------------------------------------------------------------------------

/// Exact total-variation distance `1/2 sum |D1(x) - D2(x)|`.
pub fn statistical_distance(d1: &FiniteDistribution, d2: &FiniteDistribution) -> Result<Rational> {
    if d1.carrier != d2.carrier {
        return Err(Error::CarrierMismatch);
    }
    let (t1, t2) = (d1.total, d2.total);
    let mut num: u128 = 0;
    let mut it1 = d1.counts.iter().peekable();
    let mut it2 = d2.counts.iter().peekable();
    loop {
        match (it1.peek(), it2.peek()) {
            (Some(&(&k1, &c1)), Some(&(&k2, &c2))) => {
                if k1 < k2 {
                    num += c1 as u128 * t2;
                    it1.next();
                } else if k2 < k1 {
                    num += c2 as u128 * t1;
                    it2.next();
                } else {
                    num += (c1 as u128 * t2).abs_diff(c2 as u128 * t1);
                    it1.next();
                    it2.next();
                }
            }
            (Some(&(_, &c1)), None) => {
                num += c1 as u128 * t2;
                it1.next();
            }
            (None, Some(&(_, &c2))) => {
                num += c2 as u128 * t1;
                it2.next();
            }
            (None, None) => break,
        }
    }
    Ok(Rational::new(num, 2 * t1 * t2))
}

/// Exact distance to the uniform distribution on the carrier, without
/// materializing it.
pub fn distance_to_uniform(d: &FiniteDistribution) -> Rational {
    let card = d.carrier.cardinality();
    let t = d.total;
    let mut num: u128 = 0;
    for &c in d.counts.values() {
        num += (c as u128 * card).abs_diff(t);
    }
    let off_support = card - d.counts.len() as u128;
    num += off_support * t;
    Rational::new(num, 2 * t * card)
}

/// Plug-in distance to uniform for sampled distributions, corrected by the
/// analytic bias term `(|support| - 1) / (2 n_samples)`, reported as a
/// noise floor. Acceptance comparisons against sampled distributions use
/// the floor, never zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SampledDistance {
    pub plugin: f64,
    pub corrected: f64,
    pub noise_floor: f64,
}

pub fn sampled_distance_to_uniform(d: &FiniteDistribution) -> SampledDistance {
    let plugin = distance_to_uniform(d).to_f64();
    let floor = (d.support_size().saturating_sub(1)) as f64 / (2.0 * d.total as f64);
    SampledDistance { plugin, corrected: (plugin - floor).max(0.0), noise_floor: floor }
}

/// Min-entropy in bits: `-log2 max_a Pr[D = a]`.
pub fn min_entropy(d: &FiniteDistribution) -> Result<f64> {
    let max = d.counts.values().max().copied().ok_or(Error::EmptySupport)?;
    Ok((d.total as f64).log2() - (max as f64).log2())
}

// ---------------------------------------------------------------------------
// Bias spectra.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumMode {
    ExactEnumerated,
    Sampled { n_samples: u128 },
}

/// The full table of character biases `E[chi(D)]`, indexed by character.
#[derive(Clone, Debug)]
pub struct BiasSpectrum {
    pub entries: Vec<Complex64>,
    pub mode: SpectrumMode,
}

impl BiasSpectrum {
    pub fn max_nontrivial_bias(&self) -> f64 {
        self.entries.iter().skip(1).map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("character_index,real,imag,abs\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", i, e.re, e.im, e.norm()));
        }
        out
    }
}

/// Exact bias spectrum by direct evaluation: `E[chi(D)] = sum_x D(x) chi(x)`,
/// one entry per character, parallelized over characters.
pub fn bias_spectrum(d: &FiniteDistribution, dft_budget: u64) -> Result<BiasSpectrum> {
    let card = d.carrier.cardinality();
    let pairs = card.saturating_mul(d.support_size() as u128);
    if pairs > dft_budget as u128 {
        return Err(Error::BudgetExceeded(format!(
            "bias spectrum needs {pairs} character-support pairs, budget {dft_budget}"
        )));
    }
    let support: Vec<(u128, u64)> = d.counts.iter().map(|(&k, &v)| (k, v)).collect();
    let total = d.total as f64;
    let entries: Vec<Complex64> = (0..card as u64)
        .into_par_iter()
        .map(|chi| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, c) in &support {
                acc += d.carrier.character_value(chi as u128, x) * (c as f64);
            }
            acc / total
        })
        .collect();
    let mode = match d.kind {
        WeightKind::Exact => SpectrumMode::ExactEnumerated,
        WeightKind::Sampled => SpectrumMode::Sampled { n_samples: d.total },
    };
    Ok(BiasSpectrum { entries, mode })
}

pub fn bias_spectrum_default(d: &FiniteDistribution) -> Result<BiasSpectrum> {
    bias_spectrum(d, DEFAULT_DFT_BUDGET)
}

// ---------------------------------------------------------------------------
// (eps, e)-bias classification.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasClassification {
    /// Number of nontrivial characters with |bias| > eps. The trivial
    /// character always has bias 1 and is excluded by convention (the
    /// definition counts "all but at most e characters" without naming it;
    /// this module counts only nontrivial violators).
    pub e_count: u64,
    /// Whether the violating set together with the trivial character is
    /// closed under the dual group operation.
    pub strongly: bool,
    /// Size of the dual subgroup generated by the violators; `None` when
    /// closure iteration hit its cap and the witness is inconclusive.
    pub witness_subgroup_size: Option<u128>,
}

pub fn classify_bias(
    carrier: &Carrier,
    spectrum: &BiasSpectrum,
    epsilon: f64,
) -> BiasClassification {
    // The slack keeps roots-of-unity rounding noise out of the violator set
    // when epsilon = 0.
    let violators: Vec<u128> = spectrum
        .entries
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, e)| e.norm() > epsilon + 1e-12)
        .map(|(i, _)| i as u128)
        .collect();
    let e_count = violators.len() as u64;

    let mut set: std::collections::BTreeSet<u128> = violators.iter().copied().collect();
    set.insert(0);
    let mut strongly = true;
    'outer: for &a in set.clone().iter() {
        for &b in &set {
            if !set.contains(&carrier.dual_add(a, b)) {
                strongly = false;
                break 'outer;
            }
        }
    }

    // Subgroup generated by the violators, by closure iteration.
    let mut witness: std::collections::BTreeSet<u128> = violators.iter().copied().collect();
    witness.insert(0);
    let mut inconclusive = false;
    loop {
        let mut added = Vec::new();
        'gen: for &a in &witness {
            for &b in &witness {
                let s = carrier.dual_add(a, b);
                if !witness.contains(&s) {
                    added.push(s);
                    if witness.len() + added.len() > WITNESS_CLOSURE_CAP as usize {
                        inconclusive = true;
                        break 'gen;
                    }
                }
            }
        }
        if inconclusive || added.is_empty() {
            break;
        }
        witness.extend(added);
    }
    BiasClassification {
        e_count,
        strongly,
        witness_subgroup_size: if inconclusive { None } else { Some(witness.len() as u128) },
    }
}

// ---------------------------------------------------------------------------
// XOR-lemma and entropy checks.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XorCheck {
    pub max_bias: f64,
    pub measured_distance: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Verifies the XOR-lemma bound: distance to uniform is at most
/// `max_bias * sqrt(|A|)`.
pub fn xor_distance_check(d: &FiniteDistribution, dft_budget: u64) -> Result<XorCheck> {
    let spec = bias_spectrum(d, dft_budget)?;
    let max_bias = spec.max_nontrivial_bias();
    let dist = distance_to_uniform(d).to_f64();
    let bound = max_bias * (d.carrier.cardinality() as f64).sqrt();
    Ok(XorCheck { max_bias, measured_distance: dist, bound, holds: dist <= bound + 1e-9 })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyBoundCheck {
    pub k: f64,
    pub trimmed_mass: f64,
    pub eps_prime: f64,
    pub close_to_k_source: bool,
}

/// The high-entropy proposition as a measured check: with
/// `k = min(2 log(1/eps), log|A| - log e) - log(2/eps')`, the distribution
/// must be eps'-close to a k-source. Closeness is decided by trimming the
/// mass exceeding `2^{-k}` per atom and comparing the trimmed total to
/// eps'.
pub fn entropy_bound_check(
    d: &FiniteDistribution,
    epsilon: f64,
    e: f64,
    eps_prime: f64,
) -> EntropyBoundCheck {
    let log_inv_eps = if epsilon > 0.0 {
        (1.0 / epsilon).log2()
    } else {
        crate::constants::LOG_SATURATION
    };
    let card = d.carrier.cardinality() as f64;
    let k = (2.0 * log_inv_eps).min(card.log2() - e.log2()) - (2.0 / eps_prime).log2();
    let trimmed = trim_excess_mass(d, k);
    EntropyBoundCheck {
        k,
        trimmed_mass: trimmed,
        eps_prime,
        close_to_k_source: trimmed <= eps_prime + 1e-12,
    }
}

/// Total mass exceeding `2^{-k}` per atom: the exact distance from D to the
/// nearest k-source (the nearest k-source absorbs exactly the excess).
pub fn trim_excess_mass(d: &FiniteDistribution, k: f64) -> f64 {
    let cap = 2f64.powf(-k);
    let t = d.total as f64;
    d.counts.values().map(|&c| (c as f64 / t - cap).max(0.0)).sum()
}
