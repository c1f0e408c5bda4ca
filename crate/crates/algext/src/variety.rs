//! Sparse multivariate polynomials, affine varieties by generator sets,
//! brute-force rational point enumeration, algebraic source distributions,
//! and heuristic dimension accounting.
//!
//! No Groebner bases anywhere: dimension and degree come from declared
//! bounds, Bezout products, and point-count slopes across field
//! extensions. Reports label every dimension estimate as HEURISTIC.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Embedding, FieldCtx, FieldElement};
use crate::fourier::{Carrier, FiniteDistribution};

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: FieldElement,
    pub exps: Vec<u32>,
}

/// A sparse polynomial in `arity` variables. Terms are normalized: no
/// duplicate exponent vectors and no zero coefficients. The zero polynomial
/// has an empty term list and degree `None` (the minus-infinity sentinel).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    pub arity: usize,
    pub terms: Vec<Term>,
    degree: Option<u32>,
}

impl MultiPoly {
    pub fn new(ctx: &FieldCtx, arity: usize, raw: Vec<(FieldElement, Vec<u32>)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<u32>, FieldElement> = BTreeMap::new();
        for (c, e) in raw {
            ctx.check(&c)?;
            if e.len() != arity {
                return Err(Error::ArityMismatch { want: arity, got: e.len() });
            }
            let entry = map.entry(e).or_insert_with(|| ctx.zero());
            *entry = ctx.add(entry, &c);
        }
        let terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Term { coeff, exps })
            .collect();
        let degree = terms.iter().map(|t| t.exps.iter().sum::<u32>()).max();
        Ok(MultiPoly { arity, terms, degree })
    }

    pub fn zero(arity: usize) -> Self {
        MultiPoly { arity, terms: Vec::new(), degree: None }
    }

    /// Constant polynomial.
    pub fn constant(ctx: &FieldCtx, arity: usize, c: FieldElement) -> Self {
        MultiPoly::new(ctx, arity, vec![(c, vec![0; arity])]).unwrap()
    }

    /// The monomial `c * X_var^e`.
    pub fn monomial(ctx: &FieldCtx, arity: usize, var: usize, e: u32, c: FieldElement) -> Self {
        let mut exps = vec![0u32; arity];
        exps[var] = e;
        MultiPoly::new(ctx, arity, vec![(c, exps)]).unwrap()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact evaluation with per-variable power caching.
    pub fn eval(&self, ctx: &FieldCtx, point: &[FieldElement]) -> Result<FieldElement> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch { want: self.arity, got: point.len() });
        }
        // cache powers of each coordinate up to the max exponent used
        let mut max_e = vec![0u32; self.arity];
        for t in &self.terms {
            for (j, &e) in t.exps.iter().enumerate() {
                max_e[j] = max_e[j].max(e);
            }
        }
        let mut powers: Vec<Vec<FieldElement>> = Vec::with_capacity(self.arity);
        for (j, &me) in max_e.iter().enumerate() {
            let mut col = Vec::with_capacity(me as usize + 1);
            col.push(ctx.one());
            for e in 1..=me {
                let prev = &col[(e - 1) as usize];
                col.push(ctx.mul(prev, &point[j]));
            }
            powers.push(col);
        }
        let mut acc = ctx.zero();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for (j, &e) in t.exps.iter().enumerate() {
                if e > 0 {
                    v = ctx.mul(&v, &powers[j][e as usize]);
                }
            }
            acc = ctx.add(&acc, &v);
        }
        Ok(acc)
    }

    /// Fast path for prime fields: coordinates and result as residues.
    pub fn eval_u64_prime(&self, p: u64, point: &[u64]) -> u64 {
        debug_assert_eq!(point.len(), self.arity);
        let mut acc: u64 = 0;
        for t in &self.terms {
            let mut v = t.coeff.coeffs[0];
            for (j, &e) in t.exps.iter().enumerate() {
                if e > 0 {
                    v = mulmod(v, powmod(point[j], e as u64, p), p);
                }
            }
            acc = (acc + v) % p;
        }
        acc
    }

    /// Reinterpret coefficients inside an extension via a subfield
    /// embedding.
    pub fn embed(&self, sup: &FieldCtx, emb: &Embedding) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: emb.apply(sup, &t.coeff), exps: t.exps.clone() })
            .collect();
        MultiPoly { arity: self.arity, terms, degree: self.degree }
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let coeff: serde_json::Value = if ctx.is_prime_field() {
                    serde_json::json!(t.coeff.coeffs[0])
                } else {
                    serde_json::json!(t.coeff.coeffs)
                };
                serde_json::json!({ "coeff": coeff, "exps": t.exps })
            })
            .collect();
        serde_json::json!({ "arity": self.arity, "terms": terms })
    }

    pub fn from_json(ctx: &FieldCtx, v: &serde_json::Value) -> Result<MultiPoly> {
        let bad = |m: &str| Error::ConfigError(format!("polynomial json: {m}"));
        let arity = v.get("arity").and_then(|a| a.as_u64()).ok_or_else(|| bad("arity"))? as usize;
        let mut raw = Vec::new();
        for t in v.get("terms").and_then(|t| t.as_array()).ok_or_else(|| bad("terms"))? {
            let coeff = parse_coeff(ctx, t.get("coeff").ok_or_else(|| bad("coeff"))?)?;
            let exps: Vec<u32> = t
                .get("exps")
                .and_then(|e| e.as_array())
                .ok_or_else(|| bad("exps"))?
                .iter()
                .map(|x| x.as_u64().map(|v| v as u32).ok_or_else(|| bad("exp")))
                .collect::<Result<_>>()?;
            raw.push((coeff, exps));
        }
        MultiPoly::new(ctx, arity, raw)
    }
}

/// Coefficients in JSON are centered integers (`-1` means `p - 1`), or a
/// coefficient vector for extension fields.
pub fn parse_coeff(ctx: &FieldCtx, v: &serde_json::Value) -> Result<FieldElement> {
    if let Some(i) = v.as_i64() {
        return Ok(ctx.from_i64(i));
    }
    if let Some(arr) = v.as_array() {
        let coeffs: Vec<u64> = arr
            .iter()
            .map(|x| x.as_u64().ok_or_else(|| Error::ConfigError("bad coeff vector".into())))
            .collect::<Result<_>>()?;
        let el = FieldElement { coeffs };
        ctx.check(&el)?;
        return Ok(el);
    }
    Err(Error::ConfigError("unrecognized coefficient".into()))
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Polynomial maps and varieties.
// ---------------------------------------------------------------------------

/// A polynomial map `A^r -> A^n`, with an optional span basis
/// `h_1, ..., h_s` (degrees non-increasing) certifying that each component
/// lies in `span{h_1, ..., h_s, 1}`.
#[derive(Clone, Debug)]
pub struct PolynomialMap {
    pub source_arity: usize,
    pub components: Vec<MultiPoly>,
    pub span_basis: Option<SpanBasis>,
}

#[derive(Clone, Debug)]
pub struct SpanBasis {
    pub basis: Vec<MultiPoly>,
    /// Per component: coefficients over the basis, then the constant term.
    pub coords: Vec<(Vec<FieldElement>, FieldElement)>,
}

impl PolynomialMap {
    pub fn new(ctx: &FieldCtx, components: Vec<MultiPoly>) -> Result<Self> {
        let source_arity = components.first().map(|c| c.arity).unwrap_or(0);
        if components.iter().any(|c| c.arity != source_arity) {
            return Err(Error::ArityMismatch { want: source_arity, got: 0 });
        }
        let _ = ctx;
        Ok(PolynomialMap { source_arity, components, span_basis: None })
    }

    /// Attach a span basis; every component must be exactly reproduced by
    /// its coordinate vector, and basis degrees must be non-increasing.
    pub fn with_span_basis(
        mut self,
        ctx: &FieldCtx,
        basis: Vec<MultiPoly>,
        coords: Vec<(Vec<FieldElement>, FieldElement)>,
    ) -> Result<Self> {
        let degs: Vec<i64> = basis.iter().map(|h| h.degree().map(|d| d as i64).unwrap_or(-1)).collect();
        if degs.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::BoundViolation("span basis degrees must be non-increasing".into()));
        }
        if coords.len() != self.components.len() {
            return Err(Error::DegreeCountMismatch);
        }
        for (comp, (cs, konst)) in self.components.iter().zip(&coords) {
            if cs.len() != basis.len() {
                return Err(Error::DegreeCountMismatch);
            }
            let mut acc = MultiPoly::constant(ctx, self.source_arity, konst.clone());
            for (c, h) in cs.iter().zip(&basis) {
                let mut terms: Vec<(FieldElement, Vec<u32>)> =
                    acc.terms.iter().map(|t| (t.coeff.clone(), t.exps.clone())).collect();
                for t in &h.terms {
                    terms.push((ctx.mul(c, &t.coeff), t.exps.clone()));
                }
                acc = MultiPoly::new(ctx, self.source_arity, terms)?;
            }
            if &acc != comp {
                return Err(Error::BoundViolation(
                    "span coordinates do not reproduce the component".into(),
                ));
            }
        }
        self.span_basis = Some(SpanBasis { basis, coords });
        Ok(self)
    }

    pub fn target_arity(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, ctx: &FieldCtx, point: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.components.iter().map(|c| c.eval(ctx, point)).collect()
    }

    pub fn eval_u64_prime(&self, p: u64, point: &[u64], out: &mut Vec<u64>) {
        out.clear();
        for c in &self.components {
            out.push(c.eval_u64_prime(p, point));
        }
    }

    /// Degrees of the span basis `h_i` (non-increasing); if no explicit
    /// basis is attached the components themselves serve as the basis.
    pub fn h_degrees(&self) -> Vec<u32> {
        let mut degs: Vec<u32> = match &self.span_basis {
            Some(sb) => sb.basis.iter().filter_map(|h| h.degree()).collect(),
            None => self.components.iter().filter_map(|c| c.degree()).collect(),
        };
        degs.sort_unstable_by(|a, b| b.cmp(a));
        degs
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        serde_json::json!({
            "source_arity": self.source_arity,
            "components": self.components.iter().map(|c| c.to_json(ctx)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ctx: &FieldCtx, v: &serde_json::Value) -> Result<Self> {
        let comps = v
            .get("components")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::ConfigError("map json: components".into()))?
            .iter()
            .map(|c| MultiPoly::from_json(ctx, c))
            .collect::<Result<Vec<_>>>()?;
        PolynomialMap::new(ctx, comps)
    }
}

/// An affine variety `V` in `A^arity`, presented by generators. An empty
/// generator list means all of `A^arity`.
#[derive(Clone, Debug)]
pub struct VarietySpec {
    pub arity: usize,
    pub generators: Vec<MultiPoly>,
    pub declared_dim: Option<u32>,
    pub degree_bound: Option<u64>,
}

impl VarietySpec {
    pub fn new(arity: usize, generators: Vec<MultiPoly>) -> Self {
        VarietySpec { arity, generators, declared_dim: None, degree_bound: None }
    }

    /// Declared degree bound, defaulting to the Bezout product of the
    /// generator degrees (1 for the full affine space).
    pub fn deg_bound(&self) -> u64 {
        if let Some(d) = self.degree_bound {
            return d;
        }
        self.generators
            .iter()
            .map(|g| g.degree().unwrap_or(0) as u64)
            .filter(|&d| d > 0)
            .product::<u64>()
            .max(1)
    }

    pub fn contains(&self, ctx: &FieldCtx, point: &[FieldElement]) -> Result<bool> {
        for g in &self.generators {
            if !g.eval(ctx, point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self, ctx: &FieldCtx) -> serde_json::Value {
        serde_json::json!({
            "arity": self.arity,
            "generators": self.generators.iter().map(|g| g.to_json(ctx)).collect::<Vec<_>>(),
            "declared_dim": self.declared_dim,
            "degree_bound": self.degree_bound,
        })
    }

    pub fn from_json(ctx: &FieldCtx, v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::ConfigError(format!("variety json: {m}"));
        let arity = v.get("arity").and_then(|a| a.as_u64()).ok_or_else(|| bad("arity"))? as usize;
        let generators = v
            .get("generators")
            .and_then(|g| g.as_array())
            .ok_or_else(|| bad("generators"))?
            .iter()
            .map(|g| MultiPoly::from_json(ctx, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(VarietySpec {
            arity,
            generators,
            declared_dim: v.get("declared_dim").and_then(|d| d.as_u64()).map(|d| d as u32),
            degree_bound: v.get("degree_bound").and_then(|d| d.as_u64()),
        })
    }
}

// ---------------------------------------------------------------------------
// Point enumeration.
// ---------------------------------------------------------------------------

fn check_enum_budget(q: u128, arity: usize, budget: u64) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..arity {
        total = total
            .checked_mul(q)
            .filter(|&t| t <= budget as u128)
            .ok_or_else(|| Error::BudgetExceeded(format!("q^{arity} exceeds budget {budget}")))?;
    }
    Ok(total)
}

/// Stream every rational point of `V` in lexicographic product order of the
/// field enumeration (outermost coordinate slowest). Generator evaluation
/// short-circuits on the first nonzero value.
pub fn for_each_point<F: FnMut(&[FieldElement])>(
    v: &VarietySpec,
    ctx: &FieldCtx,
    budget: u64,
    mut visit: F,
) -> Result<()> {
    check_enum_budget(ctx.q(), v.arity, budget)?;
    if v.arity == 0 {
        if v.generators.iter().all(|g| g.terms.is_empty()) {
            visit(&[]);
        }
        return Ok(());
    }
    let mut point: Vec<FieldElement> = vec![ctx.zero(); v.arity];
    loop {
        if v.contains(ctx, &point)? {
            visit(&point);
        }
        // odometer: coordinate 0 fastest so points sort lexicographically
        // from the last coordinate; same order as index enumeration
        let mut j = 0;
        loop {
            if ctx.increment(&mut point[j]) {
                break;
            }
            j += 1;
            if j == v.arity {
                return Ok(());
            }
        }
    }
}

/// Prime-field fast path of [`for_each_point`]: coordinates as residues.
pub fn for_each_point_prime<F: FnMut(&[u64])>(
    v: &VarietySpec,
    ctx: &FieldCtx,
    budget: u64,
    mut visit: F,
) -> Result<()> {
    assert!(ctx.is_prime_field());
    check_enum_budget(ctx.q(), v.arity, budget)?;
    let p = ctx.p();
    let mut point = vec![0u64; v.arity.max(1)];
    if v.arity == 0 {
        if v.generators.iter().all(|g| g.terms.is_empty()) {
            visit(&[]);
        }
        return Ok(());
    }
    loop {
        if v.generators.iter().all(|g| g.eval_u64_prime(p, &point[..v.arity]) == 0) {
            visit(&point[..v.arity]);
        }
        let mut j = 0;
        loop {
            point[j] += 1;
            if point[j] < p {
                break;
            }
            point[j] = 0;
            j += 1;
            if j == v.arity {
                return Ok(());
            }
        }
    }
}

/// Collect the rational point set `V(F_q)` in deterministic order.
pub fn enumerate_points(
    v: &VarietySpec,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<Vec<Vec<FieldElement>>> {
    let mut out = Vec::new();
    for_each_point(v, ctx, budget, |pt| out.push(pt.to_vec()))?;
    Ok(out)
}

/// Exact number of rational points.
pub fn count_points(v: &VarietySpec, ctx: &FieldCtx, budget: u64) -> Result<u64> {
    let mut n = 0u64;
    if ctx.is_prime_field() {
        for_each_point_prime(v, ctx, budget, |_| n += 1)?;
    } else {
        for_each_point(v, ctx, budget, |_| n += 1)?;
    }
    Ok(n)
}

/// The fiber of `f` restricted to `V` over the target point `b`.
pub fn fiber_points(
    f: &PolynomialMap,
    v: &VarietySpec,
    b: &[FieldElement],
    ctx: &FieldCtx,
    budget: u64,
) -> Result<Vec<Vec<FieldElement>>> {
    let mut out = Vec::new();
    let mut err = None;
    for_each_point(v, ctx, budget, |pt| {
        if err.is_some() {
            return;
        }
        match f.eval(ctx, pt) {
            Ok(img) => {
                if img.as_slice() == b {
                    out.push(pt.to_vec());
                }
            }
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

// ---------------------------------------------------------------------------
// Algebraic sources.
// ---------------------------------------------------------------------------

/// The data of an (n, k, d) algebraic source: a variety, a polynomial map,
/// and the degree budget tying them together. Construction checks
/// `deg_bound(V) * prod_{i<=k} deg h_i <= d` against the stored bounds.
#[derive(Clone, Debug)]
pub struct AlgebraicSourceSpec {
    pub variety: VarietySpec,
    pub map: PolynomialMap,
    pub n: usize,
    pub k: u32,
    pub d: u64,
}

impl AlgebraicSourceSpec {
    pub fn new(variety: VarietySpec, map: PolynomialMap, n: usize, k: u32, d: u64) -> Result<Self> {
        if map.target_arity() != n || map.source_arity != variety.arity {
            return Err(Error::ArityMismatch { want: n, got: map.target_arity() });
        }
        let spec = AlgebraicSourceSpec { variety, map, n, k, d };
        let budget = spec.degree_budget();
        if !budget.d_satisfied {
            return Err(Error::BoundViolation(format!(
                "degree budget violated: {} * {} > {}",
                budget.bezout_deg_v, budget.h_degree_product, d
            )));
        }
        Ok(spec)
    }

    /// Pure arithmetic on the stored bounds.
    pub fn degree_budget(&self) -> DegreeBudget {
        let bezout = self.variety.deg_bound();
        let degs = self.map.h_degrees();
        let prod: u64 = degs.iter().take(self.k as usize).map(|&d| d as u64).product();
        DegreeBudget {
            bezout_deg_v: bezout,
            h_degree_product: prod,
            d_satisfied: bezout.saturating_mul(prod) <= self.d,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DegreeBudget {
    pub bezout_deg_v: u64,
    pub h_degree_product: u64,
    pub d_satisfied: bool,
}

/// The exact source distribution `D = f(U_{V(F_q)})` over `F_q^n`: the
/// weight of `y` is proportional to the number of points of `V(F_q)`
/// mapping to it.
pub fn build_source(
    spec: &AlgebraicSourceSpec,
    ctx: &FieldCtx,
    budget: u64,
) -> Result<FiniteDistribution> {
    let carrier = Carrier::FieldPower { ctx: ctx.clone(), n: spec.n };
    let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
    if ctx.is_prime_field() {
        let p = ctx.p();
        let mut img: Vec<u64> = Vec::with_capacity(spec.n);
        for_each_point_prime(&spec.variety, ctx, budget, |pt| {
            spec.map.eval_u64_prime(p, pt, &mut img);
            let mut idx: u128 = 0;
            for &c in img.iter().rev() {
                idx = idx * p as u128 + c as u128;
            }
            *counts.entry(idx).or_insert(0) += 1;
        })?;
    } else {
        let mut err = None;
        for_each_point(&spec.variety, ctx, budget, |pt| {
            if err.is_some() {
                return;
            }
            match spec.map.eval(ctx, pt) {
                Ok(img) => {
                    let idx = carrier.index_of_field_tuple(&img);
                    *counts.entry(idx).or_insert(0) += 1;
                }
                Err(e) => err = Some(e),
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
    }
    if counts.is_empty() {
        return Err(Error::EmptyVariety);
    }
    FiniteDistribution::from_counts(carrier, counts)
}

// ---------------------------------------------------------------------------
// Heuristic dimension estimation.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// (extension index i, point count over F_{q^i}).
    pub counts: Vec<(u32, u64)>,
    pub dim_estimate: u32,
    /// Always true: the slope method is a heuristic, never a certificate.
    pub heuristic: bool,
}

/// Estimate `dim V` from point counts over extensions `F_{p^{m i}}`,
/// `i = 1..=max_ext`: the rounded least-squares slope of `log |V(F_{q^i})|`
/// against `i log q`. Generator coefficients are reinterpreted inside each
/// extension via the canonical subfield embedding.
pub fn estimate_dimension(
    v: &VarietySpec,
    ctx: &FieldCtx,
    max_ext: u32,
    budget: u64,
) -> Result<DimensionEstimate> {
    let mut counts = Vec::new();
    for i in 1..=max_ext {
        let ext = crate::field::make_field(ctx.p(), ctx.m() * i as usize, None)?;
        let emb = ctx.embedding_into(&ext)?;
        let gens: Vec<MultiPoly> = v.generators.iter().map(|g| g.embed(&ext, &emb)).collect();
        let vext = VarietySpec { arity: v.arity, generators: gens, ..v.clone() };
        let n = count_points(&vext, &ext, budget)?;
        counts.push((i, n));
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
        // affine least squares; the intercept absorbs the degree factor
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    Ok(DimensionEstimate {
        counts,
        dim_estimate: slope.round().max(0.0) as u32,
        heuristic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::fourier::{distance_to_uniform, Rational};

    fn fe(ctx: &FieldCtx, v: u64) -> FieldElement {
        ctx.from_u64(v)
    }

    fn var_poly(ctx: &FieldCtx, arity: usize, var: usize) -> MultiPoly {
        MultiPoly::monomial(ctx, arity, var, 1, ctx.one())
    }

    const B: u64 = 1 << 30;

    #[test]
    fn eval_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        // X1 + X2 at (2, 3) over F_5 -> 0
        let f = MultiPoly::new(
            &f5,
            2,
            vec![(f5.one(), vec![1, 0]), (f5.one(), vec![0, 1])],
        )
        .unwrap();
        assert_eq!(f.eval(&f5, &[fe(&f5, 2), fe(&f5, 3)]).unwrap(), f5.zero());
        // X1^2 X2 at (2, 3) over F_7 -> 5
        let f7 = make_field(7, 1, None).unwrap();
        let g = MultiPoly::new(&f7, 2, vec![(f7.one(), vec![2, 1])]).unwrap();
        assert_eq!(g.eval(&f7, &[fe(&f7, 2), fe(&f7, 3)]).unwrap(), fe(&f7, 5));
        assert_eq!(g.eval_u64_prime(7, &[2, 3]), 5);
        // zero polynomial
        let z = MultiPoly::zero(2);
        assert_eq!(z.eval(&f7, &[fe(&f7, 1), fe(&f7, 1)]).unwrap(), f7.zero());
        assert_eq!(z.degree(), None);
        // arity mismatch
        assert!(matches!(
            g.eval(&f7, &[fe(&f7, 1)]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn normalization_merges_terms() {
        let f5 = make_field(5, 1, None).unwrap();
        let f = MultiPoly::new(
            &f5,
            1,
            vec![(fe(&f5, 2), vec![1]), (fe(&f5, 3), vec![1])],
        )
        .unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn enumerate_examples() {
        let f3 = make_field(3, 1, None).unwrap();
        // V(X1) in A^2 over F_3: the 3 points (0, y)
        let v = VarietySpec::new(2, vec![var_poly(&f3, 2, 0)]);
        let pts = enumerate_points(&v, &f3, B).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| p[0].is_zero()));
        // V(X1^2 + X2^2 - 1) over F_5: exactly 4 points
        let f5 = make_field(5, 1, None).unwrap();
        let circle = MultiPoly::new(
            &f5,
            2,
            vec![
                (f5.one(), vec![2, 0]),
                (f5.one(), vec![0, 2]),
                (f5.from_i64(-1), vec![0, 0]),
            ],
        )
        .unwrap();
        let v = VarietySpec::new(2, vec![circle]);
        let pts = enumerate_points(&v, &f5, B).unwrap();
        let as_u64: Vec<(u64, u64)> =
            pts.iter().map(|p| (p[0].coeffs[0], p[1].coeffs[0])).collect();
        assert_eq!(pts.len(), 4);
        for want in [(1, 0), (4, 0), (0, 1), (0, 4)] {
            assert!(as_u64.contains(&want));
        }
        // empty generator list over F_2, r = 3: all 8 points
        let f2 = make_field(2, 1, None).unwrap();
        let v = VarietySpec::new(3, vec![]);
        assert_eq!(count_points(&v, &f2, B).unwrap(), 8);
    }

    #[test]
    fn enumeration_budget() {
        let f5 = make_field(5, 1, None).unwrap();
        let v = VarietySpec::new(8, vec![]);
        assert!(matches!(
            enumerate_points(&v, &f5, 1000),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn build_source_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        // identity on a line: uniform over F_5
        let v = VarietySpec::new(1, vec![]);
        let id = PolynomialMap::new(&f5, vec![var_poly(&f5, 1, 0)]).unwrap();
        let spec = AlgebraicSourceSpec::new(v, id, 1, 1, 1).unwrap();
        let d = build_source(&spec, &f5, B).unwrap();
        assert_eq!(distance_to_uniform(&d), Rational::new(0, 1));
        // squares: weight 1/5 at 0 and 2/5 at each of {1, 4}
        let v = VarietySpec::new(1, vec![]);
        let sq = PolynomialMap::new(
            &f5,
            vec![MultiPoly::monomial(&f5, 1, 0, 2, f5.one())],
        )
        .unwrap();
        let spec = AlgebraicSourceSpec::new(v, sq, 1, 1, 2).unwrap();
        let d = build_source(&spec, &f5, B).unwrap();
        assert_eq!(d.total, 5);
        assert_eq!(d.counts.get(&0), Some(&1));
        assert_eq!(d.counts.get(&1), Some(&2));
        assert_eq!(d.counts.get(&4), Some(&2));
        // parabola with the identity chart: uniform over the 7 curve points
        let f7 = make_field(7, 1, None).unwrap();
        let parab = MultiPoly::new(
            &f7,
            2,
            vec![(f7.one(), vec![0, 1]), (f7.from_i64(-1), vec![2, 0])],
        )
        .unwrap();
        let v = VarietySpec::new(2, vec![parab]);
        let idmap =
            PolynomialMap::new(&f7, vec![var_poly(&f7, 2, 0), var_poly(&f7, 2, 1)]).unwrap();
        let spec = AlgebraicSourceSpec::new(v, idmap, 2, 1, 2).unwrap();
        let d = build_source(&spec, &f7, B).unwrap();
        assert_eq!(d.total, 7);
        assert_eq!(d.support_size(), 7);
        assert!(d.counts.values().all(|&c| c == 1));
    }

    #[test]
    fn build_source_mass_conservation() {
        // output weights sum to exactly |V(F_q)| over |V(F_q)|
        let f7 = make_field(7, 1, None).unwrap();
        let parab = MultiPoly::new(
            &f7,
            2,
            vec![(f7.one(), vec![0, 1]), (f7.from_i64(-1), vec![2, 0])],
        )
        .unwrap();
        let v = VarietySpec::new(2, vec![parab.clone()]);
        let proj = PolynomialMap::new(&f7, vec![var_poly(&f7, 2, 1)]).unwrap();
        let spec = AlgebraicSourceSpec::new(v.clone(), proj, 1, 1, 2).unwrap();
        let d = build_source(&spec, &f7, B).unwrap();
        assert_eq!(d.total as u64, count_points(&v, &f7, B).unwrap());
    }

    #[test]
    fn fiber_examples() {
        let f7 = make_field(7, 1, None).unwrap();
        let line = VarietySpec::new(1, vec![]);
        let id = PolynomialMap::new(&f7, vec![var_poly(&f7, 1, 0)]).unwrap();
        let fib = fiber_points(&id, &line, &[fe(&f7, 3)], &f7, B).unwrap();
        assert_eq!(fib, vec![vec![fe(&f7, 3)]]);
        // squares mod 7: fiber over 2 is {3, 4}, over 3 empty
        let sq = PolynomialMap::new(&f7, vec![MultiPoly::monomial(&f7, 1, 0, 2, f7.one())])
            .unwrap();
        let fib = fiber_points(&sq, &line, &[fe(&f7, 2)], &f7, B).unwrap();
        let vals: Vec<u64> = fib.iter().map(|p| p[0].coeffs[0]).collect();
        assert_eq!(vals, vec![3, 4]);
        let fib = fiber_points(&sq, &line, &[fe(&f7, 3)], &f7, B).unwrap();
        assert!(fib.is_empty());
    }

    #[test]
    fn fibers_partition_variety() {
        let f7 = make_field(7, 1, None).unwrap();
        let line = VarietySpec::new(1, vec![]);
        let sq = PolynomialMap::new(&f7, vec![MultiPoly::monomial(&f7, 1, 0, 2, f7.one())])
            .unwrap();
        let mut total = 0;
        for b in f7.elements() {
            total += fiber_points(&sq, &line, &[b], &f7, B).unwrap().len() as u64;
        }
        assert_eq!(total, count_points(&line, &f7, B).unwrap());
    }

    #[test]
    fn degree_budget_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        // one quadric generator, k=1, h degrees (2), d=4: 2*2 = 4 <= 4
        let quadric = MultiPoly::monomial(&f5, 2, 0, 2, f5.one());
        let v = VarietySpec::new(2, vec![quadric]);
        let h2 = MultiPoly::monomial(&f5, 2, 1, 2, f5.one());
        let map = PolynomialMap::new(&f5, vec![h2.clone()]).unwrap();
        let spec = AlgebraicSourceSpec::new(v, map, 1, 1, 4).unwrap();
        let b = spec.degree_budget();
        assert!(b.d_satisfied);
        assert_eq!((b.bezout_deg_v, b.h_degree_product), (2, 2));
        // two cubics, k=2, h degrees (3,2), d=50: 9*6 = 54 > 50
        let c1 = MultiPoly::monomial(&f5, 2, 0, 3, f5.one());
        let c2 = MultiPoly::monomial(&f5, 2, 1, 3, f5.one());
        let v = VarietySpec::new(2, vec![c1.clone(), c2]);
        let h3 = MultiPoly::monomial(&f5, 2, 0, 3, f5.one());
        let hb = MultiPoly::monomial(&f5, 2, 1, 2, f5.one());
        let map = PolynomialMap::new(&f5, vec![h3, hb]).unwrap();
        assert!(AlgebraicSourceSpec::new(v, map, 2, 2, 50).is_err());
        // empty generators, k=0, d=1: 1 <= 1
        let v = VarietySpec::new(2, vec![]);
        let map = PolynomialMap::new(&f5, vec![var_poly(&f5, 2, 0)]).unwrap();
        let spec = AlgebraicSourceSpec::new(v, map, 1, 0, 1).unwrap();
        assert!(spec.degree_budget().d_satisfied);
    }

    #[test]
    fn dimension_estimate_examples() {
        let f5 = make_field(5, 1, None).unwrap();
        // A^2 embedded in A^3 by the generator X3: counts q^2, dim 2
        let v = VarietySpec::new(3, vec![var_poly(&f5, 3, 2)]);
        let est = estimate_dimension(&v, &f5, 2, B).unwrap();
        assert_eq!(est.dim_estimate, 2);
        assert_eq!(est.counts[0].1, 25);
        assert!(est.heuristic);
        // single rational point: counts all 1, dim 0
        let g1 = MultiPoly::new(
            &f5,
            2,
            vec![(f5.one(), vec![1, 0]), (f5.from_i64(-1), vec![0, 0])],
        )
        .unwrap();
        let g2 = MultiPoly::new(
            &f5,
            2,
            vec![(f5.one(), vec![0, 1]), (f5.from_i64(-2), vec![0, 0])],
        )
        .unwrap();
        let v = VarietySpec::new(2, vec![g1, g2]);
        let est = estimate_dimension(&v, &f5, 3, B).unwrap();
        assert_eq!(est.dim_estimate, 0);
        assert!(est.counts.iter().all(|&(_, n)| n == 1));
        // cubic curve V(X2 - X1^3) over F_5, i = 1..3: counts 5, 25, 125
        let cubic = MultiPoly::new(
            &f5,
            2,
            vec![(f5.one(), vec![0, 1]), (f5.from_i64(-1), vec![3, 0])],
        )
        .unwrap();
        let v = VarietySpec::new(2, vec![cubic]);
        let est = estimate_dimension(&v, &f5, 3, B).unwrap();
        assert_eq!(
            est.counts,
            vec![(1, 5), (2, 25), (3, 125)]
        );
        assert_eq!(est.dim_estimate, 1);
    }

    #[test]
    fn elementary_point_bound() {
        // |V(F_q)| <= d q^k on small test varieties with known (k, d)
        let f7 = make_field(7, 1, None).unwrap();
        let parab = MultiPoly::new(
            &f7,
            2,
            vec![(f7.one(), vec![0, 1]), (f7.from_i64(-1), vec![2, 0])],
        )
        .unwrap();
        let cases: Vec<(VarietySpec, u32, u64)> = vec![
            (VarietySpec::new(2, vec![parab]), 1, 2),
            (VarietySpec::new(2, vec![]), 2, 1),
            (
                VarietySpec::new(2, vec![MultiPoly::new(
                    &f7,
                    2,
                    vec![(f7.one(), vec![1, 1])],
                )
                .unwrap()]),
                1,
                2,
            ),
        ];
        for (v, k, d) in cases {
            let n = count_points(&v, &f7, B).unwrap();
            assert!(n as u128 <= d as u128 * (7u128).pow(k));
        }
    }

    #[test]
    fn poly_json_round_trip() {
        let f7 = make_field(7, 1, None).unwrap();
        let g = MultiPoly::new(
            &f7,
            3,
            vec![(fe(&f7, 3), vec![2, 0, 1]), (f7.from_i64(-1), vec![0, 0, 0])],
        )
        .unwrap();
        let j = g.to_json(&f7);
        let g2 = MultiPoly::from_json(&f7, &j).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn span_basis_verification() {
        let f5 = make_field(5, 1, None).unwrap();
        // component 2*X1^2 + 1 over basis [X1^2]
        let h = MultiPoly::monomial(&f5, 1, 0, 2, f5.one());
        let comp = MultiPoly::new(
            &f5,
            1,
            vec![(fe(&f5, 2), vec![2]), (f5.one(), vec![0])],
        )
        .unwrap();
        let map = PolynomialMap::new(&f5, vec![comp]).unwrap();
        let ok = map
            .clone()
            .with_span_basis(&f5, vec![h.clone()], vec![(vec![fe(&f5, 2)], f5.one())]);
        assert!(ok.is_ok());
        let bad = map.with_span_basis(&f5, vec![h], vec![(vec![fe(&f5, 3)], f5.one())]);
        assert!(bad.is_err());
    }
}
