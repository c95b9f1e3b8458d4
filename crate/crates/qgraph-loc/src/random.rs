//! Disorder law, per-edge samples, the n-particle random potential, the
//! two-body interaction, and the concentration modulus s(μ, ε).
//!
//! Sampling is counter-based: the value attached to an edge is a pure
//! function of (seed, canonical edge encoding), evaluated through a
//! SplitMix64 avalanche over the encoded words. Enumeration order and
//! worker count therefore never affect a sample.

use crate::error::RandomError;
use crate::geometry::{CubeId, EdgeId};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Disorder law kinds. Both are Hölder continuous with exponent 1 and
/// explicit concentration moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// Uniform on [q_-, q_+].
    Uniform,
    /// Beta(2,2) shape rescaled to [q_-, q_+]; a smooth unimodal law with
    /// closed-form CDF 3x² - 2x³ on the unit interval.
    BetaSmoothed,
}

/// A single-site disorder law with support [q_-, q_+].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialLaw {
    pub kind: LawKind,
    pub q_minus: f64,
    pub q_plus: f64,
}

impl PotentialLaw {
    pub fn new(kind: LawKind, q_minus: f64, q_plus: f64) -> Result<Self, RandomError> {
        if !(q_minus < q_plus) || !q_minus.is_finite() || !q_plus.is_finite() {
            return Err(RandomError::InvalidLaw(format!(
                "need finite q_- < q_+ (Hölder continuity fails for a point mass); got [{q_minus}, {q_plus}]"
            )));
        }
        Ok(Self {
            kind,
            q_minus,
            q_plus,
        })
    }

    pub fn uniform(q_minus: f64, q_plus: f64) -> Result<Self, RandomError> {
        Self::new(LawKind::Uniform, q_minus, q_plus)
    }

    /// Default law of the artifact: uniform on [0, 1].
    pub fn default_uniform() -> Self {
        Self::uniform(0.0, 1.0).expect("unit interval is valid")
    }

    pub fn width(&self) -> f64 {
        self.q_plus - self.q_minus
    }

    /// Hölder exponent b with s(μ, ε) <= c_μ ε^b.
    pub fn holder_exponent(&self) -> f64 {
        1.0
    }

    /// Hölder constant c_μ for the exponent above.
    pub fn holder_const(&self) -> f64 {
        match self.kind {
            LawKind::Uniform => 1.0 / self.width(),
            LawKind::BetaSmoothed => 1.5 / self.width(),
        }
    }

    /// Concentration function s(μ, ε) = sup { μ[a,b] : b - a <= ε }, in
    /// closed form. For the uniform law this is min(ε/width, 1); for the
    /// Beta(2,2) shape the maximizing interval is centered (unimodal
    /// symmetric density), giving (3u - u³)/2 ... evaluated exactly below.
    pub fn concentration(&self, eps: f64) -> f64 {
        assert!(eps >= 0.0);
        let w = self.width();
        if eps >= w {
            return 1.0;
        }
        let r = eps / w;
        match self.kind {
            LawKind::Uniform => r,
            LawKind::BetaSmoothed => {
                // F(x) = 3x² - 2x³ on [0,1]; mass of the centered interval
                // of relative length r is F(1/2 + r/2) - F(1/2 - r/2)
                // = 1.5 r - 0.5 r³.
                1.5 * r - 0.5 * r.powi(3)
            }
        }
    }

    /// Quantile transform of a uniform variate in [0,1).
    fn quantile(&self, u: f64) -> f64 {
        let x = match self.kind {
            LawKind::Uniform => u,
            LawKind::BetaSmoothed => {
                // invert F(x) = 3x² - 2x³ by bisection; F is strictly
                // increasing on [0,1].
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let f = 3.0 * mid * mid - 2.0 * mid * mid * mid;
                    if f < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        self.q_minus + self.width() * x
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mixes a stream of words into a single avalanche state. Used both for
/// per-edge values and for deriving per-trial seeds. Each word is spread
/// by an odd multiplier before the avalanche round and the length enters
/// a final round; a plain per-word round leaks a small mean bias for the
/// low-entropy sequential encodings edges produce.
pub fn mix_words(seed: u64, words: &[u64]) -> u64 {
    let mut state = splitmix64(seed ^ 0x6a09e667f3bcc909);
    for &w in words {
        state = splitmix64(state ^ w.wrapping_mul(0xff51afd7ed558ccd));
    }
    splitmix64(state ^ (words.len() as u64))
}

/// Derives the i-th trial seed from a base seed.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    mix_words(base, &[0x7472_69616c, trial])
}

fn edge_words(e: &EdgeId) -> Vec<u64> {
    let mut w = Vec::with_capacity(e.base.len() + 1);
    w.push(e.dir as u64);
    w.extend(e.base.iter().map(|&c| c as u64));
    w
}

/// Uniform variate in [0,1) attached to (seed, edge).
fn edge_unit(seed: u64, e: &EdgeId) -> f64 {
    (mix_words(seed, &edge_words(e)) >> 11) as f64 / (1u64 << 53) as f64
}

/// One disorder realization over a fixed edge set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaSample {
    pub seed: u64,
    values: HashMap<EdgeId, f64>,
}

impl OmegaSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, e: &EdgeId) -> Result<f64, RandomError> {
        self.values
            .get(e)
            .copied()
            .ok_or_else(|| RandomError::MissingEdge(e.address()))
    }

    /// Constant sample (used by deterministic contract tests).
    pub fn constant(edges: &[EdgeId], value: f64) -> Self {
        Self {
            seed: 0,
            values: edges.iter().map(|e| (e.clone(), value)).collect(),
        }
    }

    pub fn edges_sorted(&self) -> Vec<&EdgeId> {
        let mut keys: Vec<&EdgeId> = self.values.keys().collect();
        keys.sort();
        keys
    }

    /// CSV rows (edge-address, value), deterministic order.
    pub fn to_csv_rows(&self) -> Vec<(String, f64)> {
        self.edges_sorted()
            .into_iter()
            .map(|e| (e.address(), self.values[e]))
            .collect()
    }

    pub fn from_csv_rows(seed: u64, rows: &[(String, f64)]) -> Result<Self, RandomError> {
        let mut values = HashMap::with_capacity(rows.len());
        for (addr, v) in rows {
            let e = EdgeId::parse_address(addr)
                .ok_or_else(|| RandomError::InvalidLaw(format!("bad edge address {addr}")))?;
            values.insert(e, *v);
        }
        Ok(Self { seed, values })
    }
}

/// Draws i.i.d. per-edge values; the value at edge e is a pure function of
/// (seed, e), independent of the enumeration order of `edges`.
pub fn sample_omega(
    law: &PotentialLaw,
    edges: &[EdgeId],
    seed: u64,
) -> Result<OmegaSample, RandomError> {
    if edges.is_empty() {
        return Err(RandomError::EmptyEdges);
    }
    let values = edges
        .iter()
        .map(|e| (e.clone(), law.quantile(edge_unit(seed, e))))
        .collect();
    Ok(OmegaSample { seed, values })
}

/// The n-particle random potential on a cube: `W_κ = ω_{e_1} + … + ω_{e_n}`.
pub fn eval_w(cube: &CubeId, omega: &OmegaSample) -> Result<f64, RandomError> {
    cube.edges.iter().map(|e| omega.value(e)).sum()
}

/// Interaction kernels for the two-body potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKernel {
    /// F(y) = u0 · 1{|y| < r0}, sup norm.
    HardIndicator,
    /// F(y) = u0 · max(0, 1 - |y|/r0).
    TriangularBump,
}

/// Two-body interaction specification: `U(x) = Σ_{i<j} F(x_i - x_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub u0: f64,
    pub r0: u64,
    pub kernel: InteractionKernel,
}

impl InteractionSpec {
    pub fn new(u0: f64, r0: u64, kernel: InteractionKernel) -> Result<Self, RandomError> {
        if u0 < 0.0 || !u0.is_finite() {
            return Err(RandomError::InvalidLaw(format!("u0 must be >= 0, got {u0}")));
        }
        if r0 == 0 {
            return Err(RandomError::InvalidLaw("r0 must be >= 1".into()));
        }
        Ok(Self { u0, r0, kernel })
    }

    /// No interaction at all (still carries a nominal range).
    pub fn none() -> Self {
        Self {
            u0: 0.0,
            r0: 1,
            kernel: InteractionKernel::HardIndicator,
        }
    }

    fn f(&self, dist: f64) -> f64 {
        let r0 = self.r0 as f64;
        if dist >= r0 {
            return 0.0;
        }
        match self.kernel {
            InteractionKernel::HardIndicator => self.u0,
            InteractionKernel::TriangularBump => self.u0 * (1.0 - dist / r0),
        }
    }

    /// `U(x)` at a configuration point `x ∈ Γ^(n) ⊂ R^{nd}` (flattened,
    /// chunks of length d). Identically zero for n = 1.
    pub fn eval_u(&self, x: &[f64], n: usize, d: usize) -> f64 {
        debug_assert_eq!(x.len(), n * d);
        if n <= 1 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = (0..d)
                    .map(|a| (x[i * d + a] - x[j * d + a]).abs())
                    .fold(0.0f64, f64::max);
                total += self.f(dist);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_edges;

    fn edges_1d(l: u32) -> Vec<EdgeId> {
        enumerate_edges(&[0], l, 1)
    }

    #[test]
    fn law_rejects_point_mass() {
        assert!(PotentialLaw::uniform(0.3, 0.3).is_err());
    }

    #[test]
    fn support_and_mean() {
        let law = PotentialLaw::default_uniform();
        let edges = edges_1d(200); // 400 edges
        let mut total = 0.0;
        let mut count = 0usize;
        for seed in 0..250u64 {
            let s = sample_omega(&law, &edges, seed).unwrap();
            for e in &edges {
                let v = s.value(e).unwrap();
                assert!((0.0..=1.0).contains(&v));
                total += v;
                count += 1;
            }
        }
        // 1e5 draws: CLT 3σ window around 1/2 with σ = 1/sqrt(12 N)
        let mean = total / count as f64;
        let bound = 3.0 / (12.0 * count as f64).sqrt();
        assert!(
            (mean - 0.5).abs() < bound,
            "mean {mean} outside 3σ ({bound})"
        );
    }

    #[test]
    fn order_independence_and_seed_stability() {
        let law = PotentialLaw::default_uniform();
        let edges = edges_1d(6);
        let mut reversed = edges.clone();
        reversed.reverse();
        let a = sample_omega(&law, &edges, 12345).unwrap();
        let b = sample_omega(&law, &reversed, 12345).unwrap();
        for e in &edges {
            let (va, vb) = (a.value(e).unwrap(), b.value(e).unwrap());
            assert_eq!(va.to_bits(), vb.to_bits());
        }
        let c = sample_omega(&law, &edges, 12346).unwrap();
        assert!(edges.iter().any(|e| c.value(e) != a.value(e)));
    }

    #[test]
    fn eval_w_examples() {
        let e1 = EdgeId::new(vec![0], 1);
        let e2 = EdgeId::new(vec![4], 1);
        let mut omega = OmegaSample::constant(&[e1.clone(), e2.clone()], 0.0);
        omega.values.insert(e1.clone(), 0.3);
        omega.values.insert(e2.clone(), 0.4);
        let single = CubeId::new(vec![e1.clone()]);
        assert_eq!(eval_w(&single, &omega).unwrap(), 0.3);
        let pair = CubeId::new(vec![e1, e2]);
        assert!((eval_w(&pair, &omega).unwrap() - 0.7).abs() < 1e-15);
        let missing = CubeId::new(vec![EdgeId::new(vec![99], 1)]);
        assert!(eval_w(&missing, &omega).is_err());
    }

    #[test]
    fn w_min_respects_support_bound() {
        let law = PotentialLaw::uniform(0.25, 1.0).unwrap();
        let edges = edges_1d(3);
        let omega = sample_omega(&law, &edges, 7).unwrap();
        let spec = crate::geometry::BoxSpec::new(vec![0, 0], vec![3, 3], 2, 1).unwrap();
        let min_w = crate::geometry::enumerate_cubes(&spec)
            .iter()
            .map(|c| eval_w(c, &omega).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min_w >= 2.0 * 0.25);
    }

    #[test]
    fn interaction_assumptions() {
        let spec = InteractionSpec::new(2.0, 2, InteractionKernel::HardIndicator).unwrap();
        // n=1: identically zero
        assert_eq!(spec.eval_u(&[0.7], 1, 1), 0.0);
        // far apart: zero
        assert_eq!(spec.eval_u(&[0.0, 2.0], 2, 1), 0.0);
        assert_eq!(spec.eval_u(&[0.0, 5.5], 2, 1), 0.0);
        // coincident: u0
        assert_eq!(spec.eval_u(&[1.3, 1.3], 2, 1), 2.0);
        // bounded by (n choose 2) u0 and nonnegative
        let v = spec.eval_u(&[0.0, 0.1, 0.2], 3, 1);
        assert!(v >= 0.0 && v <= 3.0 * 2.0);
    }

    #[test]
    fn interaction_decoupling_exact() {
        let spec = InteractionSpec::new(1.5, 2, InteractionKernel::TriangularBump).unwrap();
        // n=2 with dist >= r0: U = U'(x1) + U''(x2) = 0 + 0
        for gap in [2.0, 2.5, 7.0] {
            assert_eq!(spec.eval_u(&[0.0, gap], 2, 1), 0.0);
        }
    }

    #[test]
    fn concentration_closed_forms() {
        let u = PotentialLaw::default_uniform();
        assert!((u.concentration(0.1) - 0.1).abs() < 1e-15);
        assert_eq!(u.concentration(0.0), 0.0);
        assert_eq!(u.concentration(1.0), 1.0);
        assert_eq!(u.concentration(2.0), 1.0);
        let b = PotentialLaw::new(LawKind::BetaSmoothed, 0.0, 1.0).unwrap();
        assert_eq!(b.concentration(0.0), 0.0);
        assert_eq!(b.concentration(1.0), 1.0);
        // centered-interval mass via the CDF, spot value
        let f = |x: f64| 3.0 * x * x - 2.0 * x * x * x;
        let eps = 0.3;
        assert!((b.concentration(eps) - (f(0.5 + eps / 2.0) - f(0.5 - eps / 2.0))).abs() < 1e-12);
    }

    #[test]
    fn holder_certificate_on_dyadic_grid() {
        for law in [
            PotentialLaw::default_uniform(),
            PotentialLaw::new(LawKind::BetaSmoothed, 0.0, 1.0).unwrap(),
            PotentialLaw::uniform(-1.0, 3.0).unwrap(),
        ] {
            let (b, c) = (law.holder_exponent(), law.holder_const());
            for k in 1..=20u32 {
                let eps = 2.0f64.powi(-(k as i32));
                assert!(
                    law.concentration(eps) <= c * eps.powf(b) + 1e-15,
                    "law {law:?} eps {eps}"
                );
            }
        }
    }

    #[test]
    fn beta_quantile_monotone_and_in_support() {
        let law = PotentialLaw::new(LawKind::BetaSmoothed, -1.0, 2.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let q = law.quantile(u.min(0.999999));
            assert!(q >= prev);
            assert!((-1.0..=2.0).contains(&q));
            prev = q;
        }
    }

    #[test]
    fn csv_round_trip() {
        let law = PotentialLaw::default_uniform();
        let edges = enumerate_edges(&[0, 0], 2, 2);
        let s = sample_omega(&law, &edges, 777).unwrap();
        let rows = s.to_csv_rows();
        let back = OmegaSample::from_csv_rows(777, &rows).unwrap();
        for e in &edges {
            assert_eq!(s.value(e).unwrap().to_bits(), back.value(e).unwrap().to_bits());
        }
    }
}
