//! Counterterm coordinates `b^α_{J,I}` and the deformation space they span.
//!
//! A [`DeformationPoint`] is a finitely supported assignment of rational
//! coordinates; shifting by a diagonal distribution adds coefficients,
//! and order-preserving injections of index sets embed lower levels into
//! higher ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::Rational64;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{count_multi_indices, enumerate_subsets, IndexSet, MultiIndex, SubsetMask};
use crate::distributions::{scaling_degree_symbolic, DiagonalDistribution, ScalingDegreeValue};
use crate::wick::t_j_kernel;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundPolicy {
    /// `|α| ≤ sd(t_J)`.
    #[default]
    PaperLiteral,
    /// `|α| ≤ sd(t_J) − d(|I| − 1)`.
    CodimCorrected,
}

impl std::str::FromStr for BoundPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper-literal" => Ok(BoundPolicy::PaperLiteral),
            "codim-corrected" => Ok(BoundPolicy::CodimCorrected),
            other => Err(Error::Parse(format!(
                "unknown bound policy `{other}` (expected paper-literal or codim-corrected)"
            ))),
        }
    }
}

/// The base theory: spacetime dimension, interaction `φ^p`, highest level,
/// and where the scaling-degree bounds come from.
///
/// Bounds are looked up in order: explicit per-label entries, then (if
/// enabled) the symbolic scaling degree of the Wick kernel `t_J`, then the
/// default.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConfig {
    pub d: usize,
    pub p: u32,
    pub n_max: usize,
    pub sd_bounds: BTreeMap<Vec<u32>, ScalingDegreeValue>,
    pub default_sd: Option<ScalingDegreeValue>,
    pub wick_bounds: bool,
    pub bound_policy: BoundPolicy,
    /// Require `|J| ≥ 3` instead of `|J| ≥ 2`.
    pub strict: bool,
}

impl TheoryConfig {
    pub fn new(d: usize, p: u32, n_max: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("spacetime dimension must be positive"));
        }
        if n_max < 2 {
            return Err(Error::domain(format!("n_max must be at least 2, got {n_max}")));
        }
        if n_max + 1 > crate::combinatorics::MAX_POINTS {
            return Err(Error::domain(format!("n_max {n_max} exceeds the supported number of points")));
        }
        Ok(TheoryConfig {
            d,
            p,
            n_max,
            sd_bounds: BTreeMap::new(),
            default_sd: None,
            wick_bounds: false,
            bound_policy: BoundPolicy::default(),
            strict: false,
        })
    }

    /// A theory whose bounds are the scaling degrees of its own Wick kernels.
    pub fn from_wick(d: usize, p: u32, n_max: usize) -> Result<Self> {
        let mut t = Self::new(d, p, n_max)?;
        t.wick_bounds = true;
        Ok(t)
    }

    pub fn with_default_sd(mut self, sd: ScalingDegreeValue) -> Result<Self> {
        finite_or_err(&sd)?;
        self.default_sd = Some(sd);
        Ok(self)
    }

    pub fn with_sd_bound(mut self, label: Vec<u32>, sd: ScalingDegreeValue) -> Result<Self> {
        finite_or_err(&sd)?;
        self.sd_bounds.insert(label, sd);
        Ok(self)
    }

    pub fn with_policy(mut self, policy: BoundPolicy) -> Self {
        self.bound_policy = policy;
        self
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn min_points(&self) -> usize {
        if self.strict {
            3
        } else {
            2
        }
    }

    /// Checks `|J|` and the entries of `J` against the theory.
    pub fn check_label(&self, label: &[u32]) -> Result<()> {
        if label.len() < self.min_points() {
            return Err(Error::domain(format!(
                "label {label:?} has {} points, at least {} required",
                label.len(),
                self.min_points()
            )));
        }
        if label.len() - 1 > self.n_max {
            return Err(Error::domain(format!(
                "label {label:?} is at level {}, above n_max = {}",
                label.len() - 1,
                self.n_max
            )));
        }
        if let Some(&i) = label.iter().find(|&&i| i > self.p) {
            return Err(Error::domain(format!("label entry {i} exceeds the interaction power {}", self.p)));
        }
        Ok(())
    }

    /// Residual kernel `t_J` is nonzero.
    pub fn is_realized(&self, label: &[u32]) -> Result<bool> {
        self.check_label(label)?;
        let residual: Vec<u32> = label.iter().map(|&i| self.p - i).collect();
        Ok(!t_j_kernel(&residual, self.d)?.is_zero())
    }

    pub fn sd_bound(&self, label: &[u32]) -> Result<ScalingDegreeValue> {
        if let Some(sd) = self.sd_bounds.get(label) {
            return Ok(*sd);
        }
        if self.wick_bounds && label.iter().all(|&i| i <= self.p) {
            let residual: Vec<u32> = label.iter().map(|&i| self.p - i).collect();
            let kernel = t_j_kernel(&residual, self.d)?;
            if !kernel.is_zero() {
                let sd = scaling_degree_symbolic(&kernel)?;
                finite_or_err(&sd)?;
                return Ok(sd);
            }
        }
        self.default_sd
            .ok_or_else(|| Error::NotComputable(format!("no scaling-degree bound for J = {label:?}")))
    }

    /// Largest admissible `|α|` at `(J, I)`; negative when none is.
    pub fn alpha_bound(&self, label: &[u32], subset: &SubsetMask) -> Result<i64> {
        let s = self
            .sd_bound(label)?
            .floor()
            .ok_or_else(|| Error::NotComputable("infinite scaling degree".into()))?;
        Ok(match self.bound_policy {
            BoundPolicy::PaperLiteral => s,
            BoundPolicy::CodimCorrected => s - (self.d * (subset.len() - 1)) as i64,
        })
    }

    /// Labels `J ∈ {0,…,p}^{n+1}` whose kernel `t_J` is nonzero, in
    /// lexicographic order.
    pub fn realized_labels(&self, level: usize) -> Result<Vec<Vec<u32>>> {
        let points = level + 1;
        if points < self.min_points() || level > self.n_max {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut label = vec![0u32; points];
        loop {
            if self.is_realized(&label)? {
                out.push(label.clone());
            }
            let mut k = points;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                if label[k] < self.p {
                    label[k] += 1;
                    break;
                }
                label[k] = 0;
            }
        }
    }
}

fn finite_or_err(sd: &ScalingDegreeValue) -> Result<()> {
    match sd {
        ScalingDegreeValue::Finite(_) => Ok(()),
        ScalingDegreeValue::Infinite => Err(Error::domain("scaling-degree bounds must be finite")),
    }
}

/// `(J, I, α)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoordinateKey {
    pub label: Vec<u32>,
    pub subset: SubsetMask,
    pub alpha: MultiIndex,
}

impl CoordinateKey {
    pub fn new(label: Vec<u32>, subset: SubsetMask, alpha: MultiIndex) -> Self {
        CoordinateKey { label, subset, alpha }
    }

    pub fn level(&self) -> usize {
        self.label.len().saturating_sub(1)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidCoordinate {
            key: self.to_string(),
            reason: reason.into(),
        }
    }

    pub fn validate(&self, theory: &TheoryConfig) -> Result<()> {
        let n = self.label.len();
        theory.check_label(&self.label).map_err(|e| self.invalid(e.to_string()))?;
        if self.subset.parent() != n {
            return Err(self.invalid(format!("subset is drawn from {} points, J has {n}", self.subset.parent())));
        }
        if self.subset.len() < 2 {
            return Err(self.invalid("the diagonal needs |I| ≥ 2"));
        }
        if self.alpha.len() != (n - 1) * theory.d {
            return Err(self.invalid(format!("α must have length {}", (n - 1) * theory.d)));
        }
        let bound = theory.alpha_bound(&self.label, &self.subset)?;
        if i64::from(self.alpha.order()) > bound {
            return Err(self.invalid(format!("|α| = {} exceeds the bound {bound}", self.alpha.order())));
        }
        Ok(())
    }
}

impl fmt::Display for CoordinateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j: Vec<String> = self.label.iter().map(|i| i.to_string()).collect();
        write!(f, "b^{}_{{({}),{}}}", self.alpha, j.join(","), self.subset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiltrationLevel(pub usize);

impl FiltrationLevel {
    pub fn n(&self) -> usize {
        self.0
    }

    pub fn points(&self) -> usize {
        self.0 + 1
    }
}

pub fn filtration_level(label: &[u32]) -> Result<FiltrationLevel> {
    if label.len() < 2 {
        return Err(Error::domain(format!("label {label:?} needs at least two points")));
    }
    Ok(FiltrationLevel(label.len() - 1))
}

/// A finitely supported point of the deformation space. Zero coordinates
/// are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationPoint {
    theory: Arc<TheoryConfig>,
    entries: BTreeMap<CoordinateKey, Scalar>,
}

impl DeformationPoint {
    pub fn zero(theory: Arc<TheoryConfig>) -> Self {
        DeformationPoint {
            theory,
            entries: BTreeMap::new(),
        }
    }

    /// Validates every key and sums repeated ones.
    pub fn from_entries<I>(theory: Arc<TheoryConfig>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CoordinateKey, Scalar)>,
    {
        let mut point = Self::zero(theory);
        for (k, v) in entries {
            k.validate(&point.theory)?;
            point.accumulate(k, &v);
        }
        Ok(point)
    }

    fn accumulate(&mut self, key: CoordinateKey, value: &Scalar) {
        if value.is_zero() {
            return;
        }
        let entry = self.entries.entry(key.clone()).or_insert_with(Scalar::zero);
        *entry += value;
        if entry.is_zero() {
            self.entries.remove(&key);
        }
    }

    pub fn theory(&self) -> &Arc<TheoryConfig> {
        &self.theory
    }

    pub fn get(&self, key: &CoordinateKey) -> Scalar {
        self.entries.get(key).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CoordinateKey, &Scalar)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn levels(&self) -> BTreeSet<usize> {
        self.entries.keys().map(|k| k.level()).collect()
    }

    pub fn restrict_to_level(&self, level: usize) -> Self {
        DeformationPoint {
            theory: self.theory.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| k.level() == level)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    fn same_theory(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.theory, &other.theory) || self.theory == other.theory {
            Ok(())
        } else {
            Err(Error::domain("points belong to different theories"))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_theory(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.accumulate(k.clone(), v);
        }
        Ok(out)
    }

    pub fn negate(&self) -> Self {
        self.map_values(|v| -v)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map_values(|v| v * c)
    }

    /// Applies `f` to every coordinate, dropping results that vanish.
    pub fn map_values(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        self.map_with_key(|_, v| f(v))
    }

    pub fn map_with_key(&self, f: impl Fn(&CoordinateKey, &Scalar) -> Scalar) -> Self {
        DeformationPoint {
            theory: self.theory.clone(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), f(k, v)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// `d_J` as a diagonal distribution.
    pub fn distribution(&self, label: &[u32]) -> Result<DiagonalDistribution> {
        let mut d = DiagonalDistribution::new(label.to_vec(), label.len(), self.theory.d)?;
        for (k, v) in self.entries.iter().filter(|(k, _)| k.label == label) {
            d.add_term(k.subset, k.alpha.clone(), v.clone())?;
        }
        Ok(d)
    }
}

/// `t_J ↦ t_J + d_J`: adds the coefficients of `d` to the coordinates of
/// `point` at label `J`.
pub fn shift(label: &[u32], point: &DeformationPoint, d: &DiagonalDistribution) -> Result<DeformationPoint> {
    if !d.label().is_empty() && d.label() != label {
        return Err(Error::domain(format!(
            "distribution is labelled {:?}, shift requested at {label:?}",
            d.label()
        )));
    }
    if d.points() != label.len() {
        return Err(Error::domain(format!(
            "distribution lives on {} points, J has {}",
            d.points(),
            label.len()
        )));
    }
    if d.spacetime_dim() != point.theory.d {
        return Err(Error::domain("distribution and theory disagree on the spacetime dimension"));
    }
    let mut out = point.clone();
    for term in d.terms() {
        let key = CoordinateKey::new(label.to_vec(), term.subset, term.alpha);
        key.validate(&point.theory)?;
        out.accumulate(key, &term.coefficient);
    }
    Ok(out)
}

/// An order-preserving injection `{1,…,source} ↪ {1,…,target}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    target: usize,
    images: Vec<usize>,
}

impl Injection {
    /// `images[a−1] = ι(a)`, 1-based.
    pub fn new(images: Vec<usize>, target: usize) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::domain("an injection needs a nonempty source"));
        }
        if let Some(&b) = images.iter().find(|&&b| b == 0 || b > target) {
            return Err(Error::domain(format!("image {b} lies outside 1..={target}")));
        }
        let distinct: BTreeSet<_> = images.iter().collect();
        if distinct.len() != images.len() {
            return Err(Error::domain(format!("{images:?} is not injective")));
        }
        if images.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain(format!("{images:?} is not order-preserving")));
        }
        Ok(Injection { target, images })
    }

    pub fn identity(n: usize) -> Self {
        Injection {
            target: n,
            images: (1..=n).collect(),
        }
    }

    pub fn source(&self) -> usize {
        self.images.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn image(&self, a: usize) -> usize {
        self.images[a - 1]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Injection) -> Result<Injection> {
        if inner.target != self.source() {
            return Err(Error::domain("injections are not composable"));
        }
        Injection::new(inner.images.iter().map(|&a| self.image(a)).collect(), self.target)
    }

    fn map_key(&self, key: &CoordinateKey, d: usize) -> Result<CoordinateKey> {
        let mut label = vec![0u32; self.target];
        for (a, &j) in key.label.iter().enumerate() {
            label[self.image(a + 1) - 1] = j;
        }
        let members: Vec<usize> = key.subset.members().iter().map(|&a| self.image(a)).collect();
        let subset = SubsetMask::from_members(self.target, &members)?;
        // derivative blocks follow their points; point 1 of the source has none
        let mut alpha = vec![0u32; (self.target - 1) * d];
        let src = key.alpha.components();
        for a in 2..=self.source() {
            let b = self.image(a);
            alpha[(b - 2) * d..(b - 1) * d].copy_from_slice(&src[(a - 2) * d..(a - 1) * d]);
        }
        Ok(CoordinateKey::new(label, subset, MultiIndex::new(alpha)))
    }
}

/// `ι_#`: pushes every coordinate of a level-`(source−1)` point to level
/// `target − 1`.
pub fn embed(iota: &Injection, point: &DeformationPoint) -> Result<DeformationPoint> {
    if let Some(k) = point.entries.keys().find(|k| k.label.len() != iota.source()) {
        return Err(Error::domain(format!(
            "{k} is not at level {} required by the injection",
            iota.source() - 1
        )));
    }
    let d = point.theory.d;
    let mapped = point
        .entries
        .iter()
        .map(|(k, v)| Ok((iota.map_key(k, d)?, v.clone())))
        .collect::<Result<Vec<_>>>()?;
    DeformationPoint::from_entries(point.theory.clone(), mapped)
}

/// Number of admissible `α` at `(J, I)`.
pub fn counterterm_dimension(label: &[u32], subset: &SubsetMask, theory: &TheoryConfig) -> Result<u64> {
    if label.len() < 2 {
        return Err(Error::domain("J needs at least two points"));
    }
    let m = (label.len() - 1) * theory.d;
    Ok(count_multi_indices(m, theory.alpha_bound(label, subset)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelDimension {
    pub level: usize,
    pub labels: usize,
    pub dimension: u64,
}

/// Per-level totals of [`counterterm_dimension`] over all realized `J`
/// and all `I` with `|I| ≥ 2`.
pub fn total_dimension_report(theory: &TheoryConfig, up_to_level: usize) -> Result<Vec<LevelDimension>> {
    if up_to_level > theory.n_max {
        return Err(Error::domain(format!(
            "level {up_to_level} exceeds n_max = {}",
            theory.n_max
        )));
    }
    let mut out = Vec::new();
    for level in 1..=up_to_level {
        let labels = theory.realized_labels(level)?;
        let mut dimension = 0u64;
        if !labels.is_empty() {
            let subsets = enumerate_subsets(IndexSet::new(level + 1)?, 2);
            for label in &labels {
                for s in &subsets {
                    dimension += counterterm_dimension(label, s, theory)?;
                }
            }
        }
        out.push(LevelDimension {
            level,
            labels: labels.len(),
            dimension,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonEntry {
    #[serde(rename = "J")]
    label: Vec<u32>,
    #[serde(rename = "I")]
    subset: Vec<usize>,
    alpha: Vec<u32>,
    #[serde(rename = "coeff-numerator")]
    numerator: String,
    #[serde(rename = "coeff-denominator")]
    denominator: String,
}

/// Canonical JSON: a list of entries in key order, pretty-printed with a
/// trailing newline. Numerators and denominators are decimal strings so
/// arbitrary-size rationals survive the trip.
pub fn to_canonical_json(point: &DeformationPoint) -> String {
    let entries: Vec<JsonEntry> = point
        .entries
        .iter()
        .map(|(k, v)| JsonEntry {
            label: k.label.clone(),
            subset: k.subset.members(),
            alpha: k.alpha.components().to_vec(),
            numerator: v.numer().to_string(),
            denominator: v.denom().to_string(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&entries).expect("entries are always serializable");
    s.push('\n');
    s
}

pub fn from_json(theory: Arc<TheoryConfig>, json: &str) -> Result<DeformationPoint> {
    let entries: Vec<JsonEntry> =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("deformation point: {e}")))?;
    let mut parsed = Vec::with_capacity(entries.len());
    for e in entries {
        let num: BigInt = e
            .numerator
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator `{}`", e.numerator)))?;
        let den: BigInt = e
            .denominator
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator `{}`", e.denominator)))?;
        if !den.is_positive() {
            return Err(Error::Parse(format!("denominator {den} must be positive")));
        }
        let subset = SubsetMask::from_members(e.label.len(), &e.subset)?;
        parsed.push((
            CoordinateKey::new(e.label, subset, MultiIndex::new(e.alpha)),
            Scalar::new(num, den),
        ));
    }
    DeformationPoint::from_entries(theory, parsed)
}

/// Convenience for bounds given as integers.
pub fn sd(value: i64) -> ScalingDegreeValue {
    ScalingDegreeValue::Finite(Rational64::from_integer(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_multi_indices;
    use crate::rational::{int, ratio};

    fn theory(d: usize, default: i64) -> Arc<TheoryConfig> {
        Arc::new(TheoryConfig::new(d, 4, 4).unwrap().with_default_sd(sd(default)).unwrap())
    }

    fn key(label: &[u32], members: &[usize], alpha: &[u32]) -> CoordinateKey {
        CoordinateKey::new(
            label.to_vec(),
            SubsetMask::from_members(label.len(), members).unwrap(),
            MultiIndex::new(alpha.to_vec()),
        )
    }

    #[test]
    fn filtration_levels() {
        assert_eq!(filtration_level(&[1, 1]).unwrap().n(), 1);
        assert_eq!(filtration_level(&[1, 1, 1]).unwrap().n(), 2);
        assert_eq!(filtration_level(&[0; 5]).unwrap().n(), 4);
        assert!(filtration_level(&[3]).is_err());
    }

    #[test]
    fn dimension_examples() {
        let t = TheoryConfig::new(1, 2, 2).unwrap().with_default_sd(sd(2)).unwrap();
        let i = SubsetMask::from_members(2, &[1, 2]).unwrap();
        assert_eq!(counterterm_dimension(&[1, 1], &i, &t).unwrap(), 3);
        assert_eq!(enumerate_multi_indices(1, 2).len(), 3);

        let neg = TheoryConfig::new(1, 2, 2).unwrap().with_default_sd(sd(-1)).unwrap();
        assert_eq!(counterterm_dimension(&[1, 1], &i, &neg).unwrap(), 0);

        let codim = TheoryConfig::new(2, 2, 2)
            .unwrap()
            .with_default_sd(sd(2))
            .unwrap()
            .with_policy(BoundPolicy::CodimCorrected);
        assert_eq!(counterterm_dimension(&[1, 1], &i, &codim).unwrap(), 1);
    }

    #[test]
    fn report_example() {
        let t = TheoryConfig::new(1, 2, 2).unwrap().with_default_sd(sd(1)).unwrap();
        let r = total_dimension_report(&t, 1).unwrap();
        // J = (0,0), (1,1), (2,2) are realized; 2 coordinates each
        assert_eq!(r, vec![LevelDimension { level: 1, labels: 3, dimension: 6 }]);
        assert!(total_dimension_report(&t, 3).is_err());
    }

    #[test]
    fn wick_bounds() {
        let t = TheoryConfig::from_wick(4, 2, 2).unwrap();
        assert_eq!(t.sd_bound(&[0, 0]).unwrap(), sd(4));
        assert_eq!(t.sd_bound(&[2, 2]).unwrap(), sd(0));
        assert!(matches!(t.sd_bound(&[2, 0]), Err(Error::NotComputable(_))));
    }

    #[test]
    fn shift_rules() {
        let t = theory(1, 2);
        let p = DeformationPoint::zero(t.clone());
        let mut d = DiagonalDistribution::new(vec![1, 1], 2, 1).unwrap();
        d.add_term(SubsetMask::from_members(2, &[1, 2]).unwrap(), MultiIndex::new(vec![1]), ratio(1, 3))
            .unwrap();
        let once = shift(&[1, 1], &p, &d).unwrap();
        assert_eq!(once.get(&key(&[1, 1], &[1, 2], &[1])), ratio(1, 3));
        let back = shift(&[1, 1], &once, &d.map_coefficients(|c| -c)).unwrap();
        assert!(back.is_zero());

        let empty = DiagonalDistribution::new(vec![1, 1], 2, 1).unwrap();
        assert_eq!(shift(&[1, 1], &once, &empty).unwrap(), once);

        let mut big = DiagonalDistribution::new(vec![1, 1], 2, 1).unwrap();
        big.add_term(SubsetMask::from_members(2, &[1, 2]).unwrap(), MultiIndex::new(vec![3]), int(1))
            .unwrap();
        assert!(matches!(shift(&[1, 1], &p, &big), Err(Error::InvalidCoordinate { .. })));
    }

    #[test]
    fn strictness_flag() {
        let strict = Arc::new(
            TheoryConfig::new(1, 4, 4)
                .unwrap()
                .with_default_sd(sd(2))
                .unwrap()
                .with_strict(true),
        );
        let r = DeformationPoint::from_entries(strict.clone(), [(key(&[1, 1], &[1, 2], &[0]), int(1))]);
        assert!(matches!(r, Err(Error::InvalidCoordinate { .. })));
        assert!(DeformationPoint::from_entries(strict, [(key(&[1, 1, 1], &[1, 2], &[0, 0]), int(1))]).is_ok());
    }

    #[test]
    fn embedding_moves_blocks() {
        let t = theory(2, 4);
        let p = DeformationPoint::from_entries(t, [(key(&[3, 1], &[1, 2], &[1, 2]), ratio(5, 7))]).unwrap();
        let iota = Injection::new(vec![2, 3], 3).unwrap();
        let e = embed(&iota, &p).unwrap();
        assert_eq!(e.get(&key(&[0, 3, 1], &[2, 3], &[0, 0, 1, 2])), ratio(5, 7));
        assert_eq!(e.len(), 1);
        assert!(Injection::new(vec![2, 2], 3).is_err());
        assert!(Injection::new(vec![3, 1], 3).is_err());
        assert_eq!(embed(&Injection::identity(2), &p).unwrap(), p);
    }

    #[test]
    fn json_round_trip() {
        let t = theory(1, 3);
        let p = DeformationPoint::from_entries(
            t.clone(),
            [
                (key(&[2, 1, 0], &[1, 3], &[1, 2]), ratio(-3, 8)),
                (key(&[1, 1], &[1, 2], &[0]), int(1)),
            ],
        )
        .unwrap();
        let s = to_canonical_json(&p);
        assert!(s.ends_with("]\n"));
        assert!(s.contains("\"coeff-numerator\": \"-3\""));
        let q = from_json(t, &s).unwrap();
        assert_eq!(q, p);
        assert_eq!(to_canonical_json(&q), s);
    }

    #[test]
    fn json_rejects_bad_input() {
        let t = theory(1, 3);
        assert!(matches!(from_json(t.clone(), "{"), Err(Error::Parse(_))));
        let zero_den = r#"[{"J":[1,1],"I":[1,2],"alpha":[0],"coeff-numerator":"1","coeff-denominator":"0"}]"#;
        assert!(matches!(from_json(t, zero_den), Err(Error::Parse(_))));
    }
}
