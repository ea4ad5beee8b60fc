//! Renormalization-group machinery on the deformation space.
//!
//! The scaling action multiplies each coordinate family `{b^α_{J,·}}` by
//! a subset-lattice matrix `M[I,K] = ε(K)` (`K ⊆ I`), where `ε` depends
//! only on `|K|`, `λ` and the comparison of the first two entries of `J`.
//! The grading `θ_q` multiplies level `n` by `q^n`. The unipotent part of
//! the group is realized through truncated series in the free associative
//! algebra on graded letters `e_1, e_2, …`, whose primitive part is the free
//! graded Lie algebra with Lyndon-word basis.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_subsets, IndexSet, MultiIndex, SubsetMask};
use crate::deformation::{CoordinateKey, DeformationPoint, TheoryConfig};
use crate::distributions::DiagonalDistribution;
use crate::exec::Exec;
use crate::rational::{int, pow, ratio, to_f64};
use crate::report::{Claim, ClaimReport};
use crate::{Error, Result, Scalar};

/// Largest level whose subset lattice is materialized.
pub const MAX_SCALING_LEVEL: usize = 8;
/// Largest truncation degree for free-Lie computations.
pub const MAX_TRUNCATION: usize = 8;

/// How `j_1` compares with `j_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JClass {
    Greater,
    Equal,
    Less,
}

impl JClass {
    pub const ALL: [JClass; 3] = [JClass::Greater, JClass::Equal, JClass::Less];

    pub fn of(label: &[u32]) -> Result<JClass> {
        if label.len() < 2 {
            return Err(Error::domain(format!("J = {label:?} needs at least two entries")));
        }
        Ok(match label[0].cmp(&label[1]) {
            std::cmp::Ordering::Greater => JClass::Greater,
            std::cmp::Ordering::Equal => JClass::Equal,
            std::cmp::Ordering::Less => JClass::Less,
        })
    }
}

impl std::str::FromStr for JClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gt" | "greater" => Ok(JClass::Greater),
            "eq" | "equal" => Ok(JClass::Equal),
            "lt" | "less" => Ok(JClass::Less),
            other => Err(Error::Parse(format!("unknown J class `{other}` (expected gt, eq or lt)"))),
        }
    }
}

impl fmt::Display for JClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JClass::Greater => "j1>j2",
            JClass::Equal => "j1=j2",
            JClass::Less => "j1<j2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonContext {
    label: Vec<u32>,
    lambda: Scalar,
}

impl EpsilonContext {
    pub fn new(label: Vec<u32>, lambda: Scalar) -> Result<Self> {
        JClass::of(&label)?;
        Ok(EpsilonContext { label, lambda })
    }

    pub fn class(&self) -> JClass {
        JClass::of(&self.label).expect("validated on construction")
    }
}

fn epsilon_for(class: JClass, k_len: usize, lambda: &Scalar) -> Scalar {
    match class {
        JClass::Greater => pow(lambda, k_len as u32),
        JClass::Equal => Scalar::one(),
        JClass::Less => Scalar::zero(),
    }
}

/// `λ^{|K|}` if `j_1 > j_2`, `1` if `j_1 = j_2`, `0` if `j_1 < j_2`.
pub fn epsilon(k: &SubsetMask, ctx: &EpsilonContext) -> Scalar {
    epsilon_for(ctx.class(), k.len(), &ctx.lambda)
}

/// Square matrix over the subsets of `{1,…,n}`, rows and columns in mask
/// order.
pub type SubsetMatrix = Vec<Vec<Scalar>>;

fn lattice_size(points: usize) -> Result<usize> {
    if points == 0 || points > MAX_SCALING_LEVEL + 1 {
        return Err(Error::domain(format!(
            "subset lattice on {points} points is outside 1..={}",
            MAX_SCALING_LEVEL + 1
        )));
    }
    Ok(1usize << points)
}

fn is_submask(k: usize, i: usize) -> bool {
    k & !i == 0
}

pub fn zeta_matrix(points: usize) -> Result<SubsetMatrix> {
    let size = lattice_size(points)?;
    Ok((0..size)
        .map(|i| (0..size).map(|k| if is_submask(k, i) { int(1) } else { int(0) }).collect())
        .collect())
}

pub fn moebius_matrix(points: usize) -> Result<SubsetMatrix> {
    let size = lattice_size(points)?;
    Ok((0..size)
        .map(|i| {
            (0..size)
                .map(|k| {
                    if is_submask(k, i) {
                        let sign = ((i & !k).count_ones() % 2) as i64;
                        int(1 - 2 * sign)
                    } else {
                        int(0)
                    }
                })
                .collect()
        })
        .collect())
}

pub fn identity_matrix(size: usize) -> SubsetMatrix {
    (0..size)
        .map(|i| (0..size).map(|k| if i == k { int(1) } else { int(0) }).collect())
        .collect()
}

/// Product skipping zero entries; the matrices involved are mostly zero.
pub fn matmul(a: &SubsetMatrix, b: &SubsetMatrix) -> Result<SubsetMatrix> {
    let n = a.len();
    if b.len() != n || a.iter().chain(b).any(|row| row.len() != n) {
        return Err(Error::domain("matrix shapes do not match"));
    }
    let mut out = vec![vec![Scalar::zero(); n]; n];
    for (i, row) in a.iter().enumerate() {
        for (l, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in b[l].iter().enumerate() {
                if !y.is_zero() {
                    out[i][k] += x * y;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOperator {
    level: usize,
    class: JClass,
    lambda: Scalar,
    matrix: SubsetMatrix,
}

impl ScalingOperator {
    pub fn level(&self) -> usize {
        self.level
    }

    /// `|N| = level + 1`.
    pub fn points(&self) -> usize {
        self.level + 1
    }

    pub fn class(&self) -> JClass {
        self.class
    }

    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn matrix(&self) -> &SubsetMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: &SubsetMask, k: &SubsetMask) -> &Scalar {
        &self.matrix[i.bits() as usize][k.bits() as usize]
    }

    /// First `(I, K)` with `K ⊄ I` and a nonzero entry.
    pub fn triangularity_violation(&self) -> Option<(SubsetMask, SubsetMask)> {
        let n = self.points();
        for (i, row) in self.matrix.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if !is_submask(k, i) && !v.is_zero() {
                    return Some((
                        SubsetMask::from_bits(n, i as u64).ok()?,
                        SubsetMask::from_bits(n, k as u64).ok()?,
                    ));
                }
            }
        }
        None
    }
}

/// `M[I,K] = ε(K)` for `K ⊆ I ⊆ {1,…,level+1}`, zero otherwise.
pub fn scaling_operator(level: usize, class: JClass, lambda: &Scalar) -> Result<ScalingOperator> {
    if level == 0 || level > MAX_SCALING_LEVEL {
        return Err(Error::domain(format!("level {level} is outside 1..={MAX_SCALING_LEVEL}")));
    }
    let size = lattice_size(level + 1)?;
    let eps: Vec<Scalar> = (0..=level + 1).map(|k| epsilon_for(class, k, lambda)).collect();
    let matrix = (0..size)
        .map(|i| {
            (0..size)
                .map(|k| {
                    if is_submask(k, i) {
                        eps[k.count_ones() as usize].clone()
                    } else {
                        Scalar::zero()
                    }
                })
                .collect()
        })
        .collect();
    Ok(ScalingOperator {
        level,
        class,
        lambda: lambda.clone(),
        matrix,
    })
}

type Families = BTreeMap<(Vec<u32>, MultiIndex), Vec<(SubsetMask, Scalar)>>;

fn families(point: &DeformationPoint, points: usize) -> Result<Families> {
    let mut out: Families = BTreeMap::new();
    for (k, v) in point.entries() {
        if k.label.len() != points {
            return Err(Error::domain(format!(
                "{k} is at level {}, the operator acts on level {}",
                k.level(),
                points - 1
            )));
        }
        out.entry((k.label.clone(), k.alpha.clone()))
            .or_default()
            .push((k.subset, v.clone()));
    }
    Ok(out)
}

/// Applies `matrix` (indexed by subset masks) to every family selected by
/// `select`, leaving other families unchanged.
fn act_on_families<'a>(
    point: &DeformationPoint,
    points: usize,
    select: impl Fn(JClass) -> Option<SubsetMatrixRef<'a>>,
) -> Result<DeformationPoint> {
    let targets = enumerate_subsets(IndexSet::new(points)?, 2);
    let mut entries = Vec::new();
    for ((label, alpha), family) in families(point, points)? {
        match select(JClass::of(&label)?) {
            None => {
                for (s, v) in family {
                    entries.push((CoordinateKey::new(label.clone(), s, alpha.clone()), v));
                }
            }
            Some(matrix) => {
                for i in &targets {
                    let mut acc = Scalar::zero();
                    for (k, b) in &family {
                        if k.is_subset_of(i) {
                            acc += matrix.entry(i.bits() as usize, k) * b;
                        }
                    }
                    if !acc.is_zero() {
                        entries.push((CoordinateKey::new(label.clone(), *i, alpha.clone()), acc));
                    }
                }
            }
        }
    }
    DeformationPoint::from_entries(point.theory().clone(), entries)
}

enum SubsetMatrixRef<'a> {
    Dense(&'a SubsetMatrix),
    /// `|K|`, the λ-derivative of the `j_1 > j_2` action at `λ = 1`.
    Cardinality,
}

impl SubsetMatrixRef<'_> {
    fn entry(&self, i: usize, k: &SubsetMask) -> Scalar {
        match self {
            SubsetMatrixRef::Dense(m) => m[i][k.bits() as usize].clone(),
            SubsetMatrixRef::Cardinality => int(k.len() as i64),
        }
    }
}

/// Multiplies every coordinate family of `op`'s class by the operator's
/// matrix. Families of the other classes are left unchanged.
pub fn apply_scaling(op: &ScalingOperator, point: &DeformationPoint) -> Result<DeformationPoint> {
    act_on_families(point, op.points(), |c| {
        (c == op.class).then_some(SubsetMatrixRef::Dense(&op.matrix))
    })
}

/// The full action at `λ`: each family is multiplied by the matrix of its
/// own class.
pub fn apply_scaling_all(level: usize, lambda: &Scalar, point: &DeformationPoint) -> Result<DeformationPoint> {
    let ops: BTreeMap<JClass, ScalingOperator> = JClass::ALL
        .iter()
        .map(|&c| Ok((c, scaling_operator(level, c, lambda)?)))
        .collect::<Result<_>>()?;
    act_on_families(point, level + 1, |c| Some(SubsetMatrixRef::Dense(&ops[&c].matrix)))
}

/// Applies an arbitrary subset matrix to every family of `class`.
pub fn apply_matrix(matrix: &SubsetMatrix, class: JClass, level: usize, point: &DeformationPoint) -> Result<DeformationPoint> {
    if matrix.len() != lattice_size(level + 1)? {
        return Err(Error::domain("matrix size does not match the level"));
    }
    act_on_families(point, level + 1, |c| (c == class).then_some(SubsetMatrixRef::Dense(matrix)))
}

/// `d/dλ` at `λ = 1` of the `j_1 > j_2` action: the tangent coordinate at
/// `(J, I, α)` is `Σ_{K⊆I} |K| b^α_{J,K}`; other classes are fixed by the
/// action and contribute zero. Points may mix levels.
pub fn generator_vector_field(point: &DeformationPoint) -> Result<DeformationPoint> {
    let mut out = DeformationPoint::zero(point.theory().clone());
    for level in point.levels() {
        let part = point.restrict_to_level(level);
        let tangent = act_on_families(&part, level + 1, |c| {
            (c == JClass::Greater).then_some(SubsetMatrixRef::Cardinality)
        })?;
        // unselected families pass through unchanged; drop them
        let tangent = tangent.map_with_key(|k, v| {
            if JClass::of(&k.label) == Ok(JClass::Greater) {
                v.clone()
            } else {
                Scalar::zero()
            }
        });
        out = out.add(&tangent)?;
    }
    Ok(out)
}

/// Values that carry a level and can be rescaled level by level.
pub trait Graded: Sized {
    fn scale_levels(&self, factor: &dyn Fn(usize) -> Scalar) -> Self;
}

impl Graded for DeformationPoint {
    fn scale_levels(&self, factor: &dyn Fn(usize) -> Scalar) -> Self {
        self.map_with_key(|k, v| v * factor(k.level()))
    }
}

impl Graded for DiagonalDistribution<Scalar> {
    fn scale_levels(&self, factor: &dyn Fn(usize) -> Scalar) -> Self {
        let f = factor(self.level());
        self.map_coefficients(|c| c * &f)
    }
}

/// `θ_z` with `q = e^z`: multiplies level `n` by `q^n`.
pub fn theta<T: Graded>(q: &Scalar, x: &T) -> Result<T> {
    if q.is_zero() {
        return Err(Error::domain("θ needs q = e^z ≠ 0"));
    }
    Ok(x.scale_levels(&|n| pow(q, n as u32)))
}

/// `θ_z` on a single floating-point coordinate at level `n`.
pub fn theta_f64(z: f64, level: usize, value: f64) -> f64 {
    (level as f64 * z).exp() * value
}

/// `Y = d/dz θ_z |_{z=0}`: multiplies level `n` by `n`.
pub fn grading_y<T: Graded>(x: &T) -> T {
    x.scale_levels(&|n| int(n as i64))
}

/// A word over letters `1..=D`; letter `k` stands for `e_k` of weight `k`.
pub type Word = Vec<u8>;

pub fn word_weight(w: &[u8]) -> usize {
    w.iter().map(|&l| l as usize).sum()
}

/// Strictly smaller than each of its proper suffixes.
pub fn is_lyndon(w: &[u8]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

fn compositions(weight: usize, out: &mut Vec<Word>, current: &mut Word) {
    if weight == 0 {
        out.push(current.clone());
        return;
    }
    for first in 1..=weight.min(u8::MAX as usize) {
        current.push(first as u8);
        compositions(weight - first, out, current);
        current.pop();
    }
}

/// Lyndon words of the given weight, in lexicographic order.
pub fn lyndon_words(weight: usize) -> Vec<Word> {
    if weight == 0 {
        return Vec::new();
    }
    let mut all = Vec::new();
    compositions(weight, &mut all, &mut Vec::new());
    let mut out: Vec<Word> = all.into_iter().filter(|w| is_lyndon(w)).collect();
    out.sort();
    out
}

/// `w = uv` with `v` the longest proper Lyndon suffix.
fn standard_factorization(w: &[u8]) -> (&[u8], &[u8]) {
    for i in 1..w.len() {
        if is_lyndon(&w[i..]) {
            return (&w[..i], &w[i..]);
        }
    }
    unreachable!("a Lyndon word of length ≥ 2 has a proper Lyndon suffix")
}

/// A truncated series in the free associative algebra: words of weight
/// above `trunc` are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSeries {
    trunc: usize,
    coeffs: BTreeMap<Word, Scalar>,
}

impl TensorSeries {
    pub fn zero(trunc: usize) -> Self {
        TensorSeries {
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(trunc: usize) -> Self {
        Self::zero(trunc).plus_term(Word::new(), int(1))
    }

    pub fn letter(k: u8, trunc: usize) -> Self {
        Self::zero(trunc).plus_term(vec![k], int(1))
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn coefficient(&self, w: &[u8]) -> Scalar {
        self.coeffs.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn plus_term(mut self, w: Word, c: Scalar) -> Self {
        self.add_term(w, &c);
        self
    }

    fn add_term(&mut self, w: Word, c: &Scalar) {
        if c.is_zero() || word_weight(&w) > self.trunc {
            return;
        }
        let e = self.coeffs.entry(w.clone()).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&w);
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.trunc != other.trunc {
            return Err(Error::domain(format!(
                "truncation degrees differ: {} and {}",
                self.trunc, other.trunc
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (w, c) in &other.coeffs {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.trunc);
        for (w, v) in &self.coeffs {
            out.add_term(w.clone(), &(v * c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.trunc);
        for (u, a) in &self.coeffs {
            let wu = word_weight(u);
            for (v, b) in &other.coeffs {
                if wu + word_weight(v) > self.trunc {
                    continue;
                }
                let mut w = u.clone();
                w.extend_from_slice(v);
                out.add_term(w, &(a * b));
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Multiplies each weight-`n` word by `u^n`.
    pub fn grade_scale(&self, u: &Scalar) -> Self {
        let mut out = Self::zero(self.trunc);
        for (w, c) in &self.coeffs {
            out.add_term(w.clone(), &(c * pow(u, word_weight(w) as u32)));
        }
        out
    }

    fn constant(&self) -> Scalar {
        self.coefficient(&[])
    }

    /// `Σ_{k=0}^{trunc} a_k Z^k` for `Z` without constant term.
    fn power_series(z: &Self, coeff: impl Fn(usize) -> Scalar) -> Result<Self> {
        let mut out = Self::one(z.trunc).scale(&coeff(0));
        let mut power = Self::one(z.trunc);
        for k in 1..=z.trunc {
            power = power.mul(z)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(&coeff(k)))?;
        }
        Ok(out)
    }
}

/// The bracketing of a Lyndon word through its standard factorization,
/// expanded in the free associative algebra.
pub fn lyndon_bracket(w: &[u8], trunc: usize) -> Result<TensorSeries> {
    if !is_lyndon(w) {
        return Err(Error::domain(format!("{w:?} is not a Lyndon word")));
    }
    Ok(bracket_rec(w, trunc))
}

fn bracket_rec(w: &[u8], trunc: usize) -> TensorSeries {
    if w.len() == 1 {
        return TensorSeries::letter(w[0], trunc);
    }
    let (u, v) = standard_factorization(w);
    bracket_rec(u, trunc)
        .commutator(&bracket_rec(v, trunc))
        .expect("same truncation")
}

fn bracket_label(w: &[u8]) -> String {
    if w.len() == 1 {
        return format!("e{}", w[0]);
    }
    let (u, v) = standard_factorization(w);
    format!("[{},{}]", bracket_label(u), bracket_label(v))
}

/// An element of the free graded Lie algebra truncated at weight `D`, in
/// Lyndon coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieElement {
    trunc: usize,
    coeffs: BTreeMap<Word, Scalar>,
}

impl LieElement {
    pub fn zero(trunc: usize) -> Self {
        LieElement {
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    /// `e_k`; zero when `k` exceeds the truncation.
    pub fn generator(k: u8, trunc: usize) -> Result<Self> {
        Self::from_terms(trunc, [(vec![k], int(1))])
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Scalar)>>(trunc: usize, terms: I) -> Result<Self> {
        if trunc > MAX_TRUNCATION {
            return Err(Error::domain(format!("truncation {trunc} exceeds {MAX_TRUNCATION}")));
        }
        let mut out = Self::zero(trunc);
        for (w, c) in terms {
            if w.contains(&0) || !is_lyndon(&w) {
                return Err(Error::domain(format!("{w:?} is not a Lyndon word over e_1, e_2, …")));
            }
            out.add_term(w, &c);
        }
        Ok(out)
    }

    fn add_term(&mut self, w: Word, c: &Scalar) {
        if c.is_zero() || word_weight(&w) > self.trunc {
            return;
        }
        let e = self.coeffs.entry(w.clone()).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&w);
        }
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn coefficient(&self, w: &[u8]) -> Scalar {
        self.coeffs.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The weight-`n` component.
    pub fn component(&self, n: usize) -> Self {
        LieElement {
            trunc: self.trunc,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(w, _)| word_weight(w) == n)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.trunc != other.trunc {
            return Err(Error::domain(format!(
                "truncation degrees differ: {} and {}",
                self.trunc, other.trunc
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (w, c) in &other.coeffs {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.trunc);
        for (w, v) in &self.coeffs {
            out.add_term(w.clone(), &(v * c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    pub fn to_tensor(&self) -> TensorSeries {
        let mut out = TensorSeries::zero(self.trunc);
        for (w, c) in &self.coeffs {
            out = out
                .add(&bracket_rec(w, self.trunc).scale(c))
                .expect("same truncation");
        }
        out
    }

    /// Lyndon coordinates of a Lie polynomial given in the free associative
    /// algebra. The bracketing of a Lyndon word `w` is `w` plus
    /// lexicographically larger words, so peeling off the smallest word
    /// recovers the coordinates; a smallest word that is not Lyndon means
    /// the input was not a Lie element.
    pub fn from_tensor(t: &TensorSeries) -> Result<Self> {
        let mut rest = t.clone();
        let mut out = Self::zero(t.trunc);
        while let Some((w, c)) = rest.coeffs.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
            if !is_lyndon(&w) {
                return Err(Error::Internal(format!(
                    "series is not a Lie polynomial: leading word {w:?} is not Lyndon"
                )));
            }
            rest = rest.sub(&bracket_rec(&w, t.trunc).scale(&c))?;
            out.add_term(w, &c);
        }
        Ok(out)
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut words: Vec<&Word> = self.coeffs.keys().collect();
        words.sort_by_key(|w| (word_weight(w), (*w).clone()));
        let parts: Vec<String> = words
            .into_iter()
            .map(|w| {
                let c = &self.coeffs[w];
                if c.is_one() {
                    bracket_label(w)
                } else {
                    format!("{c}·{}", bracket_label(w))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn lie_bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    x.check(y)?;
    LieElement::from_tensor(&x.to_tensor().commutator(&y.to_tensor())?)
}

/// `u^Y`: the weight-`n` component is multiplied by `u^n`.
pub fn uy_act(u: &Scalar, x: &LieElement) -> Result<LieElement> {
    if u.is_zero() {
        return Err(Error::domain("u^Y needs u ≠ 0"));
    }
    let mut out = LieElement::zero(x.trunc);
    for (w, c) in &x.coeffs {
        out.add_term(w.clone(), &(c * pow(u, word_weight(w) as u32)));
    }
    Ok(out)
}

/// Exact rank of a set of series, with the indices of the vectors that
/// raised it.
fn rank_with_witnesses(vectors: &[TensorSeries]) -> (usize, Vec<usize>) {
    let mut pivots: BTreeMap<Word, TensorSeries> = BTreeMap::new();
    let mut independent = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        loop {
            let Some((w, c)) = r.coeffs.iter().next().map(|(w, c)| (w.clone(), c.clone())) else {
                break;
            };
            match pivots.get(&w) {
                Some(p) => r = r.sub(&p.scale(&c)).expect("same truncation"),
                None => {
                    pivots.insert(w, r.scale(&(Scalar::one() / c)));
                    independent.push(idx);
                    break;
                }
            }
        }
    }
    (independent.len(), independent)
}

/// Dimensions of the weight-`k` components for `k = 1..=D`, computed by
/// counting Lyndon words and, independently, as the rank of all brackets
/// built from lower weights together with `e_k`.
pub fn graded_dimensions(max_degree: usize) -> Result<Vec<usize>> {
    if max_degree > MAX_TRUNCATION {
        return Err(Error::domain(format!("degree {max_degree} exceeds {MAX_TRUNCATION}")));
    }
    let lyndon: Vec<usize> = (1..=max_degree).map(|k| lyndon_words(k).len()).collect();

    let mut bases: Vec<Vec<TensorSeries>> = vec![Vec::new()];
    let mut brute = Vec::new();
    for k in 1..=max_degree {
        let mut candidates = vec![TensorSeries::letter(k as u8, max_degree)];
        for i in 1..k {
            for x in &bases[i] {
                for y in &bases[k - i] {
                    candidates.push(x.commutator(y)?);
                }
            }
        }
        let (rank, keep) = rank_with_witnesses(&candidates);
        brute.push(rank);
        bases.push(keep.into_iter().map(|i| candidates[i].clone()).collect());
    }
    if lyndon != brute {
        return Err(Error::Internal(format!(
            "Lyndon count {lyndon:?} disagrees with bracket-span rank {brute:?}"
        )));
    }
    Ok(lyndon)
}

/// `(P, u)` with `P` a truncated group-like series (constant term 1) and
/// `u ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    unipotent: TensorSeries,
    scale: Scalar,
}

impl GroupElement {
    pub fn new(unipotent: TensorSeries, scale: Scalar) -> Result<Self> {
        if !unipotent.constant().is_one() {
            return Err(Error::domain("the unipotent part must have constant term 1"));
        }
        if scale.is_zero() {
            return Err(Error::domain("the scale must be nonzero"));
        }
        Ok(GroupElement { unipotent, scale })
    }

    pub fn from_lie(x: &LieElement, scale: Scalar) -> Result<Self> {
        Self::new(exp_truncated(x)?.unipotent, scale)
    }

    pub fn unipotent(&self) -> &TensorSeries {
        &self.unipotent
    }

    pub fn scale(&self) -> &Scalar {
        &self.scale
    }

    pub fn trunc(&self) -> usize {
        self.unipotent.trunc
    }

    pub fn lie_part(&self) -> Result<LieElement> {
        log_truncated(self)
    }
}

pub fn exp_truncated(x: &LieElement) -> Result<GroupElement> {
    let series = TensorSeries::power_series(&x.to_tensor(), |k| {
        Scalar::new(BigInt::one(), crate::rational::factorial(k as u32))
    })?;
    Ok(GroupElement {
        unipotent: series,
        scale: int(1),
    })
}

/// Logarithm of the unipotent part.
pub fn log_truncated(g: &GroupElement) -> Result<LieElement> {
    let z = g.unipotent.sub(&TensorSeries::one(g.trunc()))?;
    let series = TensorSeries::power_series(&z, |k| {
        if k == 0 {
            Scalar::zero()
        } else {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            ratio(sign, k as i64)
        }
    })?;
    LieElement::from_tensor(&series)
}

/// `log(exp X · exp Y)` through the truncation degree.
pub fn bch(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    x.check(y)?;
    let product = exp_truncated(x)?.unipotent.mul(&exp_truncated(y)?.unipotent)?;
    log_truncated(&GroupElement::new(product, int(1))?)
}

/// `(P_1, u_1)·(P_2, u_2) = (P_1 · u_1^Y(P_2), u_1 u_2)`; on Lie parts this
/// is `(bch(X_1, u_1^Y X_2), u_1 u_2)`.
pub fn semidirect_mul(g1: &GroupElement, g2: &GroupElement) -> Result<GroupElement> {
    let p = g1.unipotent.mul(&g2.unipotent.grade_scale(&g1.scale))?;
    GroupElement::new(p, &g1.scale * &g2.scale)
}

pub fn semidirect_identity(trunc: usize) -> GroupElement {
    GroupElement {
        unipotent: TensorSeries::one(trunc),
        scale: int(1),
    }
}

/// `(P, u)^{-1} = (u^{-Y}(P^{-1}), u^{-1})`.
pub fn semidirect_inverse(g: &GroupElement) -> Result<GroupElement> {
    let z = g.unipotent.sub(&TensorSeries::one(g.trunc()))?;
    let inv = TensorSeries::power_series(&z, |k| int(if k % 2 == 0 { 1 } else { -1 }))?;
    let u_inv = Scalar::one() / &g.scale;
    GroupElement::new(inv.grade_scale(&u_inv), u_inv)
}

/// Settings for [`verify_claims`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimConfig {
    pub level: usize,
    pub lambdas: Vec<Scalar>,
    pub truncation: usize,
    pub trials: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        ClaimConfig {
            level: 3,
            lambdas: vec![int(2), ratio(1, 2), int(3)],
            truncation: 4,
            trials: 100,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

fn random_rational<R: Rng>(rng: &mut R) -> Scalar {
    ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

fn random_nonzero<R: Rng>(rng: &mut R) -> Scalar {
    loop {
        let q = random_rational(rng);
        if !q.is_zero() {
            return q;
        }
    }
}

/// A random Lie element with small rational coefficients on every Lyndon
/// word of weight `≤ trunc`.
pub fn random_lie_element<R: Rng>(rng: &mut R, trunc: usize) -> Result<LieElement> {
    let terms: Vec<(Word, Scalar)> = (1..=trunc)
        .flat_map(lyndon_words)
        .map(|w| (w, random_rational(rng)))
        .collect();
    LieElement::from_terms(trunc, terms)
}

pub fn random_group_element<R: Rng>(rng: &mut R, trunc: usize) -> Result<GroupElement> {
    GroupElement::from_lie(&random_lie_element(rng, trunc)?, random_nonzero(rng))
}

/// A random point at `level` (`d = 1`, `|α| ≤ 2`) for the claim checks.
pub fn random_point<R: Rng>(rng: &mut R, theory: &std::sync::Arc<TheoryConfig>, level: usize, terms: usize) -> Result<DeformationPoint> {
    let points = level + 1;
    let subsets = enumerate_subsets(IndexSet::new(points)?, 2);
    let mut entries = Vec::new();
    for _ in 0..terms {
        let label: Vec<u32> = (0..points).map(|_| rng.gen_range(0..=theory.p)).collect();
        let subset = subsets[rng.gen_range(0..subsets.len())];
        let mut alpha = vec![0u32; level * theory.d];
        for _ in 0..rng.gen_range(0..=2) {
            let slot = rng.gen_range(0..alpha.len());
            alpha[slot] += 1;
        }
        entries.push((CoordinateKey::new(label, subset, MultiIndex::new(alpha)), random_rational(rng)));
    }
    DeformationPoint::from_entries(theory.clone(), entries)
}

fn lambda_list(lambdas: &[Scalar]) -> String {
    let s: Vec<String> = lambdas.iter().map(|l| l.to_string()).collect();
    format!("{{{}}}", s.join(", "))
}

/// Checks each claim about the scaling action, the grading and the
/// semidirect product on the given samples. Findings are reported, never
/// raised; the verdicts and witnesses depend only on the level, the `λ`
/// samples and the truncation, not on the seed.
pub fn verify_claims(config: &ClaimConfig) -> Result<ClaimReport> {
    let level = config.level;
    let trunc = config.truncation;
    if level == 0 || level > 6 {
        return Err(Error::domain(format!("claim level {level} is outside 1..=6")));
    }
    if trunc == 0 || trunc > 5 {
        return Err(Error::domain(format!("claim truncation {trunc} is outside 1..=5")));
    }
    if config.lambdas.is_empty() {
        return Err(Error::domain("at least one λ sample is required"));
    }
    let points = level + 1;
    let n_sets = format!("level {level} ({} subsets of {points} points)", 1usize << points);
    let lambdas = lambda_list(&config.lambdas);
    let mut claims = Vec::new();

    // (a) triangularity
    let mut witness = None;
    'outer: for lambda in &config.lambdas {
        for class in JClass::ALL {
            if let Some((i, k)) = scaling_operator(level, class, lambda)?.triangularity_violation() {
                witness = Some(format!("λ = {lambda}, {class}: M[{i},{k}] ≠ 0 with {k} ⊄ {i}"));
                break 'outer;
            }
        }
    }
    claims.push(Claim::new(
        "scaling-triangularity",
        "the scaling matrix vanishes at (I,K) unless K ⊆ I",
        format!("{n_sets}, all three J classes, λ ∈ {lambdas}"),
        witness,
    ));

    // (b) unit diagonal
    let mut witness = None;
    'diag: for lambda in &config.lambdas {
        let op = scaling_operator(level, JClass::Greater, lambda)?;
        for (i, row) in op.matrix.iter().enumerate() {
            if !row[i].is_one() {
                let s = SubsetMask::from_bits(points, i as u64)?;
                witness = Some(format!("λ = {lambda}: M[{s},{s}] = {}", row[i]));
                break 'diag;
            }
        }
    }
    claims.push(Claim::new(
        "scaling-unit-diagonal",
        "the j1>j2 scaling matrix has unit diagonal, so the action is unipotent",
        format!("{n_sets}, λ ∈ {lambdas}"),
        witness,
    ));

    // (c) identity at λ = 1
    let s1 = scaling_operator(level, JClass::Greater, &int(1))?;
    let witness = if s1.matrix == identity_matrix(1 << points) {
        None
    } else if s1.matrix == zeta_matrix(points)? {
        Some("S_1 equals the zeta transform, not the identity".to_string())
    } else {
        Some("S_1 differs from the identity".to_string())
    };
    claims.push(Claim::new(
        "scaling-identity-at-one",
        "the j1>j2 scaling operator at λ = 1 is the identity",
        format!("{n_sets}, λ = 1"),
        witness,
    ));

    // (d) one-parameter law
    let mut witness = None;
    'law: for l in &config.lambdas {
        for m in &config.lambdas {
            let lhs = matmul(
                &scaling_operator(level, JClass::Greater, l)?.matrix,
                &scaling_operator(level, JClass::Greater, m)?.matrix,
            )?;
            let rhs = scaling_operator(level, JClass::Greater, &(l * m))?.matrix;
            for (i, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
                if let Some(k) = (0..a.len()).find(|&k| a[k] != b[k]) {
                    let (si, sk) = (
                        SubsetMask::from_bits(points, i as u64)?,
                        SubsetMask::from_bits(points, k as u64)?,
                    );
                    witness = Some(format!(
                        "λ = {l}, μ = {m}: (S_λ S_μ)[{si},{sk}] = {} but S_λμ[{si},{sk}] = {}",
                        a[k], b[k]
                    ));
                    break 'law;
                }
            }
        }
    }
    claims.push(Claim::new(
        "scaling-one-parameter-law",
        "S_λ S_μ = S_λμ for the j1>j2 scaling operators",
        format!("{n_sets}, all ordered pairs from λ ∈ {lambdas}"),
        witness,
    ));

    // zero and zeta classes
    let mut witness = None;
    for lambda in &config.lambdas {
        let lt = scaling_operator(level, JClass::Less, lambda)?;
        if lt.matrix.iter().flatten().any(|v| !v.is_zero()) {
            witness = Some(format!("λ = {lambda}: j1<j2 matrix is nonzero"));
            break;
        }
        let eq = scaling_operator(level, JClass::Equal, lambda)?;
        if eq.matrix != zeta_matrix(points)? {
            witness = Some(format!("λ = {lambda}: j1=j2 matrix is not the zeta matrix"));
            break;
        }
    }
    if witness.is_none() && matmul(&zeta_matrix(points)?, &moebius_matrix(points)?)? != identity_matrix(1 << points) {
        witness = Some("zeta · Möbius ≠ identity".into());
    }
    claims.push(Claim::new(
        "scaling-class-structure",
        "the j1<j2 matrix is zero and the j1=j2 matrix is the invertible zeta matrix",
        format!("{n_sets}, λ ∈ {lambdas}"),
        witness,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_max = level.max(2);
    let theory = std::sync::Arc::new(
        TheoryConfig::new(1, 4, n_max)?.with_default_sd(crate::deformation::sd(2))?,
    );
    let trials = config.trials.max(1);

    // generator vs finite difference
    let h = ratio(1, 1_000_000);
    let mut witness = None;
    for t in 0..trials.min(20) {
        let p = random_point(&mut rng, &theory, level, 6)?;
        let gen = generator_vector_field(&p)?;
        let at = |l: &Scalar| apply_scaling(&scaling_operator(level, JClass::Greater, l).expect("valid level"), &p);
        let fd = at(&(int(1) + &h))?.add(&at(&int(1))?.negate())?.scale(&(Scalar::one() / &h));
        let diff = fd.add(&gen.negate())?;
        let max_abs = |q: &DeformationPoint| q.entries().map(|(_, v)| to_f64(v).abs()).fold(0.0, f64::max);
        let (err, scale) = (max_abs(&diff), max_abs(&gen).max(f64::MIN_POSITIVE));
        if err > 1e-4 * scale {
            witness = Some(format!("trial {t}: relative deviation {:.3e}", err / scale));
            break;
        }
    }
    claims.push(Claim::new(
        "generator-derivative",
        "the generator equals the λ-derivative of the j1>j2 action at λ = 1",
        format!("{} random points at level {level}, h = 1e-6, tolerance 1e-4 relative", trials.min(20)),
        witness,
    ));

    // θ composition and grading
    let mut theta_witness = None;
    let mut y_witness = None;
    for _ in 0..trials {
        let lvl = 1 + rng.gen_range(0..n_max);
        let p = random_point(&mut rng, &theory, lvl, 4)?;
        let (q1, q2) = (random_nonzero(&mut rng), random_nonzero(&mut rng));
        if theta_witness.is_none()
            && (theta(&q1, &theta(&q2, &p)?)? != theta(&(&q1 * &q2), &p)? || theta(&int(1), &p)? != p)
        {
            theta_witness = Some(format!("q = {q1}, {q2}"));
        }
        if y_witness.is_none() && grading_y(&theta(&q1, &p)?) != theta(&q1, &grading_y(&p))? {
            y_witness = Some(format!("Y and θ_q fail to commute at q = {q1}"));
        }
    }
    claims.push(Claim::new(
        "theta-composition",
        "θ_z ∘ θ_w = θ_{z+w} and θ_0 = id",
        format!("{trials} random points and parameter pairs, exact (q = e^z rational)"),
        theta_witness,
    ));
    let h = 1e-5;
    for n in 1..=n_max {
        let fd = (theta_f64(h, n, 1.0) - theta_f64(-h, n, 1.0)) / (2.0 * h);
        if y_witness.is_none() && ((fd - n as f64) / n as f64).abs() > 1e-6 {
            y_witness = Some(format!("level {n}: finite difference {fd} vs {n}"));
        }
    }
    claims.push(Claim::new(
        "grading-derivative",
        "Y = d/dz θ_z at z = 0 multiplies level n by n",
        format!("levels 1..={n_max}, central difference h = 1e-5, tolerance 1e-6 relative; Y∘θ = θ∘Y exact on {trials} points"),
        y_witness,
    ));

    // u^Y action, exp/log, semidirect axioms
    struct Sample {
        x: LieElement,
        u: Scalar,
        v: Scalar,
        g: [GroupElement; 3],
    }
    let samples: Vec<Sample> = (0..trials)
        .map(|_| {
            Ok(Sample {
                x: random_lie_element(&mut rng, trunc)?,
                u: random_nonzero(&mut rng),
                v: random_nonzero(&mut rng),
                g: [
                    random_group_element(&mut rng, trunc)?,
                    random_group_element(&mut rng, trunc)?,
                    random_group_element(&mut rng, trunc)?,
                ],
            })
        })
        .collect::<Result<_>>()?;

    type Check = fn(&Sample) -> Result<bool>;
    let checks: [(&str, &str, Check); 6] = [
        ("uy-action", "(uv)^Y = u^Y ∘ v^Y and 1^Y = id", |s| {
            Ok(uy_act(&(&s.u * &s.v), &s.x)? == uy_act(&s.u, &uy_act(&s.v, &s.x)?)? && uy_act(&int(1), &s.x)? == s.x)
        }),
        ("exp-log-inverse", "log(exp X) = X", |s| Ok(log_truncated(&exp_truncated(&s.x)?)? == s.x)),
        ("semidirect-associativity", "(g1 g2) g3 = g1 (g2 g3)", |s| {
            let [a, b, c] = &s.g;
            Ok(semidirect_mul(&semidirect_mul(a, b)?, c)? == semidirect_mul(a, &semidirect_mul(b, c)?)?)
        }),
        ("semidirect-identity", "g · 1 = 1 · g = g", |s| {
            let e = semidirect_identity(s.g[0].trunc());
            Ok(semidirect_mul(&s.g[0], &e)? == s.g[0] && semidirect_mul(&e, &s.g[0])? == s.g[0])
        }),
        ("semidirect-inverse", "g · g⁻¹ = g⁻¹ · g = 1", |s| {
            let e = semidirect_identity(s.g[0].trunc());
            let inv = semidirect_inverse(&s.g[0])?;
            Ok(semidirect_mul(&s.g[0], &inv)? == e && semidirect_mul(&inv, &s.g[0])? == e)
        }),
        ("semidirect-bch-form", "(X1,u1)(X2,u2) = (bch(X1, u1^Y X2), u1 u2)", |s| {
            let [a, b, _] = &s.g;
            let prod = semidirect_mul(a, b)?;
            let expected = bch(&a.lie_part()?, &uy_act(a.scale(), &b.lie_part()?)?)?;
            Ok(prod.lie_part()? == expected && prod.scale() == &(a.scale() * b.scale()))
        }),
    ];
    for (id, statement, check) in checks {
        let outcomes = config.exec.map(&samples, check);
        let mut witness = None;
        for (t, r) in outcomes.into_iter().enumerate() {
            if !r? {
                witness = Some(format!("trial {t}"));
                break;
            }
        }
        claims.push(Claim::new(
            id,
            statement,
            format!("{trials} random samples, truncation {trunc}, exact rationals"),
            witness,
        ));
    }

    let witness = match graded_dimensions(trunc) {
        Ok(_) => None,
        Err(e) => Some(e.to_string()),
    };
    claims.push(Claim::new(
        "graded-dimensions",
        "Lyndon-word counts equal the ranks of the bracket spans",
        format!("degrees 1..={trunc}"),
        witness,
    ));

    Ok(ClaimReport {
        suite: "group-claims".into(),
        claims,
    })
}
