//! Wick calculus for a free Euclidean scalar field.
//!
//! Time-ordered products of normal-ordered monomials `:φ^{k_i}(x_i):` are
//! expanded as `Σ_J t_J(x) · :φ^{i_1}⋯φ^{i_n}: / (i_1!⋯i_n!)`, where
//! `t_J` is the vacuum expectation of the residual powers `k − J`. In the
//! Gaussian model that expectation is a sum over contraction multigraphs
//! without self-loops, each weighted by `Π G(x_i − x_j)^{m_ij}` and by the
//! number of leg-level matchings that produce it.
//!
//! Time ordering is the symmetric Wick product; there is no step-function
//! ordering in Euclidean signature.

use std::collections::BTreeMap;

use num::bigint::{BigInt, BigUint};
use num::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{double_factorial_odd, for_each_matching, legs_for_powers, SubsetMask};
use crate::distributions::{propagator, Kernel, PropagatorProduct, PropagatorValues};
use crate::exec::Exec;
use crate::rational::{factorial, from_f64, int, pow, ratio, to_f64, Scalar};
use crate::report::{Claim, ClaimReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WickMonomial {
    pub point: usize,
    pub power: u32,
}

/// A multigraph on `1..=vertices` without self-loops; `matchings` counts
/// the leg-level pairings that induce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionGraph {
    pub vertices: usize,
    pub edges: BTreeMap<(usize, usize), u32>,
    pub matchings: BigUint,
}

impl ContractionGraph {
    pub fn degree(&self, v: usize) -> u32 {
        self.edges
            .iter()
            .filter(|((i, j), _)| *i == v || *j == v)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Every contraction multigraph with degree sequence `residual`.
///
/// The matching count of a multigraph is `Π r_i! / Π_{i<j} m_ij!`: each
/// vertex splits its labelled legs among its edge bundles
/// (`r_i! / Π_j m_ij!` ways) and each bundle of `m_ij` legs is then matched
/// across in `m_ij!` ways.
pub fn contraction_graphs(residual: &[u32]) -> Vec<ContractionGraph> {
    let n = residual.len();
    let total: u32 = residual.iter().sum();
    let mut out = Vec::new();
    if total % 2 == 1 {
        return out;
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    // last pair index touching each vertex, for early pruning
    let mut last = vec![None; n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        last[i] = Some(k);
        last[j] = Some(k);
    }

    fn rec(
        k: usize,
        pairs: &[(usize, usize)],
        last: &[Option<usize>],
        remaining: &mut Vec<u32>,
        mult: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if k == pairs.len() {
            if remaining.iter().all(|&r| r == 0) {
                out.push(mult.clone());
            }
            return;
        }
        let (i, j) = pairs[k];
        let cap = remaining[i].min(remaining[j]);
        for m in 0..=cap {
            remaining[i] -= m;
            remaining[j] -= m;
            let closed_ok = [i, j]
                .iter()
                .all(|&v| last[v] != Some(k) || remaining[v] == 0);
            if closed_ok {
                mult[k] = m;
                rec(k + 1, pairs, last, remaining, mult, out);
            }
            remaining[i] += m;
            remaining[j] += m;
        }
        mult[k] = 0;
    }

    if n == 0 {
        return out;
    }
    if pairs.is_empty() {
        if residual[0] == 0 {
            out.push(ContractionGraph {
                vertices: n,
                edges: BTreeMap::new(),
                matchings: BigUint::one(),
            });
        }
        return out;
    }
    let mut raw = Vec::new();
    rec(0, &pairs, &last, &mut residual.to_vec(), &mut vec![0; pairs.len()], &mut raw);

    let numerator: BigUint = residual
        .iter()
        .map(|&r| factorial(r).to_biguint().expect("factorials are positive"))
        .product();
    for mult in raw {
        let mut edges = BTreeMap::new();
        let mut denominator = BigUint::one();
        for (&(i, j), &m) in pairs.iter().zip(&mult) {
            if m > 0 {
                edges.insert((i + 1, j + 1), m);
                denominator *= factorial(m).to_biguint().expect("factorials are positive");
            }
        }
        out.push(ContractionGraph {
            vertices: n,
            edges,
            matchings: &numerator / denominator,
        });
    }
    out
}

/// `t_J` for residual powers `r = k − J` as an exact combination of
/// propagator products on `R^{(n−1)d}`.
pub fn t_j_kernel(residual: &[u32], d: usize) -> Result<Kernel> {
    let n = residual.len();
    if n == 0 {
        return Err(Error::domain("at least one point is required"));
    }
    let ambient = (n - 1) * d;
    let mut terms = Vec::new();
    for g in contraction_graphs(residual) {
        let product = PropagatorProduct::new(n, d, g.edges)?;
        terms.push((
            Scalar::from_integer(BigInt::from(g.matchings)),
            Kernel::PropagatorProduct(product),
        ));
    }
    Kernel::combination(ambient, terms)
}

/// Brute-force vacuum moment: the sum over every perfect matching of the
/// labelled legs of `Π g_ij`, where any matching that pairs two legs on
/// the same point contributes zero.
pub fn vacuum_moment_oracle(residual: &[u32], g: &PropagatorValues) -> Result<Scalar> {
    let legs = legs_for_powers(residual);
    if legs.len() % 2 == 1 {
        return Ok(Scalar::zero());
    }
    let mut acc = Scalar::zero();
    let mut err = None;
    let mut used = vec![false; legs.len()];
    for_each_matching(&mut used, &mut Vec::new(), &mut |m| {
        let mut term = Scalar::one();
        for &(a, b) in m {
            let (pa, pb) = (legs[a].point, legs[b].point);
            if pa == pb {
                return;
            }
            match g.get(pa, pb) {
                Ok(v) => term *= v,
                Err(e) => {
                    err.get_or_insert(e);
                    return;
                }
            }
        }
        acc += term;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WickExpansionTerm {
    /// `J = (i_1,…,i_n)`, the powers left in the normal-ordered product.
    pub label: Vec<u32>,
    /// `1 / (i_1!⋯i_n!)`.
    pub coefficient: Scalar,
    pub kernel: Kernel,
    pub residual_monomial: Vec<WickMonomial>,
}

/// All `J` (lexicographic, `0 ≤ i_j ≤ k_j`) whose residual `k − J` admits at
/// least one contraction graph.
pub fn wick_expand(powers: &[u32], d: usize) -> Result<Vec<WickExpansionTerm>> {
    if powers.is_empty() {
        return Err(Error::domain("at least one point is required"));
    }
    let mut out = Vec::new();
    let mut label = vec![0u32; powers.len()];
    loop {
        let residual: Vec<u32> = powers.iter().zip(&label).map(|(k, i)| k - i).collect();
        if residual.iter().sum::<u32>() % 2 == 0 {
            let kernel = t_j_kernel(&residual, d)?;
            if !kernel.is_zero() {
                let denom: BigInt = label.iter().map(|&i| factorial(i)).product();
                out.push(WickExpansionTerm {
                    label: label.clone(),
                    coefficient: Scalar::new(BigInt::one(), denom),
                    kernel,
                    residual_monomial: label
                        .iter()
                        .enumerate()
                        .map(|(p, &i)| WickMonomial { point: p + 1, power: i })
                        .collect(),
                });
            }
        }
        // odometer, last index fastest
        let mut k = label.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if label[k] < powers[k] {
                label[k] += 1;
                break;
            }
            label[k] = 0;
        }
    }
}

/// `E[φ^p]` for a unit Gaussian: `(p−1)!!` for even `p`, zero otherwise.
pub fn gaussian_moment(p: u32) -> BigUint {
    double_factorial_odd(p)
}

/// A Dyson-series coefficient `i^n · magnitude`, with the power of `i` kept
/// formally (mod 4) so the arithmetic stays exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DysonTerm {
    pub i_power: u8,
    pub magnitude: Scalar,
}

impl DysonTerm {
    /// `(real, imaginary)` parts.
    pub fn parts(&self) -> (Scalar, Scalar) {
        let m = self.magnitude.clone();
        match self.i_power % 4 {
            0 => (m, Scalar::zero()),
            1 => (Scalar::zero(), m),
            2 => (-m, Scalar::zero()),
            _ => (Scalar::zero(), -m),
        }
    }
}

/// Order-`n` term of the S-matrix for `L_I = g φ^p` on a single point with
/// unit propagator: `i^n g^n / n! · E[φ^{np}]`.
pub fn dyson_term(order: u32, power: u32, coupling: &Scalar) -> DysonTerm {
    let moment = Scalar::from_integer(BigInt::from(gaussian_moment(order * power)));
    let magnitude = pow(coupling, order) * moment / Scalar::from_integer(factorial(order));
    DysonTerm {
        i_power: (order % 4) as u8,
        magnitude,
    }
}

/// `n` pairwise distinct points in `R^d` with exact coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    d: usize,
    points: Vec<Vec<Scalar>>,
}

impl PointConfiguration {
    pub fn new(d: usize, points: Vec<Vec<Scalar>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("spacetime dimension must be positive"));
        }
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::domain(format!("point with {} coordinates in R^{d}", p.len())));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::Precondition(format!(
                        "points {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(PointConfiguration { d, points })
    }

    pub fn from_f64(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        let pts = points
            .iter()
            .map(|p| p.iter().map(|&c| from_f64(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, pts)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Scalar>] {
        &self.points
    }

    pub fn translated(&self, a: &[Scalar]) -> Result<Self> {
        if a.len() != self.d {
            return Err(Error::domain("translation vector has the wrong dimension"));
        }
        let pts = self
            .points
            .iter()
            .map(|p| p.iter().zip(a).map(|(x, s)| x + s).collect())
            .collect();
        Self::new(self.d, pts)
    }

    /// The configuration seen after relabelling point `i` as `σ(i)`.
    pub fn permuted(&self, sigma: &Permutation) -> Result<Self> {
        Self::new(self.d, sigma.apply(&self.points)?)
    }

    /// Exact squared distance between points `i` and `j` (1-based).
    pub fn squared_distance(&self, i: usize, j: usize) -> Scalar {
        self.points[i - 1]
            .iter()
            .zip(&self.points[j - 1])
            .map(|(a, b)| (a - b) * (a - b))
            .fold(Scalar::zero(), |acc, v| acc + v)
    }

    /// `g_ij = G(x_i − x_j)`, evaluated in floating point from the exact
    /// squared distance and then taken as an exact rational, so equal
    /// distances always give identical values.
    pub fn propagator_values(&self) -> Result<PropagatorValues> {
        let mut g = PropagatorValues::new();
        for i in 1..=self.len() {
            for j in i + 1..=self.len() {
                let r2 = to_f64(&self.squared_distance(i, j));
                g.set(i, j, from_f64(propagator(r2, self.d))?);
            }
        }
        Ok(g)
    }
}

/// A permutation of `{1,…,n}` stored 0-based: `images[i] = σ(i+1) − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::domain(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `out[σ(i)] = items[i]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Result<Vec<T>> {
        if items.len() != self.images.len() {
            return Err(Error::domain("permutation size does not match"));
        }
        let mut out = items.to_vec();
        for (i, item) in items.iter().enumerate() {
            out[self.images[i]] = item.clone();
        }
        Ok(out)
    }
}

fn expansion_values(powers: &[u32], config: &PointConfiguration) -> Result<BTreeMap<Vec<u32>, (Scalar, Scalar)>> {
    if powers.len() != config.len() {
        return Err(Error::domain(format!(
            "{} powers for {} points",
            powers.len(),
            config.len()
        )));
    }
    let g = config.propagator_values()?;
    wick_expand(powers, config.dim())?
        .into_iter()
        .map(|t| Ok((t.label, (t.coefficient, t.kernel.evaluate_exact(&g)?))))
        .collect()
}

/// Every `t_J` at `config` equals `t_{σJ}` at the relabelled configuration
/// with relabelled powers.
pub fn check_symmetry(powers: &[u32], sigma: &Permutation, config: &PointConfiguration) -> Result<bool> {
    let original = expansion_values(powers, config)?;
    let permuted_powers = sigma.apply(powers)?;
    let permuted = expansion_values(&permuted_powers, &config.permuted(sigma)?)?;
    if original.len() != permuted.len() {
        return Ok(false);
    }
    for (label, value) in &original {
        let relabelled = sigma.apply(label)?;
        if permuted.get(&relabelled) != Some(value) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every `t_J` is unchanged when all points move by `a`.
pub fn check_translation_invariance(powers: &[u32], a: &[Scalar], config: &PointConfiguration) -> Result<bool> {
    let before = expansion_values(powers, config)?;
    let after = expansion_values(powers, &config.translated(a)?)?;
    Ok(before == after)
}

/// Sum over bipartite contraction matrices with row sums `rows` and column
/// sums `cols` of `Π r_a! Π c_b! / Π M_ab! · Π w(a, b)^{M_ab}`.
fn cross_contractions(rows: &[u32], cols: &[u32], weight: &dyn Fn(usize, usize) -> Scalar) -> Scalar {
    if rows.iter().sum::<u32>() != cols.iter().sum::<u32>() {
        return Scalar::zero();
    }
    let prefactor: BigInt = rows.iter().chain(cols).map(|&k| factorial(k)).product();
    let cells: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|a| (0..cols.len()).map(move |b| (a, b)))
        .collect();

    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        row_left: &mut Vec<u32>,
        col_left: &mut Vec<u32>,
        term: Scalar,
        weight: &dyn Fn(usize, usize) -> Scalar,
        acc: &mut Scalar,
    ) {
        if k == cells.len() {
            if row_left.iter().all(|&r| r == 0) && col_left.iter().all(|&c| c == 0) {
                *acc += term;
            }
            return;
        }
        let (a, b) = cells[k];
        let cap = row_left[a].min(col_left[b]);
        let w = weight(a, b);
        let mut t = term;
        for m in 0..=cap {
            if m > 0 {
                t = t * &w / Scalar::from_integer(BigInt::from(m));
            }
            row_left[a] -= m;
            col_left[b] -= m;
            rec(k + 1, cells, row_left, col_left, t.clone(), weight, acc);
            row_left[a] += m;
            col_left[b] += m;
        }
    }

    let mut acc = Scalar::zero();
    if cells.is_empty() {
        return Scalar::one();
    }
    rec(
        0,
        &cells,
        &mut rows.to_vec(),
        &mut cols.to_vec(),
        Scalar::one(),
        weight,
        &mut acc,
    );
    acc * Scalar::from_integer(prefactor)
}

fn restricted_values(g: &PropagatorValues, members: &[usize]) -> Result<PropagatorValues> {
    let mut out = PropagatorValues::new();
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate().skip(a + 1) {
            out.set(a + 1, b + 1, g.get(i, j)?.clone());
        }
    }
    Ok(out)
}

/// Compares the vacuum expectation of `T_N` with that of the operator
/// product `T_I · T_{N∖I}`, the latter computed by Wick-expanding each
/// factor and contracting only across the two groups.
///
/// As an operator, each factor is `Σ_J Π C(k_a, j_a) t_J :φ^J:`; the
/// binomials count which legs stay uncontracted, so relative to the
/// `1/J!` form of [`wick_expand`] every term picks up `Π k_a!/(k_a−j_a)!`.
pub fn check_causal_factorization(powers: &[u32], subset: &SubsetMask, config: &PointConfiguration) -> Result<bool> {
    let n = powers.len();
    if config.len() != n || subset.parent() != n {
        return Err(Error::domain("powers, subset and configuration disagree on the number of points"));
    }
    if subset.is_empty() || subset.len() == n {
        return Err(Error::Precondition(format!(
            "{subset} and its complement must both be nonempty"
        )));
    }
    let d = config.dim();
    let g = config.propagator_values()?;
    let full = t_j_kernel(powers, d)?.evaluate_exact(&g)?;

    let left = subset.members();
    let right = subset.complement().members();
    let group = |members: &[usize]| -> Result<Vec<(Vec<u32>, Scalar)>> {
        let local_powers: Vec<u32> = members.iter().map(|&i| powers[i - 1]).collect();
        let local_g = restricted_values(&g, members)?;
        wick_expand(&local_powers, d)?
            .into_iter()
            .map(|t| {
                // choosing which j of the k legs stay uncontracted
                let choices: BigInt = local_powers
                    .iter()
                    .zip(&t.label)
                    .map(|(&k, &j)| factorial(k) / factorial(k - j))
                    .product();
                let value = t.coefficient * Scalar::from_integer(choices) * t.kernel.evaluate_exact(&local_g)?;
                Ok((t.label, value))
            })
            .collect()
    };
    let left_terms = group(&left)?;
    let right_terms = group(&right)?;

    let mut factorized = Scalar::zero();
    for (jl, cl) in &left_terms {
        for (jr, cr) in &right_terms {
            if jl.iter().sum::<u32>() != jr.iter().sum::<u32>() {
                continue;
            }
            let weight = |a: usize, b: usize| g.get(left[a], right[b]).cloned().unwrap_or_else(|_| Scalar::zero());
            let cross = cross_contractions(jl, jr, &weight);
            factorized += cl * cr * cross;
        }
    }
    Ok(full == factorized)
}

/// Settings for [`verify_axioms`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomSuiteConfig {
    pub instances: usize,
    pub max_points: usize,
    pub max_power: u32,
    pub d: usize,
    /// Residual vectors up to this many legs are compared with the oracle.
    pub oracle_legs: u32,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for AxiomSuiteConfig {
    fn default() -> Self {
        AxiomSuiteConfig {
            instances: 200,
            max_points: 4,
            max_power: 4,
            d: 3,
            oracle_legs: 10,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

/// `n` distinct points with coordinates `a/b`, `|a| ≤ 6`, `1 ≤ b ≤ 3`.
pub fn random_configuration<R: Rng>(rng: &mut R, n: usize, d: usize) -> Result<PointConfiguration> {
    loop {
        let points: Vec<Vec<Scalar>> = (0..n)
            .map(|_| (0..d).map(|_| ratio(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect())
            .collect();
        match PointConfiguration::new(d, points) {
            Ok(c) => return Ok(c),
            Err(Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// One randomized instance for the three axiom checks.
#[derive(Debug, Clone)]
pub struct AxiomInstance {
    pub powers: Vec<u32>,
    pub config: PointConfiguration,
    pub sigma: Permutation,
    pub subset: SubsetMask,
    pub shift: Vec<Scalar>,
}

pub fn random_instance<R: Rng>(rng: &mut R, max_points: usize, max_power: u32, d: usize) -> Result<AxiomInstance> {
    if max_points < 2 {
        return Err(Error::domain("axiom instances need at least two points"));
    }
    let n = rng.gen_range(2..=max_points);
    let powers = (0..n).map(|_| rng.gen_range(0..=max_power)).collect();
    let config = random_configuration(rng, n, d)?;
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    let bits = rng.gen_range(1..(1u64 << n) - 1);
    Ok(AxiomInstance {
        powers,
        config,
        sigma: Permutation::new(images)?,
        subset: SubsetMask::from_bits(n, bits)?,
        shift: (0..d).map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4))).collect(),
    })
}

/// Every residual vector on `1..=max_points` points with at most `legs`
/// legs in total.
pub fn residual_vectors(max_points: usize, legs: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for r in 0..=left {
            cur.push(r);
            rec(len, left - r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for n in 1..=max_points {
        rec(n, legs, &mut Vec::new(), &mut out);
    }
    out
}

/// Random rational propagator values for every pair of `n` points.
pub fn random_propagator_values<R: Rng>(rng: &mut R, n: usize) -> PropagatorValues {
    let mut g = PropagatorValues::new();
    for i in 1..=n {
        for j in i + 1..=n {
            g.set(i, j, ratio(rng.gen_range(-7..=7), rng.gen_range(1..=5)));
        }
    }
    g
}

fn first_failure(outcomes: Vec<Result<bool>>) -> Result<Option<String>> {
    for (t, r) in outcomes.into_iter().enumerate() {
        if !r? {
            return Ok(Some(format!("instance {t}")));
        }
    }
    Ok(None)
}

/// Runs the permutation, factorization and translation checks on random
/// instances, and compares the kernels, moments and Dyson terms with
/// brute-force pairing counts.
pub fn verify_axioms(cfg: &AxiomSuiteConfig) -> Result<ClaimReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let instances: Vec<AxiomInstance> = (0..cfg.instances)
        .map(|_| random_instance(&mut rng, cfg.max_points, cfg.max_power, cfg.d))
        .collect::<Result<_>>()?;
    let samples = format!(
        "{} random instances, 2..={} points, powers ≤ {}, d = {}, exact",
        cfg.instances, cfg.max_points, cfg.max_power, cfg.d
    );
    let mut claims = Vec::new();

    let w = first_failure(cfg.exec.map(&instances, |x| check_symmetry(&x.powers, &x.sigma, &x.config)))?;
    claims.push(Claim::new(
        "wick-symmetry",
        "t_J is symmetric under relabelling the points",
        samples.clone(),
        w,
    ));
    let w = first_failure(cfg.exec.map(&instances, |x| check_causal_factorization(&x.powers, &x.subset, &x.config)))?;
    claims.push(Claim::new(
        "wick-causal-factorization",
        "⟨T_N⟩ equals the vacuum expectation of T_I · T_(N∖I)",
        samples.clone(),
        w,
    ));
    let w = first_failure(cfg.exec.map(&instances, |x| check_translation_invariance(&x.powers, &x.shift, &x.config)))?;
    claims.push(Claim::new(
        "wick-translation-invariance",
        "t_J is unchanged by a common translation",
        samples,
        w,
    ));

    let vectors = residual_vectors(cfg.max_points, cfg.oracle_legs);
    let tables: Vec<PropagatorValues> = vectors.iter().map(|r| random_propagator_values(&mut rng, r.len())).collect();
    let pairs: Vec<(&Vec<u32>, &PropagatorValues)> = vectors.iter().zip(&tables).collect();
    let outcomes = cfg.exec.map(&pairs, |(r, g)| -> Result<bool> {
        Ok(t_j_kernel(r, 1)?.evaluate_exact(g)? == vacuum_moment_oracle(r, g)?)
    });
    let w = first_failure(outcomes)?.map(|_| "a residual vector disagrees with the pairing oracle".to_string());
    claims.push(Claim::new(
        "wick-kernel-oracle",
        "t_J at rational propagator values equals the brute-force pairing sum",
        format!(
            "all {} residual vectors on ≤ {} points with ≤ {} legs, random rational g",
            vectors.len(),
            cfg.max_points,
            cfg.oracle_legs
        ),
        w,
    ));

    let mut w = None;
    for m in 0..=6u32 {
        let legs = legs_for_powers(&[2 * m]);
        let count = crate::combinatorics::enumerate_pairings(&legs).len();
        if gaussian_moment(2 * m) != BigUint::from(count) {
            w = Some(format!("2m = {}", 2 * m));
            break;
        }
    }
    claims.push(Claim::new(
        "gaussian-moments",
        "E[φ^{2m}] = (2m−1)!! = number of pairings",
        "m = 0..=6",
        w,
    ));

    let mut w = None;
    for (n, p) in [(1u32, 2u32), (2, 1), (2, 2), (3, 2), (1, 3)] {
        let legs = legs_for_powers(&vec![p; n as usize]);
        let count = crate::combinatorics::enumerate_pairings(&legs).len() as i64;
        let t = dyson_term(n, p, &int(1));
        let expected = int(count) / Scalar::from_integer(factorial(n));
        if t.magnitude != expected {
            w = Some(format!("(n, p) = ({n}, {p})"));
            break;
        }
    }
    claims.push(Claim::new(
        "dyson-pairings",
        "order-n Dyson terms equal g^n/n! times the number of all pairings",
        "(n, p) ∈ {(1,2), (2,1), (2,2), (3,2), (1,3)}, g = 1",
        w,
    ));

    Ok(ClaimReport {
        suite: "wick-axioms".into(),
        claims,
    })
}
