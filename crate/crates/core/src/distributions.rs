//! Numerical distributions on configuration space and counterterms on its
//! diagonals.
//!
//! Configurations of `n` points in `R^d` are reduced by translation
//! invariance to `x_1 = 0`, so kernels live on `R^m` with `m = (n−1)·d`;
//! ambient coordinate `(i−2)·d + c` is component `c` of point `i ≥ 2`.
//! The diagonal `Δ_I` is the locus `x_i = x_j` for all `i, j ∈ I`.
//!
//! Propagator normalization: `G(x) = |x|^{2−d}` for `d ≠ 2` and
//! `G(x) = −log|x|` for `d = 2`, with no constant prefactor.
//!
//! Sign convention for counterterms: `⟨∂^α δ, ω⟩ = (−1)^{|α|} ∂^α ω(0)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num::rational::Rational64;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_multi_indices, enumerate_subsets, IndexSet, MultiIndex, SubsetMask};
use crate::exec::{ordered_sum, Exec};
use crate::rational::{to_f64, Scalar};
use crate::{Error, Result};

/// Largest acceptable relative residual when fitting the difference of two
/// extensions by delta derivatives.
pub const AMBIGUITY_RESIDUAL_TOL: f64 = 1e-8;

/// Pairings below this magnitude make the log-regression meaningless.
pub const PAIRING_FLOOR: f64 = 1e-300;

/// Fewest λ samples accepted by [`scaling_degree_numeric`].
pub const MIN_LAMBDA_SAMPLES: usize = 8;

/// `G` as a function of the squared distance.
pub fn propagator(r2: f64, d: usize) -> f64 {
    match d {
        2 => -0.5 * r2.ln(),
        _ => r2.powf((2.0 - d as f64) / 2.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Midpoint nodes per axis on the domain box.
    pub resolution: usize,
    /// The domain box is `[−half_width, half_width]^m`.
    pub half_width: f64,
    /// Default mollifier width `ε` for deltas built from kernel specs.
    pub mollifier_width: f64,
    /// Nodes per transverse axis across a mollified delta.
    pub transverse_resolution: usize,
    /// Transverse boxes extend this many mollifier widths each way.
    pub transverse_span: f64,
    #[serde(default)]
    pub exec: Exec,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            resolution: 64,
            half_width: 8.0,
            mollifier_width: 1e-6,
            transverse_resolution: 32,
            transverse_span: 8.0,
            exec: Exec::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 || self.transverse_resolution == 0 {
            return Err(Error::domain("quadrature resolution must be positive"));
        }
        if !(self.half_width > 0.0 && self.mollifier_width > 0.0 && self.transverse_span > 0.0) {
            return Err(Error::domain("quadrature widths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorProduct {
    pub points: usize,
    pub d: usize,
    /// `(i, j) → m_ij` with `i < j`, 1-based, multiplicities ≥ 1.
    pub edges: BTreeMap<(usize, usize), u32>,
}

impl PropagatorProduct {
    pub fn new(points: usize, d: usize, edges: BTreeMap<(usize, usize), u32>) -> Result<Self> {
        IndexSet::new(points)?;
        if d == 0 {
            return Err(Error::domain("spacetime dimension must be positive"));
        }
        for (&(i, j), &m) in &edges {
            if !(1 <= i && i < j && j <= points) {
                return Err(Error::domain(format!("edge ({i},{j}) invalid for {points} points")));
            }
            if m == 0 {
                return Err(Error::domain(format!("edge ({i},{j}) has multiplicity 0")));
            }
        }
        Ok(PropagatorProduct { points, d, edges })
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.edges.values().sum()
    }

    fn edges_within(&self, s: &SubsetMask) -> u32 {
        self.edges
            .iter()
            .filter(|((i, j), _)| s.contains(*i) && s.contains(*j))
            .map(|(_, m)| m)
            .sum()
    }

    fn evaluate(&self, x: &[f64], scale: f64) -> f64 {
        let d = self.d;
        let point = |i: usize, c: usize| if i == 1 { 0.0 } else { x[(i - 2) * d + c] };
        let mut v = 1.0;
        for (&(i, j), &m) in &self.edges {
            let r2: f64 = (0..d)
                .map(|c| {
                    let diff = scale * (point(i, c) - point(j, c));
                    diff * diff
                })
                .sum();
            v *= propagator(r2, d).powi(m as i32);
        }
        v
    }

    fn check_integrable(&self) -> Result<()> {
        if self.d <= 2 {
            return Ok(());
        }
        let n = IndexSet::new(self.points)?;
        for s in enumerate_subsets(n, 2) {
            let e = self.edges_within(&s) as usize;
            if e * (self.d - 2) >= self.d * (s.len() - 1) {
                return Err(Error::Divergence(format!(
                    "{self} is not locally integrable at the diagonal of {s}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PropagatorProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|(&(i, j), &m)| {
                if m == 1 {
                    format!("G({i},{j})")
                } else {
                    format!("G({i},{j})^{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// A Gaussian-mollified `∂^α δ_I` on `R^{(n−1)d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifiedDelta {
    pub points: usize,
    pub d: usize,
    pub subset: SubsetMask,
    pub alpha: MultiIndex,
    pub width: f64,
}

impl MollifiedDelta {
    pub fn new(points: usize, d: usize, subset: SubsetMask, alpha: MultiIndex, width: f64) -> Result<Self> {
        if subset.parent() != points {
            return Err(Error::domain("subset parent does not match the number of points"));
        }
        if subset.len() < 2 {
            return Err(Error::domain(format!("diagonal {subset} needs at least two points")));
        }
        if alpha.len() != (points - 1) * d {
            return Err(Error::domain(format!(
                "derivative {alpha} has length {}, expected {}",
                alpha.len(),
                (points - 1) * d
            )));
        }
        if !(width > 0.0) {
            return Err(Error::domain("mollifier width must be positive"));
        }
        Ok(MollifiedDelta {
            points,
            d,
            subset,
            alpha,
            width,
        })
    }

    /// `∂^α δ` at the origin of `R^m`.
    pub fn at_origin(m: usize, alpha: MultiIndex, width: f64) -> Result<Self> {
        let s = SubsetMask::from_members(2, &[1, 2])?;
        Self::new(2, m, s, alpha, width)
    }

    pub fn codimension(&self) -> usize {
        self.d * (self.subset.len() - 1)
    }

    fn pair_scaled(&self, lambda: f64, omega: &TestFunction, spec: &QuadratureSpec) -> f64 {
        let d = self.d;
        let members = self.subset.members();
        let anchor = members[0];
        let transverse: Vec<usize> = members[1..].to_vec();
        // Point blocks (i ≥ 2) that stay free coordinates.
        let longitudinal: Vec<usize> = (2..=self.points).filter(|i| !transverse.contains(i)).collect();

        let w = self.width / lambda;
        let mut axes = Vec::new();
        let long_dims = longitudinal.len() * d;
        for b in 0..long_dims {
            axes.push(Axis::midpoint(spec.half_width, spec.resolution, stagger(b / d, longitudinal.len())));
        }
        for _ in 0..transverse.len() * d {
            axes.push(Axis::midpoint(spec.transverse_span * w, spec.transverse_resolution, 0.5));
        }

        let m = (self.points - 1) * d;
        let norm = (2.0 * std::f64::consts::PI * w * w).powf(-(d as f64) / 2.0);
        let integrand = |y: &[f64]| {
            let mut x = vec![0.0; m];
            for (k, &i) in longitudinal.iter().enumerate() {
                for c in 0..d {
                    x[(i - 2) * d + c] = y[k * d + c];
                }
            }
            let mut weight = 1.0;
            for (k, &i) in transverse.iter().enumerate() {
                let mut r2 = 0.0;
                for c in 0..d {
                    let t = y[long_dims + k * d + c];
                    r2 += t * t;
                    let base = if anchor == 1 { 0.0 } else { x[(anchor - 2) * d + c] };
                    x[(i - 2) * d + c] = base + t;
                }
                weight *= norm * (-r2 / (2.0 * w * w)).exp();
            }
            weight * omega.derivative(&self.alpha, &x)
        };
        let sign = if self.alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
        let scale = lambda.powi(-((self.alpha.order() as usize + self.codimension()) as i32));
        sign * scale * integrate(&axes, spec.exec, integrand)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    /// `|x|^{−exponent}` on `R^ambient ∖ {0}`.
    HomogeneousPower { exponent: Rational64, ambient: usize },
    PropagatorProduct(PropagatorProduct),
    MollifiedDelta(MollifiedDelta),
    LinearCombination { ambient: usize, terms: Vec<(Scalar, Kernel)> },
}

impl Kernel {
    pub fn homogeneous(exponent: Rational64, ambient: usize) -> Result<Self> {
        if ambient == 0 {
            return Err(Error::domain("ambient dimension must be positive"));
        }
        Ok(Kernel::HomogeneousPower { exponent, ambient })
    }

    pub fn zero(ambient: usize) -> Self {
        Kernel::LinearCombination { ambient, terms: Vec::new() }
    }

    pub fn combination(ambient: usize, terms: Vec<(Scalar, Kernel)>) -> Result<Self> {
        for (_, k) in &terms {
            if k.ambient_dim() != ambient {
                return Err(Error::domain(format!(
                    "kernel {k} lives on R^{}, combination on R^{ambient}",
                    k.ambient_dim()
                )));
            }
        }
        Ok(Kernel::LinearCombination { ambient, terms })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Kernel::HomogeneousPower { ambient, .. } => *ambient,
            Kernel::PropagatorProduct(p) => (p.points - 1) * p.d,
            Kernel::MollifiedDelta(m) => (m.points - 1) * m.d,
            Kernel::LinearCombination { ambient, .. } => *ambient,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Kernel::LinearCombination { terms, .. } if terms.iter().all(|(c, _)| c.is_zero()))
    }

    /// Exact value when every propagator is replaced by the supplied
    /// rational `g_ij`. Only propagator products and their combinations
    /// can be evaluated this way.
    pub fn evaluate_exact(&self, g: &PropagatorValues) -> Result<Scalar> {
        match self {
            Kernel::PropagatorProduct(p) => {
                let mut v = Scalar::one();
                for (&(i, j), &m) in &p.edges {
                    let gij = g.get(i, j)?;
                    for _ in 0..m {
                        v *= gij;
                    }
                }
                Ok(v)
            }
            Kernel::LinearCombination { terms, .. } => {
                let mut acc = Scalar::zero();
                for (c, k) in terms {
                    acc += c * k.evaluate_exact(g)?;
                }
                Ok(acc)
            }
            other => Err(Error::NotComputable(format!(
                "{other} is not a polynomial in propagators"
            ))),
        }
    }

    /// Pointwise value `t(λx)` off the singular support.
    pub fn evaluate(&self, x: &[f64], lambda: f64) -> Result<f64> {
        match self {
            Kernel::HomogeneousPower { exponent, .. } => {
                let r2: f64 = x.iter().map(|v| (lambda * v) * (lambda * v)).sum();
                Ok(r2.powf(-rational_to_f64(exponent) / 2.0))
            }
            Kernel::PropagatorProduct(p) => Ok(p.evaluate(x, lambda)),
            Kernel::LinearCombination { terms, .. } => {
                let mut vals = Vec::with_capacity(terms.len());
                for (c, k) in terms {
                    vals.push(to_f64(c) * k.evaluate(x, lambda)?);
                }
                Ok(ordered_sum(&vals))
            }
            Kernel::MollifiedDelta(_) => Err(Error::NotComputable(
                "mollified deltas are paired through their test-function derivatives".into(),
            )),
        }
    }

    fn check_integrable(&self, omega: &TestFunction) -> Result<()> {
        match self {
            Kernel::HomogeneousPower { exponent, ambient } => {
                let vanishing = Rational64::from_integer(omega.poly.order() as i64);
                if *exponent >= Rational64::from_integer(*ambient as i64) + vanishing {
                    return Err(Error::Divergence(format!(
                        "{self} against a test function vanishing to order {vanishing} at 0"
                    )));
                }
                Ok(())
            }
            Kernel::PropagatorProduct(p) => p.check_integrable(),
            Kernel::LinearCombination { terms, .. } => {
                terms.iter().try_for_each(|(_, k)| k.check_integrable(omega))
            }
            Kernel::MollifiedDelta(_) => Ok(()),
        }
    }

    fn points(&self) -> usize {
        match self {
            Kernel::PropagatorProduct(p) => p.points,
            Kernel::MollifiedDelta(m) => m.points,
            Kernel::HomogeneousPower { .. } => 2,
            Kernel::LinearCombination { terms, .. } => terms.iter().map(|(_, k)| k.points()).max().unwrap_or(2),
        }
    }

    /// Parses the kernel grammar used on the command line:
    ///
    /// ```text
    /// |x|^-K in R^M          homogeneous power, K rational
    /// delta in R^M           mollified delta at the origin
    /// d^(a1,...,aM) delta in R^M
    /// G^E in R^D             E-th power of the two-point propagator
    /// ```
    pub fn parse_spec(s: &str, mollifier_width: f64) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("kernel {s:?}: {why}"));
        let (head, space) = s
            .rsplit_once(" in ")
            .ok_or_else(|| bad("expected '<kernel> in R^<m>'"))?;
        let dim: usize = space
            .trim()
            .strip_prefix("R^")
            .ok_or_else(|| bad("space must be written R^<m>"))?
            .parse()
            .map_err(|_| bad("dimension is not an integer"))?;
        if dim == 0 {
            return Err(bad("dimension must be positive"));
        }
        let head = head.trim();
        if let Some(e) = head.strip_prefix("|x|^-") {
            let k = parse_rational64(e).ok_or_else(|| bad("exponent is not a rational number"))?;
            return Kernel::homogeneous(k, dim);
        }
        if head == "delta" {
            return Ok(Kernel::MollifiedDelta(MollifiedDelta::at_origin(
                dim,
                MultiIndex::zero(dim),
                mollifier_width,
            )?));
        }
        if let Some(rest) = head.strip_prefix("d^(") {
            let (inner, tail) = rest.split_once(')').ok_or_else(|| bad("unclosed derivative"))?;
            if tail.trim() != "delta" {
                return Err(bad("derivatives apply to 'delta' only"));
            }
            let alpha: Vec<u32> = inner
                .split(',')
                .map(|a| a.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("derivative orders must be nonnegative integers"))?;
            if alpha.len() != dim {
                return Err(bad("derivative length must equal the dimension"));
            }
            return Ok(Kernel::MollifiedDelta(MollifiedDelta::at_origin(
                dim,
                MultiIndex::new(alpha),
                mollifier_width,
            )?));
        }
        if let Some(e) = head.strip_prefix("G^") {
            let e: u32 = e.trim().parse().map_err(|_| bad("propagator power must be an integer"))?;
            let mut edges = BTreeMap::new();
            if e > 0 {
                edges.insert((1, 2), e);
            }
            return Ok(Kernel::PropagatorProduct(PropagatorProduct::new(2, dim, edges)?));
        }
        Err(bad("unknown kernel form"))
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::HomogeneousPower { exponent, ambient } => write!(f, "|x|^-{exponent} in R^{ambient}"),
            Kernel::PropagatorProduct(p) => write!(f, "{p}"),
            Kernel::MollifiedDelta(m) => {
                let full = m.points == 2;
                match (full, m.alpha.order() == 0) {
                    (true, true) => write!(f, "delta in R^{}", m.d),
                    (true, false) => write!(f, "d^{} delta in R^{}", m.alpha, m.d),
                    _ => write!(f, "d^{} delta_{} on R^{}", m.alpha, m.subset, (m.points - 1) * m.d),
                }
            }
            Kernel::LinearCombination { terms, .. } => {
                if terms.is_empty() {
                    return write!(f, "0");
                }
                let parts: Vec<String> = terms.iter().map(|(c, k)| format!("{c}·{k}")).collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kernel::parse_spec(s, QuadratureSpec::default().mollifier_width)
    }
}

fn parse_rational64(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n.trim().parse().ok()?, d));
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}

fn rational_to_f64(q: &Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Rational stand-ins `g_ij` for the propagators between points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropagatorValues {
    values: BTreeMap<(usize, usize), Scalar>,
}

impl PropagatorValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, i: usize, j: usize, g: Scalar) {
        self.values.insert((i.min(j), i.max(j)), g);
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&Scalar> {
        self.values
            .get(&(i.min(j), i.max(j)))
            .ok_or_else(|| Error::domain(format!("no propagator value for ({i},{j})")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Scalar)> {
        self.values.iter()
    }
}

/// `ω(x) = x^β · exp(−|x − c|² / (2σ²))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub width: f64,
    pub poly: MultiIndex,
}

impl TestFunction {
    pub fn new(center: Vec<f64>, width: f64, poly: MultiIndex) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::domain("test function width must be positive"));
        }
        if poly.len() != center.len() {
            return Err(Error::domain("monomial and center dimensions differ"));
        }
        Ok(TestFunction { center, width, poly })
    }

    /// Centered Gaussian `exp(−|x|²/(2σ²))`, which equals 1 at the origin.
    pub fn gaussian(m: usize, width: f64) -> Result<Self> {
        Self::new(vec![0.0; m], width, MultiIndex::zero(m))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.derivative(&MultiIndex::zero(self.dim()), x)
    }

    /// `∂^α ω(x)`, computed factor by factor from the separable form.
    pub fn derivative(&self, alpha: &MultiIndex, x: &[f64]) -> f64 {
        let s2 = self.width * self.width;
        let mut v = 1.0;
        for k in 0..self.dim() {
            let poly = derivative_poly(self.poly.components()[k], alpha.components()[k], self.center[k], s2);
            let t = x[k];
            let u = t - self.center[k];
            v *= eval_poly(&poly, t) * (-u * u / (2.0 * s2)).exp();
            if v == 0.0 {
                break;
            }
        }
        v
    }

    /// `∂^α ω(0) / α!` for every `|α| ≤ order`, graded-lex.
    pub fn taylor_at_origin(&self, order: u32) -> Vec<(MultiIndex, f64)> {
        let origin = vec![0.0; self.dim()];
        enumerate_multi_indices(self.dim(), order)
            .into_iter()
            .map(|a| {
                let c = self.derivative(&a, &origin) / a.factorial();
                (a, c)
            })
            .collect()
    }
}

// Coefficients (ascending powers of t) of p with
// d^a/dt^a [t^b e^{−(t−c)²/(2s²)}] = p(t) e^{−(t−c)²/(2s²)}.
fn derivative_poly(b: u32, a: u32, c: f64, s2: f64) -> Vec<f64> {
    let mut p = vec![0.0; b as usize + 1];
    p[b as usize] = 1.0;
    for _ in 0..a {
        // p' − (t − c)/s² · p
        let mut q = vec![0.0; p.len() + 1];
        for (k, &pk) in p.iter().enumerate() {
            if k > 0 {
                q[k - 1] += k as f64 * pk;
            }
            q[k + 1] -= pk / s2;
            q[k] += c * pk / s2;
        }
        p = q;
    }
    p
}

fn eval_poly(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    step: f64,
    nodes: usize,
}

impl Axis {
    /// Nodes `−L + (i + offset)·h`, `h = 2L/n`; `offset = 1/2` is the midpoint rule.
    fn midpoint(half_width: f64, nodes: usize, offset: f64) -> Axis {
        let step = 2.0 * half_width / nodes as f64;
        Axis {
            lo: -half_width + offset * step,
            step,
            nodes,
        }
    }

    fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }
}

// Distinct fractional offsets per point block keep different points off each
// other's grid nodes, and off the origin.
fn stagger(block: usize, blocks: usize) -> f64 {
    (block as f64 + 0.5) / blocks.max(1) as f64
}

/// Tensor-product rule over `axes`: parallel over the first axis, sequential
/// inside, summed in a fixed order.
fn integrate<F>(axes: &[Axis], exec: Exec, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if axes.is_empty() {
        return f(&[]);
    }
    let cell: f64 = axes.iter().map(|a| a.step).product();
    let rest = &axes[1..];
    let slabs = exec.map_range(axes[0].nodes, |i0| {
        let mut x = vec![0.0; axes.len()];
        x[0] = axes[0].node(i0);
        let mut idx = vec![0usize; rest.len()];
        for (k, a) in rest.iter().enumerate() {
            x[k + 1] = a.node(0);
        }
        let mut acc = 0.0;
        loop {
            acc += f(&x);
            // odometer
            let mut k = rest.len();
            loop {
                if k == 0 {
                    return acc;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < rest[k].nodes {
                    x[k + 1] = rest[k].node(idx[k]);
                    break;
                }
                idx[k] = 0;
                x[k + 1] = rest[k].node(0);
            }
        }
    });
    ordered_sum(&slabs) * cell
}

fn pointwise_axes(kernel: &Kernel, spec: &QuadratureSpec) -> Vec<Axis> {
    let m = kernel.ambient_dim();
    let blocks = kernel.points().saturating_sub(1).max(1);
    let d = (m / blocks).max(1);
    (0..m)
        .map(|k| Axis::midpoint(spec.half_width, spec.resolution, stagger(k / d, blocks)))
        .collect()
}

fn check_dims(kernel: &Kernel, omega: &TestFunction) -> Result<()> {
    if kernel.ambient_dim() != omega.dim() {
        return Err(Error::domain(format!(
            "kernel on R^{} paired with a test function on R^{}",
            kernel.ambient_dim(),
            omega.dim()
        )));
    }
    Ok(())
}

/// `⟨t, ω⟩` by quadrature.
pub fn pair(kernel: &Kernel, omega: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    pair_scaled(kernel, 1.0, omega, spec)
}

/// `⟨t(λ·), ω⟩ = ∫ t(λx) ω(x) dx`.
pub fn pair_scaled(kernel: &Kernel, lambda: f64, omega: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    check_dims(kernel, omega)?;
    if !(lambda > 0.0) {
        return Err(Error::domain("scaling parameter must be positive"));
    }
    match kernel {
        Kernel::MollifiedDelta(m) => Ok(m.pair_scaled(lambda, omega, spec)),
        Kernel::LinearCombination { terms, .. } => {
            let mut vals = Vec::with_capacity(terms.len());
            for (c, k) in terms {
                vals.push(to_f64(c) * pair_scaled(k, lambda, omega, spec)?);
            }
            Ok(ordered_sum(&vals))
        }
        _ => {
            kernel.check_integrable(omega)?;
            let axes = pointwise_axes(kernel, spec);
            Ok(integrate(&axes, spec.exec, |x| {
                kernel.evaluate(x, lambda).unwrap_or(0.0) * omega.value(x)
            }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScalingDegreeValue {
    Finite(Rational64),
    Infinite,
}

impl ScalingDegreeValue {
    pub fn finite(&self) -> Option<Rational64> {
        match self {
            ScalingDegreeValue::Finite(q) => Some(*q),
            ScalingDegreeValue::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ScalingDegreeValue::Finite(q) => rational_to_f64(q),
            ScalingDegreeValue::Infinite => f64::INFINITY,
        }
    }

    /// Largest integer `≤ value`; `None` for `+∞`.
    pub fn floor(&self) -> Option<i64> {
        self.finite().map(|q| q.floor().to_integer())
    }
}

impl fmt::Display for ScalingDegreeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingDegreeValue::Finite(q) => write!(f, "{q}"),
            ScalingDegreeValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Scaling degree from the kernel's form:
/// `|x|^{−k} → k`, `∂^α δ_I → d(|I|−1) + |α|`, `Π G^{m_ij} → E(d−2)`,
/// combinations → maximum over members.
pub fn scaling_degree_symbolic(kernel: &Kernel) -> Result<ScalingDegreeValue> {
    match kernel {
        Kernel::HomogeneousPower { exponent, .. } => Ok(ScalingDegreeValue::Finite(*exponent)),
        Kernel::MollifiedDelta(m) => Ok(ScalingDegreeValue::Finite(Rational64::from_integer(
            (m.codimension() + m.alpha.order() as usize) as i64,
        ))),
        Kernel::PropagatorProduct(p) => Ok(ScalingDegreeValue::Finite(Rational64::from_integer(
            p.total_multiplicity() as i64 * (p.d as i64 - 2),
        ))),
        Kernel::LinearCombination { terms, .. } => {
            let live: Vec<&Kernel> = terms.iter().filter(|(c, _)| !c.is_zero()).map(|(_, k)| k).collect();
            if live.is_empty() {
                return Err(Error::NotComputable("the zero kernel has no finite scaling degree".into()));
            }
            let mut best = scaling_degree_symbolic(live[0])?;
            for k in &live[1..] {
                best = best.max(scaling_degree_symbolic(k)?);
            }
            Ok(best)
        }
    }
}

/// `count` values from `hi` down to `lo`, equally spaced in `log λ`.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Result<Vec<f64>> {
    if !(0.0 < lo && lo < hi && hi <= 1.0) || count < 2 {
        return Err(Error::domain("λ grid needs 0 < lo < hi ≤ 1 and at least two points"));
    }
    let ratio = (lo / hi).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|i| hi * ratio.powi(i as i32)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingDegreeEstimate {
    pub estimate: f64,
    /// `(λ, ⟨t(λ·), ω⟩)` in grid order.
    pub samples: Vec<(f64, f64)>,
}

/// Least-squares slope of `log|⟨t(λ·), ω⟩|` against `log λ`, negated.
pub fn scaling_degree_numeric(
    kernel: &Kernel,
    omega: &TestFunction,
    lambdas: &[f64],
    spec: &QuadratureSpec,
) -> Result<ScalingDegreeEstimate> {
    if lambdas.len() < MIN_LAMBDA_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {MIN_LAMBDA_SAMPLES} λ samples, got {}",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
        return Err(Error::domain("λ samples must lie in (0, 1]"));
    }
    let values = spec.exec.map(lambdas, |&l| pair_scaled(kernel, l, omega, spec));
    let mut samples = Vec::with_capacity(lambdas.len());
    for (&l, v) in lambdas.iter().zip(values) {
        samples.push((l, v?));
    }
    if let Some(&(l, v)) = samples.iter().find(|(_, v)| !(v.abs() >= PAIRING_FLOOR) || !v.is_finite()) {
        return Err(Error::UnreliableEstimate {
            message: format!("pairing {v:e} at λ = {l:e} is below the floor {PAIRING_FLOOR:e}"),
            partial: samples,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|(l, _)| l.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, v)| v.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = ordered_sum(&xs) / n;
    let my = ordered_sum(&ys) / n;
    let sxy: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let slope = ordered_sum(&sxy) / ordered_sum(&sxx);
    Ok(ScalingDegreeEstimate {
        estimate: -slope,
        samples,
    })
}

/// A test function suited to measuring the scaling degree of `kernel`:
/// deltas get a unit Gaussian centred at `(½,…,½)` so every derivative at
/// the origin is nonzero; pointwise kernels get `x_1^b` times a centred
/// Gaussian with `b` the smallest even power making the pairing converge.
pub fn default_probe(kernel: &Kernel) -> Result<TestFunction> {
    let m = kernel.ambient_dim();
    if m == 0 {
        return Err(Error::domain("kernel has no ambient dimension"));
    }
    let is_delta = |k: &Kernel| matches!(k, Kernel::MollifiedDelta(_));
    let any_delta = match kernel {
        Kernel::LinearCombination { terms, .. } => terms.iter().any(|(_, k)| is_delta(k)),
        k => is_delta(k),
    };
    if any_delta {
        return TestFunction::new(vec![0.5; m], 1.0, MultiIndex::zero(m));
    }
    let sd = scaling_degree_symbolic(kernel)?
        .finite()
        .ok_or_else(|| Error::NotComputable(format!("{kernel} has infinite scaling degree")))?;
    let mut b = 0u32;
    while sd >= Rational64::from_integer((m as u32 + b) as i64) {
        b += 2;
    }
    let mut poly = vec![0; m];
    poly[0] = b;
    TestFunction::new(vec![0.0; m], 1.0, MultiIndex::new(poly))
}

/// An extension of a kernel across the origin by weighted Taylor subtraction:
/// `⟨t̄, ω⟩ = ⟨t, ω − w · Σ_{|β|≤ρ} x^β ∂^β ω(0)/β!⟩` with `ρ = ⌊sd − m⌋`,
/// or the plain pairing when `ρ < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedKernel {
    pub base: Kernel,
    /// `−1` means no subtraction.
    pub subtraction_order: i64,
    pub weight: TestFunction,
}

fn single_collapse(kernel: &Kernel) -> bool {
    match kernel {
        Kernel::HomogeneousPower { .. } => true,
        Kernel::PropagatorProduct(p) => p.points == 2,
        Kernel::LinearCombination { terms, .. } => terms.iter().all(|(_, k)| single_collapse(k)),
        Kernel::MollifiedDelta(_) => false,
    }
}

pub fn extend(kernel: &Kernel, weight: &TestFunction) -> Result<ExtendedKernel> {
    if !single_collapse(kernel) {
        return Err(Error::domain(format!(
            "{kernel} is not a pointwise kernel singular only at the origin"
        )));
    }
    check_dims(kernel, weight)?;
    let w0 = weight.value(&vec![0.0; weight.dim()]);
    if (w0 - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("scale weight has w(0) = {w0}, expected 1")));
    }
    let sd = match scaling_degree_symbolic(kernel) {
        Ok(sd) => sd,
        // zero kernel: nothing to subtract
        Err(Error::NotComputable(_)) if kernel.is_zero() => ScalingDegreeValue::Finite(Rational64::from_integer(-1)),
        Err(e) => return Err(e),
    };
    let sd = sd
        .finite()
        .ok_or_else(|| Error::NotExtendable(format!("{kernel} has infinite scaling degree")))?;
    let rho = (sd - Rational64::from_integer(kernel.ambient_dim() as i64)).floor().to_integer().max(-1);
    Ok(ExtendedKernel {
        base: kernel.clone(),
        subtraction_order: rho,
        weight: weight.clone(),
    })
}

/// `⟨t̄, ω⟩` for an extended kernel.
pub fn pair_extended(ext: &ExtendedKernel, omega: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    if ext.subtraction_order < 0 {
        return pair(&ext.base, omega, spec);
    }
    spec.validate()?;
    check_dims(&ext.base, omega)?;
    let taylor = omega.taylor_at_origin(ext.subtraction_order as u32);
    let axes = pointwise_axes(&ext.base, spec);
    Ok(integrate(&axes, spec.exec, |x| {
        let poly: f64 = taylor.iter().map(|(a, c)| c * a.monomial(x)).sum();
        let subtracted = omega.value(x) - ext.weight.value(x) * poly;
        ext.base.evaluate(x, 1.0).unwrap_or(0.0) * subtracted
    }))
}

/// A counterterm `b · ∂^α δ_I` for the numerical distribution labelled `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTerm<S = Scalar> {
    pub label: Vec<u32>,
    pub subset: SubsetMask,
    pub alpha: MultiIndex,
    pub coefficient: S,
}

/// `d_J = Σ_I Σ_α b^α_{J,I} ∂^α δ_I`, with terms merged by `(I, α)`.
///
/// An empty `label` marks a distribution not yet attached to a Wick label.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalDistribution<S = Scalar> {
    label: Vec<u32>,
    points: usize,
    d: usize,
    terms: BTreeMap<(SubsetMask, MultiIndex), S>,
}

impl<S> DiagonalDistribution<S>
where
    S: Clone + Zero + PartialEq + for<'a> std::ops::AddAssign<&'a S>,
{
    pub fn new(label: Vec<u32>, points: usize, d: usize) -> Result<Self> {
        IndexSet::new(points)?;
        if points < 2 {
            return Err(Error::domain("diagonal distributions need at least two points"));
        }
        if !label.is_empty() && label.len() != points {
            return Err(Error::domain(format!(
                "label {label:?} has {} entries for {points} points",
                label.len()
            )));
        }
        Ok(DiagonalDistribution {
            label,
            points,
            d,
            terms: BTreeMap::new(),
        })
    }

    pub fn label(&self) -> &[u32] {
        &self.label
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacetime_dim(&self) -> usize {
        self.d
    }

    /// `|J| − 1`.
    pub fn level(&self) -> usize {
        self.points - 1
    }

    pub fn relabel(mut self, label: Vec<u32>) -> Result<Self> {
        if label.len() != self.points {
            return Err(Error::domain("label length must equal the number of points"));
        }
        self.label = label;
        Ok(self)
    }

    /// Adds `b · ∂^α δ_I`, merging with an existing `(I, α)` term.
    pub fn add_term(&mut self, subset: SubsetMask, alpha: MultiIndex, coefficient: S) -> Result<()> {
        if subset.parent() != self.points {
            return Err(Error::domain(format!("{subset} is not a subset of the {} points", self.points)));
        }
        if subset.len() < 2 {
            return Err(Error::domain(format!("diagonal {subset} needs at least two points")));
        }
        if alpha.len() != (self.points - 1) * self.d {
            return Err(Error::domain(format!(
                "derivative {alpha} must have length {}",
                (self.points - 1) * self.d
            )));
        }
        let entry = self.terms.entry((subset, alpha)).or_insert_with(S::zero);
        *entry += &coefficient;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = DiagonalTerm<S>> + '_ {
        self.terms.iter().map(|((s, a), c)| DiagonalTerm {
            label: self.label.clone(),
            subset: *s,
            alpha: a.clone(),
            coefficient: c.clone(),
        })
    }

    pub fn coefficient(&self, subset: &SubsetMask, alpha: &MultiIndex) -> S {
        self.terms
            .get(&(*subset, alpha.clone()))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies every coefficient by `f`.
    pub fn map_coefficients(&self, f: impl Fn(&S) -> S) -> Self {
        let mut out = DiagonalDistribution {
            label: self.label.clone(),
            points: self.points,
            d: self.d,
            terms: BTreeMap::new(),
        };
        for (k, v) in &self.terms {
            let nv = f(v);
            if !nv.is_zero() {
                out.terms.insert(k.clone(), nv);
            }
        }
        out
    }

    /// Largest `|α|` among the terms.
    pub fn max_derivative_order(&self) -> Option<u32> {
        self.terms.keys().map(|(_, a)| a.order()).max()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityFit {
    /// The counterterm `d = t̄₂ − t̄₁`, expressed in `∂^β δ` coefficients.
    pub distribution: DiagonalDistribution<f64>,
    /// `c_β` with `⟨t̄₁ − t̄₂, ω⟩ = Σ c_β ∂^β ω(0)`.
    pub taylor_coefficients: Vec<(MultiIndex, f64)>,
    pub residual: f64,
}

/// Probe family: Gaussians with `σ ∈ {0.5, 1}` times `x^β`, `|β| ≤ orders`.
pub fn probe_family(m: usize, orders: u32) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for sigma in [0.5, 1.0] {
        for beta in enumerate_multi_indices(m, orders) {
            out.push(TestFunction {
                center: vec![0.0; m],
                width: sigma,
                poly: beta,
            });
        }
    }
    out
}

/// Fits the difference of two extensions of one kernel by delta derivatives
/// at the origin.
///
/// The returned distribution `d` is the shift taking the first extension to
/// the second, `t̄₂ = t̄₁ + d`, so `b_β = −(−1)^{|β|} c_β`; in particular the
/// `δ` coefficient is `b_0 = ⟨t, w₁ − w₂⟩`.
pub fn extension_ambiguity(
    e1: &ExtendedKernel,
    e2: &ExtendedKernel,
    probe_orders: u32,
    spec: &QuadratureSpec,
) -> Result<AmbiguityFit> {
    if e1.base != e2.base {
        return Err(Error::domain("extensions of different kernels"));
    }
    let m = e1.base.ambient_dim();
    let rho = e1.subtraction_order.max(e2.subtraction_order);
    let empty = DiagonalDistribution::new(Vec::new(), 2, m)?;
    if rho < 0 {
        return Ok(AmbiguityFit {
            distribution: empty,
            taylor_coefficients: Vec::new(),
            residual: 0.0,
        });
    }
    if (probe_orders as i64) < rho {
        return Err(Error::domain(format!(
            "probe order {probe_orders} below the subtraction order {rho}"
        )));
    }
    let probes = probe_family(m, probe_orders);
    let diffs = spec.exec.map(&probes, |w| -> Result<f64> {
        Ok(pair_extended(e1, w, spec)? - pair_extended(e2, w, spec)?)
    });
    let diffs: Vec<f64> = diffs.into_iter().collect::<Result<_>>()?;
    let unknowns = enumerate_multi_indices(m, rho as u32);
    let origin = vec![0.0; m];
    let features = DMatrix::from_fn(probes.len(), unknowns.len(), |p, k| {
        probes[p].derivative(&unknowns[k], &origin)
    });
    let rhs = DVector::from_vec(diffs);
    let rhs_norm = rhs.norm();
    let coeffs = if rhs_norm == 0.0 {
        DVector::zeros(unknowns.len())
    } else {
        features
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Internal(format!("least-squares solve failed: {e}")))?
    };
    let residual = if rhs_norm == 0.0 {
        0.0
    } else {
        (&features * &coeffs - &rhs).norm() / rhs_norm
    };
    if residual > AMBIGUITY_RESIDUAL_TOL {
        return Err(Error::LemmaViolation { residual });
    }
    let full = SubsetMask::from_members(2, &[1, 2])?;
    let mut distribution = empty;
    let mut taylor = Vec::with_capacity(unknowns.len());
    for (beta, c) in unknowns.into_iter().zip(coeffs.iter().copied()) {
        let sign = if beta.order() % 2 == 0 { -1.0 } else { 1.0 };
        if c != 0.0 {
            distribution.add_term(full, beta.clone(), sign * c)?;
        }
        taylor.push((beta, c));
    }
    Ok(AmbiguityFit {
        distribution,
        taylor_coefficients: taylor,
        residual,
    })
}
