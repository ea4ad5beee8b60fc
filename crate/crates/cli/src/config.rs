//! Session configuration: a flat `key = value` file with `[section]` headers.
//!
//! ```text
//! # comment
//! [theory]
//! d = 3
//! p = 4
//! n_max = 4
//! default_sd = 2
//! sd(2,2) = 4
//! policy = paper-literal
//! strict = false
//!
//! [quadrature]
//! resolution = 64
//! half_width = 8
//! mollifier_width = 1e-6
//! exec = parallel
//!
//! [group]
//! lambdas = 2, 1/2, 3
//! ```
//!
//! Unknown sections or keys are errors, reported with line and column.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num::rational::Rational64;
use num::ToPrimitive;

use egdef::deformation::{BoundPolicy, TheoryConfig};
use egdef::distributions::{QuadratureSpec, ScalingDegreeValue};
use egdef::exec::Exec;
use egdef::group::ClaimConfig;
use egdef::wick::AxiomSuiteConfig;
use egdef::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheorySection {
    pub d: usize,
    pub p: u32,
    pub n_max: usize,
    pub default_sd: Option<Rational64>,
    pub sd_bounds: BTreeMap<Vec<u32>, Rational64>,
    /// Use the Wick kernels' own scaling degrees where no explicit bound is set.
    pub wick_bounds: bool,
    pub policy: BoundPolicy,
    pub strict: bool,
}

impl Default for TheorySection {
    fn default() -> Self {
        TheorySection {
            d: 4,
            p: 4,
            n_max: 4,
            default_sd: None,
            sd_bounds: BTreeMap::new(),
            wick_bounds: true,
            policy: BoundPolicy::PaperLiteral,
            strict: false,
        }
    }
}

impl TheorySection {
    pub fn build(&self, policy: BoundPolicy) -> egdef::Result<TheoryConfig> {
        let mut t = if self.wick_bounds {
            TheoryConfig::from_wick(self.d, self.p, self.n_max)?
        } else {
            TheoryConfig::new(self.d, self.p, self.n_max)?
        };
        if let Some(sd) = self.default_sd {
            t = t.with_default_sd(ScalingDegreeValue::Finite(sd))?;
        }
        for (label, sd) in &self.sd_bounds {
            t = t.with_sd_bound(label.clone(), ScalingDegreeValue::Finite(*sd))?;
        }
        Ok(t.with_policy(policy).with_strict(self.strict))
    }

    pub fn theory(&self) -> egdef::Result<TheoryConfig> {
        self.build(self.policy)
    }
}

/// Settings of the `sdeg` estimator beyond the quadrature itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SdegSection {
    pub lambda_min: f64,
    pub samples: usize,
}

impl Default for SdegSection {
    fn default() -> Self {
        SdegSection {
            lambda_min: 1e-2,
            samples: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySection {
    pub golden_dir: String,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            golden_dir: "golden".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SessionConfig {
    pub theory: TheorySection,
    pub quadrature: QuadratureSpec,
    pub sdeg: SdegSection,
    pub group: ClaimConfig,
    pub wick: AxiomSuiteConfig,
    pub verify: VerifySection,
}

impl SessionConfig {
    pub fn set_seed(&mut self, seed: u64) {
        self.group.seed = seed;
        self.wick.seed = seed;
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SessionConfig::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("");
            let indent = content.len() - content.trim_start().len();
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let err = |column: usize, message: String| ConfigError { line, column, message };
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(indent + trimmed.len(), "missing `]`".into()))?
                    .trim();
                if !["theory", "quadrature", "sdeg", "group", "wick", "verify"].contains(&name) {
                    return Err(err(indent + 2, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let eq = trimmed
                .find('=')
                .ok_or_else(|| err(indent + 1, "expected `key = value`".into()))?;
            let key = trimmed[..eq].trim();
            let value = trimmed[eq + 1..].trim();
            let value_col = indent + eq + 2 + (trimmed[eq + 1..].len() - trimmed[eq + 1..].trim_start().len());
            let Some(sec) = section.as_deref() else {
                return Err(err(indent + 1, format!("`{key}` appears before any [section]")));
            };
            cfg.assign(sec, key, value)
                .map_err(|m| err(if m.starts_with("unknown key") { indent + 1 } else { value_col }, m))?;
        }
        Ok(cfg)
    }

    fn assign(&mut self, section: &str, key: &str, v: &str) -> Result<(), String> {
        match (section, key) {
            ("theory", "d") => self.theory.d = num_in(v, 1, 8)?,
            ("theory", "p") => self.theory.p = num_in(v, 1, 12)?,
            ("theory", "n_max") => self.theory.n_max = num_in(v, 2, 8)?,
            ("theory", "default_sd") => self.theory.default_sd = Some(rational64(v)?),
            ("theory", "wick_bounds") => self.theory.wick_bounds = boolean(v)?,
            ("theory", "policy") => self.theory.policy = BoundPolicy::from_str(v).map_err(|e| e.to_string())?,
            ("theory", "strict") => self.theory.strict = boolean(v)?,
            ("theory", k) if k.starts_with("sd(") && k.ends_with(')') => {
                let label = k[3..k.len() - 1]
                    .split(',')
                    .map(|x| x.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("bad label in `{k}`"))?;
                self.theory.sd_bounds.insert(label, rational64(v)?);
            }
            ("quadrature", "resolution") => self.quadrature.resolution = num_in(v, 4, 1 << 20)?,
            ("quadrature", "half_width") => self.quadrature.half_width = positive(v)?,
            ("quadrature", "mollifier_width") => self.quadrature.mollifier_width = positive(v)?,
            ("quadrature", "transverse_resolution") => self.quadrature.transverse_resolution = num_in(v, 2, 4096)?,
            ("quadrature", "transverse_span") => self.quadrature.transverse_span = positive(v)?,
            ("quadrature", "exec") => self.quadrature.exec = exec(v)?,
            ("sdeg", "lambda_min") => {
                let l = positive(v)?;
                if l >= 1.0 {
                    return Err("lambda_min must be below 1".into());
                }
                self.sdeg.lambda_min = l;
            }
            ("sdeg", "samples") => self.sdeg.samples = num_in(v, egdef::distributions::MIN_LAMBDA_SAMPLES, 200)?,
            ("group", "level") => self.group.level = num_in(v, 1, 6)?,
            ("group", "truncation") => self.group.truncation = num_in(v, 1, egdef::group::MAX_TRUNCATION)?,
            ("group", "trials") => self.group.trials = num_in(v, 1, 100_000)?,
            ("group", "seed") => self.group.seed = num_in(v, 0, u64::MAX)?,
            ("group", "exec") => self.group.exec = exec(v)?,
            ("group", "lambdas") => {
                let ls = v
                    .split(',')
                    .map(|x| egdef::rational::parse(x).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<Scalar>, _>>()?;
                if ls.is_empty() || ls.iter().any(|l| l == &Scalar::from_integer(0.into())) {
                    return Err("λ samples must be a nonempty list of nonzero rationals".into());
                }
                self.group.lambdas = ls;
            }
            ("wick", "instances") => self.wick.instances = num_in(v, 1, 100_000)?,
            ("wick", "max_points") => self.wick.max_points = num_in(v, 2, 6)?,
            ("wick", "max_power") => self.wick.max_power = num_in(v, 0, 8)?,
            ("wick", "d") => self.wick.d = num_in(v, 1, 8)?,
            ("wick", "oracle_legs") => self.wick.oracle_legs = num_in(v, 0, 12)?,
            ("wick", "seed") => self.wick.seed = num_in(v, 0, u64::MAX)?,
            ("wick", "exec") => self.wick.exec = exec(v)?,
            ("verify", "golden_dir") => self.verify.golden_dir = v.to_string(),
            (s, k) => return Err(format!("unknown key `{k}` in [{s}]")),
        }
        Ok(())
    }

    /// The configuration in the same format [`SessionConfig::parse`] reads.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let t = &self.theory;
        let _ = writeln!(s, "[theory]\nd = {}\np = {}\nn_max = {}", t.d, t.p, t.n_max);
        if let Some(sd) = t.default_sd {
            let _ = writeln!(s, "default_sd = {sd}");
        }
        for (label, sd) in &t.sd_bounds {
            let l: Vec<String> = label.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "sd({}) = {sd}", l.join(","));
        }
        let policy = match t.policy {
            BoundPolicy::PaperLiteral => "paper-literal",
            BoundPolicy::CodimCorrected => "codim-corrected",
        };
        let _ = writeln!(
            s,
            "wick_bounds = {}\npolicy = {policy}\nstrict = {}\n",
            t.wick_bounds, t.strict
        );
        let q = &self.quadrature;
        let _ = writeln!(
            s,
            "[quadrature]\nresolution = {}\nhalf_width = {:?}\nmollifier_width = {:?}\ntransverse_resolution = {}\ntransverse_span = {:?}\nexec = {}\n",
            q.resolution,
            q.half_width,
            q.mollifier_width,
            q.transverse_resolution,
            q.transverse_span,
            exec_name(q.exec)
        );
        let _ = writeln!(
            s,
            "[sdeg]\nlambda_min = {:?}\nsamples = {}\n",
            self.sdeg.lambda_min, self.sdeg.samples
        );
        let g = &self.group;
        let ls: Vec<String> = g.lambdas.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(
            s,
            "[group]\nlevel = {}\ntruncation = {}\ntrials = {}\nseed = {}\nlambdas = {}\nexec = {}\n",
            g.level,
            g.truncation,
            g.trials,
            g.seed,
            ls.join(", "),
            exec_name(g.exec)
        );
        let w = &self.wick;
        let _ = writeln!(
            s,
            "[wick]\ninstances = {}\nmax_points = {}\nmax_power = {}\nd = {}\noracle_legs = {}\nseed = {}\nexec = {}\n",
            w.instances,
            w.max_points,
            w.max_power,
            w.d,
            w.oracle_legs,
            w.seed,
            exec_name(w.exec)
        );
        let _ = writeln!(s, "[verify]\ngolden_dir = {}", self.verify.golden_dir);
        s
    }
}

fn num_in<T>(v: &str, lo: T, hi: T) -> Result<T, String>
where
    T: FromStr + PartialOrd + std::fmt::Display + Copy,
{
    let x: T = v.parse().map_err(|_| format!("`{v}` is not an integer"))?;
    if x < lo || x > hi {
        return Err(format!("{x} is outside {lo}..={hi}"));
    }
    Ok(x)
}

fn positive(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("`{v}` is not a positive number")),
    }
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn exec(v: &str) -> Result<Exec, String> {
    match v {
        "sequential" => Ok(Exec::Sequential),
        "parallel" => Ok(Exec::Parallel),
        _ => Err(format!("`{v}` is not an execution policy (sequential or parallel)")),
    }
}

fn exec_name(e: Exec) -> &'static str {
    match e {
        Exec::Sequential => "sequential",
        Exec::Parallel => "parallel",
    }
}

fn rational64(v: &str) -> Result<Rational64, String> {
    let q = egdef::rational::parse(v).map_err(|e| e.to_string())?;
    match (q.numer().to_i64(), q.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(format!("`{v}` does not fit a 64-bit rational")),
    }
}
