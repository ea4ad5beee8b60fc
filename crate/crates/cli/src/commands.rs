use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use egdef::deformation::{from_json, to_canonical_json, total_dimension_report, BoundPolicy};
use egdef::distributions::{default_probe, geometric_grid, scaling_degree_numeric, scaling_degree_symbolic, Kernel};
use egdef::group::{graded_dimensions, verify_claims};
use egdef::report::{ClaimReport, GoldenVerdicts};
use egdef::wick::{random_propagator_values, vacuum_moment_oracle, verify_axioms, wick_expand, PointConfiguration};

use crate::action;
use crate::config::SessionConfig;
use crate::CliError;

/// A command's result in both renderings.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
    /// Set when the command found an oracle or golden-file mismatch; the
    /// report is still printed before exiting.
    pub mismatch: Option<String>,
}

impl Report {
    fn ok(text: String, json: serde_json::Value) -> Self {
        Report { text, json, mismatch: None }
    }
}

pub fn sdeg(cfg: &SessionConfig, spec: &str) -> Result<Report, CliError> {
    let kernel = Kernel::parse_spec(spec, cfg.quadrature.mollifier_width)?;
    let symbolic = scaling_degree_symbolic(&kernel)?;
    let omega = default_probe(&kernel)?;
    let lambdas = geometric_grid(1.0, cfg.sdeg.lambda_min, cfg.sdeg.samples)?;
    let est = scaling_degree_numeric(&kernel, &omega, &lambdas, &cfg.quadrature)?;
    let diff = est.estimate - symbolic.to_f64();
    let text = format!(
        "kernel      {kernel}\nsymbolic    {symbolic}\nnumeric     {:.6}\ndifference  {diff:+.3e}\n",
        est.estimate
    );
    let json = json!({
        "kernel": kernel.to_string(),
        "symbolic": symbolic.to_string(),
        "numeric": est.estimate,
        "difference": diff,
        "samples": est.samples,
    });
    Ok(Report::ok(text, json))
}

fn parse_points(d: usize, spec: &str) -> Result<PointConfiguration, CliError> {
    let points = spec
        .split(';')
        .map(|p| {
            p.split(',')
                .map(egdef::rational::parse)
                .collect::<egdef::Result<Vec<_>>>()
        })
        .collect::<egdef::Result<Vec<_>>>()?;
    Ok(PointConfiguration::new(d, points)?)
}

pub fn wick(cfg: &SessionConfig, powers: &[u32], at: Option<&str>) -> Result<Report, CliError> {
    let d = cfg.theory.d;
    let terms = wick_expand(powers, d)?;
    let config = at.map(|s| parse_points(d, s)).transpose()?;
    if let Some(c) = &config {
        if c.len() != powers.len() {
            return Err(CliError::Usage(format!(
                "{} powers but {} points in the configuration",
                powers.len(),
                c.len()
            )));
        }
    }
    let at_config = config.as_ref().map(|c| c.propagator_values()).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.wick.seed);
    let random_g = random_propagator_values(&mut rng, powers.len());

    let mut mismatch = None;
    let mut rows = Vec::new();
    let mut text = format!("{:<16} {:<12} {:<28}", "J", "coefficient", "kernel");
    if config.is_some() {
        text.push_str(" value");
    }
    text.push('\n');
    for t in &terms {
        let residual: Vec<u32> = powers.iter().zip(&t.label).map(|(k, j)| k - j).collect();
        // the kernel is cross-checked against the brute-force pairing sum
        let check = |g| -> Result<_, CliError> {
            let kernel = t.kernel.evaluate_exact(g)?;
            let oracle = vacuum_moment_oracle(&residual, g)?;
            Ok((kernel, oracle))
        };
        let (k, o) = check(&random_g)?;
        if k != o && mismatch.is_none() {
            mismatch = Some(format!("J = {:?}: kernel {k} but pairing oracle {o} at random g", t.label));
        }
        let value = match &at_config {
            Some(g) => {
                let (k, o) = check(g)?;
                if k != o && mismatch.is_none() {
                    mismatch = Some(format!("J = {:?}: kernel {k} but pairing oracle {o}", t.label));
                }
                Some(k)
            }
            None => None,
        };
        let label = format!("{:?}", t.label);
        let _ = std::fmt::Write::write_fmt(
            &mut text,
            format_args!("{label:<16} {:<12} {:<28}", t.coefficient.to_string(), t.kernel.to_string()),
        );
        if let Some(v) = &value {
            text.push_str(&format!(" {v}"));
        }
        text.push('\n');
        rows.push(json!({
            "J": t.label,
            "coefficient": t.coefficient.to_string(),
            "kernel": t.kernel.to_string(),
            "value": value.map(|v| v.to_string()),
        }));
    }
    text.push_str(match mismatch {
        None => "pairing oracle: agrees\n",
        Some(_) => "pairing oracle: MISMATCH\n",
    });
    let json = json!({ "powers": powers, "d": d, "terms": rows, "oracle-agrees": mismatch.is_none() });
    Ok(Report { text, json, mismatch })
}

/// Returns the canonical JSON of the transformed point.
pub fn deform(cfg: &SessionConfig, point_file: &Path, actions: &str) -> Result<String, CliError> {
    let actions = action::parse(actions).map_err(CliError::Usage)?;
    let text = std::fs::read_to_string(point_file).map_err(|e| CliError::Io(format!("{}: {e}", point_file.display())))?;
    let theory = Arc::new(cfg.theory.theory()?);
    let mut point = from_json(theory, &text)?;
    for a in &actions {
        point = action::apply(a, &point).map_err(|e| match e {
            action::ApplyError::Io(m) => CliError::Io(m),
            action::ApplyError::Core(e) => e.into(),
        })?;
    }
    Ok(to_canonical_json(&point))
}

fn golden_path(dir: &Path, report: &ClaimReport) -> std::path::PathBuf {
    dir.join(format!("{}.json", report.suite))
}

pub fn verify(cfg: &SessionConfig, golden_dir: &Path, update: bool) -> Result<Report, CliError> {
    let reports = [verify_claims(&cfg.group)?, verify_axioms(&cfg.wick)?];
    let mut text = String::new();
    let mut mismatches = Vec::new();
    let mut suites = Vec::new();
    for r in &reports {
        let path = golden_path(golden_dir, r);
        let golden = if update {
            std::fs::create_dir_all(golden_dir).map_err(|e| CliError::Io(format!("{}: {e}", golden_dir.display())))?;
            let g = GoldenVerdicts::from_report(r);
            std::fs::write(&path, g.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            g
        } else {
            let s = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            GoldenVerdicts::parse(&s)?
        };
        let diff = golden.compare(r);
        text.push_str(&format!("[{}]\n", r.suite));
        for c in &r.claims {
            let pinned = golden.verdicts.get(&c.claim_id).map(|v| v.to_string()).unwrap_or("-".into());
            let flag = if pinned == c.verdict.to_string() { "" } else { "  DRIFT" };
            text.push_str(&format!("  {:<30} {:<12} golden {pinned}{flag}\n", c.claim_id, c.verdict.to_string()));
            if let Some(w) = &c.witness {
                text.push_str(&format!("      witness: {w}\n"));
            }
        }
        for m in &diff {
            mismatches.push(format!("{}/{}: expected {:?}, got {:?}", r.suite, m.claim_id, m.expected, m.actual));
        }
        suites.push(json!({ "report": r, "golden": path.display().to_string(), "drift": diff.len() }));
    }
    text.push_str(if mismatches.is_empty() {
        "all verdicts match the golden files\n"
    } else {
        "verdict drift against the golden files\n"
    });
    let mismatch = (!mismatches.is_empty()).then(|| mismatches.join("; "));
    Ok(Report {
        text,
        json: json!({ "config": cfg.render(), "suites": suites, "matches-golden": mismatch.is_none() }),
        mismatch,
    })
}

pub fn dims(cfg: &SessionConfig, level: Option<usize>, degree: Option<usize>) -> Result<Report, CliError> {
    let level = level.unwrap_or(cfg.theory.n_max);
    let degree = degree.unwrap_or(cfg.group.truncation);
    let paper = total_dimension_report(&cfg.theory.build(BoundPolicy::PaperLiteral)?, level)?;
    let codim = total_dimension_report(&cfg.theory.build(BoundPolicy::CodimCorrected)?, level)?;
    let lie = graded_dimensions(degree)?;

    let mut text = format!("{:<6} {:<7} {:>14} {:>16}\n", "level", "labels", "paper-literal", "codim-corrected");
    let mut rows = Vec::new();
    for (a, b) in paper.iter().zip(&codim) {
        if b.dimension > a.dimension {
            return Err(CliError::Invariant(format!(
                "level {}: codim-corrected count {} exceeds paper-literal {}",
                a.level, b.dimension, a.dimension
            )));
        }
        text.push_str(&format!("{:<6} {:<7} {:>14} {:>16}\n", a.level, a.labels, a.dimension, b.dimension));
        rows.push(json!({
            "level": a.level,
            "labels": a.labels,
            "paper-literal": a.dimension,
            "codim-corrected": b.dimension,
        }));
    }
    let lie_s: Vec<String> = lie.iter().map(|x| x.to_string()).collect();
    text.push_str(&format!("\nfree Lie algebra, weights 1..={degree}: ({})\n", lie_s.join(",")));
    Ok(Report::ok(text, json!({ "counterterms": rows, "lie-dimensions": lie })))
}
