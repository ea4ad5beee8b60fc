//! Actions for `egdef deform`, separated by `;` and applied left to right.
//!
//! ```text
//! shift 0                       zero shift
//! shift PATH                    add the point stored at PATH, label by label
//! embed 1,2,4:4                 order-preserving injection {1,2,3} -> {1,..,4}
//! scale lambda=Q class=C        C in gt | eq | lt | all (also j1>j2, j1=j2, j1<j2)
//! theta q=Q [level=N]           multiply level n by Q^n
//! theta z=logQ [level=N]        same with Q = e^z
//! Y [level=N]                   the grading derivation
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use egdef::deformation::{embed, from_json, shift, DeformationPoint, Injection};
use egdef::group::{apply_scaling, apply_scaling_all, grading_y, scaling_operator, theta, JClass};
use egdef::Scalar;
use num::Zero;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassSel {
    One(JClass),
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    ShiftZero,
    ShiftBy(PathBuf),
    Embed(Injection),
    Scale { lambda: Scalar, class: ClassSel },
    Theta { q: Scalar, level: Option<usize> },
    Y { level: Option<usize> },
}

fn options(words: &[&str]) -> Result<BTreeMap<String, String>, String> {
    words
        .iter()
        .map(|w| {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found `{w}`"))?;
            Ok((k.to_string(), v.to_string()))
        })
        .collect()
}

fn rational(s: &str) -> Result<Scalar, String> {
    egdef::rational::parse(s).map_err(|e| e.to_string())
}

fn only(opts: &BTreeMap<String, String>, allowed: &[&str]) -> Result<(), String> {
    match opts.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(format!("unexpected option `{k}`")),
        None => Ok(()),
    }
}

fn level(opts: &BTreeMap<String, String>) -> Result<Option<usize>, String> {
    opts.get("level")
        .map(|l| l.parse().map_err(|_| format!("level `{l}` is not an integer")))
        .transpose()
}

fn class(s: &str) -> Result<ClassSel, String> {
    match s {
        "all" => Ok(ClassSel::All),
        "j1>j2" => Ok(ClassSel::One(JClass::Greater)),
        "j1=j2" => Ok(ClassSel::One(JClass::Equal)),
        "j1<j2" => Ok(ClassSel::One(JClass::Less)),
        other => other.parse().map(ClassSel::One).map_err(|e: egdef::Error| e.to_string()),
    }
}

fn parse_one(text: &str) -> Result<Action, String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let Some((&verb, rest)) = words.split_first() else {
        return Err("empty action".into());
    };
    match verb {
        "shift" => match rest {
            ["0"] => Ok(Action::ShiftZero),
            [path] => Ok(Action::ShiftBy(PathBuf::from(path))),
            _ => Err("usage: shift 0 | shift PATH".into()),
        },
        "embed" => {
            let [spec] = rest else {
                return Err("usage: embed IMAGES:TARGET, e.g. embed 1,2,4:4".into());
            };
            let (images, target) = spec.split_once(':').ok_or("embed needs IMAGES:TARGET")?;
            let images = images
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| format!("bad image list `{images}`"))?;
            let target = target.parse().map_err(|_| format!("bad target `{target}`"))?;
            Injection::new(images, target).map(Action::Embed).map_err(|e| e.to_string())
        }
        "scale" => {
            let opts = options(rest)?;
            only(&opts, &["lambda", "λ", "class"])?;
            let lambda = opts
                .get("lambda")
                .or_else(|| opts.get("λ"))
                .ok_or("scale needs lambda=Q")?;
            Ok(Action::Scale {
                lambda: rational(lambda)?,
                class: class(opts.get("class").map(String::as_str).unwrap_or("all"))?,
            })
        }
        "theta" => {
            let opts = options(rest)?;
            only(&opts, &["q", "z", "level"])?;
            let q = match (opts.get("q"), opts.get("z")) {
                (Some(q), None) => rational(q)?,
                (None, Some(z)) if z == "0" => Scalar::from_integer(1.into()),
                (None, Some(z)) => rational(
                    z.strip_prefix("log")
                        .ok_or("z must be 0 or logQ with Q rational, so that e^z stays exact")?,
                )?,
                _ => return Err("theta needs exactly one of q=Q, z=logQ".into()),
            };
            if q <= Scalar::zero() {
                return Err("e^z must be positive".into());
            }
            Ok(Action::Theta { q, level: level(&opts)? })
        }
        "Y" => {
            let opts = options(rest)?;
            only(&opts, &["level"])?;
            Ok(Action::Y { level: level(&opts)? })
        }
        other => Err(format!("unknown action `{other}` (shift, embed, scale, theta, Y)")),
    }
}

pub fn parse(text: &str) -> Result<Vec<Action>, String> {
    text.split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_one).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ApplyError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] egdef::Error),
}

// Runs `f` on each level separately and leaves the other levels untouched
// when `only` is set.
fn per_level(
    point: &DeformationPoint,
    only: Option<usize>,
    f: impl Fn(usize, &DeformationPoint) -> egdef::Result<DeformationPoint>,
) -> egdef::Result<DeformationPoint> {
    let mut out = DeformationPoint::zero(point.theory().clone());
    for level in point.levels() {
        let part = point.restrict_to_level(level);
        let mapped = if only.is_none_or(|l| l == level) { f(level, &part)? } else { part };
        out = out.add(&mapped)?;
    }
    Ok(out)
}

pub fn apply(action: &Action, point: &DeformationPoint) -> Result<DeformationPoint, ApplyError> {
    Ok(match action {
        Action::ShiftZero => point.clone(),
        Action::ShiftBy(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ApplyError::Io(format!("{}: {e}", path.display())))?;
            let delta = from_json(point.theory().clone(), &text)?;
            let labels: std::collections::BTreeSet<Vec<u32>> = delta.entries().map(|(k, _)| k.label.clone()).collect();
            let mut out = point.clone();
            for label in labels {
                out = shift(&label, &out, &delta.distribution(&label)?)?;
            }
            out
        }
        Action::Embed(iota) => embed(iota, point)?,
        Action::Scale { lambda, class } => per_level(point, None, |level, part| match class {
            ClassSel::All => apply_scaling_all(level, lambda, part),
            ClassSel::One(c) => apply_scaling(&scaling_operator(level, *c, lambda)?, part),
        })?,
        Action::Theta { q, level } => per_level(point, *level, |_, part| theta(q, part))?,
        Action::Y { level } => per_level(point, *level, |_, part| Ok(grading_y(part)))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse("shift 0").unwrap(), vec![Action::ShiftZero]);
        let a = parse("scale λ=1 class=j1=j2; theta z=log2 level=2; Y").unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(
            a[0],
            Action::Scale {
                lambda: Scalar::from_integer(1.into()),
                class: ClassSel::One(JClass::Equal)
            }
        );
        assert_eq!(
            a[1],
            Action::Theta {
                q: Scalar::from_integer(2.into()),
                level: Some(2)
            }
        );
        assert!(matches!(parse("embed 1,2,4:4").unwrap()[0], Action::Embed(_)));
        for bad in ["embed 2,1:3", "scale class=gt", "theta z=1.5", "theta q=-2", "rotate", "Y foo"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }
}
