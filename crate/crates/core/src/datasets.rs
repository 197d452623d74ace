//! Arc-dividing label patterns, data pools, and test grids.
//!
//! Data items are angles on the arc [0, pi), encoded as the normalized vectors
//! (cos x, sin x). A pattern labels the arc by two margin angles: points in
//! the middle segment [beta_min, beta_max) are labeled +1, the rest -1. The
//! built-in patterns 1-3 have margin differences pi/2, pi/4, and arctan(1/4),
//! centered on the arc; only the difference |beta1 - beta2| enters the
//! accuracy theory.

use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// A labeling rule on the arc [0, pi).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pattern {
    /// 1, 2, 3 for the built-in patterns; 0 for custom margins.
    pub id: u8,
    /// Margin slope-angle difference |beta1 - beta2|.
    pub delta_beta: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Pattern {
    /// The built-in pattern margin differences, in pattern-id order.
    pub fn builtin_delta(id: u8) -> Option<f64> {
        match id {
            1 => Some(PI / 2.0),
            2 => Some(PI / 4.0),
            3 => Some(0.25f64.atan()),
            _ => None,
        }
    }

    pub fn built_in(id: u8) -> Result<Pattern> {
        let delta = Pattern::builtin_delta(id)
            .ok_or_else(|| Error::Config(format!("unknown pattern id {id}")))?;
        let mut p = Pattern::custom(delta)?;
        p.id = id;
        Ok(p)
    }

    /// A pattern with the given margin difference, centered on the arc.
    pub fn custom(delta_beta: f64) -> Result<Pattern> {
        if !(0.0..PI).contains(&delta_beta) {
            return Err(Error::Config(format!(
                "delta_beta must lie in [0, pi), got {delta_beta}"
            )));
        }
        Ok(Pattern {
            id: 0,
            delta_beta,
            beta_min: (PI - delta_beta) / 2.0,
            beta_max: (PI + delta_beta) / 2.0,
        })
    }

    /// Labeling oracle: +1 on [beta_min, beta_max), -1 elsewhere. Angles
    /// outside [0, pi) are reduced mod pi.
    pub fn label(&self, x: f64) -> i8 {
        let x = x.rem_euclid(PI);
        if x >= self.beta_min && x < self.beta_max {
            1
        } else {
            -1
        }
    }
}

/// Free-function form of the labeling oracle.
pub fn pattern_label(p: &Pattern, x: f64) -> i8 {
    p.label(x)
}

/// A data item: an angle with an optional label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPoint {
    pub x: f64,
    pub label: Option<i8>,
}

/// A labeled data item, as consumed by training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub y: i8,
}

impl TryFrom<DataPoint> for LabeledPoint {
    type Error = Error;

    fn try_from(p: DataPoint) -> Result<LabeledPoint> {
        match p.label {
            Some(y) => Ok(LabeledPoint { x: p.x, y }),
            None => Err(Error::MissingLabel(p.x)),
        }
    }
}

/// How pool angles are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PoolScheme {
    /// I.i.d. uniform on [0, pi), resampled wholesale until both classes are
    /// represented.
    #[default]
    UniformRandom,
    /// The deterministic midpoint grid (j + 0.5) pi / n; intended for
    /// debugging and bound checks.
    EvenlySpaced,
}

/// Generates an unlabeled pool of `n >= 2` angles. Both classes of the
/// generating pattern are guaranteed to be present (oracle-checked);
/// deterministic per seed.
pub fn generate_pool(
    pattern: &Pattern,
    n: usize,
    scheme: PoolScheme,
    seed: u64,
) -> Result<Vec<DataPoint>> {
    if n < 2 {
        return Err(Error::TooFewItems { need: 2, got: n });
    }
    let xs = match scheme {
        PoolScheme::EvenlySpaced => midpoint_grid(n),
        PoolScheme::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut xs;
            let mut attempts = 0;
            loop {
                xs = (0..n).map(|_| rng.random_range(0.0..PI)).collect::<Vec<_>>();
                if both_classes(pattern, &xs) {
                    break;
                }
                attempts += 1;
                if attempts > 10_000 {
                    return Err(Error::Config(format!(
                        "pattern {} cannot represent both classes in a pool of {n}",
                        pattern.id
                    )));
                }
            }
            xs
        }
    };
    if !both_classes(pattern, &xs) {
        return Err(Error::Config(format!(
            "evenly spaced pool of {n} misses one class of pattern {}",
            pattern.id
        )));
    }
    Ok(xs.into_iter().map(|x| DataPoint { x, label: None }).collect())
}

fn both_classes(pattern: &Pattern, xs: &[f64]) -> bool {
    xs.iter().any(|&x| pattern.label(x) > 0) && xs.iter().any(|&x| pattern.label(x) < 0)
}

fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect()
}

/// The labeled midpoint test grid x_j = (j + 0.5) pi / n.
pub fn generate_test_grid(pattern: &Pattern, n: usize) -> Vec<DataPoint> {
    midpoint_grid(n)
        .into_iter()
        .map(|x| DataPoint { x, label: Some(pattern.label(x)) })
        .collect()
}

/// Labels every point of a pool with the oracle.
pub fn label_all(pattern: &Pattern, points: &[DataPoint]) -> Vec<LabeledPoint> {
    points
        .iter()
        .map(|p| LabeledPoint { x: p.x, y: pattern.label(p.x) })
        .collect()
}

/// Formats an angle with 12 significant digits, plain decimal notation.
pub(crate) fn fmt_angle(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.11}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 17) as usize;
    let mut s = String::new();
    write!(s, "{x:.decimals$}").expect("formatting f64 cannot fail");
    s
}

/// Writes points as `x,label` CSV with labels in {+1,-1,NA}.
pub fn write_points_csv(path: &Path, points: &[DataPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_err(path, e))?;
    w.write_record(["x", "label"]).map_err(|e| csv_to_err(path, e))?;
    for p in points {
        let label = match p.label {
            Some(1) => "+1".to_string(),
            Some(-1) => "-1".to_string(),
            Some(other) => other.to_string(),
            None => "NA".to_string(),
        };
        w.write_record([fmt_angle(p.x), label]).map_err(|e| csv_to_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads points back from `x,label` CSV.
pub fn read_points_csv(path: &Path) -> Result<Vec<DataPoint>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_to_err(path, e))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_to_err(path, e))?;
        let parse = |field: &str, what: &str| {
            field.parse::<f64>().map_err(|_| {
                Error::parse(path, format!("row {}: bad {what} value {field:?}", i + 2))
            })
        };
        let x = parse(rec.get(0).unwrap_or(""), "x")?;
        let label = match rec.get(1).unwrap_or("") {
            "NA" | "" => None,
            "+1" | "1" => Some(1),
            "-1" => Some(-1),
            other => {
                return Err(Error::parse(path, format!("row {}: bad label {other:?}", i + 2)))
            }
        };
        out.push(DataPoint { x, label });
    }
    Ok(out)
}

fn csv_to_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}
