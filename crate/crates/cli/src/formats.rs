//! On-disk CSV formats.
//!
//! Pair files: one header line `s,x0,..,x{d-1},xp0,..,xp{d-1}` followed by
//! one row per pair, where the `x` columns hold the preference-ordered
//! instance. Test files: `y,x0,..,x{d-1}`. UTF-8, LF line endings, floats
//! in round-trip decimal form.

use pairlearn::{LabeledPair, Sample, Sign};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

pub fn pairs_header(dim: usize) -> String {
    let mut h = String::from("s");
    for i in 0..dim {
        let _ = write!(h, ",x{i}");
    }
    for i in 0..dim {
        let _ = write!(h, ",xp{i}");
    }
    h
}

pub fn test_header(dim: usize) -> String {
    let mut h = String::from("y");
    for i in 0..dim {
        let _ = write!(h, ",x{i}");
    }
    h
}

pub fn write_pairs_csv(path: &Path, pairs: &[LabeledPair]) -> Result<(), String> {
    let dim = pairs.first().map(|p| p.dim()).unwrap_or(0);
    let mut out = String::new();
    out.push_str(&pairs_header(dim));
    out.push('\n');
    for p in pairs {
        let _ = write!(out, "{}", p.sd.as_i8());
        for v in p.first.iter().chain(p.second.iter()) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn write_test_csv(path: &Path, samples: &[Sample]) -> Result<(), String> {
    let dim = samples.first().map(|s| s.features.len()).unwrap_or(0);
    let mut out = String::new();
    out.push_str(&test_header(dim));
    out.push('\n');
    for s in samples {
        let y = s.label.ok_or("test samples must be labeled")?;
        let _ = write!(out, "{}", y.as_i8());
        for v in &s.features {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

fn write_atomic(path: &Path, content: &str) -> Result<(), String> {
    let mut f = fs::File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    f.write_all(content.as_bytes())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn parse_sign(field: &str, path: &Path, line: usize) -> Result<Sign, String> {
    field
        .trim()
        .parse::<i64>()
        .ok()
        .and_then(|v| Sign::from_int(v).ok())
        .ok_or_else(|| {
            format!(
                "{}:{line}: label must be 1 or -1, got `{field}`",
                path.display()
            )
        })
}

fn parse_floats(fields: &[&str], path: &Path, line: usize) -> Result<Vec<f64>, String> {
    fields
        .iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| format!("{}:{line}: bad number `{f}`", path.display()))
        })
        .collect()
}

pub fn read_pairs_csv(path: &Path) -> Result<Vec<LabeledPair>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format!("{}: empty file", path.display()))?;
    let cols = header.split(',').count();
    if cols < 3 || cols % 2 == 0 || !header.starts_with("s,") {
        return Err(format!(
            "{}: pair header must be s,x0..,xp0.. with equal halves",
            path.display()
        ));
    }
    let dim = (cols - 1) / 2;
    let mut pairs = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(format!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                i + 1,
                cols,
                fields.len()
            ));
        }
        let sd = parse_sign(fields[0], path, i + 1)?;
        let first = parse_floats(&fields[1..1 + dim], path, i + 1)?;
        let second = parse_floats(&fields[1 + dim..], path, i + 1)?;
        pairs.push(
            LabeledPair::new(first, second, sd)
                .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?,
        );
    }
    Ok(pairs)
}

pub fn read_test_csv(path: &Path) -> Result<Vec<Sample>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format!("{}: empty file", path.display()))?;
    let cols = header.split(',').count();
    if cols < 2 || !header.starts_with("y,") {
        return Err(format!(
            "{}: test header must be y,x0,..",
            path.display()
        ));
    }
    let mut samples = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(format!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                i + 1,
                cols,
                fields.len()
            ));
        }
        let y = parse_sign(fields[0], path, i + 1)?;
        let features = parse_floats(&fields[1..], path, i + 1)?;
        samples.push(
            Sample::labeled(features, y)
                .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?,
        );
    }
    Ok(samples)
}
