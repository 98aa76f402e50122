//! Reading samples: one decimal value per line, `#` starts a comment.

use std::fs;
use std::io::{self, Read};
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parse sample text. Blank and comment-only lines are skipped; anything
/// else must be a finite number.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v: f64 = content
            .parse()
            .map_err(|_| anyhow::anyhow!("line {}: cannot parse {content:?} as a number", k + 1))?;
        if !v.is_finite() {
            bail!("line {}: value {content:?} is not finite", k + 1);
        }
        values.push(v);
    }
    if values.is_empty() {
        bail!("input contains no values");
    }
    Ok(values)
}

/// Read values from `path`, or from standard input when `path` is `-`.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_values(&text).with_context(|| format!("in {}", path.display()))
}
