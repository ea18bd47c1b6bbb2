use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

pub const SUBCOMMANDS: [&str; 6] = ["moments", "bingham", "equilibrium", "frank", "smectic", "phase-diagram"];

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("config line {}: expected `key = value`, got `{line}`", no + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') || k.contains(char::is_whitespace) {
            return Err(CliError::Config(format!("config line {}: bad key `{k}`", no + 1)));
        }
        if k == "config" {
            return Err(CliError::Config(format!("config line {}: nested config files are not supported", no + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Insert `--key=value` for every config entry right after the subcommand
/// name, so flags given on the command line (which come later) override them.
pub fn inject_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text)?;
    let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut out = args[..=pos].to_vec();
    out.extend(entries.iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::Config(format!("{what}: `{}` is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("{what}: `{}` is not finite", s.trim())));
    }
    Ok(v)
}

/// Comma-separated numbers.
pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let out: Vec<f64> =
        s.split(',').filter(|p| !p.trim().is_empty()).map(|p| parse_f64(p, what)).collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::Config(format!("{what}: empty list")));
    }
    Ok(out)
}

/// `start:stop:step` (inclusive, step > 0) or a comma-separated list.
pub fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return parse_list(s, what);
    }
    if parts.len() != 3 {
        return Err(CliError::Config(format!("{what}: expected start:stop:step, got `{s}`")));
    }
    let (a, b, h) = (parse_f64(parts[0], what)?, parse_f64(parts[1], what)?, parse_f64(parts[2], what)?);
    if !(h > 0.0) {
        return Err(CliError::Config(format!("{what}: step must be positive")));
    }
    if b < a {
        return Err(CliError::Config(format!("{what}: empty grid {a}:{b}:{h}")));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(CliError::Config(format!("{what}: grid has more than 10^6 points")));
    }
    Ok((0..=n).map(|i| a + h * i as f64).collect())
}

/// `n1,n2,n3`, each at least 1.
pub fn parse_modes(s: &str) -> Result<(usize, usize, usize), CliError> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| CliError::Config(format!("modes: `{}` is not a count", p.trim()))))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c] if a > 0 && b > 0 && c > 0 => Ok((a, b, c)),
        _ => Err(CliError::Config(format!("modes: expected three positive counts, got `{s}`"))),
    }
}
