//! Parsers for the compact value syntaxes accepted on the command line.

use std::str::FromStr;

/// Inclusive leaf interval `i:j`.
pub fn parse_interval(s: &str) -> Result<(u64, u64), String> {
    let (i, j) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `i:j`, got `{s}`"))?;
    Ok((number(i)?, number(j)?))
}

/// Comma-separated list such as `1,2,4,8`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(number).collect()
}

/// Super-operator dimensions `dA:dB` (with `dE = dB`) or `dA:dB:dE`.
pub fn parse_spec(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b] => {
            let b = number(b)?;
            Ok((number(a)?, b, b))
        }
        [a, b, e] => Ok((number(a)?, number(b)?, number(e)?)),
        _ => Err(format!("expected `dA:dB` or `dA:dB:dE`, got `{s}`")),
    }
}

pub fn parse_specs(s: &str) -> Result<Vec<(usize, usize, usize)>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(parse_spec).collect()
}

fn number<T: FromStr>(s: &str) -> Result<T, String> {
    let t = s.trim();
    t.parse().map_err(|_| format!("`{t}` is not a valid number"))
}
