//! `start:stop:step` parameter grids with exact decimal stepping.

use anyhow::{bail, Context, Result};

/// A decimal as `digits * 10^-scale`.
#[derive(Copy, Clone, Debug, PartialEq)]
struct Decimal {
    digits: i128,
    scale: u32,
}

impl Decimal {
    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
            || frac.len() > 18
        {
            bail!("not a decimal number: {s:?}");
        }
        let digits: i128 = format!("{int}{frac}").parse().with_context(|| format!("bad number {s:?}"))?;
        Ok(Decimal { digits: if neg { -digits } else { digits }, scale: frac.len() as u32 })
    }

    fn rescale(self, scale: u32) -> i128 {
        self.digits * 10i128.pow(scale - self.scale)
    }
}

fn render(digits: i128, scale: u32) -> f64 {
    let sign = if digits < 0 { "-" } else { "" };
    let abs = digits.unsigned_abs();
    let p = 10u128.pow(scale);
    let text = if scale == 0 {
        format!("{sign}{abs}")
    } else {
        format!("{sign}{}.{:0width$}", abs / p, abs % p, width = scale as usize)
    };
    text.parse().expect("formatted decimal parses")
}

/// Parses `start:stop:step` (or a single value). The grid starts at `start`
/// and keeps every point not beyond `stop`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (start, stop, step) = match parts.as_slice() {
        [v] => {
            let d = Decimal::parse(v)?;
            (d, d, Decimal { digits: 1, scale: 0 })
        }
        [a, b, c] => (Decimal::parse(a)?, Decimal::parse(b)?, Decimal::parse(c)?),
        _ => bail!("grid must be a value or start:stop:step, got {spec:?}"),
    };
    let scale = start.scale.max(stop.scale).max(step.scale);
    let (a, b, s) = (start.rescale(scale), stop.rescale(scale), step.rescale(scale));
    if s <= 0 {
        bail!("grid step must be positive, got {spec:?}");
    }
    if a > b {
        bail!("empty grid {spec:?}: start is beyond stop");
    }
    let count = (b - a) / s + 1;
    if count > 100_000 {
        bail!("grid {spec:?} has {count} points");
    }
    Ok((0..count).map(|k| render(a + k * s, scale)).collect())
}

/// Comma-separated sizes.
pub fn parse_sizes(spec: &str) -> Result<Vec<u32>> {
    let sizes: Vec<u32> = spec
        .split(',')
        .map(|s| s.trim().parse::<u32>().with_context(|| format!("bad size {s:?}")))
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        bail!("no sizes given");
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_steps() {
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("0.3:0.3:0.1").unwrap(), vec![0.3]);
        assert_eq!(parse_grid("0.3").unwrap(), vec![0.3]);
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0.5:0.71:0.1").unwrap(), vec![0.5, 0.6, 0.7]);
        assert!(parse_grid("0.7:0.3:0.1").is_err());
        assert!(parse_grid("0.1:0.3:0").is_err());
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert!(parse_sizes("8,x").is_err());
    }
}
