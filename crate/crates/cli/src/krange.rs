//! k-range expressions: `a..b` (inclusive), `a..b..step`, and
//! `log:a..b:count` for log-spaced integer grids.

pub fn parse_k_range(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("log:") {
        let (range, count) = rest
            .rsplit_once(':')
            .ok_or_else(|| format!("bad log range '{text}', expected log:a..b:count"))?;
        let (a, b) = split_range(range)?;
        let count: usize = count
            .parse()
            .map_err(|_| format!("bad count in '{text}'"))?;
        if count < 2 {
            return Err("log range needs count >= 2".into());
        }
        if a < 1 || b < a {
            return Err(format!("need 1 <= a <= b in '{text}'"));
        }
        let (la, lb) = ((a as f64).ln(), (b as f64).ln());
        let mut ks: Vec<u64> = (0..count)
            .map(|i| match i {
                0 => a,
                _ if i == count - 1 => b,
                _ => (la + (lb - la) * i as f64 / (count - 1) as f64).exp().round() as u64,
            })
            .collect();
        ks.sort_unstable();
        ks.dedup();
        return Ok(ks);
    }
    let parts: Vec<&str> = text.split("..").collect();
    match parts.len() {
        2 => {
            let (a, b) = split_range(text)?;
            check_bounds(a, b)?;
            Ok((a..=b).collect())
        }
        3 => {
            let a = parse_u64(parts[0])?;
            let b = parse_u64(parts[1])?;
            let step = parse_u64(parts[2])?;
            check_bounds(a, b)?;
            if step < 1 {
                return Err("step must be >= 1".into());
            }
            Ok((a..=b).step_by(step as usize).collect())
        }
        1 => {
            let a = parse_u64(parts[0])?;
            check_bounds(a, a)?;
            Ok(vec![a])
        }
        _ => Err(format!("bad k range '{text}'")),
    }
}

fn split_range(text: &str) -> Result<(u64, u64), String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("bad range '{text}', expected a..b"))?;
    Ok((parse_u64(a)?, parse_u64(b)?))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    // accept scientific shorthand like 1e6
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 1.0 && v.fract() == 0.0 && v <= 1e15 => Ok(v as u64),
        _ => Err(format!("bad integer '{s}'")),
    }
}

fn check_bounds(a: u64, b: u64) -> Result<(), String> {
    if a < 1 {
        return Err("k must be >= 1".into());
    }
    if b < a {
        return Err(format!("empty range {a}..{b}").to_string());
    }
    if b - a > 5_000_000 {
        return Err("range too large (over 5e6 points)".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_ranges() {
        assert_eq!(parse_k_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_k_range("2..10..3").unwrap(), vec![2, 5, 8]);
        assert_eq!(parse_k_range("7").unwrap(), vec![7]);
        assert!(parse_k_range("0..3").is_err());
        assert!(parse_k_range("5..2").is_err());
        assert!(parse_k_range("a..b").is_err());
    }

    #[test]
    fn log_ranges() {
        let ks = parse_k_range("log:1..1000:5").unwrap();
        assert_eq!(ks.first(), Some(&1));
        assert_eq!(ks.last(), Some(&1000));
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert!(parse_k_range("log:1..10").is_err());
        assert!(parse_k_range("log:1..10:1").is_err());
    }

    #[test]
    fn scientific_integers() {
        assert_eq!(parse_k_range("log:1..1e6:3").unwrap().last(), Some(&1_000_000));
    }
}
