//! Sweep-value grammar.
//!
//! Real values: a comma list (`0.2,0.5,0.8`) or a range
//! `start:stop:points[:log]`. Integers: a comma list whose items may be
//! inclusive ranges `a..b`.

pub fn parse_reals(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (start, stop, points, log) = match parts.as_slice() {
            [a, b, n] => (*a, *b, *n, false),
            [a, b, n, "log"] => (*a, *b, *n, true),
            [a, b, n, "lin"] => (*a, *b, *n, false),
            _ => return Err(format!("expected start:stop:points[:log], got '{text}'")),
        };
        let start = parse_real(start)?;
        let stop = parse_real(stop)?;
        let points: usize = points
            .trim()
            .parse()
            .map_err(|_| format!("invalid point count '{points}'"))?;
        if points == 0 {
            return Err("sweep needs at least one point".into());
        }
        if points == 1 {
            return Ok(vec![start]);
        }
        let last = (points - 1) as f64;
        if log {
            if !(start > 0.0 && stop > 0.0) {
                return Err("log sweep needs positive endpoints".into());
            }
            let (ls, le) = (start.ln(), stop.ln());
            Ok((0..points)
                .map(|i| match i {
                    0 => start,
                    i if i == points - 1 => stop,
                    i => (ls + (le - ls) * i as f64 / last).exp(),
                })
                .collect())
        } else {
            Ok((0..points)
                .map(|i| {
                    if i == points - 1 {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / last
                    }
                })
                .collect())
        }
    } else {
        text.split(',').map(parse_real).collect()
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("invalid number '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("value must be finite, got '{s}'"))
    }
}

pub fn parse_ints(text: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if let Some((a, b)) = item.split_once("..") {
            let a: u32 = a
                .trim()
                .parse()
                .map_err(|_| format!("invalid integer '{a}'"))?;
            let b: u32 = b
                .trim()
                .parse()
                .map_err(|_| format!("invalid integer '{b}'"))?;
            if b < a {
                return Err(format!("empty range '{item}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(
                item.parse()
                    .map_err(|_| format!("invalid integer '{item}'"))?,
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_sweeps() {
        assert_eq!(parse_reals("4").unwrap(), vec![4.0]);
        assert_eq!(parse_reals("0.2, 0.5,0.8").unwrap(), vec![0.2, 0.5, 0.8]);
        assert_eq!(parse_reals("0:10:3").unwrap(), vec![0.0, 5.0, 10.0]);
        let l = parse_reals("1:100:3:log").unwrap();
        assert_eq!(l[0], 1.0);
        assert!((l[1] - 10.0).abs() < 1e-12);
        assert_eq!(l[2], 100.0);
        assert!(parse_reals("0:1:0").is_err());
        assert!(parse_reals("0:1:3:log").is_err());
        assert!(parse_reals("abc").is_err());
        assert!(parse_reals("inf").is_err());
    }

    #[test]
    fn int_lists() {
        assert_eq!(parse_ints("2,4,8").unwrap(), vec![2, 4, 8]);
        assert_eq!(parse_ints("1..4,8").unwrap(), vec![1, 2, 3, 4, 8]);
        assert!(parse_ints("4..1").is_err());
        assert!(parse_ints("-1").is_err());
    }
}
