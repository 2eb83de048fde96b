//! Entry specs of the form `(x, y) dir (a, b)`; the direction part is
//! optional.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct EntrySpec {
    pub point: Vec<f64>,
    pub direction: Option<Vec<f64>>,
}

fn tuple(s: &str) -> Result<Vec<f64>, String> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("expected a parenthesized tuple, got `{t}`"))?;
    inner
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{}`", c.trim()))
        })
        .collect()
}

impl FromStr for EntrySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, d) = match s.split_once("dir") {
            Some((p, d)) => (p, Some(d)),
            None => (s, None),
        };
        let point = tuple(p)?;
        let direction = d.map(tuple).transpose()?;
        if let Some(d) = &direction {
            if d.len() != point.len() {
                return Err("point and direction differ in length".into());
            }
            if d.iter().all(|c| *c == 0.0) {
                return Err("direction is zero".into());
            }
        }
        Ok(EntrySpec { point, direction })
    }
}
