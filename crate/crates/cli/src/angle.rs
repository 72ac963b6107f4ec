//! Angles given either in radians or as multiples of π.

/// Parses `1.2`, `pi`, `-pi/4`, `3pi/4`, `0.5*pi`, `2π/3`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text
        .trim()
        .to_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let bad = || format!("cannot read angle {text:?}");
    let Some((coef, rest)) = s.split_once("pi") else {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    };
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let factor = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    let value = factor * std::f64::consts::PI / divisor;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}
