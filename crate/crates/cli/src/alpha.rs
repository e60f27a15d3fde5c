use cocycles::renorm::alpha_from_partial_quotients;
use cocycles::{GOLDEN, SILVER};

/// Parses a frequency: `golden`, `silver`, a decimal, or a partial-quotient
/// list `cf:a1,a2,...` giving [0; a1, a2, ...].
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let s = s.trim();
    match s.to_ascii_lowercase().as_str() {
        "golden" => return Ok(GOLDEN),
        "silver" => return Ok(SILVER),
        _ => {}
    }
    if let Some(list) = s.strip_prefix("cf:") {
        let a = list
            .split(',')
            .map(|v| v.trim().parse::<u64>().map_err(|e| format!("bad partial quotient {v:?}: {e}")))
            .collect::<Result<Vec<u64>, String>>()?;
        return alpha_from_partial_quotients(&a).map_err(|e| e.to_string());
    }
    let v: f64 = s.parse().map_err(|_| format!("cannot read {s:?} as a frequency"))?;
    if !v.is_finite() {
        return Err(format!("frequency {s:?} is not finite"));
    }
    Ok(v)
}

/// A list of frequencies separated by `;`, one per torus coordinate.
pub fn parse_alpha_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(';').map(parse_alpha).collect()
}
