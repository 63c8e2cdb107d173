use crate::commands::CliError;

/// `a..b` or `a..=b` (both inclusive) or a comma list.
pub fn retained_counts(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse r values '{spec}'; use e.g. 1..45 or 1,8,15"));
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    spec.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

/// Digits needed to print multiples of `step` without float noise.
pub fn decimals_for(step: f64) -> usize {
    (0..=15)
        .find(|&p| {
            let scaled = step * 10f64.powi(p as i32);
            (scaled - scaled.round()).abs() <= 1e-9 * scaled.max(1.0)
        })
        .unwrap_or(15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(retained_counts("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(retained_counts("3..=5").unwrap(), vec![3, 4, 5]);
        assert_eq!(retained_counts("1, 15,64").unwrap(), vec![1, 15, 64]);
        assert!(retained_counts("5..2").is_err());
        assert!(retained_counts("x").is_err());
    }

    #[test]
    fn step_decimals() {
        assert_eq!(decimals_for(0.001), 3);
        assert_eq!(decimals_for(0.25), 2);
        assert_eq!(decimals_for(0.1), 1);
        assert_eq!(decimals_for(0.5), 1);
    }
}
