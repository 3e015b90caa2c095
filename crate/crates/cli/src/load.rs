//! Input resolution: JSON files, or generator names for quick runs.

use std::path::Path;
use std::sync::Arc;

use ncbase::random::{random_system, rng_for};
use ncbase::{make_opsys, Field, Mat, OperatorSpaceRep, OperatorSystem};
use serde::de::DeserializeOwned;

use crate::{Failure, Outcome};

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// `"3"` means levels 1 to 3; `"1,3"` is taken literally.
pub fn parse_levels(spec: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<usize> = spec
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad level list {spec:?}")))
        .collect::<Result<_, _>>()?;
    if parts.contains(&0) {
        return Err("levels start at 1".into());
    }
    Ok(if parts.len() == 1 { (1..=parts[0]).collect() } else { parts })
}

fn suffix_number(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix).and_then(|s| s.parse().ok()).filter(|n| *n > 0)
}

/// `diagN`, `mN`, `random` (seeded, `d` and `dim`), or a system file.
pub fn resolve_system(name: &str, d: usize, dim: Option<usize>, real: bool, seed: u64) -> Outcome<Arc<OperatorSystem>> {
    let field = if real { Field::Real } else { Field::Complex };
    let sys = if let Some(n) = suffix_number(name, "diag") {
        make_opsys(&(0..n).map(|i| Mat::unit(n, n, i, i, Field::Real)).collect::<Vec<_>>())?
    } else if let Some(n) = suffix_number(name, "m") {
        make_opsys(&(0..n * n).map(|k| Mat::unit(n, n, k / n, k % n, field)).collect::<Vec<_>>())?
    } else if name == "random" {
        if d == 0 {
            return Err(Failure::Usage("--d must be positive".into()));
        }
        let max = if real { d * (d + 1) / 2 } else { d * d };
        let dim = dim.unwrap_or((d + 2).min(max));
        if dim == 0 || dim > max {
            return Err(Failure::Usage(format!("--dim must be in [1, {max}] for d = {d}")));
        }
        random_system(&mut rng_for(seed, 0), d, dim, field)?
    } else {
        load_json(Path::new(name))?
    };
    Ok(Arc::new(sys))
}

fn shape(spec: &str) -> Option<(usize, usize)> {
    let (a, b) = spec.split_once('x')?;
    Some((a.parse().ok()?, b.parse().ok()?)).filter(|(a, b)| *a > 0 && *b > 0)
}

/// `randomAxB` (two Gaussian generators), `fullAxB`, `zeroAxB`, or a file.
pub fn resolve_space(spec: &str, seed: u64) -> Outcome<OperatorSpaceRep> {
    let f = Field::Complex;
    if let Some((a, b)) = spec.strip_prefix("random").and_then(shape) {
        let dim = 2.min(a * b);
        return Ok(OperatorSpaceRep::random(&mut rng_for(seed, 1), a, b, dim, f)?);
    }
    if let Some((a, b)) = spec.strip_prefix("full").and_then(shape) {
        return Ok(OperatorSpaceRep::full(a, b, f));
    }
    if let Some((a, b)) = spec.strip_prefix("zero").and_then(shape) {
        return Ok(OperatorSpaceRep::zero(a, b, f));
    }
    load_json(Path::new(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels() {
        assert_eq!(parse_levels("3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_levels("1, 3").unwrap(), vec![1, 3]);
        assert!(parse_levels("0").is_err());
        assert!(parse_levels("two").is_err());
    }

    #[test]
    fn names() {
        assert_eq!(resolve_system("diag4", 3, None, false, 0).ok().unwrap().dim(), 4);
        assert_eq!(resolve_system("m3", 3, None, false, 0).ok().unwrap().dim(), 9);
        assert_eq!(resolve_system("random", 4, Some(6), false, 7).ok().unwrap().dim(), 6);
        assert!(resolve_system("random", 2, Some(9), false, 7).is_err());
        assert_eq!(resolve_space("full2x2", 0).ok().unwrap().dim(), 4);
        assert_eq!(resolve_space("random2x3", 0).ok().unwrap().shape(), (2, 3));
    }
}
