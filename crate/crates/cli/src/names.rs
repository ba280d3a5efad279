//! Element names used in flags.
//!
//! `I` is the identity, `E<i><j>` (or `E<i>,<j>` once `d > 9`) the 1-based
//! matrix unit, `g<k>` the k-th generator listed in the system file, and a
//! bare integer or `b<k>` the k-th canonical basis element.

use ncjoin_core::numerics::CMatrix;

use crate::files::LoadedSystem;
use crate::CliError;

const MEMBERSHIP_TOL: f64 = 1e-9;

fn parse_unit(rest: &str, d: usize) -> Option<(usize, usize)> {
    let (i, j) = if let Some((i, j)) = rest.split_once([',', '_']) {
        (i.parse().ok()?, j.parse().ok()?)
    } else if rest.len() == 2 && d <= 9 {
        let mut chars = rest.chars();
        (chars.next()?.to_digit(10)? as usize, chars.next()?.to_digit(10)? as usize)
    } else {
        return None;
    };
    (1..=d).contains(&i).then_some(())?;
    (1..=d).contains(&j).then_some(())?;
    Some((i - 1, j - 1))
}

/// Resolves `name` to a matrix that lies in the system's algebra.
pub fn resolve(name: &str, loaded: &LoadedSystem) -> Result<CMatrix, CliError> {
    let algebra = &loaded.sys.algebra;
    let d = algebra.hilbert_dim();
    let bad = || CliError::Usage(format!("unknown element name {name:?}"));
    let m = if name == "I" {
        CMatrix::identity(d)
    } else if let Some(rest) = name.strip_prefix('E') {
        let (i, j) = parse_unit(rest, d).ok_or_else(bad)?;
        CMatrix::unit(d, i, j)
    } else if let Some(rest) = name.strip_prefix('g') {
        let k: usize = rest.parse().map_err(|_| bad())?;
        loaded
            .generators
            .get(k)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("generator index {k} out of range")))?
    } else {
        let k: usize = name.strip_prefix('b').unwrap_or(name).parse().map_err(|_| bad())?;
        algebra
            .basis()
            .get(k)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("basis index {k} out of range")))?
    };
    let residual = algebra.residual(&m);
    if residual > MEMBERSHIP_TOL * (1.0 + m.frobenius_norm()) {
        return Err(CliError::Usage(format!(
            "element {name} is not in the algebra (residual {residual:.3e})"
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_names() {
        assert_eq!(parse_unit("12", 2), Some((0, 1)));
        assert_eq!(parse_unit("3", 2), None);
        assert_eq!(parse_unit("31", 2), None);
        assert_eq!(parse_unit("10,2", 12), Some((9, 1)));
        assert_eq!(parse_unit("1_1", 2), Some((0, 0)));
    }
}
