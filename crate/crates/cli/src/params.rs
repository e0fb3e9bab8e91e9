//! Integer lists and ranges on the command line: `5`, `1,2,3`, `2..50`
//! (inclusive), `2..=50`, and comma-separated mixtures such as `1,4..6`.

use std::collections::BTreeSet;

pub fn parse_values(text: &str) -> Result<Vec<usize>, String> {
    let mut out = BTreeSet::new();
    for piece in text.split(',').map(str::trim) {
        if piece.is_empty() {
            return Err(format!("empty item in {text:?}"));
        }
        if let Some((lo, hi)) = piece.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let (lo, hi) = (number(lo)?, number(hi)?);
            if lo > hi {
                return Err(format!("range {piece:?} is empty"));
            }
            out.extend(lo..=hi);
        } else {
            out.insert(number(piece)?);
        }
    }
    Ok(out.into_iter().collect())
}

fn number(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("{s:?} is not a non-negative integer"))
}

/// A single `N,k,d` triple.
pub fn parse_case(text: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [n, k, d] => Ok((number(n)?, number(k)?, number(d)?)),
        _ => Err(format!("case {text:?} must be N,k,d")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_values("5").unwrap(), vec![5]);
        assert_eq!(parse_values("3,1,2").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_values("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_values("2..=4, 9").unwrap(), vec![2, 3, 4, 9]);
        assert!(parse_values("5..2").is_err());
        assert!(parse_values("").is_err());
        assert!(parse_values("1,,2").is_err());
        assert!(parse_values("x").is_err());
    }

    #[test]
    fn cases() {
        assert_eq!(parse_case("2,1,2").unwrap(), (2, 1, 2));
        assert!(parse_case("2,1").is_err());
    }
}
