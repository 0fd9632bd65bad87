//! Named example maps used by the CLI and the test suite.
//!
//! `z2` comes with a hand-made Markov coding of the unit circle by three
//! arcs (the full-shift detector rightly refuses monomials, whose Julia
//! set is connected). The arc partition doubles onto pairs of arcs, so the
//! transition matrix has exactly two ones per row and column.

use crate::coding::{CodingScheme, UserMarkovConfig};
use crate::map::RationalMap;
use crate::{Error, Result, C64};

pub const NAMES: [&str; 4] = ["z2", "z2m6", "z2p5", "z2p2p2i"];

pub fn named_map(name: &str) -> Result<RationalMap> {
    let c = match name {
        "z2" => C64::new(0.0, 0.0),
        "z2m6" => C64::new(-6.0, 0.0),
        "z2p5" => C64::new(5.0, 0.0),
        "z2p2p2i" => C64::new(2.0, 2.0),
        _ => {
            return Err(Error::Invalid(format!(
                "unknown map name '{name}'; built-ins are {NAMES:?}"
            )))
        }
    };
    Ok(RationalMap::quadratic(c))
}

/// The three-arc Markov coding for z^2 on the unit circle. Arc j spans
/// angles [2 pi j / 3, 2 pi (j+1) / 3]; doubling maps each arc onto the
/// union of two arcs.
pub fn z2_circle_coding_config() -> UserMarkovConfig {
    let samples_per_arc = 64usize;
    let pieces = (0..3)
        .map(|j| {
            (0..=samples_per_arc)
                .map(|k| {
                    let angle = 2.0 * std::f64::consts::PI
                        * (j as f64 + k as f64 / samples_per_arc as f64)
                        / 3.0;
                    [angle.cos(), angle.sin()]
                })
                .collect()
        })
        .collect();
    UserMarkovConfig {
        transition: vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]],
        pieces,
    }
}

/// The coding scheme for a named map: the bundled circle coding for `z2`,
/// the detected full shift for the escaping quadratics.
pub fn named_coding(name: &str) -> Result<CodingScheme> {
    let map = named_map(name)?;
    if name == "z2" {
        let mut scheme = CodingScheme::from_user_config(&z2_circle_coding_config())?;
        scheme.measure_contraction(&map)?;
        Ok(scheme)
    } else {
        crate::coding::detect_full_shift(&map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_named_maps_resolve() {
        for name in NAMES {
            let map = named_map(name).unwrap();
            assert_eq!(map.degree(), 2);
            let _ = named_coding(name).unwrap();
        }
        assert!(named_map("nope").is_err());
    }

    #[test]
    fn z2_coding_contracts() {
        let scheme = named_coding("z2").unwrap();
        let k = scheme.contraction();
        assert!(k > 0.0 && k < 1.0, "contraction {k}");
    }
}
