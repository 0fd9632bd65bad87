//! Prime-orbit counting reports: N_t against Li(t^delta), holonomy Weyl
//! sums pi_l(t), and test-function equidistribution sums.

use serde::Serialize;

use crate::orbits::{OrbitDatabase, PrimitiveOrbit};
use crate::thermo::li;
use crate::{Error, Result, C64};

/// chi_l evaluated at a holonomy given by its principal angle. Angles that
/// are exactly 0 or pi (real multipliers) produce exactly +-1, so sums
/// over real maps stay exactly real and depend on l only through its
/// parity.
pub fn character(angle: f64, ell: i64) -> C64 {
    if ell == 0 || angle == 0.0 {
        return C64::new(1.0, 0.0);
    }
    if angle == std::f64::consts::PI {
        return if ell % 2 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        };
    }
    C64::from_polar(1.0, ell as f64 * angle)
}

#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub t: f64,
    pub n_t: usize,
    pub li_t_delta: f64,
    /// N_t / Li(t^delta) - 1; NaN when the main term vanishes.
    pub rel_error: f64,
    /// Set when t is too small for the asymptotic regime to mean anything
    /// (empty count or t^delta at the lower integration limit).
    pub small_t: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub delta: f64,
    pub rows: Vec<CountRow>,
    /// Least-squares slope of log|N_t - Li(t^delta)| against log t over
    /// the top decade of the grid; NaN when fewer than two usable rows.
    pub beta_hat: f64,
}

/// N_t versus Li(t^delta) over the grid, plus the fitted error exponent.
pub fn count_report(db: &OrbitDatabase, delta: f64, t_grid: &[f64]) -> Result<CountReport> {
    if t_grid.is_empty() {
        return Err(Error::Invalid("empty t grid".into()));
    }
    let t_max = t_grid.iter().cloned().fold(f64::MIN, f64::max);
    let horizon = db.horizon();
    if t_max > horizon {
        return Err(Error::HorizonExceeded { t: t_max, horizon });
    }
    // Orbits are sorted by |multiplier|; count by binary search.
    let abs: Vec<f64> = db.orbits.iter().map(|o| o.abs_multiplier).collect();
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let n_t = abs.partition_point(|&m| m < t);
        let td = t.powf(delta);
        let li_t_delta = if td > 2.0 { li(td)? } else { 0.0 };
        let rel_error = if li_t_delta > 0.0 {
            n_t as f64 / li_t_delta - 1.0
        } else {
            f64::NAN
        };
        rows.push(CountRow {
            t,
            n_t,
            li_t_delta,
            rel_error,
            small_t: n_t == 0 || td <= 2.0,
        });
    }
    let beta_hat = fit_error_exponent(&rows, t_max);
    Ok(CountReport {
        delta,
        rows,
        beta_hat,
    })
}

/// Slope of log|N_t - Li| vs log t over the top decade of the grid.
fn fit_error_exponent(rows: &[CountRow], t_max: f64) -> f64 {
    let cutoff = t_max / 10.0;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= cutoff && !r.small_t)
        .filter_map(|r| {
            let err = (r.n_t as f64 - r.li_t_delta).abs();
            if err > 0.0 {
                Some((r.t.ln(), err.ln()))
            } else {
                None
            }
        })
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return f64::NAN;
    }
    (n * sxy - sx * sy) / denom
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub ells: Vec<i64>,
    pub t_grid: Vec<f64>,
    /// pi[k][j] = pi_{ells[k]}(t_grid[j]).
    pub pi: Vec<Vec<C64>>,
    /// |pi_l(t)| / N_t with pi_0 = N_t.
    pub normalized: Vec<Vec<f64>>,
}

/// Weyl sums pi_l(t) for |l| <= ell_max over the grid.
pub fn weyl_report(db: &OrbitDatabase, ell_max: i64, t_grid: &[f64]) -> Result<WeylReport> {
    if ell_max < 0 {
        return Err(Error::Invalid("ell_max must be nonnegative".into()));
    }
    let t_max = t_grid.iter().cloned().fold(f64::MIN, f64::max);
    let horizon = db.horizon();
    if t_max > horizon {
        return Err(Error::HorizonExceeded { t: t_max, horizon });
    }
    let ells: Vec<i64> = (-ell_max..=ell_max).collect();
    // Prefix sums of the characters along the |multiplier|-sorted orbits
    // turn each t into a binary search.
    let mut pi = Vec::with_capacity(ells.len());
    let mut normalized = Vec::with_capacity(ells.len());
    let abs: Vec<f64> = db.orbits.iter().map(|o| o.abs_multiplier).collect();
    for &ell in &ells {
        let mut prefix = Vec::with_capacity(db.orbits.len() + 1);
        let mut acc = C64::new(0.0, 0.0);
        prefix.push(acc);
        for o in &db.orbits {
            acc += character(o.holonomy_angle, ell);
            prefix.push(acc);
        }
        let mut row = Vec::with_capacity(t_grid.len());
        let mut norm_row = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let idx = abs.partition_point(|&m| m < t);
            let value = prefix[idx];
            row.push(value);
            norm_row.push(if idx > 0 {
                value.norm() / idx as f64
            } else {
                0.0
            });
        }
        pi.push(row);
        normalized.push(norm_row);
    }
    Ok(WeylReport {
        ells,
        t_grid: t_grid.to_vec(),
        pi,
        normalized,
    })
}

/// Detects whether the stored orbit representatives all lie on one circle
/// or one line (a circle through infinity). Returns a human-readable
/// description when they do.
pub fn julia_in_circle(db: &OrbitDatabase) -> Option<String> {
    let pts: Vec<C64> = db.orbits.iter().map(|o| o.representative).collect();
    if pts.len() < 4 {
        return None;
    }
    let scale = pts.iter().map(|p| p.norm()).fold(1.0_f64, f64::max);
    let tol = 1e-6 * scale;
    let p0 = pts[0];
    let p1 = *pts
        .iter()
        .max_by(|a, b| {
            (*a - p0)
                .norm()
                .partial_cmp(&(*b - p0).norm())
                .unwrap()
        })
        .unwrap();
    let dir = p1 - p0;
    let cross = |p: C64| (dir.re * (p.im - p0.im) - dir.im * (p.re - p0.re)).abs() / dir.norm();
    let p2 = *pts
        .iter()
        .max_by(|a, b| cross(**a).partial_cmp(&cross(**b)).unwrap())
        .unwrap();
    if cross(p2) <= tol {
        return Some("the Julia set lies on a line".into());
    }
    // Circumcenter of p0, p1, p2.
    let d = 2.0 * (p0.re * (p1.im - p2.im) + p1.re * (p2.im - p0.im) + p2.re * (p0.im - p1.im));
    if d.abs() < 1e-12 * scale * scale {
        return None;
    }
    let sq = |p: C64| p.re * p.re + p.im * p.im;
    let ux = (sq(p0) * (p1.im - p2.im) + sq(p1) * (p2.im - p0.im) + sq(p2) * (p0.im - p1.im)) / d;
    let uy = (sq(p0) * (p2.re - p1.re) + sq(p1) * (p0.re - p2.re) + sq(p2) * (p1.re - p0.re)) / d;
    let center = C64::new(ux, uy);
    let radius = (p0 - center).norm();
    if pts
        .iter()
        .all(|p| ((p - center).norm() - radius).abs() <= tol)
    {
        Some(format!(
            "the Julia set lies on the circle |z - {center}| = {radius:.6}"
        ))
    } else {
        None
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiSumReport {
    pub t: f64,
    /// Direct sum of psi over the holonomies of the slice.
    pub direct: C64,
    /// The same sum assembled as sum_l a_l pi_l(t).
    pub via_fourier: C64,
    /// a_0 Li(t^delta).
    pub main_term: C64,
    /// |direct| / N_t.
    pub normalized: f64,
    pub n_t: usize,
}

/// Equidistribution sum for a trigonometric polynomial psi given by its
/// Fourier coefficients (l, a_l), computed both directly and through the
/// Weyl sums, with the main-term comparison a_0 Li(t^delta).
///
/// Refuses maps whose Julia set sits in a circle: only the untwisted
/// count carries information there.
pub fn psi_sum(
    db: &OrbitDatabase,
    coeffs: &[(i64, C64)],
    delta: f64,
    t: f64,
) -> Result<PsiSumReport> {
    if let Some(reason) = julia_in_circle(db) {
        return Err(Error::CircleCase(reason));
    }
    let (n_t, slice) = db.query_nt(t)?;
    let psi_at = |orbit: &PrimitiveOrbit| -> C64 {
        coeffs
            .iter()
            .map(|&(ell, a)| a * character(orbit.holonomy_angle, ell))
            .sum()
    };
    let direct: C64 = slice.iter().map(|o| psi_at(o)).sum();
    let mut via_fourier = C64::new(0.0, 0.0);
    for &(ell, a) in coeffs {
        let pi_ell: C64 = slice
            .iter()
            .map(|o| character(o.holonomy_angle, ell))
            .sum();
        via_fourier += a * pi_ell;
    }
    let a0 = coeffs
        .iter()
        .find(|(ell, _)| *ell == 0)
        .map(|&(_, a)| a)
        .unwrap_or(C64::new(0.0, 0.0));
    let td = t.powf(delta);
    let main_term = a0 * if td > 2.0 { li(td)? } else { 0.0 };
    Ok(PsiSumReport {
        t,
        direct,
        via_fourier,
        main_term,
        normalized: if n_t > 0 {
            direct.norm() / n_t as f64
        } else {
            0.0
        },
        n_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::orbits::{Backend, OrbitDatabase, Tolerances, DEFAULT_DEGREE_CAP};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn build(name: &str, n_max: usize) -> OrbitDatabase {
        let map = fixtures::named_map(name).unwrap();
        let scheme = fixtures::named_coding(name).unwrap();
        OrbitDatabase::build(
            &map,
            Some(&scheme),
            n_max,
            Backend::Symbolic,
            DEFAULT_DEGREE_CAP,
            Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn character_exact_values() {
        assert_eq!(character(0.0, 7), c(1.0, 0.0));
        assert_eq!(character(std::f64::consts::PI, 3), c(-1.0, 0.0));
        assert_eq!(character(std::f64::consts::PI, 4), c(1.0, 0.0));
        assert_eq!(character(1.234, 0), c(1.0, 0.0));
        let v = character(0.7, 2);
        assert!((v - C64::from_polar(1.0, 1.4)).norm() < 1e-15);
    }

    #[test]
    fn count_report_monomial_small_t() {
        let db = build("z2", 8);
        // Necklace oracle: N_10 counts periods 1..3 -> 4 orbits.
        let report = count_report(&db, 1.0, &[1.5, 10.0, 100.0]).unwrap();
        assert_eq!(report.rows[0].n_t, 0);
        assert!(report.rows[0].small_t);
        assert_eq!(report.rows[1].n_t, 4);
        assert!(!report.rows[1].small_t);
        // Li(10) from the quadrature; no convergence claim at tiny t, the
        // row simply reports the mismatch.
        let li10 = li(10.0).unwrap();
        assert!((report.rows[1].li_t_delta - li10).abs() < 1e-10);
        assert!(report.rows[1].rel_error.is_finite());
        // Monotone in t.
        assert!(report.rows[2].n_t >= report.rows[1].n_t);
    }

    #[test]
    fn count_report_respects_horizon() {
        let db = build("z2", 6);
        assert!(matches!(
            count_report(&db, 1.0, &[1e9]),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn weyl_pi0_equals_count_exactly() {
        let db = build("z2p2p2i", 8);
        let grid = [5.0_f64, 50.0, 500.0];
        let report = weyl_report(&db, 3, &grid).unwrap();
        let count = count_report(&db, 1.0, &grid).unwrap();
        let zero_idx = report.ells.iter().position(|&l| l == 0).unwrap();
        for (j, row) in count.rows.iter().enumerate() {
            assert_eq!(report.pi[zero_idx][j], c(row.n_t as f64, 0.0));
        }
    }

    #[test]
    fn weyl_conjugation_symmetry_exact() {
        let db = build("z2p2p2i", 8);
        let grid = [20.0_f64, 200.0];
        let report = weyl_report(&db, 4, &grid).unwrap();
        for (k, &ell) in report.ells.iter().enumerate() {
            let neg = report.ells.iter().position(|&l| l == -ell).unwrap();
            for j in 0..grid.len() {
                assert_eq!(report.pi[k][j], report.pi[neg][j].conj());
            }
        }
    }

    #[test]
    fn weyl_real_map_parity() {
        // Holonomies of a real Cantor map are exactly +-1, so pi_l is
        // exactly real and depends on l only mod 2.
        let db = build("z2m6", 8);
        let grid = [50.0_f64, 5000.0];
        let report = weyl_report(&db, 4, &grid).unwrap();
        let idx = |l: i64| report.ells.iter().position(|&x| x == l).unwrap();
        for j in 0..grid.len() {
            for &ell in &report.ells {
                assert_eq!(report.pi[idx(ell)][j].im, 0.0);
            }
            assert_eq!(report.pi[idx(1)][j], report.pi[idx(3)][j]);
            assert_eq!(report.pi[idx(2)][j], report.pi[idx(4)][j]);
            assert_eq!(report.pi[idx(0)][j], report.pi[idx(2)][j]);
        }
    }

    #[test]
    fn circle_maps_are_detected() {
        assert!(julia_in_circle(&build("z2", 7)).is_some());
        assert!(julia_in_circle(&build("z2m6", 7)).is_some());
        assert!(julia_in_circle(&build("z2p5", 7)).is_none());
        assert!(julia_in_circle(&build("z2p2p2i", 7)).is_none());
    }

    #[test]
    fn psi_sum_constant_function() {
        let db = build("z2p2p2i", 8);
        let t = 100.0;
        let report = psi_sum(&db, &[(0, c(1.0, 0.0))], 1.1, t).unwrap();
        let (n_t, _) = db.query_nt(t).unwrap();
        assert_eq!(report.direct, c(n_t as f64, 0.0));
        assert_eq!(report.via_fourier, report.direct);
        let li_val = li(t.powf(1.1)).unwrap();
        assert!((report.main_term - c(li_val, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn psi_sum_cosine_is_re_pi1() {
        let db = build("z2p2p2i", 8);
        let t = 300.0;
        let half = c(0.5, 0.0);
        let report = psi_sum(&db, &[(1, half), (-1, half)], 1.1, t).unwrap();
        let weyl = weyl_report(&db, 1, &[t]).unwrap();
        let idx = weyl.ells.iter().position(|&l| l == 1).unwrap();
        let expect = c(weyl.pi[idx][0].re, 0.0);
        assert!((report.direct - expect).norm() < 1e-12);
        // Two-route consistency.
        assert!((report.direct - report.via_fourier).norm() < 1e-9);
    }

    #[test]
    fn psi_sum_refuses_circle_case() {
        let db = build("z2m6", 6);
        assert!(matches!(
            psi_sum(&db, &[(0, c(1.0, 0.0))], 0.5, 100.0),
            Err(Error::CircleCase(_))
        ));
    }
}
