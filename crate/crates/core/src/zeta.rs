//! Holonomy-twisted dynamical zeta functions from the orbit database:
//! level sums Z_n, the truncated log zeta series, Euler products over
//! primitive orbits, and zero/pole scans on truncations.
//!
//! Analytic continuation below the convergence abscissa is never
//! computed; evaluations there carry an explicit validity flag derived
//! from a measured tail bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::orbits::OrbitDatabase;
use crate::thermo::pressure_n;
use crate::{Error, Result, C64};

/// One evaluation of the truncated log zeta with its trust metadata.
#[derive(Debug, Clone, Serialize)]
pub struct ZetaSample {
    pub s: C64,
    pub ell: i64,
    pub log_zeta: C64,
    pub truncation: usize,
    /// Geometric tail estimate for the dropped levels; infinite when the
    /// measured level growth has not turned the series convergent.
    pub tail_bound: f64,
    /// True when the tail bound is below 1e-6.
    pub valid: bool,
}

/// Z_n(s, l) = sum over period-n points of e^{-s tau_n + i l theta_n},
/// assembled from primitive orbits: a primitive m-orbit contributes m
/// points with tau_n = (n/m) log|lambda| and theta_n = (n/m) angle.
pub fn z_n(db: &OrbitDatabase, s: C64, ell: i64, n: usize) -> Result<C64> {
    if !db.has_level(n) {
        return Err(Error::EmptyLevel { level: n });
    }
    let mut acc = C64::new(0.0, 0.0);
    for orbit in &db.orbits {
        let m = orbit.period;
        if n % m != 0 {
            continue;
        }
        let k = (n / m) as f64;
        let tau_n = k * orbit.tau();
        let theta_n = k * orbit.holonomy_angle;
        let phase = -s.im * tau_n + ell as f64 * theta_n;
        acc += C64::from_polar((-s.re * tau_n).exp(), phase) * m as f64;
    }
    Ok(acc)
}

/// Partial sum of log zeta(s, l) = sum_n (1/n) Z_n(s, l) up to n_max
/// levels, with a measured geometric tail bound: dropped levels are
/// estimated by |Z_n| <= e^{n P(Re s)} with P taken from the deepest
/// available level.
pub fn log_zeta_truncated(
    db: &OrbitDatabase,
    s: C64,
    ell: i64,
    n_max: usize,
) -> Result<ZetaSample> {
    if n_max < 1 || n_max > db.n_max {
        return Err(Error::EmptyLevel { level: n_max });
    }
    let mut log_zeta = C64::new(0.0, 0.0);
    for n in 1..=n_max {
        log_zeta += z_n(db, s, ell, n)? / n as f64;
    }
    let growth = pressure_n(db, s.re, n_max)?;
    let r = growth.exp();
    let tail_bound = if r < 1.0 {
        r.powi(n_max as i32 + 1) / ((n_max as f64 + 1.0) * (1.0 - r))
    } else {
        f64::INFINITY
    };
    Ok(ZetaSample {
        s,
        ell,
        log_zeta,
        truncation: n_max,
        tail_bound,
        valid: tail_bound < 1e-6,
    })
}

/// Product over primitive orbits with |lambda| < t_cutoff of
/// (1 - chi_l(holonomy) |lambda|^{-s})^{-1}. The empty product is 1.
pub fn euler_product(db: &OrbitDatabase, s: C64, ell: i64, t_cutoff: f64) -> Result<C64> {
    let (_, slice) = db.query_nt(t_cutoff)?;
    let mut product = C64::new(1.0, 0.0);
    for orbit in slice {
        let tau = orbit.tau();
        let base = C64::from_polar(
            (-s.re * tau).exp(),
            -s.im * tau + ell as f64 * orbit.holonomy_angle,
        );
        let factor = C64::new(1.0, 0.0) - base;
        if factor.norm() < 1e-12 {
            return Err(Error::FactorSingular {
                distance: factor.norm(),
            });
        }
        product /= factor;
    }
    Ok(product)
}

/// Truncated cycle expansion of 1/zeta(s, l): the product over primitive
/// orbits expanded by total topological length and cut at n_max,
///   q_0 = 1,  q_m = -(1/m) sum_{k=1..m} Z_k q_{m-k},
///   1/zeta ~ sum_{m <= n_max} q_m.
/// Unlike the plain truncated product, this polynomial-in-weights
/// truncation vanishes near the zeta pole on the real axis, which is what
/// the pole scan locates.
pub fn inverse_zeta_expansion(db: &OrbitDatabase, s: C64, ell: i64, n_max: usize) -> Result<C64> {
    if n_max < 1 || n_max > db.n_max {
        return Err(Error::EmptyLevel { level: n_max });
    }
    let zs: Vec<C64> = (1..=n_max)
        .map(|n| z_n(db, s, ell, n))
        .collect::<Result<Vec<_>>>()?;
    let mut q = Vec::with_capacity(n_max + 1);
    q.push(C64::new(1.0, 0.0));
    for m in 1..=n_max {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=m {
            acc += zs[k - 1] * q[m - k];
        }
        q.push(-acc / m as f64);
    }
    Ok(q.iter().sum())
}

/// Result of the real-axis pole scan at l = 0.
#[derive(Debug, Clone, Serialize)]
pub struct PoleScanReport {
    /// Grid of (a, truncated 1/zeta(a)) values.
    pub grid: Vec<(f64, f64)>,
    /// Location of the minimum of |1/zeta| over the grid.
    pub min_location: f64,
    pub min_abs: f64,
    /// Sign-change bracket of the cycle expansion, bisected when present.
    pub zero_location: Option<f64>,
}

/// Scans the truncated cycle expansion of 1/zeta(s, 0) on a real-axis
/// grid; the pole of zeta announces itself as a zero crossing.
pub fn scan_pole_real_axis(
    db: &OrbitDatabase,
    a_lo: f64,
    a_hi: f64,
    step: f64,
) -> Result<PoleScanReport> {
    if !(a_lo < a_hi) || !(step > 0.0) {
        return Err(Error::Invalid("bad pole scan range".into()));
    }
    let n_max = db.n_max;
    let count = ((a_hi - a_lo) / step).round() as usize + 1;
    let values: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let a = a_lo + k as f64 * step;
            let v = inverse_zeta_expansion(db, C64::new(a, 0.0), 0, n_max)
                .map(|z| z.re)
                .unwrap_or(f64::NAN);
            (a, v)
        })
        .collect();
    let (mut min_location, mut min_abs) = (a_lo, f64::INFINITY);
    for &(a, v) in &values {
        if v.abs() < min_abs {
            min_abs = v.abs();
            min_location = a;
        }
    }
    // Bisect the first sign change, if any.
    let mut zero_location = None;
    for pair in values.windows(2) {
        let (a0, v0) = pair[0];
        let (a1, v1) = pair[1];
        if v0.is_finite() && v1.is_finite() && v0.signum() != v1.signum() {
            let (mut lo, mut hi) = (a0, a1);
            let mut flo = v0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = inverse_zeta_expansion(db, C64::new(mid, 0.0), 0, n_max)?.re;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zero_location = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(PoleScanReport {
        grid: values,
        min_location,
        min_abs,
        zero_location,
    })
}

/// One grid entry of a rectangle scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub a: f64,
    pub b: f64,
    pub ell: i64,
    pub re_logzeta: f64,
    pub im_logzeta: f64,
    pub abs_zeta: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RectScanReport {
    pub rows: Vec<ScanRow>,
    pub min_abs_zeta: f64,
    pub min_at: (f64, f64),
}

/// Evaluates |zeta(s, l)| via the truncated series on a rectangle grid.
/// Errors with `UntrustworthyRegion` only when the tail bound is infinite
/// at every grid point (no convergence information at all); otherwise
/// per-point validity flags are recorded and the scan proceeds.
pub fn scan_rect(
    db: &OrbitDatabase,
    ell: i64,
    a_range: (f64, f64),
    b_range: (f64, f64),
    step: f64,
) -> Result<RectScanReport> {
    if !(a_range.0 <= a_range.1) || !(b_range.0 <= b_range.1) || !(step > 0.0) {
        return Err(Error::Invalid("bad rectangle".into()));
    }
    let na = ((a_range.1 - a_range.0) / step).round() as usize + 1;
    let nb = ((b_range.1 - b_range.0) / step).round() as usize + 1;
    let rows: Vec<ScanRow> = (0..na)
        .into_par_iter()
        .flat_map_iter(|ia| {
            let a = a_range.0 + ia as f64 * step;
            (0..nb).map(move |ib| (a, b_range.0 + ib as f64 * step))
        })
        .map(|(a, b)| {
            let sample = log_zeta_truncated(db, C64::new(a, b), ell, db.n_max)?;
            Ok(ScanRow {
                a,
                b,
                ell,
                re_logzeta: sample.log_zeta.re,
                im_logzeta: sample.log_zeta.im,
                abs_zeta: sample.log_zeta.re.exp(),
                valid: sample.valid,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().all(|r| !r.abs_zeta.is_finite()) {
        return Err(Error::UntrustworthyRegion(
            "series truncation diverges at every grid point".into(),
        ));
    }
    let mut min_abs_zeta = f64::INFINITY;
    let mut min_at = (a_range.0, b_range.0);
    for r in &rows {
        if r.abs_zeta < min_abs_zeta {
            min_abs_zeta = r.abs_zeta;
            min_at = (r.a, r.b);
        }
    }
    Ok(RectScanReport {
        rows,
        min_abs_zeta,
        min_at,
    })
}
