//! Thermodynamic formalism at desk scale: Birkhoff sums of the distortion
//! function, periodic-orbit pressure approximants, the dimension as the
//! pressure zero, equilibrium-state approximations, and the logarithmic
//! integral used by the counting reports.

use serde::Serialize;

use crate::map::RationalMap;
use crate::orbits::OrbitDatabase;
use crate::{Error, Result, C64};

/// Birkhoff sums (tau_n, theta_n) of log|f'| and arg f' along the orbit of
/// x. The angle is accumulated term by term and reduced mod 2pi at the
/// end, into (-pi, pi].
pub fn tau_theta_n(map: &RationalMap, x: C64, n: usize) -> Result<(f64, f64)> {
    let mut tau = 0.0_f64;
    let mut theta = 0.0_f64;
    let mut z = x;
    for _ in 0..n {
        let d = map.derivative(z)?;
        let mag = d.norm();
        if mag < 1e-12 {
            return Err(Error::CriticalProximity { distance: mag });
        }
        tau += mag.ln();
        theta += d.im.atan2(d.re);
        z = map.evaluate(z)?;
    }
    Ok((tau, reduce_angle(theta)))
}

/// Reduces an angle to (-pi, pi].
pub fn reduce_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = theta.rem_euclid(two_pi);
    if a > std::f64::consts::PI {
        a -= two_pi;
    }
    if a == -std::f64::consts::PI {
        a = std::f64::consts::PI;
    }
    a
}

/// The periodic-orbit pressure approximant
/// P_n(s) = (1/n) log sum_{f^n x = x} |(f^n)'(x)|^{-s},
/// evaluated from the primitive orbits of the divisor levels: a primitive
/// m-orbit contributes m points with |(f^n)'| = |lambda|^{n/m}.
pub fn pressure_n(db: &OrbitDatabase, s: f64, n: usize) -> Result<f64> {
    Ok(pressure_n_with_derivative(db, s, n)?.0)
}

/// (P_n(s), dP_n/ds); the derivative is -(1/n) times the weighted mean of
/// tau_n, which Newton polishing of the pressure zero uses.
pub fn pressure_n_with_derivative(db: &OrbitDatabase, s: f64, n: usize) -> Result<(f64, f64)> {
    if !db.has_level(n) {
        return Err(Error::EmptyLevel { level: n });
    }
    let mut sum = 0.0_f64;
    let mut weighted_tau = 0.0_f64;
    for orbit in &db.orbits {
        let m = orbit.period;
        if n % m != 0 {
            continue;
        }
        let tau_n = (n / m) as f64 * orbit.tau();
        let term = m as f64 * (-s * tau_n).exp();
        sum += term;
        weighted_tau += term * tau_n;
    }
    if sum <= 0.0 {
        return Err(Error::EmptyLevel { level: n });
    }
    let p = sum.ln() / n as f64;
    let dp = -weighted_tau / sum / n as f64;
    Ok((p, dp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaMethod {
    PeriodicOrbit,
    LeadingEigenvalue,
}

/// Per-level pressure zeros and the extrapolated dimension estimate.
#[derive(Debug, Clone, Serialize)]
pub struct PressureEstimate {
    pub per_level: Vec<(usize, f64)>,
    pub delta: f64,
    /// |delta_{n_max} - delta_{n_max - 1}|.
    pub uncertainty: f64,
    pub method: DeltaMethod,
}

/// Zero of s -> P_n(s) in [0, 2]: bisection to width 1e-4, then five
/// Newton steps with the analytic derivative.
pub fn delta_level(db: &OrbitDatabase, n: usize) -> Result<f64> {
    let (p0, _) = pressure_n_with_derivative(db, 0.0, n)?;
    let (p2, _) = pressure_n_with_derivative(db, 2.0, n)?;
    if p0 <= 0.0 || p2 >= 0.0 {
        return Err(Error::BracketFailure {
            s_left: 0.0,
            p_left: p0,
            s_right: 2.0,
            p_right: p2,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        let (p, _) = pressure_n_with_derivative(db, mid, n)?;
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..5 {
        let (p, dp) = pressure_n_with_derivative(db, s, n)?;
        if dp == 0.0 {
            break;
        }
        s -= p / dp;
    }
    Ok(s)
}

/// Dimension estimate from the pressure zeros over an inclusive level
/// range, Aitken-accelerated over the last three levels.
pub fn estimate_delta(db: &OrbitDatabase, n_min: usize, n_max: usize) -> Result<PressureEstimate> {
    if n_min < 1 || n_max > db.n_max || n_min > n_max {
        return Err(Error::Invalid(format!(
            "level range {n_min}..={n_max} outside database (n_max {})",
            db.n_max
        )));
    }
    let mut per_level = Vec::new();
    for n in n_min..=n_max {
        per_level.push((n, delta_level(db, n)?));
    }
    let k = per_level.len();
    let delta = if k >= 3 {
        let (x0, x1, x2) = (
            per_level[k - 3].1,
            per_level[k - 2].1,
            per_level[k - 1].1,
        );
        let denom = x2 - 2.0 * x1 + x0;
        if denom.abs() > 1e-15 {
            x2 - (x2 - x1) * (x2 - x1) / denom
        } else {
            x2
        }
    } else {
        per_level[k - 1].1
    };
    let uncertainty = if k >= 2 {
        (per_level[k - 1].1 - per_level[k - 2].1).abs()
    } else {
        f64::NAN
    };
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::Invalid(format!(
            "extrapolated dimension {delta} escaped (0, 2)"
        )));
    }
    Ok(PressureEstimate {
        per_level,
        delta,
        uncertainty,
        method: DeltaMethod::PeriodicOrbit,
    })
}

/// Weighted point set approximating the equilibrium state of -delta tau:
/// period-n points weighted by |(f^n)'|^{-delta}, normalized.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
    pub level: usize,
    pub exponent: f64,
}

impl EmpiricalMeasure {
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn equilibrium_weights(
    db: &OrbitDatabase,
    map: &RationalMap,
    n: usize,
    delta: f64,
) -> Result<EmpiricalMeasure> {
    let level = db.level_points(map, n)?;
    let mut points = Vec::with_capacity(level.len());
    let mut weights = Vec::with_capacity(level.len());
    for lp in &level {
        let orbit = &db.orbits[lp.orbit_index];
        let tau_n = (n / lp.min_period) as f64 * orbit.tau();
        points.push(lp.point);
        weights.push((-delta * tau_n).exp());
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyLevel { level: n });
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(EmpiricalMeasure {
        points,
        weights,
        level: n,
        exponent: delta,
    })
}

/// Li(t) = integral from 2 to t of ds / log s, by composite Gauss-Legendre
/// after the substitution u = log s, with panel doubling until the value
/// settles (absolute target 1e-10).
pub fn li(t: f64) -> Result<f64> {
    if !(t >= 2.0) || !t.is_finite() {
        return Err(Error::DomainError {
            value: t,
            reason: "Li(t) needs t >= 2".into(),
        });
    }
    if t == 2.0 {
        return Ok(0.0);
    }
    let a = 2.0_f64.ln();
    let b = t.ln();
    let integrand = |u: f64| u.exp() / u;
    let mut panels = ((b - a).ceil() as usize + 4).max(8);
    let mut value = gauss_composite(&integrand, a, b, panels);
    for _ in 0..10 {
        panels *= 2;
        let refined = gauss_composite(&integrand, a, b, panels);
        let change = (refined - value).abs();
        value = refined;
        if change <= 1e-10_f64.max(1e-14 * value.abs()) {
            break;
        }
    }
    Ok(value)
}

/// 10-point Gauss-Legendre nodes on [-1, 1] (positive half).
const GL_NODES: [(f64, f64); 5] = [
    (0.148874338981631211, 0.295524224714752870),
    (0.433395394129247191, 0.269266719309996355),
    (0.679409568299024406, 0.219086362515982044),
    (0.865063366688984511, 0.149451349150580593),
    (0.973906528517171720, 0.066671344308688138),
];

fn gauss_composite(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in GL_NODES {
            acc += w * (f(mid + half * x) + f(mid - half * x));
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::detect_full_shift;
    use crate::fixtures;
    use crate::orbits::{Backend, OrbitDatabase, Tolerances, DEFAULT_DEGREE_CAP};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2_db(n_max: usize) -> (RationalMap, OrbitDatabase) {
        let map = fixtures::named_map("z2").unwrap();
        let scheme = fixtures::named_coding("z2").unwrap();
        let db = OrbitDatabase::build(
            &map,
            Some(&scheme),
            n_max,
            Backend::Symbolic,
            DEFAULT_DEGREE_CAP,
            Tolerances::default(),
        )
        .unwrap();
        (map, db)
    }

    #[test]
    fn tau_theta_spec_values() {
        let z2m6 = RationalMap::quadratic(c(-6.0, 0.0));
        let (tau, theta) = tau_theta_n(&z2m6, c(3.0, 0.0), 1).unwrap();
        assert!((tau - 6.0_f64.ln()).abs() < 1e-14);
        assert_eq!(theta, 0.0);

        let z2p5 = RationalMap::quadratic(c(5.0, 0.0));
        let fp = c(0.5, 19.0_f64.sqrt() / 2.0);
        let (tau, theta) = tau_theta_n(&z2p5, fp, 1).unwrap();
        assert!((tau - 0.5 * 20.0_f64.ln()).abs() < 1e-12);
        assert!((theta - 19.0_f64.sqrt().atan2(1.0)).abs() < 1e-12);
    }

    #[test]
    fn tau_theta_on_circle_points() {
        // At period-n points of z^2, tau_n = n log 2 and the holonomy
        // closes up: e^{i theta_n} = 1.
        let (map, db) = z2_db(5);
        for orbit in db.orbits_of_period(5) {
            let (tau, theta) = tau_theta_n(&map, orbit.representative, 5).unwrap();
            assert!((tau - 5.0 * 2.0_f64.ln()).abs() < 1e-10);
            let closes = theta.abs() < 1e-10
                || (theta.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-10;
            assert!(closes, "theta_5 = {theta}");
        }
    }

    #[test]
    fn tau_chain_rule() {
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let db = OrbitDatabase::build(
            &map,
            Some(&scheme),
            6,
            Backend::Symbolic,
            DEFAULT_DEGREE_CAP,
            Tolerances::default(),
        )
        .unwrap();
        let x = db.orbits_of_period(6).next().unwrap().representative;
        let (m, n) = (2usize, 4usize);
        let (tau_mn, theta_mn) = tau_theta_n(&map, x, m + n).unwrap();
        let (tau_m, theta_m) = tau_theta_n(&map, x, m).unwrap();
        let fmx = map.iterate_with_derivative(x, m).unwrap().0;
        let (tau_n, theta_n) = tau_theta_n(&map, fmx, n).unwrap();
        assert!((tau_mn - tau_m - tau_n).abs() < 1e-9);
        let diff = reduce_angle(theta_mn - theta_m - theta_n);
        let closes = diff.abs() < 1e-9
            || (diff.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-9;
        assert!(closes, "theta chain defect {diff}");
    }

    #[test]
    fn critical_proximity_detected() {
        let map = RationalMap::quadratic(c(0.0, 0.0));
        assert!(matches!(
            tau_theta_n(&map, c(0.0, 0.0), 1),
            Err(Error::CriticalProximity { .. })
        ));
    }

    #[test]
    fn pressure_closed_form_monomial() {
        // P_n(s) = (1/n) log((2^n - 1) 2^{-ns}) for the circle map.
        let (_, db) = z2_db(8);
        for (n, s) in [(8usize, 1.0_f64), (8, 0.0), (8, 0.37), (5, 1.3)] {
            let got = pressure_n(&db, s, n).unwrap();
            let expect = (((1u64 << n) - 1) as f64).ln() / n as f64 - s * 2.0_f64.ln();
            assert!(
                (got - expect).abs() < 1e-12,
                "n={n} s={s}: {got} vs {expect}"
            );
        }
        // Spot values from the closed form.
        assert!((pressure_n(&db, 1.0, 8).unwrap() + 4.894e-4).abs() < 1e-6);
        assert!((pressure_n(&db, 0.0, 8).unwrap() - 255.0_f64.ln() / 8.0).abs() < 1e-12);
    }

    #[test]
    fn pressure_strictly_decreasing_in_s() {
        let (_, db) = z2_db(6);
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let s = 0.25 * k as f64;
            let p = pressure_n(&db, s, 6).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn delta_of_monomial_is_one() {
        let (_, db) = z2_db(10);
        let d8 = delta_level(&db, 8).unwrap();
        assert!((d8 - 0.999293).abs() < 1e-5, "delta_8 = {d8}");
        let est = estimate_delta(&db, 4, 10).unwrap();
        assert!((est.delta - 1.0).abs() < 1e-4, "delta = {}", est.delta);
        assert!(est.uncertainty < 1e-3);
        // Per-level zeros solve the closed form log(2^n - 1)/(n log 2).
        for &(n, dn) in &est.per_level {
            let expect = (((1u64 << n) - 1) as f64).ln() / (n as f64 * 2.0_f64.ln());
            assert!((dn - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn delta_of_real_cantor_map_below_one() {
        let map = RationalMap::quadratic(c(-6.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let db = OrbitDatabase::build(
            &map,
            Some(&scheme),
            10,
            Backend::Symbolic,
            DEFAULT_DEGREE_CAP,
            Tolerances::default(),
        )
        .unwrap();
        let est = estimate_delta(&db, 4, 10).unwrap();
        assert!(est.delta > 0.0 && est.delta < 1.0, "delta = {}", est.delta);
    }

    #[test]
    fn equilibrium_weights_uniform_for_monomial() {
        let (map, db) = z2_db(8);
        let measure = equilibrium_weights(&db, &map, 8, 1.0).unwrap();
        let count = (1usize << 8) - 1;
        assert_eq!(measure.points.len(), count);
        assert!((measure.total_mass() - 1.0).abs() < 1e-12);
        for &w in &measure.weights {
            assert!((w - 1.0 / count as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_weights_favor_small_multipliers() {
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let db = OrbitDatabase::build(
            &map,
            Some(&scheme),
            8,
            Backend::Symbolic,
            DEFAULT_DEGREE_CAP,
            Tolerances::default(),
        )
        .unwrap();
        let est = estimate_delta(&db, 4, 8).unwrap();
        let measure = equilibrium_weights(&db, &map, 8, est.delta).unwrap();
        assert!((measure.total_mass() - 1.0).abs() < 1e-12);
        // Compare a small-multiplier point's weight against a large one.
        let level = db.level_points(&map, 8).unwrap();
        let mut lo = (f64::INFINITY, 0.0);
        let mut hi = (0.0_f64, 0.0);
        for (lp, &w) in level.iter().zip(&measure.weights) {
            let lam = db.orbits[lp.orbit_index]
                .abs_multiplier
                .powf((8 / lp.min_period) as f64);
            if lam < lo.0 {
                lo = (lam, w);
            }
            if lam > hi.0 {
                hi = (lam, w);
            }
        }
        assert!(lo.1 > hi.1, "weights should decrease with |multiplier|");
    }

    #[test]
    fn li_matches_independent_quadrature() {
        // Oracle: composite Simpson with a million panels directly on
        // ds / log s.
        let t = 4.0_f64;
        let panels = 1 << 20;
        let h = (t - 2.0) / panels as f64;
        let f = |s: f64| 1.0 / s.ln();
        let mut acc = f(2.0) + f(t);
        for k in 1..panels {
            let x = 2.0 + k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        let oracle = acc * h / 3.0;
        let got = li(t).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn li_edge_cases_and_asymptotics() {
        assert_eq!(li(2.0).unwrap(), 0.0);
        assert!(matches!(li(1.5), Err(Error::DomainError { .. })));
        let t = 1e6;
        let ratio = li(t).unwrap() * t.ln() / t;
        assert!((ratio - 1.0).abs() < 0.1, "asymptotic ratio {ratio}");
    }
}
