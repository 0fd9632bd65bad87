//! Rational maps on the sphere: evaluation, iterates with derivatives,
//! hyperbolicity classification and Moebius conjugation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::poly::{roots, Poly};
use crate::{Error, Result, C64};

/// Magnitude treated as an overflow while iterating.
const OVERFLOW_GUARD: f64 = 1e150;

/// A rational map f = p/q in one complex variable.
///
/// For polynomial maps the denominator is the constant 1. The derivative
/// numerator p'q - pq' is precomputed; f'(z) = deriv_num(z) / q(z)^2.
#[derive(Debug, Clone)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
    deriv_num: Poly,
    degree: usize,
}

/// On-disk form: coefficients in ascending degree order, each `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub numerator: Vec<[f64; 2]>,
    pub denominator: Vec<[f64; 2]>,
}

impl RationalMap {
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        let num = Poly::new(num).trimmed(1e-14);
        let den = Poly::new(den).trimmed(1e-14);
        if den.leading().norm() == 0.0 {
            return Err(Error::InvalidMap("denominator is identically zero".into()));
        }
        let degree = num.degree().max(den.degree());
        if degree < 2 {
            return Err(Error::InvalidMap(format!(
                "degree {degree} < 2; need a genuinely rational dynamical system"
            )));
        }
        // Coprimality to tolerance: no denominator root may also kill the
        // numerator.
        if den.degree() >= 1 {
            for r in roots(&den)? {
                let scale: f64 = num.coeffs().iter().map(|c| c.norm()).sum();
                if num.eval(r).norm() <= 1e-9 * scale.max(1.0) {
                    return Err(Error::InvalidMap(format!(
                        "numerator and denominator share a root near {r}"
                    )));
                }
            }
        }
        let deriv_num = num.derivative().mul(&den).sub(&num.mul(&den.derivative()));
        Ok(RationalMap {
            num,
            den,
            deriv_num,
            degree,
        })
    }

    /// Monic polynomial z^d + ... given by ascending coefficients.
    pub fn polynomial(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(coeffs, vec![C64::new(1.0, 0.0)])
    }

    /// The quadratic family z^2 + c.
    pub fn quadratic(c: C64) -> Self {
        Self::polynomial(vec![c, C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
            .expect("quadratic family is always a valid degree-2 map")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// True when every stored coefficient is real; such maps commute with
    /// complex conjugation, which downstream code uses to keep real orbit
    /// data exactly real.
    pub fn has_real_coefficients(&self) -> bool {
        self.num.coeffs().iter().all(|c| c.im == 0.0)
            && self.den.coeffs().iter().all(|c| c.im == 0.0)
    }

    fn check_pole(&self, z: C64) -> Result<C64> {
        let q = self.den.eval(z);
        let scale: f64 = self
            .den
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * z.norm().max(1.0).powi(k as i32))
            .sum();
        if q.norm() <= 1e-14 * scale.max(1e-300) {
            return Err(Error::PoleHit { magnitude: q.norm() });
        }
        Ok(q)
    }

    /// f(z) by Horner evaluation of both halves.
    pub fn evaluate(&self, z: C64) -> Result<C64> {
        let q = self.check_pole(z)?;
        Ok(self.num.eval(z) / q)
    }

    /// f'(z) = (p'q - pq')(z) / q(z)^2.
    pub fn derivative(&self, z: C64) -> Result<C64> {
        let q = self.check_pole(z)?;
        Ok(self.deriv_num.eval(z) / (q * q))
    }

    /// (f^n(z), (f^n)'(z)); the derivative accumulates multiplicatively by
    /// the chain rule.
    pub fn iterate_with_derivative(&self, z: C64, n: usize) -> Result<(C64, C64)> {
        let mut w = z;
        let mut deriv = C64::new(1.0, 0.0);
        for step in 0..n {
            if w.norm() > OVERFLOW_GUARD || deriv.norm() > OVERFLOW_GUARD {
                return Err(Error::Overflow { step });
            }
            deriv *= self.derivative(w)?;
            w = self.evaluate(w)?;
        }
        if w.norm() > OVERFLOW_GUARD || deriv.norm() > OVERFLOW_GUARD {
            return Err(Error::Overflow { step: n });
        }
        Ok((w, deriv))
    }

    /// Finite critical points: roots of p'q - pq'.
    pub fn critical_points(&self) -> Result<Vec<C64>> {
        let trimmed = self.deriv_num.trimmed(1e-13);
        if trimmed.degree() == 0 {
            return Ok(Vec::new());
        }
        roots(&trimmed)
    }

    /// Finite critical values f(critical point), poles skipped.
    pub fn critical_values(&self) -> Result<Vec<C64>> {
        Ok(self
            .critical_points()?
            .into_iter()
            .filter_map(|c| self.evaluate(c).ok())
            .collect())
    }

    /// Escape radius: outside it, polynomial orbits grow monotonically.
    /// Monic quadratics use the classical max(|c|, 2) + 1; other
    /// polynomials a coefficient bound.
    pub fn escape_radius(&self) -> f64 {
        if self.is_polynomial() {
            let lead = self.num.leading() / self.den.leading();
            let coeffs = self.num.coeffs();
            if self.degree == 2 && coeffs.len() == 3 && coeffs[1].norm() == 0.0 {
                let c = (coeffs[0] / self.den.leading()).norm();
                return c.max(2.0) + 1.0;
            }
            let sum: f64 = coeffs[..coeffs.len() - 1]
                .iter()
                .map(|c| (c / self.den.leading()).norm())
                .sum();
            ((1.0 + sum) / lead.norm()).max(2.0)
        } else {
            // No escape criterion for general rational maps; callers must
            // supply their own radius.
            f64::INFINITY
        }
    }

    /// Radius of a centered disk guaranteed to contain the Julia set of a
    /// polynomial (tight for monic quadratics).
    pub fn julia_bound(&self) -> f64 {
        if self.is_polynomial() && self.degree == 2 {
            let coeffs = self.num.coeffs();
            if coeffs.len() == 3 && coeffs[1].norm() == 0.0 {
                let c = (coeffs[0] / self.den.leading()).norm();
                return 0.5 * (1.0 + (1.0 + 4.0 * c).sqrt());
            }
        }
        self.escape_radius()
    }

    /// The n-fold composition as an explicit polynomial. Coefficients grow
    /// like |c|^(d^n), so this is only safe for very small n; the orbit
    /// enumeration never uses it.
    pub fn iterate_poly(&self, n: usize) -> Result<Poly> {
        if !self.is_polynomial() {
            return Err(Error::Invalid(
                "iterate_poly requires a polynomial map".into(),
            ));
        }
        let base = self.num.scale(C64::new(1.0, 0.0) / self.den.leading());
        let mut acc = Poly::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        for _ in 0..n {
            acc = compose(&base, &acc);
        }
        Ok(acc)
    }

    pub fn to_file(&self) -> MapFile {
        MapFile {
            numerator: self.num.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            denominator: self.den.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_file(file: &MapFile) -> Result<Self> {
        let conv = |v: &Vec<[f64; 2]>| v.iter().map(|c| C64::new(c[0], c[1])).collect();
        Self::new(conv(&file.numerator), conv(&file.denominator))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("map serialization cannot fail")
    }

    /// Stable identifier for persistence and run manifests.
    pub fn description_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// outer(inner(z)) by Horner in polynomial arithmetic.
fn compose(outer: &Poly, inner: &Poly) -> Poly {
    let mut acc = Poly::constant(C64::new(0.0, 0.0));
    for &c in outer.coeffs().iter().rev() {
        acc = acc.mul(inner).add(&Poly::constant(c));
    }
    acc
}

/// An element of PSL(2, C) as a 2x2 complex matrix.
#[derive(Debug, Clone, Copy)]
pub struct MoebiusTransform {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MoebiusTransform {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let m = MoebiusTransform { a, b, c, d };
        let det = m.det().norm();
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if det <= 1e-12 * scale * scale {
            return Err(Error::DegenerateTransform { det });
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        MoebiusTransform {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::new(1.0, 0.0),
        }
    }

    /// z -> alpha z + beta.
    pub fn affine(alpha: C64, beta: C64) -> Result<Self> {
        MoebiusTransform::new(alpha, beta, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// z -> 1/z.
    pub fn inversion() -> Self {
        MoebiusTransform {
            a: C64::new(0.0, 0.0),
            b: C64::new(1.0, 0.0),
            c: C64::new(1.0, 0.0),
            d: C64::new(0.0, 0.0),
        }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn inverse(&self) -> MoebiusTransform {
        MoebiusTransform {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }
}

/// M o f o M^{-1} as a rational map. Cycle multipliers are invariant under
/// this operation, which the orbit tests use as a cross-check.
pub fn conjugate(map: &RationalMap, m: &MoebiusTransform) -> Result<RationalMap> {
    let det = m.det().norm();
    let scale = m.a.norm().max(m.b.norm()).max(m.c.norm()).max(m.d.norm());
    if det <= 1e-12 * scale * scale {
        return Err(Error::DegenerateTransform { det });
    }
    let inv = m.inverse();
    // M^{-1}(z) = (inv.a z + inv.b) / (inv.c z + inv.d) as a pair of
    // degree-1 polynomials.
    let top = Poly::new(vec![inv.b, inv.a]);
    let bot = Poly::new(vec![inv.d, inv.c]);

    let deg = map.degree();
    let homogenize = |p: &Poly| {
        let mut acc = Poly::constant(C64::new(0.0, 0.0));
        for (k, &c) in p.coeffs().iter().enumerate() {
            acc = acc.add(&top.pow(k).mul(&bot.pow(deg - k)).scale(c));
        }
        acc
    };
    let p1 = homogenize(map.numerator());
    let q1 = homogenize(map.denominator());

    let num = p1.scale(m.a).add(&q1.scale(m.b)).trimmed(1e-12);
    let den = p1.scale(m.c).add(&q1.scale(m.d)).trimmed(1e-12);

    // Normalize by the largest denominator coefficient so polynomial
    // conjugates come out with denominator 1.
    let norm_coeff = den
        .coeffs()
        .iter()
        .copied()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
        .unwrap();
    if norm_coeff.norm() < 1e-300 {
        return Err(Error::DegenerateTransform { det });
    }
    let inv_n = C64::new(1.0, 0.0) / norm_coeff;
    let out = RationalMap::new(
        num.scale(inv_n).coeffs().to_vec(),
        den.scale(inv_n).coeffs().to_vec(),
    )?;
    if out.degree() != map.degree() {
        return Err(Error::DegenerateTransform { det });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Hyperbolic,
    NotHyperbolic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CriticalFate {
    /// Orbit entered the basin of a detected attracting cycle.
    EscapesToAttractor { cycle: usize },
    /// Orbit left the escape radius at the given step (polynomials only;
    /// infinity is attracting there).
    Escaped { step: usize },
    Undecided,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AttractingCycle {
    pub representative: (f64, f64),
    pub period: usize,
    pub multiplier_magnitude: f64,
}

/// One recorded lower-bound check c0 * kappa^steps <= |(f^steps)'(point)|.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExpansionSample {
    pub point: (f64, f64),
    pub steps: usize,
    pub derivative_magnitude: f64,
}

/// Outcome of the critical-orbit classification, with empirical expansion
/// constants measured on sampled repelling periodic points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperbolicityCertificate {
    pub verdict: Verdict,
    pub fates: Vec<CriticalFate>,
    pub critical_points: Vec<(f64, f64)>,
    pub cycles: Vec<AttractingCycle>,
    /// Empirical expansion rate (> 1 when sampling succeeded).
    pub kappa_hat: f64,
    /// Empirical prefactor making c0 * kappa^n a lower derivative bound on
    /// every stored sample.
    pub c0_hat: f64,
    pub samples: Vec<ExpansionSample>,
    pub escape_radius: f64,
}

/// Tracks every finite critical orbit for up to `max_iter` steps and
/// decides its fate. `Inconclusive` is a valid verdict, never an error.
pub fn classify_hyperbolic(
    map: &RationalMap,
    max_iter: usize,
    escape_radius: f64,
) -> HyperbolicityCertificate {
    let criticals = map.critical_points().unwrap_or_default();
    let mut cycles: Vec<(Vec<C64>, AttractingCycle)> = Vec::new();
    let mut fates = Vec::new();
    let mut indifferent_seen = false;

    for &c0 in &criticals {
        let fate = follow_critical_orbit(
            map,
            c0,
            max_iter,
            escape_radius,
            &mut cycles,
            &mut indifferent_seen,
        );
        fates.push(fate);
    }

    let verdict = if indifferent_seen {
        Verdict::NotHyperbolic
    } else if fates.iter().any(|f| matches!(f, CriticalFate::Undecided)) {
        Verdict::Inconclusive
    } else {
        Verdict::Hyperbolic
    };

    let (kappa_hat, c0_hat, samples) = estimate_expansion(map).unwrap_or((f64::NAN, f64::NAN, Vec::new()));

    HyperbolicityCertificate {
        verdict,
        fates,
        critical_points: criticals.iter().map(|c| (c.re, c.im)).collect(),
        cycles: cycles.into_iter().map(|(_, c)| c).collect(),
        kappa_hat,
        c0_hat,
        samples,
        escape_radius,
    }
}

fn follow_critical_orbit(
    map: &RationalMap,
    start: C64,
    max_iter: usize,
    escape_radius: f64,
    cycles: &mut Vec<(Vec<C64>, AttractingCycle)>,
    indifferent_seen: &mut bool,
) -> CriticalFate {
    const MAX_LAG: usize = 48;
    let mut history: Vec<C64> = Vec::with_capacity(MAX_LAG + 1);
    let mut z = start;
    for step in 0..max_iter {
        if map.is_polynomial() && z.norm() > escape_radius {
            return CriticalFate::Escaped { step };
        }
        // Already inside a known attracting cycle's neighbourhood?
        for (id, (points, _)) in cycles.iter().enumerate() {
            if points.iter().any(|p| (z - p).norm() < 1e-8) {
                return CriticalFate::EscapesToAttractor { cycle: id };
            }
        }
        // Near-period return triggers a Newton refinement of the cycle.
        let near_tol = 1e-6 * z.norm().max(1.0);
        for lag in 1..=history.len().min(MAX_LAG) {
            let prev = history[history.len() - lag];
            if (z - prev).norm() < near_tol {
                if let Some((points, mag)) = refine_cycle(map, z, lag) {
                    if mag < 1.0 - 1e-6 {
                        let cycle = AttractingCycle {
                            representative: (points[0].re, points[0].im),
                            period: lag,
                            multiplier_magnitude: mag,
                        };
                        let id = match cycles
                            .iter()
                            .position(|(ps, _)| (ps[0] - points[0]).norm() < 1e-6)
                        {
                            Some(i) => i,
                            None => {
                                cycles.push((points, cycle));
                                cycles.len() - 1
                            }
                        };
                        return CriticalFate::EscapesToAttractor { cycle: id };
                    } else if (mag - 1.0).abs() <= 1e-6 {
                        *indifferent_seen = true;
                        return CriticalFate::Undecided;
                    }
                }
                break;
            }
        }
        history.push(z);
        if history.len() > MAX_LAG {
            history.remove(0);
        }
        z = match map.evaluate(z) {
            Ok(w) => w,
            // A critical orbit through a pole goes to infinity; decisive
            // only for polynomials, and polynomials have no poles.
            Err(_) => return CriticalFate::Undecided,
        };
    }
    CriticalFate::Undecided
}

/// Newton refinement of f^p(w) = w from a near-return, returning the cycle
/// points and the refined multiplier magnitude.
fn refine_cycle(map: &RationalMap, guess: C64, period: usize) -> Option<(Vec<C64>, f64)> {
    let mut w = guess;
    for _ in 0..60 {
        let (fw, dfw) = map.iterate_with_derivative(w, period).ok()?;
        let denom = dfw - C64::new(1.0, 0.0);
        if denom.norm() < 1e-14 {
            break;
        }
        let step = (fw - w) / denom;
        w -= step;
        if step.norm() < 1e-13 * w.norm().max(1.0) {
            break;
        }
    }
    let (fw, dfw) = map.iterate_with_derivative(w, period).ok()?;
    if (fw - w).norm() > 1e-8 * w.norm().max(1.0) {
        return None;
    }
    let mut points = Vec::with_capacity(period);
    let mut p = w;
    for _ in 0..period {
        points.push(p);
        p = map.evaluate(p).ok()?;
    }
    Some((points, dfw.norm()))
}

/// Samples repelling periodic points of low period and fits empirical
/// expansion constants kappa_hat, c0_hat with a direct recheck built in.
fn estimate_expansion(map: &RationalMap) -> Result<(f64, f64, Vec<ExpansionSample>)> {
    if !map.is_polynomial() {
        return Err(Error::Invalid("expansion sampling needs a polynomial".into()));
    }
    let mut per_point: Vec<(C64, usize, f64)> = Vec::new();
    for n in 1..=3usize {
        let iter_poly = map.iterate_poly(n)?;
        let shifted = iter_poly.sub(&Poly::new(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        for r in roots(&shifted)? {
            let (_, deriv) = map.iterate_with_derivative(r, n)?;
            if deriv.norm() > 1.0 + 1e-9 {
                per_point.push((r, n, deriv.norm()));
            }
        }
    }
    if per_point.is_empty() {
        return Err(Error::Invalid("no repelling samples found".into()));
    }
    let kappa_hat = per_point
        .iter()
        .map(|(_, n, d)| d.powf(1.0 / *n as f64))
        .fold(f64::INFINITY, f64::min);
    // Partial products along each sampled orbit pin down c0.
    let mut samples = Vec::new();
    let mut c0_hat: f64 = 1.0;
    for &(x, n, _) in &per_point {
        for k in 1..=n {
            let (_, d) = map.iterate_with_derivative(x, k)?;
            c0_hat = c0_hat.min(d.norm() / kappa_hat.powi(k as i32));
            samples.push(ExpansionSample {
                point: (x.re, x.im),
                steps: k,
                derivative_magnitude: d.norm(),
            });
        }
    }
    // Back off slightly so the recorded inequality holds strictly on every
    // sample despite rounding.
    c0_hat *= 1.0 - 1e-12;
    Ok((kappa_hat, c0_hat, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluate_spec_points() {
        let z2 = RationalMap::quadratic(c(0.0, 0.0));
        assert!((z2.evaluate(c(1.0, 1.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-15);

        let z2m6 = RationalMap::quadratic(c(-6.0, 0.0));
        assert!((z2m6.evaluate(c(3.0, 0.0)).unwrap() - c(3.0, 0.0)).norm() < 1e-15);

        let z2p5 = RationalMap::quadratic(c(5.0, 0.0));
        assert!((z2p5.evaluate(c(0.0, 0.0)).unwrap() - c(5.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_detection() {
        // f(z) = (z^2 + 1) / (z - 1), pole at 1.
        let f = RationalMap::new(
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(-1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(f.evaluate(c(1.0, 0.0)), Err(Error::PoleHit { .. })));
        assert!(f.evaluate(c(2.0, 0.0)).is_ok());
    }

    #[test]
    fn iterate_with_derivative_spec_examples() {
        let z2 = RationalMap::quadratic(c(0.0, 0.0));
        let (v, d) = z2.iterate_with_derivative(c(1.0, 0.0), 3).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        assert!((d - c(8.0, 0.0)).norm() < 1e-13);

        // Fixed point of z^2 + 5 from the quadratic formula.
        let s19 = 19.0_f64.sqrt();
        let fp = c(0.5, s19 / 2.0);
        let z2p5 = RationalMap::quadratic(c(5.0, 0.0));
        let (v, d) = z2p5.iterate_with_derivative(fp, 1).unwrap();
        assert!((v - fp).norm() < 1e-13);
        assert!((d - c(1.0, s19)).norm() < 1e-13);

        let z2m6 = RationalMap::quadratic(c(-6.0, 0.0));
        let (v, d) = z2m6.iterate_with_derivative(c(3.0, 0.0), 2).unwrap();
        assert!((v - c(3.0, 0.0)).norm() < 1e-13);
        assert!((d - c(36.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn overflow_reports_escape_step() {
        let z2p5 = RationalMap::quadratic(c(5.0, 0.0));
        match z2p5.iterate_with_derivative(c(100.0, 0.0), 400) {
            Err(Error::Overflow { step }) => assert!(step > 0 && step < 12),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn chain_rule_consistency() {
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let z = c(0.3, 2.1);
        let (m, n) = (3usize, 4usize);
        let (fm, dm) = map.iterate_with_derivative(z, m).unwrap();
        let (_, dn) = map.iterate_with_derivative(fm, n).unwrap();
        let (_, dmn) = map.iterate_with_derivative(z, m + n).unwrap();
        let rel = (dmn - dm * dn).norm() / dmn.norm();
        assert!(rel < 1e-10, "chain rule violated: rel {rel}");
    }

    #[test]
    fn derivative_against_finite_differences() {
        let map = RationalMap::quadratic(c(-6.0, 0.0));
        let z = c(1.3, 0.2);
        let n = 4;
        let h = 1e-6;
        let (_, d) = map.iterate_with_derivative(z, n).unwrap();
        let (fp, _) = map.iterate_with_derivative(z + c(h, 0.0), n).unwrap();
        let (fm, _) = map.iterate_with_derivative(z - c(h, 0.0), n).unwrap();
        let fd = (fp - fm) / c(2.0 * h, 0.0);
        assert!((d - fd).norm() / d.norm() < 1e-5);
    }

    #[test]
    fn classify_monomial_and_escaping() {
        let z2 = RationalMap::quadratic(c(0.0, 0.0));
        let cert = classify_hyperbolic(&z2, 100, z2.escape_radius());
        assert_eq!(cert.verdict, Verdict::Hyperbolic);
        assert_eq!(cert.cycles.len(), 1);
        assert!(cert.cycles[0].multiplier_magnitude < 1e-8);

        let z2p5 = RationalMap::quadratic(c(5.0, 0.0));
        let cert = classify_hyperbolic(&z2p5, 100, z2p5.escape_radius());
        assert_eq!(cert.verdict, Verdict::Hyperbolic);
        assert!(matches!(cert.fates[0], CriticalFate::Escaped { step } if step <= 3));
    }

    #[test]
    fn classify_near_boundary_budget() {
        // c = 0.26 sits just outside the Mandelbrot set; the critical orbit
        // escapes, but only after squeezing past the parabolic ghost at
        // c = 1/4. Oracle: direct long iteration.
        let map = RationalMap::quadratic(c(0.26, 0.0));
        let mut z = c(0.0, 0.0);
        let mut escape_step = None;
        for k in 0..10_000 {
            if z.norm() > map.escape_radius() {
                escape_step = Some(k);
                break;
            }
            z = map.evaluate(z).unwrap();
        }
        let escape_step = escape_step.expect("critical orbit of z^2+0.26 escapes");
        assert!(escape_step > 20, "escape too fast for the test to bite");

        let cert_short = classify_hyperbolic(&map, 20, map.escape_radius());
        assert_eq!(cert_short.verdict, Verdict::Inconclusive);
        let cert_long = classify_hyperbolic(&map, escape_step + 10, map.escape_radius());
        assert_eq!(cert_long.verdict, Verdict::Hyperbolic);
    }

    #[test]
    fn expansion_samples_recheck() {
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let cert = classify_hyperbolic(&map, 100, map.escape_radius());
        assert!(cert.kappa_hat > 1.0);
        assert!(cert.c0_hat > 0.0);
        for s in &cert.samples {
            assert!(
                cert.c0_hat * cert.kappa_hat.powi(s.steps as i32) <= s.derivative_magnitude,
                "expansion bound fails at {:?}",
                s
            );
        }
    }

    #[test]
    fn conjugate_identity_and_inversion() {
        let z2 = RationalMap::quadratic(c(0.0, 0.0));
        let id = MoebiusTransform::identity();
        let same = conjugate(&z2, &id).unwrap();
        assert!((same.evaluate(c(1.5, 0.5)).unwrap() - z2.evaluate(c(1.5, 0.5)).unwrap()).norm() < 1e-12);

        // z -> 1/z conjugates z^2 to itself.
        let inv = MoebiusTransform::inversion();
        let back = conjugate(&z2, &inv).unwrap();
        let z = c(0.7, 0.4);
        assert!((back.evaluate(z).unwrap() - z * z).norm() < 1e-12);
    }

    #[test]
    fn conjugation_preserves_fixed_point_multiplier() {
        let map = RationalMap::quadratic(c(-6.0, 0.0));
        let m = MoebiusTransform::affine(c(2.0, 1.0), c(-0.5, 0.3)).unwrap();
        let conj = conjugate(&map, &m).unwrap();
        let fp = c(3.0, 0.0);
        let image = m.apply(fp);
        let (v, d) = conj.iterate_with_derivative(image, 1).unwrap();
        assert!((v - image).norm() < 1e-10);
        assert!((d - c(6.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn degenerate_transform_rejected() {
        assert!(matches!(
            MoebiusTransform::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)),
            Err(Error::DegenerateTransform { .. })
        ));
    }

    #[test]
    fn map_json_roundtrip_and_hash() {
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let json = map.to_json();
        let back = RationalMap::from_json(&json).unwrap();
        assert_eq!(map.description_hash(), back.description_hash());
        assert_eq!(map.degree(), back.degree());
    }

    #[test]
    fn degree_one_rejected() {
        assert!(RationalMap::polynomial(vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
    }
}
