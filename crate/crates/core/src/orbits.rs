//! Enumeration of periodic points, decomposition into primitive orbits
//! with multipliers and holonomies, and the persisted orbit database.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::coding::{branch_step, periodic_itineraries, CodingScheme, MERGE_TOL};
use crate::map::RationalMap;
use crate::{Error, Result, C64};

pub const DEFAULT_DEGREE_CAP: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Roots,
    Symbolic,
}

impl Backend {
    pub fn label(&self) -> &'static str {
        match self {
            Backend::Roots => "roots",
            Backend::Symbolic => "symbolic",
        }
    }

    pub fn parse(text: &str) -> Result<Backend> {
        match text {
            "roots" => Ok(Backend::Roots),
            "symbolic" => Ok(Backend::Symbolic),
            other => Err(Error::Invalid(format!("unknown backend '{other}'"))),
        }
    }
}

/// A primitive periodic cycle. The representative is the cycle point with
/// lexicographically smallest (re, im), which keeps persisted output
/// stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimitiveOrbit {
    pub period: usize,
    pub representative: C64,
    pub multiplier: C64,
    pub abs_multiplier: f64,
    pub holonomy: C64,
    /// Principal-value angle of the holonomy in (-pi, pi].
    pub holonomy_angle: f64,
    pub backend: Backend,
}

impl PrimitiveOrbit {
    /// log |multiplier|; the Birkhoff sum of log |f'| over the cycle.
    pub fn tau(&self) -> f64 {
        self.abs_multiplier.ln()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub point_tol: f64,
    pub merge_tol: f64,
    pub min_period_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            point_tol: 1e-12,
            merge_tol: MERGE_TOL,
            min_period_factor: 10.0,
        }
    }
}

/// All primitive orbits up to `n_max`, plus per-level raw counts of
/// Fix(f^n) on the Julia set and provenance for reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitDatabase {
    pub map_hash: String,
    pub n_max: usize,
    pub orbits: Vec<PrimitiveOrbit>,
    /// raw_counts[n-1] = number of distinct repelling fixed points of f^n.
    pub raw_counts: Vec<usize>,
    pub tolerances: Tolerances,
    pub backend: Backend,
    pub polish_failures: usize,
}

/// Result of one enumeration level before primitive decomposition.
#[derive(Debug, Clone)]
pub struct LevelPoints {
    pub points: Vec<C64>,
    pub polish_failures: usize,
}

/// A reconstructed period-n point (n possibly non-minimal) with the data
/// the thermodynamic sums need.
#[derive(Debug, Clone, Copy)]
pub struct LevelPoint {
    pub point: C64,
    pub min_period: usize,
    pub orbit_index: usize,
}

/// All roots of f^n(z) = z via Aberth iteration driven by map evaluation.
///
/// The iterated polynomial is never formed: its coefficients overflow
/// doubles long before the degree cap. Points in attracting basins are
/// removed; the survivors are repelling.
pub fn enumerate_roots(map: &RationalMap, n: usize, cap: usize) -> Result<LevelPoints> {
    if !map.is_polynomial() {
        return Err(Error::Invalid(
            "the roots backend needs a polynomial map".into(),
        ));
    }
    let degree = map
        .degree()
        .checked_pow(n as u32)
        .filter(|&d| d <= cap)
        .ok_or(Error::DegreeCapExceeded {
            degree: usize::MAX,
            cap,
        })?;
    if degree > cap {
        return Err(Error::DegreeCapExceeded { degree, cap });
    }

    let radius = map.julia_bound() * 1.02;
    let scale = radius.max(1.0);
    let mut roots = Vec::new();
    let mut found = false;
    for attempt in 0..3 {
        let offset = 0.5432 + 0.77 * attempt as f64;
        let mut zs: Vec<C64> = (0..degree)
            .map(|k| {
                let angle =
                    2.0 * std::f64::consts::PI * (k as f64 + 0.354) / degree as f64 + offset;
                C64::from_polar(radius, angle)
            })
            .collect();
        if aberth_on_iterate(map, n, &mut zs, scale) {
            roots = zs;
            found = true;
            break;
        }
    }
    if !found {
        return Err(Error::NonConvergence { sweeps: 300 });
    }

    // Newton polish on f^n(z) - z, then filter and dedupe. Acceptance is
    // by Newton step size (position error): the raw residual of f^n - id
    // bottoms out around multiplier * eps and cannot be thresholded
    // directly.
    let mut polish_failures = 0usize;
    let mut kept: Vec<C64> = Vec::with_capacity(degree);
    for mut z in roots {
        let mut ok = false;
        for _ in 0..4 {
            match map.iterate_with_derivative(z, n) {
                Ok((fz, dfz)) => {
                    let denom = dfz - C64::new(1.0, 0.0);
                    if denom.norm() < 1e-14 {
                        break;
                    }
                    let step = (fz - z) / denom;
                    z -= step;
                    if step.norm() < 1e-11 * scale {
                        ok = true;
                    }
                }
                Err(_) => break,
            }
        }
        if !ok {
            polish_failures += 1;
            continue;
        }
        kept.push(z);
    }
    let mut points = snap_real(map, kept, scale);
    points = dedupe(points, MERGE_TOL * scale);
    // Drop attracting/superattracting basin roots; survivors are repelling.
    points.retain(|&z| {
        map.iterate_with_derivative(z, n)
            .map(|(_, d)| d.norm() > 1.0)
            .unwrap_or(false)
    });
    points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok(LevelPoints {
        points,
        polish_failures,
    })
}

/// One Aberth pass over all guesses; returns true on convergence.
fn aberth_on_iterate(map: &RationalMap, n: usize, zs: &mut [C64], scale: f64) -> bool {
    let dn = map.degree().pow(n as u32) as f64;
    let radius = scale;
    for _ in 0..300 {
        let prev: Vec<C64> = zs.to_vec();
        let ratios: Vec<C64> = prev
            .par_iter()
            .map(|&z| newton_ratio(map, n, z, dn, radius))
            .collect();
        let mut max_step = 0.0_f64;
        for (k, z) in zs.iter_mut().enumerate() {
            let mut repulsion = C64::new(0.0, 0.0);
            for (j, &other) in prev.iter().enumerate() {
                if j != k {
                    let diff = prev[k] - other;
                    if diff.norm() > 1e-300 {
                        repulsion += C64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratios[k] * repulsion;
            let step = if denom.norm() > 1e-300 {
                ratios[k] / denom
            } else {
                ratios[k]
            };
            *z = prev[k] - step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 * scale {
            return true;
        }
    }
    false
}

/// p(z)/p'(z) for p = f^n - id. When the orbit of z blows past the
/// representable range the guess is simply pulled back onto the search
/// circle; only transient far-out guesses hit this.
fn newton_ratio(map: &RationalMap, n: usize, z: C64, dn: f64, radius: f64) -> C64 {
    match map.iterate_with_derivative(z, n) {
        Ok((fz, dfz)) => {
            let denom = dfz - C64::new(1.0, 0.0);
            if denom.norm() < 1e-300 {
                C64::new(1e-13 * radius, 0.0)
            } else {
                (fz - z) / denom
            }
        }
        Err(_) => {
            if z.norm() > radius {
                z * (1.0 - radius / z.norm())
            } else {
                z / dn
            }
        }
    }
}

/// One periodic point per admissible cyclic word: the fixed point of the
/// word's branch composition, found by contraction sweeps and polished by
/// Newton on f^n(z) - z.
pub fn enumerate_symbolic(
    map: &RationalMap,
    scheme: &CodingScheme,
    n: usize,
    tol: f64,
) -> Result<LevelPoints> {
    let contraction = scheme.contraction();
    if !(contraction < 1.0) {
        return Err(Error::Invalid(format!(
            "coding contraction estimate {contraction} is not < 1"
        )));
    }
    let words = periodic_itineraries(scheme, n);
    let scale = scheme.scale().max(1.0);
    let results: Vec<Result<C64>> = words
        .par_iter()
        .map(|word| solve_word_fixed_point(map, scheme, word, tol, scale))
        .collect();
    let mut points = Vec::with_capacity(results.len());
    for r in results {
        points.push(r?);
    }
    let points = snap_real(map, points, scale);
    Ok(LevelPoints {
        points,
        polish_failures: 0,
    })
}

fn solve_word_fixed_point(
    map: &RationalMap,
    scheme: &CodingScheme,
    word: &[usize],
    tol: f64,
    scale: f64,
) -> Result<C64> {
    let n = word.len();
    let mut z = scheme.base_point(word[0]);
    let mut converged = false;
    let max_sweeps = 250usize;
    for _ in 0..max_sweeps {
        let mut next = z;
        for (step, &s) in word.iter().enumerate().rev() {
            next = branch_step(map, scheme, s, next, tol, step)?;
        }
        let delta = (next - z).norm();
        z = next;
        if delta < 1e-12 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: max_sweeps });
    }
    // Newton polish to machine precision.
    for _ in 0..3 {
        let (fz, dfz) = map.iterate_with_derivative(z, n)?;
        let denom = dfz - C64::new(1.0, 0.0);
        if denom.norm() < 1e-14 {
            break;
        }
        z -= (fz - z) / denom;
    }
    Ok(z)
}

/// Real maps keep real orbit data exactly real: points that are real to
/// tolerance are snapped onto the axis and re-polished, after which the
/// complex arithmetic preserves a zero imaginary part.
fn snap_real(map: &RationalMap, points: Vec<C64>, scale: f64) -> Vec<C64> {
    if !map.has_real_coefficients() {
        return points;
    }
    points
        .into_iter()
        .map(|z| {
            if z.im != 0.0 && z.im.abs() <= 1e-10 * scale {
                C64::new(z.re, 0.0)
            } else {
                z
            }
        })
        .collect()
}

fn dedupe(mut points: Vec<C64>, tol: f64) -> Vec<C64> {
    points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut out: Vec<C64> = Vec::with_capacity(points.len());
    'outer: for p in points {
        // Sorted by re, so only a bounded window behind can collide.
        for q in out.iter().rev() {
            if p.re - q.re > tol {
                break;
            }
            if (p - q).norm() <= tol {
                continue 'outer;
            }
        }
        out.push(p);
    }
    out
}

/// Groups fixed points of f^n into forward orbits and keeps those of
/// minimal period exactly n.
pub fn decompose_primitive(
    points: &[C64],
    n: usize,
    map: &RationalMap,
    backend: Backend,
    tolerances: &Tolerances,
) -> Result<Vec<PrimitiveOrbit>> {
    let scale = points
        .iter()
        .map(|p| p.norm())
        .fold(1.0_f64, f64::max);
    let merge = tolerances.merge_tol * scale;
    let unique = dedupe(points.to_vec(), merge);
    let index = PointIndex::new(&unique, merge.max(1e-300));

    let match_tol = merge * 100.0;
    let mut visited = vec![false; unique.len()];
    let mut orbits = Vec::new();
    for start in 0..unique.len() {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut z = unique[start];
        loop {
            let fz = map.evaluate(z)?;
            let (j, dist) = index
                .nearest(fz)
                .ok_or(Error::OrbitGroupingConflict { distance: f64::MAX })?;
            if dist > match_tol {
                return Err(Error::OrbitGroupingConflict { distance: dist });
            }
            if j == start {
                break;
            }
            if visited[j] {
                // Ran into another cycle without closing: inconsistent set.
                if !cycle.contains(&j) {
                    return Err(Error::OrbitGroupingConflict { distance: dist });
                }
                break;
            }
            visited[j] = true;
            cycle.push(j);
            z = unique[j];
            if cycle.len() > n {
                return Err(Error::OrbitGroupingConflict { distance: dist });
            }
        }
        let period = cycle.len();
        if period < n {
            // Lower-period orbit showing through at level n: it is emitted
            // at its own level, but only if its period divides n.
            if n % period != 0 {
                return Err(Error::OrbitGroupingConflict {
                    distance: period as f64,
                });
            }
            continue;
        }
        let rep = cycle
            .iter()
            .map(|&i| unique[i])
            .min_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap())
            .unwrap();
        // Direct minimality recheck at a stricter threshold.
        for m in 1..n {
            if n % m == 0 {
                let (fm, _) = map.iterate_with_derivative(rep, m)?;
                if (fm - rep).norm() <= tolerances.min_period_factor * tolerances.point_tol * scale
                {
                    return Err(Error::OrbitGroupingConflict {
                        distance: (fm - rep).norm(),
                    });
                }
            }
        }
        let (_, multiplier) = map.iterate_with_derivative(rep, n)?;
        let abs_multiplier = multiplier.norm();
        if abs_multiplier <= 1.0 {
            // Attracting cycles are filtered upstream; skip defensively.
            continue;
        }
        let (holonomy, holonomy_angle) = holonomy_of(multiplier);
        orbits.push(PrimitiveOrbit {
            period: n,
            representative: rep,
            multiplier,
            abs_multiplier,
            holonomy,
            holonomy_angle,
            backend,
        });
    }
    Ok(orbits)
}

/// lambda / |lambda| and its principal angle in (-pi, pi]. Real
/// multipliers produce exactly +-1 with angle exactly 0 or pi, so that
/// character sums over real maps stay exactly real.
pub fn holonomy_of(multiplier: C64) -> (C64, f64) {
    if multiplier.im == 0.0 {
        return if multiplier.re >= 0.0 {
            (C64::new(1.0, 0.0), 0.0)
        } else {
            (C64::new(-1.0, 0.0), std::f64::consts::PI)
        };
    }
    let h = multiplier / multiplier.norm();
    let mut angle = h.im.atan2(h.re);
    if angle <= -std::f64::consts::PI {
        angle = std::f64::consts::PI;
    }
    (h, angle)
}

/// Uniform-grid point locator for nearest-neighbour matching.
struct PointIndex {
    cell: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<C64>,
}

impl PointIndex {
    fn new(points: &[C64], cell: f64) -> Self {
        let cell = cell.max(1e-12);
        let mut map: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(Self::key(*p, cell)).or_default().push(i);
        }
        PointIndex {
            cell,
            map,
            points: points.to_vec(),
        }
    }

    fn key(p: C64, cell: f64) -> (i64, i64) {
        ((p.re / cell).floor() as i64, (p.im / cell).floor() as i64)
    }

    /// Nearest point; scans growing rings of cells until a hit is safe.
    fn nearest(&self, p: C64) -> Option<(usize, f64)> {
        let (kx, ky) = Self::key(p, self.cell);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..64i64 {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    if let Some(ids) = self.map.get(&(kx + dx, ky + dy)) {
                        for &i in ids {
                            let d = (self.points[i] - p).norm();
                            if best.map_or(true, |(_, bd)| d < bd) {
                                best = Some((i, d));
                            }
                        }
                    }
                }
            }
            if let Some((_, d)) = best {
                // Everything outside the next ring is farther than d.
                if d <= (ring as f64) * self.cell {
                    break;
                }
            }
        }
        best
    }
}

impl OrbitDatabase {
    /// Enumerates all levels 1..=n_max with the given backend and builds
    /// the primitive-orbit database.
    pub fn build(
        map: &RationalMap,
        scheme: Option<&CodingScheme>,
        n_max: usize,
        backend: Backend,
        cap: usize,
        tolerances: Tolerances,
    ) -> Result<OrbitDatabase> {
        let mut orbits = Vec::new();
        let mut raw_counts = Vec::with_capacity(n_max);
        let mut polish_failures = 0usize;
        for n in 1..=n_max {
            let level = match backend {
                Backend::Roots => enumerate_roots(map, n, cap)?,
                Backend::Symbolic => {
                    let scheme = scheme.ok_or_else(|| {
                        Error::Invalid("symbolic backend needs a coding scheme".into())
                    })?;
                    enumerate_symbolic(map, scheme, n, tolerances.merge_tol)?
                }
            };
            polish_failures += level.polish_failures;
            let scale = level.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
            let unique = dedupe(level.points.clone(), tolerances.merge_tol * scale);
            raw_counts.push(unique.len());
            orbits.extend(decompose_primitive(
                &unique, n, map, backend, &tolerances,
            )?);
        }
        orbits.sort_by(|a, b| {
            (a.abs_multiplier, a.holonomy_angle, a.period)
                .partial_cmp(&(b.abs_multiplier, b.holonomy_angle, b.period))
                .unwrap()
        });
        Ok(OrbitDatabase {
            map_hash: map.description_hash(),
            n_max,
            orbits,
            raw_counts,
            tolerances,
            backend,
            polish_failures,
        })
    }

    /// Smallest per-period expansion rate in the database.
    pub fn kappa_min(&self) -> f64 {
        self.orbits
            .iter()
            .map(|o| o.abs_multiplier.powf(1.0 / o.period as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Multiplier size below which the database provably contains every
    /// primitive orbit: unseen orbits have period > n_max, hence
    /// |multiplier| >= kappa_min^(n_max + 1) on the sampled expansion
    /// estimate.
    pub fn horizon(&self) -> f64 {
        let k = self.kappa_min();
        if k.is_finite() {
            k.powi(self.n_max as i32 + 1)
        } else {
            0.0
        }
    }

    /// N_t and the slice P_t of primitive orbits with |multiplier| < t.
    pub fn query_nt(&self, t: f64) -> Result<(usize, Vec<&PrimitiveOrbit>)> {
        let horizon = self.horizon();
        if t > horizon {
            return Err(Error::HorizonExceeded { t, horizon });
        }
        let slice: Vec<&PrimitiveOrbit> = self
            .orbits
            .iter()
            .filter(|o| o.abs_multiplier < t)
            .collect();
        Ok((slice.len(), slice))
    }

    pub fn orbits_of_period(&self, n: usize) -> impl Iterator<Item = &PrimitiveOrbit> {
        self.orbits.iter().filter(move |o| o.period == n)
    }

    pub fn has_level(&self, n: usize) -> bool {
        n >= 1 && n <= self.n_max
    }

    /// Reconstructs the raw period-n points (all x with f^n x = x on J)
    /// from the primitive orbits of the divisor levels, polishing each
    /// forward image.
    pub fn level_points(&self, map: &RationalMap, n: usize) -> Result<Vec<LevelPoint>> {
        if !self.has_level(n) {
            return Err(Error::EmptyLevel { level: n });
        }
        let mut out = Vec::new();
        for (idx, orbit) in self.orbits.iter().enumerate() {
            let m = orbit.period;
            if n % m != 0 {
                continue;
            }
            let mut z = orbit.representative;
            for step in 0..m {
                if step > 0 {
                    z = map.evaluate(z)?;
                    // One Newton step against f^m keeps forward images from
                    // accumulating the expansion factor.
                    let (fz, dfz) = map.iterate_with_derivative(z, m)?;
                    let denom = dfz - C64::new(1.0, 0.0);
                    if denom.norm() > 1e-14 {
                        z -= (fz - z) / denom;
                    }
                }
                out.push(LevelPoint {
                    point: z,
                    min_period: m,
                    orbit_index: idx,
                });
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyLevel { level: n });
        }
        Ok(out)
    }

    pub const CSV_HEADER: &'static str =
        "period,re,im,lambda_re,lambda_im,abs_lambda,hol_angle,backend";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for o in &self.orbits {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                o.period,
                o.representative.re,
                o.representative.im,
                o.multiplier.re,
                o.multiplier.im,
                o.abs_multiplier,
                o.holonomy_angle,
                o.backend.label()
            ));
        }
        out
    }

    /// JSON sidecar with everything except the orbit rows.
    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            map_hash: &'a str,
            n_max: usize,
            backend: &'static str,
            tolerances: &'a Tolerances,
            raw_counts: &'a [usize],
            polish_failures: usize,
            kappa_min: f64,
            horizon: f64,
        }
        serde_json::to_string_pretty(&Sidecar {
            map_hash: &self.map_hash,
            n_max: self.n_max,
            backend: self.backend.label(),
            tolerances: &self.tolerances,
            raw_counts: &self.raw_counts,
            polish_failures: self.polish_failures,
            kappa_min: self.kappa_min(),
            horizon: self.horizon(),
        })
        .expect("sidecar serialization cannot fail")
    }

    /// Parses the CSV produced by `to_csv` together with its sidecar.
    pub fn from_csv(csv: &str, sidecar: &str) -> Result<OrbitDatabase> {
        #[derive(Deserialize)]
        struct Sidecar {
            map_hash: String,
            n_max: usize,
            backend: String,
            tolerances: Tolerances,
            raw_counts: Vec<usize>,
            polish_failures: usize,
        }
        let side: Sidecar = serde_json::from_str(sidecar)?;
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or("");
        if header != Self::CSV_HEADER {
            return Err(Error::Invalid(format!("unexpected CSV header '{header}'")));
        }
        let mut orbits = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::Invalid(format!(
                    "line {}: expected 8 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let f = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Invalid(format!("line {}: {e}", lineno + 2)))
            };
            let multiplier = C64::new(f(fields[3])?, f(fields[4])?);
            let (holonomy, _) = holonomy_of(multiplier);
            orbits.push(PrimitiveOrbit {
                period: fields[0]
                    .parse()
                    .map_err(|e| Error::Invalid(format!("line {}: {e}", lineno + 2)))?,
                representative: C64::new(f(fields[1])?, f(fields[2])?),
                multiplier,
                abs_multiplier: f(fields[5])?,
                holonomy,
                holonomy_angle: f(fields[6])?,
                backend: Backend::parse(fields[7])?,
            });
        }
        Ok(OrbitDatabase {
            map_hash: side.map_hash,
            n_max: side.n_max,
            orbits,
            raw_counts: side.raw_counts,
            tolerances: side.tolerances,
            backend: Backend::parse(&side.backend)?,
            polish_failures: side.polish_failures,
        })
    }
}

/// Symmetric Hausdorff distance between two finite point sets; the backend
/// agreement metric.
pub fn hausdorff_distance(a: &[C64], b: &[C64]) -> f64 {
    let one_sided = |xs: &[C64], ys: &[C64]| {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| (x - y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0_f64, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    one_sided(a, b).max(one_sided(b, a))
}
