//! Numerical probes of the machinery behind the counting theorems:
//! L2 decay of normalized twisted transfer operators, non-local
//! integrability of the branch-difference map, non-concentration of the
//! Julia set, and doubling of the equilibrium measure on pieces.
//!
//! Every probe is deterministic given its parameters and seed, and every
//! scalar outcome travels with its sample count and tolerance.

pub use crate::transfer::{
    eigen_data, leading_eigenvalue_delta, NormalizedTransfer, TransferContext,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{admissible_itineraries, backward_point, CodingScheme, SymbolWord, MERGE_TOL};
use crate::map::RationalMap;
use crate::thermo::{reduce_angle, EmpiricalMeasure};
use crate::{Error, Result, C64};

/// Envelope shared by all probe outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport<T> {
    pub kind: &'static str,
    pub map_hash: String,
    pub parameters: serde_json::Value,
    pub outcome: T,
    pub sample_count: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayOutcome {
    /// exp of the fitted slope of log ||hat L^k 1||_{L2(nu)} over the
    /// last half of the iteration.
    pub rho_hat: f64,
    pub norms: Vec<f64>,
    /// sup |hat L_{delta,0} 1 - 1| on the basis.
    pub normalization_defect: f64,
}

/// Iterates the normalized operator on h = 1 and fits the L2(nu) decay
/// rate against the supplied equilibrium-measure approximation. Requires
/// |Im s| + |l| >= 1, the regime the decay statement covers.
#[allow(clippy::too_many_arguments)]
pub fn decay_probe(
    map: &RationalMap,
    scheme: &CodingScheme,
    delta_est: f64,
    s: C64,
    ell: i64,
    n_steps: usize,
    depth: usize,
    measure: &EmpiricalMeasure,
) -> Result<ProbeReport<DecayOutcome>> {
    if s.im.abs() + (ell.unsigned_abs() as f64) < 1.0 {
        return Err(Error::Invalid("decay probe needs |Im(s)| + |l| >= 1".into()));
    }
    if n_steps < 4 {
        return Err(Error::Invalid("decay probe needs at least 4 steps".into()));
    }
    let ctx = TransferContext::new(map, scheme, depth)?;
    let normalized = NormalizedTransfer::new(&ctx, delta_est)?;

    // Normalization sanity on the basis.
    let ones = vec![C64::new(1.0, 0.0); ctx.len()];
    let fixed = normalized.apply(C64::new(delta_est, 0.0), 0, &ones)?;
    let normalization_defect = fixed
        .iter()
        .map(|v| (v - C64::new(1.0, 0.0)).norm())
        .fold(0.0_f64, f64::max);

    // Where each measure point reads the basis function.
    let slots: Vec<usize> = measure
        .points
        .iter()
        .map(|&p| ctx.locate(map, scheme, p))
        .collect::<Result<Vec<_>>>()?;

    let l2 = |h: &[C64]| -> f64 {
        let mut acc = 0.0;
        for (slot, w) in slots.iter().zip(&measure.weights) {
            acc += w * h[*slot].norm_sqr();
        }
        acc.sqrt()
    };

    let mut h = ones;
    let mut norms = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        h = normalized.apply(s, ell, &h)?;
        let norm = l2(&h);
        norms.push(norm);
        if norm < 1e-140 {
            break;
        }
    }
    if norms.len() < 4 {
        return Err(Error::FitDegenerate(format!(
            "norms underflowed after {} steps",
            norms.len()
        )));
    }
    let start = norms.len() / 2;
    let pts: Vec<(f64, f64)> = norms[start..]
        .iter()
        .enumerate()
        .map(|(k, &n)| ((start + k + 1) as f64, n.ln()))
        .collect();
    let slope = least_squares_slope(&pts)
        .ok_or_else(|| Error::FitDegenerate("decay fit has no spread".into()))?;
    let rho_hat = slope.exp();

    Ok(ProbeReport {
        kind: "decay",
        map_hash: map.description_hash(),
        parameters: serde_json::json!({
            "s": [s.re, s.im],
            "ell": ell,
            "n_steps": n_steps,
            "depth": depth,
            "measure_level": measure.level,
            "delta_est": delta_est,
        }),
        outcome: DecayOutcome {
            rho_hat,
            norms,
            normalization_defect,
        },
        sample_count: measure.points.len(),
        tolerance: 1e-12,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

#[derive(Debug, Clone, Serialize)]
pub struct NliOutcome {
    /// min over the grid of the smallest singular value of the Jacobian
    /// of (tau-tilde, theta-tilde).
    pub min_singular_value: f64,
    pub max_singular_value: f64,
    /// |sigma_min(h) - sigma_min(2h)| Richardson-style step check.
    pub fd_check: f64,
    /// For maps preserving the real axis: max |d tau-tilde / dx| along a
    /// real segment of the grid, the one-dimensional variant.
    pub real_axis_dtau_max: Option<f64>,
}

/// Parameters of the non-local-integrability probe: two backward words
/// and a square evaluation grid inside the coding base region.
#[derive(Debug, Clone, Serialize)]
pub struct NliParams {
    pub word1: SymbolWord,
    pub word2: SymbolWord,
    pub grid_center: (f64, f64),
    pub grid_halfwidth: f64,
    pub grid_n: usize,
    pub fd_step: f64,
}

impl NliParams {
    /// Grid defaults per scheme; words must still be chosen by the caller.
    pub fn with_default_grid(
        scheme: &CodingScheme,
        word1: SymbolWord,
        word2: SymbolWord,
    ) -> Self {
        let (center, halfwidth) = match scheme {
            CodingScheme::FullShift { center, radius, .. } => (*center, 0.35 * radius),
            CodingScheme::UserMarkov {
                base_points,
                piece_diameters,
                ..
            } => (base_points[0], 0.2 * piece_diameters[0].max(1e-3)),
        };
        NliParams {
            word1,
            word2,
            grid_center: (center.re, center.im),
            grid_halfwidth: halfwidth,
            grid_n: 7,
            fd_step: 1e-5,
        }
    }
}

/// Default word pair for the NLI probe: greedy smallest and greedy
/// largest admissible backward words of the given length that can be
/// applied to points near piece 0, where the default grid sits.
pub fn default_nli_words(scheme: &CodingScheme, len: usize) -> Result<(SymbolWord, SymbolWord)> {
    let k = scheme.num_symbols();
    if k < 2 {
        return Err(Error::Invalid("NLI needs at least two symbols".into()));
    }
    let greedy = |smallest: bool| -> Option<Vec<usize>> {
        let candidates: Vec<usize> = if smallest {
            (0..k).collect()
        } else {
            (0..k).rev().collect()
        };
        let start = candidates.iter().copied().find(|&s| scheme.allows(s, 0))?;
        let mut word = vec![start];
        for _ in 1..len {
            let prev = *word.last().unwrap();
            let next = candidates.iter().copied().find(|&s| scheme.allows(s, prev))?;
            word.push(next);
        }
        Some(word)
    };
    match (greedy(true), greedy(false)) {
        (Some(a), Some(b)) if a != b => Ok((SymbolWord::new(a), SymbolWord::new(b))),
        _ => Err(Error::Invalid(
            "could not derive two distinct admissible NLI words".into(),
        )),
    }
}

/// Sum of tau and (unreduced) theta over the backward orbit of the word.
fn pullback_sums(
    map: &RationalMap,
    scheme: &CodingScheme,
    word: &SymbolWord,
    z: C64,
) -> Result<(f64, f64)> {
    let mut tau = 0.0;
    let mut theta = 0.0;
    let mut acc = z;
    for (step, &sym) in word.symbols().iter().enumerate() {
        acc = crate::coding::branch_step(map, scheme, sym, acc, MERGE_TOL, step)?;
        let d = map.derivative(acc)?;
        let mag = d.norm();
        if mag < 1e-12 {
            return Err(Error::CriticalProximity { distance: mag });
        }
        tau += mag.ln();
        theta += d.im.atan2(d.re);
    }
    Ok((tau, theta))
}

/// tau-tilde and theta-tilde: Birkhoff sums along the two branch words,
/// differenced.
fn branch_difference(
    map: &RationalMap,
    scheme: &CodingScheme,
    params: &NliParams,
    z: C64,
) -> Result<(f64, f64)> {
    let (t1, h1) = pullback_sums(map, scheme, &params.word1, z)?;
    let (t2, h2) = pullback_sums(map, scheme, &params.word2, z)?;
    Ok((t1 - t2, h1 - h2))
}

/// Smallest and largest singular value of the finite-difference Jacobian
/// of (tau-tilde, theta-tilde) at z.
fn jacobian_singular_values(
    map: &RationalMap,
    scheme: &CodingScheme,
    params: &NliParams,
    z: C64,
    h: f64,
) -> Result<(f64, f64)> {
    let ex = C64::new(h, 0.0);
    let ey = C64::new(0.0, h);
    let (tpx, hpx) = branch_difference(map, scheme, params, z + ex)?;
    let (tmx, hmx) = branch_difference(map, scheme, params, z - ex)?;
    let (tpy, hpy) = branch_difference(map, scheme, params, z + ey)?;
    let (tmy, hmy) = branch_difference(map, scheme, params, z - ey)?;
    let j11 = (tpx - tmx) / (2.0 * h);
    let j12 = (tpy - tmy) / (2.0 * h);
    // Angle differences go through the principal branch so a 2pi sheet
    // jump between stencil points cannot masquerade as a huge gradient.
    let j21 = reduce_angle(hpx - hmx) / (2.0 * h);
    let j22 = reduce_angle(hpy - hmy) / (2.0 * h);
    let t = j11 * j11 + j12 * j12 + j21 * j21 + j22 * j22;
    let det = j11 * j22 - j12 * j21;
    let disc = (0.25 * t * t - det * det).max(0.0).sqrt();
    let s_max = (0.5 * t + disc).max(0.0).sqrt();
    let s_min = (0.5 * t - disc).max(0.0).sqrt();
    Ok((s_min, s_max))
}

/// Probes the non-local-integrability map (tau-tilde, theta-tilde) on a
/// grid: its Jacobian is nondegenerate exactly when the two sources of
/// oscillation are genuinely independent, and collapses for monomial-like
/// maps.
pub fn nli_probe(
    map: &RationalMap,
    scheme: &CodingScheme,
    params: &NliParams,
) -> Result<ProbeReport<NliOutcome>> {
    if params.word1 == params.word2 {
        return Err(Error::Invalid("NLI probe needs two distinct words".into()));
    }
    if params.word1.len() != params.word2.len() || params.word1.len() < 3 {
        return Err(Error::Invalid(
            "NLI words must share a length of at least 3".into(),
        ));
    }
    if params.grid_n < 2 {
        return Err(Error::Invalid("NLI grid needs at least 2x2 points".into()));
    }
    let center = C64::new(params.grid_center.0, params.grid_center.1);
    let n = params.grid_n;
    let mut grid = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fx = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
            let fy = 2.0 * j as f64 / (n - 1) as f64 - 1.0;
            let z = center + C64::new(fx, fy) * params.grid_halfwidth;
            if !scheme.in_base_region(z) {
                return Err(Error::GridOutsideBase {
                    point: format!("{z}"),
                });
            }
            grid.push(z);
        }
    }
    let singulars: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&z| jacobian_singular_values(map, scheme, params, z, params.fd_step))
        .collect::<Result<Vec<_>>>()?;
    let min_singular_value = singulars.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let max_singular_value = singulars.iter().map(|s| s.1).fold(0.0_f64, f64::max);

    // Step-halving check at the grid centre.
    let coarse = jacobian_singular_values(map, scheme, params, center, 2.0 * params.fd_step)?;
    let fine = jacobian_singular_values(map, scheme, params, center, params.fd_step)?;
    let fd_check = (coarse.0 - fine.0).abs();

    // One-dimensional variant along the real axis for real maps.
    let real_axis_dtau_max = if map.has_real_coefficients() {
        let mut best: Option<f64> = None;
        for i in 0..n {
            let fx = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
            let x = center.re + fx * params.grid_halfwidth;
            let z = C64::new(x, 0.0);
            if !scheme.in_base_region(z) {
                continue;
            }
            let h = params.fd_step;
            let plus = branch_difference(map, scheme, params, z + C64::new(h, 0.0));
            let minus = branch_difference(map, scheme, params, z - C64::new(h, 0.0));
            if let (Ok((tp, _)), Ok((tm, _))) = (plus, minus) {
                let d = ((tp - tm) / (2.0 * h)).abs();
                best = Some(best.map_or(d, |b: f64| b.max(d)));
            }
        }
        best
    } else {
        None
    };

    Ok(ProbeReport {
        kind: "nli",
        map_hash: map.description_hash(),
        parameters: serde_json::to_value(params).expect("params serialize"),
        outcome: NliOutcome {
            min_singular_value,
            max_singular_value,
            fd_check,
            real_axis_dtau_max,
        },
        sample_count: grid.len(),
        tolerance: params.fd_step,
    })
}

/// All depth-m cylinder centres whose itinerary starts with the prefix.
pub fn cylinder_points(
    map: &RationalMap,
    scheme: &CodingScheme,
    prefix: &[usize],
    depth: usize,
) -> Result<Vec<C64>> {
    if depth < prefix.len() {
        return Err(Error::Invalid("cylinder depth shorter than prefix".into()));
    }
    let words: Vec<Vec<usize>> = admissible_itineraries(scheme, depth)
        .into_iter()
        .filter(|w| w.starts_with(prefix))
        .collect();
    words
        .par_iter()
        .map(|w| crate::coding::itinerary_point(map, scheme, w, MERGE_TOL))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct NcpOutcome {
    /// (direction angle, min over samples of delta_1(x, eps, w)).
    pub per_direction: Vec<(f64, f64)>,
    pub global_min: f64,
    /// The modulus variant min over samples of max |y - x| / eps, the
    /// one-dimensional fallback for Julia sets on a line.
    pub modulus_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NcpParams {
    pub directions: usize,
    pub radii: Vec<f64>,
    pub center_samples: usize,
    pub seed: u64,
}

/// Non-concentration probe: for sampled centres x, radii eps and test
/// directions w, measures how far the cylinder spreads away from the line
/// through x perpendicular to w, relative to eps.
pub fn ncp_probe(
    map_hash: &str,
    points: &[C64],
    params: &NcpParams,
) -> Result<ProbeReport<NcpOutcome>> {
    const MIN_POINTS: usize = 1000;
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientPoints {
            got: points.len(),
            need: MIN_POINTS,
        });
    }
    if params.directions == 0 || params.radii.is_empty() {
        return Err(Error::Invalid("NCP probe needs directions and radii".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut rng);
    let centers: Vec<C64> = order
        .iter()
        .take(params.center_samples.min(points.len()))
        .map(|&i| points[i])
        .collect();

    let directions: Vec<f64> = (0..params.directions)
        .map(|k| std::f64::consts::PI * k as f64 / params.directions as f64)
        .collect();

    let mut per_direction = Vec::with_capacity(directions.len());
    let mut modulus_min = f64::INFINITY;
    for &angle in &directions {
        let w = C64::from_polar(1.0, angle);
        let mut dir_min = f64::INFINITY;
        for &x in &centers {
            for &eps in &params.radii {
                let mut best = 0.0_f64;
                for &y in points {
                    let d = y - x;
                    if d.norm() <= eps {
                        best = best.max((d.re * w.re + d.im * w.im).abs() / eps);
                    }
                }
                dir_min = dir_min.min(best);
            }
        }
        per_direction.push((angle, dir_min));
    }
    for &x in &centers {
        for &eps in &params.radii {
            let mut best = 0.0_f64;
            for &y in points {
                let d = (y - x).norm();
                if d <= eps {
                    best = best.max(d / eps);
                }
            }
            modulus_min = modulus_min.min(best);
        }
    }
    let global_min = per_direction
        .iter()
        .map(|d| d.1)
        .fold(f64::INFINITY, f64::min);

    Ok(ProbeReport {
        kind: "ncp",
        map_hash: map_hash.to_string(),
        parameters: serde_json::to_value(params).expect("params serialize"),
        outcome: NcpOutcome {
            per_direction,
            global_min,
            modulus_min,
        },
        sample_count: centers.len() * params.radii.len(),
        tolerance: 1e-9,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingOutcome {
    pub max_ratio: f64,
    /// Histogram of the observed ratios nu(B_2eps)/nu(B_eps): bin lower
    /// edges (width 0.25 from 1.0) and counts.
    pub histogram: Vec<(f64, usize)>,
    /// Median nearest-neighbour spacing; the resolution floor is 10x this.
    pub resolution: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingParams {
    pub radii: Vec<f64>,
    pub center_samples: usize,
    pub seed: u64,
}

/// Doubling probe on a (piece-restricted) empirical measure: ratios
/// nu(B_2eps(x)) / nu(B_eps(x)) over sampled support centres.
pub fn doubling_probe(
    map_hash: &str,
    measure: &EmpiricalMeasure,
    params: &DoublingParams,
) -> Result<ProbeReport<DoublingOutcome>> {
    if measure.points.len() < 8 {
        return Err(Error::InsufficientPoints {
            got: measure.points.len(),
            need: 8,
        });
    }
    let resolution = median_nn_spacing(&measure.points);
    let floor = 10.0 * resolution;
    for &eps in &params.radii {
        if eps < floor {
            return Err(Error::ResolutionTooFine {
                radius: eps,
                floor,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..measure.points.len()).collect();
    order.shuffle(&mut rng);
    let centers: Vec<C64> = order
        .iter()
        .take(params.center_samples.min(measure.points.len()))
        .map(|&i| measure.points[i])
        .collect();

    let mut max_ratio = 0.0_f64;
    let mut ratios = Vec::with_capacity(centers.len() * params.radii.len());
    for &x in &centers {
        for &eps in &params.radii {
            let mut inner = 0.0;
            let mut outer = 0.0;
            for (p, w) in measure.points.iter().zip(&measure.weights) {
                let d = (p - x).norm();
                if d <= eps {
                    inner += w;
                }
                if d <= 2.0 * eps {
                    outer += w;
                }
            }
            if inner > 0.0 {
                let ratio = outer / inner;
                ratios.push(ratio);
                max_ratio = max_ratio.max(ratio);
            }
        }
    }
    let mut histogram: Vec<(f64, usize)> = Vec::new();
    for &r in &ratios {
        let bin = 1.0 + 0.25 * ((r - 1.0) / 0.25).floor().max(0.0);
        match histogram.iter_mut().find(|(lo, _)| (*lo - bin).abs() < 1e-12) {
            Some((_, count)) => *count += 1,
            None => histogram.push((bin, 1)),
        }
    }
    histogram.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(ProbeReport {
        kind: "doubling",
        map_hash: map_hash.to_string(),
        parameters: serde_json::to_value(params).expect("params serialize"),
        outcome: DoublingOutcome {
            max_ratio,
            histogram,
            resolution,
        },
        sample_count: ratios.len(),
        tolerance: resolution,
    })
}

/// Restriction of an empirical measure to one partition piece (weights
/// are kept unnormalized: doubling ratios are scale-free).
pub fn restrict_to_piece(
    measure: &EmpiricalMeasure,
    scheme: &CodingScheme,
    piece: usize,
) -> EmpiricalMeasure {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (p, w) in measure.points.iter().zip(&measure.weights) {
        if scheme.classify(*p) == piece {
            points.push(*p);
            weights.push(*w);
        }
    }
    EmpiricalMeasure {
        points,
        weights,
        level: measure.level,
        exponent: measure.exponent,
    }
}

fn median_nn_spacing(points: &[C64]) -> f64 {
    let mut sorted: Vec<C64> = points.to_vec();
    sorted.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut spacings: Vec<f64> = Vec::with_capacity(sorted.len());
    for (i, p) in sorted.iter().enumerate() {
        let mut best = f64::INFINITY;
        // Window scan in the re-sorted order is enough for a median.
        let lo = i.saturating_sub(12);
        let hi = (i + 13).min(sorted.len());
        for (j, q) in sorted[lo..hi].iter().enumerate() {
            if lo + j != i {
                best = best.min((p - q).norm());
            }
        }
        if best.is_finite() {
            spacings.push(best);
        }
    }
    spacings.sort_by(|a, b| a.partial_cmp(b).unwrap());
    spacings[spacings.len() / 2]
}

/// Backward-word evaluation re-exported at probe level: g_I applied to z.
pub fn apply_word(
    map: &RationalMap,
    scheme: &CodingScheme,
    word: &SymbolWord,
    z: C64,
) -> Result<C64> {
    backward_point(map, scheme, word, z, MERGE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::detect_full_shift;
    use crate::fixtures;
    use crate::orbits::{Backend, OrbitDatabase, Tolerances, DEFAULT_DEGREE_CAP};
    use crate::thermo::{equilibrium_weights, estimate_delta};

    fn build(name: &str, n_max: usize) -> (RationalMap, CodingScheme, OrbitDatabase) {
        let map = fixtures::named_map(name).unwrap();
        let scheme = fixtures::named_coding(name).unwrap();
        let db = OrbitDatabase::build(
            &map,
            Some(&scheme),
            n_max,
            Backend::Symbolic,
            DEFAULT_DEGREE_CAP,
            Tolerances::default(),
        )
        .unwrap();
        (map, scheme, db)
    }

    #[test]
    fn decay_lattice_case_shows_no_decay() {
        // Constant tau on the circle makes e^{-ib tau} a global phase per
        // level: norms stay put and the fitted rate is 1.
        let (map, scheme, db) = build("z2", 10);
        let measure = equilibrium_weights(&db, &map, 10, 1.0).unwrap();
        let report = decay_probe(
            &map,
            &scheme,
            1.0,
            C64::new(1.0, 5.0),
            0,
            16,
            8,
            &measure,
        )
        .unwrap();
        assert!(
            report.outcome.rho_hat >= 0.999,
            "lattice rho_hat = {}",
            report.outcome.rho_hat
        );
        assert!(report.outcome.normalization_defect <= 1e-6);
    }

    #[test]
    fn decay_generic_map_contracts() {
        let (map, scheme, db) = build("z2p2p2i", 10);
        let delta = estimate_delta(&db, 4, 10).unwrap().delta;
        let measure = equilibrium_weights(&db, &map, 10, delta).unwrap();
        let report = decay_probe(
            &map,
            &scheme,
            delta,
            C64::new(delta, 5.0),
            0,
            20,
            8,
            &measure,
        )
        .unwrap();
        assert!(
            report.outcome.rho_hat < 0.999,
            "rho_hat = {}",
            report.outcome.rho_hat
        );
        assert!(report.outcome.normalization_defect <= 1e-6);
    }

    #[test]
    fn decay_probe_validates_oscillation() {
        let (map, scheme, db) = build("z2p5", 6);
        let measure = equilibrium_weights(&db, &map, 6, 0.5).unwrap();
        assert!(decay_probe(
            &map,
            &scheme,
            0.5,
            C64::new(0.5, 0.2),
            0,
            8,
            6,
            &measure
        )
        .is_err());
    }

    #[test]
    fn nli_degenerates_for_monomial() {
        let (map, scheme, _) = build("z2", 1);
        let params = NliParams::with_default_grid(
            &scheme,
            SymbolWord::parse("000000").unwrap(),
            SymbolWord::parse("101010").unwrap(),
        );
        let report = nli_probe(&map, &scheme, &params).unwrap();
        assert!(
            report.outcome.min_singular_value <= 1e-8,
            "monomial NLI should collapse, got {}",
            report.outcome.min_singular_value
        );
    }

    #[test]
    fn nli_nondegenerate_for_full_shift() {
        let map = fixtures::named_map("z2p5").unwrap();
        let scheme = detect_full_shift(&map).unwrap();
        let params = NliParams::with_default_grid(
            &scheme,
            SymbolWord::parse("000000").unwrap(),
            SymbolWord::parse("111111").unwrap(),
        );
        let report = nli_probe(&map, &scheme, &params).unwrap();
        assert!(
            report.outcome.min_singular_value >= 1e-3,
            "NLI singular value {}",
            report.outcome.min_singular_value
        );
        // Stable under grid refinement.
        let mut fine = params.clone();
        fine.grid_n = 13;
        let refined = nli_probe(&map, &scheme, &fine).unwrap();
        let rel = (refined.outcome.min_singular_value - report.outcome.min_singular_value).abs()
            / report.outcome.min_singular_value;
        assert!(rel < 0.5, "refinement moved the minimum by {rel}");
    }

    #[test]
    fn nli_real_variant_sees_gradient() {
        let map = fixtures::named_map("z2m6").unwrap();
        let scheme = detect_full_shift(&map).unwrap();
        let params = NliParams::with_default_grid(
            &scheme,
            SymbolWord::parse("000000").unwrap(),
            SymbolWord::parse("111111").unwrap(),
        );
        let report = nli_probe(&map, &scheme, &params).unwrap();
        let dtau = report
            .outcome
            .real_axis_dtau_max
            .expect("real map should report the 1-D variant");
        assert!(dtau > 1e-3, "d tau-tilde / dx = {dtau}");
    }

    #[test]
    fn ncp_on_real_cantor_set() {
        let map = fixtures::named_map("z2m6").unwrap();
        let scheme = detect_full_shift(&map).unwrap();
        let points = cylinder_points(&map, &scheme, &[0], 11).unwrap();
        assert!(points.len() >= 1000);
        let diam = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| (a - b).norm()))
            .fold(0.0_f64, f64::max);
        let params = NcpParams {
            directions: 4,
            radii: vec![diam * 0.1, diam * 0.2],
            center_samples: 24,
            seed: 7,
        };
        let report = ncp_probe(&map.description_hash(), &points, &params).unwrap();
        // Direction index 2 of 4 is exactly vertical.
        let vertical = report
            .outcome
            .per_direction
            .iter()
            .find(|(angle, _)| (angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12)
            .expect("vertical direction present");
        assert!(
            vertical.1 <= 1e-9,
            "vertical concentration {} on a real Julia set",
            vertical.1
        );
        assert!(report.outcome.modulus_min > 0.0);
    }

    #[test]
    fn ncp_positive_for_planar_cantor_dust() {
        let map = fixtures::named_map("z2p2p2i").unwrap();
        let scheme = detect_full_shift(&map).unwrap();
        let points = cylinder_points(&map, &scheme, &[0], 11).unwrap();
        let diam = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| (a - b).norm()))
            .fold(0.0_f64, f64::max);
        let params = NcpParams {
            directions: 8,
            radii: vec![diam * 0.1, diam * 0.2],
            center_samples: 24,
            seed: 7,
        };
        let report = ncp_probe(&map.description_hash(), &points, &params).unwrap();
        assert!(
            report.outcome.global_min > 0.0,
            "global min {}",
            report.outcome.global_min
        );
    }

    #[test]
    fn ncp_needs_enough_points() {
        let params = NcpParams {
            directions: 4,
            radii: vec![0.1],
            center_samples: 8,
            seed: 0,
        };
        let few = vec![C64::new(0.0, 0.0); 10];
        assert!(matches!(
            ncp_probe("x", &few, &params),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn doubling_on_circle_arcs() {
        // Uniform measure on circle points doubles like arc length.
        let (map, scheme, db) = build("z2", 12);
        let measure = equilibrium_weights(&db, &map, 12, 1.0).unwrap();
        let piece = restrict_to_piece(&measure, &scheme, 0);
        let params = DoublingParams {
            radii: vec![0.04, 0.08, 0.16],
            center_samples: 48,
            seed: 3,
        };
        let report = doubling_probe(&map.description_hash(), &piece, &params).unwrap();
        assert!(
            report.outcome.max_ratio >= 1.8 && report.outcome.max_ratio <= 2.5,
            "circle doubling ratio {}",
            report.outcome.max_ratio
        );
    }

    #[test]
    fn doubling_monotone_and_resolution_guard() {
        let (map, scheme, db) = build("z2p5", 10);
        let delta = estimate_delta(&db, 4, 10).unwrap().delta;
        let measure = equilibrium_weights(&db, &map, 10, delta).unwrap();
        let piece = restrict_to_piece(&measure, &scheme, 0);
        let params = DoublingParams {
            radii: vec![0.1, 0.2],
            center_samples: 32,
            seed: 11,
        };
        let report = doubling_probe(&map.description_hash(), &piece, &params).unwrap();
        // Ratios are by construction >= 1.
        assert!(report.outcome.max_ratio >= 1.0);
        assert!(report.outcome.max_ratio.is_finite());

        let fine = DoublingParams {
            radii: vec![1e-9],
            center_samples: 4,
            seed: 0,
        };
        assert!(matches!(
            doubling_probe(&map.description_hash(), &piece, &fine),
            Err(Error::ResolutionTooFine { .. })
        ));
    }

    #[test]
    fn default_words_are_admissible() {
        let scheme = fixtures::named_coding("z2").unwrap();
        let (a, b) = default_nli_words(&scheme, 6).unwrap();
        assert_ne!(a, b);
        // Consecutive backward applicability: allows(next, prev).
        for w in [&a, &b] {
            for pair in w.symbols().windows(2) {
                assert!(scheme.allows(pair[1], pair[0]), "word {w:?}");
            }
        }
        let full = fixtures::named_coding("z2p5").unwrap();
        let (c, d) = default_nli_words(&full, 6).unwrap();
        assert_eq!(c.symbols(), &[0; 6]);
        assert_eq!(d.symbols(), &[1; 6]);
    }

    #[test]
    fn probes_are_deterministic() {
        let map = fixtures::named_map("z2p2p2i").unwrap();
        let scheme = detect_full_shift(&map).unwrap();
        let points = cylinder_points(&map, &scheme, &[0], 11).unwrap();
        let params = NcpParams {
            directions: 6,
            radii: vec![0.05, 0.1],
            center_samples: 16,
            seed: 42,
        };
        let a = ncp_probe(&map.description_hash(), &points, &params).unwrap();
        let b = ncp_probe(&map.description_hash(), &points, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&a.outcome).unwrap(),
            serde_json::to_string(&b.outcome).unwrap()
        );
    }
}
