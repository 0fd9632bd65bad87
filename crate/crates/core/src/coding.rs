//! Symbolic coding of the Julia set: inverse branches, admissible words,
//! and the Cantor full-shift coding detected for escaping quadratic-like
//! polynomials. Markov codings for connected Julia sets are accepted as
//! user-supplied piece clouds, never constructed.

use serde::{Deserialize, Serialize};

use crate::map::RationalMap;
use crate::poly::roots;
use crate::{Error, Result, C64};

/// Default merge / point-identification tolerance at unit scale.
pub const MERGE_TOL: f64 = 1e-9;

/// A finite symbol string. Interpreted as an itinerary: symbol k is the
/// partition piece hit at time k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolWord(pub Vec<usize>);

impl SymbolWord {
    pub fn new(symbols: Vec<usize>) -> Self {
        SymbolWord(symbols)
    }

    pub fn constant(symbol: usize, len: usize) -> Self {
        SymbolWord(vec![symbol; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// Parses a word from a digit string such as "0101".
    pub fn parse(text: &str) -> Result<Self> {
        let mut symbols = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let d = ch
                .to_digit(10)
                .ok_or_else(|| Error::Invalid(format!("bad symbol '{ch}' in word")))?;
            symbols.push(d as usize);
        }
        if symbols.is_empty() {
            return Err(Error::Invalid("empty symbol word".into()));
        }
        Ok(SymbolWord(symbols))
    }
}

/// User-supplied Markov coding: row-major 0/1 transition matrix and one
/// sample cloud per partition piece.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserMarkovConfig {
    pub transition: Vec<Vec<u8>>,
    pub pieces: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone)]
pub enum CodingScheme {
    /// d disjoint preimage components of a base disk; the coding is the
    /// full shift on d symbols.
    FullShift {
        symbols: usize,
        center: C64,
        radius: f64,
        /// Preimages of the disk center, one per component, ordered by
        /// angle in [0, 2pi).
        component_centers: Vec<C64>,
        /// Measured max of 1/|f'| over sampled preimages (< 1).
        contraction: f64,
        /// Smallest measured gap between distinct components.
        min_gap: f64,
    },
    UserMarkov {
        transition: Vec<Vec<u8>>,
        pieces: Vec<Vec<C64>>,
        /// One representative per piece (the cloud point nearest its
        /// centroid).
        base_points: Vec<C64>,
        piece_diameters: Vec<f64>,
        contraction: f64,
    },
}

impl CodingScheme {
    pub fn num_symbols(&self) -> usize {
        match self {
            CodingScheme::FullShift { symbols, .. } => *symbols,
            CodingScheme::UserMarkov { pieces, .. } => pieces.len(),
        }
    }

    pub fn contraction(&self) -> f64 {
        match self {
            CodingScheme::FullShift { contraction, .. } => *contraction,
            CodingScheme::UserMarkov { contraction, .. } => *contraction,
        }
    }

    /// True when the branch g_{ij} : U_j -> U_i exists, i.e. f(P_i)
    /// covers P_j.
    pub fn allows(&self, i: usize, j: usize) -> bool {
        match self {
            CodingScheme::FullShift { .. } => true,
            CodingScheme::UserMarkov { transition, .. } => transition[i][j] == 1,
        }
    }

    /// A representative base point for pulling back along itineraries that
    /// start in the given piece.
    pub fn base_point(&self, piece: usize) -> C64 {
        match self {
            CodingScheme::FullShift { center, .. } => *center,
            CodingScheme::UserMarkov { base_points, .. } => base_points[piece],
        }
    }

    /// Rough linear scale of the coding region.
    pub fn scale(&self) -> f64 {
        match self {
            CodingScheme::FullShift { radius, .. } => *radius,
            CodingScheme::UserMarkov {
                piece_diameters, ..
            } => piece_diameters.iter().cloned().fold(1.0_f64, f64::max),
        }
    }

    /// Loose membership test for the pull-back domain.
    pub fn in_base_region(&self, z: C64) -> bool {
        match self {
            CodingScheme::FullShift { center, radius, .. } => (z - center).norm() <= 1.5 * radius,
            CodingScheme::UserMarkov {
                pieces,
                piece_diameters,
                ..
            } => pieces.iter().zip(piece_diameters).any(|(cloud, diam)| {
                cloud
                    .iter()
                    .any(|p| (z - p).norm() <= 0.75 * diam.max(MERGE_TOL))
            }),
        }
    }

    /// Classifies a point into the partition piece it is nearest to.
    /// Ties (corner points shared by closed pieces) go to the smaller
    /// index.
    pub fn classify(&self, z: C64) -> usize {
        match self {
            CodingScheme::FullShift {
                component_centers, ..
            } => nearest_index(component_centers.iter().map(|c| (z - c).norm())),
            CodingScheme::UserMarkov { pieces, .. } => nearest_index(
                pieces
                    .iter()
                    .map(|cloud| cloud.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)),
            ),
        }
    }

    fn target_distance(&self, symbol: usize, z: C64) -> f64 {
        match self {
            CodingScheme::FullShift {
                component_centers, ..
            } => (z - component_centers[symbol]).norm(),
            CodingScheme::UserMarkov { pieces, .. } => pieces[symbol]
                .iter()
                .map(|p| (z - p).norm())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn from_user_config(config: &UserMarkovConfig) -> Result<Self> {
        let k = config.pieces.len();
        if k == 0 {
            return Err(Error::Invalid("coding config has no pieces".into()));
        }
        if config.transition.len() != k || config.transition.iter().any(|row| row.len() != k) {
            return Err(Error::Invalid(format!(
                "transition matrix must be {k} x {k}"
            )));
        }
        for row in &config.transition {
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Invalid("transition entries must be 0 or 1".into()));
            }
        }
        if !is_topologically_mixing(&config.transition) {
            return Err(Error::Invalid(
                "transition matrix is not topologically mixing".into(),
            ));
        }
        let pieces: Vec<Vec<C64>> = config
            .pieces
            .iter()
            .map(|cloud| cloud.iter().map(|p| C64::new(p[0], p[1])).collect())
            .collect();
        if pieces.iter().any(|c: &Vec<C64>| c.is_empty()) {
            return Err(Error::Invalid("every piece needs sample points".into()));
        }
        let base_points = pieces
            .iter()
            .map(|cloud| {
                let centroid = cloud.iter().sum::<C64>() / cloud.len() as f64;
                cloud
                    .iter()
                    .copied()
                    .min_by(|a, b| {
                        (a - centroid)
                            .norm()
                            .partial_cmp(&(b - centroid).norm())
                            .unwrap()
                    })
                    .unwrap()
            })
            .collect();
        let piece_diameters = pieces
            .iter()
            .map(|cloud| {
                let mut d = 0.0_f64;
                for (i, a) in cloud.iter().enumerate() {
                    for b in &cloud[i + 1..] {
                        d = d.max((a - b).norm());
                    }
                }
                d
            })
            .collect();
        Ok(CodingScheme::UserMarkov {
            transition: config.transition.clone(),
            pieces,
            base_points,
            piece_diameters,
            // Filled in by measure_contraction once a map is attached.
            contraction: f64::NAN,
        })
    }

    /// Measures the branch contraction factor on the piece samples and
    /// stores it. Returns the measured value.
    pub fn measure_contraction(&mut self, map: &RationalMap) -> Result<f64> {
        let measured = match self {
            CodingScheme::FullShift { contraction, .. } => *contraction,
            CodingScheme::UserMarkov {
                transition,
                pieces,
                contraction,
                ..
            } => {
                let mut worst = 0.0_f64;
                let k = pieces.len();
                for i in 0..k {
                    for j in 0..k {
                        if transition[i][j] != 1 {
                            continue;
                        }
                        for &z in pieces[j].iter().step_by(1 + pieces[j].len() / 32) {
                            let w = select_preimage_raw(map, z, |cand| {
                                pieces[i]
                                    .iter()
                                    .map(|p| (cand - p).norm())
                                    .fold(f64::INFINITY, f64::min)
                            })?;
                            let d = map.derivative(w)?.norm();
                            if d > 0.0 {
                                worst = worst.max(1.0 / d);
                            }
                        }
                    }
                }
                *contraction = worst;
                worst
            }
        };
        if measured >= 1.0 {
            return Err(Error::Invalid(format!(
                "branches are not uniform contractions (factor {measured})"
            )));
        }
        Ok(measured)
    }
}

fn nearest_index(distances: impl Iterator<Item = f64>) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (k, d) in distances.enumerate() {
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}

fn is_topologically_mixing(m: &[Vec<u8>]) -> bool {
    let k = m.len();
    // Boolean matrix powers; strict positivity of some power up to 2^6.
    let mut acc: Vec<Vec<u8>> = m.to_vec();
    for _ in 0..64 {
        if acc.iter().all(|row| row.iter().all(|&v| v > 0)) {
            return true;
        }
        let mut next = vec![vec![0u8; k]; k];
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    if acc[i][l] > 0 && m[l][j] > 0 {
                        next[i][j] = 1;
                        break;
                    }
                }
            }
        }
        if next == acc {
            return false;
        }
        acc = next;
    }
    false
}

/// All d solutions of f(w) = z, each with multiplicity one.
///
/// Fails with `CriticalValueCollision` when two solutions are closer than
/// the merge tolerance, which happens exactly when z is (numerically) a
/// critical value.
pub fn preimages(map: &RationalMap, z: C64) -> Result<Vec<C64>> {
    let mut ws = preimage_candidates(map, z)?;
    let scale = z.norm().max(1.0);
    for i in 0..ws.len() {
        for j in (i + 1)..ws.len() {
            let sep = (ws[i] - ws[j]).norm();
            if sep < MERGE_TOL * scale {
                return Err(Error::CriticalValueCollision { separation: sep });
            }
        }
    }
    ws.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok(ws)
}

fn preimage_candidates(map: &RationalMap, z: C64) -> Result<Vec<C64>> {
    // Monic quadratic fast path: w = +- sqrt(z - c).
    if let Some(c) = monic_quadratic_constant(map) {
        let s = (z - c).sqrt();
        return Ok(vec![s, -s]);
    }
    let shifted = map
        .numerator()
        .sub(&map.denominator().scale(z))
        .trimmed(1e-13);
    let mut ws = roots(&shifted)?;
    // Newton polish against the map itself.
    for w in ws.iter_mut() {
        for _ in 0..2 {
            let fv = map.evaluate(*w)?;
            let dv = map.derivative(*w)?;
            if dv.norm() < 1e-300 {
                break;
            }
            *w -= (fv - z) / dv;
        }
    }
    Ok(ws)
}

fn monic_quadratic_constant(map: &RationalMap) -> Option<C64> {
    if !map.is_polynomial() || map.degree() != 2 {
        return None;
    }
    let den = map.denominator().leading();
    let c = map.numerator().coeffs();
    if c.len() == 3 && c[1].norm() == 0.0 && (c[2] / den - C64::new(1.0, 0.0)).norm() < 1e-14 {
        Some(c[0] / den)
    } else {
        None
    }
}

fn select_preimage_raw(
    map: &RationalMap,
    z: C64,
    dist_to_target: impl Fn(C64) -> f64,
) -> Result<C64> {
    let cands = preimage_candidates(map, z)?;
    let mut best = (C64::new(0.0, 0.0), f64::INFINITY);
    let mut second = f64::INFINITY;
    for &w in &cands {
        let d = dist_to_target(w);
        if d < best.1 {
            second = best.1;
            best = (w, d);
        } else if d < second {
            second = d;
        }
    }
    let _ = second;
    Ok(best.0)
}

/// One backward step: among the preimages of `z`, the one lying in the
/// component/piece labelled `symbol`. The margin between the best and
/// second-best candidate must exceed 10x the tolerance.
pub fn branch_step(
    map: &RationalMap,
    scheme: &CodingScheme,
    symbol: usize,
    z: C64,
    tol: f64,
    step: usize,
) -> Result<C64> {
    if symbol >= scheme.num_symbols() {
        return Err(Error::Invalid(format!(
            "symbol {symbol} out of range for a {}-symbol coding",
            scheme.num_symbols()
        )));
    }
    let cands = preimage_candidates(map, z)?;
    let mut best = (C64::new(0.0, 0.0), f64::INFINITY);
    let mut second = f64::INFINITY;
    for &w in &cands {
        let d = scheme.target_distance(symbol, w);
        if d < best.1 {
            second = best.1;
            best = (w, d);
        } else if d < second {
            second = d;
        }
    }
    let margin = second - best.1;
    let scale = scheme.scale();
    if !margin.is_finite() || margin < 10.0 * tol * scale.max(1.0) {
        return Err(Error::BranchAmbiguity { margin, step });
    }
    Ok(best.0)
}

/// g_I(z): iterated branch-selected preimage along the word, applied in
/// list order, so appending a symbol prepends one more backward step:
/// f(backward_point(word + [i], z)) = backward_point(word, z).
pub fn backward_point(
    map: &RationalMap,
    scheme: &CodingScheme,
    word: &SymbolWord,
    z: C64,
    tol: f64,
) -> Result<C64> {
    if !scheme.in_base_region(z) {
        return Err(Error::GridOutsideBase {
            point: format!("{z}"),
        });
    }
    let mut acc = z;
    for (step, &s) in word.symbols().iter().enumerate() {
        acc = branch_step(map, scheme, s, acc, tol, step)?;
    }
    Ok(acc)
}

/// The centre of the depth-m cylinder with the given forward itinerary:
/// the pull-back of a base point along the itinerary, innermost symbol
/// last. The result lies in piece `itinerary[0]`. The pull-back starts in
/// a piece the last symbol's branch can be applied to, i.e. one covered
/// by f(P_last).
pub fn itinerary_point(
    map: &RationalMap,
    scheme: &CodingScheme,
    itinerary: &[usize],
    tol: f64,
) -> Result<C64> {
    let last = *itinerary
        .last()
        .ok_or_else(|| Error::Invalid("empty itinerary".into()))?;
    let successor = (0..scheme.num_symbols())
        .find(|&j| scheme.allows(last, j))
        .ok_or_else(|| Error::Invalid(format!("symbol {last} has no admissible successor")))?;
    let mut acc = scheme.base_point(successor);
    for (step, &s) in itinerary.iter().enumerate().rev() {
        acc = branch_step(map, scheme, s, acc, tol, step)?;
    }
    Ok(acc)
}

/// The forward itinerary of a point to depth m.
pub fn itinerary_of(
    map: &RationalMap,
    scheme: &CodingScheme,
    x: C64,
    m: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(m);
    let mut z = x;
    for _ in 0..m {
        out.push(scheme.classify(z));
        z = map.evaluate(z)?;
    }
    Ok(out)
}

/// All admissible forward itineraries of the given length, in
/// lexicographic order.
pub fn admissible_itineraries(scheme: &CodingScheme, len: usize) -> Vec<Vec<usize>> {
    let k = scheme.num_symbols();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..k).map(|s| vec![s]).collect();
    stack.reverse();
    while let Some(w) = stack.pop() {
        if w.len() == len {
            out.push(w);
            continue;
        }
        let last = *w.last().unwrap();
        for next in (0..k).rev() {
            // Forward admissibility: f(P_last) must cover P_next.
            if scheme.allows(last, next) {
                let mut ext = w.clone();
                ext.push(next);
                stack.push(ext);
            }
        }
    }
    out
}

/// All cyclically admissible itineraries of length n (periodic words), in
/// lexicographic order.
pub fn periodic_itineraries(scheme: &CodingScheme, n: usize) -> Vec<Vec<usize>> {
    admissible_itineraries(scheme, n)
        .into_iter()
        .filter(|w| scheme.allows(w[n - 1], w[0]))
        .collect()
}

/// Detects the Cantor full-shift coding for a polynomial whose critical
/// orbits all escape: a base disk whose d preimage components are disjoint
/// sub-disks.
///
/// The disk radius is searched between the Julia-set bound and the
/// smallest critical-value magnitude; disjointness and containment are
/// verified on 256 boundary samples per component.
pub fn detect_full_shift(map: &RationalMap) -> Result<CodingScheme> {
    if !map.is_polynomial() {
        return Err(Error::NotCantor("map is not a polynomial".into()));
    }
    let cert = crate::map::classify_hyperbolic(map, 2000, map.escape_radius());
    if cert.verdict != crate::map::Verdict::Hyperbolic {
        return Err(Error::NotCantor(format!(
            "hyperbolicity verdict is {:?}",
            cert.verdict
        )));
    }
    if !cert
        .fates
        .iter()
        .all(|f| matches!(f, crate::map::CriticalFate::Escaped { .. }))
    {
        return Err(Error::NotCantor(
            "a critical orbit stays bounded; the Julia set is not a Cantor dust of this kind"
                .into(),
        ));
    }

    let r_lo = map.julia_bound() * 1.02;
    let r_hi = map
        .critical_values()?
        .iter()
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min)
        * 0.98;
    if !(r_lo < r_hi) {
        return Err(Error::NotCantor(format!(
            "no centered disk separates the Julia set (radius {r_lo:.3}) from the critical values (radius {r_hi:.3})"
        )));
    }

    // Try the midpoint first, then fan out; take the first radius that
    // verifies. Deterministic order.
    let mut order = vec![8usize];
    for k in 1..=8 {
        if 8 >= k {
            order.push(8 - k);
        }
        if 8 + k <= 16 {
            order.push(8 + k);
        }
    }
    for k in order {
        let r = r_lo + (r_hi - r_lo) * (k as f64 + 0.5) / 17.0;
        if let Some(scheme) = verify_full_shift(map, C64::new(0.0, 0.0), r)? {
            return Ok(scheme);
        }
    }
    Err(Error::NotCantor(
        "preimage components of every candidate disk overlap or spill out".into(),
    ))
}

fn verify_full_shift(map: &RationalMap, center: C64, radius: f64) -> Result<Option<CodingScheme>> {
    let d = map.degree();
    let centers = match preimages(map, center) {
        Ok(ws) => ws,
        Err(_) => return Ok(None),
    };
    if centers.len() != d {
        return Ok(None);
    }
    let mut centers = centers;
    sort_by_snapped_angle(&mut centers);

    let samples = 256usize;
    let mut cluster_radius = vec![0.0_f64; d];
    let mut contraction = 0.0_f64;
    for j in 0..samples {
        let angle = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
        let z = center + C64::from_polar(radius, angle);
        let ws = match preimage_candidates(map, z) {
            Ok(ws) => ws,
            Err(_) => return Ok(None),
        };
        for w in ws {
            if (w - center).norm() > 0.995 * radius {
                return Ok(None);
            }
            let idx = nearest_index(centers.iter().map(|c| (w - c).norm()));
            cluster_radius[idx] = cluster_radius[idx].max((w - centers[idx]).norm());
            let deriv = map.derivative(w)?.norm();
            if deriv <= 1.0 {
                return Ok(None);
            }
            contraction = contraction.max(1.0 / deriv);
        }
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..d {
        for j in (i + 1)..d {
            let gap = (centers[i] - centers[j]).norm() - cluster_radius[i] - cluster_radius[j];
            min_gap = min_gap.min(gap);
        }
    }
    if min_gap < 0.01 * radius {
        return Ok(None);
    }
    Ok(Some(CodingScheme::FullShift {
        symbols: d,
        center,
        radius,
        component_centers: centers,
        contraction,
        min_gap,
    }))
}

/// Orders points by their angle in [0, 2pi), with tiny components snapped
/// to zero first so points that are morally on an axis sort stably.
fn sort_by_snapped_angle(points: &mut [C64]) {
    let key = |p: &C64| {
        let n = p.norm().max(1e-300);
        let re = if p.re.abs() < 1e-9 * n { 0.0 } else { p.re };
        let im = if p.im.abs() < 1e-9 * n { 0.0 } else { p.im };
        let mut angle = im.atan2(re);
        if angle < 0.0 {
            angle += 2.0 * std::f64::consts::PI;
        }
        angle
    };
    points.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn preimages_spec_examples() {
        let z2 = RationalMap::quadratic(c(0.0, 0.0));
        let ws = preimages(&z2, c(4.0, 0.0)).unwrap();
        assert_eq!(ws.len(), 2);
        assert!(ws.iter().any(|w| (w - c(2.0, 0.0)).norm() < 1e-12));
        assert!(ws.iter().any(|w| (w - c(-2.0, 0.0)).norm() < 1e-12));

        let z2m6 = RationalMap::quadratic(c(-6.0, 0.0));
        let ws = preimages(&z2m6, c(3.0, 0.0)).unwrap();
        assert!(ws.iter().any(|w| (w - c(3.0, 0.0)).norm() < 1e-12));
        assert!(ws.iter().any(|w| (w - c(-3.0, 0.0)).norm() < 1e-12));

        let z2p5 = RationalMap::quadratic(c(5.0, 0.0));
        assert!(matches!(
            preimages(&z2p5, c(5.0, 0.0)),
            Err(Error::CriticalValueCollision { .. })
        ));
    }

    #[test]
    fn detect_full_shift_for_escaping_quadratics() {
        // Oracle for the Cantor criterion: |c| > 2 makes the critical orbit
        // escape, and the two square-root branches of the base disk stay
        // disjoint.
        for cc in [c(5.0, 0.0), c(-6.0, 0.0), c(2.0, 2.0)] {
            assert!(cc.norm() > 2.0);
            let map = RationalMap::quadratic(cc);
            let scheme = detect_full_shift(&map).unwrap();
            match &scheme {
                CodingScheme::FullShift {
                    symbols,
                    component_centers,
                    contraction,
                    min_gap,
                    ..
                } => {
                    assert_eq!(*symbols, 2);
                    assert_eq!(component_centers.len(), 2);
                    assert!(*contraction < 1.0);
                    assert!(*min_gap > 0.0);
                }
                _ => panic!("expected full shift"),
            }
        }
    }

    #[test]
    fn full_shift_rejects_monomial() {
        let z2 = RationalMap::quadratic(c(0.0, 0.0));
        assert!(matches!(detect_full_shift(&z2), Err(Error::NotCantor(_))));
    }

    #[test]
    fn z2m6_components_are_real() {
        let map = RationalMap::quadratic(c(-6.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        if let CodingScheme::FullShift {
            component_centers, ..
        } = &scheme
        {
            for cc in component_centers {
                assert!(cc.im.abs() < 1e-9, "component center {cc} not real");
            }
            // Angle order puts the positive-axis component first.
            assert!(component_centers[0].re > 0.0);
        }
    }

    #[test]
    fn backward_word_converges_to_branch_fixed_point() {
        // Oracle: the quadratic formula. The symbol-0 branch of z^2 + 5
        // contracts to the repelling fixed point (1 + i sqrt 19) / 2.
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let word = SymbolWord::constant(0, 20);
        let fp = c(0.5, 19.0_f64.sqrt() / 2.0);
        for z in [c(1.0, 0.5), c(-2.0, 0.1), c(0.0, 0.0)] {
            let w = backward_point(&map, &scheme, &word, z, MERGE_TOL).unwrap();
            assert!((w - fp).norm() < 1e-10, "pulled back to {w}, expected {fp}");
        }
    }

    #[test]
    fn backward_defining_identity() {
        // f(g_{w + [i]}(z)) = g_w(z), the identity that pins the
        // composition order.
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let z = c(0.3, -0.4);
        for word in [vec![0, 1, 1], vec![1, 0, 1], vec![0, 0, 0]] {
            for extra in 0..2usize {
                let base = SymbolWord::new(word.clone());
                let mut extended = word.clone();
                extended.push(extra);
                let lhs = map
                    .evaluate(
                        backward_point(&map, &scheme, &SymbolWord::new(extended), z, MERGE_TOL)
                            .unwrap(),
                    )
                    .unwrap();
                let rhs = backward_point(&map, &scheme, &base, z, MERGE_TOL).unwrap();
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn equal_length_words_separate() {
        // Lemma-style separation: distinct words of equal length from the
        // same base point land apart.
        let map = RationalMap::quadratic(c(-6.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let words = admissible_itineraries(&scheme, 5);
        let z = c(0.5, 0.2);
        let mut points = Vec::new();
        for w in &words {
            points.push(backward_point(&map, &scheme, &SymbolWord::new(w.clone()), z, MERGE_TOL).unwrap());
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                assert!(
                    (points[i] - points[j]).norm() > MERGE_TOL,
                    "words {:?} and {:?} collide",
                    words[i],
                    words[j]
                );
            }
        }
    }

    #[test]
    fn contraction_property_on_sampled_pairs() {
        let map = RationalMap::quadratic(c(5.0, 0.0));
        let scheme = detect_full_shift(&map).unwrap();
        let kappa_inv = scheme.contraction();
        let z1 = c(0.8, 0.3);
        let z2 = c(-0.5, -0.6);
        for len in [3usize, 6, 9] {
            let word = SymbolWord::new((0..len).map(|k| k % 2).collect());
            let w1 = backward_point(&map, &scheme, &word, z1, MERGE_TOL).unwrap();
            let w2 = backward_point(&map, &scheme, &word, z2, MERGE_TOL).unwrap();
            let bound = kappa_inv.powi(len as i32) * (z1 - z2).norm() * 1.5;
            assert!(
                (w1 - w2).norm() <= bound,
                "len {len}: {} > {bound}",
                (w1 - w2).norm()
            );
        }
    }

    #[test]
    fn user_markov_validation() {
        let bad = UserMarkovConfig {
            transition: vec![vec![1, 0], vec![0, 1]],
            pieces: vec![vec![[0.0, 0.0]], vec![[1.0, 0.0]]],
        };
        assert!(CodingScheme::from_user_config(&bad).is_err());

        let good = UserMarkovConfig {
            transition: vec![vec![1, 1], vec![1, 0]],
            pieces: vec![vec![[0.0, 0.0], [0.1, 0.0]], vec![[1.0, 0.0], [1.1, 0.0]]],
        };
        let scheme = CodingScheme::from_user_config(&good).unwrap();
        assert_eq!(scheme.num_symbols(), 2);
        assert!(scheme.allows(0, 1));
        assert!(!scheme.allows(1, 1));
    }

    #[test]
    fn periodic_word_counts_match_transfer_matrix_trace() {
        let config = UserMarkovConfig {
            transition: vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]],
            pieces: vec![
                vec![[1.0, 0.0], [0.5, 0.8]],
                vec![[-0.5, 0.8], [-1.0, 0.0]],
                vec![[-0.5, -0.8], [0.5, -0.8]],
            ],
        };
        let scheme = CodingScheme::from_user_config(&config).unwrap();
        // tr(M^n) for this matrix is 2^n + 1 + (-1)^n.
        for n in 1..=6usize {
            let count = periodic_itineraries(&scheme, n).len() as i64;
            let expect = 2_i64.pow(n as u32) + 1 + if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(count, expect, "period {n}");
        }
    }
}
