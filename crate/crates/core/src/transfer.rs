//! Twisted transfer operators discretized on depth-m cylinder centers.
//!
//! A function on the coding space is represented by its values on all
//! admissible depth-m itineraries. Applying an inverse branch to the
//! centre of cylinder [w_1 .. w_m] lands in cylinder [i w_1 .. w_{m-1}]
//! after truncation, so the discretized operator is a sparse matrix whose
//! weights are evaluated at exactly computed branch points. Closure under
//! branch application holds by construction at the symbolic level.

use rayon::prelude::*;
use std::collections::HashMap;

use crate::coding::{admissible_itineraries, branch_step, itinerary_of, CodingScheme, MERGE_TOL};
use crate::map::RationalMap;
use crate::{Error, Result, C64};

struct BranchEntry {
    /// Index of the depth-m word approximating the branch point.
    source: usize,
    /// log |f'| at the branch point.
    tau: f64,
    /// arg f' at the branch point.
    theta: f64,
}

/// The discretized operator: one row of branch entries per basis word.
pub struct TransferContext {
    pub depth: usize,
    pub words: Vec<Vec<usize>>,
    pub points: Vec<C64>,
    rows: Vec<Vec<BranchEntry>>,
    word_index: HashMap<Vec<usize>, usize>,
}

impl TransferContext {
    pub fn new(map: &RationalMap, scheme: &CodingScheme, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Invalid("cylinder depth must be positive".into()));
        }
        let words = admissible_itineraries(scheme, depth);
        let mut word_index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            word_index.insert(w.clone(), i);
        }
        let points: Vec<C64> = words
            .par_iter()
            .map(|w| crate::coding::itinerary_point(map, scheme, w, MERGE_TOL))
            .collect::<Result<Vec<_>>>()?;
        let k = scheme.num_symbols();
        let rows: Vec<Vec<BranchEntry>> = words
            .par_iter()
            .zip(points.par_iter())
            .map(|(w, &x)| {
                let mut row = Vec::with_capacity(k);
                for i in 0..k {
                    if !scheme.allows(i, w[0]) {
                        continue;
                    }
                    let p = branch_step(map, scheme, i, x, MERGE_TOL, 0)?;
                    let d = map.derivative(p)?;
                    let mag = d.norm();
                    if mag < 1e-12 {
                        return Err(Error::CriticalProximity { distance: mag });
                    }
                    let mut shifted = Vec::with_capacity(depth);
                    shifted.push(i);
                    shifted.extend_from_slice(&w[..depth - 1]);
                    let source = *word_index.get(&shifted).ok_or_else(|| {
                        Error::Invalid(format!("shifted word {shifted:?} missing from basis"))
                    })?;
                    row.push(BranchEntry {
                        source,
                        tau: mag.ln(),
                        theta: d.im.atan2(d.re),
                    });
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TransferContext {
            depth,
            words,
            points,
            rows,
            word_index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn check_input(&self, h: &[C64]) -> Result<()> {
        if h.len() != self.len() {
            return Err(Error::ClosureViolation {
                expected: self.len(),
                got: h.len(),
            });
        }
        Ok(())
    }

    /// (L_{s,l} h)(w) = sum over branches of e^{-s tau + i l theta} h.
    pub fn apply(&self, s: C64, ell: i64, h: &[C64]) -> Result<Vec<C64>> {
        self.check_input(h)?;
        Ok(self
            .rows
            .par_iter()
            .map(|row| {
                let mut acc = C64::new(0.0, 0.0);
                for e in row {
                    let phase = -s.im * e.tau + ell as f64 * e.theta;
                    let weight = C64::from_polar((-s.re * e.tau).exp(), phase);
                    acc += weight * h[e.source];
                }
                acc
            })
            .collect())
    }

    /// Real-weight application for real s and trivial character.
    pub fn apply_real(&self, s: f64, h: &[f64]) -> Vec<f64> {
        self.rows
            .par_iter()
            .map(|row| {
                let mut acc = 0.0;
                for e in row {
                    acc += (-s * e.tau).exp() * h[e.source];
                }
                acc
            })
            .collect()
    }

    /// Index of the basis word whose cylinder contains x, via the forward
    /// itinerary; falls back to the nearest cylinder centre when the
    /// classified itinerary is blocked by a boundary tie.
    pub fn locate(&self, map: &RationalMap, scheme: &CodingScheme, x: C64) -> Result<usize> {
        let itin = itinerary_of(map, scheme, x, self.depth)?;
        if let Some(&i) = self.word_index.get(&itin) {
            return Ok(i);
        }
        let mut best = (0usize, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d = (x - p).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best.0)
    }
}

/// Leading eigenvalue and positive eigenfunction of L_{s,0} on the basis,
/// by power iteration with sup normalization. Convergence at eigenvalue
/// drift and residual below 1e-12.
pub fn eigen_data(ctx: &TransferContext, s: f64) -> Result<(f64, Vec<f64>)> {
    let n = ctx.len();
    let mut v = vec![1.0_f64; n];
    let mut lambda = 1.0_f64;
    for sweep in 0..20_000 {
        let w = ctx.apply_real(s, &v);
        let norm = w.iter().cloned().fold(0.0_f64, f64::max);
        if !(norm > 0.0) {
            return Err(Error::NonConvergence { sweeps: sweep });
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let drift = (norm - lambda).abs() / norm.max(1.0);
        let residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        lambda = norm;
        v = next;
        if drift < 1e-13 && residual < 1e-12 {
            return Ok((lambda, v));
        }
    }
    Err(Error::NonConvergence { sweeps: 20_000 })
}

/// The operator normalized by its own discrete eigendata at s = delta:
/// hat L_{s,l} h = L_{s,l}(h h_delta) / (lambda_delta h_delta), so that
/// hat L_{delta,0} 1 = 1 on the basis.
pub struct NormalizedTransfer<'a> {
    pub ctx: &'a TransferContext,
    pub delta: f64,
    pub lambda: f64,
    pub eigenfunction: Vec<f64>,
}

impl<'a> NormalizedTransfer<'a> {
    pub fn new(ctx: &'a TransferContext, delta: f64) -> Result<Self> {
        let (lambda, eigenfunction) = eigen_data(ctx, delta)?;
        Ok(NormalizedTransfer {
            ctx,
            delta,
            lambda,
            eigenfunction,
        })
    }

    pub fn apply(&self, s: C64, ell: i64, h: &[C64]) -> Result<Vec<C64>> {
        self.ctx.check_input(h)?;
        let weighted: Vec<C64> = h
            .iter()
            .zip(&self.eigenfunction)
            .map(|(x, &e)| x * e)
            .collect();
        let mut out = self.ctx.apply(s, ell, &weighted)?;
        for (x, &e) in out.iter_mut().zip(&self.eigenfunction) {
            *x /= self.lambda * e;
        }
        Ok(out)
    }
}

/// Dimension estimate as the zero of log of the leading eigenvalue of the
/// discretized operator, s in [0, 2].
pub fn leading_eigenvalue_delta(
    map: &RationalMap,
    scheme: &CodingScheme,
    depth: usize,
) -> Result<f64> {
    let ctx = TransferContext::new(map, scheme, depth)?;
    let log_lambda = |s: f64| -> Result<f64> { Ok(eigen_data(&ctx, s)?.0.ln()) };
    let l0 = log_lambda(0.0)?;
    let l2 = log_lambda(2.0)?;
    if l0 <= 0.0 || l2 >= 0.0 {
        return Err(Error::BracketFailure {
            s_left: 0.0,
            p_left: l0,
            s_right: 2.0,
            p_right: l2,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    let (mut flo, mut fhi) = (l0, l2);
    for _ in 0..200 {
        // Secant proposal, clipped into the bracket.
        let mut mid = hi - fhi * (hi - lo) / (fhi - flo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let f = log_lambda(mid)?;
        if f > 0.0 {
            lo = mid;
            flo = f;
        } else {
            hi = mid;
            fhi = f;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
