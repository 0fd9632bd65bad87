//! Dense complex polynomials and an Aberth–Ehrlich root solver.
//!
//! Coefficients are stored in ascending degree order. The solver here works
//! on explicit coefficients and is used for small systems (preimages,
//! critical points, denominators); periodic points of iterated maps are
//! found elsewhere by an evaluation-based variant that never forms the
//! iterated coefficients.

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// zeros. The zero polynomial is kept as a single zero coefficient.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    /// Trims trailing coefficients whose magnitude is below `eps` relative
    /// to the largest coefficient. Used after conjugation arithmetic where
    /// exact cancellations leave numerical dust in the top coefficients.
    pub fn trimmed(&self, eps: f64) -> Self {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= eps * scale {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner evaluation of the polynomial and its derivative in one pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.is_constant() {
            return Poly::constant(C64::new(0.0, 0.0));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, a: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * a).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        for (k, &c) in other.coeffs.iter().enumerate() {
            coeffs[k] += c;
        }
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }

    /// Integer power by repeated multiplication; exponents here are tiny.
    pub fn pow(&self, n: usize) -> Poly {
        let mut acc = Poly::constant(C64::new(1.0, 0.0));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// All complex roots of `p` by Aberth–Ehrlich iteration with Newton polish.
///
/// Returns `degree` roots (with multiplicity); fails if the leading
/// coefficient is negligible or the iteration stalls.
pub fn roots(p: &Poly) -> Result<Vec<C64>> {
    let p = p.trimmed(1e-14);
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Factor out roots at the origin so the initial-guess radius is sane.
    let zeros_at_origin = p
        .coeffs()
        .iter()
        .take_while(|c| c.norm() == 0.0)
        .count()
        .min(n);
    let reduced = Poly::new(p.coeffs()[zeros_at_origin..].to_vec());
    let mut out = vec![C64::new(0.0, 0.0); zeros_at_origin];
    out.extend(aberth(&reduced, 400, 1e-14)?);
    Ok(out)
}

fn aberth(p: &Poly, max_sweeps: usize, tol: f64) -> Result<Vec<C64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    if lead.norm() < 1e-300 {
        return Err(Error::Invalid("leading coefficient vanishes".into()));
    }
    if n == 1 {
        return Ok(vec![-p.coeffs()[0] / lead]);
    }

    // Cauchy bound for the root radius.
    let radius = 1.0
        + p.coeffs()[..n]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0_f64, f64::max);

    // Initial guesses on a circle with an irrational angular offset so no
    // guess sits on a symmetry axis of the coefficient set.
    let mut zs: Vec<C64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.354) / n as f64 + 0.5432;
            C64::from_polar(radius * 0.8, angle)
        })
        .collect();

    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut max_step = 0.0_f64;
        let prev = zs.clone();
        for (k, z) in zs.iter_mut().enumerate() {
            let (v, dv) = p.eval_with_derivative(prev[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let newton = if dv.norm() > 0.0 {
                v / dv
            } else {
                C64::new(tol, 0.0)
            };
            let mut repulsion = C64::new(0.0, 0.0);
            for (j, &other) in prev.iter().enumerate() {
                if j != k {
                    let diff = prev[k] - other;
                    if diff.norm() > 1e-300 {
                        repulsion += C64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            *z = prev[k] - step;
            max_step = max_step.max(step.norm());
        }
        if max_step < tol * radius.max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: max_sweeps });
    }

    // Newton polish.
    for z in zs.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = p.eval_with_derivative(*z);
            if dv.norm() < 1e-300 {
                break;
            }
            *z -= v / dv;
        }
    }
    Ok(zs)
}
