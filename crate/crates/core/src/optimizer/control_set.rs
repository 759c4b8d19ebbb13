use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};

/// Box `U = Π [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSet {
    lo: DVector<f64>,
    hi: DVector<f64>,
}

/// Maximizer of a linear function over the box. `ties[i]` is set when the
/// coefficient on coordinate `i` is zero and the lower bound was picked
/// arbitrarily.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMaximizer {
    pub point: DVector<f64>,
    pub ties: Vec<bool>,
}

impl ControlSet {
    pub fn new(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::validation("control_set.lo", "must be nonempty"));
        }
        if lo.len() != hi.len() {
            return Err(Error::validation(
                "control_set.hi",
                format!("length {} differs from lo length {}", hi.len(), lo.len()),
            ));
        }
        for (i, (l, h)) in lo.iter().zip(hi.iter()).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(Error::validation(
                    format!("control_set.lo[{i}]"),
                    "must be finite",
                ));
            }
            if l > h {
                return Err(Error::validation(
                    format!("control_set.lo[{i}]"),
                    format!("lower bound {l} exceeds upper bound {h}"),
                ));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &DVector<f64> {
        &self.lo
    }

    pub fn hi(&self) -> &DVector<f64> {
        &self.hi
    }

    /// Euclidean projection (componentwise clamp).
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            v.len(),
            v.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .map(|(x, (l, h))| x.clamp(*l, *h)),
        )
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        v.len() == self.dim()
            && v.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)
    }

    /// `argmax_{u in U} <c, u>` with ties broken toward the lower bound.
    pub fn argmax_linear(&self, c: &DVector<f64>) -> LinearMaximizer {
        let mut ties = vec![false; c.len()];
        let point = DVector::from_iterator(
            c.len(),
            c.iter().enumerate().map(|(i, ci)| {
                if *ci > 0.0 {
                    self.hi[i]
                } else {
                    ties[i] = *ci == 0.0;
                    self.lo[i]
                }
            }),
        );
        LinearMaximizer { point, ties }
    }

    /// All distinct corners of the box.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let mut out = vec![DVector::zeros(self.dim())];
        for i in 0..self.dim() {
            let mut next = Vec::with_capacity(out.len() * 2);
            for v in out {
                let mut a = v.clone();
                a[i] = self.lo[i];
                let degenerate = self.lo[i] == self.hi[i];
                next.push(a);
                if !degenerate {
                    let mut b = v;
                    b[i] = self.hi[i];
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    pub fn center(&self) -> DVector<f64> {
        (&self.lo + &self.hi) * 0.5
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.lo.iter().zip(self.hi.iter()).map(|(l, h)| {
                if l == h {
                    *l
                } else {
                    rng.gen_range(*l..=*h)
                }
            }),
        )
    }
}
