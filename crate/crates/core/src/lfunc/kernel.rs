//! Mellin-Barnes weights `V(y) = (1/2πi) ∫_{(c)} K(u) e^{a u²} e^{-u y} du/u`
//! evaluated by the trapezoid rule on vertical lines, and cached tables of
//! them on a uniform grid in `y = ln x`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Quadrature description for one weight function.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    /// Abscissa of the right-hand line; the left-hand line sits at `-c`.
    pub c: f64,
    /// Gaussian scale `a` in `g(u) = e^{a u²}`.
    pub a: f64,
    pub step: f64,
    /// Kernel truncation target: `e^{a(c² - V0²)}` is below this.
    pub tol: f64,
    /// Transition point in `y`: the right line is used for `y >= split`,
    /// the left line plus the residue `1` below it.
    pub split: f64,
}

impl KernelSpec {
    pub fn halfwidth(&self) -> f64 {
        (self.c * self.c + (1.0 / self.tol).ln() / self.a).sqrt()
    }
}

/// Node set on one line: `(u_j, w_j)` with `V(y) = Σ w_j e^{-u_j y}`.
#[derive(Debug, Clone)]
struct Line {
    nodes: Vec<(Complex64, Complex64)>,
}

impl Line {
    fn build(c: f64, spec: &KernelSpec, log_k: &dyn Fn(Complex64) -> Result<Complex64>) -> Result<Line> {
        let v0 = spec.halfwidth();
        let half = (v0 / spec.step).ceil() as i64;
        let mut nodes = Vec::with_capacity(2 * half as usize + 1);
        for j in -half..=half {
            let u = Complex64::new(c, j as f64 * spec.step);
            let lk = log_k(u)? + spec.a * u * u;
            let w = lk.exp() / u * (spec.step / (2.0 * PI));
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(LabError::NumericRange(format!("non-finite Mellin kernel at u = {u}")));
            }
            nodes.push((u, w));
        }
        Ok(Line { nodes })
    }

    fn eval(&self, y: f64) -> Complex64 {
        self.nodes.iter().map(|&(u, w)| w * (-u * y).exp()).sum()
    }
}

/// Direct (uncached) evaluator for one weight.
#[derive(Debug, Clone)]
pub struct MellinWeight {
    right: Line,
    left: Line,
    split: f64,
}

impl MellinWeight {
    pub fn new(spec: KernelSpec, log_k: &dyn Fn(Complex64) -> Result<Complex64>) -> Result<Self> {
        Ok(MellinWeight {
            right: Line::build(spec.c, &spec, log_k)?,
            left: Line::build(-spec.c, &spec, log_k)?,
            split: spec.split,
        })
    }

    pub fn nodes(&self) -> usize {
        self.right.nodes.len()
    }

    /// `V` at `y = ln x`.
    pub fn eval(&self, y: f64) -> Complex64 {
        if y >= self.split {
            self.right.eval(y)
        } else {
            Complex64::new(1.0, 0.0) + self.left.eval(y)
        }
    }

    /// Tabulate on `[y_lo, y_hi]` with spacing `dy`. Values below `y_lo` are
    /// taken to be `1` (the caller picks `y_lo` deep in the region where
    /// `V = 1` to working precision).
    pub fn tabulate(&self, y_lo: f64, y_hi: f64, dy: f64) -> WeightTable {
        let n = ((y_hi - y_lo) / dy).ceil() as usize + 6;
        let mut vals = vec![Complex64::new(0.0, 0.0); n];
        let split_idx = (((self.split - y_lo) / dy).ceil().max(0.0) as usize).min(n);
        fill(&mut vals[..split_idx], &self.left, y_lo, dy, 0);
        for v in vals[..split_idx].iter_mut() {
            *v += 1.0;
        }
        fill(&mut vals[split_idx..], &self.right, y_lo, dy, split_idx);
        WeightTable::from_values(y_lo, dy, &vals)
    }
}

/// Accumulate `Σ_j w_j e^{-u_j y_i}` into `out`, for grid indices starting
/// at `first`, by multiplicative recurrence re-seeded every 64 steps.
fn fill(out: &mut [Complex64], line: &Line, y_lo: f64, dy: f64, first: usize) {
    const RESEED: usize = 64;
    for &(u, w) in &line.nodes {
        let ratio = (-u * dy).exp();
        for (block, chunk) in out.chunks_mut(RESEED).enumerate() {
            let y = y_lo + (first + block * RESEED) as f64 * dy;
            let mut cur = w * (-u * y).exp();
            for v in chunk.iter_mut() {
                *v += cur;
                cur *= ratio;
            }
        }
    }
}

/// `V` cached on a uniform grid, read back by six-point Lagrange
/// interpolation. Each cell stores its interpolating quintic in monomial
/// form, so a lookup is one Horner pass.
#[derive(Debug, Clone)]
pub struct WeightTable {
    y_lo: f64,
    dy: f64,
    len: usize,
    cells: Vec<[Complex64; 6]>,
}

// Monomial coefficients (rows: power of q) of the Lagrange basis on nodes
// -2..=3 (columns).
const LAGRANGE: [[f64; 6]; 6] = [
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, -1.0 / 2.0, -1.0 / 3.0, 1.0, -1.0 / 4.0, 1.0 / 30.0],
    [-1.0 / 24.0, 2.0 / 3.0, -5.0 / 4.0, 2.0 / 3.0, -1.0 / 24.0, 0.0],
    [-1.0 / 24.0, -1.0 / 24.0, 5.0 / 12.0, -7.0 / 12.0, 7.0 / 24.0, -1.0 / 24.0],
    [1.0 / 24.0, -1.0 / 6.0, 1.0 / 4.0, -1.0 / 6.0, 1.0 / 24.0, 0.0],
    [-1.0 / 120.0, 1.0 / 24.0, -1.0 / 12.0, 1.0 / 12.0, -1.0 / 24.0, 1.0 / 120.0],
];

impl WeightTable {
    fn from_values(y_lo: f64, dy: f64, vals: &[Complex64]) -> Self {
        let len = vals.len();
        let cells = (2..len - 3)
            .map(|i| {
                let mut c = [Complex64::new(0.0, 0.0); 6];
                for (j, row) in LAGRANGE.iter().enumerate() {
                    for (k, &w) in row.iter().enumerate() {
                        c[j] += vals[i - 2 + k] * w;
                    }
                }
                c
            })
            .collect();
        WeightTable { y_lo, dy, len, cells }
    }

    pub fn y_lo(&self) -> f64 {
        self.y_lo
    }

    pub fn y_hi(&self) -> f64 {
        self.y_lo + (self.len - 6) as f64 * self.dy
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn eval(&self, y: f64) -> Complex64 {
        if y < self.y_lo {
            return Complex64::new(1.0, 0.0);
        }
        let pos = (y - self.y_lo) / self.dy;
        let i = (pos.floor() as usize).clamp(2, self.len - 4);
        let q = pos - i as f64;
        let c = &self.cells[i - 2];
        ((((c[5] * q + c[4]) * q + c[3]) * q + c[2]) * q + c[1]) * q + c[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // With K(u) = 1 the weight is V(y) = erfc(y / (2√a)) / 2.
    #[test]
    fn pure_gaussian_weight_is_erfc() {
        let a = 0.04;
        let spec = KernelSpec { c: 1.0, a, step: 0.05, tol: 1e-15, split: 0.0 };
        let w = MellinWeight::new(spec, &|_| Ok(Complex64::new(0.0, 0.0))).unwrap();
        for &y in &[-2.0, -0.5, 0.0, 0.3, 1.0, 2.5] {
            let want = 0.5 * crate::special::erfc(y / (2.0 * a.sqrt()));
            let got = w.eval(y);
            assert!((got.re - want).abs() < 1e-13 && got.im.abs() < 1e-13, "y={y}: {got} vs {want}");
        }
        let table = w.tabulate(-3.0, 3.0, 0.0025);
        for i in 0..200 {
            let y = -2.9 + i as f64 * 0.0291;
            assert!((table.eval(y) - w.eval(y)).norm() < 1e-13, "y={y} {:e}", (table.eval(y) - w.eval(y)).norm());
        }
    }
}
