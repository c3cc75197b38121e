use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// How grid sites `(i, j)` (x column, y row) are numbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOrder {
    /// `index = i·ny + j`; bandwidth `ny` (x bonds and the y wrap bond).
    YFastest,
    /// `index = fold(j)·nx + i` with the y rows interleaved as
    /// `0, ny−1, 1, ny−2, …` so that every y bond, including the wrap, spans
    /// at most two rows; bandwidth `2·nx`.
    XFastestFolded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteLayout {
    pub nx: usize,
    pub ny: usize,
    pub order: SiteOrder,
}

impl SiteLayout {
    /// Picks the ordering with the smaller bandwidth.
    pub fn best(nx: usize, ny: usize) -> Self {
        let order = if ny <= 2 * nx {
            SiteOrder::YFastest
        } else {
            SiteOrder::XFastestFolded
        };
        Self { nx, ny, order }
    }

    pub fn bandwidth(&self) -> usize {
        match self.order {
            SiteOrder::YFastest => self.ny,
            SiteOrder::XFastestFolded => 2 * self.nx,
        }
    }

    fn fold(&self, j: usize) -> usize {
        if j <= (self.ny - 1) / 2 {
            2 * j
        } else {
            2 * (self.ny - 1 - j) + 1
        }
    }

    fn unfold(&self, p: usize) -> usize {
        if p % 2 == 0 {
            p / 2
        } else {
            self.ny - 1 - (p - 1) / 2
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        match self.order {
            SiteOrder::YFastest => i * self.ny + j,
            SiteOrder::XFastestFolded => self.fold(j) * self.nx + i,
        }
    }

    pub fn site(&self, idx: usize) -> (usize, usize) {
        match self.order {
            SiteOrder::YFastest => (idx / self.ny, idx % self.ny),
            SiteOrder::XFastestFolded => (idx % self.nx, self.unfold(idx / self.nx)),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Complex Hermitian matrix in lower-band storage.
///
/// Column `c` holds `A[c+d][c]` for `d = 0..=bandwidth` at `lower[c·(bw+1) + d]`;
/// the upper triangle is implied by conjugation, so the stored operator is
/// Hermitian exactly. Diagonal entries are kept with zero imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    bw: usize,
    lower: Vec<Complex64>,
    layout: Option<SiteLayout>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bw = bandwidth.min(n.saturating_sub(1));
        Self {
            n,
            bw,
            lower: vec![Complex64::new(0.0, 0.0); n * (bw + 1)],
            layout: None,
        }
    }

    pub fn with_layout(layout: SiteLayout) -> Self {
        let mut m = Self::zeros(layout.len(), layout.bandwidth());
        m.layout = Some(layout);
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    /// Converts a dense Hermitian matrix; the bandwidth is the widest nonzero
    /// sub-diagonal. Fails when `a` is not Hermitian to 1e-12 relative.
    pub fn from_dense(a: &DMatrix<Complex64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} is not square",
                n,
                a.ncols()
            )));
        }
        let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
        let mut bw = 0;
        for c in 0..n {
            for r in c..n {
                if (a[(r, c)] - a[(c, r)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::ShapeMismatch(format!(
                        "entry ({r},{c}) breaks Hermiticity"
                    )));
                }
                if r > c && a[(r, c)] != Complex64::new(0.0, 0.0) {
                    bw = bw.max(r - c);
                }
            }
        }
        let mut m = Self::zeros(n, bw);
        for c in 0..n {
            m.set(c, c, Complex64::new(a[(c, c)].re, 0.0));
            for r in c + 1..=(c + bw).min(n - 1) {
                m.set(r, c, a[(r, c)]);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn layout(&self) -> Option<&SiteLayout> {
        self.layout.as_ref()
    }

    pub(crate) fn lower_band(&self) -> &[Complex64] {
        &self.lower
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(r >= c && r - c <= self.bw);
        c * (self.bw + 1) + (r - c)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (lo, hi, conj) = if r >= c { (r, c, false) } else { (c, r, true) };
        if lo - hi > self.bw {
            return Complex64::new(0.0, 0.0);
        }
        let v = self.lower[self.slot(lo, hi)];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// Sets `A[r][c] = v` (and implicitly `A[c][r] = v̄`).
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        let (lo, hi, v) = if r >= c { (r, c, v) } else { (c, r, v.conj()) };
        assert!(lo - hi <= self.bw, "entry ({r},{c}) outside the band");
        let v = if lo == hi {
            Complex64::new(v.re, 0.0)
        } else {
            v
        };
        let s = self.slot(lo, hi);
        self.lower[s] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: Complex64) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.lower[i * (self.bw + 1)].re)
            .collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let w = self.bw + 1;
        for c in 0..self.n {
            let col = &self.lower[c * w..(c + 1) * w];
            let xc = x[c];
            y[c] += col[0] * xc;
            let mut acc = Complex64::new(0.0, 0.0);
            for d in 1..w.min(self.n - c) {
                let a = col[d];
                y[c + d] += a * xc;
                acc += a.conj() * x[c + d];
            }
            y[c] += acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `⟨x|A|x⟩` (real for Hermitian A).
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let ax = self.apply(x);
        x.iter().zip(&ax).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Maximum absolute row sum; an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        let w = self.bw + 1;
        for c in 0..self.n {
            let col = &self.lower[c * w..(c + 1) * w];
            rows[c] += col[0].norm();
            for d in 1..w.min(self.n - c) {
                let a = col[d].norm();
                rows[c + d] += a;
                rows[c] += a;
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.get(r, c))
    }

    /// Largest `|A − A†|` entry of the materialized matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.n {
            for c in r.saturating_sub(self.bw)..=(r + self.bw).min(self.n - 1) {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// Largest entrywise `|A − B|`.
    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch(format!(
                "dimensions {} and {}",
                self.n, other.n
            )));
        }
        let bw = self.bw.max(other.bw);
        let mut dev = 0.0f64;
        for c in 0..self.n {
            for r in c..=(c + bw).min(self.n - 1) {
                dev = dev.max((self.get(r, c) - other.get(r, c)).norm());
            }
        }
        Ok(dev)
    }

    /// All structurally stored nonzeros of both triangles as `(row, col, value)`,
    /// sorted by row then column.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for r in 0..self.n {
            for c in r.saturating_sub(self.bw)..=(r + self.bw).min(self.n - 1) {
                let v = self.get(r, c);
                if v != Complex64::new(0.0, 0.0) {
                    out.push((r, c, v));
                }
            }
        }
        out
    }

    /// Writes `row col re im` lines, one per stored nonzero, with a header
    /// line `# n <dim> nnz <count>`.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        let t = self.triplets();
        writeln!(w, "# n {} nnz {}", self.n, t.len())?;
        for (r, c, v) in t {
            writeln!(w, "{} {} {:.16e} {:.16e}", r, c, v.re, v.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folded_layout_is_a_bijection_with_short_bonds() {
        for (nx, ny) in [(3, 8), (4, 9), (5, 16), (2, 31)] {
            let lay = SiteLayout {
                nx,
                ny,
                order: SiteOrder::XFastestFolded,
            };
            let mut seen = vec![false; nx * ny];
            for i in 0..nx {
                for j in 0..ny {
                    let k = lay.index(i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(lay.site(k), (i, j));
                    let up = lay.index(i, (j + 1) % ny);
                    assert!(k.abs_diff(up) <= lay.bandwidth());
                    if i + 1 < nx {
                        assert!(k.abs_diff(lay.index(i + 1, j)) <= lay.bandwidth());
                    }
                }
            }
        }
    }

    #[test]
    fn dense_round_trip_and_matvec() {
        let a = DMatrix::from_fn(5, 5, |r, c| {
            if r.abs_diff(c) <= 2 {
                Complex64::new((r + 2 * c) as f64, (r * c) as f64 - 1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let m = HermitianMatrix::from_dense(&a).unwrap();
        assert_eq!(m.bandwidth(), 2);
        assert_eq!(m.to_dense(), a);
        let x: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let y = m.apply(&x);
        let yd = &a * nalgebra::DVector::from_vec(x.clone());
        for i in 0..5 {
            assert!((y[i] - yd[i]).norm() < 1e-12);
        }
        assert_eq!(m.hermiticity_deviation(), 0.0);
    }
}
