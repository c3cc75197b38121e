use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianMatrix;

/// `A − σI = L·D·Lᴴ` for a banded Hermitian `A`, without pivoting.
///
/// `L` is unit lower triangular with the bandwidth of `A` and `D` is real.
/// By Sylvester's law the number of negative pivots is the number of
/// eigenvalues of `A` below `σ`.
#[derive(Debug, Clone)]
pub struct BandLdl {
    n: usize,
    bw: usize,
    shift: f64,
    /// Column `c` holds `L[c+d][c]` for `d = 1..=bw` at `c·(bw+1) + d`; slot `d = 0` is unused.
    l: Vec<Complex64>,
    d: Vec<f64>,
}

impl BandLdl {
    pub fn factor(a: &HermitianMatrix, shift: f64) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = a.lower_band().to_vec();
        let mut d = vec![0.0; n];
        let scale = a.norm_inf().max(shift.abs()).max(f64::MIN_POSITIVE);
        for j in 0..n {
            let col = j * w;
            let dj = l[col].re - shift;
            if !(dj.abs() > 1e-14 * scale) {
                return Err(Error::ZeroPivot { row: j, shift });
            }
            d[j] = dj;
            let m = bw.min(n - 1 - j);
            for t in 1..=m {
                l[col + t] /= dj;
            }
            // trailing update A[i][k] −= l_i·d_j·conj(l_k), j < k ≤ i ≤ j+m
            for tk in 1..=m {
                let lk = l[col + tk];
                let f = lk.conj() * dj;
                let k = j + tk;
                let kcol = k * w;
                for ti in tk..=m {
                    let li = l[col + ti];
                    l[kcol + (ti - tk)] -= li * f;
                }
            }
        }
        Ok(Self { n, bw, shift, l, d })
    }

    /// Factors with `σ`, nudging it by a few ulps of `‖A‖` on exact breakdown.
    pub fn factor_nudged(a: &HermitianMatrix, shift: f64) -> Result<Self> {
        let scale = a.norm_inf().max(1.0);
        let mut last = None;
        for k in 0..8 {
            let s = shift + (k as f64) * 1e-11 * scale * if k % 2 == 0 { 1.0 } else { -1.0 };
            match Self::factor(a, s) {
                Ok(f) => return Ok(f),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of eigenvalues of `A` strictly below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    /// Solves `(A − σI)·x = b` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        let w = self.bw + 1;
        for j in 0..self.n {
            let xj = x[j];
            let m = self.bw.min(self.n - 1 - j);
            let col = &self.l[j * w + 1..j * w + 1 + m];
            for (t, lv) in col.iter().enumerate() {
                x[j + 1 + t] -= lv * xj;
            }
        }
        for (v, d) in x.iter_mut().zip(&self.d) {
            *v /= *d;
        }
        for j in (0..self.n).rev() {
            let m = self.bw.min(self.n - 1 - j);
            let col = &self.l[j * w + 1..j * w + 1 + m];
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, lv) in col.iter().enumerate() {
                acc += lv.conj() * x[j + 1 + t];
            }
            x[j] -= acc;
        }
    }
}

/// Number of eigenvalues of `a` strictly below `e`.
pub fn count_below(a: &HermitianMatrix, e: f64) -> Result<usize> {
    Ok(BandLdl::factor_nudged(a, e)?.negative_count())
}
