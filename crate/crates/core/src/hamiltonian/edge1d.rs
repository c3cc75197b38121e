use crate::model::{wall_potential, GridSpec, PhysicalParams};

/// How the `½(k − Bx)²` term of `h_k` is discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YDispersion {
    /// Exact parabola.
    Continuum,
    /// `(1 − cos(hy·(k − Bx)))/hy²`: the symbol of the y second difference
    /// with Peierls phases, so `h_k` matches the cylinder matrix restricted to
    /// y-momentum `k − Φ/L` exactly.
    Lattice { hy: f64 },
}

impl YDispersion {
    fn eval(&self, q: f64) -> f64 {
        match *self {
            YDispersion::Continuum => 0.5 * q * q,
            YDispersion::Lattice { hy } => (1.0 - (hy * q).cos()) / (hy * hy),
        }
    }
}

/// Real symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal1D {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal1D {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

/// `h_k = ½p_x² + ½(k − Bx)² + W(x)` on the interior x nodes of `grid` with
/// Dirichlet ends.
pub fn build_edge_1d(
    params: &PhysicalParams,
    grid: &GridSpec,
    k: f64,
    y: YDispersion,
) -> Tridiagonal1D {
    let nx = grid.nx();
    let tx = 0.5 / (grid.hx * grid.hx);
    let diag = (0..nx)
        .map(|i| {
            let x = grid.x(i);
            2.0 * tx + y.eval(k - params.b * x) + wall_potential(params, x)
        })
        .collect();
    Tridiagonal1D {
        diag,
        off: vec![-tx; nx.saturating_sub(1)],
    }
}
