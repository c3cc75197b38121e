use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianMatrix;
use crate::spectra::{dense_eigen, dot};

pub const IDEMPOTENCY_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Largest accepted distance of `Tr(P − Q)` from an integer.
pub const TRACE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
enum Repr {
    Dense(DMatrix<Complex64>),
    /// `P = Σ |v⟩⟨v|` over orthonormal vectors.
    Frame {
        dim: usize,
        vectors: Vec<Vec<Complex64>>,
    },
}

/// An orthogonal projection on `ℂⁿ`, validated on construction.
///
/// Large projections of finite rank are held as an orthonormal frame so that
/// nothing of size `n²` is formed.
#[derive(Debug, Clone)]
pub struct Projection {
    repr: Repr,
    /// What the projection was built from, e.g. `"H(0), E_F = 1"`.
    pub source: String,
}

/// Measured deviations from the projection axioms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionCheck {
    /// `‖P² − P‖_F`.
    pub idempotency: f64,
    /// `max |P − Pᴴ|`.
    pub hermiticity: f64,
    /// Largest distance of an eigenvalue of `P` from `{0, 1}`.
    pub spectrum: f64,
}

impl ProjectionCheck {
    pub fn pass(&self) -> bool {
        self.idempotency <= IDEMPOTENCY_TOL
            && self.hermiticity <= HERMITICITY_TOL
            && self.spectrum <= SPECTRUM_TOL
    }
}

fn distance_to_binary(x: f64) -> f64 {
    x.abs().min((x - 1.0).abs())
}

impl Projection {
    pub fn from_dense(p: DMatrix<Complex64>, source: impl Into<String>) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::InvalidProjection(format!(
                "{}×{} matrix is not square",
                p.nrows(),
                p.ncols()
            )));
        }
        Self::validated(Repr::Dense(p), source.into())
    }

    pub fn from_frame(
        dim: usize,
        vectors: Vec<Vec<Complex64>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::InvalidProjection(format!(
                "frame vector of length {} in dimension {dim}",
                v.len()
            )));
        }
        Self::validated(Repr::Frame { dim, vectors }, source.into())
    }

    /// The zero projection on `ℂⁿ`.
    pub fn zero(dim: usize, source: impl Into<String>) -> Self {
        Self {
            repr: Repr::Frame {
                dim,
                vectors: Vec::new(),
            },
            source: source.into(),
        }
    }

    fn validated(repr: Repr, source: String) -> Result<Self> {
        let p = Self { repr, source };
        let c = p.check();
        if !c.pass() {
            return Err(Error::InvalidProjection(format!(
                "{}: ‖P²−P‖ = {:.3e}, ‖P−Pᴴ‖ = {:.3e}, spectrum off {{0,1}} by {:.3e}",
                p.source, c.idempotency, c.hermiticity, c.spectrum
            )));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense(m) => m.nrows(),
            Repr::Frame { dim, .. } => *dim,
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => m.diagonal().iter().map(|z| z.re).sum(),
            Repr::Frame { vectors, .. } => vectors.iter().map(|v| dot(v, v).re).sum(),
        }
    }

    /// `Tr P` rounded; exact for a valid projection.
    pub fn rank(&self) -> usize {
        self.trace().round().max(0.0) as usize
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Frame { dim, vectors } => {
                let mut m = DMatrix::zeros(*dim, *dim);
                for v in vectors {
                    for c in 0..*dim {
                        let vc = v[c].conj();
                        for r in 0..*dim {
                            m[(r, c)] += v[r] * vc;
                        }
                    }
                }
                m
            }
        }
    }

    /// `U·P·Uᴴ`.
    pub fn conjugated(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "unitary is {}×{}, projection acts on dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        let repr = match &self.repr {
            Repr::Dense(m) => {
                let c = u * m * u.adjoint();
                // restore exact Hermiticity lost to round-off
                Repr::Dense((&c + c.adjoint()) * Complex64::new(0.5, 0.0))
            }
            Repr::Frame { dim, vectors } => Repr::Frame {
                dim: *dim,
                vectors: vectors
                    .iter()
                    .map(|v| {
                        (u * nalgebra::DVector::from_column_slice(v))
                            .iter()
                            .copied()
                            .collect()
                    })
                    .collect(),
            },
        };
        Self::validated(repr, format!("U·({})·Uᴴ", self.source))
    }

    pub fn check(&self) -> ProjectionCheck {
        match &self.repr {
            Repr::Dense(m) => {
                let sq = m * m - m;
                let herm = (m - m.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
                let spectrum = SymmetricEigen::new(h)
                    .eigenvalues
                    .iter()
                    .map(|&x| distance_to_binary(x))
                    .fold(0.0, f64::max);
                ProjectionCheck {
                    idempotency: sq.norm(),
                    hermiticity: herm,
                    spectrum,
                }
            }
            Repr::Frame { vectors, .. } => {
                // with Gram matrix G, P = V·Vᴴ has the nonzero spectrum of G and
                // ‖P² − P‖_F = ‖(G − I)·G‖_F
                let k = vectors.len();
                let g = DMatrix::from_fn(k, k, |i, j| dot(&vectors[i], &vectors[j]));
                let gi = &g - DMatrix::identity(k, k);
                let spectrum = if k == 0 {
                    0.0
                } else {
                    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
                    SymmetricEigen::new(h)
                        .eigenvalues
                        .iter()
                        .map(|&x| distance_to_binary(x))
                        .fold(0.0, f64::max)
                };
                ProjectionCheck {
                    idempotency: (&gi * &g).norm(),
                    hermiticity: 0.0,
                    spectrum,
                }
            }
        }
    }
}

/// Minimum distance between a Fermi level and any eigenvalue of `H`, relative to `‖H‖`.
pub const FERMI_CLEARANCE: f64 = 1e-8;

/// `P = Σ_{λ ≤ E_F} |v⟩⟨v|` from a dense eigendecomposition of `h`.
pub fn spectral_projection(h: &HermitianMatrix, fermi: f64) -> Result<Projection> {
    let (values, vectors) = dense_eigen(h);
    let tol = FERMI_CLEARANCE * h.norm_inf().max(1.0);
    if let Some(&lam) = values.iter().find(|&&lam| (lam - fermi).abs() < tol) {
        return Err(Error::FermiCollision {
            fermi,
            level: lam,
            distance: (lam - fermi).abs(),
        });
    }
    let n = h.dim();
    let below: Vec<&Vec<Complex64>> = values
        .iter()
        .zip(&vectors)
        .filter(|(l, _)| **l <= fermi)
        .map(|(_, v)| v)
        .collect();
    let v = DMatrix::from_fn(n, below.len(), |r, c| below[c][r]);
    let p = &v * v.adjoint();
    Projection::from_dense(p, format!("spectral projection below E_F = {fermi}"))
}

/// `Ind(P; Q) = Tr(P − Q)`, rounded to the nearest integer.
pub fn relative_index(p: &Projection, q: &Projection) -> Result<i64> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(format!(
            "projections act on dimensions {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let t = p.trace() - q.trace();
    let r = t.round();
    if (t - r).abs() > TRACE_TOL {
        return Err(Error::NonIntegerTrace {
            trace: t,
            tol: TRACE_TOL,
        });
    }
    Ok(r as i64)
}

/// Outcome of the three relative index identities on one triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub ind_pq: i64,
    pub ind_qr: i64,
    pub ind_pr: i64,
    /// `Ind(P;R) = Ind(P;Q) + Ind(Q;R)`.
    pub additivity: bool,
    /// `Ind(P;Q) = −Ind(Q;P)`.
    pub antisymmetry: bool,
    /// `Ind(UPUᴴ; UQUᴴ) = Ind(P;Q)`.
    pub unitary_invariance: bool,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.additivity && self.antisymmetry && self.unitary_invariance
    }
}

/// Never fails on a violated identity; an index that cannot be formed counts as a failure.
pub fn index_identities_check(
    p: &Projection,
    q: &Projection,
    r: &Projection,
    u: &DMatrix<Complex64>,
) -> IdentityReport {
    let ind = |a: &Projection, b: &Projection| relative_index(a, b).ok();
    let (pq, qr, pr, qp) = (ind(p, q), ind(q, r), ind(p, r), ind(q, p));
    let conj = p.conjugated(u).ok().zip(q.conjugated(u).ok());
    let upq = conj.and_then(|(a, b)| ind(&a, &b));
    IdentityReport {
        ind_pq: pq.unwrap_or(i64::MIN),
        ind_qr: qr.unwrap_or(i64::MIN),
        ind_pr: pr.unwrap_or(i64::MIN),
        additivity: matches!((pq, qr, pr), (Some(a), Some(b), Some(c)) if a + b == c),
        antisymmetry: matches!((pq, qp), (Some(a), Some(b)) if a == -b),
        unitary_invariance: pq.is_some() && upq == pq,
    }
}

/// Haar-like random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        // Box–Muller
        let r = (-2.0 * (1.0 - a).ln()).sqrt();
        Complex64::from_polar(r, 2.0 * std::f64::consts::PI * b)
    });
    let qr = g.qr();
    let (q, rr) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on the QR convention
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j && rr[(i, i)].norm() > 0.0 {
            rr[(i, i)] / rr[(i, i)].norm()
        } else if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Projection onto the span of the first `rank` columns of a random unitary.
pub fn random_projection<R: Rng>(n: usize, rank: usize, rng: &mut R) -> Result<Projection> {
    assert!(rank <= n, "rank exceeds dimension");
    let u = random_unitary(n, rng);
    let v = u.columns(0, rank);
    let p = &v * v.adjoint();
    let p = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);
    Projection::from_dense(p, format!("random rank {rank}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_projection(bits: &[u8]) -> Projection {
        let d: Vec<Complex64> = bits
            .iter()
            .map(|&b| Complex64::new(b as f64, 0.0))
            .collect();
        Projection::from_dense(
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)),
            "diag",
        )
        .unwrap()
    }

    #[test]
    fn diagonal_spectral_projection() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 1.0, 2.0]);
        let p = spectral_projection(&h, 0.5).unwrap();
        let want = diag_projection(&[1, 0, 0]).to_dense();
        assert!((p.to_dense() - want).norm() < 1e-14);
        assert_eq!(spectral_projection(&h, -3.0).unwrap().rank(), 0);
        assert!(spectral_projection(&h, -3.0).unwrap().to_dense().norm() == 0.0);
    }

    #[test]
    fn fermi_on_a_level_is_rejected() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 1.0, 2.0]);
        match spectral_projection(&h, 1.0 + 1e-12) {
            Err(Error::FermiCollision { level, .. }) => assert_eq!(level, 1.0),
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn random_hermitian_median_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let a = DMatrix::from_fn(50, 50, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let h = HermitianMatrix::from_dense(&a).unwrap();
        let (vals, _) = dense_eigen(&h);
        let median = 0.5 * (vals[24] + vals[25]);
        let p = spectral_projection(&h, median).unwrap();
        assert_eq!(p.rank(), 25);
        assert!(p.check().idempotency <= 1e-12);
    }

    #[test]
    fn rank_difference_examples() {
        let p = diag_projection(&[1, 1, 1, 0, 0, 0]);
        let q = diag_projection(&[1, 1, 1, 1, 1, 0]);
        assert_eq!(relative_index(&p, &p).unwrap(), 0);
        assert_eq!(relative_index(&p, &q).unwrap(), -2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(6, &mut rng);
        let uq = q.conjugated(&u).unwrap();
        assert_eq!(relative_index(&p, &uq).unwrap(), -2);
    }

    #[test]
    fn rejects_non_projections() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.5, 0.0);
            3
        ]));
        assert!(matches!(
            Projection::from_dense(m, "half"),
            Err(Error::InvalidProjection(_))
        ));
        let v = vec![vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]];
        assert!(matches!(
            Projection::from_frame(2, v, "long"),
            Err(Error::InvalidProjection(_))
        ));
    }

    #[test]
    fn frame_and_dense_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_unitary(7, &mut rng);
        let vectors: Vec<Vec<Complex64>> = (0..3)
            .map(|c| u.column(c).iter().copied().collect())
            .collect();
        let f = Projection::from_frame(7, vectors, "frame").unwrap();
        let d = Projection::from_dense(f.to_dense(), "dense").unwrap();
        assert!(f.check().pass());
        assert_eq!(relative_index(&f, &d).unwrap(), 0);
        assert!((f.trace() - 3.0).abs() < 1e-12);
        let w = random_unitary(7, &mut rng);
        let fw = f.conjugated(&w).unwrap().to_dense();
        let dw = d.conjugated(&w).unwrap().to_dense();
        assert!((fw - dw).norm() < 1e-12);
    }

    #[test]
    fn mismatched_dimensions() {
        let p = Projection::zero(3, "a");
        let q = Projection::zero(4, "b");
        assert!(matches!(
            relative_index(&p, &q),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn nested_fermi_levels_count_levels_between() {
        let h = HermitianMatrix::from_diagonal(&[-1.0, 0.2, 0.4, 0.6, 3.0]);
        let p1 = spectral_projection(&h, 0.0).unwrap();
        let p2 = spectral_projection(&h, 1.0).unwrap();
        assert_eq!(relative_index(&p1, &p2).unwrap(), -3);
        let id = DMatrix::identity(5, 5);
        let p3 = spectral_projection(&h, 0.5).unwrap();
        assert!(index_identities_check(&p1, &p3, &p2, &id).pass());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn identities_hold_on_random_triples(seed in any::<u64>(), n in 2usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ranks: Vec<usize> = (0..3).map(|_| rng.gen_range(0..=n)).collect();
            let p = random_projection(n, ranks[0], &mut rng).unwrap();
            let q = random_projection(n, ranks[1], &mut rng).unwrap();
            let r = random_projection(n, ranks[2], &mut rng).unwrap();
            let u = random_unitary(n, &mut rng);
            let rep = index_identities_check(&p, &q, &r, &u);
            prop_assert!(rep.pass());
            prop_assert_eq!(rep.ind_pq, ranks[0] as i64 - ranks[1] as i64);
        }
    }
}
