//! Physical constants, the confining wall, the impurity field and the energy
//! windows shared by every other module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuum constants of the cylinder model.
///
/// The wall is `W(x) = u·x^γ` for `x > 0` and zero to the left of it; the
/// impurity potential is bounded by `w` and vanishes for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Magnetic field strength; the magnetic length is `1/√B`.
    pub b: f64,
    /// Bound on the impurity amplitude.
    pub w: f64,
    /// Circumference of the cylinder.
    pub l: f64,
    /// Wall exponent, `γ ≥ 2`.
    pub gamma: f64,
    /// Wall coefficient.
    pub u: f64,
    /// Margin separating the gap window from the broadened Landau bands.
    pub epsilon: f64,
    /// Half-width of the window `Δ` centred at `B`.
    pub delta: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            w: 0.02,
            l: 20.0,
            gamma: 2.0,
            u: 1.0,
            epsilon: 0.05,
            delta: 0.05,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParams {
        field,
        reason: reason.into(),
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("b", self.b),
            ("w", self.w),
            ("l", self.l),
            ("gamma", self.gamma),
            ("u", self.u),
            ("epsilon", self.epsilon),
            ("delta", self.delta),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.w < 0.0 {
            return Err(invalid("w", "disorder bound must be non-negative"));
        }
        if self.b <= 2.0 * self.w {
            return Err(invalid(
                "b",
                format!(
                    "strong-field regime requires B > 2w (B = {}, w = {})",
                    self.b, self.w
                ),
            ));
        }
        if self.l <= 0.0 {
            return Err(invalid("l", "circumference must be positive"));
        }
        if self.gamma < 2.0 {
            return Err(invalid(
                "gamma",
                format!("wall exponent must be >= 2, got {}", self.gamma),
            ));
        }
        if self.u <= 0.0 {
            return Err(invalid("u", "wall coefficient must be positive"));
        }
        let gap = 0.5 * self.b - self.w;
        if !(self.epsilon > 0.0 && self.epsilon < gap) {
            return Err(invalid(
                "epsilon",
                format!("need 0 < epsilon < B/2 - w = {gap}, got {}", self.epsilon),
            ));
        }
        if !(self.delta > 0.0 && self.delta < gap - self.epsilon) {
            return Err(invalid(
                "delta",
                format!(
                    "need 0 < delta < B/2 - w - epsilon = {}, got {}",
                    gap - self.epsilon,
                    self.delta
                ),
            ));
        }
        Ok(())
    }

    pub fn magnetic_length(&self) -> f64 {
        1.0 / self.b.sqrt()
    }

    /// Largest possible flow rate `L·|dE/dΦ|` of a level in the first gap, `√(3B)`.
    pub fn max_flow_rate(&self) -> f64 {
        (3.0 * self.b).sqrt()
    }
}

/// Confining wall `W(x)`: zero for `x ≤ 0`, `u·x^γ` beyond.
pub fn wall_potential(params: &PhysicalParams, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        params.u * x.powf(params.gamma)
    }
}

/// Open energy interval `]lo, hi[`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, e: f64) -> bool {
        e > self.lo && e < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn widened(&self, by: f64) -> Self {
        Self {
            lo: self.lo - by,
            hi: self.hi + by,
        }
    }

    pub fn intersect(&self, other: &EnergyWindow) -> Result<Self> {
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn is_subset_of(&self, other: &EnergyWindow) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    /// Length of `[a, b] ∩ ]lo, hi[` for `a ≤ b`.
    pub fn overlap_len(&self, a: f64, b: f64) -> f64 {
        (b.min(self.hi) - a.max(self.lo)).max(0.0)
    }
}

/// Returns the isolated-spectrum window `G̃₀ = ]B/2+w+ε, 3B/2−w−ε[` and the
/// flow window `Δ = ]B−δ, B+δ[`.
pub fn gap_window(params: &PhysicalParams) -> Result<(EnergyWindow, EnergyWindow)> {
    params.validate()?;
    let PhysicalParams {
        b,
        w,
        epsilon,
        delta,
        ..
    } = *params;
    let g0 = EnergyWindow::new(0.5 * b + w + epsilon, 1.5 * b - w - epsilon)?;
    let d = EnergyWindow::new(b - delta, b + delta)?;
    debug_assert!(d.is_subset_of(&g0));
    Ok((g0, d))
}

/// Finite-difference grid on `]x_min, x_max[ × [−L/2, L/2)`.
///
/// Dirichlet walls sit at `x_min` and `x_max`; the `nx` interior columns are
/// `x_i = x_min + (i+1)·hx`. The `ny` rows are periodic with `hy = L/ny`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub hx: f64,
    pub ny: usize,
}

impl GridSpec {
    /// Default resolution: `hx, hy ≤ 1/(4√B)`, left wall at `−12/√B`, right
    /// wall one magnetic length beyond the point where `W = 3B`.
    pub fn default_for(params: &PhysicalParams) -> Self {
        Self::with_resolution(params, 4.0)
    }

    /// Grid with `points_per_length` points per magnetic length in both directions.
    pub fn with_resolution(params: &PhysicalParams, points_per_length: f64) -> Self {
        let lb = params.magnetic_length();
        let hx = lb / points_per_length;
        let x_min = -12.0 * lb;
        let turning = (3.0 * params.b / params.u).powf(1.0 / params.gamma);
        let cells = ((turning + lb - x_min) / hx).ceil();
        let ny = ((params.l / hx).ceil() as usize).max(8);
        Self {
            x_min,
            x_max: x_min + cells * hx,
            hx,
            ny,
        }
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        if !(self.x_min < 0.0 && self.x_max > 0.0) {
            return Err(Error::InvalidParams {
                field: "grid.x_min/x_max",
                reason: format!(
                    "need x_min < 0 < x_max, got [{}, {}]",
                    self.x_min, self.x_max
                ),
            });
        }
        if !(self.hx > 0.0) {
            return Err(Error::InvalidParams {
                field: "grid.hx",
                reason: "step must be positive".into(),
            });
        }
        let cells = (self.x_max - self.x_min) / self.hx;
        if (cells - cells.round()).abs() > 1e-6 || cells.round() < 3.0 {
            return Err(Error::InvalidParams {
                field: "grid.hx",
                reason: format!("x range must be a whole number (>= 3) of steps, got {cells}"),
            });
        }
        let max_step = 0.25 * params.magnetic_length() * (1.0 + 1e-12);
        if self.hx > max_step {
            return Err(Error::InvalidParams {
                field: "grid.hx",
                reason: format!("hx = {} exceeds 1/(4√B) = {}", self.hx, max_step),
            });
        }
        if self.ny < 8 {
            return Err(Error::InvalidParams {
                field: "grid.ny",
                reason: format!("need at least 8 sites around the cylinder, got {}", self.ny),
            });
        }
        let hy = self.hy(params.l);
        if hy > max_step {
            return Err(Error::InvalidParams {
                field: "grid.ny",
                reason: format!("hy = L/ny = {hy} exceeds 1/(4√B) = {max_step}"),
            });
        }
        Ok(())
    }

    /// Number of interior x columns.
    pub fn nx(&self) -> usize {
        ((self.x_max - self.x_min) / self.hx).round() as usize - 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.hx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx()).map(|i| self.x(i)).collect()
    }

    pub fn hy(&self, l: f64) -> f64 {
        l / self.ny as f64
    }

    pub fn y(&self, j: usize, l: f64) -> f64 {
        -0.5 * l + j as f64 * self.hy(l)
    }

    pub fn sites(&self) -> usize {
        self.nx() * self.ny
    }
}

/// Impurity potential sampled on the grid, stored row-major as `values[i*ny + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderField {
    pub seed: u64,
    pub amplitude: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl DisorderField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            seed: 0,
            amplitude: 0.0,
            nx: grid.nx(),
            ny: grid.ny,
            values: vec![0.0; grid.sites()],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matches(&self, grid: &GridSpec) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny && self.values.len() == grid.sites()
    }
}

/// Draws i.i.d. uniform values on `[−w, w]` at every site with `x ≤ 0`.
///
/// Sites are visited column by column (x outer, y inner) from a ChaCha8
/// stream, so a seed fixes the field bit-for-bit on every platform.
pub fn sample_disorder(seed: u64, grid: &GridSpec, w: f64) -> DisorderField {
    assert!(w >= 0.0, "disorder amplitude must be non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = (grid.nx(), grid.ny);
    let mut values = vec![0.0; nx * ny];
    for i in 0..nx {
        if grid.x(i) > 0.0 {
            continue;
        }
        for v in &mut values[i * ny..(i + 1) * ny] {
            let r: f64 = rng.gen();
            *v = w * (2.0 * r - 1.0);
        }
    }
    DisorderField {
        seed,
        amplitude: w,
        nx,
        ny,
        values,
    }
}
