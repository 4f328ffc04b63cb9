//! Finite-difference Wirtinger calculus on a conformal metric `lambda |dz|^2`.
//!
//! Conventions: the dbar-Laplacian is `-(2 / lambda) d_z d_zbar h`, which is
//! `-1/2` of the Laplace-Beltrami operator, and the pointwise norm of the
//! holomorphic derivative is `|df|^2 = (2 / lambda) |f'|^2`. With these the
//! identity `Laplacian(|f|^2) = -|df|^2` holds for holomorphic `f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::{DiscPoint, C64};

pub const MIN_STEP: f64 = 1e-8;
pub const MAX_STEP: f64 = 1e-2;
/// Step of the holomorphy precheck in [`identity_residual`].
pub const HOLO_CHECK_STEP: f64 = 1e-4;
pub const HOLO_CHECK_TOL: f64 = 1e-8;

const I: C64 = C64::new(0.0, 1.0);

/// Conformal factor `lambda` of a metric on the disc.
pub struct ConformalMetric {
    factor: Box<dyn Fn(C64) -> f64 + Send + Sync>,
}

impl ConformalMetric {
    pub fn new(factor: impl Fn(C64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            factor: Box::new(factor),
        }
    }

    /// `4 / (1 - |z|^2)^2`.
    pub fn poincare() -> Self {
        Self::new(|z| 4.0 / (1.0 - z.norm_sqr()).powi(2))
    }

    /// The factor at `z`, which must be positive and finite.
    pub fn factor(&self, z: C64) -> Result<f64> {
        let l = (self.factor)(z);
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::NonPositiveMetric(l));
        }
        Ok(l)
    }
}

impl Default for ConformalMetric {
    fn default() -> Self {
        Self::poincare()
    }
}

fn check_step(z: C64, step: f64, reach: f64) -> Result<()> {
    if !(MIN_STEP..=MAX_STEP).contains(&step) || 1.0 - z.norm() <= reach * step {
        return Err(Error::StepOutOfRange { step });
    }
    Ok(())
}

fn d_raw<H: Fn(C64) -> C64 + ?Sized>(h: &H, z: C64, s: f64) -> (C64, C64) {
    let dx = h(z + s) - h(z - s);
    let dy = h(z + I * s) - h(z - I * s);
    ((dx - I * dy) / (4.0 * s), (dx + I * dy) / (4.0 * s))
}

/// `(d h / dz, d h / dzbar)` by central differences.
pub fn wirtinger_derivs<H: Fn(C64) -> C64 + ?Sized>(
    h: &H,
    z: DiscPoint,
    step: f64,
) -> Result<(C64, C64)> {
    check_step(z.z(), step, 2.0)?;
    Ok(d_raw(h, z.z(), step))
}

/// `-(2 / lambda) d_z d_zbar h` by nested central differences.
pub fn laplacian_dbar<H: Fn(C64) -> C64 + ?Sized>(
    h: &H,
    z: DiscPoint,
    metric: &ConformalMetric,
    step: f64,
) -> Result<C64> {
    check_step(z.z(), step, 2.0)?;
    let lambda = metric.factor(z.z())?;
    let dbar = |w: C64| d_raw(h, w, step).1;
    let mixed = d_raw(&dbar, z.z(), step).0;
    Ok(-2.0 / lambda * mixed)
}

/// `|Laplacian(|f|^2) + (2 / lambda) |f'|^2|` for holomorphic `f`.
///
/// `f` must pass a dbar check below 1e-8 at step 1e-4, otherwise
/// [`Error::NotHolomorphic`] is returned.
pub fn identity_residual<H: Fn(C64) -> C64 + ?Sized>(
    f: &H,
    z: DiscPoint,
    metric: &ConformalMetric,
    step: f64,
) -> Result<f64> {
    check_step(z.z(), step, 2.0)?;
    let dbar = wirtinger_derivs(f, z, HOLO_CHECK_STEP)?.1.norm();
    if dbar > HOLO_CHECK_TOL {
        return Err(Error::NotHolomorphic(dbar));
    }
    let sq = |w: C64| C64::new(f(w).norm_sqr(), 0.0);
    let lhs = laplacian_dbar(&sq, z, metric, step)?;
    let (d, _) = wirtinger_derivs(f, z, step)?;
    let lambda = metric.factor(z.z())?;
    Ok((lhs + 2.0 / lambda * d.norm_sqr()).norm())
}

/// Divergence `(1 / lambda)(d_x(lambda X1) + d_y(lambda X2))` of a real vector field.
pub fn divergence<X: Fn(C64) -> (f64, f64) + ?Sized>(
    field: &X,
    z: DiscPoint,
    metric: &ConformalMetric,
    step: f64,
) -> Result<f64> {
    check_step(z.z(), step, 2.0)?;
    let z = z.z();
    let weighted = |w: C64| -> Result<(f64, f64)> {
        let l = metric.factor(w)?;
        let (a, b) = field(w);
        Ok((l * a, l * b))
    };
    let dx = (weighted(z + step)?.0 - weighted(z - step)?.0) / (2.0 * step);
    let dy = (weighted(z + I * step)?.1 - weighted(z - I * step)?.1) / (2.0 * step);
    Ok((dx + dy) / metric.factor(z)?)
}

/// Metric gradient `(1 / lambda)(h_x, h_y)` of a real function.
pub fn gradient<H: Fn(C64) -> f64 + ?Sized>(
    h: &H,
    z: C64,
    metric: &ConformalMetric,
    step: f64,
) -> Result<(f64, f64)> {
    let l = metric.factor(z)?;
    let hx = (h(z + step) - h(z - step)) / (2.0 * step);
    let hy = (h(z + I * step) - h(z - I * step)) / (2.0 * step);
    Ok((hx / l, hy / l))
}

/// `div grad h` computed from [`divergence`] and [`gradient`].
pub fn div_grad<H: Fn(C64) -> f64 + ?Sized>(
    h: &H,
    z: DiscPoint,
    metric: &ConformalMetric,
    step: f64,
) -> Result<f64> {
    check_step(z.z(), step, 2.0)?;
    let field = |w: C64| gradient(h, w, metric, step).unwrap_or((f64::NAN, f64::NAN));
    let v = divergence(&field, z, metric, step)?;
    if !v.is_finite() {
        return Err(Error::NonPositiveMetric(f64::NAN));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResidual {
    pub z: C64,
    pub residual: f64,
}

/// Points of an `n x n` grid over `[-radius, radius]^2` that satisfy `|z| <= radius`.
pub fn disc_grid(n: usize, radius: f64) -> Vec<DiscPoint> {
    let mut out = Vec::new();
    if n < 2 {
        return vec![DiscPoint::origin()];
    }
    for i in 0..n {
        for j in 0..n {
            let x = -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
            let y = -radius + 2.0 * radius * j as f64 / (n - 1) as f64;
            let z = C64::new(x, y);
            if z.norm() <= radius + 1e-12 {
                if let Ok(p) = DiscPoint::new(z) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// [`identity_residual`] on [`disc_grid`].
pub fn identity_residual_grid<H: Fn(C64) -> C64 + ?Sized>(
    f: &H,
    metric: &ConformalMetric,
    n: usize,
    radius: f64,
    step: f64,
) -> Result<Vec<GridResidual>> {
    disc_grid(n, radius)
        .into_iter()
        .map(|z| {
            Ok(GridResidual {
                z: z.z(),
                residual: identity_residual(f, z, metric, step)?,
            })
        })
        .collect()
}
