//! The space of holomorphic maps from the disc into the closed disc.
//!
//! A function is a Taylor polynomial `c_0 + c_1 z + ... + c_N z^N` together
//! with a sampled sup certificate over `|z| <= r_check`. SU(1,1) acts by
//! `(g, f) -> f o g^-1`; the action is computed by sampling the composition on
//! the circle `|z| = r_fit` and recovering coefficients with an FFT.
//!
//! The tautological function `phi(z, f) = f(z)` satisfies
//! `phi(g z, f o g^-1) = phi(z, f)`, which is what makes it descend to the
//! foliated bundle built from this fiber.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bundle::{FiberAction, FiberPoint, LeafwiseFunction};
use crate::error::{Error, Result};
use crate::fuchsian::{alphabet, FuchsianRepresentation, Letter};
use crate::moebius::{DiscPoint, Su11Element, C64};

/// Sampling and truncation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolConfig {
    pub degree: usize,
    pub r_fit: f64,
    pub fit_samples: usize,
    pub r_check: f64,
    pub check_radii: usize,
    pub check_angles: usize,
    pub sup_tol: f64,
    pub tail_tol: f64,
}

impl Default for HolConfig {
    fn default() -> Self {
        Self {
            degree: 64,
            r_fit: 0.95,
            fit_samples: 1024,
            r_check: 0.999,
            check_radii: 16,
            check_angles: 2048,
            sup_tol: 1e-6,
            tail_tol: 1e-8,
        }
    }
}

impl HolConfig {
    pub fn with_degree(degree: usize) -> Self {
        let base = Self::default();
        Self {
            degree,
            fit_samples: (16 * degree).next_power_of_two().max(base.fit_samples),
            check_angles: (4 * degree).next_power_of_two().max(base.check_angles),
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.r_fit > 0.0 && self.r_fit < 1.0) {
            return bad("r_fit must lie in (0, 1)");
        }
        if !(self.r_check > 0.0 && self.r_check < 1.0) {
            return bad("r_check must lie in (0, 1)");
        }
        if self.fit_samples < 2 * (self.degree + 1) {
            return bad("fit_samples must be at least 2 (degree + 1)");
        }
        if self.check_angles <= self.degree || self.check_radii == 0 {
            return bad("certificate grid is too coarse for the degree");
        }
        if !(self.sup_tol > 0.0 && self.tail_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoloFunction {
    coefficients: Vec<C64>,
    r_check: f64,
    certified_sup: f64,
}

impl HoloFunction {
    /// Builds a function from Taylor coefficients; the certificate must not exceed `1 + sup_tol`.
    pub fn from_coefficients(coefficients: Vec<C64>, cfg: &HolConfig) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("no coefficients".into()));
        }
        if coefficients.len() > cfg.check_angles {
            return Err(Error::InvalidParameter(
                "degree exceeds certificate grid".into(),
            ));
        }
        let certified_sup = certify(&coefficients, cfg);
        if !(certified_sup <= 1.0 + cfg.sup_tol) {
            return Err(Error::SupViolation {
                sup: certified_sup,
                tolerance: cfg.sup_tol,
            });
        }
        Ok(Self {
            coefficients,
            r_check: cfg.r_check,
            certified_sup,
        })
    }

    pub fn identity(cfg: &HolConfig) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); cfg.degree.max(1) + 1];
        c[1] = C64::new(1.0, 0.0);
        Self::from_coefficients(c, cfg)
    }

    pub fn constant(value: C64, cfg: &HolConfig) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); cfg.degree + 1];
        c[0] = value;
        Self::from_coefficients(c, cfg)
    }

    /// Taylor coefficients of `f` up to `cfg.degree`, recovered from samples on `|z| = r_fit`.
    pub fn fit<F: Fn(C64) -> C64>(f: F, cfg: &HolConfig) -> Result<Self> {
        let coefficients = fit_coefficients(f, cfg)?;
        Self::from_coefficients(coefficients, cfg)
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn certified_sup(&self) -> f64 {
        self.certified_sup
    }

    pub fn r_check(&self) -> f64 {
        self.r_check
    }

    /// Max of `|f|` over `angles` equally spaced points of `|z| = r`.
    /// At `r = 1` this bounds the truncated polynomial on the whole closed disc.
    pub fn sup_on_circle(&self, r: f64, angles: usize) -> f64 {
        let m = angles.max(self.coefficients.len()).next_power_of_two();
        let mut buf = vec![C64::new(0.0, 0.0); m];
        let mut rk = 1.0;
        for (k, c) in self.coefficients.iter().enumerate() {
            buf[k] = c * rk;
            rk *= r;
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coefficients
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `{"degree", "r_check", "certified_sup", "coefficients": [[re, im], ...]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            degree: usize,
            r_check: f64,
            certified_sup: f64,
            coefficients: &'a [C64],
        }
        serde_json::to_string(&Doc {
            degree: self.degree(),
            r_check: self.r_check,
            certified_sup: self.certified_sup,
            coefficients: &self.coefficients,
        })
        .expect("function serializes")
    }

    /// Parses [`HoloFunction::to_json`] output and recomputes the certificate.
    pub fn from_json(text: &str, cfg: &HolConfig) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            degree: usize,
            coefficients: Vec<C64>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| crate::cli::parse_error(text, &e))?;
        if doc.coefficients.len() != doc.degree + 1 {
            return Err(Error::DimensionMismatch {
                expected: doc.degree + 1,
                found: doc.coefficients.len(),
            });
        }
        let cfg = HolConfig {
            check_angles: cfg.check_angles.max((doc.degree + 1).next_power_of_two()),
            ..*cfg
        };
        Self::from_coefficients(doc.coefficients, &cfg)
    }
}

fn fit_coefficients<F: Fn(C64) -> C64>(f: F, cfg: &HolConfig) -> Result<Vec<C64>> {
    cfg.validate()?;
    let m = cfg.fit_samples;
    let r = cfg.r_fit;
    let mut buf: Vec<C64> = (0..m)
        .map(|j| f(C64::from_polar(r, 2.0 * PI * j as f64 / m as f64)))
        .collect();
    if buf.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "function is not finite on the fit circle".into(),
        ));
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    // buf[k] / m = c_k r^k for 0 <= k < m/2 up to aliasing of order r^m.
    let tail: f64 = buf[cfg.degree + 1..m / 2]
        .iter()
        .map(|c| c.norm() * scale)
        .sum();
    if tail > cfg.tail_tol {
        return Err(Error::TruncationError {
            tail,
            tolerance: cfg.tail_tol,
        });
    }
    let mut rk = 1.0;
    Ok(buf[..=cfg.degree]
        .iter()
        .map(|c| {
            let v = c * scale / rk;
            rk *= r;
            v
        })
        .collect())
}

/// Max of `|f|` on `check_radii` circles up to `r_check`, `check_angles` points each.
fn certify(coefficients: &[C64], cfg: &HolConfig) -> f64 {
    let m = cfg.check_angles;
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let mut best: f64 = 0.0;
    for i in 1..=cfg.check_radii {
        let r = cfg.r_check * i as f64 / cfg.check_radii as f64;
        let mut buf = vec![C64::new(0.0, 0.0); m];
        let mut rk = 1.0;
        for (k, c) in coefficients.iter().enumerate() {
            buf[k] = c * rk;
            rk *= r;
        }
        ifft.process(&mut buf);
        best = buf.iter().map(|v| v.norm()).fold(best, f64::max);
    }
    best.max(coefficients[0].norm())
}

/// `f o g^-1`, refitted at `cfg.degree`.
pub fn precompose_action(
    g: &Su11Element,
    f: &HoloFunction,
    cfg: &HolConfig,
) -> Result<HoloFunction> {
    let ginv = g.inverse();
    HoloFunction::fit(|w| f.eval(ginv.apply(w)), cfg)
}

/// `phi(z, f) = f(z)`.
pub fn tautological_phi(z: DiscPoint, f: &HoloFunction) -> C64 {
    f.eval(z.z())
}

pub const LIMIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum OrbitLimit {
    /// The tail converges uniformly on the compact disc to a constant.
    /// `unimodular` records whether `|value| = 1` within [`LIMIT_TOL`].
    LimitConstant {
        value: C64,
        unimodular: bool,
        sup_distance: f64,
    },
    NoLimit {
        sup_distance: f64,
    },
}

/// Probes whether `f o g_n^-1` converges to a constant on `|z| <= compact_radius`.
///
/// The compositions are evaluated directly (no refit), on 8 circles of 64
/// points plus the center. The last quarter of the sequence (at least two
/// terms) must be Cauchy within [`LIMIT_TOL`], and the final term within
/// [`LIMIT_TOL`] of its value at 0.
pub fn orbit_limit_probe(
    sequence: &[Su11Element],
    f: &HoloFunction,
    compact_radius: f64,
) -> Result<OrbitLimit> {
    if !(compact_radius > 0.0 && compact_radius <= 0.9) {
        return Err(Error::InvalidParameter(format!(
            "compact radius {compact_radius} must lie in (0, 0.9]"
        )));
    }
    if sequence.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two group elements".into(),
        ));
    }
    let mut grid = vec![C64::new(0.0, 0.0)];
    for i in 1..=8 {
        let r = compact_radius * i as f64 / 8.0;
        grid.extend((0..64).map(|j| C64::from_polar(r, 2.0 * PI * j as f64 / 64.0)));
    }
    let values: Vec<Vec<C64>> = sequence
        .iter()
        .map(|g| {
            let ginv = g.inverse();
            grid.iter().map(|&w| f.eval(ginv.apply(w))).collect()
        })
        .collect();
    let sup = |a: &[C64], b: &[C64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let last = values.last().expect("nonempty");
    let c = last[0];
    let sup_distance = last.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    let tail_start = (values.len() * 3 / 4).min(values.len() - 2);
    let cauchy = values[tail_start..]
        .windows(2)
        .all(|w| sup(&w[0], &w[1]) < LIMIT_TOL);
    Ok(if cauchy && sup_distance < LIMIT_TOL {
        OrbitLimit::LimitConstant {
            value: c,
            unimodular: (c.norm() - 1.0).abs() < LIMIT_TOL,
            sup_distance,
        }
    } else {
        OrbitLimit::NoLimit { sup_distance }
    })
}

/// Fiber action of the lattice on the universal space.
pub struct HoloAction<'a> {
    pub rep: &'a FuchsianRepresentation,
    pub cfg: HolConfig,
}

impl FiberAction for HoloAction<'_> {
    fn act_letter(&self, l: Letter, fiber: &FiberPoint) -> Result<FiberPoint> {
        match fiber {
            FiberPoint::Holo(f) => Ok(FiberPoint::Holo(precompose_action(
                &self.rep.letter_image(l)?,
                f,
                &self.cfg,
            )?)),
            _ => Err(Error::FiberMismatch),
        }
    }
}

/// The leafwise function `F(z, v) = phi(z, psi_hat(v))`.
pub struct TautologicalLeafwise<P> {
    psi_hat: P,
}

impl<P> LeafwiseFunction for TautologicalLeafwise<P>
where
    P: Fn(&FiberPoint) -> Result<HoloFunction>,
{
    fn eval(&self, z: C64, fiber: &FiberPoint) -> Result<C64> {
        Ok((self.psi_hat)(fiber)?.eval(z))
    }
}

pub const EQUIVARIANCE_TOL: f64 = 1e-9;
/// Radius of the disc on which equivariance is compared.
const EQUIVARIANCE_RADIUS: f64 = 0.5;

/// Turns an equivariant map `psi_hat: V -> Hol(D, closed D)` into a leafwise
/// holomorphic function on the bundle with fiber `V`.
///
/// Equivariance means `psi_hat(rho(g) v) = psi_hat(v) o g^-1`; it is checked
/// for every sample fiber and every generator letter by comparing values on a
/// grid in `|w| <= 0.5`.
pub fn equivariant_to_leafwise<P, A>(
    psi_hat: P,
    rep: &FuchsianRepresentation,
    action: &A,
    samples: &[FiberPoint],
    tol: f64,
) -> Result<TautologicalLeafwise<P>>
where
    P: Fn(&FiberPoint) -> Result<HoloFunction>,
    A: FiberAction + ?Sized,
{
    let mut grid = vec![C64::new(0.0, 0.0)];
    for i in 1..=4 {
        let r = EQUIVARIANCE_RADIUS * i as f64 / 4.0;
        grid.extend((0..16).map(|j| C64::from_polar(r, 2.0 * PI * j as f64 / 16.0)));
    }
    let letters = alphabet(rep.presentation().generator_count());
    let mut worst = (0usize, 0.0f64);
    for (i, v) in samples.iter().enumerate() {
        let h0 = psi_hat(v)?;
        for &l in &letters {
            let g = rep.letter_image(l)?;
            let ginv = g.inverse();
            let h1 = psi_hat(&action.act_letter(l, v)?)?;
            let r = grid
                .iter()
                .map(|&w| (h1.eval(w) - h0.eval(ginv.apply(w))).norm())
                .fold(0.0, f64::max);
            if r > worst.1 {
                worst = (i, r);
            }
        }
    }
    if worst.1 > tol {
        return Err(Error::EquivarianceFailure {
            residual: worst.1,
            sample: worst.0,
            tolerance: tol,
        });
    }
    Ok(TautologicalLeafwise { psi_hat })
}
