//! SU(1,1) and its action on the Poincaré disc.
//!
//! An element is stored as the pair `(alpha, beta)` of the matrix
//! `[[alpha, beta], [conj(beta), conj(alpha)]]` with `|alpha|^2 - |beta|^2 = 1`.
//! It acts on the disc by `z -> (alpha z + beta) / (conj(beta) z + conj(alpha))`.
//! Elements are not quotiented by the center `{I, -I}`; use
//! [`Su11Element::eq_mod_center`] when the sign is irrelevant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const DET_TOL: f64 = 1e-12;
pub const CLASS_TOL: f64 = 1e-9;

/// A point of the open unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint(C64);

impl DiscPoint {
    pub fn new(z: C64) -> Result<Self> {
        if z.is_finite() && z.norm_sqr() < 1.0 {
            Ok(Self(z))
        } else {
            Err(Error::OutsideDisc { re: z.re, im: z.im })
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(C64::new(re, im))
    }

    pub const fn origin() -> Self {
        Self(C64::new(0.0, 0.0))
    }

    #[inline]
    pub fn z(self) -> C64 {
        self.0
    }
}

impl From<DiscPoint> for C64 {
    fn from(p: DiscPoint) -> C64 {
        p.0
    }
}

/// Conjugacy type of a disc isometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su11Element {
    alpha: C64,
    beta: C64,
}

impl Su11Element {
    /// Builds an element, rescaling `(alpha, beta)` by `1/sqrt(|alpha|^2 - |beta|^2)`.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NonUnitDeterminant(det));
        }
        let s = det.sqrt();
        let g = Self {
            alpha: alpha / s,
            beta: beta / s,
        };
        // Renormalization of a huge or tiny pair can still lose the constraint.
        if g.det_defect() > DET_TOL {
            return Err(Error::NonUnitDeterminant(det));
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        Self {
            alpha: C64::new(1.0, 0.0),
            beta: C64::new(0.0, 0.0),
        }
    }

    /// Rotation `z -> e^{i theta} z`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            alpha: C64::from_polar(1.0, theta / 2.0),
            beta: C64::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation of length `length` along the real diameter,
    /// moving the origin towards `+1`.
    pub fn translation(length: f64) -> Self {
        Self {
            alpha: C64::new((length / 2.0).cosh(), 0.0),
            beta: C64::new((length / 2.0).sinh(), 0.0),
        }
    }

    /// Translation of length `length` along the diameter at angle `theta`.
    pub fn translation_along(theta: f64, length: f64) -> Self {
        let r = Self::rotation(theta);
        r.compose(&Self::translation(length)).compose(&r.inverse())
    }

    #[inline]
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn det(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    pub fn det_defect(&self) -> f64 {
        (self.det() - 1.0).abs()
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            alpha: -self.alpha,
            beta: -self.beta,
        }
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.alpha.re
    }

    /// `[[alpha, beta], [conj beta, conj alpha]]`.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [self.alpha, self.beta],
            [self.beta.conj(), self.alpha.conj()],
        ]
    }

    /// Entrywise max distance to `+I` or `-I`, whichever is closer.
    pub fn distance_to_center(&self) -> f64 {
        let one = C64::new(1.0, 0.0);
        let plus = (self.alpha - one).norm().max(self.beta.norm());
        let minus = (self.alpha + one).norm().max(self.beta.norm());
        plus.min(minus)
    }

    /// Entrywise max distance to `other` or `-other`.
    pub fn distance_mod_center(&self, other: &Self) -> f64 {
        let plus = (self.alpha - other.alpha)
            .norm()
            .max((self.beta - other.beta).norm());
        let minus = (self.alpha + other.alpha)
            .norm()
            .max((self.beta + other.beta).norm());
        plus.min(minus)
    }

    pub fn eq_mod_center(&self, other: &Self, tol: f64) -> bool {
        self.distance_mod_center(other) < tol
    }

    /// Möbius action on an arbitrary complex number (boundary points included).
    #[inline]
    pub fn apply(&self, z: C64) -> C64 {
        (self.alpha * z + self.beta) / (self.beta.conj() * z + self.alpha.conj())
    }

    /// Derivative of the Möbius map at `z`.
    pub fn derivative(&self, z: C64) -> C64 {
        let d = self.beta.conj() * z + self.alpha.conj();
        C64::new(self.det(), 0.0) / (d * d)
    }

    pub fn apply_disc(&self, z: DiscPoint) -> DiscPoint {
        let w = self.apply(z.0);
        // |w| < 1 holds exactly; rounding can only matter within an ulp of the circle.
        if w.norm_sqr() < 1.0 {
            DiscPoint(w)
        } else {
            DiscPoint(w / (w.norm() * (1.0 + f64::EPSILON)))
        }
    }

    pub fn classify(&self, class_tol: f64) -> IsometryKind {
        if self.distance_to_center() < class_tol {
            return IsometryKind::Identity;
        }
        let tr = self.trace().abs();
        if tr < 2.0 - class_tol {
            IsometryKind::Elliptic
        } else if tr > 2.0 + class_tol {
            IsometryKind::Hyperbolic
        } else {
            IsometryKind::Parabolic
        }
    }

    /// Roots of `conj(beta) z^2 + (conj(alpha) - alpha) z - beta = 0`.
    ///
    /// Returns an empty vector for `±I`, and only `0` for a rotation about the
    /// origin (the other fixed point is at infinity).
    pub fn fixed_points(&self) -> Vec<C64> {
        let a = self.beta.conj();
        let b = self.alpha.conj() - self.alpha;
        let c = -self.beta;
        if a.norm() < 1e-15 {
            if b.norm() < 1e-15 {
                return Vec::new();
            }
            return vec![-c / b];
        }
        let disc = (b * b - 4.0 * a * c).sqrt();
        // Pick the numerically stable branch for the first root.
        let q = if (b.conj() * disc).re >= 0.0 {
            -(b + disc) / 2.0
        } else {
            -(b - disc) / 2.0
        };
        if q.norm() < 1e-300 {
            return vec![C64::new(0.0, 0.0)];
        }
        let r1 = q / a;
        let r2 = c / q;
        if (r1 - r2).norm() < 1e-12 {
            vec![r1]
        } else {
            vec![r1, r2]
        }
    }
}

/// Hyperbolic distance between two disc points.
pub fn hyperbolic_distance(z: C64, w: C64) -> f64 {
    let num = (z - w).norm();
    let den = (C64::new(1.0, 0.0) - z.conj() * w).norm();
    2.0 * (num / den).atanh()
}
