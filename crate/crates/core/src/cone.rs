//! The SU(1,1)-invariant cone in RP^4 and its leafwise holomorphic function.
//!
//! Points are `[z1, z2, t]` with `z1, z2` complex, `t` real and
//! `|z1|^2 - |z2|^2 = t^2`. The group acts by
//! `[z1, z2, t] -> [alpha z1 + beta conj(z2), alpha z2 + beta conj(z1), t]`
//! and the function
//!
//! ```text
//! f(z, [z1, z2, t]) = (conj(z1) z - z2) / (-conj(z2) z + z1)
//! ```
//!
//! satisfies `f(g z, g p) = f(z, p)`. For `t != 0` the map `z -> f(z, p)` is
//! a disc automorphism; for `t = 0` it is a unimodular constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{DiscPoint, Su11Element, C64};

pub const CONE_TOL: f64 = 1e-12;

/// A normalized representative of a point of the cone.
///
/// The coordinate vector has unit Euclidean norm and the first nonzero entry
/// of `(t, Re z1, Im z1, Re z2, Im z2)` is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    z1: C64,
    z2: C64,
    t: f64,
}

impl ConePoint {
    pub fn new(z1: C64, z2: C64, t: f64) -> Result<Self> {
        let p = Self::normalized(z1, z2, t)?;
        let defect = p.cone_defect();
        if defect > CONE_TOL {
            return Err(Error::NotOnCone(defect));
        }
        Ok(p)
    }

    fn normalized(z1: C64, z2: C64, t: f64) -> Result<Self> {
        let norm = (z1.norm_sqr() + z2.norm_sqr() + t * t).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let mut p = Self {
            z1: z1 / norm,
            z2: z2 / norm,
            t: t / norm,
        };
        let lead = [p.t, p.z1.re, p.z1.im, p.z2.re, p.z2.im]
            .into_iter()
            .find(|x| *x != 0.0)
            .unwrap_or(1.0);
        if lead < 0.0 {
            p = Self {
                z1: -p.z1,
                z2: -p.z2,
                t: -p.t,
            };
        }
        Ok(p)
    }

    pub fn z1(&self) -> C64 {
        self.z1
    }

    pub fn z2(&self) -> C64 {
        self.z2
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `| |z1|^2 - |z2|^2 - t^2 |` of the unit representative.
    pub fn cone_defect(&self) -> f64 {
        (self.z1.norm_sqr() - self.z2.norm_sqr() - self.t * self.t).abs()
    }

    /// Equality in RP^4: compares against both `p` and `-p`.
    pub fn projective_eq(&self, other: &Self, tol: f64) -> bool {
        let d = |s: f64| {
            (self.z1 - other.z1 * s)
                .norm()
                .max((self.z2 - other.z2 * s).norm())
                .max((self.t - other.t * s).abs())
        };
        d(1.0).min(d(-1.0)) < tol
    }
}

/// Applies `g` to a cone point.
pub fn cone_act(g: &Su11Element, p: &ConePoint) -> ConePoint {
    let (a, b) = (g.alpha(), g.beta());
    let z1 = a * p.z1 + b * p.z2.conj();
    let z2 = a * p.z2 + b * p.z1.conj();
    ConePoint::normalized(z1, z2, p.t).expect("the action is invertible")
}

/// `(conj(alpha) z - beta) / (-conj(beta) z + alpha)` on raw coordinates.
pub fn cone_function(z: C64, alpha: C64, beta: C64) -> Result<C64> {
    if alpha == C64::new(0.0, 0.0) && beta == C64::new(0.0, 0.0) {
        return Err(Error::DegenerateFiber);
    }
    let den = alpha - beta.conj() * z;
    debug_assert!(den.norm() > 0.0, "denominator vanishes inside the disc");
    Ok((alpha.conj() * z - beta) / den)
}

/// The leafwise holomorphic function of the cone example.
pub fn f_eval(z: DiscPoint, p: &ConePoint) -> Result<C64> {
    cone_function(z.z(), p.z1, p.z2)
}

/// `|f(g z, g p) - f(z, p)|`.
pub fn invariance_residual(g: &Su11Element, z: DiscPoint, p: &ConePoint) -> Result<f64> {
    let lhs = f_eval(g.apply_disc(z), &cone_act(g, p))?;
    let rhs = f_eval(z, p)?;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn base() -> ConePoint {
        ConePoint::new(c(1.0, 0.0), c(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn normalization_and_sign() {
        let p = ConePoint::new(c(-2.0, 0.0), c(0.0, 0.0), -2.0).unwrap();
        assert!(p.t() > 0.0);
        assert!((p.z1().re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(p.projective_eq(&base(), 1e-15));
        assert!(matches!(
            ConePoint::new(c(1.0, 0.0), c(1.0, 0.0), 1.0),
            Err(Error::NotOnCone(_))
        ));
        assert!(matches!(
            ConePoint::new(c(0.0, 0.0), c(0.0, 0.0), 0.0),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn action_examples() {
        let p = base();
        assert!(cone_act(&Su11Element::identity(), &p).projective_eq(&p, 1e-15));

        let theta = 1.2;
        let q = cone_act(&Su11Element::rotation(theta), &p);
        let expect = ConePoint::new(C64::from_polar(1.0, theta / 2.0), c(0.0, 0.0), 1.0).unwrap();
        assert!(q.projective_eq(&expect, 1e-15));

        let l = 1.7;
        let q = cone_act(&Su11Element::translation(l), &p);
        let expect =
            ConePoint::new(c((l / 2.0).cosh(), 0.0), c((l / 2.0).sinh(), 0.0), 1.0).unwrap();
        assert!(q.projective_eq(&expect, 1e-15));
        assert!(q.cone_defect() < 1e-14);
    }

    #[test]
    fn function_examples() {
        let z = DiscPoint::from_re_im(0.3, -0.4).unwrap();
        assert!((f_eval(z, &base()).unwrap() - z.z()).norm() < 1e-15);

        let (a, b) = (c(0.8, 0.1), c(0.2, -0.3));
        let p = ConePoint::new(a, b, (a.norm_sqr() - b.norm_sqr()).sqrt()).unwrap();
        let v = f_eval(DiscPoint::origin(), &p).unwrap();
        assert!((v + b / a).norm() < 1e-15);

        let theta = 0.7;
        let p = ConePoint::new(c(1.0, 0.0), C64::from_polar(1.0, theta), 0.0).unwrap();
        for x in [-0.9, 0.0, 0.4] {
            let v = f_eval(DiscPoint::from_re_im(x, 0.2).unwrap(), &p).unwrap();
            assert!((v + C64::from_polar(1.0, theta)).norm() < 1e-14);
        }

        assert_eq!(
            cone_function(c(0.1, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            Err(Error::DegenerateFiber)
        );
    }

    #[test]
    fn invariance_examples() {
        let z = DiscPoint::from_re_im(0.3, 0.0).unwrap();
        assert_eq!(
            invariance_residual(&Su11Element::identity(), z, &base()).unwrap(),
            0.0
        );

        // Rotation: g z = e^{i theta} 0.3 and f(., g p) is z -> e^{-i theta} z.
        let g = Su11Element::rotation(0.9);
        let lhs = f_eval(g.apply_disc(z), &cone_act(&g, &base())).unwrap();
        assert!((lhs - c(0.3, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn invariance_on_random_triples() {
        let mut rng = sampling::rng(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let g = sampling::su11(&mut rng, 3.0);
            let z = sampling::disc_point(&mut rng, 0.95);
            let p = sampling::cone_point(&mut rng, 0.9);
            worst = worst.max(invariance_residual(&g, z, &p).unwrap());
        }
        assert!(worst < 1e-10, "{worst}");
    }
}
