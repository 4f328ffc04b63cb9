//! The foliated bundle `(disc x X) / Gamma` over a closed surface.
//!
//! A point of the bundle is stored as a base point in the closed fundamental
//! domain together with a fiber point. The identification is
//! `(gamma z, x) ~ (z, rho(gamma)^-1 x)`, so a lifted point `(z, x)` with
//! `w z` in the domain is stored as `(w z, rho(w) x)`.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::cone::{cone_act, f_eval, ConePoint};
use crate::error::{Error, Result};
use crate::fuchsian::{
    locate_in_domain, FuchsianRepresentation, Letter, Word, MAX_STEPS, MEMBERSHIP_TOL,
};
use crate::holspace::HoloFunction;
use crate::moebius::{DiscPoint, Su11Element, C64};
use crate::projdyn::{act, LinearRep, ProjPoint};
use crate::sampling;

/// Domain membership slack for stored base points.
pub const DOMAIN_TOL: f64 = 1e-10;
/// Crossing parameters are refined until the bracket is this narrow.
pub const CROSSING_TOL: f64 = 1e-12;
pub const CONST_TOL: f64 = 1e-10;
/// Base points for leaf sampling stay inside this radius.
pub const SAMPLE_RADIUS: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub enum FiberPoint {
    Proj(ProjPoint),
    Cone(ConePoint),
    Holo(HoloFunction),
}

impl FiberPoint {
    /// Distance between fibers of the same kind.
    ///
    /// Projective points use the projective distance, cone points the
    /// smaller of `|p - q|` and `|p + q|`, functions the largest coefficient
    /// difference.
    pub fn distance(&self, other: &FiberPoint) -> Result<f64> {
        match (self, other) {
            (FiberPoint::Proj(a), FiberPoint::Proj(b)) => {
                if a.dim() != b.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: a.dim(),
                        found: b.dim(),
                    });
                }
                Ok(a.distance(b))
            }
            (FiberPoint::Cone(a), FiberPoint::Cone(b)) => {
                let d = |s: f64| {
                    (a.z1() - b.z1() * s)
                        .norm()
                        .max((a.z2() - b.z2() * s).norm())
                        .max((a.t() - b.t() * s).abs())
                };
                Ok(d(1.0).min(d(-1.0)))
            }
            (FiberPoint::Holo(a), FiberPoint::Holo(b)) => {
                let n = a.coefficients().len().max(b.coefficients().len());
                let zero = C64::new(0.0, 0.0);
                Ok((0..n)
                    .map(|k| {
                        let x = a.coefficients().get(k).copied().unwrap_or(zero);
                        let y = b.coefficients().get(k).copied().unwrap_or(zero);
                        (x - y).norm()
                    })
                    .fold(0.0, f64::max))
            }
            _ => Err(Error::FiberMismatch),
        }
    }
}

/// The action `rho` of the surface group on the fiber, given on generators.
pub trait FiberAction {
    /// `rho(l) x`.
    fn act_letter(&self, l: Letter, x: &FiberPoint) -> Result<FiberPoint>;

    /// `rho(w) x`, applying the rightmost letter first.
    fn act_word(&self, w: &Word, x: &FiberPoint) -> Result<FiberPoint> {
        w.letters()
            .iter()
            .rev()
            .try_fold(x.clone(), |acc, &l| self.act_letter(l, &acc))
    }
}

/// The lattice acting on the invariant cone through its SU(1,1) images.
pub struct ConeAction<'a> {
    pub rep: &'a FuchsianRepresentation,
}

impl FiberAction for ConeAction<'_> {
    fn act_letter(&self, l: Letter, x: &FiberPoint) -> Result<FiberPoint> {
        match x {
            FiberPoint::Cone(p) => Ok(FiberPoint::Cone(cone_act(&self.rep.letter_image(l)?, p))),
            _ => Err(Error::FiberMismatch),
        }
    }
}

/// A linear representation acting on projective space.
pub struct ProjAction<'a> {
    pub rep: &'a LinearRep,
}

impl FiberAction for ProjAction<'_> {
    fn act_letter(&self, l: Letter, x: &FiberPoint) -> Result<FiberPoint> {
        match x {
            FiberPoint::Proj(p) => Ok(FiberPoint::Proj(act(&self.rep.letter_matrix(l)?, p)?)),
            _ => Err(Error::FiberMismatch),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafPoint {
    base: DiscPoint,
    fiber: FiberPoint,
}

impl LeafPoint {
    /// Requires `base` to lie in the closed fundamental domain within [`DOMAIN_TOL`].
    pub fn new(rep: &FuchsianRepresentation, base: DiscPoint, fiber: FiberPoint) -> Result<Self> {
        let (side, v) = rep.max_violation(base.z());
        if v > DOMAIN_TOL {
            return Err(Error::InvalidParameter(format!(
                "base point violates side {side} by {v:e}"
            )));
        }
        Ok(Self { base, fiber })
    }

    /// The bundle point represented by the lifted pair `(z, x)`.
    pub fn from_lift<A: FiberAction + ?Sized>(
        rep: &FuchsianRepresentation,
        action: &A,
        z: DiscPoint,
        fiber: &FiberPoint,
    ) -> Result<Self> {
        let (w, base) = locate_in_domain(rep, z)?;
        Ok(Self {
            base,
            fiber: action.act_word(&w, fiber)?,
        })
    }

    pub fn base(&self) -> DiscPoint {
        self.base
    }

    pub fn fiber(&self) -> &FiberPoint {
        &self.fiber
    }
}

/// Result of a transport: the relocated point plus the tiles it passed through.
#[derive(Debug, Clone)]
pub struct Transport {
    pub end: LeafPoint,
    /// Accumulated side pairings; the endpoint base is `word . target`.
    pub word: Word,
    /// Path parameters in `[0, 1]` of each side crossing, in order.
    pub crossings: Vec<f64>,
}

struct Walker<'a, A: ?Sized> {
    rep: &'a FuchsianRepresentation,
    action: &'a A,
    max_steps: usize,
    frame: Su11Element,
    word: Word,
    fiber: FiberPoint,
    crossings: Vec<f64>,
}

impl<A: FiberAction + ?Sized> Walker<'_, A> {
    fn violation(&self, z: C64) -> (usize, f64) {
        self.rep.max_violation(self.frame.apply(z))
    }

    /// Walks the straight lifted segment `a -> b`, crossing sides as they are met.
    fn segment(&mut self, a: C64, b: C64, offset: f64, span: f64) -> Result<()> {
        let path = |s: f64| a + (b - a) * s;
        let mut s0 = 0.0;
        while s0 < 1.0 {
            let here = path(s0);
            let ds =
                (0.02f64).min(0.05 * (1.0 - here.norm())).max(1e-9) / (b - a).norm().max(1e-300);
            let s1 = (s0 + ds).min(1.0);
            loop {
                let (side, v) = self.violation(path(s1));
                if v <= MEMBERSHIP_TOL {
                    break;
                }
                let at = self.refine(side, &path, s0, s1);
                let l = self.rep.sides()[side].pairing;
                self.cross(l, offset + span * at)?;
            }
            s0 = s1;
        }
        Ok(())
    }

    /// Bisects for the parameter where the path leaves through `side`.
    fn refine(&self, side: usize, path: &impl Fn(f64) -> C64, mut lo: f64, mut hi: f64) -> f64 {
        let c = &self.rep.sides()[side];
        let f = |s: f64| c.violation(self.frame.apply(path(s)));
        if f(lo) > 0.0 {
            return lo;
        }
        while hi - lo > CROSSING_TOL {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn cross(&mut self, l: Letter, at: f64) -> Result<()> {
        if self.crossings.len() >= self.max_steps {
            return Err(Error::PathTooLong(self.max_steps));
        }
        self.frame = self.rep.letter_image(l)?.compose(&self.frame);
        self.word = self.word.prepend(l);
        self.fiber = self.action.act_letter(l, &self.fiber)?;
        self.crossings.push(at);
        Ok(())
    }
}

/// Transports `lp` along the straight segment from its base to `target`.
///
/// `target` is given in the frame in which `lp.base` lies in the domain.
pub fn holonomy_transport<A: FiberAction + ?Sized>(
    rep: &FuchsianRepresentation,
    action: &A,
    lp: &LeafPoint,
    target: DiscPoint,
) -> Result<LeafPoint> {
    Ok(transport_polyline(rep, action, lp, &[target], MAX_STEPS)?.end)
}

/// Transports `lp` along the polygonal path through `vertices`, all given in
/// the frame of `lp`.
pub fn transport_polyline<A: FiberAction + ?Sized>(
    rep: &FuchsianRepresentation,
    action: &A,
    lp: &LeafPoint,
    vertices: &[DiscPoint],
    max_steps: usize,
) -> Result<Transport> {
    for v in vertices {
        if v.z().norm() > 1.0 - 1e-6 {
            return Err(Error::OutsideDisc {
                re: v.z().re,
                im: v.z().im,
            });
        }
    }
    let mut walker = Walker {
        rep,
        action,
        max_steps,
        frame: Su11Element::identity(),
        word: Word::empty(),
        fiber: lp.fiber.clone(),
        crossings: Vec::new(),
    };
    let span = 1.0 / vertices.len().max(1) as f64;
    let mut prev = lp.base.z();
    for (k, v) in vertices.iter().enumerate() {
        walker.segment(prev, v.z(), k as f64 * span, span)?;
        prev = v.z();
    }
    // The walk leaves the endpoint in the domain up to MEMBERSHIP_TOL; finish greedily.
    let end = walker.frame.apply_disc(DiscPoint::new(prev)?);
    let (w, base) = locate_in_domain(rep, end)?;
    for &l in w.letters().iter().rev() {
        walker.cross(l, 1.0)?;
    }
    Ok(Transport {
        end: LeafPoint {
            base,
            fiber: walker.fiber,
        },
        word: walker.word,
        crossings: walker.crossings,
    })
}

/// A function on the bundle, given on lifts. It must satisfy
/// `F(gamma z, rho(gamma) x) = F(z, x)` to descend.
pub trait LeafwiseFunction {
    fn eval(&self, z: C64, fiber: &FiberPoint) -> Result<C64>;
}

impl<F> LeafwiseFunction for F
where
    F: Fn(C64, &FiberPoint) -> Result<C64>,
{
    fn eval(&self, z: C64, fiber: &FiberPoint) -> Result<C64> {
        self(z, fiber)
    }
}

/// The cone example function on cone fibers.
pub struct ConeFunction;

impl LeafwiseFunction for ConeFunction {
    fn eval(&self, z: C64, fiber: &FiberPoint) -> Result<C64> {
        match fiber {
            FiberPoint::Cone(p) => f_eval(DiscPoint::new(z)?, p),
            _ => Err(Error::FiberMismatch),
        }
    }
}

/// `max |F(gamma z, rho(gamma) x) - F(z, x)|` over the given lifts and all generator letters.
pub fn descent_residual<F, A>(
    f: &F,
    rep: &FuchsianRepresentation,
    action: &A,
    samples: &[(DiscPoint, FiberPoint)],
) -> Result<f64>
where
    F: LeafwiseFunction + ?Sized,
    A: FiberAction + ?Sized,
{
    let mut worst: f64 = 0.0;
    for (z, x) in samples {
        let v = f.eval(z.z(), x)?;
        for l in crate::fuchsian::alphabet(rep.presentation().generator_count()) {
            let gz = rep.letter_image(l)?.apply(z.z());
            let w = f.eval(gz, &action.act_letter(l, x)?)?;
            worst = worst.max((w - v).norm());
        }
    }
    Ok(worst)
}

pub const MIN_STEP: f64 = 1e-8;
pub const MAX_STEP: f64 = 1e-2;

/// `|dF/dz-bar|` at the base of `lp` by central differences, fiber held fixed.
pub fn dbar_residual<F: LeafwiseFunction + ?Sized>(f: &F, lp: &LeafPoint, h: f64) -> Result<f64> {
    dbar_residual_lift(f, lp.base.z(), &lp.fiber, h)
}

/// [`dbar_residual`] at a lifted point `(z, x)` that need not lie over the domain.
pub fn dbar_residual_lift<F: LeafwiseFunction + ?Sized>(
    f: &F,
    z: C64,
    x: &FiberPoint,
    h: f64,
) -> Result<f64> {
    if !(MIN_STEP..=MAX_STEP).contains(&h) || 1.0 - z.norm() <= 2.0 * h {
        return Err(Error::StepOutOfRange { step: h });
    }
    let i = C64::new(0.0, 1.0);
    let dx = f.eval(z + h, x)? - f.eval(z - h, x)?;
    let dy = f.eval(z + i * h, x)? - f.eval(z - i * h, x)?;
    Ok(((dx + i * dy) / (4.0 * h)).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Constancy {
    Constant {
        spread: f64,
    },
    /// Two lifted base points whose values differ by `spread`.
    Witness {
        z1: C64,
        z2: C64,
        spread: f64,
    },
}

/// Samples `F` along the leaf through `lp`.
///
/// Base points are drawn uniformly from `|z| <= 0.9` in the frame of `lp`,
/// transported there by holonomy, and evaluated. The spread is the largest
/// pairwise distance between sampled values.
pub fn leafwise_constancy<F, A>(
    f: &F,
    rep: &FuchsianRepresentation,
    action: &A,
    lp: &LeafPoint,
    samples: usize,
    seed: u64,
    const_tol: f64,
) -> Result<Constancy>
where
    F: LeafwiseFunction + ?Sized,
    A: FiberAction + ?Sized,
{
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let mut rng = sampling::rng(seed);
    let mut points = vec![lp.base];
    points.extend((1..samples).map(|_| sampling::disc_point(&mut rng, SAMPLE_RADIUS)));
    let mut values = Vec::with_capacity(points.len());
    for &p in &points {
        let q = holonomy_transport(rep, action, lp, p)?;
        values.push(f.eval(q.base.z(), &q.fiber)?);
    }
    let mut best = (0, 0, 0.0f64);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    Ok(if best.2 < const_tol {
        Constancy::Constant { spread: best.2 }
    } else {
        Constancy::Witness {
            z1: points[best.0].z(),
            z2: points[best.1].z(),
            spread: best.2,
        }
    })
}

/// Values of a leafwise function over the bounding box of the fundamental domain.
#[derive(Debug, Clone)]
pub struct LeafGrid {
    pub size: usize,
    pub half_width: f64,
    /// Row-major from the top-left corner; `None` outside the domain.
    pub cells: Vec<(C64, Option<C64>)>,
}

/// Evaluates `F(., x)` on a `size x size` grid over the domain's bounding box.
pub fn leaf_grid<F: LeafwiseFunction + ?Sized>(
    f: &F,
    rep: &FuchsianRepresentation,
    fiber: &FiberPoint,
    size: usize,
) -> Result<LeafGrid> {
    if size < 2 {
        return Err(Error::InvalidParameter(
            "grid size must be at least 2".into(),
        ));
    }
    let half_width = rep
        .vertices()
        .iter()
        .map(|v| v.re.abs().max(v.im.abs()))
        .fold(0.0, f64::max);
    let step = 2.0 * half_width / (size - 1) as f64;
    let mut cells = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let z = C64::new(
                -half_width + col as f64 * step,
                half_width - row as f64 * step,
            );
            let value = if z.norm() < 1.0 && rep.contains(z, DOMAIN_TOL) {
                Some(f.eval(z, fiber)?)
            } else {
                None
            };
            cells.push((z, value));
        }
    }
    Ok(LeafGrid {
        size,
        half_width,
        cells,
    })
}

impl LeafGrid {
    /// CSV of the cells inside the domain: `re_z,im_z,re_f,im_f`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "re_z,im_z,re_f,im_f")?;
        for (z, v) in &self.cells {
            if let Some(v) = v {
                writeln!(out, "{},{},{},{}", z.re, z.im, v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Binary 8-bit PGM of `|F|` clamped to `[0, 1]`; cells outside the domain are 0.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.size, self.size)?;
        let bytes: Vec<u8> = self
            .cells
            .iter()
            .map(|(_, v)| v.map_or(0, |v| pgm_level(v.norm())))
            .collect();
        out.write_all(&bytes)
    }
}

/// `round(clamp(x, 0, 1) * 255)`.
pub fn pgm_level(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Uniform sample of a seeded leaf point with a cone fiber, used by the experiment suites.
pub fn random_cone_leaf<R: Rng>(
    rng: &mut R,
    rep: &FuchsianRepresentation,
    max_ratio: f64,
) -> Result<LeafPoint> {
    let p = sampling::cone_point(rng, max_ratio);
    let z = sampling::disc_point(rng, 0.5);
    LeafPoint::from_lift(rep, &ConeAction { rep }, z, &FiberPoint::Cone(p))
}
