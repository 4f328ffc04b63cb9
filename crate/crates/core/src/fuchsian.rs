//! Surface-group words and the regular-octagon lattice in SU(1,1).
//!
//! Genus-2 generators are translations `g_k = R(k pi/4) T(l) R(k pi/4)^-1`,
//! `k = 0..3`. Each `g_k` carries the octagon side at angle `k pi/4 + pi`
//! onto the side at angle `k pi/4`, and the four generators satisfy
//! `g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = I`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{DiscPoint, Su11Element, C64, CLASS_TOL};

pub const REL_TOL: f64 = 1e-9;
pub const MEMBERSHIP_TOL: f64 = 1e-12;
pub const MAX_STEPS: usize = 10_000;
pub const MAX_RADIUS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    /// `+1` or `-1`.
    pub exponent: i8,
}

impl Letter {
    pub const fn new(generator: usize, exponent: i8) -> Self {
        Self {
            generator,
            exponent,
        }
    }

    pub const fn pos(generator: usize) -> Self {
        Self::new(generator, 1)
    }

    pub const fn neg(generator: usize) -> Self {
        Self::new(generator, -1)
    }

    pub fn inverse(self) -> Self {
        Self::new(self.generator, -self.exponent)
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.exponent == -other.exponent
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent < 0 {
            write!(f, "g{}^-1", self.generator)
        } else {
            write!(f, "g{}", self.generator)
        }
    }
}

/// A freely reduced word in the generators.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Accepts only reduced words with exponents `±1`.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.iter().any(|l| l.exponent != 1 && l.exponent != -1) {
            return Err(Error::NotReduced(format!("{letters:?}")));
        }
        if letters.windows(2).any(|w| w[0].cancels(w[1])) {
            return Err(Error::NotReduced(Word(letters).to_string()));
        }
        Ok(Self(letters))
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|last| last.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &Word) -> Self {
        Self::reduce(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Reduced product `letter * self`.
    pub fn prepend(&self, letter: Letter) -> Self {
        Self::reduce(std::iter::once(letter).chain(self.0.iter().copied()))
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self(self.0[..n].to_vec())
    }
}

impl TryFrom<Vec<Letter>> for Word {
    type Error = Error;
    fn try_from(v: Vec<Letter>) -> Result<Self> {
        Word::new(v)
    }
}

impl From<Word> for Vec<Letter> {
    fn from(w: Word) -> Self {
        w.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGroupPresentation {
    genus: usize,
    relator: Word,
}

impl SurfaceGroupPresentation {
    /// Presentation of the group obtained by gluing opposite sides of a
    /// regular `4g`-gon: `a0 a1^-1 a2 ... a_{2g-1}^-1 a0^-1 a1 ... a_{2g-1}`.
    pub fn opposite_sides(genus: usize) -> Result<Self> {
        if genus == 0 {
            return Err(Error::InvalidParameter("genus must be positive".into()));
        }
        let n = 2 * genus;
        let sign = |k: usize| if k % 2 == 0 { 1 } else { -1 };
        let first = (0..n).map(|k| Letter::new(k, sign(k)));
        let second = (0..n).map(|k| Letter::new(k, -sign(k)));
        let relator = Word::new(first.chain(second).collect())?;
        Ok(Self { genus, relator })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn generator_count(&self) -> usize {
        2 * self.genus
    }

    pub fn relator(&self) -> &Word {
        &self.relator
    }
}

/// All reduced words of length `1..=radius` over `generator_count` generators,
/// ordered by length then lexicographically. Radius 0 yields only the empty word.
pub fn word_ball(presentation: &SurfaceGroupPresentation, radius: usize) -> Result<Vec<Word>> {
    words_up_to(presentation.generator_count(), radius)
}

pub(crate) fn words_up_to(generators: usize, radius: usize) -> Result<Vec<Word>> {
    if radius > MAX_RADIUS {
        return Err(Error::RadiusTooLarge(radius));
    }
    if radius == 0 {
        return Ok(vec![Word::empty()]);
    }
    let alphabet = alphabet(generators);
    let mut out = Vec::new();
    let mut layer = vec![Word::empty()];
    for _ in 0..radius {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for &l in &alphabet {
                if w.0.last().is_some_and(|last| last.cancels(l)) {
                    continue;
                }
                let mut letters = w.0.clone();
                letters.push(l);
                next.push(Word(letters));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

pub(crate) fn alphabet(generators: usize) -> Vec<Letter> {
    (0..generators)
        .flat_map(|g| [Letter::pos(g), Letter::neg(g)])
        .collect()
}

/// One side of the fundamental polygon: the geodesic circle `|z - center| = radius`
/// orthogonal to the unit circle. The polygon lies on the side containing 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideConstraint {
    pub center: C64,
    pub radius: f64,
    /// Element applied to a point that has crossed this side to bring it back.
    pub pairing: Letter,
}

impl SideConstraint {
    /// Positive outside the polygon side, negative inside.
    ///
    /// Uses `|center|^2 - radius^2 = 1`, so `|z - c|^2 - r^2 = 1 + |z|^2 - 2 Re(z conj c)`.
    #[inline]
    pub fn violation(&self, z: C64) -> f64 {
        2.0 * (z * self.center.conj()).re - 1.0 - z.norm_sqr()
    }

    /// Side perpendicular to the ray at `angle`, at hyperbolic distance `dist` from 0.
    fn perpendicular(angle: f64, dist: f64, pairing: Letter) -> Self {
        let r = (dist / 2.0).tanh();
        let c = (1.0 + r * r) / (2.0 * r);
        Self {
            center: C64::from_polar(c, angle),
            radius: (c * c - 1.0).sqrt(),
            pairing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuchsianRepresentation {
    presentation: SurfaceGroupPresentation,
    images: Vec<Su11Element>,
    sides: Vec<SideConstraint>,
    translation_length: f64,
}

impl FuchsianRepresentation {
    pub fn presentation(&self) -> &SurfaceGroupPresentation {
        &self.presentation
    }

    pub fn images(&self) -> &[Su11Element] {
        &self.images
    }

    pub fn sides(&self) -> &[SideConstraint] {
        &self.sides
    }

    pub fn translation_length(&self) -> f64 {
        self.translation_length
    }

    pub fn letter_image(&self, l: Letter) -> Result<Su11Element> {
        let g = self.images.get(l.generator).ok_or(Error::IndexOutOfRange {
            index: l.generator,
            count: self.images.len(),
        })?;
        Ok(if l.exponent < 0 { g.inverse() } else { *g })
    }

    pub fn relator_residual(&self) -> f64 {
        evaluate_word(self, self.presentation.relator())
            .map(|g| g.distance_to_center())
            .unwrap_or(f64::INFINITY)
    }

    /// Largest side violation at `z`, with the index of that side.
    pub fn max_violation(&self, z: C64) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, s) in self.sides.iter().enumerate() {
            let v = s.violation(z);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.max_violation(z).1 <= tol
    }

    /// Polygon vertices in counter-clockwise order; vertex `j` joins sides `j` and `j+1`.
    pub fn vertices(&self) -> Vec<C64> {
        let n = self.sides.len();
        (0..n)
            .map(|j| circle_intersection_inside(&self.sides[j], &self.sides[(j + 1) % n]))
            .collect()
    }

    /// Interior angles at the vertices.
    pub fn vertex_angles(&self) -> Vec<f64> {
        let verts = self.vertices();
        let n = verts.len();
        (0..n)
            .map(|j| {
                let v = verts[j];
                let prev = verts[(j + n - 1) % n];
                let next = verts[(j + 1) % n];
                // Side j runs from vertex j-1 to vertex j, side j+1 from j to j+1.
                let t1 = tangent_towards(&self.sides[j], v, prev);
                let t2 = tangent_towards(&self.sides[(j + 1) % n], v, next);
                (t2 / t1).arg().abs()
            })
            .collect()
    }

    /// Hyperbolic area from the angle defect of the geodesic polygon.
    pub fn area(&self) -> f64 {
        let n = self.sides.len() as f64;
        (n - 2.0) * PI - self.vertex_angles().iter().sum::<f64>()
    }

    /// Checks determinants, generator types and the relator residual.
    pub fn validate(&self, rel_tol: f64) -> Result<()> {
        if self.images.len() != self.presentation.generator_count() {
            return Err(Error::DimensionMismatch {
                expected: self.presentation.generator_count(),
                found: self.images.len(),
            });
        }
        for g in &self.images {
            if g.det_defect() > 1e-10 {
                return Err(Error::NonUnitDeterminant(g.det()));
            }
            if g.classify(CLASS_TOL) != crate::moebius::IsometryKind::Hyperbolic {
                return Err(Error::InvalidParameter(
                    "generator is not hyperbolic".into(),
                ));
            }
        }
        let residual = self.relator_residual();
        if !(residual < rel_tol) {
            return Err(Error::ConstructionFailure {
                residual,
                tolerance: rel_tol,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("representation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rep: Self =
            serde_json::from_str(text).map_err(|e| crate::cli::parse_error(text, &e))?;
        rep.validate(REL_TOL)?;
        Ok(rep)
    }
}

fn circle_intersection_inside(a: &SideConstraint, b: &SideConstraint) -> C64 {
    let d = b.center - a.center;
    let dist = d.norm();
    let x = (dist * dist + a.radius * a.radius - b.radius * b.radius) / (2.0 * dist);
    let h = (a.radius * a.radius - x * x).max(0.0).sqrt();
    let u = d / dist;
    let base = a.center + u * x;
    let p1 = base + u * C64::i() * h;
    let p2 = base - u * C64::i() * h;
    if p1.norm_sqr() < p2.norm_sqr() {
        p1
    } else {
        p2
    }
}

fn tangent_towards(side: &SideConstraint, at: C64, towards: C64) -> C64 {
    let t = (at - side.center) * C64::i();
    if (t * (towards - at).conj()).re >= 0.0 {
        t
    } else {
        -t
    }
}

fn octagon_generators(length: f64) -> Vec<Su11Element> {
    (0..4)
        .map(|k| Su11Element::translation_along(k as f64 * PI / 4.0, length))
        .collect()
}

fn relator_product(presentation: &SurfaceGroupPresentation, length: f64) -> Su11Element {
    let gens = octagon_generators(length);
    presentation
        .relator()
        .letters()
        .iter()
        .fold(Su11Element::identity(), |acc, l| {
            let g = if l.exponent < 0 {
                gens[l.generator].inverse()
            } else {
                gens[l.generator]
            };
            acc.compose(&g)
        })
}

/// Solves for the translation length that closes the octagon relator.
///
/// The off-diagonal entry of the relator product changes sign along a fixed
/// complex direction at the closing length, so a coarse scan locates a
/// bracket which bisection then refines.
fn solve_translation_length(presentation: &SurfaceGroupPresentation) -> Option<f64> {
    let guess = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    let (lo, hi) = (0.8 * guess, 1.2 * guess);
    let n = 400;
    let grid: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    let residuals: Vec<f64> = grid
        .iter()
        .map(|&l| relator_product(presentation, l).distance_to_center())
        .collect();
    let imin = residuals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let i0 = imin.saturating_sub(1);
    let i1 = (imin + 1).min(n);
    let dir = relator_product(presentation, grid[i0]).beta();
    if dir.norm() == 0.0 {
        return Some(grid[i0]);
    }
    let dir = dir / dir.norm();
    let signed = |l: f64| (relator_product(presentation, l).beta() * dir.conj()).re;
    let (mut a, mut b) = (grid[i0], grid[i1]);
    let (mut fa, fb) = (signed(a), signed(b));
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = signed(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// The regular-octagon genus-2 lattice with opposite sides paired.
pub fn genus2_octagon_representation() -> Result<FuchsianRepresentation> {
    genus2_octagon_representation_with(REL_TOL)
}

pub fn genus2_octagon_representation_with(rel_tol: f64) -> Result<FuchsianRepresentation> {
    let presentation = SurfaceGroupPresentation::opposite_sides(2)?;
    let length = solve_translation_length(&presentation).ok_or(Error::ConstructionFailure {
        residual: f64::INFINITY,
        tolerance: rel_tol,
    })?;
    let images = octagon_generators(length);
    let dist = length / 2.0;
    let sides = (0..8)
        .map(|j| {
            let pairing = if j < 4 {
                Letter::neg(j)
            } else {
                Letter::pos(j - 4)
            };
            SideConstraint::perpendicular(j as f64 * PI / 4.0, dist, pairing)
        })
        .collect();
    let rep = FuchsianRepresentation {
        presentation,
        images,
        sides,
        translation_length: length,
    };
    rep.validate(rel_tol)?;
    Ok(rep)
}

/// Ordered product of the generator images along the word.
pub fn evaluate_word(rep: &FuchsianRepresentation, w: &Word) -> Result<Su11Element> {
    w.letters()
        .iter()
        .try_fold(Su11Element::identity(), |acc, &l| {
            Ok(acc.compose(&rep.letter_image(l)?))
        })
}

/// Reduces `z` into the closed fundamental polygon by greedy side pairings.
///
/// Returns `(w, z')` with `z' = evaluate_word(w) z`.
pub fn locate_in_domain(rep: &FuchsianRepresentation, z: DiscPoint) -> Result<(Word, DiscPoint)> {
    locate_in_domain_with(rep, z, MAX_STEPS)
}

pub fn locate_in_domain_with(
    rep: &FuchsianRepresentation,
    z: DiscPoint,
    max_steps: usize,
) -> Result<(Word, DiscPoint)> {
    if z.z().norm() > 1.0 - 1e-6 {
        return Err(Error::OutsideDisc {
            re: z.z().re,
            im: z.z().im,
        });
    }
    let mut word = Word::empty();
    let mut p = z;
    for _ in 0..max_steps {
        let (side, v) = rep.max_violation(p.z());
        if v <= MEMBERSHIP_TOL {
            return Ok((word, p));
        }
        let l = rep.sides[side].pairing;
        p = rep.letter_image(l)?.apply_disc(p);
        word = word.prepend(l);
    }
    Err(Error::NonTermination(max_steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep() -> FuchsianRepresentation {
        genus2_octagon_representation().unwrap()
    }

    #[test]
    fn relator_closes_and_length_matches_closed_form() {
        let r = rep();
        assert!(r.relator_residual() < 1e-9, "{}", r.relator_residual());
        let expect = 2.0 * (1.0 + 2f64.sqrt()).acosh();
        assert!((r.translation_length() - expect).abs() < 1e-9);
    }

    #[test]
    fn generators_are_hyperbolic() {
        for g in rep().images() {
            assert_eq!(
                g.classify(CLASS_TOL),
                crate::moebius::IsometryKind::Hyperbolic
            );
        }
    }

    #[test]
    fn octagon_angles_and_area() {
        let r = rep();
        for a in r.vertex_angles() {
            assert!((a - PI / 4.0).abs() < 1e-9, "{a}");
        }
        assert!((r.area() - 4.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn side_pairings_match_sides() {
        let r = rep();
        // g_k maps the midpoint of side k+4 to the midpoint of side k.
        let m = (r.translation_length() / 4.0).tanh();
        for k in 0..4 {
            let from = C64::from_polar(m, (k + 4) as f64 * PI / 4.0);
            let to = r.images()[k].apply(from);
            assert!((to - C64::from_polar(m, k as f64 * PI / 4.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn evaluate_word_examples() {
        let r = rep();
        assert_eq!(
            evaluate_word(&r, &Word::empty()).unwrap(),
            Su11Element::identity()
        );
        let w = Word::reduce([Letter::pos(0), Letter::neg(0)]);
        assert!(w.is_empty());
        let g = evaluate_word(&r, &Word::new(vec![Letter::pos(1)]).unwrap()).unwrap();
        let gi = evaluate_word(&r, &Word::new(vec![Letter::neg(1)]).unwrap()).unwrap();
        assert!(g.compose(&gi).distance_to_center() < 1e-12);
        let bad = Word::new(vec![Letter::pos(7)]).unwrap();
        assert!(matches!(
            evaluate_word(&r, &bad),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn word_validation() {
        assert!(Word::new(vec![Letter::pos(0), Letter::neg(0)]).is_err());
        assert!(Word::new(vec![Letter::new(0, 2)]).is_err());
        let w = Word::new(vec![Letter::pos(0), Letter::neg(1)]).unwrap();
        assert_eq!(w.to_string(), "g0 g1^-1");
        assert!(w.concat(&w.inverse()).is_empty());
    }

    #[test]
    fn word_ball_counts() {
        let p = SurfaceGroupPresentation::opposite_sides(2).unwrap();
        assert_eq!(word_ball(&p, 0).unwrap(), vec![Word::empty()]);
        assert_eq!(word_ball(&p, 1).unwrap().len(), 8);
        assert_eq!(word_ball(&p, 2).unwrap().len(), 64);
        assert_eq!(word_ball(&p, 3).unwrap().len(), 8 + 56 + 392);
        assert!(matches!(word_ball(&p, 13), Err(Error::RadiusTooLarge(13))));
        let ball = word_ball(&p, 3).unwrap();
        let set: std::collections::HashSet<_> = ball.iter().collect();
        assert_eq!(set.len(), ball.len());
    }

    #[test]
    fn locate_examples() {
        let r = rep();
        let (w, z) = locate_in_domain(&r, DiscPoint::origin()).unwrap();
        assert!(w.is_empty());
        assert_eq!(z, DiscPoint::origin());

        for k in 0..4 {
            let p = r.images()[k].apply_disc(DiscPoint::origin());
            let (w, z) = locate_in_domain(&r, p).unwrap();
            assert_eq!(w, Word::new(vec![Letter::neg(k)]).unwrap());
            assert!(z.z().norm() < 1e-10);
        }
    }

    #[test]
    fn locate_near_the_circle() {
        let r = rep();
        for i in 0..64 {
            let theta = i as f64 * 0.37;
            let z = DiscPoint::new(C64::from_polar(0.95, theta)).unwrap();
            let (w, p) = locate_in_domain(&r, z).unwrap();
            assert!(r.contains(p.z(), 1e-10));
            let g = evaluate_word(&r, &w).unwrap();
            assert!((g.apply(z.z()) - p.z()).norm() < 1e-9);
        }
    }

    #[test]
    fn json_round_trip() {
        let r = rep();
        let back = FuchsianRepresentation::from_json(&r.to_json()).unwrap();
        for (a, b) in r.images().iter().zip(back.images()) {
            assert!((a.alpha() - b.alpha()).norm() <= 1e-15 * a.alpha().norm());
            assert!((a.beta() - b.beta()).norm() <= 1e-15 * a.beta().norm());
        }
        assert_eq!(r.presentation(), back.presentation());
        assert_eq!(r.sides().len(), back.sides().len());
    }
}
