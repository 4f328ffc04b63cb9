//! Linear actions of finitely generated groups on projective space.
//!
//! Matrices are stored over C regardless of the field tag; the tag only
//! controls how random sample points are drawn. A group element is *proximal*
//! when its spectrum has a strictly largest eigenvalue modulus, and the
//! classification here uses two checkable sufficient conditions for
//! plainness of the associated foliated bundle: a proximal element in the
//! word ball, or bounded word-ball norms (evidence of a precompact image).
//! Both are heuristics over a finite ball and reports say so.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuchsian::{alphabet, words_up_to, Letter, SurfaceGroupPresentation, Word, MAX_RADIUS};
use crate::moebius::{Su11Element, C64};
use crate::sampling;

pub const PROX_TOL: f64 = 1e-6;
pub const CONV_TOL: f64 = 1e-6;
pub const COMP_BOUND: f64 = 1e3;
pub const ORBIT_TOL: f64 = 1e-8;
/// Relative modulus gaps below this count as ties.
pub const TIE_TOL: f64 = 1e-9;
const MIN_DET: f64 = 1e-12;

pub type CMatrix = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// A point of P(W), stored as a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint(DVector<C64>);

impl ProjPoint {
    pub fn new(coords: DVector<C64>) -> Result<Self> {
        let n = coords.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self(coords / C64::new(n, 0.0)))
    }

    pub fn from_slice(coords: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            coords.len(),
            coords.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Sine of the angle between the lines: `|u - <v,u> v|`.
    pub fn distance(&self, other: &Self) -> f64 {
        let ip = other.0.dotc(&self.0);
        (&self.0 - &other.0 * ip).norm()
    }

    pub fn proj_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) < tol
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = self.0.iter().map(|c| [c.re, c.im]).collect();
        v.serialize(s)
    }
}

/// A representation of a finitely generated group in GL(n).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRep {
    field: Field,
    dim: usize,
    generators: Vec<CMatrix>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct MatrixDoc {
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LinearRepDoc {
    field: Field,
    dimension: usize,
    generators: Vec<MatrixDoc>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl LinearRep {
    pub fn new(field: Field, generators: Vec<CMatrix>) -> Result<Self> {
        let dim = generators.first().map(|m| m.nrows()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidParameter("no generators".into()));
        }
        for m in &generators {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
            let det = m.determinant().norm();
            if !(det > MIN_DET) {
                return Err(Error::Singular(det));
            }
            if field == Field::Real && m.iter().any(|c| c.im != 0.0) {
                return Err(Error::InvalidParameter(
                    "complex entry in a real representation".into(),
                ));
            }
        }
        Ok(Self {
            field,
            dim,
            generators,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn from_real(generators: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(
            Field::Real,
            generators
                .into_iter()
                .map(|m| m.map(|x| C64::new(x, 0.0)))
                .collect(),
        )
    }

    /// The image of a Fuchsian representation acting on CP^1.
    pub fn from_su11(images: &[Su11Element]) -> Result<Self> {
        Self::new(Field::Complex, images.iter().map(su11_matrix).collect())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn letter_matrix(&self, l: Letter) -> Result<CMatrix> {
        let m = self
            .generators
            .get(l.generator)
            .ok_or(Error::IndexOutOfRange {
                index: l.generator,
                count: self.generators.len(),
            })?;
        if l.exponent < 0 {
            m.clone().try_inverse().ok_or(Error::Singular(0.0))
        } else {
            Ok(m.clone())
        }
    }

    pub fn evaluate_word(&self, w: &Word) -> Result<CMatrix> {
        w.letters()
            .iter()
            .try_fold(CMatrix::identity(self.dim, self.dim), |acc, &l| {
                Ok(acc * self.letter_matrix(l)?)
            })
    }

    /// Parses the JSON document `{field, dimension, generators: [{re, im?}], labels?}`
    /// with row-major entries.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LinearRepDoc =
            serde_json::from_str(text).map_err(|e| crate::cli::parse_error(text, &e))?;
        let n = doc.dimension;
        let mut mats = Vec::with_capacity(doc.generators.len());
        for g in &doc.generators {
            let im = g.im.clone().unwrap_or_else(|| vec![0.0; g.re.len()]);
            if g.re.len() != n * n || im.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    found: g.re.len().max(im.len()),
                });
            }
            mats.push(CMatrix::from_fn(n, n, |i, j| {
                C64::new(g.re[i * n + j], im[i * n + j])
            }));
        }
        let rep = Self::new(doc.field, mats)?;
        match doc.labels {
            Some(l) => rep.with_labels(l),
            None => Ok(rep),
        }
    }

    pub fn to_json(&self) -> String {
        let n = self.dim;
        let doc = LinearRepDoc {
            field: self.field,
            dimension: n,
            generators: self
                .generators
                .iter()
                .map(|m| MatrixDoc {
                    re: (0..n * n).map(|k| m[(k / n, k % n)].re).collect(),
                    im: Some((0..n * n).map(|k| m[(k / n, k % n)].im).collect()),
                })
                .collect(),
            labels: self.labels.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("representation serializes")
    }
}

pub fn su11_matrix(g: &Su11Element) -> CMatrix {
    let m = g.matrix();
    CMatrix::from_fn(2, 2, |i, j| m[i][j])
}

/// `matrix * p`, normalized.
pub fn act(matrix: &CMatrix, p: &ProjPoint) -> Result<ProjPoint> {
    if matrix.ncols() != p.dim() || matrix.nrows() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: matrix.ncols(),
            found: p.dim(),
        });
    }
    ProjPoint::new(matrix * p.coords())
}

/// Eigenvalues sorted by decreasing modulus.
pub fn eigenvalues(matrix: &CMatrix) -> Result<Vec<C64>> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            found: matrix.ncols(),
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(matrix.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::EigenFailure)?;
    let mut ev: Vec<C64> = schur
        .eigenvalues()
        .ok_or(Error::EigenFailure)?
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(ev)
}

/// `(|l1| - |l2|) / |l1|` for eigenvalue moduli `|l1| >= |l2| >= ...`.
///
/// Gaps below [`TIE_TOL`] are reported as exactly zero. A 1x1 matrix has gap 1.
pub fn proximality_gap(matrix: &CMatrix) -> Result<f64> {
    let det = matrix.determinant().norm();
    if !(det > 0.0) {
        return Err(Error::Singular(det));
    }
    let ev = eigenvalues(matrix)?;
    if ev.len() < 2 {
        return Ok(1.0);
    }
    let (l1, l2) = (ev[0].norm(), ev[1].norm());
    let gap = (l1 - l2) / l1;
    Ok(if gap < TIE_TOL { 0.0 } else { gap })
}

/// Depth-first walk over the reduced words of length `1..=radius`, carrying
/// the running product. Visit order matches [`crate::fuchsian::word_ball`]
/// within each length only, so callers needing an order key use `(len, word)`.
fn for_each_in_ball<F>(rep: &LinearRep, radius: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[Letter], &CMatrix) -> Result<()>,
{
    if radius > MAX_RADIUS {
        return Err(Error::RadiusTooLarge(radius));
    }
    let letters = alphabet(rep.generators.len());
    let mats: Vec<CMatrix> = letters
        .iter()
        .map(|&l| rep.letter_matrix(l))
        .collect::<Result<_>>()?;
    let mut stack: Vec<Letter> = Vec::with_capacity(radius);
    let ident = CMatrix::identity(rep.dim, rep.dim);

    fn rec<F>(
        depth: usize,
        radius: usize,
        letters: &[Letter],
        mats: &[CMatrix],
        stack: &mut Vec<Letter>,
        prod: &CMatrix,
        visit: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[Letter], &CMatrix) -> Result<()>,
    {
        if depth == radius {
            return Ok(());
        }
        for (l, m) in letters.iter().zip(mats) {
            if stack.last().is_some_and(|last| last.cancels(*l)) {
                continue;
            }
            stack.push(*l);
            let next = prod * m;
            visit(stack, &next)?;
            rec(depth + 1, radius, letters, mats, stack, &next, visit)?;
            stack.pop();
        }
        Ok(())
    }

    rec(0, radius, &letters, &mats, &mut stack, &ident, &mut visit)
}

fn check_presentation(rep: &LinearRep, presentation: &SurfaceGroupPresentation) -> Result<()> {
    if rep.generators.len() != presentation.generator_count() {
        return Err(Error::DimensionMismatch {
            expected: presentation.generator_count(),
            found: rep.generators.len(),
        });
    }
    Ok(())
}

/// Whether a word of length `len` and gap `gap` beats the current best.
///
/// Proximal words (gap above `prox_tol`) beat the rest; among them the
/// shortest wins, then the larger gap. Non-proximal words compete on gap
/// alone. Remaining ties keep the word met first in ball order.
fn prefer(len: usize, gap: f64, best_len: usize, best_gap: f64, prox_tol: f64) -> bool {
    match (gap > prox_tol, best_gap > prox_tol) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => len < best_len || (len == best_len && gap > best_gap + TIE_TOL),
        (false, false) => gap > best_gap + TIE_TOL,
    }
}

/// Shortest proximal word in the ball, with its gap.
///
/// Among words of that length the largest gap wins; ties keep the first word
/// in ball order (generators in index order, positive letter first).
pub fn find_proximal(
    rep: &LinearRep,
    presentation: &SurfaceGroupPresentation,
    radius: usize,
    prox_tol: f64,
) -> Result<Option<(Word, f64)>> {
    check_presentation(rep, presentation)?;
    let mut best: Option<(Vec<Letter>, f64)> = None;
    for_each_in_ball(rep, radius, |w, m| {
        let gap = proximality_gap(m)?;
        let better = match &best {
            None => true,
            Some((bw, bg)) => prefer(w.len(), gap, bw.len(), *bg, prox_tol),
        };
        if better {
            best = Some((w.to_vec(), gap));
        }
        Ok(())
    })?;
    Ok(best
        .filter(|(_, g)| *g > prox_tol)
        .map(|(w, g)| (Word::reduce(w), g)))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub tested_word: String,
    pub attractor: ProjPoint,
    pub converged_fraction: f64,
    /// Largest final distance from a sample to the attractor. Samples that
    /// stay far away estimate the exceptional (non-attracted) set.
    pub exceptional_residual: f64,
    pub samples: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeParams {
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
    pub conv_tol: f64,
    pub field: Field,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            samples: 1000,
            iterations: 200,
            seed: 0,
            conv_tol: CONV_TOL,
            field: Field::Complex,
        }
    }
}

/// Eigenvector for the eigenvalue of largest modulus, via the null space of
/// `M - lambda_1 I`.
pub fn top_eigenvector(matrix: &CMatrix) -> Result<ProjPoint> {
    let ev = eigenvalues(matrix)?;
    let n = matrix.nrows();
    let shifted = matrix - CMatrix::identity(n, n) * ev[0];
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::EigenFailure)?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::EigenFailure)?;
    let v = v_t.row(imin).transpose().map(|c| c.conj());
    ProjPoint::new(v)
}

/// Iterates `matrix` on seeded random points and measures how many end up
/// within `conv_tol` of the top eigendirection.
pub fn convergence_probe(matrix: &CMatrix, params: ProbeParams) -> Result<ConvergenceReport> {
    convergence_probe_labeled(matrix, params, "matrix")
}

pub fn convergence_probe_labeled(
    matrix: &CMatrix,
    params: ProbeParams,
    label: &str,
) -> Result<ConvergenceReport> {
    let n = matrix.nrows();
    let attractor = top_eigenvector(matrix)?;
    let mut rng = sampling::rng(params.seed);
    let mut converged = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..params.samples {
        let v = sampling::sphere(&mut rng, n, params.field == Field::Real);
        let mut p = ProjPoint::from_slice(&v)?;
        for _ in 0..params.iterations {
            p = act(matrix, &p)?;
        }
        let d = p.distance(&attractor);
        worst = worst.max(d);
        if d < params.conv_tol {
            converged += 1;
        }
    }
    let converged_fraction = if params.samples == 0 {
        0.0
    } else {
        converged as f64 / params.samples as f64
    };
    Ok(ConvergenceReport {
        tested_word: label.to_string(),
        attractor,
        converged_fraction,
        exceptional_residual: worst,
        samples: params.samples,
        iterations: params.iterations,
    })
}

/// Size of the orbit of `p` under the generators and their inverses, or
/// `None` when the breadth-first closure exceeds `bound` points.
pub fn finite_orbit_search(rep: &LinearRep, p: &ProjPoint, bound: usize) -> Result<Option<usize>> {
    if bound > 100_000 {
        return Err(Error::InvalidParameter(format!(
            "orbit bound {bound} exceeds 1e5"
        )));
    }
    if p.dim() != rep.dim {
        return Err(Error::DimensionMismatch {
            expected: rep.dim,
            found: p.dim(),
        });
    }
    let mats: Vec<CMatrix> = alphabet(rep.generators.len())
        .into_iter()
        .map(|l| rep.letter_matrix(l))
        .collect::<Result<_>>()?;

    // Points are indexed by a phase-invariant Lipschitz key so that a range
    // query finds every candidate within ORBIT_TOL.
    let weights: Vec<f64> = (0..rep.dim)
        .map(|i| 1.0 / (1.0 + 0.618_033_988_75 * i as f64))
        .collect();
    let lip: f64 = weights.iter().sum();
    let key = |q: &ProjPoint| -> f64 {
        q.coords()
            .iter()
            .zip(&weights)
            .map(|(c, w)| c.norm() * w)
            .sum()
    };
    let mut index: BTreeMap<KeyF64, Vec<usize>> = BTreeMap::new();
    let mut points: Vec<ProjPoint> = Vec::new();
    let mut queue = VecDeque::new();

    let insert = |q: ProjPoint,
                  points: &mut Vec<ProjPoint>,
                  index: &mut BTreeMap<KeyF64, Vec<usize>>|
     -> (usize, bool) {
        let k = key(&q);
        let lo = KeyF64(k - lip * ORBIT_TOL);
        let hi = KeyF64(k + lip * ORBIT_TOL);
        let seen = index
            .range(lo..=hi)
            .flat_map(|(_, ids)| ids.iter())
            .copied()
            .find(|&i| points[i].proj_eq(&q, ORBIT_TOL));
        if let Some(i) = seen {
            return (i, false);
        }
        let id = points.len();
        points.push(q);
        index.entry(KeyF64(k)).or_default().push(id);
        (id, true)
    };

    // images[letter][point] = index of the matched image point
    let mut images: Vec<Vec<usize>> = vec![Vec::new(); mats.len()];
    let (first, _) = insert(p.clone(), &mut points, &mut index);
    queue.push_back(first);
    while let Some(id) = queue.pop_front() {
        for (li, m) in mats.iter().enumerate() {
            let q = act(m, &points[id])?;
            let (target, fresh) = insert(q, &mut points, &mut index);
            if fresh {
                if points.len() > bound {
                    return Ok(None);
                }
                queue.push_back(target);
            }
            if images[li].len() <= id {
                images[li].resize(id + 1, usize::MAX);
            }
            images[li][id] = target;
        }
    }
    // A genuine finite orbit is permuted by every generator. Points that only
    // merged because they accumulate within the tolerance break injectivity.
    for map in &images {
        let mut hit = vec![false; points.len()];
        for &t in map {
            if t == usize::MAX || std::mem::replace(&mut hit[t], true) {
                return Ok(None);
            }
        }
    }
    Ok(Some(points.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct KeyF64(f64);

impl Eq for KeyF64 {}

impl Ord for KeyF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyParams {
    pub prox_tol: f64,
    pub comp_bound: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            prox_tol: PROX_TOL,
            comp_bound: COMP_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Classification {
    /// Word-ball norms (after scaling to `|det| = 1`) stay below the bound and
    /// no element is proximal.
    PlainByCompactness { max_norm: f64, radius: usize },
    /// A proximal witness was found.
    PlainByProximal { witness: Word, gap: f64 },
    Undetermined {
        max_norm: f64,
        best_gap: f64,
        radius: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub classification: Classification,
    /// Every verdict comes from a finite word ball.
    pub heuristic: bool,
    pub words_examined: usize,
}

/// Operator 2-norm of `m / |det m|^{1/n}`, the size of its class in PGL.
pub fn projective_norm(m: &CMatrix) -> f64 {
    let n = m.nrows() as f64;
    let det = m.determinant().norm();
    let scale = det.powf(1.0 / n);
    let s = m.clone().svd(false, false).singular_values;
    s.iter().cloned().fold(0.0, f64::max) / scale
}

pub fn classify_action(
    rep: &LinearRep,
    presentation: &SurfaceGroupPresentation,
    radius: usize,
    params: ClassifyParams,
) -> Result<ClassificationReport> {
    check_presentation(rep, presentation)?;
    let mut max_norm: f64 = 0.0;
    let mut best: Option<(Vec<Letter>, f64)> = None;
    let mut count = 0usize;
    for_each_in_ball(rep, radius, |w, m| {
        count += 1;
        max_norm = max_norm.max(projective_norm(m));
        let gap = proximality_gap(m)?;
        let better = match &best {
            None => true,
            Some((bw, bg)) => prefer(w.len(), gap, bw.len(), *bg, params.prox_tol),
        };
        if better {
            best = Some((w.to_vec(), gap));
        }
        Ok(())
    })?;
    let best_gap = best.as_ref().map(|b| b.1).unwrap_or(0.0);
    let classification = match best {
        Some((w, gap)) if gap > params.prox_tol => Classification::PlainByProximal {
            witness: Word::reduce(w),
            gap,
        },
        _ if count > 0 && max_norm <= params.comp_bound => {
            Classification::PlainByCompactness { max_norm, radius }
        }
        _ => Classification::Undetermined {
            max_norm,
            best_gap,
            radius,
        },
    };
    Ok(ClassificationReport {
        classification,
        heuristic: true,
        words_examined: count,
    })
}

/// All words of the ball as a list; convenience for callers that need them.
pub fn ball_words(rep: &LinearRep, radius: usize) -> Result<Vec<Word>> {
    words_up_to(rep.generators.len(), radius)
}
