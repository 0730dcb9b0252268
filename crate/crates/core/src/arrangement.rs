//! Affine hyperplane arrangements over the rationals: intersection
//! posets, Möbius functions, Euler characteristics of complements, and
//! the bounded-region count of the real picture.
//!
//! All poset computation is exact. A flat is identified by the canonical
//! reduced row echelon form of its defining affine system, so two subsets
//! of hyperplanes cutting out the same subspace collapse to one flat.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::Zero;

use crate::poly::MPoly;
use crate::rational::{dot, proportional, solve_affine_system, Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    ZeroDimension,
    ZeroNormal { index: usize },
    CoefficientCount { index: usize, expected: usize, found: usize },
    RepeatedHyperplane { first: usize, second: usize },
    NotEssential,
}

impl fmt::Display for ArrangementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrangementError::ZeroDimension => {
                write!(f, "ambient dimension must be at least 1")
            }
            ArrangementError::ZeroNormal { index } => {
                write!(f, "hyperplane {index} has zero normal vector")
            }
            ArrangementError::CoefficientCount { index, expected, found } => write!(
                f,
                "hyperplane {index} has {found} coefficients, expected {expected}"
            ),
            ArrangementError::RepeatedHyperplane { first, second } => write!(
                f,
                "hyperplanes {first} and {second} define the same hyperplane"
            ),
            ArrangementError::NotEssential => write!(
                f,
                "arrangement is not essential (no zero-dimensional flat)"
            ),
        }
    }
}

impl std::error::Error for ArrangementError {}

/// Affine functional `coeffs · x + offset`; its zero set is the
/// hyperplane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    coeffs: Vec<Rat>,
    offset: Rat,
}

impl Hyperplane {
    pub fn new(coeffs: Vec<Rat>, offset: Rat) -> Result<Self, ArrangementError> {
        if coeffs.iter().all(Zero::is_zero) {
            return Err(ArrangementError::ZeroNormal { index: 0 });
        }
        Ok(Hyperplane { coeffs, offset })
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn offset(&self) -> &Rat {
        &self.offset
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        dot(&self.coeffs, x) + self.offset.clone()
    }

    /// The defining degree-1 polynomial.
    pub fn to_poly(&self) -> MPoly<Rat> {
        let n = self.coeffs.len();
        let mut terms: Vec<(Vec<u16>, Rat)> = Vec::with_capacity(n + 1);
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut exps = vec![0u16; n];
            exps[i] = 1;
            terms.push((exps, c.clone()));
        }
        terms.push((vec![0u16; n], self.offset.clone()));
        MPoly::from_terms(n, terms)
    }

    /// Full functional as an (n+1)-vector, used for proportionality.
    fn augmented(&self) -> Vec<Rat> {
        let mut v = self.coeffs.clone();
        v.push(self.offset.clone());
        v
    }

    fn vanishes_on(&self, basepoint: &[Rat], basis: &[Vec<Rat>]) -> bool {
        if !self.eval(basepoint).is_zero() {
            return false;
        }
        basis.iter().all(|dir| dot(&self.coeffs, dir).is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineArrangement {
    dimension: usize,
    hyperplanes: Vec<Hyperplane>,
}

impl AffineArrangement {
    pub fn new(
        dimension: usize,
        hyperplanes: Vec<Hyperplane>,
    ) -> Result<Self, ArrangementError> {
        if dimension == 0 {
            return Err(ArrangementError::ZeroDimension);
        }
        for (i, h) in hyperplanes.iter().enumerate() {
            if h.coeffs.len() != dimension {
                return Err(ArrangementError::CoefficientCount {
                    index: i,
                    expected: dimension,
                    found: h.coeffs.len(),
                });
            }
            if h.coeffs.iter().all(Zero::is_zero) {
                return Err(ArrangementError::ZeroNormal { index: i });
            }
        }
        for i in 0..hyperplanes.len() {
            for j in (i + 1)..hyperplanes.len() {
                if proportional(&hyperplanes[i].augmented(), &hyperplanes[j].augmented()) {
                    return Err(ArrangementError::RepeatedHyperplane { first: i, second: j });
                }
            }
        }
        Ok(AffineArrangement { dimension, hyperplanes })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn intersection_poset(&self) -> IntersectionPoset {
        build_poset(self)
    }

    pub fn is_essential(&self) -> bool {
        self.intersection_poset().is_essential()
    }

    /// Number of bounded regions in the real points of the complement:
    /// `(-1)^n` times the characteristic polynomial at 1. Only defined
    /// for essential arrangements.
    pub fn bounded_regions(&self) -> Result<i64, ArrangementError> {
        let poset = self.intersection_poset();
        if !poset.is_essential() {
            return Err(ArrangementError::NotEssential);
        }
        let char_poly = poset.characteristic_polynomial();
        let at_one: i64 = char_poly.iter().sum();
        let sign = if self.dimension % 2 == 0 { 1 } else { -1 };
        Ok(sign * at_one)
    }

    /// Arrangement with hyperplane `index` removed.
    pub fn deletion(&self, index: usize) -> AffineArrangement {
        let mut hyperplanes = self.hyperplanes.clone();
        hyperplanes.remove(index);
        AffineArrangement { dimension: self.dimension, hyperplanes }
    }

    /// Traces of the other hyperplanes on hyperplane `index`, as an
    /// arrangement in coordinates on that hyperplane. `None` when the
    /// ambient dimension is 1, where the restriction would live in a
    /// point.
    pub fn restriction(&self, index: usize) -> Option<AffineArrangement> {
        if self.dimension < 2 {
            return None;
        }
        let h = &self.hyperplanes[index];
        let row = (h.coeffs.as_slice(), &h.offset);
        let sys = solve_affine_system(self.dimension, &[row])
            .expect("a single hyperplane is nonempty");
        let mut traces: Vec<Hyperplane> = Vec::new();
        for (k, other) in self.hyperplanes.iter().enumerate() {
            if k == index {
                continue;
            }
            let coeffs: Vec<Rat> =
                sys.basis.iter().map(|dir| dot(&other.coeffs, dir)).collect();
            if coeffs.iter().all(Zero::is_zero) {
                // Parallel to the chosen hyperplane: empty trace.
                continue;
            }
            let trace = Hyperplane { coeffs, offset: other.eval(&sys.basepoint) };
            let dup = traces
                .iter()
                .any(|t| proportional(&t.augmented(), &trace.augmented()));
            if !dup {
                traces.push(trace);
            }
        }
        Some(AffineArrangement { dimension: self.dimension - 1, hyperplanes: traces })
    }
}

/// Nonempty intersection of a set of hyperplanes. `support` holds every
/// hyperplane of the arrangement containing the flat, not just the
/// subset that first produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flat {
    pub support: BTreeSet<usize>,
    pub codim: usize,
    pub basepoint: Vec<Rat>,
    pub basis: Vec<Vec<Rat>>,
}

/// All flats of an arrangement with their Möbius numbers, flats sorted
/// by ascending codimension (ambient space first) and, within a
/// codimension, by canonical form.
#[derive(Debug, Clone)]
pub struct IntersectionPoset {
    dimension: usize,
    flats: Vec<Flat>,
    moebius: Vec<i64>,
}

impl IntersectionPoset {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn flats(&self) -> &[Flat] {
        &self.flats
    }

    pub fn moebius(&self) -> &[i64] {
        &self.moebius
    }

    /// Index of the ambient-space flat.
    pub fn top(&self) -> usize {
        0
    }

    /// Euler characteristic of the complement of the arrangement: the
    /// sum of the Möbius numbers over all flats.
    pub fn euler_characteristic_complement(&self) -> i64 {
        self.moebius.iter().sum()
    }

    /// True when some flat is a single point.
    pub fn is_essential(&self) -> bool {
        self.flats.iter().any(|f| f.codim == self.dimension)
    }

    /// Coefficients of `sum_X mu(X) t^{dim X}`, index = power of `t`.
    pub fn characteristic_polynomial(&self) -> Vec<i64> {
        let mut coeffs = vec![0i64; self.dimension + 1];
        for (flat, &mu) in self.flats.iter().zip(&self.moebius) {
            coeffs[self.dimension - flat.codim] += mu;
        }
        coeffs
    }
}

/// Builds the intersection poset by breadth-first refinement: starting
/// from the ambient space, intersect each known flat with each
/// hyperplane not already containing it, keeping the nonempty results.
/// Every flat is found because it can be built one hyperplane at a time.
pub fn build_poset(arr: &AffineArrangement) -> IntersectionPoset {
    let n = arr.dimension;
    let hyperplanes = &arr.hyperplanes;

    let ambient_sys = solve_affine_system(n, &[]).expect("ambient space is nonempty");
    let ambient = Flat {
        support: BTreeSet::new(),
        codim: 0,
        basepoint: ambient_sys.basepoint,
        basis: ambient_sys.basis,
    };

    let mut flats: BTreeMap<RatMatrix, Flat> = BTreeMap::new();
    let mut queue: VecDeque<RatMatrix> = VecDeque::new();
    flats.insert(ambient_sys.canonical.clone(), ambient);
    queue.push_back(ambient_sys.canonical);

    while let Some(key) = queue.pop_front() {
        let current = flats[&key].clone();
        for (h_index, h) in hyperplanes.iter().enumerate() {
            if current.support.contains(&h_index) {
                continue;
            }
            let mut rows: Vec<(&[Rat], &Rat)> = current
                .support
                .iter()
                .map(|&k| (hyperplanes[k].coeffs.as_slice(), &hyperplanes[k].offset))
                .collect();
            rows.push((h.coeffs.as_slice(), &h.offset));
            let sys = match solve_affine_system(n, &rows) {
                Some(sys) => sys,
                None => continue,
            };
            if flats.contains_key(&sys.canonical) {
                continue;
            }
            let support: BTreeSet<usize> = hyperplanes
                .iter()
                .enumerate()
                .filter(|(_, cand)| cand.vanishes_on(&sys.basepoint, &sys.basis))
                .map(|(k, _)| k)
                .collect();
            let flat = Flat {
                support,
                codim: sys.rank,
                basepoint: sys.basepoint,
                basis: sys.basis,
            };
            flats.insert(sys.canonical.clone(), flat);
            queue.push_back(sys.canonical);
        }
    }

    // Sort by (codim, canonical form); BTreeMap iteration is already
    // ordered by canonical form.
    let mut ordered: Vec<(RatMatrix, Flat)> = flats.into_iter().collect();
    ordered.sort_by(|a, b| a.1.codim.cmp(&b.1.codim).then_with(|| a.0.cmp(&b.0)));
    let flats: Vec<Flat> = ordered.into_iter().map(|(_, f)| f).collect();

    // Möbius recursion: mu(top) = 1 and the values over any upset sum
    // to zero. Flat j strictly contains flat i exactly when support(j)
    // is a proper subset of support(i); contained flats come later in
    // the codimension ordering.
    let mut moebius = vec![0i64; flats.len()];
    for i in 0..flats.len() {
        if flats[i].codim == 0 {
            moebius[i] = 1;
            continue;
        }
        let mut sum = 0i64;
        for j in 0..i {
            if flats[j].support.is_subset(&flats[i].support) {
                sum += moebius[j];
            }
        }
        moebius[i] = -sum;
    }

    IntersectionPoset { dimension: n, flats, moebius }
}
