use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;

use super::scaled::{floor_scaled, pareto_scaled, walk_tuples, Scaled};
use super::{lp_solve, ExtRational, SurplusState};
use crate::error::{Error, Result};

/// Default bound on the number of distinct points generated per level.
pub const DEFAULT_FRONTIER_CAP: usize = 1_000_000;

/// A point of some `D^k`: nonnegative coordinates in `Q u {inf}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrontierPoint {
    coords: Vec<ExtRational>,
}

impl FrontierPoint {
    pub fn new(coords: Vec<ExtRational>) -> Result<Self> {
        if coords.iter().any(ExtRational::is_negative) {
            return Err(Error::InvalidValue(
                "frontier coordinates must be nonnegative".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[ExtRational] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate-wise `>=`.
    pub fn weakly_above(&self, other: &FrontierPoint) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a >= b)
    }
}

/// Strict domination in every coordinate.
pub fn dominates(p: &FrontierPoint, x: &SurplusState) -> bool {
    p.coords.len() == x.n()
        && p.coords
            .iter()
            .zip(x.delta())
            .all(|(a, b)| a.gt_rational(b))
}

/// A canonically sorted set of frontier points.
#[derive(Debug, Clone)]
pub struct Frontier {
    n: usize,
    points: Vec<FrontierPoint>,
    /// Integer image used by the fast paths when it fits.
    scaled: Option<Scaled>,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.points == other.points
    }
}

impl Eq for Frontier {}

impl Frontier {
    /// `D^0`: one zero coordinate, infinity elsewhere.
    pub fn initial(n: usize) -> Self {
        let points = (0..n)
            .map(|i| FrontierPoint {
                coords: (0..n)
                    .map(|j| {
                        if i == j {
                            ExtRational::zero()
                        } else {
                            ExtRational::Infinite
                        }
                    })
                    .collect(),
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self::build(n, points)
    }

    fn build(n: usize, points: Vec<FrontierPoint>) -> Self {
        let coords: Vec<Vec<ExtRational>> = points.iter().map(|p| p.coords.clone()).collect();
        let scaled = Scaled::from_ext(n, &coords);
        Self { n, points, scaled }
    }

    fn from_scaled(s: Scaled) -> Self {
        let points = s
            .to_ext()
            .into_iter()
            .map(|coords| FrontierPoint { coords })
            .collect();
        Self {
            n: s.n,
            points,
            scaled: Some(s),
        }
    }

    pub fn from_points(n: usize, points: Vec<FrontierPoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n(),
            });
        }
        let points = points
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self::build(n, points))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[FrontierPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Some point strictly dominates `x`.
    pub fn covers(&self, x: &SurplusState) -> bool {
        self.points.iter().any(|p| dominates(p, x))
    }

    /// Visits every `n`-tuple of points with the generated point and the
    /// certificate item `(Z_1, ..., Z_n)`.
    fn for_each_tuple(
        &self,
        visit: impl FnMut(Vec<ExtRational>, Vec<BigRational>) -> Result<()>,
    ) -> Result<()> {
        let all: Vec<usize> = (0..self.points.len()).collect();
        self.for_each_tuple_in(&vec![all; self.n], visit)
    }

    /// As [`Self::for_each_tuple`], with slot `j` restricted to `slots[j]`.
    fn for_each_tuple_in(
        &self,
        slots: &[Vec<usize>],
        mut visit: impl FnMut(Vec<ExtRational>, Vec<BigRational>) -> Result<()>,
    ) -> Result<()> {
        let n = self.n;
        if slots.iter().any(Vec::is_empty) {
            return Ok(());
        }
        let mut idx = vec![0usize; n];
        let mut column = Vec::with_capacity(n);
        loop {
            let mut ys = Vec::with_capacity(n);
            let mut zs = Vec::with_capacity(n);
            for i in 0..n {
                column.clear();
                column.extend((0..n).map(|j| self.points[slots[j][idx[j]]].coords[i].clone()));
                let (y, z) = lp_solve(&column, i)?;
                ys.push(y);
                zs.push(z);
            }
            visit(ys, zs)?;
            // odometer over tuples
            let mut d = 0;
            loop {
                if d == n {
                    return Ok(());
                }
                idx[d] += 1;
                if idx[d] < slots[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    /// Item vectors `Z` used by the one-step certificates of the next level.
    pub fn certificate_items(&self) -> Result<Vec<Vec<BigRational>>> {
        let mut items = BTreeSet::new();
        self.for_each_tuple(|_, z| {
            items.insert(z);
            Ok(())
        })?;
        Ok(items.into_iter().collect())
    }
}

/// Smallest buffer size that triggers a compaction.
const CHUNK: usize = 1 << 16;

/// Points of the next level, sorted and deduplicated, and reduced to the
/// Pareto-maximal ones when `prune` is set. Compacting in chunks is exact
/// because a dominated point stays dominated as more points arrive.
fn generate(d: &Frontier, cap: usize, prune: bool) -> Result<Frontier> {
    if let Some(s) = &d.scaled {
        if let Some(next) = generate_scaled(s, cap, prune)? {
            return Ok(Frontier::from_scaled(next));
        }
    }
    Ok(Frontier {
        n: d.n,
        points: generate_rational(d, cap, prune)?,
        scaled: None,
    })
}

/// Integer path; `Ok(None)` when some value leaves the integer range.
fn generate_scaled(s: &Scaled, cap: usize, prune: bool) -> Result<Option<Scaled>> {
    let compact = |acc: &mut Vec<Vec<i128>>| -> Result<()> {
        acc.sort_unstable();
        acc.dedup();
        if prune {
            *acc = pareto_scaled(std::mem::take(acc));
        }
        if acc.len() > cap {
            return Err(Error::FrontierSizeExceeded(cap));
        }
        Ok(())
    };
    let mut acc: Vec<Vec<i128>> = Vec::new();
    let mut next = CHUNK;
    let mut failure = None;
    let all: Vec<usize> = (0..s.pts.len()).collect();
    let walked = walk_tuples(s, &vec![all; s.n], |y| {
        acc.push(y.to_vec());
        if acc.len() >= next {
            if let Err(e) = compact(&mut acc) {
                failure = Some(e);
                return false;
            }
            next = CHUNK.max(2 * acc.len());
        }
        true
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if walked.is_none() {
        return Ok(None);
    }
    compact(&mut acc)?;
    Ok(Some(Scaled {
        n: s.n,
        scale: s.scale * s.n as i128,
        pts: acc,
    }))
}

/// Reference path in rational arithmetic.
fn generate_rational(d: &Frontier, cap: usize, prune: bool) -> Result<Vec<FrontierPoint>> {
    let mut acc: Vec<FrontierPoint> = Vec::new();
    let mut next = CHUNK;
    let compact = |acc: &mut Vec<FrontierPoint>| -> Result<()> {
        acc.sort_unstable();
        acc.dedup();
        if prune {
            *acc = pareto_maximal(std::mem::take(acc));
        }
        if acc.len() > cap {
            return Err(Error::FrontierSizeExceeded(cap));
        }
        Ok(())
    };
    d.for_each_tuple(|coords, _| {
        acc.push(FrontierPoint { coords });
        if acc.len() >= next {
            compact(&mut acc)?;
            next = CHUNK.max(2 * acc.len());
        }
        Ok(())
    })?;
    compact(&mut acc)?;
    Ok(acc)
}

/// Whether some point of the level after `d` strictly dominates `x`.
/// Stops at the first such point.
///
/// Coordinate `i` of a generated point is at most the `i`-th coordinate of
/// the point in slot `i`, and at most one more than that of any other slot,
/// so each slot only needs points passing those two tests.
pub(crate) fn next_level_covers(d: &Frontier, x: &SurplusState) -> Result<bool> {
    if let Some(s) = &d.scaled {
        if let Some(hit) = covers_scaled(s, x) {
            return Ok(hit);
        }
    }
    covers_rational(d, x)
}

fn covers_scaled(s: &Scaled, x: &SurplusState) -> Option<bool> {
    let n = s.n;
    let one = BigRational::one();
    let own: Vec<i128> = x.delta().iter().map(|v| floor_scaled(v, s.scale)).collect();
    let other: Vec<i128> = x
        .delta()
        .iter()
        .map(|v| floor_scaled(&(v - &one), s.scale))
        .collect();
    let next_scale = s.scale.checked_mul(n as i128)?;
    let target: Vec<i128> = x
        .delta()
        .iter()
        .map(|v| floor_scaled(v, next_scale))
        .collect();
    let slots: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            (0..s.pts.len())
                .filter(|k| {
                    let p = &s.pts[*k];
                    (0..n).all(|i| p[i] > if i == j { own[i] } else { other[i] })
                })
                .collect()
        })
        .collect();
    let finished = walk_tuples(s, &slots, |y| !y.iter().zip(&target).all(|(a, b)| a > b))?;
    Some(!finished)
}

fn covers_rational(d: &Frontier, x: &SurplusState) -> Result<bool> {
    let one = BigRational::one();
    let lowered: Vec<BigRational> = x.delta().iter().map(|v| v - &one).collect();
    let slots: Vec<Vec<usize>> = (0..d.n)
        .map(|j| {
            (0..d.points.len())
                .filter(|k| {
                    let p = &d.points[*k].coords;
                    (0..d.n).all(|i| {
                        let need = if i == j { &x.delta()[i] } else { &lowered[i] };
                        p[i].gt_rational(need)
                    })
                })
                .collect()
        })
        .collect();
    let mut found = false;
    let res = d.for_each_tuple_in(&slots, |coords, _| {
        if coords.iter().zip(x.delta()).all(|(a, b)| a.gt_rational(b)) {
            found = true;
            return Err(Error::UndefinedArithmetic("early exit"));
        }
        Ok(())
    });
    match res {
        Ok(()) => Ok(false),
        Err(_) if found => Ok(true),
        Err(e) => Err(e),
    }
}

/// Two coordinates: scanning by decreasing first coordinate, a point is kept
/// iff its second coordinate beats every point kept so far.
fn staircase(sorted: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    let mut kept: Vec<FrontierPoint> = Vec::new();
    for p in sorted.into_iter().rev() {
        if kept.last().map_or(true, |q| p.coords[1] > q.coords[1]) {
            kept.push(p);
        }
    }
    kept.reverse();
    kept
}

/// Keeps points not weakly below another point. Input must be sorted and
/// free of duplicates.
fn pareto_maximal(sorted: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    if sorted.first().is_some_and(|p| p.n() == 2) {
        return staircase(sorted);
    }
    let mut kept: Vec<FrontierPoint> = Vec::new();
    // any point weakly above p and distinct from it is lexicographically larger
    for p in sorted.into_iter().rev() {
        if !kept.iter().any(|q| q.weakly_above(&p)) {
            kept.push(p);
        }
    }
    kept.reverse();
    kept
}

/// `D^{k+1}` from `D^k`, reduced to its Pareto-maximal points.
pub fn next_frontier(d: &Frontier, cap: usize) -> Result<Frontier> {
    generate(d, cap, true)
}

/// `D^{k+1}` with exact duplicates removed but no domination pruning.
pub fn next_frontier_unpruned(d: &Frontier, cap: usize) -> Result<Frontier> {
    generate(d, cap, false)
}

/// [`next_frontier`] computed in rational arithmetic only.
pub fn next_frontier_rational(d: &Frontier, cap: usize) -> Result<Frontier> {
    Ok(Frontier {
        n: d.n,
        points: generate_rational(d, cap, true)?,
        scaled: None,
    })
}
