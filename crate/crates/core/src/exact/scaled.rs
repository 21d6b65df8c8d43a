//! Integer image of a frontier level. Every finite coordinate is stored as
//! `x * scale`, which stays integral from one level to the next once the
//! scale is multiplied by `n`; infinity is `INF`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::ExtRational;

pub(crate) const INF: i128 = i128::MAX;

/// Magnitude guard: any finite value above this aborts the integer path.
const LIMIT: i128 = 1 << 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Scaled {
    pub n: usize,
    pub scale: i128,
    pub pts: Vec<Vec<i128>>,
}

impl Scaled {
    /// Common-denominator image of `points`, `None` if it does not fit.
    pub fn from_ext(n: usize, points: &[Vec<ExtRational>]) -> Option<Self> {
        let mut den = BigInt::one();
        for c in points.iter().flatten() {
            if let ExtRational::Finite(r) = c {
                den = den.lcm(r.denom());
            }
        }
        let scale = den.to_i128().filter(|s| *s <= LIMIT)?;
        let pts = points
            .iter()
            .map(|p| {
                p.iter()
                    .map(|c| match c {
                        ExtRational::Infinite => Some(INF),
                        ExtRational::Finite(r) => (r.numer() * (&den / r.denom()))
                            .to_i128()
                            .filter(|v| v.abs() <= LIMIT),
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self { n, scale, pts })
    }

    pub fn to_ext(&self) -> Vec<Vec<ExtRational>> {
        let s = BigInt::from(self.scale);
        self.pts
            .iter()
            .map(|p| {
                p.iter()
                    .map(|v| {
                        if *v == INF {
                            ExtRational::Infinite
                        } else {
                            ExtRational::Finite(BigRational::new(BigInt::from(*v), s.clone()))
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `floor(x * scale)` clamped to the guard range. For an integer `y`,
/// `y > x * scale` iff `y > floor(x * scale)`.
pub(crate) fn floor_scaled(x: &BigRational, scale: i128) -> i128 {
    let v = (x * BigRational::from_integer(BigInt::from(scale)))
        .floor()
        .to_integer();
    if v > BigInt::from(LIMIT) {
        // only infinity exceeds it
        INF - 1
    } else if v < -BigInt::from(LIMIT) {
        -LIMIT
    } else {
        v.to_i128().expect("within the guard")
    }
}

/// Optimal `Y` of the coordinate-`i` program at scale `n * scale`, given the
/// column at `scale`. `None` on overflow.
#[inline]
pub(crate) fn lp_scaled(col: &[i128], i: usize, scale: i128) -> Option<i128> {
    let n = col.len() as i128;
    let own = col[i];
    let mut mu = INF;
    for (j, v) in col.iter().enumerate() {
        if j != i && *v < mu {
            mu = *v;
        }
    }
    let big = n.checked_mul(scale)?;
    let y = match (own == INF, mu == INF) {
        (true, true) => INF,
        (true, false) => mu.checked_mul(n)?.checked_add(big)?,
        (false, true) => own.checked_mul(n)?,
        (false, false) => {
            let z = (own - mu).clamp(0, big);
            let left = own.checked_mul(n)?.checked_sub((n - 1).checked_mul(z)?)?;
            let right = mu.checked_mul(n)?.checked_add(z)?;
            left.min(right)
        }
    };
    (y == INF || y.abs() <= LIMIT).then_some(y)
}

/// Calls `visit` with the generated point of every tuple drawn from
/// `slots`; stops early when `visit` returns `false`. Returns `None` on
/// overflow, otherwise whether the walk ran to the end.
pub(crate) fn walk_tuples(
    s: &Scaled,
    slots: &[Vec<usize>],
    mut visit: impl FnMut(&[i128]) -> bool,
) -> Option<bool> {
    let n = s.n;
    if slots.iter().any(Vec::is_empty) {
        return Some(true);
    }
    let mut idx = vec![0usize; n];
    let mut col = vec![0i128; n];
    let mut y = vec![0i128; n];
    loop {
        for i in 0..n {
            for j in 0..n {
                col[j] = s.pts[slots[j][idx[j]]][i];
            }
            y[i] = lp_scaled(&col, i, s.scale)?;
        }
        if !visit(&y) {
            return Some(false);
        }
        let mut d = 0;
        loop {
            if d == n {
                return Some(true);
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

/// Pareto-maximal points of a sorted, deduplicated list.
pub(crate) fn pareto_scaled(sorted: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
    let mut kept: Vec<Vec<i128>> = Vec::new();
    let two = sorted.first().is_some_and(|p| p.len() == 2);
    for p in sorted.into_iter().rev() {
        let dominated = if two {
            kept.last().is_some_and(|q| q[1] >= p[1])
        } else {
            kept.iter().any(|q| q.iter().zip(&p).all(|(a, b)| a >= b))
        };
        if !dominated {
            kept.push(p);
        }
    }
    kept.reverse();
    kept
}
