use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ExtRational;
use crate::error::{Error, Result};

/// Maximizes `y` subject to `y + (n-1) z <= x_i`, `y - z <= x_j` for
/// `j != i`, `0 <= z <= 1`. Returns the optimum `Y` and the maximizer `z`.
pub fn lp_solve(x: &[ExtRational], i: usize) -> Result<(ExtRational, BigRational)> {
    let n = x.len();
    if n < 2 || i >= n {
        return Err(Error::InvalidValue(format!("lp over n = {n}, i = {i}")));
    }
    if x.iter().any(ExtRational::is_negative) {
        return Err(Error::InvalidValue(
            "lp coordinates must be nonnegative".into(),
        ));
    }
    let mu = x
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, v)| v)
        .min()
        .expect("n >= 2");
    let one = BigRational::one();
    Ok(match (&x[i], mu) {
        (ExtRational::Infinite, ExtRational::Infinite) => {
            (ExtRational::Infinite, BigRational::zero())
        }
        (ExtRational::Infinite, ExtRational::Finite(m)) => (ExtRational::Finite(m + &one), one),
        (ExtRational::Finite(xi), ExtRational::Infinite) => {
            (ExtRational::Finite(xi.clone()), BigRational::zero())
        }
        (ExtRational::Finite(xi), ExtRational::Finite(m)) => {
            let nn = BigRational::from_integer(BigInt::from(n));
            let raw = (xi - m) / &nn;
            let z = raw.max(BigRational::zero()).min(one);
            let left = xi - (&nn - BigRational::one()) * &z;
            let right = m + &z;
            (ExtRational::Finite(left.min(right)), z)
        }
    })
}

/// Whether `(y, z)` satisfies every constraint of the LP for coordinate `i`.
pub fn lp_feasible(x: &[ExtRational], i: usize, y: &ExtRational, z: &BigRational) -> bool {
    let n = x.len();
    if *z < BigRational::zero() || *z > BigRational::one() {
        return false;
    }
    let nm1 = BigRational::from_integer(BigInt::from(n as i64 - 1));
    let own = y.add_rational(&(nm1 * z));
    if own > x[i] {
        return false;
    }
    (0..n).filter(|j| *j != i).all(|j| match y {
        ExtRational::Infinite => x[j].is_infinite(),
        ExtRational::Finite(v) => ExtRational::Finite(v - z) <= x[j],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(v: &[&str]) -> Vec<ExtRational> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hand_examples() {
        let x = ext(&["inf", "0"]);
        assert_eq!(lp_solve(&x, 0).unwrap(), (ExtRational::int(1), r(1, 1)));
        let x = ext(&["1", "1"]);
        assert_eq!(lp_solve(&x, 0).unwrap(), (ExtRational::int(1), r(0, 1)));
        let x = ext(&["3", "0"]);
        assert_eq!(lp_solve(&x, 0).unwrap(), (ExtRational::int(1), r(1, 1)));
        let x = ext(&["0", "inf"]);
        assert_eq!(lp_solve(&x, 0).unwrap(), (ExtRational::int(0), r(0, 1)));
        let x = ext(&["inf", "inf", "inf"]);
        assert_eq!(lp_solve(&x, 1).unwrap(), (ExtRational::Infinite, r(0, 1)));
    }

    #[test]
    fn interior_optimum() {
        let x = ext(&["2", "1"]);
        let (y, z) = lp_solve(&x, 0).unwrap();
        assert_eq!(z, r(1, 2));
        assert_eq!(y, ExtRational::ratio(3, 2));
        assert!(lp_feasible(&x, 0, &y, &z));
        assert!(!lp_feasible(&x, 0, &ExtRational::int(2), &z));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lp_solve(&ext(&["1"]), 0).is_err());
        assert!(lp_solve(&ext(&["-1", "2"]), 0).is_err());
        assert!(lp_solve(&ext(&["1", "2"]), 2).is_err());
    }
}
