//! Exact reference statistics over rationals.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

fn mean(v: &[BigRational]) -> BigRational {
    let n = BigRational::from_integer(BigInt::from(v.len()));
    v.iter().fold(BigRational::zero(), |a, b| a + b) / n
}

/// Pearson r over exact values; `None` for a constant series. The only
/// rounding is the final square root.
pub fn pearson_rational(x: &[BigRational], y: &[BigRational]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = BigRational::zero();
    let mut sxx = BigRational::zero();
    let mut syy = BigRational::zero();
    for (a, b) in x.iter().zip(y) {
        let dx = a - &mx;
        let dy = b - &my;
        sxy += &dx * &dy;
        sxx += &dx * &dx;
        syy += &dy * &dy;
    }
    if sxx.is_zero() || syy.is_zero() {
        return None;
    }
    let r2 = (&sxy * &sxy) / (sxx * syy);
    let r = r2.to_f64().unwrap().sqrt();
    Some(if sxy.is_negative() { -r } else { r })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let ex: Vec<_> = x.iter().map(|v| exact(*v)).collect();
    let ey: Vec<_> = y.iter().map(|v| exact(*v)).collect();
    pearson_rational(&ex, &ey)
}

/// Average ranks by counting: rank = #smaller + (#equal + 1) / 2.
pub fn ranks(x: &[f64]) -> Vec<BigRational> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count();
            let equal = x.iter().filter(|w| *w == v).count();
            BigRational::new(BigInt::from(2 * less + equal + 1), BigInt::from(2))
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_rational(&ranks(x), &ranks(y))
}

pub fn mae(x: &[f64], y: &[f64]) -> f64 {
    let n = BigRational::from_integer(BigInt::from(x.len()));
    let total = x.iter().zip(y).fold(BigRational::zero(), |acc, (a, b)| {
        acc + (exact(*a) - exact(*b)).abs()
    });
    (total / n).to_f64().unwrap()
}
