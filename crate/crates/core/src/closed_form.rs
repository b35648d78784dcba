//! Exact closed-form average AoI of source 1 for the three source-aware
//! policies, plus the stationary vectors and per-state `v_q[0]` values whose
//! sum yields each average.
//!
//! Coefficient families are polynomials in `ρ2`, stored lowest degree first.
//! A family list `F` indexed by `k` stands for `Σ_k ρ1^k F_k(ρ2)`.
//!
//! Four appendix coefficients are corrected relative to the printed tables;
//! the corrected values are the ones that make the per-state values sum to
//! the theorem expressions and agree with the exact SHS solve:
//! `γ_{1,7} = ρ2 + 1`, the `ρ2^5` term of `γ_{2,3}` is 20, `γ_{2,4}` has
//! `138 ρ2`, and the `ρ2` term of `γ_{4,6}` is 17.

use thiserror::Error;

use crate::scalar::Scalar;
use crate::shs::StationaryDistribution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("{name} must be {requirement}, got {value}")]
    OutOfDomain {
        name: &'static str,
        requirement: &'static str,
        value: String,
    },
    #[error("rho1 and rho2 cannot both be zero")]
    ZeroLoad,
}

/// Numerator coefficients `η_0..η_7` of the Policy 1 average.
pub const THEOREM1_ETA: [&[i64]; 8] = [
    &[1, 2, 3, 2, 1],
    &[6, 14, 21, 15, 7],
    &[16, 42, 64, 46, 17],
    &[26, 78, 118, 73, 15],
    &[30, 102, 124, 52, 5],
    &[24, 79, 66, 15],
    &[11, 31, 15],
    &[2, 5],
];

/// Denominator coefficients `ξ_0..ξ_4` of the Policy 1 average.
pub const THEOREM1_XI: [&[i64]; 5] = [&[1, 2, 3, 2, 1], &[3, 7, 9, 6, 2], &[4, 10, 12, 6], &[3, 8, 6], &[1, 2]];

/// Policy 2 numerator, `k = 0` is `(ρ2 + 1)^2`, then `η̃_1..η̃_5`.
pub const THEOREM2_ETA: [&[i64]; 6] = [&[1, 2, 1], &[5, 11, 6], &[10, 24, 13], &[10, 27, 10], &[5, 14, 3], &[1, 3]];

/// Policy 3 numerator, `k = 0` is `(ρ2 + 1)^3`, then `η̂_1..η̂_4`.
pub const THEOREM3_ETA: [&[i64]; 5] = [&[1, 3, 3, 1], &[4, 13, 14, 5], &[7, 25, 28, 10], &[6, 23, 22, 5], &[2, 8, 5]];

/// Numerator of Policy 1 `v_00`.
pub const POLICY1_V00: [&[i64]; 5] = [&[1, 1, 1], &[5, 6, 4], &[10, 11, 2], &[9, 5], &[3]];

/// Numerators of Policy 1 `v_10..v_50`: index 0 is the `ρ1^0` term, indices
/// 1..=7 are `γ_{q,1}..γ_{q,7}`.
pub const POLICY1_GAMMA: [[&[i64]; 8]; 5] = [
    [
        &[0, 1, 3, 4, 3, 1],
        &[1, 9, 22, 26, 16, 4],
        &[6, 35, 70, 64, 25, 2],
        &[16, 72, 107, 62, 11],
        &[23, 77, 75, 23, 1],
        &[18, 41, 23, 3],
        &[7, 10, 3],
        &[1, 1],
    ],
    [
        &[0, 1, 4, 7, 7, 4, 1],
        &[1, 10, 32, 51, 46, 23, 5],
        &[7, 46, 119, 156, 108, 36, 4],
        &[21, 111, 222, 213, 100, 20, 1],
        &[33, 138, 202, 134, 40, 4],
        &[28, 87, 89, 39, 6],
        &[12, 26, 18, 4],
        &[2, 3, 1],
    ],
    [
        &[0, 0, 1, 3, 4, 3, 1],
        &[0, 1, 10, 25, 30, 19, 5],
        &[0, 6, 41, 87, 84, 37, 5],
        &[0, 18, 91, 149, 101, 27, 2],
        &[0, 30, 110, 126, 55, 8],
        &[0, 27, 69, 51, 12],
        &[0, 12, 20, 8],
        &[0, 2, 2],
    ],
    [
        &[0, 0, 1, 4, 7, 7, 4, 1],
        &[0, 1, 11, 36, 58, 53, 27, 6],
        &[0, 8, 55, 145, 193, 137, 48, 6],
        &[0, 26, 140, 287, 286, 143, 32, 2],
        &[0, 43, 183, 281, 201, 67, 8],
        &[0, 38, 123, 137, 67, 12],
        &[0, 17, 40, 31, 8],
        &[0, 3, 5, 2],
    ],
    [
        &[0, 0, 1, 3, 4, 3, 1],
        &[0, 1, 11, 28, 34, 22, 6],
        &[0, 7, 49, 105, 103, 47, 7],
        &[0, 23, 115, 190, 133, 38, 3],
        &[0, 40, 145, 170, 78, 12],
        &[0, 37, 95, 73, 18],
        &[0, 17, 29, 12],
        &[0, 3, 3],
    ],
];

/// Horner evaluation of `Σ_i coeffs[i] x^i`.
pub fn poly<T: Scalar>(coeffs: &[i64], x: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x.clone() + T::int(c))
}

/// Evaluates `Σ_k ρ1^k F_k(ρ2)` by Horner in `ρ1` over families evaluated in `ρ2`.
pub fn bivariate<T: Scalar>(families: &[&[i64]], rho1: &T, rho2: &T) -> T {
    families
        .iter()
        .rev()
        .fold(T::zero(), |acc, fam| acc * rho1.clone() + poly(fam, rho2))
}

fn require_positive<T: Scalar>(name: &'static str, value: &T) -> Result<(), DomainError> {
    if *value > T::zero() {
        Ok(())
    } else {
        Err(DomainError::OutOfDomain {
            name,
            requirement: "> 0",
            value: value.to_string(),
        })
    }
}

fn require_nonnegative<T: Scalar>(name: &'static str, value: &T) -> Result<(), DomainError> {
    if *value >= T::zero() {
        Ok(())
    } else {
        Err(DomainError::OutOfDomain {
            name,
            requirement: ">= 0",
            value: value.to_string(),
        })
    }
}

fn check_aoi_args<T: Scalar>(rho1: &T, rho2: &T, mu: &T) -> Result<(), DomainError> {
    require_positive("rho1", rho1)?;
    require_nonnegative("rho2", rho2)?;
    require_positive("mu", mu)
}

fn check_stationary_args<T: Scalar>(rho1: &T, rho2: &T) -> Result<(), DomainError> {
    require_nonnegative("rho1", rho1)?;
    require_nonnegative("rho2", rho2)?;
    if rho1.is_zero() && rho2.is_zero() {
        return Err(DomainError::ZeroLoad);
    }
    Ok(())
}

fn sq<T: Scalar>(x: T) -> T {
    x.clone() * x
}

/// `ρ1² (2ρ2 + 1) + (ρ2 + 1)² (2ρ1 + 1)`, shared by the Policy 2 and 3 averages.
fn policy23_common<T: Scalar>(rho1: &T, rho2: &T) -> T {
    let one = T::one();
    let two = T::int(2);
    sq(rho1.clone()) * (two.clone() * rho2.clone() + one.clone())
        + sq(rho2.clone() + one.clone()) * (two * rho1.clone() + one)
}

/// Average AoI of source 1 under Policy 1.
pub fn theorem1_aoi<T: Scalar>(rho1: T, rho2: T, mu: T) -> Result<T, DomainError> {
    check_aoi_args(&rho1, &rho2, &mu)?;
    let num = bivariate(&THEOREM1_ETA, &rho1, &rho2);
    let den = mu * rho1.clone() * sq(T::one() + rho1.clone()) * bivariate(&THEOREM1_XI, &rho1, &rho2);
    Ok(num / den)
}

/// Average AoI of source 1 under Policy 2.
pub fn theorem2_aoi<T: Scalar>(rho1: T, rho2: T, mu: T) -> Result<T, DomainError> {
    check_aoi_args(&rho1, &rho2, &mu)?;
    let num = bivariate(&THEOREM2_ETA, &rho1, &rho2);
    let den = mu * rho1.clone() * sq(T::one() + rho1.clone()) * policy23_common(&rho1, &rho2);
    Ok(num / den)
}

/// Average AoI of source 1 under Policy 3.
pub fn theorem3_aoi<T: Scalar>(rho1: T, rho2: T, mu: T) -> Result<T, DomainError> {
    check_aoi_args(&rho1, &rho2, &mu)?;
    let num = bivariate(&THEOREM3_ETA, &rho1, &rho2);
    let den = mu
        * rho1.clone()
        * (T::one() + rho1.clone())
        * (T::one() + rho2.clone())
        * policy23_common(&rho1, &rho2);
    Ok(num / den)
}

/// Stationary distribution of the Policy 1 chain.
pub fn policy1_stationary<T: Scalar>(rho1: T, rho2: T) -> Result<StationaryDistribution<T>, DomainError> {
    check_stationary_args(&rho1, &rho2)?;
    let rho = rho1.clone() + rho2.clone();
    let r12r = rho1.clone() * rho2.clone() * rho.clone();
    let norm = sq(rho.clone())
        + rho.clone() * (T::int(2) * rho1.clone() * rho2.clone() + T::one())
        + T::one();
    let weights = [
        T::one(),
        rho.clone(),
        rho1 * rho.clone(),
        rho2 * rho,
        r12r.clone(),
        r12r,
    ];
    Ok(StationaryDistribution::new(
        weights.into_iter().map(|w| w / norm.clone()).collect(),
    ))
}

/// Stationary distribution shared by the Policy 2 and Policy 3 chains.
pub fn policy23_stationary<T: Scalar>(rho1: T, rho2: T) -> Result<StationaryDistribution<T>, DomainError> {
    check_stationary_args(&rho1, &rho2)?;
    let both = rho1.clone() * rho2.clone();
    let norm = T::int(2) * both.clone() + rho1.clone() + rho2.clone() + T::one();
    let weights = [T::one(), rho1, rho2, both.clone(), both];
    Ok(StationaryDistribution::new(
        weights.into_iter().map(|w| w / norm.clone()).collect(),
    ))
}

/// `[v_00, .., v_50]` for Policy 1.
pub fn policy1_vq0<T: Scalar>(rho1: T, rho2: T, mu: T) -> Result<Vec<T>, DomainError> {
    check_aoi_args(&rho1, &rho2, &mu)?;
    let one = T::one();
    let rho = rho1.clone() + rho2.clone();
    // ((ρ+1)² − ρ2)(ρ² + ρ(2ρ1ρ2 + 1) + 1)
    let d1 = (sq(rho.clone() + one.clone()) - rho2.clone())
        * (sq(rho.clone()) + rho.clone() * (T::int(2) * rho1.clone() * rho2.clone() + one.clone()) + one.clone());
    let base = mu * sq(one.clone() + rho1.clone()) * d1;
    let p1 = one.clone() + rho.clone();
    let p2 = one.clone() + rho2.clone();

    let denominators = [
        base.clone() * rho1.clone(),
        base.clone() * rho1.clone() * p1.clone() * p2.clone(),
        base.clone() * p1.clone() * sq(p2.clone()),
        base.clone() * rho1.clone() * p1.clone() * p2.clone(),
        base.clone() * p1.clone() * sq(p2.clone()),
        base * p1 * p2,
    ];
    let mut out = Vec::with_capacity(6);
    out.push(bivariate(&POLICY1_V00, &rho1, &rho2) / denominators[0].clone());
    for (gamma, den) in POLICY1_GAMMA.iter().zip(denominators.iter().skip(1)) {
        out.push(bivariate(gamma, &rho1, &rho2) / den.clone());
    }
    Ok(out)
}

/// `[v_00, .., v_40]` for Policy 2.
pub fn policy2_vq0<T: Scalar>(rho1: T, rho2: T, mu: T) -> Result<Vec<T>, DomainError> {
    check_aoi_args(&rho1, &rho2, &mu)?;
    let one = T::one();
    let int = T::int;
    let (r1, r2) = (rho1, rho2);
    let rho = r1.clone() + r2.clone();
    let norm = one.clone() + rho.clone() + int(2) * r1.clone() * r2.clone();
    let sq1 = sq(one.clone() + r1.clone());
    let p = one.clone() + rho.clone();
    let q2 = one.clone() + r2.clone();
    let r1sq = sq(r1.clone());

    let v00 = (r1sq.clone() * (int(2) * rho.clone() + int(5)) + (int(4) * r1.clone() + one.clone()) * q2.clone())
        / (mu.clone() * r1.clone() * sq1.clone() * p.clone() * norm.clone());
    let v10 = (q2.clone() * (r1sq.clone() * r1.clone() + int(4) * r1sq.clone() + one.clone())
        + r1.clone() * (int(5) * r2.clone() + int(4)))
        / (mu.clone() * q2.clone() * sq1.clone() * norm.clone());
    let v20 = r2.clone()
        * (r1sq.clone() * (int(2) * rho.clone() + int(6)) + (int(4) * r1.clone() + one.clone()) * q2.clone())
        / (mu.clone() * r1.clone() * sq1.clone() * p.clone() * norm.clone());
    let v30 = r2.clone()
        * (q2.clone() * (int(2) * r1sq.clone() * r1.clone() + int(6) * r1sq.clone() + one.clone())
            + r1.clone() * (int(6) * r2.clone() + int(5)))
        / (mu.clone() * q2.clone() * sq1.clone() * norm.clone());
    let v40 = r2.clone()
        * (r1sq.clone()
            * (r1sq.clone() + int(5) * r1.clone() + r1.clone() * r2.clone() + int(4) * r2.clone() + int(9))
            + (int(5) * r1.clone() + one) * q2)
        / (mu * sq1 * p * norm);
    Ok(vec![v00, v10, v20, v30, v40])
}

/// `[v_00, .., v_40]` for Policy 3.
pub fn policy3_vq0<T: Scalar>(rho1: T, rho2: T, mu: T) -> Result<Vec<T>, DomainError> {
    check_aoi_args(&rho1, &rho2, &mu)?;
    let one = T::one();
    let int = T::int;
    let (r1, r2) = (rho1, rho2);
    let rho = r1.clone() + r2.clone();
    let norm = one.clone() + rho.clone() + int(2) * r1.clone() * r2.clone();
    let p1 = one.clone() + r1.clone();
    let q2 = one.clone() + r2.clone();
    let p = one.clone() + rho;
    let r1sq = sq(r1.clone());
    let r1cube = r1sq.clone() * r1.clone();
    // (ρ2 + 2)² − 1
    let shifted = sq(r2.clone() + int(2)) - one.clone();

    let v00 = (r1cube.clone() + r1sq.clone() * shifted.clone() + sq(q2.clone()) * (int(3) * r1.clone() + one.clone()))
        / (mu.clone() * r1.clone() * p1.clone() * q2.clone() * p.clone() * norm.clone());
    let v10 = (q2.clone() * (int(2) * r1sq.clone() + one.clone()) + r1.clone() * (int(4) * r2.clone() + int(3)))
        / (mu.clone() * q2.clone() * p1.clone() * norm.clone());
    let v20 = r2.clone()
        * (r1cube.clone() * (r2.clone() + int(2))
            + r1sq.clone() * (sq(r2.clone()) + int(5) * r2.clone() + int(4))
            + (int(3) * r1.clone() + one.clone()) * sq(q2.clone()))
        / (mu.clone() * r1.clone() * p1.clone() * q2.clone() * p.clone() * norm.clone());
    let v30 = r2.clone()
        * (q2.clone() * (int(3) * r1sq.clone() + one.clone()) + r1.clone() * (int(5) * r2.clone() + int(4)))
        / (mu.clone() * p1.clone() * q2.clone() * norm.clone());
    let v40 = r2.clone()
        * (r1cube * (int(2) * r2.clone() + int(3))
            + int(2) * r1sq * shifted
            + (int(4) * r1 + one) * sq(q2.clone()))
        / (mu * p1 * q2 * p * norm);
    Ok(vec![v00, v10, v20, v30, v40])
}
