//! Collision-free maneuvers: impulse positions whose legs clear a keep-out
//! region for every admissible flight time.
//!
//! A leg is certified when both extreme members of its trajectory family
//! clear the region: the straight segment `r_i → r_j` (the `dt → 0` limit) and
//! the trajectory at `dt = π/κ − ε`.

use crate::constraints::PathConstraint;
use crate::cw::{CwModel, TransferGuard, TransferLeg};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Samples along the `π/κ − ε` trajectory before local refinement.
pub const FAR_TRAJECTORY_SAMPLES: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfmLegReport<T> {
    pub r_i: Vec3<T>,
    pub r_j: Vec3<T>,
    /// Signed margin of the straight segment, km.
    pub segment_margin: T,
    /// Signed margin of the `π/κ − ε` trajectory, km.
    pub far_margin: T,
    /// Flight time of the far trajectory, s.
    pub far_dt: T,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfmPlan<T> {
    pub impulse_positions: Vec<Vec3<T>>,
    pub keep_out: PathConstraint<T>,
    pub epsilon: T,
    pub certified: bool,
    pub legs: Vec<CfmLegReport<T>>,
}

/// Distance from `c` to the closest point of the segment `a → b`.
pub fn segment_distance<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == T::zero() {
        return a.distance(&c);
    }
    let s = ((c - a).dot(&ab) / len2).max(T::zero()).min(T::one());
    (a + ab * s).distance(&c)
}

/// Smallest and largest distance from `center` along `leg`, from `n` samples
/// with the best interval refined by golden-section search.
pub fn distance_range<T: Real>(leg: &TransferLeg<T>, center: Vec3<T>, n: usize) -> (T, T) {
    let n = n.max(3);
    let dt = leg.dt();
    let at = |k: usize| dt * T::from_count(k) / T::from_count(n - 1);
    let dist = |t: T| leg.position_at(t).distance(&center);
    let mut best = (T::infinity(), 0usize);
    let mut far = T::zero();
    for k in 0..n {
        let d = dist(at(k));
        far = far.max(d);
        if d < best.0 {
            best = (d, k);
        }
    }
    let (mut lo, mut hi) = (at(best.1.saturating_sub(1)), at((best.1 + 1).min(n - 1)));
    let phi = T::lit(0.618_033_988_749_894_8);
    let mut x1 = hi - (hi - lo) * phi;
    let mut x2 = lo + (hi - lo) * phi;
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * phi;
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * phi;
            f2 = dist(x2);
        }
    }
    (best.0.min(f1).min(f2), far)
}

fn margin_of<T: Real>(c: &PathConstraint<T>, near: T, far: T) -> T {
    (near - c.rho_inner()).min(c.rho_outer() - far)
}

/// Certification details for one leg; see [`cfm_certify_leg`].
pub fn cfm_leg_report<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    keep_out: &PathConstraint<T>,
    epsilon: T,
) -> Result<CfmLegReport<T>> {
    for (index, r) in [(0, r_i), (1, r_j)] {
        if !keep_out.admits(r) {
            return Err(Error::EndpointInside { index });
        }
    }
    let limit = model.orbit.flight_time_limit();
    if !(epsilon > T::zero() && epsilon < limit) {
        return Err(Error::InvalidValue(format!("epsilon must lie in (0, π/κ), got {epsilon}")));
    }
    let center = keep_out.center();
    let seg_near = segment_distance(r_i, r_j, center);
    let seg_far = r_i.distance(&center).max(r_j.distance(&center));
    let segment_margin = margin_of(keep_out, seg_near, seg_far);

    let far_dt = limit - epsilon;
    let relaxed = model.with_guard(TransferGuard::condition_only());
    let leg = relaxed.transfer_leg(r_i, r_j, Vec3::zeros(), far_dt)?;
    let (near, far) = distance_range(&leg, center, FAR_TRAJECTORY_SAMPLES);
    let far_margin = margin_of(keep_out, near, far);

    Ok(CfmLegReport {
        r_i,
        r_j,
        segment_margin,
        far_margin,
        far_dt,
        certified: segment_margin >= T::zero() && far_margin >= T::zero(),
    })
}

/// Whether every flight time of the leg `r_i → r_j` clears `keep_out`,
/// judged by the straight segment and the `π/κ − ε` trajectory.
pub fn cfm_certify_leg<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    keep_out: &PathConstraint<T>,
    epsilon: T,
) -> Result<bool> {
    Ok(cfm_leg_report(model, r_i, r_j, keep_out, epsilon)?.certified)
}

/// Certifies each consecutive leg of a tour through `positions`.
pub fn cfm_plan_tour<T: Real>(
    model: &CwModel<T>,
    positions: &[Vec3<T>],
    keep_out: &PathConstraint<T>,
    epsilon: T,
) -> Result<CfmPlan<T>> {
    if positions.len() < 2 {
        return Err(Error::InvalidValue(format!("a tour needs at least 2 positions, got {}", positions.len())));
    }
    if let Some(index) = positions.iter().position(|r| !keep_out.admits(*r)) {
        return Err(Error::EndpointInside { index });
    }
    let legs = positions
        .windows(2)
        .map(|w| cfm_leg_report(model, w[0], w[1], keep_out, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(CfmPlan {
        impulse_positions: positions.to_vec(),
        keep_out: *keep_out,
        epsilon,
        certified: legs.iter().all(|l| l.certified),
        legs,
    })
}
