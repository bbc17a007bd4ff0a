//! Chaining two-impulse legs into a multi-impulse mission.

use crate::cw::{CwModel, TransferLeg};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;
use crate::spectral::{multi_impulse_envelope, sphere_bound, SphereBound};

/// Gap (km) above which consecutive legs are considered disconnected.
pub const CHAIN_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MissionLeg<T> {
    pub r_i: Vec3<T>,
    pub r_j: Vec3<T>,
    pub dt: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegSummary<T> {
    pub leg: TransferLeg<T>,
    pub dv_norm: T,
    pub bound: SphereBound<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissionSummary<T> {
    pub legs: Vec<LegSummary<T>>,
    /// Sum of impulse magnitudes, km/s.
    pub total_dv: T,
    /// `√2·max|r_k|` over the impulse positions, present when every leg is
    /// no longer than `0.5·π/κ`.
    pub envelope: Option<T>,
    /// Velocity on arrival at the last position.
    pub final_velocity: Vec3<T>,
    pub duration: T,
}

/// Solves each leg in turn, feeding the arrival velocity of one leg into the
/// departure impulse of the next.
pub fn assemble_mission<T: Real>(
    model: &CwModel<T>,
    v_initial: Vec3<T>,
    legs: &[MissionLeg<T>],
) -> Result<MissionSummary<T>> {
    if legs.is_empty() {
        return Err(Error::EmptyList);
    }
    for (index, w) in legs.windows(2).enumerate() {
        let gap = w[0].r_j.distance(&w[1].r_i);
        if !(gap <= T::lit(CHAIN_TOLERANCE)) {
            return Err(Error::ChainBroken { index, next: index + 1, gap: gap.as_f64() });
        }
    }
    let mut v = v_initial;
    let mut t0 = T::zero();
    let mut out = Vec::with_capacity(legs.len());
    for spec in legs {
        let leg = model.transfer_leg_at(spec.r_i, spec.r_j, v, spec.dt, t0)?;
        let bound = sphere_bound(&model.orbit, spec.r_i, spec.r_j, spec.dt)?;
        out.push(LegSummary { leg, dv_norm: leg.dv().norm(), bound });
        v = leg.arrival_velocity();
        t0 = t0 + spec.dt;
    }
    let knee = model.orbit.envelope_knee();
    let envelope = if legs.iter().all(|l| l.dt <= knee) {
        let mut norms: Vec<T> = legs.iter().map(|l| l.r_i.norm()).collect();
        norms.push(legs[legs.len() - 1].r_j.norm());
        if norms.iter().all(|n| *n > T::zero()) {
            Some(multi_impulse_envelope(&norms)?)
        } else {
            let positive: Vec<T> = norms.into_iter().filter(|n| *n > T::zero()).collect();
            if positive.is_empty() { Some(T::zero()) } else { Some(multi_impulse_envelope(&positive)?) }
        }
    } else {
        None
    };
    Ok(MissionSummary {
        total_dv: out.iter().map(|l| l.dv_norm).sum(),
        legs: out,
        envelope,
        final_velocity: v,
        duration: t0,
    })
}
