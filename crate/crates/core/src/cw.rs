//! Closed-form Clohessy-Wiltshire propagation in the target's RSW frame.
//!
//! Positions are in km, velocities in km/s and times in s. The frame has
//! x radial, z along the orbital angular momentum and y completing the triad.
//! Every inversion-based routine (impulse solving, two-point transfer
//! matrices) works on flight times inside the open window (0, π/κ) where the
//! position-from-velocity block `F_rv` is invertible.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Earth gravitational parameter, km³/s².
pub const EARTH_MU: f64 = 398_600.441_8;
/// Earth equatorial radius, km.
pub const EARTH_RADIUS: f64 = 6_378.137;

/// Target orbit: gravitational parameter, semi-major axis and mean motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitParams<T> {
    mu: T,
    a_ts: T,
    kappa: T,
}

impl<T: Real> OrbitParams<T> {
    pub fn new(mu: T, a_ts: T) -> Result<Self> {
        if !(mu > T::zero() && mu.is_finite()) {
            return Err(Error::InvalidOrbit(format!("mu must be positive, got {mu}")));
        }
        if !(a_ts > T::zero() && a_ts.is_finite()) {
            return Err(Error::InvalidOrbit(format!("semi-major axis must be positive, got {a_ts}")));
        }
        let kappa = (mu / (a_ts * a_ts * a_ts)).sqrt();
        Ok(Self { mu, a_ts, kappa })
    }

    /// Circular orbit `altitude` km above a body of radius `body_radius` km.
    pub fn from_altitude(mu: T, body_radius: T, altitude: T) -> Result<Self> {
        if !(body_radius + altitude > T::zero()) {
            return Err(Error::InvalidOrbit(format!(
                "orbit radius must be positive (body radius {body_radius}, altitude {altitude})"
            )));
        }
        Self::new(mu, body_radius + altitude)
    }

    /// Circular Earth orbit at `altitude` km with the default constants.
    pub fn earth_altitude(altitude: T) -> Result<Self> {
        Self::from_altitude(T::lit(EARTH_MU), T::lit(EARTH_RADIUS), altitude)
    }

    /// Orbit with a prescribed mean motion; the semi-major axis is derived
    /// from `mu` so that κ²·a³ = μ.
    pub fn from_mean_motion(mu: T, kappa: T) -> Result<Self> {
        if !(kappa > T::zero() && kappa.is_finite()) {
            return Err(Error::InvalidOrbit(format!("mean motion must be positive, got {kappa}")));
        }
        if !(mu > T::zero() && mu.is_finite()) {
            return Err(Error::InvalidOrbit(format!("mu must be positive, got {mu}")));
        }
        let a_ts = (mu / (kappa * kappa)).cbrt();
        Ok(Self { mu, a_ts, kappa })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn a_ts(&self) -> T {
        self.a_ts
    }

    /// Mean motion κ, rad/s.
    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// π/κ: every flight time between impulses must stay below this.
    pub fn flight_time_limit(&self) -> T {
        T::PI() / self.kappa
    }

    /// 0.5·π/κ, where the trajectory envelope starts to grow.
    pub fn envelope_knee(&self) -> T {
        T::lit(0.5) * self.flight_time_limit()
    }

    /// Fails with `DtOutOfRange` unless `0 ≤ dt < π/κ`.
    pub fn check_flight_time(&self, dt: T) -> Result<()> {
        let limit = self.flight_time_limit();
        if !(dt >= T::zero() && dt < limit) {
            return Err(Error::DtOutOfRange { dt: dt.as_f64(), limit: limit.as_f64() });
        }
        Ok(())
    }
}

/// Relative state of the chaser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelState<T> {
    pub r: Vec3<T>,
    pub v: Vec3<T>,
    /// Epoch, s.
    pub t: T,
}

impl<T: Real> RelState<T> {
    pub fn new(r: Vec3<T>, v: Vec3<T>, t: T) -> Result<Self> {
        if !(r.is_finite() && v.is_finite() && t.is_finite()) {
            return Err(Error::InvalidValue("relative state must be finite".into()));
        }
        Ok(Self { r, v, t })
    }
}

/// The four 3×3 blocks of the CW state transition matrix for one flight time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StmBlocks<T> {
    pub f_rr: Mat3<T>,
    pub f_rv: Mat3<T>,
    pub f_vr: Mat3<T>,
    pub f_vv: Mat3<T>,
    pub dt: T,
}

impl<T: Real> StmBlocks<T> {
    /// Evaluates the closed forms at `kappa·dt` without range checks.
    pub fn evaluate(kappa: T, dt: T) -> Self {
        let z = T::zero();
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        let six = T::lit(6.0);
        let kt = kappa * dt;
        let (s, c) = kt.sin_cos();

        let f_rr = Mat3([[four - three * c, z, z], [six * (s - kt), one, z], [z, z, c]]);
        let f_rv = Mat3([
            [s, two * (one - c), z],
            [-two * (one - c), four * s - three * kt, z],
            [z, z, s],
        ])
        .scale(one / kappa);
        let f_vr = Mat3([[three * s, z, z], [six * (c - one), z, z], [z, z, -s]]).scale(kappa);
        let f_vv = Mat3([[c, two * s, z], [-two * s, four * c - three, z], [z, z, c]]);
        Self { f_rr, f_rv, f_vr, f_vv, dt }
    }

    /// Applies the transition to a position/velocity pair.
    pub fn apply(&self, r: Vec3<T>, v: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
        (self.f_rr * r + self.f_rv * v, self.f_vr * r + self.f_vv * v)
    }

    /// Full 6×6 state transition matrix `[[F_rr, F_rv], [F_vr, F_vv]]`.
    pub fn state_matrix(&self) -> [[T; 6]; 6] {
        let mut m = [[T::zero(); 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.f_rr.0[i][j];
                m[i][j + 3] = self.f_rv.0[i][j];
                m[i + 3][j] = self.f_vr.0[i][j];
                m[i + 3][j + 3] = self.f_vv.0[i][j];
            }
        }
        m
    }
}

/// Admissible flight-time window and conditioning limit for routines that
/// invert `F_rv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferGuard<T> {
    /// Smallest accepted flight time, s.
    pub min_dt: T,
    /// Flight times above `π/κ − end_margin` are rejected, s.
    pub end_margin: T,
    /// Largest accepted 1-norm condition estimate of `F_rv`.
    pub max_condition: T,
}

impl<T: Real> Default for TransferGuard<T> {
    fn default() -> Self {
        Self { min_dt: T::one(), end_margin: T::one(), max_condition: T::lit(1e12) }
    }
}

impl<T: Real> TransferGuard<T> {
    /// Only the condition estimate is enforced.
    pub fn condition_only() -> Self {
        Self { min_dt: T::zero(), end_margin: T::zero(), ..Self::default() }
    }
}

/// CW dynamics for a fixed target orbit plus the inversion guard.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CwModel<T> {
    pub orbit: OrbitParams<T>,
    pub guard: TransferGuard<T>,
}

impl<T: Real> CwModel<T> {
    pub fn new(orbit: OrbitParams<T>) -> Self {
        Self { orbit, guard: TransferGuard::default() }
    }

    pub fn with_guard(mut self, guard: TransferGuard<T>) -> Self {
        self.guard = guard;
        self
    }

    pub fn kappa(&self) -> T {
        self.orbit.kappa
    }

    pub fn stm_blocks(&self, dt: T) -> Result<StmBlocks<T>> {
        self.orbit.check_flight_time(dt)?;
        Ok(StmBlocks::evaluate(self.orbit.kappa, dt))
    }

    pub fn propagate(&self, state: &RelState<T>, dt: T) -> Result<RelState<T>> {
        let (r, v) = self.stm_blocks(dt)?.apply(state.r, state.v);
        Ok(RelState { r, v, t: state.t + dt })
    }

    /// Smallest and largest flight times accepted by the guard.
    pub fn transfer_window(&self) -> (T, T) {
        (self.guard.min_dt, self.orbit.flight_time_limit() - self.guard.end_margin)
    }

    /// Checks `dt` against the guard and returns the blocks at `dt`
    /// together with `F_rv⁻¹(dt)`.
    fn invertible_blocks(&self, dt: T) -> Result<(StmBlocks<T>, Mat3<T>)> {
        let blocks = self.stm_blocks(dt)?;
        let (lo, hi) = self.transfer_window();
        let singular = |condition: T| Error::SingularTransfer { dt: dt.as_f64(), condition: condition.as_f64() };
        let Some((inv, cond)) = blocks.f_rv.inverse_with_condition() else {
            return Err(singular(T::infinity()));
        };
        if dt < lo || dt > hi || cond >= self.guard.max_condition {
            return Err(singular(cond));
        }
        Ok((blocks, inv))
    }

    /// Impulse at `r_i` that carries the chaser to `r_j` after `dt`, given
    /// the pre-impulse velocity `v_i_minus`.
    pub fn impulse_for_transfer(&self, r_i: Vec3<T>, r_j: Vec3<T>, v_i_minus: Vec3<T>, dt: T) -> Result<Vec3<T>> {
        let (blocks, inv) = self.invertible_blocks(dt)?;
        Ok(inv * (r_j - blocks.f_rr * r_i) - v_i_minus)
    }

    /// Two-point transfer matrices `(F1, F2)` so that the position at time
    /// `t` on the leg of duration `dt_total` is `F1·r_i + F2·r_j`.
    pub fn two_point_matrices(&self, t: T, dt_total: T) -> Result<(Mat3<T>, Mat3<T>)> {
        let (total, inv) = self.invertible_blocks(dt_total)?;
        if !(t >= T::zero() && t <= dt_total) {
            return Err(Error::InvalidValue(format!("time {t} s outside the leg [0, {dt_total}] s")));
        }
        let at = StmBlocks::evaluate(self.orbit.kappa, t);
        let f2 = at.f_rv * inv;
        let f1 = at.f_rr.sub(&(f2 * total.f_rr));
        Ok((f1, f2))
    }

    /// Position at `t` on the unique two-impulse path from `r_i` to `r_j`
    /// with flight time `dt_total`.
    pub fn trajectory_position(&self, r_i: Vec3<T>, r_j: Vec3<T>, dt_total: T, t: T) -> Result<Vec3<T>> {
        let (f1, f2) = self.two_point_matrices(t, dt_total)?;
        Ok(f1 * r_i + f2 * r_j)
    }

    /// Solves the leg `r_i → r_j` in `dt` starting at epoch zero.
    pub fn transfer_leg(&self, r_i: Vec3<T>, r_j: Vec3<T>, v_i_minus: Vec3<T>, dt: T) -> Result<TransferLeg<T>> {
        self.transfer_leg_at(r_i, r_j, v_i_minus, dt, T::zero())
    }

    /// Solves the leg `r_i → r_j` in `dt` with the first impulse at epoch `t0`.
    pub fn transfer_leg_at(
        &self,
        r_i: Vec3<T>,
        r_j: Vec3<T>,
        v_i_minus: Vec3<T>,
        dt: T,
        t0: T,
    ) -> Result<TransferLeg<T>> {
        if !(r_i.is_finite() && r_j.is_finite() && v_i_minus.is_finite()) {
            return Err(Error::InvalidValue("leg endpoints and velocity must be finite".into()));
        }
        let (blocks, inv) = self.invertible_blocks(dt)?;
        let v_plus = inv * (r_j - blocks.f_rr * r_i);
        Ok(TransferLeg { r_i, r_j, v_i_minus, dt, dv: v_plus - v_i_minus, v_plus, kappa: self.orbit.kappa, t0 })
    }

    /// Evaluates `leg` at `n_samples` uniformly spaced times including both ends.
    pub fn sample_trajectory(&self, leg: &TransferLeg<T>, n_samples: usize) -> Result<Trajectory<T>> {
        leg.sample(n_samples)
    }
}

/// One two-impulse leg with its solved departure impulse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferLeg<T> {
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    v_i_minus: Vec3<T>,
    dt: T,
    dv: Vec3<T>,
    v_plus: Vec3<T>,
    kappa: T,
    t0: T,
}

impl<T: Real> TransferLeg<T> {
    pub fn r_i(&self) -> Vec3<T> {
        self.r_i
    }

    pub fn r_j(&self) -> Vec3<T> {
        self.r_j
    }

    pub fn v_i_minus(&self) -> Vec3<T> {
        self.v_i_minus
    }

    /// Flight time, s.
    pub fn dt(&self) -> T {
        self.dt
    }

    /// Departure impulse, km/s.
    pub fn dv(&self) -> Vec3<T> {
        self.dv
    }

    /// Post-impulse departure velocity.
    pub fn departure_velocity(&self) -> Vec3<T> {
        self.v_plus
    }

    /// Epoch of the departure impulse.
    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// Position `t` seconds after departure.
    pub fn position_at(&self, t: T) -> Vec3<T> {
        let b = StmBlocks::evaluate(self.kappa, t);
        b.f_rr * self.r_i + b.f_rv * self.v_plus
    }

    /// Velocity `t` seconds after departure (before any arrival impulse).
    pub fn velocity_at(&self, t: T) -> Vec3<T> {
        let b = StmBlocks::evaluate(self.kappa, t);
        b.f_vr * self.r_i + b.f_vv * self.v_plus
    }

    /// Velocity on arrival at `r_j`, before the next impulse.
    pub fn arrival_velocity(&self) -> Vec3<T> {
        self.velocity_at(self.dt)
    }

    pub fn sample(&self, n_samples: usize) -> Result<Trajectory<T>> {
        if n_samples < 2 {
            return Err(Error::InvalidValue(format!("need at least 2 samples, got {n_samples}")));
        }
        let last = n_samples - 1;
        let samples = (0..n_samples)
            .map(|k| {
                let t = if k == last { self.dt } else { self.dt * T::from_count(k) / T::from_count(last) };
                (self.t0 + t, self.position_at(t))
            })
            .collect();
        Ok(Trajectory { samples, leg: *self })
    }
}

/// Sampled positions along a transfer leg, times measured from mission start.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<(T, Vec3<T>)>,
    pub leg: TransferLeg<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn max_norm(&self) -> T {
        self.samples.iter().map(|(_, r)| r.norm()).fold(T::zero(), T::max)
    }

    pub fn min_norm(&self) -> T {
        self.samples.iter().map(|(_, r)| r.norm()).fold(T::infinity(), T::min)
    }

    /// Largest gap between consecutive sample times.
    pub fn max_spacing(&self) -> T {
        self.samples.windows(2).map(|w| w[1].0 - w[0].0).fold(T::zero(), T::max)
    }
}
