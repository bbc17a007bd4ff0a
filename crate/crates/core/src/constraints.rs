//! Spherical-shell path constraints active over a time window.
//!
//! A constraint requires `ρ′ ≤ |r − r̃| ≤ ρ″` while the mission clock is
//! inside its window. Windows are open intervals `(0, t_end)` measured from
//! mission start, so the boundary instants are exempt. An infinite `ρ″` gives
//! a keep-out sphere; `ρ′ = ρ″ = 0` on a single instant pins the position.

use crate::cw::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Position tolerance (km) for equality constraints.
pub const POINT_TOLERANCE: f64 = 1e-9;
/// Time tolerance (s) when matching a sample to an instant window.
pub const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeWindow<T> {
    /// Active for `0 < t < end`; `end` may be infinite.
    Open { end: T },
    /// Active only at the instant `at`.
    Instant { at: T },
}

impl<T: Real> TimeWindow<T> {
    pub fn contains(&self, t: T) -> bool {
        match *self {
            TimeWindow::Open { end } => t > T::zero() && t < end,
            TimeWindow::Instant { at } => (t - at).abs() <= T::lit(TIME_TOLERANCE),
        }
    }

    pub fn end(&self) -> T {
        match *self {
            TimeWindow::Open { end } => end,
            TimeWindow::Instant { at } => at,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Shell,
    KeepOut,
    Equality,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathConstraint<T> {
    center: Vec3<T>,
    rho_inner: T,
    rho_outer: T,
    window: TimeWindow<T>,
}

impl<T: Real> PathConstraint<T> {
    pub fn new(center: Vec3<T>, rho_inner: T, rho_outer: T, window: TimeWindow<T>) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidConstraint("center must be finite".into()));
        }
        if !(rho_inner >= T::zero() && rho_inner.is_finite()) {
            return Err(Error::InvalidConstraint(format!("inner radius must be finite and ≥ 0, got {rho_inner}")));
        }
        if !(rho_outer >= rho_inner) {
            return Err(Error::InvalidConstraint(format!(
                "outer radius {rho_outer} must not be below inner radius {rho_inner}"
            )));
        }
        match window {
            TimeWindow::Open { end } if !(end > T::zero()) => {
                return Err(Error::InvalidConstraint(format!("window end must be positive, got {end}")));
            }
            TimeWindow::Instant { at } if !(at >= T::zero() && at.is_finite()) => {
                return Err(Error::InvalidConstraint(format!("instant must be finite and ≥ 0, got {at}")));
            }
            _ => {}
        }
        Ok(Self { center, rho_inner, rho_outer, window })
    }

    /// Keep the position between two concentric spheres for `0 < t < t_end`.
    pub fn shell(center: Vec3<T>, rho_inner: T, rho_outer: T, t_end: T) -> Result<Self> {
        Self::new(center, rho_inner, rho_outer, TimeWindow::Open { end: t_end })
    }

    /// Stay at least `radius` away from `center` for `0 < t < t_end`.
    pub fn keep_out(center: Vec3<T>, radius: T, t_end: T) -> Result<Self> {
        Self::new(center, radius, T::infinity(), TimeWindow::Open { end: t_end })
    }

    /// Be exactly at `point` at time `at`.
    pub fn equality(point: Vec3<T>, at: T) -> Result<Self> {
        Self::new(point, T::zero(), T::zero(), TimeWindow::Instant { at })
    }

    pub fn center(&self) -> Vec3<T> {
        self.center
    }

    pub fn rho_inner(&self) -> T {
        self.rho_inner
    }

    pub fn rho_outer(&self) -> T {
        self.rho_outer
    }

    pub fn window(&self) -> TimeWindow<T> {
        self.window
    }

    pub fn kind(&self) -> ConstraintKind {
        match self.window {
            TimeWindow::Instant { .. } if self.rho_inner == T::zero() && self.rho_outer == T::zero() => {
                ConstraintKind::Equality
            }
            _ if self.rho_outer.is_infinite() => ConstraintKind::KeepOut,
            _ => ConstraintKind::Shell,
        }
    }

    /// Signed slack of a position: positive inside the admissible shell,
    /// negative by the penetration depth outside it.
    pub fn margin(&self, r: Vec3<T>) -> T {
        let d = r.distance(&self.center);
        let m = (d - self.rho_inner).min(self.rho_outer - d);
        if matches!(self.window, TimeWindow::Instant { .. }) && m < T::zero() && m >= -T::lit(POINT_TOLERANCE) {
            T::zero()
        } else {
            m
        }
    }

    /// Whether the position lies in the admissible shell, ignoring time.
    pub fn admits(&self, r: Vec3<T>) -> bool {
        self.margin(r) >= T::zero()
    }

    /// `true` when `t` is outside the window or `r` is admissible.
    pub fn check_point(&self, t: T, r: Vec3<T>) -> bool {
        !self.window.contains(t) || self.admits(r)
    }

    /// Checks sampled `(t, r)` pairs whose spacing inside the window must not
    /// exceed `max_spacing`.
    pub fn check_samples(&self, samples: &[(T, Vec3<T>)], max_spacing: T) -> Result<ConstraintVerdict<T>> {
        let slack = T::lit(1e-9) * max_spacing.max(T::one());
        for w in samples.windows(2) {
            let (a, b) = (w[0].0, w[1].0);
            let overlaps = match self.window {
                TimeWindow::Open { end } => b > T::zero() && a < end,
                TimeWindow::Instant { at } => a <= at && at <= b,
            };
            if overlaps && b - a > max_spacing + slack {
                return Err(Error::InsufficientSampling { spacing: (b - a).as_f64(), resolution: max_spacing.as_f64() });
            }
        }
        if let (TimeWindow::Instant { at }, Some(first), Some(last)) = (self.window, samples.first(), samples.last()) {
            let in_span = at >= first.0 - T::lit(TIME_TOLERANCE) && at <= last.0 + T::lit(TIME_TOLERANCE);
            if in_span && !samples.iter().any(|(t, _)| self.window.contains(*t)) {
                return Err(Error::InsufficientSampling { spacing: f64::INFINITY, resolution: TIME_TOLERANCE });
            }
        }

        let mut min_margin = T::infinity();
        let mut first_violation = None;
        for &(t, r) in samples {
            if !self.window.contains(t) {
                continue;
            }
            let m = self.margin(r);
            min_margin = min_margin.min(m);
            if m < T::zero() && first_violation.is_none() {
                first_violation = Some(Violation { t, r, distance: r.distance(&self.center) });
            }
        }
        Ok(ConstraintVerdict { satisfied: first_violation.is_none(), first_violation, min_margin })
    }

    pub fn check_trajectory(&self, trajectory: &Trajectory<T>, max_spacing: T) -> Result<ConstraintVerdict<T>> {
        self.check_samples(&trajectory.samples, max_spacing)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation<T> {
    pub t: T,
    pub r: Vec3<T>,
    /// Distance from the constraint center, km.
    pub distance: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintVerdict<T> {
    pub satisfied: bool,
    pub first_violation: Option<Violation<T>>,
    /// Smallest signed margin over in-window samples; `+∞` when none are in window.
    pub min_margin: T,
}
