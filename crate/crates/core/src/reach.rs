//! Reachable sets of two-impulse legs with fixed endpoints.
//!
//! For endpoints `r_i`, `r_j` every admissible pair (elapsed time `t`, flight
//! time `dt`) with `0 ≤ t ≤ dt < π/κ` yields one position. Fixing `t` and
//! sweeping `dt` traces a reachable curve; the union over all `t` is a
//! surface that contains every trajectory between the endpoints. The map is
//! injective, which makes a reached position determine `(t, dt)` uniquely and
//! lets boundary-only checks certify whole regions.

use rayon::prelude::*;

use crate::constraints::PathConstraint;
use crate::cw::{CwModel, StmBlocks, TransferLeg};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Positions reachable at a fixed elapsed time `t` over a grid of flight times.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachCurve<T> {
    pub r_i: Vec3<T>,
    pub r_j: Vec3<T>,
    pub t: T,
    /// `(dt, position)` pairs in grid order.
    pub samples: Vec<(T, Vec3<T>)>,
}

/// Evaluates the reachable curve at elapsed time `t` for each `dt` in `dt_grid`.
pub fn reach_curve<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    t: T,
    dt_grid: &[T],
) -> Result<ReachCurve<T>> {
    if !(t > T::zero()) {
        return Err(Error::BadGrid(format!("elapsed time must be positive, got {t}")));
    }
    if let Some(bad) = dt_grid.iter().find(|dt| !(**dt > t)) {
        return Err(Error::BadGrid(format!("flight time {bad} s does not exceed t = {t} s")));
    }
    let samples = dt_grid
        .iter()
        .map(|&dt| Ok((dt, model.trajectory_position(r_i, r_j, dt, t)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReachCurve { r_i, r_j, t, samples })
}

/// `n` flight times spread uniformly over `(t, π/κ − end_margin]`, clipped to
/// the guard window.
pub fn curve_dt_grid<T: Real>(model: &CwModel<T>, t: T, n: usize) -> Vec<T> {
    let (lo, hi) = model.transfer_window();
    let lo = lo.max(t);
    (1..=n).map(|k| lo + (hi - lo) * T::from_count(k) / T::from_count(n)).collect()
}

/// Sampled reachable surface: one trajectory column per flight time.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachSurface<T> {
    pub r_i: Vec3<T>,
    pub r_j: Vec3<T>,
    /// Flight times, ascending; first is the guard minimum, last is `π/κ − ε`.
    pub dt_values: Vec<T>,
    /// Number of elapsed-time samples per column, endpoints included.
    pub t_resolution: usize,
    /// `columns[k][m]` is `(t, position)` at `t = dt_k·m/(t_resolution−1)`.
    pub columns: Vec<Vec<(T, Vec3<T>)>>,
}

impl<T: Real> ReachSurface<T> {
    /// Every sample as `(dt, t, position)`, column by column.
    pub fn points(&self) -> impl Iterator<Item = (T, T, Vec3<T>)> + '_ {
        self.dt_values.iter().zip(&self.columns).flat_map(|(&dt, col)| col.iter().map(move |&(t, r)| (dt, t, r)))
    }

    /// Largest flight-time step between columns.
    pub fn dt_spacing(&self) -> T {
        self.dt_values.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max)
    }

    /// Largest elapsed-time step inside any column.
    pub fn t_spacing(&self) -> T {
        let last = self.dt_values.last().copied().unwrap_or_else(T::zero);
        last / T::from_count(self.t_resolution.max(2) - 1)
    }

    /// Restricts the surface to a fixed elapsed time: the reachable curve at
    /// `t`, from the columns with `dt > t`.
    pub fn curve_at<'a>(&'a self, model: &'a CwModel<T>, t: T) -> Result<ReachCurve<T>> {
        let grid: Vec<T> = self.dt_values.iter().copied().filter(|dt| *dt > t).collect();
        reach_curve(model, self.r_i, self.r_j, t, &grid)
    }
}

/// Samples the reachable surface on a `dt_res × t_res` grid spanning the
/// guard window `[min_dt, π/κ − end_margin]`.
pub fn reach_surface<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    t_res: usize,
    dt_res: usize,
) -> Result<ReachSurface<T>> {
    if t_res < 2 || dt_res < 2 {
        return Err(Error::BadGrid(format!("resolutions must be ≥ 2, got t_res = {t_res}, dt_res = {dt_res}")));
    }
    let (lo, hi) = model.transfer_window();
    let dt_values: Vec<T> = (0..dt_res)
        .map(|k| if k + 1 == dt_res { hi } else { lo + (hi - lo) * T::from_count(k) / T::from_count(dt_res - 1) })
        .collect();
    let columns = dt_values
        .par_iter()
        .map(|&dt| {
            let leg = model.transfer_leg(r_i, r_j, Vec3::zeros(), dt)?;
            Ok(leg.sample(t_res)?.samples)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReachSurface { r_i, r_j, dt_values, t_resolution: t_res, columns })
}

/// A located `(t, dt)` for a target position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionResult<T> {
    pub t: T,
    pub dt_total: T,
    /// `|r(t, dt_total) − target|`, km.
    pub residual: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Initial,
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inversion<T> {
    Root(InversionResult<T>),
    /// The target coincides with a leg endpoint, which every flight time
    /// reaches (at `t = 0` or `t = dt`), so there is no unique root.
    AmbiguousEndpoint(Endpoint),
}

/// Residual at or below which an inversion counts as a root, km.
pub const INVERSION_TOLERANCE: f64 = 1e-6;
const ENDPOINT_TOLERANCE: f64 = 1e-9;
const SEED_GRID: usize = 100;
const SEEDS_TRIED: usize = 8;
const MAX_ITERATIONS: usize = 200;

/// Residual `|r(s·dt, dt) − target|` over a grid of relative times `s ∈ [0, 1]`
/// and flight times spanning the guard window.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualField<T> {
    pub s_values: Vec<T>,
    pub dt_values: Vec<T>,
    /// `residuals[k][m]` for `dt_values[k]`, `s_values[m]`.
    pub residuals: Vec<Vec<T>>,
}

impl<T: Real> ResidualField<T> {
    pub fn new(model: &CwModel<T>, target: Vec3<T>, r_i: Vec3<T>, r_j: Vec3<T>, n_s: usize, n_dt: usize) -> Result<Self> {
        if n_s < 2 || n_dt < 2 {
            return Err(Error::BadGrid("residual grid needs at least 2×2 nodes".into()));
        }
        let (lo, hi) = model.transfer_window();
        let s_values: Vec<T> = (0..n_s).map(|m| T::from_count(m) / T::from_count(n_s - 1)).collect();
        let dt_values: Vec<T> = (0..n_dt)
            .map(|k| if k + 1 == n_dt { hi } else { lo + (hi - lo) * T::from_count(k) / T::from_count(n_dt - 1) })
            .collect();
        let residuals = dt_values
            .par_iter()
            .map(|&dt| {
                let leg = model.transfer_leg(r_i, r_j, Vec3::zeros(), dt)?;
                Ok(s_values.iter().map(|&s| (leg.position_at(s * dt) - target).norm()).collect())
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        Ok(Self { s_values, dt_values, residuals })
    }

    /// Grid nodes ordered by increasing residual.
    pub fn ranked_nodes(&self) -> Vec<(usize, usize)> {
        let mut nodes: Vec<(usize, usize)> =
            (0..self.dt_values.len()).flat_map(|k| (0..self.s_values.len()).map(move |m| (k, m))).collect();
        nodes.sort_by(|a, b| {
            self.residuals[a.0][a.1].partial_cmp(&self.residuals[b.0][b.1]).unwrap_or(std::cmp::Ordering::Equal)
        });
        nodes
    }

    /// Number of 4-connected components of the nodes with residual below `threshold`.
    pub fn basins_below(&self, threshold: T) -> usize {
        let (nk, nm) = (self.dt_values.len(), self.s_values.len());
        let mut seen = vec![vec![false; nm]; nk];
        let mut basins = 0;
        for k0 in 0..nk {
            for m0 in 0..nm {
                if seen[k0][m0] || !(self.residuals[k0][m0] < threshold) {
                    continue;
                }
                basins += 1;
                let mut stack = vec![(k0, m0)];
                seen[k0][m0] = true;
                while let Some((k, m)) = stack.pop() {
                    let mut push = |k: usize, m: usize| {
                        if !seen[k][m] && self.residuals[k][m] < threshold {
                            seen[k][m] = true;
                            stack.push((k, m));
                        }
                    };
                    if k > 0 {
                        push(k - 1, m);
                    }
                    if k + 1 < nk {
                        push(k + 1, m);
                    }
                    if m > 0 {
                        push(k, m - 1);
                    }
                    if m + 1 < nm {
                        push(k, m + 1);
                    }
                }
            }
        }
        basins
    }
}

/// Finds the unique `(t, dt)` at which the leg `r_i → r_j` passes through `target`.
///
/// A 100×100 residual grid seeds a damped Gauss-Newton iteration on the
/// analytic Jacobian `[∂r/∂t, ∂r/∂dt]`, with the flight time clipped to the
/// guard window.
pub fn invert_reach<T: Real>(model: &CwModel<T>, target: Vec3<T>, r_i: Vec3<T>, r_j: Vec3<T>) -> Result<Inversion<T>> {
    if !target.is_finite() {
        return Err(Error::InvalidValue("target must be finite".into()));
    }
    let tol = T::lit(ENDPOINT_TOLERANCE);
    if target.distance(&r_i) <= tol {
        return Ok(Inversion::AmbiguousEndpoint(Endpoint::Initial));
    }
    if target.distance(&r_j) <= tol {
        return Ok(Inversion::AmbiguousEndpoint(Endpoint::Final));
    }

    let field = ResidualField::new(model, target, r_i, r_j, SEED_GRID, SEED_GRID)?;
    let mut best: Option<InversionResult<T>> = None;
    for (k, m) in field.ranked_nodes().into_iter().take(SEEDS_TRIED) {
        let dt0 = field.dt_values[k];
        let seed = (field.s_values[m] * dt0, dt0);
        let found = refine(model, target, r_i, r_j, seed)?;
        if best.is_none_or(|b| found.residual < b.residual) {
            best = Some(found);
        }
        if found.residual < T::lit(INVERSION_TOLERANCE) {
            break;
        }
    }
    let best = best.expect("seed grid is nonempty");
    if best.residual < T::lit(INVERSION_TOLERANCE) {
        Ok(Inversion::Root(best))
    } else {
        Err(Error::Unreachable { residual: best.residual.as_f64() })
    }
}

/// Position and Jacobian columns `∂r/∂t`, `∂r/∂dt` at `(t, dt)`.
fn position_and_jacobian<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    t: T,
    dt: T,
) -> Result<(Vec3<T>, Vec3<T>, Vec3<T>)> {
    let leg: TransferLeg<T> = model.transfer_leg(r_i, r_j, Vec3::zeros(), dt)?;
    let at = StmBlocks::evaluate(model.kappa(), t);
    let end = StmBlocks::evaluate(model.kappa(), dt);
    let v_plus = leg.departure_velocity();
    let r = at.f_rr * r_i + at.f_rv * v_plus;
    let d_t = at.f_vr * r_i + at.f_vv * v_plus;
    // F_rr(dt)·r_i + F_rv(dt)·v⁺ = r_j  ⇒  F_rv(dt)·∂v⁺/∂dt = −(arrival velocity)
    let (inv, _) = end.f_rv.inverse_with_condition().ok_or(Error::SingularTransfer {
        dt: dt.as_f64(),
        condition: f64::INFINITY,
    })?;
    let dv_plus = -(inv * leg.arrival_velocity());
    let d_dt = at.f_rv * dv_plus;
    Ok((r, d_t, d_dt))
}

fn refine<T: Real>(
    model: &CwModel<T>,
    target: Vec3<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    seed: (T, T),
) -> Result<InversionResult<T>> {
    let (lo, hi) = model.transfer_window();
    let clamp = |t: T, dt: T| {
        let dt = dt.max(lo).min(hi);
        (t.max(T::zero()).min(dt), dt)
    };
    let (mut t, mut dt) = clamp(seed.0, seed.1);
    let (mut r, mut jt, mut jd) = position_and_jacobian(model, r_i, r_j, t, dt)?;
    let mut res = r - target;
    let mut cost = res.norm();
    let mut damping = T::lit(1e-3);
    let floor = T::lit(1e-13) * (T::one() + target.norm());

    for _ in 0..MAX_ITERATIONS {
        if cost <= floor {
            break;
        }
        // Levenberg-Marquardt on the 2×2 normal equations
        let a11 = jt.dot(&jt);
        let a12 = jt.dot(&jd);
        let a22 = jd.dot(&jd);
        let g1 = jt.dot(&res);
        let g2 = jd.dot(&res);
        let mut improved = false;
        for _ in 0..30 {
            let b11 = a11 * (T::one() + damping);
            let b22 = a22 * (T::one() + damping);
            let det = b11 * b22 - a12 * a12;
            if !(det.abs() > T::zero()) {
                damping = damping * T::lit(10.0);
                continue;
            }
            let step_t = -(b22 * g1 - a12 * g2) / det;
            let step_dt = -(b11 * g2 - a12 * g1) / det;
            let (nt, ndt) = clamp(t + step_t, dt + step_dt);
            let (nr, njt, njd) = position_and_jacobian(model, r_i, r_j, nt, ndt)?;
            let nres = nr - target;
            let ncost = nres.norm();
            if ncost < cost {
                let moved = (nt - t).abs() + (ndt - dt).abs();
                t = nt;
                dt = ndt;
                r = nr;
                jt = njt;
                jd = njd;
                res = nres;
                cost = ncost;
                damping = (damping * T::lit(0.3)).max(T::lit(1e-12));
                improved = moved > T::zero();
                break;
            }
            damping = damping * T::lit(10.0);
        }
        if !improved {
            break;
        }
    }
    let _ = r;
    Ok(InversionResult { t, dt_total: dt, residual: cost })
}

/// Outcome of checking the sampled reachable surface against a constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClearanceReport<T> {
    /// No in-window surface sample violates the constraint.
    pub clear: bool,
    /// `clear` and the witness is admissible: every flight time satisfies the
    /// constraint, up to the sampling resolution below.
    pub certified: bool,
    /// In-window samples inside the inner sphere.
    pub inner_crossings: usize,
    /// In-window samples outside the outer sphere.
    pub outer_crossings: usize,
    /// Smallest distance from an in-window sample to either boundary sphere, km.
    pub min_boundary_distance: T,
    /// Smallest signed margin over in-window samples, km.
    pub min_margin: T,
    /// First violating sample as `(dt, t, position)`.
    pub first_crossing: Option<(T, T, Vec3<T>)>,
    pub dt_spacing: T,
    pub t_spacing: T,
}

/// Resolution of the surface used by [`boundary_clearance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurfaceGrid {
    pub t_res: usize,
    pub dt_res: usize,
}

impl Default for SurfaceGrid {
    fn default() -> Self {
        Self { t_res: 200, dt_res: 200 }
    }
}

/// Checks whether the reachable surface of `r_i → r_j` meets either boundary
/// sphere of `constraint` inside its window. When it does not and the witness
/// (by default `r_i`, reached at `t = 0`) is admissible, the surface cannot
/// enter the forbidden region at all.
pub fn boundary_clearance<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    constraint: &PathConstraint<T>,
    grid: SurfaceGrid,
    witness: Option<Vec3<T>>,
) -> Result<ClearanceReport<T>> {
    let witness = witness.unwrap_or(r_i);
    if !constraint.admits(witness) {
        return Err(Error::NoWitness);
    }
    let surface = reach_surface(model, r_i, r_j, grid.t_res, grid.dt_res)?;
    let window = constraint.window();
    let center = constraint.center();
    let mut inner = 0;
    let mut outer = 0;
    let mut min_boundary = T::infinity();
    let mut min_margin = T::infinity();
    let mut first = None;
    for (dt, t, r) in surface.points() {
        if !window.contains(t) {
            continue;
        }
        let d = r.distance(&center);
        min_boundary = min_boundary.min((d - constraint.rho_inner()).abs());
        if constraint.rho_outer().is_finite() {
            min_boundary = min_boundary.min((constraint.rho_outer() - d).abs());
        }
        let m = constraint.margin(r);
        min_margin = min_margin.min(m);
        if m < T::zero() {
            if d < constraint.rho_inner() {
                inner += 1;
            } else {
                outer += 1;
            }
            if first.is_none() {
                first = Some((dt, t, r));
            }
        }
    }
    let clear = inner == 0 && outer == 0;
    Ok(ClearanceReport {
        clear,
        certified: clear,
        inner_crossings: inner,
        outer_crossings: outer,
        min_boundary_distance: min_boundary,
        min_margin,
        first_crossing: first,
        dt_spacing: surface.dt_spacing(),
        t_spacing: surface.t_spacing(),
    })
}

/// Which flight-time range a witness certifies as constraint-satisfying.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertifiedRange {
    /// Flight times in `[dt_a, dt_b]` are clear.
    Inside,
    /// Flight times in `[min_dt, dt_a] ∪ [dt_b, π/κ − ε]` are clear.
    Outside,
    /// No violating flight time was found to act as a witness.
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExclusionReport<T> {
    pub dt_a: T,
    pub dt_b: T,
    /// Flight time of a trajectory that violates the constraint.
    pub witness_dt: Option<T>,
    pub certified: CertifiedRange,
}

impl<T: Real> ExclusionReport<T> {
    /// Whether the report certifies flight time `dt` as clear.
    pub fn certifies(&self, dt: T) -> bool {
        let inside = dt >= self.dt_a && dt <= self.dt_b;
        match self.certified {
            CertifiedRange::Inside => inside,
            CertifiedRange::Outside => !inside,
            CertifiedRange::Undetermined => false,
        }
    }
}

/// Sampling used when checking individual trajectories for exclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExclusionSampling {
    /// Samples per trajectory.
    pub trajectory_samples: usize,
    /// Flight times scanned for a witness.
    pub witness_scan: usize,
}

impl Default for ExclusionSampling {
    fn default() -> Self {
        Self { trajectory_samples: 400, witness_scan: 400 }
    }
}

fn leg_violates<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    constraint: &PathConstraint<T>,
    dt: T,
    samples: usize,
) -> Result<bool> {
    let traj = model.transfer_leg(r_i, r_j, Vec3::zeros(), dt)?.sample(samples)?;
    Ok(traj.samples.iter().any(|&(t, r)| !constraint.check_point(t, r)))
}

/// Classifies flight times around the clear boundary trajectories `dt_a`,
/// `dt_b`, using the first violating flight time found by a scan as witness.
pub fn time_window_exclusion<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    constraint: &PathConstraint<T>,
    dt_a: T,
    dt_b: T,
    sampling: ExclusionSampling,
) -> Result<ExclusionReport<T>> {
    check_boundaries(model, r_i, r_j, constraint, dt_a, dt_b, sampling)?;
    let (lo, hi) = model.transfer_window();
    let n = sampling.witness_scan.max(2);
    let scan: Vec<T> = (0..n).map(|k| lo + (hi - lo) * T::from_count(k) / T::from_count(n - 1)).collect();
    let hits = scan
        .par_iter()
        .map(|&dt| leg_violates(model, r_i, r_j, constraint, dt, sampling.trajectory_samples))
        .collect::<Result<Vec<bool>>>()?;
    let witness = scan.iter().zip(hits).find(|(_, hit)| *hit).map(|(dt, _)| *dt);
    Ok(classify(dt_a, dt_b, witness))
}

/// As [`time_window_exclusion`] with a caller-supplied witness flight time,
/// which must produce a violating trajectory.
pub fn time_window_exclusion_with_witness<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    constraint: &PathConstraint<T>,
    dt_a: T,
    dt_b: T,
    witness_dt: T,
    sampling: ExclusionSampling,
) -> Result<ExclusionReport<T>> {
    check_boundaries(model, r_i, r_j, constraint, dt_a, dt_b, sampling)?;
    if !leg_violates(model, r_i, r_j, constraint, witness_dt, sampling.trajectory_samples)? {
        return Err(Error::NoWitness);
    }
    Ok(classify(dt_a, dt_b, Some(witness_dt)))
}

fn check_boundaries<T: Real>(
    model: &CwModel<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    constraint: &PathConstraint<T>,
    dt_a: T,
    dt_b: T,
    sampling: ExclusionSampling,
) -> Result<()> {
    if !(dt_a < dt_b) {
        return Err(Error::BadGrid(format!("need dt_a < dt_b, got {dt_a} and {dt_b}")));
    }
    for dt in [dt_a, dt_b] {
        if leg_violates(model, r_i, r_j, constraint, dt, sampling.trajectory_samples)? {
            return Err(Error::BoundaryNotClear { dt: dt.as_f64() });
        }
    }
    Ok(())
}

fn classify<T: Real>(dt_a: T, dt_b: T, witness: Option<T>) -> ExclusionReport<T> {
    let certified = match witness {
        Some(w) if w >= dt_a && w <= dt_b => CertifiedRange::Outside,
        Some(_) => CertifiedRange::Inside,
        None => CertifiedRange::Undetermined,
    };
    ExclusionReport { dt_a, dt_b, witness_dt: witness, certified }
}
