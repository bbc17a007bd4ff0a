//! Circular formation keeping: grid searches for impulse angles and times
//! whose legs stay inside a ring around the target.

use rayon::prelude::*;

use crate::constraints::PathConstraint;
use crate::cw::{CwModel, OrbitParams, Trajectory, TransferGuard, TransferLeg};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CfkScenario<T> {
    pub orbit: OrbitParams<T>,
    pub rho_inner: T,
    pub rho_outer: T,
    /// Polar angles of the intermediate impulse, degrees.
    pub beta_grid: Vec<T>,
    /// Candidate flight times, s.
    pub time_grid: Vec<T>,
    /// 2 for the two-impulse map, 3 for the return-to-start map.
    pub n_impulses: usize,
    /// Largest time step between trajectory samples, s.
    pub sample_spacing: T,
    pub min_samples: usize,
    /// Largest polar-angle gap, degrees, for a tour to count as visiting every angle.
    pub coverage_gap_deg: T,
    pub guard: TransferGuard<T>,
}

impl<T: Real> CfkScenario<T> {
    /// Integer-degree angles in `[0, 360)` at `beta_step_deg`, and flight times
    /// `time_step, 2·time_step, …` up to the guard limit `π/κ − 1 s`.
    pub fn regular(
        orbit: OrbitParams<T>,
        rho_inner: T,
        rho_outer: T,
        beta_step_deg: T,
        time_step: T,
        n_impulses: usize,
    ) -> Result<Self> {
        if !(beta_step_deg > T::zero()) || !(time_step > T::zero()) {
            return Err(Error::InvalidScenario("grid steps must be positive".into()));
        }
        let guard = TransferGuard::default();
        let model = CwModel::new(orbit).with_guard(guard);
        let (lo, hi) = model.transfer_window();
        let beta_count = (T::lit(360.0) / beta_step_deg).ceil().to_usize().unwrap_or(0);
        let beta_grid: Vec<T> = (0..beta_count)
            .map(|k| beta_step_deg * T::from_count(k))
            .filter(|b| *b < T::lit(360.0))
            .collect();
        let mut time_grid = Vec::new();
        let mut k = 1;
        loop {
            let t = time_step * T::from_count(k);
            if t > hi {
                break;
            }
            if t >= lo {
                time_grid.push(t);
            }
            k += 1;
        }
        let scenario = Self {
            orbit,
            rho_inner,
            rho_outer,
            beta_grid,
            time_grid,
            n_impulses,
            sample_spacing: time_step,
            min_samples: 200,
            coverage_gap_deg: T::lit(5.0),
            guard,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_inner < T::one() && T::one() < self.rho_outer) {
            return Err(Error::InvalidScenario(format!(
                "ring must straddle the unit impulse circle, got [{}, {}]",
                self.rho_inner, self.rho_outer
            )));
        }
        if !(self.rho_inner >= T::zero()) {
            return Err(Error::InvalidScenario("inner radius must be ≥ 0".into()));
        }
        if self.n_impulses != 2 && self.n_impulses != 3 {
            return Err(Error::InvalidScenario(format!("n_impulses must be 2 or 3, got {}", self.n_impulses)));
        }
        if self.beta_grid.is_empty() || self.time_grid.is_empty() {
            return Err(Error::InvalidScenario("angle and time grids must be nonempty".into()));
        }
        if self.time_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidScenario("time grid must be strictly increasing".into()));
        }
        if self.beta_grid.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidScenario("angles must be finite".into()));
        }
        let (lo, hi) = self.model().transfer_window();
        if let Some(t) = self.time_grid.iter().find(|t| **t < lo || **t > hi) {
            return Err(Error::InvalidScenario(format!("flight time {t} s outside [{lo}, {hi}] s")));
        }
        if !(self.sample_spacing > T::zero()) || self.min_samples < 2 {
            return Err(Error::InvalidScenario("sampling must have positive spacing and ≥ 2 samples".into()));
        }
        if !(self.coverage_gap_deg > T::zero()) {
            return Err(Error::InvalidScenario("coverage gap must be positive".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> CwModel<T> {
        CwModel::new(self.orbit).with_guard(self.guard)
    }

    /// The ring constraint, active for the whole mission.
    pub fn ring(&self) -> Result<PathConstraint<T>> {
        PathConstraint::shell(Vec3::zeros(), self.rho_inner, self.rho_outer, T::infinity())
    }

    /// Samples per leg: `max(min_samples, dt/sample_spacing + 1)`.
    pub fn samples_for(&self, dt: T) -> usize {
        let dense = (dt / self.sample_spacing).ceil().to_usize().unwrap_or(0) + 1;
        dense.max(self.min_samples)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellVerdict {
    Feasible,
    /// Feasible three-impulse tour whose trajectory visits every polar angle.
    FeasibleFullCoverage,
    /// Feasible three-impulse tour that leaves a polar-angle gap.
    FeasiblePartialCoverage,
    Infeasible,
    /// The intermediate angle is reachable, but no flight time returns to the start.
    Unreachable2Imp,
    /// The intermediate angle cannot be reached from the start at any flight time.
    Unreachable2And3Imp,
}

impl CellVerdict {
    pub fn is_feasible(self) -> bool {
        matches!(self, Self::Feasible | Self::FeasibleFullCoverage | Self::FeasiblePartialCoverage)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Feasible => "feasible",
            Self::FeasibleFullCoverage => "feasible_full",
            Self::FeasiblePartialCoverage => "feasible_partial",
            Self::Infeasible => "infeasible",
            Self::Unreachable2Imp => "unreachable_2imp",
            Self::Unreachable2And3Imp => "unreachable_2and3imp",
        }
    }
}

/// Per-cell verdicts on a (β, time) grid, with a witness tour for every feasible cell.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityMap<T> {
    pub n_impulses: usize,
    pub beta_values: Vec<T>,
    /// Second-impulse time `t₂` (two impulses) or return flight time `Δt₃₂` (three).
    pub t_values: Vec<T>,
    /// `cells[i][j]` for `beta_values[i]`, `t_values[j]`.
    pub cells: Vec<Vec<CellVerdict>>,
    /// Legs of the witness tour, in flight order, for feasible cells.
    pub witnesses: Vec<Vec<Option<Vec<TransferLeg<T>>>>>,
}

impl<T: Real> FeasibilityMap<T> {
    pub fn count(&self, verdict: CellVerdict) -> usize {
        self.cells.iter().flatten().filter(|v| **v == verdict).count()
    }

    /// Cells in row-major order as `(β, t, verdict)`.
    pub fn iter(&self) -> impl Iterator<Item = (T, T, CellVerdict)> + '_ {
        self.cells.iter().enumerate().flat_map(move |(i, row)| {
            row.iter().enumerate().map(move |(j, v)| (self.beta_values[i], self.t_values[j], *v))
        })
    }

    /// Rows in which no cell is feasible.
    pub fn unreachable_rows(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| !self.cells[i].iter().any(|v| v.is_feasible())).collect()
    }

    /// Maximal runs of unreachable rows as inclusive index pairs, treating the
    /// angle axis as circular; a run may wrap (`start > end`).
    pub fn unreachable_bands(&self) -> Vec<(usize, usize)> {
        let n = self.cells.len();
        let flags: Vec<bool> = (0..n).map(|i| !self.cells[i].iter().any(|v| v.is_feasible())).collect();
        circular_runs(&flags)
    }

    /// Range of `t_values` over cells carrying `verdict`.
    pub fn t_extent(&self, verdict: CellVerdict) -> Option<(T, T)> {
        let ts = self.iter().filter(|(_, _, v)| *v == verdict).map(|(_, t, _)| t);
        ts.fold(None, |acc, t| match acc {
            None => Some((t, t)),
            Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
        })
    }
}

fn circular_runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let n = flags.len();
    if n == 0 || !flags.iter().any(|f| *f) {
        return Vec::new();
    }
    if flags.iter().all(|f| *f) {
        return vec![(0, n - 1)];
    }
    let start = (0..n).find(|&i| !flags[i]).expect("some row is clear");
    let mut runs = Vec::new();
    let mut open: Option<usize> = None;
    for step in 1..=n {
        let i = (start + step) % n;
        match (flags[i], open) {
            (true, None) => open = Some(i),
            (false, Some(s)) => {
                runs.push((s, (i + n - 1) % n));
                open = None;
            }
            _ => {}
        }
    }
    runs
}

/// Polar-angle occupancy of a trajectory on one-degree bins, with the wrap
/// bits 360..368 mirroring bins 0..8.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AngleBins([u64; 6]);

impl AngleBins {
    fn of<T: Real>(traj: &Trajectory<T>) -> Self {
        let mut bits = [0u64; 6];
        for (_, r) in &traj.samples {
            let b = r.polar_angle_deg().as_f64().floor() as usize % 360;
            bits[b / 64] |= 1 << (b % 64);
            if b < 8 {
                let w = b + 360;
                bits[w / 64] |= 1 << (w % 64);
            }
        }
        Self(bits)
    }

    fn union(&self, other: &Self) -> Self {
        let mut bits = self.0;
        for (b, o) in bits.iter_mut().zip(other.0) {
            *b |= o;
        }
        Self(bits)
    }

    /// Whether some run of `len` consecutive bins (circularly) is empty.
    fn has_empty_run(&self, len: usize) -> bool {
        let mut empty = [0u64; 6];
        for (e, b) in empty.iter_mut().zip(self.0) {
            *e = !b;
        }
        empty[5] &= (1u64 << (368 - 320)) - 1;
        let mut acc = empty;
        for shift in 1..len {
            let shifted = shift_right(&empty, shift);
            for (a, s) in acc.iter_mut().zip(shifted) {
                *a &= s;
            }
        }
        // a run must start in 0..360 to count once
        acc[5] &= (1u64 << (360 - 320)) - 1;
        acc.iter().any(|w| *w != 0)
    }
}

fn shift_right(bits: &[u64; 6], shift: usize) -> [u64; 6] {
    let (words, rem) = (shift / 64, shift % 64);
    let word = |i: usize| if i < 6 { bits[i] } else { 0 };
    let mut out = [0u64; 6];
    for (i, o) in out.iter_mut().enumerate() {
        let lo = word(i + words) >> rem;
        let hi = if rem == 0 { 0 } else { word(i + words + 1) << (64 - rem) };
        *o = lo | hi;
    }
    out
}

/// Largest circular gap between sorted sampled polar angles, degrees.
pub fn max_polar_gap<T: Real>(trajectories: &[&Trajectory<T>]) -> T {
    let mut angles: Vec<T> = trajectories.iter().flat_map(|tr| tr.samples.iter().map(|(_, r)| r.polar_angle_deg())).collect();
    if angles.is_empty() {
        return T::lit(360.0);
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let wrap = angles[0] + T::lit(360.0) - angles[angles.len() - 1];
    angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, T::max)
}

#[derive(Clone, Debug)]
struct LegOutcome<T> {
    leg: Option<TransferLeg<T>>,
    feasible: bool,
    bins: AngleBins,
}

fn evaluate_leg<T: Real>(
    scenario: &CfkScenario<T>,
    model: &CwModel<T>,
    ring: &PathConstraint<T>,
    r_i: Vec3<T>,
    r_j: Vec3<T>,
    dt: T,
) -> LegOutcome<T> {
    let infeasible = LegOutcome { leg: None, feasible: false, bins: AngleBins([0; 6]) };
    let Ok(leg) = model.transfer_leg(r_i, r_j, Vec3::zeros(), dt) else {
        return infeasible;
    };
    let n = scenario.samples_for(dt);
    let Ok(traj) = leg.sample(n) else {
        return infeasible;
    };
    let spacing = dt / T::from_count(n - 1);
    match ring.check_trajectory(&traj, spacing) {
        Ok(verdict) if verdict.satisfied => LegOutcome { leg: Some(leg), feasible: true, bins: AngleBins::of(&traj) },
        _ => LegOutcome { leg: Some(leg), ..infeasible },
    }
}

/// Checks a leg at `samples_for(dt)` density; the witness recheck used by tests and the CLI.
pub fn leg_satisfies_ring<T: Real>(scenario: &CfkScenario<T>, leg: &TransferLeg<T>, density: usize) -> Result<bool> {
    let n = (scenario.samples_for(leg.dt()) - 1) * density.max(1) + 1;
    let traj = leg.sample(n)?;
    let spacing = leg.dt() / T::from_count(n - 1);
    Ok(scenario.ring()?.check_trajectory(&traj, spacing)?.satisfied)
}

/// For each intermediate angle `β₂` and second-impulse time `t₂`, whether the
/// leg from `β₁ = 0` stays in the ring. Rows with no feasible time are
/// marked unreachable by two impulses.
pub fn cfk_two_impulse_map<T: Real>(scenario: &CfkScenario<T>) -> Result<FeasibilityMap<T>> {
    scenario.validate()?;
    let model = scenario.model();
    let ring = scenario.ring()?;
    let start = Vec3::on_circle(T::one(), T::zero());
    let rows: Vec<Vec<LegOutcome<T>>> = scenario
        .beta_grid
        .par_iter()
        .map(|&beta| {
            let target = Vec3::on_circle(T::one(), beta);
            scenario.time_grid.iter().map(|&dt| evaluate_leg(scenario, &model, &ring, start, target, dt)).collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(rows.len());
    let mut witnesses = Vec::with_capacity(rows.len());
    for row in rows {
        let reachable = row.iter().any(|o| o.feasible);
        cells.push(
            row.iter()
                .map(|o| match (reachable, o.feasible) {
                    (false, _) => CellVerdict::Unreachable2Imp,
                    (true, true) => CellVerdict::Feasible,
                    (true, false) => CellVerdict::Infeasible,
                })
                .collect(),
        );
        witnesses.push(row.into_iter().map(|o| if o.feasible { o.leg.map(|l| vec![l]) } else { None }).collect());
    }
    Ok(FeasibilityMap {
        n_impulses: 2,
        beta_values: scenario.beta_grid.clone(),
        t_values: scenario.time_grid.clone(),
        cells,
        witnesses,
    })
}

type Row<T> = (Vec<CellVerdict>, Vec<Option<Vec<TransferLeg<T>>>>);

/// For each intermediate angle `β₂` and return flight time `Δt₃₂`, whether
/// some `t₂` makes both `0 → β₂` and `β₂ → 0` stay in the ring. Feasible
/// cells are split by whether the tour visits every polar angle.
pub fn cfk_three_impulse_map<T: Real>(scenario: &CfkScenario<T>) -> Result<FeasibilityMap<T>> {
    scenario.validate()?;
    let model = scenario.model();
    let ring = scenario.ring()?;
    let start = Vec3::on_circle(T::one(), T::zero());
    let gap = scenario.coverage_gap_deg;
    let gap_bins = gap.floor().to_usize().unwrap_or(0);

    let rows: Vec<Row<T>> = scenario
        .beta_grid
        .par_iter()
        .map(|&beta| {
            let mid = Vec3::on_circle(T::one(), beta);
            let outbound: Vec<LegOutcome<T>> =
                scenario.time_grid.iter().map(|&dt| evaluate_leg(scenario, &model, &ring, start, mid, dt)).collect();
            let inbound: Vec<LegOutcome<T>> =
                scenario.time_grid.iter().map(|&dt| evaluate_leg(scenario, &model, &ring, mid, start, dt)).collect();
            let n = scenario.time_grid.len();
            if !outbound.iter().any(|o| o.feasible) {
                return (vec![CellVerdict::Unreachable2And3Imp; n], vec![None; n]);
            }
            if !inbound.iter().any(|o| o.feasible) {
                return (vec![CellVerdict::Unreachable2Imp; n], vec![None; n]);
            }
            let feasible_out: Vec<&LegOutcome<T>> = outbound.iter().filter(|o| o.feasible).collect();
            let mut verdicts = Vec::with_capacity(n);
            let mut wits = Vec::with_capacity(n);
            for back in &inbound {
                if !back.feasible {
                    verdicts.push(CellVerdict::Infeasible);
                    wits.push(None);
                    continue;
                }
                let full = feasible_out.iter().find(|out| {
                    let bins = out.bins.union(&back.bins);
                    if gap_bins >= 1 && bins.has_empty_run(gap_bins + 1) {
                        return false;
                    }
                    if gap_bins < 2 || !bins.has_empty_run(gap_bins - 1) {
                        return true;
                    }
                    exact_gap(scenario, out, back) <= gap
                });
                let (verdict, chosen) = match full {
                    Some(out) => (CellVerdict::FeasibleFullCoverage, *out),
                    None => (CellVerdict::FeasiblePartialCoverage, feasible_out[0]),
                };
                verdicts.push(verdict);
                wits.push(chain_witness(&model, chosen, back));
            }
            (verdicts, wits)
        })
        .collect();

    let (cells, witnesses) = rows.into_iter().unzip();
    Ok(FeasibilityMap {
        n_impulses: 3,
        beta_values: scenario.beta_grid.clone(),
        t_values: scenario.time_grid.clone(),
        cells,
        witnesses,
    })
}

fn exact_gap<T: Real>(scenario: &CfkScenario<T>, out: &LegOutcome<T>, back: &LegOutcome<T>) -> T {
    let (Some(a), Some(b)) = (out.leg, back.leg) else {
        return T::lit(360.0);
    };
    match (a.sample(scenario.samples_for(a.dt())), b.sample(scenario.samples_for(b.dt()))) {
        (Ok(ta), Ok(tb)) => max_polar_gap(&[&ta, &tb]),
        _ => T::lit(360.0),
    }
}

/// Rebuilds the two legs as one mission: the return leg departs at `t₂` with
/// the outbound arrival velocity.
fn chain_witness<T: Real>(model: &CwModel<T>, out: &LegOutcome<T>, back: &LegOutcome<T>) -> Option<Vec<TransferLeg<T>>> {
    let first = out.leg?;
    let second = back.leg?;
    let second = model
        .transfer_leg_at(second.r_i(), second.r_j(), first.arrival_velocity(), second.dt(), first.dt())
        .ok()?;
    Some(vec![first, second])
}
