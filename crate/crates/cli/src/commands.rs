//! Subcommand bodies. Each turns a validated scenario into datasets; nothing
//! here touches the filesystem.

use std::collections::BTreeMap;

use cwpath::planner::{
    assemble_mission, cfk_three_impulse_map, cfk_two_impulse_map, cfm_plan_tour, CellVerdict, CfkScenario, MissionLeg,
    CHAIN_TOLERANCE, FAR_TRAJECTORY_SAMPLES,
};
use cwpath::reach::{
    boundary_clearance, curve_dt_grid, invert_reach, reach_curve, reach_surface, time_window_exclusion, CertifiedRange,
    Endpoint, Inversion, SurfaceGrid, INVERSION_TOLERANCE,
};
use cwpath::spectral::{measured_cone_bound, sphere_bound, verify_facts};
use cwpath::{Constraint, Error, Leg, Model, Position, State};
use rayon::prelude::*;

use crate::output::{num, Dataset};
use crate::scenario::ScenarioFile;
use crate::{CliError, Command};

/// Relative slack when comparing sampled distances against a bound.
pub const BOUND_TOLERANCE: f64 = 1e-12;

fn exceeds(reached: f64, bound: f64) -> bool {
    reached > bound * (1.0 + BOUND_TOLERANCE)
}

/// Datasets and bookkeeping from one subcommand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub datasets: Vec<Dataset>,
    pub parameters: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    /// Reason the result is infeasible or uncertified.
    pub uncertified: Option<String>,
}

impl Outcome {
    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    fn fail(&mut self, reason: String) {
        if self.uncertified.is_none() {
            self.uncertified = Some(reason);
        }
    }
}

pub fn execute(command: Command, scenario: &ScenarioFile) -> Result<Outcome, CliError> {
    let model = scenario.model()?;
    let mut out = Outcome::default();
    out.param("kappa_rad_s", num(model.kappa()));
    out.param("a_ts_km", num(model.orbit.a_ts()));
    out.param("guard_min_dt_s", num(model.guard.min_dt));
    out.param("guard_end_margin_s", num(model.guard.end_margin));
    out.tolerances.insert("guard_max_condition".into(), model.guard.max_condition);
    match command {
        Command::Propagate => propagate(scenario, &model, &mut out)?,
        Command::Bound => bound(scenario, &model, &mut out)?,
        Command::Reach => reach(scenario, &model, &mut out)?,
        Command::Invert => invert(scenario, &model, &mut out)?,
        Command::PlanCfk => plan_cfk(scenario, &model, &mut out)?,
        Command::PlanCfm => plan_cfm(scenario, &model, &mut out)?,
        Command::VerifyFacts => facts(scenario, &model, &mut out)?,
    }
    Ok(out)
}

fn need<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("planner.{key} is required")))
}

fn pos(a: [f64; 3]) -> Result<Position, CliError> {
    let p = Position::new(a[0], a[1], a[2]);
    if !p.is_finite() {
        return Err(CliError::Validation(format!("position {a:?} is not finite")));
    }
    Ok(p)
}

fn positive(x: f64, key: &str) -> Result<f64, CliError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::Validation(format!("planner.{key} must be positive, got {x}")));
    }
    Ok(x)
}

fn count(value: Option<usize>, default: usize, min: usize, key: &str) -> Result<usize, CliError> {
    let n = value.unwrap_or(default);
    if n < min {
        return Err(CliError::Validation(format!("planner.{key} must be at least {min}, got {n}")));
    }
    Ok(n)
}

fn xyz(p: Position) -> [String; 3] {
    [num(p.x()), num(p.y()), num(p.z())]
}

const TRAJECTORY_HEADER: [&str; 7] = ["t_s", "x_km", "y_km", "z_km", "vx_km_s", "vy_km_s", "vz_km_s"];

fn trajectory_rows(d: &mut Dataset, leg: &Leg, samples: usize) -> Result<(), CliError> {
    for (t, r) in leg.sample(samples)?.samples {
        let v = leg.velocity_at(t - leg.t0());
        let mut row = vec![num(t)];
        row.extend(xyz(r));
        row.extend(xyz(v));
        d.push(row);
    }
    Ok(())
}

fn propagate(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let p = &s.planner;
    let r = pos(need(p.r.or(p.r_i), "r")?)?;
    let v = pos(p.v.or(p.v_i_minus).unwrap_or([0.0; 3]))?;
    let dt = positive(need(p.dt, "dt")?, "dt")?;
    let samples = count(p.samples, 200, 2, "samples")?;
    out.param("dt_s", num(dt));
    out.param("samples", samples);

    let mut traj = Dataset::new("trajectory.csv", &TRAJECTORY_HEADER);
    if let Some(r_j) = p.r_j {
        let leg = model.transfer_leg(r, pos(r_j)?, v, dt)?;
        trajectory_rows(&mut traj, &leg, samples)?;
        let mut d = Dataset::new(
            "leg.csv",
            &["dt_s", "dv_x_km_s", "dv_y_km_s", "dv_z_km_s", "dv_norm_km_s", "vx_arr_km_s", "vy_arr_km_s", "vz_arr_km_s"],
        );
        let dv = leg.dv();
        let mut row = vec![num(dt)];
        row.extend(xyz(dv));
        row.push(num(dv.norm()));
        row.extend(xyz(leg.arrival_velocity()));
        d.push(row);
        out.datasets.push(traj);
        out.datasets.push(d);
        return Ok(());
    }
    let step = dt / (samples - 1) as f64;
    model.orbit.check_flight_time(step).map_err(|_| {
        CliError::Validation(format!("sample step {step} s must be below π/κ; raise planner.samples"))
    })?;
    let mut state = State::new(r, v, 0.0)?;
    for k in 0..samples {
        if k > 0 {
            state = model.propagate(&state, step)?;
        }
        let mut row = vec![num(state.t)];
        row.extend(xyz(state.r));
        row.extend(xyz(state.v));
        traj.push(row);
    }
    out.datasets.push(traj);
    Ok(())
}

/// Quasi-uniform unit vectors on the sphere.
fn fibonacci_directions(n: usize) -> Vec<Position> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Position::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

fn bound(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let p = &s.planner;
    let samples = count(p.samples, 2000, 2, "samples")?;
    out.param("samples", samples);
    out.tolerances.insert("bound_relative".into(), BOUND_TOLERANCE);
    let mut any = false;

    if let (Some(r_i), Some(r_j)) = (p.r_i, p.r_j) {
        any = true;
        let (r_i, r_j) = (pos(r_i)?, pos(r_j)?);
        let dt = need(p.dt, "dt")?;
        let b = sphere_bound(&model.orbit, r_i, r_j, dt)?;
        let leg = model.transfer_leg(r_i, r_j, pos(p.v_i_minus.unwrap_or([0.0; 3]))?, dt)?;
        let traj = leg.sample(samples)?;
        let reached = traj.max_norm();
        let mut d = Dataset::new(
            "bound.csv",
            &["dt_s", "r_i_norm_km", "r_j_norm_km", "sigma", "delta_km", "max_reached_km", "within_bound"],
        );
        d.push(vec![
            num(dt),
            num(r_i.norm()),
            num(r_j.norm()),
            num(b.sigma),
            num(b.delta),
            num(reached),
            (!exceeds(reached, b.delta)).to_string(),
        ]);
        out.datasets.push(d);
        if exceeds(reached, b.delta) {
            out.fail(format!("sampled distance {reached} km exceeds the bound {} km", b.delta));
        }
        let mut t = Dataset::new("trajectory.csv", &TRAJECTORY_HEADER);
        trajectory_rows(&mut t, &leg, samples)?;
        out.datasets.push(t);

        if let Some(axis) = p.cone_axis {
            let positions: Vec<Position> = traj.samples.iter().map(|(_, r)| *r).collect();
            let c = measured_cone_bound(positions.iter(), Some(pos(axis)?))?;
            let mut d = Dataset::new(
                "cone.csv",
                &["e_x", "e_y", "e_z", "rho_minus_km", "rho_plus_x_km", "rho_plus_y_km", "rho_plus_z_km", "c_theta", "excluded_half_angle_deg"],
            );
            let mut row = xyz(c.e_s).to_vec();
            row.push(num(c.rho_minus));
            row.extend(xyz(c.rho_plus));
            row.push(num(c.c_theta));
            row.push(num(c.excluded_half_angle().to_degrees()));
            d.push(row);
            out.datasets.push(d);
        }
    }

    if let Some(list) = &p.positions {
        any = true;
        let dt = need(p.dt, "dt")?;
        let positions = list.iter().map(|a| pos(*a)).collect::<Result<Vec<_>, _>>()?;
        if positions.len() < 2 {
            return Err(CliError::Validation("planner.positions needs at least 2 entries".into()));
        }
        let legs: Vec<MissionLeg<f64>> = positions.windows(2).map(|w| MissionLeg { r_i: w[0], r_j: w[1], dt }).collect();
        let mission = assemble_mission(model, pos(p.v_i_minus.unwrap_or([0.0; 3]))?, &legs)?;
        let envelope = mission.envelope;
        let mut d = Dataset::new(
            "mission.csv",
            &["leg", "t0_s", "dt_s", "dv_norm_km_s", "delta_km", "max_reached_km", "envelope_km"],
        );
        for (k, l) in mission.legs.iter().enumerate() {
            let reached = l.leg.sample(samples)?.max_norm();
            d.push(vec![
                k.to_string(),
                num(l.leg.t0()),
                num(l.leg.dt()),
                num(l.dv_norm),
                num(l.bound.delta),
                num(reached),
                envelope.map(num).unwrap_or_default(),
            ]);
            if let Some(e) = envelope {
                if exceeds(reached, e) {
                    out.fail(format!("leg {k} reaches {reached} km beyond the envelope {e} km"));
                }
            }
        }
        out.datasets.push(d);
        out.tolerances.insert("chain_tolerance_km".into(), CHAIN_TOLERANCE);
    }

    if let Some(sw) = &p.sweep {
        any = true;
        let r1_min = positive(sw.r1_min.unwrap_or(0.1), "sweep.r1_min")?;
        let r1_max = positive(sw.r1_max.unwrap_or(5.0), "sweep.r1_max")?;
        let steps = count(sw.r1_steps, 50, 2, "sweep.r1_steps")?;
        let directions = count(sw.directions, 10, 1, "sweep.directions")?;
        let fractions = sw.t2_fractions.clone().unwrap_or_else(|| vec![0.5, 0.75]);
        let sweep_samples = count(sw.samples, 2000, 2, "sweep.samples")?;
        if r1_max < r1_min {
            return Err(CliError::Validation("planner.sweep.r1_max must not be below r1_min".into()));
        }
        out.param("sweep_r1_steps", steps);
        out.param("sweep_directions", directions);
        out.param("sweep_samples", sweep_samples);
        let dirs = fibonacci_directions(directions);
        let limit = model.orbit.flight_time_limit();
        let cases: Vec<(f64, f64)> = fractions
            .iter()
            .flat_map(|f| (0..steps).map(move |k| (f * limit, r1_min + (r1_max - r1_min) * k as f64 / (steps - 1) as f64)))
            .collect();
        let rows = cases
            .par_iter()
            .map(|&(t2, r1)| {
                let delta = sphere_bound(&model.orbit, Position::new(r1, 0.0, 0.0), Position::zeros(), t2)?.delta;
                let mut reached = 0.0f64;
                for d in &dirs {
                    let leg = model.transfer_leg(*d * r1, Position::zeros(), Position::zeros(), t2)?;
                    reached = reached.max(leg.sample(sweep_samples)?.max_norm());
                }
                Ok((t2, r1, reached, delta))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let mut d = Dataset::new("bound_sweep.csv", &["t2_s", "r1_km", "max_reached_km", "delta_bound_km"]);
        for (t2, r1, reached, delta) in rows {
            if exceeds(reached, delta) {
                out.fail(format!("sweep case r1 = {r1} km, t2 = {t2} s exceeds its bound"));
            }
            d.push(vec![num(t2), num(r1), num(reached), num(delta)]);
        }
        out.datasets.push(d);
    }

    if !any {
        return Err(CliError::Validation("bound needs planner.r_i + r_j + dt, planner.positions + dt, or planner.sweep".into()));
    }
    Ok(())
}

fn reach(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let p = &s.planner;
    let r_i = pos(need(p.r_i, "r_i")?)?;
    let r_j = pos(need(p.r_j, "r_j")?)?;
    let t_res = count(p.t_res, 50, 2, "t_res")?;
    let dt_res = count(p.dt_res, 50, 2, "dt_res")?;
    out.param("t_res", t_res);
    out.param("dt_res", dt_res);

    let surface = reach_surface(model, r_i, r_j, t_res, dt_res)?;
    let mut d = Dataset::new("surface.csv", &["dt_s", "t_s", "x_km", "y_km", "z_km"]);
    for (dt, t, r) in surface.points() {
        let mut row = vec![num(dt), num(t)];
        row.extend(xyz(r));
        d.push(row);
    }
    out.datasets.push(d);

    if let Some(ts) = &p.curve_t {
        let mut d = Dataset::new("curves.csv", &["t_s", "dt_s", "x_km", "y_km", "z_km"]);
        for &t in ts {
            let curve = reach_curve(model, r_i, r_j, t, &curve_dt_grid(model, t, dt_res))?;
            for (dt, r) in curve.samples {
                let mut row = vec![num(t), num(dt)];
                row.extend(xyz(r));
                d.push(row);
            }
        }
        out.datasets.push(d);
    }

    let constraints = s.constraints()?;
    if !constraints.is_empty() {
        let grid = SurfaceGrid { t_res, dt_res };
        let mut d = Dataset::new(
            "clearance.csv",
            &[
                "constraint",
                "clear",
                "certified",
                "inner_crossings",
                "outer_crossings",
                "min_boundary_distance_km",
                "min_margin_km",
                "dt_spacing_s",
                "t_spacing_s",
            ],
        );
        for (k, c) in constraints.iter().enumerate() {
            match boundary_clearance(model, r_i, r_j, c, grid, None) {
                Ok(rep) => {
                    d.push(vec![
                        k.to_string(),
                        rep.clear.to_string(),
                        rep.certified.to_string(),
                        rep.inner_crossings.to_string(),
                        rep.outer_crossings.to_string(),
                        num(rep.min_boundary_distance),
                        num(rep.min_margin),
                        num(rep.dt_spacing),
                        num(rep.t_spacing),
                    ]);
                    if !rep.certified {
                        out.fail(format!("constraint {k}: reachable surface crosses a boundary sphere"));
                    }
                }
                Err(Error::NoWitness) => {
                    let blank = || String::new();
                    d.push(vec![k.to_string(), "false".into(), "false".into(), blank(), blank(), blank(), blank(), blank(), blank()]);
                    out.fail(format!("constraint {k}: the departure point r_i violates it"));
                }
                Err(e) => return Err(e.into()),
            }
        }
        out.datasets.push(d);

        if let (Some(dt_a), Some(dt_b)) = (p.dt_a, p.dt_b) {
            let mut d = Dataset::new("exclusion.csv", &["constraint", "dt_a_s", "dt_b_s", "witness_dt_s", "certified_range"]);
            for (k, c) in constraints.iter().enumerate() {
                let rep = time_window_exclusion(model, r_i, r_j, c, dt_a, dt_b, Default::default())?;
                let label = match rep.certified {
                    CertifiedRange::Inside => "inside",
                    CertifiedRange::Outside => "outside",
                    CertifiedRange::Undetermined => "undetermined",
                };
                if rep.certified == CertifiedRange::Undetermined {
                    out.fail(format!("constraint {k}: no violating flight time to act as witness"));
                }
                d.push(vec![k.to_string(), num(dt_a), num(dt_b), rep.witness_dt.map(num).unwrap_or_default(), label.into()]);
            }
            out.datasets.push(d);
        }
    }
    Ok(())
}

fn invert(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let p = &s.planner;
    let target = pos(need(p.target, "target")?)?;
    let r_i = pos(need(p.r_i, "r_i")?)?;
    let r_j = pos(need(p.r_j, "r_j")?)?;
    out.tolerances.insert("inversion_residual_km".into(), INVERSION_TOLERANCE);
    let mut d = Dataset::new("inversion.csv", &["status", "t_s", "dt_s", "residual_km"]);
    match invert_reach(model, target, r_i, r_j) {
        Ok(Inversion::Root(r)) => d.push(vec!["root".into(), num(r.t), num(r.dt_total), num(r.residual)]),
        Ok(Inversion::AmbiguousEndpoint(e)) => {
            let status = match e {
                Endpoint::Initial => "endpoint_initial",
                Endpoint::Final => "endpoint_final",
            };
            d.push(vec![status.into(), String::new(), String::new(), num(0.0)]);
        }
        Err(Error::Unreachable { residual }) => {
            d.push(vec!["unreachable".into(), String::new(), String::new(), num(residual)]);
            out.fail(format!("target is not on the reachable surface (best residual {residual:e} km)"));
        }
        Err(e) => return Err(e.into()),
    }
    out.datasets.push(d);
    Ok(())
}

fn plan_cfk(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let p = &s.planner;
    let rho_inner = need(p.rho_inner, "rho_inner")?;
    let rho_outer = need(p.rho_outer, "rho_outer")?;
    let beta_step = p.beta_step_deg.unwrap_or(1.0);
    let time_step = p.time_step_s.unwrap_or(10.0);
    let n = p.n_impulses.unwrap_or(2);
    let mut sc = CfkScenario::regular(model.orbit, rho_inner, rho_outer, beta_step, time_step, n)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    sc.guard = model.guard;
    let (lo, hi) = model.transfer_window();
    sc.time_grid.retain(|t| *t >= lo && *t <= hi);
    if let Some(m) = p.min_samples {
        sc.min_samples = m;
    }
    if let Some(g) = p.coverage_gap_deg {
        sc.coverage_gap_deg = g;
    }
    sc.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    out.param("beta_step_deg", num(beta_step));
    out.param("time_step_s", num(time_step));
    out.param("n_impulses", n);
    out.param("beta_cells", sc.beta_grid.len());
    out.param("time_cells", sc.time_grid.len());
    out.param("min_samples", sc.min_samples);
    out.tolerances.insert("coverage_gap_deg".into(), sc.coverage_gap_deg);

    let map = match n {
        2 => cfk_two_impulse_map(&sc)?,
        3 => cfk_three_impulse_map(&sc)?,
        _ => return Err(CliError::Validation(format!("planner.n_impulses must be 2 or 3, got {n}"))),
    };

    let mut cells = Dataset::new("feasibility_map.csv", &["beta_deg", "t_s", "verdict"]);
    for (beta, t, v) in map.iter() {
        cells.push(vec![num(beta), num(t), v.label().into()]);
    }
    let mut witnesses = Dataset::new(
        "witnesses.csv",
        &["beta_deg", "t_s", "leg", "t0_s", "dt_s", "x_i_km", "y_i_km", "z_i_km", "x_j_km", "y_j_km", "z_j_km", "dv_x_km_s", "dv_y_km_s", "dv_z_km_s"],
    );
    for (i, row) in map.witnesses.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            for (k, leg) in w.iter().flatten().enumerate() {
                let mut r = vec![num(map.beta_values[i]), num(map.t_values[j]), k.to_string(), num(leg.t0()), num(leg.dt())];
                r.extend(xyz(leg.r_i()));
                r.extend(xyz(leg.r_j()));
                r.extend(xyz(leg.dv()));
                witnesses.push(r);
            }
        }
    }
    let verdicts: &[CellVerdict] = if n == 2 {
        &[CellVerdict::Feasible, CellVerdict::Infeasible, CellVerdict::Unreachable2Imp]
    } else {
        &[
            CellVerdict::FeasibleFullCoverage,
            CellVerdict::FeasiblePartialCoverage,
            CellVerdict::Infeasible,
            CellVerdict::Unreachable2Imp,
            CellVerdict::Unreachable2And3Imp,
        ]
    };
    let mut summary = Dataset::new("summary.csv", &["verdict", "cells", "t_min_s", "t_max_s"]);
    for v in verdicts {
        let (lo, hi) = map.t_extent(*v).map_or((String::new(), String::new()), |(a, b)| (num(a), num(b)));
        summary.push(vec![v.label().into(), map.count(*v).to_string(), lo, hi]);
    }
    let mut bands = Dataset::new("bands.csv", &["beta_start_deg", "beta_end_deg", "rows"]);
    let rows = map.beta_values.len();
    for (a, b) in map.unreachable_bands() {
        let len = if b >= a { b - a + 1 } else { rows - a + b + 1 };
        bands.push(vec![num(map.beta_values[a]), num(map.beta_values[b]), len.to_string()]);
    }
    if !map.cells.iter().flatten().any(|v| v.is_feasible()) {
        out.fail("no feasible cell in the map".into());
    }
    out.datasets.extend([cells, witnesses, summary, bands]);
    Ok(())
}

fn keep_out(s: &ScenarioFile) -> Result<Constraint, CliError> {
    s.constraints()?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Validation("plan-cfm needs the keep-out region as constraints[0]".into()))
}

fn plan_cfm(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let p = &s.planner;
    let positions: Vec<Position> = match (&p.positions, &p.positions_deg) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation("give planner.positions or planner.positions_deg, not both".into()));
        }
        (Some(list), None) => list.iter().map(|a| pos(*a)).collect::<Result<_, _>>()?,
        (None, Some(angles)) => {
            let radius = positive(p.radius.unwrap_or(1.0), "radius")?;
            angles.iter().map(|b| Position::on_circle(radius, *b)).collect()
        }
        (None, None) => return Err(CliError::Validation("planner.positions or planner.positions_deg is required".into())),
    };
    let ko = keep_out(s)?;
    let epsilon = p.epsilon.unwrap_or(1.0);
    out.param("epsilon_s", num(epsilon));
    out.param("far_trajectory_samples", FAR_TRAJECTORY_SAMPLES);
    let plan = match cfm_plan_tour(model, &positions, &ko, epsilon) {
        Err(Error::EndpointInside { index }) => {
            return Err(CliError::Validation(format!("impulse position {index} lies inside the keep-out region")));
        }
        r => r?,
    };
    let mut d = Dataset::new(
        "cfm_plan.csv",
        &["leg", "x_i_km", "y_i_km", "z_i_km", "x_j_km", "y_j_km", "z_j_km", "segment_margin_km", "far_margin_km", "far_dt_s", "certified"],
    );
    for (k, l) in plan.legs.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(xyz(l.r_i));
        row.extend(xyz(l.r_j));
        row.extend([num(l.segment_margin), num(l.far_margin), num(l.far_dt), l.certified.to_string()]);
        d.push(row);
    }
    let mut summary = Dataset::new("cfm_summary.csv", &["certified", "legs", "epsilon_s", "rho_inner_km", "rho_outer_km"]);
    summary.push(vec![
        plan.certified.to_string(),
        plan.legs.len().to_string(),
        num(epsilon),
        num(ko.rho_inner()),
        num(ko.rho_outer()),
    ]);
    if !plan.certified {
        let bad: Vec<String> = plan.legs.iter().enumerate().filter(|(_, l)| !l.certified).map(|(k, _)| k.to_string()).collect();
        out.fail(format!("legs {} are not certified collision-free", bad.join(", ")));
    }
    out.datasets.extend([d, summary]);
    Ok(())
}

fn facts(s: &ScenarioFile, model: &Model, out: &mut Outcome) -> Result<(), CliError> {
    let grid = count(s.planner.grid, 30, 2, "grid")?;
    out.param("grid", grid);
    let report = verify_facts(model, grid)?;
    let mut d = Dataset::new("facts.csv", &["check", "worst", "tolerance", "passed", "detail"]);
    for c in &report.checks {
        out.tolerances.insert(c.name.clone(), c.tolerance);
        d.push(vec![c.name.clone(), num(c.worst), num(c.tolerance), c.passed.to_string(), c.detail.clone()]);
    }
    if !report.all_passed() {
        let bad: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        out.fail(format!("failed checks: {}", bad.join(", ")));
    }
    out.datasets.push(d);
    Ok(())
}
