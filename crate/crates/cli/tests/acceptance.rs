//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use cwpath::planner::{
    assemble_mission, cfk_three_impulse_map, cfk_two_impulse_map, cfm_certify_leg, cfm_plan_tour, CellVerdict,
    CfkScenario, MissionLeg,
};
use cwpath::reach::{invert_reach, Inversion, ResidualField};
use cwpath::spectral::{cone_bound, sphere_bound, verify_facts};
use cwpath::{Constraint, Model, Orbit, Position};
use rand::Rng;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn unit_pairs() -> Vec<(f64, f64, f64)> {
    vec![(0.0, 20.0, 200.0), (0.0, 340.0, 200.0), (0.0, 260.0, 1000.0), (0.0, 200.0, 1000.0), (20.0, 0.0, 200.0), (340.0, 0.0, 200.0)]
}

fn sphere_bound_values() -> Check {
    let orbit = orbit400();
    let root2 = 2f64.sqrt();
    for (a, b, dt) in unit_pairs() {
        let d = sphere_bound(&orbit, Position::on_circle(1.0, a), Position::on_circle(1.0, b), dt).map_err(|e| e.to_string())?;
        ensure((d.delta - root2).abs() <= 1e-15, format!("β {a}→{b}, dt {dt}: δ = {}", d.delta))?;
    }
    for (r_i, r_j) in [(Position::unit(0), Position::unit(1)), (Position::unit(2), Position::unit(0))] {
        for dt in [200.0, 1000.0] {
            let d = sphere_bound(&orbit, r_i, r_j, dt).map_err(|e| e.to_string())?;
            ensure(d.delta == root2, format!("axis pair at dt {dt}: δ = {}", d.delta))?;
        }
    }
    let fast = Orbit::from_mean_motion(cwpath::EARTH_MU, 1.1e-3).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for (a, b) in [(0.0, 180.0), (180.0, 0.0)] {
        let d = sphere_bound(&fast, Position::on_circle(1.0, a), Position::on_circle(1.0, b), 1700.0).map_err(|e| e.to_string())?;
        let ratio = d.delta / root2;
        ensure((1.19 * 0.95..=1.19 * 1.05).contains(&ratio), format!("dt 1700 s: δ/√2 = {ratio}"))?;
        ratios.push(ratio);
    }
    Ok(format!("δ = √2 on 10 pairs; δ/√2 = {:.4} at 1700 s", ratios[0]))
}

fn cone_bound_values() -> Check {
    let c = cone_bound(Position::unit(1), 0.9, Position::new(1.0, 0.5, 0.0)).map_err(|e| e.to_string())?;
    ensure((c.c_theta - 5.0 / 9.0).abs() <= 1e-12, format!("c_θ = {}", c.c_theta))?;
    let ones = [
        (Position::unit(1), 0.5, Position::new(1.0, 0.9, 0.0)),
        (Position::unit(0), 0.9, Position::new(1.0, 1.1, 0.0)),
        (Position::unit(0), 1.0, Position::new(1.0, 1.0, 0.0)),
        (Position::unit(0), 0.95, Position::new(1.0, 1.3, 0.0)),
    ];
    for (e, rm, rp) in ones {
        let c = cone_bound(e, rm, rp).map_err(|e| e.to_string())?;
        ensure(c.c_theta == 1.0, format!("expected c_θ = 1 for ρ⁻ = {rm}, got {}", c.c_theta))?;
    }
    Ok(format!("c_θ = {:.15}; {} saturated rows exactly 1", c.c_theta, ones.len()))
}

fn facts() -> Check {
    let report = verify_facts(&model400(), 50).map_err(|e| e.to_string())?;
    let get = |name: &str| report.check(name).ok_or_else(|| format!("missing check {name}"));
    let sym = get("eigenvalue_mirror_symmetry")?;
    ensure(sym.passed && sym.worst <= 1e-8, format!("mirror symmetry worst {}", sym.worst))?;
    let zero = get("fhat_three_zero_eigenvalues")?;
    ensure(zero.passed, format!("nullity: {}", zero.detail))?;
    for name in ["max_eigenvalue_below_knee", "max_eigenvalue_at_knee", "max_eigenvalue_above_knee"] {
        let c = get(name)?;
        ensure(c.passed && c.tolerance <= 1e-6, format!("{name}: {}", c.detail))?;
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    ensure(failed.is_empty(), format!("failed: {}", failed.join(", ")))?;
    Ok(format!("{} checks on a 50×50 grid, symmetry error {:.1e}", report.checks.len(), sym.worst))
}

fn bound_soundness() -> Check {
    let model = model400();
    let limit = model.orbit.flight_time_limit();
    let mut g = rng(4);
    let mut notes = Vec::new();
    for frac in [0.5, 0.75] {
        let t2 = frac * limit;
        let mut best_ratio = 0.0f64;
        for k in 0..500 {
            let norm = 0.1 + (5.0 - 0.1) * k as f64 / 499.0;
            let dir = loop {
                let d = random_position(&mut g, 1.0);
                if d.norm() > 1e-3 {
                    break d * (1.0 / d.norm());
                }
            };
            let r1 = dir * norm;
            let delta = sphere_bound(&model.orbit, r1, Position::zeros(), t2).map_err(|e| e.to_string())?.delta;
            let leg = model.transfer_leg(r1, Position::zeros(), Position::zeros(), t2).map_err(|e| e.to_string())?;
            let reached = leg.sample(2000).map_err(|e| e.to_string())?.max_norm();
            ensure(reached <= delta * (1.0 + 1e-12), format!("t₂ = {frac}·π/κ, |r₁| = {norm}: {reached} > δ = {delta}"))?;
            best_ratio = best_ratio.max(reached / delta);
        }
        ensure(best_ratio >= 0.5, format!("t₂ = {frac}·π/κ: bound vacuous, best ratio {best_ratio}"))?;
        notes.push(format!("max/δ = {best_ratio:.3} at {frac}·π/κ"));
    }
    Ok(format!("1000 legs inside δ; {}", notes.join(", ")))
}

fn inversion_uniqueness() -> Check {
    let model = model400();
    let (lo, hi) = model.transfer_window();
    let mut g = rng(5);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let a = random_position(&mut g, 2.0);
        let b = random_position(&mut g, 2.0);
        let dt = g.gen_range(lo + 20.0..hi - 20.0);
        let t = g.gen_range(0.05..0.95) * dt;
        let target = model.trajectory_position(a, b, dt, t).map_err(|e| e.to_string())?;
        match invert_reach(&model, target, a, b).map_err(|e| e.to_string())? {
            Inversion::Root(found) => {
                let err = (found.t - t).abs().max((found.dt_total - dt).abs());
                ensure(err < 0.1, format!("(t, dt) = ({t}, {dt}) recovered as ({}, {})", found.t, found.dt_total))?;
                worst = worst.max(err);
            }
            other => return Err(format!("unexpected inversion {other:?}")),
        }
    }
    for case in 0..10 {
        let a = random_position(&mut g, 2.0);
        let b = random_position(&mut g, 2.0);
        let probe = ResidualField::new(&model, a, a, b, 2, 500).map_err(|e| e.to_string())?;
        let s_probe = ResidualField::new(&model, a, a, b, 500, 2).map_err(|e| e.to_string())?;
        let dt = probe.dt_values[g.gen_range(5..495)];
        let s = s_probe.s_values[g.gen_range(5..495)];
        let target = model.trajectory_position(a, b, dt, s * dt).map_err(|e| e.to_string())?;
        let field = ResidualField::new(&model, target, a, b, 500, 500).map_err(|e| e.to_string())?;
        let basins = field.basins_below(1e-6);
        ensure(basins == 1, format!("case {case}: {basins} basins below 1e-6 km"))?;
    }
    Ok(format!("500 inversions, worst error {worst:.2e} s; 10 residual grids with one basin"))
}

fn square_tour() -> Vec<Position> {
    [0.0, 270.0, 180.0, 90.0, 0.0].iter().map(|b| Position::on_circle(1.0, *b)).collect()
}

fn cfm() -> Check {
    let model = model400();
    let ko = Constraint::keep_out(Position::zeros(), 0.5, f64::INFINITY).map_err(|e| e.to_string())?;
    let r1 = Position::new(1.0, 0.0, 0.0);
    ensure(cfm_certify_leg(&model, r1, Position::new(0.0, -1.0, 0.0), &ko, 1.0).map_err(|e| e.to_string())?, "[0,-1,0] not certified")?;
    ensure(!cfm_certify_leg(&model, r1, Position::new(0.0, 1.0, 0.0), &ko, 1.0).map_err(|e| e.to_string())?, "[0,1,0] certified")?;
    let plan = cfm_plan_tour(&model, &square_tour(), &ko, 1.0).map_err(|e| e.to_string())?;
    ensure(plan.certified, "four-position tour not certified")?;
    let (lo, hi) = model.transfer_window();
    let mut g = rng(6);
    let mut closest = f64::INFINITY;
    for case in 0..100 {
        let legs: Vec<MissionLeg<f64>> =
            square_tour().windows(2).map(|w| MissionLeg { r_i: w[0], r_j: w[1], dt: g.gen_range(lo..hi) }).collect();
        let mission = assemble_mission(&model, Position::zeros(), &legs).map_err(|e| e.to_string())?;
        for l in &mission.legs {
            let traj = l.leg.sample(2000).map_err(|e| e.to_string())?;
            closest = closest.min(traj.min_norm());
            ensure(traj.samples.iter().all(|(t, r)| ko.check_point(*t, *r)), format!("case {case} enters the keep-out"))?;
        }
    }
    Ok(format!("tour certified; 100 random-dt missions, closest approach {closest:.4} km"))
}

fn cfk() -> Check {
    let two = CfkScenario::regular(orbit400(), 0.9, 1.1, 1.0, 10.0, 2).map_err(|e| e.to_string())?;
    let map2 = cfk_two_impulse_map(&two).map_err(|e| e.to_string())?;
    let bands = map2.unreachable_bands();
    ensure(bands.len() == 1, format!("expected one unreachable band, got {bands:?}"))?;
    let (a, b) = bands[0];

    let three = CfkScenario::regular(orbit400(), 0.9, 1.1, 1.0, 10.0, 3).map_err(|e| e.to_string())?;
    let map3 = cfk_three_impulse_map(&three).map_err(|e| e.to_string())?;
    let (full_lo, full_hi) = map3.t_extent(CellVerdict::FeasibleFullCoverage).ok_or("no full-coverage cells")?;
    ensure(
        full_lo <= 1860.0 * 1.05 && full_hi >= 1570.0 * 0.95,
        format!("full-coverage Δt₃₂ extent [{full_lo}, {full_hi}] misses [1570, 1860]"),
    )?;
    ensure(
        (full_lo - 1570.0).abs() <= 0.05 * 1570.0 && (full_hi - 1860.0).abs() <= 0.05 * 1860.0,
        format!("full-coverage edges [{full_lo}, {full_hi}] beyond ±5% of [1570, 1860]"),
    )?;
    let (_, partial_hi) = map3.t_extent(CellVerdict::FeasiblePartialCoverage).ok_or("no partial-coverage cells")?;
    ensure(partial_hi <= 740.0 * 1.05, format!("partial coverage reaches Δt₃₂ = {partial_hi}"))?;
    Ok(format!(
        "band β {}°..{}°; full coverage Δt₃₂ {full_lo}..{full_hi} s ({} cells); partial ≤ {partial_hi} s ({} cells)",
        map2.beta_values[a],
        map2.beta_values[b],
        map3.count(CellVerdict::FeasibleFullCoverage),
        map3.count(CellVerdict::FeasiblePartialCoverage)
    ))
}

fn oracle() -> Check {
    let model: Model = model400();
    let mut g = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (r_i, r_j, v, dt) = random_leg(&mut g, &model);
        let leg = model.transfer_leg(r_i, r_j, v, dt).map_err(|e| e.to_string())?;
        let t = g.gen_range(0.0..dt);
        let ours = model.trajectory_position(r_i, r_j, dt, t).map_err(|e| e.to_string())?;
        let theirs = position(&rk4(model.kappa(), state(r_i, leg.departure_velocity()), t, 0.5));
        worst = worst.max(ours.distance(&theirs));
        let end = position(&rk4(model.kappa(), state(r_i, leg.departure_velocity()), dt, 0.5));
        worst = worst.max(end.distance(&r_j));
    }
    ensure(worst <= 1e-6, format!("worst deviation {worst:e} km"))?;
    Ok(format!("1000 legs, worst deviation {worst:.2e} km"))
}

fn run_plan_cfk(out: &Path, threads: &str, n: usize) -> Result<i32, String> {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/scenarios/plan-cfk.toml");
    let status = Command::new(env!("CARGO_BIN_EXE_cwpath"))
        .args(["plan-cfk", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(out)
        .args(["--set", &format!("planner.n_impulses={n}")])
        .env("CWPATH_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(status.status.code().unwrap_or(-1))
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for n in [2, 3] {
        let a = tmp.path().join(format!("a{n}"));
        let b = tmp.path().join(format!("b{n}"));
        ensure(run_plan_cfk(&a, "1", n)? == 0, "first run failed")?;
        ensure(run_plan_cfk(&b, "4", n)? == 0, "second run failed")?;
        let (fa, fb) = (csv_files(&a)?, csv_files(&b)?);
        ensure(!fa.is_empty() && fa.len() == fb.len(), "different file sets")?;
        for (x, y) in fa.iter().zip(&fb) {
            let bx = std::fs::read(x).map_err(|e| e.to_string())?;
            let by = std::fs::read(y).map_err(|e| e.to_string())?;
            ensure(x.file_name() == y.file_name() && bx == by, format!("{} differs", x.display()))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} CSV files identical across runs with 1 and 4 threads"))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "sphere bound values", budget: Duration::from_secs(1), run: sphere_bound_values },
        Criterion { id: 2, name: "cone bound values", budget: Duration::from_secs(1), run: cone_bound_values },
        Criterion { id: 3, name: "spectral facts suite", budget: Duration::from_secs(30), run: facts },
        Criterion { id: 4, name: "sphere bound soundness sweep", budget: Duration::from_secs(60), run: bound_soundness },
        Criterion { id: 5, name: "reach inversion uniqueness", budget: Duration::from_secs(120), run: inversion_uniqueness },
        Criterion { id: 6, name: "collision-free maneuver", budget: Duration::from_secs(60), run: cfm },
        Criterion { id: 7, name: "circular formation keeping maps", budget: Duration::from_secs(600), run: cfk },
        Criterion { id: 8, name: "RK4 oracle equivalence", budget: Duration::from_secs(60), run: oracle },
        Criterion { id: 9, name: "plan-cfk determinism", budget: Duration::from_secs(600), run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > c.budget => Err(format!("{d}; over budget")),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if result.is_err() {
            failed += 1;
        }
        println!(
            "criterion {} {tag} {} ({:.2} s of {} s): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
