//! Numerical verification of the spectral properties of `F1ᵀF1`, `F2ᵀF2`
//! and `F̂` on a grid of leg durations and mid-leg times.

use super::{fhat, gerschgorin_upper_bound, sigma_envelope, sym_eigenvalues, zero_eigenvalue_cutoff};
use crate::cw::CwModel;
use crate::error::Result;
use crate::linalg::{Mat3, SquareMatrix};
use crate::scalar::Real;

/// One named check: the worst observed statistic against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct FactCheck {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactsReport {
    pub grid: usize,
    pub checks: Vec<FactCheck>,
}

impl FactsReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&FactCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn gram<T: Real>(m: &Mat3<T>) -> SquareMatrix<T> {
    let p = m.transpose() * *m;
    SquareMatrix::from_rows(&p.0.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).expect("3x3")
}

fn abs_row_sum<T: Real>(m: &SquareMatrix<T>, i: usize) -> T {
    m.row(i).iter().map(|c| c.abs()).sum()
}

/// Runs every check on a `grid × grid` lattice of `(t, τ)`, with
/// `τ = k/(grid+1)·π/κ` and `t = j/(grid+1)·τ`.
pub fn verify_facts<T: Real>(model: &CwModel<T>, grid: usize) -> Result<FactsReport> {
    let grid = grid.max(2);
    let limit = model.orbit.flight_time_limit();
    let denom = T::from_count(grid + 1);
    let taus: Vec<T> = (1..=grid).map(|k| limit * T::from_count(k) / denom).collect();

    let mut eig_sym = 0.0f64;
    let mut row_sym = 0.0f64;
    let mut rank_failures = 0usize;
    let mut worst_rank_detail = String::new();
    let mut sigma_excess = f64::NEG_INFINITY;
    let mut gersch_err = 0.0f64;
    let mut gersch_cases = 0usize;
    let mut unimodal_failures = 0usize;

    for &tau in &taus {
        let ts: Vec<T> = (1..=grid).map(|j| tau * T::from_count(j) / denom).collect();
        let sigma = sigma_envelope(&model.orbit, tau)?;
        let mut lam6 = Vec::with_capacity(ts.len());
        for &t in &ts {
            let (f1, _) = model.two_point_matrices(t, tau)?;
            let (_, g2) = model.two_point_matrices(tau - t, tau)?;
            let l11 = sym_eigenvalues(&gram(&f1))?;
            let l22 = sym_eigenvalues(&gram(&g2))?;
            for (a, b) in l11.iter().zip(&l22) {
                let scale = a.abs().max(b.abs()).max(T::one());
                eig_sym = eig_sym.max(((*a - *b).abs() / scale).as_f64());
            }

            let fh = fhat(model, t, tau)?;
            let mirrored = fhat(model, tau - t, tau)?;
            for i in 0..3 {
                let a = abs_row_sum(&fh.m, i);
                let b = abs_row_sum(&mirrored.m, i + 3);
                row_sym = row_sym.max(((a - b).abs() / a.abs().max(T::one())).as_f64());
            }

            let values = fh.eigenvalues()?;
            let cutoff = zero_eigenvalue_cutoff(&values);
            let zeros = values.iter().filter(|l| l.abs() < cutoff).count();
            if zeros != 3 {
                rank_failures += 1;
                if worst_rank_detail.is_empty() {
                    worst_rank_detail = format!("t={t} tau={tau} zeros={zeros}");
                }
            }
            let lmax = *values.last().expect("6 eigenvalues");
            sigma_excess = sigma_excess.max((lmax / (sigma * sigma) - T::one()).as_f64());
            lam6.push(lmax);
        }

        if tau > model.orbit.envelope_knee() {
            let mid = fhat(model, tau / T::lit(2.0), tau)?;
            let expect = T::lit(0.5) / (T::lit(0.5) * model.kappa() * tau).cos().powi(2);
            gersch_err = gersch_err.max(((gerschgorin_upper_bound(&mid.m) - expect).abs() / expect).as_f64());
            gersch_cases += 1;
        }

        if !single_extremum(&lam6) {
            unimodal_failures += 1;
        }
    }

    let mut checks = vec![
        FactCheck {
            name: "eigenvalue_mirror_symmetry".into(),
            worst: eig_sym,
            tolerance: 1e-8,
            passed: eig_sym <= 1e-8,
            detail: "sorted eig(F1ᵀF1)(t) vs eig(F2ᵀF2)(τ−t), relative to max(1,|λ|)".into(),
        },
        FactCheck {
            name: "fhat_three_zero_eigenvalues".into(),
            worst: rank_failures as f64,
            tolerance: 0.0,
            passed: rank_failures == 0,
            detail: if rank_failures == 0 { "every grid point has nullity 3".into() } else { worst_rank_detail },
        },
        FactCheck {
            name: "row_sum_mirror_symmetry".into(),
            worst: row_sym,
            tolerance: 1e-9,
            passed: row_sym <= 1e-9,
            detail: "absolute row sums of rows 1-3 at t vs rows 4-6 at τ−t".into(),
        },
        FactCheck {
            name: "gerschgorin_midflight_secant".into(),
            worst: gersch_err,
            tolerance: 1e-6,
            passed: gersch_cases > 0 && gersch_err <= 1e-6,
            detail: format!("{gersch_cases} durations above 0.5·π/κ, relative error"),
        },
        FactCheck {
            name: "sigma_envelope_dominates".into(),
            worst: sigma_excess,
            tolerance: 1e-9,
            passed: sigma_excess <= 1e-9,
            detail: "max over grid of λ_max(F̂)/σ² − 1".into(),
        },
        FactCheck {
            name: "fhat_single_extremum".into(),
            worst: unimodal_failures as f64,
            tolerance: 0.0,
            passed: unimodal_failures == 0,
            detail: "λ_max(F̂)(t) constant or with one interior extremum".into(),
        },
    ];
    checks.extend(threshold_checks(model, grid)?);
    Ok(FactsReport { grid, checks })
}

/// Either constant (relative spread < 1e-9) or monotone up to a single turn.
fn single_extremum<T: Real>(values: &[T]) -> bool {
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    let tol = T::lit(1e-9) * hi.abs().max(T::one());
    if hi - lo <= tol {
        return true;
    }
    let signs: Vec<i8> = values
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            if d.abs() <= tol {
                None
            } else if d > T::zero() {
                Some(1)
            } else {
                Some(-1)
            }
        })
        .collect();
    signs.windows(2).filter(|s| s[0] != s[1]).count() <= 1
}

/// Largest eigenvalue of `F1ᵀF1`, `F2ᵀF2` and `F̂` below, at and above the
/// knee `τ = 0.5·π/κ`.
fn threshold_checks<T: Real>(model: &CwModel<T>, grid: usize) -> Result<Vec<FactCheck>> {
    const EQ_TOL: f64 = 1e-6;
    let limit = model.orbit.flight_time_limit();
    let denom = T::from_count(grid + 1);
    let mut out = Vec::new();
    for (label, frac) in [("below", 0.3), ("at", 0.5), ("above", 0.7)] {
        let tau = limit * T::lit(frac);
        let mut hat_min = f64::INFINITY;
        let mut hat_max = f64::NEG_INFINITY;
        let mut blocks_max = f64::NEG_INFINITY;
        for j in 1..=grid {
            let t = tau * T::from_count(j) / denom;
            let (f1, f2) = model.two_point_matrices(t, tau)?;
            for g in [gram(&f1), gram(&f2)] {
                let top = *sym_eigenvalues(&g)?.last().expect("3 eigenvalues");
                blocks_max = blocks_max.max(top.as_f64());
            }
            let top = *fhat(model, t, tau)?.eigenvalues()?.last().expect("6 eigenvalues");
            hat_min = hat_min.min(top.as_f64());
            hat_max = hat_max.max(top.as_f64());
        }
        let (hat_ok, blocks_ok, worst) = match label {
            "below" => (hat_max < 1.0, blocks_max < 1.0, hat_max.max(blocks_max)),
            "at" => (
                (hat_min - 1.0).abs() <= EQ_TOL && (hat_max - 1.0).abs() <= EQ_TOL,
                blocks_max <= 1.0 + EQ_TOL,
                (hat_min - 1.0).abs().max((hat_max - 1.0).abs()),
            ),
            _ => (hat_min > 1.0, blocks_max > 1.0, hat_min.min(blocks_max)),
        };
        out.push(FactCheck {
            name: format!("max_eigenvalue_{label}_knee"),
            worst,
            tolerance: EQ_TOL,
            passed: hat_ok && blocks_ok,
            detail: format!(
                "τ = {frac}·π/κ: λ_max(F̂) in [{hat_min:.9}, {hat_max:.9}], max λ(FₖᵀFₖ) = {blocks_max:.9}"
            ),
        });
    }
    Ok(out)
}
