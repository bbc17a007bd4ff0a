//! Spectral trajectory bounds for two-impulse legs.
//!
//! The squared position norm on a leg is the quadratic form
//! `[r_i; r_j]ᵀ·F̂(t)·[r_i; r_j]` with `F̂ = [F1 F2]ᵀ[F1 F2]`, so the largest
//! eigenvalue of `F̂` over the leg bounds the whole trajectory. The envelope
//! factor σ collapses that supremum into a closed form, evaluated through the
//! Gerschgorin disks of `F̂` at mid-flight.

mod facts;
mod jacobi;

pub use facts::{verify_facts, FactCheck, FactsReport};
pub use jacobi::{sym_eigen, sym_eigenvalues, SymEigen};

use crate::cw::{CwModel, OrbitParams};
use crate::error::{Error, Result};
use crate::linalg::{SquareMatrix, Vec3};
use crate::scalar::Real;

/// The 6×6 symmetric matrix `F̂(t)` for one leg duration.
#[derive(Clone, Debug, PartialEq)]
pub struct FhatMatrix<T> {
    pub m: SquareMatrix<T>,
    pub t: T,
    pub dt_total: T,
}

impl<T: Real> FhatMatrix<T> {
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        sym_eigenvalues(&self.m)
    }

    /// Number of eigenvalues with `|λ| ≥ 1e-9·max(1, λ_max)`.
    pub fn numerical_rank(&self) -> Result<usize> {
        let values = self.eigenvalues()?;
        let cutoff = zero_eigenvalue_cutoff(&values);
        Ok(values.iter().filter(|l| l.abs() >= cutoff).count())
    }

    /// `|r(t)|²` for the leg `r_i → r_j`.
    pub fn position_norm_squared(&self, r_i: Vec3<T>, r_j: Vec3<T>) -> T {
        let x = [r_i[0], r_i[1], r_i[2], r_j[0], r_j[1], r_j[2]];
        self.m.quadratic_form(&x)
    }
}

/// Magnitude below which an eigenvalue counts as zero.
pub fn zero_eigenvalue_cutoff<T: Real>(values: &[T]) -> T {
    let lmax = values.iter().fold(T::zero(), |m, l| m.max(l.abs()));
    T::lit(1e-9) * lmax.max(T::one())
}

/// Builds `F̂(t)` for `0 < t < dt_total`.
pub fn fhat<T: Real>(model: &CwModel<T>, t: T, dt_total: T) -> Result<FhatMatrix<T>> {
    if !(t > T::zero() && t < dt_total) {
        return Err(Error::InvalidValue(format!("need 0 < t < dt_total, got t = {t}, dt_total = {dt_total}")));
    }
    let (f1, f2) = model.two_point_matrices(t, dt_total)?;
    // column k of [F1 F2]
    let col = |k: usize| -> [T; 3] {
        let src = if k < 3 { &f1 } else { &f2 };
        [src.0[0][k % 3], src.0[1][k % 3], src.0[2][k % 3]]
    };
    let mut m = SquareMatrix::zeros(6);
    for i in 0..6 {
        let ci = col(i);
        for j in i..6 {
            let cj = col(j);
            let v = ci[0] * cj[0] + ci[1] * cj[1] + ci[2] * cj[2];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(FhatMatrix { m, t, dt_total })
}

/// Gerschgorin disk on the real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk<T> {
    pub center: T,
    pub radius: T,
}

impl<T: Real> Disk<T> {
    pub fn upper(&self) -> T {
        self.center + self.radius
    }

    pub fn lower(&self) -> T {
        self.center - self.radius
    }

    pub fn contains(&self, x: T, tol: T) -> bool {
        (x - self.center).abs() <= self.radius + tol
    }
}

/// One disk per row: the diagonal entry and the deleted absolute row sum.
pub fn gerschgorin_disks<T: Real>(m: &SquareMatrix<T>) -> Vec<Disk<T>> {
    (0..m.order())
        .map(|i| {
            let row = m.row(i);
            let radius = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.abs()).sum();
            Disk { center: row[i], radius }
        })
        .collect()
}

/// Largest upper disk edge `max_k (m_kk + ρ_k)`.
pub fn gerschgorin_upper_bound<T: Real>(m: &SquareMatrix<T>) -> T {
    gerschgorin_disks(m).iter().map(Disk::upper).fold(T::neg_infinity(), T::max)
}

/// Envelope factor σ(dt): 1 up to `0.5·π/κ`, then `0.5·√2·sec(0.5·κ·dt)`.
pub fn sigma_envelope<T: Real>(orbit: &OrbitParams<T>, dt_total: T) -> Result<T> {
    if !(dt_total > T::zero() && dt_total < orbit.flight_time_limit()) {
        return Err(Error::DtOutOfRange { dt: dt_total.as_f64(), limit: orbit.flight_time_limit().as_f64() });
    }
    if dt_total <= orbit.envelope_knee() {
        return Ok(T::one());
    }
    let half = T::lit(0.5);
    Ok(half * T::SQRT_2() / (half * orbit.kappa() * dt_total).cos())
}

/// Radius of the origin-centred sphere that contains a whole two-impulse leg.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereBound<T> {
    pub delta: T,
    pub sigma: T,
    pub dt_total: T,
}

pub fn sphere_bound<T: Real>(orbit: &OrbitParams<T>, r_i: Vec3<T>, r_j: Vec3<T>, dt_total: T) -> Result<SphereBound<T>> {
    let sigma = sigma_envelope(orbit, dt_total)?;
    let delta = sigma * (r_i.norm_squared() + r_j.norm_squared()).sqrt();
    Ok(SphereBound { delta, sigma, dt_total })
}

/// Sphere radius containing a multi-impulse mission whose impulse positions
/// lie within the given radii and whose legs are all shorter than `0.5·π/κ`.
pub fn multi_impulse_envelope<T: Real>(rho_list: &[T]) -> Result<T> {
    if rho_list.is_empty() {
        return Err(Error::EmptyList);
    }
    if let Some(bad) = rho_list.iter().find(|r| !(**r > T::zero() && r.is_finite())) {
        return Err(Error::InvalidValue(format!("impulse radius must be positive, got {bad}")));
    }
    let max = rho_list.iter().copied().fold(T::zero(), T::max);
    Ok(T::SQRT_2() * max)
}

/// Conic restriction `|cos θ| ≤ c_theta` on the angle between `e_s` and the position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeBound<T> {
    pub e_s: Vec3<T>,
    pub rho_minus: T,
    pub rho_plus: Vec3<T>,
    pub c_theta: T,
}

impl<T: Real> ConeBound<T> {
    /// Half-aperture (rad) of the excluded double cone around `e_s`.
    pub fn excluded_half_angle(&self) -> T {
        self.c_theta.acos()
    }
}

/// `c_theta = min(1, e_sᵀρ⁺ / ρ⁻)`.
pub fn cone_bound<T: Real>(e_s: Vec3<T>, rho_minus: T, rho_plus: Vec3<T>) -> Result<ConeBound<T>> {
    if e_s.0.iter().any(|c| *c < T::zero() || !c.is_finite()) || (e_s.norm() - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::BadAxis);
    }
    if !(rho_minus > T::zero()) {
        return Err(Error::InvalidValue(format!("rho_minus must be positive, got {rho_minus}")));
    }
    if rho_plus.0.iter().any(|c| !(*c >= T::zero())) {
        return Err(Error::InvalidValue("rho_plus must be componentwise nonnegative".into()));
    }
    let c_theta = (e_s.dot(&rho_plus) / rho_minus).min(T::one());
    Ok(ConeBound { e_s, rho_minus, rho_plus, c_theta })
}

/// Basis axis on the smallest positive component of ρ⁺ (lowest index on ties).
pub fn best_cone_axis<T: Real>(rho_plus: Vec3<T>) -> Result<Vec3<T>> {
    if rho_plus.0.iter().any(|c| !(*c >= T::zero())) {
        return Err(Error::InvalidValue("rho_plus must be componentwise nonnegative".into()));
    }
    let mut best: Option<usize> = None;
    for i in 0..3 {
        if rho_plus[i] > T::zero() && best.is_none_or(|b| rho_plus[i] < rho_plus[b]) {
            best = Some(i);
        }
    }
    best.map(Vec3::unit).ok_or(Error::AllZero)
}

/// Measured `(ρ⁻, ρ⁺)`: the smallest position norm and the largest absolute
/// value of each coordinate over the samples.
pub fn cone_extents<'a, T: Real>(positions: impl IntoIterator<Item = &'a Vec3<T>>) -> Result<(T, Vec3<T>)> {
    let mut rho_minus = T::infinity();
    let mut rho_plus: Vec3<T> = Vec3::zeros();
    let mut any = false;
    for r in positions {
        any = true;
        rho_minus = rho_minus.min(r.norm());
        for i in 0..3 {
            rho_plus[i] = rho_plus[i].max(r[i].abs());
        }
    }
    if !any {
        return Err(Error::EmptyList);
    }
    Ok((rho_minus, rho_plus))
}

/// Cone bound from measured extents, on `axis` or on the best axis when `None`.
pub fn measured_cone_bound<'a, T: Real>(
    positions: impl IntoIterator<Item = &'a Vec3<T>>,
    axis: Option<Vec3<T>>,
) -> Result<ConeBound<T>> {
    let (rho_minus, rho_plus) = cone_extents(positions)?;
    let e_s = match axis {
        Some(a) => a,
        None => best_cone_axis(rho_plus)?,
    };
    cone_bound(e_s, rho_minus, rho_plus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit() -> OrbitParams<f64> {
        OrbitParams::earth_altitude(400.0).unwrap()
    }

    #[test]
    fn fhat_has_rank_three() {
        let model = CwModel::new(orbit());
        for (t, tau) in [(50.0, 200.0), (700.0, 1000.0), (900.0, 2500.0)] {
            let f = fhat(&model, t, tau).unwrap();
            assert!(f.m.asymmetry() <= 1e-12);
            assert_eq!(f.numerical_rank().unwrap(), 3);
        }
        assert!(fhat(&model, 0.0, 100.0).is_err());
        assert!(fhat(&model, 100.0, 100.0).is_err());
    }

    #[test]
    fn gerschgorin_of_identity() {
        let disks = gerschgorin_disks(&SquareMatrix::<f64>::identity(4));
        assert!(disks.iter().all(|d| d.center == 1.0 && d.radius == 0.0));
    }

    #[test]
    fn gerschgorin_mid_flight_matches_secant_form() {
        let o = orbit();
        let model = CwModel::new(o);
        for frac in [0.55, 0.7, 0.9] {
            let tau = frac * o.flight_time_limit();
            let f = fhat(&model, tau / 2.0, tau).unwrap();
            let expect = 0.5 / (o.kappa() * tau / 2.0).cos().powi(2);
            assert!((gerschgorin_upper_bound(&f.m) - expect).abs() < 1e-6 * expect);
            let lmax = *f.eigenvalues().unwrap().last().unwrap();
            assert!(lmax <= expect * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sigma_piecewise() {
        let o = orbit();
        assert_eq!(sigma_envelope(&o, 200.0).unwrap(), 1.0);
        assert_eq!(sigma_envelope(&o, o.envelope_knee()).unwrap(), 1.0);
        let slightly_above = sigma_envelope(&o, o.envelope_knee() * 1.0001).unwrap();
        assert!(slightly_above > 1.0 && slightly_above < 1.001);
        let near_limit = sigma_envelope(&o, o.flight_time_limit() * (1.0 - 1e-9)).unwrap();
        assert!(near_limit > 1e6);
        assert!(matches!(sigma_envelope(&o, o.flight_time_limit()), Err(Error::DtOutOfRange { .. })));
        assert!(matches!(sigma_envelope(&o, 0.0), Err(Error::DtOutOfRange { .. })));
    }

    #[test]
    fn sigma_at_fast_mean_motion() {
        let o = OrbitParams::from_mean_motion(crate::cw::EARTH_MU, 1.1e-3).unwrap();
        let s = sigma_envelope(&o, 1700.0).unwrap();
        assert!((s - 1.19).abs() < 0.01, "sigma = {s}");
    }

    #[test]
    fn sphere_bound_for_unit_endpoints() {
        let o = orbit();
        let b = sphere_bound(&o, Vec3::on_circle(1.0, 0.0), Vec3::on_circle(1.0, 20.0), 200.0).unwrap();
        assert!((b.delta - 2f64.sqrt()).abs() < 1e-15);
        let b = sphere_bound(&o, Vec3::new(0.3, -0.4, 1.2), Vec3::zeros(), 900.0).unwrap();
        assert!((b.delta - 1.3).abs() < 1e-15);
    }

    #[test]
    fn envelope_over_many_legs() {
        assert_eq!(multi_impulse_envelope(&[1.0]).unwrap(), 2f64.sqrt());
        assert_eq!(multi_impulse_envelope(&[0.5, 1.0, 0.8]).unwrap(), 2f64.sqrt());
        assert_eq!(multi_impulse_envelope::<f64>(&[]), Err(Error::EmptyList));
        assert!(multi_impulse_envelope(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn cone_bounds_from_tabulated_extents() {
        let e = Vec3::<f64>::new(0.0, 1.0, 0.0);
        let c = cone_bound(e, 0.9, Vec3::new(1.0, 0.5, 0.0)).unwrap();
        assert!((c.c_theta - 5.0 / 9.0).abs() < 1e-12);
        assert_eq!(cone_bound(e, 0.5, Vec3::new(1.0, 0.9, 0.0)).unwrap().c_theta, 1.0);
        assert_eq!(cone_bound(e, 1.0, Vec3::new(1e9, 1e9, 1e9)).unwrap().c_theta, 1.0);
        assert_eq!(cone_bound(Vec3::new(0.0, -1.0, 0.0), 1.0, Vec3::zeros()), Err(Error::BadAxis));
        assert_eq!(cone_bound(Vec3::new(0.5, 0.5, 0.0), 1.0, Vec3::zeros()), Err(Error::BadAxis));
        assert!(cone_bound(e, 0.0, Vec3::zeros()).is_err());
    }

    #[test]
    fn best_axis_selection() {
        assert_eq!(best_cone_axis(Vec3::new(1.0, 0.5, 0.0)).unwrap(), Vec3::unit(1));
        assert_eq!(best_cone_axis(Vec3::new(2.0, 3.0, 1.0)).unwrap(), Vec3::unit(2));
        assert_eq!(best_cone_axis(Vec3::new(1.0, 1.0, 2.0)).unwrap(), Vec3::unit(0));
        assert_eq!(best_cone_axis(Vec3::<f64>::zeros()), Err(Error::AllZero));
    }

    #[test]
    fn measured_extents() {
        let pts = [Vec3::new(1.0, -0.2, 0.0), Vec3::new(-0.5, 0.4, 0.1)];
        let (rho_minus, rho_plus) = cone_extents(&pts).unwrap();
        assert!((rho_minus - (0.25f64 + 0.16 + 0.01).sqrt()).abs() < 1e-15);
        assert_eq!(rho_plus, Vec3::new(1.0, 0.4, 0.1));
        let c = measured_cone_bound(&pts, None).unwrap();
        assert_eq!(c.e_s, Vec3::unit(2));
        assert!(cone_extents::<f64>(&[]).is_err());
    }
}
