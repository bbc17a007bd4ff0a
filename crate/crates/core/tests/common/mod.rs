#![allow(dead_code)]

use cwpath::{Model, Orbit, Position};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn orbit400() -> Orbit {
    Orbit::earth_altitude(400.0).unwrap()
}

pub fn model400() -> Model {
    Model::new(orbit400())
}

/// Right-hand side of the linearized relative-motion ODEs.
fn deriv(kappa: f64, s: &[f64; 6]) -> [f64; 6] {
    let k2 = kappa * kappa;
    [s[3], s[4], s[5], 3.0 * k2 * s[0] + 2.0 * kappa * s[4], -2.0 * kappa * s[3], -k2 * s[2]]
}

/// Classical fourth-order Runge-Kutta with fixed step `h`, landing exactly on `dt`.
pub fn rk4(kappa: f64, state: [f64; 6], dt: f64, h: f64) -> [f64; 6] {
    let steps = (dt / h).ceil().max(1.0) as usize;
    let h = dt / steps as f64;
    let mut s = state;
    for _ in 0..steps {
        let k1 = deriv(kappa, &s);
        let k2 = deriv(kappa, &add(&s, &k1, 0.5 * h));
        let k3 = deriv(kappa, &add(&s, &k2, 0.5 * h));
        let k4 = deriv(kappa, &add(&s, &k3, h));
        for i in 0..6 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    s
}

fn add(s: &[f64; 6], k: &[f64; 6], h: f64) -> [f64; 6] {
    let mut o = *s;
    for i in 0..6 {
        o[i] += h * k[i];
    }
    o
}

pub fn state(r: Position, v: Position) -> [f64; 6] {
    [r[0], r[1], r[2], v[0], v[1], v[2]]
}

pub fn position(s: &[f64; 6]) -> Position {
    Position::new(s[0], s[1], s[2])
}

/// Number of eigenvalues of the symmetric matrix `a` below `x`, by the
/// inertia of `a − xI` from unpivoted LDLᵀ elimination.
fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut p = m[k][k];
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            negatives += 1;
        }
        let pivot = m[k].clone();
        for row in m.iter_mut().skip(k + 1) {
            let f = row[k] / p;
            for (x, y) in row.iter_mut().zip(&pivot).skip(k + 1) {
                *x -= f * y;
            }
        }
    }
    negatives
}

/// Ascending eigenvalues by bisection on the inertia count.
pub fn bisection_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let radius = a
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs() + row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 * radius {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn random_position(rng: &mut ChaCha8Rng, scale: f64) -> Position {
    Position::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// A random leg `(r_i, r_j, v_i_minus, dt)` with flight time inside the guard window.
pub fn random_leg(rng: &mut ChaCha8Rng, model: &Model) -> (Position, Position, Position, f64) {
    let (lo, hi) = model.transfer_window();
    let r_i = random_position(rng, 5.0);
    let r_j = random_position(rng, 5.0);
    let v = random_position(rng, 1e-3);
    let dt = rng.gen_range((lo + 5.0)..(hi - 50.0));
    (r_i, r_j, v, dt)
}
