//! Multi-start cyclic coordinate descent over unitary bases.
//!
//! A basis is moved by two-level rotations acting on columns `i < j`:
//! `u_i ← c·u_i + s·e^{-iφ}·u_j`, `u_j ← -s·e^{iφ}·u_i + c·u_j` with
//! `c = cos θ`, `s = sin θ`. Rotations by `θ = ±π/2` only relabel outcomes,
//! so `θ` is searched on one period `[-π/4, π/4)`.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::matfun::{CMat, C64};
use crate::states::{self, RngSeed};

/// Objective over a tuple of unitary bases, one per measured subsystem.
pub(crate) trait BasisObjective: Sync {
    type SiteCache;
    type Pair: PairFn;

    fn basis_dims(&self) -> &[usize];
    fn value(&self, bases: &[CMat]) -> f64;
    /// Data that stays fixed while only basis `k` moves.
    fn site_cache(&self, bases: &[CMat], k: usize) -> Self::SiteCache;
    /// Restriction of the objective to rotations of columns `(i, j)` of `basis`.
    fn pair(&self, cache: &Self::SiteCache, basis: &CMat, i: usize, j: usize) -> Self::Pair;
}

/// Objective restricted to one rotation; only differences in value matter.
pub(crate) trait PairFn {
    fn eval(&self, theta: f64, phi: f64) -> f64;
    /// `∂/∂θ` of [`PairFn::eval`].
    fn slope(&self, theta: f64, phi: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchParams {
    pub starts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub bases: Vec<CMat>,
    pub value: f64,
    pub converged: bool,
}

pub(crate) fn rotate_columns(u: &mut CMat, i: usize, j: usize, theta: f64, phi: f64) {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, -phi);
    for r in 0..u.nrows() {
        let (ui, uj) = (u[(r, i)], u[(r, j)]);
        u[(r, i)] = ui * c + uj * e * s;
        u[(r, j)] = -(ui * e.conj() * s) + uj * c;
    }
}

const THETA_GRID: usize = 6;
const PHI_GRID: usize = 8;
const GOLDEN_WIDTH: f64 = 1e-6;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimum on `[lo, hi]`; never returns worse than `(x0, f0)`.
fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x0: f64, f0: f64) -> (f64, f64) {
    let (mut best_x, mut best_f) = (x0, f0);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_WIDTH {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best_f {
            best_x = x;
            best_f = v;
        }
    }
    (best_x, best_f)
}

/// Periodic grid of `n` points centred on `x0` spanning `2·half`, then
/// golden section around the best grid point.
fn grid_golden<F: Fn(f64) -> f64>(f: F, x0: f64, f0: f64, half: f64, n: usize) -> (f64, f64) {
    let step = 2.0 * half / n as f64;
    let (mut bx, mut bf) = (x0, f0);
    for k in 1..n {
        let x = x0 + step * k as f64 - if k > n / 2 { 2.0 * half } else { 0.0 };
        let v = f(x);
        if v < bf {
            bx = x;
            bf = v;
        }
    }
    golden(&f, bx - step, bx + step, bx, bf)
}

/// Best rotation `(θ, φ)` for one pair, with its value; `(0, 0)` when
/// nothing beats the identity.
fn optimize_pair<P: PairFn>(pair: &P) -> (f64, f64, f64, f64) {
    let f0 = pair.eval(0.0, 0.0);
    let (mut theta, mut phi, mut best) = (0.0, 0.0, f0);
    let dt = 2.0 * FRAC_PI_4 / THETA_GRID as f64;
    let dp = 2.0 * PI / PHI_GRID as f64;
    for a in 0..THETA_GRID {
        let t = -FRAC_PI_4 + dt * a as f64;
        if t.abs() < 1e-15 {
            continue;
        }
        for b in 0..PHI_GRID {
            let p = -PI + dp * b as f64;
            let v = pair.eval(t, p);
            if v < best {
                (theta, phi, best) = (t, p, v);
            }
        }
    }
    for _ in 0..3 {
        let before = best;
        (theta, best) = grid_golden(|t| pair.eval(t, phi), theta, best, FRAC_PI_4, THETA_GRID);
        (phi, best) = grid_golden(|p| pair.eval(theta, p), phi, best, PI, PHI_GRID);
        if before - best <= 1e-15 * before.abs().max(1.0) {
            break;
        }
    }
    (theta, phi, best, f0)
}

/// One local search from the given bases: value-based sweeps, then a slope polish.
pub(crate) fn descend<O: BasisObjective>(
    obj: &O,
    mut bases: Vec<CMat>,
    max_sweeps: usize,
    tol: f64,
) -> SearchOutcome {
    let mut value = obj.value(&bases);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let before = value;
        for k in 0..bases.len() {
            let d = obj.basis_dims()[k];
            if d < 2 {
                continue;
            }
            let cache = obj.site_cache(&bases, k);
            for i in 0..d {
                for j in i + 1..d {
                    let pair = obj.pair(&cache, &bases[k], i, j);
                    let (theta, phi, best, f0) = optimize_pair(&pair);
                    if best < f0 {
                        rotate_columns(&mut bases[k], i, j, theta, phi);
                    }
                }
            }
        }
        value = obj.value(&bases);
        if before - value < tol {
            converged = true;
            break;
        }
    }
    let polished = polish(obj, bases.clone());
    let polished_value = obj.value(&polished);
    if polished_value <= value + 1e-12 {
        bases = polished;
        value = polished_value;
    }
    SearchOutcome { bases, value, converged }
}

const POLISH_SWEEPS: usize = 50;
const SECANT_STEPS: usize = 30;

/// Secant search for a zero of the slope along the steepest phase.
/// Returns `(θ, φ)` when it lowers the slope without raising the value
/// beyond rounding.
fn polish_pair<P: PairFn>(pair: &P) -> Option<(f64, f64, f64)> {
    let s0 = pair.slope(0.0, 0.0);
    let s1 = pair.slope(0.0, std::f64::consts::FRAC_PI_2);
    // f'(0; φ) = -2 Re(e^{-iφ} G) with G = -(s0 + i s1) / 2
    let g = C64::new(-0.5 * s0, -0.5 * s1);
    let norm = g.norm();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let phi = g.arg();
    let slope = |t: f64| pair.slope(t, phi);
    let (mut t0, mut d0) = (0.0, -2.0 * norm);
    let h = 1e-7;
    let (mut t1, mut d1) = (h, slope(h));
    let (mut best_t, mut best_d) = if d1.abs() < d0.abs() { (t1, d1) } else { (t0, d0) };
    for _ in 0..SECANT_STEPS {
        if d1 == d0 {
            break;
        }
        let t2 = t1 - d1 * (t1 - t0) / (d1 - d0);
        if !t2.is_finite() || t2.abs() > FRAC_PI_4 {
            break;
        }
        let d2 = slope(t2);
        (t0, d0, t1, d1) = (t1, d1, t2, d2);
        if d2.abs() < best_d.abs() {
            (best_t, best_d) = (t2, d2);
        }
        if d2 == 0.0 {
            break;
        }
    }
    if best_t == 0.0 {
        return None;
    }
    let (f0, f1) = (pair.eval(0.0, 0.0), pair.eval(best_t, phi));
    (f1 <= f0 + 1e-14 * f0.abs().max(1.0)).then_some((best_t, phi, norm))
}

/// Drives pairwise slopes to zero after the value-based search has stalled.
/// Value-based line searches resolve angles only to about `√(ε/curvature)`;
/// slopes resolve them to about `ε/curvature`.
pub(crate) fn polish<O: BasisObjective>(obj: &O, mut bases: Vec<CMat>) -> Vec<CMat> {
    let mut last = f64::INFINITY;
    for _ in 0..POLISH_SWEEPS {
        let mut largest = 0.0f64;
        for k in 0..bases.len() {
            let d = obj.basis_dims()[k];
            if d < 2 {
                continue;
            }
            let cache = obj.site_cache(&bases, k);
            for i in 0..d {
                for j in i + 1..d {
                    let pair = obj.pair(&cache, &bases[k], i, j);
                    if let Some((theta, phi, g)) = polish_pair(&pair) {
                        largest = largest.max(g);
                        rotate_columns(&mut bases[k], i, j, theta, phi);
                    }
                }
            }
        }
        if largest >= last {
            break;
        }
        last = largest;
    }
    bases
}

/// Haar-random starting bases; start `k` draws from stream `k` of the seed.
pub(crate) fn initial_bases(dims: &[usize], seed: u64, start: usize) -> Vec<CMat> {
    let mut rng = RngSeed(seed).stream(start as u64);
    dims.iter().map(|&d| states::random_unitary(d, &mut rng)).collect()
}

/// Runs every start and keeps the lowest value; ties go to the lowest start
/// index, so the result does not depend on scheduling.
pub(crate) fn multi_start<O: BasisObjective>(obj: &O, params: SearchParams) -> SearchOutcome {
    let starts = params.starts.max(1);
    let outcomes: Vec<SearchOutcome> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let init = initial_bases(obj.basis_dims(), params.seed, s);
            descend(obj, init, params.max_sweeps, params.tol)
        })
        .collect();
    outcomes
        .into_iter()
        .reduce(|best, o| if o.value < best.value { o } else { best })
        .expect("at least one start")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::unitarity_defect;

    #[test]
    fn rotation_keeps_unitarity_and_relabels_at_quarter_turn() {
        let mut rng = RngSeed(3).rng();
        let u0 = states::random_unitary(4, &mut rng);
        let mut u = u0.clone();
        rotate_columns(&mut u, 1, 3, 0.37, -1.2);
        assert!(unitarity_defect(&u) < 1e-13);
        let mut v = u0.clone();
        rotate_columns(&mut v, 0, 2, std::f64::consts::FRAC_PI_2, 0.4);
        for r in 0..4 {
            assert!((v[(r, 0)].norm() - u0[(r, 2)].norm()).abs() < 1e-14);
            assert!((v[(r, 2)].norm() - u0[(r, 0)].norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = golden(|x| (x - 0.3).powi(2), -1.0, 1.0, 0.0, 0.09);
        assert!((x - 0.3).abs() < GOLDEN_WIDTH && v < 1e-12);
    }

    struct Sinusoid;
    impl PairFn for Sinusoid {
        fn eval(&self, t: f64, p: f64) -> f64 {
            -(2.0 * t).sin().powi(2) * (p - 1.0).cos()
        }
        fn slope(&self, t: f64, p: f64) -> f64 {
            -2.0 * (4.0 * t).sin() * (p - 1.0).cos()
        }
    }

    #[test]
    fn pair_search_reaches_global_minimum() {
        let (t, p, v, f0) = optimize_pair(&Sinusoid);
        assert_eq!(f0, 0.0);
        assert!((v + 1.0).abs() < 1e-12);
        assert!(((t.abs() - FRAC_PI_4).abs()) < 1e-6);
        assert!((p - 1.0).abs() < 1e-5);
    }
}
