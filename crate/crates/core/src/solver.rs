//! Coupled fixed point between the Wi-Fi and LAA transmission probabilities.
//!
//! Each network's collision probability depends on both transmission
//! probabilities, and each transmission probability is a function of its own
//! collision probability through the backoff chain. The solver runs a damped
//! iteration on `(tau_w, tau_l)` and falls back to nested bisection when the
//! iteration stalls.

use crate::error::{Error, Result};
use crate::markov::BackoffChain;
use crate::params::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Bound on the max absolute fixed-point residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the new iterate, in `(0, 1]`.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-10,
            max_iterations: 10_000,
            damping: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("solver.tolerance", "must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("solver.damping", "must lie in (0, 1]"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("solver.max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    DampedIteration,
    Bisection,
}

/// A fixed point of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub tau_w: f64,
    pub tau_l: f64,
    pub p_w: f64,
    pub p_l: f64,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

/// The coupled equations for one scenario, with comparison-mode overrides
/// already applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSystem {
    pub n_wifi: u32,
    pub n_laa: u32,
    pub wifi: BackoffChain,
    pub laa: BackoffChain,
    pub p_dw: f64,
    pub p_dl: f64,
}

impl CoupledSystem {
    pub fn from_scenario(s: &Scenario) -> Self {
        let e = s.effective();
        CoupledSystem {
            n_wifi: e.n_wifi,
            n_laa: e.n_laa,
            wifi: BackoffChain::wifi(e.wifi.w0, e.wifi.m),
            laa: BackoffChain::laa(e.laa.w0, e.laa.m, e.laa.retry_limit),
            p_dw: e.p_dw,
            p_dl: e.p_dl,
        }
    }

    pub fn wifi_only(n: u32, w0: u32, m: u32) -> Self {
        CoupledSystem {
            n_wifi: n,
            n_laa: 0,
            wifi: BackoffChain::wifi(w0, m),
            laa: BackoffChain::laa(1, 0, 0),
            p_dw: 1.0,
            p_dl: 1.0,
        }
    }

    /// Collision probability seen by a transmitting Wi-Fi node. With perfect
    /// detection this is `1 - (1-tau_w)^(n_w-1) (1-tau_l)^n_l`; otherwise
    /// only the detected share of LAA activity counts.
    pub fn wifi_collision(&self, tau_w: f64, tau_l: f64) -> f64 {
        if self.n_wifi == 0 {
            return 0.0;
        }
        let own_idle = (1.0 - tau_w).powi(self.n_wifi as i32 - 1);
        let other_active = 1.0 - (1.0 - tau_l).powi(self.n_laa as i32);
        other_active * self.p_dw * own_idle + 1.0 - own_idle
    }

    /// Collision probability seen by a transmitting LAA node.
    pub fn laa_collision(&self, tau_w: f64, tau_l: f64) -> f64 {
        if self.n_laa == 0 {
            return 0.0;
        }
        let own_idle = (1.0 - tau_l).powi(self.n_laa as i32 - 1);
        let other_active = 1.0 - (1.0 - tau_w).powi(self.n_wifi as i32);
        other_active * self.p_dl * own_idle + 1.0 - own_idle
    }

    /// One application of the fixed-point map. Absent networks stay at 0.
    pub fn map(&self, tau_w: f64, tau_l: f64) -> (f64, f64) {
        let next_w = if self.n_wifi > 0 {
            self.wifi.tau_clamped(self.wifi_collision(tau_w, tau_l))
        } else {
            0.0
        };
        let next_l = if self.n_laa > 0 {
            self.laa.tau_clamped(self.laa_collision(tau_w, tau_l))
        } else {
            0.0
        };
        (next_w, next_l)
    }

    pub fn residual(&self, tau_w: f64, tau_l: f64) -> f64 {
        let (fw, fl) = self.map(tau_w, tau_l);
        (fw - tau_w).abs().max((fl - tau_l).abs())
    }

    fn initial(&self) -> (f64, f64) {
        let w = if self.n_wifi > 0 {
            2.0 / (f64::from(self.wifi.w0) + 1.0)
        } else {
            0.0
        };
        let l = if self.n_laa > 0 {
            2.0 / (f64::from(self.laa.w0) + 1.0)
        } else {
            0.0
        };
        (w, l)
    }

    fn solution(&self, tau_w: f64, tau_l: f64, iterations: usize, method: SolveMethod) -> Solution {
        Solution {
            tau_w,
            tau_l,
            p_w: self.wifi_collision(tau_w, tau_l),
            p_l: self.laa_collision(tau_w, tau_l),
            residual: self.residual(tau_w, tau_l),
            iterations,
            method,
        }
    }

    /// Root in `tau_l` of `tau_l = f_l(P_l(tau_w, tau_l))` for fixed `tau_w`.
    /// The left side increases and the right side decreases in `tau_l`, so
    /// the root is unique.
    fn laa_response(&self, tau_w: f64) -> f64 {
        if self.n_laa == 0 {
            return 0.0;
        }
        let g = |tl: f64| tl - self.laa.tau_clamped(self.laa_collision(tau_w, tl));
        bisect(g, 0.0, 2.0 / (f64::from(self.laa.w0) + 1.0))
    }

    /// `tau_w - f_w(P_w(tau_w, tau_l*(tau_w)))` with the LAA side solved.
    fn reduced_residual(&self, tau_w: f64) -> f64 {
        let tl = self.laa_response(tau_w);
        tau_w - self.wifi.tau_clamped(self.wifi_collision(tau_w, tl))
    }

    fn wifi_upper(&self) -> f64 {
        2.0 / (f64::from(self.wifi.w0) + 1.0)
    }

    /// Nested 1-D bisection. Bisection in `tau_w` over the reduced residual,
    /// which is negative at 0 and non-negative at the upper bound.
    pub fn solve_bisection(&self, iterations_so_far: usize) -> Solution {
        if self.n_wifi == 0 {
            let tl = self.laa_response(0.0);
            return self.solution(0.0, tl, iterations_so_far, SolveMethod::Bisection);
        }
        let tw = bisect(|t| self.reduced_residual(t), 0.0, self.wifi_upper());
        let tl = self.laa_response(tw);
        self.solution(tw, tl, iterations_so_far, SolveMethod::Bisection)
    }

    /// Every fixed point found by scanning the reduced residual on `samples`
    /// sub-intervals and refining each sign change.
    pub fn scan_fixed_points(&self, samples: usize) -> Vec<Solution> {
        if self.n_wifi == 0 || self.n_laa == 0 {
            return vec![self.solve_bisection(0)];
        }
        let hi = self.wifi_upper();
        let samples = samples.max(2);
        let grid: Vec<(f64, f64)> = (0..=samples)
            .map(|i| {
                let t = hi * i as f64 / samples as f64;
                (t, self.reduced_residual(t))
            })
            .collect();
        let mut out = Vec::new();
        for pair in grid.windows(2) {
            let (a, ga) = pair[0];
            let (b, gb) = pair[1];
            if ga == 0.0 {
                out.push(a);
            } else if ga.signum() != gb.signum() && gb != 0.0 {
                out.push(bisect(|t| self.reduced_residual(t), a, b));
            }
        }
        if let Some(&(b, gb)) = grid.last() {
            if gb == 0.0 {
                out.push(b);
            }
        }
        out.into_iter()
            .map(|tw| self.solution(tw, self.laa_response(tw), 0, SolveMethod::Bisection))
            .collect()
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<Solution> {
        cfg.validate()?;
        let (mut tw, mut tl) = self.initial();
        let mut checkpoint = f64::INFINITY;
        for it in 0..cfg.max_iterations {
            let (fw, fl) = self.map(tw, tl);
            let r = (fw - tw).abs().max((fl - tl).abs());
            if r <= cfg.tolerance {
                return Ok(self.solution(tw, tl, it, SolveMethod::DampedIteration));
            }
            if it % 100 == 0 {
                if it > 0 && r > 0.5 * checkpoint {
                    return self.finish_with_bisection(cfg, it, tw, tl);
                }
                checkpoint = r;
            }
            tw += cfg.damping * (fw - tw);
            tl += cfg.damping * (fl - tl);
        }
        self.finish_with_bisection(cfg, cfg.max_iterations, tw, tl)
    }

    fn finish_with_bisection(
        &self,
        cfg: &SolverConfig,
        iterations: usize,
        tw: f64,
        tl: f64,
    ) -> Result<Solution> {
        let sol = self.solve_bisection(iterations);
        if sol.residual <= cfg.tolerance {
            Ok(sol)
        } else {
            Err(Error::NoConvergence {
                tau_w: tw,
                tau_l: tl,
                residual: self.residual(tw, tl).min(sol.residual),
                iterations,
            })
        }
    }
}

/// Bisection for an increasing sign change on `[lo, hi]`, run to machine
/// precision.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    if f_lo >= 0.0 {
        return lo;
    }
    if f(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Joint fixed point for a coexistence scenario.
pub fn solve_coexistence(s: &Scenario, cfg: &SolverConfig) -> Result<Solution> {
    s.validate()?;
    CoupledSystem::from_scenario(s).solve(cfg)
}

/// Fixed point of a Wi-Fi-only network of `n` nodes.
pub fn solve_wifi_only(n: u32, w0: u32, m: u32, cfg: &SolverConfig) -> Result<Solution> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one node is required"));
    }
    if w0 == 0 {
        return Err(Error::invalid("wifi.w0", "must be at least 1"));
    }
    CoupledSystem::wifi_only(n, w0, m).solve(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::wifi_tau;
    use crate::params::{load_priority_class, LaaParams, WifiParams};
    use approx::assert_relative_eq;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn single_node_never_collides() {
        let s = solve_wifi_only(1, 16, 6, &cfg()).unwrap();
        assert_eq!(s.p_w, 0.0);
        assert_relative_eq!(s.tau_w, 2.0 / 17.0, max_relative = 1e-12);
    }

    #[test]
    fn more_nodes_lower_tau() {
        let two = solve_wifi_only(2, 16, 6, &cfg()).unwrap();
        let fifty = solve_wifi_only(50, 16, 6, &cfg()).unwrap();
        assert!(fifty.tau_w < two.tau_w);
        assert!(fifty.residual <= 1e-10);
    }

    #[test]
    fn one_plus_one_collapses_own_terms() {
        let s = Scenario::new(1, 1, WifiParams::default(), load_priority_class(3).unwrap())
            .unwrap()
            .with_detection(0.7, 0.4)
            .unwrap();
        let sol = solve_coexistence(&s, &cfg()).unwrap();
        assert_relative_eq!(sol.p_w, sol.tau_l * 0.7, max_relative = 1e-12);
        assert_relative_eq!(sol.p_l, sol.tau_w * 0.4, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_networks_give_symmetric_solution() {
        let w = WifiParams::default().with_contention(16, 6);
        let l = LaaParams::default().with_contention(16, 6).with_retry_limit(1);
        let s = Scenario::new(10, 10, w, l).unwrap();
        let sol = solve_coexistence(&s, &cfg()).unwrap();
        assert_relative_eq!(sol.tau_w, sol.tau_l, max_relative = 1e-9);
        assert_relative_eq!(sol.p_w, sol.p_l, max_relative = 1e-9);
    }

    #[test]
    fn empty_network_reported_as_zero() {
        let s = Scenario::new(3, 0, WifiParams::default(), LaaParams::default()).unwrap();
        let sol = solve_coexistence(&s, &cfg()).unwrap();
        assert_eq!((sol.tau_l, sol.p_l), (0.0, 0.0));
        let s = Scenario::new(0, 3, WifiParams::default(), LaaParams::default()).unwrap();
        let sol = solve_coexistence(&s, &cfg()).unwrap();
        assert_eq!((sol.tau_w, sol.p_w), (0.0, 0.0));
        assert!(sol.tau_l > 0.0);
    }

    #[test]
    fn lone_blind_wifi_node_sees_no_collisions() {
        let s = Scenario::new(1, 4, WifiParams::default(), LaaParams::default())
            .unwrap()
            .with_detection(0.0, 1.0)
            .unwrap();
        let sol = solve_coexistence(&s, &cfg()).unwrap();
        assert_eq!(sol.p_w, 0.0);
        assert_relative_eq!(sol.tau_w, 2.0 / 17.0, max_relative = 1e-12);
    }

    #[test]
    fn bisection_agrees_with_damped_iteration() {
        let s = Scenario::new(4, 2, WifiParams::default().with_contention(4, 1), load_priority_class(1).unwrap())
            .unwrap();
        let sys = CoupledSystem::from_scenario(&s);
        let a = sys.solve(&cfg()).unwrap();
        let b = sys.solve_bisection(0);
        assert_eq!(a.method, SolveMethod::DampedIteration);
        assert!((a.tau_w - b.tau_w).abs() < 1e-9);
        assert!((a.tau_l - b.tau_l).abs() < 1e-9);
        let all = sys.scan_fixed_points(64);
        assert_eq!(all.len(), 1);
        assert!((all[0].tau_w - a.tau_w).abs() < 1e-9);
    }

    #[test]
    fn stalled_iteration_falls_back() {
        // Undamped iteration on tiny windows oscillates.
        let s = Scenario::new(8, 8, WifiParams::default().with_contention(2, 0), LaaParams::default().with_contention(2, 0))
            .unwrap();
        let c = SolverConfig {
            damping: 1.0,
            ..cfg()
        };
        let sol = solve_coexistence(&s, &c).unwrap();
        assert!(sol.residual <= 1e-10);
        let undamped = CoupledSystem::from_scenario(&s);
        assert!(undamped.residual(sol.tau_w, sol.tau_l) <= 1e-10);
    }

    #[test]
    fn exhausted_budget_reports_last_iterate() {
        let s = Scenario::new(5, 5, WifiParams::default(), LaaParams::default()).unwrap();
        let c = SolverConfig {
            max_iterations: 3,
            tolerance: 1e-300,
            ..cfg()
        };
        match solve_coexistence(&s, &c) {
            Err(Error::NoConvergence { iterations, residual, .. }) => {
                assert_eq!(iterations, 3);
                assert!(residual.is_finite());
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            damping: 0.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            tolerance: -1.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn residual_is_consistent_with_chain() {
        let sol = solve_wifi_only(7, 32, 5, &cfg()).unwrap();
        let back = wifi_tau(32, 5, 1.0 - (1.0 - sol.tau_w).powi(6)).unwrap();
        assert!((back - sol.tau_w).abs() <= 1e-10);
    }
}
