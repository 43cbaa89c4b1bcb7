//! Per-instance task assignment.
//!
//! The assignment problem is a capacitated bipartite matching (b-matching)
//! between vehicles and servers restricted to feasible edges. Its constraint
//! matrix is totally unimodular, so the combinatorial maximum found by
//! augmenting paths is also the optimum of the integer program.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Inputs of one assignment problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentProblem {
    /// Number of vehicles `K`.
    pub num_vehicles: usize,
    /// Number of servers `S`.
    pub num_servers: usize,
    /// Row-major `K × S` feasibility indicator `q`.
    pub feasible: Vec<bool>,
    /// Server capacities `C_s`.
    pub capacities: Vec<u32>,
}

impl AssignmentProblem {
    /// Builds and validates a problem.
    pub fn new(num_vehicles: usize, num_servers: usize, feasible: Vec<bool>, capacities: Vec<u32>) -> Result<Self> {
        let p = Self { num_vehicles, num_servers, feasible, capacities };
        p.validate()?;
        Ok(p)
    }

    /// Checks dimensions.
    pub fn validate(&self) -> Result<()> {
        if self.feasible.len() != self.num_vehicles * self.num_servers {
            return Err(Error::Contract("feasibility mask must be K x S"));
        }
        if self.capacities.len() != self.num_servers {
            return Err(Error::Contract("one capacity per server is required"));
        }
        Ok(())
    }

    /// `q[k][s]`.
    pub fn is_feasible(&self, vehicle: usize, server: usize) -> bool {
        self.feasible[vehicle * self.num_servers + server]
    }
}

/// A binary assignment `λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Server chosen by each vehicle, if any.
    pub server_of: Vec<Option<usize>>,
    /// Number of assigned tasks.
    pub objective: usize,
}

impl Assignment {
    /// Nothing assigned.
    pub fn empty(num_vehicles: usize) -> Self {
        Self { server_of: vec![None; num_vehicles], objective: 0 }
    }

    /// Row-major `K × S` matrix form.
    pub fn lambda(&self, num_servers: usize) -> Vec<bool> {
        let mut m = vec![false; self.server_of.len() * num_servers];
        for (k, s) in self.server_of.iter().enumerate() {
            if let Some(s) = s {
                m[k * num_servers + s] = true;
            }
        }
        m
    }

    /// Checks every constraint: at most one server per vehicle (by
    /// construction), loads within capacity, assignments only on feasible edges.
    pub fn satisfies(&self, problem: &AssignmentProblem) -> bool {
        if self.server_of.len() != problem.num_vehicles {
            return false;
        }
        let mut load = vec![0u32; problem.num_servers];
        let mut count = 0;
        for (k, s) in self.server_of.iter().enumerate() {
            if let Some(s) = *s {
                if s >= problem.num_servers || !problem.is_feasible(k, s) {
                    return false;
                }
                load[s] += 1;
                count += 1;
            }
        }
        count == self.objective && load.iter().zip(&problem.capacities).all(|(l, c)| l <= c)
    }
}

/// Maximum-cardinality assignment.
///
/// Vehicles are inserted in id order; each insertion searches for an
/// augmenting path that tries servers in id order and, at a full server,
/// tries to relocate its occupants in id order. Every step is deterministic, so
/// equal inputs give equal assignments.
pub fn solve_optimal(problem: &AssignmentProblem) -> Result<Assignment> {
    problem.validate()?;
    let (k_n, s_n) = (problem.num_vehicles, problem.num_servers);
    let adjacency: Vec<Vec<usize>> = (0..k_n).map(|k| (0..s_n).filter(|&s| problem.is_feasible(k, s)).collect()).collect();
    let mut server_of: Vec<Option<usize>> = vec![None; k_n];
    let mut occupants: Vec<Vec<usize>> = vec![Vec::new(); s_n];
    let mut visited = vec![0usize; s_n];
    let mut objective = 0;
    let total_cap: u64 = problem.capacities.iter().map(|&c| c as u64).sum();
    for k in 0..k_n {
        if objective as u64 == total_cap {
            break;
        }
        if adjacency[k].is_empty() {
            continue;
        }
        let stamp = k + 1;
        if augment(k, stamp, &adjacency, &problem.capacities, &mut server_of, &mut occupants, &mut visited) {
            objective += 1;
        }
    }
    Ok(Assignment { server_of, objective })
}

fn augment(
    k: usize,
    stamp: usize,
    adjacency: &[Vec<usize>],
    capacities: &[u32],
    server_of: &mut [Option<usize>],
    occupants: &mut [Vec<usize>],
    visited: &mut [usize],
) -> bool {
    for &s in &adjacency[k] {
        if visited[s] == stamp {
            continue;
        }
        visited[s] = stamp;
        if (occupants[s].len() as u32) < capacities[s] {
            occupants[s].push(k);
            server_of[k] = Some(s);
            return true;
        }
        for i in 0..occupants[s].len() {
            let other = occupants[s][i];
            if augment(other, stamp, adjacency, capacities, server_of, occupants, visited) {
                // `other` moved elsewhere; `k` takes its slot.
                occupants[s][i] = k;
                server_of[k] = Some(s);
                return true;
            }
        }
    }
    false
}

/// Largest `(S + 1)^K` the brute-force oracle accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Maximum objective by exhaustive enumeration of every vehicle's choice
/// (no server or one of the `S` servers).
pub fn brute_force_oracle(problem: &AssignmentProblem) -> Result<usize> {
    problem.validate()?;
    let size = (problem.num_servers as u128 + 1).checked_pow(problem.num_vehicles as u32);
    if size.is_none_or(|n| n > BRUTE_FORCE_LIMIT) {
        return Err(Error::SizeLimit);
    }
    let mut load = vec![0u32; problem.num_servers];
    Ok(enumerate(problem, 0, &mut load))
}

fn enumerate(problem: &AssignmentProblem, k: usize, load: &mut [u32]) -> usize {
    if k == problem.num_vehicles {
        return load.iter().map(|&l| l as usize).sum();
    }
    let mut best = enumerate(problem, k + 1, load);
    for s in 0..problem.num_servers {
        if problem.is_feasible(k, s) && load[s] < problem.capacities[s] {
            load[s] += 1;
            best = best.max(enumerate(problem, k + 1, load));
            load[s] -= 1;
        }
    }
    best
}

/// Nearest-server greedy baseline.
///
/// Vehicles are served in id order; each goes to the closest feasible server
/// that still has capacity (ties by server id). `distances` is row-major `K × S`.
pub fn solve_greedy_nearest(problem: &AssignmentProblem, distances: &[f64]) -> Result<Assignment> {
    problem.validate()?;
    let s_n = problem.num_servers;
    if distances.len() != problem.feasible.len() {
        return Err(Error::Contract("distance matrix must be K x S"));
    }
    let mut remaining = problem.capacities.clone();
    let mut out = Assignment::empty(problem.num_vehicles);
    let mut order: Vec<usize> = Vec::with_capacity(s_n);
    for k in 0..problem.num_vehicles {
        let row = &distances[k * s_n..(k + 1) * s_n];
        order.clear();
        order.extend(0..s_n);
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        if let Some(&s) = order.iter().find(|&&s| problem.is_feasible(k, s) && remaining[s] > 0) {
            remaining[s] -= 1;
            out.server_of[k] = Some(s);
            out.objective += 1;
        }
    }
    Ok(out)
}

/// Mean number of assigned tasks per instance.
pub fn average_throughput(assignments: &[Assignment]) -> Result<f64> {
    if assignments.is_empty() {
        return Err(Error::Contract("at least one instance is required"));
    }
    let total: usize = assignments.iter().map(|a| a.objective).sum();
    Ok(total as f64 / assignments.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn problem(k: usize, s: usize, q: &[u8], caps: &[u32]) -> AssignmentProblem {
        AssignmentProblem::new(k, s, q.iter().map(|&x| x == 1).collect(), caps.to_vec()).unwrap()
    }

    #[test]
    fn zero_mask() {
        let p = problem(3, 2, &[0; 6], &[2, 2]);
        let a = solve_optimal(&p).unwrap();
        assert_eq!(a.objective, 0);
        assert!(a.server_of.iter().all(Option::is_none));
    }

    #[test]
    fn singleton() {
        let p = problem(1, 1, &[1], &[1]);
        assert_eq!(solve_optimal(&p).unwrap().objective, 1);
    }

    #[test]
    fn contention_needs_reassignment() {
        // v0 only reaches s0, v1 reaches both.
        let p = problem(2, 2, &[1, 0, 1, 1], &[1, 1]);
        let a = solve_optimal(&p).unwrap();
        assert_eq!(a.objective, 2);
        assert_eq!(a.server_of, [Some(0), Some(1)]);
        assert_eq!(brute_force_oracle(&p).unwrap(), 2);
    }

    #[test]
    fn greedy_loses_on_contention() {
        // v1 is processed first after relabelling: v0 reaches both and is nearer s0,
        // v1 only reaches s0.
        let p = problem(2, 2, &[1, 1, 1, 0], &[1, 1]);
        let d = [1.0, 5.0, 2.0, 6.0];
        let g = solve_greedy_nearest(&p, &d).unwrap();
        assert_eq!(g.objective, 1);
        assert_eq!(solve_optimal(&p).unwrap().objective, 2);
    }

    #[test]
    fn greedy_unlimited_capacity_assigns_everyone_feasible() {
        let p = problem(3, 2, &[1, 0, 0, 0, 0, 1], &[10, 10]);
        let g = solve_greedy_nearest(&p, &[1.0; 6]).unwrap();
        assert_eq!(g.objective, 2);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(brute_force_oracle(&problem(5, 2, &[1; 10], &[2, 2])).unwrap(), 4);
        assert_eq!(brute_force_oracle(&problem(0, 2, &[], &[1, 1])).unwrap(), 0);
        let big = AssignmentProblem::new(12, 4, vec![true; 48], vec![1; 4]).unwrap();
        assert_eq!(brute_force_oracle(&big), Err(Error::SizeLimit));
    }

    #[test]
    fn throughput_examples() {
        let mk = |o| Assignment { server_of: vec![], objective: o };
        assert_eq!(average_throughput(&[mk(0), mk(0)]).unwrap(), 0.0);
        assert_eq!(average_throughput(&[mk(3), mk(5)]).unwrap(), 4.0);
        assert_eq!(average_throughput(&[mk(7)]).unwrap(), 7.0);
        assert!(average_throughput(&[]).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(AssignmentProblem::new(2, 2, vec![true; 3], vec![1, 1]).is_err());
        assert!(AssignmentProblem::new(2, 2, vec![true; 4], vec![1]).is_err());
    }

    fn arb_problem() -> impl Strategy<Value = (AssignmentProblem, Vec<f64>)> {
        (0usize..=6, 1usize..=3).prop_flat_map(|(k, s)| {
            (
                proptest::collection::vec(any::<bool>(), k * s),
                proptest::collection::vec(0u32..=3, s),
                proptest::collection::vec(0.0f64..100.0, k * s),
            )
                .prop_map(move |(q, c, d)| (AssignmentProblem::new(k, s, q, c).unwrap(), d))
        })
    }

    proptest! {
        #[test]
        fn optimal_matches_oracle((p, d) in arb_problem()) {
            let a = solve_optimal(&p).unwrap();
            prop_assert!(a.satisfies(&p));
            prop_assert_eq!(a.objective, brute_force_oracle(&p).unwrap());
            let cap: u64 = p.capacities.iter().map(|&c| c as u64).sum();
            let rows = (0..p.num_vehicles).filter(|&k| (0..p.num_servers).any(|s| p.is_feasible(k, s))).count();
            prop_assert!(a.objective as u64 <= cap.min(p.num_vehicles as u64));
            prop_assert!(a.objective <= rows);
            let g = solve_greedy_nearest(&p, &d).unwrap();
            prop_assert!(g.satisfies(&p));
            prop_assert!(g.objective <= a.objective);
            prop_assert_eq!(solve_optimal(&p).unwrap(), a);
        }
    }
}
