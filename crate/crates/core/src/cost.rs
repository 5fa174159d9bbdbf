//! Objective: total length of all traversed arcs.

use crate::model::Instance;
use crate::solution::{Route, Solution, Stop};

/// Length of the arc sequence through `stops`.
pub fn stops_cost(instance: &Instance, stops: &[Stop]) -> f64 {
    stops.windows(2).map(|w| instance.dist(w[0].node, w[1].node)).sum()
}

pub fn route_cost(instance: &Instance, route: &Route) -> f64 {
    stops_cost(instance, &route.stops)
}

/// Sum of route lengths. Feasibility is not considered here.
pub fn solution_cost(instance: &Instance, solution: &Solution) -> f64 {
    solution.routes.iter().map(|r| route_cost(instance, r)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::build;

    #[test]
    fn idle_colocated_fleet_costs_nothing() {
        let inst = build(&[], &[((1.0, 1.0), (1.0, 1.0), 1), ((1.0, 1.0), (1.0, 1.0), 1)], &[]);
        assert_eq!(solution_cost(&inst, &Solution::empty(&inst)), 0.0);
    }

    #[test]
    fn out_and_back() {
        // (0,0) -> (3,4) -> (0,0), with the request delivered at the depot's
        // mirror point so the round trip is 2 * 5.
        let inst = build(&[((3.0, 4.0), (3.0, 4.0), 1)], &[((0.0, 0.0), (0.0, 0.0), 1)], &[]);
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        assert_eq!(solution_cost(&inst, &s), 10.0);
    }

    #[test]
    fn two_routes_sum() {
        // Route 0: (0,0)->(0,3)->(4,3)->(0,0) = 3 + 4 + 5 = 12
        // Route 1: (10,0)->(10,1)->(10,2)->(10,0) = 1 + 1 + 2 = 4
        let inst = build(
            &[((0.0, 3.0), (4.0, 3.0), 1), ((10.0, 1.0), (10.0, 2.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 1), ((10.0, 0.0), (10.0, 0.0), 1)],
            &[],
        );
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        s.insert_direct(&inst, 1, 1, 1, 2);
        assert!((solution_cost(&inst, &s) - 16.0).abs() < 1e-12);
    }
}
