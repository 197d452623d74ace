//! Wave-plate rotation schedules for one training epoch, and their angular
//! travel cost.
//!
//! Every epoch must visit a fixed set of stage configurations: for the VQC,
//! (x_i, theta) and (x_i, theta + pi/4) for every data angle; for the NEVQC,
//! the five parameter groups {(rho1, rho2), (rho1 +- pi/4, rho2),
//! (rho1, rho2 +- pi/4)} at every data angle. The planner emits
//! group-contiguous routes that sweep the data stage in alternating (snake)
//! direction, which is the family the hardware uses: the VQC route is the
//! U-shaped sweep, and the NEVQC group order is found by exhaustive search
//! over all 120 permutations. The general shortest-route problem is a TSP and
//! is not attempted.
//!
//! Costs are in rotation-parameter radians (physical plate travel is half)
//! and are accumulated from the epoch's rest configuration, i.e. the
//! unshifted parameters at the first data angle. The cost comparisons in this
//! module are meaningful for the sum metric, where moving two stages costs
//! the sum of their travels.

use itertools::Itertools;

/// How simultaneous travel of several stages is charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Metric {
    /// Total travel across stages (the default cost model).
    #[default]
    Sum,
    /// Slowest-stage travel, for stages that move simultaneously.
    Max,
}

impl Metric {
    fn combine(self, deltas: &[f64]) -> f64 {
        match self {
            Metric::Sum => deltas.iter().map(|d| d.abs()).sum(),
            Metric::Max => deltas.iter().map(|d| d.abs()).fold(0.0, f64::max),
        }
    }
}

/// The trainable-plate configuration whose measurement positions an epoch
/// must visit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircuitRoute {
    Vqc { theta: f64 },
    Nevqc { rho1: f64, rho2: f64 },
}

/// One required measurement configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisitPoint {
    pub x: f64,
    pub theta1: f64,
    /// Second trainable stage; absent for the VQC.
    pub theta2: Option<f64>,
}

/// An ordered visit schedule with per-leg travel costs.
///
/// `leg_costs[i]` is the travel spent arriving at `points[i]` (the first leg
/// starts from the rest configuration), and `return_cost` is any trailing
/// travel back toward the unshifted parameters. `total_cost` is their sum.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub points: Vec<VisitPoint>,
    pub leg_costs: Vec<f64>,
    pub return_cost: f64,
    pub total_cost: f64,
    pub metric: Metric,
}

const SHIFT: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Clone, Copy, PartialEq)]
struct Cfg {
    x: f64,
    t1: f64,
    t2: Option<f64>,
}

fn leg(metric: Metric, from: Cfg, to: Cfg) -> f64 {
    match (from.t2, to.t2) {
        (Some(a2), Some(b2)) => metric.combine(&[to.x - from.x, to.t1 - from.t1, b2 - a2]),
        _ => metric.combine(&[to.x - from.x, to.t1 - from.t1]),
    }
}

fn push(points: &mut Vec<VisitPoint>, legs: &mut Vec<f64>, prev: &mut Cfg, metric: Metric, to: Cfg) {
    legs.push(leg(metric, *prev, to));
    points.push(VisitPoint { x: to.x, theta1: to.t1, theta2: to.t2 });
    *prev = to;
}

/// Plans the epoch route for sorted data angles `xs`.
///
/// VQC: sweep (x_1..x_m, theta + pi/4), then (x_m..x_1, theta); the route
/// starts and ends at the rest configuration, with sum-metric cost
/// 2 (x_m - x_1) + pi/2.
///
/// NEVQC: the five parameter groups are ordered by exhaustive search over all
/// 120 permutations (minimizing entry plus transition travel from the rest
/// configuration; ties resolved by the first minimum in lexicographic order),
/// and the data stage snakes through `xs` within each group.
pub fn plan_route(xs: &[f64], circuit: &CircuitRoute, metric: Metric) -> Schedule {
    assert!(!xs.is_empty(), "route needs at least one data angle");
    debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]), "xs must be sorted");
    let mut points = Vec::new();
    let mut legs = Vec::new();
    match *circuit {
        CircuitRoute::Vqc { theta } => {
            let rest = Cfg { x: xs[0], t1: theta, t2: None };
            let mut prev = rest;
            for &x in xs {
                push(&mut points, &mut legs, &mut prev, metric, Cfg { x, t1: theta + SHIFT, t2: None });
            }
            for &x in xs.iter().rev() {
                push(&mut points, &mut legs, &mut prev, metric, Cfg { x, t1: theta, t2: None });
            }
        }
        CircuitRoute::Nevqc { rho1, rho2 } => {
            let groups = nevqc_groups(rho1, rho2);
            let order = best_group_order(&groups, metric);
            let mut prev = Cfg { x: xs[0], t1: rho1, t2: Some(rho2) };
            let mut ascending = true;
            for &g in &order {
                let (t1, t2) = groups[g];
                if ascending {
                    for &x in xs {
                        push(&mut points, &mut legs, &mut prev, metric, Cfg { x, t1, t2: Some(t2) });
                    }
                } else {
                    for &x in xs.iter().rev() {
                        push(&mut points, &mut legs, &mut prev, metric, Cfg { x, t1, t2: Some(t2) });
                    }
                }
                ascending = !ascending;
            }
        }
    }
    let total: f64 = legs.iter().sum();
    Schedule { points, leg_costs: legs, return_cost: 0.0, total_cost: total, metric }
}

/// The five NEVQC parameter groups, unshifted first.
fn nevqc_groups(rho1: f64, rho2: f64) -> [(f64, f64); 5] {
    [
        (rho1, rho2),
        (rho1 + SHIFT, rho2),
        (rho1 - SHIFT, rho2),
        (rho1, rho2 + SHIFT),
        (rho1, rho2 - SHIFT),
    ]
}

fn group_dist(metric: Metric, a: (f64, f64), b: (f64, f64)) -> f64 {
    metric.combine(&[b.0 - a.0, b.1 - a.1])
}

/// Exhaustive search over the 120 group permutations: minimizes entry travel
/// from the rest configuration plus the four transition legs. Sweep cost is
/// order-independent and excluded from the objective.
fn best_group_order(groups: &[(f64, f64); 5], metric: Metric) -> Vec<usize> {
    let rest = groups[0];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..5).permutations(5) {
        let mut cost = group_dist(metric, rest, groups[perm[0]]);
        for w in perm.windows(2) {
            cost += group_dist(metric, groups[w[0]], groups[w[1]]);
        }
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, perm));
        }
    }
    best.expect("five groups always yield a permutation").1
}

/// Stage travel between two configurations under `metric`. Configurations
/// with and without a second trainable stage compare over the stages they
/// share.
pub fn config_distance(a: &VisitPoint, b: &VisitPoint, metric: Metric) -> f64 {
    let from = Cfg { x: a.x, t1: a.theta1, t2: a.theta2 };
    let to = Cfg { x: b.x, t1: b.theta1, t2: b.theta2 };
    leg(metric, from, to)
}

/// Baseline route: data angles in input order, all parameter configurations
/// re-visited at each angle as a closed loop from the unshifted rest
/// parameters.
pub fn naive_route(xs: &[f64], circuit: &CircuitRoute, metric: Metric) -> Schedule {
    assert!(!xs.is_empty(), "route needs at least one data angle");
    let mut points = Vec::new();
    let mut legs = Vec::new();
    let (configs, rest): (Vec<(f64, Option<f64>)>, Cfg) = match *circuit {
        CircuitRoute::Vqc { theta } => (
            vec![(theta, None), (theta + SHIFT, None)],
            Cfg { x: xs[0], t1: theta, t2: None },
        ),
        CircuitRoute::Nevqc { rho1, rho2 } => (
            nevqc_groups(rho1, rho2).iter().map(|&(a, b)| (a, Some(b))).collect(),
            Cfg { x: xs[0], t1: rho1, t2: Some(rho2) },
        ),
    };
    let mut prev = rest;
    for &x in xs {
        for &(t1, t2) in &configs {
            push(&mut points, &mut legs, &mut prev, metric, Cfg { x, t1, t2 });
        }
    }
    let closing = Cfg { x: prev.x, t1: rest.t1, t2: rest.t2 };
    let return_cost = leg(metric, prev, closing);
    let total: f64 = legs.iter().sum::<f64>() + return_cost;
    Schedule { points, leg_costs: legs, return_cost, total_cost: total, metric }
}
