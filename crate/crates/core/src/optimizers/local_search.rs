//! Bounded quasi-Newton ascent used by restarted local search.
//!
//! Works in the unit cube (genes normalized by their bounds) so that step
//! sizes and finite-difference offsets mean the same thing for radial and
//! angular genes. Gradients are central finite differences with h = 1e-4 of
//! the parameter range; the search direction comes from a limited-memory
//! BFGS two-loop recursion, and every trial point is clipped into the box,
//! so iterates always stay feasible.
//!
//! The fitness 1/(1+E) is a reciprocal squash: it is nearly flat far from an
//! optimum and only steepens close to one, which starves curvature estimates.
//! The search therefore minimizes the strictly monotone transform
//! `1/f - 1` (for the symmetry fitness this is exactly the error sum E), and
//! every accepted step still strictly increases the raw objective.

use alloc::vec::Vec;

use crate::geometry::{DomainBounds, Genome, GENOME_LEN};
use crate::sampling::{scale_to_bounds, unit_from_genome};

const HISTORY: usize = 10;
const FD_STEP: f64 = 1e-4;
const GRAD_TOL: f64 = 1e-6;
const REL_IMPROVEMENT_TOL: f64 = 1e-10;
/// Evaluations for one central-difference gradient.
const GRAD_EVALS: u64 = 2 * GENOME_LEN as u64;
/// Objective floor in the reciprocal transform; the degenerate-shape
/// sentinel 0 maps to a huge loss and is never preferred.
const F_FLOOR: f64 = 1e-12;

type Point = [f64; GENOME_LEN];

#[derive(Debug, Clone)]
pub struct LocalSearchResult {
    pub genome: Genome,
    pub fitness: f64,
    pub evaluations: u64,
    /// Objective values of the accepted iterates, starting value first.
    pub trajectory: Vec<f64>,
}

#[inline]
fn to_loss(f: f64) -> f64 {
    1.0 / f.max(F_FLOOR) - 1.0
}

struct Budget<'a, F> {
    objective: &'a mut F,
    bounds: &'a DomainBounds,
    used: u64,
    max: u64,
}

impl<F: FnMut(&Genome) -> f64> Budget<'_, F> {
    fn remaining(&self) -> u64 {
        self.max.saturating_sub(self.used)
    }

    /// Returns (raw objective, loss).
    fn eval(&mut self, unit: &Point) -> (f64, f64) {
        self.used += 1;
        let f = (self.objective)(&scale_to_bounds(unit, self.bounds));
        (f, to_loss(f))
    }
}

fn clip_unit(p: &mut Point) {
    for v in p.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn dot(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm(a: &Point) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Maximize `objective` from `start`, staying inside `bounds`. `rho` scales
/// the first line-search step (in units of the parameter range); `max_evals`
/// caps objective calls. The returned fitness is never below the start's.
pub fn local_search(
    start: &Genome,
    mut objective: impl FnMut(&Genome) -> f64,
    bounds: &DomainBounds,
    rho: f64,
    max_evals: u64,
) -> LocalSearchResult {
    let mut x = unit_from_genome(start, bounds);
    clip_unit(&mut x);
    let mut budget = Budget {
        objective: &mut objective,
        bounds,
        used: 0,
        max: max_evals,
    };
    let (mut f, mut loss) = if budget.remaining() > 0 {
        budget.eval(&x)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    let mut trajectory = Vec::new();
    trajectory.push(f);

    // curvature pairs (s, y, 1/s.y) of the loss
    let mut history: Vec<(Point, Point, f64)> = Vec::new();
    let mut prev: Option<(Point, Point)> = None; // (step, loss gradient at previous x)

    while budget.remaining() > GRAD_EVALS {
        let grad = gradient(&x, &mut budget);
        if let Some((s, prev_grad)) = prev.take() {
            let mut y = [0.0; GENOME_LEN];
            for i in 0..GENOME_LEN {
                y[i] = grad[i] - prev_grad[i];
            }
            let sy = dot(&s, &y);
            if sy > 1e-12 {
                if history.len() == HISTORY {
                    history.remove(0);
                }
                history.push((s, y, 1.0 / sy));
            }
        }
        if norm(&grad) < GRAD_TOL {
            break;
        }
        let mut direction = two_loop_descent(&grad, &history);
        let mut initial_step = if history.is_empty() {
            let n = norm(&direction);
            if n > 0.0 {
                rho / n
            } else {
                break;
            }
        } else {
            1.0
        };
        let mut accepted = line_search(&x, loss, &direction, initial_step, &mut budget);
        if accepted.is_none() && !history.is_empty() {
            // quasi-Newton direction failed; retry along the raw gradient
            for (d, g) in direction.iter_mut().zip(grad.iter()) {
                *d = -g;
            }
            let n = norm(&direction);
            if n > 0.0 {
                initial_step = rho / n;
                accepted = line_search(&x, loss, &direction, initial_step, &mut budget);
            }
        }
        let Some((x_new, f_new, loss_new)) = accepted else {
            break;
        };
        let improvement = loss - loss_new;
        let mut step = [0.0; GENOME_LEN];
        for i in 0..GENOME_LEN {
            step[i] = x_new[i] - x[i];
        }
        prev = Some((step, grad));
        x = x_new;
        f = f_new;
        loss = loss_new;
        trajectory.push(f);
        if improvement / loss.abs().max(1e-30) < REL_IMPROVEMENT_TOL {
            break;
        }
    }

    LocalSearchResult {
        genome: scale_to_bounds(&x, bounds),
        fitness: f,
        evaluations: budget.used,
        trajectory,
    }
}

// Central differences of the loss, shrinking the offset at the box faces.
// The actual coordinate difference is used as the denominator.
fn gradient<F: FnMut(&Genome) -> f64>(x: &Point, budget: &mut Budget<'_, F>) -> Point {
    let mut grad = [0.0; GENOME_LEN];
    for i in 0..GENOME_LEN {
        let hi = (x[i] + FD_STEP).min(1.0);
        let lo = (x[i] - FD_STEP).max(0.0);
        if hi <= lo {
            grad[i] = 0.0;
            continue;
        }
        let mut probe = *x;
        probe[i] = hi;
        let (_, loss_hi) = budget.eval(&probe);
        probe[i] = lo;
        let (_, loss_lo) = budget.eval(&probe);
        let g = (loss_hi - loss_lo) / (hi - lo);
        grad[i] = if g.is_finite() { g } else { 0.0 };
    }
    grad
}

// Standard two-loop recursion; returns a descent direction for the loss.
fn two_loop_descent(grad: &Point, history: &[(Point, Point, f64)]) -> Point {
    let mut q = *grad;
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, inv_sy) in history.iter().rev() {
        let alpha = inv_sy * dot(s, &q);
        for i in 0..GENOME_LEN {
            q[i] -= alpha * y[i];
        }
        alphas.push(alpha);
    }
    if let Some((s, y, _)) = history.last() {
        let gamma = dot(s, y) / dot(y, y);
        for v in q.iter_mut() {
            *v *= gamma;
        }
    }
    for ((s, y, inv_sy), alpha) in history.iter().zip(alphas.iter().rev()) {
        let beta = inv_sy * dot(y, &q);
        for i in 0..GENOME_LEN {
            q[i] += s[i] * (alpha - beta);
        }
    }
    for v in q.iter_mut() {
        *v = -*v;
    }
    q
}

// Bracketing line search: halve the step until it improves, then keep
// doubling while that helps and finish with one parabolic refinement. Only
// strictly improving points are accepted. Gradients cost 32 evaluations
// here, so spending a handful of extra evaluations per line search to land
// near the ray minimum is the cheaper side of the trade.
fn line_search<F: FnMut(&Genome) -> f64>(
    x: &Point,
    loss: f64,
    direction: &Point,
    initial_step: f64,
    budget: &mut Budget<'_, F>,
) -> Option<(Point, f64, f64)> {
    const MAX_HALVINGS: u32 = 10;
    const MAX_DOUBLINGS: u32 = 10;
    let trial = |t: f64, budget: &mut Budget<'_, F>| -> (Point, f64, f64) {
        let mut p = *x;
        for i in 0..GENOME_LEN {
            p[i] += t * direction[i];
        }
        clip_unit(&mut p);
        let (f, l) = budget.eval(&p);
        (p, f, l)
    };
    let mut t = initial_step;
    let mut first_improving = None;
    for _ in 0..=MAX_HALVINGS {
        if budget.remaining() == 0 {
            return None;
        }
        let (p, f, l) = trial(t, budget);
        if l.is_finite() && l < loss {
            first_improving = Some((t, (p, f, l)));
            break;
        }
        t *= 0.5;
    }
    let (t0, mut best) = first_improving?;
    // bracket the ray minimum by doubling
    let mut ts = (t0, t0); // (best step, last probed step)
    let mut probes = [(t0, best.2), (t0, best.2)]; // (second best, best) by loss
    for _ in 0..MAX_DOUBLINGS {
        if budget.remaining() == 0 {
            break;
        }
        let t_next = ts.1 * 2.0;
        let (p, f, l) = trial(t_next, budget);
        ts.1 = t_next;
        if l.is_finite() && l < best.2 {
            probes = [(ts.0, best.2), (t_next, l)];
            ts.0 = t_next;
            best = (p, f, l);
        } else {
            if l.is_finite() {
                probes[0] = (t_next, l);
            }
            break;
        }
    }
    // one parabolic refinement between the best step and its neighbor
    if budget.remaining() > 0 && probes[0].0 != probes[1].0 {
        let (ta, la) = probes[1]; // best
        let (tb, lb) = probes[0];
        // vertex of the parabola through (0, loss), (ta, la), (tb, lb)
        let denom = ta * tb * (ta - tb);
        if denom.abs() > 1e-30 {
            let a = (tb * (la - loss) - ta * (lb - loss)) / denom;
            let b = (ta * ta * (lb - loss) - tb * tb * (la - loss)) / denom;
            if a > 0.0 {
                let t_star = -b / (2.0 * a);
                if t_star.is_finite() && t_star > 0.0 {
                    let (p, f, l) = trial(t_star, budget);
                    if l.is_finite() && l < best.2 {
                        best = (p, f, l);
                    }
                }
            }
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{symmetry_fitness, BoundsCase, Genome};

    fn fitness_objective(bounds: DomainBounds) -> impl FnMut(&Genome) -> f64 {
        move |g: &Genome| {
            crate::geometry::express(g, &bounds)
                .ok()
                .and_then(|p| symmetry_fitness(&p).ok())
                .unwrap_or(0.0)
        }
    }

    #[test]
    fn symmetric_start_stays_put() {
        let bounds = BoundsCase::A.bounds();
        let start = Genome::uniform(0.5, 0.0);
        let result = local_search(&start, fitness_objective(bounds), &bounds, 0.065, 500);
        assert!((result.fitness - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trajectory_is_non_decreasing() {
        let bounds = BoundsCase::A.bounds();
        let mut genes = [0.5; GENOME_LEN];
        genes[8..].fill(0.0);
        genes[2] = 0.8;
        genes[5] = 0.3;
        let result =
            local_search(&Genome::new(genes), fitness_objective(bounds), &bounds, 0.065, 2000);
        for w in result.trajectory.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(result.evaluations <= 2000);
    }

    #[test]
    fn perturbed_radius_recovers_symmetry() {
        let bounds = BoundsCase::A.bounds();
        let mut genes = [0.5; GENOME_LEN];
        genes[8..].fill(0.0);
        genes[0] = 0.55;
        let start = Genome::new(genes);
        let result = local_search(&start, fitness_objective(bounds), &bounds, 0.065, 2000);
        assert!(
            result.fitness >= 0.999,
            "expected near-perfect symmetry, got {}",
            result.fitness
        );
    }
}
