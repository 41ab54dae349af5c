//! Seeded multistart projected-gradient descent on a product of unit spheres.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::OptimizerConfig;

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 0.25;
/// A run stalls when it improves by less than this over `STALL_WINDOW` iterations.
pub const STALL_IMPROVEMENT: f64 = 1e-12;
pub const STALL_WINDOW: usize = 50;
const FD_STEP: f64 = 1e-6;

/// A function on a product of unit spheres `S^{d_1 - 1} x S^{d_2 - 1} x ...`.
pub trait Objective: Sync {
    fn dims(&self) -> Vec<usize>;

    fn value(&self, x: &[DVector<f64>]) -> f64;

    /// Value and Euclidean gradient; `None` selects central finite differences.
    fn value_grad(&self, _x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
        None
    }
}

/// Best point found by one start.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub value: f64,
    pub point: Vec<DVector<f64>>,
    pub start: usize,
    pub iterations: usize,
    pub stalled: bool,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn evaluate(obj: &dyn Objective, x: &[DVector<f64>]) -> (f64, Vec<DVector<f64>>) {
    if let Some((f, g)) = obj.value_grad(x) {
        return (sanitize(f), g);
    }
    let f = sanitize(obj.value(x));
    let mut grads = Vec::with_capacity(x.len());
    let mut probe: Vec<DVector<f64>> = x.to_vec();
    for b in 0..x.len() {
        let mut g = DVector::zeros(x[b].len());
        for i in 0..x[b].len() {
            let orig = probe[b][i];
            probe[b][i] = orig + FD_STEP;
            let fp = obj.value(&probe);
            probe[b][i] = orig - FD_STEP;
            let fm = obj.value(&probe);
            probe[b][i] = orig;
            g[i] = (fp - fm) / (2.0 * FD_STEP);
        }
        grads.push(g);
    }
    (f, grads)
}

fn normalize(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Deterministic random start for a given seed and start index.
pub fn random_start(dims: &[usize], seed: u64, start: usize) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(start as u64));
    dims.iter()
        .map(|&d| {
            let v = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            normalize(v)
        })
        .collect()
}

/// Projected-gradient descent with Armijo backtracking and an adaptive step.
pub fn descend(obj: &dyn Objective, mut x: Vec<DVector<f64>>, config: &OptimizerConfig, start: usize) -> RunOutcome {
    let (mut f, mut g) = evaluate(obj, &x);
    let mut step = config.grad_step;
    let mut history: Vec<f64> = vec![f];
    let mut iterations = 0;
    let mut stalled = false;
    for it in 0..config.max_iters {
        iterations = it + 1;
        let pg: Vec<DVector<f64>> = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| gi - xi * xi.dot(gi))
            .collect();
        let gn2: f64 = pg.iter().map(|v| v.norm_squared()).sum();
        if !(gn2 > 1e-28) {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let trial: Vec<DVector<f64>> = x.iter().zip(&pg).map(|(xi, p)| normalize(xi - p * step)).collect();
            let ft = sanitize(obj.value(&trial));
            if ft <= f - ARMIJO * step * gn2 {
                x = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let (nf, ng) = evaluate(obj, &x);
        f = nf;
        g = ng;
        step = (step * 2.0).min(1e3);
        history.push(f);
        if history.len() > STALL_WINDOW {
            let past = history[history.len() - 1 - STALL_WINDOW];
            if past - f < STALL_IMPROVEMENT {
                stalled = true;
                break;
            }
        }
    }
    RunOutcome {
        value: f,
        point: x,
        start,
        iterations,
        stalled,
    }
}

/// Runs every start (in parallel) and returns the outcomes ordered by start index.
pub fn multistart_all(obj: &dyn Objective, config: &OptimizerConfig) -> Vec<RunOutcome> {
    let dims = obj.dims();
    (0..config.starts)
        .into_par_iter()
        .map(|s| descend(obj, random_start(&dims, config.seed, s), config, s))
        .collect()
}

/// Lowest value over all starts; ties go to the lowest start index.
pub fn best_of(outcomes: &[RunOutcome]) -> Option<&RunOutcome> {
    outcomes.iter().fold(None, |best: Option<&RunOutcome>, o| match best {
        Some(b) if b.value <= o.value => Some(b),
        _ => Some(o),
    })
}

pub fn multistart(obj: &dyn Objective, config: &OptimizerConfig) -> RunOutcome {
    let all = multistart_all(obj, config);
    best_of(&all).cloned().expect("starts >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rayleigh quotient of a diagonal matrix on S^2: minimum is the smallest entry.
    struct Rayleigh;

    impl Objective for Rayleigh {
        fn dims(&self) -> Vec<usize> {
            vec![3]
        }
        fn value(&self, x: &[DVector<f64>]) -> f64 {
            let v = &x[0];
            3.0 * v[0] * v[0] + 1.0 * v[1] * v[1] - 2.0 * v[2] * v[2]
        }
    }

    struct RayleighGrad;

    impl Objective for RayleighGrad {
        fn dims(&self) -> Vec<usize> {
            vec![3]
        }
        fn value(&self, x: &[DVector<f64>]) -> f64 {
            Rayleigh.value(x)
        }
        fn value_grad(&self, x: &[DVector<f64>]) -> Option<(f64, Vec<DVector<f64>>)> {
            let v = &x[0];
            let g = DVector::from_vec(vec![6.0 * v[0], 2.0 * v[1], -4.0 * v[2]]);
            Some((self.value(x), vec![g]))
        }
    }

    #[test]
    fn finds_smallest_eigenvalue() {
        let cfg = OptimizerConfig {
            starts: 4,
            ..OptimizerConfig::default()
        };
        for obj in [&Rayleigh as &dyn Objective, &RayleighGrad] {
            let best = multistart(obj, &cfg);
            assert!((best.value + 2.0).abs() < 1e-9, "{}", best.value);
            assert!((best.point[0].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = OptimizerConfig {
            starts: 3,
            max_iters: 7,
            ..OptimizerConfig::default()
        };
        let a = multistart(&Rayleigh, &cfg);
        let b = multistart(&Rayleigh, &cfg);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.point, b.point);
        assert_eq!(a.start, b.start);
    }

    #[test]
    fn ties_go_to_lowest_start() {
        let mk = |v: f64, s: usize| RunOutcome {
            value: v,
            point: vec![],
            start: s,
            iterations: 0,
            stalled: false,
        };
        let outs = vec![mk(1.0, 0), mk(0.5, 1), mk(0.5, 2)];
        assert_eq!(best_of(&outs).unwrap().start, 1);
    }
}
