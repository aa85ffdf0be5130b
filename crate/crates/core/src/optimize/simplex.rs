//! Nelder–Mead simplex minimization with dimension-adaptive coefficients.
//!
//! Coefficients follow the adaptive scheme (reflection 1, expansion
//! `1 + 2/n`, contraction `3/4 − 1/(2n)`, shrink `1 − 1/n`), which keeps the
//! method from stalling once the parameter count reaches a few dozen. When
//! the simplex collapses (spread below `spread_tol`) it is rebuilt around the
//! best vertex, and the search stops once a rebuild no longer improves the
//! value by more than `tol`.

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Converged when a rebuilt simplex improves the best value by at most `tol`.
    pub tol: f64,
    /// The simplex is rebuilt around its best vertex once `f_worst − f_best`
    /// falls to this.
    pub spread_tol: f64,
    /// Iteration cap across all internal restarts.
    pub max_iters: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            tol: 1e-9,
            spread_tol: 1e-13,
            max_iters: 4000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// vertex indices sorted by value, best first
    order: Vec<usize>,
}

impl Simplex {
    fn around<F: FnMut(&[f64]) -> f64>(
        x0: &[f64],
        step: f64,
        f: &mut F,
        evals: &mut usize,
    ) -> Self {
        let n = x0.len();
        let mut points = Vec::with_capacity(n + 1);
        points.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += step;
            points.push(p);
        }
        let values: Vec<f64> = points.iter().map(|p| sanitize(f(p))).collect();
        *evals += n + 1;
        let mut s = Self {
            points,
            values,
            order: (0..=n).collect(),
        };
        s.sort();
        s
    }

    fn sort(&mut self) {
        let values = &self.values;
        self.order
            .sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    }

    fn best(&self) -> usize {
        self.order[0]
    }

    fn worst(&self) -> usize {
        self.order[self.order.len() - 1]
    }

    fn second_worst(&self) -> usize {
        self.order[self.order.len() - 2]
    }

    fn spread(&self) -> f64 {
        self.values[self.worst()] - self.values[self.best()]
    }

    fn centroid_excluding_worst(&self) -> Vec<f64> {
        let n = self.points[0].len();
        let mut c = vec![0.0; n];
        for &i in &self.order[..n] {
            for (ck, pk) in c.iter_mut().zip(&self.points[i]) {
                *ck += pk;
            }
        }
        let inv = 1.0 / n as f64;
        c.iter_mut().for_each(|x| *x *= inv);
        c
    }

    /// Puts `x` in place of the worst vertex and restores the ordering.
    fn replace_worst(&mut self, x: Vec<f64>, fx: f64) {
        let w = self.order.pop().expect("nonempty simplex");
        self.points[w] = x;
        self.values[w] = fx;
        let values = &self.values;
        let pos = self
            .order
            .partition_point(|&i| values[i].total_cmp(&fx).then(i.cmp(&w)).is_lt());
        self.order.insert(pos, w);
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn along(c: &[f64], dir_from: &[f64], t: f64) -> Vec<f64> {
    // c + t·(c − dir_from)
    c.iter()
        .zip(dir_from)
        .map(|(ci, xi)| ci + t * (ci - xi))
        .collect()
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &SimplexOptions,
) -> SimplexOutcome {
    let n = x0.len();
    assert!(n >= 1, "empty parameter vector");
    let nf = n as f64;
    let expand = 1.0 + 2.0 / nf;
    let contract = 0.75 - 0.5 / nf;
    let shrink = 1.0 - 1.0 / nf;

    let mut evals = 0usize;
    let mut iters = 0usize;
    let mut step = opts.initial_step;
    let mut simplex = Simplex::around(x0, step, &mut f, &mut evals);
    let mut last_restart_best = f64::INFINITY;
    let mut converged = false;

    while iters < opts.max_iters {
        if simplex.spread() <= opts.spread_tol {
            let best = simplex.values[simplex.best()];
            if last_restart_best - best <= opts.tol {
                converged = true;
                break;
            }
            last_restart_best = best;
            let xb = simplex.points[simplex.best()].clone();
            step = (step * 0.5).max(1e-4);
            simplex = Simplex::around(&xb, step, &mut f, &mut evals);
            continue;
        }
        iters += 1;

        let c = simplex.centroid_excluding_worst();
        let w = simplex.worst();
        let f_best = simplex.values[simplex.best()];
        let f_second = simplex.values[simplex.second_worst()];
        let f_worst = simplex.values[w];

        let xr = along(&c, &simplex.points[w], 1.0);
        let fr = sanitize(f(&xr));
        evals += 1;

        if fr < f_best {
            let xe = along(&c, &simplex.points[w], expand);
            let fe = sanitize(f(&xe));
            evals += 1;
            if fe < fr {
                simplex.replace_worst(xe, fe);
            } else {
                simplex.replace_worst(xr, fr);
            }
            continue;
        }
        if fr < f_second {
            simplex.replace_worst(xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < f_worst {
            let xc = along(&c, &simplex.points[w], contract);
            let fc = sanitize(f(&xc));
            (xc, fc, fc <= fr)
        } else {
            let xc = along(&c, &simplex.points[w], -contract);
            let fc = sanitize(f(&xc));
            (xc, fc, fc < f_worst)
        };
        evals += 1;
        if accept {
            simplex.replace_worst(xc, fc);
            continue;
        }

        let b = simplex.best();
        let xb = simplex.points[b].clone();
        for i in 0..=n {
            if i == b {
                continue;
            }
            for (pk, bk) in simplex.points[i].iter_mut().zip(&xb) {
                *pk = bk + shrink * (*pk - bk);
            }
            simplex.values[i] = sanitize(f(&simplex.points[i]));
        }
        evals += n;
        simplex.sort();
    }

    let b = simplex.best();
    SimplexOutcome {
        x: simplex.points[b].clone(),
        value: simplex.values[b],
        iterations: iters,
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let out = minimize(
            |x| x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum(),
            &[0.0; 4],
            &SimplexOptions {
                tol: 1e-14,
                spread_tol: 1e-14,
                max_iters: 20_000,
                ..Default::default()
            },
        );
        assert!(out.converged);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &SimplexOptions {
                tol: 1e-14,
                spread_tol: 1e-14,
                max_iters: 20_000,
                ..Default::default()
            },
        );
        assert!(out.value < 1e-10, "{}", out.value);
    }

    #[test]
    fn iteration_cap_is_respected() {
        let out = minimize(
            |x| x[0].abs() + x[1].abs(),
            &[5.0, 5.0],
            &SimplexOptions {
                max_iters: 3,
                ..Default::default()
            },
        );
        assert_eq!(out.iterations, 3);
        assert!(!out.converged);
    }

    #[test]
    fn nan_treated_as_worst() {
        let out = minimize(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2) + x[1] * x[1]
                }
            },
            &[0.5, 0.5],
            &SimplexOptions::default(),
        );
        assert!(out.value < 1e-8);
    }
}
