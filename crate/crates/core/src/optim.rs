// SPDX-License-Identifier: Apache-2.0

//! Derivative-free simplex minimization (Nelder-Mead).

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Stop once the simplex diameter falls below this, relative to
    /// `max(1, |best|)` per coordinate.
    pub x_tolerance: f64,
    pub max_evaluations: usize,
    /// Initial edge length along each coordinate.
    pub initial_step: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `start`. Non-finite objective values are treated as
/// `+∞`, which lets callers encode hard constraints.
pub fn nelder_mead<F>(mut f: F, start: &[f64], options: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        let step = options.initial_step.get(i).copied().unwrap_or(1.0);
        x[i] += if step == 0.0 { 1.0 } else { step };
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        // Stable sort keeps the earlier vertex first on ties.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter_small(&simplex, options.x_tolerance) {
            converged = true;
            break;
        }
        if evals >= options.max_evaluations {
            break;
        }

        let worst = simplex[n].1;
        let second = simplex[n - 1].1;
        let best = simplex[0].1;
        let centroid = centroid(&simplex[..n]);
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = along(REFLECT * EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(REFLECT * CONTRACT);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (xi, bi) in vertex.0.iter_mut().zip(&x0) {
                        *xi = bi + SHRINK * (*xi - bi);
                    }
                    vertex.1 = eval(&vertex.0, &mut evals);
                }
            }
        }
    }

    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evals,
        converged,
    }
}

fn centroid(vertices: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let n = vertices[0].0.len();
    let mut c = vec![0.0; n];
    for (x, _) in vertices {
        for (ci, xi) in c.iter_mut().zip(x) {
            *ci += xi;
        }
    }
    let k = vertices.len() as f64;
    c.iter_mut().for_each(|ci| *ci /= k);
    c
}

fn diameter_small(simplex: &[(Vec<f64>, f64)], tol: f64) -> bool {
    let best = &simplex[0].0;
    simplex[1..].iter().all(|(x, _)| {
        x.iter()
            .zip(best)
            .all(|(xi, bi)| (xi - bi).abs() <= tol * bi.abs().max(1.0))
    })
}
