//! Nelder–Mead downhill simplex minimizer.
//!
//! Deterministic: the initial simplex is built from the start point by fixed
//! per-axis steps and ties are broken by vertex index.

/// Tuning knobs for [`minimize`].
#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Initial step along each axis.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Converged when the spread of vertex values falls below this.
    pub f_tolerance: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tolerance: f64,
    /// Rebuild the simplex around the best point this many times after convergence.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            max_evaluations: 20_000,
            f_tolerance: 1e-22,
            x_tolerance: 1e-11,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `objective` starting from `start`.
pub fn minimize<F>(mut objective: F, start: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = start.to_vec();
    let mut best_f = eval(&best_x);
    let mut converged = false;
    let mut step = opts.initial_step;

    for _ in 0..=opts.restarts {
        let run = run_simplex(&mut eval, &best_x, step, opts, opts.max_evaluations);
        converged = run.converged;
        let improved = run.f < best_f;
        if run.f <= best_f {
            best_x = run.x;
            best_f = run.f;
        }
        if !improved && converged {
            break;
        }
        step *= 0.5;
    }

    SimplexResult {
        x: best_x,
        f: best_f,
        evaluations,
        converged,
    }
}

struct Run {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

fn run_simplex<E>(
    eval: &mut E,
    start: &[f64],
    step: f64,
    opts: &SimplexOptions,
    budget: usize,
) -> Run
where
    E: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v)).collect();
    let mut used = n + 1;
    let mut converged = false;

    while used < budget {
        // Stable sort keeps lower vertex index first among equal values.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let f_spread = vals[n] - vals[0];
        let diameter = verts[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&verts[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread.abs() <= opts.f_tolerance && diameter <= opts.x_tolerance
            || diameter <= f64::EPSILON * 4.0
        {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| verts[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&verts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr);
        used += 1;
        if fr < vals[0] {
            let xe = along(EXPAND);
            let fe = eval(&xe);
            used += 1;
            if fe < fr {
                verts[n] = xe;
                vals[n] = fe;
            } else {
                verts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            verts[n] = xr;
            vals[n] = fr;
            continue;
        }
        // Outside contraction if the reflection helped at all, inside otherwise.
        let xc = along(if fr < vals[n] { CONTRACT } else { -CONTRACT });
        let fc = eval(&xc);
        used += 1;
        if fc < vals[n].min(fr) {
            verts[n] = xc;
            vals[n] = fc;
            continue;
        }
        let best = verts[0].clone();
        for i in 1..=n {
            for (x, b) in verts[i].iter_mut().zip(&best) {
                *x = b + SHRINK * (*x - b);
            }
            vals[i] = eval(&verts[i]);
        }
        used += n;
    }

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    Run {
        x: verts[best].clone(),
        f: vals[best],
        converged,
    }
}
