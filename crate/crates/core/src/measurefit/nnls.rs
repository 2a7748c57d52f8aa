//! Lawson–Hanson active-set non-negative least squares on a dense,
//! column-major design.

/// Column-major `rows × cols` matrix.
pub(crate) struct Design {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Design {
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }
}

pub(crate) struct Solution {
    pub x: Vec<f64>,
    /// A passive-set solve met a pivot below the rank tolerance.
    pub rank_deficient: bool,
    pub converged: bool,
}

const RANK_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder least squares on the listed columns; singular pivots give a
/// zero coefficient and raise the flag.
fn passive_lstsq(a: &Design, passive: &[usize], b: &[f64]) -> (Vec<f64>, bool) {
    let m = a.rows;
    let k = passive.len();
    let mut q: Vec<Vec<f64>> = passive.iter().map(|&j| a.column(j).to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut deficient = false;
    let scale = q.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max);

    for p in 0..k {
        let norm = q[p][p..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= RANK_TOL * scale {
            deficient = true;
            continue;
        }
        let alpha = if q[p][p] > 0.0 { -norm } else { norm };
        let mut v = q[p][p..].to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        if vv == 0.0 {
            continue;
        }
        for col in q.iter_mut().skip(p + 1) {
            let t = 2.0 * dot(&v, &col[p..]) / vv;
            for (c, vi) in col[p..].iter_mut().zip(&v) {
                *c -= t * vi;
            }
        }
        let t = 2.0 * dot(&v, &rhs[p..]) / vv;
        for (r, vi) in rhs[p..].iter_mut().zip(&v) {
            *r -= t * vi;
        }
        q[p][p] = alpha;
        for c in q[p][p + 1..m].iter_mut() {
            *c = 0.0;
        }
    }

    let mut z = vec![0.0; k];
    for p in (0..k).rev() {
        let diag = q[p][p];
        if diag.abs() <= RANK_TOL * scale {
            z[p] = 0.0;
            continue;
        }
        let mut s = rhs[p];
        for c in p + 1..k {
            s -= q[c][p] * z[c];
        }
        z[p] = s / diag;
    }
    (z, deficient)
}

fn gradient(a: &Design, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut residual = b.to_vec();
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (r, aij) in residual.iter_mut().zip(a.column(j)) {
                *r -= aij * xj;
            }
        }
    }
    (0..a.cols).map(|j| dot(a.column(j), &residual)).collect()
}

/// `min ‖Ax − b‖` subject to `x ≥ 0`, stopping when every inactive gradient
/// component is at most `tol`.
pub(crate) fn solve(a: &Design, b: &[f64], tol: f64) -> Solution {
    let n = a.cols;
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let mut rank_deficient = false;
    let max_outer = 3 * n.max(1);
    let mut converged = false;

    let mut w = gradient(a, b, &x);
    let mut blocked = vec![false; n];
    for _ in 0..max_outer {
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(entering) = candidate else {
            converged = true;
            break;
        };
        passive[entering] = true;

        loop {
            let set: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let (z, deficient) = passive_lstsq(a, &set, b);
            rank_deficient |= deficient;
            if set.iter().zip(&z).all(|(_, &v)| v > 0.0) {
                for (&j, &v) in set.iter().zip(&z) {
                    x[j] = v;
                }
                break;
            }
            // the entering column cannot move off zero: block it for this round
            if set.iter().zip(&z).any(|(&j, &v)| j == entering && v <= 0.0 && x[j] == 0.0) {
                passive[entering] = false;
                blocked[entering] = true;
                break;
            }
            let mut step = f64::INFINITY;
            for (&j, &v) in set.iter().zip(&z) {
                if v <= 0.0 {
                    step = step.min(x[j] / (x[j] - v));
                }
            }
            for (&j, &v) in set.iter().zip(&z) {
                x[j] += step * (v - x[j]);
                if x[j] <= 0.0 || (v <= 0.0 && x[j] <= f64::EPSILON * v.abs().max(1.0)) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
        w = gradient(a, b, &x);
        if !blocked[entering] {
            blocked.iter_mut().for_each(|b| *b = false);
        }
    }
    Solution { x, rank_deficient, converged }
}
