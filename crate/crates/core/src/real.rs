//! Small dense real linear systems: reduced row echelon form, particular
//! solutions and null spaces. Used for affine functionals on polytopes.

const PIVOT_TOL: f64 = 1e-12;

/// Reduced row echelon form of an augmented system.
struct Rref {
    rows: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    ncols: usize,
}

fn rref(mut rows: Vec<Vec<f64>>, ncols: usize) -> Rref {
    let scale = rows
        .iter()
        .flat_map(|r| r[..ncols].iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let (best, best_abs) = (r..rows.len())
            .map(|i| (i, rows[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= PIVOT_TOL * scale {
            continue;
        }
        rows.swap(r, best);
        let p = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= p;
        }
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][c];
                if f != 0.0 {
                    for k in 0..rows[i].len() {
                        rows[i][k] -= f * rows[r][k];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref {
        rows,
        pivots,
        ncols,
    }
}

/// Numerical rank of a row-major matrix.
pub fn rank(a: &[Vec<f64>]) -> usize {
    let ncols = a.first().map_or(0, Vec::len);
    rref(a.to_vec(), ncols).pivots.len()
}

/// A particular solution of `a x = b` (free variables set to zero) together
/// with the max-norm residual `|a x − b|∞`. The residual is what callers use
/// to decide consistency.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let ncols = a.first().map_or(0, Vec::len);
    let aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let red = rref(aug, ncols);
    let mut x = vec![0.0; ncols];
    for (r, &c) in red.pivots.iter().enumerate() {
        x[c] = red.rows[r][red.ncols];
    }
    let residual = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| (row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max);
    (x, residual)
}

/// Basis of `{x : a x = 0}`, one vector per free column.
pub fn null_space(a: &[Vec<f64>], ncols: usize) -> Vec<Vec<f64>> {
    let red = rref(a.to_vec(), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !red.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0.0; ncols];
            v[f] = 1.0;
            for (r, &c) in red.pivots.iter().enumerate() {
                v[c] = -red.rows[r][f];
            }
            v
        })
        .collect()
}
