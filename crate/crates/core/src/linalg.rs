//! Dense Gauss-Jordan elimination with rank detection, for the small
//! systems that arise in support enumeration.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Solution {
    Unique(Vec<f64>),
    /// Consistent but rank deficient: infinitely many solutions.
    Continuum,
    Inconsistent,
}

/// Solves `m x = b` for a (possibly non-square) system with `cols` unknowns.
/// Pivots below `eps * max|m|` are treated as zero.
pub(crate) fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>, cols: usize, eps: f64) -> Solution {
    let rows = m.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let tiny = eps * scale;
    let mut pivot_cols = Vec::with_capacity(cols);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, m[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tiny {
            continue;
        }
        m.swap(r, best);
        b.swap(r, best);
        let p = m[r][c];
        for k in c..cols {
            m[r][k] /= p;
        }
        b[r] /= p;
        for i in 0..rows {
            if i != r {
                let factor = m[i][c];
                if factor != 0.0 {
                    for k in c..cols {
                        m[i][k] -= factor * m[r][k];
                    }
                    b[i] -= factor * b[r];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let b_scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if b[r..].iter().any(|v| v.abs() > eps.sqrt() * b_scale) {
        return Solution::Inconsistent;
    }
    if pivot_cols.len() < cols {
        return Solution::Continuum;
    }
    let mut x = vec![0.0; cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = b[row];
    }
    Solution::Unique(x)
}
