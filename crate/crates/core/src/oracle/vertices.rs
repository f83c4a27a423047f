//! Vertex enumeration for small polyhedra given as linear models.

use itertools::Itertools;

use crate::milp::{LinearModel, Sense};

const PIVOT: f64 = 1e-9;
const FEAS: f64 = 1e-7;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

/// Row-reduces `rows` (each `n` coefficients plus a right-hand side). Returns
/// the rank, and the unique solution when the system has full column rank
/// and is consistent.
fn reduce(mut rows: Vec<Vec<f64>>, n: usize) -> (usize, Option<Vec<f64>>) {
    let m = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs())) else { break };
        let scale = rows[p][..n].iter().fold(0f64, |s, v| s.max(v.abs())).max(1.0);
        if rows[p][col].abs() <= PIVOT * scale {
            continue;
        }
        rows.swap(r, p);
        for i in 0..m {
            if i != r {
                let f = rows[i][col] / rows[r][col];
                if f != 0.0 {
                    for c in col..=n {
                        rows[i][c] -= f * rows[r][c];
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let consistent = rows[r..].iter().all(|row| row[n].abs() <= PIVOT * row[n].abs().max(1.0) * 1e3);
    if r < n || !consistent {
        return (r, None);
    }
    let mut x = vec![0.0; n];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = rows[i][n] / rows[i][col];
    }
    (r, Some(x))
}

/// Vertices of the feasible region of `model`, treating every variable as
/// continuous. Fails with the number of candidate bases when it exceeds
/// `max_systems`.
pub(crate) fn vertices(model: &LinearModel<f64>, max_systems: f64) -> Result<Vec<Vec<f64>>, f64> {
    let n = model.num_vars();
    let mut eq: Vec<Vec<f64>> = Vec::new();
    let mut le: Vec<Vec<f64>> = Vec::new();
    for c in model.constraints() {
        let mut a = vec![0.0; n + 1];
        for (v, x) in c.expr.iter() {
            a[v.0] += x;
        }
        a[n] = c.rhs;
        match c.sense {
            Sense::Eq => eq.push(a),
            Sense::Le => le.push(a),
            Sense::Ge => le.push(a.into_iter().map(|v| -v).collect()),
        }
    }
    for (i, v) in model.vars().iter().enumerate() {
        if v.lower.is_finite() {
            let mut a = vec![0.0; n + 1];
            a[i] = -1.0;
            a[n] = -v.lower;
            le.push(a);
        }
        if v.upper.is_finite() {
            let mut a = vec![0.0; n + 1];
            a[i] = 1.0;
            a[n] = v.upper;
            le.push(a);
        }
    }
    let (rank, _) = reduce(eq.clone(), n);
    let k = n - rank;
    let systems = binomial(le.len(), k);
    if systems > max_systems {
        return Err(systems);
    }
    let feasible = |x: &[f64]| {
        eq.iter().all(|a| (dot(&a[..n], x) - a[n]).abs() <= FEAS * a[n].abs().max(1.0))
            && le.iter().all(|a| dot(&a[..n], x) <= a[n] + FEAS * a[n].abs().max(1.0))
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for subset in (0..le.len()).combinations(k) {
        let rows = eq.iter().cloned().chain(subset.iter().map(|&i| le[i].clone())).collect();
        let (_, Some(mut x)) = reduce(rows, n) else { continue };
        if !feasible(&x) {
            continue;
        }
        for v in &mut x {
            if v.abs() < 1e-12 {
                *v = 0.0;
            }
        }
        let same = |y: &Vec<f64>| y.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0));
        if !out.iter().any(same) {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::LinExpr;

    #[test]
    fn unit_square_has_four_corners() {
        let mut m = LinearModel::new("sq");
        let x = m.add_var("x", 0.0, 1.0, crate::milp::VarKind::Continuous).unwrap();
        let y = m.add_var("y", 0.0, 1.0, crate::milp::VarKind::Continuous).unwrap();
        m.add_constraint("c", LinExpr::new().with(x, 1.0).with(y, 1.0), Sense::Le, 5.0).unwrap();
        let mut v = vertices(&m, 1e6).unwrap();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(v, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn simplex_slice_with_equality() {
        let mut m = LinearModel::new("tri");
        let ids: Vec<_> = (0..3).map(|i| m.add_nonneg(format!("x{i}")).unwrap()).collect();
        m.add_constraint("sum", LinExpr::from_terms(ids.iter().map(|&v| (v, 1.0))), Sense::Eq, 2.0).unwrap();
        let v = vertices(&m, 1e6).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|p| (p.iter().sum::<f64>() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn empty_region_has_no_vertices() {
        let mut m = LinearModel::new("none");
        let x = m.add_nonneg("x").unwrap();
        m.add_constraint("neg", LinExpr::new().with(x, 1.0), Sense::Le, -1.0).unwrap();
        assert!(vertices(&m, 1e6).unwrap().is_empty());
    }
}
