//! Helpers shared by the solver cross-checks and the acceptance suite.

#![allow(dead_code)]

use hwlrp::milp::{LinExpr, LinearModel, ObjSense, Sense, VarId, VarKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense random LP: `rows` constraints over `n` variables boxed in `[0, ub]`.
pub struct DenseLp {
    pub a: Vec<Vec<f64>>,
    pub senses: Vec<Sense>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub ub: Vec<f64>,
}

pub fn random_lp(rng: &mut ChaCha8Rng, n: usize, rows: usize, with_eq: bool) -> DenseLp {
    let mut a = Vec::new();
    let mut senses = Vec::new();
    let mut b = Vec::new();
    for i in 0..rows {
        let row: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(-5i32..=9) as f64 })
            .collect();
        a.push(row);
        senses.push(match rng.random_range(0..6) {
            0 if with_eq && i == 0 => Sense::Eq,
            0 | 1 => Sense::Ge,
            _ => Sense::Le,
        });
        b.push(rng.random_range(-4i32..=30) as f64);
    }
    let c = (0..n).map(|_| rng.random_range(-9i32..=9) as f64).collect();
    let ub = (0..n).map(|_| rng.random_range(1i32..=8) as f64).collect();
    DenseLp { a, senses, b, c, ub }
}

pub fn to_model(lp: &DenseLp, kinds: &[VarKind]) -> (LinearModel<f64>, Vec<VarId>) {
    let mut m = LinearModel::new("rand");
    let vars: Vec<VarId> = (0..lp.c.len())
        .map(|j| m.add_var(format!("x{j}"), 0.0, lp.ub[j], kinds[j]).unwrap())
        .collect();
    for (i, row) in lp.a.iter().enumerate() {
        let e = LinExpr::from_terms(vars.iter().zip(row).map(|(&v, &a)| (v, a)));
        m.add_constraint(format!("r{i}"), e, lp.senses[i], lp.b[i]).unwrap();
    }
    let obj = LinExpr::from_terms(vars.iter().zip(&lp.c).map(|(&v, &c)| (v, c)));
    m.set_objective(ObjSense::Minimize, obj, 0.0).unwrap();
    (m, vars)
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

pub fn lp_feasible(lp: &DenseLp, x: &[f64], fixed: &[Option<f64>], tol: f64) -> bool {
    for (j, &v) in x.iter().enumerate() {
        if v < -tol || v > lp.ub[j] + tol {
            return false;
        }
        if let Some(f) = fixed[j] {
            if (v - f).abs() > tol {
                return false;
            }
        }
    }
    lp.a.iter().zip(&lp.senses).zip(&lp.b).all(|((row, s), &b)| {
        let lhs: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
        match s {
            Sense::Le => lhs <= b + tol,
            Sense::Ge => lhs >= b - tol,
            Sense::Eq => (lhs - b).abs() <= tol,
        }
    })
}

/// Minimum over all basic feasible points; `fixed` pins some coordinates.
pub fn vertex_oracle(lp: &DenseLp, fixed: &[Option<f64>]) -> Option<f64> {
    let n = lp.c.len();
    // Candidate active hyperplanes: rows, lower bounds, upper bounds, fixings.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut mandatory = Vec::new();
    for (i, row) in lp.a.iter().enumerate() {
        if lp.senses[i] == Sense::Eq {
            mandatory.push(planes.len());
        }
        planes.push((row.clone(), lp.b[i]));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        match fixed[j] {
            Some(f) => {
                mandatory.push(planes.len());
                planes.push((e, f));
            }
            None => {
                planes.push((e.clone(), 0.0));
                planes.push((e, lp.ub[j]));
            }
        }
    }
    let optional: Vec<usize> = (0..planes.len()).filter(|i| !mandatory.contains(i)).collect();
    if mandatory.len() > n {
        return None;
    }
    let need = n - mandatory.len();
    let mut best: Option<f64> = None;
    let mut pick = Vec::new();
    fn rec(
        start: usize,
        need: usize,
        optional: &[usize],
        pick: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if need == 0 {
            f(pick);
            return;
        }
        for k in start..optional.len() {
            if optional.len() - k < need {
                break;
            }
            pick.push(optional[k]);
            rec(k + 1, need - 1, optional, pick, f);
            pick.pop();
        }
    }
    rec(0, need, &optional, &mut pick, &mut |chosen| {
        let idx: Vec<usize> = mandatory.iter().chain(chosen).copied().collect();
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp_feasible(lp, &x, fixed, 1e-9) {
                let v: f64 = x.iter().zip(&lp.c).map(|(x, c)| x * c).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

/// `model` relaxed, with its binaries fixed to the bits of `pattern`.
pub fn fix_binaries(model: &LinearModel<f64>, pattern: u64) -> LinearModel<f64> {
    let mut m = model.relaxation();
    let binaries: Vec<_> = model.vars().iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(i, _)| i).collect();
    for (bit, &i) in binaries.iter().enumerate() {
        let v = ((pattern >> bit) & 1) as f64;
        m.set_bounds(VarId(i), v, v);
    }
    m
}
