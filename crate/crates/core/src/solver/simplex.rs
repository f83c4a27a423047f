//! Bounded-variable simplex on a dense tableau.
//!
//! Every row `i` of the model becomes `a_i x + s_i = b_i` with one slack per
//! row whose bounds encode the row sense (`<=`: `s >= 0`, `>=`: `s <= 0`,
//! `=`: `s = 0`). Nonbasic columns sit at a finite bound (or at zero when
//! free). Phase one adds artificial columns only for rows the starting slack
//! basis cannot satisfy. The dual simplex is used to re-optimize after bound
//! changes, which is what branch-and-bound needs.

use std::rc::Rc;

use crate::milp::{LinearModel, ObjSense, Sense};
use crate::scalar::Scalar;

/// Tolerances used inside one LP solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances<S> {
    pub feas: S,
    pub opt: S,
    pub pivot: S,
    pub drop: S,
}

impl<S: Scalar> Tolerances<S> {
    pub fn new(feas_tol: f64, opt_tol: f64) -> Self {
        let eps = S::epsilon();
        let pivot = (eps * S::of(1e3)).max(S::of(1e-9));
        Self { feas: S::of(feas_tol), opt: S::of(opt_tol), pivot, drop: eps * S::of(100.0) }
    }
}

/// Column-oriented copy of a model, minimization sense, empty rows removed.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm<S> {
    pub m: usize,
    pub n: usize,
    pub cols: Vec<Vec<(usize, S)>>,
    pub rhs: Vec<S>,
    pub slack_lo: Vec<S>,
    pub slack_up: Vec<S>,
    pub cost: Vec<S>,
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    /// Objective multiplier applied to the model's objective (−1 for max).
    pub sign: S,
    pub offset: S,
    /// An empty row whose right-hand side cannot be met.
    pub trivially_infeasible: bool,
}

impl<S: Scalar> StandardForm<S> {
    pub fn from_model(model: &LinearModel<S>, feas: S) -> Self {
        let n = model.num_vars();
        let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
        let mut rhs = Vec::new();
        let mut slack_lo = Vec::new();
        let mut slack_up = Vec::new();
        let mut trivially_infeasible = false;
        for c in model.constraints() {
            if c.expr.is_empty() {
                let ok = match c.sense {
                    Sense::Le => S::zero() <= c.rhs + feas,
                    Sense::Ge => S::zero() >= c.rhs - feas,
                    Sense::Eq => c.rhs.abs() <= feas,
                };
                trivially_infeasible |= !ok;
                continue;
            }
            let row = rhs.len();
            for (v, a) in c.expr.iter() {
                cols[v.0].push((row, a));
            }
            rhs.push(c.rhs);
            let (lo, up) = match c.sense {
                Sense::Le => (S::zero(), S::infinity()),
                Sense::Ge => (S::neg_infinity(), S::zero()),
                Sense::Eq => (S::zero(), S::zero()),
            };
            slack_lo.push(lo);
            slack_up.push(up);
        }
        let sign = match model.objective().sense {
            ObjSense::Minimize => S::one(),
            ObjSense::Maximize => -S::one(),
        };
        let mut cost = vec![S::zero(); n];
        for (v, c) in model.objective().expr.iter() {
            cost[v.0] = c * sign;
        }
        Self {
            m: rhs.len(),
            n,
            cols,
            rhs,
            slack_lo,
            slack_up,
            cost,
            lower: model.vars().iter().map(|v| v.lower).collect(),
            upper: model.vars().iter().map(|v| v.upper).collect(),
            sign,
            offset: model.objective().offset,
            trivially_infeasible,
        }
    }

    /// Converts a minimization-sense value back to the model's sense.
    pub fn report(&self, internal: S) -> S {
        internal * self.sign + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or numerical breakdown.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NonbasicAt {
    Lower,
    Upper,
    Zero,
}

/// Basis description that can rebuild a tableau under different bounds.
#[derive(Debug, Clone)]
pub(crate) struct Snapshot {
    basis: Vec<usize>,
    status: Vec<NonbasicAt>,
    arts: Rc<Vec<(usize, i8)>>,
}

pub(crate) struct Tableau<S> {
    m: usize,
    n: usize,
    ncols: usize,
    t: Vec<S>,
    beta: Vec<S>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    x: Vec<S>,
    lo: Vec<S>,
    up: Vec<S>,
    cost: Vec<S>,
    d: Vec<S>,
    live: Vec<bool>,
    /// Artificial columns: (row, sign).
    arts: Rc<Vec<(usize, i8)>>,
    tol: Tolerances<S>,
    pub iterations: usize,
    since_refactor: usize,
    bland: bool,
    degenerate_run: usize,
    scratch: Vec<usize>,
}

const NONE: usize = usize::MAX;
const DEGENERACY_THRESHOLD: usize = 50;
const REFACTOR_EVERY: usize = 400;

impl<S: Scalar> Tableau<S> {
    fn column_bounds(sf: &StandardForm<S>, lower: &[S], upper: &[S], arts: &[(usize, i8)]) -> (Vec<S>, Vec<S>) {
        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        lo.extend_from_slice(&sf.slack_lo);
        up.extend_from_slice(&sf.slack_up);
        lo.extend(std::iter::repeat_n(S::zero(), arts.len()));
        up.extend(std::iter::repeat_n(S::infinity(), arts.len()));
        (lo, up)
    }

    /// Cold start: slack basis plus artificials for violated rows.
    pub fn cold(sf: &StandardForm<S>, lower: &[S], upper: &[S], tol: Tolerances<S>) -> Self {
        let (m, n) = (sf.m, sf.n);
        let mut x = vec![S::zero(); n + m];
        for j in 0..n {
            x[j] = initial_value(lower[j], upper[j]);
        }
        let mut resid = sf.rhs.clone();
        for j in 0..n {
            if x[j] != S::zero() {
                for &(i, a) in &sf.cols[j] {
                    resid[i] = resid[i] - a * x[j];
                }
            }
        }
        let mut arts = Vec::new();
        let mut sigma = vec![S::one(); m];
        let mut beta = vec![S::zero(); m];
        let mut basis = vec![0; m];
        for i in 0..m {
            let r = resid[i];
            if r >= sf.slack_lo[i] && r <= sf.slack_up[i] {
                basis[i] = n + i;
                beta[i] = r;
            } else {
                let s = r.max(sf.slack_lo[i]).min(sf.slack_up[i]);
                x[n + i] = s;
                let rem = r - s;
                let sg: i8 = if rem < S::zero() { -1 } else { 1 };
                sigma[i] = if sg < 0 { -S::one() } else { S::one() };
                basis[i] = n + m + arts.len();
                beta[i] = rem.abs();
                arts.push((i, sg));
            }
        }
        let ncols = n + m + arts.len();
        let (lo, up) = Self::column_bounds(sf, lower, upper, &arts);
        x.extend(std::iter::repeat_n(S::zero(), arts.len()));
        let mut t = vec![S::zero(); m * ncols];
        for j in 0..n {
            for &(i, a) in &sf.cols[j] {
                t[i * ncols + j] = a * sigma[i];
            }
        }
        for i in 0..m {
            t[i * ncols + n + i] = sigma[i];
        }
        for (k, &(i, _)) in arts.iter().enumerate() {
            t[i * ncols + n + m + k] = S::one();
        }
        let mut row_of = vec![NONE; ncols];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = i;
        }
        Self {
            m,
            n,
            ncols,
            t,
            beta,
            basis,
            row_of,
            x,
            lo,
            up,
            cost: vec![S::zero(); ncols],
            d: vec![S::zero(); ncols],
            live: vec![true; ncols],
            arts: Rc::new(arts),
            tol,
            iterations: 0,
            since_refactor: 0,
            bland: false,
            degenerate_run: 0,
            scratch: Vec::new(),
        }
    }

    /// Rebuilds the tableau for `snap` under new structural bounds.
    pub fn from_snapshot(
        sf: &StandardForm<S>,
        lower: &[S],
        upper: &[S],
        snap: &Snapshot,
        tol: Tolerances<S>,
    ) -> Option<Self> {
        let (m, n) = (sf.m, sf.n);
        let arts = snap.arts.clone();
        let ncols = n + m + arts.len();
        let (lo, up) = Self::column_bounds(sf, lower, upper, &arts);
        let mut live = vec![true; ncols];
        for k in 0..arts.len() {
            let c = n + m + k;
            live[c] = snap.basis.contains(&c);
        }
        // Artificials are fixed at zero once phase one is over.
        let mut lo = lo;
        let mut up = up;
        for k in 0..arts.len() {
            lo[n + m + k] = S::zero();
            up[n + m + k] = S::zero();
        }
        let mut x = vec![S::zero(); ncols];
        for j in 0..ncols {
            x[j] = match snap.status[j] {
                NonbasicAt::Lower if lo[j].is_finite() => lo[j],
                NonbasicAt::Upper if up[j].is_finite() => up[j],
                _ => initial_value(lo[j], up[j]),
            };
        }
        let mut tab = Self {
            m,
            n,
            ncols,
            t: Vec::new(),
            beta: vec![S::zero(); m],
            basis: vec![NONE; m],
            row_of: vec![NONE; ncols],
            x,
            lo,
            up,
            cost: vec![S::zero(); ncols],
            d: vec![S::zero(); ncols],
            live,
            arts,
            tol,
            iterations: 0,
            since_refactor: 0,
            bland: false,
            degenerate_run: 0,
            scratch: Vec::new(),
        };
        if tab.factor(sf, &snap.basis) {
            Some(tab)
        } else {
            None
        }
    }

    /// Gauss-Jordan from the original columns onto `basis`; recomputes
    /// basic values from the nonbasic ones.
    fn factor(&mut self, sf: &StandardForm<S>, basis: &[usize]) -> bool {
        let (m, n, nc) = (self.m, self.n, self.ncols);
        let w = nc + 1;
        let mut t = vec![S::zero(); m * w];
        for j in 0..n {
            for &(i, a) in &sf.cols[j] {
                t[i * w + j] = a;
            }
        }
        for i in 0..m {
            t[i * w + n + i] = S::one();
            t[i * w + nc] = sf.rhs[i];
        }
        for (k, &(i, sg)) in self.arts.iter().enumerate() {
            t[i * w + n + m + k] = if sg < 0 { -S::one() } else { S::one() };
        }
        let mut assigned = vec![false; m];
        let mut new_basis = vec![NONE; m];
        let mut nz = Vec::new();
        for &q in basis {
            let mut best = NONE;
            let mut best_abs = S::of(1e-11);
            for i in 0..m {
                if !assigned[i] {
                    let v = t[i * w + q].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = i;
                    }
                }
            }
            if best == NONE {
                return false;
            }
            let r = best;
            let p = t[r * w + q];
            nz.clear();
            for j in 0..w {
                let v = t[r * w + j];
                if v != S::zero() {
                    t[r * w + j] = v / p;
                    nz.push(j);
                }
            }
            t[r * w + q] = S::one();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = t[i * w + q];
                if f == S::zero() {
                    continue;
                }
                for &j in &nz {
                    let v = t[i * w + j] - f * t[r * w + j];
                    t[i * w + j] = if v.abs() < self.tol.drop { S::zero() } else { v };
                }
                t[i * w + q] = S::zero();
            }
            assigned[r] = true;
            new_basis[r] = q;
        }
        let mut tab = vec![S::zero(); m * nc];
        let mut beta = vec![S::zero(); m];
        for i in 0..m {
            tab[i * nc..(i + 1) * nc].copy_from_slice(&t[i * w..i * w + nc]);
            beta[i] = t[i * w + nc];
        }
        self.t = tab;
        self.basis = new_basis;
        self.row_of = vec![NONE; nc];
        for (i, &b) in self.basis.iter().enumerate() {
            self.row_of[b] = i;
        }
        for j in 0..nc {
            if self.row_of[j] == NONE && self.x[j] != S::zero() {
                let xj = self.x[j];
                for i in 0..m {
                    let a = self.t[i * nc + j];
                    if a != S::zero() {
                        beta[i] = beta[i] - a * xj;
                    }
                }
            }
        }
        self.beta = beta;
        self.since_refactor = 0;
        self.recompute_duals();
        true
    }

    pub fn snapshot(&self) -> Snapshot {
        let status = (0..self.ncols)
            .map(|j| {
                if self.row_of[j] != NONE {
                    NonbasicAt::Zero
                } else if self.lo[j].is_finite() && self.x[j] == self.lo[j] {
                    NonbasicAt::Lower
                } else if self.up[j].is_finite() && self.x[j] == self.up[j] {
                    NonbasicAt::Upper
                } else {
                    NonbasicAt::Zero
                }
            })
            .collect();
        Snapshot { basis: self.basis.clone(), status, arts: self.arts.clone() }
    }

    fn set_costs(&mut self, cost: impl Fn(usize) -> S) {
        for j in 0..self.ncols {
            self.cost[j] = cost(j);
        }
        self.recompute_duals();
    }

    fn recompute_duals(&mut self) {
        let nc = self.ncols;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == S::zero() {
                continue;
            }
            let row = &self.t[i * nc..(i + 1) * nc];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                if a != S::zero() {
                    *dj = *dj - cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = S::zero();
        }
    }

    pub fn value(&self, j: usize) -> S {
        match self.row_of[j] {
            NONE => self.x[j],
            r => self.beta[r],
        }
    }

    pub fn structural_values(&self) -> Vec<S> {
        (0..self.n).map(|j| self.value(j)).collect()
    }

    /// Moves column `q` by `theta` and pivots it into row `r` if given.
    fn step(&mut self, q: usize, theta: S, leave: Option<(usize, S)>) {
        let nc = self.ncols;
        if theta != S::zero() {
            for i in 0..self.m {
                let a = self.t[i * nc + q];
                if a != S::zero() {
                    self.beta[i] = self.beta[i] - theta * a;
                }
            }
        }
        let q_row = self.row_of[q];
        debug_assert_eq!(q_row, NONE);
        let new_val = self.x[q] + theta;
        match leave {
            None => self.x[q] = new_val,
            Some((r, bound)) => {
                let out = self.basis[r];
                self.x[out] = bound;
                self.row_of[out] = NONE;
                self.pivot(r, q);
                self.basis[r] = q;
                self.row_of[q] = r;
                self.beta[r] = new_val;
            }
        }
        self.iterations += 1;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + q];
        let mut nz = std::mem::take(&mut self.scratch);
        nz.clear();
        for j in 0..nc {
            let v = self.t[r * nc + j];
            if v != S::zero() && self.live[j] {
                self.t[r * nc + j] = v / p;
                nz.push(j);
            } else if v != S::zero() {
                self.t[r * nc + j] = S::zero();
            }
        }
        self.t[r * nc + q] = S::one();
        let (head, tail) = self.t.split_at_mut(r * nc);
        let (prow, rest) = tail.split_at_mut(nc);
        let drop = self.tol.drop;
        let eliminate = |row: &mut [S]| {
            let f = row[q];
            if f == S::zero() {
                return;
            }
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < drop { S::zero() } else { v };
            }
            row[q] = S::zero();
        };
        for row in head.chunks_exact_mut(nc) {
            eliminate(row);
        }
        for row in rest.chunks_exact_mut(nc) {
            eliminate(row);
        }
        let f = self.d[q];
        if f != S::zero() {
            for &j in &nz {
                self.d[j] = self.d[j] - f * prow[j];
            }
            self.d[q] = S::zero();
        }
        self.scratch = nz;
        self.since_refactor += 1;
    }

    /// Primal simplex from a primal-feasible basis.
    fn primal(&mut self, max_iter: usize) -> LpStatus {
        let nc = self.ncols;
        let tol = self.tol;
        loop {
            if self.iterations >= max_iter {
                return LpStatus::Stalled;
            }
            // Pricing.
            let mut q = NONE;
            let mut dir = S::zero();
            let mut best = S::zero();
            for j in 0..nc {
                if self.row_of[j] != NONE || !self.live[j] {
                    continue;
                }
                let dj = self.d[j];
                let cand = if dj < -tol.opt && self.x[j] < self.up[j] {
                    S::one()
                } else if dj > tol.opt && self.x[j] > self.lo[j] {
                    -S::one()
                } else {
                    continue;
                };
                if self.bland {
                    q = j;
                    dir = cand;
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    q = j;
                    dir = cand;
                }
            }
            if q == NONE {
                return LpStatus::Optimal;
            }

            // Harris two-pass ratio test.
            let flip = self.up[q] - self.lo[q];
            let mut t1 = S::infinity();
            for i in 0..self.m {
                let alpha = self.t[i * nc + q] * dir;
                let b = self.basis[i];
                if alpha > tol.pivot && self.lo[b].is_finite() {
                    t1 = t1.min((self.beta[i] - self.lo[b] + tol.feas) / alpha);
                } else if alpha < -tol.pivot && self.up[b].is_finite() {
                    t1 = t1.min((self.up[b] - self.beta[i] + tol.feas) / -alpha);
                }
            }
            if t1 == S::infinity() && !flip.is_finite() {
                return LpStatus::Unbounded;
            }
            let mut r = NONE;
            let mut r_ratio = S::infinity();
            let mut r_alpha = S::zero();
            for i in 0..self.m {
                let alpha = self.t[i * nc + q] * dir;
                let b = self.basis[i];
                let ratio = if alpha > tol.pivot && self.lo[b].is_finite() {
                    (self.beta[i] - self.lo[b]) / alpha
                } else if alpha < -tol.pivot && self.up[b].is_finite() {
                    (self.up[b] - self.beta[i]) / -alpha
                } else {
                    continue;
                };
                let better = if self.bland {
                    ratio < r_ratio || (ratio == r_ratio && r != NONE && b < self.basis[r])
                } else {
                    ratio <= t1 && alpha.abs() > r_alpha.abs()
                };
                if better {
                    r = i;
                    r_ratio = ratio;
                    r_alpha = alpha;
                }
            }
            let r_ratio = r_ratio.max(S::zero());
            if r == NONE || (flip.is_finite() && flip <= r_ratio) {
                if !flip.is_finite() {
                    return LpStatus::Unbounded;
                }
                self.step(q, flip * dir, None);
                self.degenerate_run = 0;
                self.bland = false;
                continue;
            }
            let b = self.basis[r];
            let bound = if r_alpha > S::zero() { self.lo[b] } else { self.up[b] };
            if r_ratio <= tol.feas {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERACY_THRESHOLD {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
            self.step(q, r_ratio * dir, Some((r, bound)));
        }
    }

    /// Dual simplex from a dual-feasible basis.
    fn dual(&mut self, max_iter: usize) -> LpStatus {
        let nc = self.ncols;
        let tol = self.tol;
        loop {
            if self.iterations >= max_iter {
                return LpStatus::Stalled;
            }
            // Largest infeasibility, or the lowest-index infeasible basic
            // variable while degenerate steps pile up.
            let mut r = NONE;
            let mut worst = tol.feas;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = (self.lo[b] - self.beta[i]).max(self.beta[i] - self.up[b]);
                if v > tol.feas && self.bland {
                    if r == NONE || b < self.basis[r] {
                        r = i;
                    }
                } else if v > worst && !self.bland {
                    worst = v;
                    r = i;
                }
            }
            if r == NONE {
                return LpStatus::Optimal;
            }
            let b = self.basis[r];
            let below = self.beta[r] < self.lo[b];
            let target = if below { self.lo[b] } else { self.up[b] };
            let mut q = NONE;
            let mut best_ratio = S::infinity();
            let mut best_alpha = S::zero();
            for j in 0..nc {
                if self.row_of[j] != NONE || !self.live[j] {
                    continue;
                }
                let a = self.t[r * nc + j];
                if a.abs() <= tol.pivot {
                    continue;
                }
                let can_up = self.x[j] < self.up[j];
                let can_down = self.x[j] > self.lo[j];
                // Basic value moves by -a per unit increase of x_j.
                let ok = if below { (a < S::zero() && can_up) || (a > S::zero() && can_down) } else {
                    (a > S::zero() && can_up) || (a < S::zero() && can_down)
                };
                if !ok {
                    continue;
                }
                let ratio = self.d[j].abs() / a.abs();
                let better = if self.bland {
                    ratio < best_ratio
                } else {
                    ratio < best_ratio - tol.opt || (ratio <= best_ratio + tol.opt && a.abs() > best_alpha.abs())
                };
                if better {
                    best_ratio = ratio.min(best_ratio);
                    best_alpha = a;
                    q = j;
                }
            }
            if q == NONE {
                return LpStatus::Infeasible;
            }
            if best_ratio <= tol.opt {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERACY_THRESHOLD {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
            let theta = (self.beta[r] - target) / self.t[r * nc + q];
            self.step(q, theta, Some((r, target)));
        }
    }

    pub fn objective(&self) -> S {
        (0..self.ncols).fold(S::zero(), |acc, j| {
            let c = self.cost[j];
            if c == S::zero() {
                acc
            } else {
                acc + c * self.value(j)
            }
        })
    }

    fn max_primal_infeasibility(&self) -> S {
        (0..self.m).fold(S::zero(), |acc, i| {
            let b = self.basis[i];
            acc.max(self.lo[b] - self.beta[i]).max(self.beta[i] - self.up[b])
        })
    }

    /// Phase one then phase two from a cold tableau.
    pub fn solve_cold(&mut self, sf: &StandardForm<S>, max_iter: usize) -> LpStatus {
        let (n, m) = (self.n, self.m);
        if !self.arts.is_empty() {
            self.set_costs(|j| if j >= n + m { S::one() } else { S::zero() });
            match self.primal(max_iter) {
                LpStatus::Optimal => {}
                LpStatus::Unbounded => return LpStatus::Stalled,
                s => return s,
            }
            let infeas = (n + m..self.ncols).fold(S::zero(), |acc, j| acc + self.value(j).abs());
            let scale = S::one() + sf.rhs.iter().fold(S::zero(), |acc, b| acc.max(b.abs()));
            if infeas > self.tol.feas * scale {
                return LpStatus::Infeasible;
            }
            self.retire_artificials();
        }
        self.set_costs(|j| if j < n { sf.cost[j] } else { S::zero() });
        self.finish(sf, max_iter)
    }

    fn retire_artificials(&mut self) {
        let (n, m, nc) = (self.n, self.m, self.ncols);
        for k in 0..self.arts.len() {
            let c = n + m + k;
            self.lo[c] = S::zero();
            self.up[c] = S::zero();
            let r = self.row_of[c];
            if r == NONE {
                self.x[c] = S::zero();
                self.live[c] = false;
                continue;
            }
            // Degenerate pivot onto any usable non-artificial column.
            let mut q = NONE;
            let mut best = self.tol.pivot;
            for j in 0..n + m {
                if self.row_of[j] == NONE && self.live[j] {
                    let a = self.t[r * nc + j].abs();
                    if a > best {
                        best = a;
                        q = j;
                    }
                }
            }
            if q != NONE {
                let theta = (self.beta[r]) / self.t[r * nc + q];
                self.step(q, theta, Some((r, S::zero())));
                self.live[c] = false;
            }
        }
    }

    /// Re-optimizes after bounds changed: dual simplex, then primal cleanup.
    pub fn solve_warm(&mut self, sf: &StandardForm<S>, max_iter: usize) -> LpStatus {
        let n = self.n;
        // Dual degeneracy is broken by a small deterministic cost shift that
        // keeps every nonbasic reduced cost on its feasible side; the true
        // costs are restored before the primal cleanup.
        let scale = sf.cost.iter().fold(S::one(), |acc, c| acc.max(c.abs()));
        let eps = S::of(1e-7) * scale;
        let shift: Vec<S> = (0..self.ncols)
            .map(|j| {
                if self.row_of[j] != NONE || !self.live[j] {
                    return S::zero();
                }
                let h = S::of(0.5 + 0.5 * unit_hash(j));
                if self.up[j].is_finite() && self.x[j] == self.up[j] && self.lo[j] != self.up[j] {
                    -eps * h
                } else {
                    eps * h
                }
            })
            .collect();
        self.set_costs(|j| if j < n { sf.cost[j] + shift[j] } else { shift[j] });
        match self.dual(max_iter) {
            LpStatus::Optimal => {
                self.set_costs(|j| if j < n { sf.cost[j] } else { S::zero() });
                self.finish(sf, max_iter)
            }
            s => s,
        }
    }

    /// Primal phase two with periodic refactorization.
    fn finish(&mut self, sf: &StandardForm<S>, max_iter: usize) -> LpStatus {
        for _ in 0..4 {
            let status = self.primal(max_iter);
            if status != LpStatus::Optimal {
                return status;
            }
            if self.since_refactor < REFACTOR_EVERY && self.max_primal_infeasibility() <= self.tol.feas {
                return LpStatus::Optimal;
            }
            // Drift check: rebuild from the current basis and re-run.
            let basis = self.basis.clone();
            if !self.factor(sf, &basis) {
                return LpStatus::Stalled;
            }
            if self.max_primal_infeasibility() > self.tol.feas {
                match self.dual(max_iter) {
                    LpStatus::Optimal => {}
                    s => return s,
                }
            }
        }
        LpStatus::Stalled
    }

    /// Applies new structural bounds in place, keeping the basis.
    pub fn set_structural_bounds(&mut self, lower: &[S], upper: &[S]) {
        let nc = self.ncols;
        for j in 0..self.n {
            let (old_lo, old_up) = (self.lo[j], self.up[j]);
            self.lo[j] = lower[j];
            self.up[j] = upper[j];
            if self.row_of[j] != NONE {
                continue;
            }
            // A nonbasic column follows the bound it sat at, so reduced
            // costs keep their sign.
            let old = self.x[j];
            let new = if old == old_lo && lower[j].is_finite() && self.d[j] >= S::zero() {
                lower[j]
            } else if old == old_up && upper[j].is_finite() && self.d[j] <= S::zero() {
                upper[j]
            } else {
                old.max(lower[j]).min(upper[j])
            };
            if new != old {
                let delta = new - old;
                for i in 0..self.m {
                    let a = self.t[i * nc + j];
                    if a != S::zero() {
                        self.beta[i] = self.beta[i] - delta * a;
                    }
                }
                self.x[j] = new;
            }
        }
    }

}

/// Deterministic value in [0, 1) derived from a column index.
fn unit_hash(j: usize) -> f64 {
    let mut z = (j as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn initial_value<S: Scalar>(lo: S, up: S) -> S {
    if lo.is_finite() {
        lo
    } else if up.is_finite() {
        up
    } else {
        S::zero()
    }
}

/// Result of a single LP solve on a standard form.
pub(crate) struct LpRun<S> {
    pub status: LpStatus,
    pub values: Vec<S>,
    /// Objective in minimization sense, without the constant offset.
    pub internal: S,
    pub tableau: Option<Tableau<S>>,
    pub iterations: usize,
}

pub(crate) fn iteration_cap(sf_m: usize, sf_n: usize) -> usize {
    50 * (sf_m + sf_n) + 10_000
}

pub(crate) fn warm_iteration_cap(sf_m: usize, sf_n: usize) -> usize {
    2 * (sf_m + sf_n) + 200
}

/// Solves from scratch under the given structural bounds.
pub(crate) fn run_cold<S: Scalar>(
    sf: &StandardForm<S>,
    lower: &[S],
    upper: &[S],
    tol: Tolerances<S>,
) -> LpRun<S> {
    if sf.trivially_infeasible || lower.iter().zip(upper).any(|(l, u)| l > u) {
        return LpRun { status: LpStatus::Infeasible, values: Vec::new(), internal: S::nan(), tableau: None, iterations: 0 };
    }
    let mut tab = Tableau::cold(sf, lower, upper, tol);
    let status = tab.solve_cold(sf, iteration_cap(sf.m, sf.n));
    package(tab, status)
}

/// Re-optimizes an existing tableau under new bounds.
pub(crate) fn run_warm<S: Scalar>(
    sf: &StandardForm<S>,
    mut tab: Tableau<S>,
    lower: &[S],
    upper: &[S],
) -> LpRun<S> {
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return LpRun { status: LpStatus::Infeasible, values: Vec::new(), internal: S::nan(), tableau: None, iterations: 0 };
    }
    tab.iterations = 0;
    tab.set_structural_bounds(lower, upper);
    // A warm start that needs more pivots than a cold solve is abandoned early.
    let status = tab.solve_warm(sf, warm_iteration_cap(sf.m, sf.n));
    package(tab, status)
}

fn package<S: Scalar>(tab: Tableau<S>, status: LpStatus) -> LpRun<S> {
    let iterations = tab.iterations;
    if status == LpStatus::Optimal {
        let values = tab.structural_values();
        let internal = tab.objective();
        LpRun { status, values, internal, tableau: Some(tab), iterations }
    } else {
        LpRun { status, values: Vec::new(), internal: S::nan(), tableau: None, iterations }
    }
}
