//! Exact rational linear programming and conic-hull membership.
//!
//! The solver is a dense two-phase fraction-free tableau simplex with Dantzig pricing and a
//! Bland fallback. Every
//! outcome it produces is re-checked by the independent routines
//! [`verify_point`], [`verify_farkas`] and [`verify_ray`] before it is returned.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{common_denominator, serde_rat_vec, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// `coeffs · x (sense) rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<Rat>,
    pub sense: Sense,
    pub rhs: Rat,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<Rat>, sense: Sense, rhs: Rat) -> Self {
        LinearConstraint { coeffs, sense, rhs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub direction: Direction,
    pub coeffs: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    pub kinds: Vec<VarKind>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Option<Objective>,
}

impl LpProblem {
    pub fn new(kinds: Vec<VarKind>) -> Self {
        LpProblem {
            kinds,
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn nonnegative(num_vars: usize) -> Self {
        LpProblem::new(vec![VarKind::NonNegative; num_vars])
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<Rat>, sense: Sense, rhs: Rat) -> &mut Self {
        self.constraints
            .push(LinearConstraint::new(coeffs, sense, rhs));
        self
    }

    pub fn with_objective(mut self, direction: Direction, coeffs: Vec<Rat>) -> Self {
        self.objective = Some(Objective { direction, coeffs });
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::shape(format!(
                    "constraint {i} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
        }
        if let Some(obj) = &self.objective {
            if obj.coeffs.len() != n {
                return Err(Error::shape(format!(
                    "objective has {} coefficients for {n} variables",
                    obj.coeffs.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// A feasible point; optimal when an objective is present. Without an
    /// objective the value is zero.
    Optimal { point: Vec<Rat>, value: Rat },
    /// `y` with `y_i ≥ 0` on `Le` rows, `y_i ≤ 0` on `Ge` rows, `(yᵀA)_j ≥ 0`
    /// for non-negative variables, `= 0` for free ones, and `yᵀb < 0`.
    Infeasible { farkas: Vec<Rat> },
    /// A feasible point and a recession direction improving the objective.
    Unbounded { point: Vec<Rat>, ray: Vec<Rat> },
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

fn sense_holds(lhs: &Rat, sense: Sense, rhs: &Rat) -> bool {
    match sense {
        Sense::Le => lhs <= rhs,
        Sense::Ge => lhs >= rhs,
        Sense::Eq => lhs == rhs,
    }
}

pub fn verify_point(problem: &LpProblem, point: &[Rat]) -> bool {
    point.len() == problem.num_vars()
        && problem
            .kinds
            .iter()
            .zip(point)
            .all(|(k, x)| *k == VarKind::Free || !x.is_negative())
        && problem
            .constraints
            .iter()
            .all(|c| sense_holds(&dot(&c.coeffs, point), c.sense, &c.rhs))
}

pub fn verify_farkas(problem: &LpProblem, y: &[Rat]) -> bool {
    if y.len() != problem.constraints.len() {
        return false;
    }
    let signs_ok = problem
        .constraints
        .iter()
        .zip(y)
        .all(|(c, yi)| match c.sense {
            Sense::Le => !yi.is_negative(),
            Sense::Ge => !yi.is_positive(),
            Sense::Eq => true,
        });
    if !signs_ok {
        return false;
    }
    let columns_ok = problem.kinds.iter().enumerate().all(|(j, kind)| {
        let s = problem
            .constraints
            .iter()
            .zip(y)
            .filter(|(_, yi)| !yi.is_zero())
            .fold(Rat::zero(), |acc, (c, yi)| acc + yi * &c.coeffs[j]);
        match kind {
            VarKind::NonNegative => !s.is_negative(),
            VarKind::Free => s.is_zero(),
        }
    });
    let rhs = problem
        .constraints
        .iter()
        .zip(y)
        .fold(Rat::zero(), |acc, (c, yi)| acc + yi * &c.rhs);
    columns_ok && rhs.is_negative()
}

pub fn verify_ray(problem: &LpProblem, ray: &[Rat]) -> bool {
    let Some(obj) = &problem.objective else {
        return false;
    };
    if ray.len() != problem.num_vars() {
        return false;
    }
    let recession = problem
        .kinds
        .iter()
        .zip(ray)
        .all(|(k, r)| *k == VarKind::Free || !r.is_negative())
        && problem
            .constraints
            .iter()
            .all(|c| sense_holds(&dot(&c.coeffs, ray), c.sense, &Rat::zero()));
    let gain = dot(&obj.coeffs, ray);
    recession
        && match obj.direction {
            Direction::Maximize => gain.is_positive(),
            Direction::Minimize => gain.is_negative(),
        }
}

/// Fraction-free tableau: the true entry at `(i, j)` is `rows[i][j] / det`,
/// where `det > 0` is the determinant of the current basis. Pivoting divides
/// exactly by the previous determinant, so entries stay integral.
struct Tableau {
    rows: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    basis: Vec<usize>,
    obj: Vec<BigInt>,
    obj_rhs: BigInt,
    det: BigInt,
}

enum Run {
    Optimal,
    Unbounded(usize),
}

fn update(target: &mut BigInt, a: &BigInt, f: &BigInt, pc: &BigInt, det: &BigInt) {
    if target.is_zero() && pc.is_zero() {
        return;
    }
    let mut v = &*target * a;
    if !pc.is_zero() {
        v -= f * pc;
    }
    *target = v / det;
}

impl Tableau {
    fn pivot(&mut self, p: usize, j: usize) {
        let a = self.rows[p][j].clone();
        let det = std::mem::replace(&mut self.det, a.clone());
        let (before, rest) = self.rows.split_at_mut(p);
        let (prow, after) = rest.split_first_mut().expect("pivot row exists");
        let prhs = self.rhs[p].clone();
        let eliminate = |row: &mut Vec<BigInt>, rhs: &mut BigInt| {
            let f = row[j].clone();
            for (v, pc) in row.iter_mut().zip(prow.iter()) {
                update(v, &a, &f, pc, &det);
            }
            update(rhs, &a, &f, &prhs, &det);
        };
        for (r, row) in before.iter_mut().enumerate() {
            eliminate(row, &mut self.rhs[r]);
        }
        for (r, row) in after.iter_mut().enumerate() {
            eliminate(row, &mut self.rhs[p + 1 + r]);
        }
        eliminate(&mut self.obj, &mut self.obj_rhs);
        self.basis[p] = j;
        if self.det.is_negative() {
            self.det = -&self.det;
            for row in &mut self.rows {
                row.iter_mut().for_each(|v| *v = -&*v);
            }
            self.rhs.iter_mut().for_each(|v| *v = -&*v);
            self.obj.iter_mut().for_each(|v| *v = -&*v);
            self.obj_rhs = -&self.obj_rhs;
        }
    }

    /// Installs integral costs for the current basis.
    fn set_costs(&mut self, costs: &[BigInt]) {
        self.obj = costs.iter().map(|c| c * &self.det).collect();
        self.obj_rhs = BigInt::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in self.obj.iter_mut().zip(&self.rows[r]) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
            self.obj_rhs -= cb * &self.rhs[r];
        }
    }

    fn value(&self, v: &BigInt) -> Rat {
        Rat::new(v.clone(), self.det.clone())
    }

    /// Dantzig's rule, switching to Bland's rule for good after a long run of
    /// degenerate pivots so that cycling is impossible.
    fn run(&mut self, allowed: usize) -> Run {
        let stall_limit = 2 * self.rows.len() + 8;
        let mut stalled = 0;
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..allowed).find(|&j| self.obj[j].is_negative())
            } else {
                (0..allowed)
                    .filter(|&j| self.obj[j].is_negative())
                    .min_by(|&a, &b| self.obj[a].cmp(&self.obj[b]).then(a.cmp(&b)))
            };
            let Some(j) = entering else {
                return Run::Optimal;
            };
            let mut best: Option<usize> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if !a.is_positive() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(br) => {
                        // rhs_r / a_r against rhs_br / a_br without dividing.
                        let lhs = &self.rhs[r] * &self.rows[br][j];
                        let rhs = &self.rhs[br] * a;
                        lhs < rhs || (lhs == rhs && self.basis[r] < self.basis[br])
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            let Some(p) = best else {
                return Run::Unbounded(j);
            };
            if self.rhs[p].is_zero() {
                stalled += 1;
                bland |= stalled > stall_limit;
            } else {
                stalled = 0;
            }
            self.pivot(p, j);
        }
    }

    fn column_values(&self, ncols: usize) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < ncols {
                x[b] = self.value(&self.rhs[r]);
            }
        }
        x
    }
}

/// Multiplies by the common denominator, returning the integral numerators.
fn integral(values: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let scale = common_denominator(values);
    let ints = values
        .iter()
        .map(|v| (v * Rat::from_integer(scale.clone())).to_integer())
        .collect();
    (ints, scale)
}

/// Solves `problem` exactly; the outcome is verified before it is returned.
pub fn solve(problem: &LpProblem) -> Result<LpOutcome> {
    problem.validate()?;
    let outcome = simplex(problem);
    let ok = match &outcome {
        LpOutcome::Optimal { point, .. } => verify_point(problem, point),
        LpOutcome::Infeasible { farkas } => verify_farkas(problem, farkas),
        LpOutcome::Unbounded { point, ray } => {
            verify_point(problem, point) && verify_ray(problem, ray)
        }
    };
    if ok {
        Ok(outcome)
    } else {
        Err(Error::Verification(
            "simplex produced an invalid certificate".into(),
        ))
    }
}

fn simplex(problem: &LpProblem) -> LpOutcome {
    let n = problem.num_vars();
    let m = problem.constraints.len();

    // Structural columns: one per variable plus a negative part for free ones.
    let mut pos_col = Vec::with_capacity(n);
    let mut neg_col = vec![None; n];
    let mut ncols = 0;
    for (j, kind) in problem.kinds.iter().enumerate() {
        pos_col.push(ncols);
        ncols += 1;
        if *kind == VarKind::Free {
            neg_col[j] = Some(ncols);
            ncols += 1;
        }
    }
    let structural = ncols;

    // Rows normalised to rhs ≥ 0.
    let mut signs = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for c in &problem.constraints {
        let flip = c.rhs.is_negative();
        signs.push(flip);
        senses.push(match (c.sense, flip) {
            (Sense::Le, true) => Sense::Ge,
            (Sense::Ge, true) => Sense::Le,
            (s, _) => s,
        });
    }
    let slack_count = senses.iter().filter(|s| **s != Sense::Eq).count();
    let art_count = senses.iter().filter(|s| **s != Sense::Le).count();
    let art_start = structural + slack_count;
    let total = art_start + art_count;

    // Each row is scaled by a positive integer to clear denominators.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut scales = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut identity = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (structural, art_start);
    for (i, c) in problem.constraints.iter().enumerate() {
        let mut values = c.coeffs.clone();
        values.push(c.rhs.clone());
        let (mut ints, scale) = integral(&values);
        if signs[i] {
            ints.iter_mut().for_each(|v| *v = -&*v);
        }
        let b = ints.pop().expect("rhs was pushed");
        let mut row = vec![BigInt::zero(); total];
        for (j, a) in ints.into_iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if let Some(nc) = neg_col[j] {
                row[nc] = -&a;
            }
            row[pos_col[j]] = a;
        }
        match senses[i] {
            Sense::Le => {
                row[next_slack] = BigInt::one();
                basis.push(next_slack);
                identity.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -BigInt::one();
                next_slack += 1;
                row[next_art] = BigInt::one();
                basis.push(next_art);
                identity.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = BigInt::one();
                basis.push(next_art);
                identity.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
        rhs.push(b);
        scales.push(scale);
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis,
        obj: Vec::new(),
        obj_rhs: BigInt::zero(),
        det: BigInt::one(),
    };

    if art_count > 0 {
        let mut costs = vec![BigInt::zero(); total];
        for c in costs.iter_mut().skip(art_start) {
            *c = BigInt::one();
        }
        t.set_costs(&costs);
        t.run(total);
        if t.obj_rhs.is_negative() {
            // Phase-one duals read off the initial identity columns, mapped back
            // through the row scaling.
            let farkas = (0..m)
                .map(|i| {
                    let col = identity[i];
                    let dual = Rat::from_integer(costs[col].clone()) - t.value(&t.obj[col]);
                    let dual = dual * Rat::from_integer(scales[i].clone());
                    if signs[i] {
                        dual
                    } else {
                        -dual
                    }
                })
                .collect();
            return LpOutcome::Infeasible { farkas };
        }
        let keep: Vec<bool> = (0..t.rows.len())
            .map(|r| {
                if t.basis[r] < art_start {
                    return true;
                }
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => {
                        t.pivot(r, j);
                        true
                    }
                    None => false,
                }
            })
            .collect();
        let mut r = 0;
        t.rows.retain(|_| {
            r += 1;
            keep[r - 1]
        });
        let mut r = 0;
        t.rhs.retain(|_| {
            r += 1;
            keep[r - 1]
        });
        let mut r = 0;
        t.basis.retain(|_| {
            r += 1;
            keep[r - 1]
        });
    }

    let to_original = |cols: &[Rat]| -> Vec<Rat> {
        (0..n)
            .map(|j| match neg_col[j] {
                Some(nc) => &cols[pos_col[j]] - &cols[nc],
                None => cols[pos_col[j]].clone(),
            })
            .collect()
    };

    let Some(obj) = &problem.objective else {
        return LpOutcome::Optimal {
            point: to_original(&t.column_values(total)),
            value: Rat::zero(),
        };
    };
    let signed: Vec<Rat> = obj
        .coeffs
        .iter()
        .map(|c| match obj.direction {
            Direction::Maximize => -c.clone(),
            Direction::Minimize => c.clone(),
        })
        .collect();
    let (signed, _) = integral(&signed);
    let mut costs = vec![BigInt::zero(); total];
    for (j, c) in signed.into_iter().enumerate() {
        if let Some(nc) = neg_col[j] {
            costs[nc] = -&c;
        }
        costs[pos_col[j]] = c;
    }
    t.set_costs(&costs);
    match t.run(art_start) {
        Run::Optimal => {
            let point = to_original(&t.column_values(total));
            let value = dot(&obj.coeffs, &point);
            LpOutcome::Optimal { point, value }
        }
        Run::Unbounded(j) => {
            let point = to_original(&t.column_values(total));
            let mut dir = vec![Rat::zero(); total];
            dir[j] = Rat::one();
            for (r, &b) in t.basis.iter().enumerate() {
                dir[b] = -t.value(&t.rows[r][j]);
            }
            LpOutcome::Unbounded {
                point,
                ray: to_original(&dir),
            }
        }
    }
}

/// Is `target` in the cone generated by `generators`?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeProblem {
    pub dim: usize,
    pub generators: Vec<Vec<Rat>>,
    pub target: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConeDecision {
    /// `Σ λ_i g_i = target` with `λ ≥ 0`.
    Member {
        #[serde(with = "serde_rat_vec")]
        lambda: Vec<Rat>,
    },
    /// `⟨c, g_i⟩ ≤ 0` for every generator and `⟨c, target⟩ > 0`.
    Separated {
        #[serde(with = "serde_rat_vec")]
        certificate: Vec<Rat>,
    },
}

impl ConeProblem {
    pub fn new(dim: usize, generators: Vec<Vec<Rat>>, target: Vec<Rat>) -> Result<Self> {
        if target.len() != dim || generators.iter().any(|g| g.len() != dim) {
            return Err(Error::shape(format!(
                "cone vectors must all have length {dim}"
            )));
        }
        Ok(ConeProblem {
            dim,
            generators,
            target,
        })
    }
}

impl ConeDecision {
    /// Independent check of the decision's defining invariant.
    pub fn verify(&self, problem: &ConeProblem) -> bool {
        match self {
            ConeDecision::Member { lambda } => {
                lambda.len() == problem.generators.len()
                    && lambda.iter().all(|l| !l.is_negative())
                    && (0..problem.dim).all(|j| {
                        let s = lambda
                            .iter()
                            .zip(&problem.generators)
                            .filter(|(l, _)| !l.is_zero())
                            .fold(Rat::zero(), |acc, (l, g)| acc + l * &g[j]);
                        s == problem.target[j]
                    })
            }
            ConeDecision::Separated { certificate } => {
                certificate.len() == problem.dim
                    && problem
                        .generators
                        .iter()
                        .all(|g| !dot(certificate, g).is_positive())
                    && dot(certificate, &problem.target).is_positive()
            }
        }
    }

    pub fn is_member(&self) -> bool {
        matches!(self, ConeDecision::Member { .. })
    }
}

pub fn cone_membership(problem: &ConeProblem) -> Result<ConeDecision> {
    let g = problem.generators.len();
    let mut lp = LpProblem::nonnegative(g);
    for j in 0..problem.dim {
        let coeffs = problem.generators.iter().map(|v| v[j].clone()).collect();
        lp.constrain(coeffs, Sense::Eq, problem.target[j].clone());
    }
    let decision = match solve(&lp)? {
        LpOutcome::Optimal { point, .. } => ConeDecision::Member { lambda: point },
        LpOutcome::Infeasible { farkas } => ConeDecision::Separated {
            certificate: farkas.into_iter().map(|y| -y).collect(),
        },
        LpOutcome::Unbounded { .. } => unreachable!("no objective"),
    };
    if decision.verify(problem) {
        Ok(decision)
    } else {
        Err(Error::Verification("cone decision failed its check".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn lp_examples() {
        let mut p = LpProblem::nonnegative(1);
        p.constrain(ints(&[1]), Sense::Le, int(-1));
        assert!(matches!(solve(&p).unwrap(), LpOutcome::Infeasible { .. }));

        let mut p =
            LpProblem::new(vec![VarKind::Free]).with_objective(Direction::Maximize, ints(&[1]));
        p.constrain(ints(&[1]), Sense::Le, rat(5, 3));
        match solve(&p).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(value, rat(5, 3));
                assert_eq!(point, vec![rat(5, 3)]);
            }
            other => panic!("{other:?}"),
        }

        let mut p = LpProblem::nonnegative(2).with_objective(Direction::Maximize, ints(&[1, -1]));
        p.constrain(ints(&[1, 1]), Sense::Eq, int(1));
        assert_eq!(
            solve(&p).unwrap(),
            LpOutcome::Optimal {
                point: ints(&[1, 0]),
                value: int(1)
            }
        );
    }

    #[test]
    fn unbounded_and_free() {
        let mut p = LpProblem::new(vec![VarKind::Free, VarKind::NonNegative])
            .with_objective(Direction::Minimize, ints(&[1, 0]));
        p.constrain(ints(&[1, -1]), Sense::Le, int(3));
        match solve(&p).unwrap() {
            LpOutcome::Unbounded { ray, .. } => assert!(ray[0].is_negative()),
            other => panic!("{other:?}"),
        }
        let mut p =
            LpProblem::new(vec![VarKind::Free]).with_objective(Direction::Minimize, ints(&[1]));
        p.constrain(ints(&[1]), Sense::Ge, int(-4));
        match solve(&p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(-4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows() {
        let mut p = LpProblem::nonnegative(2).with_objective(Direction::Maximize, ints(&[1, 2]));
        p.constrain(ints(&[1, 1]), Sense::Eq, int(2));
        p.constrain(ints(&[2, 2]), Sense::Eq, int(4));
        p.constrain(ints(&[1, 0]), Sense::Ge, int(1));
        match solve(&p).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point, ints(&[1, 1]));
                assert_eq!(value, int(3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cone_examples() {
        let gens = vec![ints(&[1, 0]), ints(&[0, 1])];
        let p = ConeProblem::new(2, gens.clone(), ints(&[1, 1])).unwrap();
        assert_eq!(
            cone_membership(&p).unwrap(),
            ConeDecision::Member {
                lambda: ints(&[1, 1])
            }
        );
        let p = ConeProblem::new(2, gens, ints(&[-1, 0])).unwrap();
        assert_eq!(
            cone_membership(&p).unwrap(),
            ConeDecision::Separated {
                certificate: ints(&[-1, 0])
            }
        );
        let p = ConeProblem::new(2, vec![ints(&[1, 1]), ints(&[0, 1])], ints(&[2, 3])).unwrap();
        assert_eq!(
            cone_membership(&p).unwrap(),
            ConeDecision::Member {
                lambda: ints(&[2, 1])
            }
        );
        assert!(ConeProblem::new(2, vec![ints(&[1])], ints(&[0, 0])).is_err());
    }

    #[test]
    fn certificate_json() {
        let d = ConeDecision::Separated {
            certificate: vec![rat(-1, 2), int(0)],
        };
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"kind":"separated","certificate":["-1/2","0"]}"#);
        assert_eq!(serde_json::from_str::<ConeDecision>(&text).unwrap(), d);
        let m = ConeDecision::Member { lambda: ints(&[2]) };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"kind":"member","lambda":["2"]}"#
        );
    }

    fn small() -> impl Strategy<Value = Rat> {
        (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cone_decisions_verify(
            gens in prop::collection::vec(prop::collection::vec(small(), 3), 0..5),
            target in prop::collection::vec(small(), 3),
        ) {
            let p = ConeProblem::new(3, gens, target).unwrap();
            let d = cone_membership(&p).unwrap();
            prop_assert!(d.verify(&p));
            prop_assert_eq!(cone_membership(&p).unwrap(), d);
        }

        #[test]
        fn lp_outcomes_verify(
            rows in prop::collection::vec((prop::collection::vec(small(), 3), 0usize..3, small()), 1..5),
            obj in prop::collection::vec(small(), 3),
            free in prop::collection::vec(any::<bool>(), 3),
        ) {
            let kinds = free.iter().map(|&f| if f { VarKind::Free } else { VarKind::NonNegative }).collect();
            let mut p = LpProblem::new(kinds).with_objective(Direction::Maximize, obj);
            for (coeffs, s, rhs) in rows {
                p.constrain(coeffs, [Sense::Le, Sense::Ge, Sense::Eq][s], rhs);
            }
            // `solve` verifies its own outcome; an Err would mean a bad certificate.
            let outcome = solve(&p).unwrap();
            if let LpOutcome::Infeasible { farkas } = &outcome {
                prop_assert!(verify_farkas(&p, farkas));
            }
        }
    }
}
