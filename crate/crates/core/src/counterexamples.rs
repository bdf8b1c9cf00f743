//! Rational stand-ins for the irrational-parameter families on `D = {0, 1, 2}`.
//!
//! The parameter `t` is never represented; it is bracketed as `u < t < v` and
//! every statement about `t` is checked at both endpoints. Statements linear
//! in `t` then hold on the whole bracket.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{enumerate_ops, Caps, DomainSize, Label, Operation};
use crate::error::{Error, Result};
use crate::improve::is_weighted_polymorphism;
use crate::lp::{solve, verify_farkas, Direction, LpOutcome, LpProblem, Sense, VarKind};
use crate::rational::{int, rat, serde_rat, serde_rat_vec, ExtRat, Rat};
use crate::wops::Weighting;
use crate::wrel::WeightedRelation;

fn d3() -> DomainSize {
    DomainSize::new(3).expect("3 is a valid domain size")
}

/// Rational bounds `lower < t < upper` for an irrational parameter `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketedParam {
    #[serde(with = "serde_rat")]
    pub lower: Rat,
    #[serde(with = "serde_rat")]
    pub upper: Rat,
    pub description: String,
}

impl BracketedParam {
    pub fn new(lower: Rat, upper: Rat, description: impl Into<String>) -> Result<Self> {
        if !lower.is_positive() || lower >= upper {
            return Err(Error::invalid(format!(
                "bracket needs 0 < u < v, got u={lower}, v={upper}"
            )));
        }
        Ok(BracketedParam {
            lower,
            upper,
            description: description.into(),
        })
    }

    pub fn endpoints(&self) -> [&Rat; 2] {
        [&self.lower, &self.upper]
    }

    /// Is `inner` contained in `self`?
    pub fn contains(&self, inner: &BracketedParam) -> bool {
        self.lower <= inner.lower && inner.upper <= self.upper
    }
}

/// Successive continued-fraction brackets of `√2`.
pub fn sqrt2_brackets() -> Vec<BracketedParam> {
    [((1, 1), (3, 2)), ((7, 5), (17, 12)), ((41, 29), (99, 70))]
        .into_iter()
        .map(|((a, b), (c, e))| {
            BracketedParam::new(rat(a, b), rat(c, e), "sqrt(2)").expect("valid bracket")
        })
        .collect()
}

/// `(0, −1, −1−u)`.
pub fn mu_minus(u: &Rat) -> WeightedRelation {
    let table = vec![int(0), int(-1), -(Rat::one() + u)];
    WeightedRelation::new(d3(), 1, table.into_iter().map(ExtRat::Finite).collect())
        .expect("three entries")
}

/// `(0, 1, 1+v)`.
pub fn mu_plus(v: &Rat) -> WeightedRelation {
    let table = vec![int(0), int(1), Rat::one() + v];
    WeightedRelation::new(d3(), 1, table.into_iter().map(ExtRat::Finite).collect())
        .expect("three entries")
}

/// `ρ(2) − ρ(0) ≥ (1+t)(ρ(1) − ρ(0))` at `t`, vacuous unless all values are finite.
pub fn in_u_at(rho: &WeightedRelation, t: &Rat) -> Result<bool> {
    if rho.domain() != d3() || rho.arity() != 1 {
        return Err(Error::shape(
            "U contains unary weighted relations on a 3-element domain",
        ));
    }
    let (ExtRat::Finite(r0), ExtRat::Finite(r1), ExtRat::Finite(r2)) =
        (rho.at(0), rho.at(1), rho.at(2))
    else {
        return Ok(true);
    };
    Ok(r2 - r0 >= (Rat::one() + t) * (r1 - r0))
}

/// Membership in `U` for every `t` in the bracket.
pub fn in_u(rho: &WeightedRelation, bracket: &BracketedParam) -> Result<bool> {
    Ok(in_u_at(rho, &bracket.lower)? && in_u_at(rho, &bracket.upper)?)
}

/// Validates that `pairs` is an equivalence relation on `0..r`.
pub fn check_equivalence(r: usize, pairs: &[(usize, usize)]) -> Result<()> {
    let mut rel = vec![vec![false; r]; r];
    for &(i, j) in pairs {
        if i >= r || j >= r {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                count: r,
            });
        }
        rel[i][j] = true;
    }
    for i in 0..r {
        if !rel[i][i] {
            return Err(Error::invalid(format!("S is not reflexive at {i}")));
        }
        for j in 0..r {
            if rel[i][j] && !rel[j][i] {
                return Err(Error::invalid(format!("S is not symmetric at ({i}, {j})")));
            }
            for l in 0..r {
                if rel[i][j] && rel[j][l] && !rel[i][l] {
                    return Err(Error::invalid(format!(
                        "S is not transitive at ({i}, {j}, {l})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The equivalence relation with the given classes, as pairs.
pub fn equivalence_from_classes(classes: &[Vec<usize>]) -> Vec<(usize, usize)> {
    classes
        .iter()
        .flat_map(|c| c.iter().flat_map(move |&i| c.iter().map(move |&j| (i, j))))
        .collect()
}

/// `γ(x_1..x_r) = Σ ρ_i(x_i) + Σ_{(i,j) ∈ S} φ_=(x_i, x_j)`.
pub fn gamma_family_member(
    rhos: &[WeightedRelation],
    s: &[(usize, usize)],
    bracket: &BracketedParam,
) -> Result<WeightedRelation> {
    let r = rhos.len();
    if r == 0 {
        return Err(Error::invalid("at least one coordinate is required"));
    }
    for (i, rho) in rhos.iter().enumerate() {
        if !in_u(rho, bracket)? {
            return Err(Error::invalid(format!(
                "ρ_{} is not in U on the bracket",
                i + 1
            )));
        }
    }
    check_equivalence(r, s)?;
    WeightedRelation::from_fn(d3(), r, |x| {
        if s.iter().any(|&(i, j)| x[i] != x[j]) {
            return ExtRat::Infinite;
        }
        rhos.iter()
            .zip(x)
            .fold(ExtRat::zero(), |acc, (rho, &a)| &acc + rho.at(a as usize))
    })
}

/// Sums `s_a = Σ_{f(x) = a} ω(f)` for `a = 0, 1, 2`.
pub fn value_sums(omega: &Weighting, x: &[Label]) -> [Rat; 3] {
    let mut s = [Rat::zero(), Rat::zero(), Rat::zero()];
    for (f, w) in omega.terms() {
        s[f.eval(x) as usize] += w;
    }
    s
}

/// First `x` violating `t · s_2 ≤ s_0`, if any.
pub fn family_violation(omega: &Weighting, t: &Rat) -> Option<Vec<Label>> {
    d3().tuples(omega.arity()).find(|x| {
        let s = value_sums(omega, x);
        t * &s[2] > s[0]
    })
}

/// The weightings `ω_0`, `μ_v^(1)`, `μ_u^(2)` with the operations they use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaFamily {
    pub c0: Operation,
    pub f: Operation,
    pub g: Operation,
    pub h: Operation,
    pub omega0: Weighting,
    pub mu1: Weighting,
    pub mu2: Weighting,
}

impl OmegaFamily {
    pub fn members(&self) -> [&Weighting; 3] {
        [&self.omega0, &self.mu1, &self.mu2]
    }

    /// `−e_1 + g`, which fails the family inequality at `x = (1)`.
    pub fn outsider(&self) -> Weighting {
        let e1 = Operation::projection(d3(), 1, 1).expect("valid projection");
        Weighting::new(d3(), 1, [(e1, int(-1)), (self.g.clone(), int(1))]).expect("balanced")
    }
}

pub fn omega_family(bracket: &BracketedParam) -> Result<OmegaFamily> {
    let (u, v) = (&bracket.lower, &bracket.upper);
    let d = d3();
    let c0 = Operation::constant(d, 1, 0)?;
    let f = Operation::new(d, 1, vec![0, 0, 2])?;
    let g = Operation::new(d, 1, vec![0, 2, 2])?;
    let h = Operation::from_fn(d, 2, |a| match (a[0], a[1]) {
        (0, 2) => 1,
        (2, 2) => 2,
        _ => 0,
    })?;
    let e1 = Operation::projection(d, 1, 1)?;
    let omega0 = Weighting::new(d, 1, [(e1.clone(), int(-1)), (c0.clone(), int(1))])?;
    let mu1 = Weighting::new(
        d,
        1,
        [
            (e1, -(Rat::one() + v)),
            (f.clone(), v.clone()),
            (g.clone(), Rat::one()),
        ],
    )?;
    let mu2 = Weighting::new(
        d,
        2,
        [
            (Operation::projection(d, 2, 1)?, -u.clone()),
            (Operation::projection(d, 2, 2)?, -Rat::one()),
            (h.clone(), Rat::one() + u),
        ],
    )?;
    let family = OmegaFamily {
        c0,
        f,
        g,
        h,
        omega0,
        mu1,
        mu2,
    };
    for w in family.members() {
        for t in bracket.endpoints() {
            if let Some(x) = family_violation(w, t) {
                return Err(Error::Verification(format!(
                    "family inequality fails at t={t}, x={x:?}"
                )));
            }
        }
    }
    Ok(family)
}

/// LP certificates that `s_0 − u s_2 ≥ 1` and `v s_2 − s_0 ≥ 1` are infeasible at `x`.
///
/// Variables are the `k`-ary operations in enumeration order. Rows are
/// `Σ ω = 0`, then `Σ ω(f) μ_u^-(f(y)) ≤ 0` for `y ∈ D^k` in index order, then
/// the same for `μ_v^+`, then the bound row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointCertificates {
    pub x: Vec<Label>,
    #[serde(with = "serde_rat_vec")]
    pub lower: Vec<Rat>,
    #[serde(with = "serde_rat_vec")]
    pub upper: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NarrowingReport {
    #[serde(with = "serde_rat")]
    pub u: Rat,
    #[serde(with = "serde_rat")]
    pub v: Rat,
    pub k: usize,
    pub operations: usize,
    pub certificates: Vec<PointCertificates>,
    /// Normalised extreme weightings of the feasible cone.
    pub extremes: Vec<Weighting>,
    /// Whether every extreme weighting improves `(0, 1, 1)`.
    pub rho_improved: bool,
}

/// Proper `k`-ary weightings over all operations improving `μ_u^-` and `μ_v^+`.
fn narrowing_lp(u: &Rat, v: &Rat, k: usize, caps: &Caps) -> Result<(Vec<Operation>, LpProblem)> {
    let d = d3();
    let ops: Vec<Operation> = enumerate_ops(d, k, caps)?.collect();
    let kinds = ops
        .iter()
        .map(|f| {
            if f.is_projection() {
                VarKind::Free
            } else {
                VarKind::NonNegative
            }
        })
        .collect();
    let mut lp = LpProblem::new(kinds);
    lp.constrain(vec![Rat::one(); ops.len()], Sense::Eq, Rat::zero());
    for mu in [mu_minus(u), mu_plus(v)] {
        for x in d.tuples(k) {
            let row = ops
                .iter()
                .map(|f| {
                    mu.at(f.eval(&x) as usize)
                        .finite()
                        .expect("finite unary")
                        .clone()
                })
                .collect();
            lp.constrain(row, Sense::Le, Rat::zero());
        }
    }
    Ok((ops, lp))
}

/// Coefficients of `a·s_0 + b·s_2` at `x` over `ops`.
fn sums_row(ops: &[Operation], x: &[Label], a: &Rat, b: &Rat) -> Vec<Rat> {
    ops.iter()
        .map(|f| match f.eval(x) {
            0 => a.clone(),
            2 => b.clone(),
            _ => Rat::zero(),
        })
        .collect()
}

fn infeasibility(lp: &LpProblem) -> Result<Vec<Rat>> {
    match solve(lp)? {
        LpOutcome::Infeasible { farkas } if verify_farkas(lp, &farkas) => Ok(farkas),
        LpOutcome::Infeasible { .. } => {
            Err(Error::Verification("invalid Farkas certificate".into()))
        }
        _ => Err(Error::Verification("expected an infeasible system".into())),
    }
}

pub fn narrowing_check(u: &Rat, v: &Rat, k: usize, caps: &Caps) -> Result<NarrowingReport> {
    if !u.is_positive() || u > v {
        return Err(Error::invalid(format!(
            "narrowing needs 0 < u ≤ v, got u={u}, v={v}"
        )));
    }
    let d = d3();
    let (ops, base) = narrowing_lp(u, v, k, caps)?;
    let mut certificates = Vec::new();
    for x in d.tuples(k) {
        let mut lower = base.clone();
        lower.constrain(
            sums_row(&ops, &x, &Rat::one(), &-u.clone()),
            Sense::Ge,
            Rat::one(),
        );
        let mut upper = base.clone();
        upper.constrain(sums_row(&ops, &x, &-Rat::one(), v), Sense::Ge, Rat::one());
        certificates.push(PointCertificates {
            x,
            lower: infeasibility(&lower)?,
            upper: infeasibility(&upper)?,
        });
    }

    // Extreme weightings: maximise each non-projection weight under Σ_{non-proj} ω ≤ 1.
    let rho = WeightedRelation::from_ints(d, 1, &[Some(0), Some(1), Some(1)])?;
    let mut extremes: Vec<Weighting> = Vec::new();
    let mut bounded = base.clone();
    bounded.constrain(
        ops.iter()
            .map(|f| {
                if f.is_projection() {
                    Rat::zero()
                } else {
                    Rat::one()
                }
            })
            .collect(),
        Sense::Le,
        Rat::one(),
    );
    for (i, f) in ops.iter().enumerate() {
        if f.is_projection() {
            continue;
        }
        let mut obj = vec![Rat::zero(); ops.len()];
        obj[i] = Rat::one();
        let lp = bounded.clone().with_objective(Direction::Maximize, obj);
        if let LpOutcome::Optimal { point, .. } = solve(&lp)? {
            let w = Weighting::new(
                d,
                k,
                ops.iter()
                    .zip(point)
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(f, w)| (f.clone(), w)),
            )?;
            if !extremes.contains(&w) {
                extremes.push(w);
            }
        }
    }
    let mut rho_improved = true;
    for w in &extremes {
        rho_improved &= is_weighted_polymorphism(w, &rho)?;
    }
    Ok(NarrowingReport {
        u: u.clone(),
        v: v.clone(),
        k,
        operations: ops.len(),
        certificates,
        extremes,
        rho_improved,
    })
}

/// Certificates that every weighting feasible for `tight` is feasible for
/// `loose`: for each improvement row of the loose system, `⟨ω, row⟩ ≥ 1` is
/// infeasible over the tight cone. Certificates follow the loose rows in the
/// order of [`PointCertificates`], with the loose row appended last.
pub fn bracket_containment(
    tight: &BracketedParam,
    loose: &BracketedParam,
    k: usize,
    caps: &Caps,
) -> Result<Vec<Vec<Rat>>> {
    if !loose.contains(tight) {
        return Err(Error::invalid(
            "the tight bracket must lie inside the loose one",
        ));
    }
    let (_, tight_lp) = narrowing_lp(&tight.lower, &tight.upper, k, caps)?;
    let (_, loose_lp) = narrowing_lp(&loose.lower, &loose.upper, k, caps)?;
    loose_lp
        .constraints
        .iter()
        .filter(|c| c.sense == Sense::Le)
        .map(|c| {
            let mut lp = tight_lp.clone();
            lp.constrain(c.coeffs.clone(), Sense::Ge, Rat::one());
            infeasibility(&lp)
        })
        .collect()
}
