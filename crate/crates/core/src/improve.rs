//! Polymorphisms, weighted polymorphisms and the vectors `γ[X]`.

use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::algebra::{
    enumerate_ops, Caps, DomainSize, Label, Operation, OperationSet, TupleMatrix,
};
use crate::error::{Error, Result};
use crate::lp::{solve, Direction, LpOutcome, LpProblem, Sense, VarKind};
use crate::rational::{ExtRat, Rat};
use crate::wops::Weighting;
use crate::wrel::{Language, WeightedRelation};

/// Dense vector over an operation basis in canonical order.
pub type RatVector = Vec<Rat>;

/// `γ[X]`: the vector `f ↦ γ(f(X))` over a polymorphism basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImprovementRow {
    pub relation: String,
    pub x: TupleMatrix,
    pub vector: RatVector,
}

/// Visits every `X ∈ Feas(γ)^k`, columns in tuple-index order with the first
/// column most significant. The callback receives the columns as indices into
/// `γ`'s table and the lexicographic index of each row of `X`.
pub(crate) fn for_each_feasible_matrix(
    gamma: &WeightedRelation,
    k: usize,
    caps: &Caps,
    mut visit: impl FnMut(&[usize], &[usize]) -> Result<bool>,
) -> Result<()> {
    let d = gamma.domain();
    let m = gamma.arity();
    let feasible: Vec<usize> = (0..gamma.table().len())
        .filter(|&i| gamma.at(i).is_finite())
        .collect();
    if feasible.is_empty() {
        return Ok(());
    }
    let digits: Vec<Vec<Label>> = gamma.feasible_tuples();
    let count = (feasible.len() as u128).checked_pow(k as u32);
    if !matches!(count, Some(c) if c <= caps.assignment_cap as u128) {
        return Err(Error::CapExceeded {
            what: format!("enumerating X in Feas(γ)^{k}"),
            required: format!("{}^{k} matrices", feasible.len()),
            cap: caps.assignment_cap,
        });
    }
    let mut choice = vec![0usize; k];
    let mut columns = vec![feasible[0]; k];
    let mut rows = vec![0usize; m];
    loop {
        for (i, r) in rows.iter_mut().enumerate() {
            *r = choice
                .iter()
                .fold(0, |acc, &c| acc * d.get() + digits[c][i] as usize);
        }
        for (col, &c) in columns.iter_mut().zip(&choice) {
            *col = feasible[c];
        }
        if !visit(&columns, &rows)? {
            return Ok(());
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < feasible.len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Index in `γ`'s table of `f(X)` given the row indices of `X`.
#[inline]
pub(crate) fn image_index(f: &Operation, rows: &[usize]) -> usize {
    let d = f.domain().get();
    rows.iter()
        .fold(0, |acc, &r| acc * d + f.table()[r] as usize)
}

fn matrix(gamma: &WeightedRelation, columns: &[usize]) -> TupleMatrix {
    let d = gamma.domain();
    let cols = columns
        .iter()
        .map(|&c| crate::algebra::index_tuple(c, gamma.arity(), d).expect("index within table"))
        .collect();
    TupleMatrix::new(d, cols).expect("columns share the relation's arity")
}

fn check_domain(d: DomainSize, gamma: &WeightedRelation) -> Result<()> {
    if gamma.domain() != d {
        return Err(Error::shape(format!(
            "domain {} does not match relation domain {}",
            d.get(),
            gamma.domain().get()
        )));
    }
    Ok(())
}

pub fn is_polymorphism(f: &Operation, gamma: &WeightedRelation) -> Result<bool> {
    check_domain(f.domain(), gamma)?;
    let mut preserved = true;
    for_each_feasible_matrix(
        gamma,
        f.arity(),
        &Caps {
            assignment_cap: u64::MAX,
            ..Caps::default()
        },
        |_, rows| {
            preserved = gamma.at(image_index(f, rows)).is_finite();
            Ok(preserved)
        },
    )?;
    Ok(preserved)
}

/// `Pol^(k)(Γ)` in canonical order.
pub fn pol(language: &Language, k: usize, caps: &Caps) -> Result<OperationSet> {
    let d = language.domain();
    let mut out = OperationSet::new(d);
    for f in enumerate_ops(d, k, caps)? {
        let mut keep = true;
        for gamma in language.relations() {
            if !is_polymorphism(&f, gamma)? {
                keep = false;
                break;
            }
        }
        if keep {
            out.insert(f)?;
        }
    }
    Ok(out)
}

/// `Σ_{f ∈ supp(ω)} ω(f) γ(f(X))`, requiring every term to be finite.
pub fn improvement_value(
    omega: &Weighting,
    gamma: &WeightedRelation,
    x: &TupleMatrix,
) -> Result<Rat> {
    check_domain(omega.domain(), gamma)?;
    if x.width() != omega.arity() || x.height() != gamma.arity() {
        return Err(Error::shape(format!(
            "X must have {} columns of arity {}",
            omega.arity(),
            gamma.arity()
        )));
    }
    for c in x.columns() {
        if !gamma.value(c)?.is_finite() {
            return Err(Error::invalid(format!(
                "column {c:?} of X is infeasible for γ"
            )));
        }
    }
    let rows = x.row_indices(gamma.domain());
    let mut total = Rat::zero();
    for f in omega.support()?.arity(omega.arity()) {
        let value = gamma.at(image_index(f, &rows));
        let ExtRat::Finite(v) = value else {
            return Err(Error::invalid(format!(
                "{f:?} in supp(ω) maps X outside Feas(γ)"
            )));
        };
        let w = omega.weight(f);
        if !w.is_zero() {
            total += w * v;
        }
    }
    Ok(total)
}

pub fn is_weighted_polymorphism(omega: &Weighting, gamma: &WeightedRelation) -> Result<bool> {
    check_domain(omega.domain(), gamma)?;
    let support = omega.support()?;
    for f in support.iter() {
        if !is_polymorphism(f, gamma)? {
            return Ok(false);
        }
    }
    let terms: Vec<(&Operation, &Rat)> = omega.terms().iter().collect();
    let mut improves = true;
    let caps = Caps {
        assignment_cap: u64::MAX,
        ..Caps::default()
    };
    for_each_feasible_matrix(gamma, omega.arity(), &caps, |_, rows| {
        let mut total = Rat::zero();
        for (f, w) in &terms {
            if let ExtRat::Finite(v) = gamma.at(image_index(f, rows)) {
                total += *w * v;
            }
        }
        improves = !total.is_positive();
        Ok(improves)
    })?;
    Ok(improves)
}

/// `Pol^(k)(Γ)` together with one row `γ[X]` per `γ ∈ Γ` (by name) and
/// `X ∈ Feas(γ)^k`.
pub fn improvement_rows(
    language: &Language,
    k: usize,
    caps: &Caps,
) -> Result<(Vec<Operation>, Vec<ImprovementRow>)> {
    let basis = pol(language, k, caps)?.arity_vec(k);
    let rows = rows_over(language, &basis, k, caps)?;
    Ok((basis, rows))
}

pub(crate) fn rows_over(
    language: &Language,
    basis: &[Operation],
    k: usize,
    caps: &Caps,
) -> Result<Vec<ImprovementRow>> {
    let mut out = Vec::new();
    for (name, gamma) in language.iter() {
        for_each_feasible_matrix(gamma, k, caps, |columns, rows| {
            let vector = basis
                .iter()
                .map(|f| match gamma.at(image_index(f, rows)) {
                    ExtRat::Finite(v) => Ok(v.clone()),
                    ExtRat::Infinite => Err(Error::invalid(format!(
                        "{f:?} is not a polymorphism of {name}"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(ImprovementRow {
                relation: name.clone(),
                x: matrix(gamma, columns),
                vector,
            });
            Ok(true)
        })?;
    }
    Ok(out)
}

/// Distinct row vectors, first occurrence order.
pub(crate) fn distinct_vectors(rows: &[ImprovementRow]) -> Vec<&RatVector> {
    let mut seen = HashSet::new();
    rows.iter()
        .map(|r| &r.vector)
        .filter(|v| seen.insert(*v))
        .collect()
}

pub(crate) fn weighting_from_vector(
    d: DomainSize,
    k: usize,
    basis: &[Operation],
    vector: &[Rat],
) -> Result<Weighting> {
    Weighting::new(
        d,
        k,
        basis
            .iter()
            .zip(vector)
            .filter(|(_, w)| !w.is_zero())
            .map(|(f, w)| (f.clone(), w.clone())),
    )
}

/// LP variables `ω(f)` for `f` in `basis`: free on projections, non-negative
/// elsewhere, `Σ ω = 0` and `⟨ω, row⟩ ≤ 0` for every distinct row.
pub(crate) fn weighted_polymorphism_lp(basis: &[Operation], rows: &[&RatVector]) -> LpProblem {
    let kinds = basis
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
    lp.constrain(
        vec![Rat::from_integer(1.into()); basis.len()],
        Sense::Eq,
        Rat::zero(),
    );
    for row in rows {
        lp.constrain((*row).clone(), Sense::Le, Rat::zero());
    }
    lp
}

/// A `k`-ary weighted polymorphism of `Γ`, optionally with `ω(f₀) ≥ 1`;
/// `None` when the LP proves that no such weighting exists.
pub fn find_weighted_polymorphism(
    language: &Language,
    k: usize,
    require_positive: Option<&Operation>,
    caps: &Caps,
) -> Result<Option<Weighting>> {
    let d = language.domain();
    let (basis, rows) = improvement_rows(language, k, caps)?;
    let mut lp = weighted_polymorphism_lp(&basis, &distinct_vectors(&rows));
    if let Some(f0) = require_positive {
        let pos = basis.iter().position(|f| f == f0).ok_or_else(|| {
            Error::invalid(format!(
                "{f0:?} is not a {k}-ary polymorphism of the language"
            ))
        })?;
        let mut coeffs = vec![Rat::zero(); basis.len()];
        coeffs[pos] = Rat::from_integer(1.into());
        lp.constrain(coeffs, Sense::Ge, Rat::from_integer(1.into()));
    }
    let lp = lp.with_objective(Direction::Minimize, vec![Rat::zero(); basis.len()]);
    match solve(&lp)? {
        LpOutcome::Optimal { point, .. } => {
            let omega = weighting_from_vector(d, k, &basis, &point)?;
            for gamma in language.relations() {
                if !is_weighted_polymorphism(&omega, gamma)? {
                    return Err(Error::Verification(
                        "LP weighting is not a weighted polymorphism".into(),
                    ));
                }
            }
            Ok(Some(omega))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded { .. } => unreachable!("zero objective"),
    }
}
