//! Membership in weighted relational clones and in weighted clones, with
//! constructive witnesses on both sides.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    clone_closure, index_tuple, Caps, Label, Operation, OperationSet, TupleMatrix,
};
use crate::error::{Error, Result};
use crate::improve::{
    distinct_vectors, for_each_feasible_matrix, image_index, is_weighted_polymorphism, pol,
    rows_over, weighting_from_vector, ImprovementRow, RatVector,
};
use crate::lp::{cone_membership, solve, ConeDecision, ConeProblem, LpOutcome, LpProblem, Sense};
use crate::rational::{serde_rat, ExtRat, Rat};
use crate::wops::{proper_sum, SumTerm, Weighting};
use crate::wrel::{Language, WeightedRelation};

/// Name under which recipes refer to the empty unary relation `φ_∅`.
pub const EMPTY_RELATION: &str = "@empty";

/// `coefficient · relation(scope)`; a zero coefficient keeps only feasibility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeTerm {
    #[serde(with = "serde_rat")]
    pub coefficient: Rat,
    pub relation: String,
    pub scope: Vec<usize>,
}

/// The relation `x ↦ min { Σ c_i γ_i(y_{s_i}) + shift : y_output = x }`.
///
/// The shift is added to finite values only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetRecipe {
    pub num_vars: usize,
    pub terms: Vec<RecipeTerm>,
    #[serde(with = "serde_rat")]
    pub shift: Rat,
    pub output: Vec<usize>,
}

impl GadgetRecipe {
    pub fn evaluate(&self, language: &Language, caps: &Caps) -> Result<WeightedRelation> {
        let d = language.domain();
        let empty = WeightedRelation::empty(d);
        let mut tables = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let rel = if t.relation == EMPTY_RELATION {
                &empty
            } else {
                language.get(&t.relation).ok_or_else(|| {
                    Error::invalid(format!("recipe uses unknown relation {:?}", t.relation))
                })?
            };
            if rel.arity() != t.scope.len() {
                return Err(Error::shape(format!(
                    "scope of {:?} has the wrong length",
                    t.relation
                )));
            }
            if let Some(&bad) = t
                .scope
                .iter()
                .chain(&self.output)
                .find(|&&v| v >= self.num_vars)
            {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    count: self.num_vars,
                });
            }
            tables.push((rel.scale(&t.coefficient)?, &t.scope));
        }
        caps.check_assignments(d, self.num_vars)?;
        let size = d
            .count(self.output.len())
            .ok_or_else(|| Error::shape("recipe output arity too large"))?;
        let mut out = vec![ExtRat::Infinite; size];
        let dd = d.get();
        for y in d.tuples(self.num_vars) {
            let mut total = ExtRat::zero();
            for (rel, scope) in &tables {
                let idx = scope.iter().fold(0, |acc, &v| acc * dd + y[v] as usize);
                total = &total + rel.at(idx);
                if total.is_infinite() {
                    break;
                }
            }
            let total = total.shift(&self.shift);
            let idx = self
                .output
                .iter()
                .fold(0, |acc, &v| acc * dd + y[v] as usize);
            if total < out[idx] {
                out[idx] = total;
            }
        }
        WeightedRelation::new(d, self.output.len(), out)
    }
}

/// `ρ = value + Opt(support)` where both relations are gadget projections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpWitness {
    pub value: GadgetRecipe,
    pub support: GadgetRecipe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum MembershipVerdict {
    Member {
        witness: ImpWitness,
    },
    /// A weighted polymorphism of the language that does not improve `ρ`.
    Separated {
        weighting: Weighting,
    },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member { .. })
    }
}

/// Reconstructs `ρ' + Opt(ρ₀')` from a member witness.
pub fn express_from_certificate(
    witness: &ImpWitness,
    language: &Language,
    caps: &Caps,
) -> Result<WeightedRelation> {
    let value = witness.value.evaluate(language, caps)?;
    let support = witness.support.evaluate(language, caps)?.opt();
    if value.arity() != support.arity() {
        return Err(Error::shape("witness recipes disagree on arity"));
    }
    Ok(value.pointwise_add(&support))
}

/// Fixed data for deciding `ρ ∈ wRelClone(Γ)` with `k = |Feas(ρ)|`.
///
/// `Z` lists all `k`-tuples as rows in index order, so `f(Z)` is `f`'s table
/// and its index among `m`-tuples is the operation's enumeration index.
#[derive(Clone, Debug)]
pub struct GaloisWorkspace {
    language: Language,
    k: usize,
    m: usize,
    basis: Vec<Operation>,
    in_f: Vec<bool>,
    r: TupleMatrix,
    r_rows: Vec<usize>,
    rho_images: Vec<ExtRat>,
    rows: Vec<ImprovementRow>,
    repair: Vec<RecipeTerm>,
}

fn table_index(d: usize, table: &[Label]) -> usize {
    table.iter().fold(0, |acc, &l| acc * d + l as usize)
}

impl GaloisWorkspace {
    pub fn new(language: &Language, rho: &WeightedRelation, caps: &Caps) -> Result<Self> {
        let d = language.domain();
        if rho.domain() != d {
            return Err(Error::shape("ρ and the language must share a domain"));
        }
        let k = rho.feasible_count();
        if k == 0 {
            return Err(Error::invalid("Feas(ρ) is empty"));
        }
        let m = d.count(k).unwrap_or(usize::MAX);
        let basis = pol(language, k, caps)
            .map_err(|e| match e {
                Error::CapExceeded {
                    what,
                    required,
                    cap,
                } => Error::CapExceeded {
                    what: format!("{what} (k = |Feas(ρ)| = {k}, m = d^k = {m})"),
                    required,
                    cap,
                },
                other => other,
            })?
            .arity_vec(k);
        let total = caps.check_ops(d, k)?;
        let mut in_f = vec![false; total];
        for f in &basis {
            in_f[table_index(d.get(), f.table())] = true;
        }
        let r = TupleMatrix::new(d, rho.feasible_tuples())?;
        let r_rows = r.row_indices(d);
        let rho_images = basis
            .iter()
            .map(|f| rho.at(image_index(f, &r_rows)).clone())
            .collect();
        let rows = rows_over(language, &basis, k, caps)?;
        let mut ws = GaloisWorkspace {
            language: language.clone(),
            k,
            m,
            basis,
            in_f,
            r,
            r_rows,
            rho_images,
            rows,
            repair: Vec::new(),
        };
        ws.repair = ws.repair_terms(caps)?;
        Ok(ws)
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn basis(&self) -> &[Operation] {
        &self.basis
    }

    pub fn rows(&self) -> &[ImprovementRow] {
        &self.rows
    }

    /// Columns of `R`: `Feas(ρ)` in index order.
    pub fn r(&self) -> &TupleMatrix {
        &self.r
    }

    /// All `k`-tuples as the rows of a `k`-column matrix.
    pub fn z(&self) -> TupleMatrix {
        let d = self.language.domain();
        let rows: Vec<Vec<Label>> = d.tuples(self.k).collect();
        TupleMatrix::from_rows(d, self.k, &rows).expect("tuples share arity k")
    }

    /// `F = {f(Z) : f ∈ Pol^(k)(Γ)}` as a membership mask over `D^m`.
    pub fn feasible_images(&self) -> &[bool] {
        &self.in_f
    }

    pub fn in_q(&self, i: usize) -> bool {
        self.rho_images[i].is_infinite()
    }

    /// Zero-weight constraints whose joint feasibility set is exactly `F`.
    pub fn repair(&self) -> &[RecipeTerm] {
        &self.repair
    }

    fn repair_terms(&self, caps: &Caps) -> Result<Vec<RecipeTerm>> {
        let d = self.language.domain();
        let dd = d.get();
        let mut excluded = vec![false; self.in_f.len()];
        let mut out = Vec::new();
        for y in 0..self.in_f.len() {
            if self.in_f[y] || excluded[y] {
                continue;
            }
            let g = Operation::new(d, self.k, index_tuple(y, self.m, d)?)?;
            let mut witness = None;
            for (name, gamma) in self.language.iter() {
                for_each_feasible_matrix(gamma, self.k, caps, |_, rows| {
                    if gamma.at(image_index(&g, rows)).is_infinite() {
                        witness = Some((name.clone(), rows.to_vec()));
                        return Ok(false);
                    }
                    Ok(true)
                })?;
                if witness.is_some() {
                    break;
                }
            }
            let (name, scope) = witness
                .ok_or_else(|| Error::Verification("non-polymorphism without a witness".into()))?;
            let gamma = self.language.get(&name).expect("named from the language");
            for (z, ex) in excluded.iter_mut().enumerate().skip(y) {
                if self.in_f[z] || *ex {
                    continue;
                }
                let t = index_tuple(z, self.m, d)?;
                if gamma
                    .at(scope.iter().fold(0, |acc, &v| acc * dd + t[v] as usize))
                    .is_infinite()
                {
                    *ex = true;
                }
            }
            out.push(RecipeTerm {
                coefficient: Rat::zero(),
                relation: name,
                scope,
            });
        }
        Ok(out)
    }

    /// `μ_{γ,X}`: `f(Z) ↦ γ(f(X))` on `F`, infinite elsewhere.
    pub fn construct_mu(&self, gamma_name: &str, x: &TupleMatrix) -> Result<WeightedRelation> {
        let d = self.language.domain();
        let gamma = self
            .language
            .get(gamma_name)
            .ok_or_else(|| Error::invalid(format!("unknown relation {gamma_name:?}")))?;
        if x.width() != self.k || x.height() != gamma.arity() {
            return Err(Error::shape(format!(
                "X must have {} columns of arity {}",
                self.k,
                gamma.arity()
            )));
        }
        for c in x.columns() {
            if !gamma.value(c)?.is_finite() {
                return Err(Error::invalid(format!(
                    "column {c:?} of X is infeasible for {gamma_name}"
                )));
            }
        }
        let scope = x.row_indices(d);
        let table = (0..self.in_f.len())
            .map(|y| {
                if !self.in_f[y] {
                    return Ok(ExtRat::Infinite);
                }
                let t = index_tuple(y, self.m, d)?;
                Ok(gamma
                    .at(scope
                        .iter()
                        .fold(0, |acc, &v| acc * d.get() + t[v] as usize))
                    .clone())
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedRelation::new(d, self.m, table)
    }

    /// `(μ_ι, μ_{−ι})`: constant `1` and `−1` on `F`.
    pub fn construct_iota(&self) -> (WeightedRelation, WeightedRelation) {
        let d = self.language.domain();
        let make = |v: i64| {
            let table = self
                .in_f
                .iter()
                .map(|&f| {
                    if f {
                        ExtRat::from_int(v)
                    } else {
                        ExtRat::Infinite
                    }
                })
                .collect();
            WeightedRelation::new(d, self.m, table).expect("table has d^m entries")
        };
        (make(1), make(-1))
    }

    fn recipe(&self, lambda: &[Rat], generators: &[usize]) -> GadgetRecipe {
        let n = generators.len();
        let mut terms: Vec<RecipeTerm> = generators
            .iter()
            .zip(lambda)
            .filter(|(_, l)| l.is_positive())
            .map(|(&row, l)| {
                let r = &self.rows[row];
                RecipeTerm {
                    coefficient: l.clone(),
                    relation: r.relation.clone(),
                    scope: r.x.row_indices(self.language.domain()),
                }
            })
            .collect();
        terms.extend(self.repair.iter().cloned());
        GadgetRecipe {
            num_vars: self.m,
            terms,
            shift: &lambda[n] - &lambda[n + 1],
            output: self.r_rows.clone(),
        }
    }
}

/// Member LP over `V = {γ[X]} ∪ {ι, −ι}`: equality on projections, `≥` on the
/// remaining operations with a finite right-hand side, nothing on the others.
fn member_lp(generators: &[&RatVector], basis: &[Operation], rhs: &[Option<Rat>]) -> LpProblem {
    let mut lp = LpProblem::nonnegative(generators.len() + 2);
    for (i, f) in basis.iter().enumerate() {
        let Some(b) = &rhs[i] else {
            continue;
        };
        let mut coeffs: Vec<Rat> = generators.iter().map(|g| g[i].clone()).collect();
        coeffs.push(Rat::one());
        coeffs.push(-Rat::one());
        let sense = if f.is_projection() {
            Sense::Eq
        } else {
            Sense::Ge
        };
        lp.constrain(coeffs, sense, b.clone());
    }
    lp
}

/// Decides `ρ ∈ wRelClone(Γ)`.
pub fn imp_membership(
    language: &Language,
    rho: &WeightedRelation,
    caps: &Caps,
) -> Result<MembershipVerdict> {
    if rho.domain() != language.domain() {
        return Err(Error::shape("ρ and the language must share a domain"));
    }
    if rho.feasible_count() == 0 {
        let recipe = GadgetRecipe {
            num_vars: rho.arity(),
            terms: vec![RecipeTerm {
                coefficient: Rat::one(),
                relation: EMPTY_RELATION.into(),
                scope: vec![0],
            }],
            shift: Rat::zero(),
            output: (0..rho.arity()).collect(),
        };
        let witness = ImpWitness {
            value: recipe.clone(),
            support: recipe,
        };
        return check_member(witness, language, rho, caps);
    }
    let ws = GaloisWorkspace::new(language, rho, caps)?;
    let d = language.domain();

    // One generator per distinct vector γ[X], remembered by its first row.
    let mut first_row: HashMap<&RatVector, usize> = HashMap::new();
    for (i, r) in ws.rows.iter().enumerate() {
        first_row.entry(&r.vector).or_insert(i);
    }
    let vectors = distinct_vectors(&ws.rows);
    let generators: Vec<usize> = vectors.iter().map(|v| first_row[*v]).collect();

    let separated = |farkas: Vec<Rat>, rhs: &[Option<Rat>]| -> Result<MembershipVerdict> {
        let mut omega = vec![Rat::zero(); ws.basis.len()];
        let mut used = farkas.into_iter();
        for (i, b) in rhs.iter().enumerate() {
            if b.is_some() {
                omega[i] = -used.next().expect("one multiplier per constraint");
            }
        }
        let weighting = weighting_from_vector(d, ws.k, &ws.basis, &omega)?;
        check_separated(weighting, language, rho)
    };

    let rhs0: Vec<Option<Rat>> = (0..ws.basis.len())
        .map(|i| {
            Some(if ws.basis[i].is_projection() {
                Rat::zero()
            } else if ws.in_q(i) {
                Rat::one()
            } else {
                Rat::zero()
            })
        })
        .collect();
    let lambda0 = match solve(&member_lp(&vectors, &ws.basis, &rhs0))? {
        LpOutcome::Optimal { point, .. } => point,
        LpOutcome::Infeasible { farkas } => return separated(farkas, &rhs0),
        LpOutcome::Unbounded { .. } => unreachable!("no objective"),
    };
    let rhs: Vec<Option<Rat>> = ws.rho_images.iter().map(|v| v.finite().cloned()).collect();
    let lambda = match solve(&member_lp(&vectors, &ws.basis, &rhs))? {
        LpOutcome::Optimal { point, .. } => point,
        LpOutcome::Infeasible { farkas } => return separated(farkas, &rhs),
        LpOutcome::Unbounded { .. } => unreachable!("no objective"),
    };
    let witness = ImpWitness {
        value: ws.recipe(&lambda, &generators),
        support: ws.recipe(&lambda0, &generators),
    };
    check_member(witness, language, rho, caps)
}

fn check_member(
    witness: ImpWitness,
    language: &Language,
    rho: &WeightedRelation,
    caps: &Caps,
) -> Result<MembershipVerdict> {
    if express_from_certificate(&witness, language, caps)? != *rho {
        return Err(Error::Verification(
            "member witness does not reproduce ρ".into(),
        ));
    }
    Ok(MembershipVerdict::Member { witness })
}

fn check_separated(
    weighting: Weighting,
    language: &Language,
    rho: &WeightedRelation,
) -> Result<MembershipVerdict> {
    for gamma in language.relations() {
        if !is_weighted_polymorphism(&weighting, gamma)? {
            return Err(Error::Verification(
                "separating weighting fails on the language".into(),
            ));
        }
    }
    if is_weighted_polymorphism(&weighting, rho)? {
        return Err(Error::Verification(
            "separating weighting improves ρ".into(),
        ));
    }
    Ok(MembershipVerdict::Separated { weighting })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum WcloneVerdict {
    /// `μ = Σ c_i ω_i[g_i]`.
    Member {
        terms: Vec<SumTerm>,
        generators: usize,
    },
    /// An `m`-ary relation improved by every weighting of `Ω` but not by `μ`.
    Separated {
        relation: WeightedRelation,
        generators: usize,
    },
}

impl WcloneVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, WcloneVerdict::Member { .. })
    }
}

/// Decides `μ ∈ wClone(Ω)` over the clone generated by `supp(Ω)` computed up to
/// arity `max(k, arities of Ω, clone_arity_cap)`.
pub fn wclone_membership(
    omegas: &[Weighting],
    mu: &Weighting,
    clone_arity_cap: usize,
    caps: &Caps,
) -> Result<WcloneVerdict> {
    let d = mu.domain();
    let k = mu.arity();
    mu.require_proper()?;
    let mut gens = OperationSet::new(d);
    let mut max_arity = k.max(clone_arity_cap);
    for w in omegas {
        if w.domain() != d {
            return Err(Error::shape("all weightings must share a domain"));
        }
        max_arity = max_arity.max(w.arity());
        for f in w.support()?.iter() {
            gens.insert(f.clone())?;
        }
    }
    let clone = clone_closure(&gens, max_arity, caps)?;
    let basis = clone.arity_vec(k);
    let position: HashMap<&[Label], usize> = basis
        .iter()
        .enumerate()
        .map(|(i, f)| (f.table(), i))
        .collect();
    let m = d.count(k).expect("k-ary operations were enumerated");
    let in_f = |basis: &[Operation]| -> Result<Vec<bool>> {
        let mut mask = vec![false; caps.check_ops(d, k)?];
        for f in basis {
            mask[table_index(d.get(), f.table())] = true;
        }
        Ok(mask)
    };
    let relation_from = |values: &[Rat]| -> Result<WeightedRelation> {
        let mask = in_f(&basis)?;
        let mut table = vec![ExtRat::Infinite; mask.len()];
        for (f, v) in basis.iter().zip(values) {
            table[table_index(d.get(), f.table())] = ExtRat::Finite(v.clone());
        }
        WeightedRelation::new(d, m, table)
    };

    if mu.terms().keys().any(|f| !position.contains_key(f.table())) {
        let relation = relation_from(&vec![Rat::zero(); basis.len()])?;
        return check_wclone_separated(relation, omegas, mu, 0);
    }

    // Generators ω[g_1..g_l] for every ω and every tuple of k-ary clone members.
    let mut vectors: Vec<RatVector> = Vec::new();
    let mut origin: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<RatVector, ()> = HashMap::new();
    for (wi, w) in omegas.iter().enumerate() {
        let l = w.arity();
        let count = (basis.len() as u128).checked_pow(l as u32);
        if !matches!(count, Some(c) if c <= caps.assignment_cap as u128) {
            return Err(Error::CapExceeded {
                what: format!(
                    "superpositions of a {l}-ary weighting by {} clone members",
                    basis.len()
                ),
                required: format!("{}^{l} generators", basis.len()),
                cap: caps.assignment_cap,
            });
        }
        let terms: Vec<(&Operation, &Rat)> = w.terms().iter().collect();
        let mut choice = vec![0usize; l];
        loop {
            let tables: Vec<&[Label]> = choice.iter().map(|&c| basis[c].table()).collect();
            let mut v = vec![Rat::zero(); basis.len()];
            for (f, weight) in &terms {
                let h = f.superpose_tables(k, &tables);
                v[position[h.table()]] += *weight;
            }
            if !seen.contains_key(&v) {
                seen.insert(v.clone(), ());
                vectors.push(v);
                origin.push((wi, choice.clone()));
            }
            let mut pos = l;
            let done = loop {
                if pos == 0 {
                    break true;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < basis.len() {
                    break false;
                }
                choice[pos] = 0;
            };
            if done {
                break;
            }
        }
    }
    let target: Vec<Rat> = basis.iter().map(|f| mu.weight(f)).collect();
    let problem = ConeProblem::new(basis.len(), vectors, target)?;
    let count = problem.generators.len();
    match cone_membership(&problem)? {
        ConeDecision::Member { lambda } => {
            let terms: Vec<SumTerm> = lambda
                .iter()
                .zip(&origin)
                .filter(|(l, _)| l.is_positive())
                .map(|(l, (wi, choice))| SumTerm {
                    coefficient: l.clone(),
                    weighting: omegas[*wi].clone(),
                    inner: choice.iter().map(|&c| basis[c].clone()).collect(),
                })
                .collect();
            let (sum, _) = proper_sum(d, k, &terms)?;
            if sum != *mu {
                return Err(Error::Verification(
                    "proper sum does not reproduce μ".into(),
                ));
            }
            Ok(WcloneVerdict::Member {
                terms,
                generators: count,
            })
        }
        ConeDecision::Separated { certificate } => {
            let relation = relation_from(&certificate)?;
            check_wclone_separated(relation, omegas, mu, count)
        }
    }
}

fn check_wclone_separated(
    relation: WeightedRelation,
    omegas: &[Weighting],
    mu: &Weighting,
    generators: usize,
) -> Result<WcloneVerdict> {
    for w in omegas {
        if !is_weighted_polymorphism(w, &relation)? {
            return Err(Error::Verification(
                "separating relation is not improved by Ω".into(),
            ));
        }
    }
    if is_weighted_polymorphism(mu, &relation)? {
        return Err(Error::Verification(
            "separating relation is improved by μ".into(),
        ));
    }
    Ok(WcloneVerdict::Separated {
        relation,
        generators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Caps, DomainSize};
    use crate::rational::int;

    fn d2() -> DomainSize {
        DomainSize::new(2).unwrap()
    }

    fn rel(arity: usize, values: &[Option<i64>]) -> WeightedRelation {
        WeightedRelation::from_ints(d2(), arity, values).unwrap()
    }

    fn eq_lang() -> Language {
        Language::from_relations(d2(), [("eq", WeightedRelation::equality(d2()))]).unwrap()
    }

    fn e(k: usize, i: usize) -> Operation {
        Operation::projection(d2(), k, i).unwrap()
    }

    #[test]
    fn generator_is_member() {
        let caps = Caps::default();
        let v = imp_membership(&eq_lang(), &WeightedRelation::equality(d2()), &caps).unwrap();
        let MembershipVerdict::Member { witness } = v else {
            panic!("expected member");
        };
        assert_eq!(
            express_from_certificate(&witness, &eq_lang(), &caps).unwrap(),
            WeightedRelation::equality(d2())
        );
    }

    #[test]
    fn unary_is_separated_by_constants() {
        let caps = Caps::default();
        let rho = rel(1, &[Some(0), Some(1)]);
        let MembershipVerdict::Separated { weighting } =
            imp_membership(&eq_lang(), &rho, &caps).unwrap()
        else {
            panic!("expected separation");
        };
        assert!(is_weighted_polymorphism(&weighting, &WeightedRelation::equality(d2())).unwrap());
        assert!(!is_weighted_polymorphism(&weighting, &rho).unwrap());
        assert!(weighting
            .terms()
            .keys()
            .any(|f| !f.is_projection() && f.table()[0] == f.table()[1]));
    }

    #[test]
    fn derived_relation_is_member() {
        let caps = Caps::default();
        let gamma = rel(2, &[Some(1), Some(3), None, Some(0)]);
        let lang = Language::from_relations(d2(), [("g", gamma.clone())]).unwrap();
        let rho = gamma
            .minimise(1)
            .unwrap()
            .scale(&int(2))
            .unwrap()
            .shift(&int(-1));
        let v = imp_membership(&lang, &rho, &caps).unwrap();
        let MembershipVerdict::Member { witness } = v else {
            panic!("expected member, got {v:?}");
        };
        assert_eq!(
            express_from_certificate(&witness, &lang, &caps).unwrap(),
            rho
        );
    }

    #[test]
    fn empty_feasibility_is_member() {
        let caps = Caps::default();
        let rho = WeightedRelation::constant(d2(), 2, ExtRat::Infinite).unwrap();
        let v = imp_membership(&eq_lang(), &rho, &caps).unwrap();
        let MembershipVerdict::Member { witness } = v else {
            panic!("expected member");
        };
        assert!(express_from_certificate(&witness, &eq_lang(), &caps)
            .unwrap()
            .table()
            .iter()
            .all(ExtRat::is_infinite));
    }

    #[test]
    fn workspace_objects() {
        let caps = Caps::default();
        let lang = eq_lang();
        let rho = rel(1, &[Some(0), Some(0)]);
        let ws = GaloisWorkspace::new(&lang, &rho, &caps).unwrap();
        assert_eq!((ws.arity(), ws.m(), ws.basis().len()), (2, 4, 16));
        assert!(ws.feasible_images().iter().all(|&f| f));
        let x = TupleMatrix::new(d2(), vec![vec![0, 0], vec![1, 1]]).unwrap();
        let mu = ws.construct_mu("eq", &x).unwrap();
        assert!(mu.table().iter().all(|v| *v == ExtRat::zero()));
        let (iota, minus) = ws.construct_iota();
        for (a, b) in iota.table().iter().zip(minus.table()) {
            assert_eq!(a + b, ExtRat::zero());
        }
        assert!(ws
            .construct_mu(
                "eq",
                &TupleMatrix::new(d2(), vec![vec![0, 1], vec![0, 0]]).unwrap()
            )
            .is_err());

        // Projection image: μ(e_i(Z)) = γ(x_i).
        let g = rel(2, &[Some(2), Some(5), None, Some(7)]);
        let lang = Language::from_relations(d2(), [("g", g.clone())]).unwrap();
        let ws = GaloisWorkspace::new(&lang, &rel(1, &[Some(0), Some(0)]), &caps).unwrap();
        let x = TupleMatrix::new(d2(), vec![vec![0, 1], vec![1, 1]]).unwrap();
        let mu = ws.construct_mu("g", &x).unwrap();
        let e1 = table_index(2, e(2, 1).table());
        let e2 = table_index(2, e(2, 2).table());
        assert_eq!(mu.at(e1), g.value(&[0, 1]).unwrap());
        assert_eq!(mu.at(e2), g.value(&[1, 1]).unwrap());
        let recipe = GadgetRecipe {
            num_vars: ws.m(),
            terms: std::iter::once(RecipeTerm {
                coefficient: Rat::one(),
                relation: "g".into(),
                scope: x.row_indices(d2()),
            })
            .chain(ws.repair().iter().cloned())
            .collect(),
            shift: Rat::zero(),
            output: (0..ws.m()).collect(),
        };
        assert_eq!(recipe.evaluate(&lang, &caps).unwrap(), mu);
    }

    fn submodular() -> Weighting {
        Weighting::new(
            d2(),
            2,
            [
                (e(2, 1), int(-1)),
                (e(2, 2), int(-1)),
                (Operation::new(d2(), 2, vec![0, 0, 0, 1]).unwrap(), int(1)),
                (Operation::new(d2(), 2, vec![0, 1, 1, 1]).unwrap(), int(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn wclone_examples() {
        let caps = Caps::default();
        let w = submodular();
        let v = wclone_membership(std::slice::from_ref(&w), &w, 2, &caps).unwrap();
        assert!(v.is_member());
        let v = wclone_membership(
            std::slice::from_ref(&w),
            &w.scale(&int(2)).unwrap(),
            2,
            &caps,
        )
        .unwrap();
        let WcloneVerdict::Member { terms, .. } = v else {
            panic!("expected member");
        };
        let (sum, _) = proper_sum(d2(), 2, &terms).unwrap();
        assert_eq!(sum, w.scale(&int(2)).unwrap());

        let neg = Operation::new(d2(), 1, vec![1, 0]).unwrap();
        let mu = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (neg, int(1))]).unwrap();
        let WcloneVerdict::Separated { relation, .. } =
            wclone_membership(std::slice::from_ref(&w), &mu, 2, &caps).unwrap()
        else {
            panic!("expected separation");
        };
        assert!(is_weighted_polymorphism(&w, &relation).unwrap());
        assert!(!is_weighted_polymorphism(&mu, &relation).unwrap());
    }

    #[test]
    fn verdict_json() {
        let caps = Caps::default();
        let rho = rel(1, &[Some(0), Some(1)]);
        let v = imp_membership(&eq_lang(), &rho, &caps).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.starts_with(r#"{"verdict":"separated","weighting":{"d":2,"k":2"#));
        assert_eq!(serde_json::from_str::<MembershipVerdict>(&text).unwrap(), v);
    }
}
