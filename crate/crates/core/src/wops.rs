//! Weightings, their superpositions, and sums of possibly improper
//! superpositions that turn out proper.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{DomainSize, Label, Operation, OperationSet};
use crate::error::{Error, Result};
use crate::rational::{format_rat, serde_rat, Rat};

/// A `k`-ary weighting: finitely many operations with nonzero rational weights
/// summing to zero. Operations not listed carry weight zero.
///
/// A weighting is *proper* when only projections carry negative weight;
/// improper weightings arise as intermediate superpositions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weighting {
    domain: DomainSize,
    arity: usize,
    terms: BTreeMap<Operation, Rat>,
}

/// Outcome of validating raw weighting terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightingReport {
    pub sum: Rat,
    pub negative_non_projections: Vec<(Operation, Rat)>,
}

impl WeightingReport {
    pub fn check<'a>(
        d: DomainSize,
        k: usize,
        terms: impl IntoIterator<Item = (&'a Operation, &'a Rat)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<&Operation, Rat> = BTreeMap::new();
        for (op, w) in terms {
            check_op(d, k, op)?;
            *merged.entry(op).or_insert_with(Rat::zero) += w;
        }
        let sum = merged.values().fold(Rat::zero(), |acc, w| acc + w);
        let negative_non_projections = merged
            .into_iter()
            .filter(|(op, w)| w.is_negative() && !op.is_projection())
            .map(|(op, w)| (op.clone(), w))
            .collect();
        Ok(WeightingReport {
            sum,
            negative_non_projections,
        })
    }

    pub fn sums_to_zero(&self) -> bool {
        self.sum.is_zero()
    }

    /// Zero sum and negativity only on projections.
    pub fn is_proper(&self) -> bool {
        self.sums_to_zero() && self.negative_non_projections.is_empty()
    }
}

fn check_op(d: DomainSize, k: usize, op: &Operation) -> Result<()> {
    if op.domain() != d || op.arity() != k {
        return Err(Error::shape(format!(
            "operation {op:?} does not match weighting arity {k} on d={}",
            d.get()
        )));
    }
    Ok(())
}

fn describe(terms: &[(Operation, Rat)]) -> String {
    terms
        .iter()
        .map(|(op, w)| format!("{} on {:?}", format_rat(w), op.table()))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Weighting {
    /// Merges duplicate operations, drops zero weights and requires a zero sum.
    pub fn new(
        d: DomainSize,
        k: usize,
        terms: impl IntoIterator<Item = (Operation, Rat)>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("weightings must have arity at least 1"));
        }
        let mut merged: BTreeMap<Operation, Rat> = BTreeMap::new();
        for (op, w) in terms {
            check_op(d, k, &op)?;
            *merged.entry(op).or_insert_with(Rat::zero) += w;
        }
        merged.retain(|_, w| !w.is_zero());
        let sum = merged.values().fold(Rat::zero(), |acc, w| acc + w);
        if !sum.is_zero() {
            return Err(Error::invalid(format!(
                "weights must sum to zero, got {}",
                format_rat(&sum)
            )));
        }
        Ok(Weighting {
            domain: d,
            arity: k,
            terms: merged,
        })
    }

    pub fn zero(d: DomainSize, k: usize) -> Self {
        Weighting {
            domain: d,
            arity: k,
            terms: BTreeMap::new(),
        }
    }

    pub fn domain(&self) -> DomainSize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &BTreeMap<Operation, Rat> {
        &self.terms
    }

    pub fn weight(&self, op: &Operation) -> Rat {
        self.terms.get(op).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn negative_non_projections(&self) -> Vec<(Operation, Rat)> {
        self.terms
            .iter()
            .filter(|(op, w)| w.is_negative() && !op.is_projection())
            .map(|(op, w)| (op.clone(), w.clone()))
            .collect()
    }

    pub fn is_proper(&self) -> bool {
        self.terms
            .iter()
            .all(|(op, w)| !w.is_negative() || op.is_projection())
    }

    pub fn report(&self) -> WeightingReport {
        WeightingReport {
            sum: Rat::zero(),
            negative_non_projections: self.negative_non_projections(),
        }
    }

    pub(crate) fn require_proper(&self) -> Result<()> {
        let bad = self.negative_non_projections();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Improper(describe(&bad)))
        }
    }

    /// All `k`-ary projections together with the positively weighted operations.
    pub fn support(&self) -> Result<OperationSet> {
        self.require_proper()?;
        let mut set = OperationSet::from_ops(
            self.domain,
            Operation::projections(self.domain, self.arity)?,
        )?;
        for (op, w) in &self.terms {
            if w.is_positive() {
                set.insert(op.clone())?;
            }
        }
        Ok(set)
    }

    /// `ω[g_1..g_k](f') = Σ_{f[g] = f'} ω(f)`; the result may be improper.
    pub fn superpose(&self, gs: &[Operation]) -> Result<Weighting> {
        if gs.len() != self.arity {
            return Err(Error::shape(format!(
                "superposition of a {}-ary weighting needs {} operations, got {}",
                self.arity,
                self.arity,
                gs.len()
            )));
        }
        let inner = gs[0].arity();
        if gs
            .iter()
            .any(|g| g.arity() != inner || g.domain() != self.domain)
        {
            return Err(Error::shape("inner operations must share arity and domain"));
        }
        let tables: Vec<&[Label]> = gs.iter().map(Operation::table).collect();
        let terms = self
            .terms
            .iter()
            .map(|(f, w)| (f.superpose_tables(inner, &tables), w.clone()));
        Weighting::new(self.domain, inner, terms)
    }

    pub fn add(&self, other: &Weighting) -> Result<Weighting> {
        if self.arity != other.arity || self.domain != other.domain {
            return Err(Error::shape(format!(
                "cannot add weightings of arities {} and {}",
                self.arity, other.arity
            )));
        }
        let terms = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|(f, w)| (f.clone(), w.clone()));
        Weighting::new(self.domain, self.arity, terms)
    }

    pub fn scale(&self, factor: &Rat) -> Result<Weighting> {
        if factor.is_negative() {
            return Err(Error::invalid(format!("negative scale factor {factor}")));
        }
        let terms = self.terms.iter().map(|(f, w)| (f.clone(), w * factor));
        Weighting::new(self.domain, self.arity, terms)
    }

    /// `Σ_f |ω(f)|`.
    pub fn total_variation(&self) -> Rat {
        self.terms
            .values()
            .fold(Rat::zero(), |acc, w| acc + w.abs())
    }
}

/// One summand `c · ω[g_1..g_l]` of a proper sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumTerm {
    #[serde(with = "serde_rat")]
    pub coefficient: Rat,
    pub weighting: Weighting,
    pub inner: Vec<Operation>,
}

/// Witness that a proper sum of superpositions is itself a single proper
/// superposition: the `t`-ary lift `μ' = Σ c_i ω_i[e_{s_i+1}..e_{s_i+l_i}]`
/// superposed with the concatenated inner operations.
#[derive(Clone, Debug)]
pub struct ProperSumTranscript {
    pub total_arity: usize,
    pub offsets: Vec<usize>,
    pub inner: Vec<Operation>,
    /// The lifted `t`-ary weighting, materialised when `d^t` is small.
    pub lifted: Option<Weighting>,
}

/// Largest `d^t` for which the lifted weighting is materialised.
const LIFT_TABLE_CAP: usize = 1 << 12;

/// `μ = Σ c_i · ω_i[gs_i]`, accepted only when proper.
pub fn proper_sum(
    d: DomainSize,
    k: usize,
    summands: &[SumTerm],
) -> Result<(Weighting, ProperSumTranscript)> {
    let mut mu = Weighting::zero(d, k);
    let mut offsets = Vec::with_capacity(summands.len());
    let mut total_arity = 0;
    let mut inner = Vec::new();
    for term in summands {
        if term.coefficient.is_negative() {
            return Err(Error::invalid("proper sums need non-negative coefficients"));
        }
        term.weighting.require_proper()?;
        if term.inner.iter().any(|g| g.arity() != k) {
            return Err(Error::shape(format!(
                "inner operations must all have arity {k}"
            )));
        }
        let sup = term.weighting.superpose(&term.inner)?;
        mu = mu.add(&sup.scale(&term.coefficient)?)?;
        offsets.push(total_arity);
        total_arity += term.weighting.arity();
        inner.extend(term.inner.iter().cloned());
    }
    let bad = mu.negative_non_projections();
    if !bad.is_empty() {
        return Err(Error::Improper(describe(&bad)));
    }

    let lifted = match d.count(total_arity) {
        Some(size) if total_arity > 0 && size <= LIFT_TABLE_CAP => {
            let mut lift = Weighting::zero(d, total_arity);
            for (term, &offset) in summands.iter().zip(&offsets) {
                let projections = (1..=term.weighting.arity())
                    .map(|i| Operation::projection(d, total_arity, offset + i))
                    .collect::<Result<Vec<_>>>()?;
                let part = term.weighting.superpose(&projections)?;
                if !part.is_proper() {
                    return Err(Error::Verification(
                        "superposition with projections was improper".into(),
                    ));
                }
                lift = lift.add(&part.scale(&term.coefficient)?)?;
            }
            if lift.superpose(&inner)? != mu {
                return Err(Error::Verification(
                    "lifted weighting does not reproduce the proper sum".into(),
                ));
            }
            Some(lift)
        }
        _ => None,
    };
    Ok((
        mu,
        ProperSumTranscript {
            total_arity,
            offsets,
            inner,
            lifted,
        },
    ))
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    table: Vec<Label>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    op: TableRepr,
    #[serde(with = "serde_rat")]
    weight: Rat,
}

#[derive(Serialize, Deserialize)]
struct WeightingRepr {
    d: DomainSize,
    k: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for Weighting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WeightingRepr {
            d: self.domain,
            k: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(op, w)| TermRepr {
                    op: TableRepr {
                        table: op.table().to_vec(),
                    },
                    weight: w.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weighting {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = WeightingRepr::deserialize(de)?;
        let terms = r
            .terms
            .into_iter()
            .map(|t| Ok((Operation::new(r.d, r.k, t.op.table)?, t.weight)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Weighting::new(r.d, r.k, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn d2() -> DomainSize {
        DomainSize::new(2).unwrap()
    }

    fn op(k: usize, table: &[Label]) -> Operation {
        Operation::new(d2(), k, table.to_vec()).unwrap()
    }

    fn e(k: usize, i: usize) -> Operation {
        Operation::projection(d2(), k, i).unwrap()
    }

    fn min() -> Operation {
        op(2, &[0, 0, 0, 1])
    }

    fn max() -> Operation {
        op(2, &[0, 1, 1, 1])
    }

    fn c(value: Label) -> Operation {
        Operation::constant(d2(), 1, value).unwrap()
    }

    fn submodular() -> Weighting {
        Weighting::new(
            d2(),
            2,
            [
                (e(2, 1), int(-1)),
                (e(2, 2), int(-1)),
                (min(), int(1)),
                (max(), int(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn properness() {
        let w = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(0), int(1))]).unwrap();
        assert!(w.is_proper());
        let bad = Weighting::new(d2(), 2, [(min(), int(-1)), (max(), int(1))]).unwrap();
        assert!(!bad.is_proper());
        assert!(matches!(bad.support(), Err(Error::Improper(_))));
        let one = e(1, 1);
        let ones = int(1);
        let report = WeightingReport::check(d2(), 1, [(&one, &ones)]).unwrap();
        assert!(!report.sums_to_zero());
        assert!(!report.is_proper());
        assert!(Weighting::new(d2(), 1, [(e(1, 1), int(1))]).is_err());
    }

    #[test]
    fn supports() {
        let zero = Weighting::zero(d2(), 2);
        assert_eq!(zero.support().unwrap().arity_vec(2), vec![e(2, 1), e(2, 2)]);
        let s = submodular().support().unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.contains(&min()) && s.contains(&max()));
        let w = Weighting::new(d2(), 1, [(e(1, 1), int(-2)), (c(0), int(2))]).unwrap();
        assert_eq!(w.support().unwrap().arity_vec(1), vec![c(0), e(1, 1)]);
    }

    #[test]
    fn superposition_examples() {
        let w = submodular();
        assert_eq!(w.superpose(&[e(2, 1), e(2, 2)]).unwrap(), w);
        assert!(w.superpose(&[e(1, 1), e(1, 1)]).unwrap().is_zero());
        let u = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(0), int(1))]).unwrap();
        let s = u.superpose(&[c(1)]).unwrap();
        assert_eq!(
            s,
            Weighting::new(d2(), 1, [(c(1), int(-1)), (c(0), int(1))]).unwrap()
        );
        assert!(!s.is_proper());
        assert!(w.superpose(&[e(1, 1)]).is_err());
    }

    #[test]
    fn add_and_scale() {
        let w = submodular();
        assert_eq!(w.add(&Weighting::zero(d2(), 2)).unwrap(), w);
        assert!(w.scale(&int(0)).unwrap().is_zero());
        assert!(w.scale(&int(-1)).is_err());
        let a = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(0), int(1))]).unwrap();
        let b = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(1), int(1))]).unwrap();
        let sum = a.add(&b).unwrap();
        assert_eq!(
            sum,
            Weighting::new(
                d2(),
                1,
                [(e(1, 1), int(-2)), (c(0), int(1)), (c(1), int(1))]
            )
            .unwrap()
        );
        assert!(a.add(&w).is_err());
    }

    #[test]
    fn proper_sum_examples() {
        let w = submodular();
        let (single, transcript) = proper_sum(
            d2(),
            2,
            &[SumTerm {
                coefficient: int(3),
                weighting: w.clone(),
                inner: vec![e(2, 1), e(2, 2)],
            }],
        )
        .unwrap();
        assert_eq!(single, w.scale(&int(3)).unwrap());
        assert_eq!(transcript.total_arity, 2);
        assert!(transcript.lifted.is_some());

        let (empty, _) = proper_sum(d2(), 2, &[]).unwrap();
        assert!(empty.is_zero());

        // (−e1 + c0)[c1] = −c1 + c0 is improper; adding 1·(−e1 + c1) repairs it.
        let u = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(0), int(1))]).unwrap();
        let v = Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(1), int(1))]).unwrap();
        let improper = [SumTerm {
            coefficient: int(1),
            weighting: u.clone(),
            inner: vec![c(1)],
        }];
        assert!(matches!(
            proper_sum(d2(), 1, &improper),
            Err(Error::Improper(_))
        ));
        let repaired = [
            improper[0].clone(),
            SumTerm {
                coefficient: int(1),
                weighting: v,
                inner: vec![e(1, 1)],
            },
        ];
        let (mu, transcript) = proper_sum(d2(), 1, &repaired).unwrap();
        assert_eq!(
            mu,
            Weighting::new(d2(), 1, [(e(1, 1), int(-1)), (c(0), int(1))]).unwrap()
        );
        assert_eq!(transcript.offsets, vec![0, 1]);
        assert!(transcript.lifted.unwrap().is_proper());
    }

    #[test]
    fn json_round_trip() {
        let w = submodular();
        let text = serde_json::to_string(&w).unwrap();
        assert!(
            text.starts_with(r#"{"d":2,"k":2,"terms":[{"op":{"table":[0,0,0,1]},"weight":"1"}"#)
        );
        assert_eq!(serde_json::from_str::<Weighting>(&text).unwrap(), w);
        let unbalanced = r#"{"d":2,"k":1,"terms":[{"op":{"table":[0,1]},"weight":"1"}]}"#;
        assert!(serde_json::from_str::<Weighting>(unbalanced).is_err());
    }
}
