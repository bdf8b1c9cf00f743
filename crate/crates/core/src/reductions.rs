//! Instance transformations that eliminate `Opt(γ)` constraints and rational
//! scaling factors while preserving (near-)optimal assignments.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{Caps, DomainSize, Label};
use crate::error::{Error, Result};
use crate::rational::{ceil, floor, serde_rat, ExtRat, Rat};
use crate::vcsp::{Constraint, Solution, VcspInstance};
use crate::wrel::{Language, WeightedRelation};

/// Shifts every relation so that its minimum finite weight is zero.
///
/// The log maps each relation name to the constant that was added.
pub fn normalize_nonnegative(language: &Language) -> (Language, BTreeMap<String, Rat>) {
    let mut out = Language::new(language.domain());
    let mut log = BTreeMap::new();
    for (name, rel) in language.iter() {
        let shift = rel.min_finite().map(|m| -m).unwrap_or_else(Rat::zero);
        out.insert(name.clone(), rel.shift(&shift))
            .expect("names are unique");
        log.insert(name.clone(), shift);
    }
    (out, log)
}

/// Total constant added to every assignment's value when `instance` is
/// evaluated over the normalized language.
pub fn instance_shift(instance: &VcspInstance, log: &BTreeMap<String, Rat>) -> Rat {
    instance
        .constraints()
        .iter()
        .filter_map(|c| log.get(&c.relation))
        .fold(Rat::zero(), |acc, s| acc + s)
}

fn require_nonnegative(language: &Language, skip: Option<&str>) -> Result<()> {
    for (name, rel) in language.iter() {
        if Some(name.as_str()) == skip {
            continue;
        }
        if rel.min_finite().is_some_and(|m| m.is_negative()) {
            return Err(Error::invalid(format!(
                "relation {name:?} has negative weights; normalize the language first"
            )));
        }
    }
    Ok(())
}

fn to_count(value: BigInt, what: &str) -> Result<usize> {
    value.to_usize().ok_or_else(|| Error::CapExceeded {
        what: what.into(),
        required: format!("{value} copies"),
        cap: usize::MAX as u64,
    })
}

fn check_total(total: usize, caps: &Caps) -> Result<()> {
    if total as u64 > caps.assignment_cap {
        return Err(Error::CapExceeded {
            what: "materialising the reduced instance".into(),
            required: format!("{total} constraints"),
            cap: caps.assignment_cap,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReductionParams {
    Opt {
        q: usize,
        #[serde(with = "serde_rat")]
        m: Rat,
        #[serde(rename = "M", with = "serde_rat")]
        big_m: Rat,
        copies: usize,
        identity: bool,
    },
    Scale {
        q: usize,
        #[serde(rename = "M", with = "opt_rat")]
        big_m: Option<Rat>,
        #[serde(with = "serde_rat")]
        epsilon: Rat,
        #[serde(with = "opt_rat")]
        b: Option<Rat>,
        copies: Vec<usize>,
        identity: bool,
    },
}

mod opt_rat {
    use super::*;

    pub fn serialize<S: Serializer>(
        value: &Option<Rat>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.serialize_some(&crate::rational::format_rat(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rat>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| crate::rational::parse_rat(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMeta {
    #[serde(flatten)]
    pub params: ReductionParams,
    /// Index of the input constraint behind each output constraint.
    pub provenance: Vec<usize>,
}

/// Output instance with its parameters, serialized as the instance plus `"meta"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionReport {
    #[serde(flatten)]
    pub instance: VcspInstance,
    pub meta: ReductionMeta,
}

/// Replaces each `Opt(γ)` constraint with `q·⌈M/m⌉ + 1` copies of `γ`.
///
/// `m` is the smallest positive weight of `γ` and `M` the largest finite weight
/// over the language without the `Opt(γ)` relation, `γ` included. The relation
/// named `opt_name` must equal `Opt(γ)` and is dropped from the output language.
pub fn reduce_opt(
    instance: &VcspInstance,
    gamma_name: &str,
    opt_name: &str,
    allow_identity: bool,
    caps: &Caps,
) -> Result<ReductionReport> {
    let language = instance.language();
    let gamma = language
        .get(gamma_name)
        .ok_or_else(|| Error::invalid(format!("unknown relation {gamma_name:?}")))?;
    let opt = language
        .get(opt_name)
        .ok_or_else(|| Error::invalid(format!("unknown relation {opt_name:?}")))?;
    if *opt != gamma.opt() {
        return Err(Error::invalid(format!(
            "{opt_name:?} is not Opt({gamma_name})"
        )));
    }
    require_nonnegative(language, Some(opt_name))?;
    if gamma.min_finite().is_some_and(|m| !m.is_zero()) {
        return Err(Error::invalid(format!(
            "{gamma_name:?} must have minimum weight 0"
        )));
    }
    let q = instance.constraints().len();
    let positive = gamma
        .finite_values()
        .filter(|v| v.is_positive())
        .min()
        .cloned();
    let big_m = language
        .iter()
        .filter(|(name, _)| name.as_str() != opt_name)
        .filter_map(|(_, r)| r.max_finite())
        .max()
        .unwrap_or_else(Rat::zero);
    let (m, copies, identity) = match positive {
        Some(m) => {
            let copies = to_count(BigInt::from(q) * ceil(&(&big_m / &m)) + 1, "Opt(γ) copies")?;
            (m, copies, false)
        }
        None if allow_identity => (Rat::zero(), 1, true),
        None => {
            return Err(Error::invalid(format!(
                "{gamma_name:?} is a relation, so Opt({gamma_name}) = {gamma_name}; identity transform not allowed"
            )))
        }
    };
    let mut out_lang = language.clone();
    out_lang.remove(opt_name);
    let opt_count = instance
        .constraints()
        .iter()
        .filter(|c| c.relation == opt_name)
        .count();
    check_total(q - opt_count + opt_count * copies, caps)?;
    let mut constraints = Vec::new();
    let mut provenance = Vec::new();
    for (i, c) in instance.constraints().iter().enumerate() {
        if c.relation == opt_name {
            for _ in 0..copies {
                constraints.push(Constraint::new(gamma_name, c.scope.clone()));
                provenance.push(i);
            }
        } else {
            constraints.push(c.clone());
            provenance.push(i);
        }
    }
    Ok(ReductionReport {
        instance: VcspInstance::new(instance.num_vars(), out_lang, constraints)?,
        meta: ReductionMeta {
            params: ReductionParams::Opt {
                q,
                m,
                big_m,
                copies,
                identity,
            },
            provenance,
        },
    })
}

/// A constraint `factor · γ'(scope)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledConstraint {
    #[serde(rename = "rel")]
    pub relation: String,
    pub scope: Vec<usize>,
    #[serde(with = "serde_rat", default = "one")]
    pub factor: Rat,
}

fn one() -> Rat {
    Rat::from_integer(1.into())
}

/// An instance over `{c · γ' : γ' ∈ Γ'}` given by `Γ'` and per-constraint factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledInstance {
    num_vars: usize,
    language: Language,
    constraints: Vec<ScaledConstraint>,
}

impl ScaledInstance {
    pub fn new(
        num_vars: usize,
        language: Language,
        constraints: Vec<ScaledConstraint>,
    ) -> Result<Self> {
        for c in &constraints {
            if c.factor.is_negative() {
                return Err(Error::invalid(format!(
                    "negative factor on {:?}",
                    c.relation
                )));
            }
        }
        // Reuse the plain instance's validation of names, arities and indices.
        let plain = constraints
            .iter()
            .map(|c| Constraint::new(c.relation.clone(), c.scope.clone()))
            .collect();
        VcspInstance::new(num_vars, language.clone(), plain)?;
        Ok(ScaledInstance {
            num_vars,
            language,
            constraints,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn constraints(&self) -> &[ScaledConstraint] {
        &self.constraints
    }

    pub fn domain(&self) -> DomainSize {
        self.language.domain()
    }

    /// `Σ c_i γ'_i(t)` with `0 · ∞ = ∞`.
    pub fn evaluate(&self, assignment: &[Label]) -> Result<ExtRat> {
        if assignment.len() != self.num_vars {
            return Err(Error::shape(
                "assignment length does not match the variable count",
            ));
        }
        self.domain().check_tuple(assignment)?;
        let mut total = ExtRat::zero();
        for c in &self.constraints {
            let rel: &WeightedRelation = self.language.get(&c.relation).expect("validated");
            let args: Vec<Label> = c.scope.iter().map(|&v| assignment[v]).collect();
            total = &total + &rel.value(&args)?.scale(&c.factor);
        }
        Ok(total)
    }

    pub fn solve(&self, caps: &Caps) -> Result<Solution> {
        caps.check_assignments(self.domain(), self.num_vars)?;
        let mut best = ExtRat::Infinite;
        let mut argmin = None;
        for t in self.domain().tuples(self.num_vars) {
            let v = self.evaluate(&t)?;
            if v < best {
                best = v;
                argmin = Some(t);
            }
        }
        Ok(Solution {
            optimum: best,
            argmin,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ScaledRepr {
    n: usize,
    language: Language,
    constraints: Vec<ScaledConstraint>,
}

impl Serialize for ScaledInstance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScaledRepr {
            n: self.num_vars,
            language: self.language.clone(),
            constraints: self.constraints.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScaledInstance {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = ScaledRepr::deserialize(de)?;
        ScaledInstance::new(r.n, r.language, r.constraints).map_err(serde::de::Error::custom)
    }
}

/// Replaces each `c_i · γ'_i` with `⌊b c_i⌋ + 1` copies of `γ'_i`, where
/// `b = ⌈qM/ε⌉` and `M` is the largest finite weight of `Γ'`.
pub fn reduce_scale(
    instance: &ScaledInstance,
    epsilon: &Rat,
    caps: &Caps,
) -> Result<ReductionReport> {
    if !epsilon.is_positive() {
        return Err(Error::invalid("ε must be positive"));
    }
    let language = instance.language();
    require_nonnegative(language, None)?;
    let q = instance.constraints().len();
    let big_m = language.max_finite();
    let positive_m = big_m.clone().filter(|m| m.is_positive());
    let (b, copies) = match &positive_m {
        Some(m) => {
            let b = Rat::from_integer(ceil(&(Rat::from_integer(BigInt::from(q)) * m / epsilon)));
            let copies = instance
                .constraints()
                .iter()
                .map(|c| to_count(floor(&(&b * &c.factor)) + 1, "scaled constraint copies"))
                .collect::<Result<Vec<_>>>()?;
            (Some(b), copies)
        }
        None => (None, vec![1; q]),
    };
    check_total(copies.iter().sum(), caps)?;
    let mut constraints = Vec::new();
    let mut provenance = Vec::new();
    for (i, (c, &n)) in instance.constraints().iter().zip(&copies).enumerate() {
        for _ in 0..n {
            constraints.push(Constraint::new(c.relation.clone(), c.scope.clone()));
            provenance.push(i);
        }
    }
    Ok(ReductionReport {
        instance: VcspInstance::new(instance.num_vars(), language.clone(), constraints)?,
        meta: ReductionMeta {
            params: ReductionParams::Scale {
                q,
                big_m,
                epsilon: epsilon.clone(),
                identity: b.is_none(),
                b,
                copies,
            },
            provenance,
        },
    })
}
