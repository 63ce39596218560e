//! Calculus-independent relation layer: a unified base-relation value, the
//! ASCII text syntax for each calculus, and sets of base relations (the unit
//! of constraint and composition-table entry).
//!
//! Text grammar (canonical output always numeric):
//!   opra    `m:i-j`            same position `m:s<k>`
//!   eopra   `m:i.k-j.l`        same position `m:s<k>`
//!   star    `star-m:d`         same position `star-m:same`
//!   estar   `estar-m:d.k.l`    same position `estar-m:same`
//! For m = 2, sector names (front, lf, left, lb, back, rb, right, rf) and
//! distance names (close, equal, distant) are accepted on input.

use std::collections::BTreeSet;
use std::fmt;

use crate::eopra::{
    converse_eopra, enumerate_eopra, eopra_index, eopra_universe_size, relate_eopra, EopraKind,
    EopraRelation,
};
use crate::error::{QsrError, Result};
use crate::geometry::{EOPoint, TolerancePolicy};
use crate::opra::{
    converse_opra, enumerate_opra, opra_index, opra_universe_size, relate_opra, Granularity,
    OpraKind, OpraRelation, SECTOR_NAMES_M2,
};
use crate::star::{
    converse_estar, converse_star, enumerate_estar, enumerate_star, estar_index,
    estar_universe_size, relate_estar, relate_star, star_index, star_universe_size, EstarKind,
    EstarRelation, StarFrame, StarKind, StarRelation,
};

use crate::eopra::DISTANCE_NAMES_M2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CalculusId {
    Opra,
    Eopra,
    Star,
    Estar,
}

impl CalculusId {
    pub const ALL: [CalculusId; 4] = [
        CalculusId::Opra,
        CalculusId::Eopra,
        CalculusId::Star,
        CalculusId::Estar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CalculusId::Opra => "opra",
            CalculusId::Eopra => "eopra",
            CalculusId::Star => "star",
            CalculusId::Estar => "estar",
        }
    }

    pub fn from_str(s: &str) -> Result<CalculusId> {
        match s {
            "opra" => Ok(CalculusId::Opra),
            "eopra" => Ok(CalculusId::Eopra),
            "star" => Ok(CalculusId::Star),
            "estar" => Ok(CalculusId::Estar),
            other => Err(QsrError::invalid(format!("unknown calculus `{other}`"))),
        }
    }
}

impl fmt::Display for CalculusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A base relation of any supported calculus. Ordering within one calculus
/// follows the enumeration order of that calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseRelation {
    Opra(OpraRelation),
    Eopra(EopraRelation),
    Star(StarRelation),
    Estar(EstarRelation),
}

impl BaseRelation {
    pub fn calculus(&self) -> CalculusId {
        match self {
            BaseRelation::Opra(_) => CalculusId::Opra,
            BaseRelation::Eopra(_) => CalculusId::Eopra,
            BaseRelation::Star(_) => CalculusId::Star,
            BaseRelation::Estar(_) => CalculusId::Estar,
        }
    }

    pub fn granularity(&self) -> Granularity {
        match self {
            BaseRelation::Opra(r) => r.m,
            BaseRelation::Eopra(r) => r.m,
            BaseRelation::Star(r) => r.m,
            BaseRelation::Estar(r) => r.m,
        }
    }

    pub fn converse(&self) -> BaseRelation {
        match self {
            BaseRelation::Opra(r) => BaseRelation::Opra(converse_opra(r)),
            BaseRelation::Eopra(r) => BaseRelation::Eopra(converse_eopra(r)),
            BaseRelation::Star(r) => BaseRelation::Star(converse_star(r)),
            BaseRelation::Estar(r) => BaseRelation::Estar(converse_estar(r)),
        }
    }

    /// Position in the enumeration order of the relation's calculus.
    pub fn index(&self) -> usize {
        match self {
            BaseRelation::Opra(r) => opra_index(r),
            BaseRelation::Eopra(r) => eopra_index(r),
            BaseRelation::Star(r) => star_index(r),
            BaseRelation::Estar(r) => estar_index(r),
        }
    }
}

pub fn universe_size(calculus: CalculusId, m: Granularity) -> usize {
    match calculus {
        CalculusId::Opra => opra_universe_size(m),
        CalculusId::Eopra => eopra_universe_size(m),
        CalculusId::Star => star_universe_size(m),
        CalculusId::Estar => estar_universe_size(m),
    }
}

/// All base relations of a calculus in canonical (index) order.
pub fn enumerate(calculus: CalculusId, m: Granularity) -> Vec<BaseRelation> {
    match calculus {
        CalculusId::Opra => enumerate_opra(m).into_iter().map(BaseRelation::Opra).collect(),
        CalculusId::Eopra => enumerate_eopra(m)
            .into_iter()
            .map(BaseRelation::Eopra)
            .collect(),
        CalculusId::Star => enumerate_star(m).into_iter().map(BaseRelation::Star).collect(),
        CalculusId::Estar => enumerate_estar(m)
            .into_iter()
            .map(BaseRelation::Estar)
            .collect(),
    }
}

/// The identity-like element used by constraint networks: exact coincidence
/// of position (and heading, where headings exist).
pub fn identity(calculus: CalculusId, m: Granularity) -> BaseRelation {
    match calculus {
        CalculusId::Opra => BaseRelation::Opra(OpraRelation::identity(m)),
        CalculusId::Eopra => BaseRelation::Eopra(EopraRelation::identity(m)),
        CalculusId::Star => BaseRelation::Star(StarRelation::same(m)),
        CalculusId::Estar => BaseRelation::Estar(EstarRelation::same(m)),
    }
}

/// Relation between two eo-points under a calculus, using the default star
/// frame for the absolute calculi.
pub fn relate_with_frame(
    calculus: CalculusId,
    a: &EOPoint,
    b: &EOPoint,
    m: Granularity,
    frame: &StarFrame,
    tol: &TolerancePolicy,
) -> BaseRelation {
    match calculus {
        CalculusId::Opra => BaseRelation::Opra(relate_opra(a, b, m, tol)),
        CalculusId::Eopra => BaseRelation::Eopra(relate_eopra(a, b, m, tol)),
        CalculusId::Star => BaseRelation::Star(relate_star(a.position, b.position, frame, tol)),
        CalculusId::Estar => BaseRelation::Estar(relate_estar(a, b, frame, tol)),
    }
}

pub fn relate(
    calculus: CalculusId,
    a: &EOPoint,
    b: &EOPoint,
    m: Granularity,
    tol: &TolerancePolicy,
) -> BaseRelation {
    let frame = StarFrame::with_default_axes(m);
    relate_with_frame(calculus, a, b, m, &frame, tol)
}

impl fmt::Display for BaseRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseRelation::Opra(r) => match r.kind {
                OpraKind::Different { i, j } => write!(f, "{}:{}-{}", r.m, i, j),
                OpraKind::Same { s } => write!(f, "{}:s{}", r.m, s),
            },
            BaseRelation::Eopra(r) => match r.kind {
                EopraKind::Different { i, k, j, l } => {
                    write!(f, "{}:{}.{}-{}.{}", r.m, i, k.0, j, l.0)
                }
                EopraKind::Same { s } => write!(f, "{}:s{}", r.m, s),
            },
            BaseRelation::Star(r) => match r.kind {
                StarKind::Different { d } => write!(f, "star-{}:{}", r.m, d),
                StarKind::Same => write!(f, "star-{}:same", r.m),
            },
            BaseRelation::Estar(r) => match r.kind {
                EstarKind::Different { d, k, l } => {
                    write!(f, "estar-{}:{}.{}.{}", r.m, d, k.0, l.0)
                }
                EstarKind::Same => write!(f, "estar-{}:same", r.m),
            },
        }
    }
}

fn parse_sector(token: &str, m: Granularity) -> Result<u32> {
    if m.get() == 2 {
        if let Some(idx) = SECTOR_NAMES_M2.iter().position(|n| *n == token) {
            return Ok(idx as u32);
        }
    }
    let v: u32 = token
        .parse()
        .map_err(|_| QsrError::invalid(format!("invalid sector `{token}`")))?;
    if v >= m.sector_count() {
        return Err(QsrError::invalid(format!(
            "sector {v} out of range for m={m}"
        )));
    }
    Ok(v)
}

fn parse_class(token: &str, m: Granularity) -> Result<u32> {
    if m.get() == 2 {
        if let Some(idx) = DISTANCE_NAMES_M2.iter().position(|n| *n == token) {
            return Ok(idx as u32);
        }
    }
    let v: u32 = token
        .parse()
        .map_err(|_| QsrError::invalid(format!("invalid distance class `{token}`")))?;
    if v >= m.class_count() {
        return Err(QsrError::invalid(format!(
            "distance class {v} out of range for m={m}"
        )));
    }
    Ok(v)
}

fn parse_granularity(token: &str) -> Result<Granularity> {
    let v: u32 = token
        .parse()
        .map_err(|_| QsrError::invalid(format!("invalid granularity `{token}`")))?;
    Granularity::new(v)
}

/// Parses a base relation of a known calculus.
pub fn parse_relation(calculus: CalculusId, text: &str) -> Result<BaseRelation> {
    let bad = || QsrError::invalid(format!("malformed {calculus} relation `{text}`"));
    match calculus {
        CalculusId::Opra | CalculusId::Eopra => {
            let (mtok, rest) = text.split_once(':').ok_or_else(bad)?;
            let m = parse_granularity(mtok)?;
            if let Some(stok) = rest.strip_prefix('s') {
                let s: u32 = stok.parse().map_err(|_| bad())?;
                if s >= m.sector_count() {
                    return Err(QsrError::invalid(format!(
                        "sector {s} out of range for m={m}"
                    )));
                }
                return Ok(match calculus {
                    CalculusId::Opra => BaseRelation::Opra(OpraRelation::same(m, s)?),
                    _ => BaseRelation::Eopra(EopraRelation::same(m, s)?),
                });
            }
            let (lower, upper) = rest.split_once('-').ok_or_else(bad)?;
            match calculus {
                CalculusId::Opra => {
                    let i = parse_sector(lower, m)?;
                    let j = parse_sector(upper, m)?;
                    Ok(BaseRelation::Opra(OpraRelation::different(m, i, j)?))
                }
                _ => {
                    let (itok, ktok) = lower.split_once('.').ok_or_else(bad)?;
                    let (jtok, ltok) = upper.split_once('.').ok_or_else(bad)?;
                    let i = parse_sector(itok, m)?;
                    let k = parse_class(ktok, m)?;
                    let j = parse_sector(jtok, m)?;
                    let l = parse_class(ltok, m)?;
                    Ok(BaseRelation::Eopra(EopraRelation::different(m, i, k, j, l)?))
                }
            }
        }
        CalculusId::Star | CalculusId::Estar => {
            let prefix = match calculus {
                CalculusId::Star => "star-",
                _ => "estar-",
            };
            let rest = text.strip_prefix(prefix).ok_or_else(bad)?;
            let (mtok, body) = rest.split_once(':').ok_or_else(bad)?;
            let m = parse_granularity(mtok)?;
            if body == "same" {
                return Ok(match calculus {
                    CalculusId::Star => BaseRelation::Star(StarRelation::same(m)),
                    _ => BaseRelation::Estar(EstarRelation::same(m)),
                });
            }
            match calculus {
                CalculusId::Star => {
                    let d = parse_sector(body, m)?;
                    Ok(BaseRelation::Star(StarRelation::different(m, d)?))
                }
                _ => {
                    let mut parts = body.split('.');
                    let dtok = parts.next().ok_or_else(bad)?;
                    let ktok = parts.next().ok_or_else(bad)?;
                    let ltok = parts.next().ok_or_else(bad)?;
                    if parts.next().is_some() {
                        return Err(bad());
                    }
                    let d = parse_sector(dtok, m)?;
                    let k = parse_class(ktok, m)?;
                    let l = parse_class(ltok, m)?;
                    Ok(BaseRelation::Estar(EstarRelation::different(m, d, k, l)?))
                }
            }
        }
    }
}

/// Parses a relation inferring the calculus from the syntax shape. The bare
/// same-position form `m:s<k>` is shared by opra and eopra; it parses as opra
/// (the converse formula is identical in both).
pub fn parse_relation_infer(text: &str) -> Result<BaseRelation> {
    if text.starts_with("estar-") {
        parse_relation(CalculusId::Estar, text)
    } else if text.starts_with("star-") {
        parse_relation(CalculusId::Star, text)
    } else if text.contains('.') {
        parse_relation(CalculusId::Eopra, text)
    } else {
        parse_relation(CalculusId::Opra, text)
    }
}

/// A set of base relations of one calculus at one granularity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationSet {
    calculus: CalculusId,
    m: Granularity,
    members: BTreeSet<BaseRelation>,
}

impl RelationSet {
    pub fn empty(calculus: CalculusId, m: Granularity) -> RelationSet {
        RelationSet {
            calculus,
            m,
            members: BTreeSet::new(),
        }
    }

    pub fn universal(calculus: CalculusId, m: Granularity) -> RelationSet {
        RelationSet {
            calculus,
            m,
            members: enumerate(calculus, m).into_iter().collect(),
        }
    }

    pub fn singleton(r: BaseRelation) -> RelationSet {
        let mut s = RelationSet::empty(r.calculus(), r.granularity());
        s.members.insert(r);
        s
    }

    pub fn from_members(
        calculus: CalculusId,
        m: Granularity,
        members: impl IntoIterator<Item = BaseRelation>,
    ) -> Result<RelationSet> {
        let mut s = RelationSet::empty(calculus, m);
        for r in members {
            s.insert(r)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, r: BaseRelation) -> Result<()> {
        if r.calculus() != self.calculus || r.granularity() != self.m {
            return Err(QsrError::Mismatch(format!(
                "relation {r} does not belong to calculus {} at m={}",
                self.calculus, self.m
            )));
        }
        self.members.insert(r);
        Ok(())
    }

    pub fn calculus(&self) -> CalculusId {
        self.calculus
    }

    pub fn granularity(&self) -> Granularity {
        self.m
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_universal(&self) -> bool {
        self.members.len() == universe_size(self.calculus, self.m)
    }

    pub fn contains(&self, r: &BaseRelation) -> bool {
        self.members.contains(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BaseRelation> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &RelationSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &RelationSet) -> Result<RelationSet> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.members.extend(other.members.iter().copied());
        Ok(out)
    }

    pub fn intersect(&self, other: &RelationSet) -> Result<RelationSet> {
        self.check_compatible(other)?;
        Ok(RelationSet {
            calculus: self.calculus,
            m: self.m,
            members: self.members.intersection(&other.members).copied().collect(),
        })
    }

    /// Element-wise converse of the set.
    pub fn converse(&self) -> RelationSet {
        RelationSet {
            calculus: self.calculus,
            m: self.m,
            members: self.members.iter().map(|r| r.converse()).collect(),
        }
    }

    fn check_compatible(&self, other: &RelationSet) -> Result<()> {
        if self.calculus != other.calculus || self.m != other.m {
            return Err(QsrError::Mismatch(format!(
                "relation sets of {} m={} and {} m={} are not compatible",
                self.calculus, self.m, other.calculus, other.m
            )));
        }
        Ok(())
    }

    /// Members joined by single spaces, in canonical order.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.members.iter().map(|r| r.to_string()).collect();
        parts.join(" ")
    }
}
