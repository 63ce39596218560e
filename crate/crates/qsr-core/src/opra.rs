//! The oriented-point direction calculus at adjustable granularity `m`.
//!
//! A single o-point partitions directions around it into `4m` sectors numbered
//! counterclockwise: even indices are rays (linear sectors) at multiples of
//! `π/m` starting at the heading, odd indices are the open cones between them.
//! A base relation between two o-points at different positions records the
//! sector of each point as seen from the other; coincident points record the
//! sector of the second heading relative to the first.

use std::f64::consts::PI;

use crate::error::{QsrError, Result};
use crate::geometry::{bearing, distance, normalize_angle, EOPoint, TolerancePolicy};

pub const MAX_GRANULARITY: u32 = 64;

/// Granularity parameter `m ≥ 1`; directions split into `4m` sectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Granularity(u32);

impl Granularity {
    pub fn new(m: u32) -> Result<Granularity> {
        if m < 1 || m > MAX_GRANULARITY {
            return Err(QsrError::invalid(format!(
                "granularity must be in 1..={MAX_GRANULARITY}, got {m}"
            )));
        }
        Ok(Granularity(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of direction sectors, `4m`.
    pub fn sector_count(self) -> u32 {
        4 * self.0
    }

    /// Angular spacing between consecutive rays, `π/m`.
    pub fn ray_step(self) -> f64 {
        PI / self.0 as f64
    }

    /// Number of distance classes, `2m − 1`.
    pub fn class_count(self) -> u32 {
        2 * self.0 - 1
    }
}

impl std::fmt::Display for Granularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sector names for `m = 2`, in index order.
pub const SECTOR_NAMES_M2: [&str; 8] =
    ["front", "lf", "left", "lb", "back", "rb", "right", "rf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpraKind {
    /// Points at different positions: sector `i` of B seen from A, sector `j`
    /// of A seen from B.
    Different { i: u32, j: u32 },
    /// Coincident positions: sector `s` of the second heading relative to the
    /// first. `s = 0` is the identity relation.
    Same { s: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpraRelation {
    pub m: Granularity,
    pub kind: OpraKind,
}

impl OpraRelation {
    pub fn different(m: Granularity, i: u32, j: u32) -> Result<OpraRelation> {
        let n = m.sector_count();
        if i >= n || j >= n {
            return Err(QsrError::invalid(format!(
                "sector indices must be in 0..{n}, got i={i}, j={j}"
            )));
        }
        Ok(OpraRelation {
            m,
            kind: OpraKind::Different { i, j },
        })
    }

    pub fn same(m: Granularity, s: u32) -> Result<OpraRelation> {
        let n = m.sector_count();
        if s >= n {
            return Err(QsrError::invalid(format!(
                "sector index must be in 0..{n}, got s={s}"
            )));
        }
        Ok(OpraRelation {
            m,
            kind: OpraKind::Same { s },
        })
    }

    pub fn identity(m: Granularity) -> OpraRelation {
        OpraRelation {
            m,
            kind: OpraKind::Same { s: 0 },
        }
    }
}

/// Classifies a normalized angle into one of the `4m` sectors. Angles within
/// `angle_eps` of a ray at `t·π/m` map to the linear sector `2t mod 4m`;
/// everything else falls in the enclosing open cone `2·floor(angle·m/π) + 1`.
pub fn sector_of(angle: f64, m: Granularity, tol: &TolerancePolicy) -> u32 {
    let step = m.ray_step();
    let n = m.sector_count();
    let t = (angle / step).round() as i64; // 0..=2m
    if (angle - t as f64 * step).abs() <= tol.angle_eps {
        return ((2 * t) as u32) % n;
    }
    let f = (angle / step).floor() as i64;
    let f = f.clamp(0, 2 * m.get() as i64 - 1);
    (2 * f + 1) as u32
}

/// Relative tolerance scale for deciding position coincidence.
pub(crate) fn coincidence_scale(a: &EOPoint, b: &EOPoint) -> f64 {
    let mag = a
        .position
        .x
        .abs()
        .max(a.position.y.abs())
        .max(b.position.x.abs())
        .max(b.position.y.abs());
    mag.max(1.0)
}

pub(crate) fn positions_coincide(a: &EOPoint, b: &EOPoint, tol: &TolerancePolicy) -> bool {
    distance(a.position, b.position) <= tol.length_eps_rel * coincidence_scale(a, b)
}

/// Computes the base relation holding from `a` to `b`.
pub fn relate_opra(
    a: &EOPoint,
    b: &EOPoint,
    m: Granularity,
    tol: &TolerancePolicy,
) -> OpraRelation {
    if positions_coincide(a, b, tol) {
        let rel = normalize_angle(b.heading - a.heading).expect("normalized inputs");
        OpraRelation {
            m,
            kind: OpraKind::Same {
                s: sector_of(rel, m, tol),
            },
        }
    } else {
        let ab = normalize_angle(bearing(a.position, b.position) - a.heading)
            .expect("normalized inputs");
        let ba = normalize_angle(bearing(b.position, a.position) - b.heading)
            .expect("normalized inputs");
        OpraRelation {
            m,
            kind: OpraKind::Different {
                i: sector_of(ab, m, tol),
                j: sector_of(ba, m, tol),
            },
        }
    }
}

/// The relation holding from B to A given the one from A to B. Different
/// positions swap the two sector indices; coincident positions negate the
/// relative heading sector.
pub fn converse_opra(r: &OpraRelation) -> OpraRelation {
    let n = r.m.sector_count();
    let kind = match r.kind {
        OpraKind::Different { i, j } => OpraKind::Different { i: j, j: i },
        OpraKind::Same { s } => OpraKind::Same { s: (n - s) % n },
    };
    OpraRelation { m: r.m, kind }
}

/// All base relations at granularity `m`: the `(4m)²` different-position
/// relations in lexicographic `(i, j)` order, then the `4m` same-position
/// relations by `s`.
pub fn enumerate_opra(m: Granularity) -> Vec<OpraRelation> {
    let n = m.sector_count();
    let mut out = Vec::with_capacity((n * n + n) as usize);
    for i in 0..n {
        for j in 0..n {
            out.push(OpraRelation {
                m,
                kind: OpraKind::Different { i, j },
            });
        }
    }
    for s in 0..n {
        out.push(OpraRelation {
            m,
            kind: OpraKind::Same { s },
        });
    }
    out
}

/// Position of a relation in the `enumerate_opra` order.
pub fn opra_index(r: &OpraRelation) -> usize {
    let n = r.m.sector_count() as usize;
    match r.kind {
        OpraKind::Different { i, j } => i as usize * n + j as usize,
        OpraKind::Same { s } => n * n + s as usize,
    }
}

pub fn opra_universe_size(m: Granularity) -> usize {
    let n = m.sector_count() as usize;
    n * n + n
}
