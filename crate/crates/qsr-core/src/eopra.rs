//! Elevated o-points: the direction calculus augmented with granular distance
//! classes derived from each point's elevation.
//!
//! At granularity `m` the plane around a point with elevation `δ` splits into
//! `2m − 1` distance classes: `m − 1` boundary circles at radii
//! `δ·cot(t·π/(2m))` (equal depression-angle steps seen from height `δ`,
//! odd class indices) and the `m` open annuli between them (even indices).
//! For `m = 2` the classes are named close (0), equal (1) and distant (2),
//! reproducing the three-way comparison of `|A−B|` against `δ`.

use crate::error::{QsrError, Result};
use crate::geometry::{bearing, distance, normalize_angle, EOPoint, Point, TolerancePolicy};
use crate::opra::{positions_coincide, sector_of, Granularity};

/// Distance class names for `m = 2`, in index order.
pub const DISTANCE_NAMES_M2: [&str; 3] = ["close", "equal", "distant"];

/// A distance class index in `0..=2m−2`; even = open annulus, odd = boundary
/// circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistanceClass(pub u32);

impl DistanceClass {
    pub fn is_circle(self) -> bool {
        self.0 % 2 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EopraKind {
    /// `(i, k)` as seen from the first point, `(j, l)` from the second:
    /// sector plus distance class on each side.
    Different {
        i: u32,
        k: DistanceClass,
        j: u32,
        l: DistanceClass,
    },
    /// Coincident positions carry only the relative heading sector; at
    /// distance zero both sides are trivially in the closest class.
    Same { s: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EopraRelation {
    pub m: Granularity,
    pub kind: EopraKind,
}

impl EopraRelation {
    pub fn different(m: Granularity, i: u32, k: u32, j: u32, l: u32) -> Result<EopraRelation> {
        let n = m.sector_count();
        let nc = m.class_count();
        if i >= n || j >= n {
            return Err(QsrError::invalid(format!(
                "sector indices must be in 0..{n}, got i={i}, j={j}"
            )));
        }
        if k >= nc || l >= nc {
            return Err(QsrError::invalid(format!(
                "distance classes must be in 0..{nc}, got k={k}, l={l}"
            )));
        }
        Ok(EopraRelation {
            m,
            kind: EopraKind::Different {
                i,
                k: DistanceClass(k),
                j,
                l: DistanceClass(l),
            },
        })
    }

    pub fn same(m: Granularity, s: u32) -> Result<EopraRelation> {
        let n = m.sector_count();
        if s >= n {
            return Err(QsrError::invalid(format!(
                "sector index must be in 0..{n}, got s={s}"
            )));
        }
        Ok(EopraRelation {
            m,
            kind: EopraKind::Same { s },
        })
    }

    pub fn identity(m: Granularity) -> EopraRelation {
        EopraRelation {
            m,
            kind: EopraKind::Same { s: 0 },
        }
    }
}

/// Radii of the `m − 1` boundary circles around a point with the given
/// elevation, ascending: `δ·cot(t·π/(2m))` for `t = m−1` down to `1`.
pub fn class_boundaries(elevation: f64, m: Granularity) -> Result<Vec<f64>> {
    if !elevation.is_finite() || elevation <= 0.0 {
        return Err(QsrError::invalid(format!(
            "elevation must be finite and strictly positive, got {elevation}"
        )));
    }
    let mm = m.get();
    let mut out = Vec::with_capacity(mm as usize - 1);
    for t in (1..mm).rev() {
        if 2 * t == mm {
            // cot(π/4) = 1 exactly; cos/sin differ by one ulp at this angle
            out.push(elevation);
            continue;
        }
        let angle = t as f64 * std::f64::consts::PI / (2.0 * mm as f64);
        out.push(elevation * angle.cos() / angle.sin());
    }
    Ok(out)
}

/// Classifies a positive distance against the boundary circles of a point
/// with the given elevation. Distances within relative tolerance of a circle
/// fall on the circle (odd class); otherwise the enclosing annulus (even).
pub fn classify_distance(
    d: f64,
    elevation: f64,
    m: Granularity,
    tol: &TolerancePolicy,
) -> Result<DistanceClass> {
    if !d.is_finite() || d <= 0.0 {
        return Err(QsrError::invalid(format!(
            "distance must be finite and strictly positive, got {d}"
        )));
    }
    let bs = class_boundaries(elevation, m)?;
    for (u, b) in bs.iter().enumerate() {
        if (d - b).abs() <= tol.length_eps_rel * b {
            return Ok(DistanceClass(2 * u as u32 + 1));
        }
    }
    let mut c = 0;
    for b in &bs {
        if d > *b {
            c += 2;
        }
    }
    Ok(DistanceClass(c))
}

/// Computes the combined direction-and-distance base relation from `a` to `b`.
pub fn relate_eopra(
    a: &EOPoint,
    b: &EOPoint,
    m: Granularity,
    tol: &TolerancePolicy,
) -> EopraRelation {
    if positions_coincide(a, b, tol) {
        let rel = normalize_angle(b.heading - a.heading).expect("normalized inputs");
        return EopraRelation {
            m,
            kind: EopraKind::Same {
                s: sector_of(rel, m, tol),
            },
        };
    }
    let d = distance(a.position, b.position);
    let ab =
        normalize_angle(bearing(a.position, b.position) - a.heading).expect("normalized inputs");
    let ba =
        normalize_angle(bearing(b.position, a.position) - b.heading).expect("normalized inputs");
    let k = classify_distance(d, a.elevation, m, tol).expect("positive distance and elevation");
    let l = classify_distance(d, b.elevation, m, tol).expect("positive distance and elevation");
    EopraRelation {
        m,
        kind: EopraKind::Different {
            i: sector_of(ab, m, tol),
            k,
            j: sector_of(ba, m, tol),
            l,
        },
    }
}

/// Swaps the two viewpoints: `(i,k,j,l) → (j,l,i,k)`, same-position sectors
/// negate as in the plain direction calculus.
pub fn converse_eopra(r: &EopraRelation) -> EopraRelation {
    let n = r.m.sector_count();
    let kind = match r.kind {
        EopraKind::Different { i, k, j, l } => EopraKind::Different {
            i: j,
            k: l,
            j: i,
            l: k,
        },
        EopraKind::Same { s } => EopraKind::Same { s: (n - s) % n },
    };
    EopraRelation { m: r.m, kind }
}

/// Calibrates an eo-point against a reference position: the elevation becomes
/// the distance to that position, so the reference sits exactly on the `equal`
/// boundary circle.
pub fn calibrate(a: &EOPoint, b: Point) -> Result<EOPoint> {
    let d = distance(a.position, b);
    if d <= 0.0 {
        return Err(QsrError::invalid(
            "cannot calibrate against a coincident position (elevation would be zero)",
        ));
    }
    EOPoint::new(a.position, a.heading, d)
}

/// All base relations at granularity `m`: different-position relations in
/// lexicographic `(i, k, j, l)` order, then same-position relations by `s`.
pub fn enumerate_eopra(m: Granularity) -> Vec<EopraRelation> {
    let n = m.sector_count();
    let nc = m.class_count();
    let total = (n * n * nc * nc + n) as usize;
    let mut out = Vec::with_capacity(total);
    for i in 0..n {
        for k in 0..nc {
            for j in 0..n {
                for l in 0..nc {
                    out.push(EopraRelation {
                        m,
                        kind: EopraKind::Different {
                            i,
                            k: DistanceClass(k),
                            j,
                            l: DistanceClass(l),
                        },
                    });
                }
            }
        }
    }
    for s in 0..n {
        out.push(EopraRelation {
            m,
            kind: EopraKind::Same { s },
        });
    }
    out
}

/// Position of a relation in the `enumerate_eopra` order.
pub fn eopra_index(r: &EopraRelation) -> usize {
    let n = r.m.sector_count() as usize;
    let nc = r.m.class_count() as usize;
    match r.kind {
        EopraKind::Different { i, k, j, l } => {
            ((i as usize * nc + k.0 as usize) * n + j as usize) * nc + l.0 as usize
        }
        EopraKind::Same { s } => n * n * nc * nc + s as usize,
    }
}

pub fn eopra_universe_size(m: Granularity) -> usize {
    let n = m.sector_count() as usize;
    let nc = m.class_count() as usize;
    n * n * nc * nc + n
}
