//! The star calculus: absolute direction sectors induced by a bundle of `m`
//! reference lines through each point, plus the elevation-augmented variant
//! that attaches the binary distance classes to the absolute sectors.
//!
//! Headings play no role here; orientation is the concern of the o-point
//! calculus. The elevated variant keeps only position and elevation.

use std::f64::consts::PI;

use crate::eopra::{classify_distance, DistanceClass};
use crate::error::{QsrError, Result};
use crate::geometry::{bearing, distance, EOPoint, Point, TolerancePolicy};
use crate::opra::{positions_coincide, Granularity};

/// A reference frame of `m` undirected lines through every point, given by
/// their angles in `[0, π)`. Each line contributes a ray and its opposite, so
/// the frame induces `4m` sectors: `2m` rays (even indices) and the `2m` open
/// cones between them (odd indices), numbered counterclockwise from the ray
/// of the first axis.
#[derive(Clone, Debug, PartialEq)]
pub struct StarFrame {
    m: Granularity,
    axis_angles: Vec<f64>,
}

impl StarFrame {
    /// The equally-spaced frame with axes at `t·π/m`; the only frame supported
    /// by composition-table generation.
    pub fn with_default_axes(m: Granularity) -> StarFrame {
        let step = PI / m.get() as f64;
        StarFrame {
            m,
            axis_angles: (0..m.get()).map(|t| t as f64 * step).collect(),
        }
    }

    pub fn new(m: Granularity, axis_angles: Vec<f64>) -> Result<StarFrame> {
        if axis_angles.len() != m.get() as usize {
            return Err(QsrError::invalid(format!(
                "expected {} axis angles, got {}",
                m.get(),
                axis_angles.len()
            )));
        }
        for w in axis_angles.windows(2) {
            if w[0] >= w[1] {
                return Err(QsrError::invalid(
                    "axis angles must be strictly ascending",
                ));
            }
        }
        if let (Some(first), Some(last)) = (axis_angles.first(), axis_angles.last()) {
            if !(*first >= 0.0 && *last < PI) {
                return Err(QsrError::invalid("axis angles must lie in [0, π)"));
            }
        }
        Ok(StarFrame { m, axis_angles })
    }

    pub fn m(&self) -> Granularity {
        self.m
    }

    pub fn axis_angles(&self) -> &[f64] {
        &self.axis_angles
    }

    pub fn is_default(&self) -> bool {
        let step = PI / self.m.get() as f64;
        self.axis_angles
            .iter()
            .enumerate()
            .all(|(t, a)| (a - t as f64 * step).abs() <= 1e-12)
    }

    /// Sector index of an absolute bearing within this frame.
    pub fn sector_of_bearing(&self, bearing: f64, tol: &TolerancePolicy) -> u32 {
        let m = self.m.get() as usize;
        let n = 4 * m as u32;
        // the 2m rays, ascending in [0, 2π)
        let ray = |r: usize| {
            if r < m {
                self.axis_angles[r]
            } else {
                self.axis_angles[r - m] + PI
            }
        };
        for r in 0..2 * m {
            let gap = crate::geometry::angle_gap(bearing, ray(r));
            if gap <= tol.angle_eps {
                return 2 * r as u32;
            }
        }
        // count rays at or below the bearing; none means we wrapped past the
        // last ray into the cone ending at the first ray
        let mut below = 0usize;
        for r in 0..2 * m {
            if ray(r) < bearing {
                below += 1;
            }
        }
        if below == 0 {
            n - 1
        } else {
            (2 * below - 1) as u32
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StarKind {
    Different { d: u32 },
    Same,
}

/// Absolute-direction base relation. The frame is context, not identity: two
/// relations with the same sector index are the same relation regardless of
/// which frame produced them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StarRelation {
    pub m: Granularity,
    pub kind: StarKind,
}

impl StarRelation {
    pub fn different(m: Granularity, d: u32) -> Result<StarRelation> {
        if d >= m.sector_count() {
            return Err(QsrError::invalid(format!(
                "sector index must be in 0..{}, got {d}",
                m.sector_count()
            )));
        }
        Ok(StarRelation {
            m,
            kind: StarKind::Different { d },
        })
    }

    pub fn same(m: Granularity) -> StarRelation {
        StarRelation {
            m,
            kind: StarKind::Same,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EstarKind {
    Different {
        d: u32,
        k: DistanceClass,
        l: DistanceClass,
    },
    Same,
}

/// Elevated star base relation: absolute sector plus a distance class against
/// each point's elevation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EstarRelation {
    pub m: Granularity,
    pub kind: EstarKind,
}

impl EstarRelation {
    pub fn different(m: Granularity, d: u32, k: u32, l: u32) -> Result<EstarRelation> {
        if d >= m.sector_count() {
            return Err(QsrError::invalid(format!(
                "sector index must be in 0..{}, got {d}",
                m.sector_count()
            )));
        }
        let nc = m.class_count();
        if k >= nc || l >= nc {
            return Err(QsrError::invalid(format!(
                "distance classes must be in 0..{nc}, got k={k}, l={l}"
            )));
        }
        Ok(EstarRelation {
            m,
            kind: EstarKind::Different {
                d,
                k: DistanceClass(k),
                l: DistanceClass(l),
            },
        })
    }

    pub fn same(m: Granularity) -> EstarRelation {
        EstarRelation {
            m,
            kind: EstarKind::Same,
        }
    }
}

/// Absolute-direction relation between two plain points.
pub fn relate_star(a: Point, b: Point, frame: &StarFrame, tol: &TolerancePolicy) -> StarRelation {
    let mag = a.x.abs().max(a.y.abs()).max(b.x.abs()).max(b.y.abs()).max(1.0);
    if distance(a, b) <= tol.length_eps_rel * mag {
        return StarRelation::same(frame.m);
    }
    StarRelation {
        m: frame.m,
        kind: StarKind::Different {
            d: frame.sector_of_bearing(bearing(a, b), tol),
        },
    }
}

/// Elevated variant: absolute sector of the bearing plus distance classes
/// against both elevations. Headings are ignored.
pub fn relate_estar(
    a: &EOPoint,
    b: &EOPoint,
    frame: &StarFrame,
    tol: &TolerancePolicy,
) -> EstarRelation {
    if positions_coincide(a, b, tol) {
        return EstarRelation::same(frame.m);
    }
    let d = distance(a.position, b.position);
    let m = frame.m;
    EstarRelation {
        m,
        kind: EstarKind::Different {
            d: frame.sector_of_bearing(bearing(a.position, b.position), tol),
            k: classify_distance(d, a.elevation, m, tol).expect("positive distance and elevation"),
            l: classify_distance(d, b.elevation, m, tol).expect("positive distance and elevation"),
        },
    }
}

/// Opposite bearing: `d → (d + 2m) mod 4m`.
pub fn converse_star(r: &StarRelation) -> StarRelation {
    let n = r.m.sector_count();
    let kind = match r.kind {
        StarKind::Different { d } => StarKind::Different { d: (d + n / 2) % n },
        StarKind::Same => StarKind::Same,
    };
    StarRelation { m: r.m, kind }
}

/// Opposite bearing with the distance classes swapped.
pub fn converse_estar(r: &EstarRelation) -> EstarRelation {
    let n = r.m.sector_count();
    let kind = match r.kind {
        EstarKind::Different { d, k, l } => EstarKind::Different {
            d: (d + n / 2) % n,
            k: l,
            l: k,
        },
        EstarKind::Same => EstarKind::Same,
    };
    EstarRelation { m: r.m, kind }
}

pub fn enumerate_star(m: Granularity) -> Vec<StarRelation> {
    let n = m.sector_count();
    let mut out: Vec<StarRelation> = (0..n)
        .map(|d| StarRelation {
            m,
            kind: StarKind::Different { d },
        })
        .collect();
    out.push(StarRelation::same(m));
    out
}

pub fn star_index(r: &StarRelation) -> usize {
    match r.kind {
        StarKind::Different { d } => d as usize,
        StarKind::Same => r.m.sector_count() as usize,
    }
}

pub fn star_universe_size(m: Granularity) -> usize {
    m.sector_count() as usize + 1
}

pub fn enumerate_estar(m: Granularity) -> Vec<EstarRelation> {
    let n = m.sector_count();
    let nc = m.class_count();
    let mut out = Vec::with_capacity((n * nc * nc + 1) as usize);
    for d in 0..n {
        for k in 0..nc {
            for l in 0..nc {
                out.push(EstarRelation {
                    m,
                    kind: EstarKind::Different {
                        d,
                        k: DistanceClass(k),
                        l: DistanceClass(l),
                    },
                });
            }
        }
    }
    out.push(EstarRelation::same(m));
    out
}

pub fn estar_index(r: &EstarRelation) -> usize {
    let nc = r.m.class_count() as usize;
    match r.kind {
        EstarKind::Different { d, k, l } => (d as usize * nc + k.0 as usize) * nc + l.0 as usize,
        EstarKind::Same => r.m.sector_count() as usize * nc * nc,
    }
}

pub fn estar_universe_size(m: Granularity) -> usize {
    let nc = m.class_count() as usize;
    m.sector_count() as usize * nc * nc + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::apply_similarity;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn m(v: u32) -> Granularity {
        Granularity::new(v).unwrap()
    }

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y).unwrap()
    }

    #[test]
    fn relate_default_frame_examples() {
        let frame = StarFrame::with_default_axes(m(2));
        let r = relate_star(pt(0.0, 0.0), pt(1.0, 0.0), &frame, &tol());
        assert_eq!(r.kind, StarKind::Different { d: 0 });
        let r = relate_star(pt(0.0, 0.0), pt(1.0, 1.0), &frame, &tol());
        assert_eq!(r.kind, StarKind::Different { d: 1 });
        let r = relate_star(pt(2.0, 3.0), pt(2.0, 3.0), &frame, &tol());
        assert_eq!(r.kind, StarKind::Same);
    }

    #[test]
    fn arbitrary_frame_sectors() {
        // axes at 30° and 120°: rays at 30°, 120°, 210°, 300°
        let frame = StarFrame::new(m(2), vec![PI / 6.0, 2.0 * PI / 3.0]).unwrap();
        assert!(!frame.is_default());
        let r = relate_star(pt(0.0, 0.0), pt((PI / 6.0).cos(), (PI / 6.0).sin()), &frame, &tol());
        assert_eq!(r.kind, StarKind::Different { d: 0 });
        // bearing 0° is below the first ray: wraps into the last cone
        let r = relate_star(pt(0.0, 0.0), pt(1.0, 0.0), &frame, &tol());
        assert_eq!(r.kind, StarKind::Different { d: 7 });
    }

    #[test]
    fn frame_validation() {
        assert!(StarFrame::new(m(2), vec![0.0]).is_err());
        assert!(StarFrame::new(m(2), vec![1.0, 0.5]).is_err());
        assert!(StarFrame::new(m(2), vec![0.0, PI]).is_err());
        assert!(StarFrame::new(m(2), vec![-0.1, 0.5]).is_err());
    }

    #[test]
    fn converse_examples() {
        let r = StarRelation::different(m(2), 0).unwrap();
        assert_eq!(converse_star(&r).kind, StarKind::Different { d: 4 });
        let r = StarRelation::different(m(2), 1).unwrap();
        assert_eq!(converse_star(&r).kind, StarKind::Different { d: 5 });
        let e = EstarRelation::different(m(2), 1, 0, 2).unwrap();
        assert_eq!(converse_estar(&e), EstarRelation::different(m(2), 5, 2, 0).unwrap());
    }

    #[test]
    fn estar_elevation_figure_geometry() {
        // δ_A = 2, δ_B = 0.5, B at bearing 45° and distance 1
        let frame = StarFrame::with_default_axes(m(2));
        let a = EOPoint::from_coords(0.0, 0.0, 0.0, 2.0).unwrap();
        let b = EOPoint::from_coords((PI / 4.0).cos(), (PI / 4.0).sin(), 0.0, 0.5).unwrap();
        let r = relate_estar(&a, &b, &frame, &tol());
        assert_eq!(
            r.kind,
            EstarKind::Different {
                d: 1,
                k: DistanceClass(0),
                l: DistanceClass(2),
            }
        );
        // equal elevations at the shared distance give equal on both sides
        let a = EOPoint::from_coords(0.0, 0.0, 0.0, 1.0).unwrap();
        let b = EOPoint::from_coords(1.0, 0.0, 0.0, 1.0).unwrap();
        let r = relate_estar(&a, &b, &frame, &tol());
        assert_eq!(
            r.kind,
            EstarKind::Different {
                d: 0,
                k: DistanceClass(1),
                l: DistanceClass(1),
            }
        );
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_star(m(2)).len(), 9);
        assert_eq!(enumerate_estar(m(2)).len(), 73);
        for mv in [1u32, 2, 4] {
            let m = Granularity::new(mv).unwrap();
            for (idx, r) in enumerate_star(m).iter().enumerate() {
                assert_eq!(star_index(r), idx);
            }
            for (idx, r) in enumerate_estar(m).iter().enumerate() {
                assert_eq!(estar_index(r), idx);
            }
            assert_eq!(enumerate_star(m).len(), star_universe_size(m));
            assert_eq!(enumerate_estar(m).len(), estar_universe_size(m));
        }
    }

    proptest! {
        #[test]
        fn converse_matches_swapped_arguments(
            ax in -10.0f64..10.0, ay in -10.0f64..10.0, ae in 0.1f64..10.0,
            bx in -10.0f64..10.0, by in -10.0f64..10.0, be in 0.1f64..10.0,
            mv in 1u32..=4,
        ) {
            let frame = StarFrame::with_default_axes(Granularity::new(mv).unwrap());
            let t = tol();
            let a = pt(ax, ay);
            let b = pt(bx, by);
            let ab = relate_star(a, b, &frame, &t);
            prop_assert_eq!(converse_star(&converse_star(&ab)), ab);
            prop_assert_eq!(converse_star(&ab), relate_star(b, a, &frame, &t));

            let ea = EOPoint::new(a, 0.0, ae).unwrap();
            let eb = EOPoint::new(b, 0.0, be).unwrap();
            let eab = relate_estar(&ea, &eb, &frame, &t);
            prop_assert_eq!(converse_estar(&converse_estar(&eab)), eab);
            prop_assert_eq!(converse_estar(&eab), relate_estar(&eb, &ea, &frame, &t));
        }

        #[test]
        fn translation_scale_invariant_but_half_turn_converses(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0, ae in 0.1f64..10.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0, be in 0.1f64..10.0,
            tx in -5.0f64..5.0, ty in -5.0f64..5.0,
            scale in 0.1f64..10.0,
        ) {
            let frame = StarFrame::with_default_axes(m(2));
            let t = tol();
            let ea = EOPoint::from_coords(ax, ay, 0.0, ae).unwrap();
            let eb = EOPoint::from_coords(bx, by, 0.0, be).unwrap();
            let shift = Point::new(tx, ty).unwrap();
            let base = relate_estar(&ea, &eb, &frame, &t);

            let ta = apply_similarity(&ea, 0.0, shift, scale).unwrap();
            let tb = apply_similarity(&eb, 0.0, shift, scale).unwrap();
            prop_assert_eq!(relate_estar(&ta, &tb, &frame, &t), base);

            // rotating the configuration by π flips the absolute sector to its
            // converse direction while keeping each side's distance class
            let ra = apply_similarity(&ea, PI, Point::ORIGIN, 1.0).unwrap();
            let rb = apply_similarity(&eb, PI, Point::ORIGIN, 1.0).unwrap();
            let rot = relate_estar(&ra, &rb, &frame, &t);
            match (base.kind, rot.kind) {
                (EstarKind::Same, EstarKind::Same) => {}
                (EstarKind::Different { d, k, l }, EstarKind::Different { d: rd, k: rk, l: rl }) => {
                    prop_assert_eq!(rd, (d + 4) % 8);
                    prop_assert_eq!(rk, k);
                    prop_assert_eq!(rl, l);
                }
                other => prop_assert!(false, "kind changed under rotation: {:?}", other),
            }
        }

        #[test]
        fn jepd_fixed_frame(
            ax in -10.0f64..10.0, ay in -10.0f64..10.0,
            bx in -10.0f64..10.0, by in -10.0f64..10.0,
            mv in 1u32..=4,
        ) {
            let m = Granularity::new(mv).unwrap();
            let frame = StarFrame::with_default_axes(m);
            let r = relate_star(pt(ax, ay), pt(bx, by), &frame, &tol());
            prop_assert!(star_index(&r) < star_universe_size(m));
        }
    }
}
