//! Acceptance gate: one test (and one printed pass/fail line) per release
//! criterion, with pinned trial counts and tolerances. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::panic::AssertUnwindSafe;
use std::path::PathBuf;
use std::time::Instant;

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use qsr_core::compose::{CompositionTable, SamplingPlan};
use qsr_core::csp::{algebraic_closure, scenario_check, ClosureStatus, ConstraintNetwork};
use qsr_core::eopra::{class_boundaries, classify_distance};
use qsr_core::geometry::{apply_similarity, distance, EOPoint, Point, TolerancePolicy};
use qsr_core::opra::Granularity;
use qsr_core::relations::{
    enumerate, identity, relate, CalculusId, RelationSet,
};
use qsr_core::csp::serialize_network;

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn m(v: u32) -> Granularity {
    Granularity::new(v).unwrap()
}

fn criterion(name: &str, f: impl FnOnce()) {
    match std::panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(()) => println!("acceptance {name}: pass"),
        Err(e) => {
            println!("acceptance {name}: fail");
            std::panic::resume_unwind(e);
        }
    }
}

struct Timed {
    table: CompositionTable,
    secs: f64,
}

fn generate_timed(calculus: CalculusId, gran: Granularity) -> Timed {
    let t0 = Instant::now();
    let table =
        CompositionTable::generate(calculus, gran, &SamplingPlan::default(), &tol()).unwrap();
    Timed {
        table,
        secs: t0.elapsed().as_secs_f64(),
    }
}

static OPRA2: Lazy<Timed> = Lazy::new(|| generate_timed(CalculusId::Opra, m(2)));
static EOPRA2: Lazy<Timed> = Lazy::new(|| generate_timed(CalculusId::Eopra, m(2)));

fn shipped_table_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../tables")
        .join(name)
}

fn random_point(rng: &mut ChaCha8Rng) -> EOPoint {
    EOPoint {
        position: Point {
            x: rng.gen_range(-10.0..10.0),
            y: rng.gen_range(-10.0..10.0),
        },
        heading: rng.gen_range(0.0..TAU),
        elevation: rng.gen_range(0.1f64.ln()..10.0f64.ln()).exp(),
    }
}

#[test]
fn base_relation_count() {
    criterion("base-relation-count", || {
        let t0 = Instant::now();
        let rels = enumerate(CalculusId::Opra, m(2));
        let secs = t0.elapsed().as_secs_f64();
        assert_eq!(rels.len(), 72);
        assert!(secs < 1.0, "enumeration took {secs}s");
    });
}

#[test]
fn identity_relation() {
    criterion("identity-relation", || {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let id = identity(CalculusId::Opra, m(2));
        assert_eq!(id.to_string(), "2:s0");
        for _ in 0..10_000 {
            let a = random_point(&mut rng);
            assert_eq!(relate(CalculusId::Opra, &a, &a, m(2), &tol()), id);
        }
    });
}

#[test]
fn distance_definition_equivalence() {
    criterion("distance-definition-equivalence", || {
        let t = tol();
        // direct transcription of the m = 2 three-way comparison block
        let side = |d: f64, delta: f64| {
            if d < delta {
                0u32
            } else if d == delta {
                1
            } else {
                2
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let mut checked = 0u32;
        while checked < 100_000 {
            let da = rng.gen_range(0.01f64.ln()..100.0f64.ln()).exp();
            let db = rng.gen_range(0.01f64.ln()..100.0f64.ln()).exp();
            let d = rng.gen_range(0.01f64.ln()..100.0f64.ln()).exp();
            // boundary-pinned cases are tested exactly below
            if (d - da).abs() <= 10.0 * t.length_eps_rel * da
                || (d - db).abs() <= 10.0 * t.length_eps_rel * db
            {
                continue;
            }
            let k = classify_distance(d, da, m(2), &t).unwrap().0;
            let l = classify_distance(d, db, m(2), &t).unwrap().0;
            assert_eq!((k, l), (side(d, da), side(d, db)), "da={da} db={db} d={d}");
            checked += 1;
        }
        // exact boundary inputs: distance equal to the elevation is `equal`
        for delta in [0.25, 1.0, 2.0, 37.5] {
            assert_eq!(classify_distance(delta, delta, m(2), &t).unwrap().0, 1);
        }
    });
}

#[test]
fn m4_boundary_radii() {
    criterion("m4-boundary-radii", || {
        let got = class_boundaries(1.0, m(4)).unwrap();
        let want = [2f64.sqrt() - 1.0, 1.0, 2f64.sqrt() + 1.0];
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "boundary {g} vs {w}");
        }
    });
}

#[test]
fn jepd() {
    criterion("jepd", || {
        for calc in CalculusId::ALL {
            for mv in [1u32, 2, 4] {
                let gran = m(mv);
                let universe = enumerate(calc, gran);
                let mut rng = ChaCha8Rng::seed_from_u64(103 + mv as u64);
                for _ in 0..100_000 {
                    let a = random_point(&mut rng);
                    let b = random_point(&mut rng);
                    // totality: relate never panics and yields an indexable
                    // member of the enumerated universe (joint exhaustiveness
                    // plus pairwise disjointness via the unique index)
                    let r = relate(calc, &a, &b, gran, &tol());
                    assert_eq!(universe[r.index()], r);
                }
            }
        }
    });
}

#[test]
fn converse_laws() {
    criterion("converse-laws", || {
        for calc in CalculusId::ALL {
            for mv in [1u32, 2, 4] {
                for r in enumerate(calc, m(mv)) {
                    assert_eq!(r.converse().converse(), r, "involution at {r}");
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(104);
            for _ in 0..100_000 {
                let a = random_point(&mut rng);
                let b = random_point(&mut rng);
                let ab = relate(calc, &a, &b, m(2), &tol());
                assert_eq!(ab.converse(), relate(calc, &b, &a, m(2), &tol()));
            }
        }
    });
}

/// True when the configuration sits within `margin` of a qualitative
/// boundary of the relative-direction sectors or the distance circles.
fn near_boundary(a: &EOPoint, b: &EOPoint, gran: Granularity, with_classes: bool) -> bool {
    let t = tol();
    let step = gran.ray_step();
    let d = distance(a.position, b.position);
    let angle_margin = 10.0 * t.angle_eps;
    let len_margin = 10.0 * t.length_eps_rel;
    if d <= len_margin * a.position.x.abs().max(a.position.y.abs()).max(1.0) {
        return true;
    }
    for (from, to) in [(a, b), (b, a)] {
        let bearing = (to.position.y - from.position.y).atan2(to.position.x - from.position.x);
        let rel = (bearing - from.heading).rem_euclid(TAU);
        let off = (rel / step).fract().min(1.0 - (rel / step).fract()) * step;
        if off <= angle_margin {
            return true;
        }
        if with_classes && gran.get() > 1 {
            for bnd in class_boundaries(from.elevation, gran).unwrap() {
                if (d - bnd).abs() <= len_margin * bnd {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn similarity_invariance() {
    criterion("similarity-invariance", || {
        for (calc, with_classes) in [(CalculusId::Opra, false), (CalculusId::Eopra, true)] {
            let mut rng = ChaCha8Rng::seed_from_u64(105);
            let mut checked = 0u32;
            while checked < 10_000 {
                let a = random_point(&mut rng);
                let b = random_point(&mut rng);
                if near_boundary(&a, &b, m(2), with_classes) {
                    continue;
                }
                let rotation = rng.gen_range(0.0..TAU);
                let scale = rng.gen_range(0.1f64.ln()..10.0f64.ln()).exp();
                let shift = Point {
                    x: rng.gen_range(-50.0..50.0),
                    y: rng.gen_range(-50.0..50.0),
                };
                let ta = apply_similarity(&a, rotation, shift, scale).unwrap();
                let tb = apply_similarity(&b, rotation, shift, scale).unwrap();
                assert_eq!(
                    relate(calc, &a, &b, m(2), &tol()),
                    relate(calc, &ta, &tb, m(2), &tol()),
                    "transform rot={rotation} scale={scale}"
                );
                checked += 1;
            }
        }
    });
}

#[test]
fn composition_soundness() {
    criterion("composition-soundness", || {
        assert!(
            OPRA2.secs < 60.0,
            "opra m=2 generation took {:.1}s",
            OPRA2.secs
        );
        assert!(
            EOPRA2.secs < 900.0,
            "eopra m=2 generation took {:.1}s",
            EOPRA2.secs
        );
        for (timed, file) in [(&*OPRA2, "opra-2.tbl"), (&*EOPRA2, "eopra-2.tbl")] {
            let shipped = std::fs::read_to_string(shipped_table_path(file))
                .unwrap_or_else(|e| panic!("shipped table {file}: {e}"));
            assert_eq!(shipped, timed.table.to_text(), "{file} is out of date");
            let report = timed.table.verify(100_000, 20_260_823, &tol()).unwrap();
            assert!(
                report.violations.is_empty(),
                "{file}: {} violations",
                report.violations.len()
            );
        }
    });
}

#[test]
fn table_determinism_and_monotonicity() {
    criterion("table-determinism-and-monotonicity", || {
        let again =
            CompositionTable::generate(CalculusId::Opra, m(2), &SamplingPlan::default(), &tol())
                .unwrap();
        assert_eq!(again.to_text(), OPRA2.table.to_text());

        let d2 = CompositionTable::generate(
            CalculusId::Opra,
            m(2),
            &SamplingPlan::new(2, 42, 8.0).unwrap(),
            &tol(),
        )
        .unwrap();
        let d4 = CompositionTable::generate(
            CalculusId::Opra,
            m(2),
            &SamplingPlan::new(4, 42, 8.0).unwrap(),
            &tol(),
        )
        .unwrap();
        for r in 0..72 {
            for s in 0..72 {
                let small = d2.entry_indices(r, s);
                let big = d4.entry_indices(r, s);
                assert!(
                    small.iter().all(|t| big.binary_search(t).is_ok()),
                    "entry ({r}, {s}) shrank when the density rose"
                );
            }
        }
    });
}

fn witness_network(points: &[EOPoint], names: &[&str]) -> ConstraintNetwork {
    let mut net = ConstraintNetwork::new(CalculusId::Opra, m(2));
    for n in names {
        net.add_node(n).unwrap();
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let r = relate(CalculusId::Opra, &points[i], &points[j], m(2), &tol());
            net.set_constraint(names[i], names[j], RelationSet::singleton(r))
                .unwrap();
        }
    }
    net
}

#[test]
fn closure_behavior() {
    criterion("closure-behavior", || {
        let table = &OPRA2.table;

        // two coincidences forced onto distinct positions contradict
        let mut chain = ConstraintNetwork::new(CalculusId::Opra, m(2));
        for n in ["A", "B", "C"] {
            chain.add_node(n).unwrap();
        }
        let id = RelationSet::singleton(identity(CalculusId::Opra, m(2)));
        chain.set_constraint("A", "B", id.clone()).unwrap();
        chain.set_constraint("B", "C", id).unwrap();
        chain
            .set_constraint(
                "A",
                "C",
                RelationSet::singleton(
                    qsr_core::relations::parse_relation(CalculusId::Opra, "2:0-0").unwrap(),
                ),
            )
            .unwrap();
        assert_eq!(
            algebraic_closure(&chain, table).unwrap().status,
            ClosureStatus::Inconsistent
        );

        // scenarios read off real configurations survive closure
        let mut rng = ChaCha8Rng::seed_from_u64(106);
        for _ in 0..1_000 {
            let pts: Vec<EOPoint> = (0..3).map(|_| random_point(&mut rng)).collect();
            let net = witness_network(&pts, &["A", "B", "C"]);
            assert_eq!(
                scenario_check(&net, table).unwrap(),
                ClosureStatus::ConsistentSoFar
            );
        }

        // idempotence and node-order confluence over a widened corpus
        let names = ["A", "B", "C", "D"];
        let universe = enumerate(CalculusId::Opra, m(2));
        for _ in 0..50 {
            let pts: Vec<EOPoint> = (0..4).map(|_| random_point(&mut rng)).collect();
            let mut forward = ConstraintNetwork::new(CalculusId::Opra, m(2));
            let mut backward = ConstraintNetwork::new(CalculusId::Opra, m(2));
            for n in names {
                forward.add_node(n).unwrap();
            }
            for n in names.iter().rev() {
                backward.add_node(n).unwrap();
            }
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let mut set = RelationSet::singleton(relate(
                        CalculusId::Opra,
                        &pts[i],
                        &pts[j],
                        m(2),
                        &tol(),
                    ));
                    for _ in 0..rng.gen_range(0..3) {
                        set.insert(universe[rng.gen_range(0..universe.len())])
                            .unwrap();
                    }
                    forward.set_constraint(names[i], names[j], set.clone()).unwrap();
                    backward.set_constraint(names[j], names[i], set.converse()).unwrap();
                }
            }
            let fwd = algebraic_closure(&forward, table).unwrap();
            let bwd = algebraic_closure(&backward, table).unwrap();
            assert_eq!(fwd.status, bwd.status, "status depends on node order");
            if fwd.status == ClosureStatus::ConsistentSoFar {
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        let fi = fwd.network.node_index(names[i]).unwrap();
                        let fj = fwd.network.node_index(names[j]).unwrap();
                        let bi = bwd.network.node_index(names[i]).unwrap();
                        let bj = bwd.network.node_index(names[j]).unwrap();
                        assert_eq!(
                            fwd.network.constraint(fi, fj),
                            bwd.network.constraint(bi, bj),
                            "pair {} {} depends on node order",
                            names[i],
                            names[j]
                        );
                    }
                }
                let twice = algebraic_closure(&fwd.network, table).unwrap();
                assert!(twice.trace.is_empty(), "closure is not idempotent");
                assert_eq!(
                    serialize_network(&twice.network),
                    serialize_network(&fwd.network)
                );
            }
        }
    });
}
