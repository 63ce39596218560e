//! Condensed-semantics composition tables: generation by qualitative-triangle
//! enumeration, converse-duality symmetrization, Monte-Carlo soundness
//! verification, and the line-oriented persistence format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::eopra::class_boundaries;
use crate::error::{QsrError, Result};
use crate::geometry::{bearing, distance, EOPoint, Point, TolerancePolicy};
use crate::opra::Granularity;
use crate::relations::{
    enumerate, parse_relation, relate_with_frame, BaseRelation, CalculusId,
    RelationSet,
};
use crate::star::StarFrame;

use super::sampling::{representatives, SamplingPlan};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableMeta {
    pub density: u32,
    pub seed: u64,
    /// True when the raw sampled table was asymmetric under converse duality
    /// and had to be closed.
    pub symmetrized: bool,
}

/// A complete composition table: one entry (a set of base relations) for every
/// ordered pair of base relations of one calculus at one granularity.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionTable {
    calculus: CalculusId,
    m: Granularity,
    relations: Vec<BaseRelation>,
    /// `n*n` sorted index lists, row-major in `(r, s)`.
    entries: Vec<Vec<u32>>,
    meta: TableMeta,
}

fn word_count(n: usize) -> usize {
    (n + 63) / 64
}

fn bits_to_indices(bits: &[u64]) -> Vec<u32> {
    let mut out = Vec::new();
    for (w, word) in bits.iter().enumerate() {
        let mut word = *word;
        while word != 0 {
            let b = word.trailing_zeros();
            out.push((w * 64) as u32 + b);
            word &= word - 1;
        }
    }
    out
}

impl CompositionTable {
    /// Generates the table for a supported calculus. The absolute calculi use
    /// the default equally-spaced frame; arbitrary frames are unsupported.
    pub fn generate(
        calculus: CalculusId,
        m: Granularity,
        plan: &SamplingPlan,
        tol: &TolerancePolicy,
    ) -> Result<CompositionTable> {
        let rels = enumerate(calculus, m);
        let n = rels.len();
        let frame = StarFrame::with_default_axes(m);

        let reps: Vec<Vec<(EOPoint, EOPoint)>> = rels
            .par_iter()
            .map(|r| representatives(r, plan, tol))
            .collect::<Result<_>>()?;
        // only the second leg of each pair matters: A is the shared anchor
        let legs: Vec<Vec<EOPoint>> = reps
            .into_iter()
            .map(|v| v.into_iter().map(|(_, b)| b).collect())
            .collect();

        let anchor = EOPoint {
            position: Point::ORIGIN,
            heading: 0.0,
            elevation: 1.0,
        };
        let words = word_count(n);

        let mut raw: Vec<Vec<u64>> = (0..n)
            .into_par_iter()
            .map(|ri| {
                let mut row = vec![0u64; n * words];
                for b in &legs[ri] {
                    let (sin_h, cos_h) = b.heading.sin_cos();
                    for (si, second) in legs.iter().enumerate() {
                        let bits = &mut row[si * words..(si + 1) * words];
                        for c0 in second {
                            // re-anchor the second leg: the unique similarity
                            // mapping the normalized mid point onto B
                            let x = c0.position.x * cos_h - c0.position.y * sin_h;
                            let y = c0.position.x * sin_h + c0.position.y * cos_h;
                            let c = EOPoint {
                                position: Point {
                                    x: x * b.elevation + b.position.x,
                                    y: y * b.elevation + b.position.y,
                                },
                                heading: (c0.heading + b.heading) % TAU,
                                elevation: c0.elevation * b.elevation,
                            };
                            let t = relate_with_frame(calculus, &anchor, &c, m, &frame, tol);
                            let idx = t.index();
                            bits[idx / 64] |= 1u64 << (idx % 64);
                        }
                    }
                }
                row
            })
            .collect();

        // Monte-Carlo augmentation: the leg grid can miss narrow joint
        // regimes (a length just inside a distance circle combined with a
        // bearing deep inside a cone, say). Every triple inserted here is
        // observed on a concrete configuration, so the table only gains
        // realizable compositions. The pass is seeded from the plan and does
        // not depend on the density, which keeps regeneration byte-identical
        // and entries monotone in the density.
        {
            let trials = 2_000u64.saturating_mul((n * n) as u64).min(100_000_000);
            let chunk = 16_384u64;
            let nchunks = (trials + chunk - 1) / chunk;
            let gammas = if m.get() > 1
                && matches!(calculus, CalculusId::Eopra | CalculusId::Estar)
            {
                class_boundaries(1.0, m)?
            } else {
                Vec::new()
            };
            let ray_step = m.ray_step();
            let rays = 2 * m.get();
            for batch in (0..nchunks).step_by(64) {
                let batch_end = (batch + 64).min(nchunks);
                let triples: Vec<(u32, u32, u32)> = (batch..batch_end)
                    .into_par_iter()
                    .flat_map_iter(|ci| {
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            plan.seed ^ 0xd6e8_feb8_6659_fd93u64.wrapping_mul(ci + 1),
                        );
                        let lo = ci * chunk;
                        let hi = (lo + chunk).min(trials);
                        let mut found = Vec::with_capacity((hi - lo) as usize);
                        for _ in lo..hi {
                            let point = |rng: &mut ChaCha8Rng| {
                                let position = if rng.gen_bool(0.5) {
                                    Point {
                                        x: rng.gen_range(-10.0..10.0),
                                        y: rng.gen_range(-10.0..10.0),
                                    }
                                } else {
                                    let radius =
                                        rng.gen_range(0.05f64.ln()..50.0f64.ln()).exp();
                                    let angle = rng.gen_range(0.0..TAU);
                                    Point {
                                        x: radius * angle.cos(),
                                        y: radius * angle.sin(),
                                    }
                                };
                                EOPoint {
                                    position,
                                    heading: rng.gen_range(0.0..TAU),
                                    elevation: rng
                                        .gen_range(0.05f64.ln()..20.0f64.ln())
                                        .exp(),
                                }
                            };
                            let mut pts =
                                [point(&mut rng), point(&mut rng), point(&mut rng)];
                            let offset = |rng: &mut ChaCha8Rng| {
                                let mag =
                                    rng.gen_range(1e-7f64.ln()..0.3f64.ln()).exp();
                                if rng.gen_bool(0.5) {
                                    mag
                                } else {
                                    -mag
                                }
                            };
                            // independently per point: put its bearing to a
                            // random other point near one of its rays, where
                            // compositions change ...
                            for i in 0..3usize {
                                if rng.gen_bool(0.3) {
                                    let j = (i + rng.gen_range(1..3usize)) % 3;
                                    let th = bearing(pts[i].position, pts[j].position);
                                    let ray = rng.gen_range(0..rays) as f64 * ray_step;
                                    pts[i].heading = (th - ray - offset(&mut rng))
                                        .rem_euclid(TAU)
                                        % TAU;
                                }
                            }
                            // ... and put its elevation near the class circle
                            // through a random other point
                            if !gammas.is_empty() {
                                for i in 0..3usize {
                                    if rng.gen_bool(0.3) {
                                        let j = (i + rng.gen_range(1..3usize)) % 3;
                                        let d =
                                            distance(pts[i].position, pts[j].position);
                                        let g = gammas[rng.gen_range(0..gammas.len())];
                                        let e = d / g * (1.0 + offset(&mut rng));
                                        if e.is_finite() && e > 0.0 {
                                            pts[i].elevation = e;
                                        }
                                    }
                                }
                            }
                            // occasionally collapse a pair so same-position
                            // relations appear outside the leg grid too
                            match rng.gen_range(0..25u32) {
                                0 => pts[1].position = pts[0].position,
                                1 => pts[2].position = pts[1].position,
                                2 => pts[2].position = pts[0].position,
                                _ => {}
                            }
                            let rab = relate_with_frame(
                                calculus, &pts[0], &pts[1], m, &frame, tol,
                            );
                            let rbc = relate_with_frame(
                                calculus, &pts[1], &pts[2], m, &frame, tol,
                            );
                            let rac = relate_with_frame(
                                calculus, &pts[0], &pts[2], m, &frame, tol,
                            );
                            found.push((
                                rab.index() as u32,
                                rbc.index() as u32,
                                rac.index() as u32,
                            ));
                        }
                        found
                    })
                    .collect();
                for (ri, si, ti) in triples {
                    raw[ri as usize][si as usize * words + ti as usize / 64] |=
                        1u64 << (ti % 64);
                }
            }
        }

        // converse-duality check, then closure if the sampling left holes
        let conv_idx: Vec<usize> = rels.iter().map(|r| r.converse().index()).collect();
        let get = |ri: usize, si: usize| -> &[u64] { &raw[ri][si * words..(si + 1) * words] };

        let mut symmetrized = false;
        'scan: for ri in 0..n {
            for si in 0..n {
                let dual_ri = conv_idx[si];
                let dual_si = conv_idx[ri];
                let bits = get(ri, si);
                for t in bits_to_indices(bits) {
                    let ct = conv_idx[t as usize];
                    let dual = get(dual_ri, dual_si);
                    if dual[ct / 64] & (1u64 << (ct % 64)) == 0 {
                        symmetrized = true;
                        break 'scan;
                    }
                }
            }
        }

        let entries: Vec<Vec<u32>> = if symmetrized {
            (0..n * n)
                .into_par_iter()
                .map(|p| {
                    let (ri, si) = (p / n, p % n);
                    let mut bits = get(ri, si).to_vec();
                    for t in bits_to_indices(get(conv_idx[si], conv_idx[ri])) {
                        let ct = conv_idx[t as usize];
                        bits[ct / 64] |= 1u64 << (ct % 64);
                    }
                    bits_to_indices(&bits)
                })
                .collect()
        } else {
            (0..n * n)
                .map(|p| bits_to_indices(get(p / n, p % n)))
                .collect()
        };

        for (p, e) in entries.iter().enumerate() {
            if e.is_empty() {
                return Err(QsrError::invalid(format!(
                    "generation produced an empty entry for pair index {p}"
                )));
            }
        }

        Ok(CompositionTable {
            calculus,
            m,
            relations: rels,
            entries,
            meta: TableMeta {
                density: plan.density,
                seed: plan.seed,
                symmetrized,
            },
        })
    }

    pub fn calculus(&self) -> CalculusId {
        self.calculus
    }

    pub fn granularity(&self) -> Granularity {
        self.m
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn relations(&self) -> &[BaseRelation] {
        &self.relations
    }

    pub fn universe_len(&self) -> usize {
        self.relations.len()
    }

    fn check_relation(&self, r: &BaseRelation) -> Result<usize> {
        if r.calculus() != self.calculus || r.granularity() != self.m {
            return Err(QsrError::Mismatch(format!(
                "relation {r} does not belong to this {} m={} table",
                self.calculus, self.m
            )));
        }
        Ok(r.index())
    }

    pub fn entry_indices(&self, ri: usize, si: usize) -> &[u32] {
        &self.entries[ri * self.relations.len() + si]
    }

    /// The composition entry for an ordered pair of base relations.
    pub fn entry(&self, r: &BaseRelation, s: &BaseRelation) -> Result<RelationSet> {
        let ri = self.check_relation(r)?;
        let si = self.check_relation(s)?;
        RelationSet::from_members(
            self.calculus,
            self.m,
            self.entry_indices(ri, si)
                .iter()
                .map(|t| self.relations[*t as usize]),
        )
    }

    pub fn contains_triple(&self, r: &BaseRelation, s: &BaseRelation, t: &BaseRelation) -> Result<bool> {
        let ri = self.check_relation(r)?;
        let si = self.check_relation(s)?;
        let ti = self.check_relation(t)? as u32;
        Ok(self.entry_indices(ri, si).binary_search(&ti).is_ok())
    }

    /// Lifts composition to general relations: the union of the entries over
    /// all base pairs.
    pub fn compose_lookup(&self, r: &RelationSet, s: &RelationSet) -> Result<RelationSet> {
        if r.calculus() != self.calculus
            || s.calculus() != self.calculus
            || r.granularity() != self.m
            || s.granularity() != self.m
        {
            return Err(QsrError::Mismatch(format!(
                "relation sets do not match this {} m={} table",
                self.calculus, self.m
            )));
        }
        let n = self.relations.len();
        let mut bits = vec![0u64; word_count(n)];
        for br in r.iter() {
            let ri = br.index();
            for bs in s.iter() {
                for t in self.entry_indices(ri, bs.index()) {
                    bits[*t as usize / 64] |= 1u64 << (*t % 64);
                }
            }
        }
        RelationSet::from_members(
            self.calculus,
            self.m,
            bits_to_indices(&bits)
                .into_iter()
                .map(|t| self.relations[t as usize]),
        )
    }

    /// Triples violating converse duality:
    /// `T ∈ entry(R,S)` without `conv(T) ∈ entry(conv(S), conv(R))`.
    pub fn duality_violations(&self) -> Vec<(BaseRelation, BaseRelation, BaseRelation)> {
        let n = self.relations.len();
        let conv_idx: Vec<usize> = self.relations.iter().map(|r| r.converse().index()).collect();
        let mut out = Vec::new();
        for ri in 0..n {
            for si in 0..n {
                let dual = self.entry_indices(conv_idx[si], conv_idx[ri]);
                for t in self.entry_indices(ri, si) {
                    let ct = conv_idx[*t as usize] as u32;
                    if dual.binary_search(&ct).is_err() {
                        out.push((
                            self.relations[ri],
                            self.relations[si],
                            self.relations[*t as usize],
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn is_duality_closed(&self) -> bool {
        self.duality_violations().is_empty()
    }

    /// Monte-Carlo soundness check: samples random eo-point triples and looks
    /// for observed compositions missing from the table.
    pub fn verify(&self, trials: u64, seed: u64, tol: &TolerancePolicy) -> Result<VerifyReport> {
        if trials < 1 {
            return Err(QsrError::invalid("verification needs at least one trial"));
        }
        let frame = StarFrame::with_default_axes(self.m);
        let chunk = 4096u64;
        let chunks: Vec<u64> = (0..(trials + chunk - 1) / chunk).collect();
        let violations: Vec<Violation> = chunks
            .par_iter()
            .flat_map_iter(|ci| {
                let lo = ci * chunk;
                let hi = (lo + chunk).min(trials);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(ci.wrapping_mul(0x9e3779b97f4a7c15)));
                let mut found = Vec::new();
                for _ in lo..hi {
                    let point = |rng: &mut ChaCha8Rng| EOPoint {
                        position: Point {
                            x: rng.gen_range(-10.0..10.0),
                            y: rng.gen_range(-10.0..10.0),
                        },
                        heading: rng.gen_range(0.0..TAU),
                        elevation: (rng.gen_range(0.1f64.ln()..10.0f64.ln())).exp(),
                    };
                    let a = point(&mut rng);
                    let b = point(&mut rng);
                    let c = point(&mut rng);
                    let rab = relate_with_frame(self.calculus, &a, &b, self.m, &frame, tol);
                    let rbc = relate_with_frame(self.calculus, &b, &c, self.m, &frame, tol);
                    let rac = relate_with_frame(self.calculus, &a, &c, self.m, &frame, tol);
                    let entry = self.entry_indices(rab.index(), rbc.index());
                    if entry.binary_search(&(rac.index() as u32)).is_err() {
                        found.push(Violation {
                            a,
                            b,
                            c,
                            rel_ab: rab,
                            rel_bc: rbc,
                            rel_ac: rac,
                        });
                    }
                }
                found
            })
            .collect();
        Ok(VerifyReport { trials, violations })
    }

    /// Serializes in the line-oriented table format.
    pub fn to_text(&self) -> String {
        let n = self.relations.len();
        let mut out = String::new();
        out.push_str("#qsr-table v1\n");
        let _ = writeln!(out, "calculus {}", self.calculus);
        let _ = writeln!(out, "m {}", self.m);
        let _ = writeln!(out, "density {}", self.meta.density);
        let _ = writeln!(out, "seed {}", self.meta.seed);
        let _ = writeln!(out, "symmetrized {}", self.meta.symmetrized);
        for ri in 0..n {
            for si in 0..n {
                let _ = write!(out, "{} {} ->", self.relations[ri], self.relations[si]);
                for t in self.entry_indices(ri, si) {
                    let _ = write!(out, " {}", self.relations[*t as usize]);
                }
                out.push('\n');
            }
        }
        out.push_str("#end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<CompositionTable> {
        let mut lines = text.lines().enumerate();
        let mut expect = |want: &str| -> Result<(usize, String)> {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| QsrError::parse(0, 0, "unexpected end of table file"))?;
            let line = line.trim_end();
            if want.is_empty() {
                return Ok((ln + 1, line.to_string()));
            }
            let rest = line.strip_prefix(want).ok_or_else(|| {
                QsrError::parse(ln + 1, 1, format!("expected `{want} ...`, got `{line}`"))
            })?;
            Ok((ln + 1, rest.trim().to_string()))
        };

        let (ln, magic) = expect("")?;
        if magic != "#qsr-table v1" {
            return Err(QsrError::parse(ln, 1, "missing `#qsr-table v1` header"));
        }
        let (_, calc) = expect("calculus")?;
        let calculus = CalculusId::from_str(&calc)?;
        let (ln, mtok) = expect("m")?;
        let m = Granularity::new(
            mtok.parse()
                .map_err(|_| QsrError::parse(ln, 3, format!("invalid granularity `{mtok}`")))?,
        )?;
        let (ln, dtok) = expect("density")?;
        let density: u32 = dtok
            .parse()
            .map_err(|_| QsrError::parse(ln, 9, format!("invalid density `{dtok}`")))?;
        let (ln, stok) = expect("seed")?;
        let seed: u64 = stok
            .parse()
            .map_err(|_| QsrError::parse(ln, 6, format!("invalid seed `{stok}`")))?;
        let (ln, ytok) = expect("symmetrized")?;
        let symmetrized: bool = ytok
            .parse()
            .map_err(|_| QsrError::parse(ln, 13, format!("invalid symmetrized flag `{ytok}`")))?;

        let relations = enumerate(calculus, m);
        let n = relations.len();
        let mut entries: Vec<Option<Vec<u32>>> = vec![None; n * n];
        loop {
            let (ln, line) = expect("")?;
            if line == "#end" {
                break;
            }
            let (pair, members) = line.split_once("->").ok_or_else(|| {
                QsrError::parse(ln, 1, "expected `<R> <S> -> <T...>` or `#end`")
            })?;
            let mut ptoks = pair.split_whitespace();
            let rtok = ptoks
                .next()
                .ok_or_else(|| QsrError::parse(ln, 1, "missing first relation"))?;
            let stok = ptoks
                .next()
                .ok_or_else(|| QsrError::parse(ln, 1, "missing second relation"))?;
            if ptoks.next().is_some() {
                return Err(QsrError::parse(ln, 1, "too many relations before `->`"));
            }
            let r = parse_relation(calculus, rtok)?;
            let s = parse_relation(calculus, stok)?;
            if r.granularity() != m || s.granularity() != m {
                return Err(QsrError::parse(ln, 1, "entry granularity differs from header"));
            }
            let mut ts = Vec::new();
            for tok in members.split_whitespace() {
                let t = parse_relation(calculus, tok)?;
                ts.push(t.index() as u32);
            }
            ts.sort_unstable();
            ts.dedup();
            if ts.is_empty() {
                return Err(QsrError::parse(ln, 1, "empty composition entry"));
            }
            entries[r.index() * n + s.index()] = Some(ts);
        }
        let entries: Vec<Vec<u32>> = entries
            .into_iter()
            .enumerate()
            .map(|(p, e)| {
                e.ok_or_else(|| {
                    QsrError::parse(0, 0, format!("missing entry for pair index {p}"))
                })
            })
            .collect::<Result<_>>()?;
        Ok(CompositionTable {
            calculus,
            m,
            relations,
            entries,
            meta: TableMeta {
                density,
                seed,
                symmetrized,
            },
        })
    }

    /// Drops one entry to an empty set. Test hook for fault injection.
    #[doc(hidden)]
    pub fn corrupt_entry_for_test(&mut self, ri: usize, si: usize) {
        let n = self.relations.len();
        self.entries[ri * n + si] = Vec::new();
    }
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub a: EOPoint,
    pub b: EOPoint,
    pub c: EOPoint,
    pub rel_ab: BaseRelation,
    pub rel_bc: BaseRelation,
    pub rel_ac: BaseRelation,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub trials: u64,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{identity, parse_relation};

    fn m(v: u32) -> Granularity {
        Granularity::new(v).unwrap()
    }

    fn small_table(calc: CalculusId) -> CompositionTable {
        CompositionTable::generate(
            calc,
            m(1),
            &SamplingPlan::default(),
            &TolerancePolicy::default(),
        )
        .unwrap()
    }

    #[test]
    fn identity_entry_contains_relation() {
        for calc in CalculusId::ALL {
            let t = small_table(calc);
            let id = identity(calc, m(1));
            for r in t.relations() {
                let e = t.entry(r, &id).unwrap();
                assert!(e.contains(r), "{calc}: entry({r}, id) missing {r}");
            }
        }
    }

    #[test]
    fn facing_chain_composition_is_collinear() {
        let t = CompositionTable::generate(
            CalculusId::Opra,
            m(2),
            &SamplingPlan::default(),
            &TolerancePolicy::default(),
        )
        .unwrap();
        let ff = parse_relation(CalculusId::Opra, "2:0-0").unwrap();
        let e = t.entry(&ff, &ff).unwrap();
        // two facing pairs chain into a collinear configuration: C ahead of A
        // still facing away (0-4), behind A facing it (4-0), or C = A
        for text in ["2:0-4", "2:4-0", "2:s0"] {
            let want = parse_relation(CalculusId::Opra, text).unwrap();
            assert!(e.contains(&want), "entry missing {want}");
        }
        // hand witness: A at origin facing B at (2,0) facing back; C at (1,0)
        // facing +x realizes (0-0, 0-0) -> 0-4
        let tol = TolerancePolicy::default();
        let a = EOPoint::from_coords(0.0, 0.0, 0.0, 1.0).unwrap();
        let b = EOPoint::from_coords(2.0, 0.0, std::f64::consts::PI, 1.0).unwrap();
        let c = EOPoint::from_coords(1.0, 0.0, 0.0, 1.0).unwrap();
        let rab = crate::relations::relate(CalculusId::Opra, &a, &b, m(2), &tol);
        let rbc = crate::relations::relate(CalculusId::Opra, &b, &c, m(2), &tol);
        let rac = crate::relations::relate(CalculusId::Opra, &a, &c, m(2), &tol);
        assert_eq!(rab, ff);
        assert_eq!(rbc, ff);
        assert!(t.contains_triple(&rab, &rbc, &rac).unwrap());
    }

    #[test]
    fn lookup_lifts_to_sets() {
        let t = small_table(CalculusId::Opra);
        let id = identity(CalculusId::Opra, m(1));
        let r = parse_relation(CalculusId::Opra, "1:1-1").unwrap();
        let got = t
            .compose_lookup(&RelationSet::singleton(r), &RelationSet::singleton(id))
            .unwrap();
        assert!(got.contains(&r));

        let empty = RelationSet::empty(CalculusId::Opra, m(1));
        let u = RelationSet::universal(CalculusId::Opra, m(1));
        assert!(t.compose_lookup(&empty, &u).unwrap().is_empty());
        assert!(t.compose_lookup(&u, &u).unwrap().is_universal());
    }

    #[test]
    fn generation_is_deterministic() {
        let plan = SamplingPlan::default();
        let tol = TolerancePolicy::default();
        let a = CompositionTable::generate(CalculusId::Star, m(2), &plan, &tol).unwrap();
        let b = CompositionTable::generate(CalculusId::Star, m(2), &plan, &tol).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn density_monotonicity_small() {
        let tol = TolerancePolicy::default();
        let lo = CompositionTable::generate(
            CalculusId::Opra,
            m(1),
            &SamplingPlan::new(2, 42, 8.0).unwrap(),
            &tol,
        )
        .unwrap();
        let hi = CompositionTable::generate(
            CalculusId::Opra,
            m(1),
            &SamplingPlan::new(4, 42, 8.0).unwrap(),
            &tol,
        )
        .unwrap();
        for r in lo.relations() {
            for s in lo.relations() {
                let el = lo.entry(r, s).unwrap();
                let eh = hi.entry(r, s).unwrap();
                assert!(el.is_subset(&eh), "({r}, {s}) not monotone");
            }
        }
    }

    #[test]
    fn verify_small_tables_sound() {
        let tol = TolerancePolicy::default();
        for calc in CalculusId::ALL {
            let t = small_table(calc);
            let report = t.verify(5000, 7, &tol).unwrap();
            assert!(
                report.is_sound(),
                "{calc}: {} violations, first: {:?}",
                report.violations.len(),
                report.violations.first()
            );
        }
    }

    #[test]
    fn verify_detects_injected_fault() {
        let tol = TolerancePolicy::default();
        let mut t = small_table(CalculusId::Opra);
        // empty a high-probability entry: compose two open-cone relations
        let r = parse_relation(CalculusId::Opra, "1:1-1").unwrap();
        t.corrupt_entry_for_test(r.index(), r.index());
        let report = t.verify(20000, 11, &tol).unwrap();
        assert!(!report.is_sound());
    }

    #[test]
    fn verify_rejects_zero_trials() {
        let t = small_table(CalculusId::Opra);
        assert!(t.verify(0, 1, &TolerancePolicy::default()).is_err());
    }

    #[test]
    fn duality_holds_after_generation() {
        for calc in CalculusId::ALL {
            let t = small_table(calc);
            assert!(t.is_duality_closed());
        }
    }

    #[test]
    fn duality_violation_detected_on_toy_table() {
        let mut t = small_table(CalculusId::Opra);
        let r = parse_relation(CalculusId::Opra, "1:1-1").unwrap();
        let s = parse_relation(CalculusId::Opra, "1:1-3").unwrap();
        t.corrupt_entry_for_test(r.index(), s.index());
        assert!(!t.is_duality_closed());
    }

    #[test]
    fn text_round_trip() {
        let t = small_table(CalculusId::Estar);
        let text = t.to_text();
        let back = CompositionTable::from_text(&text).unwrap();
        assert_eq!(t, back);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn from_text_rejects_malformed() {
        assert!(CompositionTable::from_text("junk\n").is_err());
        let t = small_table(CalculusId::Opra);
        let text = t.to_text();
        // drop one entry line
        let mut lines: Vec<&str> = text.lines().collect();
        lines.remove(8);
        assert!(CompositionTable::from_text(&lines.join("\n")).is_err());
    }
}
