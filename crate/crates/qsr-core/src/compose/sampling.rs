//! Representative metric configurations for base relations.
//!
//! Each base relation is realized by a family of eo-point pairs with the first
//! point normalized to the origin, heading 0, elevation 1 (valid because every
//! supported calculus is similarity-invariant; the absolute calculi are only
//! translated and scaled, never rotated). Boundary dimensions (rays, circles)
//! are pinned exactly; open dimensions are sampled `density` times each by
//! deterministic stratified draws, with unbounded intervals capped at
//! `unbounded_cap` times their boundary plus one far sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::eopra::{class_boundaries, EopraKind};
use crate::error::{QsrError, Result};
use crate::geometry::{normalize_angle, EOPoint, Point, TolerancePolicy};
use crate::opra::{Granularity, OpraKind};
use crate::relations::BaseRelation;
use crate::star::{EstarKind, StarKind};

/// Parameters of the condensed-semantics sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingPlan {
    /// Samples per open qualitative dimension.
    pub density: u32,
    pub seed: u64,
    /// Unbounded annuli and half-lines are sampled within
    /// `[boundary, unbounded_cap·boundary]`, plus far samples at
    /// `2·unbounded_cap·boundary` and `4·unbounded_cap·boundary`.
    pub unbounded_cap: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            density: 3,
            seed: 42,
            unbounded_cap: 8.0,
        }
    }
}

impl SamplingPlan {
    pub fn new(density: u32, seed: u64, unbounded_cap: f64) -> Result<SamplingPlan> {
        if density < 1 {
            return Err(QsrError::invalid("sampling density must be at least 1"));
        }
        if !unbounded_cap.is_finite() || unbounded_cap <= 1.0 {
            return Err(QsrError::invalid(format!(
                "unbounded_cap must be finite and greater than 1, got {unbounded_cap}"
            )));
        }
        Ok(SamplingPlan {
            density,
            seed,
            unbounded_cap,
        })
    }
}

/// Relative inset that keeps open-interval samples clear of their boundaries
/// (and hence clear of the tolerance snap in sector/class classification).
const PAD: f64 = 1e-3;

/// Relative offset of the deterministic near-boundary samples that every
/// metric (length or elevation) interval receives in addition to its
/// stratified fill. Compositions often change exactly when a leg length sits
/// close to a qualitative boundary, so these pins matter for coverage.
const NEAR: f64 = 5e-3;

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Base-2 van der Corput radical inverse of `q + 1`, in `(0, 1)`. The first
/// `d` values are a prefix of the first `d + 1`, so samples (and hence table
/// entries) grow monotonically with the density.
fn vdc(q: u32) -> f64 {
    let mut q = q as u64 + 1;
    let mut r = 0.0;
    let mut f = 0.5;
    while q > 0 {
        if q & 1 == 1 {
            r += f;
        }
        f *= 0.5;
        q >>= 1;
    }
    r
}

struct Sampler {
    rng: ChaCha8Rng,
    density: u32,
    cap: f64,
}

impl Sampler {
    fn for_relation(plan: &SamplingPlan, r: &BaseRelation) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(plan.seed ^ fnv1a(&r.to_string())),
            density: plan.density,
            cap: plan.unbounded_cap,
        }
    }

    /// One random rotation per sampled dimension. Exactly one RNG draw, so
    /// the draw sequence does not depend on the density and nested densities
    /// see the same shifts.
    fn shift(&mut self) -> f64 {
        self.rng.gen()
    }

    /// Low-discrepancy samples strictly inside the open interval `(lo, hi)`,
    /// rotated by `shift` (Cranley–Patterson).
    fn strat_at(&self, lo: f64, hi: f64, shift: f64) -> Vec<f64> {
        let span = hi - lo;
        let a = lo + span * PAD;
        let w = span * (1.0 - 2.0 * PAD);
        (0..self.density)
            .map(|q| a + w * (vdc(q) + shift).fract())
            .collect()
    }

    fn stratified(&mut self, lo: f64, hi: f64) -> Vec<f64> {
        let s = self.shift();
        self.strat_at(lo, hi, s)
    }

    /// Metric open interval: both near-boundary pins plus the stratified
    /// fill.
    fn metric_at(&self, lo: f64, hi: f64, shift: f64) -> Vec<f64> {
        let span = hi - lo;
        let mut v = vec![lo + span * NEAR, hi - span * NEAR];
        v.extend(self.strat_at(lo, hi, shift));
        v
    }

    /// Samples of the unbounded interval `(b, ∞)`: near-boundary pin and
    /// stratified fill within `(b, cap·b)` plus two far samples.
    fn above_at(&self, b: f64, shift: f64) -> Vec<f64> {
        let mut v = self.metric_at(b, b * self.cap, shift);
        v.push(2.0 * self.cap * b);
        v.push(4.0 * self.cap * b);
        v
    }

    fn above(&mut self, b: f64) -> Vec<f64> {
        let s = self.shift();
        self.above_at(b, s)
    }

    /// Samples of the bounded open interval `(0, b)`.
    fn below_at(&self, b: f64, shift: f64) -> Vec<f64> {
        self.metric_at(0.0, b, shift)
    }

    fn below(&mut self, b: f64) -> Vec<f64> {
        let s = self.shift();
        self.below_at(b, s)
    }

    /// Samples of a fully unconstrained positive length: the unit value,
    /// log-stratified samples across `(1/cap, cap)` with near-end pins, and a
    /// far sample on each side so cross-leg ratios cover the far field.
    fn free_length_at(&self, shift: f64) -> Vec<f64> {
        let lim = self.cap.ln();
        let mut v = vec![1.0];
        v.extend(self.metric_at(-lim, lim, shift).into_iter().map(f64::exp));
        v.push(4.0 * self.cap);
        v.push(1.0 / (4.0 * self.cap));
        v
    }

    fn free_length(&mut self) -> Vec<f64> {
        let s = self.shift();
        self.free_length_at(s)
    }

    /// Angles realizing a direction sector: the exact ray for even indices,
    /// interior samples of the cone for odd ones.
    fn sector_angles(&mut self, idx: u32, m: Granularity) -> Vec<f64> {
        let step = m.ray_step();
        if idx % 2 == 0 {
            vec![(idx / 2) as f64 * step]
        } else {
            let t = (idx - 1) / 2;
            self.stratified(t as f64 * step, (t + 1) as f64 * step)
        }
    }

    /// Distances from a unit-elevation point realizing distance class `cls`.
    fn class_distances(&mut self, cls: u32, m: Granularity) -> Vec<f64> {
        if m.get() == 1 {
            return self.free_length();
        }
        let bs = class_boundaries(1.0, m).expect("unit elevation");
        let last = bs.len() - 1;
        if cls % 2 == 1 {
            vec![bs[(cls as usize - 1) / 2]]
        } else if cls == 0 {
            self.below(bs[0])
        } else if cls as usize == 2 * bs.len() {
            self.above(bs[last])
        } else {
            let t = cls as usize / 2;
            let s = self.shift();
            self.metric_at(bs[t - 1], bs[t], s)
        }
    }

    /// Elevations that put a fixed distance `d` into class `cls` on that
    /// side. Called once per sampled distance, so it must not consume RNG
    /// state: the number of distances varies with the density, and any draw
    /// here would break sample nesting across densities.
    fn class_elevations(&self, cls: u32, d: f64, m: Granularity) -> Vec<f64> {
        if m.get() == 1 {
            return self.free_length_at(0.0);
        }
        // unit boundaries double as the cot factors
        let gamma = class_boundaries(1.0, m).expect("unit elevation");
        let last = gamma.len() - 1;
        if cls % 2 == 1 {
            vec![d / gamma[(cls as usize - 1) / 2]]
        } else if cls == 0 {
            // d below the smallest circle requires a large elevation
            self.above_at(d / gamma[0], 0.0)
        } else if cls as usize == 2 * gamma.len() {
            self.below_at(d / gamma[last], 0.0)
        } else {
            let t = cls as usize / 2;
            self.metric_at(d / gamma[t], d / gamma[t - 1], 0.0)
        }
    }
}

fn origin_anchor() -> EOPoint {
    EOPoint {
        position: Point::ORIGIN,
        heading: 0.0,
        elevation: 1.0,
    }
}

fn heading_facing(theta: f64, alpha: f64) -> f64 {
    normalize_angle(theta + PI - alpha).expect("finite angles")
}

/// Enumerates representative configurations `(A, B)` with `relate(A, B) = r`
/// and `A` normalized to the origin anchor.
pub fn representatives(
    r: &BaseRelation,
    plan: &SamplingPlan,
    tol: &TolerancePolicy,
) -> Result<Vec<(EOPoint, EOPoint)>> {
    let a = origin_anchor();
    let m = r.granularity();
    let mut s = Sampler::for_relation(plan, r);
    let mut out = Vec::new();
    match r {
        BaseRelation::Opra(rel) => match rel.kind {
            OpraKind::Different { i, j } => {
                let thetas = s.sector_angles(i, m);
                let dists = s.free_length();
                let alphas = s.sector_angles(j, m);
                for &theta in &thetas {
                    for &d in &dists {
                        for &alpha in &alphas {
                            let b = EOPoint {
                                position: Point {
                                    x: d * theta.cos(),
                                    y: d * theta.sin(),
                                },
                                heading: heading_facing(theta, alpha),
                                elevation: 1.0,
                            };
                            out.push((a, b));
                        }
                    }
                }
            }
            OpraKind::Same { s: sec } => {
                for psi in s.sector_angles(sec, m) {
                    let b = EOPoint {
                        position: Point::ORIGIN,
                        heading: normalize_angle(psi)?,
                        elevation: 1.0,
                    };
                    out.push((a, b));
                }
            }
        },
        BaseRelation::Eopra(rel) => match rel.kind {
            EopraKind::Different { i, k, j, l } => {
                let thetas = s.sector_angles(i, m);
                let dists = s.class_distances(k.0, m);
                let alphas = s.sector_angles(j, m);
                for &theta in &thetas {
                    for &d in &dists {
                        let elevs = s.class_elevations(l.0, d, m);
                        for &alpha in &alphas {
                            for &e in &elevs {
                                let b = EOPoint {
                                    position: Point {
                                        x: d * theta.cos(),
                                        y: d * theta.sin(),
                                    },
                                    heading: heading_facing(theta, alpha),
                                    elevation: e,
                                };
                                out.push((a, b));
                            }
                        }
                    }
                }
            }
            EopraKind::Same { s: sec } => {
                let psis = s.sector_angles(sec, m);
                let elevs = s.free_length();
                for &psi in &psis {
                    for &e in &elevs {
                        let b = EOPoint {
                            position: Point::ORIGIN,
                            heading: normalize_angle(psi)?,
                            elevation: e,
                        };
                        out.push((a, b));
                    }
                }
            }
        },
        BaseRelation::Star(rel) => match rel.kind {
            StarKind::Different { d } => {
                // default equally-spaced frame: rays coincide with multiples
                // of π/m, so sector angles are shared with the o-point scheme
                let betas = s.sector_angles(d, m);
                let dists = s.free_length();
                for &beta in &betas {
                    for &dist in &dists {
                        let b = EOPoint {
                            position: Point {
                                x: dist * beta.cos(),
                                y: dist * beta.sin(),
                            },
                            heading: 0.0,
                            elevation: 1.0,
                        };
                        out.push((a, b));
                    }
                }
            }
            StarKind::Same => out.push((a, a)),
        },
        BaseRelation::Estar(rel) => match rel.kind {
            EstarKind::Different { d, k, l } => {
                let betas = s.sector_angles(d, m);
                let dists = s.class_distances(k.0, m);
                for &beta in &betas {
                    for &dist in &dists {
                        let elevs = s.class_elevations(l.0, dist, m);
                        for &e in &elevs {
                            let b = EOPoint {
                                position: Point {
                                    x: dist * beta.cos(),
                                    y: dist * beta.sin(),
                                },
                                heading: 0.0,
                                elevation: e,
                            };
                            out.push((a, b));
                        }
                    }
                }
            }
            EstarKind::Same => {
                for e in s.free_length() {
                    let b = EOPoint {
                        position: Point::ORIGIN,
                        heading: 0.0,
                        elevation: e,
                    };
                    out.push((a, b));
                }
            }
        },
    }
    debug_assert!(
        out.iter().all(|(a, b)| {
            crate::relations::relate(r.calculus(), a, b, m, tol) == *r
        }),
        "representative violates its own relation: {r}"
    );
    let _ = tol;
    Ok(out)
}
