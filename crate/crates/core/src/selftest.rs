//! Randomized and exhaustive property checks over the shipped registries.
//!
//! Every check is exact. Randomness comes from a seeded ChaCha stream so a
//! failing run can be replayed with the same seed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Fingerprint;
use crate::certificates::CertificateKind;
use crate::chart::{run_chart, Elapsed, Registries};
use crate::exact::{int, rat, Field, Rat, RatFunc};
use crate::grassmann::{eval_span_at, projection_distance_sq, Subalgebra};
use crate::lie::{is_subalgebra, Mat};
use crate::limits::{ad_family, ConjugatorFamily};
use crate::linalg;

pub const DEFAULT_SEED: u64 = 0x5eed_c4ab;
pub const EQUIVARIANCE_CHECKS: usize = 200;
pub const CONJUGATIONS_PER_ENTRY: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
    #[serde(skip)]
    pub elapsed: Elapsed,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub properties: Vec<PropertyOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::passed)
    }
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

pub fn random_traceless(rng: &mut ChaCha8Rng) -> Mat<Rat> {
    let entries: Vec<Rat> = (0..9).map(|_| small_rat(rng)).collect();
    let mut m = Mat::from_fn(|i, j| entries[3 * i + j].clone());
    let t = m.trace();
    m.0[2][2] = &m.0[2][2] - &t;
    m
}

/// A random element of SL3(Q): a signed permutation, a diagonal scaling and
/// a few elementary shears.
pub fn random_sl3(rng: &mut ChaCha8Rng) -> (Mat<Rat>, Mat<Rat>) {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let p = PERMS[rng.gen_range(0..6)];
    let odd = matches!(p, [0, 2, 1] | [1, 0, 2] | [2, 1, 0]);
    let mut g = Mat::from_fn(|i, j| if p[i] == j { Rat::one() } else { Rat::zero() });
    if odd {
        g = g.scale(&int(-1));
    }
    let d = rat(rng.gen_range(1..=3), rng.gen_range(1..=3));
    let e = rat(rng.gen_range(1..=3), rng.gen_range(1..=3));
    let f = (&d * &e).recip();
    g = g.mul(&Mat::diag([d, e, f]));
    for _ in 0..3 {
        let (i, j) = loop {
            let (i, j) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            if i != j {
                break (i, j);
            }
        };
        g = g.mul(&Mat::identity().add(&Mat::unit(i, j).scale(&small_rat(rng))));
    }
    let g_inv = g.inverse().expect("determinant one");
    (g, g_inv)
}

fn timed(name: &str, f: impl FnOnce() -> (usize, Vec<String>)) -> PropertyOutcome {
    let start = Instant::now();
    let (checks, failures) = f();
    PropertyOutcome {
        name: name.to_string(),
        checks,
        failures,
        elapsed: Elapsed(start.elapsed()),
    }
}

fn ad_equivariance(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    for k in 0..EQUIVARIANCE_CHECKS {
        let (g, g_inv) = random_sl3(rng);
        let (x, y) = (random_traceless(rng), random_traceless(rng));
        let lhs = x.bracket(&y).conjugate_by(&g, &g_inv);
        let rhs = x
            .conjugate_by(&g, &g_inv)
            .bracket(&y.conjugate_by(&g, &g_inv));
        if lhs != rhs {
            failures.push(format!(
                "check {k}: Ad_g[X,Y] != [Ad_g X, Ad_g Y] for g = {g}"
            ));
        }
    }
    (EQUIVARIANCE_CHECKS, failures)
}

struct VerifiedArrow {
    label: String,
    source: Subalgebra,
    family: ConjugatorFamily,
}

fn verified_arrows(reg: &Registries) -> Result<Vec<VerifiedArrow>, String> {
    let mut out = Vec::new();
    for dim in 1..=4 {
        let report = run_chart(reg, dim).map_err(|e| e.to_string())?;
        for a in report.arrows {
            let c = a.certificate;
            if let CertificateKind::Verified { family, .. } = c.kind {
                let source = reg
                    .catalog
                    .instantiate_ref(&c.source)
                    .map_err(|e| e.to_string())?;
                out.push(VerifiedArrow {
                    label: format!("{} -> {}", c.source, c.target),
                    source,
                    family,
                });
            }
        }
    }
    Ok(out)
}

fn limits_closed(arrows: &[VerifiedArrow]) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    for a in arrows {
        match crate::limits::family_limit(&a.source, &a.family) {
            Ok(out) => {
                if out.limit.dim() != a.source.dim() {
                    failures.push(format!("{}: limit dimension {}", a.label, out.limit.dim()));
                }
                if !is_subalgebra(out.limit.basis()) {
                    failures.push(format!("{}: limit not bracket-closed", a.label));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", a.label)),
        }
    }
    (arrows.len(), failures)
}

/// Leading Plücker coordinates of the family against those of the limit,
/// computed directly from the minors rather than through the reduction.
fn plucker_cross_check(arrows: &[VerifiedArrow]) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    for a in arrows {
        let rows = ad_family(&a.source, &a.family);
        let minors = linalg::plucker(&rows);
        let Some(top) = minors.iter().filter_map(RatFunc::degree).max() else {
            failures.push(format!("{}: family is rank deficient", a.label));
            continue;
        };
        let lead: Vec<Rat> = minors
            .iter()
            .map(|f| {
                f.shift(-top)
                    .value_at_infinity()
                    .value()
                    .unwrap_or_else(Rat::zero)
            })
            .collect();
        let limit = match crate::grassmann::limit_subspace(&rows) {
            Ok(l) => l.limit,
            Err(e) => {
                failures.push(format!("{}: {e}", a.label));
                continue;
            }
        };
        let expected = linalg::plucker(limit.rows());
        let pivot = expected.iter().position(|x| !x.is_zero());
        let ok = pivot.is_some_and(|i| {
            !lead[i].is_zero() && {
                let lambda = &lead[i] / &expected[i];
                lead.iter().zip(&expected).all(|(x, y)| *x == y * &lambda)
            }
        });
        if !ok {
            failures.push(format!(
                "{}: leading Plücker vector not proportional to the limit's",
                a.label
            ));
        }
    }
    (arrows.len(), failures)
}

/// Distances from span M(n0) to the limit at n0 = 10^2, 10^3, 10^4.
fn distances_decrease(arrows: &[VerifiedArrow]) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    for a in arrows {
        let rows = ad_family(&a.source, &a.family);
        let limit = match crate::grassmann::limit_subspace(&rows) {
            Ok(l) => l.limit,
            Err(e) => {
                failures.push(format!("{}: {e}", a.label));
                continue;
            }
        };
        let mut dists = Vec::new();
        for n0 in [100, 1000, 10000] {
            match eval_span_at(&rows, &int(n0)) {
                Ok(span) => dists.push(projection_distance_sq(&span, &limit)),
                Err(e) => failures.push(format!("{}: {e}", a.label)),
            }
        }
        if dists.len() < 3 {
            continue;
        }
        if !(dists[0] > dists[1] && dists[1] > dists[2]) {
            failures.push(format!(
                "{}: distances {}, {}, {} not strictly decreasing",
                a.label, dists[0], dists[1], dists[2]
            ));
        }
    }
    (arrows.len(), failures)
}

fn fingerprint_invariance(reg: &Registries, rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let mut checks = 0;
    for dim in 1..=6 {
        for r in reg.catalog.samples(dim) {
            let Ok(s) = reg.catalog.instantiate_ref(&r) else {
                failures.push(format!("{r}: does not instantiate"));
                continue;
            };
            let fp = Fingerprint::of(&s);
            for _ in 0..CONJUGATIONS_PER_ENTRY {
                checks += 1;
                let (g, _) = random_sl3(rng);
                let moved = s.conjugate(&g).expect("g is invertible");
                let other = Fingerprint::of(&moved);
                if other != fp {
                    failures.push(format!(
                        "{r}: {:?} change under g = {g}",
                        fp.differing_fields(&other)
                    ));
                }
            }
        }
    }
    (checks, failures)
}

/// Runs the full property suite against `reg`.
pub fn run_selftest(reg: &Registries, seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut properties = vec![timed("ad-equivariance", || ad_equivariance(&mut rng))];
    match verified_arrows(reg) {
        Ok(arrows) => {
            properties.push(timed("limits-closed", || limits_closed(&arrows)));
            properties.push(timed("plucker-cross-check", || {
                plucker_cross_check(&arrows)
            }));
            properties.push(timed("distances-decrease", || distances_decrease(&arrows)));
        }
        Err(e) => properties.push(PropertyOutcome {
            name: "verified-arrows".to_string(),
            checks: 0,
            failures: vec![e],
            elapsed: Elapsed::default(),
        }),
    }
    properties.push(timed("fingerprint-invariance", || {
        fingerprint_invariance(reg, &mut rng)
    }));
    SelftestReport { seed, properties }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_elements_are_unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (g, g_inv) = random_sl3(&mut rng);
            assert!(g.det().is_one());
            assert_eq!(g.mul(&g_inv), Mat::identity());
            assert!(random_traceless(&mut rng).trace().is_zero());
        }
    }
}
