//! The eight acceptance criteria, one line each. Exits nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chabauty_core::catalog::InstanceRef;
use chabauty_core::certificates::{check_certificate, Certificate, CertificateKind};
use chabauty_core::chart::{run_chart, verify_registered, Registries};
use chabauty_core::exact::{int, Field, Rat, RatFunc};
use chabauty_core::grassmann::Subalgebra;
use chabauty_core::lie::{normalizer, Mat};
use chabauty_core::limits::{ad_family, ConjugatorFamily};
use chabauty_core::linalg;
use chabauty_core::selftest::{run_selftest, DEFAULT_SEED};

type Outcome = Result<String, String>;

/// Leading Plücker coordinates of the Ad-family, compared with those of the
/// expected target. Independent of the lattice reduction.
fn plucker_reaches(source: &Subalgebra, family: &ConjugatorFamily, target: &Subalgebra) -> bool {
    let target = match &family.post {
        Some(p) => target
            .conjugate(&p.inverse().expect("nonsingular"))
            .expect("nonsingular"),
        None => target.clone(),
    };
    let minors = linalg::plucker(&ad_family(source, family));
    let Some(top) = minors.iter().filter_map(RatFunc::degree).max() else {
        return false;
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
    let want = linalg::plucker(target.rows());
    let Some(i) = want.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    let lambda = &lead[i] / &want[i];
    !lambda.is_zero() && lead.iter().zip(&want).all(|(x, y)| *x == y * &lambda)
}

struct Checked {
    certificate: Certificate,
    elapsed: Duration,
}

/// Verifies every registered arrow of `dim` and cross-checks it with the
/// Plücker oracle.
fn verify_dim(reg: &Registries, dim: usize) -> Result<Vec<Checked>, String> {
    let mut out = Vec::new();
    for a in reg.arrows_of_dim(dim) {
        let start = Instant::now();
        let c = verify_registered(reg, a)
            .map_err(|f| format!("{} -> {}: {}", f.source, f.target, f.reason))?;
        let elapsed = start.elapsed();
        let CertificateKind::Verified { family, .. } = &c.kind else {
            return Err(format!("{} -> {}: not a verification", c.source, c.target));
        };
        let s = reg
            .catalog
            .instantiate_ref(&c.source)
            .map_err(|e| e.to_string())?;
        let t = reg
            .catalog
            .instantiate_ref(&c.target)
            .map_err(|e| e.to_string())?;
        if !plucker_reaches(&s, family, &t) {
            return Err(format!(
                "{} -> {}: Plücker oracle disagrees",
                c.source, c.target
            ));
        }
        out.push(Checked {
            certificate: c,
            elapsed,
        });
    }
    Ok(out)
}

fn substitutions(checked: &[Checked]) -> Vec<String> {
    checked
        .iter()
        .filter(|c| {
            matches!(
                c.certificate.kind,
                CertificateKind::Verified {
                    substitution: Some(_),
                    ..
                }
            )
        })
        .map(|c| c.certificate.source.to_string())
        .collect()
}

fn stratum(reg: &Registries, r: &InstanceRef) -> String {
    reg.catalog
        .stratum(r)
        .map(|s| s.name.clone())
        .unwrap_or_default()
}

fn pairs(checked: &[Checked]) -> BTreeSet<(String, String)> {
    checked
        .iter()
        .map(|c| {
            (
                c.certificate.source.id.clone(),
                c.certificate.target.id.clone(),
            )
        })
        .collect()
}

fn missing(have: &BTreeSet<(String, String)>, want: &[(&str, &str)]) -> Vec<String> {
    want.iter()
        .filter(|(s, t)| !have.contains(&(s.to_string(), t.to_string())))
        .map(|(s, t)| format!("{s} -> {t}"))
        .collect()
}

fn criterion1(reg: &Registries) -> Outcome {
    let checked = verify_dim(reg, 1)?;
    let drawn = pairs(&checked);
    if drawn.len() != 6 {
        return Err(format!(
            "{} drawn arrows, expected 6: {drawn:?}",
            drawn.len()
        ));
    }
    let want = [
        ("W1,5", "W1,4"),
        ("W1,3", "W1,5"),
        ("W1,1", "W1,5"),
        ("W1,1", "W1,4"),
        ("W1,2", "W1,5"),
        ("W1,3", "W1,1"),
    ];
    let gaps = missing(&drawn, &want);
    if !gaps.is_empty() {
        return Err(format!("missing {gaps:?}"));
    }
    let slowest = checked.iter().map(|c| c.elapsed).max().unwrap_or_default();
    if slowest >= Duration::from_secs(1) {
        return Err(format!("slowest arrow took {slowest:?}"));
    }
    Ok(format!(
        "6 drawn arrows ({} sample instances) verify, substitutions {:?}, slowest {slowest:.1?}",
        checked.len(),
        substitutions(&checked)
    ))
}

fn criterion2(reg: &Registries) -> Outcome {
    let checked = verify_dim(reg, 2)?;
    let published = [
        ("W2,1", "W2,3"),
        ("W2,7", "W2,6"),
        ("W2,8", "W2,6"),
        ("W2,9", "W2,6"),
        ("W2,10", "W2,6"),
    ];
    let derived = [
        ("W2,2", "W2,3"),
        ("W2,3", "W2,6"),
        ("W2,6", "W2,4"),
        ("W2,6", "W2,5"),
    ];
    let have = pairs(&checked);
    let gaps: Vec<String> = missing(&have, &published)
        .into_iter()
        .chain(missing(&have, &derived))
        .collect();
    if !gaps.is_empty() {
        return Err(format!("missing {gaps:?}"));
    }
    Ok(format!(
        "5 published and 3 derived arrows ({} instances) verify, substitutions {:?}",
        checked.len(),
        substitutions(&checked)
    ))
}

fn criterion3(reg: &Registries) -> Outcome {
    let checked = verify_dim(reg, 3)?;
    let mut sampled = BTreeSet::new();
    for c in &checked {
        for r in [&c.certificate.source, &c.certificate.target] {
            if !r.params.is_empty() {
                sampled.insert(r.to_string());
            }
        }
    }
    let want = [
        "W3,5[a=1,b=2]",
        "W3,5[a=1,b=1]",
        "W3,5[a=1,b=0]",
        "W3,6[a=1,b=2]",
        "W3,6[a=1,b=0]",
        "W3,8[zi=1,zr=1]",
        "W3,8[zi=1,zr=0]",
        "W3,9[zi=1,zr=1]",
        "W3,9[zi=1,zr=0]",
    ];
    let absent: Vec<&str> = want
        .iter()
        .copied()
        .filter(|w| !sampled.contains(*w))
        .collect();
    if !absent.is_empty() {
        return Err(format!("samples without a verified arrow: {absent:?}"));
    }
    let derived = [
        ("W3,13", "W3,8"),
        ("W3,13", "W3,9"),
        ("W3,14", "W3,8"),
        ("W3,14", "W3,9"),
    ];
    let gaps = missing(&pairs(&checked), &derived);
    if !gaps.is_empty() {
        return Err(format!("missing {gaps:?}"));
    }
    Ok(format!(
        "{} arrow instances verify, including transposed partners",
        checked.len()
    ))
}

fn criterion4(reg: &Registries) -> Outcome {
    let checked = verify_dim(reg, 4)?;
    if checked.len() != 5 {
        return Err(format!("{} arrows, expected 5", checked.len()));
    }
    let mut weights = Vec::new();
    for c in &checked {
        let CertificateKind::Verified { limit, .. } = &c.certificate.kind else {
            unreachable!()
        };
        if stratum(reg, &c.certificate.target) != "singular" {
            return Err(format!(
                "{}: target not in the singular stratum",
                c.certificate.target
            ));
        }
        // The three singular weight lines, each up to sign and scale.
        let singular: Vec<[i64; 3]> = [[1, 1, -2], [1, -2, 1], [-2, 1, 1]]
            .into_iter()
            .filter(|w| limit.contains(&Mat::diag(w.map(int))))
            .collect();
        match singular.as_slice() {
            [w] => weights.push(format!("{:?}", w)),
            _ => {
                return Err(format!(
                    "{}: limit has no singular diagonal weight",
                    c.certificate.source
                ))
            }
        }
    }
    Ok(format!(
        "5 arrows land in singular W4,6 with weights {}",
        weights.join(" ")
    ))
}

fn criterion5(reg: &Registries) -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    let mut bad = Vec::new();
    for dim in 1..=6 {
        for r in reg.catalog.samples(dim) {
            let s = reg.catalog.instantiate_ref(&r).map_err(|e| e.to_string())?;
            let got = normalizer(s.basis()).dim();
            let want = reg
                .catalog
                .table_normalizer_dim(&r)
                .map_err(|e| e.to_string())?;
            checks += 1;
            if got != want {
                bad.push(format!("{r}: computed {got}, table {want}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if !bad.is_empty() {
        return Err(format!(
            "{} of {checks} rows disagree: {}",
            bad.len(),
            bad.join("; ")
        ));
    }
    if elapsed >= Duration::from_secs(5) {
        return Err(format!("{checks} checks took {elapsed:?}"));
    }
    Ok(format!("{checks} rows agree in {elapsed:.1?}"))
}

fn criterion6(reg: &Registries) -> Outcome {
    let (mut refuted, mut cited) = (0, 0);
    for dim in 1..=6 {
        let r = run_chart(reg, dim).map_err(|e| e.to_string())?;
        if let Some(u) = r.undecided().next() {
            return Err(format!("UNDECIDED {} -> {}", u.source, u.target));
        }
        if !r.audit.is_empty() {
            return Err(format!(
                "dim {dim}: refutations inside the closure {:?}",
                r.audit
            ));
        }
        for p in &r.refutations {
            let c = &p.certificate;
            if c.is_mechanical_refutation() {
                if !check_certificate(&reg.catalog, c).map_err(|e| e.to_string())? {
                    return Err(format!(
                        "checker rejects {} -> {}: {}",
                        c.source,
                        c.target,
                        c.summary()
                    ));
                }
                refuted += 1;
            } else {
                cited += 1;
            }
        }
    }
    Ok(format!(
        "{refuted} mechanical refutations checked, {cited} cited, 0 undecided"
    ))
}

fn criterion7(reg: &Registries) -> Outcome {
    let start = Instant::now();
    let report = run_selftest(reg, DEFAULT_SEED);
    let elapsed = start.elapsed();
    let failed: Vec<String> = report
        .properties
        .iter()
        .filter(|p| !p.passed())
        .map(|p| format!("{}: {}", p.name, p.failures.join("; ")))
        .collect();
    if !failed.is_empty() {
        return Err(failed.join(" | "));
    }
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("suite took {elapsed:?}"));
    }
    let checks: Vec<String> = report
        .properties
        .iter()
        .map(|p| format!("{} {}", p.name, p.checks))
        .collect();
    Ok(format!("{} in {elapsed:.1?}", checks.join(", ")))
}

fn criterion8(reg: &Registries) -> Outcome {
    for (dim, nodes) in [(5, 3), (6, 2)] {
        let r = run_chart(reg, dim).map_err(|e| e.to_string())?;
        if r.nodes.len() != nodes || !r.arrows.is_empty() {
            return Err(format!(
                "dim {dim}: {} nodes, {} arrows",
                r.nodes.len(),
                r.arrows.len()
            ));
        }
        if r.refutations.len() != nodes * (nodes - 1) || r.undecided().next().is_some() {
            return Err(format!("dim {dim}: incomplete coverage"));
        }
    }
    Ok("3 and 2 isolated nodes, every pair refuted or cited".to_string())
}

fn main() -> ExitCode {
    let reg = Registries::builtin();
    let criteria: [(&str, fn(&Registries) -> Outcome); 8] = [
        ("dimension-1 chart", criterion1),
        ("dimension-2 chart", criterion2),
        ("dimension-3 chart", criterion3),
        ("dimension-4 chart", criterion4),
        ("normalizer table audit", criterion5),
        ("refutation completeness", criterion6),
        ("property suite", criterion7),
        ("dims 5-6", criterion8),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f(&reg) {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL - {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
