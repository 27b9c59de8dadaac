//! Verified arrows and refutations of non-arrows, each carrying enough data
//! to be re-checked from the catalog alone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, Fingerprint, InstanceRef};
use crate::exact::{Field, Rat};
use crate::grassmann::Subalgebra;
use crate::lie::{
    all_nilpotent, char_data, complex_spectrum_witness, diag_weight_line, grid_elements,
    is_abelian, normalizer, on_char_curve, Basis, CharData, CharImage, CharPolys, Mat,
};
use crate::limits::{exact_limit, family_limit, ArrowSpec, ConjugatorFamily};

/// Grid radius for witness searches in the target.
const WITNESS_RADIUS: i64 = 2;
/// Grid radius on which the checker confirms that a source lies on its
/// claimed curve. Seven points per coordinate exceed the degree of the
/// characteristic polynomials in each coordinate.
const CURVE_CHECK_RADIUS: i64 = 3;

/// The curve `t -> (alpha t^2, beta t^3)` containing the characteristic
/// data of every element of a source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharCurve {
    /// Diagonal weights spanning the source's diagonal projection, when the
    /// source is triangular; then `alpha` and `beta` are their second and
    /// third elementary symmetric functions.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "crate::exact::serde_rat::triple"
    )]
    pub weights: Option<[Rat; 3]>,
    #[serde(with = "crate::exact::serde_rat")]
    pub alpha: Rat,
    #[serde(with = "crate::exact::serde_rat")]
    pub beta: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateKind {
    Verified {
        family: ConjugatorFamily,
        limit: Subalgebra,
        /// Set when the registered sequence failed and its fallback was used.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        substitution: Option<String>,
    },
    NormalizerDim {
        source_normalizer: usize,
        target_normalizer: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        differing: Vec<String>,
    },
    Abelian {
        witness: [Mat<Rat>; 2],
    },
    NilpotentGap {
        witness: Mat<Rat>,
        char: CharData,
    },
    CharCurve {
        curve: CharCurve,
        witness: Mat<Rat>,
        char: CharData,
    },
    RealSpectrum {
        witness: Mat<Rat>,
        char: CharData,
    },
    Cited {
        reference: String,
    },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub source: InstanceRef,
    pub target: InstanceRef,
    #[serde(flatten)]
    pub kind: CertificateKind,
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self.kind {
            CertificateKind::Verified { .. } => "VERIFIED",
            CertificateKind::NormalizerDim { .. } => "NORMALIZER_DIM",
            CertificateKind::Abelian { .. } => "ABELIAN",
            CertificateKind::NilpotentGap { .. } => "NILPOTENT_GAP",
            CertificateKind::CharCurve { .. } => "CHAR_CURVE",
            CertificateKind::RealSpectrum { .. } => "REAL_SPECTRUM",
            CertificateKind::Cited { .. } => "CITED",
            CertificateKind::Undecided => "UNDECIDED",
        }
    }

    pub fn is_verified(&self) -> bool {
        matches!(self.kind, CertificateKind::Verified { .. })
    }

    /// A refutation established by the engine rather than by citation.
    pub fn is_mechanical_refutation(&self) -> bool {
        !matches!(
            self.kind,
            CertificateKind::Verified { .. }
                | CertificateKind::Cited { .. }
                | CertificateKind::Undecided
        )
    }

    /// One-line summary such as `NORMALIZER_DIM(5, 3)`.
    pub fn summary(&self) -> String {
        match &self.kind {
            CertificateKind::Verified {
                limit,
                substitution,
                ..
            } => match substitution {
                Some(_) => format!("VERIFIED {} (fallback sequence)", limit.describe()),
                None => format!("VERIFIED {}", limit.describe()),
            },
            CertificateKind::NormalizerDim {
                source_normalizer,
                target_normalizer,
                ..
            } => format!("NORMALIZER_DIM({source_normalizer}, {target_normalizer})"),
            CertificateKind::Abelian { witness } => {
                format!("ABELIAN [{}, {}] != 0", witness[0], witness[1])
            }
            CertificateKind::NilpotentGap { witness, char } => {
                format!("NILPOTENT_GAP {witness} (p,q) = ({}, {})", char.p, char.q)
            }
            CertificateKind::CharCurve {
                curve,
                witness,
                char,
            } => format!(
                "CHAR_CURVE {witness} (p,q) = ({}, {}) off ({} t^2, {} t^3)",
                char.p, char.q, curve.alpha, curve.beta
            ),
            CertificateKind::RealSpectrum { witness, char } => {
                format!("REAL_SPECTRUM {witness} disc = {}", char.disc)
            }
            CertificateKind::Cited { reference } => format!("CITED {reference}"),
            CertificateKind::Undecided => "UNDECIDED".to_string(),
        }
    }
}

/// Why a claimed arrow did not verify.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowFailure {
    pub source: InstanceRef,
    pub target: InstanceRef,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Subalgebra>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<Fingerprint>,
}

pub fn verify_arrow(cat: &Catalog, spec: &ArrowSpec) -> Result<Certificate, ArrowFailure> {
    let fail = |reason: String, limit: Option<Subalgebra>| ArrowFailure {
        source: spec.source.clone(),
        target: spec.target.clone(),
        fingerprint: limit.as_ref().map(Fingerprint::of),
        limit,
        reason,
    };
    let target = cat
        .instantiate_ref(&spec.target)
        .map_err(|e| fail(e.to_string(), None))?;
    let out = exact_limit(cat, spec).map_err(|e| fail(e.to_string(), None))?;
    if out.limit != target {
        return Err(fail(
            format!(
                "limit {} differs from {}",
                out.limit.describe(),
                target.describe()
            ),
            Some(out.limit),
        ));
    }
    Ok(Certificate {
        source: spec.source.clone(),
        target: spec.target.clone(),
        kind: CertificateKind::Verified {
            family: spec.family.clone(),
            limit: out.limit,
            substitution: None,
        },
    })
}

fn first_grid_witness(s: &Basis, pred: impl Fn(&CharData) -> bool) -> Option<(Mat<Rat>, CharData)> {
    grid_elements(s, WITNESS_RADIUS).find_map(|x| {
        let c = char_data(&x);
        pred(&c).then_some((x, c))
    })
}

fn is_triangular(s: &Basis) -> bool {
    s.mats().iter().all(Mat::is_upper_triangular) || s.mats().iter().all(Mat::is_lower_triangular)
}

/// The char curve of a source, preferring the weight form when the source
/// is upper triangular with a diagonal line.
fn source_curve(s: &Basis) -> Option<CharCurve> {
    if let Ok(Some(w)) = diag_weight_line(s) {
        if w.iter().any(|x| !Field::is_zero(x)) {
            let (alpha, beta) = elementary(&w);
            return Some(CharCurve {
                weights: Some(w),
                alpha,
                beta,
            });
        }
    }
    match CharPolys::new(s).image() {
        CharImage::Curve { alpha, beta, .. } => Some(CharCurve {
            weights: None,
            alpha,
            beta,
        }),
        _ => None,
    }
}

/// Second and third elementary symmetric functions.
fn elementary(w: &[Rat; 3]) -> (Rat, Rat) {
    let e2 = &w[0] * &w[1] + &w[0] * &w[2] + &w[1] * &w[2];
    let e3 = &w[0] * &w[1] * &w[2];
    (e2, e3)
}

/// First applicable obstruction to `source -> target`, in fixed priority
/// order. `citation` is consulted only when no mechanical argument applies.
pub fn refute_pair(
    cat: &Catalog,
    source: &InstanceRef,
    target: &InstanceRef,
    citation: Option<&str>,
) -> Result<Certificate, CatalogError> {
    let s = cat.instantiate_ref(source)?;
    let t = cat.instantiate_ref(target)?;
    let kind = refute_subalgebras(&s, &t).unwrap_or_else(|| match citation {
        Some(r) => CertificateKind::Cited {
            reference: r.to_string(),
        },
        None => CertificateKind::Undecided,
    });
    Ok(Certificate {
        source: source.clone(),
        target: target.clone(),
        kind,
    })
}

pub(crate) fn refute_subalgebras(s: &Subalgebra, t: &Subalgebra) -> Option<CertificateKind> {
    let (sb, tb) = (s.basis(), t.basis());
    let (ns, nt) = (normalizer(sb).dim(), normalizer(tb).dim());
    if nt < ns {
        return Some(CertificateKind::NormalizerDim {
            source_normalizer: ns,
            target_normalizer: nt,
            differing: Vec::new(),
        });
    }
    if nt == ns && s != t {
        let differing = Fingerprint::of(s).differing_fields(&Fingerprint::of(t));
        if !differing.is_empty() {
            return Some(CertificateKind::NormalizerDim {
                source_normalizer: ns,
                target_normalizer: nt,
                differing: differing.into_iter().map(String::from).collect(),
            });
        }
    }
    if is_abelian(sb) && !is_abelian(tb) {
        let m = tb.mats();
        let pair = (0..m.len())
            .flat_map(|i| (i + 1..m.len()).map(move |j| (i, j)))
            .find(|&(i, j)| !m[i].bracket(&m[j]).is_zero())
            .expect("non-abelian basis has a noncommuting pair");
        return Some(CertificateKind::Abelian {
            witness: [m[pair.0].clone(), m[pair.1].clone()],
        });
    }
    if all_nilpotent(sb) {
        if let Some((witness, char)) = first_grid_witness(tb, |c| !c.p.is_zero() || !c.q.is_zero())
        {
            return Some(CertificateKind::NilpotentGap { witness, char });
        }
    }
    if let Some(curve) = source_curve(sb) {
        if let Some((witness, char)) = first_grid_witness(tb, |c| {
            !on_char_curve(&curve.alpha, &curve.beta, &c.p, &c.q)
        }) {
            return Some(CertificateKind::CharCurve {
                curve,
                witness,
                char,
            });
        }
    }
    if is_triangular(sb) {
        if let Some(witness) = complex_spectrum_witness(tb, WITNESS_RADIUS) {
            let char = char_data(&witness);
            return Some(CertificateKind::RealSpectrum { witness, char });
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("{0} certificates carry no checkable claim")]
    NotCheckable(&'static str),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Re-validates a certificate from the catalog and the certificate's own
/// fields, without consulting the producer.
pub fn check_certificate(cat: &Catalog, c: &Certificate) -> Result<bool, CheckError> {
    let s = cat.instantiate_ref(&c.source)?;
    let t = cat.instantiate_ref(&c.target)?;
    if s.dim() != t.dim() {
        return Ok(false);
    }
    let (sb, tb) = (s.basis(), t.basis());
    let ok = match &c.kind {
        CertificateKind::Verified { family, limit, .. } => match family_limit(&s, family) {
            Ok(out) => out.limit == *limit && *limit == t,
            Err(_) => false,
        },
        CertificateKind::NormalizerDim {
            source_normalizer,
            target_normalizer,
            differing,
        } => {
            let (ns, nt) = (normalizer(sb).dim(), normalizer(tb).dim());
            let dims_ok = ns == *source_normalizer && nt == *target_normalizer;
            let strict = nt < ns && differing.is_empty();
            let equal = nt == ns && s != t && !differing.is_empty() && {
                let fields = Fingerprint::of(&s).differing_fields(&Fingerprint::of(&t));
                fields.iter().map(|f| f.to_string()).collect::<Vec<_>>() == *differing
            };
            dims_ok && (strict || equal)
        }
        CertificateKind::Abelian { witness } => {
            is_abelian(sb)
                && witness.iter().all(|w| t.contains(w))
                && !witness[0].bracket(&witness[1]).is_zero()
        }
        CertificateKind::NilpotentGap { witness, char } => {
            let got = char_data(witness);
            all_nilpotent(sb)
                && t.contains(witness)
                && got == *char
                && !(got.p.is_zero() && got.q.is_zero())
        }
        CertificateKind::CharCurve {
            curve,
            witness,
            char,
        } => {
            let got = char_data(witness);
            let weights_ok = match &curve.weights {
                Some(w) => {
                    let (e2, e3) = elementary(w);
                    e2 == curve.alpha && e3 == curve.beta
                }
                None => true,
            };
            let source_on_curve = grid_elements(sb, CURVE_CHECK_RADIUS).all(|x| {
                let d = char_data(&x);
                on_char_curve(&curve.alpha, &curve.beta, &d.p, &d.q)
            });
            weights_ok
                && source_on_curve
                && t.contains(witness)
                && got == *char
                && !on_char_curve(&curve.alpha, &curve.beta, &got.p, &got.q)
        }
        CertificateKind::RealSpectrum { witness, char } => {
            let got = char_data(witness);
            is_triangular(sb) && t.contains(witness) && got == *char && got.disc < Rat::zero()
        }
        CertificateKind::Cited { .. } => return Err(CheckError::NotCheckable("CITED")),
        CertificateKind::Undecided => return Err(CheckError::NotCheckable("UNDECIDED")),
    };
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ParamAssignment};

    fn cat() -> Catalog {
        Catalog::builtin()
    }

    fn r(id: &str) -> InstanceRef {
        InstanceRef::plain(id)
    }

    fn ab(id: &str, a: i64, b: i64) -> InstanceRef {
        InstanceRef::new(
            id,
            ParamAssignment::new().with("a", int(a)).with("b", int(b)),
        )
    }

    #[test]
    fn normalizer_refutation() {
        let cat = cat();
        let c = refute_pair(&cat, &r("W1,4"), &r("W1,5"), None).unwrap();
        assert_eq!(c.summary(), "NORMALIZER_DIM(5, 3)");
        assert!(check_certificate(&cat, &c).unwrap());
        let mut swapped = c.clone();
        swapped.kind = CertificateKind::NormalizerDim {
            source_normalizer: 3,
            target_normalizer: 5,
            differing: Vec::new(),
        };
        assert!(!check_certificate(&cat, &swapped).unwrap());
    }

    #[test]
    fn nilpotent_gap() {
        let cat = cat();
        let c = refute_pair(&cat, &r("W1,5"), &ab("W1,1", 1, 1), None).unwrap();
        let CertificateKind::NilpotentGap { witness, char } = &c.kind else {
            panic!("{}", c.summary());
        };
        assert_eq!(*witness, Mat::diag([int(1), int(1), int(-2)]));
        assert_eq!((char.p.clone(), char.q.clone()), (int(-3), int(-2)));
        assert!(check_certificate(&cat, &c).unwrap());
    }

    /// W2,8 -> W2,2 is refuted first by normalizer dimension (3 vs 2); the
    /// char-curve argument for the same pair is checked as a standalone claim.
    #[test]
    fn char_curve() {
        let cat = cat();
        let c = refute_pair(&cat, &r("W2,8"), &r("W2,2"), None).unwrap();
        assert_eq!(c.summary(), "NORMALIZER_DIM(3, 2)");
        let witness = Mat::diag([int(1), int(-1), int(0)]);
        let claim = Certificate {
            source: r("W2,8"),
            target: r("W2,2"),
            kind: CertificateKind::CharCurve {
                curve: CharCurve {
                    weights: Some([int(1), int(-2), int(1)]),
                    alpha: int(-3),
                    beta: int(-2),
                },
                char: char_data(&witness),
                witness,
            },
        };
        let CertificateKind::CharCurve { char, .. } = &claim.kind else {
            unreachable!()
        };
        assert_eq!((char.p.clone(), char.q.clone()), (int(-1), int(0)));
        assert!(check_certificate(&cat, &claim).unwrap());
        let mut bad = claim.clone();
        if let CertificateKind::CharCurve { curve, .. } = &mut bad.kind {
            curve.alpha = int(-1);
            curve.weights = None;
        }
        assert!(!check_certificate(&cat, &bad).unwrap());

        let produced = refute_pair(&cat, &ab("W1,1", 1, 2), &ab("W1,1", 1, 1), None).unwrap();
        assert_eq!(produced.name(), "CHAR_CURVE");
        assert!(check_certificate(&cat, &produced).unwrap());
    }

    #[test]
    fn real_spectrum() {
        let cat = cat();
        let c = refute_pair(&cat, &r("W3,1"), &r("W3,12"), None).unwrap();
        let CertificateKind::RealSpectrum { witness, char } = &c.kind else {
            panic!("{}", c.summary());
        };
        assert!(char.disc < Rat::zero());
        assert!(cat.instantiate_ref(&r("W3,12")).unwrap().contains(witness));
        assert!(check_certificate(&cat, &c).unwrap());
    }

    #[test]
    fn abelian_source() {
        let cat = cat();
        let c = refute_pair(&cat, &r("W2,1"), &r("W2,8"), None).unwrap();
        assert_eq!(c.name(), "ABELIAN");
        assert!(check_certificate(&cat, &c).unwrap());
    }

    #[test]
    fn verified_and_corrupted() {
        let cat = cat();
        let g =
            [["n", "0", "n/9"], ["0", "1", "-1/3"], ["0", "0", "1/n"]].map(|r| r.map(String::from));
        let fam =
            ConjugatorFamily::from_text(None, &g, None, "test", &ParamAssignment::new()).unwrap();
        let spec = ArrowSpec {
            source: r("W1,3"),
            family: fam,
            target: r("W1,5"),
        };
        let c = verify_arrow(&cat, &spec).unwrap();
        assert!(check_certificate(&cat, &c).unwrap());
        let g = [["n", "0", "-n/9"], ["0", "1", "-1/3"], ["0", "0", "1/n"]]
            .map(|r| r.map(String::from));
        let bad = ArrowSpec {
            family: ConjugatorFamily::from_text(None, &g, None, "test", &ParamAssignment::new())
                .unwrap(),
            ..spec
        };
        let err = verify_arrow(&cat, &bad).unwrap_err();
        assert!(err.limit.is_some() && err.fingerprint.is_some());
    }

    #[test]
    fn json_round_trip() {
        let cat = cat();
        let c = refute_pair(&cat, &ab("W1,1", 1, 2), &ab("W1,1", 1, 1), None).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"kind\":\"CHAR_CURVE\""));
        assert_eq!(serde_json::from_str::<Certificate>(&text).unwrap(), c);
    }
}
