use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::exact::{Field, Rat};
use crate::grassmann::Subalgebra;
use crate::lie::{
    all_nilpotent, char_data, derived_algebra, derived_series, discriminant, discriminant_signs,
    is_abelian, kernel_image_profile, layer_traces, normalizer, trace_form_directions, CharImage,
    CharPolys,
};
use crate::linalg;

/// Shape of the characteristic image when it is a curve `t -> (alpha t^2, beta t^3)`,
/// classified by the spectrum of the elements on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightClass {
    AllZero,
    RepeatedNonzero,
    Distinct,
    Complex,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumClass {
    Real,
    Mixed,
    ComplexWitness,
}

/// Traces on the layers of the flag cut out by the derived algebra's images
/// and kernels; see [`crate::lie::layer_traces`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerTraces {
    pub dims: Vec<usize>,
    #[serde(with = "crate::exact::serde_rat::rows")]
    pub span: Vec<Vec<Rat>>,
}

/// Conjugation invariants of a subalgebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub normalizer_dim: usize,
    pub abelian: bool,
    pub all_nilpotent: bool,
    pub derived_series: Vec<usize>,
    pub weight_class: WeightClass,
    pub spectrum: SpectrumClass,
    /// `(dim common kernel, dim sum of images)` on R^3 for each term of the
    /// derived series.
    pub flag_profile: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer_traces: Option<LayerTraces>,
}

impl Fingerprint {
    pub fn of(s: &Subalgebra) -> Self {
        let b = s.basis();
        let image = CharPolys::new(b).image();
        let (weight_class, spectrum) = match &image {
            CharImage::Nilpotent => (WeightClass::AllZero, SpectrumClass::Real),
            CharImage::Curve { alpha, beta, .. } => {
                if alpha.is_zero() && beta.is_zero() {
                    (WeightClass::AllZero, SpectrumClass::Real)
                } else {
                    match discriminant(alpha, beta).cmp(&Rat::zero()) {
                        Ordering::Greater => (WeightClass::Distinct, SpectrumClass::Real),
                        Ordering::Equal => (WeightClass::RepeatedNonzero, SpectrumClass::Real),
                        Ordering::Less => (WeightClass::Complex, SpectrumClass::ComplexWitness),
                    }
                }
            }
            CharImage::Spread => {
                let (mut neg, mut pos) = discriminant_signs(b, 2);
                if neg && !pos {
                    (neg, pos) = discriminant_signs(b, 3);
                }
                // Directions diagonalizing the trace form do not depend on how
                // skewed the basis is; tr(X^2) < 0 forces p > 0 and so disc < 0.
                for (x, q) in trace_form_directions(b) {
                    let c = char_data(&x);
                    neg |= q < Rat::zero() || c.disc < Rat::zero();
                    pos |= c.disc > Rat::zero();
                }
                let class = match (neg, pos) {
                    (false, _) => SpectrumClass::Real,
                    (true, true) => SpectrumClass::Mixed,
                    (true, false) => SpectrumClass::ComplexWitness,
                };
                (WeightClass::None, class)
            }
        };
        let mut flag_profile = Vec::new();
        let mut cur = b.clone();
        loop {
            flag_profile.push(kernel_image_profile(&cur));
            let next = derived_algebra(&cur);
            if next.dim() == 0 || next.dim() == cur.dim() {
                break;
            }
            cur = next;
        }
        Fingerprint {
            dim: s.dim(),
            normalizer_dim: normalizer(b).dim(),
            abelian: is_abelian(b),
            all_nilpotent: all_nilpotent(b),
            derived_series: derived_series(b),
            weight_class,
            spectrum,
            flag_profile,
            layer_traces: layer_traces(b).map(|(dims, span)| LayerTraces { dims, span }),
        }
    }

    /// The fingerprint of the transposed subalgebra: kernels and images swap
    /// roles under transposition.
    pub fn transposed(&self) -> Self {
        let mut out = self.clone();
        out.flag_profile = self
            .flag_profile
            .iter()
            .map(|&(k, i)| (3 - i, 3 - k))
            .collect();
        // The dual flag lists the layers in reverse order with the same traces.
        out.layer_traces = self.layer_traces.as_ref().map(|l| {
            let rows: Vec<Vec<Rat>> = l
                .span
                .iter()
                .map(|r| r.iter().rev().cloned().collect())
                .collect();
            LayerTraces {
                dims: l.dims.iter().rev().copied().collect(),
                span: linalg::rref(&rows).0,
            }
        });
        out
    }

    /// Names of the fields in which `self` and `other` differ.
    pub fn differing_fields(&self, other: &Fingerprint) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.dim != other.dim {
            out.push("dim");
        }
        if self.normalizer_dim != other.normalizer_dim {
            out.push("normalizer_dim");
        }
        if self.abelian != other.abelian {
            out.push("abelian");
        }
        if self.all_nilpotent != other.all_nilpotent {
            out.push("all_nilpotent");
        }
        if self.derived_series != other.derived_series {
            out.push("derived_series");
        }
        if self.weight_class != other.weight_class {
            out.push("weight_class");
        }
        if self.spectrum != other.spectrum {
            out.push("spectrum");
        }
        if self.flag_profile != other.flag_profile {
            out.push("flag_profile");
        }
        if self.layer_traces != other.layer_traces {
            out.push("layer_traces");
        }
        out
    }
}
