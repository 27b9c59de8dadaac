//! Matrices, subalgebras of sl3 and their invariants.

mod algebra;
mod mat;
mod spectral;

pub use algebra::{
    derived_algebra, derived_series, is_abelian, is_subalgebra, kernel_image_profile, layer_traces,
    normalizer, Basis, LieError,
};
pub use mat::{Mat, BASIS_LABELS};
pub use spectral::{
    all_nilpotent, char_data, complex_spectrum_witness, diag_weight_line, discriminant,
    on_char_curve, CharData, CharImage, CharPolys,
};
pub(crate) use spectral::{discriminant_signs, grid_elements, trace_form_directions};
