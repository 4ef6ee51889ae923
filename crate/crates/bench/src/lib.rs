//! Shared inputs for the criterion benchmarks.

use cpt_alloc_core::{Constraints, CptPreferences, Distribution, RateModel, ReturnModel};

/// The default model: TK preferences, N(0.045, 1.69) excess returns,
/// Ho–Lee style rates and fraction bounds [-5, 5].
pub fn default_model() -> (CptPreferences, Constraints, RateModel, ReturnModel) {
    (
        CptPreferences::tversky_kahneman(),
        Constraints::new(-5.0, 5.0).expect("valid bounds"),
        RateModel::gaussian_sqrt_t(0.03, 0.003).expect("valid rate model"),
        Distribution::normal(0.045, 1.69).expect("valid law").into(),
    )
}
