//! Shared fixtures for the benchmarks.

use puchain::ermgm::ErmgmModel;
use puchain::expfam::ExpFamilySpec;
use puchain::{ParameterMap, StochasticMatrix};

/// Density model on `n` vertices with natural parameter.
pub fn density_model(n: usize) -> ErmgmModel {
    ErmgmModel::erdos_renyi(n, ParameterMap::natural(1)).expect("valid model")
}

/// The same model as a flat family over all of `G(n, 1)`.
pub fn density_family(n: usize) -> ExpFamilySpec {
    density_model(n).to_expfam().expect("enumerable space")
}

/// Stability chain matrix on `G(n, 1)` at edge probability `p`.
pub fn stability_matrix(n: usize, p: f64) -> StochasticMatrix {
    puchain::models::stability_cef(n)
        .and_then(|c| c.transition_matrix(&[p]))
        .expect("valid chain")
}
