//! Studies combining network fits, certification and finite element solves.

mod carreau_fits;
mod datasets;
mod perturbation;
mod plateau;

use std::path::Path;

use serde::Serialize;

use crate::error::{io_err, Result};

pub use carreau_fits::{
    carreau_training_points, fit_carreau, fit_carreau_family, l2_error, sup_error, CarreauFit,
    FitFamilyConfig, FitSummary, CARREAU_RANGE,
};
pub use datasets::{
    fit_dataset, fit_metrics, fit_real_datasets, synthetic_dataset, synthetic_shear_thinning_specs,
    DatasetFit, SyntheticSpec,
};
pub use perturbation::{perturbation_check, PerturbationCheck, PerturbationRow};
pub use plateau::{
    icnn_reference_convergence, plateau_from_series, plateau_slope, plateau_study,
    reference_rates_from_series, solve_icnn_series, IcnnSeries, PlateauRow, PlateauStudy,
};

/// Hidden layer sizes used for every viscosity fit.
pub const FIT_ARCHITECTURE: [usize; 4] = [1, 120, 56, 1];

/// Writes `value` as pretty JSON.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text).map_err(io_err(path))
}

/// Writes rows as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| crate::Error::InvalidInput(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().expect("in-memory flush");
    std::fs::write(path, bytes).map_err(io_err(path))
}
