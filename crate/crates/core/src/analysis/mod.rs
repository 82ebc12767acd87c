//! Inverse pipeline: fitting, tracking, inversion and periodicity.

pub mod inversion;
pub mod lorentz;
pub mod peaks;
pub mod periodicity;
pub mod spectrum;
pub mod track;

pub use inversion::{extract_shift, invert_flux_map, FluxInversion, InvertedPoint, ShiftSummary};
pub use lorentz::{fit_lorentzian, PeakFit};
pub use periodicity::{
    classify_periodicity, ft_periodicity, ft_periodicity_rows, Detrend, PeriodicityOptions,
    PeriodicityReport, Verdict,
};
pub use spectrum::Window;
pub use track::{track_resonance, ResonanceTrack};
