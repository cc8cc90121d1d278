//! Special functions: gamma family and Mittag-Leffler evaluators.

pub mod gamma;
pub mod mittag_leffler;

pub use gamma::{gamma, ln_gamma, recip_gamma};
pub use mittag_leffler::{
    ml, ml2, ml_asymptotic, ml_asymptotic_unchecked, ml_series_oracle,
    series_asymptotic_switch, MLQuery, SeriesEval, SpecialError,
};
