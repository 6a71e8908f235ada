//! Parking sentiment from crowdsourced POI reviews: sentence filtering,
//! attitude classification, spatial aggregation and autocorrelation,
//! socio-spatial regression and lexical salience-valence tables.

pub mod error;
pub mod exec;
pub mod format;

pub mod classify;
pub mod corpus;
pub mod lsva;
pub mod pipeline;
pub mod regress;
pub mod sentiment;
pub mod spatial;
pub mod textfilter;

pub use error::{Error, Result};
pub use exec::Exec;
