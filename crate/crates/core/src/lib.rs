//! Grapheme-to-phoneme learning toolkit: lexicon handling, alignment,
//! windowed instances, symbolic learners, stacking and transformation rules.

pub mod align;
pub mod error;
pub mod eval;
pub mod instances;
pub mod learners;
pub mod lexicon;
pub mod stacking;
pub mod synth;
pub mod tbedl;

pub use error::{Error, Result};
