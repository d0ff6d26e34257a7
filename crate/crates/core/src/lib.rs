//! Blocked two-level factorial designs.
//!
//! Given `n` two-level factors, a regular fraction (`p` defining words) and a
//! block size `2^q`, this crate finds a `q × n` generator matrix over GF(2)
//! whose blocks keep every main effect and a chosen set of two-factor
//! interactions estimable. The interaction set is treated as a graph; a
//! proper colouring of that graph with at most `2^q - 1` colours is a factor
//! grouping, and each colour class gets its own nonzero generator column.
//!
//! ```
//! use blockplan::{design, graphs::RequirementsGraph, synth};
//!
//! // every interaction with A must be estimable, 6 factors, blocks of 4
//! let g = RequirementsGraph::parse(6, "AB AC AD AE AF").unwrap();
//! let req = synth::SynthesisRequest::full(6, 2, g);
//! let out = synth::synthesize(&req, None).unwrap();
//! let result = out.success().unwrap();
//! assert_eq!(result.profile.to_string(), "⟨3,2,1⟩");
//! assert_eq!(design::count_estimable(&result.profile), 11);
//! ```

pub mod catalog;
pub mod design;
pub mod effects;
pub mod error;
pub mod gf2;
pub mod graphs;
pub mod oracle;
pub mod synth;

pub use design::{BlockedDesign, FactorGrouping, GeneratorMatrix, ProfileSet};
pub use effects::{ContrastSubgroup, EffectWord, FractionSpec};
pub use error::{Error, Result};
pub use gf2::{Gf2Matrix, Gf2Vector};
pub use graphs::{Coloring, RequirementsGraph};
