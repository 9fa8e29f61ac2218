//! Satisfiability reasoning over Boolean combinations of XPath tree
//! patterns: patterns and documents, monomorphism search, the pattern
//! algebra, a resolution-style refutation engine and a bounded model
//! oracle.

pub mod algebra;
pub mod logic;
pub mod morphism;
pub mod oracle;
pub mod pattern;
pub mod random;
pub mod refutation;
pub mod textio;
