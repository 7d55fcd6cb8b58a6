//! Small numerical building blocks: quadrature, finite differences and
//! bracketed root finding.

pub mod fd;
pub mod quad;
pub mod roots;
