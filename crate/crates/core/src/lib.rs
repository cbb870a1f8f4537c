//! Exact-arithmetic laboratory for Parsell-Vinogradov systems.
//!
//! * [`monomial`]: systems, the moment map and its derivative matrices.
//! * [`counting`]: exact solution counts `J_{s,d,k}(N)` and the exponent
//!   bookkeeping of the classical lower bound.
//! * [`expsum`]: exponential sums, torus moments by exact quadrature and the
//!   sharpness probe for the quadratic surface.
//! * [`numerology`]: the exact-rational iteration numerology near `p = 20`.
//! * [`transversality`]: minor certificates, Taylor projections and
//!   Brascamp-Lieb dimension checks.

pub mod counting;
pub mod enclosure;
pub mod error;
pub mod exact;
pub mod expsum;
pub mod linalg;
pub mod monomial;
pub mod numerology;
pub mod poly;
pub mod seeding;
pub mod transversality;

pub use error::{LabError, Result};
pub use exact::Rational;
pub use linalg::{PolyMatrix, RatMatrix};
pub use monomial::{kappa, MonomialSystem};
pub use poly::Poly;
