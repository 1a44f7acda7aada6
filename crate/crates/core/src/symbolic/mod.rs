//! Symbols of iterated integrals and exact comparison modulo products.

pub mod engine;
pub mod factor;
pub mod lie;
pub mod tensor;

pub use engine::{check_at, DEFAULT_SEED, equals_mod_delta, equals_mod_sh, multiplicatively_independent, specialize, verify, Expr, Level, Specialization, Verdict};
pub use tensor::{delta_cobracket, pi_project, symbol_of_hexpr, symbol_of_hterm, wedge, Atom, Tensor, Wedge};
