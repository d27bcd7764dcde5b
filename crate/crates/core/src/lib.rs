//! Intervals of polynomial-time partial orders over binary words, and the
//! constructions that realise counting functions as interval sizes.

pub mod block;
pub mod catalog;
pub mod cluster;
pub mod constructed;
pub mod divisors;
pub mod error;
pub mod monsat;
pub mod order;
pub mod poly;
pub mod space;
pub mod tm;
pub mod word;

pub use error::{Error, Result};
pub use order::{IntervalSpec, POrder};
pub use poly::Poly;
pub use word::Word;
