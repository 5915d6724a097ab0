//! Instance generators: the line family, the adaptive 2x2 adversary, the
//! SAT reduction, and seeded random grid instances.

mod line;
mod random;
mod sat;
mod two_by_two;

pub use line::{gen_line, line_closed_forms, line_witness_plan, LineClosedForms};
pub use random::{gen_random, RandomSpec};
pub use sat::{decode_assignment, reduce_sat, Literal, ReductionOutput, SatInstance};
pub use two_by_two::{gen_2x2_adversary, TwoByTwoAdversary};
