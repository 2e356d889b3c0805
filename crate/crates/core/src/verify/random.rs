use rand::Rng;

use crate::model::{Field, Problem};

/// Uniform `(-1, 1)` values on the active nodes of the given age rows.
pub fn random_field<R: Rng>(problem: &Problem, rng: &mut R, rows: std::ops::Range<usize>) -> Field {
    let mut u = problem.zero_field();
    for j in rows {
        for i in 0..problem.lattice().nx() {
            if problem.weights().is_active(i) {
                u[[j, i]] = rng.gen_range(-1.0..1.0);
            }
        }
    }
    u
}
