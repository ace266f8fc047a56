//! Shared fixtures for the criterion benchmarks.

use nsnewton::field::{generate_instance, random_start};
use nsnewton::{AvvfInstance, SpherePoint};

/// Instance at the default density (floored for small `n`) plus a
/// random start, both seeded.
pub fn fixture(n: usize, seed: u64) -> (AvvfInstance, SpherePoint) {
    let inst = generate_instance(n, 0.003, seed).expect("fixture instance");
    let p0 = random_start(n, seed ^ 0xA5A5_A5A5).expect("fixture start");
    (inst, p0)
}
