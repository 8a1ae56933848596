//! Hand-built regression instances and seeded test corpora.

use crate::error::Result;
use crate::instance::{generate_instance, GeneratorParams, Instance, Node, SchoolSpec, StopSpec};

/// Shipped JSON copy of [`merge_tradeoff`].
pub const MERGE_TRADEOFF_JSON: &str = include_str!("../fixtures/merge_tradeoff.json");

/// Three schools where rewarding assignments at full weight costs a bus.
///
/// - School B (bell 13:00) has two 10-student stops on opposite sides.
///   Two single-stop trips take 1620 s in total; one trip through both
///   takes 1800 s. Every B trip can reach school C in time.
/// - School C (bell 14:00) has two 40-student stops, so it needs two trips.
/// - School A (bell 12:45) has one stop. Its trip can reach C but not B.
///
/// With the assignment reward equal to the per-trip cost, a B trip that
/// feeds C is free, so B splits into two trips that use up both of C's
/// trips and A's trip needs its own bus: 3 buses. With the reward below
/// the per-trip cost, B merges into one trip, A feeds C's other trip, and
/// two buses suffice.
pub fn merge_tradeoff() -> Instance {
    let school = |id: &str, x, y, bell| SchoolSpec {
        id: id.into(),
        node: Node::new(x, y),
        bell_time: bell,
    };
    let stop = |id: &str, x, y, students, school: &str| StopSpec {
        id: id.into(),
        node: Node::new(x, y),
        students,
        school: school.into(),
    };
    Instance::new(
        vec![
            school("A", 20_000, 80_000, 45_900),
            school("B", 50_000, 50_000, 46_800),
            school("C", 43_870, 52_000, 50_400),
        ],
        vec![
            stop("a1", 20_000, 78_000, 10, "A"),
            stop("b1", 43_870, 50_000, 10, "B"),
            stop("b2", 85_933, 50_000, 10, "B"),
            stop("c1", 43_870, 53_000, 40, "C"),
            stop("c2", 43_870, 51_000, 40, "C"),
        ],
        Node::new(52_800, 52_800),
        66,
        20.0,
        105_600,
    )
    .expect("fixture is valid")
}

/// Two schools with 2 to 6 stops in total on a 10-mile square, with a bus
/// capacity between 20 and 40 so a school needs one or two trips.
pub fn tiny_instance(seed: u64) -> Result<Instance> {
    let stops = 2 + (seed % 5) as usize;
    let params = GeneratorParams {
        square_side: 52_800,
        capacity: 20 + (seed % 3) as u32 * 10,
        ..GeneratorParams::default()
    };
    let inst = generate_instance(2, stops, seed, &params)?;
    let max_mnt = (0..2).map(|k| inst.mnt(k)).max().unwrap_or(0);
    if max_mnt > 2 {
        // Widen the bus until every school fits in two trips.
        let need = (0..2).map(|k| inst.school_students(k).div_ceil(2)).max().unwrap_or(1);
        return inst.with_capacity(need as u32);
    }
    Ok(inst)
}

/// Small varied instances: 1 to 4 schools, up to 12 stops, capacity 20 to 66.
pub fn fuzz_instance(seed: u64) -> Result<Instance> {
    let schools = 1 + (seed % 4) as usize;
    let stops = schools + (seed / 4 % 9) as usize;
    let params = GeneratorParams {
        square_side: 52_800,
        capacity: [20, 30, 45, 66][(seed / 36 % 4) as usize],
        ..GeneratorParams::default()
    };
    generate_instance(schools, stops, seed, &params)
}
