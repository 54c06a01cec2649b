//! The fixed zig-zag enumeration of the integers: 0, -1, 1, -2, 2, ...
//!
//! Positions are 1-based. Every ordering decision in the crate (canonical
//! collection indices, canonical enumerations, witness construction) is
//! expressed in terms of this bijection.

/// The integer at 1-based position `pos`.
pub fn value_at(pos: u64) -> i64 {
    debug_assert!(pos >= 1);
    if pos == 1 {
        0
    } else if pos % 2 == 0 {
        -((pos / 2) as i64)
    } else {
        ((pos - 1) / 2) as i64
    }
}

/// The 1-based position of `x` in the spiral order.
pub fn position_of(x: i64) -> u64 {
    if x == 0 {
        1
    } else if x < 0 {
        2 * x.unsigned_abs()
    } else {
        2 * (x as u64) + 1
    }
}

/// All integers in spiral order.
pub fn values() -> impl Iterator<Item = i64> {
    (1u64..).map(value_at)
}
