//! Serde helper: big naturals travel as decimal strings.

use num_bigint::BigUint;
use serde::Serializer;

pub fn big<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}
