//! Bundled example transducers.

use crate::model::{parse_spec, AttSpec, Decl};

pub const A1: &str = include_str!("../corpus/a1.att");
pub const A2: &str = include_str!("../corpus/a2.att");
pub const C0: &str = include_str!("../corpus/c0.att");
pub const P0: &str = include_str!("../corpus/p0.att");
pub const P0C: &str = include_str!("../corpus/p0c.att");
pub const N1: &str = include_str!("../corpus/n1.att");
pub const REV: &str = include_str!("../corpus/rev.att");

pub const ALL: &[(&str, &str)] = &[("a1", A1), ("a2", A2), ("c0", C0), ("p0", P0), ("p0c", P0C), ("n1", N1), ("rev", REV)];

pub fn text(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|x| x.1)
}

/// Parses a bundled att; panics on the (tested) bundled sources only.
pub fn att(name: &str) -> AttSpec {
    match parse_spec(text(name).expect("bundled name")).expect("bundled spec parses") {
        Decl::Att(a) => a,
        _ => panic!("{name} is not an att"),
    }
}
