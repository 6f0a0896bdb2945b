//! Holds the `acceptance` test target, which exercises the `dlin` binary and
//! the library oracles end to end.
