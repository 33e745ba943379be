pub mod algebra;
pub mod laurent;
pub mod hdcore;
pub mod rings;
pub mod hdkp;
pub mod central;
pub mod numeric;
