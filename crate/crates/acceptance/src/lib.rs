//! Independent oracles and randomized property suites backing the acceptance target.

pub mod oracle;
pub mod props;
