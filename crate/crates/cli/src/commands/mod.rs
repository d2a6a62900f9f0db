//! Each command fills a [`RunReport`](crate::report::RunReport) and returns
//! `Ok(Some(err))` when a numeric failure ended it after outputs were written.

pub mod brane;
pub mod diagnose;
pub mod simulate;
pub mod sweep;
