pub mod diagnose;
pub mod gradcheck;
pub mod run;
pub mod sweep;
