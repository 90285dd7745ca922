pub mod gen;
pub mod ingest;
pub mod run;
pub mod shapley;
pub mod stability;
pub mod sweep;
pub mod verify;
