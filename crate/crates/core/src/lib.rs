pub mod error;
pub mod rational;
pub mod tree;
pub mod word;
pub mod space;
pub mod action;
pub mod report;
pub mod topology;
pub mod kernel;
pub mod star;
pub mod boundary_map;
