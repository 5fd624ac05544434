pub mod abox;
pub mod checker;
pub mod cones;
pub mod flatten;
pub mod model;
pub mod present;
pub mod reader;
pub mod store;
pub mod uri;
