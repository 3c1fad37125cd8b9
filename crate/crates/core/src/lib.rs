pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod scenarios;
pub mod stepper;
