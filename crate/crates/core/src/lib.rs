pub mod demo;
pub mod linalg;
pub mod par;
pub mod simulator;
pub mod synthesis;
pub mod topology;
