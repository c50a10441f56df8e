pub mod cli;
pub mod crane;
pub mod error;
pub mod io;
pub mod planner;
pub mod scenario;
pub mod sim;
pub mod steer;
pub mod world;
