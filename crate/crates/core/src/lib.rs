pub mod batch;
pub mod channel;
pub mod config;
pub mod engine;
pub mod phy_mac;
pub mod scenario;
pub mod stack;
