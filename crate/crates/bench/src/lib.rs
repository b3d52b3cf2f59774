//! Shared workloads for the criterion benches.

use uplink_core::{allocation, AnalyticEngine, PhyConfig, Scheme, SimConfig};

/// Default distance allocation engine.
pub fn default_engine(scheme: Scheme) -> AnalyticEngine {
    let phy = PhyConfig::default();
    let alloc = allocation(scheme, &phy).expect("default allocation");
    AnalyticEngine::new(&phy, &alloc).expect("default engine")
}

/// One simulated cell at the default device rate.
pub fn default_sim(scheme: Scheme, devices: u32, duration: f64) -> SimConfig {
    let phy = PhyConfig::default();
    let alloc = allocation(scheme, &phy).expect("default allocation");
    SimConfig::new(phy, alloc, devices, 1.0 / 600.0, duration)
}
