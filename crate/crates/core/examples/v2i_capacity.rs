//! Infrastructure capacity needed when relay chains break.

use collabsense::pointprocess::Seed;
use collabsense::v2i::{
    grid_capacity, monte_carlo_lane, single_lane_capacity, v2v_throughput_proxy, LaneMode, LaneParams, SharingMode,
};

fn main() -> collabsense::Result<()> {
    let eta = 5;
    println!("eta = {eta}");
    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "p_s", "ul", "dl_uni", "grid_ul", "all_p_v2i", "v2v"
    );
    for k in 1..10 {
        let p = k as f64 / 10.0;
        let lp = LaneParams::with_eta(eta, p)?;
        let single = single_lane_capacity(&lp)?;
        let grid = grid_capacity(eta, p, SharingMode::SameLane)?;
        let all = grid_capacity(eta, p, SharingMode::AllLanes)?;
        let v2v = v2v_throughput_proxy(&lp, LaneMode::SingleLane, 20_000, Seed::new(1, 0))?;
        println!(
            "{p:>5.1} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            single.c_ul_norm, single.c_dl_unicast_norm, grid.c_ul_norm, all.p_v2i, v2v
        );
    }

    let lp = LaneParams::with_eta(eta, 0.5)?;
    let mc = monte_carlo_lane(&lp, LaneMode::SingleLane, 200_000, Seed::new(2, 0))?;
    let exact = single_lane_capacity(&lp)?;
    println!(
        "\nrelay simulation at p_s=0.5: uplinks {:.4} ± {:.4} (closed form {:.6}), burst p95 {:.0} per km",
        mc.e_n_uplink, mc.se_n_uplink, exact.e_n_uplink, mc.burst_p95
    );
    Ok(())
}
