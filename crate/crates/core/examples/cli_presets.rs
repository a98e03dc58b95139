//! Running command-line presets from code, with overrides.

use collabsense::cli::{execute, Command};
use serde_json::json;

fn main() {
    let runs = [
        (
            Command::V2i,
            json!({ "mode": "grid", "p_s": [0.2, 0.5, 0.8], "trials": 5000 }),
        ),
        (Command::V2iAllLanes, json!({ "p_s": [0.1, 0.6, 0.9] })),
        (
            Command::ObstructionSweep,
            json!({ "lambda_total": [0.004, 0.01, 0.02] }),
        ),
        (Command::GammaCoverage, json!({ "preset": "fig8a", "p_s": [0.2] })),
    ];
    for (cmd, cfg) in runs {
        match execute(cmd, cfg) {
            Ok(out) => {
                println!("# {}", cmd.name());
                print!("{}", String::from_utf8_lossy(&out.table.to_csv()));
            }
            Err(e) => eprintln!("{}", e.to_json_line()),
        }
    }
}
