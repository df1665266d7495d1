//! QAOA MaxCut cost landscape over the (u, v) Fourier parameters and its
//! SSIM against the noiseless landscape. Writes the landscapes as CSV into
//! the temp directory.

use quell::bench::{run_benchmark, BenchId, PipelineConfig, RunSpec};
use quell::noise::DeviceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/heavy_hex_16.json"))?;
    let mut spec = RunSpec::new(BenchId::Qaoa, 1000, 8);
    spec.qaoa_grid = (10, 10);
    let dir = std::env::temp_dir();
    for cfg in [PipelineConfig::DEFAULT, PipelineConfig::SUPPRESSED] {
        let r = run_benchmark(&spec, &cfg, &dev)?.report;
        let m = &r.metrics.summary;
        println!(
            "{:<10} SSIM {:.3}  max cost {:.3} (ideal {:.3})  {:.1}s",
            cfg.name(),
            m["ssim"],
            m["max_cost"],
            m["ideal_max_cost"],
            r.wall_time_s
        );
        if let Some((ideal, measured)) = r.qaoa_landscapes()? {
            ideal.save_csv(dir.join("qaoa_ideal.csv"))?;
            measured.save_csv(dir.join(format!("qaoa_{}.csv", cfg.name())))?;
        }
    }
    println!("landscapes written to {}", dir.display());
    Ok(())
}
