use crate::{CliError, OutDir};
use srgkit::models::{self, ReproduceError, ReproduceOptions};
use std::time::Instant;

impl From<ReproduceError> for CliError {
    fn from(e: ReproduceError) -> Self {
        match e {
            ReproduceError::Unknown(_) => CliError::Input(e.to_string()),
            ReproduceError::Analysis(a) => a.into(),
            ReproduceError::Sim(s) => s.into(),
        }
    }
}

pub fn run(example: u8, skip_sim: bool, seed: u64, resolution: Option<f64>, out: &mut OutDir) -> Result<i32, CliError> {
    let cells = match resolution {
        Some(r) if r > 0.0 && r < 1.0 => Some((1.0 / r).ceil() as usize),
        Some(r) => return Err(CliError::Input(format!("resolution must lie in (0, 1), got {r}"))),
        None => None,
    };
    let opts = ReproduceOptions { simulate: !skip_sim, seed, cells };
    let mut settings = models::example_settings(example);
    if let Some(c) = cells {
        settings.calc.cells = c;
    }
    out.settings(&serde_json::json!({ "example": example, "simulate": !skip_sim, "seed": seed, "analysis": settings }));
    let t = Instant::now();
    let rep = models::reproduce(example, &opts)?;
    log::info!("example {example} reproduced in {:.2?}", t.elapsed());
    for (tag, report) in &rep.reports {
        out.report(&format!("{tag}_"), report)?;
    }
    for (tag, gain) in &rep.gains {
        out.write_json(&format!("{tag}_gain.json"), gain)?;
    }
    let md = rep.to_markdown();
    print!("{md}");
    out.write("table.md", &md)?;
    out.write("table.csv", &rep.to_csv())?;
    Ok(0)
}
