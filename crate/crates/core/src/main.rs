use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leo_channel::doppler::{self, Ephemeris, PassError};
use leo_channel::frames::{Geodetic, NutationModel};
use leo_channel::propagator::GravityConstants;
use leo_channel::sim::{self, format_g9, SimConfig, SimError, Simulation};
use leo_channel::time;

#[derive(Parser)]
#[command(name = "leo-channel", version, about = "LEO satellite-to-ground ray-tracing channel simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a full pass and write CSV outputs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only find the pass and list the step schedule.
        #[arg(long)]
        steps_only: bool,
        /// Also write the ray geometry of every path.
        #[arg(long)]
        dump_paths: bool,
    },
    /// Find the next pass of a satellite over a site.
    Pass {
        #[arg(long)]
        tle: PathBuf,
        /// latitude,longitude (deg),altitude (m)
        #[arg(long, allow_hyphen_values = true)]
        site: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        min_elev: f64,
        /// Scan step, s.
        #[arg(long, default_value_t = 10.0)]
        step: f64,
        /// Satellite name in a multi-entry TLE file.
        #[arg(long)]
        name: Option<String>,
    },
    /// Trace a single instant, minutes after the start of the pass.
    TraceOnce {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        at_minute: f64,
    },
}

fn parse_site(s: &str) -> Result<Geodetic, SimError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| SimError::Config(format!("--site {s:?}: {e}")))?;
    match parts[..] {
        [lat, lon, alt_m] => Ok(Geodetic::new(lat, lon, alt_m * 1e-3)),
        [lat, lon] => Ok(Geodetic::new(lat, lon, 0.0)),
        _ => Err(SimError::Config(format!("--site expects lat,lon,alt; got {s:?}"))),
    }
}

fn simulate(config: PathBuf, out: Option<PathBuf>, steps_only: bool, dump_paths: bool) -> Result<(), SimError> {
    let cfg = SimConfig::load(&config)?;
    let out_dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    let simulation = Simulation::prepare(cfg)?;
    let files = if steps_only {
        let steps = simulation
            .step_times()
            .into_iter()
            .map(|t| Ok((t, elevation_at(&simulation, t)?)))
            .collect::<Result<Vec<_>, SimError>>()?;
        sim::emit_steps(&simulation.ephemeris.tle.name, &simulation.window, &steps, &out_dir)?
    } else {
        let report = simulation.run()?;
        sim::emit_outputs(&report, &out_dir, dump_paths)?
    };
    for f in files.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn elevation_at(simulation: &Simulation, t: time::Instant) -> Result<f64, SimError> {
    let sat = simulation.satellite_local(t)?;
    let s = sat.position - simulation.receiver();
    Ok(s.z.atan2((s.x * s.x + s.y * s.y).sqrt()))
}

fn pass(tle: PathBuf, site: &str, min_elev: f64, step: f64, name: Option<String>) -> Result<(), SimError> {
    let site = parse_site(site)?;
    let text = std::fs::read_to_string(&tle).map_err(|e| SimError::Config(format!("{}: {e}", tle.display())))?;
    let tle = sim::select_tle(&text, name.as_deref())?;
    let eph = Ephemeris::new(tle, &GravityConstants::wgs72(), NutationModel::Truncated)
        .map_err(|e| SimError::Config(e.to_string()))?;
    let start = eph.epoch();
    let w = doppler::find_pass(&eph, &site, min_elev.to_radians(), step, start, 2e9).map_err(|e| match e {
        PassError::NoPassFound { .. } => SimError::NoPass(e),
        PassError::Domain(m) => SimError::Config(m),
        other => SimError::Runtime { t: time::iso8601(start), msg: other.to_string() },
    })?;
    println!("satellite          {}", eph.tle.name);
    println!("t_start            {}", time::iso8601(w.t_start));
    println!("t0                 {}", time::iso8601(w.t0));
    println!("t_end              {}", time::iso8601(w.t_end));
    println!("theta_max_deg      {}", format_g9(w.theta_max.to_degrees()));
    println!("gamma_t0_deg       {}", format_g9(w.gamma_t0.to_degrees()));
    println!("t_du_scan_min      {}", format_g9(w.t_du_min));
    println!("t_du_analytic_min  {}", format_g9(w.t_du_analytic_min));
    Ok(())
}

fn trace_once(config: PathBuf, at_minute: f64) -> Result<(), SimError> {
    let simulation = Simulation::prepare(SimConfig::load(&config)?)?;
    let t = time::add_seconds(simulation.window.t_start, at_minute * 60.0);
    let snap = simulation.snapshot(t)?;
    println!("# t = {}, elevation {} deg", time::iso8601(t), format_g9(snap.elevation_deg));
    println!("# total power {} dBm, rms delay spread {} ns", format_g9(snap.total_power_dbm), format_g9(snap.rms_delay_spread_ns));
    println!("path_id,bounce_count,faces,delay_us,power_dbm,doppler_hz");
    for (k, p) in snap.paths.iter().enumerate() {
        let faces: Vec<String> = p.path.face_sequence().iter().map(|f| f.to_string()).collect();
        println!(
            "{k},{},{},{},{},{}",
            p.path.bounce_count,
            faces.join(" "),
            format_g9(p.delay_us),
            format_g9(p.power_dbm),
            format_g9(p.doppler_hz)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, steps_only, dump_paths } => simulate(config, out, steps_only, dump_paths),
        Command::Pass { tle, site, min_elev, step, name } => pass(tle, &site, min_elev, step, name),
        Command::TraceOnce { config, at_minute } => trace_once(config, at_minute),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
