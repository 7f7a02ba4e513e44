use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hockey_formation::density::build_weight_field;
use hockey_formation::engine::{
    run_with, scene_frame_with_velocities, SimError, SimParams, SimTrace,
};
use hockey_formation::field::make_grid;
use hockey_formation::render::{render_svg, SceneView};
use hockey_formation::scene::{load_scene, SceneError};
use hockey_formation::trace::{write_diagnostics, write_trace};

#[derive(Parser)]
#[command(
    name = "hockey-formation",
    version,
    about = "Coverage-control defensive formations for ice hockey"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scene and write trace.csv, diagnostics.csv and optional SVG frames.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p_gain: f64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long, default_value_t = 0.25)]
        grid_res: f64,
        #[arg(long)]
        out: PathBuf,
        /// Render every Nth step as SVG (0 disables).
        #[arg(long, default_value_t = 0)]
        svg_every: usize,
        #[arg(long)]
        threads: Option<usize>,
        /// Disable the pass-cut barrier.
        #[arg(long)]
        no_pass_cut: bool,
    },
    /// Render the weight field of one scene frame.
    Weightfield {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p_gain: f64,
        #[arg(long, default_value_t = 0.25)]
        grid_res: f64,
        /// Also dump the field as x,y,value CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check a scene file and report the first problem found.
    Validate {
        #[arg(long)]
        scene: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Scene(s) => s.into(),
            SimError::Params(_) | SimError::Field(_) => Failure::Validation(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn simulate(
    scene: PathBuf,
    params: SimParams,
    out: PathBuf,
    svg_every: usize,
) -> Result<(), Failure> {
    let scene = load_scene(&scene)?;
    fs::create_dir_all(&out)?;
    let mut trace = SimTrace::default();
    let mut render_err = None;
    let mut index = 0usize;
    run_with(&scene, &params, |frame, outcome| {
        if svg_every > 0 && index.is_multiple_of(svg_every) && render_err.is_none() {
            let current: Vec<_> = outcome
                .record
                .positions
                .iter()
                .enumerate()
                .map(|(i, &position)| hockey_formation::DefenderState {
                    id: i + 1,
                    position,
                })
                .collect();
            let view = SceneView {
                frame,
                defenders: &current,
                field: &outcome.field,
                partition: Some(&outcome.partition),
                lanes: &outcome.lanes,
            };
            if let Err(e) = render_svg(&view, out.join(format!("frame_{index:05}.svg"))) {
                render_err = Some(e);
            }
        }
        trace.records.push(outcome.record.clone());
        index += 1;
    })?;
    if let Some(e) = render_err {
        return Err(e.into());
    }
    write_trace(&trace, out.join("trace.csv"))?;
    write_diagnostics(&trace, out.join("diagnostics.csv"))?;
    eprintln!(
        "{}: {} steps written to {}",
        scene.metadata.name,
        trace.records.len(),
        out.display()
    );
    Ok(())
}

fn weightfield(
    scene: PathBuf,
    frame: usize,
    params: SimParams,
    out: PathBuf,
    csv: Option<PathBuf>,
) -> Result<(), Failure> {
    let scene = load_scene(&scene)?;
    params.validate()?;
    if frame >= scene.frames.len() {
        return Err(Failure::Validation(format!(
            "frame {frame} out of range, scene has {}",
            scene.frames.len()
        )));
    }
    let snapshot = scene_frame_with_velocities(&scene, frame, params.offense_speed_cap);
    let grid = make_grid(params.field, params.grid_resolution).map_err(SimError::from)?;
    let field = build_weight_field(&snapshot, &params.density, &grid).map_err(SimError::from)?;
    render_svg(
        &SceneView {
            frame: &snapshot,
            defenders: &[],
            field: &field,
            partition: None,
            lanes: &[],
        },
        &out,
    )?;
    if let Some(path) = csv {
        field.write_csv(std::io::BufWriter::new(fs::File::create(path)?))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes count as validation errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate {
            scene,
            p_gain,
            dt,
            grid_res,
            out,
            svg_every,
            threads,
            no_pass_cut,
        } => {
            let params = SimParams {
                dt,
                grid_resolution: grid_res,
                threads,
                pass_cut: !no_pass_cut,
                ..SimParams::default()
            }
            .with_p_gain(p_gain);
            simulate(scene, params, out, svg_every)
        }
        Command::Weightfield {
            scene,
            frame,
            out,
            p_gain,
            grid_res,
            csv,
        } => {
            let params = SimParams {
                grid_resolution: grid_res,
                ..SimParams::default()
            }
            .with_p_gain(p_gain);
            weightfield(scene, frame, params, out, csv)
        }
        Command::Validate { scene } => load_scene(&scene)
            .map(|s| {
                println!(
                    "{}: ok ({} frames, {} attackers, {:.2} s)",
                    s.metadata.name,
                    s.frames.len(),
                    s.frames[0].players.len(),
                    s.duration()
                );
            })
            .map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
