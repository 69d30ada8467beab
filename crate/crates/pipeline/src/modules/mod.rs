//! Built-in modules.

mod analysis;
mod config;
mod data;
mod generate;
mod io;
mod modify;
mod plot;

use terrain_core::obstacles::ShapeKind;

use crate::engine::{Ctx, Module, Pipe};
use crate::error::Result;
use crate::registry::Registry;

pub use data::{container_to_values, records_to_container, value_arrays};

type StepFn = fn(&mut Ctx, Pipe) -> Result<Pipe>;

/// A stateless module with one output pipe.
struct Simple(StepFn);

impl Module for Simple {
    fn run(&mut self, ctx: &mut Ctx, pipe: Pipe) -> Result<Vec<Pipe>> {
        Ok(vec![(self.0)(ctx, pipe)?])
    }
}

fn add(r: &mut Registry, name: &str, f: StepFn) {
    r.register(name, move || Box::new(Simple(f)));
}

pub(crate) fn register_all(r: &mut Registry) {
    // grid and control
    add(r, "Extent", config::extent);
    add(r, "Size", config::size);
    add(r, "Location", config::location);
    add(r, "Resolution", config::resolution);
    add(r, "GridSize", config::grid_size);
    add(r, "Set", config::set);
    add(r, "Exit", config::exit);
    add(r, "Print", config::print);
    add(r, "ClearTerrain", config::clear_terrain);
    add(r, "SetDistribution", config::set_distribution);
    add(r, "Sample", config::sample);
    r.register("Seed", || Box::new(config::Seed::default()));

    // generators
    add(r, "Basic", generate::basic);
    add(r, "Octaves", generate::octaves);
    add(r, "Rocks", generate::rocks);
    add(r, "Holes", generate::holes);
    add(r, "Function", generate::function);
    add(r, "Random", generate::random);
    add(r, "AsProbability", generate::as_probability);
    add(r, "AsLookupFor", generate::as_lookup_for);
    add(r, "AsFactor", generate::as_factor);
    add(r, "RemoveDistantObstacles", generate::remove_distant);
    for kind in ShapeKind::ALL {
        r.register(kind.name(), move || Box::new(generate::Shape(kind)));
    }

    // combining and modifiers
    add(r, "Combine", modify::combine);
    add(r, "WeightedSum", modify::weighted_sum);
    add(r, "Stack", modify::stack);
    add(r, "Negate", modify::negate);
    add(r, "Add", modify::add);
    add(r, "Scale", modify::scale);
    add(r, "Absolute", modify::absolute);
    add(r, "Clip", modify::clip);
    add(r, "Smooth", modify::smooth);
    add(r, "Around", modify::around);

    // analysis and calibration
    add(r, "Slope", analysis::slope);
    add(r, "Roughness", analysis::roughness);
    add(r, "CombineRoughness", analysis::combine_roughness);
    add(r, "SetSlope", analysis::set_slope);
    add(r, "SetRoughness", analysis::set_roughness);
    add(r, "FindRocks", analysis::find_rocks);
    add(r, "SurfaceStructure", analysis::surface_structure);

    // files
    add(r, "Save", io::save);
    add(r, "Load", io::load);
    add(r, "SaveObstacles", io::save_obstacles);
    add(r, "LoadObstacles", io::load_obstacles);
    add(r, "SaveData", io::save_data);
    add(r, "LoadData", io::load_data);
    add(r, "ExportObj", io::export_obj);
    add(r, "ExportCsv", io::export_csv);
    r.register("LogData", || Box::new(io::LogData::default()));

    // plots
    add(r, "Plot", plot::plot);
    add(r, "DebugPlot", plot::debug_plot);
    add(r, "PlotObstacles", plot::plot_obstacles);
    add(r, "PlotRocks", plot::plot_obstacles);
    add(r, "PlotScatter", plot::plot_scatter);
    add(r, "PlotHistogram", plot::plot_histogram);
    add(r, "PlotLines", plot::plot_lines);
    add(r, "Hillshade", plot::hillshade);
}
