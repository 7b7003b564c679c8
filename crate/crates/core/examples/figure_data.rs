//! Regenerate the data behind every figure panel listed in
//! `figures/recipes.toml`, one CSV per panel.
//!
//!     cargo run --release --example figure_data -- out/

use std::path::{Path, PathBuf};

use clap::Parser;
use clickstats::cli::{build_table, command_name, render, Cli, Format};
use serde::Deserialize;

#[derive(Deserialize)]
struct Recipes {
    figure: Vec<Recipe>,
}

#[derive(Deserialize)]
struct Recipe {
    id: String,
    caption: String,
    args: Vec<String>,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "figure-data".into()),
    );
    std::fs::create_dir_all(&out)?;
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("figures/recipes.toml");
    let recipes: Recipes = toml::from_str(&std::fs::read_to_string(path)?)?;
    for r in recipes.figure {
        let cli = Cli::try_parse_from(
            std::iter::once("clickstats".to_string()).chain(r.args.iter().cloned()),
        )?;
        let table = build_table(&cli)?;
        let file = out.join(format!("{}.csv", r.id));
        std::fs::write(
            &file,
            render(&table, Format::Csv, command_name(&cli.command))?,
        )?;
        println!(
            "{:>3}  {:>5} rows  {}  ({})",
            r.id,
            table.rows.len(),
            file.display(),
            r.caption
        );
    }
    Ok(())
}
