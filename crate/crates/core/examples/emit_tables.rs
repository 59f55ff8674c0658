// Runs the CLI in-process and writes CSV tables plus a manifest.

pub fn run_example() -> discordnet::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("discordnet-example-{}", std::process::id()));
    let dir_s = dir.to_string_lossy().into_owned();
    let args = ["discordnet", "--out", &dir_s, "--inner-budget", "fast", "heatmap", "--points", "7"];
    let code = discordnet::cli::run(args, &mut std::io::sink());
    if code != 0 {
        return Err(discordnet::Error::Config(format!("cli exited with {code}")));
    }
    Ok(dir)
}

fn main() -> discordnet::Result<()> {
    let dir = run_example()?;
    let mut names: Vec<_> = std::fs::read_dir(&dir)?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    names.sort();
    println!("wrote {} files to {}: {names:?}", names.len(), dir.display());
    Ok(())
}
