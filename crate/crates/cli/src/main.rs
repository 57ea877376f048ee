use clap::Parser;

fn main() -> anyhow::Result<()> {
    let args = multihop_cli::cli::Args::parse();
    for path in multihop_cli::cli::run(args)? {
        println!("{}", path.display());
    }
    Ok(())
}
