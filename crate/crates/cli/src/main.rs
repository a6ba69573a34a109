use clap::Parser;

fn main() {
    let cli = posit_div_cli::Cli::parse();
    std::process::exit(posit_div_cli::run_cli(cli));
}
