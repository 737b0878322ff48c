use clap::Parser;

fn main() {
    let args = qrlab_cli::Args::parse();
    std::process::exit(qrlab_cli::run(&args));
}
