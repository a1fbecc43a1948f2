use clap::Parser;

fn main() {
    let args = qhyper::cli::Args::parse();
    std::process::exit(qhyper::cli::main_with_args(args));
}
