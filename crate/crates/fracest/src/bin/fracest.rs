fn main() { std::process::exit(fracest::cli::run()); }
