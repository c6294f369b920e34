fn main() {
    std::process::exit(ballseries::cli::run(std::env::args_os()));
}
