fn main() {
    std::process::exit(excitasim::cli::run(std::env::args_os()));
}
