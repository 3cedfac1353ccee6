fn main() {
    std::process::exit(markov_bounds::cli::run(std::env::args_os()));
}
