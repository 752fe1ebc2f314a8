fn main() {
    std::process::exit(polydensity::cli::run(std::env::args_os()));
}
