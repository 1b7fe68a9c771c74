fn main() {
    std::process::exit(schmidt_core::cli::run(std::env::args_os()));
}
