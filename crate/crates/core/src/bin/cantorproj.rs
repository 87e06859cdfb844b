fn main() {
    std::process::exit(cantorproj::cli::run(std::env::args_os()));
}
