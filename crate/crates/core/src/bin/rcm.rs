fn main() {
    std::process::exit(rcm::cli::run(std::env::args_os()));
}
