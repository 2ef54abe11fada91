fn main() {
    std::process::exit(dcrm::cli::run(std::env::args_os()));
}
