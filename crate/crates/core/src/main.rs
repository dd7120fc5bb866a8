fn main() {
    std::process::exit(specreg::cli::run(std::env::args_os()));
}
