fn main() {
    std::process::exit(flatplan::cli::run(std::env::args_os()));
}
