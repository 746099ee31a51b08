fn main() {
    std::process::exit(bartforge::cli::run(std::env::args_os()));
}
