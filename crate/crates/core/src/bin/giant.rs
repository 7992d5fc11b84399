fn main() {
    std::process::exit(giant::cli::run(std::env::args_os()));
}
