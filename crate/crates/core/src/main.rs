fn main() {
    std::process::exit(survival::cli::run(std::env::args_os()));
}
