fn main() {
    std::process::exit(emograph::cli::run(std::env::args_os()));
}
