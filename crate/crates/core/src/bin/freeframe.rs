fn main() {
    std::process::exit(freeframe::cli::run(std::env::args_os()));
}
