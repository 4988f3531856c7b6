fn main() {
    std::process::exit(veemap::cli::run(std::env::args_os()));
}
