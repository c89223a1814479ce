fn main() {
    std::process::exit(cewave::cli::run(std::env::args_os()));
}
