fn main() {
    std::process::exit(ionkick::cli::run(std::env::args_os()));
}
