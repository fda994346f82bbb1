fn main() {
    std::process::exit(mixsynth::cli::run(std::env::args_os()));
}
