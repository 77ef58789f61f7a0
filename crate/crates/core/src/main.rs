fn main() {
    std::process::exit(hilbert_kit::cli::run(std::env::args_os()));
}
