fn main() {
    std::process::exit(gabor_rational::cli::run(std::env::args_os()));
}
