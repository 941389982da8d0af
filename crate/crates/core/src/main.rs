fn main() {
    std::process::exit(x1jacobi::cli::run(std::env::args_os()));
}
