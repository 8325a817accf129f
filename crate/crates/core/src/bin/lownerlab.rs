fn main() {
    std::process::exit(lownerlab::cli::run(std::env::args_os()));
}
